//! Candidate APIs for a recommendation point.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::ast::{CollectionKind, LiteralKind};
use crate::frontend::{Expr, RecommendationPoint, SourceContext, Stmt, StmtKind, HOLE};

pub const STDLIB_FORMAT_VERSION: u32 = 1;

/// Stub name the repair step may introduce.
const HOLE_TARGET: &str = "__hole_target__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    InferredType,
    ScopeMethod,
    ImportedLibrary,
    StandardLibrary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApiCandidate {
    pub name: String,
    pub source: CandidateSource,
    pub owner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub point: RecommendationPoint,
    pub candidates: Vec<ApiCandidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.candidates.iter().any(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.name.as_str())
    }
}

/// Public callables of standard modules and methods of builtin types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdlibIndex {
    pub format_version: u32,
    /// Interpreter version the snapshot was taken from.
    pub python: String,
    pub modules: BTreeMap<String, Vec<String>>,
    pub types: BTreeMap<String, Vec<String>>,
}

impl StdlibIndex {
    pub fn from_json(json: &str) -> Result<Self> {
        let idx: StdlibIndex = serde_json::from_str(json)?;
        if idx.format_version != STDLIB_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: idx.format_version.to_string(),
                expected: STDLIB_FORMAT_VERSION.to_string(),
            });
        }
        Ok(idx)
    }

    /// The snapshot shipped with the crate.
    pub fn bundled() -> &'static StdlibIndex {
        static INDEX: OnceLock<StdlibIndex> = OnceLock::new();
        INDEX.get_or_init(|| {
            StdlibIndex::from_json(include_str!("../data/stdlib_index.json")).expect("shipped stdlib index is valid")
        })
    }
}

/// Callables found in ingested project files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectIndex {
    /// Owner (module, or `module.Class` for methods) to the names it defines.
    pub defs: BTreeMap<String, BTreeSet<String>>,
    /// Imported module to the attributes called on it anywhere in the corpus.
    pub external: BTreeMap<String, BTreeSet<String>>,
}

/// Dotted module name of a source path: `pkg/mod.py` is `pkg.mod`.
pub fn module_name(file_id: &str) -> String {
    let stem = file_id.strip_suffix(".py").unwrap_or(file_id);
    let dotted = stem.replace(['/', '\\'], ".");
    dotted.strip_suffix(".__init__").unwrap_or(&dotted).to_string()
}

impl ProjectIndex {
    pub fn add_file(&mut self, file_id: &str, module: &[Stmt]) {
        let owner = module_name(file_id);
        for (name, class) in definitions(module) {
            let key = match class {
                Some(c) => format!("{owner}.{c}"),
                None => owner.clone(),
            };
            self.defs.entry(key).or_default().insert(name);
        }
        let aliases = import_aliases(module);
        for s in module {
            s.walk(&mut |s| {
                for e in s.exprs() {
                    e.walk(&mut |e| {
                        if let Expr::Call { func, .. } = e {
                            if let Expr::Attribute { value, attr } = func.as_ref() {
                                if let Some(m) = value.dotted().and_then(|d| resolve_alias(&aliases, &d)) {
                                    self.external.entry(m).or_default().insert(attr.clone());
                                }
                            }
                        }
                    });
                }
            });
        }
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty() && self.external.is_empty()
    }

    pub fn merge(&mut self, other: &ProjectIndex) {
        for (k, v) in &other.defs {
            self.defs.entry(k.clone()).or_default().extend(v.iter().cloned());
        }
        for (k, v) in &other.external {
            self.external.entry(k.clone()).or_default().extend(v.iter().cloned());
        }
    }
}

/// Every function and class defined in `module`, with the class it sits in.
fn definitions(module: &[Stmt]) -> Vec<(String, Option<String>)> {
    fn go(stmts: &[Stmt], class: Option<&str>, out: &mut Vec<(String, Option<String>)>) {
        for s in stmts {
            match &s.kind {
                StmtKind::FunctionDef { name, body, .. } => {
                    out.push((name.clone(), class.map(String::from)));
                    go(body, None, out);
                }
                StmtKind::ClassDef { name, body, .. } => {
                    out.push((name.clone(), class.map(String::from)));
                    go(body, Some(name), out);
                }
                _ => {
                    for b in s.blocks() {
                        go(b, class, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(module, None, &mut out);
    out.retain(|(n, _)| n != HOLE_TARGET);
    out
}

/// Local name to the module it refers to, plus every imported module name.
fn import_aliases(module: &[Stmt]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for s in module {
        s.walk(&mut |s| match &s.kind {
            StmtKind::Import(names) => {
                for a in names {
                    match &a.asname {
                        Some(local) => out.insert(local.clone(), a.name.clone()),
                        None => {
                            let head = a.name.split('.').next().unwrap_or(&a.name);
                            out.insert(head.to_string(), head.to_string())
                        }
                    };
                }
            }
            StmtKind::ImportFrom { module, level, names } => {
                let base = format!("{}{}", ".".repeat(*level as usize), module.as_deref().unwrap_or(""));
                for a in names.iter().filter(|a| a.name != "*") {
                    let full = if base.ends_with('.') || base.is_empty() {
                        format!("{base}{}", a.name)
                    } else {
                        format!("{base}.{}", a.name)
                    };
                    out.insert(a.asname.clone().unwrap_or_else(|| a.name.clone()), full);
                }
            }
            _ => {}
        });
    }
    out
}

fn resolve_alias(aliases: &BTreeMap<String, String>, dotted: &str) -> Option<String> {
    let (head, rest) = match dotted.split_once('.') {
        Some((h, r)) => (h, Some(r)),
        None => (dotted, None),
    };
    let base = aliases.get(head)?;
    Some(match rest {
        Some(r) => format!("{base}.{r}"),
        None => base.clone(),
    })
}

/// Modules whose exports are visible to the file, in import order.
fn imported_modules(module: &[Stmt]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |m: String| {
        if !m.is_empty() && !out.contains(&m) {
            out.push(m);
        }
    };
    for s in module {
        s.walk(&mut |s| match &s.kind {
            StmtKind::Import(names) => {
                for a in names {
                    let parts: Vec<&str> = a.name.split('.').collect();
                    for k in 1..=parts.len() {
                        push(parts[..k].join("."));
                    }
                }
            }
            StmtKind::ImportFrom { module, level, names } => {
                let base = format!("{}{}", ".".repeat(*level as usize), module.as_deref().unwrap_or(""));
                push(base.clone());
                for a in names.iter().filter(|a| a.name != "*") {
                    let sep = if base.ends_with('.') || base.is_empty() { "" } else { "." };
                    push(format!("{base}{sep}{}", a.name));
                }
            }
            _ => {}
        });
    }
    out
}

/// Pluggable receiver type inference.
pub trait TypeInference: Send + Sync {
    fn infer_type(&self, ctx: &SourceContext, receiver: &Expr) -> Option<String>;
}

/// Literals, builtin constructors, and names last bound to one of those.
#[derive(Debug, Clone, Copy, Default)]
pub struct LiteralInference;

const CONSTRUCTORS: &[&str] = &[
    "str", "bytes", "bytearray", "list", "dict", "set", "frozenset", "tuple", "int", "float", "complex",
];

const MAX_ALIAS_DEPTH: usize = 4;

impl TypeInference for LiteralInference {
    fn infer_type(&self, ctx: &SourceContext, receiver: &Expr) -> Option<String> {
        let chain = scope_chain(&ctx.module);
        infer_expr(receiver, &chain, 0)
    }
}

pub fn infer_type(ctx: &SourceContext, receiver: &Expr) -> Option<String> {
    LiteralInference.infer_type(ctx, receiver)
}

struct Scope<'a> {
    body: &'a [Stmt],
    params: &'a [String],
    is_class: bool,
}

/// Scopes enclosing the end of the (truncated) module, outermost first.
fn scope_chain(module: &[Stmt]) -> Vec<Scope<'_>> {
    let mut chain = vec![Scope {
        body: module,
        params: &[],
        is_class: false,
    }];
    let mut current = module.last();
    while let Some(s) = current {
        current = match &s.kind {
            StmtKind::FunctionDef { params, body, .. } => {
                chain.push(Scope {
                    body,
                    params,
                    is_class: false,
                });
                body.last()
            }
            StmtKind::ClassDef { body, .. } => {
                chain.push(Scope {
                    body,
                    params: &[],
                    is_class: true,
                });
                body.last()
            }
            _ => s.blocks().into_iter().rev().find(|b| !b.is_empty()).and_then(|b| b.last()),
        };
    }
    chain
}

fn mentions_hole(s: &Stmt) -> bool {
    let mut found = false;
    for e in s.exprs() {
        e.walk(&mut |e| found |= e.is_hole());
    }
    found
}

fn binds(target: &Expr, name: &str) -> bool {
    let mut hit = false;
    target.walk(&mut |e| hit |= matches!(e, Expr::Name(n) if n == name));
    hit
}

/// Visits statements of one scope: nested blocks, but not the bodies of
/// nested functions and classes.
fn walk_scope<'a>(body: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        if !matches!(s.kind, StmtKind::FunctionDef { .. } | StmtKind::ClassDef { .. }) {
            for b in s.blocks() {
                walk_scope(b, f);
            }
        }
    }
}

/// The expression last bound to `name` in a scope (outer `None`: not bound;
/// inner `None`: bound to something without a usable expression).
fn last_binding<'a>(body: &'a [Stmt], name: &str) -> Option<Option<&'a Expr>> {
    let mut found = None;
    walk_scope(body, &mut |s| {
        if mentions_hole(s) {
            return;
        }
        match &s.kind {
            StmtKind::Assign { targets, value } => {
                for t in targets {
                    match t {
                        Expr::Name(n) if n == name => found = Some(Some(value)),
                        _ if binds(t, name) => found = Some(None),
                        _ => {}
                    }
                }
            }
            StmtKind::For { target, .. } if binds(target, name) => found = Some(None),
            StmtKind::With { items, .. } => {
                for (e, t) in items {
                    match t {
                        Some(Expr::Name(n)) if n == name => found = Some(Some(e)),
                        Some(t) if binds(t, name) => found = Some(None),
                        _ => {}
                    }
                }
            }
            StmtKind::FunctionDef { name: n, .. } | StmtKind::ClassDef { name: n, .. } if n == name => {
                found = Some(None)
            }
            StmtKind::Import(names) | StmtKind::ImportFrom { names, .. }
                if names
                    .iter()
                    .any(|a| a.asname.as_deref().unwrap_or_else(|| a.name.split('.').next().unwrap_or("")) == name) =>
            {
                found = Some(None)
            }
            StmtKind::Try { handlers, .. } if handlers.iter().any(|h| h.name.as_deref() == Some(name)) => {
                found = Some(None)
            }
            _ => {}
        }
    });
    found
}

fn lookup<'a>(chain: &[Scope<'a>], name: &str) -> Option<Option<&'a Expr>> {
    let innermost = chain.len() - 1;
    for (i, scope) in chain.iter().enumerate().rev() {
        if scope.is_class && i != innermost {
            continue;
        }
        if let Some(b) = last_binding(scope.body, name) {
            return Some(b);
        }
        if scope.params.iter().any(|p| p == name) {
            return Some(None);
        }
    }
    None
}

fn infer_expr(e: &Expr, chain: &[Scope<'_>], depth: usize) -> Option<String> {
    match e {
        Expr::Literal(k) => match k {
            LiteralKind::Str => Some("str"),
            LiteralKind::Bytes => Some("bytes"),
            LiteralKind::Int => Some("int"),
            LiteralKind::Float => Some("float"),
            LiteralKind::Complex => Some("complex"),
            LiteralKind::Bool | LiteralKind::None | LiteralKind::Ellipsis => None,
        }
        .map(String::from),
        Expr::Collection { kind, .. } | Expr::Comprehension { kind, .. } => match kind {
            CollectionKind::List => Some("list".into()),
            CollectionKind::Tuple if matches!(e, Expr::Collection { .. }) => Some("tuple".into()),
            CollectionKind::Set => Some("set".into()),
            CollectionKind::Dict => Some("dict".into()),
            _ => None,
        },
        Expr::Call { func, .. } => match func.as_ref() {
            Expr::Name(n) if n == "open" => Some("file".into()),
            Expr::Name(n) if CONSTRUCTORS.contains(&n.as_str()) => Some(n.clone()),
            _ => None,
        },
        Expr::Name(n) if depth < MAX_ALIAS_DEPTH => {
            // A bound name is resolved against the same chain, which is
            // close enough for aliases.
            infer_expr(lookup(chain, n)??, chain, depth + 1)
        }
        Expr::NamedExpr { value, .. } => infer_expr(value, chain, depth + 1),
        _ => None,
    }
}

fn is_dunder(name: &str) -> bool {
    name.len() > 4 && name.starts_with("__") && name.ends_with("__")
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_alphabetic())
        && chars.all(|c| c == '_' || c.is_alphanumeric())
}

/// Everything candidate generation needs from a context, independent of the
/// indexes a model carries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateQuery {
    pub inferred_type: Option<String>,
    /// Functions and classes defined before the point, with their class.
    pub scope: Vec<(String, Option<String>)>,
    pub imports: Vec<String>,
    /// Receiver names a class (or `super()`), so dunders stay in.
    pub class_receiver: bool,
}

impl CandidateQuery {
    pub fn from_context(ctx: &SourceContext, inference: &dyn TypeInference) -> Self {
        let scope = definitions(&ctx.module);
        let class_receiver = match &ctx.receiver {
            Expr::Call { func, .. } => matches!(func.as_ref(), Expr::Name(n) if n == "super"),
            Expr::Name(n) => {
                n == "cls"
                    || CONSTRUCTORS.contains(&n.as_str())
                    || n.starts_with(|c: char| c.is_uppercase())
                    || scope.iter().any(|(d, _)| d == n)
            }
            Expr::Attribute { attr, .. } => attr.starts_with(|c: char| c.is_uppercase()),
            _ => false,
        };
        CandidateQuery {
            inferred_type: inference.infer_type(ctx, &ctx.receiver),
            scope,
            imports: imported_modules(&ctx.module),
            class_receiver,
        }
    }

    pub fn generate(
        &self,
        point: &RecommendationPoint,
        stdlib: &StdlibIndex,
        project: &ProjectIndex,
    ) -> Result<CandidateSet> {
        self.generate_without(point, stdlib, project, None)
    }

    /// Like [`generate`](Self::generate), ignoring project definitions owned
    /// by `own_module`: a training file must not see its own later code.
    pub fn generate_without(
        &self,
        point: &RecommendationPoint,
        stdlib: &StdlibIndex,
        project: &ProjectIndex,
        own_module: Option<&str>,
    ) -> Result<CandidateSet> {
        let foreign = |owner: &str| match own_module {
            Some(m) => owner != m && !owner.strip_prefix(m).is_some_and(|rest| rest.starts_with('.')),
            None => true,
        };
        let mut out = Builder {
            seen: HashSet::new(),
            candidates: Vec::new(),
            dunders: self.class_receiver,
        };
        if let Some(methods) = self.inferred_type.as_ref().and_then(|t| stdlib.types.get(t)) {
            let ty = self.inferred_type.as_deref();
            for m in methods {
                out.push(m, CandidateSource::InferredType, ty);
            }
            if !out.candidates.is_empty() {
                return Ok(out.finish(point));
            }
        }
        for (name, class) in &self.scope {
            out.push(name, CandidateSource::ScopeMethod, class.as_deref());
        }
        for (owner, names) in project.defs.iter().filter(|(o, _)| foreign(o)) {
            for n in names {
                out.push(n, CandidateSource::ScopeMethod, Some(owner));
            }
        }
        for m in &self.imports {
            for n in project.external.get(m).into_iter().flatten() {
                out.push(n, CandidateSource::ImportedLibrary, Some(m));
            }
        }
        for m in &self.imports {
            for n in stdlib.modules.get(m).into_iter().flatten() {
                out.push(n, CandidateSource::StandardLibrary, Some(m));
            }
        }
        if out.candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        // Untyped receivers are most often builtin values.
        for (ty, methods) in &stdlib.types {
            for m in methods {
                out.push(m, CandidateSource::StandardLibrary, Some(ty));
            }
        }
        Ok(out.finish(point))
    }
}

struct Builder {
    seen: HashSet<String>,
    candidates: Vec<ApiCandidate>,
    dunders: bool,
}

impl Builder {
    fn push(&mut self, name: &str, source: CandidateSource, owner: Option<&str>) {
        if name == HOLE || name == HOLE_TARGET || !is_identifier(name) {
            return;
        }
        if is_dunder(name) && !self.dunders {
            return;
        }
        if self.seen.insert(name.to_string()) {
            self.candidates.push(ApiCandidate {
                name: name.to_string(),
                source,
                owner: owner.map(String::from),
            });
        }
    }

    fn finish(self, point: &RecommendationPoint) -> CandidateSet {
        CandidateSet {
            point: point.clone(),
            candidates: self.candidates,
        }
    }
}

/// Candidates for the point of `ctx` with the default type inference.
pub fn generate(
    ctx: &SourceContext,
    point: &RecommendationPoint,
    stdlib: &StdlibIndex,
    project: &ProjectIndex,
) -> Result<CandidateSet> {
    CandidateQuery::from_context(ctx, &LiteralInference).generate(point, stdlib, project)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_context, parse_module};

    fn ctx_at_end(src: &str) -> SourceContext {
        let p = RecommendationPoint::at_end("t.py", src).unwrap();
        parse_context(src, &p).unwrap()
    }

    fn infer(src: &str) -> Option<String> {
        let c = ctx_at_end(src);
        infer_type(&c, &c.receiver)
    }

    fn cands(src: &str, project: &ProjectIndex) -> Result<CandidateSet> {
        let c = ctx_at_end(src);
        generate(&c, &c.point, StdlibIndex::bundled(), project)
    }

    #[test]
    fn literal_receivers() {
        assert_eq!(infer("\"a,b\"."), Some("str".into()));
        assert_eq!(infer("[1, 2]."), Some("list".into()));
        assert_eq!(infer("{1: 2}."), Some("dict".into()));
        assert_eq!(infer("{1, 2}."), Some("set".into()));
        assert_eq!(infer("dict(a=1)."), Some("dict".into()));
        assert_eq!(infer("x = 3\nf(x)."), None);
    }

    #[test]
    fn names_follow_their_last_binding() {
        assert_eq!(infer("d = {}\nfor k, v in d."), Some("dict".into()));
        assert_eq!(infer("s = 'a'\ns = g()\ns."), None);
        assert_eq!(infer("s = g()\nt = s\ns = ''\nt = s\nt."), Some("str".into()));
        assert_eq!(infer("with open(p) as fh:\n    fh."), Some("file".into()));
        assert_eq!(infer("def f(**kwargs):\n    kwargs."), None);
        // The parameter shadows the module-level binding.
        assert_eq!(infer("x = []\ndef f(x):\n    x."), None);
        assert_eq!(infer("x = []\ndef f():\n    x."), Some("list".into()));
    }

    #[test]
    fn binding_on_the_point_line_is_not_yet_made() {
        assert_eq!(infer("s = ''\ns = s."), Some("str".into()));
    }

    #[test]
    fn typed_receiver_gets_type_methods() {
        let set = cands("d = {}\nfor k, v in d.", &ProjectIndex::default()).unwrap();
        assert!(set.contains("items"));
        assert!(set.candidates.iter().all(|c| c.source == CandidateSource::InferredType));
        assert!(!set.contains("append"));
    }

    #[test]
    fn self_method_from_scope() {
        let src = "class Spider:\n    def crawl(self):\n        pass\n    def run(self):\n        self.";
        let set = cands(src, &ProjectIndex::default()).unwrap();
        assert_eq!(set.candidates[0].name, "Spider");
        assert!(set.contains("crawl"));
        let crawl = set.candidates.iter().find(|c| c.name == "crawl").unwrap();
        assert_eq!(crawl.owner.as_deref(), Some("Spider"));
        assert_eq!(crawl.source, CandidateSource::ScopeMethod);
    }

    #[test]
    fn import_only_file_uses_stdlib() {
        let set = cands("import os\nx.", &ProjectIndex::default()).unwrap();
        let os: Vec<&ApiCandidate> = set.candidates.iter().filter(|c| c.owner.as_deref() == Some("os")).collect();
        assert!(os.iter().any(|c| c.name == "listdir"));
        assert!(os.iter().all(|c| c.source == CandidateSource::StandardLibrary));
        // os exports come before the builtin-type fallback.
        assert_eq!(set.candidates[0].owner.as_deref(), Some("os"));
    }

    #[test]
    fn bare_file_has_no_candidates() {
        assert!(matches!(cands("x.", &ProjectIndex::default()), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn dunders_only_for_classes() {
        let src = "class A:\n    def __init__(self):\n        pass\n    def go(self):\n        self.";
        let set = cands(src, &ProjectIndex::default()).unwrap();
        assert!(!set.contains("__init__"));
        let src = "class A(B):\n    def __init__(self):\n        super().";
        let set = cands(src, &ProjectIndex::default()).unwrap();
        assert!(set.contains("__init__"));
        assert!(!set.contains(HOLE));
    }

    #[test]
    fn names_are_unique_and_deterministic() {
        let src = "import os\nimport os.path\nfrom collections import OrderedDict\ndef join():\n    pass\nx.";
        let a = cands(src, &ProjectIndex::default()).unwrap();
        let b = cands(src, &ProjectIndex::default()).unwrap();
        assert_eq!(a, b);
        let names: BTreeSet<&str> = a.names().collect();
        assert_eq!(names.len(), a.len());
        let join = a.candidates.iter().find(|c| c.name == "join").unwrap();
        assert_eq!(join.source, CandidateSource::ScopeMethod);
    }

    #[test]
    fn project_index_records_defs_and_module_calls() {
        let src = "import numpy as np\nfrom pkg import util\nclass K:\n    def m(self):\n        np.array(1)\n\
                   def f():\n    util.helper()\n    np.linalg.norm(x)\n";
        let mut idx = ProjectIndex::default();
        idx.add_file("pkg/mod.py", &parse_module(src, "pkg/mod.py").unwrap());
        assert!(idx.defs["pkg.mod"].contains("K"));
        assert!(idx.defs["pkg.mod.K"].contains("m"));
        assert!(idx.external["numpy"].contains("array"));
        assert!(idx.external["numpy.linalg"].contains("norm"));
        assert!(idx.external["pkg.util"].contains("helper"));

        let set = cands("import numpy as np\nnp.", &idx).unwrap();
        let array = set.candidates.iter().find(|c| c.name == "array").unwrap();
        assert_eq!(array.source, CandidateSource::ImportedLibrary);
        assert!(set.contains("m"));
    }

    #[test]
    fn module_names() {
        assert_eq!(module_name("a/b/c.py"), "a.b.c");
        assert_eq!(module_name("a/__init__.py"), "a");
    }
}
