//! A reduced Python AST carrying only what the data-flow and candidate stages
//! read. Lowered from the `rustpython-parser` tree.

use rustpython_parser::ast::{self as py, Ranged};
use rustpython_parser::text_size::TextRange;

use super::LineIndex;

/// Method name substituted at the recommendation point before parsing.
pub const HOLE: &str = "__HOLE__";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralKind {
    Str,
    Bytes,
    Int,
    Float,
    Complex,
    Bool,
    None,
    Ellipsis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionKind {
    List,
    Tuple,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Literal(LiteralKind),
    /// List/tuple/set/dict displays. Dict keys and values are interleaved.
    Collection {
        kind: CollectionKind,
        elts: Vec<Expr>,
    },
    Comprehension {
        kind: CollectionKind,
        elts: Vec<Expr>,
        generators: Vec<Generator>,
    },
    Lambda {
        params: Vec<String>,
        body: Box<Expr>,
    },
    NamedExpr {
        target: String,
        value: Box<Expr>,
    },
    /// Operators, f-strings, await/yield, slices, conditional expressions.
    Compound(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

impl Expr {
    /// The identifier an expression's value is attributed to: `a` for `a`,
    /// `c` for `a.b.c`, `f` for `f(x)`, `d` for `d[k]`.
    pub fn head(&self) -> Option<&str> {
        match self {
            Expr::Name(id) => Some(id),
            Expr::Attribute { attr, .. } => Some(attr),
            Expr::Call { func, .. } => func.head(),
            Expr::Subscript { value, .. } => value.head(),
            Expr::NamedExpr { target, .. } => Some(target),
            _ => None,
        }
    }

    pub fn is_hole(&self) -> bool {
        matches!(self, Expr::Attribute { attr, .. } if attr == HOLE)
    }

    /// Every variable and method object mentioned in the expression, in
    /// source order, without duplicates.
    pub fn objects(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_objects(&mut out);
        out
    }

    /// Visits the expression and every subexpression, parents first.
    pub fn walk<'e>(&'e self, f: &mut impl FnMut(&'e Expr)) {
        f(self);
        match self {
            Expr::Name(_) | Expr::Literal(_) => {}
            Expr::Attribute { value, .. } => value.walk(f),
            Expr::Call { func, args } => {
                func.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            Expr::Subscript { value, index } => {
                value.walk(f);
                index.walk(f);
            }
            Expr::Collection { elts, .. } | Expr::Compound(elts) => elts.iter().for_each(|e| e.walk(f)),
            Expr::Comprehension { elts, generators, .. } => {
                for g in generators {
                    g.iter.walk(f);
                    g.target.walk(f);
                    g.ifs.iter().for_each(|c| c.walk(f));
                }
                elts.iter().for_each(|e| e.walk(f));
            }
            Expr::Lambda { body, .. } => body.walk(f),
            Expr::NamedExpr { value, .. } => value.walk(f),
        }
    }

    /// `a.b.c` for a chain of names and attributes.
    pub fn dotted(&self) -> Option<String> {
        match self {
            Expr::Name(id) => Some(id.clone()),
            Expr::Attribute { value, attr } => Some(format!("{}.{attr}", value.dotted()?)),
            _ => None,
        }
    }

    fn collect_objects(&self, out: &mut Vec<String>) {
        fn push(out: &mut Vec<String>, id: &str) {
            if !out.iter().any(|o| o == id) {
                out.push(id.to_string());
            }
        }
        match self {
            Expr::Name(id) => push(out, id),
            Expr::Attribute { value, attr } => {
                value.collect_objects(out);
                push(out, attr);
            }
            Expr::Call { func, args } => {
                func.collect_objects(out);
                for a in args {
                    a.collect_objects(out);
                }
            }
            Expr::Subscript { value, index } => {
                value.collect_objects(out);
                index.collect_objects(out);
            }
            Expr::Literal(_) => {}
            Expr::Collection { elts, .. } | Expr::Compound(elts) => {
                for e in elts {
                    e.collect_objects(out);
                }
            }
            Expr::Comprehension {
                elts, generators, ..
            } => {
                for g in generators {
                    g.iter.collect_objects(out);
                    g.target.collect_objects(out);
                    for c in &g.ifs {
                        c.collect_objects(out);
                    }
                }
                for e in elts {
                    e.collect_objects(out);
                }
            }
            Expr::Lambda { params, body } => {
                let mut inner = Vec::new();
                body.collect_objects(&mut inner);
                for id in inner.iter().filter(|id| !params.contains(id)) {
                    push(out, id);
                }
            }
            Expr::NamedExpr { target, value } => {
                value.collect_objects(out);
                push(out, target);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportAlias {
    pub name: String,
    pub asname: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Handler {
    pub line: usize,
    pub type_: Option<Expr>,
    pub name: Option<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    /// 1-based line of the statement's first token.
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        value: Expr,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    With {
        items: Vec<(Expr, Option<Expr>)>,
        body: Vec<Stmt>,
    },
    Try {
        body: Vec<Stmt>,
        handlers: Vec<Handler>,
        orelse: Vec<Stmt>,
        finalbody: Vec<Stmt>,
    },
    FunctionDef {
        name: String,
        params: Vec<String>,
        defaults: Vec<Expr>,
        decorators: Vec<Expr>,
        body: Vec<Stmt>,
    },
    ClassDef {
        name: String,
        bases: Vec<Expr>,
        decorators: Vec<Expr>,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Expr(Expr),
    Import(Vec<ImportAlias>),
    ImportFrom {
        module: Option<String>,
        level: u32,
        names: Vec<ImportAlias>,
    },
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Delete(Vec<Expr>),
    Match {
        subject: Expr,
        cases: Vec<Vec<Stmt>>,
    },
    /// `raise`, `assert`, `pass`, `break`, `continue`, type aliases.
    Other(Vec<Expr>),
}

impl Stmt {
    /// Expressions of the statement itself, not of nested blocks.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { targets, value } => targets.iter().chain([value]).collect(),
            StmtKind::AugAssign { target, value } => vec![target, value],
            StmtKind::For { target, iter, .. } => vec![target, iter],
            StmtKind::While { test, .. } | StmtKind::If { test, .. } => vec![test],
            StmtKind::With { items, .. } => items.iter().flat_map(|(e, t)| std::iter::once(e).chain(t)).collect(),
            StmtKind::Try { handlers, .. } => handlers.iter().filter_map(|h| h.type_.as_ref()).collect(),
            StmtKind::FunctionDef { defaults, decorators, .. } => decorators.iter().chain(defaults).collect(),
            StmtKind::ClassDef { bases, decorators, .. } => decorators.iter().chain(bases).collect(),
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Expr(e) => vec![e],
            StmtKind::Delete(es) | StmtKind::Other(es) => es.iter().collect(),
            StmtKind::Match { subject, .. } => vec![subject],
            StmtKind::Import(_) | StmtKind::ImportFrom { .. } | StmtKind::Global(_) | StmtKind::Nonlocal(_) => Vec::new(),
        }
    }

    /// Visits this statement and every nested one in source order.
    pub fn walk<'s>(&'s self, f: &mut impl FnMut(&'s Stmt)) {
        f(self);
        for block in self.blocks() {
            for s in block {
                s.walk(f);
            }
        }
    }

    /// Nested statement blocks, in source order.
    pub fn blocks(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::For { body, orelse, .. }
            | StmtKind::While { body, orelse, .. }
            | StmtKind::If { body, orelse, .. } => vec![body, orelse],
            StmtKind::With { body, .. }
            | StmtKind::FunctionDef { body, .. }
            | StmtKind::ClassDef { body, .. } => vec![body],
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let mut out: Vec<&[Stmt]> = vec![body];
                out.extend(handlers.iter().map(|h| h.body.as_slice()));
                out.push(orelse);
                out.push(finalbody);
                out
            }
            StmtKind::Match { cases, .. } => cases.iter().map(|c| c.as_slice()).collect(),
            _ => Vec::new(),
        }
    }
}

/// Lowers a parsed module, remembering where the recommendation hole sits.
pub(crate) struct Lowerer<'a> {
    lines: &'a LineIndex,
    /// Receiver expression of the hole and its source range.
    pub(crate) hole_receiver: Option<(Expr, TextRange)>,
}

impl<'a> Lowerer<'a> {
    pub(crate) fn new(lines: &'a LineIndex) -> Self {
        Lowerer {
            lines,
            hole_receiver: None,
        }
    }

    fn line_of(&self, range: TextRange) -> usize {
        self.lines.line_of(range.start().to_usize())
    }

    pub(crate) fn suite(&mut self, stmts: &[py::Stmt]) -> Vec<Stmt> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn exprs(&mut self, exprs: &[py::Expr]) -> Vec<Expr> {
        exprs.iter().map(|e| self.expr(e)).collect()
    }

    fn opt(&mut self, expr: Option<&py::Expr>) -> Option<Expr> {
        expr.map(|e| self.expr(e))
    }

    fn params(&mut self, args: &py::Arguments) -> (Vec<String>, Vec<Expr>) {
        let mut names = Vec::new();
        let mut defaults = Vec::new();
        for a in args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs) {
            names.push(a.def.arg.to_string());
            if let Some(d) = &a.default {
                defaults.push(self.expr(d));
            }
        }
        if let Some(v) = &args.vararg {
            names.push(v.arg.to_string());
        }
        if let Some(k) = &args.kwarg {
            names.push(k.arg.to_string());
        }
        (names, defaults)
    }

    fn aliases(names: &[py::Alias]) -> Vec<ImportAlias> {
        names
            .iter()
            .map(|a| ImportAlias {
                name: a.name.to_string(),
                asname: a.asname.as_ref().map(|n| n.to_string()),
            })
            .collect()
    }

    fn stmt(&mut self, stmt: &py::Stmt) -> Stmt {
        let line = self.line_of(stmt.range());
        let kind = match stmt {
            py::Stmt::FunctionDef(f) => {
                let decorators = self.exprs(&f.decorator_list);
                let (params, defaults) = self.params(&f.args);
                StmtKind::FunctionDef {
                    name: f.name.to_string(),
                    params,
                    defaults,
                    decorators,
                    body: self.suite(&f.body),
                }
            }
            py::Stmt::AsyncFunctionDef(f) => {
                let decorators = self.exprs(&f.decorator_list);
                let (params, defaults) = self.params(&f.args);
                StmtKind::FunctionDef {
                    name: f.name.to_string(),
                    params,
                    defaults,
                    decorators,
                    body: self.suite(&f.body),
                }
            }
            py::Stmt::ClassDef(c) => {
                let decorators = self.exprs(&c.decorator_list);
                let mut bases = self.exprs(&c.bases);
                bases.extend(c.keywords.iter().map(|k| self.expr(&k.value)));
                StmtKind::ClassDef {
                    name: c.name.to_string(),
                    bases,
                    decorators,
                    body: self.suite(&c.body),
                }
            }
            py::Stmt::Return(r) => StmtKind::Return(self.opt(r.value.as_deref())),
            py::Stmt::Delete(d) => StmtKind::Delete(self.exprs(&d.targets)),
            py::Stmt::Assign(a) => StmtKind::Assign {
                targets: self.exprs(&a.targets),
                value: self.expr(&a.value),
            },
            py::Stmt::TypeAlias(t) => StmtKind::Other(vec![self.expr(&t.value)]),
            py::Stmt::AugAssign(a) => StmtKind::AugAssign {
                target: self.expr(&a.target),
                value: self.expr(&a.value),
            },
            py::Stmt::AnnAssign(a) => match &a.value {
                Some(v) => StmtKind::Assign {
                    targets: vec![self.expr(&a.target)],
                    value: self.expr(v),
                },
                None => StmtKind::Other(Vec::new()),
            },
            py::Stmt::For(f) => StmtKind::For {
                target: self.expr(&f.target),
                iter: self.expr(&f.iter),
                body: self.suite(&f.body),
                orelse: self.suite(&f.orelse),
            },
            py::Stmt::AsyncFor(f) => StmtKind::For {
                target: self.expr(&f.target),
                iter: self.expr(&f.iter),
                body: self.suite(&f.body),
                orelse: self.suite(&f.orelse),
            },
            py::Stmt::While(w) => StmtKind::While {
                test: self.expr(&w.test),
                body: self.suite(&w.body),
                orelse: self.suite(&w.orelse),
            },
            py::Stmt::If(i) => StmtKind::If {
                test: self.expr(&i.test),
                body: self.suite(&i.body),
                orelse: self.suite(&i.orelse),
            },
            py::Stmt::With(w) => StmtKind::With {
                items: self.with_items(&w.items),
                body: self.suite(&w.body),
            },
            py::Stmt::AsyncWith(w) => StmtKind::With {
                items: self.with_items(&w.items),
                body: self.suite(&w.body),
            },
            py::Stmt::Match(m) => StmtKind::Match {
                subject: self.expr(&m.subject),
                cases: m.cases.iter().map(|c| self.suite(&c.body)).collect(),
            },
            py::Stmt::Raise(r) => {
                let mut v: Vec<Expr> = self.opt(r.exc.as_deref()).into_iter().collect();
                v.extend(self.opt(r.cause.as_deref()));
                StmtKind::Other(v)
            }
            py::Stmt::Try(t) => StmtKind::Try {
                body: self.suite(&t.body),
                handlers: self.handlers(&t.handlers),
                orelse: self.suite(&t.orelse),
                finalbody: self.suite(&t.finalbody),
            },
            py::Stmt::TryStar(t) => StmtKind::Try {
                body: self.suite(&t.body),
                handlers: self.handlers(&t.handlers),
                orelse: self.suite(&t.orelse),
                finalbody: self.suite(&t.finalbody),
            },
            py::Stmt::Assert(a) => {
                let mut v = vec![self.expr(&a.test)];
                v.extend(self.opt(a.msg.as_deref()));
                StmtKind::Other(v)
            }
            py::Stmt::Import(i) => StmtKind::Import(Self::aliases(&i.names)),
            py::Stmt::ImportFrom(i) => StmtKind::ImportFrom {
                module: i.module.as_ref().map(|m| m.to_string()),
                level: i.level.map(|l| l.to_u32()).unwrap_or(0),
                names: Self::aliases(&i.names),
            },
            py::Stmt::Global(g) => StmtKind::Global(g.names.iter().map(|n| n.to_string()).collect()),
            py::Stmt::Nonlocal(n) => {
                StmtKind::Nonlocal(n.names.iter().map(|n| n.to_string()).collect())
            }
            py::Stmt::Expr(e) => StmtKind::Expr(self.expr(&e.value)),
            py::Stmt::Pass(_) | py::Stmt::Break(_) | py::Stmt::Continue(_) => {
                StmtKind::Other(Vec::new())
            }
        };
        Stmt { line, kind }
    }

    fn with_items(&mut self, items: &[py::WithItem]) -> Vec<(Expr, Option<Expr>)> {
        items
            .iter()
            .map(|i| (self.expr(&i.context_expr), self.opt(i.optional_vars.as_deref())))
            .collect()
    }

    fn handlers(&mut self, handlers: &[py::ExceptHandler]) -> Vec<Handler> {
        handlers
            .iter()
            .map(|h| {
                let py::ExceptHandler::ExceptHandler(h) = h;
                Handler {
                    line: self.line_of(h.range),
                    type_: self.opt(h.type_.as_deref()),
                    name: h.name.as_ref().map(|n| n.to_string()),
                    body: self.suite(&h.body),
                }
            })
            .collect()
    }

    fn generators(&mut self, gens: &[py::Comprehension]) -> Vec<Generator> {
        gens.iter()
            .map(|g| Generator {
                target: self.expr(&g.target),
                iter: self.expr(&g.iter),
                ifs: self.exprs(&g.ifs),
            })
            .collect()
    }

    fn expr(&mut self, expr: &py::Expr) -> Expr {
        match expr {
            py::Expr::Name(n) => Expr::Name(n.id.to_string()),
            py::Expr::Attribute(a) => {
                let value = self.expr(&a.value);
                if a.attr.as_str() == HOLE && self.hole_receiver.is_none() {
                    self.hole_receiver = Some((value.clone(), a.value.range()));
                }
                Expr::Attribute {
                    value: Box::new(value),
                    attr: a.attr.to_string(),
                }
            }
            py::Expr::Call(c) => {
                let func = self.expr(&c.func);
                let mut args = self.exprs(&c.args);
                args.extend(c.keywords.iter().map(|k| self.expr(&k.value)));
                Expr::Call {
                    func: Box::new(func),
                    args,
                }
            }
            py::Expr::Subscript(s) => Expr::Subscript {
                value: Box::new(self.expr(&s.value)),
                index: Box::new(self.expr(&s.slice)),
            },
            py::Expr::Constant(c) => Expr::Literal(match &c.value {
                py::Constant::None => LiteralKind::None,
                py::Constant::Bool(_) => LiteralKind::Bool,
                py::Constant::Str(_) => LiteralKind::Str,
                py::Constant::Bytes(_) => LiteralKind::Bytes,
                py::Constant::Int(_) => LiteralKind::Int,
                py::Constant::Tuple(_) => LiteralKind::Ellipsis,
                py::Constant::Float(_) => LiteralKind::Float,
                py::Constant::Complex { .. } => LiteralKind::Complex,
                py::Constant::Ellipsis => LiteralKind::Ellipsis,
            }),
            py::Expr::JoinedStr(j) => {
                let parts = self.exprs(&j.values);
                let parts: Vec<Expr> = parts
                    .into_iter()
                    .filter(|p| !matches!(p, Expr::Literal(_)))
                    .collect();
                if parts.is_empty() {
                    Expr::Literal(LiteralKind::Str)
                } else {
                    // f-strings are strings; the interpolated values still
                    // matter for flow, so keep them under a str-typed wrapper.
                    Expr::Compound(std::iter::once(Expr::Literal(LiteralKind::Str)).chain(parts).collect())
                }
            }
            py::Expr::FormattedValue(f) => {
                let mut v = vec![self.expr(&f.value)];
                v.extend(self.opt(f.format_spec.as_deref()));
                Expr::Compound(v)
            }
            py::Expr::List(l) => Expr::Collection {
                kind: CollectionKind::List,
                elts: self.exprs(&l.elts),
            },
            py::Expr::Tuple(t) => Expr::Collection {
                kind: CollectionKind::Tuple,
                elts: self.exprs(&t.elts),
            },
            py::Expr::Set(s) => Expr::Collection {
                kind: CollectionKind::Set,
                elts: self.exprs(&s.elts),
            },
            py::Expr::Dict(d) => {
                let mut elts = Vec::new();
                for (k, v) in d.keys.iter().zip(&d.values) {
                    if let Some(k) = k {
                        elts.push(self.expr(k));
                    }
                    elts.push(self.expr(v));
                }
                Expr::Collection {
                    kind: CollectionKind::Dict,
                    elts,
                }
            }
            py::Expr::ListComp(c) => {
                let generators = self.generators(&c.generators);
                Expr::Comprehension {
                    kind: CollectionKind::List,
                    elts: vec![self.expr(&c.elt)],
                    generators,
                }
            }
            py::Expr::SetComp(c) => {
                let generators = self.generators(&c.generators);
                Expr::Comprehension {
                    kind: CollectionKind::Set,
                    elts: vec![self.expr(&c.elt)],
                    generators,
                }
            }
            py::Expr::GeneratorExp(c) => {
                let generators = self.generators(&c.generators);
                Expr::Comprehension {
                    kind: CollectionKind::Generator,
                    elts: vec![self.expr(&c.elt)],
                    generators,
                }
            }
            py::Expr::DictComp(c) => {
                let generators = self.generators(&c.generators);
                Expr::Comprehension {
                    kind: CollectionKind::Dict,
                    elts: vec![self.expr(&c.key), self.expr(&c.value)],
                    generators,
                }
            }
            py::Expr::Lambda(l) => {
                let (params, _) = self.params(&l.args);
                Expr::Lambda {
                    params,
                    body: Box::new(self.expr(&l.body)),
                }
            }
            py::Expr::NamedExpr(n) => match self.expr(&n.target) {
                Expr::Name(target) => Expr::NamedExpr {
                    target,
                    value: Box::new(self.expr(&n.value)),
                },
                other => Expr::Compound(vec![other, self.expr(&n.value)]),
            },
            py::Expr::Starred(s) => self.expr(&s.value),
            py::Expr::BoolOp(b) => Expr::Compound(self.exprs(&b.values)),
            py::Expr::BinOp(b) => Expr::Compound(vec![self.expr(&b.left), self.expr(&b.right)]),
            py::Expr::UnaryOp(u) => Expr::Compound(vec![self.expr(&u.operand)]),
            py::Expr::IfExp(i) => Expr::Compound(vec![
                self.expr(&i.body),
                self.expr(&i.test),
                self.expr(&i.orelse),
            ]),
            py::Expr::Await(a) => Expr::Compound(vec![self.expr(&a.value)]),
            py::Expr::Yield(y) => Expr::Compound(self.opt(y.value.as_deref()).into_iter().collect()),
            py::Expr::YieldFrom(y) => Expr::Compound(vec![self.expr(&y.value)]),
            py::Expr::Compare(c) => {
                let mut v = vec![self.expr(&c.left)];
                v.extend(self.exprs(&c.comparators));
                Expr::Compound(v)
            }
            py::Expr::Slice(s) => {
                let mut v = Vec::new();
                for part in [&s.lower, &s.upper, &s.step].into_iter().flatten() {
                    v.push(self.expr(part));
                }
                Expr::Compound(v)
            }
        }
    }
}
