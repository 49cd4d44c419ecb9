//! Optimistic data-flow over abstract syntax units.
//!
//! Edges come straight from the unit rules. Paths are built while walking
//! statements: every bound variable carries the set of paths flowing into it,
//! rebinding kills that set, branches are joined by union, and loop bodies are
//! analyzed once. Method and attribute objects (`f` in `u.f`) only carry paths
//! within the statement that mentions them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::ast::Handler;
use crate::frontend::units::{handler_units, statement_units};
use crate::frontend::{AstUnit, Binding, SourceContext, Stmt, StmtKind, UnitKind, HOLE};

/// Longest path kept, in nodes.
pub const PATH_CAP: usize = 8;
/// Most paths kept per variable.
pub const PATH_SET_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowEdge {
    pub src: String,
    pub dst: String,
    pub line: usize,
    pub rule: UnitKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPath {
    pub nodes: Vec<String>,
    pub hole_index: Option<usize>,
}

/// Paths flowing into each visible variable at the end of the analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowState {
    pub vars: BTreeMap<String, Vec<Vec<String>>>,
}

impl FlowState {
    /// Paths into `var`, each ending at `var`.
    pub fn dfs(&self, var: &str) -> &[Vec<String>] {
        self.vars.get(var).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Flow around the recommendation point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleFlow {
    /// Identifier the receiver expression is attributed to.
    pub receiver: Option<String>,
    /// Paths ending at the receiver.
    pub upstream: Vec<Vec<String>>,
    /// Objects the hole flows into within its statement, in source order.
    pub sinks: Vec<String>,
    /// Whether the receiver took part in any relation before the point.
    pub receiver_seen: bool,
}

impl HoleFlow {
    /// True when nothing is known about the receiver's flow.
    pub fn is_empty(&self) -> bool {
        self.sinks.is_empty() && self.upstream.iter().all(|p| p.len() <= 1) && !self.receiver_seen
    }

    /// Upstream tokens with their node distance to the hole, followed by the
    /// sinks at distance 1. Upstream tokens shared by several paths appear
    /// once per path.
    pub fn tokens_with_distance(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        let mut seen_paths = HashSet::new();
        for p in &self.upstream {
            if !seen_paths.insert(p) {
                continue;
            }
            let n = p.len();
            out.extend(p.iter().enumerate().map(|(i, x)| (x.as_str(), n - i)));
        }
        out.extend(self.sinks.iter().map(|s| (s.as_str(), 1)));
        out
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FlowAnalysis {
    pub edges: Vec<FlowEdge>,
    pub state: FlowState,
    pub hole: Option<HoleFlow>,
}

impl FlowAnalysis {
    /// Paths through the hole: each upstream path, the hole, then one sink.
    /// With several sinks the merged `a|b` form is added as well.
    pub fn paths_to(&self) -> Result<Vec<FlowPath>> {
        let hole = self.hole.as_ref().filter(|h| !h.is_empty()).ok_or(Error::EmptyFlow)?;
        let mut tails: Vec<Vec<String>> = hole.sinks.iter().map(|s| vec![s.clone()]).collect();
        if hole.sinks.len() > 1 {
            tails.push(vec![hole.sinks.join("|")]);
        }
        if tails.is_empty() {
            tails.push(Vec::new());
        }
        let upstream: Vec<&[String]> = if hole.upstream.is_empty() {
            vec![&[]]
        } else {
            hole.upstream.iter().map(Vec::as_slice).collect()
        };
        let mut out = Vec::new();
        for up in upstream {
            for tail in &tails {
                let room = PATH_CAP.saturating_sub(1 + tail.len());
                let up = &up[up.len().saturating_sub(room)..];
                let mut nodes = up.to_vec();
                nodes.push(HOLE.to_string());
                nodes.extend(tail.iter().cloned());
                out.push(FlowPath {
                    nodes,
                    hole_index: Some(up.len()),
                });
            }
        }
        Ok(out)
    }
}

/// Edges a single unit contributes. Self-edges are dropped.
pub fn derive_edges(unit: &AstUnit) -> Vec<FlowEdge> {
    let edge = |src: &str, dst: &str| FlowEdge {
        src: src.to_string(),
        dst: dst.to_string(),
        line: unit.line,
        rule: unit.kind,
    };
    let mut out: Vec<FlowEdge> = match unit.kind {
        UnitKind::Assign | UnitKind::For | UnitKind::Access | UnitKind::Invoke => match &unit.lhs {
            Some(v) => unit.rhs.iter().filter(|u| *u != v).map(|u| edge(u, v)).collect(),
            None => Vec::new(),
        },
        UnitKind::Para => match &unit.func {
            Some(f) => unit
                .params
                .iter()
                .flatten()
                .filter(|u| *u != f)
                .map(|u| edge(u, f))
                .collect(),
            None => Vec::new(),
        },
    };
    let mut seen = HashSet::new();
    out.retain(|e| seen.insert((e.src.clone(), e.dst.clone())));
    out
}

type Sym = u32;
type Path = Rc<[Sym]>;

#[derive(Default)]
struct Interner {
    ids: HashMap<String, Sym>,
    names: Vec<String>,
}

impl Interner {
    fn get(&mut self, s: &str) -> Sym {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as Sym;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }

    fn name(&self, id: Sym) -> &str {
        &self.names[id as usize]
    }
}

#[derive(Clone, Default)]
struct Frame {
    vars: HashMap<Sym, Vec<Path>>,
    globals: HashSet<Sym>,
    nonlocals: HashSet<Sym>,
}

/// `a` occurs in order within `b`.
fn is_subsequence(a: &[Sym], b: &[Sym]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

/// Union of path sets: duplicates and paths contained in longer ones are
/// dropped, and only the newest `PATH_SET_CAP` survive.
fn normalize(mut paths: Vec<Path>) -> Vec<Path> {
    let mut seen = HashSet::new();
    paths.retain(|p| seen.insert(p.clone()));
    let keep: Vec<bool> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            !paths
                .iter()
                .enumerate()
                .any(|(j, q)| i != j && q.len() > p.len() && is_subsequence(p, q))
        })
        .collect();
    let mut out: Vec<Path> = paths
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    if out.len() > PATH_SET_CAP {
        out.drain(..out.len() - PATH_SET_CAP);
    }
    out
}

fn extend(paths: &[Path], v: Sym) -> Vec<Path> {
    paths
        .iter()
        .map(|p| {
            if p.last() == Some(&v) {
                p.clone()
            } else {
                let start = (p.len() + 1).saturating_sub(PATH_CAP);
                p[start..].iter().copied().chain([v]).collect()
            }
        })
        .collect()
}

fn join_frames(a: Vec<Frame>, b: Vec<Frame>) -> Vec<Frame> {
    a.into_iter()
        .zip(b)
        .map(|(mut fa, fb)| {
            for (k, v) in fb.vars {
                let merged = match fa.vars.remove(&k) {
                    Some(mut old) => {
                        old.extend(v);
                        normalize(old)
                    }
                    None => v,
                };
                fa.vars.insert(k, merged);
            }
            fa.globals.extend(fb.globals);
            fa.nonlocals.extend(fb.nonlocals);
            fa
        })
        .collect()
}

struct Engine {
    syms: Interner,
    frames: Vec<Frame>,
    edges: Vec<FlowEdge>,
    touched: HashSet<String>,
    hole: Option<HoleFlow>,
    hole_sym: Sym,
    stop_line: usize,
}

impl Engine {
    fn new(stop_line: usize) -> Self {
        let mut syms = Interner::default();
        let hole_sym = syms.get(HOLE);
        Engine {
            syms,
            frames: vec![Frame::default()],
            edges: Vec::new(),
            touched: HashSet::new(),
            hole: None,
            hole_sym,
            stop_line,
        }
    }

    fn done(&self) -> bool {
        self.hole.is_some()
    }

    fn lookup_var(&self, v: Sym) -> Option<&Vec<Path>> {
        self.frames.iter().rev().find_map(|f| f.vars.get(&v))
    }

    fn ext(&self, scratch: &HashMap<Sym, Vec<Path>>, u: Sym) -> Vec<Path> {
        let found = scratch.get(&u).or_else(|| self.lookup_var(u));
        match found {
            Some(paths) if !paths.is_empty() => paths.clone(),
            _ => vec![Rc::from(vec![u])],
        }
    }

    fn bind(&mut self, v: Sym, paths: Vec<Path>) {
        let top = self.frames.len() - 1;
        let target = if self.frames[top].globals.contains(&v) {
            0
        } else if self.frames[top].nonlocals.contains(&v) {
            (0..top)
                .rev()
                .find(|&i| self.frames[i].vars.contains_key(&v))
                .unwrap_or(top.saturating_sub(1))
        } else {
            top
        };
        self.frames[target].vars.insert(v, paths);
    }

    fn run_units(&mut self, units: &[AstUnit]) {
        let mut scratch: HashMap<Sym, Vec<Path>> = HashMap::new();
        let mut pending: Vec<(Sym, Vec<Path>)> = Vec::new();
        let mut upstream: Option<Vec<Path>> = None;
        let mut mentions_hole = false;
        let touched_before = self.touched.clone();
        let first_edge = self.edges.len();

        for unit in units {
            for e in derive_edges(unit) {
                self.touched.insert(e.src.clone());
                self.touched.insert(e.dst.clone());
                self.edges.push(e);
            }
            mentions_hole |= unit.identifiers().any(|x| x == HOLE);
            let rhs: Vec<Sym> = unit.rhs.iter().map(|u| self.syms.get(u)).collect();
            match unit.kind {
                UnitKind::Invoke => {
                    let (Some(v), Some(&u)) = (&unit.lhs, rhs.first()) else {
                        continue;
                    };
                    let v = self.syms.get(v);
                    let from = self.ext(&scratch, u);
                    if v == self.hole_sym {
                        let mut up = upstream.take().unwrap_or_default();
                        up.extend(from.iter().cloned());
                        upstream = Some(normalize(up));
                    }
                    let mut set = scratch.remove(&v).unwrap_or_default();
                    set.extend(extend(&from, v));
                    scratch.insert(v, normalize(set));
                }
                UnitKind::Para => {
                    let Some(f) = &unit.func else { continue };
                    let f = self.syms.get(f);
                    let mut set = scratch.remove(&f).unwrap_or_default();
                    for u in unit.params.iter().flatten() {
                        let u = self.syms.get(u);
                        if u != f {
                            set.extend(extend(&self.ext(&scratch, u), f));
                        }
                    }
                    scratch.insert(f, normalize(set));
                }
                UnitKind::Access | UnitKind::Assign | UnitKind::For => {
                    let Some(v) = &unit.lhs else { continue };
                    let v = self.syms.get(v);
                    let mut new = Vec::new();
                    for &u in rhs.iter().filter(|&&u| u != v) {
                        new.extend(extend(&self.ext(&scratch, u), v));
                    }
                    let current = || {
                        scratch
                            .get(&v)
                            .or_else(|| self.lookup_var(v))
                            .cloned()
                            .unwrap_or_default()
                    };
                    match unit.binding {
                        None => {
                            let mut set = current();
                            set.extend(new);
                            scratch.insert(v, normalize(set));
                        }
                        Some(Binding::Rebind) => pending.push((v, normalize(new))),
                        Some(Binding::Update) => {
                            let mut set = current();
                            set.extend(new);
                            let set = normalize(set);
                            scratch.insert(v, set.clone());
                            pending.push((v, set));
                        }
                        Some(Binding::Field) => {
                            let mut set = scratch.remove(&v).unwrap_or_default();
                            set.extend(new);
                            scratch.insert(v, normalize(set));
                        }
                        Some(Binding::Local) => {
                            scratch.insert(v, normalize(new));
                        }
                        Some(Binding::Walrus) => {
                            let set = normalize(new);
                            scratch.insert(v, set.clone());
                            pending.push((v, set));
                        }
                    }
                }
            }
        }

        if mentions_hole {
            let mut sinks: Vec<String> = Vec::new();
            for e in &self.edges[first_edge..] {
                if e.src == HOLE && !sinks.contains(&e.dst) {
                    sinks.push(e.dst.clone());
                }
            }
            let receiver = units
                .iter()
                .find(|u| u.kind == UnitKind::Invoke && u.lhs.as_deref() == Some(HOLE))
                .and_then(|u| u.rhs.first().cloned());
            let receiver_seen = receiver.as_ref().is_some_and(|r| touched_before.contains(r));
            let upstream = upstream
                .unwrap_or_default()
                .iter()
                .map(|p| p.iter().map(|&s| self.syms.name(s).to_string()).collect())
                .collect();
            self.hole = Some(HoleFlow {
                receiver,
                upstream,
                sinks,
                receiver_seen,
            });
        }
        for (v, set) in pending {
            self.bind(v, set);
        }
    }

    fn block(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            if self.done() || s.line > self.stop_line {
                return;
            }
            self.stmt(s);
        }
    }

    /// Runs `body` from the current state and joins the result with it.
    fn optional_block(&mut self, body: &[Stmt]) {
        let before = self.frames.clone();
        self.block(body);
        if !self.done() {
            let after = std::mem::take(&mut self.frames);
            self.frames = join_frames(before, after);
        }
    }

    fn handlers(&mut self, handlers: &[Handler], start: &[Frame]) -> Option<Vec<Frame>> {
        let mut joined: Option<Vec<Frame>> = None;
        for h in handlers {
            if h.line > self.stop_line {
                break;
            }
            self.frames = start.to_vec();
            self.run_units(&handler_units(h));
            self.block(&h.body);
            if self.done() {
                return None;
            }
            let out = std::mem::take(&mut self.frames);
            joined = Some(match joined {
                Some(j) => join_frames(j, out),
                None => out,
            });
        }
        joined
    }

    fn stmt(&mut self, s: &Stmt) {
        self.run_units(&statement_units(s));
        if self.done() {
            return;
        }
        match &s.kind {
            StmtKind::If { body, orelse, .. } => {
                let before = self.frames.clone();
                self.block(body);
                if self.done() {
                    return;
                }
                let then = std::mem::replace(&mut self.frames, before);
                self.block(orelse);
                if self.done() {
                    return;
                }
                let other = std::mem::take(&mut self.frames);
                self.frames = join_frames(then, other);
            }
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                self.optional_block(body);
                self.block(orelse);
            }
            StmtKind::With { body, .. } => self.block(body),
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let before = self.frames.clone();
                self.block(body);
                if self.done() {
                    return;
                }
                let after_body = std::mem::take(&mut self.frames);
                let start = join_frames(before, after_body.clone());
                let Some(from_handlers) = self.handlers(handlers, &start) else {
                    return;
                };
                self.frames = after_body;
                self.block(orelse);
                if self.done() {
                    return;
                }
                if let Some(h) = Some(from_handlers).filter(|h| !h.is_empty()) {
                    let cur = std::mem::take(&mut self.frames);
                    self.frames = join_frames(cur, h);
                }
                self.block(finalbody);
            }
            StmtKind::FunctionDef { params, body, .. } => {
                let mut frame = Frame::default();
                for p in params {
                    frame.vars.insert(self.syms.get(p), Vec::new());
                }
                self.frames.push(frame);
                self.block(body);
                if !self.done() {
                    self.frames.pop();
                }
            }
            StmtKind::ClassDef { body, .. } => {
                self.frames.push(Frame::default());
                self.block(body);
                if !self.done() {
                    self.frames.pop();
                }
            }
            StmtKind::Match { cases, .. } => {
                let before = self.frames.clone();
                let mut joined = before.clone();
                for case in cases {
                    self.frames = before.clone();
                    self.block(case);
                    if self.done() {
                        return;
                    }
                    let out = std::mem::take(&mut self.frames);
                    joined = join_frames(joined, out);
                }
                self.frames = joined;
            }
            StmtKind::Global(names) => {
                for n in names {
                    let id = self.syms.get(n);
                    self.frames.last_mut().expect("frame").globals.insert(id);
                }
            }
            StmtKind::Nonlocal(names) => {
                for n in names {
                    let id = self.syms.get(n);
                    self.frames.last_mut().expect("frame").nonlocals.insert(id);
                }
            }
            StmtKind::Delete(targets) => {
                for t in targets {
                    if let crate::frontend::Expr::Name(n) = t {
                        let id = self.syms.get(n);
                        self.bind(id, Vec::new());
                    }
                }
            }
            _ => {}
        }
    }

    fn finish(self) -> FlowAnalysis {
        let mut vars = BTreeMap::new();
        for frame in &self.frames {
            for (&k, paths) in &frame.vars {
                let rendered: Vec<Vec<String>> = paths
                    .iter()
                    .map(|p| p.iter().map(|&s| self.syms.name(s).to_string()).collect())
                    .collect();
                vars.insert(self.syms.name(k).to_string(), rendered);
            }
        }
        vars.retain(|_, v: &mut Vec<Vec<String>>| !v.is_empty());
        FlowAnalysis {
            edges: self.edges,
            state: FlowState { vars },
            hole: self.hole,
        }
    }
}

/// Analyzes a whole module.
pub fn analyze_module(module: &[Stmt]) -> FlowAnalysis {
    let mut engine = Engine::new(usize::MAX);
    engine.block(module);
    engine.finish()
}

/// Analyzes a context up to and including the statement holding the point.
pub fn analyze(ctx: &SourceContext) -> FlowAnalysis {
    let mut engine = Engine::new(ctx.point.line);
    engine.block(&ctx.module);
    engine.finish()
}

/// Edges of a complete source file.
pub fn file_edges(text: &str, file_id: &str) -> Result<Vec<FlowEdge>> {
    let module = crate::frontend::parse_module(text, file_id)?;
    Ok(analyze_module(&module).edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_context, parse_module, RecommendationPoint};

    fn module(src: &str) -> FlowAnalysis {
        analyze_module(&parse_module(src, "t.py").unwrap())
    }

    fn at_end(src: &str) -> FlowAnalysis {
        let p = RecommendationPoint::at_end("t.py", src).unwrap();
        analyze(&parse_context(src, &p).unwrap())
    }

    fn pairs(a: &FlowAnalysis) -> Vec<(String, String)> {
        let mut v: Vec<_> = a.edges.iter().map(|e| (e.src.clone(), e.dst.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    fn p(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unit_rules() {
        assert_eq!(pairs(&module("v = u\n")), vec![("u".into(), "v".into())]);
        assert_eq!(pairs(&module("u.v\n")), vec![("u".into(), "v".into())]);
        assert_eq!(
            pairs(&module("f(a + b)\n")),
            vec![("a".into(), "f".into()), ("b".into(), "f".into())]
        );
    }

    #[test]
    fn tuple_assignment_pairs_up() {
        assert_eq!(
            pairs(&module("a, b = c, d\n")),
            vec![("c".into(), "a".into()), ("d".into(), "b".into())]
        );
    }

    #[test]
    fn long_for_sequence() {
        let a = module("for v in u.f(e, x[y]):\n    pass\n");
        let mut dfs = a.state.dfs("v").to_vec();
        dfs.sort();
        assert_eq!(dfs, vec![p(&["e", "f", "v"]), p(&["u", "f", "v"]), p(&["y", "x", "f", "v"])]);
    }

    #[test]
    fn rebinding_kills() {
        let a = module("x = a\nx = b\n");
        assert_eq!(a.state.dfs("x"), &[p(&["b", "x"])]);
        let a = module("x = a\nx = 1\n");
        assert!(a.state.dfs("x").is_empty());
    }

    #[test]
    fn straight_line_preserves() {
        let a = module("x = a\ny = b\n");
        assert_eq!(a.state.dfs("x"), &[p(&["a", "x"])]);
        assert_eq!(a.state.dfs("y"), &[p(&["b", "y"])]);
    }

    #[test]
    fn locals_do_not_kill_outer() {
        let a = module("a = b\ndef f():\n    a = c\n");
        assert_eq!(a.state.dfs("a"), &[p(&["b", "a"])]);
        let a = module("a = b\ndef f():\n    global a\n    a = c\nf()\n");
        assert_eq!(a.state.dfs("a"), &[p(&["c", "a"])]);
    }

    #[test]
    fn branches_join() {
        let a = module("if t:\n    x = a\nelse:\n    x = b\n");
        let mut dfs = a.state.dfs("x").to_vec();
        dfs.sort();
        assert_eq!(dfs, vec![p(&["a", "x"]), p(&["b", "x"])]);
    }

    #[test]
    fn aliasing_is_ignored() {
        let a = module("b = a\na.f()\n");
        assert!(!a.edges.iter().any(|e| e.src == "b" && e.dst == "f"));
    }

    #[test]
    fn no_self_edges() {
        let a = module("x = x + 1\nx += x\n");
        assert!(a.edges.iter().all(|e| e.src != e.dst));
    }

    #[test]
    fn hole_with_sink() {
        let a = at_end("import pkg_resources\nfor entry_point in pkg_resources.");
        let paths = a.paths_to().unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes, p(&["pkg_resources", HOLE, "entry_point"]));
        assert_eq!(paths[0].hole_index, Some(1));
    }

    #[test]
    fn hole_with_several_sinks() {
        let src = "class C:\n    def run(self):\n        status, newtasks, result = self.";
        let paths = at_end(src).paths_to().unwrap();
        let rendered: Vec<Vec<String>> = paths.into_iter().map(|p| p.nodes).collect();
        assert!(rendered.contains(&p(&["self", HOLE, "status"])));
        assert!(rendered.contains(&p(&["self", HOLE, "status|newtasks|result"])));
        assert_eq!(rendered.len(), 4);
    }

    #[test]
    fn fresh_receiver_has_no_flow() {
        assert!(matches!(at_end("import os\nzz.").paths_to(), Err(Error::EmptyFlow)));
    }

    #[test]
    fn receiver_used_before_has_flow() {
        let a = at_end("x.append(1)\nx.");
        let paths = a.paths_to().unwrap();
        assert_eq!(paths[0].nodes, p(&["x", HOLE]));
    }

    #[test]
    fn upstream_follows_assignments() {
        let a = at_end("d = load(path)\nfor k, v in d.");
        let paths = a.paths_to().unwrap();
        assert!(paths
            .iter()
            .any(|fp| fp.nodes == p(&["path", "load", "d", HOLE, "k|v"])));
    }

    #[test]
    fn paths_are_capped_near_the_hole() {
        let src = "b = a\nc = b\nd = c\ne = d\nf = e\ng = f\nh = g\ni = h\nj = i\nk = j\nr = j.";
        let paths = at_end(src).paths_to().unwrap();
        for fp in &paths {
            assert!(fp.nodes.len() <= PATH_CAP);
            assert_eq!(fp.nodes[fp.nodes.len() - 2], HOLE);
        }
        assert_eq!(paths[0].nodes[..2], p(&["e", "f"])[..]);
    }

    #[test]
    fn nothing_after_the_point_is_used() {
        let src = "x = a\ny = x.real\nx = b\n";
        let point = RecommendationPoint::new("t.py", 2, 5);
        let a = analyze(&parse_context(src, &point).unwrap());
        assert!(a.edges.iter().all(|e| e.line <= 2));
        assert_eq!(a.hole.unwrap().upstream, vec![p(&["a", "x"])]);
    }
}
