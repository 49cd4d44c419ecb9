//! Abstract syntax units extracted from statements, in evaluation order
//! (operands before the constructs that consume them).

use serde::{Deserialize, Serialize};

use super::ast::{CollectionKind, Expr, Handler, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitKind {
    Assign,
    For,
    Invoke,
    Access,
    Para,
}

/// How an Assign/For unit installs its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// Plain name target: earlier flow into the name is killed.
    Rebind,
    /// Augmented assignment or subscript store: flow is added.
    Update,
    /// Attribute store `a.b = e`: the field object only lives in its statement.
    Field,
    /// Comprehension target: visible inside the comprehension only.
    Local,
    /// Assignment expression: visible immediately and after the statement.
    Walrus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstUnit {
    pub kind: UnitKind,
    pub line: usize,
    /// `v` of Assign/For/Invoke/Access.
    pub lhs: Option<String>,
    /// `VM(e)` for Assign/For/Access, `[u]` for Invoke.
    pub rhs: Vec<String>,
    /// `f` of Para.
    pub func: Option<String>,
    /// Objects of each argument of Para, empty arguments omitted.
    pub params: Vec<Vec<String>>,
    pub binding: Option<Binding>,
}

impl AstUnit {
    fn new(kind: UnitKind, line: usize) -> Self {
        AstUnit {
            kind,
            line,
            lhs: None,
            rhs: Vec::new(),
            func: None,
            params: Vec::new(),
            binding: None,
        }
    }

    /// Every identifier the unit mentions.
    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        self.lhs
            .iter()
            .chain(&self.rhs)
            .chain(&self.func)
            .chain(self.params.iter().flatten())
            .map(String::as_str)
    }
}

struct Collector {
    line: usize,
    out: Vec<AstUnit>,
}

impl Collector {
    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Name(_) | Expr::Literal(_) => {}
            Expr::Attribute { value, attr } => {
                self.expr(value);
                if let Some(u) = value.head() {
                    let mut unit = AstUnit::new(UnitKind::Invoke, self.line);
                    unit.lhs = Some(attr.clone());
                    unit.rhs = vec![u.to_string()];
                    self.out.push(unit);
                }
            }
            Expr::Call { func, args } => {
                self.expr(func);
                for a in args {
                    self.expr(a);
                }
                if let Some(f) = func.head() {
                    let params: Vec<Vec<String>> =
                        args.iter().map(Expr::objects).filter(|g| !g.is_empty()).collect();
                    if !params.is_empty() {
                        let mut unit = AstUnit::new(UnitKind::Para, self.line);
                        unit.func = Some(f.to_string());
                        unit.params = params;
                        self.out.push(unit);
                    }
                }
            }
            Expr::Subscript { value, index } => {
                self.expr(value);
                self.expr(index);
                self.access(value, index);
            }
            Expr::Collection { elts, .. } | Expr::Compound(elts) => {
                for x in elts {
                    self.expr(x);
                }
            }
            Expr::Comprehension { elts, generators, .. } => {
                for g in generators {
                    self.expr(&g.iter);
                    self.bind(&g.target, Some(&g.iter), UnitKind::For, Binding::Local);
                    for c in &g.ifs {
                        self.expr(c);
                    }
                }
                for x in elts {
                    self.expr(x);
                }
            }
            Expr::Lambda { body, .. } => self.expr(body),
            Expr::NamedExpr { target, value } => {
                self.expr(value);
                self.assign(target, value.objects(), UnitKind::Assign, Binding::Walrus);
            }
        }
    }

    fn access(&mut self, value: &Expr, index: &Expr) {
        if let Some(v) = value.head() {
            let rhs = index.objects();
            if !rhs.is_empty() {
                let mut unit = AstUnit::new(UnitKind::Access, self.line);
                unit.lhs = Some(v.to_string());
                unit.rhs = rhs;
                self.out.push(unit);
            }
        }
    }

    fn assign(&mut self, target: &str, rhs: Vec<String>, kind: UnitKind, binding: Binding) {
        // Rebinding to a value without objects still kills earlier flow.
        let kills = matches!(binding, Binding::Rebind | Binding::Walrus | Binding::Local);
        if rhs.is_empty() && !kills {
            return;
        }
        let mut unit = AstUnit::new(kind, self.line);
        unit.lhs = Some(target.to_string());
        unit.rhs = rhs;
        unit.binding = Some(binding);
        self.out.push(unit);
    }

    /// Units binding `target` to the objects of `value`. A missing value
    /// (e.g. `del`) still visits the target's subexpressions.
    fn bind(&mut self, target: &Expr, value: Option<&Expr>, kind: UnitKind, binding: Binding) {
        let rhs = || value.map(Expr::objects).unwrap_or_default();
        match target {
            Expr::Name(v) => self.assign(v, rhs(), kind, binding),
            Expr::Collection {
                kind: CollectionKind::Tuple | CollectionKind::List,
                elts,
            } => {
                let paired = match value {
                    Some(Expr::Collection {
                        kind: CollectionKind::Tuple | CollectionKind::List,
                        elts: vals,
                    }) if vals.len() == elts.len() => Some(vals),
                    _ => None,
                };
                for (i, t) in elts.iter().enumerate() {
                    match paired {
                        Some(vals) => self.bind(t, Some(&vals[i]), kind, binding),
                        None => self.bind(t, value, kind, binding),
                    }
                }
            }
            Expr::Attribute { attr, .. } => {
                self.expr(target);
                self.assign(attr, rhs(), kind, Binding::Field);
            }
            Expr::Subscript { value: obj, index } => {
                self.expr(obj);
                self.expr(index);
                self.access(obj, index);
                if let Some(v) = obj.head() {
                    let b = if binding == Binding::Local { Binding::Local } else { Binding::Update };
                    self.assign(v, rhs(), kind, b);
                }
            }
            other => self.expr(other),
        }
    }
}

/// Units of a statement's own header, excluding nested blocks.
pub fn statement_units(stmt: &Stmt) -> Vec<AstUnit> {
    let mut c = Collector {
        line: stmt.line,
        out: Vec::new(),
    };
    match &stmt.kind {
        StmtKind::Assign { targets, value } => {
            c.expr(value);
            for t in targets {
                c.bind(t, Some(value), UnitKind::Assign, Binding::Rebind);
            }
        }
        StmtKind::AugAssign { target, value } => {
            c.expr(value);
            if let Expr::Name(_) = target {
                c.bind(target, Some(value), UnitKind::Assign, Binding::Update);
            } else {
                c.bind(target, Some(value), UnitKind::Assign, Binding::Rebind);
            }
        }
        StmtKind::For { target, iter, .. } => {
            c.expr(iter);
            c.bind(target, Some(iter), UnitKind::For, Binding::Rebind);
        }
        StmtKind::While { test, .. } | StmtKind::If { test, .. } => c.expr(test),
        StmtKind::With { items, .. } => {
            for (ctx, var) in items {
                c.expr(ctx);
                if let Some(v) = var {
                    c.bind(v, Some(ctx), UnitKind::Assign, Binding::Rebind);
                }
            }
        }
        StmtKind::FunctionDef {
            defaults, decorators, ..
        } => {
            for e in decorators.iter().chain(defaults) {
                c.expr(e);
            }
        }
        StmtKind::ClassDef { bases, decorators, .. } => {
            for e in decorators.iter().chain(bases) {
                c.expr(e);
            }
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                c.expr(e);
            }
        }
        StmtKind::Expr(e) => c.expr(e),
        StmtKind::Delete(targets) => {
            for t in targets {
                if !matches!(t, Expr::Name(_)) {
                    c.expr(t);
                }
            }
        }
        StmtKind::Match { subject, .. } => c.expr(subject),
        StmtKind::Other(exprs) => {
            for e in exprs {
                c.expr(e);
            }
        }
        StmtKind::Try { .. }
        | StmtKind::Import(_)
        | StmtKind::ImportFrom { .. }
        | StmtKind::Global(_)
        | StmtKind::Nonlocal(_) => {}
    }
    c.out
}

/// Units of an `except E as e:` clause header.
pub fn handler_units(h: &Handler) -> Vec<AstUnit> {
    let mut c = Collector {
        line: h.line,
        out: Vec::new(),
    };
    if let Some(t) = &h.type_ {
        c.expr(t);
        if let Some(name) = &h.name {
            c.assign(name, t.objects(), UnitKind::Assign, Binding::Rebind);
        }
    }
    c.out
}
