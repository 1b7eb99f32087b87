//! Surface syntax tree of a B-lite machine, as produced by the parser.
//!
//! Identifiers are kept as names; resolution to variable indices and
//! parameter slots happens during elaboration.

/// A parsed `MACHINE ... END` definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub sets: Vec<SetDecl>,
    pub constants: Vec<ConstantDecl>,
    /// Declaration order fixes the state-vector layout.
    pub variables: Vec<VariableDecl>,
    /// INVARIANT conjuncts that are not variable typings.
    pub invariant: Vec<Expr>,
    pub initialisation: Stmt,
    pub operations: Vec<OperationDecl>,
}

/// `SETS Name = {a, b, c}`: an enumerated type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDecl {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: String,
    pub default: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub domain: DomainExpr,
}

/// Type of a variable or parameter before constants are bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainExpr {
    Bool,
    Range(Expr, Expr),
    Set(String),
}

/// A typed bound identifier: operation parameter or ANY variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub domain: DomainExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// Guard without the parameter typing conjuncts; `Expr::Bool(true)` for `BEGIN`.
    pub guard: Expr,
    pub body: Stmt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetExpr {
    Enumerated(Vec<Expr>),
    Range(Box<Expr>, Box<Expr>),
    Bool,
    Named(String),
}

/// Expressions and predicates share one tree; predicates are BOOL-typed.
///
/// `And` and `Or` are n-ary and kept flat: a conjunct is never itself an `And`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Ident(String),
    Neg(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Member {
        elem: Box<Expr>,
        set: SetExpr,
        negated: bool,
    },
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Builds a flattened conjunction; empty means TRUE.
    pub fn conjunction(parts: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Expr::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::Bool(true),
            1 => flat.pop().unwrap(),
            _ => Expr::And(flat),
        }
    }

    pub fn disjunction(parts: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Expr::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::Bool(false),
            1 => flat.pop().unwrap(),
            _ => Expr::Or(flat),
        }
    }

    /// Top-level conjuncts (a non-`And` expression is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::And(parts) => parts.iter().collect(),
            Expr::Bool(true) => Vec::new(),
            other => vec![other],
        }
    }

    /// Calls `f` on every identifier occurring in the expression.
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Bool(_) | Expr::Int(_) => {}
            Expr::Ident(name) => f(name),
            Expr::Neg(e) | Expr::Not(e) => e.for_each_ident(f),
            Expr::Arith(_, a, b) | Expr::Min(a, b) | Expr::Max(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
            }
            Expr::Member { elem, set, .. } => {
                elem.for_each_ident(f);
                match set {
                    SetExpr::Enumerated(items) => items.iter().for_each(|e| e.for_each_ident(f)),
                    SetExpr::Range(lo, hi) => {
                        lo.for_each_ident(f);
                        hi.for_each_ident(f);
                    }
                    SetExpr::Bool | SetExpr::Named(_) => {}
                }
            }
            Expr::And(parts) | Expr::Or(parts) => parts.iter().for_each(|e| e.for_each_ident(f)),
        }
    }

    pub fn mentions_any(&self, names: &[&str]) -> bool {
        let mut hit = false;
        self.for_each_ident(&mut |n| hit |= names.contains(&n));
        hit
    }
}

/// Generalised substitutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    /// `S || T`; components write disjoint variables and all read the pre-state.
    Parallel(Vec<Stmt>),
    If {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Option<Box<Stmt>>,
    },
    /// `ANY x, y WHERE P THEN S END`; `pred` excludes the typing conjuncts.
    Any {
        params: Vec<Param>,
        pred: Expr,
        body: Box<Stmt>,
    },
    /// `CHOICE S OR T END`.
    Choice(Vec<Stmt>),
}

impl Stmt {
    pub fn parallel(parts: Vec<Stmt>) -> Stmt {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Stmt::Parallel(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Stmt::Parallel(flat)
        }
    }
}
