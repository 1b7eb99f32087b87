use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::ir::*;
use super::normalize::normalize;
use super::ModelError;
use crate::semantics::{self, StateVector};

pub const DEFAULT_ENUMERATION_BOUND: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct ElaborationOptions {
    /// Cap on candidate parameter tuples per successor computation.
    pub enumeration_bound: u64,
}

impl Default for ElaborationOptions {
    fn default() -> Self {
        Self {
            enumeration_bound: DEFAULT_ENUMERATION_BOUND,
        }
    }
}

/// Binds constants, computes finite domains, typechecks and compiles every
/// operation, and materializes the initial states.
pub fn elaborate(m: &Machine, constant_overrides: &BTreeMap<String, i64>) -> Result<ElaboratedMachine, ModelError> {
    elaborate_with(m, constant_overrides, &ElaborationOptions::default())
}

pub fn elaborate_with(
    m: &Machine,
    constant_overrides: &BTreeMap<String, i64>,
    options: &ElaborationOptions,
) -> Result<ElaboratedMachine, ModelError> {
    for name in constant_overrides.keys() {
        if !m.constants.iter().any(|c| &c.name == name) {
            return Err(ModelError::UnknownConstant(name.clone()));
        }
    }
    let mut constants = HashMap::new();
    for c in &m.constants {
        let v = constant_overrides
            .get(&c.name)
            .copied()
            .or(c.default)
            .ok_or_else(|| ModelError::UnresolvedConstant(c.name.clone()))?;
        constants.insert(c.name.clone(), v);
    }

    let mut labels = HashMap::new();
    for (k, s) in m.sets.iter().enumerate() {
        for (ord, l) in s.labels.iter().enumerate() {
            labels.insert(l.clone(), (k, ord as i64));
        }
    }

    let mut cx = Compiler {
        machine: m,
        constants,
        labels,
        vars: HashMap::new(),
        scopes: Vec::new(),
        next_slot: 0,
        context: String::new(),
        init_mode: false,
    };

    let mut variables = Vec::with_capacity(m.variables.len());
    for (k, v) in m.variables.iter().enumerate() {
        cx.context = format!("type of '{}'", v.name);
        let domain = cx.domain(&v.name, &v.domain)?;
        cx.vars.insert(v.name.clone(), (k, Type::of(&domain, m)));
        variables.push(VarInfo {
            name: v.name.clone(),
            domain,
        });
    }

    let mut invariant = Vec::new();
    for (k, e) in m.invariant.iter().enumerate() {
        cx.context = format!("INVARIANT conjunct {}", k + 1);
        invariant.push(cx.pred(e)?);
    }

    let mut groups = Vec::with_capacity(m.operations.len());
    let mut original_groups = Vec::with_capacity(m.operations.len());
    for op in &m.operations {
        cx.context = format!("operation '{}'", op.name);
        let n = normalize(op);
        groups.push(cx.group(&n.name, &[], &n.guard, &n.body)?);
        original_groups.push(cx.group(&op.name, &op.params, &op.guard, &op.body)?);
    }

    cx.context = "INITIALISATION".into();
    cx.init_mode = true;
    cx.next_slot = 0;
    let init = cx.stmt(&m.initialisation)?;
    let init_slots = cx.next_slot;

    let mut em = ElaboratedMachine {
        name: m.name.clone(),
        variables,
        groups,
        original_groups,
        initial_states: Vec::new(),
        invariant,
        enumeration_bound: options.enumeration_bound,
    };
    em.initial_states = initial_states(&em, &init, init_slots)?;
    Ok(em)
}

fn initial_states(em: &ElaboratedMachine, init: &Action, slots: usize) -> Result<Vec<StateVector>, ModelError> {
    let n = em.num_vars();
    let blank = vec![0u32; n];
    let updates = semantics::execute(em, "INITIALISATION", init, &blank, slots)
        .map_err(|e| ModelError::Initialisation(e.to_string()))?;
    let mut states = BTreeSet::new();
    for update in updates {
        let mut assigned = vec![false; n];
        let mut s = blank.clone();
        for (var, value) in update {
            let dom = &em.variables[var].domain;
            let idx = dom.index_of(value).ok_or_else(|| {
                ModelError::Initialisation(format!("value {value} for '{}' outside {dom}", em.variables[var].name))
            })?;
            s[var] = idx;
            assigned[var] = true;
        }
        if let Some(k) = assigned.iter().position(|a| !a) {
            return Err(ModelError::Initialisation(format!(
                "variable '{}' is not assigned on every path",
                em.variables[k].name
            )));
        }
        states.insert(StateVector::from(s));
    }
    if states.is_empty() {
        return Err(ModelError::Initialisation("no initial state".into()));
    }
    Ok(states.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Type {
    Bool,
    Int,
    Enum(usize),
}

impl Type {
    fn of(d: &Domain, m: &Machine) -> Type {
        match d {
            Domain::Bool => Type::Bool,
            Domain::IntRange { .. } => Type::Int,
            Domain::Enum { name, .. } => Type::Enum(m.sets.iter().position(|s| &s.name == name).unwrap()),
        }
    }

    fn describe(self, m: &Machine) -> String {
        match self {
            Type::Bool => "BOOL".into(),
            Type::Int => "INTEGER".into(),
            Type::Enum(k) => m.sets[k].name.clone(),
        }
    }
}

struct Compiler<'m> {
    machine: &'m Machine,
    constants: HashMap<String, i64>,
    labels: HashMap<String, (usize, i64)>,
    vars: HashMap<String, (usize, Type)>,
    /// Bound parameters, innermost last: (name, slot, type).
    scopes: Vec<(String, usize, Type)>,
    next_slot: usize,
    context: String,
    /// INITIALISATION may not read state variables.
    init_mode: bool,
}

type CResult<T> = Result<T, ModelError>;

impl Compiler<'_> {
    fn type_error<T>(&self, message: impl Into<String>) -> CResult<T> {
        Err(ModelError::Type {
            context: self.context.clone(),
            message: message.into(),
        })
    }

    fn const_eval(&self, e: &Expr) -> CResult<i64> {
        Ok(match e {
            Expr::Int(v) => *v,
            Expr::Ident(name) => match self.constants.get(name) {
                Some(v) => *v,
                None => return self.type_error(format!("'{name}' is not an integer constant")),
            },
            Expr::Neg(a) => -self.const_eval(a)?,
            Expr::Arith(op, a, b) => {
                let (a, b) = (self.const_eval(a)?, self.const_eval(b)?);
                match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                }
            }
            Expr::Min(a, b) => self.const_eval(a)?.min(self.const_eval(b)?),
            Expr::Max(a, b) => self.const_eval(a)?.max(self.const_eval(b)?),
            _ => return self.type_error("domain bounds must be constant integer expressions"),
        })
    }

    fn domain(&self, name: &str, d: &DomainExpr) -> CResult<Domain> {
        Ok(match d {
            DomainExpr::Bool => Domain::Bool,
            DomainExpr::Range(lo, hi) => {
                let (lo, hi) = (self.const_eval(lo)?, self.const_eval(hi)?);
                if lo > hi {
                    return Err(ModelError::EmptyDomain {
                        name: name.to_string(),
                        lo,
                        hi,
                    });
                }
                Domain::IntRange { lo, hi }
            }
            DomainExpr::Set(s) => {
                let set = self.machine.sets.iter().find(|x| &x.name == s).unwrap();
                Domain::Enum {
                    name: set.name.clone(),
                    labels: set.labels.clone(),
                }
            }
        })
    }

    fn bind(&mut self, params: &[Param]) -> CResult<Vec<ParamSlot>> {
        let mut out = Vec::with_capacity(params.len());
        for p in params {
            let domain = self.domain(&p.name, &p.domain)?;
            let ty = Type::of(&domain, self.machine);
            let slot = self.next_slot;
            self.next_slot += 1;
            self.scopes.push((p.name.clone(), slot, ty));
            out.push(ParamSlot {
                name: p.name.clone(),
                slot,
                domain,
            });
        }
        Ok(out)
    }

    fn unbind(&mut self, count: usize) {
        let keep = self.scopes.len() - count;
        self.scopes.truncate(keep);
    }

    fn group(&mut self, name: &str, params: &[Param], guard: &Expr, body: &Stmt) -> CResult<Group> {
        self.next_slot = 0;
        let params = self.bind(params)?;
        let guard = self.pred(guard);
        let body = guard.and_then(|g| Ok((g, self.stmt(body)?)));
        self.unbind(params.len());
        let (guard, body) = body?;
        Ok(Group {
            name: name.to_string(),
            params,
            guard,
            body,
            slots: self.next_slot,
        })
    }

    fn pred(&mut self, e: &Expr) -> CResult<Term> {
        let (t, ty) = self.expr(e)?;
        if ty != Type::Bool {
            return self.type_error(format!("expected a predicate, found {}", ty.describe(self.machine)));
        }
        Ok(t)
    }

    fn int(&mut self, e: &Expr) -> CResult<Term> {
        let (t, ty) = self.expr(e)?;
        if ty != Type::Int {
            return self.type_error(format!("expected an integer, found {}", ty.describe(self.machine)));
        }
        Ok(t)
    }

    fn expr(&mut self, e: &Expr) -> CResult<(Term, Type)> {
        let b = Box::new;
        Ok(match e {
            Expr::Bool(v) => (Term::Const(*v as i64), Type::Bool),
            Expr::Int(v) => (Term::Const(*v), Type::Int),
            Expr::Ident(name) => {
                if let Some((_, slot, ty)) = self.scopes.iter().rev().find(|(n, ..)| n == name) {
                    (Term::Param(*slot), *ty)
                } else if let Some(&(k, ty)) = self.vars.get(name) {
                    if self.init_mode {
                        return self.type_error(format!("variable '{name}' read before initialisation"));
                    }
                    (Term::Var(k), ty)
                } else if let Some(&v) = self.constants.get(name) {
                    (Term::Const(v), Type::Int)
                } else if let Some(&(set, ord)) = self.labels.get(name) {
                    (Term::Const(ord), Type::Enum(set))
                } else {
                    return self.type_error(format!("unknown identifier '{name}'"));
                }
            }
            Expr::Neg(a) => (Term::Neg(b(self.int(a)?)), Type::Int),
            Expr::Arith(op, x, y) => {
                let (x, y) = (b(self.int(x)?), b(self.int(y)?));
                let t = match op {
                    ArithOp::Add => Term::Add(x, y),
                    ArithOp::Sub => Term::Sub(x, y),
                    ArithOp::Mul => Term::Mul(x, y),
                };
                (t, Type::Int)
            }
            Expr::Min(x, y) => (Term::Min(b(self.int(x)?), b(self.int(y)?)), Type::Int),
            Expr::Max(x, y) => (Term::Max(b(self.int(x)?), b(self.int(y)?)), Type::Int),
            Expr::Cmp(op, x, y) => {
                let (tx, kx) = self.expr(x)?;
                let (ty, ky) = self.expr(y)?;
                if kx != ky {
                    return self.type_error(format!(
                        "cannot compare {} with {}",
                        kx.describe(self.machine),
                        ky.describe(self.machine)
                    ));
                }
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) && kx != Type::Int {
                    return self.type_error("ordering comparison on non-integer values");
                }
                (Term::Cmp(*op, b(tx), b(ty)), Type::Bool)
            }
            Expr::Member { elem, set, negated } => {
                let (te, ke) = self.expr(elem)?;
                let member = match set {
                    SetExpr::Bool => {
                        if ke != Type::Bool {
                            return self.type_error("membership in BOOL of a non-boolean");
                        }
                        Term::Const(1)
                    }
                    SetExpr::Named(s) => {
                        let k = self.machine.sets.iter().position(|x| &x.name == s).unwrap();
                        if ke != Type::Enum(k) {
                            return self.type_error(format!("membership in {s} of a non-{s} value"));
                        }
                        Term::Const(1)
                    }
                    SetExpr::Range(lo, hi) => {
                        if ke != Type::Int {
                            return self.type_error("range membership of a non-integer");
                        }
                        Term::InRange(b(te), b(self.int(lo)?), b(self.int(hi)?))
                    }
                    SetExpr::Enumerated(items) => {
                        let mut ts = Vec::with_capacity(items.len());
                        for i in items {
                            let (ti, ki) = self.expr(i)?;
                            if ki != ke {
                                return self.type_error("set element of a different type");
                            }
                            ts.push(ti);
                        }
                        Term::InSet(b(te), ts)
                    }
                };
                if *negated {
                    (Term::Not(b(member)), Type::Bool)
                } else {
                    (member, Type::Bool)
                }
            }
            Expr::And(parts) => (
                Term::And(parts.iter().map(|p| self.pred(p)).collect::<CResult<_>>()?),
                Type::Bool,
            ),
            Expr::Or(parts) => (
                Term::Or(parts.iter().map(|p| self.pred(p)).collect::<CResult<_>>()?),
                Type::Bool,
            ),
            Expr::Not(a) => (Term::Not(b(self.pred(a)?)), Type::Bool),
            Expr::Implies(x, y) => (Term::Implies(b(self.pred(x)?), b(self.pred(y)?)), Type::Bool),
        })
    }

    fn stmt(&mut self, s: &Stmt) -> CResult<Action> {
        Ok(match s {
            Stmt::Skip => Action::Skip,
            Stmt::Assign(v, e) => {
                let Some(&(k, ty)) = self.vars.get(v) else {
                    return self.type_error(format!("'{v}' is not a variable"));
                };
                let (t, te) = self.expr(e)?;
                if te != ty {
                    return self.type_error(format!(
                        "assigning {} to '{v}' of type {}",
                        te.describe(self.machine),
                        ty.describe(self.machine)
                    ));
                }
                Action::Assign(k, t)
            }
            Stmt::Parallel(parts) => {
                let mut seen = BTreeSet::new();
                let mut actions = Vec::with_capacity(parts.len());
                for p in parts {
                    let a = self.stmt(p)?;
                    for w in written(&a) {
                        if !seen.insert(w) {
                            return self.type_error(format!(
                                "variable '{}' assigned twice in a parallel substitution",
                                self.machine.variables[w].name
                            ));
                        }
                    }
                    actions.push(a);
                }
                Action::Parallel(actions)
            }
            Stmt::If { cond, then, otherwise } => Action::If {
                cond: self.pred(cond)?,
                then: Box::new(self.stmt(then)?),
                otherwise: match otherwise {
                    Some(o) => Some(Box::new(self.stmt(o)?)),
                    None => None,
                },
            },
            Stmt::Any { params, pred, body } => {
                let slots = self.bind(params)?;
                let compiled = self.pred(pred).and_then(|p| Ok((p, self.stmt(body)?)));
                self.unbind(slots.len());
                let (pred, body) = compiled?;
                Action::Any {
                    params: slots,
                    pred,
                    body: Box::new(body),
                }
            }
            Stmt::Choice(branches) => Action::Choice(branches.iter().map(|b| self.stmt(b)).collect::<CResult<_>>()?),
        })
    }
}

/// Variables assigned on some path of `a`.
pub(crate) fn written(a: &Action) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    fn walk(a: &Action, out: &mut BTreeSet<usize>) {
        match a {
            Action::Skip => {}
            Action::Assign(v, _) => {
                out.insert(*v);
            }
            Action::Parallel(parts) | Action::Choice(parts) => parts.iter().for_each(|p| walk(p, out)),
            Action::If { then, otherwise, .. } => {
                walk(then, out);
                if let Some(o) = otherwise {
                    walk(o, out);
                }
            }
            Action::Any { body, .. } => walk(body, out),
        }
    }
    walk(a, &mut out);
    out
}
