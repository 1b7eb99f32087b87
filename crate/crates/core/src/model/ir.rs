//! Resolved, typed form of a machine: the partitioned transition system
//! that the semantics, dependency analysis and engine work on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::CmpOp;
use crate::semantics::StateVector;

/// Finite value domain of a variable or parameter.
///
/// Values are stored in state vectors as indices into the canonical order:
/// `[FALSE, TRUE]` for BOOL, ascending for ranges, declaration order for enums.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Bool,
    IntRange { lo: i64, hi: i64 },
    Enum { name: String, labels: Vec<String> },
}

impl Domain {
    pub fn size(&self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::IntRange { lo, hi } => (hi - lo + 1).max(0) as u64,
            Domain::Enum { labels, .. } => labels.len() as u64,
        }
    }

    /// Runtime value (BOOL as 0/1, enum as ordinal) of an index.
    pub fn value_of(&self, index: u32) -> i64 {
        match self {
            Domain::IntRange { lo, .. } => lo + index as i64,
            _ => index as i64,
        }
    }

    pub fn index_of(&self, value: i64) -> Option<u32> {
        let idx = match self {
            Domain::IntRange { lo, .. } => value - lo,
            _ => value,
        };
        (idx >= 0 && (idx as u64) < self.size()).then_some(idx as u32)
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.size() as u32).map(move |i| self.value_of(i))
    }

    /// Human-readable rendering of the value at `index`.
    pub fn label(&self, index: u32) -> String {
        match self {
            Domain::Bool => if index == 0 { "FALSE" } else { "TRUE" }.to_string(),
            Domain::IntRange { lo, .. } => (lo + index as i64).to_string(),
            Domain::Enum { labels, .. } => labels
                .get(index as usize)
                .cloned()
                .unwrap_or_else(|| format!("#{index}")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => write!(f, "BOOL"),
            Domain::IntRange { lo, hi } => write!(f, "{lo}..{hi}"),
            Domain::Enum { name, .. } => write!(f, "{name}"),
        }
    }
}

/// Compiled expression. Every value is an `i64`; booleans are 0/1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Const(i64),
    Var(usize),
    Param(usize),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Min(Box<Term>, Box<Term>),
    Max(Box<Term>, Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    InSet(Box<Term>, Vec<Term>),
    InRange(Box<Term>, Box<Term>, Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Not(Box<Term>),
    Implies(Box<Term>, Box<Term>),
}

impl Term {
    pub fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Const(_) | Term::Param(_) => {}
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Neg(a) | Term::Not(a) => a.collect_vars(out),
            Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Mul(a, b)
            | Term::Min(a, b)
            | Term::Max(a, b)
            | Term::Cmp(_, a, b)
            | Term::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::InSet(e, items) => {
                e.collect_vars(out);
                items.iter().for_each(|i| i.collect_vars(out));
            }
            Term::InRange(e, lo, hi) => {
                e.collect_vars(out);
                lo.collect_vars(out);
                hi.collect_vars(out);
            }
            Term::And(parts) | Term::Or(parts) => parts.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Term {
        let b = |t: &Term| Box::new(t.map_vars(f));
        match self {
            Term::Const(c) => Term::Const(*c),
            Term::Var(v) => Term::Var(f(*v)),
            Term::Param(p) => Term::Param(*p),
            Term::Neg(a) => Term::Neg(b(a)),
            Term::Not(a) => Term::Not(b(a)),
            Term::Add(x, y) => Term::Add(b(x), b(y)),
            Term::Sub(x, y) => Term::Sub(b(x), b(y)),
            Term::Mul(x, y) => Term::Mul(b(x), b(y)),
            Term::Min(x, y) => Term::Min(b(x), b(y)),
            Term::Max(x, y) => Term::Max(b(x), b(y)),
            Term::Cmp(op, x, y) => Term::Cmp(*op, b(x), b(y)),
            Term::Implies(x, y) => Term::Implies(b(x), b(y)),
            Term::InSet(e, items) => Term::InSet(b(e), items.iter().map(|i| i.map_vars(f)).collect()),
            Term::InRange(e, lo, hi) => Term::InRange(b(e), b(lo), b(hi)),
            Term::And(parts) => Term::And(parts.iter().map(|p| p.map_vars(f)).collect()),
            Term::Or(parts) => Term::Or(parts.iter().map(|p| p.map_vars(f)).collect()),
        }
    }
}

/// A bound identifier with its environment slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSlot {
    pub name: String,
    pub slot: usize,
    pub domain: Domain,
}

/// Compiled substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Skip,
    Assign(usize, Term),
    Parallel(Vec<Action>),
    If {
        cond: Term,
        then: Box<Action>,
        otherwise: Option<Box<Action>>,
    },
    Any {
        params: Vec<ParamSlot>,
        pred: Term,
        body: Box<Action>,
    },
    Choice(Vec<Action>),
}

impl Action {
    pub(crate) fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Action {
        match self {
            Action::Skip => Action::Skip,
            Action::Assign(v, t) => Action::Assign(f(*v), t.map_vars(f)),
            Action::Parallel(parts) => Action::Parallel(parts.iter().map(|p| p.map_vars(f)).collect()),
            Action::If { cond, then, otherwise } => Action::If {
                cond: cond.map_vars(f),
                then: Box::new(then.map_vars(f)),
                otherwise: otherwise.as_ref().map(|o| Box::new(o.map_vars(f))),
            },
            Action::Any { params, pred, body } => Action::Any {
                params: params.clone(),
                pred: pred.map_vars(f),
                body: Box::new(body.map_vars(f)),
            },
            Action::Choice(branches) => Action::Choice(branches.iter().map(|b| b.map_vars(f)).collect()),
        }
    }
}

/// One transition group: an operation over the state vector.
///
/// Groups built from normalized operations have no `params`; their
/// parameters are enumerated by an `ANY` in the body instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub params: Vec<ParamSlot>,
    pub guard: Term,
    pub body: Action,
    /// Size of the parameter environment.
    pub slots: usize,
}

impl Group {
    pub(crate) fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Group {
        Group {
            name: self.name.clone(),
            params: self.params.clone(),
            guard: self.guard.map_vars(f),
            body: self.body.map_vars(f),
            slots: self.slots,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub domain: Domain,
}

/// A closed, finite-domain machine ready for exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElaboratedMachine {
    pub name: String,
    pub variables: Vec<VarInfo>,
    /// Normalized operations, one transition group each.
    pub groups: Vec<Group>,
    /// The same operations compiled without normalization.
    pub original_groups: Vec<Group>,
    pub initial_states: Vec<StateVector>,
    /// Non-typing INVARIANT conjuncts.
    pub invariant: Vec<Term>,
    /// Cap on candidate parameter tuples per successor computation.
    pub enumeration_bound: u64,
}

impl ElaboratedMachine {
    /// Number of state variables (N).
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Number of transition groups (M).
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn domains(&self) -> Vec<Domain> {
        self.variables.iter().map(|v| v.domain.clone()).collect()
    }

    /// Renders a state as `name=value` pairs.
    pub fn format_state(&self, state: &[u32]) -> String {
        self.variables
            .iter()
            .zip(state)
            .map(|(v, &i)| format!("{}={}", v.name, v.domain.label(i)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Moves variables to new positions; `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> ElaboratedMachine {
        assert_eq!(perm.len(), self.num_vars(), "permutation length");
        let mut new_pos = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            new_pos[old] = new;
        }
        let f = |v: usize| new_pos[v];
        let mut initial_states: Vec<StateVector> = self
            .initial_states
            .iter()
            .map(|s| StateVector::from(perm.iter().map(|&old| s[old]).collect::<Vec<_>>()))
            .collect();
        initial_states.sort();
        ElaboratedMachine {
            name: self.name.clone(),
            variables: perm.iter().map(|&old| self.variables[old].clone()).collect(),
            groups: self.groups.iter().map(|g| g.map_vars(&f)).collect(),
            original_groups: self.original_groups.iter().map(|g| g.map_vars(&f)).collect(),
            initial_states,
            invariant: self.invariant.iter().map(|t| t.map_vars(&f)).collect(),
            enumeration_bound: self.enumeration_bound,
        }
    }
}
