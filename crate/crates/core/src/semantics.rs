//! Reference interpreter for elaborated machines: guard evaluation,
//! successor computation and explicit-state breadth-first exploration.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ast::CmpOp;
use crate::model::{Action, ElaboratedMachine, Group, ParamSlot, Term};

pub const DEFAULT_STATE_LIMIT: usize = 10_000_000;

/// A full state: one domain index per variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<u32>);

impl StateVector {
    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for StateVector {
    fn from(v: Vec<u32>) -> Self {
        StateVector(v)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("operation '{operation}' assigns {value} to '{variable}', outside its domain {domain}")]
    OutOfDomain {
        operation: String,
        variable: String,
        value: i64,
        domain: String,
    },
    #[error("operation '{operation}' exceeds the enumeration bound of {bound} parameter tuples")]
    EnumerationBound { operation: String, bound: u64 },
    #[error("explicit exploration exceeded the limit of {0} states")]
    StateLimit(usize),
}

/// Evaluates a term against a full state and a parameter environment.
/// Arithmetic wraps; only assignment targets are range-checked.
pub fn eval(em: &ElaboratedMachine, t: &Term, state: &[u32], env: &[i64]) -> i64 {
    let ev = |x: &Term| eval(em, x, state, env);
    match t {
        Term::Const(c) => *c,
        Term::Var(v) => em.variables[*v].domain.value_of(state[*v]),
        Term::Param(p) => env[*p],
        Term::Neg(a) => ev(a).wrapping_neg(),
        Term::Add(a, b) => ev(a).wrapping_add(ev(b)),
        Term::Sub(a, b) => ev(a).wrapping_sub(ev(b)),
        Term::Mul(a, b) => ev(a).wrapping_mul(ev(b)),
        Term::Min(a, b) => ev(a).min(ev(b)),
        Term::Max(a, b) => ev(a).max(ev(b)),
        Term::Cmp(op, a, b) => {
            let (a, b) = (ev(a), ev(b));
            (match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
            }) as i64
        }
        Term::InSet(e, items) => {
            let v = ev(e);
            items.iter().any(|i| ev(i) == v) as i64
        }
        Term::InRange(e, lo, hi) => {
            let v = ev(e);
            (ev(lo) <= v && v <= ev(hi)) as i64
        }
        Term::And(parts) => parts.iter().all(|p| ev(p) != 0) as i64,
        Term::Or(parts) => parts.iter().any(|p| ev(p) != 0) as i64,
        Term::Not(a) => (ev(a) == 0) as i64,
        Term::Implies(a, b) => (ev(a) == 0 || ev(b) != 0) as i64,
    }
}

pub fn eval_pred(em: &ElaboratedMachine, p: &Term, state: &[u32], env: &[i64]) -> bool {
    eval(em, p, state, env) != 0
}

/// A set of simultaneous assignments, as (variable, value) pairs.
pub(crate) type Update = Vec<(usize, i64)>;

struct Exec<'a> {
    em: &'a ElaboratedMachine,
    operation: &'a str,
    state: &'a [u32],
    env: Vec<i64>,
    budget: u64,
}

impl Exec<'_> {
    fn spend(&mut self) -> Result<(), SemanticsError> {
        if self.budget == 0 {
            return Err(SemanticsError::EnumerationBound {
                operation: self.operation.to_string(),
                bound: self.em.enumeration_bound,
            });
        }
        self.budget -= 1;
        Ok(())
    }

    /// Calls `f` once per valuation of `params` (last parameter varies fastest).
    fn each_binding(
        &mut self,
        params: &[ParamSlot],
        f: &mut dyn FnMut(&mut Self) -> Result<(), SemanticsError>,
    ) -> Result<(), SemanticsError> {
        match params.split_first() {
            None => {
                self.spend()?;
                f(self)
            }
            Some((p, rest)) => {
                for v in p.domain.values() {
                    self.env[p.slot] = v;
                    self.each_binding(rest, f)?;
                }
                Ok(())
            }
        }
    }

    fn run(&mut self, a: &Action) -> Result<Vec<Update>, SemanticsError> {
        Ok(match a {
            Action::Skip => vec![Vec::new()],
            Action::Assign(v, t) => vec![vec![(*v, eval(self.em, t, self.state, &self.env))]],
            Action::Parallel(parts) => {
                let mut acc: Vec<Update> = vec![Vec::new()];
                for p in parts {
                    let branch = self.run(p)?;
                    let mut next = Vec::with_capacity(acc.len() * branch.len());
                    for a in &acc {
                        for b in &branch {
                            let mut u = a.clone();
                            u.extend_from_slice(b);
                            next.push(u);
                        }
                    }
                    acc = next;
                }
                acc
            }
            Action::If { cond, then, otherwise } => {
                if eval_pred(self.em, cond, self.state, &self.env) {
                    self.run(then)?
                } else if let Some(o) = otherwise {
                    self.run(o)?
                } else {
                    vec![Vec::new()]
                }
            }
            Action::Choice(branches) => {
                let mut out = Vec::new();
                for b in branches {
                    out.extend(self.run(b)?);
                }
                out
            }
            Action::Any { params, pred, body } => {
                let mut out = Vec::new();
                self.each_binding(params, &mut |x| {
                    if eval_pred(x.em, pred, x.state, &x.env) {
                        out.extend(x.run(body)?);
                    }
                    Ok(())
                })?;
                out
            }
        })
    }
}

/// Runs an action at `state`, returning every possible update.
pub(crate) fn execute(
    em: &ElaboratedMachine,
    operation: &str,
    action: &Action,
    state: &[u32],
    slots: usize,
) -> Result<Vec<Update>, SemanticsError> {
    let mut x = Exec {
        em,
        operation,
        state,
        env: vec![0; slots],
        budget: em.enumeration_bound,
    };
    x.run(action)
}

fn apply(
    em: &ElaboratedMachine,
    operation: &str,
    state: &[u32],
    update: &Update,
) -> Result<StateVector, SemanticsError> {
    let mut t = state.to_vec();
    for &(v, value) in update {
        let var = &em.variables[v];
        t[v] = var.domain.index_of(value).ok_or_else(|| SemanticsError::OutOfDomain {
            operation: operation.to_string(),
            variable: var.name.clone(),
            value,
            domain: var.domain.to_string(),
        })?;
    }
    Ok(StateVector(t))
}

/// All successors of `state` under an arbitrary compiled group.
pub fn successors_of(
    em: &ElaboratedMachine,
    group: &Group,
    state: &[u32],
) -> Result<BTreeSet<StateVector>, SemanticsError> {
    let mut x = Exec {
        em,
        operation: &group.name,
        state,
        env: vec![0; group.slots],
        budget: em.enumeration_bound,
    };
    let mut out = BTreeSet::new();
    x.each_binding(&group.params, &mut |x| {
        if eval_pred(x.em, &group.guard, x.state, &x.env) {
            for u in x.run(&group.body)? {
                out.insert(apply(x.em, &group.name, x.state, &u)?);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// All `t` with `state →_group t`; empty iff the group is disabled.
pub fn successors(
    em: &ElaboratedMachine,
    group: usize,
    state: &[u32],
) -> Result<BTreeSet<StateVector>, SemanticsError> {
    successors_of(em, &em.groups[group], state)
}

/// Index of the first invariant conjunct violated at `state`.
pub fn violated_invariant(em: &ElaboratedMachine, state: &[u32]) -> Option<usize> {
    em.invariant.iter().position(|t| !eval_pred(em, t, state, &[]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitReachResult {
    /// Reachable states in discovery order (levels ascending, lexicographic within a level).
    pub states: Vec<StateVector>,
    /// (source index, group, target index) into `states`, sorted.
    pub transitions: Vec<(u32, u32, u32)>,
    pub nextstate_calls: u64,
    pub deadlocks: BTreeSet<StateVector>,
    /// Number of states in each BFS level.
    pub level_sizes: Vec<usize>,
}

impl ExplicitReachResult {
    pub fn state_set(&self) -> BTreeSet<StateVector> {
        self.states.iter().cloned().collect()
    }

    /// Writes the state table followed by one `srcIdx groupName dstIdx` line per edge.
    pub fn write_graph(&self, em: &ElaboratedMachine, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "states {}", self.states.len())?;
        for (k, s) in self.states.iter().enumerate() {
            writeln!(w, "{k} {}", em.format_state(s))?;
        }
        writeln!(w, "transitions {}", self.transitions.len())?;
        for &(src, g, dst) in &self.transitions {
            writeln!(w, "{src} {} {dst}", em.groups[g as usize].name)?;
        }
        Ok(())
    }
}

pub fn explicit_reach(em: &ElaboratedMachine) -> Result<ExplicitReachResult, SemanticsError> {
    explicit_reach_with(em, DEFAULT_STATE_LIMIT)
}

/// Breadth-first exploration calling every group at every state.
pub fn explicit_reach_with(em: &ElaboratedMachine, state_limit: usize) -> Result<ExplicitReachResult, SemanticsError> {
    let mut index: HashMap<StateVector, u32> = HashMap::new();
    let mut states: Vec<StateVector> = Vec::new();
    let mut transitions = Vec::new();
    let mut deadlocks = BTreeSet::new();
    let mut calls = 0u64;
    let mut level_sizes = Vec::new();

    let mut level: BTreeSet<StateVector> = em.initial_states.iter().cloned().collect();
    while !level.is_empty() {
        level_sizes.push(level.len());
        let ids: Vec<u32> = level
            .iter()
            .map(|s| {
                let id = states.len() as u32;
                index.insert(s.clone(), id);
                states.push(s.clone());
                id
            })
            .collect();
        if states.len() > state_limit {
            return Err(SemanticsError::StateLimit(state_limit));
        }
        let mut pending: Vec<(u32, u32, StateVector)> = Vec::new();
        let mut next = BTreeSet::new();
        for (s, &id) in level.iter().zip(&ids) {
            let mut any = false;
            for g in 0..em.num_groups() {
                calls += 1;
                for t in successors(em, g, s)? {
                    any = true;
                    if !index.contains_key(&t) {
                        next.insert(t.clone());
                    }
                    pending.push((id, g as u32, t));
                }
            }
            if !any {
                deadlocks.insert(s.clone());
            }
        }
        // Targets in the next level get their ids once that level is numbered.
        let base = states.len() as u32;
        let next_ids: HashMap<&StateVector, u32> = next.iter().enumerate().map(|(k, s)| (s, base + k as u32)).collect();
        for (src, g, t) in pending {
            let dst = index.get(&t).or_else(|| next_ids.get(&t)).copied().unwrap();
            transitions.push((src, g, dst));
        }
        drop(next_ids);
        level = next;
    }
    transitions.sort_unstable();
    Ok(ExplicitReachResult {
        states,
        transitions,
        nextstate_calls: calls,
        deadlocks,
        level_sizes,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{elaborate, parse_machine};

    const MUTEX: &str = include_str!("../../../models/mutex.blite");

    fn mutex(maxint: i64) -> ElaboratedMachine {
        let m = parse_machine(MUTEX).unwrap();
        elaborate(&m, &BTreeMap::from([("MAXINT".to_string(), maxint)])).unwrap()
    }

    fn sv(v: &[u32]) -> StateVector {
        StateVector::from(v.to_vec())
    }

    #[test]
    fn enter_guard_holds_in_initial_state() {
        let em = mutex(1);
        let enter = em.group_index("Enter").unwrap();
        assert!(eval_pred(&em, &em.groups[enter].guard, &[0, 1, 0], &[]));
        let restart = em.group_index("Restart").unwrap();
        assert!(!eval_pred(&em, &em.groups[restart].guard, &[0, 1, 0], &[]));
        assert!(eval_pred(&em, &Term::Const(1), &[1, 0, 1], &[]));
    }

    #[test]
    fn enter_exit_leave_successors() {
        let em = mutex(1);
        let g = |n| em.group_index(n).unwrap();
        assert_eq!(
            successors(&em, g("Enter"), &[0, 1, 0]).unwrap(),
            BTreeSet::from([sv(&[1, 0, 0])])
        );
        assert!(successors(&em, g("Exit"), &[0, 1, 0]).unwrap().is_empty());
        for s in [[0, 1, 0], [1, 0, 0], [0, 0, 1], [1, 0, 1]] {
            let mut t = s;
            t[0] = 0;
            assert_eq!(successors(&em, g("Leave"), &s).unwrap(), BTreeSet::from([sv(&t)]));
        }
    }

    #[test]
    fn mutex_explicit_reach() {
        let r = explicit_reach(&mutex(1)).unwrap();
        assert_eq!(r.states.len(), 4);
        assert_eq!(r.nextstate_calls, 20);
        assert!(r.deadlocks.is_empty());
        assert_eq!(r.states[0], sv(&[0, 1, 0]));
    }

    #[test]
    fn no_operations_means_all_deadlocked() {
        let m = parse_machine(
            "MACHINE Z VARIABLES x INVARIANT x : 0..3 \
             INITIALISATION CHOICE x := 1 OR x := 2 END OPERATIONS END",
        )
        .unwrap();
        let em = elaborate(&m, &BTreeMap::new()).unwrap();
        let r = explicit_reach(&em).unwrap();
        assert_eq!(r.state_set(), em.initial_states.iter().cloned().collect());
        assert_eq!(r.nextstate_calls, 0);
        assert_eq!(r.deadlocks.len(), 2);
    }

    #[test]
    fn out_of_domain_assignment_names_operation_and_variable() {
        let m = parse_machine(
            "MACHINE O VARIABLES x INVARIANT x : 0..2 INITIALISATION x := 0 OPERATIONS \
             Up = BEGIN x := x + 1 END END",
        )
        .unwrap();
        let em = elaborate(&m, &BTreeMap::new()).unwrap();
        match explicit_reach(&em) {
            Err(SemanticsError::OutOfDomain {
                operation,
                variable,
                value,
                ..
            }) => {
                assert_eq!((operation.as_str(), variable.as_str(), value), ("Up", "x", 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn state_limit_is_enforced() {
        assert_eq!(explicit_reach_with(&mutex(5), 10), Err(SemanticsError::StateLimit(10)));
    }

    #[test]
    fn enumeration_bound_is_enforced() {
        let m = parse_machine(
            "MACHINE E VARIABLES x INVARIANT x : 0..99 INITIALISATION x := 0 OPERATIONS \
             Set(a, b) = SELECT a : 0..99 & b : 0..99 & a = b THEN x := a END END",
        )
        .unwrap();
        let mut em = elaborate(&m, &BTreeMap::new()).unwrap();
        assert_eq!(successors(&em, 0, &[0]).unwrap().len(), 100);
        em.enumeration_bound = 9_999;
        assert!(matches!(
            successors(&em, 0, &[0]),
            Err(SemanticsError::EnumerationBound { .. })
        ));
    }

    #[test]
    fn graph_dump_is_stable() {
        let em = mutex(1);
        let r = explicit_reach(&em).unwrap();
        let mut a = Vec::new();
        r.write_graph(&em, &mut a).unwrap();
        let mut b = Vec::new();
        explicit_reach(&em).unwrap().write_graph(&em, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("states 4\n0 cs=FALSE wait=1 finished=0\n"));
        assert!(text.contains("0 Enter "));
    }
}
