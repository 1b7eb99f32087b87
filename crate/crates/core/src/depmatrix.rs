//! Syntactic read/write analysis of transition groups and the resulting
//! read and write dependency matrices.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::{Action, ElaboratedMachine, Group};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RwSets {
    pub guard_reads: BTreeSet<usize>,
    pub action_reads: BTreeSet<usize>,
    /// Assigned on every execution path.
    pub must_write: BTreeSet<usize>,
    /// Assigned on some, but not all, paths.
    pub may_write: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReadClass {
    ReadDep,
    ReadCopyIndep,
    ReadOverwriteIndep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WriteClass {
    WriteDep,
    WriteIndep,
}

/// (must, any) write sets of an action.
fn writes(a: &Action) -> (BTreeSet<usize>, BTreeSet<usize>) {
    match a {
        Action::Skip => Default::default(),
        Action::Assign(v, _) => (BTreeSet::from([*v]), BTreeSet::from([*v])),
        Action::Parallel(parts) => {
            let mut must = BTreeSet::new();
            let mut any = BTreeSet::new();
            for p in parts {
                let (m, a) = writes(p);
                must.extend(m);
                any.extend(a);
            }
            (must, any)
        }
        Action::If { then, otherwise, .. } => {
            let (tm, ta) = writes(then);
            let (om, oa) = otherwise.as_deref().map(writes).unwrap_or_default();
            (&tm & &om, &ta | &oa)
        }
        Action::Any { body, .. } => writes(body),
        Action::Choice(branches) => {
            let mut it = branches.iter().map(writes);
            let Some((mut must, mut any)) = it.next() else {
                return Default::default();
            };
            for (m, a) in it {
                must = &must & &m;
                any.extend(a);
            }
            (must, any)
        }
    }
}

fn action_reads(a: &Action, out: &mut BTreeSet<usize>) {
    match a {
        Action::Skip => {}
        Action::Assign(_, t) => t.collect_vars(out),
        Action::Parallel(parts) | Action::Choice(parts) => parts.iter().for_each(|p| action_reads(p, out)),
        Action::If { cond, then, otherwise } => {
            cond.collect_vars(out);
            action_reads(then, out);
            if let Some(o) = otherwise {
                action_reads(o, out);
            }
        }
        Action::Any { pred, body, .. } => {
            pred.collect_vars(out);
            action_reads(body, out);
        }
    }
}

pub fn rw_sets(g: &Group) -> RwSets {
    let mut reads = BTreeSet::new();
    action_reads(&g.body, &mut reads);
    let (must, any) = writes(&g.body);
    RwSets {
        guard_reads: g.guard.vars(),
        action_reads: reads,
        may_write: &any - &must,
        must_write: must,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyMatrices {
    pub variables: Vec<String>,
    pub groups: Vec<String>,
    pub rm: Vec<Vec<bool>>,
    pub wm: Vec<Vec<bool>>,
}

impl DependencyMatrices {
    pub fn num_groups(&self) -> usize {
        self.rm.len()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn classify(&self, group: usize, var: usize) -> (ReadClass, WriteClass) {
        classify_cell(self.rm[group][var], self.wm[group][var])
    }

    /// Header of variable names, then `name: r=0110 w=0100` per group.
    pub fn dump(&self) -> String {
        let mut out = self.variables.join(" ");
        out.push('\n');
        let bits = |row: &[bool]| row.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        for (k, name) in self.groups.iter().enumerate() {
            writeln!(out, "{name}: r={} w={}", bits(&self.rm[k]), bits(&self.wm[k])).unwrap();
        }
        out
    }
}

pub fn classify_cell(read: bool, write: bool) -> (ReadClass, WriteClass) {
    let r = match (read, write) {
        (true, _) => ReadClass::ReadDep,
        (false, false) => ReadClass::ReadCopyIndep,
        (false, true) => ReadClass::ReadOverwriteIndep,
    };
    let w = if write {
        WriteClass::WriteDep
    } else {
        WriteClass::WriteIndep
    };
    (r, w)
}

/// Builds RM and WM from the normalized groups. May-written variables are
/// marked both read- and write-dependent.
pub fn build_matrices(em: &ElaboratedMachine) -> DependencyMatrices {
    let n = em.num_vars();
    let mut rm = Vec::with_capacity(em.num_groups());
    let mut wm = Vec::with_capacity(em.num_groups());
    for g in &em.groups {
        let s = rw_sets(g);
        let mut r = vec![false; n];
        let mut w = vec![false; n];
        for &v in s.must_write.iter().chain(&s.may_write) {
            w[v] = true;
        }
        for &v in s.guard_reads.iter().chain(&s.action_reads).chain(&s.may_write) {
            r[v] = true;
        }
        rm.push(r);
        wm.push(w);
    }
    DependencyMatrices {
        variables: em.variables.iter().map(|v| v.name.clone()).collect(),
        groups: em.groups.iter().map(|g| g.name.clone()).collect(),
        rm,
        wm,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{elaborate, parse_machine};

    fn machine(src: &str) -> ElaboratedMachine {
        elaborate(&parse_machine(src).unwrap(), &BTreeMap::new()).unwrap()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn mutex() -> ElaboratedMachine {
        machine(include_str!("../../../models/mutex.blite"))
    }

    #[test]
    fn enter_and_leave_sets() {
        let em = mutex();
        let enter = rw_sets(&em.groups[0]);
        assert_eq!(enter.guard_reads, set(&[0, 1]));
        assert_eq!(enter.action_reads, set(&[1]));
        assert_eq!(enter.must_write, set(&[0, 1]));
        assert!(enter.may_write.is_empty());
        let leave = rw_sets(&em.groups[2]);
        assert_eq!(
            leave,
            RwSets {
                must_write: set(&[0]),
                ..Default::default()
            }
        );
    }

    #[test]
    fn conditional_write_is_may_write() {
        let em = machine(
            "MACHINE R VARIABLES cs, wait INVARIANT cs : BOOL & wait : 0..3 \
             INITIALISATION cs := FALSE || wait := 3 OPERATIONS \
             MayReset = BEGIN IF cs = TRUE THEN wait := 0 END END END",
        );
        let s = rw_sets(&em.groups[0]);
        assert_eq!(s.may_write, set(&[1]));
        assert_eq!(s.action_reads, set(&[0]));
        assert!(s.must_write.is_empty());
        let dm = build_matrices(&em);
        assert_eq!(dm.rm[0], vec![true, true]);
        assert_eq!(dm.wm[0], vec![false, true]);
    }

    #[test]
    fn choice_and_if_else_intersect() {
        let em = machine(
            "MACHINE C VARIABLES a, b INVARIANT a : 0..1 & b : 0..1 \
             INITIALISATION a := 0 || b := 0 OPERATIONS \
             Pick = BEGIN CHOICE a := 1 || b := 1 OR a := 0 END END; \
             Branch = BEGIN IF b = 0 THEN a := 1 ELSE a := 0 || b := 0 END END END",
        );
        let pick = rw_sets(&em.groups[0]);
        assert_eq!((pick.must_write, pick.may_write), (set(&[0]), set(&[1])));
        let branch = rw_sets(&em.groups[1]);
        assert_eq!((branch.must_write, branch.may_write), (set(&[0]), set(&[1])));
    }

    #[test]
    fn mutex_matrices() {
        let dm = build_matrices(&mutex());
        let b = |rows: [[u8; 3]; 5]| -> Vec<Vec<bool>> {
            rows.iter().map(|r| r.iter().map(|&x| x == 1).collect()).collect()
        };
        assert_eq!(dm.rm, b([[1, 1, 0], [1, 0, 1], [0, 0, 0], [1, 0, 0], [0, 1, 1]]));
        assert_eq!(dm.wm, b([[1, 1, 0], [1, 0, 1], [1, 0, 0], [0, 0, 0], [0, 1, 1]]));
    }

    #[test]
    fn classification() {
        let dm = build_matrices(&mutex());
        assert_eq!(dm.classify(2, 0), (ReadClass::ReadOverwriteIndep, WriteClass::WriteDep));
        assert_eq!(dm.classify(0, 2), (ReadClass::ReadCopyIndep, WriteClass::WriteIndep));
        assert_eq!(dm.classify(3, 0), (ReadClass::ReadDep, WriteClass::WriteIndep));
    }

    #[test]
    fn skip_gives_zero_rows() {
        let dm = build_matrices(&machine(
            "MACHINE S VARIABLES x INVARIANT x : BOOL INITIALISATION x := TRUE OPERATIONS \
             Nop = BEGIN skip END END",
        ));
        assert_eq!(dm.rm, vec![vec![false]]);
        assert_eq!(dm.wm, vec![vec![false]]);
    }

    #[test]
    fn dump_format() {
        let dm = build_matrices(&mutex());
        let text = dm.dump();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("cs wait finished"));
        assert_eq!(lines.next(), Some("Enter: r=110 w=110"));
        assert_eq!(lines.nth(1), Some("Leave: r=000 w=100"));
    }

    #[test]
    fn parameter_guards_count_as_action_reads() {
        let em = machine(
            "MACHINE A SETS PROC = {p1, p2, p3} VARIABLES pc, active, ready \
             INVARIANT pc : 0..1 & active : PROC & ready : PROC \
             INITIALISATION pc := 1 || active := p1 || ready := p2 OPERATIONS \
             Activate(p) = SELECT p : PROC & pc = 1 & p = ready THEN active := p END END",
        );
        let s = rw_sets(&em.groups[0]);
        assert_eq!(s.guard_reads, set(&[0]));
        assert_eq!(s.action_reads, set(&[2]));
        assert_eq!(s.must_write, set(&[1]));
    }
}
