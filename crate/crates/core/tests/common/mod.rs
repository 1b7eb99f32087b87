//! Random B-lite machines and brute-force oracles shared by the integration
//! tests and the acceptance runner.
#![allow(dead_code)]

pub mod bridge_util;
pub mod ldd_oracle;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reach_core::depmatrix::{build_matrices, DependencyMatrices};
use reach_core::engine::{reach, symbolic_deadlocks, LocalProvider, Strategy};
use reach_core::ldd::LddStore;
use reach_core::model::{elaborate, parse_machine, ElaboratedMachine};
use reach_core::semantics::successors;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn load(file: &str, overrides: &[(&str, i64)]) -> ElaboratedMachine {
    let src = std::fs::read_to_string(models_dir().join(file)).expect("model file");
    let m = parse_machine(&src).expect("model parses");
    let ov: BTreeMap<String, i64> = overrides.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    elaborate(&m, &ov).expect("model elaborates")
}

pub fn corpus() -> Vec<(&'static str, ElaboratedMachine)> {
    ["mutex.blite", "philosophers5.blite", "counters3.blite"]
        .into_iter()
        .map(|f| (f, load(f, &[])))
        .collect()
}

pub fn from_source(src: &str) -> ElaboratedMachine {
    let m = parse_machine(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    elaborate(&m, &BTreeMap::new()).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    /// Upper bound of each variable's range `0..hi`.
    his: Vec<i64>,
    fresh: usize,
}

impl Gen<'_> {
    fn var(&self, j: usize) -> String {
        format!("v{j}")
    }

    fn operand(&mut self, locals: &[String]) -> String {
        let n = self.his.len();
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(0..4).to_string(),
            1 if !locals.is_empty() => locals.choose(self.rng).unwrap().clone(),
            _ => format!("v{}", self.rng.gen_range(0..n)),
        }
    }

    fn expr(&mut self, locals: &[String]) -> String {
        let a = self.operand(locals);
        match self.rng.gen_range(0..5) {
            0 => format!("{a} + {}", self.operand(locals)),
            1 => format!("{a} - {}", self.operand(locals)),
            _ => a,
        }
    }

    fn cond(&mut self, locals: &[String]) -> String {
        if self.rng.gen_bool(0.4) {
            // usually satisfiable: a bound on one variable
            let j = self.rng.gen_range(0..self.his.len());
            let op = ["<", "<=", "/=", ">"].choose(self.rng).unwrap();
            return format!("v{j} {op} {}", self.rng.gen_range(0..=self.his[j]));
        }
        let op = ["=", "/=", "<", "<=", ">", ">="].choose(self.rng).unwrap();
        let c = format!("{} {op} {}", self.operand(locals), self.expr(locals));
        if self.rng.gen_bool(0.2) {
            format!("{c} & {} = {}", self.operand(locals), self.operand(locals))
        } else {
            c
        }
    }

    /// An in-range assignment to `v{j}`.
    fn assign(&mut self, j: usize, locals: &[String]) -> String {
        let e = match self.rng.gen_range(0..6) {
            0 => format!("v{j} + 1"),
            1 => format!("v{j} - 1"),
            2 => self.rng.gen_range(0..=self.his[j]).to_string(),
            _ => self.expr(locals),
        };
        format!("v{j} := min({}, max(0, {e}))", self.his[j])
    }

    /// A statement writing only variables in `targets`.
    fn stmt(&mut self, targets: &[usize], locals: &[String], depth: u32) -> String {
        let atom = |g: &mut Self, locals: &[String]| {
            if targets.is_empty() {
                return "skip".to_string();
            }
            let parts: Vec<String> = targets.iter().map(|&j| g.assign(j, locals)).collect();
            parts.join(" || ")
        };
        if depth == 0 {
            return atom(self, locals);
        }
        match self.rng.gen_range(0..7) {
            0 => {
                let c = self.cond(locals);
                let t = self.stmt(targets, locals, depth - 1);
                if self.rng.gen_bool(0.5) {
                    let e = self.stmt(targets, locals, depth - 1);
                    format!("IF {c} THEN {t} ELSE {e} END")
                } else {
                    format!("IF {c} THEN {t} END")
                }
            }
            1 => {
                let p = format!("p{}", self.fresh);
                self.fresh += 1;
                let hi = self.rng.gen_range(0..3);
                let mut inner = locals.to_vec();
                inner.push(p.clone());
                let c = self.cond(&inner);
                let body = self.stmt(targets, &inner, depth - 1);
                format!("ANY {p} WHERE {p} : 0..{hi} & {c} THEN {body} END")
            }
            2 => {
                let a = self.stmt(targets, locals, depth - 1);
                let b = self.stmt(targets, locals, depth - 1);
                format!("CHOICE {a} OR {b} END")
            }
            3 => "skip".to_string(),
            _ => atom(self, locals),
        }
    }
}

/// A random machine: 1–4 integer variables over ranges of at most 4 values,
/// 1–6 operations using guards, IF, ANY, CHOICE and parameters.
pub fn random_machine_source(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=4);
    let his: Vec<i64> = (0..n)
        .map(|_| if rng.gen_bool(0.1) { 0 } else { rng.gen_range(1..4) })
        .collect();
    let m = rng.gen_range(1..=6);
    let mut g = Gen { rng, his, fresh: 0 };
    let mut s = String::new();
    writeln!(s, "MACHINE Random").unwrap();
    let names: Vec<String> = (0..n).map(|j| g.var(j)).collect();
    writeln!(s, "VARIABLES {}", names.join(", ")).unwrap();
    let typing: Vec<String> = (0..n).map(|j| format!("v{j} : 0..{}", g.his[j])).collect();
    writeln!(s, "INVARIANT {}", typing.join(" & ")).unwrap();
    let init: Vec<String> = (0..n)
        .map(|j| {
            let a = g.rng.gen_range(0..=g.his[j]);
            if g.rng.gen_bool(0.15) {
                let b = g.rng.gen_range(0..=g.his[j]);
                format!("CHOICE v{j} := {a} OR v{j} := {b} END")
            } else {
                format!("v{j} := {a}")
            }
        })
        .collect();
    writeln!(s, "INITIALISATION {}", init.join(" || ")).unwrap();
    writeln!(s, "OPERATIONS").unwrap();
    let mut ops = Vec::new();
    for k in 0..m {
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(g.rng);
        let take = if g.rng.gen_bool(0.1) {
            0
        } else {
            g.rng.gen_range(1..=n.min(2))
        };
        let targets = &vars[..take];
        let op = if g.rng.gen_bool(0.25) {
            let hi = g.rng.gen_range(0..3);
            let locals = vec!["q".to_string()];
            let c = g.cond(&locals);
            let body = g.stmt(targets, &locals, 2);
            format!("  Op{k}(q) = SELECT q : 0..{hi} & {c} THEN {body} END")
        } else if g.rng.gen_bool(0.3) {
            let body = g.stmt(targets, &[], 2);
            format!("  Op{k} = BEGIN {body} END")
        } else {
            let c = g.cond(&[]);
            let body = g.stmt(targets, &[], 2);
            format!("  Op{k} = SELECT {c} THEN {body} END")
        };
        ops.push(op);
    }
    writeln!(s, "{}", ops.join(";\n")).unwrap();
    writeln!(s, "END").unwrap();
    s
}

pub fn random_machine(rng: &mut ChaCha8Rng) -> (String, ElaboratedMachine) {
    let src = random_machine_source(rng);
    let em = from_source(&src);
    (src, em)
}

/// Every vector of the machine's full state space.
pub fn all_states(em: &ElaboratedMachine) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for v in &em.variables {
        let size = v.domain.size() as u32;
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..size).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn succ(em: &ElaboratedMachine, group: usize, s: &[u32]) -> BTreeSet<Vec<u32>> {
    successors(em, group, s)
        .expect("successors")
        .into_iter()
        .map(|t| t.into_inner())
        .collect()
}

/// Plain breadth-first search: reachable states and deadlocks.
pub fn oracle_reach(em: &ElaboratedMachine) -> (BTreeSet<Vec<u32>>, BTreeSet<Vec<u32>>) {
    let mut seen: BTreeSet<Vec<u32>> = em.initial_states.iter().map(|s| s.to_vec()).collect();
    let mut queue: VecDeque<Vec<u32>> = seen.iter().cloned().collect();
    let mut dead = BTreeSet::new();
    while let Some(s) = queue.pop_front() {
        let mut any = false;
        for g in 0..em.num_groups() {
            for t in succ(em, g, &s) {
                any = true;
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        if !any {
            dead.insert(s);
        }
    }
    (seen, dead)
}

pub struct SymbolicRun {
    pub reachable: BTreeSet<Vec<u32>>,
    pub deadlocks: BTreeSet<Vec<u32>>,
    pub iterations: usize,
    pub calls: Vec<u64>,
}

pub fn symbolic(em: &ElaboratedMachine, strategy: Strategy) -> SymbolicRun {
    let mut store = LddStore::default();
    let mut p = LocalProvider::new(em.clone());
    let report = reach(&mut p, &mut store, strategy).expect("reach");
    let dead = symbolic_deadlocks(&mut store, &report).expect("deadlocks");
    SymbolicRun {
        reachable: store.enumerate(report.reachable).into_iter().collect(),
        deadlocks: store.enumerate(dead).into_iter().collect(),
        iterations: report.iterations,
        calls: report.calls.clone(),
    }
}

/// Checks every zero cell of the matrices against the independence
/// quantifiers over the full state space. States whose successors raise a
/// model error (possible only outside the reachable set of clamped models)
/// are left out. Returns the first violation.
pub fn check_independence(em: &ElaboratedMachine, dm: &DependencyMatrices) -> Result<(), String> {
    let states = all_states(em);
    for i in 0..em.num_groups() {
        let table: BTreeMap<&Vec<u32>, BTreeSet<Vec<u32>>> = states
            .iter()
            .filter_map(|s| {
                let ts = successors(em, i, s).ok()?;
                Some((s, ts.into_iter().map(|t| t.into_inner()).collect()))
            })
            .collect();
        for j in 0..em.num_vars() {
            let (r, w) = (dm.rm[i][j], dm.wm[i][j]);
            if !w {
                for (s, ts) in &table {
                    if let Some(t) = ts.iter().find(|t| t[j] != s[j]) {
                        return Err(format!("group {i} writes var {j}: {s:?} -> {t:?}"));
                    }
                }
            }
            if r {
                continue;
            }
            for (s, ts) in &table {
                let size = em.variables[j].domain.size() as u32;
                for x in 0..size {
                    let mut s2 = (*s).clone();
                    s2[j] = x;
                    let Some(got) = table.get(&s2) else { continue };
                    let want: BTreeSet<Vec<u32>> = if w {
                        ts.clone()
                    } else {
                        ts.iter()
                            .map(|t| {
                                let mut t = t.clone();
                                t[j] = x;
                                t
                            })
                            .collect()
                    };
                    if *got != want {
                        return Err(format!(
                            "group {i} depends on var {j}: {s:?} vs {s2:?} give {ts:?} / {got:?}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn matrices(em: &ElaboratedMachine) -> DependencyMatrices {
    build_matrices(em)
}
