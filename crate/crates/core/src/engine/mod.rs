//! Symbolic reachability over a partitioned next-state provider: partial
//! relations are learned on the fly and applied with LDD operations.

mod local;
mod provider;
mod report;

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub use local::LocalProvider;
pub use provider::{ModelInfo, NextStateProvider, ProviderError, VariableDecl};
pub use report::{GroupCalls, StoreSummary, Summary};

use crate::ldd::{LddError, LddStore, NodeRef, PartialRelation, FALSE_NODE};
use crate::model::ElaboratedMachine;
use crate::semantics::{violated_invariant, StateVector};

/// Default cap on states enumerated for invariant checking.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Bfs,
    Chaining,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("initialisation failed: {0}")]
    Init(#[source] ProviderError),
    #[error("invalid model information: {0}")]
    Model(String),
    #[error("next-state call for group '{group_name}' (#{group}) at source {state:?} failed: {source}")]
    Provider {
        group: usize,
        group_name: String,
        state: Vec<u32>,
        #[source]
        source: Box<ProviderError>,
    },
    #[error("group '{group_name}' returned an invalid successor {successor:?}: {message}")]
    BadSuccessor {
        group_name: String,
        successor: Vec<u32>,
        message: String,
    },
    #[error(transparent)]
    Ldd(#[from] LddError),
    #[error("{states} reachable states exceed the enumeration cap of {cap}")]
    EnumerationCap { states: u128, cap: u128 },
}

pub struct ReachReport {
    pub info: ModelInfo,
    pub strategy: Strategy,
    pub reachable: NodeRef,
    /// Frontier size at the start of each iteration.
    pub frontier_sizes: Vec<u128>,
    pub relations: Vec<PartialRelation>,
    /// Provider calls per group.
    pub calls: Vec<u64>,
    pub iterations: usize,
    pub wall: Duration,
}

impl ReachReport {
    pub fn total_calls(&self) -> u64 {
        self.calls.iter().sum()
    }

    pub fn state_count(&self, store: &LddStore) -> u128 {
        store.sat_count(self.reachable)
    }
}

fn mask_positions(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&j| mask[j]).collect()
}

/// Learns group `group` on every read projection of `frontier` not seen before.
pub fn learn_group(
    provider: &mut dyn NextStateProvider,
    store: &mut LddStore,
    info: &ModelInfo,
    frontier: NodeRef,
    relation: &mut PartialRelation,
    calls: &mut u64,
) -> Result<(), EngineError> {
    let group = relation.group;
    let projected = store.project(frontier, &info.rm[group])?;
    let fresh = store.minus(projected, relation.visited_sources)?;
    if fresh == FALSE_NODE {
        return Ok(());
    }
    let writes = mask_positions(&info.wm[group]);
    let mut learned = Vec::new();
    for src in store.enumerate(fresh) {
        let targets = provider
            .next_state(group, &src)
            .map_err(|source| EngineError::Provider {
                group,
                group_name: info.groups[group].clone(),
                state: src.clone(),
                source: Box::new(source),
            })?;
        *calls += 1;
        for t in &targets {
            let bad = if t.len() != writes.len() {
                Some(format!("expected {} values", writes.len()))
            } else {
                writes
                    .iter()
                    .zip(t)
                    .find(|(&j, &x)| x as u64 >= info.variables[j].domain.size())
                    .map(|(&j, _)| format!("value for '{}' out of range", info.variables[j].name))
            };
            if let Some(message) = bad {
                return Err(EngineError::BadSuccessor {
                    group_name: info.groups[group].clone(),
                    successor: t.clone(),
                    message,
                });
            }
        }
        learned.push((src, targets));
    }
    relation.insert_all(store, &learned)?;
    relation.mark_visited(store, projected)?;
    Ok(())
}

/// Extends every group's partial relation to cover `frontier`.
pub fn learn_trans(
    provider: &mut dyn NextStateProvider,
    store: &mut LddStore,
    info: &ModelInfo,
    frontier: NodeRef,
    relations: &mut [PartialRelation],
    calls: &mut [u64],
) -> Result<(), EngineError> {
    for (rel, c) in relations.iter_mut().zip(calls.iter_mut()) {
        learn_group(provider, store, info, frontier, rel, c)?;
    }
    Ok(())
}

struct Setup {
    info: ModelInfo,
    reachable: NodeRef,
    relations: Vec<PartialRelation>,
    calls: Vec<u64>,
}

fn setup(provider: &mut dyn NextStateProvider, store: &mut LddStore) -> Result<Setup, EngineError> {
    let info = provider.init().map_err(EngineError::Init)?;
    info.validate().map_err(EngineError::Model)?;
    let reachable = store.from_vectors(info.initial.iter().map(|v| v.as_slice()))?;
    let relations = (0..info.num_groups())
        .map(|i| PartialRelation::new(store, i, &info.rm[i], &info.wm[i]))
        .collect();
    let calls = vec![0; info.num_groups()];
    Ok(Setup {
        info,
        reachable,
        relations,
        calls,
    })
}

pub fn reach(
    provider: &mut dyn NextStateProvider,
    store: &mut LddStore,
    strategy: Strategy,
) -> Result<ReachReport, EngineError> {
    match strategy {
        Strategy::Bfs => reach_bfs(provider, store),
        Strategy::Chaining => reach_chaining(provider, store),
    }
}

/// Level-by-level reachability: learn on the whole frontier, then apply
/// every relation to it.
pub fn reach_bfs(provider: &mut dyn NextStateProvider, store: &mut LddStore) -> Result<ReachReport, EngineError> {
    let start = Instant::now();
    let Setup {
        info,
        mut reachable,
        mut relations,
        mut calls,
    } = setup(provider, store)?;
    let mut frontier = reachable;
    let mut frontier_sizes = Vec::new();
    let mut iterations = 0;
    while frontier != FALSE_NODE {
        iterations += 1;
        frontier_sizes.push(store.sat_count(frontier));
        learn_trans(provider, store, &info, frontier, &mut relations, &mut calls)?;
        let mut new = FALSE_NODE;
        for rel in &relations {
            let succ = store.next(frontier, rel)?;
            new = store.union(new, succ)?;
        }
        frontier = store.minus(new, reachable)?;
        reachable = store.union(reachable, new)?;
    }
    Ok(ReachReport {
        info,
        strategy: Strategy::Bfs,
        reachable,
        frontier_sizes,
        relations,
        calls,
        iterations,
        wall: start.elapsed(),
    })
}

/// Chaining: within one sweep each group sees the states found by the
/// groups before it.
pub fn reach_chaining(provider: &mut dyn NextStateProvider, store: &mut LddStore) -> Result<ReachReport, EngineError> {
    let start = Instant::now();
    let Setup {
        info,
        mut reachable,
        mut relations,
        mut calls,
    } = setup(provider, store)?;
    let mut frontier = reachable;
    let mut frontier_sizes = Vec::new();
    let mut iterations = 0;
    while frontier != FALSE_NODE {
        iterations += 1;
        frontier_sizes.push(store.sat_count(frontier));
        let mut found = FALSE_NODE;
        for (rel, c) in relations.iter_mut().zip(calls.iter_mut()) {
            learn_group(provider, store, &info, frontier, rel, c)?;
            let succ = store.next(frontier, rel)?;
            let fresh = store.minus(succ, reachable)?;
            frontier = store.union(frontier, fresh)?;
            found = store.union(found, succ)?;
        }
        frontier = store.minus(found, reachable)?;
        reachable = store.union(reachable, found)?;
    }
    Ok(ReachReport {
        info,
        strategy: Strategy::Chaining,
        reachable,
        frontier_sizes,
        relations,
        calls,
        iterations,
        wall: start.elapsed(),
    })
}

/// Reachable states with no learned successor in any group.
pub fn symbolic_deadlocks(store: &mut LddStore, report: &ReachReport) -> Result<NodeRef, EngineError> {
    let mut enabled = FALSE_NODE;
    for rel in &report.relations {
        let sources = rel.enabled_sources(store)?;
        let hit = store.match_proj(report.reachable, sources, &rel.read_mask)?;
        enabled = store.union(enabled, hit)?;
    }
    Ok(store.minus(report.reachable, enabled)?)
}

/// Reachable states falsifying a non-typing invariant conjunct, in
/// lexicographic order.
pub fn invariant_violations(
    store: &LddStore,
    report: &ReachReport,
    em: &ElaboratedMachine,
    cap: u128,
) -> Result<Vec<StateVector>, EngineError> {
    if em.invariant.is_empty() {
        return Ok(Vec::new());
    }
    let states = store.sat_count(report.reachable);
    if states > cap {
        return Err(EngineError::EnumerationCap { states, cap });
    }
    let mut out = Vec::new();
    store.for_each(report.reachable, &mut |s| {
        if violated_invariant(em, s).is_some() {
            out.push(StateVector::from(s.to_vec()));
        }
        true
    });
    Ok(out)
}
