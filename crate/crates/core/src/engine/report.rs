use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ReachReport;
use crate::ldd::{LddStore, StoreStats};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCalls {
    pub group: String,
    pub calls: u64,
}

/// Serializable run summary. Every field except `wall_ms` is a pure
/// function of the model and options.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub strategy: String,
    pub order: Vec<String>,
    pub states: u128,
    pub iterations: usize,
    pub calls_total: u64,
    pub calls: Vec<GroupCalls>,
    pub frontier_sizes: Vec<u128>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deadlocks: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub invariant_violations: Option<u128>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub deadlock_witnesses: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub invariant_witnesses: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub store: Option<StoreSummary>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreSummary {
    pub nodes: u64,
    pub reachable_nodes: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl StoreSummary {
    pub fn new(stats: StoreStats, reachable_nodes: usize) -> Self {
        StoreSummary {
            nodes: stats.nodes,
            reachable_nodes: reachable_nodes as u64,
            cache_hits: stats.cache_hits,
            cache_misses: stats.cache_misses,
        }
    }
}

impl Summary {
    pub fn from_report(report: &ReachReport, store: &LddStore) -> Self {
        Summary {
            strategy: serde_json::to_value(report.strategy)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            order: report.info.variable_names(),
            states: store.sat_count(report.reachable),
            iterations: report.iterations,
            calls_total: report.total_calls(),
            calls: report
                .info
                .groups
                .iter()
                .zip(&report.calls)
                .map(|(g, &c)| GroupCalls {
                    group: g.clone(),
                    calls: c,
                })
                .collect(),
            frontier_sizes: report.frontier_sizes.clone(),
            deadlocks: None,
            invariant_violations: None,
            deadlock_witnesses: Vec::new(),
            invariant_witnesses: Vec::new(),
            store: None,
            wall_ms: report.wall.as_millis() as u64,
        }
    }

    /// The same summary with timing zeroed, for equality checks.
    pub fn without_timing(&self) -> Summary {
        Summary {
            wall_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_machine(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }

    /// Headline line `states=… calls=… [deadlocks=…] [invariant_violations=…]`.
    pub fn headline(&self) -> String {
        let mut s = format!("states={} calls={}", self.states, self.calls_total);
        if let Some(d) = self.deadlocks {
            write!(s, " deadlocks={d}").unwrap();
        }
        if let Some(v) = self.invariant_violations {
            write!(s, " invariant_violations={v}").unwrap();
        }
        s
    }

    /// Plain-text report: the headline, then details when `detailed` is set.
    pub fn to_text(&self, detailed: bool) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.headline()).unwrap();
        if !detailed {
            return out;
        }
        writeln!(out, "strategy={} iterations={}", self.strategy, self.iterations).unwrap();
        writeln!(out, "order {}", self.order.join(" ")).unwrap();
        for g in &self.calls {
            writeln!(out, "group {} calls={}", g.group, g.calls).unwrap();
        }
        if let Some(st) = &self.store {
            writeln!(
                out,
                "nodes={} reachable_nodes={} cache_hits={} cache_misses={}",
                st.nodes, st.reachable_nodes, st.cache_hits, st.cache_misses
            )
            .unwrap();
        }
        writeln!(out, "wall_ms={}", self.wall_ms).unwrap();
        out
    }
}
