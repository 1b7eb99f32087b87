//! Variable reordering: Sloan's profile-reduction heuristic on the variable
//! co-occurrence graph, plus bandwidth and event-span metrics.

use std::collections::VecDeque;

use crate::depmatrix::DependencyMatrices;
use crate::model::ElaboratedMachine;

const W1: i64 = 1;
const W2: i64 = 2;

/// A permutation of variable positions: `perm[new] = old`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrder {
    pub perm: Vec<usize>,
}

impl VariableOrder {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        self.perm
            .iter()
            .all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
    }

    /// `positions()[old] = new`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            pos[old] = new;
        }
        pos
    }

    pub fn inverse(&self) -> Self {
        Self { perm: self.positions() }
    }

    pub fn names(&self, names: &[String]) -> Vec<String> {
        self.perm.iter().map(|&k| names[k].clone()).collect()
    }
}

pub fn combined_matrix(dm: &DependencyMatrices) -> Vec<Vec<bool>> {
    dm.rm
        .iter()
        .zip(&dm.wm)
        .map(|(r, w)| r.iter().zip(w).map(|(&a, &b)| a || b).collect())
        .collect()
}

/// Adjacency lists: variables are adjacent when some row uses both.
pub fn variable_graph(cm: &[Vec<bool>], n: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![vec![false; n]; n];
    for row in cm {
        let cols: Vec<usize> = (0..n).filter(|&j| row[j]).collect();
        for &a in &cols {
            for &b in &cols {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    adj.iter().map(|r| (0..n).filter(|&k| r[k]).collect()).collect()
}

/// BFS levels from `root`.
fn levels(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut structure = vec![vec![root]];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if structure.len() <= dist[w] {
                    structure.push(Vec::new());
                }
                structure[dist[w]].push(w);
                queue.push_back(w);
            }
        }
    }
    (dist, structure)
}

/// Start and end vertices of maximal eccentricity within a component.
fn pseudo_peripheral(adj: &[Vec<usize>], component: &[usize]) -> (usize, usize) {
    let mut start = *component.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap();
    loop {
        let (_, ls) = levels(adj, start);
        let depth = ls.len();
        let mut last = ls[depth - 1].clone();
        last.sort_by_key(|&v| (adj[v].len(), v));
        let mut end = last[0];
        let mut best_width = usize::MAX;
        let mut restarted = false;
        for &c in &last {
            let (_, lc) = levels(adj, c);
            if lc.len() > depth {
                start = c;
                restarted = true;
                break;
            }
            let width = lc.iter().map(Vec::len).max().unwrap();
            if width < best_width {
                best_width = width;
                end = c;
            }
        }
        if !restarted {
            return (start, end);
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Inactive,
    Preactive,
    Active,
    Postactive,
}

fn sloan_component(adj: &[Vec<usize>], component: &[usize], out: &mut Vec<usize>) {
    let (start, end) = pseudo_peripheral(adj, component);
    let (dist, _) = levels(adj, end);
    let n = adj.len();
    let mut prio = vec![0i64; n];
    let mut status = vec![Status::Inactive; n];
    for &v in component {
        prio[v] = W1 * dist[v] as i64 - W2 * (adj[v].len() as i64 + 1);
    }
    status[start] = Status::Preactive;
    let mut queue = vec![start];
    while !queue.is_empty() {
        let (k, &i) = queue
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| prio[a].cmp(&prio[b]).then(b.cmp(&a)))
            .unwrap();
        queue.swap_remove(k);
        if status[i] == Status::Preactive {
            for &j in &adj[i] {
                prio[j] += W2;
                if status[j] == Status::Inactive {
                    status[j] = Status::Preactive;
                    queue.push(j);
                }
            }
        }
        status[i] = Status::Postactive;
        out.push(i);
        for &j in &adj[i] {
            if status[j] != Status::Preactive {
                continue;
            }
            status[j] = Status::Active;
            prio[j] += W2;
            for &k in &adj[j] {
                if status[k] == Status::Postactive {
                    continue;
                }
                prio[k] += W2;
                if status[k] == Status::Inactive {
                    status[k] = Status::Preactive;
                    queue.push(k);
                }
            }
        }
    }
}

/// Sloan ordering of the variables (matrix columns).
pub fn sloan_order(cm: &[Vec<bool>], n: usize) -> VariableOrder {
    let adj = variable_graph(cm, n);
    let mut seen = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut isolated = Vec::new();
    for v in 0..n {
        if seen[v] {
            continue;
        }
        if adj[v].is_empty() {
            seen[v] = true;
            isolated.push(v);
            continue;
        }
        let (dist, _) = levels(&adj, v);
        let component: Vec<usize> = (0..n).filter(|&w| dist[w] != usize::MAX).collect();
        for &w in &component {
            seen[w] = true;
        }
        sloan_component(&adj, &component, &mut perm);
    }
    perm.extend(isolated);
    VariableOrder { perm }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderMetrics {
    pub bandwidth: usize,
    pub total_event_span: usize,
}

pub fn metrics(cm: &[Vec<bool>], order: &VariableOrder) -> OrderMetrics {
    let n = order.perm.len();
    let pos = order.positions();
    let adj = variable_graph(cm, n);
    let bandwidth = (0..n)
        .flat_map(|a| adj[a].iter().map(move |&b| (a, b)))
        .map(|(a, b)| pos[a].abs_diff(pos[b]))
        .max()
        .unwrap_or(0);
    let total_event_span = cm
        .iter()
        .map(|row| {
            let ps: Vec<usize> = (0..n).filter(|&j| row[j]).map(|j| pos[j]).collect();
            match (ps.iter().min(), ps.iter().max()) {
                (Some(lo), Some(hi)) => hi - lo + 1,
                _ => 0,
            }
        })
        .sum();
    OrderMetrics {
        bandwidth,
        total_event_span,
    }
}

/// Reorders machine variables and matrix columns consistently.
pub fn apply_order(
    em: &ElaboratedMachine,
    dm: &DependencyMatrices,
    order: &VariableOrder,
) -> (ElaboratedMachine, DependencyMatrices) {
    assert!(
        order.is_valid() && order.perm.len() == em.num_vars(),
        "invalid variable order"
    );
    let cols = |row: &Vec<bool>| order.perm.iter().map(|&k| row[k]).collect::<Vec<bool>>();
    let dm2 = DependencyMatrices {
        variables: order.names(&dm.variables),
        groups: dm.groups.clone(),
        rm: dm.rm.iter().map(cols).collect(),
        wm: dm.wm.iter().map(cols).collect(),
    };
    (em.permuted(&order.perm), dm2)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::depmatrix::build_matrices;
    use crate::model::{elaborate, parse_machine};

    fn b(rows: &[&[u8]]) -> Vec<Vec<bool>> {
        rows.iter().map(|r| r.iter().map(|&x| x == 1).collect()).collect()
    }

    fn mutex() -> (ElaboratedMachine, DependencyMatrices) {
        let m = parse_machine(include_str!("../../../models/mutex.blite")).unwrap();
        let em = elaborate(&m, &BTreeMap::new()).unwrap();
        let dm = build_matrices(&em);
        (em, dm)
    }

    #[test]
    fn mutex_combined_matrix_and_span() {
        let (_, dm) = mutex();
        let cm = combined_matrix(&dm);
        assert_eq!(cm, b(&[&[1, 1, 0], &[1, 0, 1], &[1, 0, 0], &[1, 0, 0], &[0, 1, 1]]));
        let m = metrics(&cm, &VariableOrder::identity(3));
        assert_eq!(m.bandwidth, 2);
        // spans: Enter 2, Exit 3, Leave 1, CS_Active 1, Restart 2
        assert_eq!(m.total_event_span, 9);
    }

    #[test]
    fn single_variable_is_identity() {
        assert_eq!(sloan_order(&b(&[&[1]]), 1), VariableOrder::identity(1));
        assert_eq!(sloan_order(&[], 1), VariableOrder::identity(1));
    }

    #[test]
    fn path_gets_bandwidth_one() {
        // path 3 - 0 - 4 - 1 - 2
        let cm = b(&[&[1, 0, 0, 1, 0], &[1, 0, 0, 0, 1], &[0, 1, 0, 0, 1], &[0, 1, 1, 0, 0]]);
        let order = sloan_order(&cm, 5);
        assert!(order.is_valid());
        assert_eq!(metrics(&cm, &order).bandwidth, 1);
    }

    #[test]
    fn isolated_vertices_go_last() {
        let cm = b(&[&[0, 1, 0, 1]]);
        let order = sloan_order(&cm, 4);
        assert_eq!(&order.perm[2..], &[0, 2]);
    }

    #[test]
    fn apply_identity_and_inverse() {
        let (em, dm) = mutex();
        let id = VariableOrder::identity(3);
        assert_eq!(apply_order(&em, &dm, &id), (em.clone(), dm.clone()));
        let rev = VariableOrder { perm: vec![2, 1, 0] };
        let (em2, dm2) = apply_order(&em, &dm, &rev);
        assert_eq!(dm2.variables, vec!["finished", "wait", "cs"]);
        assert_eq!(em2.initial_states[0].to_vec(), vec![0, 1, 0]);
        assert_eq!(build_matrices(&em2), dm2);
        let (em3, dm3) = apply_order(&em2, &dm2, &rev.inverse());
        assert_eq!((em3, dm3), (em, dm));
    }
}
