//! Yen's K shortest loopless paths over link latency.

use std::collections::{BTreeSet, HashSet};

use super::search::{no_node_cost, Search};
use super::{path_latency, PathRecord};
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Candidate ordered by (latency, node sequence).
#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    latency: f64,
    nodes: Vec<NodeId>,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.latency
            .total_cmp(&other.latency)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

/// Up to `k` loopless `src`→`dst` paths in nondecreasing latency, ties broken
/// by lexicographic node sequence.
pub fn yen_k_paths(topo: &Topology, src: NodeId, dst: NodeId, k: usize) -> Result<Vec<PathRecord>> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let first = super::shortest_latency_path(topo, src, dst)?;
    let mut accepted: Vec<Vec<NodeId>> = vec![first.nodes];
    let mut pool: BTreeSet<Candidate> = BTreeSet::new();
    let mut blocked_nodes = vec![false; topo.node_count()];

    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        for i in 0..prev.len().saturating_sub(1) {
            let spur = prev[i];
            let root = &prev[..=i];

            let mut blocked_edges = HashSet::new();
            for p in &accepted {
                if p.len() > i + 1 && &p[..=i] == root {
                    if let Some(e) = topo.edge_between(p[i], p[i + 1]) {
                        blocked_edges.insert(e);
                    }
                }
            }
            blocked_nodes.iter_mut().for_each(|b| *b = false);
            for &r in &root[..i] {
                blocked_nodes[r.0] = true;
            }

            let search = Search {
                topo,
                edge_cost: |e| topo.edge(e).length_km,
                node_cost: no_node_cost,
                blocked_nodes: Some(&blocked_nodes),
                blocked_edges: Some(&blocked_edges),
            };
            if let Some(label) = search.run(spur, Some(dst)).swap_remove(dst.0) {
                let mut nodes = root[..i].to_vec();
                nodes.extend(label.path);
                let latency = path_latency(topo, &nodes);
                pool.insert(Candidate { latency, nodes });
            }
        }
        // Drop candidates that were already accepted through another root.
        let next = loop {
            match pool.pop_first() {
                Some(c) if accepted.contains(&c.nodes) => continue,
                other => break other,
            }
        };
        match next {
            Some(c) => accepted.push(c.nodes),
            None => break,
        }
    }

    Ok(accepted
        .into_iter()
        .map(|nodes| PathRecord::new(topo, nodes))
        .collect())
}
