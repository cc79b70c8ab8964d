//! Label-setting shortest path search shared by the latency, Yen and
//! most-reliable path computations.
//!
//! Labels compare by `(cost, node sequence)`, so among equal-cost paths the
//! lexicographically smallest node sequence wins. With strictly positive
//! weights this yields the lexicographically smallest shortest path; with zero
//! weights it is still deterministic. Infinite weights are allowed and compare
//! equal to each other, so a path through a certain failure is still found
//! when nothing else exists.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::topology::{EdgeId, NodeId, Topology};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Label {
    pub cost: f64,
    pub path: Vec<NodeId>,
}

impl Label {
    fn cmp_key(&self, other: &Label) -> Ordering {
        self.cost
            .partial_cmp(&other.cost)
            .expect("path costs are never NaN")
            .then_with(|| self.path.cmp(&other.path))
    }
}

pub(crate) struct Search<'a, E, N> {
    pub topo: &'a Topology,
    pub edge_cost: E,
    /// Cost of passing through an intermediate node (never charged for the
    /// source or the final node of a path).
    pub node_cost: N,
    pub blocked_nodes: Option<&'a [bool]>,
    pub blocked_edges: Option<&'a HashSet<EdgeId>>,
}

impl<'a, E, N> Search<'a, E, N>
where
    E: Fn(EdgeId) -> f64,
    N: Fn(NodeId) -> f64,
{
    /// Runs from `src`; stops early once `target` is settled. Returns one
    /// optional label per node.
    pub fn run(&self, src: NodeId, target: Option<NodeId>) -> Vec<Option<Label>> {
        let n = self.topo.node_count();
        let blocked = |v: NodeId| self.blocked_nodes.is_some_and(|b| b[v.0]);
        let mut labels: Vec<Option<Label>> = vec![None; n];
        let mut settled = vec![false; n];
        if blocked(src) {
            return labels;
        }
        labels[src.0] = Some(Label { cost: 0.0, path: vec![src] });

        loop {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if settled[i] {
                    continue;
                }
                if let Some(l) = &labels[i] {
                    let better = match best {
                        None => true,
                        Some(b) => l.cmp_key(labels[b].as_ref().unwrap()) == Ordering::Less,
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
            let Some(u) = best else { break };
            settled[u] = true;
            let u_id = NodeId(u);
            if Some(u_id) == target {
                break;
            }
            let base = labels[u].as_ref().unwrap().clone();
            let through = if u_id == src { 0.0 } else { (self.node_cost)(u_id) };
            for &(v, e) in self.topo.neighbors(u_id) {
                if settled[v.0] || blocked(v) || self.blocked_edges.is_some_and(|b| b.contains(&e)) {
                    continue;
                }
                let cost = base.cost + through + (self.edge_cost)(e);
                let mut path = base.path.clone();
                path.push(v);
                let cand = Label { cost, path };
                let replace = match &labels[v.0] {
                    None => true,
                    Some(cur) => cand.cmp_key(cur) == Ordering::Less,
                };
                if replace {
                    labels[v.0] = Some(cand);
                }
            }
        }
        labels
    }
}

pub(crate) fn no_node_cost(_: NodeId) -> f64 {
    0.0
}
