//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use sdnplace::objective::{upper_bound, Instance};
use sdnplace::topology::{sample_failures, FailureCase, ProbRange};
use sdnplace::{ErrorMatrix, FailureAssignment, NodeCounting, NodeId, Topology};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/topologyzoo")
}

pub fn rng(seed: u64) -> sdnplace::seed::Rng {
    sdnplace::seed::rng(seed)
}

/// Connected graph: a random spanning tree plus `extra` chords, lengths in
/// [1, 10) km.
pub fn random_topology(n: usize, extra: usize, seed: u64) -> Topology {
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let j = r.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    let max_pairs = n * (n - 1) / 2;
    while pairs.len() < (n - 1 + extra).min(max_pairs) {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize, f64)> = pairs.into_iter().map(|(a, b)| (a, b, r.gen_range(1.0..10.0))).collect();
    Topology::from_edges(n, &edges).unwrap()
}

/// `random_topology` with `gateways` random gateways.
pub fn random_topology_with_gateways(n: usize, extra: usize, gateways: usize, seed: u64) -> Topology {
    let topo = random_topology(n, extra, seed);
    let mut r = rng(seed ^ 0x5eed);
    let mut ids: Vec<NodeId> = topo.node_ids().collect();
    ids.shuffle(&mut r);
    topo.with_gateways(ids.into_iter().take(gateways)).unwrap()
}

/// Every probability uniform in [0, hi].
pub fn random_failures(topo: &Topology, hi: f64, seed: u64) -> FailureAssignment {
    let range = ProbRange::upto(hi);
    sample_failures(topo, &FailureCase::custom(range, range, range), seed)
}

/// Every simple path from `s` to `t` by depth-first enumeration.
pub fn simple_paths(topo: &Topology, s: NodeId, t: NodeId) -> Vec<Vec<NodeId>> {
    fn go(topo: &Topology, t: NodeId, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let last = *path.last().unwrap();
        if last == t {
            out.push(path.clone());
            return;
        }
        for &(nb, _) in topo.neighbors(last) {
            if !path.contains(&nb) {
                path.push(nb);
                go(topo, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(topo, t, &mut vec![s], &mut out);
    out
}

pub fn latency_of(topo: &Topology, path: &[NodeId]) -> f64 {
    let mut total = 0.0;
    for w in path.windows(2) {
        total += topo.edge(topo.edge_between(w[0], w[1]).unwrap()).length_km;
    }
    total
}

/// Failure probability of a path, accumulated as the complement of the
/// probability that every component survives, edges and nodes interleaved
/// in path order.
pub fn error_oracle(topo: &Topology, failures: &FailureAssignment, path: &[NodeId], counting: NodeCounting) -> f64 {
    let last = path.len() - 1;
    let mut alive = 1.0;
    for (i, &v) in path.iter().enumerate() {
        let endpoint = i == 0 || i == last;
        if counting == NodeCounting::AllNodes || !endpoint {
            alive -= alive * failures.node(v);
        }
        if i < last {
            alive -= alive * failures.edge(topo.edge_between(v, path[i + 1]).unwrap());
        }
    }
    1.0 - alive
}

/// Error matrix with rates in [0, hi) and distances in [0, dmax).
pub fn random_instance(k: usize, n: usize, alpha: f64, hi: f64, dmax: f64, seed: u64) -> Instance {
    let n = n.max(k);
    let mut r = rng(seed);
    let rates = (0..k * n).map(|_| r.gen_range(0.0..hi)).collect();
    let m = ErrorMatrix::from_rates((0..k).map(NodeId).collect(), n, rates).unwrap();
    let d = (0..k).map(|_| r.gen_range(0.0..dmax)).collect();
    Instance::new(m, d, alpha).unwrap()
}

/// Minimum of `sum_v e[y(v)][v]` over every map `y` from nodes into `placed`.
pub fn brute_assignment_wr(inst: &Instance, placed: &[usize]) -> f64 {
    let n = inst.n_nodes();
    let p = placed.len();
    let mut best = f64::INFINITY;
    let mut digits = vec![0usize; n];
    loop {
        let total: f64 = (0..n).map(|v| inst.error().rate(placed[digits[v]], NodeId(v))).sum();
        best = best.min(total);
        let mut i = 0;
        while i < n {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

pub fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// `W` straight from the definitions: alpha times the summed distances plus
/// each node's cheapest placed controller.
pub fn w_oracle(inst: &Instance, placed: &[usize]) -> f64 {
    let wc: f64 = placed.iter().map(|&i| inst.d()[i]).sum();
    let wr: f64 = if placed.is_empty() {
        inst.n_nodes() as f64
    } else {
        (0..inst.n_nodes())
            .map(|v| placed.iter().map(|&i| inst.error().rate(i, NodeId(v))).fold(f64::INFINITY, f64::min))
            .sum()
    };
    inst.alpha() * wc + wr
}

pub fn w_tilde_oracle(inst: &Instance, placed: &[usize]) -> f64 {
    upper_bound(inst.alpha(), inst.d(), inst.n_nodes()) - w_oracle(inst, placed)
}

/// Best nonempty subset under `W`, ties to fewer members then the
/// lexicographically smaller index list.
pub fn brute_optimum(inst: &Instance) -> (Vec<usize>, f64) {
    let k = inst.n_candidates();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in 1..(1u64 << k) {
        let set = members(mask, k);
        let w = w_oracle(inst, &set);
        let better = match &best {
            None => true,
            Some((bs, bw)) => w < *bw || (w == *bw && (set.len(), &set) < (bs.len(), bs)),
        };
        if better {
            best = Some((set, w));
        }
    }
    best.unwrap()
}

pub fn max_w_tilde(inst: &Instance) -> f64 {
    let k = inst.n_candidates();
    (0..(1u64 << k)).map(|m| w_tilde_oracle(inst, &members(m, k))).fold(f64::NEG_INFINITY, f64::max)
}

/// Exhaustive best pair of gateways by total latency to the nearest one.
pub fn two_median_optimum(topo: &Topology) -> f64 {
    let n = topo.node_count();
    let dist: Vec<Vec<f64>> = topo.node_ids().map(|s| sdnplace::reliability::latencies_from(topo, s)).collect();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let total: f64 = (0..n).map(|v| dist[a][v].min(dist[b][v])).sum();
            best = best.min(total);
        }
    }
    best
}

pub fn nodes(ids: &[usize]) -> Vec<NodeId> {
    ids.iter().copied().map(NodeId).collect()
}
