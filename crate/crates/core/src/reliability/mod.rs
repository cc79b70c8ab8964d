//! Control paths and their error rates.
//!
//! The error rate of a control path is the probability that at least one of
//! its components fails: `1 - prod(1 - P_e) * prod(1 - P_v)` over its links
//! and (by default) its intermediate nodes only.

mod search;
mod yen;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::{csv_record, exact, sig12};
use crate::topology::{FailureAssignment, NodeId, Topology};
use search::{no_node_cost, Label, Search};

pub use yen::yen_k_paths;

/// How the control path between a controller and a switch is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMode {
    /// Globally most reliable path.
    #[default]
    ExactReliable,
    /// Most reliable among the K latency-shortest loopless paths.
    YenK(usize),
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathMode::ExactReliable => f.write_str("exact-reliable"),
            PathMode::YenK(k) => write!(f, "yen-k:{k}"),
        }
    }
}

impl FromStr for PathMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exact-reliable" {
            return Ok(PathMode::ExactReliable);
        }
        let k = s
            .strip_prefix("yen-k:")
            .or_else(|| s.strip_prefix("yen-k(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::domain(format!("unknown path mode `{s}` (exact-reliable | yen-k:K)")))?;
        let k: usize = k.parse().map_err(|_| Error::domain(format!("bad K in `{s}`")))?;
        if k == 0 {
            return Err(Error::domain("yen-k needs K >= 1"));
        }
        Ok(PathMode::YenK(k))
    }
}

/// Which nodes of a path contribute a `(1 - P_v)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeCounting {
    /// Endpoints are presumed alive.
    #[default]
    IntermediateOnly,
    AllNodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReliabilityOptions {
    pub mode: PathMode,
    pub counting: NodeCounting,
    /// Charge the satellite link of a gateway switch as one more component
    /// of its control path.
    pub satellite_hop: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// Endpoints inclusive. A single node is the trivial self path.
    pub nodes: Vec<NodeId>,
    pub latency: f64,
    /// Set once the path is evaluated against a failure assignment.
    pub error_rate: Option<f64>,
}

impl PathRecord {
    pub(crate) fn new(topo: &Topology, nodes: Vec<NodeId>) -> Self {
        let latency = path_latency(topo, &nodes);
        PathRecord { nodes, latency, error_rate: None }
    }

    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Semicolon-joined node names.
    pub fn display(&self, topo: &Topology) -> String {
        join_names(self.nodes.iter().map(|&n| topo.node_name(n)))
    }
}

fn join_names<'a>(names: impl Iterator<Item = &'a str>) -> String {
    names.collect::<Vec<_>>().join(";")
}

/// Sum of link lengths in path order.
pub fn path_latency(topo: &Topology, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|w| {
            let e = topo
                .edge_between(w[0], w[1])
                .unwrap_or_else(|| panic!("{} and {} are not adjacent", w[0], w[1]));
            topo.edge(e).length_km
        })
        .sum()
}

/// Minimum-latency path; ties go to the lexicographically smallest node
/// sequence.
pub fn shortest_latency_path(topo: &Topology, src: NodeId, dst: NodeId) -> Result<PathRecord> {
    check_node(topo, src)?;
    check_node(topo, dst)?;
    let search = Search {
        topo,
        edge_cost: |e| topo.edge(e).length_km,
        node_cost: no_node_cost,
        blocked_nodes: None,
        blocked_edges: None,
    };
    match search.run(src, Some(dst)).swap_remove(dst.0) {
        Some(label) => Ok(PathRecord::new(topo, label.path)),
        None => Err(Error::NoPath { src: topo.node_name(src).into(), dst: topo.node_name(dst).into() }),
    }
}

/// Latencies from `src` to every node.
pub fn latencies_from(topo: &Topology, src: NodeId) -> Vec<f64> {
    let search = Search {
        topo,
        edge_cost: |e| topo.edge(e).length_km,
        node_cost: no_node_cost,
        blocked_nodes: None,
        blocked_edges: None,
    };
    search
        .run(src, None)
        .into_iter()
        .map(|l| l.map_or(f64::INFINITY, |l| path_latency(topo, &l.path)))
        .collect()
}

fn check_node(topo: &Topology, v: NodeId) -> Result<()> {
    if topo.contains(v) {
        Ok(())
    } else {
        Err(Error::UnknownNode(v.to_string()))
    }
}

/// Error rate of a path: one minus the product of component survival
/// probabilities.
pub fn path_error_rate(
    topo: &Topology,
    failures: &FailureAssignment,
    nodes: &[NodeId],
    counting: NodeCounting,
) -> f64 {
    let mut survive = 1.0;
    for w in nodes.windows(2) {
        let e = topo.edge_between(w[0], w[1]).expect("consecutive path nodes must be adjacent");
        survive *= 1.0 - failures.edge(e);
    }
    let members: &[NodeId] = match counting {
        NodeCounting::AllNodes => nodes,
        NodeCounting::IntermediateOnly if nodes.len() > 2 => &nodes[1..nodes.len() - 1],
        NodeCounting::IntermediateOnly => &[],
    };
    for &v in members {
        survive *= 1.0 - failures.node(v);
    }
    (1.0 - survive).clamp(0.0, 1.0)
}

/// Path error rate plus, in satellite-hop mode, the satellite link of a
/// gateway destination.
pub fn control_path_error(
    topo: &Topology,
    failures: &FailureAssignment,
    nodes: &[NodeId],
    opts: &ReliabilityOptions,
) -> f64 {
    let e = path_error_rate(topo, failures, nodes, opts.counting);
    match (opts.satellite_hop, failures.sat(*nodes.last().unwrap())) {
        (true, Some(p)) => (1.0 - (1.0 - e) * (1.0 - p)).clamp(0.0, 1.0),
        _ => e,
    }
}

fn neg_log_survival(p: f64) -> f64 {
    // P = 1 maps to +inf
    -(-p).ln_1p()
}

/// Most-reliable-path labels from `src` to every node.
fn reliable_labels(topo: &Topology, failures: &FailureAssignment, src: NodeId) -> Vec<Option<Label>> {
    let search = Search {
        topo,
        edge_cost: |e| neg_log_survival(failures.edge(e)),
        node_cost: |v| neg_log_survival(failures.node(v)),
        blocked_nodes: None,
        blocked_edges: None,
    };
    search.run(src, None)
}

fn finish(topo: &Topology, failures: &FailureAssignment, nodes: Vec<NodeId>, opts: &ReliabilityOptions) -> PathRecord {
    let error = control_path_error(topo, failures, &nodes, opts);
    let mut rec = PathRecord::new(topo, nodes);
    rec.error_rate = Some(error);
    rec
}

fn yen_best(
    topo: &Topology,
    failures: &FailureAssignment,
    k: NodeId,
    v: NodeId,
    paths: usize,
    opts: &ReliabilityOptions,
) -> Result<PathRecord> {
    let mut best: Option<PathRecord> = None;
    for p in yen_k_paths(topo, k, v, paths)? {
        let rec = finish(topo, failures, p.nodes, opts);
        if best.as_ref().is_none_or(|b| rec.error_rate < b.error_rate) {
            best = Some(rec);
        }
    }
    Ok(best.expect("Yen returns at least one path"))
}

/// Control path from controller `k` to switch `v` under `opts.mode`. The
/// self path (`k == v`) is the single node `[k]`.
pub fn best_control_path(
    topo: &Topology,
    failures: &FailureAssignment,
    k: NodeId,
    v: NodeId,
    opts: &ReliabilityOptions,
) -> Result<PathRecord> {
    check_node(topo, k)?;
    check_node(topo, v)?;
    if k == v {
        return Ok(finish(topo, failures, vec![k], opts));
    }
    match opts.mode {
        PathMode::ExactReliable => {
            let label = reliable_labels(topo, failures, k).swap_remove(v.0).ok_or_else(|| Error::NoPath {
                src: topo.node_name(k).into(),
                dst: topo.node_name(v).into(),
            })?;
            Ok(finish(topo, failures, label.path, opts))
        }
        PathMode::YenK(paths) => yen_best(topo, failures, k, v, paths, opts),
    }
}

/// Best control-path error rate `e[k][v]` for every candidate `k` and node `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    candidates: Vec<NodeId>,
    node_names: Vec<String>,
    rates: Vec<f64>,
    /// Realizing paths, row-major like `rates`; empty for synthetic matrices.
    paths: Vec<Vec<NodeId>>,
    mode: Option<PathMode>,
}

impl ErrorMatrix {
    /// Matrix without paths, e.g. for synthetic instances. `rates` is
    /// row-major over `candidates` x nodes.
    pub fn from_rates(candidates: Vec<NodeId>, n_nodes: usize, rates: Vec<f64>) -> Result<Self> {
        let names = (0..n_nodes).map(|i| i.to_string()).collect();
        Self::assemble(candidates, names, rates, Vec::new(), None)
    }

    fn assemble(
        candidates: Vec<NodeId>,
        node_names: Vec<String>,
        rates: Vec<f64>,
        paths: Vec<Vec<NodeId>>,
        mode: Option<PathMode>,
    ) -> Result<Self> {
        let n = node_names.len();
        if candidates.is_empty() {
            return Err(Error::Config("candidate set is empty".into()));
        }
        if !candidates.windows(2).all(|w| w[0] < w[1]) || candidates.iter().any(|c| c.0 >= n) {
            return Err(Error::domain("candidates must be ascending node ids"));
        }
        if rates.len() != candidates.len() * n {
            return Err(Error::domain(format!(
                "error matrix has {} entries, expected {}",
                rates.len(),
                candidates.len() * n
            )));
        }
        if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::domain(format!("error rate {r} outside [0, 1]")));
        }
        Ok(ErrorMatrix { candidates, node_names, rates, paths, mode })
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn mode(&self) -> Option<PathMode> {
        self.mode
    }

    /// Error rate for candidate index `ci` (position in `candidates()`).
    pub fn rate(&self, ci: usize, v: NodeId) -> f64 {
        self.rates[ci * self.n_nodes() + v.0]
    }

    pub fn row(&self, ci: usize) -> &[f64] {
        let n = self.n_nodes();
        &self.rates[ci * n..(ci + 1) * n]
    }

    pub fn path(&self, ci: usize, v: NodeId) -> Option<&[NodeId]> {
        self.paths.get(ci * self.n_nodes() + v.0).map(Vec::as_slice)
    }

    pub fn candidate_index(&self, k: NodeId) -> Option<usize> {
        self.candidates.binary_search(&k).ok()
    }

    /// Same matrix with every rate multiplied by `factor` (clamped to 1).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.rates.iter_mut().for_each(|r| *r = (*r * factor).min(1.0));
        m
    }

    /// CSV `k,v,error_rate,path` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        self.csv_with(sig12)
    }

    /// Same columns with lossless floats, for replayable instance bundles.
    pub(crate) fn to_csv_exact(&self) -> String {
        self.csv_with(exact)
    }

    fn csv_with(&self, fmt_rate: fn(f64) -> String) -> String {
        let mut s = String::from("k,v,error_rate,path\n");
        for (ci, &k) in self.candidates.iter().enumerate() {
            for v in 0..self.n_nodes() {
                let path = self
                    .path(ci, NodeId(v))
                    .map(|p| join_names(p.iter().map(|n| self.node_names[n.0].as_str())))
                    .unwrap_or_default();
                s.push_str(&csv_record([
                    self.node_names[k.0].as_str(),
                    &self.node_names[v],
                    &fmt_rate(self.rate(ci, NodeId(v))),
                    &path,
                ]));
            }
        }
        s
    }

    /// Parses the CSV written by [`ErrorMatrix::to_csv`]. Node order is the
    /// order of `v` in the first candidate's rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut rows: Vec<(String, String, f64, String)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Csv(format!("expected 4 columns, found {}", rec.len())));
            }
            let rate: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Csv(format!("bad error_rate `{}`", &rec[2])))?;
            rows.push((rec[0].to_string(), rec[1].to_string(), rate, rec[3].to_string()));
        }
        let first_k = rows.first().map(|r| r.0.clone()).ok_or_else(|| Error::Csv("empty error matrix".into()))?;
        let node_names: Vec<String> = rows.iter().take_while(|r| r.0 == first_k).map(|r| r.1.clone()).collect();
        let n = node_names.len();
        let lookup = |name: &str| -> Result<NodeId> {
            node_names
                .iter()
                .position(|x| x == name)
                .map(NodeId)
                .ok_or_else(|| Error::UnknownNode(name.to_string()))
        };
        if !rows.len().is_multiple_of(n) {
            return Err(Error::Csv("error matrix rows do not form complete candidate blocks".into()));
        }
        let mut candidates = Vec::new();
        let mut rates = Vec::with_capacity(rows.len());
        let mut paths = Vec::with_capacity(rows.len());
        let mut have_paths = true;
        for (i, (k, v, rate, path)) in rows.iter().enumerate() {
            if i % n == 0 {
                candidates.push(lookup(k)?);
            } else if *k != rows[i - i % n].0 {
                return Err(Error::Csv(format!("row {}: candidate block interrupted", i + 2)));
            }
            if *v != node_names[i % n] {
                return Err(Error::Csv(format!("row {}: node order differs between candidates", i + 2)));
            }
            rates.push(*rate);
            if path.is_empty() {
                have_paths = false;
            } else {
                paths.push(path.split(';').map(lookup).collect::<Result<Vec<_>>>()?);
            }
        }
        if !have_paths {
            paths.clear();
        }
        Self::assemble(candidates, node_names, rates, paths, None)
    }
}

/// Fills every `(k, v)` entry with [`best_control_path`]. Rows are computed in
/// parallel; the result does not depend on scheduling.
pub fn reliability_matrix(
    topo: &Topology,
    failures: &FailureAssignment,
    opts: &ReliabilityOptions,
) -> Result<ErrorMatrix> {
    let candidates: Vec<NodeId> = topo.candidates().iter().copied().collect();
    let rows: Vec<Vec<PathRecord>> = candidates
        .par_iter()
        .map(|&k| -> Result<Vec<PathRecord>> {
            match opts.mode {
                PathMode::ExactReliable => {
                    let labels = reliable_labels(topo, failures, k);
                    topo.node_ids()
                        .map(|v| {
                            if v == k {
                                return Ok(finish(topo, failures, vec![k], opts));
                            }
                            let label = labels[v.0].clone().ok_or_else(|| Error::NoPath {
                                src: topo.node_name(k).into(),
                                dst: topo.node_name(v).into(),
                            })?;
                            Ok(finish(topo, failures, label.path, opts))
                        })
                        .collect()
                }
                PathMode::YenK(_) => topo.node_ids().map(|v| best_control_path(topo, failures, k, v, opts)).collect(),
            }
        })
        .collect::<Result<_>>()?;

    let mut rates = Vec::with_capacity(candidates.len() * topo.node_count());
    let mut paths = Vec::with_capacity(rates.capacity());
    for row in rows {
        for rec in row {
            rates.push(rec.error_rate.expect("evaluated"));
            paths.push(rec.nodes);
        }
    }
    let names = topo.nodes().iter().map(|n| n.name.clone()).collect();
    ErrorMatrix::assemble(candidates, names, rates, paths, Some(opts.mode))
}

/// Latency from `k` to its nearest gateway.
pub fn gateway_distance(topo: &Topology, k: NodeId) -> Result<f64> {
    check_node(topo, k)?;
    if topo.gateways().is_empty() {
        return Err(Error::Config("gateway set is empty".into()));
    }
    let lat = latencies_from(topo, k);
    Ok(topo.gateways().iter().map(|g| lat[g.0]).fold(f64::INFINITY, f64::min))
}

/// `d_k` for every candidate, ascending by candidate id.
pub fn gateway_distances(topo: &Topology) -> Result<Vec<f64>> {
    topo.candidates().iter().map(|&k| gateway_distance(topo, k)).collect()
}
