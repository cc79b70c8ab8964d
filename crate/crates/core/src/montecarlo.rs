//! Monte Carlo check of the analytic error rates.
//!
//! Every component of a control path is drawn up or down independently in
//! each sample; the path fails if any member fails. Samples are split into
//! fixed-size blocks whose seeds derive from the run seed, so the estimate is
//! the same however many threads process the blocks.

use rayon::prelude::*;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::format::{csv_record, sig12};
use crate::objective::{eval_wr, Instance, Placement};
use crate::reliability::{control_path_error, NodeCounting, ReliabilityOptions};
use crate::seed::{self, stream};
use crate::topology::{FailureAssignment, NodeId, Topology};

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub samples: u64,
    pub estimated_error: f64,
    pub analytic_error: f64,
    /// `sqrt(p(1 - p) / samples)` at the estimate.
    pub std_error: f64,
}

impl SimReport {
    fn from_failures(failed: u64, samples: u64, analytic: f64) -> Self {
        let p = failed as f64 / samples as f64;
        SimReport {
            samples,
            estimated_error: p,
            analytic_error: analytic,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }

    /// Distance between estimate and analytic value in standard errors.
    /// Zero-variance estimates count as 0 when exact and infinite otherwise.
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimated_error - self.analytic_error).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score() <= sigmas
    }

    pub const CSV_HEADER: &'static str = "path_id,samples,analytic,estimate,std_error";

    pub fn csv_row(&self, id: &str) -> String {
        csv_record([
            id,
            &self.samples.to_string(),
            &sig12(self.analytic_error),
            &sig12(self.estimated_error),
            &sig12(self.std_error),
        ])
    }
}

/// Failure probabilities of the components of a path, in the order nodes,
/// links, satellite link.
fn component_probs(
    topo: &Topology,
    failures: &FailureAssignment,
    nodes: &[NodeId],
    opts: &ReliabilityOptions,
) -> Result<Vec<f64>> {
    let mut probs = Vec::with_capacity(2 * nodes.len());
    let members: &[NodeId] = match opts.counting {
        NodeCounting::AllNodes => nodes,
        NodeCounting::IntermediateOnly if nodes.len() > 2 => &nodes[1..nodes.len() - 1],
        NodeCounting::IntermediateOnly => &[],
    };
    probs.extend(members.iter().map(|&v| failures.node(v)));
    for w in nodes.windows(2) {
        let e = topo
            .edge_between(w[0], w[1])
            .ok_or_else(|| Error::domain(format!("{} and {} are not adjacent", w[0], w[1])))?;
        probs.push(failures.edge(e));
    }
    if opts.satellite_hop {
        if let Some(p) = nodes.last().and_then(|&g| failures.sat(g)) {
            probs.push(p);
        }
    }
    Ok(probs)
}

fn count_failures(probs: &[f64], samples: u64, seed: u64) -> u64 {
    let blocks = samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed::derive(seed, stream::SIMULATION, b));
            let n = BLOCK.min(samples - b * BLOCK);
            let mut failed = 0;
            for _ in 0..n {
                // Draw every component so each sample consumes a fixed
                // number of values.
                let mut down = false;
                for &p in probs {
                    down |= rng.gen::<f64>() < p;
                }
                failed += down as u64;
            }
            failed
        })
        .sum()
}

/// Estimates the failure probability of the control path `nodes` (first node
/// the controller, last the switch).
pub fn simulate_path(
    topo: &Topology,
    failures: &FailureAssignment,
    nodes: &[NodeId],
    opts: &ReliabilityOptions,
    samples: u64,
    seed: u64,
) -> Result<SimReport> {
    if samples == 0 {
        return Err(Error::domain("samples must be at least 1"));
    }
    if nodes.is_empty() {
        return Err(Error::domain("empty path"));
    }
    let probs = component_probs(topo, failures, nodes, opts)?;
    let analytic = control_path_error(topo, failures, nodes, opts);
    Ok(SimReport::from_failures(count_failures(&probs, samples, seed), samples, analytic))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSim {
    pub node: NodeId,
    pub controller: NodeId,
    pub report: SimReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSim {
    pub per_node: Vec<NodeSim>,
    /// Mean over nodes; the analytic value is `W^r / |V|`.
    pub aggregate: SimReport,
}

impl PlacementSim {
    pub fn to_csv(&self, topo: &Topology) -> String {
        let mut s = format!("{}\n", SimReport::CSV_HEADER);
        for n in &self.per_node {
            let id = format!("{}>{}", topo.node_name(n.controller), topo.node_name(n.node));
            s.push_str(&n.report.csv_row(&id));
        }
        s.push_str(&self.aggregate.csv_row("aggregate"));
        s
    }
}

/// Simulates the assigned control path of every node. `inst` must carry the
/// paths it was built from (see [`crate::reliability::reliability_matrix`]).
pub fn simulate_placement(
    topo: &Topology,
    inst: &Instance,
    placement: &Placement,
    failures: &FailureAssignment,
    opts: &ReliabilityOptions,
    samples: u64,
    seed: u64,
) -> Result<PlacementSim> {
    placement.validate(inst)?;
    if inst.n_nodes() != topo.node_count() {
        return Err(Error::domain("instance and topology disagree on the node count"));
    }
    let per_node = placement
        .assignment
        .iter()
        .enumerate()
        .map(|(v, &k)| {
            let ci = inst.error().candidate_index(k).expect("validated placement");
            let path = inst
                .error()
                .path(ci, NodeId(v))
                .ok_or_else(|| Error::domain("instance has no control paths to simulate"))?;
            let report = simulate_path(
                topo,
                failures,
                path,
                opts,
                samples,
                seed::derive(seed, stream::PATHS, v as u64),
            )?;
            Ok(NodeSim { node: NodeId(v), controller: k, report })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_node.len() as f64;
    let idx = inst.indices_of(&placement.placed)?;
    let aggregate = SimReport {
        samples,
        estimated_error: per_node.iter().map(|s| s.report.estimated_error).sum::<f64>() / n,
        analytic_error: eval_wr(inst, &idx) / n,
        // nodes are simulated independently
        std_error: per_node.iter().map(|s| s.report.std_error.powi(2)).sum::<f64>().sqrt() / n,
    };
    Ok(PlacementSim { per_node, aggregate })
}
