//! Placement objective.
//!
//! For a set `X` of placed controllers (given as ascending candidate indices):
//!
//! * `W^c(X) = sum_{k in X} d_k` (controller-to-gateway latency),
//! * `W^r(X) = sum_v min_{k in X} e[k][v]` (control-path error, with every
//!   switch served by its most reliable controller),
//! * `W(X) = alpha * W^c(X) + W^r(X)`,
//! * `W~(X) = W_bar - W(X)` with `W_bar = alpha * sum_K d_k + |V|`.
//!
//! `W` is supermodular and `W~` is nonnegative and submodular. The empty set
//! charges every switch the maximal error 1, so `W^r(empty) = |V|`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::format::{csv_record, exact};
use crate::reliability::{gateway_distances, reliability_matrix, ErrorMatrix, ReliabilityOptions};
use crate::topology::{FailureAssignment, NodeId, Topology};

/// Frozen inputs of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    error: ErrorMatrix,
    d: Vec<f64>,
    alpha: f64,
    w_bar: f64,
}

impl Instance {
    /// `d[i]` is the gateway distance of `error.candidates()[i]`.
    pub fn new(error: ErrorMatrix, d: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
        }
        if d.len() != error.candidates().len() {
            return Err(Error::domain(format!(
                "{} gateway distances for {} candidates",
                d.len(),
                error.candidates().len()
            )));
        }
        if let Some(x) = d.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::domain(format!("gateway distance {x} must be finite and >= 0")));
        }
        let w_bar = upper_bound(alpha, &d, error.n_nodes());
        Ok(Instance { error, d, alpha, w_bar })
    }

    /// Builds the error matrix and gateway distances for a topology.
    pub fn from_topology(
        topo: &Topology,
        failures: &FailureAssignment,
        opts: &ReliabilityOptions,
        alpha: f64,
    ) -> Result<Self> {
        let d = gateway_distances(topo)?;
        Instance::new(reliability_matrix(topo, failures, opts)?, d, alpha)
    }

    /// Same error matrix and distances under another alpha.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Instance::new(self.error.clone(), self.d.clone(), alpha)
    }

    pub fn error(&self) -> &ErrorMatrix {
        &self.error
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w_bar(&self) -> f64 {
        self.w_bar
    }

    pub fn n_candidates(&self) -> usize {
        self.d.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.error.n_nodes()
    }

    pub fn candidates(&self) -> &[NodeId] {
        self.error.candidates()
    }

    /// Candidate indices for a set of node ids; fails for nodes outside the
    /// candidate set.
    pub fn indices_of(&self, placed: &BTreeSet<NodeId>) -> Result<Vec<usize>> {
        placed
            .iter()
            .map(|&k| {
                self.error
                    .candidate_index(k)
                    .ok_or_else(|| Error::domain(format!("node {k} is not a controller candidate")))
            })
            .collect()
    }

    pub fn nodes_of(&self, idx: &[usize]) -> BTreeSet<NodeId> {
        idx.iter().map(|&i| self.candidates()[i]).collect()
    }

    /// Writes `error.csv`, `d.csv` and `instance.txt` into `dir` with lossless
    /// floats.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        write("error.csv", self.error.to_csv_exact())?;
        let mut d = String::from("k,d_km\n");
        for (i, &k) in self.candidates().iter().enumerate() {
            d.push_str(&csv_record([self.error.node_names()[k.0].as_str(), &exact(self.d[i])]));
        }
        write("d.csv", d)?;
        let mode = self.error.mode().map_or("none".to_string(), |m| m.to_string());
        write(
            "instance.txt",
            format!("alpha = {}\nw_bar = {}\nmode = {}\n", exact(self.alpha), exact(self.w_bar), mode),
        )
    }

    pub fn read_bundle(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| Error::io(p, e))
        };
        let error = ErrorMatrix::from_csv(&read("error.csv")?)?;
        let mut d = Vec::new();
        let d_text = read("d.csv")?;
        let mut rdr = csv::Reader::from_reader(d_text.as_bytes());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let k = error
                .candidates()
                .get(i)
                .map(|k| error.node_names()[k.0].as_str())
                .ok_or_else(|| Error::Csv("d.csv has more rows than candidates".into()))?;
            if &rec[0] != k {
                return Err(Error::Csv(format!("d.csv row {} is `{}`, expected `{k}`", i + 2, &rec[0])));
            }
            d.push(rec[1].parse().map_err(|_| Error::Csv(format!("bad d_km `{}`", &rec[1])))?);
        }
        let cfg = read("instance.txt")?;
        let mut alpha = None;
        let mut w_bar = None;
        for line in cfg.lines() {
            if let Some((key, value)) = line.split_once('=') {
                let parse = || value.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad value in `{line}`")));
                match key.trim() {
                    "alpha" => alpha = Some(parse()?),
                    "w_bar" => w_bar = Some(parse()?),
                    _ => {}
                }
            }
        }
        let alpha = alpha.ok_or_else(|| Error::Config("instance.txt lacks alpha".into()))?;
        let inst = Instance::new(error, d, alpha)?;
        if let Some(w) = w_bar {
            if w != inst.w_bar {
                return Err(Error::Config(format!("stored w_bar {w} disagrees with recomputed {}", inst.w_bar)));
            }
        }
        Ok(inst)
    }
}

/// Controllers and the switch-to-controller assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub placed: BTreeSet<NodeId>,
    /// Controller serving each node, indexed by node id.
    pub assignment: Vec<NodeId>,
}

impl Placement {
    /// Placement of `idx` with the most-reliable assignment.
    pub fn from_indices(inst: &Instance, idx: &[usize]) -> Result<Self> {
        let assignment = optimal_assignment(inst, idx)?;
        Ok(Placement { placed: inst.nodes_of(idx), assignment })
    }

    /// Checks that controllers sit only on candidates, every node has one
    /// controller, and every assigned controller is placed.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.placed.is_empty() {
            return Err(Error::domain("placement is empty"));
        }
        inst.indices_of(&self.placed)?;
        if self.assignment.len() != inst.n_nodes() {
            return Err(Error::domain(format!(
                "assignment covers {} of {} nodes",
                self.assignment.len(),
                inst.n_nodes()
            )));
        }
        if let Some((v, k)) = self.assignment.iter().enumerate().find(|(_, k)| !self.placed.contains(k)) {
            return Err(Error::domain(format!("node #{v} assigned to unplaced controller {k}")));
        }
        Ok(())
    }

    /// `sum_v e[assignment(v)][v]`.
    pub fn assigned_error(&self, inst: &Instance) -> Result<f64> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(v, &k)| {
                let ci = inst
                    .error()
                    .candidate_index(k)
                    .ok_or_else(|| Error::domain(format!("{k} is not a candidate")))?;
                Ok(inst.error().rate(ci, NodeId(v)))
            })
            .sum()
    }
}

fn debug_check_sorted(idx: &[usize], n: usize) {
    debug_assert!(idx.windows(2).all(|w| w[0] < w[1]), "candidate indices must ascend");
    debug_assert!(idx.iter().all(|&i| i < n), "candidate index out of range");
}

/// Each node goes to the placed controller with the smallest error rate;
/// ties go to the smaller candidate id.
pub fn optimal_assignment(inst: &Instance, placed: &[usize]) -> Result<Vec<NodeId>> {
    if placed.is_empty() {
        return Err(Error::domain("cannot assign nodes without a placed controller"));
    }
    debug_check_sorted(placed, inst.n_candidates());
    Ok((0..inst.n_nodes())
        .map(|v| {
            let mut best = placed[0];
            for &i in &placed[1..] {
                if inst.error.rate(i, NodeId(v)) < inst.error.rate(best, NodeId(v)) {
                    best = i;
                }
            }
            inst.candidates()[best]
        })
        .collect())
}

pub fn eval_wc(inst: &Instance, placed: &[usize]) -> f64 {
    debug_check_sorted(placed, inst.n_candidates());
    placed.iter().map(|&i| inst.d[i]).sum()
}

pub fn eval_wr(inst: &Instance, placed: &[usize]) -> f64 {
    debug_check_sorted(placed, inst.n_candidates());
    if placed.is_empty() {
        return inst.n_nodes() as f64;
    }
    (0..inst.n_nodes())
        .map(|v| {
            placed
                .iter()
                .map(|&i| inst.error.rate(i, NodeId(v)))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

pub fn eval_w(inst: &Instance, placed: &[usize]) -> f64 {
    inst.alpha * eval_wc(inst, placed) + eval_wr(inst, placed)
}

/// `alpha * sum(d) + n_nodes`: no placement can cost more.
pub fn upper_bound(alpha: f64, d: &[f64], n_nodes: usize) -> f64 {
    alpha * d.iter().sum::<f64>() + n_nodes as f64
}

pub fn w_tilde(inst: &Instance, placed: &[usize]) -> f64 {
    inst.w_bar - eval_w(inst, placed)
}
