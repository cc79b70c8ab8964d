//! Placement solvers: exact search and randomized double greedy.

mod exact;
mod greedy;
mod supermodular;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::format::{csv_record, sig12};
use crate::objective::{eval_w, eval_wc, eval_wr, w_tilde, Instance, Placement};

pub use exact::{solve_exact, solve_exact_with, ExactOptions, DEFAULT_ENUMERATION_LIMIT};
pub use greedy::{
    double_greedy_trace, solve_double_greedy, solve_double_greedy_with, GreedyOptions, GreedyRule, GreedyStep,
    GreedyTrace,
};
pub use supermodular::{check_supermodular_fn, check_supermodularity, SupermodularityReport, VIOLATION_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Exact,
    Greedy,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(SolverKind::Exact),
            "greedy" => Ok(SolverKind::Greedy),
            other => Err(Error::domain(format!("unknown solver `{other}` (exact | greedy)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub placement: Placement,
    pub w: f64,
    pub wc: f64,
    pub wr: f64,
    pub w_tilde: f64,
    pub elapsed: Duration,
    /// Objective (or bound) evaluations spent by the search.
    pub evaluations: u64,
    pub solver: SolverKind,
    /// Greedy only.
    pub seed: Option<u64>,
}

impl SolveResult {
    pub(crate) fn from_indices(
        inst: &Instance,
        idx: &[usize],
        solver: SolverKind,
        seed: Option<u64>,
        evaluations: u64,
        elapsed: Duration,
    ) -> Result<Self> {
        Ok(SolveResult {
            placement: Placement::from_indices(inst, idx)?,
            w: eval_w(inst, idx),
            wc: eval_wc(inst, idx),
            wr: eval_wr(inst, idx),
            w_tilde: w_tilde(inst, idx),
            elapsed,
            evaluations,
            solver,
            seed,
        })
    }

    pub fn n_placed(&self) -> usize {
        self.placement.placed.len()
    }

    pub const CSV_HEADER: &'static str = "solver,seed,n_placed,placed,w,wc,wr,w_tilde,elapsed,evaluations";

    /// One newline-terminated CSV row. Wall-clock time is written only with
    /// `timings`, so the default output is reproducible byte for byte.
    pub fn csv_row(&self, inst: &Instance, timings: bool) -> String {
        let names = inst.error().node_names();
        let placed: Vec<&str> = self.placement.placed.iter().map(|k| names[k.0].as_str()).collect();
        csv_record([
            self.solver.to_string(),
            self.seed.map_or(String::new(), |s| s.to_string()),
            self.n_placed().to_string(),
            placed.join(";"),
            sig12(self.w),
            sig12(self.wc),
            sig12(self.wr),
            sig12(self.w_tilde),
            if timings { format!("{:.6}", self.elapsed.as_secs_f64()) } else { "NA".into() },
            self.evaluations.to_string(),
        ])
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::Rng;

    use crate::objective::Instance;
    use crate::reliability::ErrorMatrix;
    use crate::seed;
    use crate::topology::NodeId;

    /// Random instance whose candidates are the first `k` of `max(n, k)`
    /// nodes.
    pub fn random_instance(k: usize, n: usize, alpha: f64, s: u64) -> Instance {
        let n = n.max(k);
        let mut rng = seed::rng(s);
        let rates = (0..k * n).map(|_| rng.gen_range(0.0..0.3)).collect();
        let d = (0..k).map(|_| rng.gen_range(0.0..2.0)).collect();
        let m = ErrorMatrix::from_rates((0..k).map(NodeId).collect(), n, rates).unwrap();
        Instance::new(m, d, alpha).unwrap()
    }
}
