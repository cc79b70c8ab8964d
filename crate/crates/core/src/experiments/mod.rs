//! Repeated randomized trials over failure cases, alphas and solvers.
//!
//! Repeat `r` samples its failure probabilities from
//! `seed::derive(master, FAILURES, r)` and seeds the greedy solver with
//! `seed::derive(trial_seed, GREEDY, 0)`. Every failure case and alpha of a
//! repeat therefore shares the same underlying uniform draws, and any repeat
//! can be rerun on its own.

mod config;
mod tables;

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::{csv_record, sig12};
use crate::objective::Instance;
use crate::reliability::{gateway_distances, latencies_from, reliability_matrix};
use crate::seed::{self, stream};
use crate::solvers::{solve_double_greedy_with, solve_exact_with, SolveResult, SolverKind};
use crate::topology::{sample_failures, FailureCase, NodeId, Topology};

pub use config::{parse_case, ExperimentConfig, GatewaySpec};
pub use tables::{alpha_sweep, compare_solvers, gap_table, sweep_table, write_outputs, GapRow, SweepRow};

/// Greedy k-median on shortest-path latency: repeatedly adds the node that
/// minimizes the total latency from every node to its nearest chosen
/// gateway. Ties go to the smaller id.
pub fn place_gateways_fallback(topo: &Topology, count: usize) -> Result<BTreeSet<NodeId>> {
    let n = topo.node_count();
    if count == 0 || count > n {
        return Err(Error::domain(format!("gateway count {count} outside 1..={n}")));
    }
    let dist: Vec<Vec<f64>> = topo.node_ids().collect::<Vec<_>>().par_iter().map(|&s| latencies_from(topo, s)).collect();
    let mut nearest = vec![f64::INFINITY; n];
    let mut chosen = BTreeSet::new();
    for _ in 0..count {
        let mut best: Option<(f64, usize)> = None;
        for g in (0..n).filter(|g| !chosen.contains(&NodeId(*g))) {
            let total: f64 = nearest.iter().zip(&dist[g]).map(|(a, b)| a.min(*b)).sum();
            if best.is_none_or(|(t, _)| total < t) {
                best = Some((total, g));
            }
        }
        let (_, g) = best.expect("count <= n leaves a free node");
        for (a, b) in nearest.iter_mut().zip(&dist[g]) {
            *a = a.min(*b);
        }
        chosen.insert(NodeId(g));
    }
    Ok(chosen)
}

/// Sum of latencies from every node to its nearest member of `set`.
pub fn total_latency_to(topo: &Topology, set: &BTreeSet<NodeId>) -> f64 {
    let dist: Vec<Vec<f64>> = set.iter().map(|&g| latencies_from(topo, g)).collect();
    (0..topo.node_count())
        .map(|v| dist.iter().map(|d| d[v]).fold(f64::INFINITY, f64::min))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub topology: String,
    pub repeat: usize,
    pub case: String,
    pub alpha: f64,
    pub solver: SolverKind,
    /// Seed of the repeat's failure draw.
    pub seed: u64,
    pub placed: Vec<String>,
    pub n_controllers: usize,
    pub w: f64,
    pub wc: f64,
    pub wr: f64,
    pub w_tilde: f64,
    /// `1 - wr / |V|`.
    pub avg_reliability: f64,
    /// `wc / n_controllers`.
    pub d_avg: f64,
    /// Seconds; `None` unless timings were requested.
    pub elapsed: Option<f64>,
    pub evaluations: u64,
}

impl TrialRow {
    pub const CSV_HEADER: &'static str = "topology,repeat,case,alpha,solver,seed,n_controllers,placed,\
w,wc,wr,w_tilde,avg_reliability,d_avg,elapsed,evaluations";

    fn new(topo: &Topology, repeat: usize, case: &FailureCase, seed: u64, inst: &Instance, r: &SolveResult, timings: bool) -> Self {
        let n = r.n_placed();
        TrialRow {
            topology: topo.name().to_string(),
            repeat,
            case: case.label(),
            alpha: inst.alpha(),
            solver: r.solver,
            seed,
            placed: r.placement.placed.iter().map(|&k| topo.node_name(k).to_string()).collect(),
            n_controllers: n,
            w: r.w,
            wc: r.wc,
            wr: r.wr,
            w_tilde: r.w_tilde,
            avg_reliability: 1.0 - r.wr / inst.n_nodes() as f64,
            d_avg: r.wc / n as f64,
            elapsed: timings.then_some(r.elapsed.as_secs_f64()),
            evaluations: r.evaluations,
        }
    }

    pub fn csv_row(&self) -> String {
        csv_record([
            self.topology.clone(),
            self.repeat.to_string(),
            self.case.clone(),
            sig12(self.alpha),
            self.solver.to_string(),
            self.seed.to_string(),
            self.n_controllers.to_string(),
            self.placed.join(";"),
            sig12(self.w),
            sig12(self.wc),
            sig12(self.wr),
            sig12(self.w_tilde),
            sig12(self.avg_reliability),
            sig12(self.d_avg),
            self.elapsed.map_or("NA".into(), |e| format!("{e:.6}")),
            self.evaluations.to_string(),
        ])
    }
}

/// Mean and sample standard deviation (0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub topology: String,
    pub case: String,
    pub alpha: f64,
    pub solver: SolverKind,
    pub trials: usize,
    pub n_controllers: Stat,
    pub w: Stat,
    pub wc: Stat,
    pub wr: Stat,
    pub w_tilde: Stat,
    pub avg_reliability: Stat,
    pub d_avg: Stat,
    pub elapsed: Option<Stat>,
    pub evaluations: Stat,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str = "topology,case,alpha,solver,trials,\
n_controllers_mean,n_controllers_std,w_mean,w_std,wc_mean,wc_std,wr_mean,wr_std,\
w_tilde_mean,w_tilde_std,avg_reliability_mean,avg_reliability_std,d_avg_mean,d_avg_std,\
elapsed_mean,evaluations_mean";

    pub fn csv_row(&self) -> String {
        let mut f = vec![
            self.topology.clone(),
            self.case.clone(),
            sig12(self.alpha),
            self.solver.to_string(),
            self.trials.to_string(),
        ];
        for s in [self.n_controllers, self.w, self.wc, self.wr, self.w_tilde, self.avg_reliability, self.d_avg] {
            f.push(sig12(s.mean));
            f.push(sig12(s.std));
        }
        f.push(self.elapsed.map_or("NA".into(), |e| format!("{:.6}", e.mean)));
        f.push(sig12(self.evaluations.mean));
        csv_record(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub topology: String,
    /// Gateway names and whether they came from the fallback heuristic.
    pub gateways: Vec<String>,
    pub heuristic_gateways: bool,
    /// Ordered by repeat, then case, alpha and solver in configuration order.
    pub rows: Vec<TrialRow>,
    /// One row per (case, alpha, solver) in configuration order.
    pub summary: Vec<SummaryRow>,
}

impl TrialSet {
    pub fn trials_csv(&self) -> String {
        let mut s = format!("{}\n", TrialRow::CSV_HEADER);
        self.rows.iter().for_each(|r| s.push_str(&r.csv_row()));
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = format!("{}\n", SummaryRow::CSV_HEADER);
        self.summary.iter().for_each(|r| s.push_str(&r.csv_row()));
        s
    }

    pub fn find(&self, case: &str, alpha: f64, solver: SolverKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.case == case && r.alpha == alpha && r.solver == solver)
    }
}

/// Groups rows by (case, alpha, solver), keeping first-appearance order.
pub fn summarize(rows: &[TrialRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, f64, SolverKind)> = Vec::new();
    for r in rows {
        let k = (r.case.clone(), r.alpha, r.solver);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(case, alpha, solver)| {
            let g: Vec<&TrialRow> = rows.iter().filter(|r| r.case == case && r.alpha == alpha && r.solver == solver).collect();
            let stat = |f: fn(&TrialRow) -> f64| Stat::of(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            let elapsed: Option<Vec<f64>> = g.iter().map(|r| r.elapsed).collect();
            SummaryRow {
                topology: g[0].topology.clone(),
                case,
                alpha,
                solver,
                trials: g.len(),
                n_controllers: stat(|r| r.n_controllers as f64),
                w: stat(|r| r.w),
                wc: stat(|r| r.wc),
                wr: stat(|r| r.wr),
                w_tilde: stat(|r| r.w_tilde),
                avg_reliability: stat(|r| r.avg_reliability),
                d_avg: stat(|r| r.d_avg),
                elapsed: elapsed.map(|e| Stat::of(&e)),
                evaluations: stat(|r| r.evaluations as f64),
            }
        })
        .collect()
}

fn trial(topo: &Topology, d: &[f64], cfg: &ExperimentConfig, repeat: usize) -> Result<Vec<TrialRow>> {
    let trial_seed = seed::derive(cfg.seed, stream::FAILURES, repeat as u64);
    let greedy_seed = seed::derive(trial_seed, stream::GREEDY, 0);
    let mut rows = Vec::new();
    for case in &cfg.cases {
        let failures = sample_failures(topo, case, trial_seed);
        let base = Instance::new(reliability_matrix(topo, &failures, &cfg.reliability)?, d.to_vec(), cfg.alphas[0])?;
        for &alpha in &cfg.alphas {
            let inst = base.with_alpha(alpha)?;
            for &solver in &cfg.solvers {
                let r = match solver {
                    SolverKind::Exact => solve_exact_with(&inst, &cfg.exact)?,
                    SolverKind::Greedy => solve_double_greedy_with(&inst, greedy_seed, &cfg.greedy)?,
                };
                rows.push(TrialRow::new(topo, repeat, case, trial_seed, &inst, &r, cfg.timings));
            }
        }
    }
    Ok(rows)
}

/// Runs every repeat on a prepared topology (gateways set). Repeats run in
/// parallel; the output does not depend on the thread count.
pub fn run_trials(topo: &Topology, cfg: &ExperimentConfig, heuristic_gateways: bool) -> Result<TrialSet> {
    cfg.validate()?;
    if cfg.solvers.contains(&SolverKind::Exact) && topo.candidates().len() > cfg.exact.limit {
        return Err(Error::TooManyCandidates { count: topo.candidates().len(), limit: cfg.exact.limit });
    }
    let d = gateway_distances(topo)?;
    let work = || -> Result<Vec<TrialRow>> {
        let per_repeat: Vec<Vec<TrialRow>> =
            (0..cfg.repeats).into_par_iter().map(|r| trial(topo, &d, cfg, r)).collect::<Result<_>>()?;
        Ok(per_repeat.into_iter().flatten().collect())
    };
    let rows = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(TrialSet {
        topology: topo.name().to_string(),
        gateways: topo.gateways().iter().map(|&g| topo.node_name(g).to_string()).collect(),
        heuristic_gateways,
        summary: summarize(&rows),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{eval_w, Placement};
    use crate::reliability::reliability_matrix;

    fn line(n: usize) -> Topology {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Topology::from_edges(n, &edges).unwrap()
    }

    fn grid() -> Topology {
        // 2 x 3 grid with unequal lengths
        Topology::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 2.0), (3, 4, 1.5), (4, 5, 1.0), (0, 3, 1.0), (1, 4, 3.0), (2, 5, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn fallback_all_nodes() {
        let t = grid();
        let g = place_gateways_fallback(&t, 6).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(total_latency_to(&t, &g), 0.0);
    }

    #[test]
    fn fallback_one_median_of_a_path() {
        let t = line(4);
        // 3 unit edges: totals are 6, 4, 4, 6; ties go to the smaller id
        let g = place_gateways_fallback(&t, 1).unwrap();
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec![NodeId(1)]);
        let t = line(3);
        assert_eq!(place_gateways_fallback(&t, 1).unwrap().into_iter().collect::<Vec<_>>(), vec![NodeId(1)]);
    }

    #[test]
    fn fallback_two_is_feasible_and_deterministic() {
        let t = grid();
        let a = place_gateways_fallback(&t, 2).unwrap();
        assert_eq!(a, place_gateways_fallback(&t, 2).unwrap());
        let mut best = f64::INFINITY;
        for i in 0..6 {
            for j in i + 1..6 {
                best = best.min(total_latency_to(&t, &[NodeId(i), NodeId(j)].into()));
            }
        }
        assert!(total_latency_to(&t, &a) >= best);
        assert!(place_gateways_fallback(&t, 0).is_err());
        assert!(place_gateways_fallback(&t, 7).is_err());
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig { repeats: 3, seed: 5, ..Default::default() }
    }

    #[test]
    fn rows_are_reproducible_and_ordered() {
        let t = grid().with_gateways([NodeId(2)]).unwrap();
        let mut cfg = small_cfg();
        cfg.alphas = vec![0.1, 1.0];
        let a = run_trials(&t, &cfg, false).unwrap();
        cfg.jobs = Some(1);
        let b = run_trials(&t, &cfg, false).unwrap();
        assert_eq!(a.trials_csv(), b.trials_csv());
        assert_eq!(a.rows.len(), 3 * 2 * 2);
        let order: Vec<_> = a.rows.iter().map(|r| (r.repeat, r.alpha, r.solver)).collect();
        let mut sorted = order.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(order, sorted);
        assert!(a.rows.iter().all(|r| r.elapsed.is_none()));
        assert!(a.trials_csv().lines().nth(1).unwrap().contains(",NA,"));
    }

    #[test]
    fn rows_reevaluate_and_validate() {
        let t = grid().with_gateways([NodeId(0), NodeId(5)]).unwrap();
        let mut cfg = small_cfg();
        cfg.cases = FailureCase::all().to_vec();
        let set = run_trials(&t, &cfg, false).unwrap();
        let d = gateway_distances(&t).unwrap();
        for row in &set.rows {
            let case = parse_case(&row.case).unwrap();
            let f = sample_failures(&t, &case, row.seed);
            let inst = Instance::new(reliability_matrix(&t, &f, &cfg.reliability).unwrap(), d.clone(), row.alpha).unwrap();
            let ids: BTreeSet<NodeId> = row.placed.iter().map(|n| t.node_by_name(n).unwrap()).collect();
            let idx = inst.indices_of(&ids).unwrap();
            Placement::from_indices(&inst, &idx).unwrap().validate(&inst).unwrap();
            let w = eval_w(&inst, &idx);
            assert!((w - row.w).abs() <= 1e-9 * w.abs().max(1.0));
            assert!((0.0..=1.0).contains(&row.avg_reliability));
            assert!(row.n_controllers >= 1);
        }
    }

    #[test]
    fn summary_means_are_row_means() {
        let t = grid().with_gateways([NodeId(3)]).unwrap();
        let set = run_trials(&t, &small_cfg(), false).unwrap();
        for s in &set.summary {
            let g: Vec<_> = set.rows.iter().filter(|r| r.solver == s.solver).collect();
            let mean = g.iter().map(|r| r.w).sum::<f64>() / g.len() as f64;
            assert_eq!(s.w.mean, mean);
            assert_eq!(s.trials, 3);
        }
    }

    #[test]
    fn failure_free_case_has_no_error_and_one_exact_controller() {
        let t = grid().with_gateways([NodeId(4)]).unwrap();
        // shift every d_k away from zero by making no candidate a gateway
        let t = t.with_candidates([NodeId(0), NodeId(1), NodeId(2), NodeId(3), NodeId(5)]).unwrap();
        let mut cfg = small_cfg();
        cfg.cases = vec![FailureCase::failure_free()];
        let set = run_trials(&t, &cfg, false).unwrap();
        let d = gateway_distances(&t).unwrap();
        let argmin = (0..d.len()).min_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap()).unwrap();
        let argmin_name = t.node_name(*t.candidates().iter().nth(argmin).unwrap()).to_string();
        for r in &set.rows {
            assert_eq!(r.wr, 0.0);
            if r.solver == SolverKind::Exact {
                assert_eq!(r.placed, vec![argmin_name.clone()]);
            }
        }
    }

    #[test]
    fn failure_draws_are_shared_across_cases() {
        let t = grid().with_gateways([NodeId(1)]).unwrap();
        let s = 99;
        let f1 = sample_failures(&t, &FailureCase::builtin(1).unwrap(), s);
        let f4 = sample_failures(&t, &FailureCase::builtin(4).unwrap(), s);
        for (a, b) in f1.node_probs().iter().zip(f4.node_probs()) {
            assert!((a / 0.05 - b / 0.08).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_limit_is_checked_up_front() {
        let t = grid().with_gateways([NodeId(0)]).unwrap();
        let mut cfg = small_cfg();
        cfg.exact.limit = 3;
        assert!(matches!(run_trials(&t, &cfg, false), Err(Error::TooManyCandidates { count: 6, limit: 3 })));
    }

    #[test]
    fn stat_basics() {
        assert_eq!(Stat::of(&[2.0]), Stat { mean: 2.0, std: 0.0 });
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
