use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{run_trials, ExperimentConfig, SummaryRow, TrialSet};
use crate::error::{Error, Result};
use crate::format::{csv_record, sig12};
use crate::solvers::SolverKind;
use crate::topology::Topology;

/// Means for one (case, solver, alpha) cell of an alpha sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub case: String,
    pub solver: SolverKind,
    pub alpha: f64,
    pub n_controllers: f64,
    pub wc: f64,
    pub wr: f64,
    pub d_avg: f64,
    pub avg_reliability: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "case,solver,alpha,n_controllers_mean,wc_mean,wr_mean,d_avg_mean,avg_reliability_mean";

    pub fn csv_row(&self) -> String {
        csv_record([
            self.case.clone(),
            self.solver.to_string(),
            sig12(self.alpha),
            sig12(self.n_controllers),
            sig12(self.wc),
            sig12(self.wr),
            sig12(self.d_avg),
            sig12(self.avg_reliability),
        ])
    }
}

/// Exact versus greedy on one (case, alpha) cell. Gaps are computed on the
/// means over repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub case: String,
    pub alpha: f64,
    pub w_exact: f64,
    pub w_greedy: f64,
    /// `(W_greedy - W_exact) / W_exact`.
    pub objective_gap: f64,
    pub w_tilde_exact: f64,
    pub w_tilde_greedy: f64,
    /// `(W~_exact - W~_greedy) / W~_exact`.
    pub w_tilde_gap: f64,
    pub reliability_exact: f64,
    pub reliability_greedy: f64,
    /// Exact minus greedy average control-path reliability.
    pub reliability_gap: f64,
    pub elapsed_exact: Option<f64>,
    pub elapsed_greedy: Option<f64>,
    pub evaluations_exact: f64,
    pub evaluations_greedy: f64,
}

impl GapRow {
    pub const CSV_HEADER: &'static str = "case,alpha,w_exact,w_greedy,objective_gap,w_tilde_exact,w_tilde_greedy,\
w_tilde_gap,reliability_exact,reliability_greedy,reliability_gap,elapsed_exact,elapsed_greedy,\
evaluations_exact,evaluations_greedy";

    pub fn csv_row(&self) -> String {
        let t = |e: Option<f64>| e.map_or("NA".into(), |e| format!("{e:.6}"));
        csv_record([
            self.case.clone(),
            sig12(self.alpha),
            sig12(self.w_exact),
            sig12(self.w_greedy),
            sig12(self.objective_gap),
            sig12(self.w_tilde_exact),
            sig12(self.w_tilde_greedy),
            sig12(self.w_tilde_gap),
            sig12(self.reliability_exact),
            sig12(self.reliability_greedy),
            sig12(self.reliability_gap),
            t(self.elapsed_exact),
            t(self.elapsed_greedy),
            sig12(self.evaluations_exact),
            sig12(self.evaluations_greedy),
        ])
    }
}

/// Relative difference that treats 0/0 as no gap.
fn relative(diff: f64, base: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / base
    }
}

/// Sweep table from a trial set, sorted by case, solver and alpha.
pub fn sweep_table(set: &TrialSet) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = set
        .summary
        .iter()
        .map(|s| SweepRow {
            case: s.case.clone(),
            solver: s.solver,
            alpha: s.alpha,
            n_controllers: s.n_controllers.mean,
            wc: s.wc.mean,
            wr: s.wr.mean,
            d_avg: s.d_avg.mean,
            avg_reliability: s.avg_reliability.mean,
        })
        .collect();
    let case_pos = |c: &str| set.summary.iter().position(|s| s.case == c);
    rows.sort_by(|a, b| {
        (case_pos(&a.case), a.solver)
            .cmp(&(case_pos(&b.case), b.solver))
            .then(a.alpha.total_cmp(&b.alpha))
    });
    rows
}

/// Gap table from a trial set holding both solvers.
pub fn gap_table(set: &TrialSet) -> Result<Vec<GapRow>> {
    let mut out = Vec::new();
    for ex in set.summary.iter().filter(|s| s.solver == SolverKind::Exact) {
        let gr = set
            .find(&ex.case, ex.alpha, SolverKind::Greedy)
            .ok_or_else(|| Error::Config("comparison needs both the exact and the greedy solver".into()))?;
        out.push(gap_row(ex, gr));
    }
    if out.is_empty() {
        return Err(Error::Config("comparison needs both the exact and the greedy solver".into()));
    }
    Ok(out)
}

fn gap_row(ex: &SummaryRow, gr: &SummaryRow) -> GapRow {
    GapRow {
        case: ex.case.clone(),
        alpha: ex.alpha,
        w_exact: ex.w.mean,
        w_greedy: gr.w.mean,
        objective_gap: relative(gr.w.mean - ex.w.mean, ex.w.mean),
        w_tilde_exact: ex.w_tilde.mean,
        w_tilde_greedy: gr.w_tilde.mean,
        w_tilde_gap: relative(ex.w_tilde.mean - gr.w_tilde.mean, ex.w_tilde.mean),
        reliability_exact: ex.avg_reliability.mean,
        reliability_greedy: gr.avg_reliability.mean,
        reliability_gap: ex.avg_reliability.mean - gr.avg_reliability.mean,
        elapsed_exact: ex.elapsed.map(|e| e.mean),
        elapsed_greedy: gr.elapsed.map(|e| e.mean),
        evaluations_exact: ex.evaluations.mean,
        evaluations_greedy: gr.evaluations.mean,
    }
}

/// Runs the trials for an alpha list; every alpha of a repeat sees the same
/// failure draw.
pub fn alpha_sweep(topo: &Topology, cfg: &ExperimentConfig, heuristic: bool) -> Result<(TrialSet, Vec<SweepRow>)> {
    if cfg.alphas.len() < 2 {
        return Err(Error::Config("an alpha sweep needs at least two alpha values".into()));
    }
    if !cfg.solvers.contains(&SolverKind::Exact) {
        return Err(Error::Config("an alpha sweep needs the exact solver".into()));
    }
    let set = run_trials(topo, cfg, heuristic)?;
    let table = sweep_table(&set);
    Ok((set, table))
}

/// Runs both solvers and tabulates their gaps.
pub fn compare_solvers(topo: &Topology, cfg: &ExperimentConfig, heuristic: bool) -> Result<(TrialSet, Vec<GapRow>)> {
    let mut cfg = cfg.clone();
    cfg.solvers = vec![SolverKind::Exact, SolverKind::Greedy];
    let set = run_trials(topo, &cfg, heuristic)?;
    let table = gap_table(&set)?;
    Ok((set, table))
}

fn dat_files(set: &TrialSet) -> Vec<(&'static str, String)> {
    let mut files = Vec::new();
    let cases: Vec<&str> = {
        let mut c: Vec<&str> = Vec::new();
        for s in &set.summary {
            if !c.contains(&s.case.as_str()) {
                c.push(&s.case);
            }
        }
        c
    };
    let first_alpha = set.summary.first().map(|s| s.alpha);

    // alpha trade-off for the exact solver
    let sweep: Vec<SweepRow> = sweep_table(set).into_iter().filter(|r| r.solver == SolverKind::Exact).collect();
    if !sweep.is_empty() {
        let mut s = String::from("# case alpha n_controllers wc wr d_avg avg_reliability\n");
        for r in &sweep {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {}",
                r.case,
                sig12(r.alpha),
                sig12(r.n_controllers),
                sig12(r.wc),
                sig12(r.wr),
                sig12(r.d_avg),
                sig12(r.avg_reliability)
            );
        }
        files.push(("alpha_tradeoff.dat", s));
    }

    if let Ok(gaps) = gap_table(set) {
        let mut obj = String::from("# case alpha w_exact w_greedy objective_gap w_tilde_gap\n");
        let mut rel = String::from("# case alpha reliability_exact reliability_greedy reliability_gap\n");
        for g in &gaps {
            let _ = writeln!(
                obj,
                "{} {} {} {} {} {}",
                g.case,
                sig12(g.alpha),
                sig12(g.w_exact),
                sig12(g.w_greedy),
                sig12(g.objective_gap),
                sig12(g.w_tilde_gap)
            );
            let _ = writeln!(
                rel,
                "{} {} {} {} {}",
                g.case,
                sig12(g.alpha),
                sig12(g.reliability_exact),
                sig12(g.reliability_greedy),
                sig12(g.reliability_gap)
            );
        }
        files.push(("solver_comparison.dat", obj));
        files.push(("reliability_comparison.dat", rel));
    }

    // reliability per failure case at the first alpha, one column per solver
    let solvers: Vec<SolverKind> = [SolverKind::Exact, SolverKind::Greedy]
        .into_iter()
        .filter(|k| set.summary.iter().any(|s| s.solver == *k))
        .collect();
    if let Some(alpha) = first_alpha {
        let mut s = format!(
            "# case {}\n",
            solvers.iter().map(|k| format!("{k}_reliability {k}_std")).collect::<Vec<_>>().join(" ")
        );
        for c in &cases {
            let mut line = c.to_string();
            for &k in &solvers {
                match set.find(c, alpha, k) {
                    Some(r) => {
                        let _ = write!(line, " {} {}", sig12(r.avg_reliability.mean), sig12(r.avg_reliability.std));
                    }
                    None => line.push_str(" NaN NaN"),
                }
            }
            let _ = writeln!(s, "{line}");
        }
        files.push(("reliability_by_case.dat", s));
    }
    files
}

/// Writes `trials.csv`, `summary.csv`, `run.txt`, any extra tables and, with
/// `cfg.dat`, the gnuplot tables. Returns the written paths.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    set: &TrialSet,
    sweep: Option<&[SweepRow]>,
    gaps: Option<&[GapRow]>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        written.push(p);
        Ok(())
    };
    write("trials.csv", set.trials_csv())?;
    write("summary.csv", set.summary_csv())?;
    if let Some(rows) = sweep {
        let mut s = format!("{}\n", SweepRow::CSV_HEADER);
        rows.iter().for_each(|r| s.push_str(&r.csv_row()));
        write("sweep.csv", s)?;
    }
    if let Some(rows) = gaps {
        let mut s = format!("{}\n", GapRow::CSV_HEADER);
        rows.iter().for_each(|r| s.push_str(&r.csv_row()));
        write("compare.csv", s)?;
    }
    let mut manifest = cfg.to_text();
    let _ = writeln!(manifest, "# topology name: {}", set.topology);
    let _ = writeln!(
        manifest,
        "# gateways ({}): {}",
        if set.heuristic_gateways { "k-median fallback, not supplied" } else { "supplied" },
        set.gateways.join(",")
    );
    write("run.txt", manifest)?;
    if cfg.dat {
        for (name, body) in dat_files(set) {
            write(name, body)?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{FailureCase, NodeId};

    fn grid() -> Topology {
        Topology::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 2.0), (3, 4, 1.5), (4, 5, 1.0), (0, 3, 1.0), (1, 4, 3.0), (2, 5, 1.0)],
        )
        .unwrap()
        .with_gateways([NodeId(2)])
        .unwrap()
    }

    #[test]
    fn sweep_sorted_by_alpha_and_monotone() {
        let cfg = ExperimentConfig { repeats: 4, alphas: vec![10.0, 0.1, 1.0], solvers: vec![SolverKind::Exact], ..Default::default() };
        let (_, table) = alpha_sweep(&grid(), &cfg, false).unwrap();
        let alphas: Vec<f64> = table.iter().map(|r| r.alpha).collect();
        assert_eq!(alphas, vec![0.1, 1.0, 10.0]);
        for w in table.windows(2) {
            assert!(w[1].wc <= w[0].wc + 1e-12);
            assert!(w[1].wr >= w[0].wr - 1e-12);
        }
        let one = ExperimentConfig { alphas: vec![1.0], ..cfg.clone() };
        assert!(alpha_sweep(&grid(), &one, false).is_err());
        let greedy_only = ExperimentConfig { solvers: vec![SolverKind::Greedy], ..cfg };
        assert!(alpha_sweep(&grid(), &greedy_only, false).is_err());
    }

    #[test]
    fn gaps_are_nonnegative() {
        let cfg = ExperimentConfig { repeats: 5, cases: FailureCase::all().to_vec(), ..Default::default() };
        let (_, gaps) = compare_solvers(&grid(), &cfg, false).unwrap();
        assert_eq!(gaps.len(), 4);
        for g in &gaps {
            assert!(g.objective_gap >= 0.0);
            assert!(g.w_tilde_gap >= 0.0);
        }
    }

    #[test]
    fn obvious_instance_has_zero_gap() {
        // Without failures only the gateway node has d = 0; at alpha = 10
        // every other candidate costs more than all of W^r can save.
        let t = grid();
        let cfg = ExperimentConfig {
            repeats: 3,
            alphas: vec![10.0],
            cases: vec![FailureCase::failure_free()],
            ..Default::default()
        };
        let (_, gaps) = compare_solvers(&t, &cfg, false).unwrap();
        assert_eq!(gaps[0].objective_gap, 0.0);
        assert_eq!(gaps[0].reliability_gap, 0.0);
    }

    #[test]
    fn outputs_are_written() {
        let dir = std::env::temp_dir().join(format!("sdnplace-tables-{}", std::process::id()));
        let cfg = ExperimentConfig { repeats: 2, alphas: vec![0.5, 2.0], dat: true, ..Default::default() };
        let (set, gaps) = compare_solvers(&grid(), &cfg, true).unwrap();
        let sweep = sweep_table(&set);
        let files = write_outputs(&dir, &cfg, &set, Some(&sweep), Some(&gaps)).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        for n in [
            "trials.csv",
            "summary.csv",
            "sweep.csv",
            "compare.csv",
            "run.txt",
            "alpha_tradeoff.dat",
            "solver_comparison.dat",
            "reliability_comparison.dat",
            "reliability_by_case.dat",
        ] {
            assert!(names.iter().any(|x| x == n), "{n} missing");
        }
        let run = fs::read_to_string(dir.join("run.txt")).unwrap();
        assert!(run.contains("k-median fallback"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
