use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sdnplace::experiments::{
    alpha_sweep, compare_solvers, parse_case, run_trials, sweep_table, write_outputs, ExperimentConfig, GatewaySpec,
};
use sdnplace::montecarlo::simulate_placement;
use sdnplace::seed::{self, stream};
use sdnplace::solvers::{solve_double_greedy_with, solve_exact_with, SolveResult, SolverKind};
use sdnplace::topology::{load_graphml_file, sample_failures, GraphmlOptions};
use sdnplace::{FailureAssignment, Instance, Topology};

use crate::args::{Cli, Command, ExperimentArgs, InspectArgs, ModelArgs, SimulateArgs, SolveArgs, TopologyArgs};

/// Usage problems exit with 1, everything else with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<sdnplace::Error> for CliError {
    fn from(e: sdnplace::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Inspect(a) => inspect(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Experiment(a) => experiment(a, Kind::Trials, out),
        Command::Sweep(a) => experiment(a, Kind::Sweep, out),
        Command::Compare(a) => experiment(a, Kind::Compare, out),
    }
}

fn set(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    cfg.set(key, value, Path::new("")).map_err(|e| usage(format!("--{}: {e}", key.replace('_', "-"))))
}

fn apply_topology(cfg: &mut ExperimentConfig, t: &TopologyArgs) -> Result<()> {
    if let Some(p) = &t.topology {
        cfg.topology = Some(p.clone());
    }
    if let Some(m) = &t.missing_coordinates {
        set(cfg, "missing_coordinates", m)?;
    }
    if let Some(g) = &t.gateways {
        if Path::new(g).is_file() {
            cfg.gateways = GatewaySpec::File(PathBuf::from(g));
        } else {
            set(cfg, "gateways", g)?;
        }
    }
    if let Some(n) = t.gateway_count {
        set(cfg, "gateway_count", &n.to_string())?;
    }
    if let Some(c) = &t.candidates {
        set(cfg, "candidates", c)?;
    }
    Ok(())
}

fn apply_model(cfg: &mut ExperimentConfig, m: &ModelArgs) -> Result<()> {
    if let Some(mode) = &m.mode {
        set(cfg, "mode", mode)?;
    }
    if let Some(k) = m.k {
        set(cfg, "mode", &format!("yen-k:{k}"))?;
    }
    if let Some(c) = &m.counting {
        set(cfg, "counting", c)?;
    }
    if m.satellite_hop {
        cfg.reliability.satellite_hop = true;
    }
    if let Some(r) = &m.greedy_rule {
        set(cfg, "greedy_rule", r)?;
    }
    if let Some(l) = m.exact_limit {
        cfg.exact.limit = l;
    }
    if m.no_prune {
        cfg.exact.prune = false;
    }
    Ok(())
}

fn inspect(a: InspectArgs, out: &mut impl Write) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    apply_topology(&mut cfg, &a.topo)?;
    let path = cfg.topology.clone().ok_or_else(|| usage("inspect needs --topology"))?;
    let opts = GraphmlOptions { missing: cfg.missing_coordinates, name: None };
    let mut topo = load_graphml_file(&path, &opts)?;
    if a.topo.gateways.is_some() || a.topo.gateway_count.is_some() || a.topo.candidates.is_some() {
        topo = cfg.prepare(topo)?;
    }
    let total_km: f64 = topo.edges().iter().map(|e| e.length_km).sum();
    let names = |set: &std::collections::BTreeSet<sdnplace::NodeId>| {
        set.iter().map(|&g| topo.node_name(g)).collect::<Vec<_>>().join(";")
    };
    if a.pretty {
        writeln!(out, "{}: {} nodes, {} links", topo.name(), topo.node_count(), topo.edge_count())?;
        writeln!(out, "total link length: {total_km:.1} km")?;
        writeln!(out, "candidates: {}", topo.candidates().len())?;
        if !topo.gateways().is_empty() {
            writeln!(out, "gateways: {}", names(topo.gateways()))?;
        }
    } else {
        writeln!(out, "topology,nodes,links,candidates,gateways,total_length_km")?;
        write!(
            out,
            "{}",
            sdnplace::format::csv_record([
                topo.name().to_string(),
                topo.node_count().to_string(),
                topo.edge_count().to_string(),
                topo.candidates().len().to_string(),
                names(topo.gateways()),
                sdnplace::format::sig12(total_km),
            ])
        )?;
    }
    Ok(())
}

struct Solved {
    topo: Option<Topology>,
    failures: Option<FailureAssignment>,
    inst: Instance,
    result: SolveResult,
    cfg: ExperimentConfig,
}

fn solve_common(a: &SolveArgs) -> Result<Solved> {
    let mut cfg = ExperimentConfig::default();
    apply_topology(&mut cfg, &a.topo)?;
    apply_model(&mut cfg, &a.model)?;
    let solver: SolverKind = a.solver.parse().map_err(|e| usage(format!("--solver: {e}")))?;
    if !(a.alpha.is_finite() && a.alpha > 0.0) {
        return Err(usage("--alpha must be positive"));
    }
    // Same seeds as repeat 0 of an experiment with this master seed.
    let trial_seed = seed::derive(a.seed, stream::FAILURES, 0);
    let greedy_seed = seed::derive(trial_seed, stream::GREEDY, 0);

    let (topo, failures, inst) = match &a.instance {
        Some(dir) => {
            let inst = Instance::read_bundle(dir).with_context(|| format!("reading instance bundle {}", dir.display()))?;
            (None, None, inst.with_alpha(a.alpha)?)
        }
        None => {
            if cfg.topology.is_none() {
                return Err(usage("solve needs --topology or --instance"));
            }
            let case = parse_case(&a.case).map_err(|e| usage(format!("--case: {e}")))?;
            let topo = cfg.load_topology()?;
            let failures = sample_failures(&topo, &case, trial_seed);
            let inst = Instance::from_topology(&topo, &failures, &cfg.reliability, a.alpha)?;
            (Some(topo), Some(failures), inst)
        }
    };
    let result = match solver {
        SolverKind::Exact => solve_exact_with(&inst, &cfg.exact)?,
        SolverKind::Greedy => solve_double_greedy_with(&inst, greedy_seed, &cfg.greedy)?,
    };
    Ok(Solved { topo, failures, inst, result, cfg })
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    log::info!("wrote {}", p.display());
    Ok(())
}

fn result_csv(s: &Solved, timings: bool) -> String {
    format!("{}\n{}", SolveResult::CSV_HEADER, s.result.csv_row(&s.inst, timings))
}

fn save_solved(dir: &Path, s: &Solved, timings: bool) -> Result<()> {
    write_file(dir, "result.csv", &result_csv(s, timings))?;
    if let (Some(topo), Some(f)) = (&s.topo, &s.failures) {
        write_file(dir, "failures.csv", &f.to_csv(topo))?;
        write_file(dir, "error_matrix.csv", &s.inst.error().to_csv())?;
        s.inst.write_bundle(&dir.join("instance"))?;
    }
    Ok(())
}

fn solve(a: SolveArgs, out: &mut impl Write) -> Result<()> {
    let s = solve_common(&a)?;
    if let Some(dir) = &a.out {
        save_solved(dir, &s, a.timings)?;
    }
    if a.pretty {
        let names = s.inst.error().node_names();
        let placed: Vec<&str> = s.result.placement.placed.iter().map(|k| names[k.0].as_str()).collect();
        writeln!(out, "solver:      {}", s.result.solver)?;
        writeln!(out, "controllers: {} ({})", placed.len(), placed.join(", "))?;
        writeln!(out, "W = {:.6}  (W^c = {:.3} km, W^r = {:.6})", s.result.w, s.result.wc + 0.0, s.result.wr)?;
        writeln!(out, "avg control-path reliability: {:.6}", 1.0 - s.result.wr / s.inst.n_nodes() as f64)?;
        writeln!(out, "objective evaluations: {}", s.result.evaluations)?;
    } else {
        write!(out, "{}", result_csv(&s, a.timings))?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut impl Write) -> Result<()> {
    if a.solve.instance.is_some() {
        return Err(usage("simulate needs --topology; instance bundles carry no failure probabilities"));
    }
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let s = solve_common(&a.solve)?;
    let (topo, failures) = (s.topo.as_ref().expect("topology"), s.failures.as_ref().expect("failures"));
    let sim = simulate_placement(
        topo,
        &s.inst,
        &s.result.placement,
        failures,
        &s.cfg.reliability,
        a.samples,
        seed::derive(a.solve.seed, stream::SIMULATION, 0),
    )?;
    let csv = sim.to_csv(topo);
    if let Some(dir) = &a.solve.out {
        save_solved(dir, &s, a.solve.timings)?;
        write_file(dir, "simulation.csv", &csv)?;
    }
    if a.solve.pretty {
        let agg = &sim.aggregate;
        let worst = sim
            .per_node
            .iter()
            .filter(|n| n.report.std_error > 0.0)
            .map(|n| n.report.z_score().abs())
            .fold(0.0, f64::max);
        writeln!(out, "samples per path: {}", a.samples)?;
        writeln!(out, "mean error rate: simulated {:.6} +/- {:.6}, analytic {:.6}", agg.estimated_error, agg.std_error, agg.analytic_error)?;
        writeln!(out, "largest per-path deviation: {worst:.2} standard errors")?;
    } else {
        write!(out, "{csv}")?;
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Trials,
    Sweep,
    Compare,
}

fn experiment(a: ExperimentArgs, kind: Kind, out: &mut impl Write) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    apply_topology(&mut cfg, &a.topo)?;
    apply_model(&mut cfg, &a.model)?;
    for (key, value) in [("cases", &a.case), ("alphas", &a.alpha), ("solvers", &a.solver)] {
        if let Some(v) = value {
            set(&mut cfg, key, v)?;
        }
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(o) = &a.out {
        cfg.out = Some(o.clone());
    }
    cfg.dat |= a.dat;
    cfg.timings |= a.timings;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.topology.is_none() {
        return Err(usage("no topology: pass --topology or set it in --config"));
    }
    if kind == Kind::Sweep && cfg.alphas.len() < 2 {
        return Err(usage("sweep needs at least two --alpha values"));
    }

    let topo = cfg.load_topology()?;
    let heuristic = matches!(cfg.gateways, GatewaySpec::Heuristic(_));
    if heuristic {
        log::info!("gateways from the k-median fallback");
    }
    let (set, sweep, gaps) = match kind {
        Kind::Trials => (run_trials(&topo, &cfg, heuristic)?, None, None),
        Kind::Sweep => {
            let (set, table) = alpha_sweep(&topo, &cfg, heuristic)?;
            (set, Some(table), None)
        }
        Kind::Compare => {
            let (set, table) = compare_solvers(&topo, &cfg, heuristic)?;
            (set, None, Some(table))
        }
    };
    if let Some(dir) = &cfg.out {
        let sweep = sweep.clone().or_else(|| (cfg.alphas.len() > 1).then(|| sweep_table(&set)));
        for p in write_outputs(dir, &cfg, &set, sweep.as_deref(), gaps.as_deref())? {
            log::info!("wrote {}", p.display());
        }
    }

    if a.pretty {
        pretty_summary(out, &set)?;
        if let Some(g) = &gaps {
            writeln!(out)?;
            for r in g {
                writeln!(
                    out,
                    "case {:>4}  alpha {:<8}  objective gap {:>7.3}%  W~ gap {:>7.3}%  reliability gap {:>6.3} pp",
                    r.case,
                    r.alpha,
                    100.0 * r.objective_gap,
                    100.0 * r.w_tilde_gap,
                    100.0 * r.reliability_gap
                )?;
            }
        }
        return Ok(());
    }
    match (kind, &sweep, &gaps) {
        (Kind::Sweep, Some(rows), _) => {
            writeln!(out, "{}", sdnplace::experiments::SweepRow::CSV_HEADER)?;
            rows.iter().try_for_each(|r| write!(out, "{}", r.csv_row()))?;
        }
        (Kind::Compare, _, Some(rows)) => {
            writeln!(out, "{}", sdnplace::experiments::GapRow::CSV_HEADER)?;
            rows.iter().try_for_each(|r| write!(out, "{}", r.csv_row()))?;
        }
        _ => write!(out, "{}", set.summary_csv())?,
    }
    Ok(())
}

fn pretty_summary(out: &mut impl Write, set: &sdnplace::experiments::TrialSet) -> Result<()> {
    writeln!(
        out,
        "{} ({} gateways{}: {})",
        set.topology,
        set.gateways.len(),
        if set.heuristic_gateways { ", k-median fallback" } else { "" },
        set.gateways.join(", ")
    )?;
    writeln!(
        out,
        "{:>5} {:>8} {:>7} {:>7} {:>12} {:>12} {:>10} {:>10}",
        "case", "alpha", "solver", "ctrls", "W", "W^c (km)", "W^r", "avg rel"
    )?;
    for r in &set.summary {
        writeln!(
            out,
            "{:>5} {:>8} {:>7} {:>7.2} {:>12.4} {:>12.2} {:>10.5} {:>10.6}",
            r.case,
            r.alpha,
            r.solver.to_string(),
            r.n_controllers.mean,
            r.w.mean,
            r.wc.mean + 0.0,
            r.wr.mean,
            r.avg_reliability.mean
        )?;
    }
    Ok(())
}
