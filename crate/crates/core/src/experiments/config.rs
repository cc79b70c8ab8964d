use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::exact;
use crate::reliability::{NodeCounting, ReliabilityOptions};
use crate::solvers::{ExactOptions, GreedyOptions, GreedyRule, SolverKind};
use crate::topology::{load_graphml_file, FailureCase, GraphmlOptions, MissingCoordinates, Topology};

use super::place_gateways_fallback;

/// Where gateways come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GatewaySpec {
    /// Node names.
    Names(Vec<String>),
    /// A node list file (one name per line or comma separated).
    File(PathBuf),
    /// The k-median fallback with this many gateways.
    Heuristic(usize),
}

impl Default for GatewaySpec {
    fn default() -> Self {
        GatewaySpec::Heuristic(5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: Option<PathBuf>,
    pub missing_coordinates: MissingCoordinates,
    pub gateways: GatewaySpec,
    /// Candidate names; every node when `None`.
    pub candidates: Option<Vec<String>>,
    pub cases: Vec<FailureCase>,
    pub alphas: Vec<f64>,
    pub reliability: ReliabilityOptions,
    pub solvers: Vec<SolverKind>,
    pub greedy: GreedyOptions,
    pub exact: ExactOptions,
    pub repeats: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record wall-clock times (makes output run-dependent).
    pub timings: bool,
    /// Also write gnuplot `.dat` tables.
    pub dat: bool,
    /// Worker threads; rayon's default when `None`.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: None,
            missing_coordinates: MissingCoordinates::default(),
            gateways: GatewaySpec::default(),
            candidates: None,
            cases: vec![FailureCase::builtin(1).expect("built-in")],
            alphas: vec![1.0],
            reliability: ReliabilityOptions::default(),
            solvers: vec![SolverKind::Exact, SolverKind::Greedy],
            greedy: GreedyOptions::default(),
            exact: ExactOptions::default(),
            repeats: 100,
            seed: 1,
            out: None,
            timings: false,
            dat: false,
            jobs: None,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, found `{value}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

/// `1`..`4` or `none` (failure free).
pub fn parse_case(token: &str) -> Result<FailureCase> {
    match token.trim() {
        "none" => Ok(FailureCase::failure_free()),
        t => {
            let id: u8 = t.parse().map_err(|_| Error::Config(format!("unknown failure case `{t}`")))?;
            FailureCase::builtin(id).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i as u32 + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim(), base).map_err(|e| Error::Parse {
                line: i as u32 + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { line, message } => {
                Error::Config(format!("{}:{line}: {message}", path.display()))
            }
            e => e,
        })
    }

    /// Applies one setting; used by the file parser and for overrides.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        match key {
            "topology" => self.topology = Some(resolve(base, value)),
            "missing_coordinates" => {
                self.missing_coordinates = match value {
                    "reject" => MissingCoordinates::Reject,
                    "drop" => MissingCoordinates::Drop,
                    "impute" => MissingCoordinates::Impute,
                    _ => return Err(Error::Config(format!("{key}: expected reject, drop or impute"))),
                }
            }
            "gateways" => self.gateways = GatewaySpec::Names(list(value).map(String::from).collect()),
            "gateways_file" => self.gateways = GatewaySpec::File(resolve(base, value)),
            "gateway_count" => self.gateways = GatewaySpec::Heuristic(parse_num(key, value)?),
            "candidates" => self.candidates = Some(list(value).map(String::from).collect()),
            "case" | "cases" => self.cases = list(value).map(parse_case).collect::<Result<_>>()?,
            "alpha" | "alphas" => self.alphas = list(value).map(|v| parse_num(key, v)).collect::<Result<_>>()?,
            "mode" => self.reliability.mode = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "counting" => {
                self.reliability.counting = match value {
                    "intermediate" => NodeCounting::IntermediateOnly,
                    "all" => NodeCounting::AllNodes,
                    _ => return Err(Error::Config(format!("{key}: expected intermediate or all"))),
                }
            }
            "satellite_hop" => self.reliability.satellite_hop = parse_bool(key, value)?,
            "solvers" | "solver" => {
                self.solvers = list(value)
                    .map(|s| s.parse().map_err(|e: Error| Error::Config(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "greedy_rule" => {
                self.greedy.rule = match value {
                    "standard" => GreedyRule::Standard,
                    "inverted-losses" => GreedyRule::InvertedLosses,
                    _ => return Err(Error::Config(format!("{key}: expected standard or inverted-losses"))),
                }
            }
            "exact_limit" => self.exact.limit = parse_num(key, value)?,
            "prune" => self.exact.prune = parse_bool(key, value)?,
            "repeats" => self.repeats = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = Some(resolve(base, value)),
            "timings" => self.timings = parse_bool(key, value)?,
            "dat" => self.dat = parse_bool(key, value)?,
            "jobs" => self.jobs = Some(parse_num(key, value)?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Config("alpha values must be positive and finite".into()));
        }
        if self.cases.is_empty() {
            return Err(Error::Config("no failure case given".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solver given".into()));
        }
        if self.gateways == GatewaySpec::Heuristic(0) {
            return Err(Error::Config("gateway_count must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Loads the configured topology and applies gateways and candidates.
    pub fn load_topology(&self) -> Result<Topology> {
        let path = self.topology.as_ref().ok_or_else(|| Error::Config("no topology given".into()))?;
        let opts = GraphmlOptions { missing: self.missing_coordinates, name: None };
        self.prepare(load_graphml_file(path, &opts)?)
    }

    /// Applies gateways and candidates to a loaded topology.
    pub fn prepare(&self, topo: Topology) -> Result<Topology> {
        let gateways = match &self.gateways {
            GatewaySpec::Names(names) => topo.parse_node_list(&names.join("\n"))?,
            GatewaySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                topo.parse_node_list(&text)?
            }
            GatewaySpec::Heuristic(count) => place_gateways_fallback(&topo, *count)?.into_iter().collect(),
        };
        let topo = topo.with_gateways(gateways)?;
        match &self.candidates {
            Some(names) => {
                let ids = topo.parse_node_list(&names.join("\n"))?;
                topo.with_candidates(ids)
            }
            None => Ok(topo),
        }
    }

    /// Canonical `key = value` rendering, written next to the results.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(t) = &self.topology {
            kv("topology", t.display().to_string());
        }
        kv(
            "missing_coordinates",
            match self.missing_coordinates {
                MissingCoordinates::Reject => "reject",
                MissingCoordinates::Drop => "drop",
                MissingCoordinates::Impute => "impute",
            }
            .into(),
        );
        match &self.gateways {
            GatewaySpec::Names(n) => kv("gateways", n.join(",")),
            GatewaySpec::File(p) => kv("gateways_file", p.display().to_string()),
            GatewaySpec::Heuristic(c) => kv("gateway_count", c.to_string()),
        }
        if let Some(c) = &self.candidates {
            kv("candidates", c.join(","));
        }
        kv("cases", self.cases.iter().map(|c| c.label()).collect::<Vec<_>>().join(","));
        kv("alphas", self.alphas.iter().map(|a| exact(*a)).collect::<Vec<_>>().join(","));
        kv("mode", self.reliability.mode.to_string());
        kv(
            "counting",
            match self.reliability.counting {
                NodeCounting::IntermediateOnly => "intermediate",
                NodeCounting::AllNodes => "all",
            }
            .into(),
        );
        kv("satellite_hop", self.reliability.satellite_hop.to_string());
        kv("solvers", self.solvers.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
        kv(
            "greedy_rule",
            match self.greedy.rule {
                GreedyRule::Standard => "standard",
                GreedyRule::InvertedLosses => "inverted-losses",
            }
            .into(),
        );
        kv("exact_limit", self.exact.limit.to_string());
        kv("prune", self.exact.prune.to_string());
        kv("repeats", self.repeats.to_string());
        kv("seed", self.seed.to_string());
        kv("timings", self.timings.to_string());
        s
    }
}
