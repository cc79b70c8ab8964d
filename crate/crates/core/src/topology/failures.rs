use std::collections::BTreeMap;

use rand::Rng as _;

use super::{NodeId, Topology};
use crate::error::{Error, Result};
use crate::format::{csv_record, sig12};
use crate::seed;

/// Closed probability interval `[lo, hi]` within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbRange {
    pub lo: f64,
    pub hi: f64,
}

impl ProbRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::domain(format!("invalid probability interval [{lo}, {hi}]")));
        }
        Ok(ProbRange { lo, hi })
    }

    pub const fn upto(hi: f64) -> Self {
        ProbRange { lo: 0.0, hi }
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.lo && p <= self.hi
    }

    fn draw(&self, rng: &mut seed::Rng) -> f64 {
        // Always consume one draw so the stream layout is range independent.
        let u: f64 = rng.gen();
        self.lo + (self.hi - self.lo) * u
    }
}

/// Failure-probability intervals for nodes, links and gateway satellite links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureCase {
    /// 1..=4 for the built-in cases, 0 for custom ones.
    pub id: u8,
    pub node: ProbRange,
    pub edge: ProbRange,
    pub sat: ProbRange,
}

const BUILTIN: [(f64, f64, f64); 4] = [
    (0.05, 0.02, 0.02),
    (0.06, 0.04, 0.03),
    (0.07, 0.06, 0.04),
    (0.08, 0.08, 0.05),
];

impl FailureCase {
    pub fn builtin(id: u8) -> Result<Self> {
        let &(n, e, s) = BUILTIN
            .get((id as usize).wrapping_sub(1))
            .ok_or_else(|| Error::domain(format!("unknown failure case {id}; expected 1..=4")))?;
        Ok(FailureCase { id, node: ProbRange::upto(n), edge: ProbRange::upto(e), sat: ProbRange::upto(s) })
    }

    pub fn all() -> [FailureCase; 4] {
        [1, 2, 3, 4].map(|i| FailureCase::builtin(i).expect("built-in"))
    }

    pub fn custom(node: ProbRange, edge: ProbRange, sat: ProbRange) -> Self {
        FailureCase { id: 0, node, edge, sat }
    }

    /// Every interval is `[0, 0]`.
    pub fn failure_free() -> Self {
        FailureCase::custom(ProbRange::upto(0.0), ProbRange::upto(0.0), ProbRange::upto(0.0))
    }

    pub fn label(&self) -> String {
        if self.id == 0 {
            if *self == FailureCase::failure_free() {
                "none".into()
            } else {
                "custom".into()
            }
        } else {
            self.id.to_string()
        }
    }
}

/// Sampled failure probabilities for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureAssignment {
    node_fail: Vec<f64>,
    edge_fail: Vec<f64>,
    sat_fail: BTreeMap<NodeId, f64>,
}

impl FailureAssignment {
    pub fn from_parts(
        topo: &Topology,
        node_fail: Vec<f64>,
        edge_fail: Vec<f64>,
        sat_fail: BTreeMap<NodeId, f64>,
    ) -> Result<Self> {
        if node_fail.len() != topo.node_count() || edge_fail.len() != topo.edge_count() {
            return Err(Error::domain("failure assignment does not match topology size"));
        }
        if !sat_fail.keys().copied().eq(topo.gateways().iter().copied()) {
            return Err(Error::domain("satellite failures must cover exactly the gateway set"));
        }
        let all = node_fail.iter().chain(&edge_fail).chain(sat_fail.values());
        for &p in all {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("failure probability {p} outside [0, 1]")));
            }
        }
        Ok(FailureAssignment { node_fail, edge_fail, sat_fail })
    }

    /// Same probability for every component of each kind.
    pub fn uniform(topo: &Topology, node: f64, edge: f64, sat: f64) -> Result<Self> {
        FailureAssignment::from_parts(
            topo,
            vec![node; topo.node_count()],
            vec![edge; topo.edge_count()],
            topo.gateways().iter().map(|&g| (g, sat)).collect(),
        )
    }

    pub fn node(&self, v: NodeId) -> f64 {
        self.node_fail[v.0]
    }

    pub fn edge(&self, e: super::EdgeId) -> f64 {
        self.edge_fail[e.0]
    }

    /// Satellite-link failure of a gateway node; `None` for non-gateways.
    pub fn sat(&self, g: NodeId) -> Option<f64> {
        self.sat_fail.get(&g).copied()
    }

    pub fn node_probs(&self) -> &[f64] {
        &self.node_fail
    }

    pub fn edge_probs(&self) -> &[f64] {
        &self.edge_fail
    }

    pub fn sat_probs(&self) -> &BTreeMap<NodeId, f64> {
        &self.sat_fail
    }

    pub fn within(&self, case: &FailureCase) -> bool {
        self.node_fail.iter().all(|&p| case.node.contains(p))
            && self.edge_fail.iter().all(|&p| case.edge.contains(p))
            && self.sat_fail.values().all(|&p| case.sat.contains(p))
    }

    /// CSV with columns `kind,id,probability`; edge ids are `u-v`.
    pub fn to_csv(&self, topo: &Topology) -> String {
        let mut s = String::from("kind,id,probability\n");
        for v in topo.node_ids() {
            s.push_str(&csv_record(["node", topo.node_name(v), &sig12(self.node_fail[v.0])]));
        }
        for (i, e) in topo.edges().iter().enumerate() {
            let id = format!("{}-{}", topo.node_name(e.a), topo.node_name(e.b));
            s.push_str(&csv_record(["edge", &id, &sig12(self.edge_fail[i])]));
        }
        for (g, p) in &self.sat_fail {
            s.push_str(&csv_record(["sat", topo.node_name(*g), &sig12(*p)]));
        }
        s
    }
}

/// Draws every probability independently and uniformly from its interval.
/// Draw order: nodes, then links, then gateways, each ascending.
pub fn sample_failures(topo: &Topology, case: &FailureCase, seed: u64) -> FailureAssignment {
    let mut rng = seed::rng(seed);
    let node_fail = (0..topo.node_count()).map(|_| case.node.draw(&mut rng)).collect();
    let edge_fail = (0..topo.edge_count()).map(|_| case.edge.draw(&mut rng)).collect();
    let sat_fail = topo.gateways().iter().map(|&g| (g, case.sat.draw(&mut rng))).collect();
    FailureAssignment { node_fail, edge_fail, sat_fail }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Topology {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Topology::from_edges(n, &edges).unwrap().with_gateways([NodeId(0), NodeId(2)]).unwrap()
    }

    #[test]
    fn builtin_cases_carry_table_bounds() {
        let c1 = FailureCase::builtin(1).unwrap();
        assert_eq!((c1.node.hi, c1.edge.hi, c1.sat.hi), (0.05, 0.02, 0.02));
        let c2 = FailureCase::builtin(2).unwrap();
        assert_eq!((c2.node.hi, c2.edge.hi, c2.sat.hi), (0.06, 0.04, 0.03));
        let c3 = FailureCase::builtin(3).unwrap();
        assert_eq!((c3.node.hi, c3.edge.hi, c3.sat.hi), (0.07, 0.06, 0.04));
        let c4 = FailureCase::builtin(4).unwrap();
        assert_eq!((c4.node.hi, c4.edge.hi, c4.sat.hi), (0.08, 0.08, 0.05));
        for c in FailureCase::all() {
            assert_eq!((c.node.lo, c.edge.lo, c.sat.lo), (0.0, 0.0, 0.0));
        }
        assert!(FailureCase::builtin(0).is_err());
        assert!(FailureCase::builtin(5).is_err());
    }

    #[test]
    fn case_one_samples_within_bounds() {
        let t = ring(6);
        let case = FailureCase::builtin(1).unwrap();
        let f = sample_failures(&t, &case, 3);
        assert!(f.node_probs().iter().all(|&p| (0.0..=0.05).contains(&p)));
        assert!(f.edge_probs().iter().all(|&p| (0.0..=0.02).contains(&p)));
        assert!(f.sat_probs().values().all(|&p| (0.0..=0.02).contains(&p)));
        assert_eq!(f.sat_probs().len(), 2);
    }

    #[test]
    fn degenerate_interval_gives_zeros() {
        let f = sample_failures(&ring(5), &FailureCase::failure_free(), 11);
        assert!(f.node_probs().iter().chain(f.edge_probs()).all(|&p| p == 0.0));
        assert!(f.sat_probs().values().all(|&p| p == 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let t = ring(7);
        let case = FailureCase::builtin(3).unwrap();
        assert_eq!(sample_failures(&t, &case, 42), sample_failures(&t, &case, 42));
        assert_ne!(sample_failures(&t, &case, 42), sample_failures(&t, &case, 43));
    }

    #[test]
    fn ten_thousand_draws_stay_in_bounds() {
        let t = ring(4);
        for case in FailureCase::all() {
            let mut draws = 0;
            for s in 0..1250u64 {
                let f = sample_failures(&t, &case, s);
                assert!(f.within(&case));
                draws += f.node_probs().len() + f.edge_probs().len();
            }
            assert!(draws >= 10_000);
        }
    }

    #[test]
    fn custom_ranges_validate() {
        assert!(ProbRange::new(0.2, 0.1).is_err());
        assert!(ProbRange::new(-0.1, 0.1).is_err());
        assert!(ProbRange::new(0.0, 1.5).is_err());
        let r = ProbRange::new(0.3, 0.3).unwrap();
        let f = sample_failures(&ring(3), &FailureCase::custom(r, r, r), 0);
        assert!(f.node_probs().iter().all(|&p| p == 0.3));
    }

    #[test]
    fn csv_lists_every_component() {
        let t = ring(3);
        let f = FailureAssignment::uniform(&t, 0.5, 0.25, 0.125).unwrap();
        let csv = f.to_csv(&t);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "kind,id,probability");
        assert_eq!(lines.len(), 1 + 3 + 3 + 2);
        assert!(lines.contains(&"edge,0-1,0.25"));
        assert!(lines.contains(&"sat,2,0.125"));
    }

    #[test]
    fn from_parts_validates() {
        let t = ring(3);
        assert!(FailureAssignment::from_parts(&t, vec![0.0; 2], vec![0.0; 3], BTreeMap::new()).is_err());
        assert!(FailureAssignment::uniform(&t, 1.5, 0.0, 0.0).is_err());
    }
}
