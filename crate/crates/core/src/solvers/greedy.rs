//! Randomized double greedy on `W~ = W_bar - W`.
//!
//! Keeps a lower set (initially empty) and an upper set (initially every
//! candidate). Candidates are visited in ascending id; for each one the gain
//! of adding it to the lower set, `a`, and the gain of dropping it from the
//! upper set, `b`, are clipped at zero and the candidate is kept with
//! probability `a / (a + b)` (probability 1 when both gains are zero). After
//! the last candidate both sets coincide. In expectation the result is within
//! a factor 1/2 of the maximum of `W~`.

use std::time::Instant;

use rand::Rng as _;

use super::{SolveResult, SolverKind};
use crate::error::Result;
use crate::objective::{eval_w, w_tilde, Instance};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyRule {
    /// Keep with probability proportional to the gain of adding.
    #[default]
    Standard,
    /// Compatibility rule: the two quantities are computed as losses
    /// (`W~(upper) - W~(upper - i)` and `W~(lower) - W~(lower + i)`) and the
    /// candidate is kept with probability `lower_loss / (lower_loss +
    /// upper_loss)`. Carries no approximation guarantee.
    InvertedLosses,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GreedyOptions {
    pub rule: GreedyRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub candidate: usize,
    /// Sets before the decision, as ascending candidate indices.
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub a: f64,
    pub b: f64,
    pub keep_probability: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// The common final set, before any empty-set repair.
    pub chosen: Vec<usize>,
    pub evaluations: u64,
}

pub fn double_greedy_trace(inst: &Instance, seed: u64, opts: &GreedyOptions) -> GreedyTrace {
    let n = inst.n_candidates();
    let mut rng = seed::rng(seed);
    let mut lower: Vec<usize> = Vec::with_capacity(n);
    let mut upper: Vec<usize> = (0..n).collect();
    let mut steps = Vec::with_capacity(n);
    let mut evaluations = 0;

    for i in 0..n {
        let lower_plus: Vec<usize> = lower.iter().copied().chain([i]).collect();
        let upper_minus: Vec<usize> = upper.iter().copied().filter(|&j| j != i).collect();
        let f_lower = w_tilde(inst, &lower);
        let f_lower_plus = w_tilde(inst, &lower_plus);
        let f_upper = w_tilde(inst, &upper);
        let f_upper_minus = w_tilde(inst, &upper_minus);
        evaluations += 4;

        let (a, b) = match opts.rule {
            GreedyRule::Standard => ((f_lower_plus - f_lower).max(0.0), (f_upper_minus - f_upper).max(0.0)),
            GreedyRule::InvertedLosses => ((f_lower - f_lower_plus).max(0.0), (f_upper - f_upper_minus).max(0.0)),
        };
        let p = if a + b == 0.0 { 1.0 } else { a / (a + b) };
        let u: f64 = rng.gen();
        let kept = u < p;

        steps.push(GreedyStep {
            candidate: i,
            lower: lower.clone(),
            upper: upper.clone(),
            a,
            b,
            keep_probability: p,
            kept,
        });
        if kept {
            lower = lower_plus;
        } else {
            upper = upper_minus;
        }
    }
    debug_assert_eq!(lower, upper);
    GreedyTrace { steps, chosen: lower, evaluations }
}

pub fn solve_double_greedy(inst: &Instance, seed: u64) -> Result<SolveResult> {
    solve_double_greedy_with(inst, seed, &GreedyOptions::default())
}

pub fn solve_double_greedy_with(inst: &Instance, seed: u64, opts: &GreedyOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let trace = double_greedy_trace(inst, seed, opts);
    let mut chosen = trace.chosen;
    let mut evaluations = trace.evaluations;
    if chosen.is_empty() {
        // At least one controller is required: take the best singleton.
        let mut best = 0;
        let mut best_w = eval_w(inst, &[0]);
        for i in 1..inst.n_candidates() {
            let w = eval_w(inst, &[i]);
            if w < best_w {
                best = i;
                best_w = w;
            }
        }
        evaluations += inst.n_candidates() as u64;
        chosen = vec![best];
    }
    SolveResult::from_indices(inst, &chosen, SolverKind::Greedy, Some(seed), evaluations, start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::ErrorMatrix;
    use crate::solvers::testutil::random_instance;
    use crate::topology::NodeId;

    #[test]
    fn single_useful_candidate_is_chosen_surely() {
        // Candidate 1 serves everyone perfectly at no cost; the others are
        // useless and far from any gateway.
        let rates = vec![
            0.5, 0.5, 0.5, //
            0.0, 0.0, 0.0, //
            0.5, 0.5, 0.5,
        ];
        let m = ErrorMatrix::from_rates(vec![NodeId(0), NodeId(1), NodeId(2)], 3, rates).unwrap();
        let inst = Instance::new(m, vec![10.0, 0.0, 10.0], 1.0).unwrap();
        for s in 0..50 {
            let tr = double_greedy_trace(&inst, s, &GreedyOptions::default());
            assert!(tr.steps.iter().all(|st| st.keep_probability == 0.0 || st.keep_probability == 1.0));
            let r = solve_double_greedy(&inst, s).unwrap();
            assert_eq!(r.placement.placed.iter().copied().collect::<Vec<_>>(), vec![NodeId(1)]);
        }
    }

    #[test]
    fn flat_instance_keeps_everything() {
        let m = ErrorMatrix::from_rates((0..4).map(NodeId).collect(), 4, vec![0.0; 16]).unwrap();
        let inst = Instance::new(m, vec![0.0; 4], 1.0).unwrap();
        let tr = double_greedy_trace(&inst, 9, &GreedyOptions::default());
        for st in &tr.steps[1..] {
            assert_eq!((st.a, st.b), (0.0, 0.0));
        }
        assert_eq!(tr.chosen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sets_stay_nested_and_converge() {
        for s in 0..40 {
            let inst = random_instance(9, 7, 0.3, s);
            let tr = double_greedy_trace(&inst, s * 7 + 1, &GreedyOptions::default());
            assert_eq!(tr.evaluations, 4 * 9);
            for st in &tr.steps {
                assert!(st.lower.iter().all(|x| st.upper.contains(x)));
                // earlier candidates are already decided identically
                let decided_l: Vec<_> = st.lower.iter().filter(|&&x| x < st.candidate).collect();
                let decided_u: Vec<_> = st.upper.iter().filter(|&&x| x < st.candidate).collect();
                assert_eq!(decided_l, decided_u);
                assert!(!st.lower.contains(&st.candidate) && st.upper.contains(&st.candidate));
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let inst = random_instance(8, 6, 0.5, 3);
        let a = solve_double_greedy(&inst, 17).unwrap();
        let b = solve_double_greedy(&inst, 17).unwrap();
        assert_eq!(a.placement, b.placement);
        assert_eq!(a.w.to_bits(), b.w.to_bits());
        assert_eq!(a.seed, Some(17));
    }

    #[test]
    fn empty_result_is_repaired() {
        // Every controller is expensive, so both adding gains are clipped to
        // zero and the lower set ends empty.
        let m = ErrorMatrix::from_rates(vec![NodeId(0), NodeId(1)], 2, vec![0.2, 0.1, 0.3, 0.0]).unwrap();
        let inst = Instance::new(m, vec![5.0, 6.0], 1.0).unwrap();
        let tr = double_greedy_trace(&inst, 0, &GreedyOptions::default());
        assert!(tr.chosen.is_empty());
        let r = solve_double_greedy(&inst, 0).unwrap();
        // W({0}) = 5 + 0.3, W({1}) = 6 + 0.3
        assert_eq!(r.placement.placed.iter().copied().collect::<Vec<_>>(), vec![NodeId(0)]);
        assert_eq!(r.evaluations, 4 * 2 + 2);
    }

    #[test]
    fn inverted_rule_differs_from_standard() {
        let mut differs = false;
        for s in 0..20 {
            let inst = random_instance(8, 6, 0.2, 50 + s);
            let std = solve_double_greedy(&inst, s).unwrap();
            let inv = solve_double_greedy_with(&inst, s, &GreedyOptions { rule: GreedyRule::InvertedLosses }).unwrap();
            differs |= std.placement != inv.placement;
        }
        assert!(differs);
    }
}
