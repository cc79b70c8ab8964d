//! Exact placement by set enumeration.
//!
//! Once the controller set is fixed the best assignment is known, so the
//! optimum is a minimum of `W` over the nonempty subsets of the candidates.
//! The search walks include/exclude decisions, best singletons first, and
//! prunes a prefix once a lower bound on every completion exceeds the
//! incumbent.

use std::time::Instant;

use super::{SolveResult, SolverKind};
use crate::error::{Error, Result};
use crate::objective::{eval_w, Instance};
use crate::topology::NodeId;

pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub limit: usize,
    pub prune: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { limit: DEFAULT_ENUMERATION_LIMIT, prune: true }
    }
}

/// Lower `W`, then fewer controllers, then the lexicographically smaller set.
fn better(w: f64, set: &[usize], best_w: f64, best: &[usize]) -> bool {
    if w != best_w {
        return w < best_w;
    }
    if set.len() != best.len() {
        return set.len() < best.len();
    }
    set < best
}

pub fn solve_exact(inst: &Instance) -> Result<SolveResult> {
    solve_exact_with(inst, &ExactOptions::default())
}

pub fn solve_exact_with(inst: &Instance, opts: &ExactOptions) -> Result<SolveResult> {
    let n = inst.n_candidates();
    if n > opts.limit {
        return Err(Error::TooManyCandidates { count: n, limit: opts.limit });
    }
    if n == 0 {
        return Err(Error::Config("candidate set is empty".into()));
    }
    let start = Instant::now();
    let (best, evaluations) = if opts.prune { branch_and_bound(inst) } else { exhaustive(inst) };
    SolveResult::from_indices(inst, &best, SolverKind::Exact, None, evaluations, start.elapsed())
}

fn exhaustive(inst: &Instance) -> (Vec<usize>, u64) {
    let n = inst.n_candidates();
    let mut best = vec![0];
    let mut best_w = eval_w(inst, &best);
    let mut evals = 1;
    let mut set = Vec::with_capacity(n);
    for mask in 2u64..(1u64 << n) {
        set.clear();
        set.extend((0..n).filter(|i| mask >> i & 1 == 1));
        let w = eval_w(inst, &set);
        evals += 1;
        if better(w, &set, best_w, &best) {
            best_w = w;
            best.clone_from(&set);
        }
    }
    (best, evals)
}

struct Bnb<'a> {
    inst: &'a Instance,
    /// Search position to candidate index; promising candidates come first.
    order: Vec<usize>,
    /// `suffix_min[i][v]`: smallest error for node v among `order[i..]`.
    suffix_min: Vec<Vec<f64>>,
    best: Vec<usize>,
    best_w: f64,
    evals: u64,
    scratch: Vec<usize>,
}

/// Depth-first search over include/exclude decisions in `order`, including
/// first. A branch is cut when a lower bound exceeds the incumbent:
///
/// - every undecided candidate is free: `alpha * W^c(X) + sum_v min(cur_v,
///   best undecided e_jv)`;
/// - diminishing returns: adding a set `S` lowers `W(X)` by at most the sum
///   of its members' individual net gains, so `W(X + S) >= W(X) - sum_j
///   max(0, sum_v max(0, cur_v - e_jv) - alpha * d_j)`;
/// - the dual ascent bound of [`Bnb::dual_ascent`], which dominates the first.
///
/// Here `cur_v` is node v's best error among placed candidates, 1 when none
/// is placed (the empty-set convention), which keeps the bounds valid for
/// every nonempty completion.
fn branch_and_bound(inst: &Instance) -> (Vec<usize>, u64) {
    let (n, nodes) = (inst.n_candidates(), inst.n_nodes());

    let singles: Vec<f64> = (0..n).map(|i| eval_w(inst, &[i])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| singles[a].total_cmp(&singles[b]).then(a.cmp(&b)));

    let mut suffix_min = vec![vec![f64::INFINITY; nodes]; n + 1];
    for i in (0..n).rev() {
        let (head, tail) = suffix_min.split_at_mut(i + 1);
        for (v, (cur, next)) in head[i].iter_mut().zip(&tail[0]).enumerate() {
            *cur = next.min(inst.error().rate(order[i], NodeId(v)));
        }
    }

    // Incumbent: best singleton.
    let mut best = vec![0];
    let mut best_w = singles[0];
    for (i, &w) in singles.iter().enumerate().skip(1) {
        if better(w, &[i], best_w, &best) {
            best_w = w;
            best = vec![i];
        }
    }

    let mut bnb = Bnb { inst, order, suffix_min, best, best_w, evals: n as u64, scratch: Vec::with_capacity(n) };
    let mut placed = Vec::with_capacity(n);
    bnb.dfs(0, &mut placed, 0.0, &vec![1.0; nodes]);
    (bnb.best, bnb.evals)
}

impl Bnb<'_> {
    /// Facility-location dual: any `u` with `u_v <= cur_v` and `sum_v max(0,
    /// u_v - e_jv) <= alpha * d_j` for every undecided `j` gives
    /// `sum_v u_v <= W^r` of every completion. Starts from the cheapest
    /// reachable error and raises each `u_v` one level at a time.
    fn dual_ascent(&self, i: usize, cur: &[f64]) -> f64 {
        let rest = &self.order[i..];
        let alpha = self.inst.alpha();
        let mut u: Vec<f64> = cur.iter().zip(&self.suffix_min[i]).map(|(a, b)| a.min(*b)).collect();
        let mut slack: Vec<f64> = rest.iter().map(|&j| alpha * self.inst.d()[j]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..u.len() {
                if u[v] >= cur[v] {
                    continue;
                }
                let (mut target, mut room) = (cur[v], f64::INFINITY);
                for (p, &j) in rest.iter().enumerate() {
                    let e = self.inst.error().row(j)[v];
                    if e <= u[v] {
                        room = room.min(slack[p]);
                    } else {
                        target = target.min(e);
                    }
                }
                let delta = (target - u[v]).min(room);
                if delta <= 0.0 {
                    continue;
                }
                for (p, &j) in rest.iter().enumerate() {
                    if self.inst.error().row(j)[v] <= u[v] {
                        slack[p] = (slack[p] - delta).max(0.0);
                    }
                }
                u[v] += delta;
                changed = true;
            }
        }
        u.iter().sum()
    }

    fn cut(&self, bound: f64) -> bool {
        // Slack absorbs rounding between the incremental bounds and eval_w.
        bound > self.best_w + 1e-9 * self.best_w.abs().max(1.0)
    }

    fn dfs(&mut self, i: usize, placed: &mut Vec<usize>, wc: f64, cur: &[f64]) {
        let n = self.inst.n_candidates();
        let alpha = self.inst.alpha();
        if i == n {
            if !placed.is_empty() {
                self.scratch.clear();
                self.scratch.extend(placed.iter().map(|&p| self.order[p]));
                self.scratch.sort_unstable();
                let w = eval_w(self.inst, &self.scratch);
                self.evals += 1;
                if better(w, &self.scratch, self.best_w, &self.best) {
                    self.best_w = w;
                    self.best.clone_from(&self.scratch);
                }
            }
            return;
        }

        self.evals += 1;
        let reach: f64 = cur.iter().zip(&self.suffix_min[i]).map(|(a, b)| a.min(*b)).sum();
        if self.cut(alpha * wc + reach) {
            return;
        }
        let mut gains = 0.0;
        for &j in &self.order[i..] {
            let row = self.inst.error().row(j);
            let g: f64 = cur.iter().zip(row).map(|(c, e)| (c - e).max(0.0)).sum();
            gains += (g - alpha * self.inst.d()[j]).max(0.0);
        }
        let current = alpha * wc + cur.iter().sum::<f64>();
        if self.cut(current - gains) {
            return;
        }

        if self.cut(alpha * wc + self.dual_ascent(i, cur)) {
            return;
        }

        let k = self.order[i];
        let row = self.inst.error().row(k);
        let with: Vec<f64> = cur.iter().zip(row).map(|(a, b)| a.min(*b)).collect();
        placed.push(i);
        self.dfs(i + 1, placed, wc + self.inst.d()[k], &with);
        placed.pop();
        self.dfs(i + 1, placed, wc, cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{eval_wr, Instance};
    use crate::reliability::ErrorMatrix;
    use crate::solvers::testutil::random_instance;

    #[test]
    fn single_candidate() {
        let m = ErrorMatrix::from_rates(vec![NodeId(2)], 3, vec![0.1, 0.2, 0.0]).unwrap();
        let inst = Instance::new(m, vec![5.0], 1.0).unwrap();
        let r = solve_exact(&inst).unwrap();
        assert_eq!(r.placement.placed.iter().copied().collect::<Vec<_>>(), vec![NodeId(2)]);
        assert_eq!(r.placement.assignment, vec![NodeId(2); 3]);
        assert_eq!(r.solver, SolverKind::Exact);
        assert_eq!(r.seed, None);
    }

    #[test]
    fn huge_alpha_places_one_controller() {
        for s in 0..20 {
            let base = random_instance(7, 9, 1.0, s);
            let min_d = base.d().iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min_d > 0.0);
            let alpha = 1e3 * base.n_nodes() as f64 / min_d;
            let inst = base.with_alpha(alpha).unwrap();
            let r = solve_exact(&inst).unwrap();
            assert_eq!(r.n_placed(), 1);
            let expect = (0..7)
                .min_by(|&a, &b| {
                    let fa = alpha * inst.d()[a] + eval_wr(&inst, &[a]);
                    let fb = alpha * inst.d()[b] + eval_wr(&inst, &[b]);
                    fa.partial_cmp(&fb).unwrap()
                })
                .unwrap();
            assert!(r.placement.placed.contains(&NodeId(expect)));
        }
    }

    #[test]
    fn pruned_matches_exhaustive() {
        for s in 0..30 {
            let inst = random_instance(10, 8, 0.05 + (s % 5) as f64 * 0.2, 100 + s);
            let pruned = solve_exact(&inst).unwrap();
            let full = solve_exact_with(&inst, &ExactOptions { prune: false, ..Default::default() }).unwrap();
            assert_eq!(pruned.w, full.w);
            assert_eq!(pruned.placement, full.placement);
            assert!(pruned.evaluations <= full.evaluations * 2 + 64);
        }
    }

    #[test]
    fn refuses_above_limit() {
        let inst = random_instance(6, 4, 1.0, 1);
        let err = solve_exact_with(&inst, &ExactOptions { limit: 5, prune: true }).unwrap_err();
        assert!(matches!(err, Error::TooManyCandidates { count: 6, limit: 5 }));
        assert!(err.to_string().contains("double-greedy"));
    }

    #[test]
    fn ties_prefer_fewer_then_lexicographic() {
        // Two identical zero-cost candidates: both singletons and the pair tie.
        let m = ErrorMatrix::from_rates(vec![NodeId(0), NodeId(1)], 2, vec![0.0; 4]).unwrap();
        let inst = Instance::new(m, vec![0.0, 0.0], 1.0).unwrap();
        for prune in [true, false] {
            let r = solve_exact_with(&inst, &ExactOptions { prune, ..Default::default() }).unwrap();
            assert_eq!(r.placement.placed.iter().copied().collect::<Vec<_>>(), vec![NodeId(0)]);
        }
    }
}
