//! Contracted-coefficient solver.
//!
//! For a divisor w of v, the counts bᵢ of difference-set elements in each
//! residue class mod w satisfy
//!
//!   Σ bᵢ = k,     Σ bᵢ² = n + λv/w,     Σ bᵢ b_{i−j} = λv/w  (j = 1..w−1),
//!
//! with 0 ≤ bᵢ ≤ v/w. A w-multiplier t forces bᵢ = bⱼ whenever i and j lie
//! in the same orbit of x ↦ t·x mod w, so the solver enumerates one
//! coefficient per orbit against the linear and square equations, then
//! filters by the cyclic autocorrelation equation. Zero survivors is a
//! nonexistence proof. When w = v the coefficients are binary and the
//! survivors are difference sets verbatim (orbit-union search).

use crate::battery::{TestName, TestResult, Verdict, Witness};
use crate::error::Error;
use crate::multipliers::{is_w_multiplier, orbits, OrbitStructure};
use crate::numtheory::factor;
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};

/// One solver instance: parameters, contraction modulus, multiplier, orbit
/// structure and the integer targets of the three equations.
#[derive(Debug, Clone)]
pub struct ContractionProblem {
    pub params: ParamSet,
    pub w: u64,
    pub t: u64,
    pub orbit_structure: OrbitStructure,
    pub linear_target: u64,
    pub square_target: u64,
    pub correlation_target: u64,
    pub coefficient_cap: u64,
    /// Orbit indices in enumeration order: size descending, then minimum
    /// element ascending.
    order: Vec<usize>,
    /// Orbit sizes in enumeration order.
    sizes: Vec<u64>,
    /// Suffix sums of `sizes` (suffix_size[i] = sizes[i] + ... + last).
    suffix_size: Vec<u64>,
    /// reachable[i] is the bitset of linear sums Σ cⱼsⱼ (j ≥ i, cⱼ ≤ cap)
    /// achievable by the orbit suffix starting at i; dead subset-sum
    /// branches are cut before they explode combinatorially.
    reachable: Vec<Vec<u64>>,
}

fn bit_get(words: &[u64], i: u64) -> bool {
    words[(i / 64) as usize] & (1u64 << (i % 64)) != 0
}

/// out |= words << shift (bit shift across the whole set), truncated to
/// the fixed width.
fn bit_or_shifted(out: &mut [u64], words: &[u64], shift: u64) {
    let word_shift = (shift / 64) as usize;
    let bit_shift = shift % 64;
    let len = out.len();
    for i in (0..len.saturating_sub(word_shift)).rev() {
        let lo = words[i] << bit_shift;
        out[i + word_shift] |= lo;
        if bit_shift > 0 && i + word_shift + 1 < len {
            out[i + word_shift + 1] |= words[i] >> (64 - bit_shift);
        }
    }
}

/// Orbit coefficients of one solution of the linear and square equations,
/// aligned with `ContractionProblem::orbit_structure.orbits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionSolution {
    pub coefficients: Vec<u32>,
}

/// Result of an enumeration sweep. `completed` is false when the node
/// budget ran out or a visitor stopped the sweep early, in which case
/// `count` is a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOutcome {
    pub count: u64,
    pub completed: bool,
}

impl ContractionProblem {
    /// Build a problem for a verified w-multiplier t. Rejects w not
    /// dividing v and t not certified by the w-multiplier criterion.
    pub fn new(params: ParamSet, w: u64, t: u64) -> Result<Self, Error> {
        if w < 2 || params.v % w != 0 {
            return Err(Error::Domain(format!(
                "contraction: w = {w} must be a divisor of v = {} greater than 1",
                params.v
            )));
        }
        if !is_w_multiplier(t, w, &factor(params.n))? {
            return Err(Error::Domain(format!(
                "contraction: t = {t} is not a certified {w}-multiplier for order {}",
                params.n
            )));
        }
        let orbit_structure = orbits(t, w)?;
        let quotient = params.v / w;
        let correlation_target = params.lambda * quotient;
        let mut order: Vec<usize> = (0..orbit_structure.orbits.len()).collect();
        order.sort_by_key(|&i| {
            (
                std::cmp::Reverse(orbit_structure.orbits[i].len()),
                orbit_structure.orbits[i][0],
            )
        });
        let sizes: Vec<u64> = order
            .iter()
            .map(|&i| orbit_structure.orbits[i].len() as u64)
            .collect();
        let mut suffix_size = vec![0u64; sizes.len() + 1];
        for i in (0..sizes.len()).rev() {
            suffix_size[i] = suffix_size[i + 1] + sizes[i];
        }
        let linear_target = params.k;
        let words = (linear_target / 64 + 1) as usize;
        let mut reachable = vec![vec![0u64; words]; sizes.len() + 1];
        reachable[sizes.len()][0] = 1; // the empty suffix reaches only 0
        for i in (0..sizes.len()).rev() {
            let (head, tail) = reachable.split_at_mut(i + 1);
            let prev = &tail[0];
            let cur = &mut head[i];
            let c_max = quotient.min(linear_target / sizes[i]);
            for c in 0..=c_max {
                bit_or_shifted(cur, prev, c * sizes[i]);
            }
        }
        Ok(Self {
            params,
            w,
            t,
            orbit_structure,
            linear_target,
            square_target: params.n + correlation_target,
            correlation_target,
            coefficient_cap: quotient,
            order,
            sizes,
            suffix_size,
            reachable,
        })
    }

    /// Visit every orbit-coefficient assignment satisfying the linear and
    /// square equations, in deterministic order (orbits by size descending
    /// then representative; coefficients descending). The visitor receives
    /// coefficients aligned with `orbit_structure.orbits`; returning false
    /// stops the sweep.
    pub fn visit_solutions<F>(&self, node_budget: u64, mut visitor: F) -> SweepOutcome
    where
        F: FnMut(&[u32]) -> bool,
    {
        let mut scratch = vec![0u32; self.sizes.len()];
        let mut canonical = vec![0u32; self.sizes.len()];
        let mut state = Sweep {
            problem: self,
            nodes: 0,
            node_budget,
            count: 0,
            stopped: false,
        };
        state.recurse(
            0,
            self.linear_target,
            self.square_target,
            &mut scratch,
            &mut |coeffs: &[u32]| {
                for (pos, &orbit_idx) in self.order.iter().enumerate() {
                    canonical[orbit_idx] = coeffs[pos];
                }
                visitor(&canonical)
            },
        );
        SweepOutcome {
            count: state.count,
            completed: !state.stopped,
        }
    }

    /// Count solutions of the linear and square equations without
    /// materializing them.
    pub fn count_solutions(&self, node_budget: u64) -> SweepOutcome {
        let mut scratch = vec![0u32; self.sizes.len()];
        let mut state = Sweep {
            problem: self,
            nodes: 0,
            node_budget,
            count: 0,
            stopped: false,
        };
        state.recurse(
            0,
            self.linear_target,
            self.square_target,
            &mut scratch,
            &mut |_: &[u32]| true,
        );
        SweepOutcome {
            count: state.count,
            completed: !state.stopped,
        }
    }

    /// Exact solution count plus the solutions themselves, materialized up
    /// to `collect_limit`. Streams internally; rows with very large counts
    /// should use `visit_solutions` directly.
    pub fn solve_counts(
        &self,
        node_budget: u64,
        collect_limit: usize,
    ) -> (SweepOutcome, Vec<ContractionSolution>) {
        let mut collected = Vec::new();
        let outcome = self.visit_solutions(node_budget, |coeffs| {
            if collected.len() < collect_limit {
                collected.push(ContractionSolution {
                    coefficients: coeffs.to_vec(),
                });
            }
            true
        });
        (outcome, collected)
    }

    /// Expand orbit coefficients to the full b-vector over Z_w.
    pub fn expand(&self, solution: &ContractionSolution) -> Vec<u32> {
        let mut b = vec![0u32; self.w as usize];
        for (orbit, &c) in self.orbit_structure.orbits.iter().zip(&solution.coefficients) {
            for &x in orbit {
                b[x as usize] = c;
            }
        }
        b
    }

    /// Whether the expanded b-vector meets the autocorrelation equation at
    /// every nonzero shift. Computed by an integer difference-count sweep
    /// over the support; aborts as soon as any shift exceeds the target.
    pub fn autocorrelation_ok(&self, b: &[u32]) -> bool {
        autocorrelation_count(b, self.w, self.correlation_target).0
    }
}

struct Sweep<'a> {
    problem: &'a ContractionProblem,
    nodes: u64,
    node_budget: u64,
    count: u64,
    stopped: bool,
}

impl Sweep<'_> {
    /// Returns false when the sweep should stop entirely.
    fn recurse(
        &mut self,
        i: usize,
        lin_left: u64,
        sq_left: u64,
        coeffs: &mut Vec<u32>,
        emit: &mut dyn FnMut(&[u32]) -> bool,
    ) -> bool {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            self.stopped = true;
            return false;
        }
        let sizes = &self.problem.sizes;
        if i == sizes.len() {
            if lin_left == 0 && sq_left == 0 {
                self.count += 1;
                if !emit(coeffs) {
                    self.stopped = true;
                    return false;
                }
            }
            return true;
        }
        let cap = self.problem.coefficient_cap;
        let remaining = self.problem.suffix_size[i];
        // Remaining orbits cannot produce the linear target at all.
        if !bit_get(&self.problem.reachable[i], lin_left) {
            return true;
        }
        // Σ c²s ≤ cap · Σ cs on any suffix.
        if sq_left > cap.saturating_mul(lin_left) {
            return true;
        }
        // Cauchy–Schwarz: (Σ cs)² ≤ (Σ c²s)(Σ s).
        if (lin_left as u128) * (lin_left as u128) > (sq_left as u128) * (remaining as u128) {
            return true;
        }
        let s = sizes[i];
        if i + 1 == sizes.len() {
            // Last orbit: the coefficient is forced.
            if lin_left % s == 0 {
                let c = lin_left / s;
                if c <= cap && c * c * s == sq_left {
                    coeffs[i] = c as u32;
                    self.count += 1;
                    if !emit(coeffs) {
                        self.stopped = true;
                        return false;
                    }
                }
            }
            return true;
        }
        let c_max = cap.min(lin_left / s).min((sq_left / s).isqrt());
        for c in (0..=c_max).rev() {
            coeffs[i] = c as u32;
            if !self.recurse(i + 1, lin_left - c * s, sq_left - c * c * s, coeffs, emit) {
                return false;
            }
        }
        true
    }
}

/// Difference-count check: every nonzero shift j has Σ bᵢ b_{i−j} equal to
/// `target`. Counts ordered pairs of support positions into an integer
/// array, aborting once any bucket exceeds the target. Returns the verdict
/// and the number of pairs processed, so callers can budget total work.
fn autocorrelation_count(b: &[u32], w: u64, target: u64) -> (bool, u64) {
    let support: Vec<(u64, u64)> = b
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(x, &c)| (x as u64, c as u64))
        .collect();
    let mut counts = vec![0u64; w as usize];
    let mut ops = 0u64;
    for &(x, cx) in &support {
        for &(y, cy) in &support {
            if x == y {
                continue;
            }
            ops += 1;
            let d = (x + w - y) % w;
            counts[d as usize] += cx * cy;
            if counts[d as usize] > target {
                return (false, ops);
            }
        }
    }
    (counts[1..].iter().all(|&c| c == target), ops)
}

/// Apply the autocorrelation filter to materialized solutions, keeping the
/// ones whose full b-vector satisfies the equation at every nonzero shift.
pub fn filter_autocorrelation(
    problem: &ContractionProblem,
    solutions: &[ContractionSolution],
) -> Vec<ContractionSolution> {
    solutions
        .iter()
        .filter(|sol| {
            let b = problem.expand(sol);
            debug_assert_eq!(
                b.iter().map(|&x| x as u64).sum::<u64>(),
                problem.linear_target
            );
            debug_assert_eq!(
                b.iter().map(|&x| (x as u64) * (x as u64)).sum::<u64>(),
                problem.square_target
            );
            problem.autocorrelation_ok(&b)
        })
        .cloned()
        .collect()
}

/// Run the full contraction elimination for (ps, w, t): enumerate the
/// solutions of the linear and square equations and filter them by the
/// autocorrelation equation, streaming.
///
/// EXCLUDED iff the sweep completed with zero survivors. A surviving
/// solution yields PASS immediately. If the node budget or the filter
/// work budget runs out the verdict is INAPPLICABLE (nothing was proved).
pub fn eliminate_by_contraction(
    ps: ParamSet,
    w: u64,
    t: u64,
    node_budget: u64,
    filter_ops_budget: u64,
) -> Result<TestResult, Error> {
    let problem = ContractionProblem::new(ps, w, t)?;
    let mut survivors = 0u64;
    let mut filter_ops = 0u64;
    let mut b = vec![0u32; w as usize];
    let outcome = problem.visit_solutions(node_budget, |coeffs| {
        for (orbit, &c) in problem.orbit_structure.orbits.iter().zip(coeffs) {
            for &x in orbit {
                b[x as usize] = c;
            }
        }
        let (ok, ops) = autocorrelation_count(&b, w, problem.correlation_target);
        filter_ops += ops;
        if ok {
            survivors += 1;
            return false; // a survivor means no elimination; stop early
        }
        filter_ops <= filter_ops_budget
    });
    let budget_hit = !outcome.completed && survivors == 0;
    let witness = Witness::Contraction {
        w,
        t,
        orbit_sizes: problem.orbit_structure.size_signature(),
        count45: outcome.count,
        survivors,
        completed: !budget_hit,
    };
    let verdict = if survivors > 0 {
        Verdict::Pass
    } else if outcome.completed {
        Verdict::Excluded
    } else {
        Verdict::Inapplicable
    };
    Ok(TestResult {
        test: TestName::Contraction,
        verdict,
        witness: Some(witness),
    })
}

/// Whether D ⊆ Z_v is a (v, |D|, λ) difference set: every nonzero residue
/// occurs exactly λ times among the pairwise differences.
pub fn is_difference_set(d: &[u64], v: u64, lambda: u64) -> bool {
    if d.is_empty() || d.iter().any(|&x| x >= v) {
        return false;
    }
    let mut sorted = d.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != d.len() {
        return false;
    }
    let mut counts = vec![0u64; v as usize];
    for &x in d {
        for &y in d {
            if x == y {
                continue;
            }
            let diff = (x + v - y) % v;
            counts[diff as usize] += 1;
            if counts[diff as usize] > lambda {
                return false;
            }
        }
    }
    counts[1..].iter().all(|&c| c == lambda)
}

/// Orbit-union search for w = v: every candidate difference set fixed by
/// the multiplier t is a union of orbits with sizes summing to k. Returns
/// the number of candidates (equal to the solution count of the linear and
/// square equations, whose coefficients are forced binary at w = v) and
/// every candidate that verifies as a difference set.
pub fn orbit_union_search(ps: ParamSet, t: u64) -> Result<(u64, Vec<Vec<u64>>), Error> {
    let problem = ContractionProblem::new(ps, ps.v, t)?;
    let mut found = Vec::new();
    let outcome = problem.visit_solutions(u64::MAX, |coeffs| {
        debug_assert!(coeffs.iter().all(|&c| c <= 1));
        let union: Vec<u64> = problem
            .orbit_structure
            .orbits
            .iter()
            .zip(coeffs)
            .filter(|&(_, &c)| c == 1)
            .flat_map(|(orbit, _)| orbit.iter().copied())
            .collect();
        if is_difference_set(&union, ps.v, ps.lambda) {
            let mut set = union;
            set.sort_unstable();
            found.push(set);
        }
        true
    });
    Ok((outcome.count, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn problem(v: u64, k: u64, lambda: u64, w: u64, t: u64) -> ContractionProblem {
        ContractionProblem::new(make_params(v, k, lambda).unwrap(), w, t).unwrap()
    }

    #[test]
    fn count_429() {
        let p = problem(429, 108, 27, 143, 3);
        assert_eq!(p.square_target, 162);
        assert_eq!(p.correlation_target, 81);
        assert_eq!(p.coefficient_cap, 3);
        let outcome = p.count_solutions(u64::MAX);
        assert!(outcome.completed);
        assert_eq!(outcome.count, 14896);
    }

    #[test]
    fn filter_429_leaves_none() {
        let ps = make_params(429, 108, 27).unwrap();
        let result = eliminate_by_contraction(ps, 143, 3, u64::MAX, u64::MAX).unwrap();
        assert_eq!(result.verdict, Verdict::Excluded);
        match result.witness.unwrap() {
            Witness::Contraction {
                count45, survivors, ..
            } => {
                assert_eq!(count45, 14896);
                assert_eq!(survivors, 0);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn count_303_is_binary() {
        let p = problem(303, 151, 75, 303, 16);
        assert_eq!(p.coefficient_cap, 1);
        let (outcome, solutions) = p.solve_counts(u64::MAX, usize::MAX);
        assert_eq!(outcome.count, 2772);
        assert_eq!(solutions.len() as u64, outcome.count);
        for sol in &solutions {
            assert!(sol.coefficients.iter().all(|&c| c <= 1));
            // re-verify both equations on emission
            let lin: u64 = p
                .orbit_structure
                .orbits
                .iter()
                .zip(&sol.coefficients)
                .map(|(o, &c)| o.len() as u64 * c as u64)
                .sum();
            let sq: u64 = p
                .orbit_structure
                .orbits
                .iter()
                .zip(&sol.coefficients)
                .map(|(o, &c)| o.len() as u64 * (c as u64) * (c as u64))
                .sum();
            assert_eq!(lin, p.linear_target);
            assert_eq!(sq, p.square_target);
        }
    }

    #[test]
    fn fano_indicator_survives() {
        let p = problem(7, 3, 1, 7, 1);
        // With t = 1 all orbits are singletons; the indicator of {1,2,4}
        // is the assignment with those coefficients set to 1.
        let mut coeffs = vec![0u32; 7];
        for i in [1usize, 2, 4] {
            coeffs[i] = 1;
        }
        let sol = ContractionSolution {
            coefficients: coeffs,
        };
        let survivors = filter_autocorrelation(&p, &[sol]);
        assert_eq!(survivors.len(), 1);
    }

    #[test]
    fn eliminate_3949() {
        let ps = make_params(3949, 189, 9).unwrap();
        let result = eliminate_by_contraction(ps, 3949, 3, u64::MAX, u64::MAX).unwrap();
        assert_eq!(result.verdict, Verdict::Excluded);
        match result.witness.unwrap() {
            Witness::Contraction { count45, .. } => assert_eq!(count45, 2),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn is_difference_set_examples() {
        assert!(is_difference_set(&[1, 2, 4], 7, 1));
        assert!(is_difference_set(&[0, 1, 3], 7, 1));
        assert!(!is_difference_set(&[0, 1, 2], 7, 1));
        assert!(!is_difference_set(&[0, 1, 1], 7, 1));
    }

    #[test]
    fn orbit_union_fano() {
        let ps = make_params(7, 3, 1).unwrap();
        let (count, found) = orbit_union_search(ps, 2).unwrap();
        assert_eq!(count, 2);
        assert!(found.contains(&vec![1, 2, 4]));
        assert!(found.contains(&vec![3, 5, 6]));
    }

    #[test]
    fn orbit_union_303() {
        let ps = make_params(303, 151, 75).unwrap();
        let (count, found) = orbit_union_search(ps, 16).unwrap();
        assert_eq!(count, 2772);
        assert!(found.is_empty());
    }

    #[test]
    fn survivors_at_w_eq_v_are_difference_sets() {
        // At w = v the autocorrelation filter and the difference-set
        // property coincide; check on the Fano search where survivors exist.
        let ps = make_params(7, 3, 1).unwrap();
        let p = ContractionProblem::new(ps, 7, 2).unwrap();
        let (_, solutions) = p.solve_counts(u64::MAX, usize::MAX);
        for sol in &solutions {
            let b = p.expand(sol);
            let set: Vec<u64> = b
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c == 1)
                .map(|(x, _)| x as u64)
                .collect();
            assert_eq!(
                p.autocorrelation_ok(&b),
                is_difference_set(&set, 7, 1),
                "filter and difference-set check must agree at w = v"
            );
        }
    }

    #[test]
    fn determinism_two_sweeps() {
        let p = problem(429, 108, 27, 143, 3);
        let (_, first) = p.solve_counts(u64::MAX, 2000);
        let (_, second) = p.solve_counts(u64::MAX, 2000);
        assert_eq!(first, second);
    }

    #[test]
    fn budget_exhaustion_is_inapplicable() {
        let ps = make_params(429, 108, 27).unwrap();
        let result = eliminate_by_contraction(ps, 143, 3, 100, u64::MAX).unwrap();
        assert_eq!(result.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn rejects_non_multiplier() {
        let ps = make_params(429, 108, 27).unwrap();
        assert!(ContractionProblem::new(ps, 143, 2).is_err());
    }
}
