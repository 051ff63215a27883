//! Candidate parameter triples (v, k, λ) and the families derived from them.
//!
//! A triple is admissible when λ(v−1) = k(k−1); surveys store the small-k
//! representative (k ≤ v/2), complementing when necessary, and exclude the
//! trivial designs with order n = k − λ < 2.

use crate::error::Error;
use serde::{Deserialize, Serialize};

/// A validated, normalized parameter set with derived order n = k − λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamSet {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub n: u64,
}

impl std::fmt::Display for ParamSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.v, self.k, self.lambda)
    }
}

impl ParamSet {
    /// gcd(v, n), the quantity governing Ryser's conjecture.
    pub fn gcd_vn(&self) -> u64 {
        crate::numtheory::gcd(self.v, self.n)
    }
}

fn counting_identity_holds(v: u64, k: u64, lambda: u64) -> bool {
    lambda as u128 * (v as u128 - 1) == k as u128 * (k as u128 - 1)
}

/// Validate and normalize a triple, complementing to the k ≤ v/2
/// representative. Rejects triples violating the counting identity and the
/// degenerate ones (λ = 0, k ≥ v, n < 2).
pub fn make_params(v: u64, k: u64, lambda: u64) -> Result<ParamSet, Error> {
    let reject = |reason: &str| Error::InvalidParams {
        v,
        k,
        lambda,
        reason: reason.into(),
    };
    if v == 0 || k == 0 {
        return Err(reject("v and k must be positive"));
    }
    if k >= v {
        return Err(reject("k must be less than v"));
    }
    if !counting_identity_holds(v, k, lambda) {
        return Err(reject("counting identity λ(v−1) = k(k−1) fails"));
    }
    // Complement of a (v,k,λ) set is a (v, v−k, v−2k+λ) set; n is preserved.
    let (k, lambda) = if 2 * k > v {
        (v - k, v + lambda - 2 * k)
    } else {
        (k, lambda)
    };
    if lambda == 0 {
        return Err(reject("λ must be positive after normalization"));
    }
    if lambda >= k {
        return Err(reject("λ must be less than k"));
    }
    let n = k - lambda;
    if n < 2 {
        return Err(reject("trivial design: order n < 2"));
    }
    debug_assert!(counting_identity_holds(v, k, lambda));
    Ok(ParamSet { v, k, lambda, n })
}

/// All admissible parameter sets with k in [k_min, k_max], in (k, v)
/// lexicographic order. For each k, every λ dividing k(k−1) with
/// v = k(k−1)/λ + 1 that yields a valid normalized triple.
pub fn enumerate_params(k_min: u64, k_max: u64) -> impl Iterator<Item = ParamSet> {
    assert!(2 <= k_min && k_min <= k_max);
    (k_min..=k_max).flat_map(|k| {
        let kk = k * (k - 1);
        // λ descending gives v ascending within a fixed k.
        let mut row: Vec<ParamSet> = (1..=k.saturating_sub(2))
            .rev()
            .filter(move |&lambda| kk % lambda == 0)
            .filter_map(move |lambda| make_params(kk / lambda + 1, k, lambda).ok())
            .filter(move |ps| ps.k == k)
            .collect();
        row.sort_unstable_by_key(|ps| ps.v);
        row.into_iter()
    })
}

/// Hadamard parameters (v, (v−1)/2, (v−3)/4) for v ≡ 3 (mod 4), v ≥ 7.
pub fn hadamard_params(v: u64) -> Result<ParamSet, Error> {
    if v % 4 != 3 || v < 7 {
        return Err(Error::Domain(format!(
            "hadamard_params: v = {v} must be ≡ 3 (mod 4) and ≥ 7"
        )));
    }
    make_params(v, (v - 1) / 2, (v - 3) / 4)
}

/// Planar (projective-plane) parameters (n² + n + 1, n + 1, 1).
pub fn planar_params(n: u64) -> ParamSet {
    assert!(n >= 2, "planar_params: order must be at least 2");
    make_params(n * n + n + 1, n + 1, 1).expect("planar parameters always satisfy the identity")
}
