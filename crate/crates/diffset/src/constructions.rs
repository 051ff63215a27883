//! Known difference set families and a brute-force finder. These are the
//! positive side of the artifact: every set built here is verified with
//! is_difference_set, and the battery must never exclude parameters a
//! construction realizes.

use crate::contraction::is_difference_set;
use crate::error::Error;
use crate::numtheory::{factor, is_prime, jacobi};
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownFamilyTag {
    QrPrime,
    TwinPrime,
    MersenneMseq,
    Singer,
    BruteForce,
}

impl std::fmt::Display for KnownFamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KnownFamilyTag::QrPrime => "qr_prime",
            KnownFamilyTag::TwinPrime => "twin_prime",
            KnownFamilyTag::MersenneMseq => "mersenne_mseq",
            KnownFamilyTag::Singer => "singer",
            KnownFamilyTag::BruteForce => "brute_force",
        };
        f.write_str(s)
    }
}

fn verify(set: Vec<u64>, v: u64, k: u64, lambda: u64, what: &str) -> Result<Vec<u64>, Error> {
    if set.len() as u64 != k || !is_difference_set(&set, v, lambda) {
        return Err(Error::Soundness(format!(
            "{what} did not produce a ({v},{k},{lambda}) difference set"
        )));
    }
    Ok(set)
}

/// Quadratic residue difference set: the nonzero squares mod a prime
/// p ≡ 3 (mod 4), a (p, (p−1)/2, (p−3)/4) set.
pub fn qr_set(p: u64) -> Result<Vec<u64>, Error> {
    if !is_prime(p) || p % 4 != 3 || p < 7 {
        return Err(Error::Domain(format!(
            "qr_set: {p} must be a prime ≡ 3 (mod 4), at least 7"
        )));
    }
    let mut set: Vec<u64> = (1..p).map(|x| x * x % p).collect();
    set.sort_unstable();
    set.dedup();
    verify(set, p, (p - 1) / 2, (p - 3) / 4, "qr_set")
}

/// Twin-prime difference set on v = p(p+2): the multiples of p+2 together
/// with the residues whose quadratic characters mod p and mod p+2 agree
/// (and are nonzero).
pub fn twin_prime_set(p: u64) -> Result<Vec<u64>, Error> {
    let q = p + 2;
    if !is_prime(p) || !is_prime(q) {
        return Err(Error::Domain(format!(
            "twin_prime_set: {p} and {q} must both be prime"
        )));
    }
    let v = p * q;
    let set: Vec<u64> = (0..v)
        .filter(|&x| x % q == 0 || jacobi((x % p) as i64, p) * jacobi((x % q) as i64, q) == 1)
        .collect();
    verify(set, v, (v - 1) / 2, (v - 3) / 4, "twin_prime_set")
}

/// Arithmetic in GF(q³) as polynomials over GF(q) modulo an irreducible
/// cubic, coefficients little-endian.
struct CubicField {
    q: u64,
    /// x³ ≡ r2·x² + r1·x + r0 (reduction row).
    reduction: [u64; 3],
}

impl CubicField {
    fn new(q: u64) -> Self {
        // A cubic with no root in GF(q) is irreducible. Scan monic
        // x³ + ax² + bx + c deterministically.
        for a in 0..q {
            for b in 0..q {
                for c in 1..q {
                    let has_root = (0..q).any(|x| {
                        (((x * x % q) * x + a * (x * x % q) + b * x + c) % q) == 0
                    });
                    if !has_root {
                        // x³ = -(a x² + b x + c)
                        let neg = |y: u64| (q - y % q) % q;
                        return Self {
                            q,
                            reduction: [neg(c), neg(b), neg(a)],
                        };
                    }
                }
            }
        }
        unreachable!("irreducible cubics exist over every prime field");
    }

    fn mul(&self, u: [u64; 3], w: [u64; 3]) -> [u64; 3] {
        let q = self.q;
        let mut prod = [0u64; 5];
        for (i, &ui) in u.iter().enumerate() {
            for (j, &wj) in w.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ui * wj) % q;
            }
        }
        // Fold degrees 4 and 3 down through x³ = r2 x² + r1 x + r0.
        for deg in (3..5).rev() {
            let coeff = prod[deg];
            if coeff == 0 {
                continue;
            }
            prod[deg] = 0;
            for (k, &r) in self.reduction.iter().enumerate() {
                prod[deg - 3 + k] = (prod[deg - 3 + k] + coeff * r) % q;
            }
        }
        [prod[0], prod[1], prod[2]]
    }

    fn pow(&self, base: [u64; 3], mut e: u64) -> [u64; 3] {
        let mut acc = [1, 0, 0];
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

/// Singer difference set of a cyclic projective plane of prime order q:
/// indices i with gᶦ in a fixed 2-dimensional subspace of GF(q³), taken
/// mod v = q² + q + 1. A (v, q+1, 1) set.
pub fn singer_set(q: u64) -> Result<Vec<u64>, Error> {
    if !is_prime(q) || q > 50 {
        return Err(Error::Domain(format!(
            "singer_set: {q} must be a prime at most 50"
        )));
    }
    let field = CubicField::new(q);
    let group_order = q * q * q - 1;
    let order_primes: Vec<u64> = factor(group_order).primes().collect();
    // First primitive element in coefficient order.
    let mut generator = None;
    'candidates: for c2 in 0..q {
        for c1 in 0..q {
            for c0 in 0..q {
                let g = [c0, c1, c2];
                if g == [0, 0, 0] {
                    continue;
                }
                if order_primes
                    .iter()
                    .all(|&r| field.pow(g, group_order / r) != [1, 0, 0])
                {
                    generator = Some(g);
                    break 'candidates;
                }
            }
        }
    }
    let g = generator.expect("GF(q³) has a primitive element");
    let v = q * q + q + 1;
    // Scalars are ⟨g^v⟩, so membership in the subspace spanned by {1, x}
    // is constant on residue classes of the exponent mod v.
    let mut set = Vec::with_capacity(q as usize + 1);
    let mut power = [1u64, 0, 0];
    for i in 0..v {
        if power[2] == 0 {
            set.push(i);
        }
        power = field.mul(power, g);
    }
    verify(set, v, q + 1, 1, "singer_set")
}

/// Primitive binary recurrences for m = 3..13, as the exponents of the
/// middle terms of x^m + … + 1. Each table entry is validated at run time
/// by the period and difference-set checks in mseq_set.
const MSEQ_TAPS: [(u32, &[u32]); 11] = [
    (3, &[1]),
    (4, &[1]),
    (5, &[2]),
    (6, &[1]),
    (7, &[1]),
    (8, &[4, 3, 2]),
    (9, &[4]),
    (10, &[3]),
    (11, &[2]),
    (12, &[6, 4, 1]),
    (13, &[4, 3, 1]),
];

/// m-sequence difference set: one period of a maximal-length binary
/// recurrence has 2^{m−1} ones and 2^{m−1}−1 zeros, and both supports are
/// difference sets; the zero positions give the small-k representative,
/// a (2^m−1, 2^{m−1}−1, 2^{m−2}−1) set.
pub fn mseq_set(m: u32) -> Result<Vec<u64>, Error> {
    let taps = MSEQ_TAPS
        .iter()
        .find(|&&(deg, _)| deg == m)
        .map(|&(_, taps)| taps)
        .ok_or_else(|| Error::Domain(format!("mseq_set: m = {m} must be in [3, 13]")))?;
    let v = (1u64 << m) - 1;
    let mut state = vec![1u8; m as usize];
    let initial = state.clone();
    let mut set = Vec::new();
    for i in 0..v {
        if state[0] == 0 {
            set.push(i);
        }
        // s_{t+m} = s_t + Σ s_{t+tap} over GF(2)
        let mut next = state[0];
        for &tap in taps {
            next ^= state[tap as usize];
        }
        state.rotate_left(1);
        *state.last_mut().unwrap() = next;
    }
    if state != initial {
        return Err(Error::Soundness(format!(
            "mseq_set: tap table entry for m = {m} does not have period 2^m − 1"
        )));
    }
    verify(set, v, (1 << (m - 1)) - 1, (1 << (m - 2)) - 1, "mseq_set")
}

/// Exhaustive backtracking search for (v, k, λ) difference sets containing
/// 0 (every difference set has a translate through 0). Prunes on any
/// difference count exceeding λ; reaching size k forces all counts equal.
/// Returns up to `limit` solutions.
pub fn brute_force_search(v: u64, k: u64, lambda: u64, limit: usize) -> Vec<Vec<u64>> {
    assert!(v <= 60, "brute_force_search is exponential; v must be ≤ 60");
    if k == 0 || k > v || limit == 0 {
        return Vec::new();
    }
    // The counting identity is forced by any difference set, and it is what
    // lets the search accept a full set the moment no count exceeds λ.
    if lambda * (v - 1) != k * (k - 1) {
        return Vec::new();
    }
    let v = v as usize;
    let k = k as usize;
    let mut found = Vec::new();
    let mut counts = vec![0u64; v];
    let mut chosen = vec![0usize];
    search(v, k, lambda, limit, &mut chosen, &mut counts, &mut found);
    found
}

fn search(
    v: usize,
    k: usize,
    lambda: u64,
    limit: usize,
    chosen: &mut Vec<usize>,
    counts: &mut [u64],
    found: &mut Vec<Vec<u64>>,
) {
    if found.len() >= limit {
        return;
    }
    if chosen.len() == k {
        // Counts never exceeded λ and their total is forced to λ(v−1),
        // so every residue hits λ exactly: this is a difference set.
        found.push(chosen.iter().map(|&x| x as u64).collect());
        return;
    }
    let needed = k - chosen.len();
    let start = chosen.last().copied().unwrap_or(0) + 1;
    let mut touched: Vec<usize> = Vec::with_capacity(2 * chosen.len());
    for e in start..v {
        if v - e < needed {
            break;
        }
        touched.clear();
        let mut ok = true;
        'fill: for &s in chosen.iter() {
            for d in [(e - s) % v, (v + s - e) % v] {
                counts[d] += 1;
                touched.push(d);
                if counts[d] > lambda {
                    ok = false;
                    break 'fill;
                }
            }
        }
        if ok {
            chosen.push(e);
            search(v, k, lambda, limit, chosen, counts, found);
            chosen.pop();
        }
        for &d in &touched {
            counts[d] -= 1;
        }
        if found.len() >= limit {
            return;
        }
    }
}

/// Match a parameter set against the known families (a knowledge lookup,
/// not a construction; Singer covers every prime-power order).
pub fn known_family(ps: ParamSet) -> Option<KnownFamilyTag> {
    let hadamard_shape =
        ps.v % 4 == 3 && ps.k == (ps.v - 1) / 2 && ps.lambda == (ps.v - 3) / 4;
    if hadamard_shape {
        if is_prime(ps.v) {
            return Some(KnownFamilyTag::QrPrime);
        }
        let p = (ps.v + 1).isqrt() - 1;
        if p * (p + 2) == ps.v && is_prime(p) && is_prime(p + 2) {
            return Some(KnownFamilyTag::TwinPrime);
        }
        if (ps.v + 1).is_power_of_two() {
            return Some(KnownFamilyTag::MersenneMseq);
        }
    }
    if ps.lambda == 1 && ps.v == ps.n * ps.n + ps.n + 1 && factor(ps.n).factors.len() == 1 {
        return Some(KnownFamilyTag::Singer);
    }
    None
}
