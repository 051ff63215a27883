//! w-multiplier detection and orbit decomposition of residues mod w under
//! multiplication by t.
//!
//! An integer t coprime to w is certified as a w-multiplier of a design of
//! order n = ∏ pᵢ^αᵢ when every prime pᵢ has some power pᵢʲ ≡ t (mod w);
//! equivalently t lies in the intersection of the subgroups ⟨pᵢ⟩ of units
//! mod w. Multipliers force the contracted coefficients to be constant on
//! orbits of x ↦ t·x, which is what the contraction solver exploits.

use crate::error::Error;
use crate::numtheory::{gcd, mul_mod, mult_order, Factorization};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Orbits of x ↦ t·x (mod w) on all residues {0, …, w−1}.
///
/// Orbits are listed by minimum element ascending, and each orbit's
/// residues are sorted ascending, so the structure is canonical for a
/// given (t, w).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitStructure {
    pub w: u64,
    pub t: u64,
    pub orbits: Vec<Vec<u64>>,
    pub size_multiset: BTreeMap<u64, u64>,
}

impl OrbitStructure {
    /// Orbit sizes as a compact exponent string, e.g. "1^1 3^4 5^2 15^8".
    pub fn size_signature(&self) -> String {
        self.size_multiset
            .iter()
            .map(|(size, count)| format!("{size}^{count}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Decompose {0, …, w−1} into orbits under multiplication by t.
pub fn orbits(t: u64, w: u64) -> Result<OrbitStructure, Error> {
    if w < 1 {
        return Err(Error::Domain("orbits: modulus must be positive".into()));
    }
    let t = t % w;
    if gcd(t, w) != 1 {
        return Err(Error::NotCoprime { a: t, m: w });
    }
    let mut seen = vec![false; w as usize];
    let mut orbit_list = Vec::new();
    let mut size_multiset = BTreeMap::new();
    for start in 0..w {
        if seen[start as usize] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start as usize] = true;
        let mut x = mul_mod(start, t, w);
        while x != start {
            seen[x as usize] = true;
            orbit.push(x);
            x = mul_mod(x, t, w);
        }
        orbit.sort_unstable();
        *size_multiset.entry(orbit.len() as u64).or_insert(0) += 1;
        orbit_list.push(orbit);
    }
    Ok(OrbitStructure {
        w,
        t,
        orbits: orbit_list,
        size_multiset,
    })
}

/// Whether some power of `a` is ≡ target (mod m), i.e. target ∈ ⟨a⟩.
fn power_reaches(a: u64, target: u64, m: u64) -> Result<bool, Error> {
    let ord = mult_order(a, m)?;
    let mut x = 1u64;
    for _ in 0..ord {
        x = mul_mod(x, a, m);
        if x == target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Decide whether t is a w-multiplier for order n (given factored):
/// every prime pᵢ of n must be coprime to w and have pᵢʲ ≡ t (mod w)
/// for some j. Rejects gcd(t, w) ≠ 1.
pub fn is_w_multiplier(t: u64, w: u64, n_fact: &Factorization) -> Result<bool, Error> {
    let t = t % w;
    if gcd(t, w) != 1 {
        return Err(Error::NotCoprime { a: t, m: w });
    }
    for p in n_fact.primes() {
        if gcd(p, w) != 1 {
            return Ok(false);
        }
        if !power_reaches(p % w, t, w)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest t ≥ 2 (t < w) certified as a w-multiplier, with its orbit
/// structure; None when the intersection of the ⟨pᵢ⟩ is trivial.
pub fn smallest_w_multiplier(
    w: u64,
    n_fact: &Factorization,
) -> Result<Option<(u64, OrbitStructure)>, Error> {
    if w < 2 {
        return Err(Error::Domain(
            "smallest_w_multiplier: modulus must be at least 2".into(),
        ));
    }
    // Intersection of the cyclic subgroups generated by the primes of n.
    let mut common: Option<Vec<bool>> = None;
    for p in n_fact.primes() {
        if gcd(p, w) != 1 {
            return Ok(None);
        }
        let ord = mult_order(p % w, w)?;
        let mut member = vec![false; w as usize];
        let mut x = 1u64;
        member[1] = true;
        for _ in 1..ord {
            x = mul_mod(x, p, w);
            member[x as usize] = true;
        }
        common = Some(match common {
            None => member,
            Some(prev) => prev
                .iter()
                .zip(member.iter())
                .map(|(&a, &b)| a && b)
                .collect(),
        });
    }
    let common = match common {
        Some(c) => c,
        // n = 1 has no primes; every unit is vacuously a multiplier.
        None => {
            let mut all = vec![false; w as usize];
            for (x, slot) in all.iter_mut().enumerate() {
                *slot = gcd(x as u64, w) == 1;
            }
            all
        }
    };
    for t in 2..w {
        if common[t as usize] {
            return Ok(Some((t, orbits(t, w)?)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::factor;
    use proptest::prelude::*;

    #[test]
    fn w_multiplier_examples() {
        assert!(is_w_multiplier(3, 143, &factor(81)).unwrap());
        assert!(is_w_multiplier(2, 7, &factor(3)).unwrap());
        assert!(is_w_multiplier(2, 235, &factor(144)).unwrap());
        assert!(is_w_multiplier(16, 303, &factor(76)).unwrap());
        // 2 is not in ⟨3⟩ mod 143
        assert!(!is_w_multiplier(2, 143, &factor(81)).unwrap());
        // prime of n divides w
        assert!(!is_w_multiplier(2, 429, &factor(81)).unwrap());
        // gcd(t, w) must be 1
        assert!(is_w_multiplier(33, 429, &factor(81)).is_err());
    }

    #[test]
    fn smallest_multiplier_examples() {
        let (t, os) = smallest_w_multiplier(143, &factor(81)).unwrap().unwrap();
        assert_eq!(t, 3);
        assert_eq!(os.size_signature(), "1^1 3^4 5^2 15^8");

        let (t, os) = smallest_w_multiplier(303, &factor(76)).unwrap().unwrap();
        assert_eq!(t, 16);
        assert_eq!(os.size_signature(), "1^3 25^12");

        let (t, _) = smallest_w_multiplier(7, &factor(3)).unwrap().unwrap();
        assert_eq!(t, 2);
    }

    #[test]
    fn orbit_examples() {
        let os = orbits(3, 143).unwrap();
        let expected: BTreeMap<u64, u64> = [(1, 1), (3, 4), (5, 2), (15, 8)].into();
        assert_eq!(os.size_multiset, expected);

        let os = orbits(16, 303).unwrap();
        let expected: BTreeMap<u64, u64> = [(1, 3), (25, 12)].into();
        assert_eq!(os.size_multiset, expected);

        let os = orbits(1, 5).unwrap();
        assert_eq!(os.orbits.len(), 5);
        assert!(os.orbits.iter().all(|o| o.len() == 1));
    }

    #[test]
    fn orbit_minima_ascending_and_zero_fixed() {
        let os = orbits(3, 143).unwrap();
        assert_eq!(os.orbits[0], vec![0]);
        let minima: Vec<u64> = os.orbits.iter().map(|o| o[0]).collect();
        let mut sorted = minima.clone();
        sorted.sort_unstable();
        assert_eq!(minima, sorted);
    }

    proptest! {
        #[test]
        fn orbits_partition_and_closed(t in 1u64..500, w in 2u64..500) {
            prop_assume!(gcd(t % w, w) == 1 && t % w != 0);
            let os = orbits(t, w).unwrap();
            let mut covered = vec![0u32; w as usize];
            for orbit in &os.orbits {
                for &x in orbit {
                    covered[x as usize] += 1;
                    let image = mul_mod(x, t % w, w);
                    prop_assert!(orbit.binary_search(&image).is_ok(),
                        "orbit not closed under t");
                }
            }
            prop_assert!(covered.iter().all(|&c| c == 1), "orbits must partition Z_w");
            let total: u64 = os.size_multiset.iter().map(|(s, c)| s * c).sum();
            prop_assert_eq!(total, w);
        }

        #[test]
        fn orbit_sizes_divide_order(t in 2u64..400, w in 3u64..400) {
            prop_assume!(gcd(t % w, w) == 1 && t % w > 1);
            let ord = mult_order(t, w).unwrap();
            let os = orbits(t, w).unwrap();
            for (&size, _) in &os.size_multiset {
                prop_assert_eq!(ord % size, 0, "orbit size must divide ord(t, w)");
            }
        }

        #[test]
        fn size_multiset_invariant_under_coprime_power(t in 2u64..300, w in 3u64..300, e in 1u64..40) {
            prop_assume!(gcd(t % w, w) == 1 && t % w > 1);
            let ord = mult_order(t, w).unwrap();
            prop_assume!(gcd(e, ord) == 1);
            let te = crate::numtheory::pow_mod(t, e, w);
            let a = orbits(t, w).unwrap();
            let b = orbits(te, w).unwrap();
            prop_assert_eq!(a.size_multiset, b.size_multiset);
        }
    }
}
