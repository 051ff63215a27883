//! Prime Power Conjecture verification for cyclic projective planes.
//!
//! For a planar order n (λ = 1, v = n² + n + 1), every prime divisor of n
//! is a numerical multiplier, so products of those primes form a multiplier
//! group inside the units mod v. If two distinct multiplier pairs share a
//! difference d = t₁ − t₂ ≡ t₃ − t₄ (mod v), then v must divide
//! lcm(t₁ − t₂, t₁ − t₃); a quadruple violating that divisibility proves no
//! plane of order n exists. The scan runs the cheap battery tests first and
//! falls back to this collision search with an escalating difference bound.

use crate::battery::{run_battery, BatteryConfig, Certificate, TestName};
use crate::error::Error;
use crate::numtheory::{factor, gcd, lcm_u128, mul_mod};
use crate::params::{planar_params, ParamSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// The subgroup of units mod v generated by the prime divisors of n, with
/// per-element generator exponents kept for witness re-verification.
#[derive(Debug, Clone)]
pub struct MultiplierGroup {
    pub v: u64,
    pub generators: Vec<u64>,
    /// Element values, sorted ascending.
    pub elements: Vec<u64>,
    /// exponents[i][j] is the power of generators[j] composing elements[i].
    pub exponents: Vec<Vec<u32>>,
    /// False when enumeration stopped at the cap; the elements then form a
    /// deterministic subset, which is still sound for collision search.
    pub complete: bool,
}

impl MultiplierGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Enumerate (a deterministic prefix of) the multiplier group for order n
/// mod v. Rejects a prime of n dividing v.
pub fn multiplier_group(n: u64, v: u64, cap: usize) -> Result<MultiplierGroup, Error> {
    let generators: Vec<u64> = factor(n).primes().collect();
    for &p in &generators {
        if gcd(p, v) != 1 {
            return Err(Error::NotCoprime { a: p, m: v });
        }
    }
    // Subgroup closure, one generator at a time: extend the current set H
    // by cosets H·g^j until g^j falls back into H.
    let mut values: Vec<u64> = vec![1];
    let mut exps: Vec<Vec<u32>> = vec![vec![0; generators.len()]];
    let mut member: HashSet<u64> = values.iter().copied().collect();
    let mut complete = true;
    'generators: for (gi, &g) in generators.iter().enumerate() {
        let g = g % v;
        let base_len = values.len();
        let mut gj = 1u64;
        for j in 1u32.. {
            gj = mul_mod(gj, g, v);
            if member.contains(&gj) {
                break;
            }
            for idx in 0..base_len {
                let value = mul_mod(values[idx], gj, v);
                if member.insert(value) {
                    let mut e = exps[idx].clone();
                    e[gi] += j;
                    values.push(value);
                    exps.push(e);
                }
                if values.len() >= cap {
                    complete = false;
                    break 'generators;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by_key(|&i| values[i]);
    Ok(MultiplierGroup {
        v,
        generators,
        elements: order.iter().map(|&i| values[i]).collect(),
        exponents: order.iter().map(|&i| exps[i].clone()).collect(),
        complete,
    })
}

/// An Evans–Mann contradiction: four multipliers with
/// t₁ − t₂ ≡ t₃ − t₄ ≡ d (mod v), t₁ ≠ t₃, whose lcm(d, t₁ − t₃) is not
/// divisible by v. Differences are least positive residues. Generator
/// exponents for each tᵢ make group membership re-checkable in O(log).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionWitness {
    pub n: u64,
    pub v: u64,
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
    pub d: u64,
    pub d2: u64,
    pub lcm_value: u64,
    pub generators: Vec<u64>,
    pub exponents: Vec<Vec<u32>>,
}

/// Tuning knobs for the collision search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvansMannConfig {
    /// First difference bound tried; doubled on each escalation.
    pub initial_bound: u64,
    /// Escalation stops once the bound exceeds this.
    pub max_bound: u64,
    /// Maximum pairs examined per search call.
    pub pair_budget: u64,
    /// Collision map capacity (first writer wins; later differences are
    /// not stored once full, but still collide against stored ones).
    pub map_capacity: usize,
    /// Maximum group elements enumerated.
    pub group_cap: usize,
}

impl Default for EvansMannConfig {
    fn default() -> Self {
        Self {
            initial_bound: 1_000_000,
            max_bound: 1 << 33,
            pair_budget: 20_000_000,
            map_capacity: 1 << 22,
            group_cap: 1 << 18,
        }
    }
}

fn quadruple_check(
    group: &MultiplierGroup,
    n: u64,
    v: u64,
    d: u64,
    (t1, i1): (u64, usize),
    (t3, i3): (u64, usize),
    stored_t2: u64,
    stored_i2: usize,
    t4: u64,
    i4: usize,
) -> Option<ContradictionWitness> {
    if t1 == t3 {
        return None;
    }
    let d2 = (t1 + v - t3) % v;
    debug_assert!(d2 > 0);
    let lcm = lcm_u128(d as u128, d2 as u128);
    if lcm % v as u128 == 0 {
        return None;
    }
    let lcm_value = u64::try_from(lcm).ok()?;
    Some(ContradictionWitness {
        n,
        v,
        t1,
        t2: stored_t2,
        t3,
        t4,
        d,
        d2,
        lcm_value,
        generators: group.generators.clone(),
        exponents: vec![
            group.exponents[i1].clone(),
            group.exponents[stored_i2].clone(),
            group.exponents[i3].clone(),
            group.exponents[i4].clone(),
        ],
    })
}

/// Search for an Evans–Mann contradiction for non-prime-power order n:
/// enumerate multiplier pairs whose least-positive-residue difference is
/// below `difference_bound`, hash the differences, and on a collision test
/// the lcm divisibility. Returns None for prime powers (consistent with
/// the conjecture, skipped), on an exhausted budget, or if no violating
/// quadruple shows up.
pub fn evans_mann_search(
    n: u64,
    difference_bound: u64,
    config: &EvansMannConfig,
) -> Result<Option<ContradictionWitness>, Error> {
    if factor(n).factors.len() == 1 {
        return Ok(None);
    }
    let v = planar_params(n).v;
    let group = multiplier_group(n, v, config.group_cap)?;
    let elems = &group.elements;
    let len = elems.len();
    // difference -> (t1, t2, index of t1, index of t2), first writer wins
    let mut seen: HashMap<u64, (u64, u64, usize, usize)> = HashMap::new();
    let mut pairs_examined = 0u64;

    let consider = |t1: u64,
                        i1: usize,
                        t2: u64,
                        i2: usize,
                        seen: &mut HashMap<u64, (u64, u64, usize, usize)>|
     -> Option<ContradictionWitness> {
        let d = (t1 + v - t2) % v;
        debug_assert!(d > 0 && d < difference_bound);
        if let Some(&(s1, s2, si1, si2)) = seen.get(&d) {
            if (s1, s2) != (t1, t2) {
                if let Some(witness) =
                    quadruple_check(&group, n, v, d, (s1, si1), (t1, i1), s2, si2, t2, i2)
                {
                    return Some(witness);
                }
            }
        } else if seen.len() < config.map_capacity {
            seen.insert(d, (t1, t2, i1, i2));
        }
        None
    };

    // Sorted-neighbor pairs: t1 = elems[j] > t2 = elems[i], difference
    // taken directly.
    for i in 0..len {
        for j in (i + 1)..len {
            let diff = elems[j] - elems[i];
            if diff >= difference_bound {
                break;
            }
            pairs_examined += 1;
            if pairs_examined > config.pair_budget {
                return Ok(None);
            }
            if let Some(w) = consider(elems[j], j, elems[i], i, &mut seen) {
                return Ok(Some(w));
            }
        }
    }
    // Wrap-around pairs: t1 small, t2 large, difference t1 + v − t2.
    for i in 0..len {
        if elems[i] + 1 >= difference_bound {
            break;
        }
        for j in (i + 1..len).rev() {
            let diff = elems[i] + v - elems[j];
            if diff >= difference_bound || j <= i {
                break;
            }
            pairs_examined += 1;
            if pairs_examined > config.pair_budget {
                return Ok(None);
            }
            if let Some(w) = consider(elems[i], i, elems[j], j, &mut seen) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// How one order was settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PpcOutcome {
    Battery {
        by: TestName,
        certificate: Certificate,
    },
    EvansMann {
        witness: Box<ContradictionWitness>,
        bound: u64,
    },
    Survivor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpcRow {
    pub n: u64,
    pub v: u64,
    pub outcome: PpcOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpcReport {
    pub n_min: u64,
    pub n_max: u64,
    pub rows: Vec<PpcRow>,
}

impl PpcReport {
    pub fn survivors(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| matches!(r.outcome, PpcOutcome::Survivor))
            .map(|r| r.n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpcConfig {
    pub battery: BatteryConfig,
    pub evans_mann: EvansMannConfig,
}

impl Default for PpcConfig {
    fn default() -> Self {
        // Schutzenberger and LMS can never apply to planar parameters
        // (v is odd, gcd(n, v) = 1), and the Arasu multiplier check is too
        // expensive at v ≈ n²; BCR, Mann and the field-descent bound carry
        // the battery here, cheapest first (BCR needs no divisor scan).
        Self {
            battery: BatteryConfig {
                tests: vec![TestName::Bcr, TestName::Mann, TestName::SchmidtBound],
                short_circuit: true,
                contraction: None,
            },
            evans_mann: EvansMannConfig::default(),
        }
    }
}

/// Settle one non-prime-power order: battery first, then the collision
/// search with the bound doubling from the configured start.
pub fn settle_order(n: u64, config: &PpcConfig) -> Result<PpcRow, Error> {
    let ps: ParamSet = planar_params(n);
    let certificate = run_battery(ps, &config.battery);
    if let Some(by) = certificate.excluding_test() {
        return Ok(PpcRow {
            n,
            v: ps.v,
            outcome: PpcOutcome::Battery { by, certificate },
        });
    }
    let mut bound = config.evans_mann.initial_bound.min(ps.v);
    loop {
        if let Some(witness) = evans_mann_search(n, bound, &config.evans_mann)? {
            return Ok(PpcRow {
                n,
                v: ps.v,
                outcome: PpcOutcome::EvansMann {
                    witness: Box::new(witness),
                    bound,
                },
            });
        }
        if bound >= ps.v || bound >= config.evans_mann.max_bound {
            return Ok(PpcRow {
                n,
                v: ps.v,
                outcome: PpcOutcome::Survivor,
            });
        }
        bound = (bound * 2).min(ps.v);
    }
}

/// Scan every non-prime-power order in [n_min, n_max]; prime powers are
/// consistent with the conjecture and skipped. Orders are settled in
/// parallel and reported deterministically by n.
pub fn ppc_scan(n_min: u64, n_max: u64, config: &PpcConfig) -> Result<PpcReport, Error> {
    assert!(2 <= n_min && n_min <= n_max);
    let orders: Vec<u64> = (n_min..=n_max)
        .filter(|&n| factor(n).factors.len() > 1)
        .collect();
    let mut rows = orders
        .into_par_iter()
        .map(|n| settle_order(n, config))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(PpcReport {
        n_min,
        n_max,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_examples() {
        let g = multiplier_group(10, 111, 1 << 16).unwrap();
        assert_eq!(g.generators, vec![2, 5]);
        assert!(g.complete);
        // ⟨2⟩ alone has order 36 = ord(2, 111)
        assert_eq!(crate::numtheory::mult_order(2, 111).unwrap(), 36);
        // every element is a unit and matches its exponent vector
        for (value, exps) in g.elements.iter().zip(&g.exponents) {
            assert_eq!(gcd(*value, 111), 1);
            let mut acc = 1u64;
            for (&gen, &e) in g.generators.iter().zip(exps) {
                for _ in 0..e {
                    acc = mul_mod(acc, gen, 111);
                }
            }
            assert_eq!(acc, *value);
        }

        let g = multiplier_group(6, 43, 1 << 16).unwrap();
        assert_eq!(g.generators, vec![2, 3]);
    }

    #[test]
    fn group_rejects_shared_factor() {
        assert!(multiplier_group(10, 25, 1 << 16).is_err());
    }

    #[test]
    fn evans_mann_finds_witness_for_10() {
        let config = EvansMannConfig::default();
        let w = evans_mann_search(10, 111, &config).unwrap();
        let w = w.expect("order 10 must be eliminated by a collision");
        assert_eq!(w.v, 111);
        assert_eq!((w.t1 + w.v - w.t2) % w.v, w.d);
        assert_eq!((w.t3 + w.v - w.t4) % w.v, w.d);
        assert_ne!(w.t1, w.t3);
        assert_ne!(w.lcm_value % w.v, 0);
    }

    #[test]
    fn evans_mann_skips_prime_powers() {
        let config = EvansMannConfig::default();
        assert!(evans_mann_search(9, 1_000_000, &config).unwrap().is_none());
        assert!(evans_mann_search(8, 1_000_000, &config).unwrap().is_none());
    }

    #[test]
    fn evans_mann_deterministic() {
        let config = EvansMannConfig::default();
        let a = evans_mann_search(10, 111, &config).unwrap();
        let b = evans_mann_search(10, 111, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ppc_small_range() {
        let report = ppc_scan(2, 8, &PpcConfig::default()).unwrap();
        // 6 is the only non-prime-power in [2, 8]; BCR kills (43,7,1).
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].n, 6);
        match &report.rows[0].outcome {
            PpcOutcome::Battery { by, .. } => assert_eq!(*by, TestName::Bcr),
            other => panic!("expected battery elimination, got {other:?}"),
        }
    }

    #[test]
    fn ppc_to_100_no_survivors() {
        let report = ppc_scan(2, 100, &PpcConfig::default()).unwrap();
        assert!(report.survivors().is_empty(), "survivors: {:?}", report.survivors());
        // no prime power appears in the report at all
        assert!(report
            .rows
            .iter()
            .all(|r| factor(r.n).factors.len() > 1));
    }
}
