//! The necessary-condition tests, each returning a verdict with a witness
//! sufficient to re-verify the exclusion by direct arithmetic, plus the
//! orchestrator that runs them cheapest-first over a parameter set.

use crate::constructions::KnownFamilyTag;
use crate::error::Error;
use crate::numtheory::{
    self, factor, gcd, is_padic_unit_square, is_perfect_square, mult_order, pow_mod,
    ternary_failing_place, totient, Place,
};
use crate::params::ParamSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestName {
    Schutzenberger,
    Lms,
    Mann,
    Bcr,
    SchmidtBound,
    Arasu,
    Contraction,
}

impl std::fmt::Display for TestName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TestName::Schutzenberger => "schutzenberger",
            TestName::Lms => "lms",
            TestName::Mann => "mann",
            TestName::Bcr => "bcr",
            TestName::SchmidtBound => "schmidt_bound",
            TestName::Arasu => "arasu",
            TestName::Contraction => "contraction",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Excluded,
    Pass,
    Inapplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Excluded => "EXCLUDED",
            Verdict::Pass => "PASS",
            Verdict::Inapplicable => "INAPPLICABLE",
        };
        f.write_str(s)
    }
}

/// Test-specific evidence. An EXCLUDED result always carries enough here to
/// re-verify the exclusion independently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Schutzenberger {
        n: u64,
    },
    Bcr {
        place: Place,
    },
    Mann {
        w: u64,
        p: u64,
        j: u64,
    },
    Lms {
        p: u64,
        a: u32,
        g: u64,
    },
    Arasu {
        p: u64,
        w: u64,
        u: i64,
    },
    SchmidtBound {
        f: u64,
    },
    Contraction {
        w: u64,
        t: u64,
        orbit_sizes: String,
        count45: u64,
        survivors: u64,
        completed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestName,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl TestResult {
    fn new(test: TestName, verdict: Verdict, witness: Option<Witness>) -> Self {
        Self {
            test,
            verdict,
            witness,
        }
    }
}

/// Final status of one parameter set. Exists is only assigned by the
/// constructions lookup, never by the tests themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Excluded { by: TestName },
    Open,
    Exists { family: KnownFamilyTag },
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Excluded { by } => write!(f, "excluded:{by}"),
            Status::Open => write!(f, "open"),
            Status::Exists { family } => write!(f, "exists:{family}"),
        }
    }
}

/// Ordered proof-of-work for one parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: ParamSet,
    pub results: Vec<TestResult>,
    pub status: Status,
}

impl Certificate {
    pub fn excluding_test(&self) -> Option<TestName> {
        match self.status {
            Status::Excluded { by } => Some(by),
            _ => None,
        }
    }
}

/// If v is even, n must be a perfect square.
pub fn test_schutzenberger(ps: ParamSet) -> TestResult {
    if ps.v % 2 == 1 {
        return TestResult::new(TestName::Schutzenberger, Verdict::Inapplicable, None);
    }
    if is_perfect_square(ps.n) {
        TestResult::new(TestName::Schutzenberger, Verdict::Pass, None)
    } else {
        TestResult::new(
            TestName::Schutzenberger,
            Verdict::Excluded,
            Some(Witness::Schutzenberger { n: ps.n }),
        )
    }
}

/// For odd v, nX² + (−1)^((v−1)/2) λY² = Z² must have a nontrivial integer
/// solution; decided place by place through Hilbert symbols.
pub fn test_bcr(ps: ParamSet) -> TestResult {
    if ps.v % 2 == 0 {
        return TestResult::new(TestName::Bcr, Verdict::Inapplicable, None);
    }
    let sign: i64 = if ((ps.v - 1) / 2) % 2 == 1 { -1 } else { 1 };
    let a = ps.n as i64;
    let b = sign * ps.lambda as i64;
    match ternary_failing_place(a, b) {
        Some(place) => TestResult::new(
            TestName::Bcr,
            Verdict::Excluded,
            Some(Witness::Bcr { place }),
        ),
        None => TestResult::new(TestName::Bcr, Verdict::Pass, None),
    }
}

/// Mann: a divisor w > 1 of v and a prime p exactly dividing n with
/// p^j ≡ −1 (mod w) rule the parameters out. Divisors and primes are
/// scanned in descending order; j is the least power reaching −1.
pub fn test_mann(ps: ParamSet) -> TestResult {
    let n_fact = factor(ps.n);
    let mut exact: Vec<u64> = n_fact.primes_exactly_once().collect();
    if exact.is_empty() {
        return TestResult::new(TestName::Mann, Verdict::Pass, None);
    }
    exact.reverse();
    let mut divisors = factor(ps.v).divisors();
    divisors.reverse();
    for &w in divisors.iter().filter(|&&w| w > 1) {
        for &p in &exact {
            if gcd(p, w) != 1 {
                continue;
            }
            if w == 2 {
                // −1 ≡ 1 (mod 2), so any power of an odd prime reaches it.
                return TestResult::new(
                    TestName::Mann,
                    Verdict::Excluded,
                    Some(Witness::Mann { w, p, j: 1 }),
                );
            }
            let ord = mult_order(p % w, w).expect("coprimality checked");
            if ord % 2 == 0 && pow_mod(p, ord / 2, w) == w - 1 {
                return TestResult::new(
                    TestName::Mann,
                    Verdict::Excluded,
                    Some(Witness::Mann { w, p, j: ord / 2 }),
                );
            }
        }
    }
    TestResult::new(TestName::Mann, Verdict::Pass, None)
}

/// Leung–Ma–Schmidt: no cyclic difference set has order n a power of a
/// prime > 3 with gcd(n, v) > 1.
pub fn test_lms(ps: ParamSet) -> TestResult {
    let n_fact = factor(ps.n);
    if n_fact.factors.len() == 1 {
        let (p, a) = n_fact.factors[0];
        let g = gcd(ps.n, ps.v);
        if p > 3 && g > 1 {
            return TestResult::new(
                TestName::Lms,
                Verdict::Excluded,
                Some(Witness::Lms { p, a, g }),
            );
        }
    }
    TestResult::new(TestName::Lms, Verdict::Inapplicable, None)
}

/// Arasu: with gcd(v,k) = 1, n a nonsquare, and p | n a numerical
/// multiplier coprime to v, the quantity w·v·(−1)^((v/w−1)/2) must be a
/// square in the p-adic integers for every divisor w > 1 of v.
pub fn test_arasu(ps: ParamSet, p: u64, w: u64) -> Result<TestResult, Error> {
    let inapplicable = || TestResult::new(TestName::Arasu, Verdict::Inapplicable, None);
    let n_fact = factor(ps.n);
    if gcd(ps.v, ps.k) != 1
        || n_fact.is_square()
        || ps.n % p != 0
        || gcd(p, ps.v) != 1
        || w < 2
        || ps.v % w != 0
        || (ps.v / w) % 2 == 0
    {
        return Ok(inapplicable());
    }
    if !is_w_multiplier_numerical(p, &n_fact, ps.v)? {
        return Ok(inapplicable());
    }
    let quotient = ps.v / w;
    let sign: i128 = if ((quotient - 1) / 2) % 2 == 1 { -1 } else { 1 };
    let u = sign * (w as i128) * (ps.v as i128);
    // gcd(p, v) = 1 makes u a p-adic unit; no powers of p to strip.
    if is_padic_unit_square(u, p)? {
        Ok(TestResult::new(TestName::Arasu, Verdict::Pass, None))
    } else {
        let u64_fit = i64::try_from(u).map_err(|_| {
            Error::Domain("arasu witness value exceeds the serializable range".into())
        })?;
        Ok(TestResult::new(
            TestName::Arasu,
            Verdict::Excluded,
            Some(Witness::Arasu { p, w, u: u64_fit }),
        ))
    }
}

fn is_w_multiplier_numerical(
    p: u64,
    n_fact: &numtheory::Factorization,
    v: u64,
) -> Result<bool, Error> {
    crate::multipliers::is_w_multiplier(p, v, n_fact)
}

/// Scan all (p, w) pairs for the Arasu test: primes p of n ascending,
/// divisors w of v ascending; first exclusion wins.
pub fn arasu_scan(ps: ParamSet) -> Result<TestResult, Error> {
    let n_fact = factor(ps.n);
    if gcd(ps.v, ps.k) != 1 || n_fact.is_square() {
        return Ok(TestResult::new(
            TestName::Arasu,
            Verdict::Inapplicable,
            None,
        ));
    }
    let divisors = factor(ps.v).divisors();
    let mut any_applicable = false;
    for p in n_fact.primes() {
        if gcd(p, ps.v) != 1 {
            continue;
        }
        if !is_w_multiplier_numerical(p, &n_fact, ps.v)? {
            continue;
        }
        for &w in divisors.iter().filter(|&&w| w > 1) {
            let result = test_arasu(ps, p, w)?;
            match result.verdict {
                Verdict::Excluded => return Ok(result),
                Verdict::Pass => any_applicable = true,
                Verdict::Inapplicable => {}
            }
        }
    }
    if any_applicable {
        Ok(TestResult::new(TestName::Arasu, Verdict::Pass, None))
    } else {
        Ok(TestResult::new(
            TestName::Arasu,
            Verdict::Inapplicable,
            None,
        ))
    }
}

/// One prime entry of the field-descent modulus F(m, n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FEntry {
    pub p: u64,
    pub c: u32,
    pub b: u32,
}

/// The field-descent modulus F(m, n) = ∏ pᵢ^{bᵢ} with its per-prime
/// exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FDescriptor {
    pub m: u64,
    pub n: u64,
    pub entries: Vec<FEntry>,
    pub value: u64,
}

/// F(m, n): for each prime pᵢ^{cᵢ} of m, the least bᵢ in [1, cᵢ] such that
/// every prime q of n satisfies one of
///   (1) q = pᵢ and (pᵢ, bᵢ) ≠ (2, 1),
///   (2) bᵢ = cᵢ,
///   (3) q ≠ pᵢ and q^{ord_{m_q}(q)} ≢ 1 (mod pᵢ^{bᵢ+1}),
/// where m_q = ∏_{pⱼ≠q} pⱼ when m is odd or q = 2, else 4·∏_{pⱼ≠2,q} pⱼ.
/// An undefined order in (3) counts as the condition failing.
pub fn compute_f(m: u64, n: u64) -> FDescriptor {
    assert!(m >= 2 && n >= 2, "compute_f: m, n must be at least 2");
    let m_fact = factor(m);
    let n_primes: Vec<u64> = factor(n).primes().collect();
    let m_odd = m % 2 == 1;

    let m_q = |q: u64| -> u64 {
        if m_odd || q == 2 {
            m_fact.primes().filter(|&p| p != q).product()
        } else {
            4 * m_fact
                .primes()
                .filter(|&p| p != 2 && p != q)
                .product::<u64>()
        }
    };

    let mut entries = Vec::new();
    let mut value = 1u64;
    for &(p, c) in &m_fact.factors {
        let mut chosen = c;
        'search: for b in 1..=c {
            for &q in &n_primes {
                let ok = if q == p {
                    !(p == 2 && b == 1)
                } else if b == c {
                    true
                } else {
                    let mq = m_q(q);
                    if mq <= 1 || gcd(q, mq) != 1 {
                        false
                    } else {
                        let ord = mult_order(q % mq, mq).expect("q coprime to m_q");
                        let modulus = p.pow(b + 1);
                        pow_mod(q % modulus, ord, modulus) != 1
                    }
                };
                let ok = ok || b == c;
                if !ok {
                    continue 'search;
                }
            }
            chosen = b;
            break;
        }
        entries.push(FEntry { p, c, b: chosen });
        value *= p.pow(chosen);
    }
    FDescriptor {
        m,
        n,
        entries,
        value,
    }
}

/// Exact integer comparison behind the field-descent bound: the parameters
/// are excluded when 4·n·φ(F) > F².
pub fn schmidt_excludes(n: u64, f: u64) -> bool {
    let lhs = 4u128 * n as u128 * totient(f) as u128;
    let rhs = f as u128 * f as u128;
    lhs > rhs
}

/// Schmidt's field-descent bound: n ≤ F(v,n)² / (4·φ(F(v,n))), evaluated
/// in integers.
pub fn test_schmidt_bound(ps: ParamSet) -> TestResult {
    let fd = compute_f(ps.v, ps.n);
    if schmidt_excludes(ps.n, fd.value) {
        TestResult::new(
            TestName::SchmidtBound,
            Verdict::Excluded,
            Some(Witness::SchmidtBound { f: fd.value }),
        )
    } else {
        TestResult::new(TestName::SchmidtBound, Verdict::Pass, None)
    }
}

/// Caps for the contraction step inside the battery. The node and filter
/// budgets bound work deterministically (no wall clocks), so equal configs
/// give byte-identical reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionCaps {
    /// Largest contraction modulus attempted.
    pub w_max: u64,
    /// Enumeration node budget per (w, t) attempt.
    pub node_budget: u64,
    /// Autocorrelation pair-operation budget per (w, t) attempt.
    pub filter_ops_budget: u64,
}

impl Default for ContractionCaps {
    fn default() -> Self {
        Self {
            w_max: 1000,
            node_budget: 10_000_000,
            filter_ops_budget: 400_000_000,
        }
    }
}

/// Battery configuration: which tests, in which order, whether to stop at
/// the first exclusion, and the optional contraction stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub tests: Vec<TestName>,
    pub short_circuit: bool,
    pub contraction: Option<ContractionCaps>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            tests: vec![
                TestName::Schutzenberger,
                TestName::Lms,
                TestName::Mann,
                TestName::Bcr,
                TestName::SchmidtBound,
                TestName::Arasu,
            ],
            short_circuit: true,
            contraction: None,
        }
    }
}

impl BatteryConfig {
    /// Default battery plus contraction with default caps.
    pub fn with_contraction() -> Self {
        Self {
            contraction: Some(ContractionCaps::default()),
            ..Self::default()
        }
    }
}

/// Candidate (w, t) pairs for the contraction stage: divisors w of v in
/// descending order (largest contracted modulus first), capped at w_max,
/// with every prime of n coprime to w and a nontrivial smallest
/// w-multiplier.
fn contraction_candidates(ps: ParamSet, w_max: u64) -> Vec<(u64, u64)> {
    let n_fact = factor(ps.n);
    let mut out = Vec::new();
    let mut divisors = factor(ps.v).divisors();
    divisors.reverse();
    for w in divisors {
        if w < 2 || w > w_max {
            continue;
        }
        if n_fact.primes().any(|p| gcd(p, w) != 1) {
            continue;
        }
        if let Ok(Some((t, _))) = crate::multipliers::smallest_w_multiplier(w, &n_fact) {
            out.push((w, t));
        }
    }
    out
}

/// Run the configured battery over one parameter set. Deterministic for a
/// fixed config; short-circuits on the first exclusion unless the config
/// requests full runs.
pub fn run_battery(ps: ParamSet, config: &BatteryConfig) -> Certificate {
    let mut results = Vec::new();
    let mut excluded_by = None;

    for &test in &config.tests {
        let result = match test {
            TestName::Schutzenberger => test_schutzenberger(ps),
            TestName::Lms => test_lms(ps),
            TestName::Mann => test_mann(ps),
            TestName::Bcr => test_bcr(ps),
            TestName::SchmidtBound => test_schmidt_bound(ps),
            TestName::Arasu => arasu_scan(ps).expect("arasu scan preconditions are checked"),
            TestName::Contraction => continue, // driven by config.contraction below
        };
        let verdict = result.verdict;
        results.push(result);
        if verdict == Verdict::Excluded {
            excluded_by.get_or_insert(test);
            if config.short_circuit {
                break;
            }
        }
    }

    if let Some(caps) = config.contraction {
        if excluded_by.is_none() || !config.short_circuit {
            let mut attempt_results: Vec<TestResult> = Vec::new();
            for (w, t) in contraction_candidates(ps, caps.w_max) {
                match crate::contraction::eliminate_by_contraction(ps, w, t, caps.node_budget, caps.filter_ops_budget) {
                    Ok(result) => {
                        let verdict = result.verdict;
                        attempt_results.push(result);
                        if verdict == Verdict::Excluded || verdict == Verdict::Pass {
                            break;
                        }
                    }
                    Err(_) => continue,
                }
            }
            if let Some(best) = attempt_results
                .iter()
                .find(|r| r.verdict == Verdict::Excluded)
                .or_else(|| attempt_results.iter().find(|r| r.verdict == Verdict::Pass))
                .or_else(|| attempt_results.first())
            {
                if best.verdict == Verdict::Excluded {
                    excluded_by.get_or_insert(TestName::Contraction);
                }
                results.push(best.clone());
            }
        }
    }

    let status = match excluded_by {
        Some(by) => Status::Excluded { by },
        None => Status::Open,
    };
    Certificate {
        params: ps,
        results,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn ps(v: u64, k: u64, lambda: u64) -> ParamSet {
        make_params(v, k, lambda).unwrap()
    }

    #[test]
    fn schutzenberger_examples() {
        assert_eq!(test_schutzenberger(ps(22, 7, 2)).verdict, Verdict::Excluded);
        assert_eq!(test_schutzenberger(ps(16, 6, 2)).verdict, Verdict::Pass);
        assert_eq!(
            test_schutzenberger(ps(7, 3, 1)).verdict,
            Verdict::Inapplicable
        );
    }

    #[test]
    fn bcr_examples() {
        let r = test_bcr(ps(43, 7, 1));
        assert_eq!(r.verdict, Verdict::Excluded);
        assert!(matches!(r.witness, Some(Witness::Bcr { .. })));
        assert_eq!(test_bcr(ps(11, 5, 2)).verdict, Verdict::Pass);
        assert_eq!(test_bcr(ps(22, 7, 2)).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn mann_examples() {
        let r = test_mann(ps(39, 19, 9));
        assert_eq!(r.verdict, Verdict::Excluded);
        assert_eq!(r.witness, Some(Witness::Mann { w: 13, p: 5, j: 2 }));
        assert_eq!(test_mann(ps(7, 3, 1)).verdict, Verdict::Pass);
        assert_eq!(test_mann(ps(15, 7, 3)).verdict, Verdict::Pass);
    }

    #[test]
    fn lms_examples() {
        let r = test_lms(ps(505, 225, 100));
        assert_eq!(r.verdict, Verdict::Excluded);
        assert_eq!(r.witness, Some(Witness::Lms { p: 5, a: 3, g: 5 }));
        assert_eq!(test_lms(ps(429, 108, 27)).verdict, Verdict::Inapplicable);
        assert_eq!(test_lms(ps(7, 3, 1)).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn compute_f_examples() {
        assert_eq!(compute_f(351, 81).value, 39);
        assert_eq!(compute_f(429, 81).value, 429);
        assert_eq!(compute_f(27, 7).value, 3);
    }

    #[test]
    fn schmidt_examples() {
        let r = test_schmidt_bound(ps(351, 126, 45));
        assert_eq!(r.verdict, Verdict::Excluded);
        assert_eq!(r.witness, Some(Witness::SchmidtBound { f: 39 }));
        assert_eq!(
            test_schmidt_bound(ps(837, 133, 21)).verdict,
            Verdict::Excluded
        );
        assert_eq!(test_schmidt_bound(ps(429, 108, 27)).verdict, Verdict::Pass);
    }

    #[test]
    fn schmidt_boundary_is_exact() {
        // For prime F the bound reads 4nφ(F) vs F²; with F = 8191 the two
        // sides differ by exactly one at n = 2048.
        assert!(!schmidt_excludes(2048, 8191));
        assert!(schmidt_excludes(2049, 8191));
        assert_eq!(4u128 * 2048 * 8190, 8191u128 * 8191 - 1);
    }

    #[test]
    fn arasu_examples() {
        let r = test_arasu(ps(29, 8, 2), 2, 29).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        // n a perfect square: inapplicable
        let r = test_arasu(ps(16, 6, 2), 2, 16).unwrap();
        assert_eq!(r.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn battery_429_contraction() {
        let cert = run_battery(ps(429, 108, 27), &BatteryConfig::with_contraction());
        assert_eq!(
            cert.status,
            Status::Excluded {
                by: TestName::Contraction
            }
        );
        let last = cert.results.last().unwrap();
        match last.witness.as_ref().unwrap() {
            Witness::Contraction {
                w, t, count45, survivors, ..
            } => {
                assert_eq!((*w, *t), (143, 3));
                assert_eq!(*count45, 14896);
                assert_eq!(*survivors, 0);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn battery_open_cases() {
        let config = BatteryConfig::with_contraction();
        assert_eq!(run_battery(ps(419, 133, 42), &config).status, Status::Open);
        assert_eq!(run_battery(ps(465, 145, 45), &config).status, Status::Open);
    }

    #[test]
    fn full_mode_runs_every_test() {
        let config = BatteryConfig {
            short_circuit: false,
            ..BatteryConfig::default()
        };
        let cert = run_battery(ps(22, 7, 2), &config);
        assert_eq!(cert.results.len(), config.tests.len());
        assert_eq!(
            cert.status,
            Status::Excluded {
                by: TestName::Schutzenberger
            }
        );
    }
}
