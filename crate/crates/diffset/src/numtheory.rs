//! Exact integer and modular arithmetic shared by every nonexistence test:
//! factorization, multiplicative orders, residue symbols, and local
//! solvability of the ternary quadratic form `aX² + bY² = Z²`.
//!
//! Everything here is deterministic. Inputs fit in 64 bits; intermediate
//! products that can overflow are carried in 128 bits.

use crate::error::Error;
use serde::{Deserialize, Serialize};

/// Prime factorization of a positive 64-bit integer, primes strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Primes of `n`, without exponents.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Product of the distinct primes (the radical).
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    /// Exponent of `p` in `n` (0 if `p` does not divide `n`).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// True iff `n` is a perfect square.
    pub fn is_square(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e % 2 == 0)
    }

    /// Primes that divide `n` exactly once.
    pub fn primes_exactly_once(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors
            .iter()
            .filter(|&&(_, e)| e == 1)
            .map(|&(p, _)| p)
    }

    /// All divisors of `n`, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                divs.extend(prev.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm_u128(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    let mut x = a;
    let mut y = b;
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    a / x * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin, valid for all inputs below 2⁶⁴.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    // This base set is known to be exact for every n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho (Brent's variant) with a deterministic parameter schedule.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Factor a positive integer. `factor(1)` has an empty factor list.
pub fn factor(n: u64) -> Factorization {
    assert!(n >= 1, "factor: n must be positive");
    let mut rest = n;
    let mut primes = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        factor_into(rest, &mut primes);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Factorization { n, factors }
}

/// Euler's totient.
pub fn totient(m: u64) -> u64 {
    assert!(m >= 1);
    let mut phi = m;
    for (p, _) in factor(m).factors {
        phi = phi / p * (p - 1);
    }
    phi
}

/// Multiplicative order of `a` modulo `m`; rejects `gcd(a, m) != 1`.
pub fn mult_order(a: u64, m: u64) -> Result<u64, Error> {
    if m < 2 {
        return Err(Error::Domain("mult_order: modulus must be >= 2".into()));
    }
    let a = a % m;
    if gcd(a, m) != 1 {
        return Err(Error::NotCoprime { a, m });
    }
    let phi = totient(m);
    let mut order = phi;
    for (p, _) in factor(phi).factors {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    Ok(order)
}

/// Jacobi symbol (a/m) for odd positive m; 0 iff gcd(a, m) > 1.
pub fn jacobi(a: i64, m: u64) -> i8 {
    assert!(m % 2 == 1 && m >= 1, "jacobi: modulus must be odd positive");
    let mut a = a.rem_euclid(m as i64) as u64;
    let mut m = m;
    let mut t: i8 = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if m % 8 == 3 || m % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            t = -t;
        }
        a %= m;
    }
    if m == 1 {
        t
    } else {
        0
    }
}

/// A place of the rationals: the real place or a finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Real,
    Prime(u64),
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// p-adic valuation and odd part of a nonzero integer.
fn split_valuation(mut a: i64, p: u64) -> (u32, i64) {
    debug_assert!(a != 0);
    let p = p as i64;
    let mut v = 0u32;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a)
}

/// Hilbert symbol (a, b) at a place: +1 iff aX² + bY² = Z² has a nontrivial
/// solution in the completion.
pub fn hilbert_symbol(a: i64, b: i64, place: Place) -> i8 {
    assert!(a != 0 && b != 0, "hilbert_symbol: a, b must be nonzero");
    match place {
        Place::Real => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, w) = split_valuation(b, 2);
            // eps(x) = (x-1)/2 mod 2, omega(x) = (x²-1)/8 mod 2, x odd
            let eps = |x: i64| (x.rem_euclid(4) == 3) as u32;
            let omega = |x: i64| matches!(x.rem_euclid(8), 3 | 5) as u32;
            let e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Prime(p) => {
            assert!(is_prime(p), "hilbert_symbol: place must be prime");
            let (alpha, u) = split_valuation(a, p);
            let (beta, w) = split_valuation(b, p);
            let eps = ((p - 1) / 2 % 2) as u32;
            let mut sign = if (alpha * beta * eps) % 2 == 1 { -1i8 } else { 1 };
            if beta % 2 == 1 {
                sign *= jacobi(u, p);
            }
            if alpha % 2 == 1 {
                sign *= jacobi(w, p);
            }
            sign
        }
    }
}

/// Squarefree kernel of a nonzero integer, sign preserved.
pub fn squarefree_kernel(a: i64) -> i64 {
    debug_assert!(a != 0);
    let sign = a.signum();
    let mut kernel = 1i64;
    for (p, e) in factor(a.unsigned_abs()).factors {
        if e % 2 == 1 {
            kernel *= p as i64;
        }
    }
    sign * kernel
}

/// Places at which the Hilbert symbol of (a, b) can be −1 once a, b are
/// squarefree: the real place, 2, and the odd primes dividing ab.
fn relevant_places(a: i64, b: i64) -> Vec<Place> {
    let mut places = vec![Place::Real, Place::Prime(2)];
    let mut primes: Vec<u64> = factor(a.unsigned_abs())
        .primes()
        .chain(factor(b.unsigned_abs()).primes())
        .filter(|&p| p != 2)
        .collect();
    primes.sort_unstable();
    primes.dedup();
    places.extend(primes.into_iter().map(Place::Prime));
    places
}

/// Decide whether aX² + bY² = Z² has a nontrivial integer solution, by
/// Hasse–Minkowski: reduce a, b to their squarefree kernels and require the
/// Hilbert symbol to be +1 at the real place and every prime dividing 2ab.
pub fn ternary_solvable(a: i64, b: i64) -> bool {
    assert!(a != 0 && b != 0);
    ternary_failing_place(a, b).is_none()
}

/// The first place (real, 2, then odd primes ascending) at which the form is
/// not locally solvable, or None if it is solvable everywhere.
pub fn ternary_failing_place(a: i64, b: i64) -> Option<Place> {
    assert!(a != 0 && b != 0);
    let a = squarefree_kernel(a);
    let b = squarefree_kernel(b);
    relevant_places(a, b)
        .into_iter()
        .find(|&place| hilbert_symbol(a, b, place) == -1)
}

/// Whether a p-adic unit u is a square in the p-adic integers.
/// Rejects gcd(u, p) > 1; callers strip powers of p first.
pub fn is_padic_unit_square(u: i128, p: u64) -> Result<bool, Error> {
    assert!(is_prime(p), "is_padic_unit_square: p must be prime");
    if u % p as i128 == 0 {
        return Err(Error::NotCoprime {
            a: (u.unsigned_abs() % p as u128) as u64,
            m: p,
        });
    }
    if p == 2 {
        Ok(u.rem_euclid(8) == 1)
    } else {
        let r = u.rem_euclid(p as i128) as i64;
        Ok(jacobi(r, p) == 1)
    }
}

/// Integer square root check.
pub fn is_perfect_square(n: u64) -> bool {
    let r = n.isqrt();
    r * r == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factor_examples() {
        assert_eq!(factor(429).factors, vec![(3, 1), (11, 1), (13, 1)]);
        assert_eq!(factor(28325).factors, vec![(5, 2), (11, 1), (103, 1)]);
        assert_eq!(factor(1).factors, vec![]);
        assert_eq!(factor(8591).factors, vec![(11, 2), (71, 1)]);
    }

    #[test]
    fn primality_examples() {
        // 3439 = 19·181 and 8591 = 11²·71 are both composite.
        assert!(!is_prime(3439));
        assert!(!is_prime(8591));
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(is_prime(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime(4_294_967_297)); // 641 · 6700417
    }

    #[test]
    fn mult_order_examples() {
        assert_eq!(mult_order(2, 7).unwrap(), 3);
        assert_eq!(mult_order(3, 143).unwrap(), 15);
        assert_eq!(mult_order(16, 101).unwrap(), 25);
        assert!(mult_order(6, 9).is_err());
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(2, 7), 1);
        assert_eq!(jacobi(2, 3), -1);
        assert_eq!(jacobi(6, 3), 0);
        assert_eq!(jacobi(-1, 3), -1);
        assert_eq!(jacobi(-1, 5), 1);
    }

    #[test]
    fn hilbert_examples() {
        for place in [Place::Real, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
            assert_eq!(hilbert_symbol(1, 5, place), 1);
            assert_eq!(hilbert_symbol(1, -30, place), 1);
        }
        assert_eq!(hilbert_symbol(-1, -1, Place::Real), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(2)), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(3)), 1);
    }

    /// Exhaustive check that z² ≡ ax² + by² (mod 2^8) has a primitive
    /// solution (x, y, z not all even) exactly when the 2-adic Hilbert
    /// symbol is +1. For squarefree a, b a primitive solution mod 2^8
    /// lifts to Z_2 by Hensel's lemma, so the two sides must agree.
    #[test]
    fn hilbert_two_adic_vs_search() {
        let modulus = 1i64 << 8;
        let mut sq_any = vec![false; modulus as usize];
        let mut sq_odd = vec![false; modulus as usize];
        for z in 0..modulus {
            let r = (z * z).rem_euclid(modulus) as usize;
            sq_any[r] = true;
            if z % 2 == 1 {
                sq_odd[r] = true;
            }
        }
        for a in [-1i64, 1, 2, 3, 5, -2, -3, 6, 7] {
            for b in [-1i64, 1, 2, 3, 5, -2, -5, 10] {
                let mut found = false;
                'outer: for x in 0..modulus {
                    for y in 0..modulus {
                        let rhs = (a * x * x + b * y * y).rem_euclid(modulus) as usize;
                        let ok = if x % 2 == 1 || y % 2 == 1 {
                            sq_any[rhs]
                        } else {
                            sq_odd[rhs]
                        };
                        if ok {
                            found = true;
                            break 'outer;
                        }
                    }
                }
                let symbol = hilbert_symbol(a, b, Place::Prime(2));
                assert_eq!(
                    symbol == 1,
                    found,
                    "2-adic mismatch for a={a} b={b}: symbol {symbol}, search {found}"
                );
            }
        }
    }

    #[test]
    fn ternary_examples() {
        assert!(ternary_solvable(3, -2));
        assert!(!ternary_solvable(6, -1));
        assert!(ternary_solvable(4, -1));
        assert_eq!(ternary_failing_place(6, -1), Some(Place::Prime(2)));
    }

    #[test]
    fn padic_square_examples() {
        assert!(is_padic_unit_square(2, 7).unwrap());
        assert!(!is_padic_unit_square(3, 2).unwrap());
        assert!(is_padic_unit_square(17, 2).unwrap());
        assert!(is_padic_unit_square(-7, 2).unwrap());
        assert!(is_padic_unit_square(841, 2).unwrap());
        assert!(is_padic_unit_square(1, 5).unwrap());
        assert!(is_padic_unit_square(-1, 5).unwrap());
        assert!(is_padic_unit_square(-1, 13).unwrap());
        assert!(!is_padic_unit_square(-1, 7).unwrap());
        assert!(is_padic_unit_square(-3, 7).unwrap());
        assert!(is_padic_unit_square(-6, 5).unwrap());
        assert!(is_padic_unit_square(10, 5).is_err());
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(39), 24);
        assert_eq!(totient(143), 120);
        assert_eq!(totient(1), 1);
        assert_eq!(totient(429), 240);
    }

    /// One-sided oracle: a small-solution search certifies solvability;
    /// ternary_solvable must agree whenever the search finds a solution.
    fn small_solution_exists(a: i64, b: i64, bound: i64) -> bool {
        for x in 0..=bound {
            for y in 0..=bound {
                if x == 0 && y == 0 {
                    continue;
                }
                let rhs = a * x * x + b * y * y;
                if rhs >= 0 {
                    let z = (rhs as u64).isqrt() as i64;
                    if z * z == rhs && z <= bound {
                        return true;
                    }
                }
            }
        }
        // z = 0 branch: ax² + by² = 0 with (x, y) != (0, 0)
        for x in 1..=bound {
            for y in 1..=bound {
                if a * x * x + b * y * y == 0 {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn ternary_vs_small_search() {
        for a in [-10i64, -7, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10, 11, 13] {
            for b in [-13i64, -11, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 10] {
                if small_solution_exists(a, b, 200) {
                    assert!(
                        ternary_solvable(a, b),
                        "search found a solution for ({a},{b}) but symbol test says none"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn factor_reassembles(n in 1u64..=u64::MAX / 2) {
            let f = factor(n);
            let mut prod = 1u128;
            let mut prev = 0u64;
            for &(p, e) in &f.factors {
                prop_assert!(p > prev, "primes must be strictly increasing");
                prop_assert!(is_prime(p));
                prop_assert!(e >= 1);
                prev = p;
                prod *= (p as u128).pow(e);
            }
            prop_assert_eq!(prod, n as u128);
        }

        #[test]
        fn order_divides_totient(a in 2u64..10_000, m in 2u64..10_000) {
            prop_assume!(gcd(a, m) == 1);
            let ord = mult_order(a, m).unwrap();
            prop_assert_eq!(totient(m) % ord, 0);
            prop_assert_eq!(pow_mod(a, ord, m), 1);
            for (p, _) in factor(ord).factors {
                prop_assert_ne!(pow_mod(a, ord / p, m), 1);
            }
        }

        #[test]
        fn hilbert_multiplicative(
            a in -50i64..50, a2 in -50i64..50, b in -50i64..50,
            pidx in 0usize..5,
        ) {
            prop_assume!(a != 0 && a2 != 0 && b != 0);
            let place = [Place::Real, Place::Prime(2), Place::Prime(3), Place::Prime(5), Place::Prime(7)][pidx];
            let lhs = hilbert_symbol(a * a2, b, place);
            let rhs = hilbert_symbol(a, b, place) * hilbert_symbol(a2, b, place);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hilbert_product_formula(a in -300i64..300, b in -300i64..300) {
            prop_assume!(a != 0 && b != 0);
            let a = squarefree_kernel(a);
            let b = squarefree_kernel(b);
            let prod: i32 = relevant_places(a, b)
                .into_iter()
                .map(|pl| hilbert_symbol(a, b, pl) as i32)
                .product();
            prop_assert_eq!(prod, 1);
        }
    }
}
