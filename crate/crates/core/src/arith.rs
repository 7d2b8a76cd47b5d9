//! Integer arithmetic: Kronecker symbols, sieves, trial-division factorization.

use crate::error::{invalid, Result};

/// Largest input accepted by [`factorize`].
pub const MAX_FACTOR_INPUT: u64 = 10_000_000;

/// Prime factorization as `(prime, exponent)` pairs in increasing prime order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product()
    }

    /// Exponent of `p` (zero when `p` does not divide the value).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

impl IntoIterator for Factorization {
    type Item = (u64, u32);
    type IntoIter = std::vec::IntoIter<(u64, u32)>;

    fn into_iter(self) -> Self::IntoIter {
        self.factors.into_iter()
    }
}

/// Canonical factorization of `n` by trial division.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return invalid("cannot factor 0");
    }
    if n > MAX_FACTOR_INPUT {
        return invalid(format!(
            "{n} exceeds the trial-division limit {MAX_FACTOR_INPUT}"
        ));
    }
    Ok(Factorization {
        factors: trial_factor(n),
    })
}

/// Uncapped trial division, for internal callers that know their inputs are small enough.
pub(crate) fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while *n % p == 0 {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5;
    while p * p <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 2;
    }
    true
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && trial_factor(n).iter().all(|&(_, e)| e == 1)
}

/// Kronecker symbol `(m/n)`, including the extension to even and non-positive `n`.
pub fn kronecker(m: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(m == 1 || m == -1);
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if m < 0 {
            result = -1;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if m % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 {
            let r = m.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        n >>= tz;
    }
    result * jacobi(m.rem_euclid(n), n)
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Squarefree flags for `1..=limit`; index 0 is unused and false.
pub fn squarefree_sieve(limit: usize) -> Result<Vec<bool>> {
    if limit == 0 {
        return invalid("squarefree sieve needs limit >= 1");
    }
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    let mut p = 2;
    while p * p <= limit {
        let sq = p * p;
        let mut k = sq;
        while k <= limit {
            flags[k] = false;
            k += sq;
        }
        p += 1;
    }
    Ok(flags)
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            if i * i <= limit {
                let mut k = i * i;
                while k <= limit {
                    if spf[k] == 0 {
                        spf[k] = i as u32;
                    }
                    k += i;
                }
            }
        }
    }
    spf
}

/// All primes `<= limit`.
pub fn primes_up_to(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut k = i * i;
            while k <= limit {
                composite[k] = true;
                k += i;
            }
        }
    }
    out
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Square root of a quadratic residue `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(5, 5), 0);
        for d in -50..50 {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(-1, -1), -1);
        assert_eq!(kronecker(3, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
        // (2/n) supplementary law
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(4, 2), 0);
    }

    #[test]
    fn kronecker_multiplicative_in_lower_argument() {
        for m in -200i64..=200 {
            for n1 in -200i64..=200 {
                for n2 in [-7i64, -2, 1, 2, 3, 8, 45, 199] {
                    // (m/0) is a degenerate convention outside the multiplicative structure
                    if n1 == 0 || (n1 * n2).abs() > 40_000 {
                        continue;
                    }
                    assert_eq!(
                        kronecker(m, n1 * n2),
                        kronecker(m, n1) * kronecker(m, n2),
                        "m={m} n1={n1} n2={n2}"
                    );
                }
            }
        }
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in primes_up_to(500).into_iter().skip(1) {
            for m in -300i64..=300 {
                let r = m.rem_euclid(p as i64) as u64;
                let euler = if r == 0 {
                    0
                } else if mod_pow(r, (p - 1) / 2, p) == 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(m, p as i64), euler, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn sieve_examples() {
        let f = squarefree_sieve(60).unwrap();
        let flagged: Vec<usize> = (1..=12).filter(|&n| f[n]).collect();
        assert_eq!(flagged, vec![1, 2, 3, 5, 6, 7, 10, 11]);
        assert!(f[1]);
        assert!(!f[49]);
        assert!(squarefree_sieve(0).is_err());
    }

    #[test]
    fn sieve_agrees_with_factorization() {
        let f = squarefree_sieve(100_000).unwrap();
        for n in 1..=100_000u64 {
            assert_eq!(f[n as usize], factorize(n).unwrap().is_squarefree(), "n={n}");
        }
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(360).unwrap().factors(), &[(2, 3), (3, 2), (5, 1)]);
        assert!(factorize(1).unwrap().is_empty());
        assert_eq!(factorize(97).unwrap().factors(), &[(97, 1)]);
        assert!(factorize(0).is_err());
        assert!(factorize(MAX_FACTOR_INPUT + 1).is_err());
    }

    #[test]
    fn tonelli_shanks() {
        for p in primes_up_to(400).into_iter().skip(1) {
            for a in 0..p {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(kronecker(a as i64, p as i64), -1),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn factorization_reconstructs(n in 1u64..=MAX_FACTOR_INPUT) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.value(), n);
            let ps: Vec<u64> = f.factors().iter().map(|&(p, _)| p).collect();
            prop_assert!(ps.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(ps.iter().all(|&p| is_prime(p)));
        }

        #[test]
        fn isqrt_is_floor(n in 0u64..1u64 << 50) {
            let r = isqrt(n);
            prop_assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
