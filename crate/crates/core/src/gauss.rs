//! Gauss-type quadratic character sums
//!
//! `G_k(n) = ((1-i)/2 + (-1/n)(1+i)/2) sum_{a mod n} (a/n) e(ak/n)` for odd `n`.
//! [`gauss_exact`] evaluates it through its multiplicative prime-power table, returning
//! an exact `m * sqrt(r)`; [`gauss_direct`] sums the definition in floating point.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::arith::{gcd, is_squarefree, kronecker, trial_factor};
use crate::error::{invalid, Result};

/// Exact real number `m * sqrt(r)` with `r` squarefree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactGaussValue {
    m: i128,
    r: u64,
}

impl ExactGaussValue {
    pub const ZERO: Self = Self { m: 0, r: 1 };
    pub const ONE: Self = Self { m: 1, r: 1 };

    /// `m * sqrt(r)`; `r` must be squarefree and positive.
    pub fn new(m: i128, r: u64) -> Self {
        assert!(r >= 1 && is_squarefree(r), "radicand {r} must be squarefree");
        if m == 0 {
            Self::ZERO
        } else {
            Self { m, r }
        }
    }

    pub fn m(&self) -> i128 {
        self.m
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0
    }

    pub fn value(&self) -> f64 {
        self.m as f64 * (self.r as f64).sqrt()
    }
}

impl Mul for ExactGaussValue {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.m == 0 || rhs.m == 0 {
            return Self::ZERO;
        }
        let g = gcd(self.r, rhs.r);
        Self {
            m: self.m * rhs.m * g as i128,
            r: (self.r / g) * (rhs.r / g),
        }
    }
}

impl fmt::Display for ExactGaussValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r == 1 {
            write!(f, "{}", self.m)
        } else {
            write!(f, "{}*sqrt({})", self.m, self.r)
        }
    }
}

/// `G_k(p^beta)` for an odd prime `p` and `beta >= 1`.
pub fn gauss_prime_power(k: i64, p: u64, beta: u32) -> ExactGaussValue {
    // alpha = v_p(k), infinite for k = 0
    let alpha = if k == 0 {
        None
    } else {
        let mut a = 0u32;
        let mut kk = k;
        while kk % p as i64 == 0 {
            kk /= p as i64;
            a += 1;
        }
        Some((a, kk))
    };
    let pi = p as i128;
    match alpha {
        Some((a, _)) if beta >= a + 2 => ExactGaussValue::ZERO,
        Some((a, unit)) if beta == a + 1 => {
            if beta % 2 == 0 {
                ExactGaussValue::new(-pi.pow(a), 1)
            } else {
                let chi = kronecker(unit, p as i64) as i128;
                ExactGaussValue::new(chi * pi.pow(a), p)
            }
        }
        // beta <= alpha
        _ => {
            if beta % 2 == 1 {
                ExactGaussValue::ZERO
            } else {
                ExactGaussValue::new(pi.pow(beta) - pi.pow(beta - 1), 1)
            }
        }
    }
}

/// Exact `G_k(n)` for odd `n` via multiplicativity over `p^beta || n`.
pub fn gauss_exact(k: i64, n: u64) -> Result<ExactGaussValue> {
    if n == 0 || n % 2 == 0 {
        return invalid(format!("n = {n} must be odd and positive"));
    }
    let mut acc = ExactGaussValue::ONE;
    for (p, beta) in trial_factor(n) {
        acc = acc * gauss_prime_power(k, p, beta);
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// Largest `n` accepted by [`gauss_direct`].
pub const GAUSS_DIRECT_MAX: u64 = 10_000;

fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `G_k(n)` from its defining character sum.
pub fn gauss_direct(k: i64, n: u64) -> Result<Complex64> {
    if n == 0 || n % 2 == 0 {
        return invalid(format!("n = {n} must be odd and positive"));
    }
    if n > GAUSS_DIRECT_MAX {
        return invalid(format!("n = {n} exceeds the direct-sum cap {GAUSS_DIRECT_MAX}"));
    }
    let ni = n as i64;
    let kr = k.rem_euclid(ni);
    let terms: Vec<Complex64> = (0..ni)
        .filter_map(|a| {
            let chi = kronecker(a, ni);
            if chi == 0 {
                return None;
            }
            let phase = (a * kr % ni) as f64 / n as f64;
            Some(Complex64::from_polar(chi as f64, 2.0 * std::f64::consts::PI * phase))
        })
        .collect();
    let s = pairwise_sum(&terms);
    let eps = kronecker(-1, ni) as f64;
    let pre = Complex64::new(0.5, -0.5) + Complex64::new(0.5, 0.5) * eps;
    Ok(pre * s)
}

/// True iff `G_{4k}(n) = G_k(n)` holds exactly.
pub fn gauss_4k_identity_check(k: i64, n: u64) -> Result<bool> {
    Ok(gauss_exact(4 * k, n)? == gauss_exact(k, n)?)
}

/// Which conductor map applies to a squarefree `k1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum K1Parity {
    /// `k1` odd: `k1` if `k1 = 1 mod 4`, else `4 k1`.
    Odd,
    /// `k1 = 2 k1'` with `k1'` odd: `k1'` if `k1' = 1 mod 4`, else `4 k1'`.
    Even,
}

/// Discriminant `m(k1)` (or `m(k1')` in the even case) of the character attached to `k1`.
///
/// The result carries the sign of `k1`.
pub fn m_of_k1(k1: i64, parity: K1Parity) -> Result<i64> {
    if k1 == 0 || !is_squarefree(k1.unsigned_abs()) {
        return invalid(format!("k1 = {k1} must be squarefree and nonzero"));
    }
    let base = match parity {
        K1Parity::Odd => k1,
        K1Parity::Even => {
            if k1 % 2 != 0 {
                return invalid(format!("k1 = {k1} must be even in the even case"));
            }
            k1 / 2
        }
    };
    Ok(if base.rem_euclid(4) == 1 { base } else { 4 * base })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(1.0)
    }

    #[test]
    fn direct_examples() {
        let g = gauss_direct(0, 9).unwrap();
        assert!(close(g.re, 6.0) && g.im.abs() < 1e-9);
        let g = gauss_direct(1, 3).unwrap();
        assert!(close(g.re, 3f64.sqrt()) && g.im.abs() < 1e-9);
        let g = gauss_direct(1, 1).unwrap();
        assert!(close(g.re, 1.0));
        assert!(gauss_direct(1, 4).is_err());
    }

    #[test]
    fn exact_examples() {
        assert_eq!(gauss_exact(3, 9).unwrap(), ExactGaussValue::new(-3, 1));
        assert_eq!(gauss_exact(1, 9).unwrap(), ExactGaussValue::ZERO);
        assert_eq!(gauss_exact(1, 15).unwrap(), ExactGaussValue::new(1, 15));
        assert_eq!(gauss_exact(0, 9).unwrap(), ExactGaussValue::new(6, 1));
        assert_eq!(gauss_exact(0, 3).unwrap(), ExactGaussValue::ZERO);
        assert_eq!(gauss_exact(5, 1).unwrap(), ExactGaussValue::ONE);
        assert!(gauss_exact(1, 10).is_err());
    }

    #[test]
    fn radical_merging() {
        let a = ExactGaussValue::new(2, 6);
        let b = ExactGaussValue::new(-3, 10);
        // 2 sqrt6 * -3 sqrt10 = -6 * 2 sqrt15
        assert_eq!(a * b, ExactGaussValue::new(-12, 15));
        assert_eq!(a * ExactGaussValue::ZERO, ExactGaussValue::ZERO);
    }

    #[test]
    fn four_k_identity() {
        assert!(gauss_4k_identity_check(1, 15).unwrap());
        assert!(gauss_4k_identity_check(0, 9).unwrap());
    }

    #[test]
    fn conductor_maps() {
        assert_eq!(m_of_k1(5, K1Parity::Odd).unwrap(), 5);
        assert_eq!(m_of_k1(3, K1Parity::Odd).unwrap(), 12);
        assert_eq!(m_of_k1(6, K1Parity::Even).unwrap(), 12);
        assert_eq!(m_of_k1(10, K1Parity::Even).unwrap(), 5);
        assert_eq!(m_of_k1(-1, K1Parity::Odd).unwrap(), -4);
        assert_eq!(m_of_k1(-3, K1Parity::Odd).unwrap(), -3);
        assert!(m_of_k1(12, K1Parity::Odd).is_err());
        assert!(m_of_k1(0, K1Parity::Odd).is_err());
        assert!(m_of_k1(3, K1Parity::Even).is_err());
    }

    #[test]
    fn conductor_map_yields_fundamental_discriminants() {
        for k1 in -200i64..=200 {
            if k1 == 0 || !is_squarefree(k1.unsigned_abs()) {
                continue;
            }
            let parity = if k1 % 2 == 0 { K1Parity::Even } else { K1Parity::Odd };
            let m = m_of_k1(k1, parity).unwrap();
            let fundamental = (m.rem_euclid(4) == 1 && is_squarefree(m.unsigned_abs()))
                || (m % 4 == 0
                    && [2, 3].contains(&(m / 4).rem_euclid(4))
                    && is_squarefree((m / 4).unsigned_abs()));
            assert!(fundamental, "k1={k1} m={m}");
            // the character of m(k1) agrees with (k1'/p) at odd primes p not dividing k1
            let base = if parity == K1Parity::Even { k1 / 2 } else { k1 };
            for p in [3i64, 5, 7, 11, 13, 101] {
                if base % p != 0 {
                    assert_eq!(kronecker(m, p), kronecker(base, p));
                }
            }
        }
    }

    #[test]
    fn coarse_size_bound() {
        for n in (1..400u64).step_by(2) {
            for k in -30..=30 {
                let v = gauss_exact(k, n).unwrap().value();
                assert!(v * v <= (n as f64).powi(3) + 1e-9);
            }
        }
    }
}
