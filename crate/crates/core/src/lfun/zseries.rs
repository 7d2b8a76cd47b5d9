//! The off-diagonal series
//!
//! ```text
//! Z(alpha, beta, gamma; a, k1, Q', chi_b) = sum_{k2 odd} sum_{(n1 n2, 2a) = 1}
//!     lambda_f(n1) lambda_g(n2) chi_b(n1 n2 Q') / (n1^alpha n2^beta k2^{2 gamma})
//!     * G_{k1 k2^2}(n1 n2 Q') / (n1 n2 Q')
//! ```
//!
//! restricted to `trunc`-smooth `n1, n2, k2`, evaluated two ways: as a direct sum with
//! exact Gauss values of the full modulus, and as a product of exact local factors.
//! `chi_b` is the Kronecker character `(b / .)`.

use crate::arith::{is_squarefree, kronecker, primes_up_to, trial_factor};
use crate::error::{invalid, Error, Result};
use crate::forms::{prime_power_lambda, CoefficientTable};
use crate::gauss::{gauss_exact, gauss_prime_power};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZSeriesParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: u64,
    pub k1: i64,
    pub q_prime: u64,
    pub b: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZSeriesValue {
    pub value: f64,
    /// Certified bound on the neglected part (within the `trunc`-smooth series).
    pub tail_bound: f64,
    pub terms: usize,
}

const DIRECT_TARGET: f64 = 1e-10;
const LOCAL_TARGET: f64 = 1e-18;

fn validate_params(params: &ZSeriesParams) -> Result<()> {
    let ZSeriesParams { alpha, beta, gamma, a, k1, q_prime, b } = *params;
    if !(alpha >= 2.0 && beta >= 2.0 && gamma >= 2.0) {
        return invalid("alpha, beta, gamma must all be >= 2");
    }
    if a == 0 || q_prime == 0 || q_prime % 2 == 0 || b == 0 {
        return invalid("a, b must be nonzero and Q' odd and positive");
    }
    if k1 == 0 || !is_squarefree(k1.unsigned_abs()) {
        return invalid(format!("k1 = {k1} must be squarefree and nonzero"));
    }
    Ok(())
}

fn validate(params: &ZSeriesParams, trunc: u64) -> Result<Vec<u64>> {
    validate_params(params)?;
    let ZSeriesParams { a, k1, q_prime, b, .. } = *params;
    let primes: Vec<u64> = primes_up_to(trunc as usize).into_iter().skip(1).collect();
    for m in [a, k1.unsigned_abs(), q_prime, b.unsigned_abs()] {
        for (p, _) in trial_factor(m) {
            if p > 2 && p > trunc {
                return invalid(format!(
                    "trunc = {trunc} must cover the prime {p} of a, k1, Q' and b"
                ));
            }
        }
    }
    if primes.is_empty() {
        return invalid("trunc must be >= 3");
    }
    Ok(primes)
}

fn lambda_at(t: &CoefficientTable, p: u64, e: u32) -> f64 {
    prime_power_lambda(t.lambda(p as usize), t.form().level % p == 0, e)
}

/// Exact local factor at an odd prime `p`; `absolute` sums absolute values instead.
fn local_factor_impl(
    p: u64,
    params: &ZSeriesParams,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    absolute: bool,
) -> Result<f64> {
    let pf = p as f64;
    let ZSeriesParams { alpha, beta, gamma, a, k1, q_prime, b } = *params;
    let mut r_p = 0u32;
    let mut qq = q_prime;
    while qq % p == 0 {
        qq /= p;
        r_p += 1;
    }
    let v_k1 = u32::from(k1 % p as i64 == 0);
    let chi = kronecker(b, p as i64) as f64;
    let n_free = a % p != 0;
    // |G/p^beta| <= 1 and |lambda(p^n)| <= n + 1 give |term_k| <= p^{-2k gamma} * s
    let s = 1.0 / ((1.0 - pf.powf(-alpha)).powi(2) * (1.0 - pf.powf(-beta)).powi(2));
    let mut total = 0.0;
    let mut k = 0u32;
    loop {
        let alpha_p = v_k1 + 2 * k;
        let max_total = (alpha_p + 1).saturating_sub(r_p);
        let max_n = if n_free { max_total } else { 0 };
        let kw = pf.powf(-2.0 * gamma * k as f64);
        for n1 in 0..=max_n {
            for n2 in 0..=(max_n - n1) {
                let beta_exp = n1 + n2 + r_p;
                let g = if beta_exp == 0 {
                    1.0
                } else if alpha_p >= beta_exp {
                    // only the valuation matters here, as for k = 0
                    gauss_prime_power(0, p, beta_exp).value()
                } else {
                    match (p as i64).checked_pow(2 * k).and_then(|m| m.checked_mul(k1)) {
                        Some(kk) => gauss_prime_power(kk, p, beta_exp).value(),
                        None => return Err(Error::Numeric(format!("k1 p^{} overflows", 2 * k))),
                    }
                };
                if g == 0.0 {
                    continue;
                }
                let term = lambda_at(tf, p, n1)
                    * lambda_at(tg, p, n2)
                    * chi.powi(beta_exp as i32)
                    * pf.powf(-(n1 as f64) * alpha - n2 as f64 * beta)
                    * kw
                    * g
                    / pf.powi(beta_exp as i32);
                total += if absolute { term.abs() } else { term };
            }
        }
        let tail = pf.powf(-2.0 * gamma * (k + 1) as f64) * s / (1.0 - pf.powf(-2.0 * gamma));
        if tail < LOCAL_TARGET || k >= 8 {
            break;
        }
        k += 1;
    }
    Ok(total)
}

/// Exact local factor of `Z` at an odd prime `p`.
pub fn z_local_factor(
    p: u64,
    params: &ZSeriesParams,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
) -> Result<f64> {
    validate_params(params)?;
    if p % 2 == 0 || !crate::arith::is_prime(p) {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    tf.require_limit(p as usize)?;
    tg.require_limit(p as usize)?;
    local_factor_impl(p, params, tf, tg, false)
}

/// Product of the exact local factors over odd `p <= trunc`.
pub fn z_local_product(
    params: &ZSeriesParams,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    trunc: u64,
) -> Result<ZSeriesValue> {
    let primes = validate(params, trunc)?;
    tf.require_limit(trunc as usize)?;
    tg.require_limit(trunc as usize)?;
    let mut value = 1.0;
    for &p in &primes {
        value *= local_factor_impl(p, params, tf, tg, false)?;
    }
    Ok(ZSeriesValue {
        value,
        tail_bound: LOCAL_TARGET * primes.len() as f64,
        terms: primes.len(),
    })
}

/// Odd `trunc`-smooth integers `m` with `m <= limit`, paired with their factorizations.
fn smooth_numbers(primes: &[u64], limit: f64) -> Vec<(u64, Vec<(u64, u32)>)> {
    let mut out = vec![(1u64, Vec::new())];
    let mut i = 0;
    while i < out.len() {
        let (m, fac) = out[i].clone();
        // extend only with primes >= the largest prime already used, to avoid duplicates
        let start = fac.last().map_or(0, |&(p, _)| primes.iter().position(|&q| q == p).unwrap());
        for &p in &primes[start..] {
            let next = m as f64 * p as f64;
            if next > limit {
                break;
            }
            let mut f = fac.clone();
            match f.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => f.push((p, 1)),
            }
            out.push((m * p, f));
        }
        i += 1;
    }
    out
}

fn lambda_of(t: &CoefficientTable, fac: &[(u64, u32)]) -> f64 {
    fac.iter().map(|&(p, e)| lambda_at(t, p, e)).product()
}

/// Direct sum over `trunc`-smooth triples, extended until the certified tail is below
/// `1e-10`. The tail is the absolutely convergent majorant (a product of local absolute
/// sums) minus the absolute mass already included.
pub fn z_series_direct(
    params: &ZSeriesParams,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    trunc: u64,
) -> Result<ZSeriesValue> {
    let primes = validate(params, trunc)?;
    tf.require_limit(trunc as usize)?;
    tg.require_limit(trunc as usize)?;
    let ZSeriesParams { alpha, beta, gamma, a, k1, q_prime, b } = *params;
    let mut majorant = 1.0;
    for &p in &primes {
        majorant *= local_factor_impl(p, params, tf, tg, true)?;
    }
    let n_primes: Vec<u64> = primes.iter().copied().filter(|&p| a % p != 0).collect();

    let mut bound = 1e6f64;
    loop {
        let ns = smooth_numbers(&n_primes, bound.powf(1.0 / alpha.min(beta)));
        let ks = smooth_numbers(&primes, bound.powf(0.5 / gamma));
        let mut value = 0.0;
        let mut mass = 0.0;
        let mut terms = 0usize;
        for (n1, f1) in &ns {
            let w1 = (*n1 as f64).powf(alpha);
            if w1 > bound {
                continue;
            }
            let l1 = lambda_of(tf, f1);
            for (n2, f2) in &ns {
                let w12 = w1 * (*n2 as f64).powf(beta);
                if w12 > bound {
                    continue;
                }
                let l2 = lambda_of(tg, f2);
                let modulus = n1 * n2 * q_prime;
                let chi = kronecker(b, modulus as i64) as f64;
                if chi == 0.0 || l1 * l2 == 0.0 {
                    continue;
                }
                for (k2, _) in &ks {
                    let w = w12 * (*k2 as f64).powf(2.0 * gamma);
                    if w > bound {
                        continue;
                    }
                    let kk = k1
                        .checked_mul((*k2 * *k2) as i64)
                        .ok_or_else(|| Error::Numeric("k1 k2^2 overflows".into()))?;
                    let g = gauss_exact(kk, modulus)?.value();
                    let term = l1 * l2 * chi / w * g / modulus as f64;
                    value += term;
                    mass += term.abs();
                    terms += 1;
                }
            }
        }
        let tail = (majorant - mass).max(0.0) + 1e-15 * majorant;
        if tail <= DIRECT_TARGET {
            return Ok(ZSeriesValue {
                value,
                tail_bound: tail,
                terms,
            });
        }
        if bound >= 1e24 {
            return Err(Error::Numeric(format!(
                "direct Z-series tail {tail:.2e} still above target at weight bound {bound:.1e}"
            )));
        }
        bound *= 100.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{build_table, NewformSpec};

    fn tables() -> (CoefficientTable, CoefficientTable) {
        (
            build_table(&NewformSpec::bundled("11a").unwrap(), 1000).unwrap(),
            build_table(&NewformSpec::bundled("17a").unwrap(), 1000).unwrap(),
        )
    }

    fn params(a: u64, k1: i64, q_prime: u64) -> ZSeriesParams {
        ZSeriesParams { alpha: 2.0, beta: 2.0, gamma: 2.0, a, k1, q_prime, b: 1 }
    }

    #[test]
    fn exact_local_cases() {
        let (tf, tg) = tables();
        let p = 3u64;
        for gamma in [2.0, 2.5] {
            let base = ZSeriesParams { gamma, ..params(3, 3, 1) };
            let v = z_local_factor(p, &base, &tf, &tg).unwrap();
            assert!((v - 1.0 / (1.0 - 3f64.powf(-2.0 * gamma))).abs() < 1e-10);
        }
        let v = z_local_factor(p, &params(3, 3, 3), &tf, &tg).unwrap();
        assert!(v.abs() < 1e-10);
        for (k1, b) in [(1i64, 1i64), (5, 1), (-1, 1), (5, 7)] {
            let pr = ZSeriesParams { b, ..params(3, k1, 3) };
            let v = z_local_factor(p, &pr, &tf, &tg).unwrap();
            let want = (kronecker(b, 3) * kronecker(k1, 3)) as f64 / 3f64.sqrt();
            assert!((v - want).abs() < 1e-10, "k1={k1} b={b}");
        }
    }

    #[test]
    fn routes_agree_basic() {
        let (tf, tg) = tables();
        let pr = params(1, 1, 1);
        let d = z_series_direct(&pr, &tf, &tg, 7).unwrap();
        let l = z_local_product(&pr, &tf, &tg, 7).unwrap();
        assert!((d.value - l.value).abs() <= 1e-8, "{} vs {}", d.value, l.value);
    }

    #[test]
    fn coprimality_with_a() {
        let (tf, tg) = tables();
        // a = 3 drops n1, n2 divisible by 3: the local factor at 3 reduces to the k2-sum
        let with = z_local_product(&params(3, 1, 1), &tf, &tg, 5).unwrap().value;
        let without = z_local_product(&params(1, 1, 1), &tf, &tg, 5).unwrap().value;
        let f3a = z_local_factor(3, &params(3, 1, 1), &tf, &tg).unwrap();
        let f3 = z_local_factor(3, &params(1, 1, 1), &tf, &tg).unwrap();
        assert!((with / f3a - without / f3).abs() < 1e-14);
        let d = z_series_direct(&params(3, 1, 1), &tf, &tg, 5).unwrap().value;
        assert!((d - with).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let (tf, tg) = tables();
        assert!(z_local_product(&params(1, 4, 1), &tf, &tg, 7).is_err());
        assert!(z_local_product(&params(1, 1, 11), &tf, &tg, 7).is_err());
        let shallow = ZSeriesParams { alpha: 1.5, ..params(1, 1, 1) };
        assert!(z_series_direct(&shallow, &tf, &tg, 7).is_err());
    }
}
