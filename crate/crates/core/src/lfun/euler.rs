//! Truncated Euler products for `L(s, sym^2 f)` and `L(s, f x g)`.
//!
//! Local factors are stored as inverse polynomials in `X = p^{-s}`; the same functions
//! feed the standalone evaluators and the local factors of `Z*`.

use crate::arith::primes_up_to;
use crate::error::{invalid, Error, Result};
use crate::forms::CoefficientTable;

/// Smallest accepted prime cutoff.
pub const MIN_PRIME_CUTOFF: u64 = 1000;

const SINGULAR: f64 = 1e-12;

/// Inverse local factor of `L(s, sym^2 f)`.
///
/// Unramified: `(1 - a^2 X)(1 - X)(1 - b^2 X)` with `a + b = lambda`, `ab = 1`;
/// ramified: `1 - lambda^2 X`.
pub fn sym2_inverse_factor(lambda_p: f64, ramified: bool, x: f64) -> f64 {
    if ramified {
        1.0 - lambda_p * lambda_p * x
    } else {
        (1.0 - (lambda_p * lambda_p - 2.0) * x + x * x) * (1.0 - x)
    }
}

/// Inverse local factor of `L(s, f x g)`.
///
/// Unramified: `prod (1 - a_i b_j X) = 1 - ab X + (a^2 + b^2 - 2) X^2 - ab X^3 + X^4`;
/// one side ramified: `1 - lf lg X + lr^2 X^2` with `lr` the ramified eigenvalue;
/// both ramified: `1 - lf lg X`.
pub fn rankin_selberg_inverse_factor(lf: f64, lg: f64, ram_f: bool, ram_g: bool, x: f64) -> f64 {
    let ab = lf * lg;
    match (ram_f, ram_g) {
        (false, false) => {
            let x2 = x * x;
            1.0 - ab * x + (lf * lf + lg * lg - 2.0) * x2 - ab * x2 * x + x2 * x2
        }
        (true, false) => 1.0 - ab * x + lf * lf * x * x,
        (false, true) => 1.0 - ab * x + lg * lg * x * x,
        (true, true) => 1.0 - ab * x,
    }
}

/// Value of a truncated Euler product, with the size of the last octave's contribution
/// (`|log|` of the product over `cutoff/2 < p <= cutoff`) as a tail indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerValue {
    pub value: f64,
    pub tail_estimate: f64,
    pub prime_cutoff: u64,
}

fn check_cutoff(table: &CoefficientTable, cutoff: u64) -> Result<()> {
    if cutoff < MIN_PRIME_CUTOFF {
        return invalid(format!("prime cutoff {cutoff} below {MIN_PRIME_CUTOFF}"));
    }
    table.require_limit(cutoff as usize)
}

fn checked_ln(inv: f64, p: u64) -> Result<f64> {
    if inv.abs() < SINGULAR || inv <= 0.0 {
        return Err(Error::Numeric(format!(
            "local Euler denominator {inv:.3e} at p = {p} is singular or non-positive"
        )));
    }
    Ok(inv.ln())
}

/// `(log L, log of the last-octave part)` for `L(s, sym^2 f)`, any real `s` near 1.
pub(crate) fn log_sym2(s: f64, t: &CoefficientTable, cutoff: u64) -> Result<(f64, f64)> {
    let q = t.form().level;
    let mut total = 0.0;
    let mut last = 0.0;
    for p in primes_up_to(cutoff as usize) {
        let x = (p as f64).powf(-s);
        let l = -checked_ln(sym2_inverse_factor(t.lambda(p as usize), q % p == 0, x), p)?;
        total += l;
        if 2 * p > cutoff {
            last += l;
        }
    }
    Ok((total, last))
}

pub(crate) fn log_rankin_selberg(
    s: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    cutoff: u64,
) -> Result<(f64, f64)> {
    let (qf, qg) = (tf.form().level, tg.form().level);
    let mut total = 0.0;
    let mut last = 0.0;
    for p in primes_up_to(cutoff as usize) {
        let x = (p as f64).powf(-s);
        let inv = rankin_selberg_inverse_factor(
            tf.lambda(p as usize),
            tg.lambda(p as usize),
            qf % p == 0,
            qg % p == 0,
            x,
        );
        let l = -checked_ln(inv, p)?;
        total += l;
        if 2 * p > cutoff {
            last += l;
        }
    }
    Ok((total, last))
}

#[allow(non_snake_case)]
pub fn sym2_L_at(s: f64, table: &CoefficientTable, prime_cutoff: u64) -> Result<EulerValue> {
    if !(s >= 1.0) {
        return invalid(format!("s = {s} must be >= 1"));
    }
    check_cutoff(table, prime_cutoff)?;
    let (l, last) = log_sym2(s, table, prime_cutoff)?;
    Ok(EulerValue {
        value: l.exp(),
        tail_estimate: last.abs(),
        prime_cutoff,
    })
}

pub(crate) fn check_distinct(tf: &CoefficientTable, tg: &CoefficientTable) -> Result<()> {
    if tf.form().label == tg.form().label {
        return invalid(format!(
            "forms must be distinct (both are '{}')",
            tf.form().label
        ));
    }
    Ok(())
}

#[allow(non_snake_case)]
pub fn rankin_selberg_L_at(
    s: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    prime_cutoff: u64,
) -> Result<EulerValue> {
    if !(s >= 1.0) {
        return invalid(format!("s = {s} must be >= 1"));
    }
    check_distinct(tf, tg)?;
    check_cutoff(tf, prime_cutoff)?;
    check_cutoff(tg, prime_cutoff)?;
    let (l, last) = log_rankin_selberg(s, tf, tg, prime_cutoff)?;
    Ok(EulerValue {
        value: l.exp(),
        tail_estimate: last.abs(),
        prime_cutoff,
    })
}
