//! The leading constants of the mixed moment,
//!
//! ```text
//! C0 = F^(0) L(1, sym^2 f) L(1, f x g) L(1, sym^2 g) Z*(0,0) / (2 pi^2),
//! C1 = C0 (gamma_f'(0) + gamma_g'(0) + 2 L'/L(1, sym^2 f) + 2 L/L'(1, f x g)
//!          + 2 L'/L(1, sym^2 f) + Z*_u(0,0)/Z*(0,0) + Z*_v(0,0)/Z*(0,0)),
//! ```
//!
//! `C1` taken term by term as written. Alongside it, `C1` is recomputed as the
//! coefficient of `log M` in the double residue at `u = v = 0` of
//! `K(u,v) M^{u+v} / (u^2 v^2)`, `K = gamma_f(u) gamma_g(v) L(1+u+v, f x g)
//! L(1+2u, sym^2 f) L(1+2v, sym^2 g) Z*(u,v)`, i.e. `C0 (K_u + K_v) / K`.

use std::f64::consts::PI;

use super::euler::{check_distinct, log_rankin_selberg, log_sym2, rankin_selberg_L_at, sym2_L_at};
use super::zstar::zstar_combined;
use crate::analytic::{gamma_prime_at_zero, GammaFactor, KernelSet};
use crate::error::{Error, Result};
use crate::forms::CoefficientTable;

/// Finite-difference step for logarithmic derivatives of the Euler products.
pub const L_STEP: f64 = 1e-4;
/// Finite-difference step for the partial derivatives of `Z*`.
pub const ZSTAR_STEP: f64 = 1e-3;
/// Largest accepted relative change of `C1` under step halving.
pub const C1_DRIFT_TOL: f64 = 1e-4;

/// Central difference with one Richardson extrapolation step.
fn richardson(f: impl Fn(f64) -> Result<f64>, x0: f64, h: f64) -> Result<f64> {
    let central = |h: f64| -> Result<f64> { Ok((f(x0 + h)? - f(x0 - h)?) / (2.0 * h)) };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

#[allow(non_snake_case)]
pub fn constant_c0(
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    kernels: &KernelSet,
    prime_cutoff: u64,
) -> Result<f64> {
    check_distinct(tf, tg)?;
    let lf = sym2_L_at(1.0, tf, prime_cutoff)?.value;
    let lg = sym2_L_at(1.0, tg, prime_cutoff)?.value;
    let lfg = rankin_selberg_L_at(1.0, tf, tg, prime_cutoff)?.value;
    let z = zstar_combined(0.0, 0.0, tf, tg, prime_cutoff)?;
    let c0 = kernels.f_check(0.0) * lf * lg * lfg * z / (2.0 * PI * PI);
    if !c0.is_finite() || c0 == 0.0 {
        return Err(Error::Numeric(format!("C0 = {c0} is not finite and nonzero")));
    }
    Ok(c0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C1Value {
    /// The formula taken term by term.
    pub printed: f64,
    /// `C0 (K_u + K_v)/K` from the double residue.
    pub residue: f64,
    /// Largest relative change of either value when both finite-difference steps halve.
    pub step_drift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Derivatives {
    sym2_f: f64,
    sym2_g: f64,
    fg: f64,
    zstar: f64,
    zstar_u: f64,
    zstar_v: f64,
    residue_u: f64,
    residue_v: f64,
}

fn derivatives(tf: &CoefficientTable, tg: &CoefficientTable, cutoff: u64, hl: f64, hz: f64) -> Result<Derivatives> {
    let sym2_f = richardson(|s| Ok(log_sym2(s, tf, cutoff)?.0), 1.0, hl)?;
    let sym2_g = richardson(|s| Ok(log_sym2(s, tg, cutoff)?.0), 1.0, hl)?;
    let fg = richardson(|s| Ok(log_rankin_selberg(s, tf, tg, cutoff)?.0), 1.0, hl)?;
    let zstar = zstar_combined(0.0, 0.0, tf, tg, cutoff)?;
    let zstar_u = richardson(|u| zstar_combined(u, 0.0, tf, tg, cutoff), 0.0, hz)?;
    let zstar_v = richardson(|v| zstar_combined(0.0, v, tf, tg, cutoff), 0.0, hz)?;

    let (gf, gg) = (GammaFactor::new(tf.form()), GammaFactor::new(tg.form()));
    let big_k = |u: f64, v: f64| -> Result<f64> {
        let logs = log_rankin_selberg(1.0 + u + v, tf, tg, cutoff)?.0
            + log_sym2(1.0 + 2.0 * u, tf, cutoff)?.0
            + log_sym2(1.0 + 2.0 * v, tg, cutoff)?.0;
        Ok(gf.eval_real(u) * gg.eval_real(v) * logs.exp() * zstar_combined(u, v, tf, tg, cutoff)?)
    };
    let k0 = big_k(0.0, 0.0)?;
    let residue_u = richardson(|u| big_k(u, 0.0), 0.0, hz)? / k0;
    let residue_v = richardson(|v| big_k(0.0, v), 0.0, hz)? / k0;
    Ok(Derivatives {
        sym2_f,
        sym2_g,
        fg,
        zstar,
        zstar_u,
        zstar_v,
        residue_u,
        residue_v,
    })
}

fn assemble_c1(c0: f64, gp: f64, d: &Derivatives) -> (f64, f64) {
    let printed = c0
        * (gp
            + 2.0 * d.sym2_f
            + 2.0 / d.fg
            + 2.0 * d.sym2_f
            + d.zstar_u / d.zstar
            + d.zstar_v / d.zstar);
    let residue = c0 * (d.residue_u + d.residue_v);
    (printed, residue)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

#[allow(non_snake_case)]
pub fn constant_c1(
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    kernels: &KernelSet,
    prime_cutoff: u64,
) -> Result<C1Value> {
    Ok(constants_report(tf, tg, kernels, prime_cutoff)?.c1_value())
}

/// Every ingredient of `C0` and `C1` at one prime cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsReport {
    pub prime_cutoff: u64,
    pub f_check_0: f64,
    pub l_sym2_f: f64,
    pub l_sym2_g: f64,
    pub l_fg: f64,
    pub zstar00: f64,
    /// `(d/du Z*, d/dv Z*)` at the origin.
    pub zstar_partials: (f64, f64),
    pub gamma_prime_f: f64,
    pub gamma_prime_g: f64,
    pub log_deriv_sym2_f: f64,
    pub log_deriv_sym2_g: f64,
    pub log_deriv_fg: f64,
    pub c0: f64,
    pub c1: f64,
    pub c1_residue: f64,
    pub c1_step_drift: f64,
}

impl ConstantsReport {
    pub fn c1_value(&self) -> C1Value {
        C1Value {
            printed: self.c1,
            residue: self.c1_residue,
            step_drift: self.c1_step_drift,
        }
    }
}

pub fn constants_report(
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    kernels: &KernelSet,
    prime_cutoff: u64,
) -> Result<ConstantsReport> {
    check_distinct(tf, tg)?;
    let l_sym2_f = sym2_L_at(1.0, tf, prime_cutoff)?.value;
    let l_sym2_g = sym2_L_at(1.0, tg, prime_cutoff)?.value;
    let l_fg = rankin_selberg_L_at(1.0, tf, tg, prime_cutoff)?.value;
    let f_check_0 = kernels.f_check(0.0);
    let gamma_prime_f = gamma_prime_at_zero(tf.form());
    let gamma_prime_g = gamma_prime_at_zero(tg.form());
    let gp = gamma_prime_f + gamma_prime_g;

    let d = derivatives(tf, tg, prime_cutoff, L_STEP, ZSTAR_STEP)?;
    let c0 = f_check_0 * l_sym2_f * l_sym2_g * l_fg * d.zstar / (2.0 * PI * PI);
    if !c0.is_finite() || c0 == 0.0 {
        return Err(Error::Numeric(format!("C0 = {c0} is not finite and nonzero")));
    }
    let (c1, c1_residue) = assemble_c1(c0, gp, &d);
    let half = derivatives(tf, tg, prime_cutoff, L_STEP / 2.0, ZSTAR_STEP / 2.0)?;
    let (c1_half, res_half) = assemble_c1(c0, gp, &half);
    let c1_step_drift = rel(c1, c1_half).max(rel(c1_residue, res_half));
    if !(c1.is_finite() && c1_residue.is_finite()) {
        return Err(Error::Numeric("C1 is not finite".into()));
    }
    if c1_step_drift > C1_DRIFT_TOL {
        return Err(Error::Numeric(format!(
            "C1 finite-difference drift {c1_step_drift:.2e} exceeds {C1_DRIFT_TOL:.0e}"
        )));
    }
    Ok(ConstantsReport {
        prime_cutoff,
        f_check_0,
        l_sym2_f,
        l_sym2_g,
        l_fg,
        zstar00: d.zstar,
        zstar_partials: (d.zstar_u, d.zstar_v),
        gamma_prime_f,
        gamma_prime_g,
        log_deriv_sym2_f: d.sym2_f,
        log_deriv_sym2_g: d.sym2_g,
        log_deriv_fg: d.fg,
        c0,
        c1,
        c1_residue,
        c1_step_drift,
    })
}
