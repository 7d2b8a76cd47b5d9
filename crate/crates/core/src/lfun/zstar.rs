//! Local and global factors of `Z*_{Q'}(u, v)`: the odd diagonal sum
//!
//! ```text
//! sum_{n1 n2 Q' = square, n1 n2 odd} lambda_f(n1) lambda_g(n2) / (n1^{1/2+u} n2^{1/2+v})
//!     * prod_{p | n1 n2 Q} p/(p+1)
//! ```
//!
//! divided by `L(1+u+v, f x g) L(1+2u, sym^2 f) L(1+2v, sym^2 g)`, one prime at a time.

use super::euler::{rankin_selberg_inverse_factor, sym2_inverse_factor, MIN_PRIME_CUTOFF};
use crate::arith::{is_prime, primes_up_to};
use crate::error::{invalid, Error, Result};
use crate::forms::CoefficientTable;

/// Default cap on the total exponent `a + b` in a local diagonal sum.
pub const MAX_LOCAL_DEGREE: u32 = 60;
/// The cap is raised up to this degree when the certified tail needs it (near `u = -1/4`).
pub const HARD_LOCAL_DEGREE: u32 = 600;
const LOCAL_TAIL_TOL: f64 = 1e-12;

fn lambda_powers(lambda_p: f64, ramified: bool, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(lambda_p);
    for k in 2..=n {
        let next = if ramified {
            lambda_p * out[k - 1]
        } else {
            lambda_p * out[k - 1] - out[k - 2]
        };
        out.push(next);
    }
    out
}

/// `(rho, B)` with `|lambda(p^a)| rho_0^a <= B(a) rho^a`: for good `p`,
/// `|lambda(p^a)| = |sin((a+1) t)/sin t| <= min(a + 1, 1/|sin t|)`.
fn coefficient_envelope(lambda_p: f64, ramified: bool, rho0: f64) -> (f64, f64) {
    if ramified {
        (rho0 * lambda_p.abs().max(1e-300), 1.0)
    } else {
        let s2 = 1.0 - lambda_p * lambda_p / 4.0;
        let inv_sin = if s2 > 1e-8 { 1.0 / s2.sqrt() } else { f64::INFINITY };
        (rho0, inv_sin)
    }
}

fn diagonal_tail(k: u32, env_f: (f64, f64), env_g: (f64, f64)) -> f64 {
    let rho = env_f.0.max(env_g.0);
    let mut tail = 0.0;
    let mut pow = rho.powi(k as i32 + 1);
    for m in (k + 1)..(k + 4000) {
        let mf = (m as f64 + 1.0).min(env_f.1);
        let mg = (m as f64 + 1.0).min(env_g.1);
        let term = (m as f64 + 1.0) * mf * mg * pow;
        tail += term;
        if term < 1e-30 {
            break;
        }
        pow *= rho;
    }
    tail
}

/// Local diagonal sum `D_p(u, v)` for odd `p`, with `r_p = v_p(Q')`.
pub fn local_diagonal(
    p: u64,
    r_p: u32,
    u: f64,
    v: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
) -> Result<f64> {
    let (qf, qg) = (tf.form().level, tg.form().level);
    let (ram_f, ram_g) = (qf % p == 0, qg % p == 0);
    let (lf, lg) = (tf.lambda(p as usize), tg.lambda(p as usize));
    let pf = p as f64;
    let rho_f = pf.powf(-(0.5 + u));
    let rho_g = pf.powf(-(0.5 + v));
    let env_f = coefficient_envelope(lf, ram_f, rho_f);
    let env_g = coefficient_envelope(lg, ram_g, rho_g);

    let parity = r_p % 2;
    let mut k = parity;
    while diagonal_tail(k, env_f, env_g) > 1e-16 && k + 2 <= MAX_LOCAL_DEGREE {
        k += 2;
    }
    while diagonal_tail(k, env_f, env_g) > LOCAL_TAIL_TOL && k + 2 <= HARD_LOCAL_DEGREE {
        k += 2;
    }
    let tail = diagonal_tail(k, env_f, env_g);
    if tail > LOCAL_TAIL_TOL {
        return Err(Error::Numeric(format!(
            "local diagonal sum at p = {p} has tail {tail:.2e} at degree {k}"
        )));
    }

    let mf = lambda_powers(lf, ram_f, k as usize);
    let mg = lambda_powers(lg, ram_g, k as usize);
    let w = pf / (pf + 1.0);
    let p_divides_q = qf % p == 0 || qg % p == 0;
    let mut total = 0.0;
    let mut m = parity;
    while m <= k {
        let mut shell = 0.0;
        for a in 0..=m {
            let b = m - a;
            shell += mf[a as usize] * mg[b as usize] * rho_f.powi(a as i32) * rho_g.powi(b as i32);
        }
        total += if m > 0 || p_divides_q { w * shell } else { shell };
        m += 2;
    }
    Ok(total)
}

/// Product of the three inverse local L-factors at `p` (`p = 2` allowed).
pub fn local_l_inverse(p: u64, u: f64, v: f64, tf: &CoefficientTable, tg: &CoefficientTable) -> f64 {
    let (qf, qg) = (tf.form().level, tg.form().level);
    let (ram_f, ram_g) = (qf % p == 0, qg % p == 0);
    let (lf, lg) = (tf.lambda(p as usize), tg.lambda(p as usize));
    let pf = p as f64;
    sym2_inverse_factor(lf, ram_f, pf.powf(-(1.0 + 2.0 * u)))
        * sym2_inverse_factor(lg, ram_g, pf.powf(-(1.0 + 2.0 * v)))
        * rankin_selberg_inverse_factor(lf, lg, ram_f, ram_g, pf.powf(-(1.0 + u + v)))
}

fn check_region(u: f64, v: f64) -> Result<()> {
    if !(u > -0.25 && v > -0.25) {
        return invalid(format!("(u, v) = ({u}, {v}) outside u, v > -1/4"));
    }
    Ok(())
}

/// Local factor of `Z*_{Q'}` at an odd prime `p`.
pub fn zstar_local(
    p: u64,
    q_prime: u64,
    u: f64,
    v: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
) -> Result<f64> {
    if p % 2 == 0 || !is_prime(p) {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    if q_prime == 0 {
        return invalid("Q' must be positive");
    }
    check_region(u, v)?;
    let mut r_p = 0;
    let mut qp = q_prime;
    while qp % p == 0 {
        qp /= p;
        r_p += 1;
    }
    Ok(local_diagonal(p, r_p, u, v, tf, tg)? * local_l_inverse(p, u, v, tf, tg))
}

fn check_pair(tf: &CoefficientTable, tg: &CoefficientTable, cutoff: u64) -> Result<()> {
    super::euler::check_distinct(tf, tg)?;
    if cutoff < MIN_PRIME_CUTOFF {
        return invalid(format!("prime cutoff {cutoff} below {MIN_PRIME_CUTOFF}"));
    }
    tf.require_limit(cutoff as usize)?;
    tg.require_limit(cutoff as usize)
}

/// `Z*_{Q'}(u, v)` truncated to primes `<= cutoff`.
pub fn zstar_qprime(
    q_prime: u64,
    u: f64,
    v: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    cutoff: u64,
) -> Result<f64> {
    check_pair(tf, tg, cutoff)?;
    check_region(u, v)?;
    let mut acc = local_l_inverse(2, u, v, tf, tg);
    for p in primes_up_to(cutoff as usize).into_iter().skip(1) {
        acc *= zstar_local(p, q_prime, u, v, tf, tg)?;
    }
    Ok(acc)
}

/// The four `Z*_{Q'}` for `Q' = 1, q1, q2, q1 q2`.
pub fn zstar_components(
    u: f64,
    v: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    cutoff: u64,
) -> Result<[f64; 4]> {
    check_pair(tf, tg, cutoff)?;
    check_region(u, v)?;
    let (q1, q2) = (tf.form().level, tg.form().level);
    let qs = [1, q1, q2, q1 * q2];
    // primes not dividing q1 q2 contribute identically to all four
    let mut common = local_l_inverse(2, u, v, tf, tg);
    let mut special = [1.0f64; 4];
    for p in primes_up_to(cutoff as usize).into_iter().skip(1) {
        if (q1 * q2) % p == 0 {
            for (s, &qp) in special.iter_mut().zip(&qs) {
                *s *= zstar_local(p, qp, u, v, tf, tg)?;
            }
        } else {
            common *= zstar_local(p, 1, u, v, tf, tg)?;
        }
    }
    Ok(special.map(|s| s * common))
}

/// `Z*(u,v) = Z*_1 - i^k1 eta_f Z*_q1 - i^k2 eta_g Z*_q2 + i^(k1+k2) eta_f eta_g Z*_Q`.
pub fn zstar_combined(
    u: f64,
    v: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    cutoff: u64,
) -> Result<f64> {
    let [z1, zq1, zq2, zq] = zstar_components(u, v, tf, tg, cutoff)?;
    let (f, g) = (tf.form(), tg.form());
    let sf = -(f.i_pow_weight() * f.eta) as f64;
    let sg = -(g.i_pow_weight() * g.eta) as f64;
    Ok(z1 + sf * zq1 + sg * zq2 + sf * sg * zq)
}
