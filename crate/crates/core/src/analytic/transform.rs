//! The Fourier-type transform `F^(y) = int (cos 2 pi x y + sin 2 pi x y) F(x) dx` and Mellin
//! transforms of compactly supported functions.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;

use super::quad::{integrate, integrate_panels};
use super::special::{ln_cos, ln_gamma};
use crate::error::{invalid, Result};

const DIRECT_TOL: f64 = 1e-13;

fn check_support(support: (f64, f64)) -> Result<()> {
    let (a, b) = support;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return invalid(format!("support [{a}, {b}] must be a finite interval"));
    }
    Ok(())
}

/// `F^(y)` by adaptive quadrature of the defining integral over `support`.
pub fn fourier_check(f: impl Fn(f64) -> f64, support: (f64, f64), y: f64) -> Result<f64> {
    check_support(support)?;
    let (a, b) = support;
    let pieces = (2.0 * y.abs() * (b - a)).ceil() as usize + 1;
    let (v, _) = integrate_panels(
        |x: f64| {
            // reduce x*y mod 1 with the rounding error of the product kept, so the phase
            // stays accurate to ~eps at large y
            let t = y * x;
            let e = y.mul_add(x, -t);
            let (s, c) = (2.0 * PI * ((t - t.round()) + e)).sin_cos();
            (c + s) * f(x)
        },
        a,
        b,
        pieces,
        DIRECT_TOL,
    );
    Ok(v)
}

/// Mellin transform `int_0^inf F(x) x^{s-1} dx` of a function supported in `[a, b]`, `a > 0`.
pub fn mellin(f: impl Fn(f64) -> f64, support: (f64, f64), s: Complex64) -> Result<Complex64> {
    check_support(support)?;
    let (a, b) = support;
    if a <= 0.0 {
        return invalid("Mellin transform needs support inside (0, inf)");
    }
    // integrate in v = log x, where x^{s-1} dx = e^{s v} dv
    let (la, lb) = (a.ln(), b.ln());
    let pieces = (s.im.abs() * (lb - la) / PI).ceil() as usize + 1;
    let (v, _) = integrate_panels(
        |v: f64| (s * v).exp() * f(v.exp()),
        la,
        lb,
        pieces,
        1e-13,
    );
    Ok(v)
}

/// Evaluator of `F^` through the Mellin transform of `F` on the line `Re s = 1/2`:
///
/// `F^(y) = (1/2 pi i) int_(1/2) F~(1-s) Gamma(s) (cos + sgn(y) sin)(pi s / 2) (2 pi |y|)^{-s} ds`.
#[derive(Clone, Debug)]
pub struct MellinRoute {
    v0: f64,
    dv: f64,
    samples: Vec<f64>,
    t_step: f64,
    t_cap: f64,
    integral: f64,
}

impl MellinRoute {
    pub fn new(f: impl Fn(f64) -> f64, support: (f64, f64)) -> Result<Self> {
        check_support(support)?;
        let (a, b) = support;
        if a <= 0.0 {
            return invalid("Mellin route needs support inside (0, inf)");
        }
        let t_cap = 4000.0;
        // trapezoid in v = log x, aliasing-free up to frequency ~ 2 t_cap
        let (la, lb) = (a.ln(), b.ln());
        let n = ((lb - la) * t_cap / PI).ceil() as usize;
        let dv = (lb - la) / n as f64;
        let samples = (0..=n)
            .map(|k| {
                let v = la + k as f64 * dv;
                f(v.exp()) * (0.5 * v).exp() * dv
            })
            .collect();
        let (integral, _) = integrate(&f, a, b, DIRECT_TOL);
        Ok(Self {
            v0: la,
            dv,
            samples,
            t_step: 0.05,
            t_cap,
            integral,
        })
    }

    /// `F~(1/2 - i t)`.
    fn mellin_half_line(&self, t: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -t * self.dv);
        let mut cur = Complex64::from_polar(1.0, -t * self.v0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &g in &self.samples {
            acc += cur * g;
            cur *= rot;
        }
        acc
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y == 0.0 {
            return self.integral;
        }
        let sgn = y.signum();
        let ln_2piy = (2.0 * PI * y.abs()).ln();
        let kernel = |t: f64| {
            let s = Complex64::new(0.5, t);
            (ln_gamma(s) + ln_cos(s * (PI / 2.0) - sgn * FRAC_PI_4) - s * ln_2piy).exp() * SQRT_2
        };
        let h = self.t_step;
        let mut total = 0.5 * (self.mellin_half_line(0.0) * kernel(0.0)).re;
        let mut quiet = 0.0;
        let mut j = 1usize;
        loop {
            let t = j as f64 * h;
            let term = (self.mellin_half_line(t) * kernel(t)).re;
            total += term;
            quiet = if term.abs() < 1e-17 { quiet + h } else { 0.0 };
            if quiet > 20.0 || t >= self.t_cap {
                break;
            }
            j += 1;
        }
        total * h / PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::kernels::{bump_f, BUMP_SUPPORT};

    #[test]
    fn direct_route_basics() {
        let total = fourier_check(bump_f, BUMP_SUPPORT, 0.0).unwrap();
        let (plain, _) = integrate(bump_f, 0.5, 2.0, 1e-14);
        assert!((total - plain).abs() < 1e-13);
        // cos part even, sin part odd
        for y in [0.3, 2.0, 7.5] {
            let p = fourier_check(bump_f, BUMP_SUPPORT, y).unwrap();
            let m = fourier_check(bump_f, BUMP_SUPPORT, -y).unwrap();
            let cos_part = fourier_check(|x| bump_f(x) * (2.0 * PI * x * y).cos(), BUMP_SUPPORT, 0.0)
                .unwrap();
            assert!(((p + m) / 2.0 - cos_part).abs() < 1e-12);
        }
    }

    #[test]
    fn mellin_examples() {
        let (a, b) = (0.5, 2.0);
        let s = Complex64::new(1.7, -3.2);
        let got = mellin(|x| x, (a, b), s).unwrap();
        let want = (Complex64::from(b).powc(s + 1.0) - Complex64::from(a).powc(s + 1.0)) / (s + 1.0);
        assert!((got - want).norm() < 1e-10);
        let one = mellin(bump_f, BUMP_SUPPORT, Complex64::from(1.0)).unwrap();
        let (plain, _) = integrate(bump_f, 0.5, 2.0, 1e-14);
        assert!((one.re - plain).abs() < 1e-10);
        // independent high-precision value of |F~(1 + 30i)| for this bump
        let t30 = mellin(bump_f, BUMP_SUPPORT, Complex64::new(1.0, 30.0)).unwrap().norm();
        assert!((t30 - 1.216_839_151_401_797e-3).abs() < 1e-10);
        assert!(mellin(bump_f, BUMP_SUPPORT, Complex64::new(1.0, 40.0)).unwrap().norm() <= 1e-3);
    }

    #[test]
    fn routes_agree() {
        let route = MellinRoute::new(bump_f, BUMP_SUPPORT).unwrap();
        for y in [0.1, 1.0, 10.0, -1.0] {
            let direct = fourier_check(bump_f, BUMP_SUPPORT, y).unwrap();
            let via = route.eval(y);
            assert!((direct - via).abs() <= 1e-8, "y={y}: {direct} vs {via}");
        }
    }
}
