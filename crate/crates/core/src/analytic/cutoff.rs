//! The smoothing cutoff of the approximate functional equation,
//!
//! ```text
//! W_Z(x) = (1/2 pi i) * int_(c) Gamma(u + k/2)/Gamma(k/2) * y^(-u) * (1 - u log Z) / u^2 du,
//! y = 2 pi x / (Z sqrt(q)),
//! ```
//!
//! evaluated by the trapezoid rule on a vertical line and served from a table on a
//! geometric grid. For `y < 1` the line is moved left of the double pole at `u = 0`
//! (picking up its residue `psi(k/2) - log y - log Z`), which avoids the cancellation
//! a right-hand contour suffers for small `y`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::special::{digamma, ln_gamma};
use crate::error::{invalid, Error, Result};
use crate::forms::NewformSpec;

/// Contour abscissa, truncation `|Im u| <= truncation` and trapezoid step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureParams {
    pub abscissa: f64,
    pub truncation: f64,
    pub step: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self {
            abscissa: 1.5,
            truncation: 50.0,
            step: 0.05,
        }
    }
}

pub const GRID_POINTS: usize = 2048;
/// Grid range in the variable `y = 2 pi x / (Z sqrt(q))`.
pub const GRID_Y_RANGE: (f64, f64) = (1e-6, 1e3);

const TAIL_TARGET: f64 = 1e-13;
const MAX_DECAY_ORDER: usize = 60;

/// Trapezoid weights on one vertical line, folded by conjugate symmetry.
#[derive(Clone, Debug)]
struct Contour {
    c: f64,
    step: f64,
    w: Vec<Complex64>,
    dw: Vec<Complex64>,
}

impl Contour {
    fn new(kappa_half: f64, ln_z: f64, c: f64, params: &QuadratureParams) -> Result<Self> {
        let h = params.step;
        let n = (params.truncation / h).round() as usize;
        let lg0 = ln_gamma(Complex64::from(kappa_half));
        let integrand = |t: f64| {
            let u = Complex64::new(c, t);
            (ln_gamma(u + kappa_half) - lg0).exp() * (Complex64::from(1.0) - u * ln_z) / (u * u)
        };
        let mut w = Vec::with_capacity(n + 1);
        let mut dw = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let u = Complex64::new(c, j as f64 * h);
            let weight = h / (2.0 * PI) * if j == 0 { 1.0 } else { 2.0 };
            let g = integrand(u.im) * weight;
            w.push(g);
            dw.push(-u * g);
        }
        // Stirling decay ~ e^{-pi t/2}: the neglected tail is about (2/pi) |g(T)|.
        let tail = integrand(n as f64 * h).norm() * 2.0 / PI / (2.0 * PI) * 2.0;
        if tail > TAIL_TARGET {
            return Err(Error::Numeric(format!(
                "cutoff quadrature tail {tail:.2e} above target at truncation {}",
                params.truncation
            )));
        }
        Ok(Self { c, step: h, w, dw })
    }

    /// Integral and its derivative in `log y`.
    fn eval(&self, ln_y: f64) -> (f64, f64) {
        let rot = Complex64::from_polar(1.0, -self.step * ln_y);
        let mut cur = Complex64::new(1.0, 0.0);
        let mut v = 0.0;
        let mut dv = 0.0;
        for (w, dw) in self.w.iter().zip(&self.dw) {
            v += w.re * cur.re - w.im * cur.im;
            dv += dw.re * cur.re - dw.im * cur.im;
            cur *= rot;
        }
        let scale = (-self.c * ln_y).exp();
        (v * scale, dv * scale)
    }
}

/// Direct (untabulated) evaluation of `W_Z` for one form and one `Z`.
#[derive(Clone, Debug)]
pub struct CutoffIntegral {
    kappa_half: f64,
    ln_z: f64,
    x_to_y: f64,
    residue_const: f64,
    params: QuadratureParams,
    right: Contour,
    left: Contour,
}

impl CutoffIntegral {
    pub fn new(form: &NewformSpec, z: f64, params: QuadratureParams) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return invalid(format!("Z = {z} must be positive"));
        }
        if !(params.abscissa > 0.0 && params.step > 0.0 && params.truncation > params.step) {
            return invalid(format!("bad quadrature parameters {params:?}"));
        }
        let kappa_half = form.weight as f64 / 2.0;
        let ln_z = z.ln();
        let right = Contour::new(kappa_half, ln_z, params.abscissa, &params)?;
        let left = Contour::new(kappa_half, ln_z, -kappa_half / 2.0, &params)?;
        Ok(Self {
            kappa_half,
            ln_z,
            x_to_y: 2.0 * PI / (z * (form.level as f64).sqrt()),
            residue_const: digamma(kappa_half) - ln_z,
            params,
            right,
            left,
        })
    }

    pub fn params(&self) -> &QuadratureParams {
        &self.params
    }

    /// `log y` for a given `log x`.
    #[inline]
    pub fn ln_y(&self, ln_x: f64) -> f64 {
        ln_x + self.x_to_y.ln()
    }

    /// `W` and `dW/dlog y` at `log y`.
    pub(crate) fn eval_ln_y(&self, ln_y: f64) -> (f64, f64) {
        if ln_y < 0.0 {
            let (v, dv) = self.left.eval(ln_y);
            (v + self.residue_const - ln_y, dv - 1.0)
        } else {
            self.right.eval(ln_y)
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return invalid(format!("x = {x} must be positive"));
        }
        Ok(self.eval_ln_y(self.ln_y(x.ln())).0)
    }

    /// Evaluation on the line `Re u = c` (residue added for `c < 0`); `c` must avoid the poles.
    pub fn eval_on_contour(&self, x: f64, c: f64) -> Result<f64> {
        if !(x > 0.0) {
            return invalid(format!("x = {x} must be positive"));
        }
        if c == 0.0 || c <= -self.kappa_half {
            return invalid(format!("abscissa {c} must lie in (-k/2, 0) or (0, inf)"));
        }
        let contour = Contour::new(self.kappa_half, self.ln_z, c, &self.params)?;
        let ln_y = self.ln_y(x.ln());
        let (v, _) = contour.eval(ln_y);
        Ok(if c < 0.0 { v + self.residue_const - ln_y } else { v })
    }

    /// Pairs `(c, log C_c)` with `|W(x)| <= C_c y^{-c}` for every `x > 0`.
    pub fn decay_constants(&self) -> Vec<(f64, f64)> {
        let h = 0.05;
        let lg0 = ln_gamma(Complex64::from(self.kappa_half)).re;
        (1..=MAX_DECAY_ORDER)
            .map(|ci| {
                let c = ci as f64;
                let t_max = 40.0 + 2.0 * c + 2.0 * self.kappa_half;
                let n = (t_max / h) as usize;
                let logs: Vec<f64> = (0..=n)
                    .map(|j| {
                        let u = Complex64::new(c, j as f64 * h);
                        ln_gamma(u + self.kappa_half).re - lg0
                            + (Complex64::from(1.0) - u * self.ln_z).norm().ln()
                            - 2.0 * u.norm().ln()
                    })
                    .collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = logs
                    .iter()
                    .enumerate()
                    .map(|(j, l)| (l - m).exp() * if j == 0 { 0.5 } else { 1.0 })
                    .sum();
                // both half-lines, 1/(2 pi), and a safety margin for the trapezoid
                (c, m + (s * h * 2.0 / (2.0 * PI) * 1.01).ln())
            })
            .collect()
    }
}

/// [`CutoffIntegral`] plus a cubic Hermite table on a geometric grid.
#[derive(Clone, Debug)]
pub struct CutoffKernel {
    integral: CutoffIntegral,
    ln_y0: f64,
    dlny: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    decay: Vec<(f64, f64)>,
}

impl CutoffKernel {
    pub fn new(form: &NewformSpec, z: f64, params: QuadratureParams) -> Result<Self> {
        let integral = CutoffIntegral::new(form, z, params)?;
        let ln_y0 = GRID_Y_RANGE.0.ln();
        let dlny = (GRID_Y_RANGE.1.ln() - ln_y0) / (GRID_POINTS - 1) as f64;
        let mut values = Vec::with_capacity(GRID_POINTS);
        let mut slopes = Vec::with_capacity(GRID_POINTS);
        for i in 0..GRID_POINTS {
            let (v, dv) = integral.eval_ln_y(ln_y0 + i as f64 * dlny);
            values.push(v);
            slopes.push(dv);
        }
        let decay = integral.decay_constants();
        Ok(Self {
            integral,
            ln_y0,
            dlny,
            values,
            slopes,
            decay,
        })
    }

    pub fn integral(&self) -> &CutoffIntegral {
        &self.integral
    }

    #[inline]
    pub fn ln_y(&self, ln_x: f64) -> f64 {
        self.integral.ln_y(ln_x)
    }

    /// `W` at `log y`: interpolated inside the grid, direct quadrature outside.
    #[inline]
    pub fn eval_ln_y(&self, ln_y: f64) -> f64 {
        let s = (ln_y - self.ln_y0) / self.dlny;
        if s >= 0.0 && s < (GRID_POINTS - 1) as f64 {
            let i = s as usize;
            let t = s - i as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = 3.0 * t2 - 2.0 * t3;
            let h11 = t3 - t2;
            h00 * self.values[i]
                + h01 * self.values[i + 1]
                + self.dlny * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
        } else {
            self.integral.eval_ln_y(ln_y).0
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return invalid(format!("x = {x} must be positive"));
        }
        Ok(self.eval_ln_y(self.ln_y(x.ln())))
    }

    /// `(c, log C_c)` with `|W| <= C_c y^{-c}`.
    pub fn decay_constants(&self) -> &[(f64, f64)] {
        &self.decay
    }
}

/// `W_Z(x)` by direct quadrature with default parameters.
pub fn cutoff_w(form: &NewformSpec, z: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return invalid(format!("x = {x} must be positive"));
    }
    CutoffIntegral::new(form, z, QuadratureParams::default())?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1(y: f64) -> f64 {
        // exponential integral by its series (small y) or continued fraction (large y)
        if y < 1.0 {
            let mut sum = 0.0;
            let mut term = 1.0;
            for k in 1..60 {
                term *= -y / k as f64;
                sum -= term / k as f64;
            }
            -0.577_215_664_901_532_9 - y.ln() + sum
        } else {
            let mut f = 0.0;
            for k in (1..200).rev() {
                let k = k as f64;
                f = k / (1.0 + k / (y + f));
            }
            (-y).exp() / (y + f)
        }
    }

    fn f11() -> NewformSpec {
        NewformSpec::bundled("11a").unwrap()
    }

    // For weight 2: W_Z(x) = E1(y) - log(Z) e^{-y}.
    fn closed_form(z: f64, x: f64) -> f64 {
        let y = 2.0 * PI * x / (z * 11f64.sqrt());
        e1(y) - z.ln() * (-y).exp()
    }

    #[test]
    fn matches_closed_form_weight_two() {
        for z in [1.0, 2.0, 0.5] {
            let k = CutoffIntegral::new(&f11(), z, QuadratureParams::default()).unwrap();
            for x in [1e-5, 1e-3, 0.05, 0.3, 1.0, 2.0, 7.0, 20.0] {
                let got = k.eval(x).unwrap();
                let want = closed_form(z, x);
                assert!((got - want).abs() < 1e-11, "z={z} x={x} got={got} want={want}");
            }
        }
    }

    #[test]
    fn small_and_large_x() {
        let f = f11();
        for z in [1.0, 3.0] {
            let w = cutoff_w(&f, z, 1e-4).unwrap();
            let law = digamma(1.0) + (11f64.sqrt() / (2.0 * PI * 1e-4)).ln();
            assert!((w - law).abs() <= 1e-3);
            assert!(cutoff_w(&f, z, 1e3 * z * 11f64.sqrt()).unwrap().abs() <= 1e-8);
        }
        assert!(cutoff_w(&f, 1.0, 0.0).is_err());
        assert!(cutoff_w(&f, -1.0, 1.0).is_err());
    }

    #[test]
    fn abscissa_independence() {
        let k = CutoffIntegral::new(&f11(), 2.0, QuadratureParams::default()).unwrap();
        for x in [0.1, 0.5, 1.3, 4.0, 10.0] {
            let vals: Vec<f64> = [1.0, 1.5, 2.0]
                .iter()
                .map(|&c| k.eval_on_contour(x, c).unwrap())
                .collect();
            assert!((vals[0] - vals[1]).abs() < 1e-9 && (vals[1] - vals[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn table_interpolation() {
        for (label, z) in [("11a", 1.0), ("17a", 2.0), ("delta", 0.5)] {
            let f = NewformSpec::bundled(label).unwrap();
            let k = CutoffKernel::new(&f, z, QuadratureParams::default()).unwrap();
            let (lo, hi) = (GRID_Y_RANGE.0.ln(), GRID_Y_RANGE.1.ln());
            for i in 0..100 {
                let ln_y = lo + (hi - lo) * (i as f64 + 0.37) / 100.0;
                let direct = k.integral().eval_ln_y(ln_y).0;
                assert!((k.eval_ln_y(ln_y) - direct).abs() <= 1e-9, "{label} ln_y={ln_y}");
            }
        }
    }

    #[test]
    fn decay_constants_bound_the_cutoff() {
        let k = CutoffKernel::new(&f11(), 2.0, QuadratureParams::default()).unwrap();
        for ln_y in [0.0, 1.0, 2.0, 3.0, 4.0] {
            let w = k.eval_ln_y(ln_y).abs();
            for &(c, lc) in k.decay_constants() {
                // 1e-15 covers the quadrature round-off floor where W itself is ~e^{-y}
                assert!(w <= (lc - c * ln_y).exp() * (1.0 + 1e-9) + 1e-15, "c={c} ln_y={ln_y}");
            }
        }
    }
}
