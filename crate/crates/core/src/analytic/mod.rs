//! Smooth kernels, the approximate-functional-equation cutoff, transforms and gamma factors.

pub mod cutoff;
pub mod kernels;
pub mod quad;
pub mod special;
pub mod transform;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use cutoff::{cutoff_w, CutoffIntegral, CutoffKernel, QuadratureParams};
pub use kernels::{bump_f, partition_g, window_v, BUMP_SUPPORT};
pub use transform::{fourier_check, mellin, MellinRoute};

use crate::error::{invalid, Result};
use crate::forms::NewformSpec;

/// `gamma_f(u) = Gamma(u + k/2)/Gamma(k/2) * (2 pi / sqrt(q))^{-u}`.
#[derive(Clone, Debug)]
pub struct GammaFactor {
    pub form: NewformSpec,
}

impl GammaFactor {
    pub fn new(form: &NewformSpec) -> Self {
        Self { form: form.clone() }
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        let kh = self.form.weight as f64 / 2.0;
        let ln_ratio = ln_sqrt_q_over_2pi(&self.form);
        (special::ln_gamma(u + kh) - special::ln_gamma(Complex64::from(kh)) + u * ln_ratio).exp()
    }

    pub fn eval_real(&self, u: f64) -> f64 {
        self.eval(Complex64::from(u)).re
    }

    pub fn derivative_at_zero(&self) -> f64 {
        gamma_prime_at_zero(&self.form)
    }
}

fn ln_sqrt_q_over_2pi(form: &NewformSpec) -> f64 {
    0.5 * (form.level as f64).ln() - (2.0 * PI).ln()
}

/// `gamma_f'(0) = psi(k/2) + log(sqrt(q) / 2 pi)`.
pub fn gamma_prime_at_zero(form: &NewformSpec) -> f64 {
    special::digamma(form.weight as f64 / 2.0) + ln_sqrt_q_over_2pi(form)
}

/// The test function `F` (a scaled bump), the partition kernels and cutoff quadrature settings.
#[derive(Clone, Debug)]
pub struct KernelSet {
    f_scale: f64,
    pub quadrature: QuadratureParams,
}

impl Default for KernelSet {
    fn default() -> Self {
        Self {
            f_scale: 1.0,
            quadrature: QuadratureParams::default(),
        }
    }
}

impl KernelSet {
    /// Kernels with `F = scale * bump`.
    pub fn with_scale(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid(format!("F scale {scale} must be positive"));
        }
        Ok(Self {
            f_scale: scale,
            ..Self::default()
        })
    }

    pub fn f_scale(&self) -> f64 {
        self.f_scale
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        self.f_scale * bump_f(x)
    }

    pub fn g(&self, x: f64) -> f64 {
        partition_g(x)
    }

    pub fn v(&self, x: f64) -> f64 {
        window_v(x)
    }

    pub fn f_support(&self) -> (f64, f64) {
        BUMP_SUPPORT
    }

    /// `F^(y)` by the direct route.
    pub fn f_check(&self, y: f64) -> f64 {
        fourier_check(|x| self.f(x), BUMP_SUPPORT, y).expect("bump support is valid")
    }

    pub fn cutoff(&self, form: &NewformSpec, z: f64) -> Result<CutoffKernel> {
        CutoffKernel::new(form, z, self.quadrature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_factor_derivative() {
        let f = NewformSpec::bundled("11a").unwrap();
        let gf = GammaFactor::new(&f);
        assert!((gf.eval_real(0.0) - 1.0).abs() < 1e-15);
        let closed = gamma_prime_at_zero(&f);
        assert!((closed + 1.2162).abs() < 1e-4);
        let h = 1e-5;
        let fd = (gf.eval_real(h) - gf.eval_real(-h)) / (2.0 * h);
        assert!((fd - closed).abs() < 1e-8);
    }

    #[test]
    fn partition_identity_dyadic() {
        for j_max in 1..=8u32 {
            let hi = 3.0 * 2f64.powi(j_max as i32 - 1);
            for i in 0..10_000 {
                let x = 1.0 + (hi - 1.0) * i as f64 / 9_999.0;
                let s: f64 = (0..=j_max).map(|j| partition_g(x / 2f64.powi(j as i32))).sum();
                assert!((s - 1.0).abs() <= 1e-12, "J={j_max} x={x}");
            }
        }
    }
}
