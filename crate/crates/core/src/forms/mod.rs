//! Hecke eigenvalue providers.
//!
//! A [`NewformSpec`] names a newform by level, weight, Fricke sign and coefficient
//! source. [`build_table`] produces the Deligne-normalized eigenvalues `lambda(n)` for
//! `n <= limit` from the prime coefficients, the Hecke recursion at good primes and the
//! power law at primes dividing the level.

pub mod cache;
pub mod curve;

use crate::arith::{primes_up_to, smallest_prime_factors};
use crate::error::{invalid, Error, Result};

pub use curve::{ap_bad_prime, ap_point_count, Weierstrass};

/// Largest `limit` accepted by [`tau_qexpansion`].
pub const TAU_LIMIT: usize = 10_000;

/// Where the prime coefficients of a form come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientSource {
    /// Weight-2 form attached to an elliptic curve (model must be minimal).
    Curve(Weierstrass),
    /// The discriminant form of level 1 and weight 12, from its q-expansion.
    Delta,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformSpec {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    /// Fricke eigenvalue, +1 or -1.
    pub eta: i32,
    pub source: CoefficientSource,
}

impl NewformSpec {
    pub fn new(
        label: impl Into<String>,
        level: u64,
        weight: u32,
        eta: i32,
        source: CoefficientSource,
    ) -> Result<Self> {
        let spec = Self {
            label: label.into(),
            level,
            weight,
            eta,
            source,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.level == 0 || self.level % 2 == 0 {
            return invalid(format!("level {} must be odd and positive", self.level));
        }
        if self.weight == 0 || self.weight % 2 == 1 {
            return invalid(format!("weight {} must be even and positive", self.weight));
        }
        if self.eta != 1 && self.eta != -1 {
            return invalid(format!("eta must be +1 or -1, got {}", self.eta));
        }
        match &self.source {
            CoefficientSource::Curve(e) => {
                if self.weight != 2 {
                    return invalid("curve-backed forms have weight 2");
                }
                for (p, _) in crate::arith::trial_factor(self.level) {
                    if e.discriminant() % p as i128 != 0 {
                        return invalid(format!(
                            "level {} has prime {p} of good reduction",
                            self.level
                        ));
                    }
                }
            }
            CoefficientSource::Delta => {
                if self.level != 1 || self.weight != 12 {
                    return invalid("the Delta backend has level 1 and weight 12");
                }
            }
        }
        Ok(())
    }

    /// Bundled forms: `11a` (curve 11a1), `17a` (curve 17a1), `delta`.
    pub fn bundled(label: &str) -> Result<Self> {
        match label {
            "11a" | "11a1" => Self::new(
                "11a",
                11,
                2,
                -1,
                CoefficientSource::Curve(Weierstrass::new(0, -1, 1, -10, -20)),
            ),
            "17a" | "17a1" => Self::new(
                "17a",
                17,
                2,
                -1,
                CoefficientSource::Curve(Weierstrass::new(1, -1, 1, -1, -14)),
            ),
            "delta" => Self::new("delta", 1, 12, 1, CoefficientSource::Delta),
            other => Err(Error::Config(format!("unknown form label '{other}'"))),
        }
    }

    pub const BUNDLED_LABELS: [&'static str; 3] = ["11a", "17a", "delta"];

    /// `i^weight` for even weight.
    pub fn i_pow_weight(&self) -> i32 {
        if self.weight % 4 == 0 {
            1
        } else {
            -1
        }
    }

    /// Same form with the Fricke sign flipped (for sign-sensitivity diagnostics).
    pub fn with_flipped_eta(&self) -> Self {
        Self {
            eta: -self.eta,
            ..self.clone()
        }
    }
}

/// Deligne-normalized Hecke eigenvalues `lambda(1..=limit)`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    form: NewformSpec,
    lambda: Vec<f64>,
}

impl CoefficientTable {
    pub(crate) fn from_parts(form: NewformSpec, lambda: Vec<f64>) -> Self {
        Self { form, lambda }
    }

    pub fn form(&self) -> &NewformSpec {
        &self.form
    }

    pub fn limit(&self) -> usize {
        self.lambda.len() - 1
    }

    /// `lambda(n)`; panics if `n` is zero or beyond the limit.
    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        assert!(n >= 1, "lambda(0) is undefined");
        self.lambda[n]
    }

    /// Values indexed by `n` (index 0 holds 0.0).
    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn require_limit(&self, required: usize) -> Result<()> {
        if required > self.limit() {
            Err(Error::InsufficientCoefficients {
                label: self.form.label.clone(),
                required,
                available: self.limit(),
            })
        } else {
            Ok(())
        }
    }

    /// `lambda(p^k)` for a prime `p`, from `lambda(p)` alone, valid past the table limit.
    pub fn lambda_prime_power(&self, p: u64, k: u32) -> f64 {
        prime_power_lambda(self.lambda(p as usize), self.form.level % p == 0, k)
    }
}

/// `lambda(p^k)` from `lambda(p)` by the Hecke recursion (good `p`) or power law (`p | q`).
pub fn prime_power_lambda(lambda_p: f64, ramified: bool, k: u32) -> f64 {
    if ramified {
        return lambda_p.powi(k as i32);
    }
    let (mut prev, mut cur) = (1.0, lambda_p);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        (prev, cur) = (cur, lambda_p * cur - prev);
    }
    cur
}

/// Coefficients of `q prod_{n>=1} (1 - q^n)^24` for `n = 1..=limit`.
pub fn tau_qexpansion(limit: usize) -> Result<Vec<i128>> {
    if limit == 0 || limit > TAU_LIMIT {
        return invalid(format!("tau expansion limit must be in 1..={TAU_LIMIT}"));
    }
    // prod (1 - q^n) truncated at q^(limit-1), by the pentagonal number theorem
    let len = limit;
    let mut euler: Vec<(usize, i128)> = vec![(0, 1)];
    for k in 1i64.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let g1 = (k * (3 * k - 1) / 2) as usize;
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g1 >= len {
            break;
        }
        euler.push((g1, sign));
        if g2 < len {
            euler.push((g2, sign));
        }
    }
    let mut series = vec![0i128; len];
    series[0] = 1;
    for _ in 0..24 {
        let mut next = vec![0i128; len];
        for (i, &c) in series.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(g, s) in &euler {
                if i + g >= len {
                    break;
                }
                next[i + g] += s * c;
            }
        }
        series = next;
    }
    Ok(series)
}

/// Builds the eigenvalue table for `n <= limit`.
pub fn build_table(form: &NewformSpec, limit: usize) -> Result<CoefficientTable> {
    form.validate()?;
    if limit == 0 {
        return invalid("coefficient limit must be >= 1");
    }
    let half = (form.weight as f64 - 1.0) / 2.0;
    let tau = match form.source {
        CoefficientSource::Delta => Some(tau_qexpansion(limit)?),
        CoefficientSource::Curve(_) => None,
    };
    let prime_coefficient = |p: u64| -> Result<i128> {
        match (&form.source, &tau) {
            (CoefficientSource::Curve(e), _) => {
                if form.level % p == 0 {
                    Ok(ap_bad_prime(e, p)? as i128)
                } else if p == 2 {
                    Ok(curve::ap_naive(e, 2) as i128)
                } else {
                    Ok(ap_point_count(e, p)? as i128)
                }
            }
            (CoefficientSource::Delta, Some(t)) => Ok(t[p as usize - 1]),
            _ => unreachable!(),
        }
    };

    let spf = smallest_prime_factors(limit);
    let mut lambda = vec![0.0f64; limit + 1];
    lambda[1] = 1.0;
    for p in primes_up_to(limit) {
        let a = prime_coefficient(p)?;
        let l = a as f64 / (p as f64).powf(half);
        if form.level % p != 0 && l.abs() > 2.0 + 1e-12 {
            return Err(Error::Numeric(format!(
                "lambda({p}) = {l} violates the Deligne bound"
            )));
        }
        lambda[p as usize] = l;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        if p == n {
            continue;
        }
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        lambda[n] = if m == 1 {
            let lp = lambda[p];
            if form.level % p as u64 == 0 {
                lp * lambda[n / p]
            } else {
                lp * lambda[n / p] - lambda[n / (p * p)]
            }
        } else {
            lambda[n / m] * lambda[m]
        };
    }
    Ok(CoefficientTable::from_parts(form.clone(), lambda))
}
