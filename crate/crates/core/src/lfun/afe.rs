//! Central derivatives `L'(1/2, f x chi_{8d})` from the approximate functional equation
//!
//! ```text
//! sum lambda(n) chi(n)/sqrt(n) W_Z(n/8d) - omega * sum lambda(n) chi(n)/sqrt(n) W_{1/Z}(n/8d)
//! ```
//!
//! which equals `L'(1/2)` when `omega = -1` and vanishes when `omega = +1`.

use crate::analytic::{CutoffKernel, KernelSet};
use crate::arith::{gcd, is_squarefree, kronecker, smallest_prime_factors};
use crate::error::{invalid, Error, Result};
use crate::forms::{CoefficientTable, NewformSpec};

/// Why a `d` does not index a twist in the family, or `None` if it does.
pub fn disqualification(d: u64, level: u64) -> Option<String> {
    if d == 0 {
        Some("d must be positive".into())
    } else if d % 2 == 0 {
        Some(format!("d = {d} is even"))
    } else if !is_squarefree(d) {
        Some(format!("d = {d} is not squarefree"))
    } else if gcd(d, level) != 1 {
        Some(format!("d = {d} shares a factor with the level {level}"))
    } else {
        None
    }
}

fn check_qualifying(d: u64, level: u64) -> Result<()> {
    match disqualification(d, level) {
        Some(reason) => invalid(reason),
        None => Ok(()),
    }
}

/// `omega(f x chi_{8d}) = i^k * eta * chi_{8d}(-q)`.
pub fn root_number(form: &NewformSpec, d: u64) -> Result<i32> {
    check_qualifying(d, form.level)?;
    Ok(form.i_pow_weight() * form.eta * kronecker(8 * d as i64, -(form.level as i64)))
}

/// `chi_{8d}(n)` for `n <= n_max`, built multiplicatively from a smallest-prime-factor table.
pub fn twist_character(d: u64, n_max: usize, spf: &[u32]) -> Vec<i8> {
    assert!(spf.len() > n_max, "spf table too short");
    let m = 8 * d as i64;
    let mut chi = vec![0i8; n_max + 1];
    if n_max >= 1 {
        chi[1] = 1;
    }
    for n in (3..=n_max).step_by(2) {
        let p = spf[n] as usize;
        chi[n] = if p == n {
            kronecker(m, p as i64) as i8
        } else {
            chi[p] * chi[n / p]
        };
    }
    chi
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AfeOptions {
    /// Certified bound on each neglected tail.
    pub tail_tol: f64,
    /// Multiplier on the certified truncation point (for truncation-doubling checks).
    pub truncation_scale: f64,
}

impl Default for AfeOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-10,
            truncation_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedLValue {
    pub label: String,
    pub d: u64,
    pub z: f64,
    pub value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// Both smoothed sums for one `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AfeSums {
    pub d: u64,
    pub omega: i32,
    pub first: f64,
    pub second: f64,
    /// Sum of absolute values of the terms of the first sum.
    pub first_magnitude: f64,
    /// `first - omega * second`.
    pub combination: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// Smallest `N` whose certified tail `sum_{n > N} d(n) n^{-1/2} |W(n/b)|` is below `tol`.
///
/// Uses `|W(y)| <= C_c y^{-c}` and `sum_{n<=t} d(n) <= t (log t + 1)`.
pub(crate) fn certified_truncation(decay: &[(f64, f64)], ln_b: f64, tol: f64) -> (usize, f64) {
    let tail = |n: f64| -> f64 {
        let ln_n = n.ln();
        decay
            .iter()
            .map(|&(c, ln_cc)| {
                let s = c + 0.5;
                let shape = s * ((ln_n + 1.0) / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
                (ln_cc + c * (ln_b - ln_n) + 0.5 * ln_n + shape.ln()).exp()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut n = ln_b.exp().max(1.0).ceil();
    while tail(n) > tol {
        n = (n * 1.02).ceil() + 1.0;
    }
    (n as usize, tail(n))
}

/// Evaluator for one form and one `Z`, reusable across many `d`.
pub struct AfeEvaluator<'a> {
    table: &'a CoefficientTable,
    z: f64,
    w_z: CutoffKernel,
    w_inv: Option<CutoffKernel>,
    options: AfeOptions,
}

impl<'a> AfeEvaluator<'a> {
    pub fn new(
        table: &'a CoefficientTable,
        kernels: &KernelSet,
        z: f64,
        options: AfeOptions,
    ) -> Result<Self> {
        if !(options.tail_tol > 0.0 && options.truncation_scale >= 1.0) {
            return invalid(format!("bad AFE options {options:?}"));
        }
        let form = table.form();
        let w_z = kernels.cutoff(form, z)?;
        let w_inv = if z == 1.0 {
            None
        } else {
            Some(kernels.cutoff(form, 1.0 / z)?)
        };
        Ok(Self {
            table,
            z,
            w_z,
            w_inv,
            options,
        })
    }

    pub fn table(&self) -> &CoefficientTable {
        self.table
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    fn kernel_truncation(&self, k: &CutoffKernel, d: u64) -> (usize, f64) {
        let ln_b = (8.0 * d as f64).ln() - k.ln_y(0.0);
        certified_truncation(k.decay_constants(), ln_b, self.options.tail_tol)
    }

    /// Truncation point and total certified tail for the combination at `d`.
    pub fn truncation(&self, d: u64) -> (usize, f64) {
        let (n1, _) = self.kernel_truncation(&self.w_z, d);
        let (n2, _) = match &self.w_inv {
            Some(k) => self.kernel_truncation(k, d),
            None => (0, 0.0),
        };
        let n = ((n1.max(n2) as f64) * self.options.truncation_scale).ceil() as usize;
        // recompute the tails at the common (possibly enlarged) point
        let tail_at = |k: &CutoffKernel| {
            let ln_b = (8.0 * d as f64).ln() - k.ln_y(0.0);
            let decay = k.decay_constants();
            let ln_n = (n as f64).ln();
            decay
                .iter()
                .map(|&(c, ln_cc)| {
                    let s = c + 0.5;
                    let shape = s * ((ln_n + 1.0) / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
                    (ln_cc + c * (ln_b - ln_n) + 0.5 * ln_n + shape.ln()).exp()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let tail = match &self.w_inv {
            Some(k) => tail_at(&self.w_z) + tail_at(k),
            None => 2.0 * tail_at(&self.w_z),
        };
        (n, tail)
    }

    /// Coefficient limit needed for every `d <= d_max`.
    pub fn required_limit(&self, d_max: u64) -> usize {
        self.truncation(d_max).0
    }

    pub fn sums(&self, d: u64) -> Result<AfeSums> {
        let (n, _) = self.truncation(d);
        self.table.require_limit(n)?;
        let spf = smallest_prime_factors(n);
        let chi = twist_character(d, n, &spf);
        self.sums_with_character(d, &chi)
    }

    /// Same as [`Self::sums`] with a precomputed `chi_{8d}` table covering the truncation.
    pub fn sums_with_character(&self, d: u64, chi: &[i8]) -> Result<AfeSums> {
        let omega = root_number(self.table.form(), d)?;
        let (n_max, tail_bound) = self.truncation(d);
        self.table.require_limit(n_max)?;
        if chi.len() <= n_max {
            return invalid(format!(
                "character table covers {} terms, {n_max} needed",
                chi.len().saturating_sub(1)
            ));
        }
        let lambda = self.table.as_slice();
        let ln8d = (8.0 * d as f64).ln();
        let shift_z = self.w_z.ln_y(0.0) - ln8d;
        let shift_inv = self.w_inv.as_ref().map(|k| k.ln_y(0.0) - ln8d);
        let (mut first, mut second, mut magnitude) = (0.0, 0.0, 0.0);
        let mut terms = 0usize;
        for n in (1..=n_max).step_by(2) {
            let c = chi[n];
            if c == 0 || lambda[n] == 0.0 {
                continue;
            }
            let nf = n as f64;
            let a = f64::from(c) * lambda[n] / nf.sqrt();
            let ln_n = nf.ln();
            let t = a * self.w_z.eval_ln_y(ln_n + shift_z);
            first += t;
            magnitude += t.abs();
            if let (Some(k), Some(shift)) = (&self.w_inv, shift_inv) {
                second += a * k.eval_ln_y(ln_n + shift);
            }
            terms += 1;
        }
        if self.w_inv.is_none() {
            second = first;
        }
        let combination = first - f64::from(omega) * second;
        if !combination.is_finite() {
            return Err(Error::Numeric(format!("non-finite AFE value at d = {d}")));
        }
        Ok(AfeSums {
            d,
            omega,
            first,
            second,
            first_magnitude: magnitude,
            combination,
            terms_used: terms,
            tail_bound,
        })
    }

    fn to_value(&self, s: AfeSums) -> Result<TwistedLValue> {
        if s.omega != -1 {
            return invalid(format!(
                "root number at d = {} is +1: L'(1/2) is not the AFE value (use the vanishing check)",
                s.d
            ));
        }
        Ok(TwistedLValue {
            label: self.table.form().label.clone(),
            d: s.d,
            z: self.z,
            value: s.combination,
            terms_used: s.terms_used,
            tail_bound: s.tail_bound,
        })
    }

    pub fn lprime(&self, d: u64) -> Result<TwistedLValue> {
        if root_number(self.table.form(), d)? != -1 {
            return invalid(format!(
                "root number at d = {d} is +1: L'(1/2) is not the AFE value (use the vanishing check)"
            ));
        }
        self.to_value(self.sums(d)?)
    }

    pub fn lprime_with_character(&self, d: u64, chi: &[i8]) -> Result<TwistedLValue> {
        self.to_value(self.sums_with_character(d, chi)?)
    }
}

/// `L'(1/2, f x chi_{8d})` with default kernels and options.
pub fn lprime_central(table: &CoefficientTable, d: u64, z: f64) -> Result<TwistedLValue> {
    AfeEvaluator::new(table, &KernelSet::default(), z, AfeOptions::default())?.lprime(d)
}

/// Tolerance for the vanishing and Z-independence checks.
pub const ETA_CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaCheck {
    pub d: u64,
    /// Root number predicted from the configured eta.
    pub omega: i32,
    /// `|combination| / first_magnitude` at `Z = 2` for `omega = +1`;
    /// `|L'(Z=1) - L'(Z=2)| / (1 + |L'|)` for `omega = -1`.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaDiagnostic {
    pub label: String,
    pub eta: i32,
    pub checks: Vec<EtaCheck>,
    /// True iff every check passed.
    pub eta_consistent: bool,
}

/// Empirical check of the configured Fricke sign via the two cases of the AFE identity.
///
/// Needs at least ten `d` of each predicted root number. Returns a diagnostic with
/// `eta_consistent = false` when every check fails (the sign is wrong); mixed outcomes
/// are a configuration error.
pub fn validate_eta(table: &CoefficientTable, sample_ds: &[u64], kernels: &KernelSet) -> Result<EtaDiagnostic> {
    if sample_ds.is_empty() {
        return invalid("empty sample list");
    }
    let form = table.form();
    let omegas: Vec<i32> = sample_ds
        .iter()
        .map(|&d| root_number(form, d))
        .collect::<Result<_>>()?;
    let plus = omegas.iter().filter(|&&w| w == 1).count();
    let minus = omegas.len() - plus;
    if plus < 10 || minus < 10 {
        return invalid(format!(
            "need >= 10 samples of each root number, got {plus} (+1) and {minus} (-1)"
        ));
    }
    let at_one = AfeEvaluator::new(table, kernels, 1.0, AfeOptions::default())?;
    let at_two = AfeEvaluator::new(table, kernels, 2.0, AfeOptions::default())?;
    let mut checks = Vec::with_capacity(sample_ds.len());
    for (&d, &omega) in sample_ds.iter().zip(&omegas) {
        let two = at_two.sums(d)?;
        let residual = if omega == 1 {
            two.combination.abs() / two.first_magnitude.max(f64::MIN_POSITIVE)
        } else {
            let one = at_one.sums(d)?;
            (one.combination - two.combination).abs() / (1.0 + one.combination.abs())
        };
        checks.push(EtaCheck {
            d,
            omega,
            residual,
            pass: residual <= ETA_CHECK_TOL,
        });
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    if passed != 0 && passed != checks.len() {
        return Err(Error::Config(format!(
            "eta diagnostics for '{}' are inconsistent: {passed} of {} checks pass",
            form.label,
            checks.len()
        )));
    }
    Ok(EtaDiagnostic {
        label: form.label.clone(),
        eta: form.eta,
        eta_consistent: passed == checks.len(),
        checks,
    })
}
