//! The mixed moment
//!
//! ```text
//! sum* L'(1/2, f x chi_{8d}) L'(1/2, g x chi_{8d}) F(8d/X)
//! ```
//!
//! over odd squarefree `d` coprime to both levels with both root numbers `-1`, its
//! head/tail split at a scale `M`, and a numerical check of the Poisson summation
//! identity behind the off-diagonal analysis.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{CutoffKernel, KernelSet};
use crate::arith::{kronecker, smallest_prime_factors};
use crate::error::{invalid, Error, Result};
use crate::forms::{CoefficientTable, NewformSpec};
use crate::gauss::gauss_exact;
use crate::lfun::afe::certified_truncation;
use crate::lfun::{disqualification, root_number, twist_character, AfeEvaluator, AfeOptions};

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Odd squarefree `d` coprime to both levels with `8d/X` in the support of `F` and both
/// root numbers equal to `-1`, ascending.
pub fn qualifying_ds(x: f64, f: &NewformSpec, g: &NewformSpec) -> Result<Vec<u64>> {
    if !(x >= 16.0 && x.is_finite()) {
        return invalid(format!("X = {x} must be at least 16"));
    }
    let lo = (x / 16.0).ceil() as u64;
    let hi = (x / 4.0).floor() as u64;
    let mut out = Vec::new();
    for d in lo.max(1)..=hi {
        if disqualification(d, f.level).is_some() || disqualification(d, g.level).is_some() {
            continue;
        }
        if root_number(f, d)? == -1 && root_number(g, d)? == -1 {
            out.push(d);
        }
    }
    Ok(out)
}

/// How the head/tail split scale `M` is chosen from `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MPolicy {
    /// `X / (log X)^3`.
    Auto,
    /// `X / (log X)^100`, below 1 at any practical `X`.
    Asymptotic,
    Explicit(f64),
}

impl MPolicy {
    pub fn resolve(&self, x: f64) -> Result<f64> {
        let m = match *self {
            MPolicy::Auto => x / x.ln().powi(3),
            MPolicy::Asymptotic => x / x.ln().powi(100),
            MPolicy::Explicit(m) => m,
        };
        if !(m > 0.0 && m.is_finite()) {
            return invalid(format!("M = {m} must be positive and finite"));
        }
        Ok(m)
    }
}

impl FromStr for MPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MPolicy::Auto),
            // "paper" is the interface's historical name for the same policy
            "asymptotic" | "paper" => Ok(MPolicy::Asymptotic),
            other => match other.parse::<f64>() {
                Ok(m) if m > 0.0 && m.is_finite() => Ok(MPolicy::Explicit(m)),
                _ => Err(Error::Config(format!(
                    "M must be 'auto', 'asymptotic' or a positive number, got '{other}'"
                ))),
            },
        }
    }
}

impl fmt::Display for MPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MPolicy::Auto => write!(f, "auto"),
            MPolicy::Asymptotic => write!(f, "asymptotic"),
            MPolicy::Explicit(m) => write!(f, "{m}"),
        }
    }
}

/// The head `A = (1 - omega) sum lambda(n) chi_{8d}(n) n^{-1/2} W(n/M)`, with `W` the
/// `Z = 1` cutoff.
pub struct HeadEvaluator<'a> {
    table: &'a CoefficientTable,
    kernel: CutoffKernel,
    tail_tol: f64,
}

impl<'a> HeadEvaluator<'a> {
    pub fn new(table: &'a CoefficientTable, kernels: &KernelSet, tail_tol: f64) -> Result<Self> {
        Ok(Self {
            table,
            kernel: kernels.cutoff(table.form(), 1.0)?,
            tail_tol,
        })
    }

    /// Truncation point and certified tail at scale `m`.
    pub fn truncation(&self, m: f64) -> (usize, f64) {
        let ln_b = m.ln() - self.kernel.ln_y(0.0);
        certified_truncation(self.kernel.decay_constants(), ln_b, self.tail_tol)
    }

    pub fn eval_with_character(&self, d: u64, m: f64, chi: &[i8]) -> Result<f64> {
        let omega = root_number(self.table.form(), d)?;
        let (n_max, _) = self.truncation(m);
        self.table.require_limit(n_max)?;
        if chi.len() <= n_max {
            return invalid(format!(
                "character table covers {} terms, {n_max} needed",
                chi.len().saturating_sub(1)
            ));
        }
        let lambda = self.table.as_slice();
        let shift = self.kernel.ln_y(0.0) - m.ln();
        let mut acc = NeumaierSum::default();
        for n in (1..=n_max).step_by(2) {
            let c = chi[n];
            if c == 0 {
                continue;
            }
            let nf = n as f64;
            acc.add(f64::from(c) * lambda[n] / nf.sqrt() * self.kernel.eval_ln_y(nf.ln() + shift));
        }
        Ok(f64::from(1 - omega) * acc.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABParts {
    pub a: f64,
    /// `L'(1/2) - A`.
    pub b: f64,
    pub m: f64,
}

/// Splits `L'(1/2, f x chi_{8d})` (at `Z = 1`) into head `A` at scale `m` and tail `B`.
pub fn ab_decompose(tf: &CoefficientTable, d: u64, m: f64, kernels: &KernelSet) -> Result<ABParts> {
    if !(m > 0.0 && m.is_finite()) {
        return invalid(format!("M = {m} must be positive and finite"));
    }
    if root_number(tf.form(), d)? != -1 {
        return invalid(format!("root number at d = {d} is +1"));
    }
    let options = AfeOptions::default();
    let full = AfeEvaluator::new(tf, kernels, 1.0, options)?;
    let head = HeadEvaluator::new(tf, kernels, options.tail_tol)?;
    let n = full.truncation(d).0.max(head.truncation(m).0);
    tf.require_limit(n)?;
    let chi = twist_character(d, n, &smallest_prime_factors(n));
    let l = full.lprime_with_character(d, &chi)?.value;
    let a = head.eval_with_character(d, m, &chi)?;
    Ok(ABParts { a, b: l - a, m })
}

/// Leading constants used for the predicted main terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub c0: f64,
    pub c1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentOptions {
    pub z: f64,
    pub workers: usize,
    pub m_policy: MPolicy,
    pub afe: AfeOptions,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            z: 1.0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            m_policy: MPolicy::Auto,
            afe: AfeOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub x: f64,
    pub count_d: usize,
    pub empirical: f64,
    /// `C0 X (log X)^2`.
    pub predicted_leading: f64,
    /// `C0 X (log X)^2 + C1 X log X`.
    pub predicted_two_term: f64,
    pub ratio: f64,
    pub m_used: f64,
}

/// Per-`d` ingredients of the moment sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistTerm {
    pub d: u64,
    /// `F(8d/X)`.
    pub weight: f64,
    pub lprime_f: f64,
    pub lprime_g: f64,
    pub head_f: f64,
    pub head_g: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentScan {
    pub report: MomentReport,
    pub terms: Vec<TwistTerm>,
}

impl MomentScan {
    /// The four weighted sums `A_f A_g`, `A_f B_g`, `B_f A_g`, `B_f B_g`.
    pub fn ab_pieces(&self) -> [f64; 4] {
        let mut s = [NeumaierSum::default(); 4];
        for t in &self.terms {
            let (af, ag) = (t.head_f, t.head_g);
            let (bf, bg) = (t.lprime_f - af, t.lprime_g - ag);
            s[0].add(t.weight * af * ag);
            s[1].add(t.weight * af * bg);
            s[2].add(t.weight * bf * ag);
            s[3].add(t.weight * bf * bg);
        }
        s.map(|x| x.value())
    }

    pub fn ab_recomposed(&self) -> f64 {
        self.ab_pieces().into_iter().collect::<NeumaierSum>().value()
    }
}

/// Evaluates the weighted moment at `X` over all qualifying `d`.
///
/// Work is spread over `options.workers` threads; per-`d` results are reduced in
/// ascending `d` with compensated summation, so the output does not depend on the
/// worker count.
pub fn moment_scan(
    x: f64,
    tf: &CoefficientTable,
    tg: &CoefficientTable,
    kernels: &KernelSet,
    prediction: Prediction,
    options: &MomentOptions,
) -> Result<MomentScan> {
    if tf.form() == tg.form() {
        return invalid("the two forms must be distinct");
    }
    if options.workers == 0 {
        return invalid("worker count must be positive");
    }
    let m = options.m_policy.resolve(x)?;
    let ds = qualifying_ds(x, tf.form(), tg.form())?;
    let ef = AfeEvaluator::new(tf, kernels, options.z, options.afe)?;
    let eg = AfeEvaluator::new(tg, kernels, options.z, options.afe)?;
    let hf = HeadEvaluator::new(tf, kernels, options.afe.tail_tol)?;
    let hg = HeadEvaluator::new(tg, kernels, options.afe.tail_tol)?;

    let mut n_chi = 1;
    if let Some(&d_max) = ds.last() {
        let nf = ef.required_limit(d_max).max(hf.truncation(m).0);
        let ng = eg.required_limit(d_max).max(hg.truncation(m).0);
        tf.require_limit(nf)?;
        tg.require_limit(ng)?;
        n_chi = nf.max(ng);
    }
    let spf = smallest_prime_factors(n_chi);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let terms: Vec<TwistTerm> = pool.install(|| {
        ds.par_iter()
            .map(|&d| -> Result<TwistTerm> {
                let n = ef.truncation(d).0.max(eg.truncation(d).0);
                let n = n.max(hf.truncation(m).0).max(hg.truncation(m).0);
                let chi = twist_character(d, n, &spf);
                Ok(TwistTerm {
                    d,
                    weight: kernels.f(8.0 * d as f64 / x),
                    lprime_f: ef.lprime_with_character(d, &chi)?.value,
                    lprime_g: eg.lprime_with_character(d, &chi)?.value,
                    head_f: hf.eval_with_character(d, m, &chi)?,
                    head_g: hg.eval_with_character(d, m, &chi)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let empirical = terms
        .iter()
        .map(|t| t.weight * t.lprime_f * t.lprime_g)
        .collect::<NeumaierSum>()
        .value();
    let ln_x = x.ln();
    let predicted_leading = prediction.c0 * x * ln_x * ln_x;
    let predicted_two_term = predicted_leading + prediction.c1 * x * ln_x;
    let report = MomentReport {
        x,
        count_d: terms.len(),
        empirical,
        predicted_leading,
        predicted_two_term,
        ratio: empirical / predicted_leading,
        m_used: m,
    };
    let finite = [empirical, predicted_leading, predicted_two_term, report.ratio, m]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::Numeric(format!("non-finite moment report at X = {x}: {report:?}")));
    }
    Ok(MomentScan { report, terms })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
}

/// Both sides of
///
/// ```text
/// sum_{d odd} (d/n) F(d/Z) = (Z/2n) (2/n) sum_k (-1)^k G_k(n) F^(kZ/2n)
/// ```
///
/// for odd `n`, the `k`-sum cut at `|k| <= k_trunc`.
pub fn poisson_identity_check(n: u64, z: f64, kernels: &KernelSet, k_trunc: u64) -> Result<PoissonCheck> {
    if n == 0 || n % 2 == 0 {
        return invalid(format!("n = {n} must be odd and positive"));
    }
    if !(z > 0.0 && z.is_finite()) {
        return invalid(format!("Z = {z} must be positive"));
    }
    let ni = n as i64;
    let (a, b) = kernels.f_support();
    let mut lhs = NeumaierSum::default();
    let lo = (a * z).ceil() as i64;
    let hi = (b * z).floor() as i64;
    for d in lo..=hi {
        if d % 2 == 0 {
            continue;
        }
        let chi = kronecker(d, ni);
        if chi != 0 {
            lhs.add(f64::from(chi) * kernels.f(d as f64 / z));
        }
    }
    let mut rhs = NeumaierSum::default();
    let kt = k_trunc as i64;
    for k in -kt..=kt {
        let g = gauss_exact(k, n)?;
        if g.is_zero() {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        rhs.add(sign * g.value() * kernels.f_check(k as f64 * z / (2.0 * n as f64)));
    }
    let rhs = z / (2.0 * n as f64) * f64::from(kronecker(2, ni)) * rhs.value();
    let lhs = lhs.value();
    Ok(PoissonCheck {
        lhs,
        rhs,
        abs_err: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::build_table;

    fn pair(limit: usize) -> (CoefficientTable, CoefficientTable) {
        (
            build_table(&NewformSpec::bundled("11a").unwrap(), limit).unwrap(),
            build_table(&NewformSpec::bundled("17a").unwrap(), limit).unwrap(),
        )
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn qualifying_at_160() {
        let f = NewformSpec::bundled("11a").unwrap();
        let g = NewformSpec::bundled("17a").unwrap();
        let ds = qualifying_ds(160.0, &f, &g).unwrap();
        assert!(ds.windows(2).all(|w| w[0] < w[1]));
        let expected: Vec<u64> = (10..=40)
            .filter(|&d| {
                disqualification(d, 11).is_none()
                    && disqualification(d, 17).is_none()
                    && root_number(&f, d).unwrap() == -1
                    && root_number(&g, d).unwrap() == -1
            })
            .collect();
        assert_eq!(ds, expected);
        assert!(!ds.is_empty());
        assert!(ds.iter().all(|d| d % 11 != 0 && d % 9 != 0));
        assert!(qualifying_ds(8.0, &f, &g).is_err());
    }

    #[test]
    fn m_policy_parsing() {
        assert_eq!("auto".parse::<MPolicy>().unwrap(), MPolicy::Auto);
        assert_eq!("asymptotic".parse::<MPolicy>().unwrap(), MPolicy::Asymptotic);
        assert_eq!("paper".parse::<MPolicy>().unwrap(), MPolicy::Asymptotic);
        assert_eq!("12.5".parse::<MPolicy>().unwrap(), MPolicy::Explicit(12.5));
        assert!("-1".parse::<MPolicy>().is_err());
        assert!("huge".parse::<MPolicy>().is_err());
        let x = 65536.0f64;
        assert!((MPolicy::Auto.resolve(x).unwrap() - x / x.ln().powi(3)).abs() < 1e-9);
        assert!(MPolicy::Asymptotic.resolve(x).unwrap() < 1.0);
    }

    #[test]
    fn ab_limits() {
        let (tf, _) = pair(20_000);
        let k = KernelSet::default();
        let f = tf.form();
        let d = (3..200u64)
            .find(|&d| disqualification(d, 11).is_none() && root_number(f, d).unwrap() == -1)
            .unwrap();
        let l = lprime_value(&tf, d);
        // at M = 8d the head is the whole Z = 1 expansion
        let full = ab_decompose(&tf, d, 8.0 * d as f64, &k).unwrap();
        assert!(full.b.abs() <= 1e-9 * l.abs().max(1.0), "{full:?}");
        // vanishing scale leaves everything in the tail
        let tiny = ab_decompose(&tf, d, 1e-3, &k).unwrap();
        assert!(tiny.a.abs() < 1e-12 && (tiny.b - l).abs() < 1e-10);
        for m in [1.0, 10.0, 100.0] {
            let p = ab_decompose(&tf, d, m, &k).unwrap();
            assert!((p.a + p.b - l).abs() <= 1e-10);
        }
    }

    fn lprime_value(t: &CoefficientTable, d: u64) -> f64 {
        crate::lfun::lprime_central(t, d, 1.0).unwrap().value
    }

    #[test]
    fn scan_small_x() {
        let (tf, tg) = pair(200_000);
        let k = KernelSet::default();
        let pred = Prediction { c0: 1.0, c1: 0.5 };
        let opts = MomentOptions {
            workers: 2,
            ..MomentOptions::default()
        };
        let scan = moment_scan(2048.0, &tf, &tg, &k, pred, &opts).unwrap();
        let r = scan.report;
        assert!(r.count_d > 0 && r.ratio.is_finite());
        let rec = scan.ab_recomposed();
        assert!((rec - r.empirical).abs() <= 1e-9 * r.empirical.abs());

        let single = moment_scan(2048.0, &tf, &tg, &k, pred, &MomentOptions { workers: 1, ..opts }).unwrap();
        assert_eq!(single, scan);

        // linear in F on both sides
        let k3 = KernelSet::with_scale(3.0).unwrap();
        let pred3 = Prediction { c0: 3.0, c1: 1.5 };
        let r3 = moment_scan(2048.0, &tf, &tg, &k3, pred3, &opts).unwrap().report;
        assert!((r3.empirical - 3.0 * r.empirical).abs() <= 1e-12 * r3.empirical.abs());
        assert!((r3.ratio - r.ratio).abs() <= 1e-12 * r.ratio.abs());

        // doubled truncation
        let long = MomentOptions {
            afe: AfeOptions {
                truncation_scale: 2.0,
                ..AfeOptions::default()
            },
            ..opts
        };
        let r2 = moment_scan(2048.0, &tf, &tg, &k, pred, &long).unwrap().report;
        assert!((r2.empirical - r.empirical).abs() <= 1e-6 * r.empirical.abs());
    }

    #[test]
    fn scan_rejects_short_tables_and_handles_empty_sets() {
        let (tf, tg) = pair(1000);
        let k = KernelSet::default();
        let pred = Prediction { c0: 1.0, c1: 0.0 };
        let opts = MomentOptions::default();
        assert!(matches!(
            moment_scan(4096.0, &tf, &tg, &k, pred, &opts),
            Err(Error::InsufficientCoefficients { .. })
        ));
        // no qualifying d in [84/16, 84/4]
        let empty = moment_scan(84.0, &tf, &tg, &k, pred, &opts).unwrap();
        assert_eq!(empty.report.count_d, 0);
        assert_eq!(empty.report.empirical, 0.0);
        assert!(moment_scan(4096.0, &tf, &tf, &k, pred, &opts).is_err());
    }

    #[test]
    fn poisson_matrix() {
        let k = KernelSet::default();
        for n in [3u64, 5, 9, 15, 45] {
            for z in [50.0, 200.0] {
                let c = poisson_identity_check(n, z, &k, 200).unwrap();
                assert!(c.abs_err <= 1e-8, "n={n} Z={z}: {c:?}");
            }
        }
        // trivial character: sum over odd d of F(d/Z)
        let c = poisson_identity_check(1, 50.0, &k, 40).unwrap();
        let direct: f64 = (13..=100).step_by(2).map(|d| k.f(d as f64 / 50.0)).sum();
        assert!((c.lhs - direct).abs() < 1e-12 && c.abs_err <= 1e-8, "{c:?}");
        assert!(poisson_identity_check(4, 50.0, &k, 10).is_err());
    }
}
