//! Brute-force cross-checks of the fast paths.
//!
//! Each suite pairs a library routine with an independent, deliberately naive
//! recomputation (its own Legendre symbols, point enumeration, power-series products,
//! finite differences) and reports one [`OracleOutcome`] per pairing, usually the worst
//! case over a parameter range.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{GammaFactor, KernelSet, MellinRoute};
use crate::error::{Error, Result};
use crate::forms::curve::{ap_bsgs, ap_legendre};
use crate::forms::{ap_point_count, build_table, tau_qexpansion, CoefficientSource, CoefficientTable, NewformSpec, Weierstrass};
use crate::gauss::{gauss_4k_identity_check, gauss_direct, gauss_exact};
use crate::lfun::{
    disqualification, root_number, validate_eta, z_local_factor, z_local_product, z_series_direct, AfeEvaluator,
    AfeOptions, ZSeriesParams,
};
use crate::lfun::afe::ETA_CHECK_TOL;
use crate::moments::poisson_identity_check;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub name: String,
    pub fast_value: Complex64,
    pub oracle_value: Complex64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleOutcome {
    /// Passes iff `|fast - oracle| <= tolerance * max(1, |oracle|)`.
    pub fn compare(name: impl Into<String>, fast: Complex64, oracle: Complex64, tolerance: f64) -> Self {
        let diff = (fast - oracle).norm();
        Self {
            name: name.into(),
            fast_value: fast,
            oracle_value: oracle,
            tolerance,
            pass: diff <= tolerance * oracle.norm().max(1.0),
        }
    }

    pub fn real(name: impl Into<String>, fast: f64, oracle: f64, tolerance: f64) -> Self {
        Self::compare(name, fast.into(), oracle.into(), tolerance)
    }

    fn error(name: impl Into<String>, err: &Error) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        Self {
            name: format!("{}: {err}", name.into()),
            fast_value: nan,
            oracle_value: nan,
            tolerance: 0.0,
            pass: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Gauss,
    Points,
    Tau,
    Hecke,
    ZSeries,
    Gamma,
    Fourier,
    Poisson,
    Eta,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Gauss,
        Suite::Points,
        Suite::Tau,
        Suite::Hecke,
        Suite::ZSeries,
        Suite::Gamma,
        Suite::Fourier,
        Suite::Poisson,
        Suite::Eta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gauss => "gauss",
            Suite::Points => "points",
            Suite::Tau => "tau",
            Suite::Hecke => "hecke",
            Suite::ZSeries => "zseries",
            Suite::Gamma => "gamma",
            Suite::Fourier => "fourier",
            Suite::Poisson => "poisson",
            Suite::Eta => "eta",
        }
    }

    /// `"all"` or a comma-separated list of suite names.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown oracle suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Run the eta suite with every Fricke sign flipped (its checks must then fail).
    pub flip_eta: bool,
}

/// Runs the selected suites in order; errors inside a suite become failed outcomes.
pub fn run_suite(selection: &[Suite], options: &SuiteOptions) -> Vec<OracleOutcome> {
    selection
        .par_iter()
        .map(|&suite| {
            let result = match suite {
                Suite::Gauss => gauss_suite(),
                Suite::Points => points_suite(),
                Suite::Tau => tau_suite(),
                Suite::Hecke => hecke_suite(),
                Suite::ZSeries => zseries_suite(),
                Suite::Gamma => gamma_suite(),
                Suite::Fourier => fourier_suite(),
                Suite::Poisson => poisson_suite(),
                Suite::Eta => eta_suite(options.flip_eta),
            };
            result.unwrap_or_else(|e| vec![OracleOutcome::error(suite.name(), &e)])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn failure_count(outcomes: &[OracleOutcome]) -> usize {
    outcomes.iter().filter(|o| !o.pass).count()
}

/// Keeps the pair with the largest relative discrepancy.
struct Worst {
    rel: f64,
    label: String,
    fast: Complex64,
    oracle: Complex64,
}

impl Worst {
    fn new() -> Self {
        Self {
            rel: -1.0,
            label: String::new(),
            fast: Complex64::default(),
            oracle: Complex64::default(),
        }
    }

    fn offer(&mut self, label: impl FnOnce() -> String, fast: Complex64, oracle: Complex64) {
        let rel = (fast - oracle).norm() / oracle.norm().max(1.0);
        // NaN compares false; force it to win
        if rel > self.rel || rel.is_nan() && !self.rel.is_nan() {
            self.rel = rel;
            self.label = label();
            self.fast = fast;
            self.oracle = oracle;
        }
    }

    fn outcome(self, name: &str, tolerance: f64) -> OracleOutcome {
        OracleOutcome::compare(format!("{name} [worst at {}]", self.label), self.fast, self.oracle, tolerance)
    }
}

// ---- independent arithmetic ----

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// `(a/p)` for an odd prime `p` by Euler's criterion.
fn legendre_euler(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn odd_prime_divisors_with_multiplicity(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 3;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Jacobi symbol `(a/n)` for odd `n` as a product of Euler-criterion Legendre symbols.
fn jacobi_oracle(a: i64, n: u64) -> i32 {
    odd_prime_divisors_with_multiplicity(n)
        .into_iter()
        .map(|p| legendre_euler(a, p))
        .product()
}

/// `G_k(n)` summed straight from the definition with oracle Jacobi symbols.
fn gauss_sum_oracle(k: i64, n: u64, jac: &[i32]) -> Complex64 {
    let kr = k.rem_euclid(n as i64) as u64;
    let mut s = Complex64::default();
    for a in 1..n {
        let j = jac[a as usize];
        if j != 0 {
            let theta = 2.0 * std::f64::consts::PI * ((a * kr % n) as f64 / n as f64);
            s += Complex64::from_polar(f64::from(j), theta);
        }
    }
    if n == 1 {
        s = Complex64::new(1.0, 0.0);
    }
    let eps = f64::from(jacobi_oracle(-1, n));
    (Complex64::new(0.5, -0.5) + Complex64::new(0.5, 0.5) * eps) * s
}

/// `p + 1 - #E(F_p)` by enumerating all affine `(x, y)` on the long model.
fn ap_enumerate(e: &Weierstrass, p: u64) -> i64 {
    let pm = p as i64;
    let m = |v: i64| v.rem_euclid(pm);
    let (a1, a2, a3, a4, a6) = (m(e.a1), m(e.a2), m(e.a3), m(e.a4), m(e.a6));
    let mut affine = 0i64;
    for x in 0..pm {
        let rhs = m(m(m(x * x) * x) + m(a2 * m(x * x)) + m(a4 * x) + a6);
        for y in 0..pm {
            if m(m(y * y) + m(a1 * m(x * y)) + m(a3 * y)) == rhs {
                affine += 1;
            }
        }
    }
    pm + 1 - (affine + 1)
}

/// Coefficients of `q prod (1 - q^n)^24` by plain truncated series multiplication.
fn tau_oracle(limit: usize) -> Vec<i128> {
    let mut series = vec![0i128; limit];
    series[0] = 1;
    for n in 1..limit {
        for _ in 0..24 {
            for i in (n..limit).rev() {
                series[i] -= series[i - n];
            }
        }
    }
    series
}

// ---- suites ----

fn gauss_suite() -> Result<Vec<OracleOutcome>> {
    let mut vs_direct = Worst::new();
    let mut vs_oracle = Worst::new();
    for n in (1..=1000u64).step_by(2) {
        let jac: Vec<i32> = (0..n).map(|a| jacobi_oracle(a as i64, n)).collect();
        for k in -20i64..=20 {
            let exact = Complex64::from(gauss_exact(k, n)?.value());
            vs_direct.offer(|| format!("k={k} n={n}"), exact, gauss_direct(k, n)?);
            vs_oracle.offer(|| format!("k={k} n={n}"), exact, gauss_sum_oracle(k, n, &jac));
        }
    }
    let mut mismatches = 0usize;
    for n in (1..=500u64).step_by(2) {
        for k in -50i64..=50 {
            if !gauss_4k_identity_check(k, n)? {
                mismatches += 1;
            }
        }
    }
    Ok(vec![
        vs_direct.outcome("gauss: exact vs direct sum, odd n <= 1000, |k| <= 20", 1e-9),
        vs_oracle.outcome("gauss: exact vs oracle sum, odd n <= 1000, |k| <= 20", 1e-9),
        OracleOutcome::real("gauss: G_4k = G_k mismatches, odd n <= 500, |k| <= 50", mismatches as f64, 0.0, 0.0),
    ])
}

fn bundled_curves() -> Result<Vec<(NewformSpec, Weierstrass)>> {
    let mut out = Vec::new();
    for label in ["11a", "17a"] {
        let f = NewformSpec::bundled(label)?;
        if let CoefficientSource::Curve(e) = f.source {
            out.push((f, e));
        }
    }
    Ok(out)
}

fn odd_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi)
        .filter(|&n| n % 2 == 1 && odd_prime_divisors_with_multiplicity(n) == [n])
        .collect()
}

fn points_suite() -> Result<Vec<OracleOutcome>> {
    let mut out = Vec::new();
    for (f, e) in bundled_curves()? {
        let mut worst = Worst::new();
        for p in odd_primes(3, 1000) {
            if f.level % p == 0 {
                continue;
            }
            worst.offer(
                || format!("p={p}"),
                (ap_point_count(&e, p)? as f64).into(),
                (ap_enumerate(&e, p) as f64).into(),
            );
        }
        out.push(worst.outcome(&format!("points: {} a_p fast vs enumeration, good p <= 1000", f.label), 0.0));
        let mut worst = Worst::new();
        for p in odd_primes(2000, 4000) {
            worst.offer(
                || format!("p={p}"),
                (ap_bsgs(&e, p) as f64).into(),
                (ap_legendre(&e, p) as f64).into(),
            );
        }
        out.push(worst.outcome(&format!("points: {} a_p BSGS vs Legendre, 2000 <= p <= 4000", f.label), 0.0));
    }
    Ok(out)
}

fn tau_suite() -> Result<Vec<OracleOutcome>> {
    let limit = 100;
    let oracle = tau_oracle(limit + 1);
    let expansion = tau_qexpansion(limit)?;
    let table = build_table(&NewformSpec::bundled("delta")?, limit)?;
    let mut vs_expansion = Worst::new();
    let mut vs_recursion = Worst::new();
    for n in 1..=limit {
        let o = oracle[n - 1] as f64;
        vs_expansion.offer(|| format!("n={n}"), (expansion[n - 1] as f64).into(), o.into());
        let from_hecke = (table.lambda(n) * (n as f64).powf(5.5)).round();
        vs_recursion.offer(|| format!("n={n}"), from_hecke.into(), o.into());
    }
    Ok(vec![
        vs_expansion.outcome("tau: pentagonal expansion vs series product, n <= 100", 0.0),
        vs_recursion.outcome("tau: Hecke recursion vs series product, n <= 100", 0.0),
    ])
}

/// `lambda(n)` rebuilt from the prime values alone.
fn lambda_from_primes(t: &CoefficientTable, n: u64) -> f64 {
    let mut m = n;
    let mut acc = 1.0;
    let mut p = 2;
    while m > 1 {
        if p * p > m {
            p = m;
        }
        if m % p == 0 {
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            let lp = t.lambda(p as usize);
            let local = if t.form().level % p == 0 {
                lp.powi(k)
            } else {
                // Chebyshev recursion U_k(lp/2)
                let (mut a, mut b) = (1.0, lp);
                for _ in 1..k {
                    (a, b) = (b, lp * b - a);
                }
                b
            };
            acc *= local;
        }
        p += 1;
    }
    acc
}

fn hecke_suite() -> Result<Vec<OracleOutcome>> {
    let limit = 100_000usize;
    let mut out = Vec::new();
    for label in ["11a", "17a"] {
        let t = build_table(&NewformSpec::bundled(label)?, limit)?;
        let mut worst = Worst::new();
        for n in 1..=limit {
            worst.offer(|| format!("n={n}"), t.lambda(n).into(), lambda_from_primes(&t, n as u64).into());
        }
        out.push(worst.outcome(
            &format!("hecke: {label} multiplicativity and p-power recursion, n <= 1e5"),
            1e-12,
        ));
    }
    Ok(out)
}

fn zseries_suite() -> Result<Vec<OracleOutcome>> {
    let tf = build_table(&NewformSpec::bundled("11a")?, 1000)?;
    let tg = build_table(&NewformSpec::bundled("17a")?, 1000)?;
    let point = |alpha, beta, gamma, a, k1, q_prime, b| ZSeriesParams { alpha, beta, gamma, a, k1, q_prime, b };
    let points = [
        point(2.0, 2.0, 2.0, 1, 1, 1, 1),
        point(2.5, 2.0, 2.0, 1, -1, 1, 1),
        point(2.0, 3.0, 2.0, 3, 1, 1, 1),
        point(2.0, 2.0, 2.5, 1, 3, 1, 1),
        point(3.0, 3.0, 3.0, 5, -3, 1, 1),
        point(2.0, 2.0, 2.0, 1, 5, 3, 1),
        point(2.0, 2.5, 2.0, 1, 1, 5, -3),
        point(2.5, 2.5, 2.0, 7, 15, 1, 5),
        point(2.0, 2.0, 3.0, 1, -7, 15, 1),
        point(3.0, 2.0, 2.0, 3, 1, 7, 5),
    ];
    let trunc = 7;
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let direct = z_series_direct(p, &tf, &tg, trunc)?.value;
        let local = z_local_product(p, &tf, &tg, trunc)?.value;
        out.push(OracleOutcome::real(format!("zseries: direct vs local product, point {}", i + 1), direct, local, 1e-8));
    }
    // closed forms of the local factor at p = 3
    let base = point(2.0, 2.0, 2.0, 3, 3, 1, 1);
    let gamma = 2.5;
    out.push(OracleOutcome::real(
        "zseries: local factor, p | a, p | k1, p ∤ Q'",
        z_local_factor(3, &ZSeriesParams { gamma, ..base }, &tf, &tg)?,
        1.0 / (1.0 - 3f64.powf(-2.0 * gamma)),
        1e-10,
    ));
    out.push(OracleOutcome::real(
        "zseries: local factor, p | a, p | k1, p | Q'",
        z_local_factor(3, &ZSeriesParams { q_prime: 3, ..base }, &tf, &tg)?,
        0.0,
        1e-10,
    ));
    let (k1, b) = (5i64, 7i64);
    out.push(OracleOutcome::real(
        "zseries: local factor, p | a, p ∤ k1, p || Q'",
        z_local_factor(3, &ZSeriesParams { k1, b, q_prime: 3, ..base }, &tf, &tg)?,
        f64::from(legendre_euler(b, 3) * legendre_euler(k1, 3)) / 3f64.sqrt(),
        1e-10,
    ));
    Ok(out)
}

fn gamma_suite() -> Result<Vec<OracleOutcome>> {
    let mut out = Vec::new();
    for label in NewformSpec::BUNDLED_LABELS {
        let f = NewformSpec::bundled(label)?;
        let g = GammaFactor::new(&f);
        // five-point stencil
        let h = 1e-3;
        let fd = (-g.eval_real(2.0 * h) + 8.0 * g.eval_real(h) - 8.0 * g.eval_real(-h) + g.eval_real(-2.0 * h))
            / (12.0 * h);
        out.push(OracleOutcome::real(
            format!("gamma: {label} closed-form gamma'(0) vs finite difference"),
            g.derivative_at_zero(),
            fd,
            1e-8,
        ));
    }
    Ok(out)
}

fn fourier_suite() -> Result<Vec<OracleOutcome>> {
    let k = KernelSet::default();
    let route = MellinRoute::new(|x| k.f(x), k.f_support())?;
    Ok([0.1, 1.0, 10.0]
        .into_iter()
        .map(|y| OracleOutcome::real(format!("fourier: direct vs Mellin route, y = {y}"), k.f_check(y), route.eval(y), 1e-8))
        .collect())
}

fn poisson_suite() -> Result<Vec<OracleOutcome>> {
    let k = KernelSet::default();
    let mut out = Vec::new();
    for n in [3u64, 5, 9, 15, 45] {
        for z in [50.0, 200.0] {
            let c = poisson_identity_check(n, z, &k, 200)?;
            out.push(OracleOutcome::real(format!("poisson: n = {n}, Z = {z}"), c.rhs, c.lhs, 1e-8));
        }
    }
    Ok(out)
}

/// First `per_sign` qualifying `d` of each root number.
fn eta_samples(form: &NewformSpec, per_sign: usize) -> Result<Vec<u64>> {
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    let mut d = 1;
    while plus.len() < per_sign || minus.len() < per_sign {
        if d > 100_000 {
            return Err(Error::Config(format!("form '{}' does not realize both root numbers", form.label)));
        }
        if disqualification(d, form.level).is_none() {
            let side = if root_number(form, d)? == 1 { &mut plus } else { &mut minus };
            if side.len() < per_sign {
                side.push(d);
            }
        }
        d += 2;
    }
    let mut all: Vec<u64> = plus.into_iter().chain(minus).collect();
    all.sort_unstable();
    Ok(all)
}

fn eta_suite(flip: bool) -> Result<Vec<OracleOutcome>> {
    let kernels = KernelSet::default();
    let mut out = Vec::new();
    for (f, _) in bundled_curves()? {
        let f = if flip { f.with_flipped_eta() } else { f };
        let name = format!("eta: {} (eta = {:+}) AFE vanishing and Z-independence, 50 d", f.label, f.eta);
        let samples = eta_samples(&f, 25)?;
        let probe = build_table(&f, 10)?;
        let afe = AfeEvaluator::new(&probe, &kernels, 2.0, AfeOptions::default())?;
        let limit = afe.required_limit(*samples.last().unwrap());
        let table = build_table(&f, limit)?;
        match validate_eta(&table, &samples, &kernels) {
            Ok(diag) => {
                let worst = diag.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
                out.push(OracleOutcome::real(name, worst, 0.0, ETA_CHECK_TOL));
            }
            Err(e) => out.push(OracleOutcome::error(name, &e)),
        }
    }
    // weight 12, level 1: every twist has root number +1, so only the vanishing case applies
    let delta = NewformSpec::bundled("delta")?;
    let delta = if flip { delta.with_flipped_eta() } else { delta };
    let table = build_table(&delta, crate::forms::TAU_LIMIT)?;
    let afe = AfeEvaluator::new(&table, &kernels, 2.0, AfeOptions::default())?;
    let mut worst = 0.0f64;
    let mut d = 1;
    let mut count = 0;
    while count < 20 {
        if disqualification(d, 1).is_none() {
            let s = afe.sums(d)?;
            let residual = if s.omega == 1 {
                s.combination.abs() / s.first_magnitude.max(f64::MIN_POSITIVE)
            } else {
                f64::INFINITY
            };
            worst = worst.max(residual);
            count += 1;
        }
        d += 2;
    }
    out.push(OracleOutcome::real(
        format!("eta: delta (eta = {:+}) AFE vanishing, 20 d", delta.eta),
        worst,
        0.0,
        ETA_CHECK_TOL,
    ));
    Ok(out)
}
