//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Coefficient tables are cached under the cargo target tmpdir, so reruns skip the
//! expensive builds.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use twistlab::analytic::{partition_g, window_v, KernelSet};
use twistlab::forms::cache::load_or_build;
use twistlab::forms::{CoefficientTable, NewformSpec, TAU_LIMIT};
use twistlab::gauss::{gauss_4k_identity_check, gauss_direct, gauss_exact};
use twistlab::lfun::{constants_report, disqualification, root_number, AfeEvaluator, AfeOptions};
use twistlab::moments::{moment_scan, poisson_identity_check, MomentOptions, MomentScan, Prediction};
use twistlab::oracles::{run_suite, OracleOutcome, Suite, SuiteOptions};
use twistlab::Result;

type Verdict = Result<(bool, String)>;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-coeffs")
}

fn table(label: &str, limit: usize) -> Result<CoefficientTable> {
    load_or_build(&NewformSpec::bundled(label)?, limit, Some(&cache_dir()))
}

fn suite_verdict(suites: &[Suite]) -> Verdict {
    let out = run_suite(suites, &SuiteOptions::default());
    let failed: Vec<&OracleOutcome> = out.iter().filter(|o| !o.pass).collect();
    let detail = if failed.is_empty() {
        format!("{} checks", out.len())
    } else {
        failed
            .iter()
            .map(|o| format!("{}: fast {} vs oracle {}", o.name, o.fast_value, o.oracle_value))
            .collect::<Vec<_>>()
            .join("; ")
    };
    Ok((failed.is_empty() && !out.is_empty(), detail))
}

fn gauss_equivalence() -> Verdict {
    let mut worst = 0.0f64;
    for n in (1..=1000u64).step_by(2) {
        for k in -20i64..=20 {
            let exact = gauss_exact(k, n)?.value();
            let direct = gauss_direct(k, n)?;
            let rel = (direct - exact).norm() / exact.abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    Ok((worst <= 1e-9, format!("worst relative error {worst:.2e}")))
}

fn gauss_4k() -> Verdict {
    let mut bad = 0;
    for n in (1..=500u64).step_by(2) {
        for k in -50i64..=50 {
            if !gauss_4k_identity_check(k, n)? {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{bad} mismatches")))
}

fn poisson() -> Verdict {
    let kernels = KernelSet::default();
    let mut worst = 0.0f64;
    for n in [3u64, 5, 9, 15, 45] {
        for z in [50.0, 200.0] {
            worst = worst.max(poisson_identity_check(n, z, &kernels, 200)?.abs_err);
        }
    }
    Ok((worst <= 1e-8, format!("worst absolute error {worst:.2e}")))
}

/// Every qualifying `d <= d_max` of the given root number.
fn ds_with_sign(form: &NewformSpec, omega: i32, d_max: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for d in (1..=d_max).step_by(2) {
        if disqualification(d, form.level).is_none() && root_number(form, d)? == omega {
            out.push(d);
        }
    }
    Ok(out)
}

/// `count` entries spread evenly over `all`, always including the largest.
fn spread(all: &[u64], count: usize) -> Vec<u64> {
    if all.len() <= count {
        return all.to_vec();
    }
    (0..count).map(|i| all[(i + 1) * all.len() / count - 1]).collect()
}

fn afe_limit(label: &str, kernels: &KernelSet, d_max: u64) -> Result<usize> {
    let probe = table(label, 1)?;
    let mut need = 1;
    for z in [1.0, 2.0] {
        need = need.max(AfeEvaluator::new(&probe, kernels, z, AfeOptions::default())?.required_limit(d_max));
    }
    Ok(need)
}

fn z_independence() -> Verdict {
    let kernels = KernelSet::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for label in ["11a", "17a"] {
        let form = NewformSpec::bundled(label)?;
        let ds = spread(&ds_with_sign(&form, -1, 2000)?, 50);
        let t = table(label, afe_limit(label, &kernels, *ds.last().unwrap())?)?;
        let one = AfeEvaluator::new(&t, &kernels, 1.0, AfeOptions::default())?;
        let two = AfeEvaluator::new(&t, &kernels, 2.0, AfeOptions::default())?;
        let mut worst = 0.0f64;
        for &d in &ds {
            let (a, b) = (one.lprime(d)?.value, two.lprime(d)?.value);
            worst = worst.max((a - b).abs() / a.abs());
        }
        ok &= ds.len() == 50 && worst <= 1e-6;
        notes.push(format!("{label}: {} d, worst {worst:.2e}", ds.len()));
    }
    Ok((ok, notes.join(", ")))
}

fn vanishing() -> Verdict {
    let kernels = KernelSet::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for label in ["11a", "17a", "delta"] {
        let form = NewformSpec::bundled(label)?;
        let mut candidates = ds_with_sign(&form, 1, 4000)?;
        if label == "delta" {
            // tau is only tabulated up to TAU_LIMIT, which leaves fewer than 50 d;
            // delta rides along as an extra check on all of them
            let probe = table(label, 1)?;
            let afe = AfeEvaluator::new(&probe, &kernels, 2.0, AfeOptions::default())?;
            candidates.retain(|&d| afe.required_limit(d) <= TAU_LIMIT);
        }
        let ds = spread(&candidates, 50);
        let t = table(label, afe_limit(label, &kernels, *ds.last().unwrap())?)?;
        let mut worst = 0.0f64;
        for z in [1.0, 2.0] {
            let afe = AfeEvaluator::new(&t, &kernels, z, AfeOptions::default())?;
            for &d in &ds {
                let s = afe.sums(d)?;
                worst = worst.max(s.combination.abs() / s.first_magnitude);
            }
        }
        let enough = if label == "delta" { !ds.is_empty() } else { ds.len() == 50 };
        ok &= enough && worst <= 1e-6;
        notes.push(format!("{label} (eta {:+}): {} d, worst {worst:.2e}", form.eta, ds.len()));
    }
    Ok((ok, notes.join(", ")))
}

fn partition_of_unity() -> Verdict {
    let points = 10_000;
    let mut worst = 0.0f64;
    for big_j in 0..=8 {
        // sum_{j <= J} G(x/2^j) is one on [1, 3 * 2^(J-1)]
        let hi = 1.5 * 2f64.powi(big_j);
        for i in 0..points {
            let x = hi.powf(i as f64 / (points - 1) as f64);
            let s: f64 = (0..=big_j).map(|j| partition_g(x / 2f64.powi(j))).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    let mut worst_v = 0.0f64;
    for i in 0..points {
        let x = 0.5 + 2.5 * i as f64 / (points - 1) as f64;
        worst_v = worst_v.max((window_v(x) - 1.0).abs());
    }
    Ok((
        worst <= 1e-12 && worst_v <= 1e-12,
        format!("partition {worst:.1e}, window {worst_v:.1e}"),
    ))
}

fn constants_stability() -> Verdict {
    let kernels = KernelSet::default();
    let (tf, tg) = (table("11a", 100_000)?, table("17a", 100_000)?);
    let coarse = constants_report(&tf, &tg, &kernels, 10_000)?;
    let fine = constants_report(&tf, &tg, &kernels, 100_000)?;
    let drift = (fine.c0 - coarse.c0).abs() / fine.c0.abs();
    let ok = fine.c0 > 0.0
        && fine.c0.is_finite()
        && drift <= 0.01
        && fine.c1.is_finite()
        && fine.c1_residue.is_finite()
        && fine.c1_step_drift <= 1e-4;
    Ok((
        ok,
        format!(
            "C0 {:.6e} (drift {drift:.2e}), C1 {:.6e}, step drift {:.1e}",
            fine.c0, fine.c1, fine.c1_step_drift
        ),
    ))
}

fn csv_row(s: &MomentScan) -> String {
    let r = &s.report;
    format!(
        "{:e},{},{:e},{:e},{:e},{:e},{:e}",
        r.x, r.count_d, r.empirical, r.predicted_leading, r.predicted_two_term, r.ratio, r.m_used
    )
}

fn moment_pipeline() -> Verdict {
    let x = 65_536.0;
    let kernels = KernelSet::default();
    let cutoff = 100_000usize;
    let probe = (table("11a", 1)?, table("17a", 1)?);
    let options = MomentOptions::default();
    let d_max = (x / 4.0) as u64;
    let m = options.m_policy.resolve(x)?;
    let mut need = cutoff;
    for p in [&probe.0, &probe.1] {
        need = need
            .max(AfeEvaluator::new(p, &kernels, options.z, options.afe)?.required_limit(d_max))
            .max(twistlab::moments::HeadEvaluator::new(p, &kernels, options.afe.tail_tol)?.truncation(m).0);
    }
    let (tf, tg) = (table("11a", need)?, table("17a", need)?);
    let c = constants_report(&tf, &tg, &kernels, cutoff as u64)?;
    let prediction = Prediction { c0: c.c0, c1: c.c1 };
    let serial = moment_scan(x, &tf, &tg, &kernels, prediction, &MomentOptions { workers: 1, ..options })?;
    let parallel = moment_scan(x, &tf, &tg, &kernels, prediction, &MomentOptions { workers: 2, ..options })?;
    let r = serial.report;
    let recomposed = serial.ab_recomposed();
    let ab_rel = (recomposed - r.empirical).abs() / r.empirical.abs();
    let deterministic = serial == parallel && csv_row(&serial) == csv_row(&parallel);
    let ok = r.count_d > 0 && r.ratio.is_finite() && r.ratio > 0.0 && ab_rel <= 1e-9 && deterministic;
    Ok((
        ok,
        format!(
            "count_d {}, ratio {:.4}, A/B rel {ab_rel:.1e}, workers 1 vs 2 identical: {deterministic}",
            r.count_d, r.ratio
        ),
    ))
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Verdict,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { name: "Gauss sums: exact vs direct", budget: secs(60), run: gauss_equivalence },
        Criterion { name: "Gauss sums: G_4k = G_k", budget: secs(10), run: gauss_4k },
        Criterion { name: "Poisson summation identity", budget: secs(60), run: poisson },
        Criterion { name: "AFE Z-independence", budget: secs(300), run: z_independence },
        Criterion { name: "AFE vanishing at root number +1", budget: None, run: vanishing },
        Criterion {
            name: "Hecke structure",
            budget: None,
            run: || suite_verdict(&[Suite::Hecke, Suite::Tau, Suite::Points]),
        },
        Criterion { name: "Partition of unity", budget: None, run: partition_of_unity },
        Criterion { name: "Fourier-type transform routes", budget: None, run: || suite_verdict(&[Suite::Fourier]) },
        Criterion { name: "Z-series factorization", budget: None, run: || suite_verdict(&[Suite::ZSeries]) },
        Criterion { name: "Constants stability", budget: None, run: constants_stability },
        Criterion { name: "Moment pipeline at X = 2^16", budget: secs(1800), run: moment_pipeline },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = (c.run)();
        let elapsed = start.elapsed();
        let (pass, mut detail) = verdict.unwrap_or_else(|e| (false, format!("error: {e}")));
        let in_time = c.budget.is_none_or(|b| elapsed <= b);
        if !in_time {
            detail.push_str(&format!("; over the {:?} budget", c.budget.unwrap()));
        }
        let pass = pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {:>2}. {} ({detail}) [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
