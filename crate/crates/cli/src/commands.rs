use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use twistlab::analytic::KernelSet;
use twistlab::forms::cache::{cache_path, check_file_header, load_or_build, read_table_file, write_table_file};
use twistlab::forms::{build_table, CoefficientTable, NewformSpec};
use twistlab::lfun::{constants_report, disqualification, AfeEvaluator, AfeOptions, ConstantsReport};
use twistlab::moments::{moment_scan, qualifying_ds, HeadEvaluator, MomentOptions, Prediction};
use twistlab::oracles::{failure_count, run_suite, OracleOutcome, Suite, SuiteOptions};
use twistlab::Error;

use crate::config::RunConfig;
use crate::CliError;

const DEFAULT_CACHE_DIR: &str = "twistlab-cache";

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// CSV text with the provenance comment line and a column header row.
fn csv(cfg: &RunConfig, command: &str, columns: &[&str], rows: &[Vec<String>]) -> String {
    let cols = columns.join(",");
    let mut out = format!(
        "# twistlab {} config={} columns={cols}\n{cols}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.hash(command)
    );
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Numeric(format!("cannot write output: {e}")))
        }
    }
}

fn form(label: &str) -> Result<NewformSpec, CliError> {
    NewformSpec::bundled(label).map_err(|_| {
        CliError::Usage(format!(
            "unknown form label '{label}' (bundled: {})",
            NewformSpec::BUNDLED_LABELS.join(", ")
        ))
    })
}

/// The user's `--limit` if it covers `need`, else `need`; an explicit short limit is an error.
fn resolve_limit(cfg: &RunConfig, label: &str, need: usize) -> Result<usize, CliError> {
    match cfg.limit {
        Some(l) if l < need => Err(Error::InsufficientCoefficients {
            label: label.to_string(),
            required: need,
            available: l,
        }
        .into()),
        Some(l) => Ok(l),
        None => Ok(need.max(1)),
    }
}

fn table(cfg: &RunConfig, f: &NewformSpec, limit: usize) -> Result<CoefficientTable, CliError> {
    Ok(load_or_build(f, limit, cfg.cache_dir.as_deref())?)
}

/// Coefficient limit an AFE evaluation at `d_max` needs (from a tiny probe table).
fn afe_need(f: &NewformSpec, kernels: &KernelSet, z: f64, d_max: u64) -> Result<usize, CliError> {
    let probe = build_table(f, 1)?;
    Ok(AfeEvaluator::new(&probe, kernels, z, AfeOptions::default())?.required_limit(d_max))
}

pub fn coeffs(cfg: &RunConfig) -> Result<(), CliError> {
    let f = form(&cfg.f)?;
    let limit = cfg
        .limit
        .ok_or_else(|| CliError::Usage("coeffs needs --limit".into()))?;
    let path: PathBuf = match (&cfg.out, &cfg.cache_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => cache_path(dir, &f.label, limit),
        (None, None) => cache_path(Path::new(DEFAULT_CACHE_DIR), &f.label, limit),
    };
    let t = build_table(&f, limit)?;
    write_table_file(&t, &path)?;
    println!("{}", path.display());
    Ok(())
}

pub fn lprime(cfg: &RunConfig) -> Result<(), CliError> {
    let f = form(&cfg.f)?;
    let d = cfg.d.ok_or_else(|| CliError::Usage("lprime needs --d".into()))?;
    if let Some(reason) = disqualification(d, f.level) {
        return Err(CliError::Usage(format!("d = {d} does not index a twist: {reason}")));
    }
    let kernels = KernelSet::default();
    let limit = resolve_limit(cfg, &f.label, afe_need(&f, &kernels, cfg.z, d)?)?;
    let t = table(cfg, &f, limit)?;
    let eval = AfeEvaluator::new(&t, &kernels, cfg.z, AfeOptions::default())?;
    let s = eval.sums(d)?;
    let (value, residual) = if s.omega == -1 {
        (num(s.combination), String::new())
    } else {
        eprintln!("root number +1 at d = {d}: L'(1/2) is not given by the AFE; reporting the vanishing check");
        (String::new(), num(s.combination.abs() / s.first_magnitude.max(f64::MIN_POSITIVE)))
    };
    let row = vec![
        f.label.clone(),
        d.to_string(),
        num(cfg.z),
        s.omega.to_string(),
        value,
        s.terms_used.to_string(),
        num(s.tail_bound),
        residual,
    ];
    let columns = ["label", "d", "Z", "omega", "value", "terms_used", "tail_bound", "vanishing_residual"];
    emit(cfg, &csv(cfg, "lprime", &columns, &[row]))
}

fn pair_tables(cfg: &RunConfig, need: usize) -> Result<(CoefficientTable, CoefficientTable), CliError> {
    let f = form(&cfg.f)?;
    let g = form(&cfg.g)?;
    let lf = resolve_limit(cfg, &f.label, need)?;
    let lg = resolve_limit(cfg, &g.label, need)?;
    Ok((table(cfg, &f, lf)?, table(cfg, &g, lg)?))
}

fn report_rows(r: &ConstantsReport) -> Vec<(&'static str, f64)> {
    vec![
        ("prime_cutoff", r.prime_cutoff as f64),
        ("F_check_0", r.f_check_0),
        ("L_sym2_f", r.l_sym2_f),
        ("L_sym2_g", r.l_sym2_g),
        ("L_f_x_g", r.l_fg),
        ("Zstar_00", r.zstar00),
        ("Zstar_u_00", r.zstar_partials.0),
        ("Zstar_v_00", r.zstar_partials.1),
        ("gamma_prime_f", r.gamma_prime_f),
        ("gamma_prime_g", r.gamma_prime_g),
        ("log_deriv_L_sym2_f", r.log_deriv_sym2_f),
        ("log_deriv_L_sym2_g", r.log_deriv_sym2_g),
        ("log_deriv_L_f_x_g", r.log_deriv_fg),
        ("C0", r.c0),
        ("C1_printed", r.c1),
        ("C1_residue", r.c1_residue),
        ("C1_step_drift", r.c1_step_drift),
    ]
}

pub fn constants(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check_pair()?;
    form(&cfg.f)?;
    form(&cfg.g)?;
    let (tf, tg) = pair_tables(cfg, cfg.prime_cutoff as usize)?;
    let kernels = KernelSet::default();
    let r = constants_report(&tf, &tg, &kernels, cfg.prime_cutoff)?;
    let mut rows: Vec<Vec<String>> = report_rows(&r)
        .into_iter()
        .map(|(k, v)| vec![k.to_string(), num(v)])
        .collect();
    let coarse = cfg.prime_cutoff / 10;
    if coarse >= 1000 {
        let c = constants_report(&tf, &tg, &kernels, coarse)?;
        rows.push(vec![format!("C0_at_cutoff_{coarse}"), num(c.c0)]);
        rows.push(vec!["C0_relative_drift".into(), num((r.c0 - c.c0).abs() / r.c0.abs())]);
    }
    emit(cfg, &csv(cfg, "constants", &["quantity", "value"], &rows))
}

pub fn moment(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check_pair()?;
    let f = form(&cfg.f)?;
    let g = form(&cfg.g)?;
    if !(cfg.x >= 16.0 && cfg.x.is_finite()) {
        return Err(CliError::Usage(format!("X = {} must be at least 16", cfg.x)));
    }
    if cfg.ladder == 0 {
        return Err(CliError::Usage("--ladder must be at least 1".into()));
    }
    let ladder: Vec<f64> = (0..cfg.ladder).map(|j| cfg.x * 2f64.powi(j as i32)).collect();
    let x_max = *ladder.last().unwrap();
    let kernels = KernelSet::default();

    // everything the largest rung needs, checked before any work
    let mut need = cfg.prime_cutoff as usize;
    let ds = qualifying_ds(x_max, &f, &g)?;
    if let Some(&d_max) = ds.last() {
        need = need
            .max(afe_need(&f, &kernels, cfg.z, d_max)?)
            .max(afe_need(&g, &kernels, cfg.z, d_max)?);
    }
    let m_max = ladder
        .iter()
        .map(|&x| cfg.m.resolve(x))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    for spec in [&f, &g] {
        let probe = build_table(spec, 1)?;
        need = need.max(HeadEvaluator::new(&probe, &kernels, AfeOptions::default().tail_tol)?.truncation(m_max).0);
    }
    let (tf, tg) = pair_tables(cfg, need)?;

    let c = constants_report(&tf, &tg, &kernels, cfg.prime_cutoff)?;
    let prediction = Prediction { c0: c.c0, c1: c.c1 };
    let options = MomentOptions {
        z: cfg.z,
        workers: cfg.workers,
        m_policy: cfg.m,
        afe: AfeOptions::default(),
    };
    let mut rows = Vec::new();
    for x in ladder {
        let r = moment_scan(x, &tf, &tg, &kernels, prediction, &options)?.report;
        rows.push(vec![
            num(r.x),
            r.count_d.to_string(),
            num(r.empirical),
            num(r.predicted_leading),
            num(r.predicted_two_term),
            num(r.ratio),
            num(r.m_used),
        ]);
    }
    let columns = ["X", "count_d", "empirical", "predicted_leading", "predicted_two_term", "ratio", "M_used"];
    emit(cfg, &csv(cfg, "moment", &columns, &rows))
}

/// Fully re-reads every cache file in `dir`.
fn cache_outcomes(dir: &Path) -> Vec<OracleOutcome> {
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("coeffs"))
            .collect(),
        Err(e) => {
            return vec![OracleOutcome {
                name: format!("cache: cannot read {}: {e}", dir.display()),
                ..failed()
            }]
        }
    };
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let check = check_file_header(&path)
                .and_then(|(label, _)| NewformSpec::bundled(&label))
                .and_then(|f| read_table_file(&f, &path));
            match check {
                Ok(t) => OracleOutcome::real(
                    format!("cache: {} ({} rows)", path.display(), t.limit()),
                    t.lambda(1),
                    1.0,
                    0.0,
                ),
                Err(e) => OracleOutcome {
                    name: format!("cache: {}: {e}", path.display()),
                    ..failed()
                },
            }
        })
        .collect()
}

fn failed() -> OracleOutcome {
    let mut o = OracleOutcome::real("", f64::NAN, f64::NAN, 0.0);
    o.pass = false;
    o
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let selection = Suite::parse_selection(&cfg.suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut outcomes = run_suite(&selection, &SuiteOptions { flip_eta: cfg.flip_eta });
    if let Some(dir) = &cfg.cache_dir {
        outcomes.extend(cache_outcomes(dir));
    }
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            vec![
                format!("\"{}\"", o.name.replace('"', "'")),
                if o.pass { "PASS" } else { "FAIL" }.to_string(),
                num(o.fast_value.re),
                num(o.fast_value.im),
                num(o.oracle_value.re),
                num(o.oracle_value.im),
                num(o.tolerance),
            ]
        })
        .collect();
    let columns = ["check", "status", "fast_re", "fast_im", "oracle_re", "oracle_im", "tolerance"];
    emit(cfg, &csv(cfg, "verify", &columns, &rows))?;
    let failures = failure_count(&outcomes);
    eprintln!("{} of {} checks passed", outcomes.len() - failures, outcomes.len());
    if failures > 0 {
        return Err(CliError::Verify(format!("{failures} check(s) failed")));
    }
    Ok(())
}
