//! Dispatch a resolved configuration to the library and write its outputs.

use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cburgers_core::blowup::{default_time, log_grid, make_certificate, verify_sign_pattern, SignOptions};
use cburgers_core::exact_series::export::{series_to_json, table_to_json, TableJson};
use cburgers_core::exact_series::kdvb::{exact_series, float_series};
use cburgers_core::exact_series::{
    evaluate_mode, structural_check, structural_check_series, BurgersSeries, ModeSeries, StructuralReport,
};
use cburgers_core::partitions::{hardy_ramanujan_report, report_csv};
use cburgers_core::regularity::{
    check_coefficient_boundedness, check_geometric_bound, envelope_report, norms_csv, EnvelopeOptions,
};
use cburgers_core::spectral::{
    diagnostics_m, integrate, trajectory_csv, trajectory_summary, SolverConfig, SpectralScalar, SpectralState,
    TrajectoryStatus,
};
use cburgers_core::{BigComplex, ComplexInput, GaussianRational, Real};
use num_complex::Complex64;
use rug::Rational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Check, Command, ConfigError, Format, RunConfig, TGrid};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Core(cburgers_core::Error),
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<cburgers_core::Error> for RunError {
    fn from(e: cburgers_core::Error) -> Self {
        RunError::Core(e)
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// False only when a check that applies failed.
    pub pass: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let io = |e| RunError::Io(path.to_path_buf(), e);
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, RunError> {
        std::fs::create_dir_all(&cfg.directory).map_err(|e| RunError::Io(cfg.directory.clone(), e))?;
        Ok(Self { cfg, files: Vec::new() })
    }

    fn json<T: Serialize>(&mut self, name: &str, result: &T, extra: Value) -> Result<(), RunError> {
        if !self.cfg.wants(Format::Json) {
            return Ok(());
        }
        let mut doc = json!({
            "tool_version": TOOL_VERSION,
            "config_hash": self.cfg.config_hash(),
            "config": self.cfg.resolved_json(),
        });
        if let Value::Object(extra) = extra {
            doc.as_object_mut().expect("object").extend(extra);
        }
        doc["result"] = serde_json::to_value(result).map_err(|e| RunError::Core(e.into()))?;
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| RunError::Core(e.into()))?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, text: &str) -> Result<(), RunError> {
        if !self.cfg.wants(Format::Csv) {
            return Ok(());
        }
        self.put(name, text.as_bytes())
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.cfg.directory.join(name);
        write_atomic(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, pass: bool, summary: String) -> Outcome {
        Outcome {
            pass,
            summary,
            files: self.files,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    if let Some(n) = cfg.threads {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cfg.command {
        Command::Series => run_series(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::BlowupCert => run_blowup(cfg),
        Command::Partitions => run_partitions(cfg),
        Command::Bounds => run_bounds(cfg),
    }
}

fn single_mode(init: &[ComplexInput]) -> bool {
    init[1..].iter().all(|z| z.abs_f64() == 0.0)
}

fn rational<'a>(r: &'a Real, key: &str) -> Result<&'a Rational, RunError> {
    r.as_rational().ok_or_else(|| {
        ConfigError {
            key: key.into(),
            message: format!("this command needs an exact rational value, got {r}"),
        }
        .into()
    })
}

fn exact_entry_strings(c: &GaussianRational) -> (String, String) {
    (c.re.to_string(), c.im.to_string())
}

fn run_series(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let k_max = cfg.numeric.k_max;
    let p = &cfg.params;
    let prec = cfg.numeric.precision_bits;
    let mut tables: Vec<TableJson> = Vec::new();
    let mut reports: Vec<StructuralReport> = Vec::new();
    let mut rows: Vec<Box<dyn ModeSeries + Send + Sync>> = Vec::new();
    let mut csv = String::from("k,h,l,re,im\n");
    let kind;

    let burgers_data = match (&p.nu, p.alpha.is_zero(), single_mode(&cfg.init), cfg.init[0].as_exact()) {
        (Real::Exact(nu), true, true, Some(a)) => Some((nu.clone(), a.clone())),
        _ => None,
    };
    p.require_exponomial()?;
    if let Some((nu, a)) = burgers_data {
        kind = "burgers";
        let s = BurgersSeries::new(nu)?;
        for k in 1..=k_max {
            let t = s.table(k, &a)?;
            reports.push(structural_check(&t));
            for (m, c) in &t.entries {
                let (re, im) = exact_entry_strings(c);
                let _ = writeln!(csv, "{k},{m},{m},{re},{im}");
            }
            tables.push(table_to_json(&t));
            rows.push(Box::new(t));
        }
    } else {
        kind = "kdvb";
        let mut data = cfg.init.clone();
        data.resize(data.len().max(k_max as usize), ComplexInput::zero());
        let exact: Option<Vec<GaussianRational>> = data.iter().map(|z| z.as_exact().cloned()).collect();
        let single = if single_mode(&data) {
            data[0].as_exact().cloned()
        } else {
            None
        };
        match exact {
            Some(d) if p.is_exact() => {
                let s = exact_series(p, &d)?;
                for k in 1..=k_max {
                    let row = s.series(k)?;
                    reports.push(structural_check_series(&row, single.as_ref()));
                    let j = series_to_json(&cburgers_core::exact_series::Series::Exact(row.clone()));
                    push_csv(&mut csv, &j);
                    tables.push(j);
                    rows.push(Box::new(row));
                }
            }
            _ => {
                let s = float_series(p, &data, prec)?;
                for k in 1..=k_max {
                    let row = s.series(k)?;
                    reports.push(structural_check_series(&row, None));
                    let j = series_to_json(&cburgers_core::exact_series::Series::Approx(row.clone()));
                    push_csv(&mut csv, &j);
                    tables.push(j);
                    rows.push(Box::new(row));
                }
            }
        }
    }

    let pass = reports.iter().all(StructuralReport::all_hold);
    let mut w = Writer::new(cfg)?;
    w.json(
        "series.json",
        &json!({ "rows": tables, "structural": reports }),
        json!({ "kind": kind }),
    )?;
    w.csv("series.csv", &csv)?;
    if let Some(grid) = &cfg.numeric.t_grid {
        let mut modes = String::from("t,k,re,im,abs\n");
        for t in grid.values() {
            for (i, row) in rows.iter().enumerate() {
                let v = evaluate_mode(row.as_ref(), &Real::Approx(t), prec)?;
                let abs = v.value.abs();
                let _ = writeln!(
                    modes,
                    "{t:.16e},{},{:.16e},{:.16e},{:.16e}",
                    i + 1,
                    v.value.re.to_f64(),
                    v.value.im.to_f64(),
                    abs.to_f64()
                );
            }
        }
        w.csv("modes.csv", &modes)?;
    }
    let failed: Vec<u32> = reports.iter().filter(|r| !r.all_hold()).map(|r| r.k).collect();
    let summary = if pass {
        format!("series: pass; {kind} rows k=1..{k_max}, structural checks hold")
    } else {
        format!("series: FAIL; structural checks fail at k={failed:?}")
    };
    Ok(w.finish(pass, summary))
}

fn push_csv(csv: &mut String, j: &TableJson) {
    for e in &j.entries {
        let (re, im) = match (&e.re, &e.im) {
            (Some(re), Some(im)) => (re.clone(), im.clone()),
            _ => (
                ratio_text(e.re_num.as_deref(), e.re_den.as_deref()),
                ratio_text(e.im_num.as_deref(), e.im_den.as_deref()),
            ),
        };
        let _ = writeln!(csv, "{},{},{},{re},{im}", j.k, e.h, e.l);
    }
}

fn ratio_text(num: Option<&str>, den: Option<&str>) -> String {
    match (num, den) {
        (Some(n), Some("1")) => n.to_string(),
        (Some(n), Some(d)) => format!("{n}/{d}"),
        _ => String::new(),
    }
}

fn simulate_with<S: SpectralScalar>(cfg: &RunConfig, prefix: Vec<S>, prec: u32) -> Result<Outcome, RunError> {
    let n = cfg.numeric.n;
    let mut prefix = prefix;
    if prefix.len() > n {
        prefix.truncate(n);
    }
    let state = SpectralState::from_prefix(&prefix, n, prec)?;
    let o = &cfg.options;
    let solver = SolverConfig {
        dt: cfg.numeric.dt,
        scheme: o.scheme,
        blowup_cap: o.blowup_cap,
        record_every: o.record_every,
        hs_orders: o.hs_orders.clone(),
        linear_only: false,
    };
    let traj = integrate(&state, &cfg.params, &solver, cfg.numeric.t_end)?;
    let summary = trajectory_summary(&traj);
    let m0 = diagnostics_m(&traj, &cfg.params, 0)?;
    let m1 = if traj.status == TrajectoryStatus::Completed {
        Some(diagnostics_m(&traj, &cfg.params, 1)?)
    } else {
        None
    };
    let mut w = Writer::new(cfg)?;
    w.json(
        "summary.json",
        &json!({ "trajectory": summary, "M0": m0, "M1": m1 }),
        json!({ "arithmetic": if prec > 53 { format!("mpfr-{prec}") } else { "binary64".to_string() } }),
    )?;
    w.csv("trajectory.csv", &trajectory_csv(&traj))?;
    let line = format!(
        "simulate: {} at t={}, L2={:.6e}, M0={:.6e}",
        summary.status, summary.t_final, summary.norms.l2, m0.value
    );
    Ok(w.finish(true, line))
}

fn run_simulate(cfg: &RunConfig) -> Result<Outcome, RunError> {
    if cfg.options.big_float {
        let prec = cfg.numeric.precision_bits;
        let prefix: Vec<BigComplex> = cfg.init.iter().map(|z| z.to_big(prec)).collect();
        simulate_with(cfg, prefix, prec)
    } else {
        let prefix: Vec<Complex64> = cfg.init.iter().map(ComplexInput::to_c64).collect();
        simulate_with(cfg, prefix, 53)
    }
}

fn run_blowup(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let nu = rational(&cfg.params.nu, "params.nu")?;
    if !cfg.params.alpha.is_zero() {
        return Err(ConfigError {
            key: "params.alpha".into(),
            message: "the blow-up certificate is for alpha = 0".into(),
        }
        .into());
    }
    let prec = cfg.numeric.precision_bits;
    let k = cfg.options.k_cert.unwrap_or(cfg.numeric.k_max);
    let t = match &cfg.options.t_cert {
        Some(t) => t.to_float(prec),
        None => default_time(nu)?,
    };
    let cert = make_certificate(&t, nu, &cfg.options.amp, k, prec)?;
    let mut csv = String::from("k,value,threshold,pass\n");
    for b in &cert.bounds {
        let _ = writeln!(csv, "{},{},{},{}", b.k, b.value, b.threshold, b.pass);
    }
    let mut w = Writer::new(cfg)?;
    w.json("certificate.json", &cert, json!({}))?;
    w.csv("certificate.csv", &csv)?;
    let failed: Vec<u32> = cert.bounds.iter().filter(|b| !b.pass).map(|b| b.k).collect();
    let line = if cert.valid {
        format!("blowup-cert: valid; |a_k(T)| >= A^k for k=1..{k}, T={}", cert.t)
    } else {
        format!(
            "blowup-cert: INVALID; failing k={failed:?}, partial L2 increasing={}",
            cert.partial_l2_increasing
        )
    };
    Ok(w.finish(cert.valid, line))
}

fn run_partitions(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let k = cfg.numeric.k_max;
    let report = hardy_ramanujan_report(k)?;
    let mut w = Writer::new(cfg)?;
    w.json("partitions.json", &report, json!({}))?;
    w.csv("partitions.csv", &report_csv(&report))?;
    let last = report.rows.last().expect("k_max >= 10");
    let line = format!(
        "partitions: N_{k} = {}, asymptotic ratio {:.6}, empirical C1 {:.6}",
        last.n_k, last.ratio_asym, report.empirical_c1
    );
    Ok(w.finish(true, line))
}

fn grid_or(g: &Option<TGrid>, default: TGrid) -> Vec<f64> {
    g.clone().unwrap_or(default).values()
}

fn single_a01(cfg: &RunConfig) -> Result<&ComplexInput, RunError> {
    if !single_mode(&cfg.init) {
        return Err(ConfigError {
            key: "init".into(),
            message: "this check takes single-mode data (only k = 1 nonzero)".into(),
        }
        .into());
    }
    Ok(&cfg.init[0])
}

fn run_bounds(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let p = &cfg.params;
    let k_max = cfg.numeric.k_max;
    let prec = cfg.numeric.precision_bits;
    let mut w = Writer::new(cfg)?;
    let (pass, line) = match cfg.options.check {
        Check::Geometric => {
            let a01 = single_a01(cfg)?;
            let grid = grid_or(
                &cfg.numeric.t_grid,
                TGrid {
                    start: 0.0,
                    end: 10.0,
                    points: 201,
                    log: false,
                },
            );
            let r = check_geometric_bound(&p.nu, &p.alpha, a01, k_max, &grid, prec)?;
            let mut csv = String::from("k,worst_ratio,t\n");
            for (k, v, t) in &r.per_k {
                let _ = writeln!(csv, "{k},{v:.16e},{t:.16e}");
            }
            w.json(
                "bounds.json",
                &r,
                json!({ "check": "geometric", "outside_hypothesis": !r.in_hypothesis }),
            )?;
            w.csv("bounds.csv", &csv)?;
            let tag = if r.in_hypothesis {
                ""
            } else {
                " (outside hypothesis, informational)"
            };
            (
                r.pass || !r.in_hypothesis,
                format!(
                    "bounds geometric: {}{tag}; worst ratio {} at k={}, t={}",
                    verdict(r.pass),
                    r.worst_ratio,
                    r.worst_at.0,
                    r.worst_at.1
                ),
            )
        }
        Check::Coefficients => {
            let nu = rational(&p.nu, "params.nu")?;
            let alpha = rational(&p.alpha, "params.alpha")?;
            let r = check_coefficient_boundedness(nu, alpha, k_max)?;
            let mut csv = String::from("k,max_abs,max_abs_all_monomials,intermediate,bounded\n");
            for row in &r.rows {
                let _ = writeln!(
                    csv,
                    "{},{:.16e},{:.16e},{:.16e},{}",
                    row.k, row.max_abs, row.max_abs_all_monomials, row.intermediate, row.bounded
                );
            }
            w.json(
                "bounds.json",
                &r,
                json!({ "check": "coefficients", "outside_hypothesis": !r.in_hypothesis }),
            )?;
            w.csv("bounds.csv", &csv)?;
            let tag = if r.in_hypothesis {
                ""
            } else {
                " (outside hypothesis, informational)"
            };
            (
                r.pass || !r.in_hypothesis,
                format!(
                    "bounds coefficients: {}{tag}; max |C| = {} for k <= {}",
                    verdict(r.pass),
                    r.max_abs,
                    r.k_max
                ),
            )
        }
        Check::Envelope => {
            let grid = grid_or(
                &cfg.numeric.t_grid,
                TGrid {
                    start: 0.1,
                    end: 10.0,
                    points: 100,
                    log: false,
                },
            );
            let opts = EnvelopeOptions {
                c2: cfg.options.c2,
                hs_orders: cfg.options.hs_orders.clone(),
                fit_window: cfg.options.fit_window,
                precision: prec,
            };
            let r = envelope_report(p, &cfg.init, k_max, &grid, &opts)?;
            w.json("bounds.json", &r, json!({ "check": "envelope" }))?;
            w.csv("norms.csv", &norms_csv(&r))?;
            let deltas: Vec<String> = r.fits.iter().map(|f| format!("s={}: {:.6}", f.s, f.delta)).collect();
            (
                r.pass,
                format!(
                    "bounds envelope: {}; minimal C2 {:.6e}, delta [{}]",
                    verdict(r.pass),
                    r.minimal_c2,
                    deltas.join(", ")
                ),
            )
        }
        Check::Sign => {
            let nu = rational(&p.nu, "params.nu")?;
            let a = match single_a01(cfg)?.as_exact() {
                Some(g) if g.im == 0 => g.re.clone(),
                _ => {
                    return Err(ConfigError {
                        key: "init".into(),
                        message: "the sign check needs a real rational a_01".into(),
                    }
                    .into())
                }
            };
            let grid = match &cfg.numeric.t_grid {
                Some(g) => g.values(),
                None => log_grid(3.0, 32),
            };
            let opts = SignOptions {
                precision: prec,
                ..SignOptions::default()
            };
            let r = verify_sign_pattern(k_max, &a, nu, &grid, &opts)?;
            let mut csv = String::from("k,t,phase_error,modulus,pass\n");
            for c in &r.cells {
                let _ = writeln!(
                    csv,
                    "{},{:.16e},{:.6e},{:.6e},{}",
                    c.k, c.t, c.phase_error, c.modulus, c.pass
                );
            }
            w.json("bounds.json", &r, json!({ "check": "sign" }))?;
            w.csv("bounds.csv", &csv)?;
            (
                r.pass,
                format!(
                    "bounds sign: {}; max phase error {:.3e}, min modulus {:.3e}",
                    verdict(r.pass),
                    r.max_phase_error,
                    r.min_modulus
                ),
            )
        }
    };
    Ok(w.finish(pass, line))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
