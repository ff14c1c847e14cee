//! Run configuration: an optional JSON file with command-line overrides on top.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cburgers_core::exact_series::export::{initial_data_json, json_real, parse_initial_data, real_string};
use cburgers_core::spectral::Scheme;
use cburgers_core::{ComplexInput, GaussianRational, ModelParams, Real};
use rug::Rational;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_N: usize = 256;
pub const DEFAULT_K_MAX: u32 = 12;
pub const DEFAULT_T_END: f64 = 1.0;
pub const OUT_ENV: &str = "CBURGERS_OUT";

/// A configuration problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key \"{}\": {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Series,
    Simulate,
    BlowupCert,
    Partitions,
    Bounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Series => "series",
            Command::Simulate => "simulate",
            Command::BlowupCert => "blowup-cert",
            Command::Partitions => "partitions",
            Command::Bounds => "bounds",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "series" => Command::Series,
            "simulate" => Command::Simulate,
            "blowup-cert" => Command::BlowupCert,
            "partitions" => Command::Partitions,
            "bounds" => Command::Bounds,
            _ => {
                return Err(format!(
                    "unknown command {s:?} (expected series, simulate, blowup-cert, partitions or bounds)"
                ))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Geometric,
    Coefficients,
    Envelope,
    Sign,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Geometric => "geometric",
            Check::Coefficients => "coefficients",
            Check::Envelope => "envelope",
            Check::Sign => "sign",
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "geometric" => Check::Geometric,
            "coefficients" => Check::Coefficients,
            "envelope" => Check::Envelope,
            "sign" => Check::Sign,
            _ => {
                return Err(format!(
                    "unknown check {s:?} (expected geometric, coefficients, envelope or sign)"
                ))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
}

/// `points` values on `[start, end]`, linear or logarithmic.
#[derive(Clone, Debug, PartialEq)]
pub struct TGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub log: bool,
}

impl TGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / n;
                if self.log {
                    (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.end - self.start)
                }
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        json!({"start": self.start, "end": self.end, "points": self.points, "log": self.log})
    }
}

/// `start:end:points`, with an optional `log:` prefix.
impl FromStr for TGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (log, body) = match s.strip_prefix("log:") {
            Some(b) => (true, b),
            None => (false, s),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:end:points, got {s:?}"));
        }
        let f = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        Ok(TGrid {
            start: f(parts[0])?,
            end: f(parts[1])?,
            points: parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?,
            log,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Numeric {
    pub precision_bits: u32,
    pub dt: f64,
    pub n: usize,
    pub t_end: f64,
    pub k_max: u32,
    pub t_grid: Option<TGrid>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub scheme: Scheme,
    pub blowup_cap: f64,
    pub record_every: usize,
    pub hs_orders: Vec<f64>,
    /// Run the solver in MPFR arithmetic at `precision_bits` instead of binary64.
    pub big_float: bool,
    pub amp: Real,
    pub k_cert: Option<u32>,
    pub t_cert: Option<Real>,
    pub check: Check,
    pub c2: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub init: Vec<ComplexInput>,
    pub numeric: Numeric,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    pub options: Options,
    pub threads: Option<usize>,
}

/// Values given on the command line; any `Some` beats the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub config: Option<PathBuf>,
    pub nu: Option<String>,
    pub alpha: Option<String>,
    pub gamma: Option<String>,
    pub precision: Option<u32>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub init: Option<String>,
    pub a01: Option<String>,
    pub dt: Option<f64>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub k_max: Option<u32>,
    pub t_grid: Option<String>,
    pub formats: Option<String>,
    pub scheme: Option<String>,
    pub blowup_cap: Option<f64>,
    pub record_every: Option<usize>,
    pub hs: Option<String>,
    pub big_float: bool,
    pub amp: Option<String>,
    pub k_cert: Option<u32>,
    pub t_cert: Option<String>,
    pub check: Option<String>,
    pub c2: Option<f64>,
    pub fit_window: Option<String>,
}

const TOP_KEYS: &[&str] = &["command", "params", "init", "numeric", "output", "options", "threads"];
const PARAM_KEYS: &[&str] = &["nu", "alpha", "gamma"];
const NUMERIC_KEYS: &[&str] = &["precision_bits", "dt", "N", "t_end", "k_max", "t_grid"];
const OUTPUT_KEYS: &[&str] = &["directory", "formats"];
const OPTION_KEYS: &[&str] = &[
    "scheme",
    "blowup_cap",
    "record_every",
    "hs_orders",
    "big_float",
    "A",
    "K",
    "T",
    "check",
    "C2",
    "fit_window",
];

struct Section<'a> {
    name: &'a str,
    map: Option<&'a Map<String, Value>>,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, v: Option<&'a Value>, allowed: &[&str]) -> CResult<Self> {
        let map = match v {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => return Err(ConfigError::new(name, "expected an object")),
        };
        if let Some(m) = map {
            for k in m.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(ConfigError::new(&format!("{name}.{k}"), "unknown key"));
                }
            }
        }
        Ok(Self { name, map })
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.name)
    }

    fn get(&self, k: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(k))
    }

    fn f64(&self, k: &str) -> CResult<Option<f64>> {
        self.get(k)
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| ConfigError::new(&self.key(k), "expected a number"))
            })
            .transpose()
    }

    fn uint(&self, k: &str) -> CResult<Option<u64>> {
        self.get(k)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| ConfigError::new(&self.key(k), "expected a nonnegative integer"))
            })
            .transpose()
    }

    fn str(&self, k: &str) -> CResult<Option<&'a str>> {
        self.get(k)
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| ConfigError::new(&self.key(k), "expected a string"))
            })
            .transpose()
    }

    fn real(&self, k: &str) -> CResult<Option<Real>> {
        self.get(k)
            .map(|v| json_real(v, k).map_err(|e| ConfigError::new(&self.key(k), e.to_string())))
            .transpose()
    }
}

fn parse_real(key: &str, s: &str) -> CResult<Real> {
    s.parse()
        .map_err(|e: cburgers_core::Error| ConfigError::new(key, e.to_string()))
}

fn parse_list(key: &str, s: &str) -> CResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| ConfigError::new(key, format!("{p:?}: {e}")))
        })
        .collect()
}

fn parse_window(key: &str, s: &str) -> CResult<(f64, f64)> {
    let v = parse_list(key, &s.replace(':', ","))?;
    match v[..] {
        [a, b] if a < b => Ok((a, b)),
        _ => Err(ConfigError::new(key, format!("expected lo:hi with lo < hi, got {s:?}"))),
    }
}

fn grid_from_json(key: &str, v: &Value) -> CResult<TGrid> {
    if let Some(s) = v.as_str() {
        return s.parse().map_err(|e| ConfigError::new(key, e));
    }
    let sec = Section::new(key, Some(v), &["start", "end", "points", "log"])?;
    let req = |k: &str| sec.f64(k)?.ok_or_else(|| ConfigError::new(&sec.key(k), "missing"));
    Ok(TGrid {
        start: req("start")?,
        end: req("end")?,
        points: sec
            .uint("points")?
            .ok_or_else(|| ConfigError::new(&sec.key("points"), "missing"))? as usize,
        log: sec.get("log").map(|b| b.as_bool().unwrap_or(false)).unwrap_or(false),
    })
}

/// Inline JSON list, or a path to a file holding one.
fn load_init(key: &str, v: &Value, base: &Path) -> CResult<Vec<ComplexInput>> {
    let text = match v {
        Value::Array(_) => v.to_string(),
        Value::String(s) if s.trim_start().starts_with('[') => s.clone(),
        Value::String(s) => {
            let p = base.join(s);
            std::fs::read_to_string(&p).map_err(|e| ConfigError::new(key, format!("{}: {e}", p.display())))?
        }
        _ => return Err(ConfigError::new(key, "expected a list of {k, re, im} or a file path")),
    };
    let init = parse_initial_data(&text).map_err(|e| ConfigError::new(key, e.to_string()))?;
    if init.is_empty() {
        return Err(ConfigError::new(key, "initial data is empty"));
    }
    Ok(init)
}

fn parse_formats(key: &str, items: &[&str]) -> CResult<Vec<Format>> {
    let mut out = Vec::new();
    for f in items {
        out.push(match f.trim() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(ConfigError::new(key, format!("unknown format {other:?}"))),
        });
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(ConfigError::new(key, "at least one format is needed"));
    }
    Ok(out)
}

fn positive(key: &str, v: f64) -> CResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be positive, got {v}")))
    }
}

/// Resolve a run from an optional config file and command-line values.
///
/// `env_out` stands in for `CBURGERS_OUT`, so tests need not touch the
/// process environment.
pub fn parse_config(ov: &Overrides, env_out: Option<PathBuf>) -> CResult<RunConfig> {
    let (root, base) = match &ov.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| ConfigError::new("config", e.to_string()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (v, base)
        }
        None => (Value::Object(Map::new()), PathBuf::new()),
    };
    parse_value(&root, &base, ov, env_out)
}

/// Like [`parse_config`] but with the file contents already parsed.
pub fn parse_value(root: &Value, base: &Path, ov: &Overrides, env_out: Option<PathBuf>) -> CResult<RunConfig> {
    let top = Section::new("config", Some(root), TOP_KEYS)?;
    let top_key = |k: &str| k.to_string();

    let command_text = match &ov.command {
        Some(c) => c.clone(),
        None => top
            .get("command")
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| ConfigError::new("command", "expected a string"))
            })
            .transpose()?
            .ok_or_else(|| {
                ConfigError::new(
                    "command",
                    "missing; choose one of series, simulate, blowup-cert, partitions, bounds",
                )
            })?,
    };
    let command: Command = command_text.parse().map_err(|e| ConfigError::new("command", e))?;

    let ps = Section::new("params", top.get("params"), PARAM_KEYS)?;
    let pick_real = |flag: &Option<String>, k: &str, default: i64| -> CResult<Real> {
        match flag {
            Some(s) => parse_real(&ps.key(k), s),
            None => Ok(ps.real(k)?.unwrap_or(Real::int(default))),
        }
    };
    let nu = pick_real(&ov.nu, "nu", 1)?;
    let alpha = pick_real(&ov.alpha, "alpha", 0)?;
    let gamma = pick_real(&ov.gamma, "gamma", 1)?;
    let params = ModelParams::new(nu, alpha, gamma).map_err(|e| ConfigError::new("params", e.to_string()))?;

    let init = if let Some(a) = &ov.a01 {
        vec![ComplexInput::real(parse_real("init", a)?)]
    } else if let Some(s) = &ov.init {
        load_init("init", &Value::String(s.clone()), Path::new(""))?
    } else if let Some(v) = top.get("init") {
        load_init(&top_key("init"), v, base)?
    } else {
        vec![ComplexInput::Exact(GaussianRational::real(Rational::from((1, 2))))]
    };

    let ns = Section::new("numeric", top.get("numeric"), NUMERIC_KEYS)?;
    let precision_bits = match ov.precision {
        Some(p) => p,
        None => ns
            .uint("precision_bits")?
            .map(|p| p as u32)
            .unwrap_or(DEFAULT_PRECISION),
    };
    if precision_bits < 53 {
        return Err(ConfigError::new(
            "numeric.precision_bits",
            format!("must be at least 53, got {precision_bits}"),
        ));
    }
    let dt = positive(
        "numeric.dt",
        ov.dt
            .map_or_else(|| Ok(ns.f64("dt")?.unwrap_or(DEFAULT_DT)), Ok::<_, ConfigError>)?,
    )?;
    let n = match ov.n {
        Some(n) => n,
        None => ns.uint("N")?.map(|n| n as usize).unwrap_or(DEFAULT_N),
    };
    if n == 0 {
        return Err(ConfigError::new("numeric.N", "must be at least 1"));
    }
    let t_end = positive(
        "numeric.t_end",
        ov.t_end
            .map_or_else(|| Ok(ns.f64("t_end")?.unwrap_or(DEFAULT_T_END)), Ok::<_, ConfigError>)?,
    )?;
    let k_max = match ov.k_max {
        Some(k) => k,
        None => ns.uint("k_max")?.map(|k| k as u32).unwrap_or(DEFAULT_K_MAX),
    };
    if k_max == 0 {
        return Err(ConfigError::new("numeric.k_max", "must be at least 1"));
    }
    let t_grid = match &ov.t_grid {
        Some(s) => Some(s.parse().map_err(|e| ConfigError::new("numeric.t_grid", e))?),
        None => ns
            .get("t_grid")
            .map(|v| grid_from_json("numeric.t_grid", v))
            .transpose()?,
    };
    if let Some(g) = &t_grid {
        if g.points == 0 || !(g.end >= g.start) || (g.log && !(g.start > 0.0)) {
            return Err(ConfigError::new(
                "numeric.t_grid",
                "needs points >= 1, end >= start, and start > 0 for log grids",
            ));
        }
    }

    let os = Section::new("output", top.get("output"), OUTPUT_KEYS)?;
    let directory = match &ov.out {
        Some(d) => d.clone(),
        None => match os.str("directory")? {
            Some(d) => base.join(d),
            None => env_out.unwrap_or_else(|| PathBuf::from(".")),
        },
    };
    let formats = match &ov.formats {
        Some(s) => parse_formats("output.formats", &s.split(',').collect::<Vec<_>>())?,
        None => match os.get("formats") {
            None => vec![Format::Csv, Format::Json],
            Some(Value::Array(a)) => {
                let items: Vec<&str> = a
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .ok_or_else(|| ConfigError::new("output.formats", "expected strings"))
                    })
                    .collect::<CResult<_>>()?;
                parse_formats("output.formats", &items)?
            }
            Some(_) => return Err(ConfigError::new("output.formats", "expected a list")),
        },
    };

    let xs = Section::new("options", top.get("options"), OPTION_KEYS)?;
    let scheme_text = match &ov.scheme {
        Some(s) => Some(s.as_str()),
        None => xs.str("scheme")?,
    };
    let scheme = match scheme_text {
        Some(s) => s
            .parse()
            .map_err(|e: cburgers_core::Error| ConfigError::new("options.scheme", e.to_string()))?,
        None => Scheme::IfRk4,
    };
    let blowup_cap = positive(
        "options.blowup_cap",
        ov.blowup_cap
            .map_or_else(|| Ok(xs.f64("blowup_cap")?.unwrap_or(1e8)), Ok::<_, ConfigError>)?,
    )?;
    let record_every = match ov.record_every {
        Some(r) => r,
        None => xs.uint("record_every")?.map(|r| r as usize).unwrap_or(10),
    };
    if record_every == 0 {
        return Err(ConfigError::new("options.record_every", "must be at least 1"));
    }
    let hs_orders = match &ov.hs {
        Some(s) => parse_list("options.hs_orders", s)?,
        None => match xs.get("hs_orders") {
            None => vec![0.0, 1.0, 2.0],
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| ConfigError::new("options.hs_orders", "expected numbers"))
                })
                .collect::<CResult<_>>()?,
            Some(_) => return Err(ConfigError::new("options.hs_orders", "expected a list")),
        },
    };
    let big_float = ov.big_float || xs.get("big_float").and_then(Value::as_bool).unwrap_or(false);
    let amp = match &ov.amp {
        Some(s) => parse_real("options.A", s)?,
        None => xs.real("A")?.unwrap_or(Real::ratio(21, 20)),
    };
    let k_cert = match ov.k_cert {
        Some(k) => Some(k),
        None => xs.uint("K")?.map(|k| k as u32),
    };
    let t_cert = match &ov.t_cert {
        Some(s) => Some(parse_real("options.T", s)?),
        None => xs.real("T")?,
    };
    let check = match &ov.check {
        Some(s) => s.parse().map_err(|e| ConfigError::new("options.check", e))?,
        None => match xs.str("check")? {
            Some(s) => s.parse().map_err(|e| ConfigError::new("options.check", e))?,
            None => Check::Geometric,
        },
    };
    let c2 = match ov.c2 {
        Some(c) => Some(c),
        None => xs.f64("C2")?,
    };
    let fit_window = match &ov.fit_window {
        Some(s) => Some(parse_window("options.fit_window", s)?),
        None => match xs.get("fit_window") {
            None => None,
            Some(Value::Array(a)) if a.len() == 2 => {
                let lo = a[0].as_f64();
                let hi = a[1].as_f64();
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
                    _ => return Err(ConfigError::new("options.fit_window", "expected [lo, hi] with lo < hi")),
                }
            }
            Some(_) => return Err(ConfigError::new("options.fit_window", "expected [lo, hi]")),
        },
    };

    let threads = match ov.threads {
        Some(t) => Some(t),
        None => top.uint("threads")?.map(|t| t as usize),
    };
    if threads == Some(0) {
        return Err(ConfigError::new("threads", "must be at least 1"));
    }

    Ok(RunConfig {
        command,
        params,
        init,
        numeric: Numeric {
            precision_bits,
            dt,
            n,
            t_end,
            k_max,
            t_grid,
        },
        directory,
        formats,
        options: Options {
            scheme,
            blowup_cap,
            record_every,
            hs_orders,
            big_float,
            amp,
            k_cert,
            t_cert,
            check,
            c2,
            fit_window,
        },
        threads,
    })
}

impl RunConfig {
    /// Everything that can change results. The output directory and thread
    /// count are left out so reruns elsewhere hash the same.
    pub fn resolved_json(&self) -> Value {
        let o = &self.options;
        json!({
            "command": self.command.name(),
            "params": {
                "nu": real_string(&self.params.nu),
                "alpha": real_string(&self.params.alpha),
                "gamma": real_string(&self.params.gamma),
            },
            "init": initial_data_json(&self.init),
            "numeric": {
                "precision_bits": self.numeric.precision_bits,
                "dt": self.numeric.dt,
                "N": self.numeric.n,
                "t_end": self.numeric.t_end,
                "k_max": self.numeric.k_max,
                "t_grid": self.numeric.t_grid.as_ref().map(TGrid::to_json),
            },
            "formats": self.formats.iter().map(|f| match f {
                Format::Csv => "csv",
                Format::Json => "json",
            }).collect::<Vec<_>>(),
            "options": {
                "scheme": o.scheme.to_string(),
                "blowup_cap": o.blowup_cap,
                "record_every": o.record_every,
                "hs_orders": o.hs_orders,
                "big_float": o.big_float,
                "A": real_string(&o.amp),
                "K": o.k_cert,
                "T": o.t_cert.as_ref().map(real_string),
                "check": o.check.name(),
                "C2": o.c2,
                "fit_window": o.fit_window.map(|(a, b)| vec![a, b]),
            },
        })
    }

    /// SHA-256 of the compact resolved configuration, hex encoded.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(&self.resolved_json()).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
