//! Numerical checks of the global-regularity bounds.
//!
//! Single-mode data is homogeneous: `a_k(t; a01) = a01^k c_k(t)` where
//! `c_k` is row k for `a01 = 1`, so `|a_k(t)|/|a01|^k` does not depend on
//! the amplitude and one set of rows serves every `a01`.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{check_precision, Error, Result};
use crate::exact_series::burgers::BurgersSeries;
use crate::exact_series::eval::{evaluate_mode, CompiledMode, ModeSeries};
use crate::exact_series::kdvb::{exact_series, float_series};
use crate::exact_series::symbolic::{kdvb_symbolic_table, MonomialKey, K_SYM_MAX};
use crate::numeric::{rational_to_f64, ComplexInput, GaussianRational, Real};
use crate::params::{gap_h, gap_l, ModelParams};

/// Tolerance of the geometric bound `|a_k(t)| ≤ |a01|^k`.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-12;
const GRID_PRECISION: u32 = 192;

pub type Row = Box<dyn ModeSeries + Send + Sync>;

/// Rows 1..=k_max for the given data.
///
/// Single-mode rational data with α = 0 goes through the Burgers table;
/// everything else through the KdV–Burgers recursion (exact when possible).
pub fn build_rows(params: &ModelParams, init: &[ComplexInput], k_max: u32, precision: u32) -> Result<Vec<Row>> {
    params.require_exponomial()?;
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    if init.is_empty() {
        return Err(Error::invalid("initial data needs at least a_01"));
    }
    let single = init[1..].iter().all(|z| z.abs_f64() == 0.0);
    if let (true, true, Real::Exact(nu), Some(a)) = (single, params.alpha.is_zero(), &params.nu, init[0].as_exact()) {
        let s = BurgersSeries::new(nu.clone())?;
        return (1..=k_max).map(|k| Ok(Box::new(s.table(k, a)?) as Row)).collect();
    }
    let mut data = init.to_vec();
    data.resize(k_max as usize, ComplexInput::zero());
    let exact: Option<Vec<GaussianRational>> = data.iter().map(|z| z.as_exact().cloned()).collect();
    match exact {
        Some(d) if params.is_exact() => {
            let s = exact_series(params, &d)?;
            (1..=k_max).map(|k| Ok(Box::new(s.series(k)?) as Row)).collect()
        }
        _ => {
            let s = float_series(params, &data, precision)?;
            (1..=k_max).map(|k| Ok(Box::new(s.series(k)?) as Row)).collect()
        }
    }
}

/// `|a_k(t)|` for every row and grid point, as 64-bit floats with full
/// exponent range. Cells whose compiled sum loses too much to cancellation
/// are redone with [`evaluate_mode`].
pub fn modulus_grid(rows: &[Row], grid: &[f64]) -> Result<Vec<Vec<Float>>> {
    if grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("time grid must be nonnegative"));
    }
    rows.par_iter()
        .map(|row| {
            let compiled = CompiledMode::new(row.as_ref(), GRID_PRECISION);
            grid.iter()
                .map(|&t| {
                    let v = compiled.sum_at(&Float::with_val(GRID_PRECISION, t));
                    let rel = v.relative_error_bound();
                    if rel <= Float::with_val(64, Float::i_exp(1, -60)) {
                        Ok(Float::with_val(64, v.value.abs()))
                    } else {
                        let w = evaluate_mode(row.as_ref(), &Real::Approx(t), 64)?;
                        Ok(Float::with_val(64, w.value.abs()))
                    }
                })
                .collect()
        })
        .collect()
}

/// `n` equally spaced points on `[t0, t1]`.
pub fn linear_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![t0];
    }
    (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Regime {
    pub nu: String,
    pub alpha: String,
    pub init: Vec<[f64; 2]>,
}

fn regime(params: &ModelParams, init: &[ComplexInput]) -> Regime {
    Regime {
        nu: params.nu.to_string(),
        alpha: params.alpha.to_string(),
        init: init
            .iter()
            .map(|z| {
                let c = z.to_c64();
                [c.re, c.im]
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub k_range: [u32; 2],
    pub t_grid: [f64; 2],
    pub t_points: usize,
    /// `ν² + 4α²` (geometric) or `ν² + 9α²` (coefficients).
    pub hypothesis_value: f64,
    pub in_hypothesis: bool,
    pub worst_ratio: f64,
    pub worst_at: (u32, f64),
    /// `(k, max_t ratio, argmax t)` for each k.
    pub per_k: Vec<(u32, f64, f64)>,
    /// `max |a_{k+1}(t)| / |a_k(t)|`, to compare with `|a01|`.
    pub chain_ratio: f64,
    pub chain_at: (u32, f64),
    pub pass: bool,
    pub warnings: Vec<String>,
}

fn hypothesis(nu: &Real, alpha: &Real, c: i64, rhs: i64) -> (f64, bool) {
    if let (Real::Exact(n), Real::Exact(a)) = (nu, alpha) {
        let v = Rational::from(n * n) + Rational::from(a * a) * c;
        return (rational_to_f64(&v), v >= rhs);
    }
    let (n, a) = (nu.to_f64(), alpha.to_f64());
    let v = n * n + c as f64 * a * a;
    (v, v >= rhs as f64 * (1.0 - 1e-12))
}

/// `max |a_k(t)| / |a01|^k` over k ≤ k_max and the grid; pass iff ≤ 1 + 1e-12.
///
/// Runs outside the hypothesis `ν² + 4α² ≥ 9` too, but then `pass` is only
/// informational and `in_hypothesis` is false.
pub fn check_geometric_bound(
    nu: &Real,
    alpha: &Real,
    a01: &ComplexInput,
    k_max: u32,
    t_grid: &[f64],
    precision: u32,
) -> Result<BoundReport> {
    check_precision(precision)?;
    let amp = a01.abs_f64();
    if !(amp < 1.0) {
        return Err(Error::invalid(format!("|a01| must be below 1, got {amp}")));
    }
    if t_grid.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    let params = ModelParams::kdvb(nu.clone(), alpha.clone())?;
    let (hv, inside) = hypothesis(nu, alpha, 4, 9);
    let mut warnings = Vec::new();
    if !inside {
        warnings.push(format!(
            "nu^2 + 4 alpha^2 = {hv} < 9: outside the hypothesis, informational only"
        ));
    }
    let unit = ComplexInput::Exact(GaussianRational::one());
    let rows = build_rows(&params, &[unit], k_max, precision)?;
    let grid = modulus_grid(&rows, t_grid)?;

    let mut worst = (0.0f64, (1, t_grid[0]));
    let mut chain = (0.0f64, (1, t_grid[0]));
    let mut per_k = Vec::with_capacity(grid.len());
    for (i, row) in grid.iter().enumerate() {
        let k = i as u32 + 1;
        let mut row_worst = (0.0f64, t_grid[0]);
        for (j, v) in row.iter().enumerate() {
            let r = v.to_f64();
            if r > row_worst.0 {
                row_worst = (r, t_grid[j]);
            }
            if r > worst.0 {
                worst = (r, (k, t_grid[j]));
            }
            if let Some(next) = grid.get(i + 1) {
                if !v.is_zero() {
                    let c = Float::with_val(64, &next[j] / v).to_f64() * amp;
                    if c > chain.0 {
                        chain = (c, (k, t_grid[j]));
                    }
                }
            }
        }
        per_k.push((k, row_worst.0, row_worst.1));
    }
    Ok(BoundReport {
        regime: regime(&params, std::slice::from_ref(a01)),
        k_range: [1, k_max],
        t_grid: [t_grid[0], *t_grid.last().expect("nonempty")],
        t_points: t_grid.len(),
        hypothesis_value: hv,
        in_hypothesis: inside,
        worst_ratio: worst.0,
        worst_at: worst.1,
        per_k,
        chain_ratio: chain.0,
        chain_at: chain.1,
        pass: worst.0 <= 1.0 + GEOMETRIC_TOLERANCE,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientRow {
    pub k: u32,
    /// `max |C|` over the single-mode monomial `a01^k`.
    pub max_abs: f64,
    pub max_at: (u32, u32),
    /// `|C|² ≤ 1` checked in exact arithmetic.
    pub bounded: bool,
    /// `max |C|` over every monomial of row k.
    pub max_abs_all_monomials: f64,
    /// `3k² / √(ν²(k²-h)² + α²(k³-l)²)` at `h = U(k)`, `l = V(k)`.
    pub intermediate: f64,
    pub intermediate_le_one: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientReport {
    pub nu: String,
    pub alpha: String,
    pub k_max: u32,
    /// `ν² + 9α²`.
    pub hypothesis_value: f64,
    pub in_hypothesis: bool,
    pub rows: Vec<CoefficientRow>,
    pub max_abs: f64,
    /// All single-mode coefficients satisfy `|C| ≤ 1`.
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Exact `|C(α, ν, k, h, l, j)| ≤ 1` for single-mode data, k ≤ min(k_max, 8).
pub fn check_coefficient_boundedness(nu: &Rational, alpha: &Rational, k_max: u32) -> Result<CoefficientReport> {
    let params = ModelParams::kdvb(Real::Exact(nu.clone()), Real::Exact(alpha.clone()))?;
    let (hv, inside) = hypothesis(&params.nu, &params.alpha, 9, 36);
    let mut warnings = Vec::new();
    if !inside {
        warnings.push(format!("nu^2 + 9 alpha^2 = {hv} < 36: outside the hypothesis"));
    }
    let k_top = k_max.min(K_SYM_MAX);
    if k_top < k_max {
        warnings.push(format!("symbolic tables stop at k = {K_SYM_MAX}"));
    }
    if k_top == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let one = Rational::from(1);
    let rows: Vec<CoefficientRow> = (1..=k_top)
        .into_par_iter()
        .map(|k| {
            let table = kdvb_symbolic_table(k, &params)?;
            let mut single = vec![0; k as usize];
            single[0] = k;
            let key = MonomialKey(single);
            let mut max_sq = Rational::new();
            let mut max_at = (0, 0);
            let mut bounded = true;
            if let Some(cells) = table.get(&key) {
                for ((h, l), c) in cells {
                    let n = c.norm_sqr();
                    bounded &= n <= one;
                    if n > max_sq {
                        max_sq = n;
                        max_at = (*h, *l);
                    }
                }
            }
            let all = table
                .values()
                .flat_map(|c| c.values())
                .map(|c| c.norm_sqr())
                .max()
                .unwrap_or_default();
            let kk = k as i64;
            let dh = kk * kk - gap_h(k) as i64;
            let dl = kk * kk * kk - gap_l(k) as i64;
            let den = Rational::from(nu * nu) * (dh * dh) + Rational::from(alpha * alpha) * (dl * dl);
            let num = Rational::from(9 * kk * kk * kk * kk);
            let (intermediate, le) = if k == 1 || den.is_zero() {
                (f64::INFINITY, false)
            } else {
                (rational_to_f64(&Rational::from(&num / &den)).sqrt(), num <= den)
            };
            Ok(CoefficientRow {
                k,
                max_abs: rational_to_f64(&max_sq).sqrt(),
                max_at,
                bounded,
                max_abs_all_monomials: rational_to_f64(&all).sqrt(),
                intermediate,
                intermediate_le_one: le,
            })
        })
        .collect::<Result<_>>()?;
    let max_abs = rows.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.bounded);
    Ok(CoefficientReport {
        nu: nu.to_string(),
        alpha: alpha.to_string(),
        k_max: k_top,
        hypothesis_value: hv,
        in_hypothesis: inside,
        rows,
        max_abs,
        pass,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub s: f64,
    /// `-slope / ν` of `ln ‖u(t)‖_{H^s}` against t.
    pub delta: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `1 - R²`.
    pub residual: f64,
    /// RMS of the log residuals.
    pub rms_log_residual: f64,
    pub decreasing_after_one: bool,
    pub window: [f64; 2],
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    pub regime: Regime,
    pub k_range: [u32; 2],
    pub t_grid: [f64; 2],
    pub t_points: usize,
    /// Smallest C₂ for which the envelope holds on k = 2..=k_max.
    pub minimal_c2: f64,
    pub minimal_c2_at: (u32, f64),
    /// Minimal C₂ using rows 2..=k only, for each k.
    pub c2_by_k: Vec<(u32, f64)>,
    pub given_c2: Option<f64>,
    pub envelope_holds: Option<bool>,
    pub fits: Vec<DecayFit>,
    /// `(t, s, ‖u(t)‖_{H^s})` for plotting.
    pub norms: Vec<(f64, f64, f64)>,
    pub pass: bool,
    pub exempt: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct EnvelopeOptions {
    pub c2: Option<f64>,
    pub hs_orders: Vec<f64>,
    /// Fit window; defaults to the upper half of the grid.
    pub fit_window: Option<(f64, f64)>,
    pub precision: u32,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            c2: None,
            hs_orders: vec![0.0, 1.0, 2.0],
            fit_window: None,
            precision: 256,
        }
    }
}

/// `(k² - 1) e^{2√2 √k} e^{-νkt} / (1 - e^{-νt})`.
fn envelope(k: u32, nu: f64, t: f64) -> Float {
    let p = 64;
    let kf = k as f64;
    let pre = Float::with_val(p, kf * kf - 1.0);
    let ex = Float::with_val(p, 2.0 * 2f64.sqrt() * kf.sqrt() - nu * kf * t).exp();
    let den = -Float::with_val(p, -nu * t).exp_m1();
    pre * ex / den
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let one_minus_r2 = if ss_tot > 0.0 { ss_res / ss_tot } else { 0.0 };
    (slope, icpt, one_minus_r2, (ss_res / n).sqrt())
}

/// Envelope constant, H^s decay fit and plotting data.
///
/// k = 1 is exempt from the envelope, whose factor `k² - 1` vanishes there.
pub fn envelope_report(
    params: &ModelParams,
    init: &[ComplexInput],
    k_max: u32,
    t_grid: &[f64],
    opts: &EnvelopeOptions,
) -> Result<EnvelopeReport> {
    check_precision(opts.precision)?;
    if params.nu.is_zero() {
        return Err(Error::invalid("envelope needs nu > 0"));
    }
    if t_grid.len() < 3 {
        return Err(Error::invalid("envelope needs at least three grid points"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid(
            "t-grid must exclude t = 0 (the envelope is singular there)",
        ));
    }
    let mut warnings = Vec::new();
    if init.iter().any(|z| z.abs_f64() > 1.0) {
        warnings.push("some |a_0k| exceed 1; the envelope assumes |a_0k| <= 1".to_string());
    }
    let nu = params.nu.to_f64();
    let rows = build_rows(params, init, k_max, opts.precision)?;
    let grid = modulus_grid(&rows, t_grid)?;

    let mut c2 = (0.0f64, (2, t_grid[0]));
    let mut c2_by_k = Vec::new();
    for (i, row) in grid.iter().enumerate().skip(1) {
        let k = i as u32 + 1;
        for (j, v) in row.iter().enumerate() {
            let r = Float::with_val(64, v / envelope(k, nu, t_grid[j])).to_f64();
            if r > c2.0 {
                c2 = (r, (k, t_grid[j]));
            }
        }
        c2_by_k.push((k, c2.0));
    }
    let envelope_holds = opts.c2.map(|c| c2.0 <= c);

    let (w0, w1) = opts.fit_window.unwrap_or_else(|| {
        let mid = t_grid[t_grid.len() / 2];
        (mid, *t_grid.last().expect("nonempty"))
    });
    let mut norms = Vec::new();
    let mut fits = Vec::new();
    for &s in &opts.hs_orders {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut series = Vec::new();
        for (j, &t) in t_grid.iter().enumerate() {
            let mut acc = Float::new(64);
            for (i, row) in grid.iter().enumerate() {
                let k = (i + 1) as f64;
                acc += Float::with_val(64, row[j].square_ref()) * (1.0 + k * k).powf(s);
            }
            let norm = acc.sqrt();
            let ln = norm.clone().ln().to_f64();
            norms.push((t, s, norm.to_f64()));
            series.push((t, ln));
            if t >= w0 - 1e-12 && t <= w1 + 1e-12 {
                xs.push(t);
                ys.push(ln);
            }
        }
        if xs.len() < 2 {
            return Err(Error::invalid(format!(
                "fit window [{w0}, {w1}] holds fewer than two grid points"
            )));
        }
        let (slope, intercept, residual, rms) = least_squares(&xs, &ys);
        let decreasing = series
            .iter()
            .filter(|(t, _)| *t >= 1.0)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1].1 < w[0].1);
        fits.push(DecayFit {
            s,
            delta: -slope / nu,
            slope,
            intercept,
            residual,
            rms_log_residual: rms,
            decreasing_after_one: decreasing,
            window: [w0, w1],
            points: xs.len(),
        });
    }
    let pass = fits.iter().all(|f| f.delta > 0.0) && envelope_holds.unwrap_or(true);
    Ok(EnvelopeReport {
        regime: regime(params, init),
        k_range: [1, k_max],
        t_grid: [t_grid[0], *t_grid.last().expect("nonempty")],
        t_points: t_grid.len(),
        minimal_c2: c2.0,
        minimal_c2_at: c2.1,
        c2_by_k,
        given_c2: opts.c2,
        envelope_holds,
        fits,
        norms,
        pass,
        exempt: vec!["k=1: envelope factor k^2-1 vanishes".to_string()],
        warnings,
    })
}

/// `t,s,norm` rows of an envelope report.
pub fn norms_csv(report: &EnvelopeReport) -> String {
    let mut out = String::from("t,s,norm\n");
    for (t, s, v) in &report.norms {
        let _ = writeln!(out, "{t:.16e},{s},{v:.16e}");
    }
    out
}
