//! Explicit blow-up data for complex Burgers with `u₀ = a e^{ix}`.
//!
//! With `A = a e^{-T} ≥ 1` and `T ≥ T₀ = Σ_{k≥2} k^{-2} ln((3k-3)/(2k-3))`,
//! every mode satisfies `|a_k(T)| ≥ A^k`, so the L² norm is infinite at T.
//! This module computes the ladder `t_k`, an outward-rounded enclosure of
//! T₀, and checks the finite prefix `k ≤ K` of the lower bounds.
//!
//! For ν ≠ 1 the solution scales as `a_k(t; ν, a) = ν·b_k(νt; a/ν)`, so the
//! certificate uses `a = ν·A·e^{νT}`, requires `νT ≥ T₀` and checks
//! `|a_k(T)| ≥ ν·A^k`.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, Pow};
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{check_precision, Error, Result};
use crate::exact_series::burgers::{BurgersSeries, NormalizedRow};
use crate::exact_series::eval::{evaluate_mode, CompiledMode};
use crate::numeric::{rational_to_f64, GaussianRational, Real};
use crate::params::positive_rational;

/// Precision of the ladder and of the T₀ enclosure.
pub const LADDER_PRECISION: u32 = 192;
/// Partial-sum cutoff used to check `T ≥ T₀`.
pub const T0_CHECK_TERMS: u32 = 1000;
/// Relative slack allowed in `|a_k(T)| ≥ threshold`.
pub const COMPARISON_SLACK_BITS: i32 = 64;
const MAX_CERT_PRECISION: u32 = 1 << 14;

/// `ln((3k-3)/(2k-3)) / k²` rounded in direction `round`.
fn ladder_increment(k: u32, prec: u32, round: Round) -> Float {
    let q = Rational::from((3 * k as i64 - 3, 2 * k as i64 - 3));
    let mut x = Float::with_val_round(prec, &q, round).0;
    x.ln_round(round);
    x.div_assign_round(k * k, round);
    x
}

/// Thresholds `t_2 ≤ t_3 ≤ … ≤ t_K` for viscosity ν.
#[derive(Clone, Debug)]
pub struct TLadder {
    pub nu: Rational,
    /// `(k, t_k)` for k = 2..=K.
    pub entries: Vec<(u32, Float)>,
}

impl TLadder {
    pub fn k_max(&self) -> u32 {
        self.entries.last().map(|e| e.0).unwrap_or(1)
    }

    /// `t_k`, or None outside 2..=K.
    pub fn get(&self, k: u32) -> Option<&Float> {
        if k < 2 {
            return None;
        }
        self.entries.get(k as usize - 2).map(|e| &e.1)
    }
}

pub fn t_ladder(k_max: u32, nu: &Rational) -> Result<TLadder> {
    if k_max < 2 {
        return Err(Error::invalid(format!("ladder needs K >= 2, got {k_max}")));
    }
    positive_rational(nu, "nu")?;
    let p = LADDER_PRECISION;
    let mut acc = Float::new(p);
    let mut entries = Vec::with_capacity(k_max as usize - 1);
    for k in 2..=k_max {
        acc += ladder_increment(k, p, Round::Nearest);
        entries.push((k, Float::with_val(p, &acc / nu)));
    }
    Ok(TLadder {
        nu: nu.clone(),
        entries,
    })
}

/// Enclosure `lower ≤ T₀/ν ≤ upper`.
#[derive(Clone, Debug)]
pub struct T0Bound {
    pub k: u32,
    pub nu: Rational,
    pub lower: Float,
    pub upper: Float,
}

/// Partial sum to K rounded down, plus the tail bound `ln3/K` rounded up.
pub fn t0_bound(k: u32, nu: &Rational) -> Result<T0Bound> {
    if k < 2 {
        return Err(Error::invalid(format!("T0 bound needs K >= 2, got {k}")));
    }
    positive_rational(nu, "nu")?;
    let p = LADDER_PRECISION;
    let mut lo = Float::new(p);
    let mut hi = Float::new(p);
    for j in 2..=k {
        lo.add_assign_round(ladder_increment(j, p, Round::Down), Round::Down);
        hi.add_assign_round(ladder_increment(j, p, Round::Up), Round::Up);
    }
    let mut tail = Float::with_val_round(p, 3, Round::Up).0;
    tail.ln_round(Round::Up);
    tail.div_assign_round(k, Round::Up);
    hi.add_assign_round(&tail, Round::Up);
    let nu_lo = Float::with_val_round(p, nu, Round::Down).0;
    let nu_hi = Float::with_val_round(p, nu, Round::Up).0;
    lo.div_assign_round(&nu_hi, Round::Down);
    hi.div_assign_round(&nu_lo, Round::Up);
    Ok(T0Bound {
        k,
        nu: nu.clone(),
        lower: lo,
        upper: hi,
    })
}

/// `T0_bound(1000).upper + 0.01`, the default certificate time.
pub fn default_time(nu: &Rational) -> Result<Float> {
    let b = t0_bound(T0_CHECK_TERMS, nu)?;
    let mut t = b.upper;
    t.add_assign_round(Float::with_val(LADDER_PRECISION, Rational::from((1, 100))), Round::Up);
    Ok(t)
}

/// `Σ_m r_{k,m} w^m` and `Σ_m |r_{k,m}| w^m` at `prec` bits.
fn normalized_sum(row: &NormalizedRow, w: &Float, prec: u32) -> (Float, Float) {
    let mut s = Float::new(prec);
    let mut a = Float::new(prec);
    for (m, r) in row.nonzero() {
        let wm = Float::with_val(prec, w.pow(m));
        let term = Float::with_val(prec, &wm * r);
        a += term.clone().abs();
        s += term;
    }
    (s, a)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundEntry {
    pub k: u32,
    pub value: String,
    pub threshold: String,
    pub pass: bool,
    /// Bits used for the final comparison.
    pub precision_bits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainEntry {
    pub k: u32,
    pub t_from: f64,
    pub samples: usize,
    /// `min |a_k(t)| / threshold` over the samples in `[t_k, T]`.
    pub min_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupCertificate {
    #[serde(rename = "T")]
    pub t: String,
    pub nu: String,
    #[serde(rename = "A")]
    pub amp: String,
    pub a: String,
    #[serde(rename = "K_verified")]
    pub k_verified: u32,
    #[serde(rename = "T0_lower")]
    pub t0_lower: String,
    #[serde(rename = "T0_upper")]
    pub t0_upper: String,
    pub precision_bits: u32,
    pub bounds: Vec<BoundEntry>,
    /// `Σ_{j≤k} |a_j(T)|²` for k = 1..=K.
    pub partial_l2: Vec<String>,
    pub partial_l2_increasing: bool,
    pub ladder_chain: Vec<ChainEntry>,
    pub valid: bool,
}

/// Build and check the certificate for `k ≤ k_max`.
///
/// Fails if `A < 1` or `νT` is below the verified upper bound on T₀.
/// Individual bounds that fail are reported, not raised.
pub fn make_certificate(t: &Float, nu: &Rational, amp: &Real, k_max: u32, precision: u32) -> Result<BlowupCertificate> {
    check_precision(precision)?;
    positive_rational(nu, "nu")?;
    if k_max == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let p = precision;
    let amp_f = amp.to_float(p);
    if amp_f < 1 {
        return Err(Error::Hypothesis(format!("A = {amp} must be at least 1")));
    }
    let bound = t0_bound(k_max.max(T0_CHECK_TERMS), nu)?;
    if *t < bound.upper {
        return Err(Error::Hypothesis(format!(
            "T = {} is below the verified bound T0/nu <= {}",
            t.to_f64(),
            bound.upper.to_f64()
        )));
    }

    let series = BurgersSeries::new(nu.clone())?;
    series.normalized(k_max)?;
    let nu_f = Float::with_val(p, nu);

    let check_k = |k: u32| -> Result<(BoundEntry, Float)> {
        let row = series.normalized(k)?;
        let mut wp = p + 32;
        loop {
            let nu_w = Float::with_val(wp, nu);
            let amp_w = amp.to_float(wp);
            let nu_t = Float::with_val(wp, &nu_w * t);
            let w = Float::with_val(wp, -&nu_t).exp();
            let big_a = Float::with_val(wp, &amp_w * &nu_w) * Float::with_val(wp, nu_t.exp_ref());
            let (s, abs_sum) = normalized_sum(&row, &w, wp);
            let ak = Float::with_val(wp, (&big_a).pow(k)) * Float::with_val(wp, s.abs_ref());
            let thr = Float::with_val(wp, &nu_w * Float::with_val(wp, (&amp_w).pow(k)));
            // rounding in the sum and the powers, relative to |a_k|
            let cancel = Float::with_val(64, &abs_sum / Float::with_val(wp, s.abs_ref()));
            let ops = (row.nonzero().count() as u32 + 4 * k + 16) as f64;
            let err_rel = cancel * ops * Float::with_val(64, Float::i_exp(1, 1 - wp as i32));
            let slack = Float::with_val(64, Float::i_exp(1, -COMPARISON_SLACK_BITS));
            let lowered = Float::with_val(wp, &thr * Float::with_val(wp, 1 - &slack));
            let margin = Float::with_val(64, (Float::with_val(wp, &ak - &thr) / &thr).abs());
            let marginal = margin <= err_rel;
            if !marginal || wp >= MAX_CERT_PRECISION {
                let value_lo = Float::with_val(wp, &ak * Float::with_val(wp, 1 - &err_rel));
                let pass = value_lo >= lowered;
                return Ok((
                    BoundEntry {
                        k,
                        value: sig_digits(&ak, 40),
                        threshold: sig_digits(&thr, 40),
                        pass,
                        precision_bits: wp,
                    },
                    ak,
                ));
            }
            wp *= 2;
        }
    };
    let results: Vec<(BoundEntry, Float)> = (1..=k_max).into_par_iter().map(check_k).collect::<Result<_>>()?;

    let mut partial = Vec::with_capacity(results.len());
    let mut acc = Float::new(p);
    let mut increasing = true;
    for (_, v) in &results {
        let before = acc.clone();
        acc += Float::with_val(p, v.square_ref());
        increasing &= acc > before;
        partial.push(sig_digits(&acc, 30));
    }

    let chain = ladder_chain(&series, nu, &amp_f, t, k_max, p)?;
    let bounds: Vec<BoundEntry> = results.into_iter().map(|(b, _)| b).collect();
    let valid = bounds.iter().all(|b| b.pass) && increasing;
    let a = Float::with_val(p, &amp_f * &nu_f) * Float::with_val(p, Float::with_val(p, &nu_f * t).exp());
    Ok(BlowupCertificate {
        t: sig_digits(t, 40),
        nu: nu.to_string(),
        amp: amp.to_string(),
        a: sig_digits(&a, 40),
        k_verified: k_max,
        t0_lower: sig_digits(&bound.lower, 40),
        t0_upper: sig_digits(&bound.upper, 40),
        precision_bits: p,
        bounds,
        partial_l2: partial,
        partial_l2_increasing: increasing,
        ladder_chain: chain,
        valid,
    })
}

/// Samples per mode for the `[t_k, T]` window check.
pub const CHAIN_SAMPLES: usize = 16;

fn ladder_chain(
    series: &BurgersSeries,
    nu: &Rational,
    amp: &Float,
    t_end: &Float,
    k_max: u32,
    p: u32,
) -> Result<Vec<ChainEntry>> {
    let ladder = if k_max >= 2 { Some(t_ladder(k_max, nu)?) } else { None };
    let nu_f = Float::with_val(p, nu);
    let big_a = Float::with_val(p, amp * &nu_f) * Float::with_val(p, Float::with_val(p, &nu_f * t_end).exp());
    let te = t_end.to_f64();
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let from = match ladder.as_ref().and_then(|l| l.get(k)) {
                Some(tk) => tk.to_f64(),
                None => 0.0,
            };
            let row = series.normalized(k)?;
            let thr = Float::with_val(p, &nu_f * Float::with_val(p, amp.pow(k)));
            let mut min_ratio = f64::INFINITY;
            for i in 0..CHAIN_SAMPLES {
                let tt = from + (te - from) * i as f64 / (CHAIN_SAMPLES - 1) as f64;
                let w = Float::with_val(p, -Float::with_val(p, &nu_f * tt)).exp();
                let (s, _) = normalized_sum(&row, &w, p);
                let v = Float::with_val(p, (&big_a).pow(k)) * s.abs();
                min_ratio = min_ratio.min(Float::with_val(p, &v / &thr).to_f64());
            }
            Ok(ChainEntry {
                k,
                t_from: from,
                samples: CHAIN_SAMPLES,
                min_ratio,
                pass: min_ratio >= 1.0 - 2f64.powi(-40),
            })
        })
        .collect()
}

/// Decimal string with `digits` significant digits.
pub fn sig_digits(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Default t-grid of `n` log-spaced points in `(0, t_max]`.
pub fn log_grid(t_max: f64, n: usize) -> Vec<f64> {
    let lo = (t_max * 1e-3).ln();
    let hi = t_max.ln();
    (0..n)
        .map(|i| {
            if n == 1 {
                t_max
            } else {
                (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SignCell {
    pub k: u32,
    pub t: f64,
    /// `|arg(a_k(t)) - (j-1)π/2|`, wrapped.
    pub phase_error: f64,
    pub modulus: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsoCell {
    pub k: u32,
    pub t: f64,
    /// `|a_k(t)|` from the series.
    pub direct: f64,
    /// `3k ∫_0^t e^{-νk²(t-s)} Σ |a_{k1}(s)||a_{k2}(s)| ds` by quadrature.
    pub quadrature: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignReport {
    pub k_max: u32,
    pub a: String,
    pub nu: String,
    pub precision_bits: u32,
    pub phase_tolerance: f64,
    pub max_phase_error: f64,
    pub min_modulus: f64,
    pub cells: Vec<SignCell>,
    pub abso_k_max: u32,
    pub abso_tolerance: f64,
    pub abso: Vec<AbsoCell>,
    pub pass: bool,
}

/// Sign-pattern options.
#[derive(Clone, Debug)]
pub struct SignOptions {
    pub precision: u32,
    pub phase_tolerance: f64,
    /// Highest k checked against the absolute-value recursion.
    pub abso_k_max: u32,
    pub abso_tolerance: f64,
    /// Gauss–Legendre panels and nodes per panel for that quadrature.
    pub panels: usize,
    pub nodes: usize,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self {
            precision: 256,
            phase_tolerance: 1e-20,
            abso_k_max: 8,
            abso_tolerance: 1e-9,
            panels: 24,
            nodes: 16,
        }
    }
}

/// Check `a_k(t) = i^{j-1} a^k b_k(t)` with `b_k > 0` (k = 4n + j) on a grid,
/// and the absolute-value form of the integral recursion.
pub fn verify_sign_pattern(
    k_max: u32,
    a: &Rational,
    nu: &Rational,
    t_samples: &[f64],
    opts: &SignOptions,
) -> Result<SignReport> {
    check_precision(opts.precision)?;
    positive_rational(a, "a")?;
    positive_rational(nu, "nu")?;
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    if t_samples.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("sign-pattern samples must be positive times"));
    }
    let p = opts.precision;
    let series = BurgersSeries::new(nu.clone())?;
    let a0 = GaussianRational::real(a.clone());
    let tables: Vec<_> = (1..=k_max).map(|k| series.table(k, &a0)).collect::<Result<_>>()?;
    let half_pi = Float::with_val(p, Constant::Pi) / 2u32;

    let cells: Vec<SignCell> = tables
        .par_iter()
        .flat_map_iter(|table| {
            let k = table.k;
            let expected = Float::with_val(p, &half_pi * ((k - 1) % 4));
            let two_pi = Float::with_val(p, &half_pi * 4u32);
            t_samples.iter().map(move |&t| {
                let v = evaluate_mode(table, &Real::Approx(t), p).expect("valid time");
                let modulus = v.value.abs();
                let mut d = Float::with_val(p, v.value.arg() - &expected);
                // wrap into (-π, π]
                let pi = Float::with_val(p, &two_pi / 2u32);
                if d > pi {
                    d -= &two_pi;
                } else if d <= -pi.clone() {
                    d += &two_pi;
                }
                let phase_error = d.abs().to_f64();
                let pos = modulus.cmp0() == Some(Ordering::Greater);
                SignCell {
                    k,
                    t,
                    phase_error,
                    modulus: modulus.to_f64(),
                    pass: pos && phase_error <= opts.phase_tolerance,
                }
            })
        })
        .collect();

    let abso_k = opts.abso_k_max.min(k_max);
    let abso = abso_check(&tables[..abso_k as usize], nu, t_samples, opts);

    let max_phase_error = cells.iter().map(|c| c.phase_error).fold(0.0, f64::max);
    let min_modulus = cells.iter().map(|c| c.modulus).fold(f64::INFINITY, f64::min);
    let pass = cells.iter().all(|c| c.pass) && abso.iter().all(|c| c.pass);
    Ok(SignReport {
        k_max,
        a: a.to_string(),
        nu: nu.to_string(),
        precision_bits: p,
        phase_tolerance: opts.phase_tolerance,
        max_phase_error,
        min_modulus,
        cells,
        abso_k_max: abso_k,
        abso_tolerance: opts.abso_tolerance,
        abso,
        pass,
    })
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Newton on P_n with the usual cosine initial guesses
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn abso_check(
    tables: &[crate::exact_series::CoeffTable],
    nu: &Rational,
    t_samples: &[f64],
    opts: &SignOptions,
) -> Vec<AbsoCell> {
    let compiled: Vec<CompiledMode> = tables.iter().map(|t| CompiledMode::new(t, 128)).collect();
    let modulus = |k: u32, s: f64| -> f64 {
        compiled[k as usize - 1]
            .sum_at(&Float::with_val(128, s))
            .value
            .abs()
            .to_f64()
    };
    let nu = rational_to_f64(nu);
    let gl = gauss_legendre(opts.nodes);
    let cells: Vec<(u32, f64)> = (2..=tables.len() as u32)
        .flat_map(|k| t_samples.iter().map(move |&t| (k, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(k, t)| {
            let kk = (k * k) as f64;
            let h = t / opts.panels as f64;
            let mut integral = 0.0;
            for panel in 0..opts.panels {
                let (lo, hi) = (panel as f64 * h, (panel + 1) as f64 * h);
                for (x, w) in &gl {
                    let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                    let mut conv = 0.0;
                    for k1 in 1..k {
                        conv += modulus(k1, s) * modulus(k - k1, s);
                    }
                    integral += 0.5 * (hi - lo) * w * (-nu * kk * (t - s)).exp() * conv;
                }
            }
            let quadrature = 3.0 * k as f64 * integral;
            let direct = modulus(k, t);
            let rel_diff = (quadrature - direct).abs() / direct;
            AbsoCell {
                k,
                t,
                direct,
                quadrature,
                rel_diff,
                pass: rel_diff <= opts.abso_tolerance,
            }
        })
        .collect()
}
