//! Evaluation of exponomial rows at a time t and of the truncated field.
//!
//! Sums are formed at a working precision above the requested one. The
//! a-priori rounding bound for a sum of n terms with exponents `(h, l)` is
//!
//! ```text
//! err ≤ u · Σ |c_j e^{λ_j t}| · (n + 8 + 2·h_j·(1 + νt) + 2·l_j·(1 + α t)),   u = 2^{1-p}
//! ```
//!
//! and the working precision is raised until `err ≤ 2^{-precision}·|value|`
//! (or until the value is exactly zero). Coefficients of float-mode series
//! carry their own construction error, which is not part of this bound.

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;

use crate::error::{check_precision, Error, Result};
use crate::numeric::{BigComplex, Coefficient, GaussianRational, Real};

use super::burgers::CoeffTable;
use super::kdvb::{ExpSeries, Series};

/// Extra bits added to the requested precision on the first attempt.
pub const GUARD_BITS: u32 = 32;
const MAX_WORKING_PRECISION: u32 = 1 << 16;

/// Anything that can be evaluated as `Σ c·e^{(-νh + iαl)t}`.
pub trait ModeSeries {
    fn mode(&self) -> u32;
    fn nu(&self) -> Real;
    fn alpha(&self) -> Real;
    /// `a_k(0)` when it is known exactly.
    fn exact_initial(&self) -> Option<GaussianRational>;
    fn initial(&self, prec: u32) -> BigComplex;
    /// `(h, l, c)` with c rounded to `prec` bits.
    fn big_terms(&self, prec: u32) -> Vec<(u32, u32, BigComplex)>;
}

impl ModeSeries for CoeffTable {
    fn mode(&self) -> u32 {
        self.k
    }
    fn nu(&self) -> Real {
        Real::Exact(self.nu.clone())
    }
    fn alpha(&self) -> Real {
        Real::int(0)
    }
    fn exact_initial(&self) -> Option<GaussianRational> {
        Some(self.initial_value())
    }
    fn initial(&self, prec: u32) -> BigComplex {
        self.initial_value().to_big(prec)
    }
    fn big_terms(&self, prec: u32) -> Vec<(u32, u32, BigComplex)> {
        self.entries.iter().map(|(m, c)| (*m, 0, c.to_big(prec))).collect()
    }
}

impl<S: Coefficient> ModeSeries for ExpSeries<S> {
    fn mode(&self) -> u32 {
        self.k
    }
    fn nu(&self) -> Real {
        self.nu.clone()
    }
    fn alpha(&self) -> Real {
        self.alpha.clone()
    }
    fn exact_initial(&self) -> Option<GaussianRational> {
        self.a0k.as_gaussian()
    }
    fn initial(&self, prec: u32) -> BigComplex {
        self.a0k.to_big(prec)
    }
    fn big_terms(&self, prec: u32) -> Vec<(u32, u32, BigComplex)> {
        self.terms.iter().map(|((h, l), c)| (*h, *l, c.to_big(prec))).collect()
    }
}

impl ModeSeries for Series {
    fn mode(&self) -> u32 {
        self.k()
    }
    fn nu(&self) -> Real {
        match self {
            Series::Exact(s) => s.nu.clone(),
            Series::Approx(s) => s.nu.clone(),
        }
    }
    fn alpha(&self) -> Real {
        match self {
            Series::Exact(s) => s.alpha.clone(),
            Series::Approx(s) => s.alpha.clone(),
        }
    }
    fn exact_initial(&self) -> Option<GaussianRational> {
        match self {
            Series::Exact(s) => Some(s.a0k.clone()),
            Series::Approx(_) => None,
        }
    }
    fn initial(&self, prec: u32) -> BigComplex {
        match self {
            Series::Exact(s) => s.a0k.to_big(prec),
            Series::Approx(s) => s.a0k.to_big(prec),
        }
    }
    fn big_terms(&self, prec: u32) -> Vec<(u32, u32, BigComplex)> {
        match self {
            Series::Exact(s) => s.big_terms(prec),
            Series::Approx(s) => s.big_terms(prec),
        }
    }
}

/// Result of evaluating one mode.
#[derive(Clone, Debug)]
pub struct ModeValue {
    pub value: BigComplex,
    /// Set when the value is known exactly (t = 0 with exact data).
    pub exact: Option<GaussianRational>,
    /// `Σ |c_j e^{λ_j t}|`; large ratios to |value| signal cancellation.
    pub magnitude_sum: Float,
    /// Absolute a-priori rounding bound.
    pub error_bound: Float,
    /// Working precision actually used.
    pub working_precision: u32,
}

impl ModeValue {
    /// `error_bound / |value|`, or infinity for a zero value with nonzero bound.
    pub fn relative_error_bound(&self) -> Float {
        let p = self.error_bound.prec();
        let mag = self.value.abs();
        if mag.is_zero() {
            if self.error_bound.is_zero() {
                return Float::new(p);
            }
            return Float::with_val(p, rug::float::Special::Infinity);
        }
        Float::with_val(p, &self.error_bound / &mag)
    }
}

/// Precomputed exponent table of one row at a fixed working precision.
#[derive(Clone, Debug)]
pub struct CompiledMode {
    pub k: u32,
    nu: Real,
    alpha: Real,
    prec: u32,
    terms: Vec<(u32, u32, BigComplex)>,
}

impl CompiledMode {
    pub fn new<M: ModeSeries + ?Sized>(series: &M, prec: u32) -> Self {
        Self {
            k: series.mode(),
            nu: series.nu(),
            alpha: series.alpha(),
            prec,
            terms: series.big_terms(prec),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// One pass at this compiled precision.
    pub fn sum_at(&self, t: &Float) -> ModeValue {
        let p = self.prec;
        let nu_t = Float::with_val(p, &self.nu.to_float(p) * t);
        let theta = Float::with_val(p, &self.alpha.to_float(p) * t);
        let w = Float::with_val(p, -&nu_t).exp();

        let mut re = Float::new(p);
        let mut im = Float::new(p);
        let mut mags = Float::new(64);
        let mut weighted = Float::new(64);
        let x_abs = nu_t.to_f64().abs();
        let th_abs = theta.to_f64().abs();
        for (h, l, c) in &self.terms {
            let wh = Float::with_val(p, (&w).pow(*h));
            let z = if *l == 0 || theta.is_zero() {
                c.mul_real(&wh)
            } else {
                let ang = Float::with_val(p, &theta * *l);
                let (s, co) = ang.sin_cos(Float::new(p));
                let rot = BigComplex::new(Float::with_val(p, &co * &wh), Float::with_val(p, &s * &wh));
                c.mul(&rot)
            };
            re += &z.re;
            im += &z.im;
            let m = Float::with_val_round(64, z.abs(), Round::Up).0;
            let f = 2.0 * (*h as f64) * (1.0 + x_abs) + 2.0 * (*l as f64) * (1.0 + th_abs);
            weighted += Float::with_val_round(64, &m * f, Round::Up).0;
            mags += &m;
        }
        let n = self.terms.len() as f64 + 8.0;
        let base = Float::with_val_round(64, &mags * n, Round::Up).0 + weighted;
        let u = Float::with_val(64, Float::i_exp(1, 1 - p as i32));
        let error_bound = Float::with_val_round(64, &base * &u, Round::Up).0;
        ModeValue {
            value: BigComplex::new(re, im),
            exact: None,
            magnitude_sum: mags,
            error_bound,
            working_precision: p,
        }
    }
}

fn check_time(t: &Real) -> Result<()> {
    if t.is_negative() {
        return Err(Error::invalid(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// `a_k(t)` with relative rounding error at most `2^{-precision}`.
///
/// Raises the working precision until the a-priori bound meets the target;
/// at t = 0 an exactly known initial value is returned as is.
pub fn evaluate_mode<M: ModeSeries + ?Sized>(series: &M, t: &Real, precision: u32) -> Result<ModeValue> {
    check_precision(precision)?;
    check_time(t)?;
    if t.is_zero() {
        if let Some(a0) = series.exact_initial() {
            let value = a0.to_big(precision);
            return Ok(ModeValue {
                magnitude_sum: value.abs(),
                value,
                exact: Some(a0),
                error_bound: Float::new(64),
                working_precision: precision,
            });
        }
    }
    let target = Float::with_val(64, Float::i_exp(1, -(precision as i32)));
    let mut wp = precision + GUARD_BITS;
    loop {
        let compiled = CompiledMode::new(series, wp);
        let tf = t.to_float(wp);
        let mut v = compiled.sum_at(&tf);
        let mag = v.value.abs();
        let ok = v.error_bound.is_zero() || v.error_bound <= Float::with_val(64, &target * &mag);
        if ok || wp >= MAX_WORKING_PRECISION || mag.is_zero() && v.magnitude_sum.is_zero() {
            v.value = v.value.with_prec(precision.max(wp));
            return Ok(v);
        }
        // bits lost to cancellation, plus a margin
        let lost = ratio_bits(&v.error_bound, &mag, &target);
        wp = (wp + lost.max(wp / 2)).min(MAX_WORKING_PRECISION);
    }
}

fn ratio_bits(err: &Float, mag: &Float, target: &Float) -> u32 {
    if mag.is_zero() {
        return 64;
    }
    let r = Float::with_val(64, err / mag) / target;
    let bits = r.to_f64().log2().ceil();
    if bits.is_finite() {
        bits.max(8.0) as u32 + 8
    } else {
        64
    }
}

/// Partial sum of the field at one point.
#[derive(Clone, Debug)]
pub struct FieldValue {
    pub value: BigComplex,
    /// `|a_K(t)|`, the size of the last retained mode.
    pub last_term: Float,
    pub error_bound: Float,
}

/// `Σ_{k≤K} a_k(t) e^{ikx}` over the given rows (row k at index k-1).
pub fn evaluate_field<M: ModeSeries>(rows: &[M], x: &Real, t: &Real, precision: u32) -> Result<FieldValue> {
    check_precision(precision)?;
    if rows.is_empty() {
        return Err(Error::invalid("evaluate_field needs at least one row"));
    }
    let p = precision + GUARD_BITS;
    let xf = x.to_float(p);
    let mut sum = BigComplex::zero(p);
    let mut err = Float::new(64);
    let mut last = Float::new(p);
    for row in rows {
        let v = evaluate_mode(row, t, precision)?;
        let kx = Float::with_val(p, &xf * row.mode());
        let phase = BigComplex::exp_of(&Float::new(p), &kx);
        let term = v.value.with_prec(p).mul(&phase);
        last = term.abs();
        err += &v.error_bound;
        err += Float::with_val(64, &last * &Float::with_val(64, Float::i_exp(1, 4 - p as i32)));
        sum = sum.add(&term);
    }
    Ok(FieldValue {
        value: sum,
        last_term: last,
        error_bound: err,
    })
}
