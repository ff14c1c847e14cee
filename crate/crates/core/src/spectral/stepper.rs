use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::{nonlinear_term, sobolev_norm, SpectralScalar, SpectralState};
use crate::error::{Error, Result};
use crate::numeric::{BigComplex, Real};
use crate::params::ModelParams;

/// Largest allowed `-Re(L_k)·τ·dt` for a backward integrating factor.
pub const MAX_BACKWARD_EXPONENT: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    IfEuler,
    IfRk4,
    IfRk6,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::IfEuler => 1,
            Scheme::IfRk4 => 4,
            Scheme::IfRk6 => 6,
        }
    }

    pub fn tableau(self) -> Tableau {
        let q = |n: i64, d: i64| Rational::from((n, d));
        let z = || Rational::new();
        match self {
            Scheme::IfEuler => Tableau {
                c: vec![z()],
                a: vec![vec![]],
                b: vec![q(1, 1)],
            },
            Scheme::IfRk4 => Tableau {
                c: vec![z(), q(1, 2), q(1, 2), q(1, 1)],
                a: vec![vec![], vec![q(1, 2)], vec![z(), q(1, 2)], vec![z(), z(), q(1, 1)]],
                b: vec![q(1, 6), q(1, 3), q(1, 3), q(1, 6)],
            },
            // Butcher's seven-stage method of order six
            Scheme::IfRk6 => Tableau {
                c: vec![z(), q(1, 3), q(2, 3), q(1, 3), q(1, 2), q(1, 2), q(1, 1)],
                a: vec![
                    vec![],
                    vec![q(1, 3)],
                    vec![z(), q(2, 3)],
                    vec![q(1, 12), q(1, 3), q(-1, 12)],
                    vec![q(-1, 16), q(9, 8), q(-3, 16), q(-3, 8)],
                    vec![z(), q(9, 8), q(-3, 8), q(-3, 4), q(1, 2)],
                    vec![q(9, 44), q(-9, 11), q(63, 44), q(18, 11), z(), q(-16, 11)],
                ],
                b: vec![q(11, 120), z(), q(27, 40), q(27, 40), q(-4, 15), q(-4, 15), q(11, 120)],
            },
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::IfEuler => "ifeuler",
            Scheme::IfRk4 => "ifrk4",
            Scheme::IfRk6 => "ifrk6",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ifeuler" | "euler" => Ok(Scheme::IfEuler),
            "ifrk4" | "rk4" => Ok(Scheme::IfRk4),
            "ifrk6" | "rk6" => Ok(Scheme::IfRk6),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Explicit Butcher tableau with rational entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    pub c: Vec<Rational>,
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// L² threshold for `blowup_suspected`; also the per-mode stage cap.
    pub blowup_cap: f64,
    pub record_every: usize,
    /// Sobolev orders recorded with every sample (inhomogeneous norms).
    pub hs_orders: Vec<f64>,
    /// Drop the nonlinearity; used for exactness checks.
    pub linear_only: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::IfRk4,
            blowup_cap: 1e8,
            record_every: 10,
            hs_orders: vec![1.0],
            linear_only: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.blowup_cap > 1.0) {
            return Err(Error::invalid(format!(
                "blowup_cap must exceed 1, got {}",
                self.blowup_cap
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Why a step stopped early.
#[derive(Clone, Debug, PartialEq)]
pub enum StepError {
    /// `|a_k|` exceeded the cap inside a stage.
    Cap {
        k: usize,
    },
    NonFinite {
        k: usize,
    },
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::Cap { k } => write!(f, "mode {k} exceeded the cap mid-step"),
            StepError::NonFinite { k } => write!(f, "mode {k} became non-finite"),
        }
    }
}

type Factors<S> = Arc<Vec<S>>;

/// Integrating-factor Runge–Kutta step for fixed (params, dt, N).
///
/// With `E(τ) = diag(e^{L_k τ dt})` the stages are
/// `Y_i = E(c_i) a + dt Σ_j a_ij E(c_i - c_j) K_j`, `K_i = N(Y_i)`, and
/// `a' = E(1) a + dt Σ_j b_j E(1 - c_j) K_j`.
#[derive(Clone, Debug)]
pub struct Stepper<S> {
    pub dt: f64,
    n: usize,
    prec: u32,
    cap: f64,
    linear_only: bool,
    stage_shift: Vec<Factors<S>>,
    stage_terms: Vec<Vec<(usize, S, Factors<S>)>>,
    final_shift: Factors<S>,
    final_terms: Vec<(usize, S, Factors<S>)>,
}

impl<S: SpectralScalar> Stepper<S> {
    pub fn new(params: &ModelParams, config: &SolverConfig, dt: f64, n: usize, prec: u32) -> Result<Self> {
        config.validate()?;
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(Error::invalid("truncation N must be at least 1"));
        }
        let tab = config.scheme.tableau();
        let fp = prec.max(53) + 32;
        let rates = linear_rates(params, n, fp);
        let dt_f = Float::with_val(fp, dt);

        let max_rate = rates.iter().map(|(re, _)| -re.to_f64()).fold(0.0, f64::max);
        let mut cache: HashMap<Rational, Factors<S>> = HashMap::new();
        let mut factor = |tau: &Rational| -> Result<Factors<S>> {
            if let Some(f) = cache.get(tau) {
                return Ok(f.clone());
            }
            if tau.is_negative() {
                let back = max_rate * dt * -tau.to_f64();
                if back > MAX_BACKWARD_EXPONENT {
                    return Err(Error::invalid(format!(
                        "{} with dt={dt} and N={n} needs backward factors up to e^{back:.1}; reduce dt or N",
                        config.scheme
                    )));
                }
            }
            let s = Float::with_val(fp, &dt_f * tau);
            let v: Vec<S> = rates
                .iter()
                .map(|(re, im)| {
                    let x = Float::with_val(fp, re * &s);
                    let y = Float::with_val(fp, im * &s);
                    S::from_big(&BigComplex::exp_of(&x, &y), prec)
                })
                .collect();
            let f = Arc::new(v);
            cache.insert(tau.clone(), f.clone());
            Ok(f)
        };
        let real = |r: &Rational| -> S {
            let x = Float::with_val(fp, &dt_f * r);
            S::from_big(&BigComplex::new(x, Float::new(fp)), prec)
        };

        let one = Rational::from(1);
        let mut stage_shift = Vec::new();
        let mut stage_terms = Vec::new();
        for (i, ci) in tab.c.iter().enumerate() {
            stage_shift.push(factor(ci)?);
            let mut terms = Vec::new();
            for (j, aij) in tab.a[i].iter().enumerate() {
                if aij.is_zero() {
                    continue;
                }
                let tau = Rational::from(ci - &tab.c[j]);
                terms.push((j, real(aij), factor(&tau)?));
            }
            stage_terms.push(terms);
        }
        let final_shift = factor(&one)?;
        let mut final_terms = Vec::new();
        for (j, bj) in tab.b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let tau = Rational::from(&one - &tab.c[j]);
            final_terms.push((j, real(bj), factor(&tau)?));
        }
        Ok(Self {
            dt,
            n,
            prec,
            cap: config.blowup_cap,
            linear_only: config.linear_only,
            stage_shift,
            stage_terms,
            final_shift,
            final_terms,
        })
    }

    fn apply(f: &[S], a: &[S]) -> Vec<S> {
        f.iter().zip(a).map(|(x, y)| x.mul(y)).collect()
    }

    fn check(&self, v: &[S]) -> std::result::Result<(), StepError> {
        let cap2 = self.cap * self.cap;
        for (i, c) in v.iter().enumerate() {
            if !c.is_finite() {
                return Err(StepError::NonFinite { k: i + 1 });
            }
            if c.norm_sqr() > cap2 {
                return Err(StepError::Cap { k: i + 1 });
            }
        }
        Ok(())
    }

    /// Advance `a` by one step of length `self.dt`.
    pub fn advance(&self, a: &[S]) -> std::result::Result<Vec<S>, StepError> {
        debug_assert_eq!(a.len(), self.n);
        if self.linear_only {
            return Ok(Self::apply(&self.final_shift, a));
        }
        let mut ks: Vec<Vec<S>> = Vec::with_capacity(self.stage_shift.len());
        for (shift, terms) in self.stage_shift.iter().zip(&self.stage_terms) {
            let mut y = Self::apply(shift, a);
            for (j, coef, f) in terms {
                for ((yk, fk), kk) in y.iter_mut().zip(f.iter()).zip(&ks[*j]) {
                    yk.add_assign(&coef.mul(&fk.mul(kk)));
                }
            }
            self.check(&y)?;
            ks.push(nonlinear_term(&y));
        }
        let mut out = Self::apply(&self.final_shift, a);
        for (j, coef, f) in &self.final_terms {
            for ((ok, fk), kk) in out.iter_mut().zip(f.iter()).zip(&ks[*j]) {
                ok.add_assign(&coef.mul(&fk.mul(kk)));
            }
        }
        self.check(&out)?;
        Ok(out)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }
}

/// `(Re L_k, Im L_k) = (-ν k^{2γ}, α k³)` at `prec` bits.
fn linear_rates(params: &ModelParams, n: usize, prec: u32) -> Vec<(Float, Float)> {
    let nu = params.nu.to_float(prec);
    let alpha = params.alpha.to_float(prec);
    let two_gamma = Float::with_val(prec, params.gamma.to_float(prec) * 2u32);
    let integer_gamma = matches!(&params.gamma, Real::Exact(g) if *g == 1);
    (1..=n)
        .map(|k| {
            let kf = Float::with_val(prec, k);
            let k2g = if integer_gamma {
                Float::with_val(prec, k * k)
            } else {
                Float::with_val(prec, (&kf).pow(&two_gamma))
            };
            let re = -Float::with_val(prec, &nu * &k2g);
            let im = Float::with_val(prec, &alpha * Float::with_val(prec, (&kf).pow(3u32)));
            (re, im)
        })
        .collect()
}

/// One step from `state`; builds the integrating factors on every call.
pub fn step<S: SpectralScalar>(
    state: &SpectralState<S>,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<SpectralState<S>> {
    let prec = state.coeffs[0].precision();
    let st = Stepper::new(params, config, config.dt, state.n(), prec)?;
    let coeffs = st.advance(&state.coeffs).map_err(|e| match e {
        StepError::Cap { k } | StepError::NonFinite { k } => Error::StepUnderflow { k, t: state.t },
    })?;
    Ok(SpectralState {
        t: state.t + config.dt,
        coeffs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    BlowupSuspected,
    StepUnderflow,
}

impl fmt::Display for TrajectoryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::BlowupSuspected => "blowup_suspected",
            TrajectoryStatus::StepUnderflow => "step_underflow",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub coeffs: Vec<S>,
    pub l2: f64,
    /// Norms for `SolverConfig::hs_orders`, in order.
    pub hs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
    pub status: TrajectoryStatus,
    pub hs_orders: Vec<f64>,
    /// End time of the step that crossed the cap, if any.
    pub cap_time: Option<f64>,
    pub warnings: Vec<String>,
}

impl<S: SpectralScalar> Trajectory<S> {
    pub fn last(&self) -> &Sample<S> {
        self.samples.last().expect("trajectory has a sample")
    }

    pub fn t_final(&self) -> f64 {
        self.last().t
    }
}

fn sample<S: SpectralScalar>(t: f64, coeffs: &[S], orders: &[f64]) -> Sample<S> {
    Sample {
        t,
        coeffs: coeffs.to_vec(),
        l2: sobolev_norm(coeffs, 0.0, false),
        hs: orders.iter().map(|s| sobolev_norm(coeffs, *s, false)).collect(),
    }
}

/// Integrate from `state.t` to `t_end` with fixed steps.
///
/// A final shorter step is taken when `t_end - t` is not a multiple of dt.
pub fn integrate<S: SpectralScalar>(
    state: &SpectralState<S>,
    params: &ModelParams,
    config: &SolverConfig,
    t_end: f64,
) -> Result<Trajectory<S>> {
    config.validate()?;
    if !(t_end > state.t) {
        return Err(Error::invalid(format!(
            "t_end {t_end} must exceed the start time {}",
            state.t
        )));
    }
    let mut warnings = Vec::new();
    if params.gamma.to_f64() <= 0.5 {
        warnings.push(format!(
            "gamma = {} is at or below 1/2; local well-posedness is not covered there",
            params.gamma
        ));
    }
    let prec = state.coeffs[0].precision();
    let n = state.n();
    let span = t_end - state.t;
    let mut steps = (span / config.dt).floor() as u64;
    let mut rest = span - steps as f64 * config.dt;
    if rest > config.dt * (1.0 - 1e-9) {
        steps += 1;
        rest = 0.0;
    }
    if rest <= config.dt * 1e-9 {
        rest = 0.0;
    }
    let main = Stepper::new(params, config, config.dt, n, prec)?;
    let tail = if rest > 0.0 {
        Some(Stepper::new(params, config, rest, n, prec)?)
    } else {
        None
    };

    let orders = config.hs_orders.clone();
    let mut samples = vec![sample(state.t, &state.coeffs, &orders)];
    let mut a = state.coeffs.clone();
    let mut status = TrajectoryStatus::Completed;
    let mut cap_time = None;
    let total = steps + u64::from(tail.is_some());
    for i in 1..=total {
        let (st, t) = if i <= steps {
            (&main, state.t + i as f64 * config.dt)
        } else {
            (tail.as_ref().expect("tail stepper"), t_end)
        };
        match st.advance(&a) {
            Ok(next) => a = next,
            Err(e) => {
                warnings.push(format!("step ending at t={t}: {e}"));
                status = TrajectoryStatus::StepUnderflow;
                cap_time = Some(t);
                break;
            }
        }
        let l2 = sobolev_norm(&a, 0.0, false);
        let last = i == total;
        if l2 > config.blowup_cap {
            samples.push(sample(t, &a, &orders));
            status = TrajectoryStatus::BlowupSuspected;
            cap_time = Some(t);
            break;
        }
        if last || i % config.record_every as u64 == 0 {
            samples.push(sample(t, &a, &orders));
        }
    }
    Ok(Trajectory {
        samples,
        status,
        hs_orders: orders,
        cap_time,
        warnings,
    })
}
