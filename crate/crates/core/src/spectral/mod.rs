//! Truncated Galerkin system for one-sided data
//!
//! ```text
//! da_k/dt = 3ik Σ_{k1+k2=k} a_{k1} a_{k2} + (-ν k^{2γ} + iα k³) a_k,   1 ≤ k ≤ N
//! ```
//!
//! integrated with integrating-factor Runge–Kutta schemes. The state type is
//! generic: [`Complex64`] for production runs, [`BigComplex`] for
//! cross-checks at higher precision.

mod diagnostics;
mod stepper;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::BigComplex;

pub use diagnostics::{diagnostics_m, trajectory_csv, trajectory_summary, MDiagnostic, TrajectorySummary};
pub use stepper::{
    integrate, step, Sample, Scheme, SolverConfig, StepError, Stepper, Tableau, Trajectory, TrajectoryStatus,
};

/// Convolutions with at least this many modes run on the rayon pool.
pub const PARALLEL_THRESHOLD: usize = 512;

/// Scalar type of a spectral state.
pub trait SpectralScalar: Clone + Send + Sync + fmt::Debug {
    /// Zero at the given precision (ignored by fixed-width types).
    fn zero(prec: u32) -> Self;
    fn from_big(z: &BigComplex, prec: u32) -> Self;
    fn to_big(&self, prec: u32) -> BigComplex;
    fn to_c64(&self) -> Complex64;
    fn precision(&self) -> u32;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn add_assign(&mut self, rhs: &Self);
    fn scale_int(&self, n: i64) -> Self;
    fn mul_i(&self) -> Self;
    fn norm_sqr(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl SpectralScalar for Complex64 {
    fn zero(_prec: u32) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_big(z: &BigComplex, _prec: u32) -> Self {
        z.to_c64()
    }
    fn to_big(&self, prec: u32) -> BigComplex {
        BigComplex::from_c64(prec, *self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn precision(&self) -> u32 {
        53
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn scale_int(&self, n: i64) -> Self {
        self * n as f64
    }
    fn mul_i(&self) -> Self {
        Complex64::new(-self.im, self.re)
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
}

impl SpectralScalar for BigComplex {
    fn zero(prec: u32) -> Self {
        BigComplex::zero(prec)
    }
    fn from_big(z: &BigComplex, prec: u32) -> Self {
        z.with_prec(prec)
    }
    fn to_big(&self, prec: u32) -> BigComplex {
        self.with_prec(prec)
    }
    fn to_c64(&self) -> Complex64 {
        BigComplex::to_c64(self)
    }
    fn precision(&self) -> u32 {
        self.prec()
    }
    fn add(&self, rhs: &Self) -> Self {
        BigComplex::add(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        BigComplex::mul(self, rhs)
    }
    fn add_assign(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
    fn scale_int(&self, n: i64) -> Self {
        let p = self.prec();
        BigComplex::new(Float::with_val(p, &self.re * n), Float::with_val(p, &self.im * n))
    }
    fn mul_i(&self) -> Self {
        BigComplex::mul_i(self)
    }
    fn norm_sqr(&self) -> f64 {
        BigComplex::norm_sqr(self).to_f64()
    }
    fn is_finite(&self) -> bool {
        BigComplex::is_finite(self)
    }
}

/// `(a_1, …, a_N)` at time t; index 0 holds mode 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState<S> {
    pub t: f64,
    pub coeffs: Vec<S>,
}

impl<S: SpectralScalar> SpectralState<S> {
    pub fn new(t: f64, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("spectral state needs at least one mode"));
        }
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("time must be nonnegative, got {t}")));
        }
        Ok(Self { t, coeffs })
    }

    /// Single-mode-style data padded with zeros to N modes.
    pub fn from_prefix(prefix: &[S], n: usize, prec: u32) -> Result<Self> {
        if prefix.len() > n {
            return Err(Error::invalid(format!(
                "initial data has {} modes, truncation is {n}",
                prefix.len()
            )));
        }
        let mut coeffs = prefix.to_vec();
        coeffs.resize(n, S::zero(prec));
        Self::new(0.0, coeffs)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_k`, 1-based.
    pub fn mode(&self, k: usize) -> &S {
        &self.coeffs[k - 1]
    }

    pub fn l2_norm(&self) -> f64 {
        sobolev_norm(&self.coeffs, 0.0, false)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// `3ik Σ_{k1=1}^{k-1} a_{k1} a_{k-k1}` for every k ≤ N.
pub fn nonlinear_term<S: SpectralScalar>(coeffs: &[S]) -> Vec<S> {
    let n = coeffs.len();
    let prec = coeffs.first().map(|c| c.precision()).unwrap_or(53);
    let cell = |k: usize| -> S {
        let mut pairs = S::zero(prec);
        for k1 in 1..k.div_ceil(2) {
            pairs.add_assign(&coeffs[k1 - 1].mul(&coeffs[k - k1 - 1]));
        }
        let mut sum = pairs.scale_int(2);
        if k.is_multiple_of(2) {
            let h = &coeffs[k / 2 - 1];
            sum.add_assign(&h.mul(h));
        }
        sum.scale_int(3 * k as i64).mul_i()
    };
    if n >= PARALLEL_THRESHOLD {
        (1..=n).into_par_iter().map(cell).collect()
    } else {
        (1..=n).map(cell).collect()
    }
}

/// `(Σ w_k |a_k|²)^{1/2}` with `w_k = k^{2s}` (homogeneous) or `(1+k²)^s`.
pub fn sobolev_norm<S: SpectralScalar>(coeffs: &[S], s: f64, homogeneous: bool) -> f64 {
    let mut acc = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let k = (i + 1) as f64;
        let w = if homogeneous {
            k.powf(2.0 * s)
        } else {
            (1.0 + k * k).powf(s)
        };
        acc += w * c.norm_sqr();
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nonlinear_term_small_cases() {
        assert_eq!(
            nonlinear_term(&[c(1.0, 0.0), c(0.0, 0.0)]),
            vec![c(0.0, 0.0), c(0.0, 6.0)]
        );
        let z = nonlinear_term(&[c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)]);
        assert!(z.iter().all(|x| x.norm() == 0.0));
        let v = nonlinear_term(&[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(v, vec![c(0.0, 0.0), c(0.0, 6.0), c(0.0, 36.0), c(0.0, 48.0)]);
    }

    #[test]
    fn sobolev_examples() {
        let one = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(sobolev_norm(&one, 0.0, false), 1.0);
        assert!((sobolev_norm(&one, 1.0, false) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sobolev_norm(&[c(0.0, 0.0), c(1.0, 0.0)], 2.0, true), 4.0);
    }
}
