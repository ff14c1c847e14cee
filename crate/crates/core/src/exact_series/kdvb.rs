//! Exponomial rows `a_k(t) = Σ a_{k,h,l} e^{-(νh - iαl)t}` for the KdV–Burgers
//! equation with arbitrary one-sided initial data.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use rug::Rational;

use crate::error::{check_precision, Error, Result};
use crate::numeric::{BigComplex, Coefficient, ComplexInput, GaussianRational, Real};
use crate::params::{gap_h, gap_l, ModelParams};

pub type Cells<S> = BTreeMap<(u32, u32), S>;

/// One mode's exact solution as a finite exponential sum.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSeries<S> {
    pub k: u32,
    pub nu: Real,
    pub alpha: Real,
    /// `a_k(0)`.
    pub a0k: S,
    pub terms: Cells<S>,
}

impl<S: Coefficient> ExpSeries<S> {
    pub fn gap_h(&self) -> u32 {
        gap_h(self.k)
    }

    pub fn gap_l(&self) -> u32 {
        gap_l(self.k)
    }

    pub fn coeff(&self, h: u32, l: u32) -> S {
        self.terms.get(&(h, l)).cloned().unwrap_or_else(|| self.a0k.zero_like())
    }

    /// Sum of coefficients over l for each h; the α = 0 view of the row.
    pub fn collapsed(&self) -> BTreeMap<u32, S> {
        let mut out: BTreeMap<u32, S> = BTreeMap::new();
        for ((h, _), c) in &self.terms {
            match out.get_mut(h) {
                Some(acc) => acc.add_assign_ref(c),
                None => {
                    out.insert(*h, c.clone());
                }
            }
        }
        out.retain(|_, c| !c.is_zero() || !S::is_exact());
        out
    }
}

/// Exact or high-precision row, depending on the inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Series {
    Exact(ExpSeries<GaussianRational>),
    Approx(ExpSeries<BigComplex>),
}

impl Series {
    pub fn k(&self) -> u32 {
        match self {
            Series::Exact(s) => s.k,
            Series::Approx(s) => s.k,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Series::Exact(s) => s.terms.len(),
            Series::Approx(s) => s.terms.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_exact(&self) -> Option<&ExpSeries<GaussianRational>> {
        match self {
            Series::Exact(s) => Some(s),
            Series::Approx(_) => None,
        }
    }
}

/// Memoized rows of the KdV–Burgers recursion for one (ν, α, initial data).
#[derive(Debug)]
pub struct KdvbSeries<S> {
    nu_real: Real,
    alpha_real: Real,
    nu: S,
    /// `iα`, so the recursion denominator is `ν(k²-h) - iα(k³-l)`.
    i_alpha: S,
    init: Vec<S>,
    rows: RwLock<Vec<Arc<Cells<S>>>>,
}

impl<S: Coefficient> KdvbSeries<S> {
    /// `init[j-1]` is `a_{0j}`; missing entries are zero.
    pub fn new(nu_real: Real, alpha_real: Real, nu: S, alpha: S, init: Vec<S>) -> Result<Self> {
        if init.is_empty() {
            return Err(Error::invalid("initial data needs at least a_01"));
        }
        if nu.is_zero() && alpha.is_zero() {
            return Err(Error::invalid("nu and alpha cannot both be zero"));
        }
        let i_alpha = alpha.mul_i();
        Ok(Self {
            nu_real,
            alpha_real,
            nu,
            i_alpha,
            init,
            rows: RwLock::new(Vec::new()),
        })
    }

    fn initial(&self, k: u32) -> S {
        self.init
            .get(k as usize - 1)
            .cloned()
            .unwrap_or_else(|| self.init[0].zero_like())
    }

    pub fn cells(&self, k: u32) -> Result<Arc<Cells<S>>> {
        if k == 0 {
            return Err(Error::invalid("mode index k must be at least 1"));
        }
        {
            let rows = self.rows.read().expect("row cache poisoned");
            if let Some(r) = rows.get(k as usize - 1) {
                return Ok(r.clone());
            }
        }
        let mut rows = self.rows.write().expect("row cache poisoned");
        while rows.len() < k as usize {
            let next = rows.len() as u32 + 1;
            let row = self.build_row(next, &rows)?;
            rows.push(Arc::new(row));
        }
        Ok(rows[k as usize - 1].clone())
    }

    pub fn series(&self, k: u32) -> Result<ExpSeries<S>> {
        let terms = (*self.cells(k)?).clone();
        Ok(ExpSeries {
            k,
            nu: self.nu_real.clone(),
            alpha: self.alpha_real.clone(),
            a0k: self.initial(k),
            terms,
        })
    }

    fn build_row(&self, k: u32, lower: &[Arc<Cells<S>>]) -> Result<Cells<S>> {
        let zero = self.init[0].zero_like();
        let forced = (k * k, k * k * k);
        if k == 1 {
            let mut row = Cells::new();
            let a01 = self.initial(1);
            if !(S::is_exact() && a01.is_zero()) {
                row.insert(forced, a01);
            }
            return Ok(row);
        }

        // Σ_{k1+k2=k} Σ a_{k1,h1,l1} a_{k2,h2,l2}, grouped by (h1+h2, l1+l2)
        let partials: Vec<(bool, BTreeMap<(u32, u32), S>)> = (1..=k / 2)
            .into_par_iter()
            .map(|k1| {
                let k2 = k - k1;
                let (r1, r2) = (&lower[k1 as usize - 1], &lower[k2 as usize - 1]);
                let mut acc: BTreeMap<(u32, u32), S> = BTreeMap::new();
                for ((h1, l1), c1) in r1.iter() {
                    for ((h2, l2), c2) in r2.iter() {
                        let p = c1.mul_ref(c2);
                        acc.entry((h1 + h2, l1 + l2))
                            .and_modify(|v| v.add_assign_ref(&p))
                            .or_insert(p);
                    }
                }
                (k1 == k2, acc)
            })
            .collect();

        let mut conv: BTreeMap<(u32, u32), S> = BTreeMap::new();
        for (diag, acc) in partials {
            for (key, v) in acc {
                let v = if diag { v } else { v.scale_int(2) };
                conv.entry(key).and_modify(|c| c.add_assign_ref(&v)).or_insert(v);
            }
        }

        let three_ik = zero.one_like().scale_int(3 * k as i64).mul_i();
        let cells: Vec<((u32, u32), S)> = conv
            .into_par_iter()
            .map(|((h, l), v)| {
                let denom = self
                    .nu
                    .scale_int((forced.0 - h) as i64)
                    .sub_ref(&self.i_alpha.scale_int((forced.1 - l) as i64));
                if denom.is_zero() {
                    return Err(Error::SecularTerm { k, h, l });
                }
                let c = three_ik.mul_ref(&v).div_ref(&denom)?;
                Ok(((h, l), c))
            })
            .collect::<Result<_>>()?;

        let mut row = Cells::new();
        let mut sum = zero.clone();
        for (key, c) in cells {
            sum.add_assign_ref(&c);
            if S::is_exact() && c.is_zero() {
                continue;
            }
            row.insert(key, c);
        }
        let last = self.initial(k).sub_ref(&sum);
        if !(S::is_exact() && last.is_zero()) {
            row.insert(forced, last);
        }
        Ok(row)
    }
}

/// Exact Gaussian-rational series for rational ν, α and initial data.
pub fn exact_series(params: &ModelParams, init: &[GaussianRational]) -> Result<KdvbSeries<GaussianRational>> {
    params.require_exponomial()?;
    let nu = params
        .nu
        .as_rational()
        .ok_or_else(|| Error::invalid("exact series need rational nu"))?;
    let alpha = params
        .alpha
        .as_rational()
        .ok_or_else(|| Error::invalid("exact series need rational alpha"))?;
    KdvbSeries::new(
        params.nu.clone(),
        params.alpha.clone(),
        GaussianRational::real(nu.clone()),
        GaussianRational::real(alpha.clone()),
        init.to_vec(),
    )
}

/// Big-float series at `precision` bits.
pub fn float_series(params: &ModelParams, init: &[ComplexInput], precision: u32) -> Result<KdvbSeries<BigComplex>> {
    check_precision(precision)?;
    params.require_exponomial()?;
    let nu = BigComplex::new(params.nu.to_float(precision), rug::Float::new(precision));
    let alpha = BigComplex::new(params.alpha.to_float(precision), rug::Float::new(precision));
    let init = init.iter().map(|z| z.to_big(precision)).collect();
    KdvbSeries::new(params.nu.clone(), params.alpha.clone(), nu, alpha, init)
}

/// Row k of the KdV–Burgers exponomial solution.
///
/// Exact Gaussian-rational arithmetic is used when ν, α and every `a_{0j}`
/// with `j ≤ k` are rational; otherwise MPFR floats at `precision` bits.
pub fn kdvb_table(k: u32, init: &[ComplexInput], params: &ModelParams, precision: u32) -> Result<Series> {
    params.require_exponomial()?;
    if k == 0 {
        return Err(Error::invalid("mode index k must be at least 1"));
    }
    if init.len() < k as usize {
        return Err(Error::invalid(format!(
            "initial data has {} entries, mode {k} needs {k}",
            init.len()
        )));
    }
    let prefix = &init[..k as usize];
    let exact: Option<Vec<GaussianRational>> = prefix.iter().map(|z| z.as_exact().cloned()).collect();
    match exact {
        Some(init) if params.is_exact() => Ok(Series::Exact(exact_series(params, &init)?.series(k)?)),
        _ => Ok(Series::Approx(float_series(params, prefix, precision)?.series(k)?)),
    }
}

/// `ν(k²-h) - iα(k³-l)` in exact arithmetic.
pub fn exact_denominator(nu: &Rational, alpha: &Rational, k: u32, h: u32, l: u32) -> GaussianRational {
    let kk = k * k;
    let kkk = kk * k;
    GaussianRational::new(
        Rational::from(nu * (kk as i64 - h as i64)),
        Rational::from(alpha * -(kkk as i64 - l as i64)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::burgers::burgers_table;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
        GaussianRational::new(q(re.0, re.1), q(im.0, im.1))
    }

    fn input(z: &GaussianRational) -> ComplexInput {
        ComplexInput::Exact(z.clone())
    }

    #[test]
    fn second_row_closed_form() {
        let p = ModelParams::kdvb(Real::ratio(1, 2), Real::ratio(2, 3)).unwrap();
        let (a1, a2) = (g((1, 3), (-1, 2)), g((2, 1), (1, 5)));
        let s = kdvb_table(2, &[input(&a1), input(&a2)], &p, 128).unwrap();
        let s = s.as_exact().unwrap();
        let c = GaussianRational::imag(q(6, 1))
            .mul(&a1.pow(2))
            .div(&exact_denominator(&q(1, 2), &q(2, 3), 2, 2, 2))
            .unwrap();
        assert_eq!(s.terms.len(), 2);
        assert_eq!(s.coeff(2, 2), c);
        assert_eq!(s.coeff(4, 8), a2.sub(&c));
    }

    #[test]
    fn third_row_cubic_terms() {
        let p = ModelParams::kdvb(Real::int(1), Real::int(1)).unwrap();
        let a1 = g((1, 1), (0, 1));
        let s = exact_series(&p, &[a1]).unwrap().series(3).unwrap();
        let d = |h, l| exact_denominator(&q(1, 1), &q(1, 1), 0, 0, 0).add(&GaussianRational::new(q(h, 1), q(l, 1)));
        // (2ν − 6αi)(6ν − 24αi) and (2ν − 6αi)(4ν − 18αi)
        let d33 = d(2, -6).mul(&d(6, -24));
        let d59 = d(2, -6).mul(&d(4, -18));
        let c33 = GaussianRational::from_int(-108).div(&d33).unwrap();
        let c59 = GaussianRational::from_int(108).div(&d59).unwrap();
        assert_eq!(s.coeff(3, 3), c33);
        assert_eq!(s.coeff(5, 9), c59);
        assert_eq!(s.coeff(9, 27), c33.add(&c59).neg());
    }

    #[test]
    fn alpha_zero_collapses_to_burgers() {
        let p = ModelParams::burgers(Real::ratio(3, 4)).unwrap();
        let a = g((2, 5), (1, 7));
        let series = exact_series(&p, std::slice::from_ref(&a)).unwrap();
        for k in 1..=7 {
            let t = burgers_table(k, &a, &q(3, 4)).unwrap();
            assert_eq!(series.series(k).unwrap().collapsed(), t.entries, "k={k}");
        }
    }

    #[test]
    fn float_rows_track_exact_rows() {
        let p = ModelParams::kdvb(Real::ratio(3, 2), Real::ratio(1, 2)).unwrap();
        let init = [g((1, 2), (0, 1)), g((0, 1), (1, 4)), g((1, 8), (0, 1))];
        let ex = exact_series(&p, &init).unwrap().series(6).unwrap();
        let inputs: Vec<ComplexInput> = init.iter().map(input).collect();
        let fl = float_series(&p, &inputs, 200).unwrap().series(6).unwrap();
        assert_eq!(ex.terms.len(), fl.terms.len());
        for ((key, a), (key2, b)) in ex.terms.iter().zip(&fl.terms) {
            assert_eq!(key, key2);
            let d = a.to_big(200).sub(b).abs();
            let scale = a.to_big(200).abs();
            assert!(
                d <= scale * rug::Float::with_val(64, rug::Float::i_exp(1, -180)),
                "{key:?}"
            );
        }
    }

    #[test]
    fn pure_dispersion_is_allowed() {
        let p = ModelParams::kdvb(Real::int(0), Real::int(2)).unwrap();
        let s = kdvb_table(5, &vec![ComplexInput::real(Real::ratio(1, 3)); 5], &p, 128).unwrap();
        assert!(s.as_exact().is_some());
        let bad = ModelParams::new(Real::int(1), Real::int(0), Real::ratio(1, 2)).unwrap();
        assert!(kdvb_table(2, &vec![ComplexInput::zero(); 2], &bad, 128).is_err());
        assert!(kdvb_table(3, &vec![ComplexInput::zero(); 2], &p, 128).is_err());
    }
}
