//! KdV–Burgers rows as polynomials in the initial coefficients.
//!
//! Row k is `Σ_j a01^{j1}⋯a0k^{jk} Σ_{(h,l)} C_j(h,l) e^{-(νh-iαl)t}` over
//! the monomials with `j1 + 2j2 + ⋯ + k·jk = k`, one per partition of k.

use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numeric::GaussianRational;
use crate::params::ModelParams;

use super::kdvb::{exact_denominator, Cells};

/// Largest k accepted by [`kdvb_symbolic_table`].
pub const K_SYM_MAX: u32 = 8;

/// Multiplicities `(j1, …, jk)` of a monomial `a01^{j1}⋯a0k^{jk}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialKey(pub Vec<u32>);

impl MonomialKey {
    /// The monomial `a0k`.
    pub fn unit(k: u32) -> Self {
        let mut j = vec![0; k as usize];
        j[k as usize - 1] = 1;
        MonomialKey(j)
    }

    /// `Σ i·j_i`.
    pub fn weight(&self) -> u32 {
        self.0.iter().enumerate().map(|(i, j)| (i as u32 + 1) * j).sum()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn padded(&self, len: usize) -> Vec<u32> {
        let mut v = self.0.clone();
        v.resize(len, 0);
        v
    }

    fn product(&self, other: &Self, len: usize) -> Self {
        let a = self.padded(len);
        let b = other.padded(len);
        MonomialKey(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }

    /// Value of the monomial at the given initial data (missing entries are 0).
    pub fn eval(&self, init: &[GaussianRational]) -> GaussianRational {
        let mut out = GaussianRational::one();
        for (i, &j) in self.0.iter().enumerate() {
            if j == 0 {
                continue;
            }
            match init.get(i) {
                Some(z) => out = out.mul(&z.pow(j)),
                None => return GaussianRational::zero(),
            }
        }
        out
    }
}

impl fmt::Display for MonomialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &j) in self.0.iter().enumerate() {
            if j == 0 {
                continue;
            }
            if !first {
                write!(f, "·")?;
            }
            first = false;
            write!(f, "a0{}", i + 1)?;
            if j > 1 {
                write!(f, "^{j}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

pub type SymbolicRow = BTreeMap<MonomialKey, Cells<GaussianRational>>;

/// Exact `C(α, ν, k, h, l, j)` for every monomial of row k.
pub fn kdvb_symbolic_table(k: u32, params: &ModelParams) -> Result<SymbolicRow> {
    Ok(symbolic_rows(k, params)?.pop().expect("at least one row"))
}

/// Rows 1..=k of the symbolic table.
pub fn symbolic_rows(k: u32, params: &ModelParams) -> Result<Vec<SymbolicRow>> {
    params.require_exponomial()?;
    if k == 0 {
        return Err(Error::invalid("mode index k must be at least 1"));
    }
    if k > K_SYM_MAX {
        return Err(Error::invalid(format!(
            "symbolic tables are limited to k <= {K_SYM_MAX}, got {k}"
        )));
    }
    let nu = params
        .nu
        .as_rational()
        .ok_or_else(|| Error::invalid("symbolic tables need rational nu"))?;
    let alpha = params
        .alpha
        .as_rational()
        .ok_or_else(|| Error::invalid("symbolic tables need rational alpha"))?;

    let mut rows: Vec<SymbolicRow> = Vec::with_capacity(k as usize);
    for kk in 1..=k {
        let row = build_row(kk, &rows, nu, alpha)?;
        rows.push(row);
    }
    Ok(rows)
}

fn build_row(k: u32, lower: &[SymbolicRow], nu: &Rational, alpha: &Rational) -> Result<SymbolicRow> {
    let forced = (k * k, k * k * k);
    let mut row = SymbolicRow::new();
    if k == 1 {
        row.insert(MonomialKey::unit(1), Cells::from([(forced, GaussianRational::one())]));
        return Ok(row);
    }

    let len = k as usize;
    let mut conv: SymbolicRow = SymbolicRow::new();
    for k1 in 1..=k / 2 {
        let k2 = k - k1;
        let weight = if k1 == k2 { 1 } else { 2 };
        for (m1, c1) in &lower[k1 as usize - 1] {
            for (m2, c2) in &lower[k2 as usize - 1] {
                let cells = conv.entry(m1.product(m2, len)).or_default();
                for ((h1, l1), x) in c1 {
                    for ((h2, l2), y) in c2 {
                        let p = x.mul(y).mul_rational(&Rational::from(weight));
                        let e = cells.entry((h1 + h2, l1 + l2)).or_default();
                        *e = e.add(&p);
                    }
                }
            }
        }
    }

    let three_ik = GaussianRational::imag(Rational::from(3 * k));
    for (mono, cells) in conv {
        let mut out = Cells::new();
        let mut sum = GaussianRational::zero();
        for ((h, l), v) in cells {
            let denom = exact_denominator(nu, alpha, k, h, l);
            if denom.is_zero() {
                return Err(Error::SecularTerm { k, h, l });
            }
            let c = three_ik.mul(&v).div(&denom)?;
            if c.is_zero() {
                continue;
            }
            sum = sum.add(&c);
            out.insert((h, l), c);
        }
        if !sum.is_zero() {
            out.insert(forced, sum.neg());
        }
        if !out.is_empty() {
            row.insert(mono, out);
        }
    }
    row.insert(MonomialKey::unit(k), Cells::from([(forced, GaussianRational::one())]));
    Ok(row)
}

/// Evaluate a symbolic row at numeric initial data.
pub fn substitute(row: &SymbolicRow, init: &[GaussianRational]) -> Cells<GaussianRational> {
    let mut out: Cells<GaussianRational> = Cells::new();
    for (mono, cells) in row {
        let m = mono.eval(init);
        if m.is_zero() {
            continue;
        }
        for (key, c) in cells {
            let e = out.entry(*key).or_default();
            *e = e.add(&m.mul(c));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// All monomial keys of weight k, in lexicographic order of `(j1, …, jk)`.
pub fn monomials(k: u32) -> Vec<MonomialKey> {
    fn rec(i: u32, left: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<MonomialKey>) {
        if i > k {
            if left == 0 {
                out.push(MonomialKey(cur.clone()));
            }
            return;
        }
        for j in 0..=left / i {
            cur.push(j);
            rec(i + 1, left - i * j, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, k, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Real;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn second_row_monomials() {
        let p = ModelParams::kdvb(Real::ratio(3, 2), Real::ratio(1, 3)).unwrap();
        let row = kdvb_symbolic_table(2, &p).unwrap();
        // 6i/(2ν − 6αi) with ν = 3/2, α = 1/3 is 6i/(3 − 2i)
        let c = GaussianRational::imag(q(6, 1))
            .div(&GaussianRational::new(q(3, 1), q(-2, 1)))
            .unwrap();
        assert_eq!(
            row[&MonomialKey(vec![2, 0])],
            Cells::from([((2, 2), c.clone()), ((4, 8), c.neg())])
        );
        assert_eq!(
            row[&MonomialKey(vec![0, 1])],
            Cells::from([((4, 8), GaussianRational::one())])
        );
    }

    #[test]
    fn monomials_are_partitions() {
        let counts: Vec<usize> = (1..=8).map(|k| monomials(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
        assert!(monomials(6).iter().all(|m| m.weight() == 6));
    }

    #[test]
    fn rejects_large_k() {
        let p = ModelParams::burgers(Real::int(1)).unwrap();
        assert!(kdvb_symbolic_table(K_SYM_MAX + 1, &p).is_err());
        assert!(kdvb_symbolic_table(0, &p).is_err());
    }
}
