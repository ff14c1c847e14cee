//! Exact coefficient rows for the complex Burgers equation with data `a e^{ix}`.
//!
//! Every row factors as `α_{k,m} = a^k · i^{k-1} · r_{k,m}` with `r_{k,m}`
//! real rational and independent of `a`, so [`BurgersSeries`] memoizes the
//! normalized rows `r` for one viscosity and scales them on demand.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use rug::Rational;

use crate::error::{Error, Result};
use crate::numeric::GaussianRational;
use crate::params::{gap_h, positive_rational};

/// One exact Burgers row: `a_k(t) = Σ_m entries[m] e^{-mνt}`.
///
/// `entries` holds only the nonzero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub k: u32,
    pub a0: GaussianRational,
    pub nu: Rational,
    pub entries: BTreeMap<u32, GaussianRational>,
}

impl CoeffTable {
    pub fn entry(&self, m: u32) -> GaussianRational {
        self.entries.get(&m).cloned().unwrap_or_default()
    }

    /// `U(k)`: entries with `U(k) < m < k²` vanish.
    pub fn gap_start(&self) -> u32 {
        gap_h(self.k)
    }

    /// `a_k(0)`, which is `a` for k = 1 and 0 otherwise.
    pub fn initial_value(&self) -> GaussianRational {
        if self.k == 1 {
            self.a0.clone()
        } else {
            GaussianRational::zero()
        }
    }
}

/// Normalized row: dense storage of `r_{k,m}` for `m = k..=k²`.
#[derive(Debug)]
pub struct NormalizedRow {
    pub k: u32,
    values: Vec<Rational>,
}

impl NormalizedRow {
    pub fn get(&self, m: u32) -> Option<&Rational> {
        if m < self.k {
            return None;
        }
        self.values.get((m - self.k) as usize)
    }

    /// Nonzero `(m, r_{k,m})` pairs in increasing m.
    pub fn nonzero(&self) -> impl Iterator<Item = (u32, &Rational)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(move |(i, r)| (self.k + i as u32, r))
    }
}

/// Memoized Burgers rows for a fixed viscosity; safe to share across threads.
#[derive(Debug)]
pub struct BurgersSeries {
    nu: Rational,
    rows: RwLock<Vec<Arc<NormalizedRow>>>,
}

impl BurgersSeries {
    pub fn new(nu: Rational) -> Result<Self> {
        positive_rational(&nu, "nu")?;
        let first = NormalizedRow {
            k: 1,
            values: vec![Rational::from(1)],
        };
        Ok(Self {
            nu,
            rows: RwLock::new(vec![Arc::new(first)]),
        })
    }

    pub fn nu(&self) -> &Rational {
        &self.nu
    }

    /// Number of rows built so far.
    pub fn len(&self) -> usize {
        self.rows.read().expect("row cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Normalized row k, building rows bottom-up as needed.
    pub fn normalized(&self, k: u32) -> Result<Arc<NormalizedRow>> {
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
            let row = build_row(next, &rows, &self.nu);
            rows.push(Arc::new(row));
        }
        Ok(rows[k as usize - 1].clone())
    }

    /// Full Gaussian-rational row for amplitude `a0`.
    pub fn table(&self, k: u32, a0: &GaussianRational) -> Result<CoeffTable> {
        let row = self.normalized(k)?;
        let scale = a0.pow(k).mul(&GaussianRational::i_pow(k as i64 - 1));
        let entries = row
            .nonzero()
            .map(|(m, r)| (m, scale.mul_rational(r)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(CoeffTable {
            k,
            a0: a0.clone(),
            nu: self.nu.clone(),
            entries,
        })
    }
}

fn build_row(k: u32, lower: &[Arc<NormalizedRow>], nu: &Rational) -> NormalizedRow {
    let kk = k * k;
    let top = gap_h(k);
    // only m ≡ k (mod 2) can be reached
    let cells: Vec<(u32, Rational)> = (k..=top)
        .into_par_iter()
        .filter(|m| (m - k).is_multiple_of(2))
        .map(|m| {
            let mut pair_sum = Rational::new();
            let mut diag_sum = Rational::new();
            for k1 in 1..=k / 2 {
                let k2 = k - k1;
                let (r1, r2) = (&lower[k1 as usize - 1], &lower[k2 as usize - 1]);
                let target = if k1 == k2 { &mut diag_sum } else { &mut pair_sum };
                let lo = k1.max(m.saturating_sub(k2 * k2));
                let hi = (k1 * k1).min(m - k2);
                for m1 in lo..=hi {
                    let (Some(c1), Some(c2)) = (r1.get(m1), r2.get(m - m1)) else {
                        continue;
                    };
                    if c1.is_zero() || c2.is_zero() {
                        continue;
                    }
                    *target += Rational::from(c1 * c2);
                }
            }
            let conv = pair_sum * 2u32 + diag_sum;
            let denom = Rational::from(nu * (kk - m));
            (m, conv * (3 * k) / denom)
        })
        .collect();

    let mut values = vec![Rational::new(); (kk - k + 1) as usize];
    let mut sum = Rational::new();
    for (m, c) in cells {
        sum += &c;
        values[(m - k) as usize] = c;
    }
    if k > 1 {
        // a_k(0) = 0 fixes the coefficient of e^{-k²νt}
        values[(kk - k) as usize] = -sum;
    }
    NormalizedRow { k, values }
}

/// Exact row k of the Burgers table for `u₀ = a₀ e^{ix}` and viscosity `nu`.
pub fn burgers_table(k: u32, a0: &GaussianRational, nu: &Rational) -> Result<CoeffTable> {
    if k == 0 {
        return Err(Error::invalid("mode index k must be at least 1"));
    }
    BurgersSeries::new(nu.clone())?.table(k, a0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn im(n: i64, d: i64) -> GaussianRational {
        GaussianRational::imag(q(n, d))
    }

    fn re(n: i64, d: i64) -> GaussianRational {
        GaussianRational::real(q(n, d))
    }

    #[test]
    fn low_rows_match_closed_forms() {
        let one = GaussianRational::one();
        let nu = q(1, 1);
        let t1 = burgers_table(1, &one, &nu).unwrap();
        assert_eq!(t1.entries, BTreeMap::from([(1, one.clone())]));
        let t2 = burgers_table(2, &one, &nu).unwrap();
        assert_eq!(t2.entries, BTreeMap::from([(2, im(3, 1)), (4, im(-3, 1))]));
        let t3 = burgers_table(3, &one, &nu).unwrap();
        assert_eq!(
            t3.entries,
            BTreeMap::from([(3, re(-9, 1)), (5, re(27, 2)), (9, re(-9, 2))])
        );
        let t4 = burgers_table(4, &one, &nu).unwrap();
        assert_eq!(
            t4.entries,
            BTreeMap::from([
                (4, im(-27, 1)),
                (6, im(54, 1)),
                (8, im(-27, 2)),
                (10, im(-18, 1)),
                (16, im(9, 2)),
            ])
        );
        assert_eq!(t4.gap_start(), 10);
    }

    #[test]
    fn rejects_bad_arguments() {
        let one = GaussianRational::one();
        assert!(burgers_table(0, &one, &q(1, 1)).is_err());
        assert!(burgers_table(2, &one, &q(0, 1)).is_err());
        assert!(burgers_table(2, &one, &q(-1, 2)).is_err());
    }

    #[test]
    fn viscosity_scaling_of_rows() {
        // α_{k,m}(ν) = ν^{1-k} α_{k,m}(1)
        let a = GaussianRational::new(q(2, 3), q(-1, 5));
        let t1 = burgers_table(5, &a, &q(1, 1)).unwrap();
        let t3 = burgers_table(5, &a, &q(3, 7)).unwrap();
        let s = Rational::from((7, 3)).pow(4u32);
        for (m, c) in &t1.entries {
            assert_eq!(t3.entry(*m), c.mul_rational(&s));
        }
    }
}
