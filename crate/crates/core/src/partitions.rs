//! Partition counts `N_k = #{(j_1, …, j_k) ≥ 0 : j_1 + 2j_2 + ⋯ + k j_k = k}`.

use std::fmt::Write as _;

use rug::float::Constant;
use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionRecord {
    pub k: u32,
    pub n_k: Integer,
}

/// `p(0), …, p(k_max)` by coin-style accumulation over part sizes.
pub fn partition_table(k_max: u32) -> Vec<Integer> {
    let n = k_max as usize;
    let mut p = vec![Integer::new(); n + 1];
    p[0] = Integer::from(1);
    for part in 1..=n {
        for total in part..=n {
            let (lo, hi) = p.split_at_mut(total);
            hi[0] += &lo[total - part];
        }
    }
    p
}

pub fn partition_count(k: u32) -> Result<PartitionRecord> {
    if k == 0 {
        return Err(Error::invalid("partition_count needs k >= 1"));
    }
    let n_k = partition_table(k).pop().expect("nonempty table");
    Ok(PartitionRecord { k, n_k })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub k: u32,
    pub n_k: String,
    /// `N_k · 4√3 k / e^{π√(2k/3)}`.
    pub ratio_asym: f64,
    /// `N_k · k / e^{2√(2k)}`.
    pub ratio_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardyRamanujanReport {
    pub k_max: u32,
    pub rows: Vec<RatioRow>,
    pub asym_min: f64,
    pub asym_max: f64,
    pub bound_min: f64,
    pub bound_max: f64,
    /// `sup_k ratio_bound`, an admissible constant in `N_k < C₁ e^{2√(2k)}/k`.
    pub empirical_c1: f64,
    /// k where ratio_bound peaks.
    pub bound_peak_k: u32,
    /// Smallest k from which ratio_bound is strictly decreasing up to k_max.
    pub bound_decreasing_from: u32,
    /// `|ratio_asym(k) - 1|` is smaller than at k/2 for each checked k.
    pub asym_trend: Vec<TrendCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendCheck {
    pub k: u32,
    pub gap_at_k: f64,
    pub gap_at_half: f64,
    pub closer: bool,
}

fn ratios(k: u32, n_k: &Integer, prec: u32) -> (f64, f64) {
    let kf = Float::with_val(prec, k);
    let n = Float::with_val(prec, n_k);
    let pi = Float::with_val(prec, Constant::Pi);
    let e_asym = Float::with_val(prec, Float::with_val(prec, &kf * 2u32) / 3u32).sqrt() * &pi;
    let e_bound = Float::with_val(prec, &kf * 2u32).sqrt() * 2u32;
    let four_sqrt3 = Float::with_val(prec, 3u32).sqrt() * 4u32;
    let asym = Float::with_val(prec, &n * &four_sqrt3) * &kf / e_asym.exp();
    let bound = Float::with_val(prec, &n * &kf) / e_bound.exp();
    (asym.to_f64(), bound.to_f64())
}

pub fn hardy_ramanujan_report(k_max: u32) -> Result<HardyRamanujanReport> {
    if k_max < 10 {
        return Err(Error::invalid(format!("report needs k_max >= 10, got {k_max}")));
    }
    let table = partition_table(k_max);
    let prec = 128;
    let rows: Vec<RatioRow> = (1..=k_max)
        .map(|k| {
            let (ratio_asym, ratio_bound) = ratios(k, &table[k as usize], prec);
            RatioRow {
                k,
                n_k: table[k as usize].to_string(),
                ratio_asym,
                ratio_bound,
            }
        })
        .collect();
    let fold = |f: fn(&RatioRow) -> f64| {
        rows.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (asym_min, asym_max) = fold(|r| r.ratio_asym);
    let (bound_min, bound_max) = fold(|r| r.ratio_bound);
    let peak = rows
        .iter()
        .max_by(|a, b| a.ratio_bound.total_cmp(&b.ratio_bound))
        .map(|r| r.k)
        .unwrap_or(1);
    let decreasing_from = rows
        .windows(2)
        .rposition(|w| w[1].ratio_bound >= w[0].ratio_bound)
        .map_or(1, |i| i as u32 + 2);
    let mut trend = Vec::new();
    let mut k = 100;
    while k <= k_max {
        let gap = |k: u32| (rows[k as usize - 1].ratio_asym - 1.0).abs();
        let (g, h) = (gap(k), gap(k / 2));
        trend.push(TrendCheck {
            k,
            gap_at_k: g,
            gap_at_half: h,
            closer: g < h,
        });
        k *= 2;
    }
    Ok(HardyRamanujanReport {
        k_max,
        asym_min,
        asym_max,
        bound_min,
        bound_max,
        empirical_c1: bound_max,
        bound_peak_k: peak,
        bound_decreasing_from: decreasing_from,
        asym_trend: trend,
        rows,
    })
}

/// `k,N_k,ratio_asym,ratio_bound`.
pub fn report_csv(report: &HardyRamanujanReport) -> String {
    let mut out = String::from("k,N_k,ratio_asym,ratio_bound\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{:.16e},{:.16e}", r.k, r.n_k, r.ratio_asym, r.ratio_bound);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let p: Vec<u32> = partition_table(10).iter().map(|x| x.to_u32().unwrap()).collect();
        assert_eq!(p, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert!(partition_count(0).is_err());
        assert_eq!(partition_count(1).unwrap().n_k, 1);
    }

    #[test]
    fn exceeds_u64_before_450() {
        let t = partition_table(450);
        assert!(t[450].to_u64().is_none());
        assert!(t[300].to_u64().is_some());
    }
}
