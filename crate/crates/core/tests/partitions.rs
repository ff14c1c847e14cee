use cburgers_core::partitions::*;
use rug::Integer;

/// Counts tuples (j_1, …, j_k) with Σ i·j_i = k by direct enumeration.
fn enumerate(k: u32) -> u64 {
    fn go(i: u32, k: u32, rest: u32) -> u64 {
        if i > k {
            return (rest == 0) as u64;
        }
        (0..=rest / i).map(|j| go(i + 1, k, rest - i * j)).sum()
    }
    go(1, k, k)
}

fn pentagonal(k_max: usize) -> Vec<Integer> {
    let mut p = vec![Integer::new(); k_max + 1];
    p[0] = Integer::from(1);
    for n in 1..=k_max {
        let mut acc = Integer::new();
        for m in 1.. {
            let g1 = m * (3 * m - 1) / 2;
            if g1 > n {
                break;
            }
            let g2 = m * (3 * m + 1) / 2;
            let mut term = p[n - g1].clone();
            if g2 <= n {
                term += &p[n - g2];
            }
            if m % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p[n] = acc;
    }
    p
}

#[test]
fn small_counts() {
    assert_eq!(partition_count(1).unwrap().n_k, 1);
    assert_eq!(partition_count(4).unwrap().n_k, 5);
    assert_eq!(partition_count(10).unwrap().n_k, 42);
    assert!(partition_count(0).is_err());
}

#[test]
fn matches_enumeration_up_to_25() {
    let table = partition_table(25);
    for k in 1..=25 {
        assert_eq!(table[k as usize], enumerate(k), "k={k}");
    }
}

#[test]
fn matches_pentagonal_recurrence_up_to_200() {
    assert_eq!(partition_table(200), pentagonal(200));
    assert_eq!(partition_count(200).unwrap().n_k.to_string(), "3972999029388");
}

#[test]
fn nondecreasing() {
    let t = partition_table(300);
    assert!(t.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn asymptotic_ratio_window() {
    let r = hardy_ramanujan_report(500).unwrap();
    for row in &r.rows[99..] {
        assert!(
            (0.9..=1.1).contains(&row.ratio_asym),
            "k={} ratio={}",
            row.k,
            row.ratio_asym
        );
    }
    let gap = |k: usize| (r.rows[k - 1].ratio_asym - 1.0).abs();
    assert!(gap(400) < gap(100));
    assert!(r.asym_trend.iter().all(|t| t.closer));
    assert_eq!(
        r.asym_trend.iter().map(|t| t.k).collect::<Vec<_>>(),
        vec![100, 200, 400]
    );
}

#[test]
fn bound_ratio_peaks_then_decreases() {
    let r = hardy_ramanujan_report(400).unwrap();
    assert_eq!(r.bound_peak_k, 2);
    assert_eq!(r.bound_decreasing_from, 6);
    assert!(r.empirical_c1.is_finite() && r.empirical_c1 < 1.0);
    assert!(r.rows.iter().all(|row| row.ratio_bound <= r.empirical_c1));
}

#[test]
fn report_rejects_small_range_and_writes_csv() {
    assert!(hardy_ramanujan_report(9).is_err());
    let r = hardy_ramanujan_report(10).unwrap();
    assert_eq!(r.rows[0].n_k, "1");
    assert!(r.rows[0].ratio_asym.is_finite());
    let csv = report_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,N_k,ratio_asym,ratio_bound"));
    assert_eq!(lines.count(), 10);
    assert!(csv.contains("\n10,42,"));
}
