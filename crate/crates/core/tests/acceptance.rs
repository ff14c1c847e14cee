//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cburgers_core::blowup::{default_time, make_certificate, verify_sign_pattern, SignOptions};
use cburgers_core::exact_series::kdvb::exact_series;
use cburgers_core::exact_series::*;
use cburgers_core::partitions::{hardy_ramanujan_report, partition_table};
use cburgers_core::regularity::{
    check_coefficient_boundedness, check_geometric_bound, envelope_report, linear_grid, EnvelopeOptions,
};
use cburgers_core::spectral::*;
use cburgers_core::{BigComplex, ComplexInput, GaussianRational, ModelParams, Real};
use num_complex::Complex64;
use rug::{Float, Integer, Rational};

struct Outcome {
    pass: bool,
    detail: String,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn re(n: i64, d: i64) -> GaussianRational {
    GaussianRational::real(q(n, d))
}

fn im(n: i64, d: i64) -> GaussianRational {
    GaussianRational::imag(q(n, d))
}

fn listed_row(prefactor: GaussianRational, terms: &[(u32, i64, i64)]) -> BTreeMap<u32, GaussianRational> {
    terms.iter().map(|&(m, n, d)| (m, prefactor.mul(&re(n, d)))).collect()
}

fn closed_form_rows() -> Outcome {
    let expected = [
        (2, listed_row(im(-1, 1), &[(2, -3, 1), (4, 3, 1)])),
        (3, listed_row(re(-1, 1), &[(3, 9, 1), (5, -27, 2), (9, 9, 2)])),
        (
            4,
            listed_row(
                im(1, 1),
                &[(4, -27, 1), (6, 54, 1), (8, -27, 2), (10, -18, 1), (16, 9, 2)],
            ),
        ),
        (
            5,
            listed_row(
                re(1, 1),
                &[
                    (5, 81, 1),
                    (7, -405, 2),
                    (9, 405, 4),
                    (11, 135, 2),
                    (13, -135, 4),
                    (17, -135, 8),
                    (25, 27, 8),
                ],
            ),
        ),
        (
            6,
            listed_row(
                im(-1, 1),
                &[
                    (6, -243, 1),
                    (8, 729, 1),
                    (10, -2187, 4),
                    (12, -729, 4),
                    (14, 243, 1),
                    (18, 81, 2),
                    (20, -243, 8),
                    (26, -243, 20),
                    (36, 81, 40),
                ],
            ),
        ),
    ];
    let mut bad = Vec::new();
    for (k, row) in &expected {
        if burgers_table(*k, &GaussianRational::one(), &q(1, 1))
            .ok()
            .map(|t| t.entries)
            .as_ref()
            != Some(row)
        {
            bad.push(*k);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "rows 2-6 equal exactly".into()
        } else {
            format!("rows {bad:?} differ")
        },
    }
}

fn structural_suite() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (a, nu) in [
        (GaussianRational::one(), q(1, 1)),
        (GaussianRational::new(q(1, 2), q(1, 3)), q(5, 2)),
        (re(-3, 7), q(1, 9)),
    ] {
        let s = BurgersSeries::new(nu.clone()).expect("valid viscosity");
        for k in 1..=12 {
            let r = structural_check(&s.table(k, &a).expect("row"));
            checked += 1;
            let complete = r.leading == Some(true) && (k < 2 || r.k_plus_2 == Some(true));
            if !r.all_hold() || !complete {
                failures.push(format!("burgers nu={nu} k={k}: {:?}", r.failures));
            }
        }
    }
    let cases = [
        (q(1, 1), q(1, 1), vec![re(1, 2)]),
        (
            q(3, 2),
            q(2, 5),
            vec![GaussianRational::new(q(1, 3), q(1, 4)), im(-1, 2), re(1, 5)],
        ),
        (q(0, 1), q(1, 1), vec![re(1, 1), re(1, 2)]),
        (q(2, 1), q(0, 1), vec![re(1, 1)]),
        (q(1, 3), q(3, 1), vec![im(2, 3)]),
    ];
    for (nu, alpha, mut init) in cases {
        let single = init.len() == 1;
        let a01 = init[0].clone();
        init.resize(8, GaussianRational::zero());
        let p = ModelParams::kdvb(Real::Exact(nu.clone()), Real::Exact(alpha.clone())).expect("params");
        let s = exact_series(&p, &init).expect("series");
        for k in 1..=8 {
            let r = structural_check_series(&s.series(k).expect("row"), single.then_some(&a01));
            checked += 1;
            if !r.all_hold() || !r.exact {
                failures.push(format!("kdvb nu={nu} alpha={alpha} k={k}: {:?}", r.failures));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{checked} rows checked, {} failures {:?}", failures.len(), failures),
    }
}

fn eval_rows<M: ModeSeries>(rows: &[M], t: f64) -> Vec<Complex64> {
    rows.iter()
        .map(|r| {
            evaluate_mode(r, &Real::Approx(t), 128)
                .expect("evaluation")
                .value
                .to_c64()
        })
        .collect()
}

fn solver_run(p: &ModelParams, a01: f64, n: usize, scheme: Scheme, dt: f64, t_end: f64) -> Trajectory<Complex64> {
    let st = SpectralState::from_prefix(&[Complex64::new(a01, 0.0)], n, 53).expect("state");
    let cfg = SolverConfig {
        dt,
        scheme,
        record_every: 1000,
        ..SolverConfig::default()
    };
    integrate(&st, p, &cfg, t_end).expect("run")
}

fn max_rel(got: &[Complex64], exact: &[Complex64]) -> f64 {
    got.iter()
        .zip(exact)
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max)
}

fn oracle_equivalence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0, 1] {
        let p = ModelParams::kdvb(Real::int(1), Real::int(alpha)).expect("params");
        let mut init = vec![re(2, 5)];
        init.resize(8, GaussianRational::zero());
        let s = exact_series(&p, &init).expect("series");
        let rows: Vec<_> = (1..=8).map(|k| s.series(k).expect("row")).collect();
        let exact = eval_rows(&rows, 1.0);
        let err4 = max_rel(
            &solver_run(&p, 0.4, 32, Scheme::IfRk4, 1e-3, 1.0).last().coeffs[..8],
            &exact,
        );
        let err6 = max_rel(
            &solver_run(&p, 0.4, 32, Scheme::IfRk6, 1e-3, 1.0).last().coeffs[..8],
            &exact,
        );
        // The dispersive case is judged on the sixth-order scheme.
        let judged = if alpha == 0 { err4 } else { err6 };
        pass &= judged <= 1e-7;
        parts.push(format!("alpha={alpha}: ifrk4 {err4:.2e}, ifrk6 {err6:.2e}"));
    }
    Outcome {
        pass,
        detail: format!("max rel error modes 1-8 at t=1 ({}), tol 1e-7", parts.join("; ")),
    }
}

fn blowup_certificate() -> Outcome {
    let nu = q(1, 1);
    let t = default_time(&nu).expect("time");
    let cert = match make_certificate(&t, &nu, &Real::ratio(21, 20), 12, 256) {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("certificate error: {e}"),
            }
        }
    };
    let all_bounds = cert.bounds.iter().all(|b| b.pass);
    // The spectral solver on the same initial mode.
    let a = 1.05 * t.to_f64().exp();
    let t_end = t.to_f64();
    let p = ModelParams::burgers(Real::int(1)).expect("params");
    let mut cap = None;
    for n in [256, 512] {
        let traj = solver_run(&p, a, n, Scheme::IfRk4, 1e-3, t_end);
        if let Some(tc) = traj.cap_time.filter(|tc| *tc < t_end) {
            cap = Some((n, tc));
            break;
        }
    }
    Outcome {
        pass: cert.valid && all_bounds && cert.partial_l2_increasing && cap.is_some(),
        detail: format!(
            "T={:.6}, |a_k(T)| >= 1.05^k for k<=12: {all_bounds}, partial L2 increasing: {}, solver cap: {}",
            t.to_f64(),
            cert.partial_l2_increasing,
            cap.map_or("not reached".to_string(), |(n, tc)| format!("t={tc:.4} at N={n}")),
        ),
    }
}

fn sign_pattern() -> Outcome {
    let samples: Vec<f64> = (1..=32).map(|j| 3.0 * j as f64 / 32.0).collect();
    match verify_sign_pattern(16, &q(1, 1), &q(1, 1), &samples, &SignOptions::default()) {
        Ok(r) => Outcome {
            pass: r.pass && r.max_phase_error <= 1e-20 && r.min_modulus > 0.0,
            detail: format!(
                "k<=16, 32 samples, max phase error {:.2e}, min modulus {:.3e}",
                r.max_phase_error, r.min_modulus
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn brute_force(k: u32) -> u64 {
    fn go(i: u32, k: u32, rest: u32) -> u64 {
        if i > k {
            return (rest == 0) as u64;
        }
        (0..=rest / i).map(|j| go(i + 1, k, rest - i * j)).sum()
    }
    go(1, k, k)
}

fn pentagonal_ok(table: &[Integer]) -> bool {
    (1..table.len()).all(|n| {
        let mut acc = Integer::new();
        for m in 1usize.. {
            let g1 = m * (3 * m - 1) / 2;
            if g1 > n {
                break;
            }
            let mut term = table[n - g1].clone();
            let g2 = m * (3 * m + 1) / 2;
            if g2 <= n {
                term += &table[n - g2];
            }
            if m % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc == table[n]
    })
}

fn partitions() -> Outcome {
    let table = partition_table(200);
    let enumeration = (1..=25).all(|k| table[k as usize] == brute_force(k));
    let pentagonal = pentagonal_ok(&table);
    let r = hardy_ramanujan_report(500).expect("report");
    let window = &r.rows[99..];
    let lo = window.iter().map(|x| x.ratio_asym).fold(f64::INFINITY, f64::min);
    let hi = window.iter().map(|x| x.ratio_asym).fold(f64::NEG_INFINITY, f64::max);
    let gap = |k: usize| (r.rows[k - 1].ratio_asym - 1.0).abs();
    let trend = gap(400) < gap(100);
    Outcome {
        pass: enumeration && pentagonal && lo >= 0.9 && hi <= 1.1 && trend,
        detail: format!(
            "enumeration k<=25: {enumeration}, pentagonal k<=200: {pentagonal}, ratio on [100,500] in [{lo:.4}, {hi:.4}], gap k=400 {:.4} < k=100 {:.4}",
            gap(400),
            gap(100)
        ),
    }
}

fn geometric_bound() -> Outcome {
    let a01 = ComplexInput::Exact(re(1, 2));
    let grid = linear_grid(0.0, 10.0, 201);
    match check_geometric_bound(&Real::int(3), &Real::int(0), &a01, 30, &grid, 256) {
        Ok(r) => Outcome {
            pass: r.in_hypothesis && r.worst_ratio <= 1.0 + 1e-12,
            detail: format!(
                "max |a_k(t)|/0.5^k = {:.15} at k={}, t={} over k<=30, 201 points on [0,10]",
                r.worst_ratio, r.worst_at.0, r.worst_at.1
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn coefficient_bound() -> Outcome {
    match check_coefficient_boundedness(&q(6, 1), &q(0, 1), 6) {
        Ok(r) => Outcome {
            pass: r.in_hypothesis && r.pass,
            detail: format!("k<=6, max |C| = {}, exact comparison", r.max_abs),
        },
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn decay_fit() -> Outcome {
    let p = ModelParams::burgers(Real::int(1)).expect("params");
    let grid = linear_grid(0.1, 6.0, 60);
    let opts = EnvelopeOptions {
        fit_window: Some((2.0, 6.0)),
        ..EnvelopeOptions::default()
    };
    match envelope_report(&p, &[ComplexInput::Exact(re(1, 2))], 24, &grid, &opts) {
        Ok(r) => {
            let ok = r.fits.len() == 3 && r.fits.iter().all(|f| f.delta > 0.0 && f.residual < 0.01);
            let parts: Vec<String> = r
                .fits
                .iter()
                .map(|f| format!("s={}: delta {:.4}, 1-R^2 {:.1e}", f.s, f.delta, f.residual))
                .collect();
            Outcome {
                pass: ok,
                detail: format!("fit on [2,6]: {}", parts.join("; ")),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn slope(dts: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn linear_ulp_per_step() -> f64 {
    let prec = 256;
    let mut worst = 0.0f64;
    for (nu, alpha) in [(1.0, 0.0), (0.25, 0.5), (0.5, 1.0)] {
        let p = ModelParams::new(Real::Approx(nu), Real::Approx(alpha), Real::int(1)).expect("params");
        let init: Vec<Complex64> = (1..=16)
            .map(|k| Complex64::new(1.0 / k as f64, 0.5 / k as f64))
            .collect();
        let (dt, steps) = (0.01, 200);
        let cfg = SolverConfig {
            dt,
            linear_only: true,
            record_every: steps,
            ..SolverConfig::default()
        };
        let st = SpectralState::from_prefix(&init, 16, 53).expect("state");
        let traj = integrate(&st, &p, &cfg, dt * steps as f64).expect("run");
        for (i, a0) in init.iter().enumerate() {
            let k = (i + 1) as f64;
            let t = Float::with_val(prec, dt) * steps;
            let exact = BigComplex::exp_of(
                &(Float::with_val(prec, -nu * k * k) * &t),
                &(Float::with_val(prec, alpha * k * k * k) * &t),
            )
            .mul(&BigComplex::from_c64(prec, *a0));
            let got = BigComplex::from_c64(prec, traj.last().coeffs[i]);
            let rel = Float::with_val(64, got.sub(&exact).abs() / exact.abs()).to_f64();
            worst = worst.max(rel / steps as f64 / f64::EPSILON);
        }
    }
    worst
}

fn integrator_order() -> Outcome {
    let p = ModelParams::burgers(Real::int(3)).expect("params");
    let t_end = 0.5;
    let s = BurgersSeries::new(q(3, 1)).expect("series");
    let rows: Vec<_> = (1..=8).map(|k| s.table(k, &re(1, 2)).expect("row")).collect();
    let exact = eval_rows(&rows, t_end);
    let dts = [4e-3, 2e-3, 1e-3];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let c = solver_run(&p, 0.5, 16, Scheme::IfRk4, dt, t_end).last().coeffs[..8].to_vec();
            c.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .collect();
    let order = slope(&dts, &errs);
    let ulp = linear_ulp_per_step();
    Outcome {
        pass: (3.7..=4.3).contains(&order) && ulp <= 4.0,
        detail: format!(
            "ifrk4 order {order:.3} (errors {:.2e}, {:.2e}, {:.2e}), linear steps {ulp:.2} ulp/step",
            errs[0], errs[1], errs[2]
        ),
    }
}

fn main() {
    let criteria: [(u32, &str, Option<Duration>, fn() -> Outcome); 10] = [
        (
            1,
            "closed-form table reproduction",
            Some(Duration::from_secs(1)),
            closed_form_rows,
        ),
        (
            2,
            "structural identity suite",
            Some(Duration::from_secs(10)),
            structural_suite,
        ),
        (
            3,
            "oracle equivalence",
            Some(Duration::from_secs(5)),
            oracle_equivalence,
        ),
        (
            4,
            "blow-up certificate",
            Some(Duration::from_secs(60)),
            blowup_certificate,
        ),
        (5, "sign pattern", None, sign_pattern),
        (6, "partitions", Some(Duration::from_secs(5)), partitions),
        (7, "geometric bound", None, geometric_bound),
        (8, "coefficient boundedness", None, coefficient_bound),
        (9, "decay fit", None, decay_fit),
        (10, "integrator order", None, integrator_order),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!(
            "{} criterion {id:>2} {name}: {} [{:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
