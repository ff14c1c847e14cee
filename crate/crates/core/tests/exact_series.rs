use std::collections::BTreeMap;

use cburgers_core::exact_series::export::{series_from_json, series_to_json, table_from_json, table_to_json};
use cburgers_core::exact_series::kdvb::{exact_series, float_series};
use cburgers_core::exact_series::*;
use cburgers_core::spectral::{integrate, Scheme, SolverConfig, SpectralState};
use cburgers_core::{BigComplex, ComplexInput, GaussianRational, ModelParams, Real};
use num_complex::Complex64;
use rug::ops::Pow;
use rug::{Float, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn g(re: Rational, im: Rational) -> GaussianRational {
    GaussianRational::new(re, im)
}

fn re(n: i64, d: i64) -> GaussianRational {
    GaussianRational::real(q(n, d))
}

fn im(n: i64, d: i64) -> GaussianRational {
    GaussianRational::imag(q(n, d))
}

fn one() -> GaussianRational {
    GaussianRational::one()
}

/// Rows as printed: `prefactor · Σ c_m e^{-mνt}` with a = ν = 1.
fn listed_row(prefactor: GaussianRational, terms: &[(u32, i64, i64)]) -> BTreeMap<u32, GaussianRational> {
    terms.iter().map(|&(m, n, d)| (m, prefactor.mul(&re(n, d)))).collect()
}

#[test]
fn burgers_rows_two_to_six_match_listed_expansions() {
    let nu = q(1, 1);
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
    for (k, row) in expected {
        let t = burgers_table(k, &one(), &nu).unwrap();
        assert_eq!(t.entries, row, "row {k}");
    }
    assert_eq!(burgers_table(6, &one(), &nu).unwrap().entry(36), im(-81, 40));
    assert_eq!(burgers_table(6, &one(), &nu).unwrap().entry(6), im(243, 1));
}

#[test]
fn burgers_row_one_and_rejections() {
    let t = burgers_table(1, &one(), &q(1, 1)).unwrap();
    assert_eq!(t.entries, BTreeMap::from([(1, one())]));
    assert!(burgers_table(0, &one(), &q(1, 1)).is_err());
    assert!(burgers_table(3, &one(), &q(0, 1)).is_err());
}

#[test]
fn burgers_rows_scale_with_amplitude_and_viscosity() {
    // a_{k,m}(a, ν) = a^k ν^{1-k} a_{k,m}(1, 1)
    let a = g(q(2, 3), q(-1, 5));
    let nu = q(7, 4);
    for k in 1..=7 {
        let base = burgers_table(k, &one(), &q(1, 1)).unwrap();
        let t = burgers_table(k, &a, &nu).unwrap();
        let scale = a.pow(k).mul_rational(&nu.clone().recip().pow(k as i32 - 1));
        for (m, c) in &base.entries {
            assert_eq!(t.entry(*m), c.mul(&scale), "k={k} m={m}");
        }
    }
}

#[test]
fn burgers_structural_identities_hold_exactly() {
    for (a, nu) in [(one(), q(1, 1)), (g(q(1, 2), q(1, 3)), q(5, 2)), (re(-3, 7), q(1, 9))] {
        let s = BurgersSeries::new(nu.clone()).unwrap();
        for k in 1..=12 {
            let r = structural_check(&s.table(k, &a).unwrap());
            assert!(r.all_hold(), "a={a} nu={nu} k={k}: {:?}", r.failures);
            assert_eq!(r.leading, Some(true));
            if k >= 2 {
                assert_eq!(r.k_plus_2, Some(true));
            }
        }
    }
}

#[test]
fn corrupted_table_fails_zero_sum() {
    let mut t = burgers_table(5, &one(), &q(1, 1)).unwrap();
    let c = t.entries.get_mut(&9).unwrap();
    *c = c.neg();
    let r = structural_check(&t);
    assert!(!r.zero_sum);
    assert!(!r.all_hold());
    assert!(!r.failures.is_empty());
}

fn kdvb_params(nu: Rational, alpha: Rational) -> ModelParams {
    ModelParams::kdvb(Real::Exact(nu), Real::Exact(alpha)).unwrap()
}

#[test]
fn kdvb_structural_identities_hold_exactly() {
    let cases = [
        (q(1, 1), q(1, 1), vec![re(1, 2)]),
        (q(3, 2), q(2, 5), vec![g(q(1, 3), q(1, 4)), im(-1, 2), re(1, 5)]),
        (q(0, 1), q(1, 1), vec![re(1, 1), re(1, 2)]),
        (q(2, 1), q(0, 1), vec![re(1, 1)]),
    ];
    for (nu, alpha, mut init) in cases {
        let single = init.len() == 1;
        let a01 = init[0].clone();
        init.resize(8, GaussianRational::zero());
        let s = exact_series(&kdvb_params(nu.clone(), alpha.clone()), &init).unwrap();
        for k in 1..=8 {
            let row = s.series(k).unwrap();
            let r = structural_check_series(&row, single.then_some(&a01));
            assert!(r.exact);
            assert!(r.all_hold(), "nu={nu} alpha={alpha} k={k}: {:?}", r.failures);
        }
    }
}

#[test]
fn kdvb_low_rows_match_closed_forms() {
    let (nu, alpha) = (q(3, 2), q(1, 3));
    let p = kdvb_params(nu.clone(), alpha.clone());
    let a1 = g(q(1, 2), q(1, 5));
    let a2 = g(q(-1, 3), q(2, 7));
    let s = exact_series(&p, &[a1.clone(), a2.clone()]).unwrap();

    let r1 = s.series(1).unwrap();
    assert_eq!(r1.terms, BTreeMap::from([((1, 1), a1.clone())]));

    // 6i a01² / (2ν - 6αi)
    let d2 = g(Rational::from(&nu * 2), Rational::from(&alpha * -6));
    let c = im(6, 1).mul(&a1.pow(2)).div(&d2).unwrap();
    let r2 = s.series(2).unwrap();
    assert_eq!(r2.terms, BTreeMap::from([((2, 2), c.clone()), ((4, 8), a2.sub(&c))]));
}

#[test]
fn symbolic_rows_match_listed_coefficients() {
    let (nu, alpha) = (q(5, 3), q(3, 4));
    let p = kdvb_params(nu.clone(), alpha.clone());
    let d = |h: i64, l: i64| g(Rational::from(&nu * h), Rational::from(&alpha * -l));

    let r1 = kdvb_symbolic_table(1, &p).unwrap();
    assert_eq!(
        r1,
        BTreeMap::from([(MonomialKey(vec![1]), BTreeMap::from([((1, 1), one())]))])
    );

    let r2 = kdvb_symbolic_table(2, &p).unwrap();
    let c = im(6, 1).div(&d(2, 6)).unwrap();
    assert_eq!(
        r2[&MonomialKey(vec![2, 0])],
        BTreeMap::from([((2, 2), c.clone()), ((4, 8), c.neg())])
    );
    assert_eq!(r2[&MonomialKey(vec![0, 1])], BTreeMap::from([((4, 8), one())]));

    let r3 = kdvb_symbolic_table(3, &p).unwrap();
    let mixed = &r3[&MonomialKey(vec![1, 1, 0])];
    let c = im(18, 1).div(&d(4, 18)).unwrap();
    assert_eq!(mixed[&(5, 9)], c);
    assert_eq!(mixed[&(9, 27)], c.neg());
}

#[test]
fn symbolic_substitution_equals_numeric_rows() {
    let cases = [
        (q(1, 1), q(1, 1)),
        (q(2, 3), q(5, 2)),
        (q(0, 1), q(2, 1)),
        (q(4, 1), q(0, 1)),
    ];
    let init: Vec<GaussianRational> = vec![
        g(q(1, 2), q(-1, 3)),
        re(2, 5),
        im(1, 7),
        g(q(-1, 4), q(1, 4)),
        re(1, 11),
        GaussianRational::zero(),
        im(-2, 9),
        re(3, 13),
    ];
    for (nu, alpha) in cases {
        let p = kdvb_params(nu.clone(), alpha.clone());
        let numeric = exact_series(&p, &init).unwrap();
        for k in 1..=8 {
            let sym = kdvb_symbolic_table(k, &p).unwrap();
            assert_eq!(
                substitute(&sym, &init),
                numeric.series(k).unwrap().terms,
                "nu={nu} alpha={alpha} k={k}"
            );
        }
    }
    let p = kdvb_params(q(1, 1), q(1, 1));
    assert!(kdvb_symbolic_table(K_SYM_MAX + 1, &p).is_err());
}

#[test]
fn kdvb_table_rejects_bad_input() {
    let one_in = [ComplexInput::Exact(one())];
    let p = kdvb_params(q(1, 1), q(1, 1));
    assert!(kdvb_table(0, &one_in, &p, 128).is_err());
    assert!(kdvb_table(2, &one_in, &p, 128).is_err());
    assert!(ModelParams::kdvb(Real::int(0), Real::int(0)).is_err());
    let frac = ModelParams::new(Real::int(1), Real::int(0), Real::ratio(1, 2)).unwrap();
    assert!(kdvb_table(1, &one_in, &frac, 128).is_err());
}

#[test]
fn kdvb_with_zero_dispersion_collapses_to_burgers() {
    let a = g(q(3, 5), q(1, 5));
    let nu = q(4, 3);
    let p = kdvb_params(nu.clone(), q(0, 1));
    let mut init = vec![a.clone()];
    init.resize(9, GaussianRational::zero());
    let s = exact_series(&p, &init).unwrap();
    for k in 1..=9 {
        let b = burgers_table(k, &a, &nu).unwrap();
        let collapsed: BTreeMap<u32, GaussianRational> = s
            .series(k)
            .unwrap()
            .collapsed()
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        assert_eq!(collapsed, b.entries, "k={k}");
    }
}

#[test]
fn json_round_trips() {
    let t = burgers_table(7, &g(q(1, 3), q(-2, 5)), &q(3, 2)).unwrap();
    let text = serde_json::to_string(&table_to_json(&t)).unwrap();
    let back = table_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, t);

    let p = kdvb_params(q(1, 2), q(3, 1));
    let e = kdvb_table(5, &vec![ComplexInput::Exact(re(1, 2)); 5], &p, 256).unwrap();
    let text = serde_json::to_string(&series_to_json(&e)).unwrap();
    let back = series_from_json(&serde_json::from_str(&text).unwrap(), 256).unwrap();
    assert_eq!(back.as_exact().unwrap(), e.as_exact().unwrap());

    let pf = ModelParams::kdvb(Real::int(1), Real::Approx(2f64.sqrt())).unwrap();
    let f = kdvb_table(4, &vec![ComplexInput::Approx(Complex64::new(0.3, 0.1)); 4], &pf, 200).unwrap();
    let j = series_to_json(&f);
    let back = series_from_json(&serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap(), 200).unwrap();
    let (Series::Approx(a), Series::Approx(b)) = (&f, &back) else {
        panic!("float rows expected");
    };
    assert_eq!(a.terms.len(), b.terms.len());
    for (key, c) in &a.terms {
        let d = &b.terms[key];
        assert_eq!(c.re, d.re);
        assert_eq!(c.im, d.im);
    }
}

fn close(a: &BigComplex, b: &BigComplex, rel: f64) -> bool {
    let diff = a.sub(b).abs();
    let scale = b.abs();
    Float::with_val(64, &diff / &scale).to_f64() <= rel
}

#[test]
fn evaluate_mode_examples() {
    let p = 256;
    let nu = q(1, 1);
    let r1 = burgers_table(1, &one(), &nu).unwrap();
    let v = evaluate_mode(&r1, &Real::int(1), p).unwrap();
    let e1 = BigComplex::new(Float::with_val(p, -1).exp(), Float::new(p));
    assert!(close(&v.value, &e1, 1e-70));

    let r2 = burgers_table(2, &one(), &nu).unwrap();
    let v = evaluate_mode(&r2, &Real::ratio(1, 2), p).unwrap();
    let want = Float::with_val(p, Float::with_val(p, -1).exp() - Float::with_val(p, -2).exp()) * 3;
    assert!(close(&v.value, &BigComplex::new(Float::new(p), want), 1e-70));

    for k in 1..=6 {
        let t = burgers_table(k, &re(2, 3), &q(1, 2)).unwrap();
        let v = evaluate_mode(&t, &Real::int(0), p).unwrap();
        assert_eq!(v.exact, Some(t.initial_value()));
    }
    let s = exact_series(&kdvb_params(q(1, 1), q(1, 1)), &[re(1, 2), im(1, 3), re(1, 4)]).unwrap();
    let v = evaluate_mode(&s.series(3).unwrap(), &Real::int(0), p).unwrap();
    assert_eq!(v.exact, Some(re(1, 4)));

    assert!(evaluate_mode(&r1, &Real::int(-1), p).is_err());
    assert!(evaluate_mode(&r1, &Real::int(1), 52).is_err());
}

/// Taylor-series integration of the closed system for modes 1..=k_max.
fn taylor_oracle(
    nu: f64,
    alpha: f64,
    init: &[BigComplex],
    t_end: &Float,
    steps: u32,
    order: usize,
    prec: u32,
) -> Vec<BigComplex> {
    let k_max = init.len();
    let h = Float::with_val(prec, t_end / steps);
    let lin: Vec<BigComplex> = (1..=k_max)
        .map(|k| {
            let k = k as f64;
            BigComplex::new(
                Float::with_val(prec, -nu * k * k),
                Float::with_val(prec, alpha * k * k * k),
            )
        })
        .collect();
    let mut a = init.to_vec();
    for _ in 0..steps {
        // c[k][n]: n-th Taylor coefficient of a_k, scaled by h^n.
        let mut c: Vec<Vec<BigComplex>> = a.iter().map(|z| vec![z.clone()]).collect();
        for n in 0..order {
            let mut next = Vec::with_capacity(k_max);
            for k in 0..k_max {
                let mut s = lin[k].mul(&c[k][n]);
                let mut conv = BigComplex::zero(prec);
                for k1 in 0..k {
                    let k2 = k - 1 - k1;
                    for j in 0..=n {
                        conv = conv.add(&c[k1][j].mul(&c[k2][n - j]));
                    }
                }
                let kk = (k + 1) as i32;
                s = s.add(&conv.mul_i().mul_real(&Float::with_val(prec, 3 * kk)));
                let f = Float::with_val(prec, &h / (n as u32 + 1));
                next.push(s.mul_real(&f));
            }
            for (k, v) in next.into_iter().enumerate() {
                c[k].push(v);
            }
        }
        a = c
            .iter()
            .map(|row| row.iter().rev().fold(BigComplex::zero(prec), |acc, x| acc.add(x)))
            .collect();
    }
    a
}

#[test]
fn evaluate_mode_agrees_with_taylor_integration() {
    let prec = 320;
    let two80 = 2f64.powi(-80);
    // Burgers, single mode.
    let nu = q(1, 1);
    let init: Vec<BigComplex> = (0..6)
        .map(|i| {
            if i == 0 {
                one().to_big(prec)
            } else {
                BigComplex::zero(prec)
            }
        })
        .collect();
    let t = Float::with_val(prec, 1);
    let oracle = taylor_oracle(1.0, 0.0, &init, &t, 200, 60, prec);
    for k in 1..=6 {
        let row = burgers_table(k, &one(), &nu).unwrap();
        let v = evaluate_mode(&row, &Real::int(1), 256).unwrap();
        assert!(close(&v.value, &oracle[k as usize - 1], two80), "burgers k={k}");
    }
    // KdV-Burgers, several modes.
    let data = [
        g(q(1, 2), q(0, 1)),
        im(1, 3),
        re(-1, 4),
        g(q(1, 5), q(1, 5)),
        re(0, 1),
        im(-1, 6),
    ];
    let init: Vec<BigComplex> = data.iter().map(|z| z.to_big(prec)).collect();
    let oracle = taylor_oracle(1.0, 1.0, &init, &t, 400, 60, prec);
    let s = exact_series(&kdvb_params(q(1, 1), q(1, 1)), &data).unwrap();
    for k in 1..=6 {
        let v = evaluate_mode(&s.series(k).unwrap(), &Real::int(1), 256).unwrap();
        assert!(close(&v.value, &oracle[k as usize - 1], two80), "kdvb k={k}");
    }
}

#[test]
fn float_rows_match_exact_rows_when_both_apply() {
    let p = kdvb_params(q(1, 1), q(1, 2));
    let data = [re(1, 2), im(1, 4), re(1, 8)];
    let exact = exact_series(&p, &data).unwrap();
    let approx: Vec<ComplexInput> = data.iter().cloned().map(ComplexInput::Exact).collect();
    let fl = float_series(&p, &approx, 256).unwrap();
    for k in 1..=6 {
        let a = evaluate_mode(&exact.series(k).unwrap(), &Real::ratio(3, 4), 200).unwrap();
        let b = evaluate_mode(&fl.series(k).unwrap(), &Real::ratio(3, 4), 200).unwrap();
        assert!(close(&b.value, &a.value, 1e-60), "k={k}");
    }
}

#[test]
fn evaluate_field_examples() {
    let nu = q(1, 1);
    let a = re(2, 5);
    let rows1 = vec![burgers_table(1, &a, &nu).unwrap()];
    let v = evaluate_field(&rows1, &Real::int(0), &Real::int(0), 128).unwrap();
    assert!(close(&v.value, &a.to_big(128), 1e-35));

    let rows2: Vec<_> = (1..=2).map(|k| burgers_table(k, &one(), &nu).unwrap()).collect();
    let pi = Real::Approx(std::f64::consts::PI);
    let v = evaluate_field(&rows2, &pi, &Real::int(0), 128).unwrap();
    let z = v.value.to_c64();
    assert!((z.re + 1.0).abs() < 1e-15 && z.im.abs() < 1e-15);

    // K = 8 modes form a closed system, so the solver with N = 8 is the same object.
    let rows: Vec<_> = (1..=8).map(|k| burgers_table(k, &a, &nu).unwrap()).collect();
    let v = evaluate_field(&rows, &Real::int(0), &Real::int(1), 128).unwrap();
    assert!(v.last_term.to_f64() > 0.0);
    let params = ModelParams::burgers(Real::int(1)).unwrap();
    let state = SpectralState::from_prefix(&[Complex64::new(0.4, 0.0)], 8, 53).unwrap();
    let cfg = SolverConfig {
        scheme: Scheme::IfRk4,
        ..SolverConfig::default()
    };
    let traj = integrate(&state, &params, &cfg, 1.0).unwrap();
    let u: Complex64 = traj.last().coeffs.iter().sum();
    let exact = v.value.to_c64();
    assert!((u - exact).norm() / exact.norm() <= 1e-8, "{u} vs {exact}");
}
