use monodromy::harness::sampling::{bounded, trial_rng};
use monodromy::linalg::expm;
use monodromy::series::{eval_series, formal_f, frobenius_h, optimal_truncation, FormalSeriesF};
use monodromy::{CMat, Complex64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// F′ − A F + F A⁰ for the truncated series, A = A₀/z² + B/z, A⁰ = A₀/z² + δ(B)/z.
fn gauge_residual(f: &FormalSeriesF, a0: &CMat, b: &CMat, z: Complex64) -> f64 {
    let n = a0.n();
    let mut val = CMat::zeros(n, n);
    let mut der = CMat::zeros(n, n);
    for (k, ck) in f.coeffs.iter().enumerate() {
        val = &val + &ck.map(|x| x * z.powi(k as i32));
        if k > 0 {
            der = &der + &ck.map(|x| x * (k as f64) * z.powi(k as i32 - 1));
        }
    }
    let a = &a0.map(|x| x / (z * z)) + &b.map(|x| x / z);
    let a_formal = &a0.map(|x| x / (z * z)) + &b.diag_part().map(|x| x / z);
    (&(&der - &(&a * &val)) + &(&val * &a_formal)).norm_max()
}

#[test]
fn first_coefficient_of_rank_one_example() {
    let a0 = CMat::diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let b = CMat::unit(2, 0, 1);
    let f = formal_f(&a0, &b, 1).unwrap();
    assert_eq!(f.coeffs[1], CMat::unit(2, 0, 1));
}

#[test]
fn gauge_residual_has_expected_order() {
    let a0 = CMat::diag(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
    let b = bounded(&mut trial_rng(30, 0), 3, 1.0);
    for nterms in [1usize, 3, 5] {
        let f = formal_f(&a0, &b, nterms).unwrap();
        let z = c(1e-2, 0.5e-2);
        let ratio = gauge_residual(&f, &a0, &b, z) / gauge_residual(&f, &a0, &b, z / 2.0);
        let want = 2f64.powi(nterms as i32 - 1);
        assert!((ratio / want - 1.0).abs() < 0.05, "N = {nterms}: ratio {ratio}, want {want}");
    }
}

#[test]
fn diagonal_parts_are_fixed_by_solvability() {
    let a0 = CMat::diag(&[c(0.0, 1.0), c(1.0, 0.0), c(-0.5, -0.5)]);
    let b = bounded(&mut trial_rng(31, 0), 3, 1.0);
    let f = formal_f(&a0, &b, 20).unwrap();
    for (k, fk) in f.coeffs.iter().enumerate().skip(1) {
        for i in 0..3 {
            let rhs: Complex64 = (0..3).filter(|&j| j != i).map(|j| b[(i, j)] * fk[(j, i)]).sum();
            let lhs = fk[(i, i)] * k as f64;
            assert!((lhs - rhs).norm() <= 1e-12 * fk.norm_max().max(1.0) * k as f64, "k = {k}");
        }
    }
}

#[test]
fn coefficient_ratios_grow() {
    let a0 = CMat::diag(&[c(0.0, 1.0), c(0.0, 0.0)]);
    let b = bounded(&mut trial_rng(32, 0), 2, 1.0);
    let f = formal_f(&a0, &b, 61).unwrap();
    let ratio = |k: usize| f.coeffs[k + 1].norm_max() / f.coeffs[k].norm_max();
    // Gevrey-1: the ratio grows roughly like k/|a₁ − a₂|
    assert!(ratio(55) > 5.0 * ratio(5), "{} vs {}", ratio(55), ratio(5));
    let avg = |lo: usize| (lo..lo + 10).map(ratio).sum::<f64>() / 10.0;
    assert!(avg(10) < avg(25) && avg(25) < avg(45));
}

#[test]
fn factorial_series_truncates_at_least_term() {
    let mut coeffs = vec![CMat::identity(2)];
    let mut fact = 1.0;
    for k in 1..=30 {
        fact *= k as f64;
        coeffs.push(CMat::identity(2).scale_re(fact));
    }
    let f = FormalSeriesF { coeffs, trunc_index: 0, min_term: 0.0 };
    let r = 0.1;
    let (nstar, err) = optimal_truncation(&f, r).unwrap();
    let mut best = (0, f64::INFINITY);
    let mut fk = 1.0;
    for k in 1..=30 {
        fk *= k as f64;
        let term = fk * r.powi(k);
        if term < best.1 {
            best = (k, term);
        }
    }
    assert!((nstar as i64 - best.0 as i64).abs() <= 1, "{nstar} vs {}", best.0);
    assert!((9..=11).contains(&nstar));
    assert!((err / best.1 - 1.0).abs() < 1e-12);
}

#[test]
fn least_term_shrinks_with_radius() {
    let a0 = CMat::diag(&[c(0.0, 1.0), c(0.0, 0.0)]);
    let b = bounded(&mut trial_rng(33, 0), 2, 1.0);
    let f = formal_f(&a0, &b, 120).unwrap();
    let (_, e1) = optimal_truncation(&f, 0.2).unwrap();
    let (_, e2) = optimal_truncation(&f, 0.1).unwrap();
    assert!(e2 < e1, "{e2} vs {e1}");
}

#[test]
fn diagonal_frobenius_series_sums_to_exponential() {
    let a = [c(0.0, 2.0), c(0.5, 1.0), c(0.0, 0.0)];
    let a0 = CMat::diag(&a);
    let j = CMat::diag(&[c(0.3, 0.0), c(-0.2, 0.1), c(0.1, 0.4)]);
    let h = frobenius_h(&CMat::identity(3), &j, &a0, 60).unwrap();
    assert_eq!(h.coeffs[0], CMat::identity(3));
    assert!(h.coeffs[1].dist(&a0.scale_re(-1.0)) < 1e-15);
    for z in [c(2.0, 0.0), c(-1.0, 3.0)] {
        let want = CMat::diag(&a.iter().map(|x| (-x / z).exp()).collect::<Vec<_>>());
        assert!(eval_series(&h, &z, 60).unwrap().dist(&want) < 1e-14);
    }
}

/// χ = H(1/z) z^J solves χ′ = (A₀/z² + B/z) χ with B = gJg⁻¹; χ′ from the
/// termwise derivative.
#[test]
fn frobenius_solution_satisfies_ode() {
    let a0 = CMat::diag(&[c(0.0, 2.0), c(0.0, 1.0), c(0.0, 0.0)]);
    for t in 0..5 {
        let mut rng = trial_rng(34, t);
        let j = CMat::diag(&[c(0.31, 0.0), c(-0.2, 0.13), c(0.05, -0.4)]);
        let g = &CMat::identity(3) + &bounded(&mut rng, 3, 0.5);
        let b = &(&g * &j) * &g.inverse().unwrap();
        let h = frobenius_h(&g, &j, &a0, 80).unwrap();
        for r in [2.0, 5.0] {
            let z = Complex64::from_polar(r, 0.7 + t as f64);
            let w = 1.0 / z;
            let mut hv = CMat::zeros(3, 3);
            let mut hd = CMat::zeros(3, 3);
            for (k, ck) in h.coeffs.iter().enumerate() {
                hv = &hv + &ck.map(|x| x * w.powi(k as i32));
                hd = &hd + &ck.map(|x| x * (-(k as f64)) * w.powi(k as i32 + 1));
            }
            let zj = expm(&j.map(|x| x * z.ln())).unwrap();
            let chi = &hv * &zj;
            let dchi = &(&hd * &zj) + &(&(&hv * &zj) * &j.map(|x| x / z));
            let a = &a0.map(|x| x / (z * z)) + &b.map(|x| x / z);
            let res = (&dchi - &(&a * &chi)).norm_max() / chi.norm_max();
            assert!(res < 1e-9, "|z| = {r}: {res}");
        }
    }
}

#[test]
fn horner_agrees_with_power_sum() {
    let a0 = CMat::diag(&[c(0.0, 1.0), c(1.0, 0.0)]);
    let b = bounded(&mut trial_rng(35, 0), 2, 1.0);
    let f = formal_f(&a0, &b, 12).unwrap();
    let z = c(0.05, -0.03);
    let mut naive = CMat::zeros(2, 2);
    for (k, ck) in f.coeffs.iter().enumerate() {
        naive = &naive + &ck.map(|x| x * z.powi(k as i32));
    }
    assert!(eval_series(&f, &z, 12).unwrap().dist(&naive) < 1e-13);
    assert_eq!(eval_series(&f, &c(0.0, 0.0), 12).unwrap(), CMat::identity(2));
}
