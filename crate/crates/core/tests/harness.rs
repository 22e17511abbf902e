use std::f64::consts::PI;

use monodromy::harness::checks::{
    check_casimir_jacobi, check_convexity, check_du, check_duistermaat, check_gw, check_poisson, check_poisson_with,
};
use monodromy::harness::jacobian::jacobian_nu;
use monodromy::harness::sampling::{bounded, trial_rng};
use monodromy::harness::RunConfig;
use monodromy::plg::DualPair;
use monodromy::stokes::{nu, nu_hat, BranchChoice, StokesConfig};
use monodromy::{CMat, Complex64};

fn cfg(dims: Vec<usize>, trials: usize) -> RunConfig {
    RunConfig { dims, trials, ..RunConfig::default() }
}

fn i_pi() -> Complex64 {
    Complex64::new(0.0, PI)
}

#[test]
fn jacobian_in_dimension_one_is_closed_form() {
    let run = cfg(vec![1], 1);
    let a = run.irregular_type(1).unwrap();
    let b = CMat::diag(&[Complex64::new(0.3, -0.2)]);
    let jac = jacobian_nu(&b, &a, &BranchChoice::default_for(&a), 1e-5, &StokesConfig::default()).unwrap();
    let col = &jac.columns[0];
    assert!((col.z_plus[(0, 0)] - i_pi()).norm() < 1e-9);
    assert!((col.z_minus[(0, 0)] + i_pi()).norm() < 1e-9);
}

fn dual_dist(a: &DualPair, b: &DualPair) -> f64 {
    a.z_minus.dist(&b.z_minus).max(a.z_plus.dist(&b.z_plus))
}

#[test]
fn jacobian_diagonal_directions_and_holomorphy() {
    let run = cfg(vec![2], 1);
    let a = run.irregular_type(2).unwrap();
    let br = BranchChoice::default_for(&a);
    let b = bounded(&mut trial_rng(50, 0), 2, 0.8);
    let jac = jacobian_nu(&b, &a, &br, 1e-5, &StokesConfig::default()).unwrap();
    assert!(jac.richardson < 1e-4);
    // default A₀ = i·diag(1, 0) has P = I, so Λ̇ = δ(Ḃ)
    for k in 0..2 {
        let col = jac.apply(&CMat::unit(2, k, k));
        let lam_dot = col.z_plus.diag_part().map(|d| d / i_pi());
        assert!(lam_dot.dist(&CMat::unit(2, k, k)) < 1e-7, "{}", lam_dot.dist(&CMat::unit(2, k, k)));
    }
    let e = CMat::unit(2, 0, 1);
    let d1 = jac.apply(&e);
    let di = jac.apply(&e.map(|x| x * Complex64::new(0.0, 1.0)));
    let rotated = DualPair { z_minus: d1.z_minus.map(|x| x * Complex64::new(0.0, 1.0)), z_plus: d1.z_plus.map(|x| x * Complex64::new(0.0, 1.0)) };
    assert!(dual_dist(&di, &rotated) < 1e-6);
    // ν is holomorphic: the same relation for independent finite differences in the i·E direction
    let h = 1e-5;
    let cfgs = StokesConfig::default();
    let fwd = nu(&(&b + &e.map(|x| x * Complex64::new(0.0, h))), &a, &br, &cfgs).unwrap();
    let bwd = nu(&(&b - &e.map(|x| x * Complex64::new(0.0, h))), &a, &br, &cfgs).unwrap();
    let p = &jac.point;
    let zp = (&p.b_plus.inverse().unwrap() * &(&fwd.b_plus - &bwd.b_plus)).scale_re(0.5 / h);
    assert!(zp.upper().dist(&rotated.z_plus) < 1e-6);
}

#[test]
fn poisson_check_passes_and_rejects_wrong_constant() {
    let run = cfg(vec![2], 4);
    let r = check_poisson(&run).unwrap();
    assert!(r.passed, "{}", r.summary());
    let k = r.resolved_constants["poisson"];
    assert!((k - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12 || (k + Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    let wrong = check_poisson_with(&run, Some(i_pi())).unwrap();
    assert!(!wrong.passed);
}

#[test]
fn poisson_check_in_dimension_one_is_zero() {
    let r = check_poisson(&cfg(vec![1], 3)).unwrap();
    assert!(r.passed);
    assert!(r.details.iter().all(|d| d.error < 1e-9));
}

#[test]
fn gw_diagonal_example() {
    let run = cfg(vec![2], 1);
    let a = run.irregular_type(2).unwrap();
    let b = CMat::diag(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]);
    let p = nu(&b, &a, &BranchChoice::default_for(&a), &StokesConfig::default()).unwrap();
    let k = p.to_kstar(1e-12).unwrap();
    for i in 0..2 {
        let want = (i_pi() * b[(i, i)]).exp();
        assert!((k.b[(i, i)] - want).norm() < 1e-14 && want.im.abs() < 1e-15 && want.re > 0.0);
    }
    assert!(k.b[(0, 1)].norm() < 1e-14);
    let r = check_gw(&cfg(vec![2], 3)).unwrap();
    assert!(r.passed, "{}", r.summary());
    assert!((r.resolved_constants["gw"].re.abs() - PI).abs() < 1e-12);
}

#[test]
fn gw_needs_imaginary_irregular_type() {
    let mut run = cfg(vec![2], 1);
    run.n = 2;
    run.a0 = Some(vec![[1.0, 0.0], [0.0, 0.0]]);
    assert!(check_gw(&run).is_err());
}

#[test]
fn duistermaat_trivial_cases() {
    let run = cfg(vec![2], 1);
    let a = run.irregular_type(2).unwrap();
    let br = BranchChoice::default_for(&a);
    let id = CMat::identity(2);
    let (_, c, _) = nu_hat(&id, &CMat::zeros(2, 2), &a, &br, &StokesConfig::default()).unwrap();
    assert!(c.dist(&id) < 1e-13);
    let x = CMat::diag(&[Complex64::new(0.4, 0.0), Complex64::new(-0.7, 0.0)]);
    let (_, c, _) = nu_hat(&id, &x.map(|v| v / i_pi()), &a, &br, &StokesConfig::default()).unwrap();
    assert!(c.dist(&id) < 1e-13);
    let r = check_duistermaat(&cfg(vec![3], 2)).unwrap();
    assert!(r.passed, "{}", r.summary());
}

#[test]
fn convexity_trace_and_segment() {
    let run = RunConfig { dims: vec![2], samples: 50, ..RunConfig::default() };
    let (r, samples, polys) = check_convexity(&run).unwrap();
    assert!(r.passed);
    let v = &polys[0].vertices;
    let tr: f64 = v[0].iter().sum();
    for s in &samples {
        assert!((s.coords.iter().sum::<f64>() - tr).abs() < 1e-12);
        // on the segment between the two vertices
        let lo = v[0][0].min(v[1][0]);
        let hi = v[0][0].max(v[1][0]);
        assert!(s.coords[0] >= lo - 1e-12 && s.coords[0] <= hi + 1e-12);
    }
    assert!(monodromy::linalg::hull_contains(v, &v[1], 1e-9).unwrap());
}

#[test]
fn du_and_casimir_checks_pass() {
    let r = check_du(&cfg(vec![3, 4], 3)).unwrap();
    assert!(r.passed, "{}", r.summary());
    let r = check_casimir_jacobi(&cfg(vec![1, 2, 3], 3)).unwrap();
    assert!(r.passed, "{}", r.summary());
}
