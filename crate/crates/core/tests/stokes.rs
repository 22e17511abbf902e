use std::f64::consts::{PI, TAU};

use monodromy::harness::sampling::{bounded, haar_unitary, skew_hermitian, skew_symmetric, torus, trial_rng};
use monodromy::linalg::expm;
use monodromy::plg::{herm_involution, torus_act};
use monodromy::stokes::*;
use monodromy::{CMat, Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn imaginary_type(n: usize) -> IrregularType {
    IrregularType::new((0..n).map(|k| c(0.0, (n - 1 - k) as f64)).collect()).unwrap()
}

fn default_run(a: &IrregularType, b: &CMat) -> StokesData {
    stokes_data(a, b, &BranchChoice::default_for(a), &StokesConfig::default()).unwrap()
}

fn e2pi(m: &CMat) -> CMat {
    expm(&m.map(|x| x * c(0.0, TAU))).unwrap()
}

#[test]
fn imaginary_pair_directions_are_the_imaginary_axis() {
    let a = IrregularType::new(vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
    let g = sector_geometry(&a, &BranchChoice { sector0_ray: 0.0, log_base: 0.0 }).unwrap();
    assert_eq!(g.l, 1);
    assert!((g.dirs[0] - PI / 2.0).abs() < 1e-15);
    assert!((g.dirs[1] - 3.0 * PI / 2.0).abs() < 1e-15);
}

#[test]
fn real_pair_directions() {
    let a = IrregularType::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let g = sector_geometry(&a, &BranchChoice { sector0_ray: 0.5, log_base: 0.5 }).unwrap();
    assert!((g.dirs[0] - PI).abs() < 1e-15);
    assert!((g.dirs[1] - TAU).abs() < 1e-15);
}

#[test]
fn three_point_geometry_matches_enumeration() {
    let a = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
    let it = IrregularType::new(a.clone()).unwrap();
    let ray = 0.3;
    let g = sector_geometry(&it, &BranchChoice { sector0_ray: ray, log_base: ray }).unwrap();

    // all arg(ai − aj), brought into (ray, ray + 2π) and sorted
    let mut want: Vec<f64> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let d = a[i] - a[j];
                let mut t = d.im.atan2(d.re);
                while t <= ray {
                    t += TAU;
                }
                while t > ray + TAU {
                    t -= TAU;
                }
                want.push(t);
            }
        }
    }
    want.sort_by(f64::total_cmp);
    assert_eq!(want.len(), 6);
    for (x, y) in g.dirs.iter().zip(&want) {
        assert!((x - y).abs() < 1e-14);
    }

    // rank 0 is the most recessive exponential e^{−ai/z} along θ
    let z = Complex64::from_polar(1e-2, g.theta);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| (-a[i] / z).exp().norm().total_cmp(&(-a[j] / z).exp().norm()));
    for (rank, &i) in order.iter().enumerate() {
        assert_eq!(g.perm[i], rank);
        assert_eq!(g.p[(i, rank)], c(1.0, 0.0));
    }
}

#[test]
fn ray_on_a_direction_is_rejected() {
    let a = IrregularType::new(vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
    let br = BranchChoice { sector0_ray: PI / 2.0, log_base: PI / 2.0 };
    assert!(matches!(sector_geometry(&a, &br), Err(Error::Domain(_))));
}

#[test]
fn forward_then_reverse_transport() {
    let a0 = CMat::diag(&[c(0.0, 1.0), c(0.0, 0.0), c(0.5, -1.0)]);
    let b = bounded(&mut trial_rng(11, 0), 3, 1.0);
    let y0 = CMat::identity(3);
    let tol = 1e-13;
    let path = PathSpec::new(0.3, 0.2).radial(2.0).arc(2.5).radial(1.0);
    let y1 = transport(&a0, &b, &y0, &path, tol).unwrap();
    let back = transport(&a0, &b, &y1, &path.reversed(), tol).unwrap();
    assert!(back.dist(&y0) <= 10.0 * tol * y1.norm_max().max(1.0), "{}", back.dist(&y0));
}

#[test]
fn diagonal_b_canonical_solution_is_exact() {
    let a = imaginary_type(3);
    let b = CMat::diag(&[c(0.2, 0.1), c(-0.3, 0.0), c(0.1, -0.4)]);
    let br = BranchChoice::default_for(&a);
    let g = sector_geometry(&a, &br).unwrap();
    for (idx, theta) in [(0, g.bisector0()), (g.l, g.bisector_l())] {
        let (z, val) = canonical_solution(&a, &b, idx, 0.05, &g, &br).unwrap();
        let arg = theta + br.frame_offset() - if idx == 0 { 0.0 } else { TAU };
        let logz = c(0.05f64.ln(), arg);
        let want = CMat::diag(&(0..3).map(|j| (b[(j, j)] * logz - a.a[j] / z).exp()).collect::<Vec<_>>());
        assert!(val.dist(&want) <= 1e-13 * want.norm_max());
    }
}

#[test]
fn canonical_solution_is_continuous_in_b() {
    let a = imaginary_type(2);
    let d = CMat::diag(&[c(0.2, 0.0), c(-0.1, 0.0)]);
    let br = BranchChoice::default_for(&a);
    let g = sector_geometry(&a, &br).unwrap();
    let (_, exact) = canonical_solution(&a, &d, 0, 0.05, &g, &br).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let b = &d + &CMat::from_fn(2, 2, |i, j| if i == j { c(0.0, 0.0) } else { c(eps, 0.0) });
        let (_, v) = canonical_solution(&a, &b, 0, 0.05, &g, &br).unwrap();
        let gap = (&v.inverse().unwrap() * &exact).dist(&CMat::identity(2));
        assert!(gap < prev && gap < 10.0 * eps);
        prev = gap;
    }
}

#[test]
fn diagonal_b_has_trivial_stokes_data() {
    for n in 2..=3 {
        let a = imaginary_type(n);
        let b = CMat::diag(&(0..n).map(|k| c(0.1 * k as f64 - 0.2, 0.05 * k as f64)).collect::<Vec<_>>());
        let sd = default_run(&a, &b);
        let id = CMat::identity(n);
        assert!(sd.s_plus.dist(&id) < 1e-13);
        assert!(sd.s_minus.dist(&id) < 1e-13);
        assert!(sd.lambda.dist(&(&(&sd.p.transpose() * &b) * &sd.p)) == 0.0);
        assert!(sd.m0.dist(&e2pi(&b)) < 1e-14);
        assert!(sd.c.as_ref().unwrap().dist(&id) < 1e-12);
        assert!(monodromy_residual(&sd, &b).unwrap() < 1e-13);
    }
}

#[test]
fn trace_identity_for_two_by_two() {
    let a = imaginary_type(2);
    for t in 0..5 {
        let b = bounded(&mut trial_rng(21, t), 2, 1.0);
        let sd = default_run(&a, &b);
        assert_eq!(sd.p, CMat::identity(2));
        let l = sd.lambda.diagonal();
        let e = |x: Complex64| (x * c(0.0, TAU)).exp();
        let tr = e2pi(&b).trace();
        let want = (tr - e(l[0]) - e(l[1])) / e(l[1]);
        let got = sd.s_plus[(0, 1)] * sd.s_minus[(1, 0)];
        assert!((got - want).norm() <= 1e-7 * want.norm().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn skew_hermitian_b_gives_adjoint_stokes_pair() {
    for n in 2..=3 {
        let a = imaginary_type(n);
        let b = skew_hermitian(&mut trial_rng(5, n as u64), n, 1.0);
        let sd = default_run(&a, &b);
        assert_eq!(sd.p, CMat::identity(n));
        let want = &(&e2pi(&sd.lambda) * &sd.s_plus.adjoint()) * &e2pi(&sd.lambda.scale_re(-1.0));
        assert!(sd.s_minus.dist(&want) < 1e-7, "{}", sd.s_minus.dist(&want));
    }
}

#[test]
fn random_b_residuals() {
    for n in 2..=3 {
        let a = imaginary_type(n);
        for t in 0..5 {
            let b = bounded(&mut trial_rng(31, t), n, 1.0);
            let sd = default_run(&a, &b);
            let r = &sd.residuals;
            assert!(r.off_triangle_plus <= 1e-8 && r.off_triangle_minus <= 1e-8);
            assert!(r.monodromy_spectrum <= 1e-7);
            assert!(r.monodromy_direct.unwrap() <= 1e-6);
            assert!(r.connection_drift.unwrap() <= 1e-8);
        }
    }
}

#[test]
fn corrupted_stokes_matrix_fails_the_certificate() {
    let a = imaginary_type(3);
    let b = bounded(&mut trial_rng(41, 0), 3, 1.0);
    let mut sd = default_run(&a, &b);
    sd.s_plus[(0, 2)] += c(1e-2, 0.0);
    assert!(monodromy_residual(&sd, &b).unwrap() > 1e-3);
}

#[test]
fn torus_equivariance() {
    let a = imaginary_type(3);
    let mut rng = trial_rng(51, 0);
    let b = bounded(&mut rng, 3, 1.0);
    let t = torus(&mut rng, 3);
    let tb = &(&t * &b) * &t.inverse().unwrap();
    let sd = default_run(&a, &b);
    let sd_t = default_run(&a, &tb);
    let s = &(&sd.p.transpose() * &t) * &sd.p;
    let si = s.inverse().unwrap();
    assert!(sd_t.s_plus.dist(&(&(&s * &sd.s_plus) * &si)) < 1e-8);
    assert!(sd_t.s_minus.dist(&(&(&s * &sd.s_minus) * &si)) < 1e-8);
    assert!(sd_t.lambda.dist(&sd.lambda) < 1e-15);

    let br = BranchChoice::default_for(&a);
    let cfg = StokesConfig::default();
    let lhs = nu(&tb, &a, &br, &cfg).unwrap();
    let rhs = torus_act(&t, &nu(&b, &a, &br, &cfg).unwrap()).unwrap();
    assert!(lhs.dist(&rhs) < 1e-8);
}

#[test]
fn halving_the_radius_stays_within_bounds() {
    let a = imaginary_type(3);
    let b = bounded(&mut trial_rng(61, 0), 3, 1.0);
    let br = BranchChoice::default_for(&a);
    let full = stokes_data(&a, &b, &br, &StokesConfig::default()).unwrap();
    let half = stokes_data(&a, &b, &br, &StokesConfig { radius_scale: 0.5, ..Default::default() }).unwrap();
    let gap = full.s_plus.dist(&half.s_plus).max(full.s_minus.dist(&half.s_minus));
    let bound = full.residuals.certified_bound().max(half.residuals.certified_bound());
    let scale = full.s_plus.norm_max().max(full.s_minus.norm_max());
    assert!(gap <= 100.0 * bound * scale, "{gap} vs {bound}");
}

#[test]
fn nu_of_diagonal_b() {
    let a = imaginary_type(2);
    let b = CMat::diag(&[c(0.3, 0.1), c(-0.2, 0.0)]);
    let p = nu(&b, &a, &BranchChoice::default_for(&a), &StokesConfig::default()).unwrap();
    let ipi = c(0.0, PI);
    assert!(p.b_minus.dist(&expm(&b.map(|x| -x * ipi)).unwrap()) < 1e-13);
    assert!(p.b_plus.dist(&expm(&b.map(|x| x * ipi)).unwrap()) < 1e-13);
    assert_eq!(p.lambda, b);
}

#[test]
fn skew_hermitian_b_lands_in_kstar() {
    for n in 2..=3 {
        let a = imaginary_type(n);
        let b = skew_hermitian(&mut trial_rng(71, n as u64), n, 1.0);
        let p = nu(&b, &a, &BranchChoice::default_for(&a), &StokesConfig::default()).unwrap();
        assert!(herm_involution(&p).unwrap().dist(&p) < 1e-8);
        p.to_kstar(1e-8).unwrap();
    }
}

#[test]
fn skew_symmetric_b_lands_on_the_symmetric_fixed_set() {
    let a = imaginary_type(3);
    let b = skew_symmetric(&mut trial_rng(81, 0), 3, 1.0);
    let p = nu(&b, &a, &BranchChoice::default_for(&a), &StokesConfig::default()).unwrap();
    assert_eq!(p.lambda.norm_max(), 0.0);
    assert!(p.b_minus.dist(&p.b_plus.transpose()) < 1e-8);
}

#[test]
fn connection_matrix_trivial_and_unitary() {
    let a = imaginary_type(3);
    let br = BranchChoice::default_for(&a);
    let cfg = StokesConfig::default();
    let j = CMat::diag(&[c(0.1, 0.0), c(0.0, 0.2), c(-0.3, 0.0)]);
    let cm = connection_matrix(&CMat::identity(3), &j, &a, &br, &cfg).unwrap();
    assert!(cm.dist(&CMat::identity(3)) < 1e-12);

    let mut rng = trial_rng(91, 0);
    let g = haar_unitary(&mut rng, 3);
    let j = skew_hermitian(&mut rng, 3, 0.8);
    let cm = connection_matrix(&g, &j, &a, &br, &cfg).unwrap();
    assert!((&cm.adjoint() * &cm).dist(&CMat::identity(3)) < 1e-7);
}

#[test]
fn connection_matrix_right_twist() {
    let a = imaginary_type(3);
    let br = BranchChoice::default_for(&a);
    let cfg = StokesConfig::default();
    let mut rng = trial_rng(101, 0);
    let g = bounded(&mut rng, 3, 1.0);
    let g = &g + &CMat::identity(3).scale_re(2.0);
    let j = bounded(&mut rng, 3, 0.5);
    let h = &bounded(&mut rng, 3, 0.5) + &CMat::identity(3);
    let hi = h.inverse().unwrap();
    let (p1, c1, _) = nu_hat(&g, &j, &a, &br, &cfg).unwrap();
    let (p2, c2, _) = nu_hat(&(&g * &hi), &(&(&h * &j) * &hi), &a, &br, &cfg).unwrap();
    assert!(p1.dist(&p2) < 1e-8);
    assert!(c2.dist(&(&c1 * &hi)) < 1e-8 * c1.norm_max().max(1.0));
}

#[test]
fn non_generic_j_is_rejected() {
    let a = imaginary_type(2);
    let j = CMat::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let r = nu_hat(&CMat::identity(2), &j, &a, &BranchChoice::default_for(&a), &StokesConfig::default());
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn generic_irregular_type_uses_extended_precision() {
    let a = IrregularType::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    let b = bounded(&mut trial_rng(111, 0), 3, 1.0);
    let sd = default_run(&a, &b);
    assert!(sd.residuals.precision_bits > 53);
    assert!(sd.residuals.monodromy_spectrum < 1e-10);
    assert!(sd.residuals.monodromy_direct.unwrap() < 1e-10);
}

#[test]
fn one_dimensional_case() {
    let a = IrregularType::new(vec![c(0.0, 1.0)]).unwrap();
    let b = CMat::diag(&[c(0.3, -0.2)]);
    let sd = default_run(&a, &b);
    assert_eq!(sd.s_plus, CMat::identity(1));
    assert_eq!(sd.s_minus, CMat::identity(1));
    assert!(sd.c.unwrap().dist(&CMat::identity(1)) < 1e-12);
}
