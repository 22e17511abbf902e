//! Seeded random matrices. Each trial draws from its own ChaCha stream,
//! selected by the trial index, so trials are reproducible independently.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::mat::CMat;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Standard complex normal: real and imaginary parts N(0, 1/2).
pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Gaussian matrix rescaled to max-abs norm `scale`.
pub fn bounded<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = gaussian(rng, n);
    let m = g.norm_max().max(f64::MIN_POSITIVE);
    g.scale_re(scale / m)
}

pub fn skew_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = gaussian(rng, n);
    let s = (&g - &g.adjoint()).scale_re(0.5);
    let m = s.norm_max().max(f64::MIN_POSITIVE);
    s.scale_re(scale / m)
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = gaussian(rng, n);
    let h = (&g + &g.adjoint()).scale_re(0.5);
    let m = h.norm_max().max(f64::MIN_POSITIVE);
    h.scale_re(scale / m)
}

/// Real antisymmetric matrix with max-abs norm `scale`.
pub fn skew_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = gaussian(rng, n).map(|z| Complex64::new(z.re, 0.0));
    let s = (&g - &g.transpose()).scale_re(0.5);
    let m = s.norm_max().max(f64::MIN_POSITIVE);
    s.scale_re(scale / m)
}

/// Haar unitary: Gram–Schmidt of a Gaussian matrix, with the phases of R's
/// diagonal moved into Q so that R has positive diagonal.
pub fn haar_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = gaussian(rng, n);
    let mut q = CMat::zeros(n, n);
    for j in 0..n {
        let mut v = g.column(j);
        for k in 0..j {
            let qk = q.column(k);
            let proj: Complex64 = (0..n).map(|i| qk[(i, 0)].conj() * v[(i, 0)]).sum();
            v = &v - &qk.scale(&proj);
        }
        let norm = (0..n).map(|i| v[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        q.set_column(j, &v.scale_re(1.0 / norm));
    }
    q
}

/// Unit upper-triangular matrix with strictly upper entries uniform in
/// [−scale, scale] (real) when `real`, complex normal times scale otherwise.
pub fn unit_upper<R: Rng>(rng: &mut R, n: usize, scale: f64, real: bool) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else if i < j {
            if real {
                Complex64::new(rng.random_range(-scale..=scale), 0.0)
            } else {
                complex_normal(rng) * scale
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Diagonal torus element with entries of modulus in [1/2, 2].
pub fn torus<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let d: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(2f64.powf(rng.random_range(-1.0..=1.0)), rng.random_range(-3.0..=3.0)))
        .collect();
    CMat::diag(&d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        let a = gaussian(&mut trial_rng(7, 0), 3);
        let b = gaussian(&mut trial_rng(7, 1), 3);
        let c = gaussian(&mut trial_rng(7, 0), 3);
        assert_eq!(a, c);
        assert_ne!(a, b);
    }

    #[test]
    fn haar_is_unitary() {
        let u = haar_unitary(&mut trial_rng(1, 0), 4);
        assert!((&u.adjoint() * &u).dist(&CMat::identity(4)) < 1e-13);
    }

    #[test]
    fn structured_samples() {
        let mut rng = trial_rng(3, 0);
        let s = skew_hermitian(&mut rng, 3, 1.0);
        assert!((&s + &s.adjoint()).norm_max() < 1e-15);
        let h = hermitian(&mut rng, 3, 1.0);
        assert_eq!(h, h.adjoint());
        let k = skew_symmetric(&mut rng, 3, 1.0);
        assert_eq!(k, k.transpose().scale_re(-1.0));
    }
}
