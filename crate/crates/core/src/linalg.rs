//! Dense kernels on [`CMat`]: spectra, exponentials, big-cell and Iwasawa
//! factorizations, convex-hull membership.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{CMat, Mat};
use crate::plg::GStarPoint;
use crate::scalar::Scalar;

pub(crate) fn to_na(m: &CMat) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub(crate) fn from_na(m: &DMatrix<Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Multiset of eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
}

impl Spectrum {
    /// Minimal-cost matching against `other`; returns the largest matched
    /// gap and the assignment `self[i] ↔ other[perm[i]]`.
    pub fn assignment_distance(&self, other: &Spectrum) -> Result<(f64, Vec<usize>)> {
        let n = self.values.len();
        if other.values.len() != n {
            return Err(Error::Domain("spectra of different sizes".into()));
        }
        if n > 8 {
            return Err(Error::Domain("assignment implemented for n <= 8".into()));
        }
        let cost = |p: &[usize]| -> f64 { (0..n).map(|i| (self.values[i] - other.values[p[i]]).norm()).sum() };
        let mut best: Option<(f64, Vec<usize>)> = None;
        for_each_permutation(n, |p| {
            let c = cost(p);
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, p.to_vec()));
            }
        });
        let perm = best.map(|b| b.1).unwrap_or_default();
        let dist = (0..n).map(|i| (self.values[i] - other.values[perm[i]]).norm()).fold(0.0, f64::max);
        Ok((dist, perm))
    }
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn eig(m: &CMat) -> Result<Spectrum> {
    let n = m.n();
    if !m.is_finite() {
        return Err(Error::Domain("non-finite matrix".into()));
    }
    if n == 1 {
        return Ok(Spectrum { values: vec![m[(0, 0)]] });
    }
    let schur = nalgebra::Schur::try_new(to_na(m), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(Spectrum { values: (0..n).map(|i| t[(i, i)]).collect() })
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm_generic<T: Scalar>(m: &Mat<T>) -> Mat<T> {
    let n = m.n();
    let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].abs() == 0.0));
    if is_diag {
        return Mat::diag(&m.diagonal().iter().map(|d| d.exp()).collect::<Vec<_>>());
    }
    let norm = m.norm_max() * n as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m.scale(&T::from_f64(0.5f64.powi(s)));
    let mut term = Mat::identity(n);
    let mut sum = Mat::identity(n);
    let tol = T::eps();
    for k in 1..200 {
        term = (&term * &a).scale(&T::from_f64(1.0 / k as f64));
        sum = &sum + &term;
        if term.norm_max() <= tol * sum.norm_max() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn expm(m: &CMat) -> Result<CMat> {
    if !m.is_finite() {
        return Err(Error::Domain("non-finite matrix".into()));
    }
    let e = expm_generic(m);
    if !e.is_finite() {
        return Err(Error::Numerical("overflow in matrix exponential".into()));
    }
    Ok(e)
}

fn hermitian_defect(m: &CMat) -> f64 {
    m.dist(&m.adjoint()) / m.norm_max().max(f64::MIN_POSITIVE)
}

/// Unique Hermitian logarithm of a positive-definite Hermitian matrix.
pub fn logm_hermitian(m: &CMat) -> Result<CMat> {
    if hermitian_defect(m) > 1e-10 {
        return Err(Error::Domain("matrix is not Hermitian".into()));
    }
    let h = to_na(&(m + &m.adjoint()).scale_re(0.5));
    let eig = h.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Domain("matrix is not positive definite".into()));
    }
    let u = from_na(&eig.eigenvectors);
    let d = CMat::diag(&eig.eigenvalues.iter().map(|l| Complex64::new(l.ln(), 0.0)).collect::<Vec<_>>());
    Ok(&(&u * &d) * &u.adjoint())
}

/// Leading principal minors τ_1..τ_n.
pub fn leading_minors(m: &CMat) -> Vec<Complex64> {
    let n = m.n();
    (1..=n)
        .map(|k| CMat::from_fn(k, k, |i, j| m[(i, j)]).det().unwrap_or(Complex64::new(0.0, 0.0)))
        .collect()
}

/// Factor `g = b₋⁻¹ b₊` with δ(b₋)δ(b₊) = 1 and δ(b₊) = exp(πiΛ).
pub fn big_cell_factor(g: &CMat) -> Result<GStarPoint> {
    let n = g.n();
    let scale = g.norm_max().max(f64::MIN_POSITIVE);
    // Doolittle: g = L U with L unit lower.
    let mut l = CMat::identity(n);
    let mut u = CMat::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let s: Complex64 = (0..k).map(|m| l[(k, m)] * u[(m, j)]).sum();
            u[(k, j)] = g[(k, j)] - s;
        }
        if u[(k, k)].norm() <= 1e-14 * scale * n as f64 {
            return Err(Error::NotInBigCell { k: k + 1 });
        }
        for i in k + 1..n {
            let s: Complex64 = (0..k).map(|m| l[(i, m)] * u[(m, k)]).sum();
            l[(i, k)] = (g[(i, k)] - s) / u[(k, k)];
        }
    }
    let i_pi = Complex64::new(0.0, PI);
    let lambda: Vec<Complex64> = (0..n).map(|k| u[(k, k)].ln() / (i_pi * 2.0)).collect();
    let d: Vec<Complex64> = lambda.iter().map(|x| (i_pi * x).exp()).collect();
    let dinv = CMat::diag(&d.iter().map(|x| x.inv()).collect::<Vec<_>>());
    let b_plus = &dinv * &u;
    let b_minus = &dinv * &l.inverse()?;
    Ok(GStarPoint { b_minus: b_minus.lower(), b_plus: b_plus.upper(), lambda: CMat::diag(&lambda) })
}

/// Iwasawa decomposition `g = k a n`: k unitary, a positive diagonal, n unit upper triangular.
pub fn iwasawa(g: &CMat) -> Result<(CMat, CMat, CMat)> {
    let n = g.n();
    let qr = to_na(g).qr();
    let (q, r) = (from_na(&qr.q()), from_na(&qr.r()));
    let scale = g.norm_max().max(f64::MIN_POSITIVE);
    let mut phase = vec![Complex64::new(1.0, 0.0); n];
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let rii = r[(i, i)];
        if rii.norm() <= 1e-14 * scale * n as f64 {
            return Err(Error::Domain("singular matrix has no Iwasawa decomposition".into()));
        }
        phase[i] = rii / rii.norm();
        a[i] = Complex64::new(rii.norm(), 0.0);
    }
    let k = &q * &CMat::diag(&phase);
    let nmat = CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else if i < j {
            r[(i, j)] / (phase[i] * a[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok((k, CMat::diag(&a), nmat))
}

/// Iwasawa projection δ̂(g) = log(a), as a real vector.
pub fn iwasawa_log_a(g: &CMat) -> Result<Vec<f64>> {
    let (_, a, _) = iwasawa(g)?;
    Ok(a.diagonal().iter().map(|x| x.re.ln()).collect())
}

/// Non-negative least squares, Lawson–Hanson active set.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.ncols();
    let mut w = DVector::zeros(m);
    let mut passive = vec![false; m];
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    for _ in 0..3 * m + 10 {
        let grad = a.transpose() * (b - a * &w);
        let cand = (0..m).filter(|&j| !passive[j]).max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        match cand {
            Some(t) if grad[t] > tol => passive[t] = true,
            _ => break,
        }
        loop {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let ap = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
            let sp = ap.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(idx.len()));
            if sp.iter().all(|&x| x > 0.0) {
                w.fill(0.0);
                for (k, &j) in idx.iter().enumerate() {
                    w[j] = sp[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if sp[k] <= 0.0 {
                    alpha = alpha.min(w[j] / (w[j] - sp[k]));
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                w[j] += alpha * (sp[k] - w[j]);
                if w[j] <= 1e-15 {
                    w[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    w
}

/// Whether `x` lies within `tol` (max-abs) of the convex hull of `points`.
pub fn hull_contains(points: &[Vec<f64>], x: &[f64], tol: f64) -> Result<bool> {
    let d = x.len();
    if points.is_empty() || points.iter().any(|p| p.len() != d) {
        return Err(Error::Domain("hull points and query must share a dimension".into()));
    }
    let m = points.len();
    let weight = 1e3 * points.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    let a = DMatrix::from_fn(d + 1, m, |i, j| if i < d { points[j][i] } else { weight });
    let b = DVector::from_fn(d + 1, |i, _| if i < d { x[i] } else { weight });
    let w = nnls(&a, &b);
    let total: f64 = w.sum();
    if total <= 0.0 {
        return Ok(false);
    }
    let gap = (0..d)
        .map(|i| ((0..m).map(|j| w[j] * points[j][i]).sum::<f64>() / total - x[i]).abs())
        .fold(0.0, f64::max);
    Ok(gap <= tol)
}

/// Smallest singular value of a real matrix.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}
