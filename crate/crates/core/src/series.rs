//! The formal gauge series F̂ at z = 0 and the convergent Frobenius series
//! H at z = ∞.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig, expm_generic};
use crate::mat::{CMat, Mat};
use crate::scalar::Scalar;

/// Hard cap on stored coefficients of F̂.
pub const MAX_TERMS: usize = 400;

/// Truncated F̂ = Σ F_k z^k.
#[derive(Clone, Debug)]
pub struct FormalSeriesF<T = Complex64> {
    pub coeffs: Vec<Mat<T>>,
    pub trunc_index: usize,
    pub min_term: f64,
}

/// Ĥ = Σ H_k z^{-k} with H₀ = g, for the residue J dz/z at ∞.
#[derive(Clone, Debug)]
pub struct FrobeniusSeriesH<T = Complex64> {
    pub coeffs: Vec<Mat<T>>,
    pub g: Mat<T>,
    pub j: Mat<T>,
}

fn check_distinct<T: Scalar>(a0: &[T]) -> Result<()> {
    for i in 0..a0.len() {
        for j in 0..i {
            if (a0[i].clone() - a0[j].clone()).abs() == 0.0 {
                return Err(Error::Domain("A0 eigenvalues must be pairwise distinct".into()));
            }
        }
    }
    Ok(())
}

/// Coefficients F₀..F_N of the gauge series removing the holomorphic part of
/// (A₀/z² + B/z)dz.
pub fn formal_f_generic<T: Scalar>(a0: &[T], b: &Mat<T>, n_max: usize) -> Result<FormalSeriesF<T>> {
    let n = a0.len();
    if b.rows() != n || !b.is_square() {
        return Err(Error::Domain("B and A0 dimensions differ".into()));
    }
    if n_max < 1 {
        return Err(Error::Domain("need at least one coefficient beyond F0".into()));
    }
    if n_max > MAX_TERMS {
        return Err(Error::PrecisionBudget(format!("{n_max} coefficients requested, cap is {MAX_TERMS}")));
    }
    check_distinct(a0)?;
    let mut coeffs: Vec<Mat<T>> = vec![Mat::identity(n)];
    for k in 1..=n_max {
        let prev = &coeffs[k - 1];
        let kf = T::from_f64((k - 1) as f64);
        let mut f = Mat::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                // ((k−1)F − B F + F δ(B))_{ij}
                let mut s = kf.clone() * prev[(i, j)].clone() + prev[(i, j)].clone() * b[(j, j)].clone();
                for m in 0..n {
                    s = s - b[(i, m)].clone() * prev[(m, j)].clone();
                }
                f[(i, j)] = s / (a0[i].clone() - a0[j].clone());
            }
        }
        let kk = T::from_f64(k as f64);
        for i in 0..n {
            let mut s = T::zero();
            for j in 0..n {
                if j != i {
                    s = s + b[(i, j)].clone() * f[(j, i)].clone();
                }
            }
            f[(i, i)] = s / kk.clone();
        }
        if f.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite coefficient F_{k}")));
        }
        coeffs.push(f);
    }
    Ok(FormalSeriesF { coeffs, trunc_index: n_max + 1, min_term: 0.0 })
}

pub fn formal_f(a0: &CMat, b: &CMat, n_max: usize) -> Result<FormalSeriesF> {
    formal_f_generic(&a0.diagonal(), b, n_max)
}

/// ‖F_k‖ r^k, with r^k formed in T so that huge coefficients stay finite
/// in extended precision.
fn term_sizes<T: Scalar>(coeffs: impl Iterator<Item = Mat<T>>, r: f64) -> Vec<f64> {
    let rt = T::from_f64(r);
    let mut pow = T::one();
    coeffs
        .map(|c| {
            let s = c.scale(&pow).norm_max();
            pow = pow.clone() * rt.clone();
            s
        })
        .collect()
}

/// Least-term rule on a sequence of term sizes ‖F_k‖ r^k, k ≥ 1.
fn least_term(sizes: &[f64]) -> Result<(usize, f64)> {
    let mut best = (1, sizes[1]);
    for (k, &s) in sizes.iter().enumerate().skip(1) {
        if s < best.1 {
            best = (k, s);
        }
    }
    let increasing = sizes[1] > 0.0 && sizes.windows(2).skip(1).all(|w| w[1] > w[0]);
    if increasing {
        return Err(Error::RadiusTooLarge);
    }
    Ok(best)
}

/// N* = argmin_{k≥1} ‖F_k‖ r^k and that minimum. The optimally truncated
/// sum keeps F₀..F_{N*−1}.
pub fn optimal_truncation<T: Scalar>(f: &FormalSeriesF<T>, r: f64) -> Result<(usize, f64)> {
    if f.coeffs.len() < 3 || r <= 0.0 {
        return Err(Error::Domain("need at least 3 coefficients and r > 0".into()));
    }
    least_term(&term_sizes(f.coeffs.iter().map(|c| c.clone()), r))
}

/// Least-term rule restricted to column `j` of F̂.
pub fn optimal_truncation_column<T: Scalar>(f: &FormalSeriesF<T>, j: usize, r: f64) -> Result<(usize, f64)> {
    if f.coeffs.len() < 3 || r <= 0.0 {
        return Err(Error::Domain("need at least 3 coefficients and r > 0".into()));
    }
    least_term(&term_sizes(f.coeffs.iter().map(|c| c.column(j)), r))
}

/// Attach the optimal truncation at radius `r`.
pub fn with_truncation<T: Scalar>(mut f: FormalSeriesF<T>, r: f64) -> Result<FormalSeriesF<T>> {
    let (k, m) = optimal_truncation(&f, r)?;
    f.trunc_index = k;
    f.min_term = m;
    Ok(f)
}

fn j_in_g_double_prime(j: &CMat) -> Result<()> {
    let ev = eig(j)?.values;
    for a in 0..ev.len() {
        for b in 0..ev.len() {
            let d = ev[a] - ev[b];
            let k = d.re.round();
            if a != b && k != 0.0 && (d - Complex64::new(k, 0.0)).norm() < 1e-8 {
                return Err(Error::Domain(format!("eigenvalues of J differ by the integer {k}")));
            }
        }
    }
    Ok(())
}

/// Solve (B + k)X − X J = R through the n²×n² Kronecker system.
fn sylvester<T: Scalar>(b: &Mat<T>, j: &Mat<T>, k: f64, r: &Mat<T>) -> Result<Mat<T>> {
    let n = b.n();
    let nn = n * n;
    let mut m: Mat<T> = Mat::zeros(nn, nn);
    for i in 0..n {
        for c in 0..n {
            let row = i * n + c;
            for q in 0..n {
                let t = m[(row, q * n + c)].clone() + b[(i, q)].clone();
                m[(row, q * n + c)] = t;
                let t = m[(row, i * n + q)].clone() - j[(q, c)].clone();
                m[(row, i * n + q)] = t;
            }
            let t = m[(row, row)].clone() + T::from_f64(k);
            m[(row, row)] = t;
        }
    }
    let rhs = Mat::from_fn(nn, 1, |p, _| r[(p / n, p % n)].clone());
    let x = m.solve(&rhs).map_err(|e| Error::Numerical(format!("Sylvester solve at order {k}: {e}")))?;
    Ok(Mat::from_fn(n, n, |p, q| x[(p * n + q, 0)].clone()))
}

pub fn frobenius_h_generic<T: Scalar>(g: &Mat<T>, j: &Mat<T>, a0: &[T], k_max: usize) -> Result<FrobeniusSeriesH<T>> {
    j_in_g_double_prime(&j.to_c64())?;
    let n = a0.len();
    if g.n() != n || j.n() != n {
        return Err(Error::Domain("g, J and A0 dimensions differ".into()));
    }
    let b = &(g * j) * &g.inverse()?;
    let a = Mat::diag(a0);
    let mut coeffs = vec![g.clone()];
    for k in 1..=k_max {
        let rhs = -(&a * &coeffs[k - 1]);
        coeffs.push(sylvester(&b, j, k as f64, &rhs)?);
    }
    Ok(FrobeniusSeriesH { coeffs, g: g.clone(), j: j.clone() })
}

pub fn frobenius_h(g: &CMat, j: &CMat, a0: &CMat, k_max: usize) -> Result<FrobeniusSeriesH> {
    frobenius_h_generic(g, j, &a0.diagonal(), k_max)
}

/// Number of H terms so that the tail at |w| = `w0` falls below `tol`
/// relative to the partial sum, checked by doubling.
pub fn frobenius_h_adaptive<T: Scalar>(
    g: &Mat<T>,
    j: &Mat<T>,
    a0: &[T],
    w0: f64,
    tol: f64,
) -> Result<FrobeniusSeriesH<T>> {
    let mut k = 16;
    loop {
        let h = frobenius_h_generic(g, j, a0, k)?;
        let sizes: Vec<f64> = h.coeffs.iter().enumerate().map(|(i, c)| c.norm_max() * w0.powi(i as i32)).collect();
        let total: f64 = sizes.iter().sum();
        let tail = sizes[sizes.len() - 4..].iter().cloned().fold(0.0, f64::max);
        let decreasing = sizes.windows(2).rev().take(3).all(|w| w[1] <= w[0]);
        if tail <= tol * total && decreasing {
            return Ok(h);
        }
        k *= 2;
        if k > 4096 {
            return Err(Error::PrecisionBudget("Frobenius series needs more than 4096 terms".into()));
        }
    }
}

/// Coefficient access shared by both series.
pub trait SeriesCoeffs<T: Scalar> {
    fn coeffs(&self) -> &[Mat<T>];
    /// Expansion variable at the point z (z for F̂, 1/z for Ĥ).
    fn variable(&self, z: &T) -> T;
}

impl<T: Scalar> SeriesCoeffs<T> for FormalSeriesF<T> {
    fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }
    fn variable(&self, z: &T) -> T {
        z.clone()
    }
}

impl<T: Scalar> SeriesCoeffs<T> for FrobeniusSeriesH<T> {
    fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }
    fn variable(&self, z: &T) -> T {
        T::one() / z.clone()
    }
}

/// Horner evaluation of Σ_{k ≤ upto} C_k v^k.
pub fn eval_series<T: Scalar, S: SeriesCoeffs<T>>(s: &S, z: &T, upto: usize) -> Result<Mat<T>> {
    let c = s.coeffs();
    if upto >= c.len() {
        return Err(Error::Domain(format!("upto = {upto} exceeds stored length {}", c.len())));
    }
    let v = s.variable(z);
    let mut acc = c[upto].clone();
    for k in (0..upto).rev() {
        acc = &acc.scale(&v) + &c[k];
    }
    Ok(acc)
}

/// Horner evaluation of column `j` only.
pub fn eval_column<T: Scalar>(f: &FormalSeriesF<T>, j: usize, z: &T, upto: usize) -> Mat<T> {
    let mut acc = f.coeffs[upto].column(j);
    for k in (0..upto).rev() {
        acc = &acc.scale(z) + &f.coeffs[k].column(j);
    }
    acc
}

/// χ(z) = H(1/z) z^J, with log z supplied by the caller.
pub fn eval_chi<T: Scalar>(h: &FrobeniusSeriesH<T>, z: &T, log_z: &T) -> Result<Mat<T>> {
    let hz = eval_series(h, z, h.coeffs.len() - 1)?;
    let zj = expm_generic(&h.j.scale(log_z));
    Ok(&hz * &zj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_b_has_trivial_series() {
        let a0 = CMat::diag(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        let b = CMat::diag(&[c(0.3, 0.0), c(-0.2, 0.1), c(0.5, 0.5)]);
        let f = formal_f(&a0, &b, 10).unwrap();
        assert_eq!(f.coeffs[0], CMat::identity(3));
        assert!(f.coeffs[1..].iter().all(|m| m.norm_max() == 0.0));
    }

    #[test]
    fn repeated_eigenvalues_rejected() {
        let a0 = CMat::diag(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(formal_f(&a0, &CMat::zeros(2, 2), 3), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_tail_truncates_at_one() {
        let f = FormalSeriesF { coeffs: vec![CMat::identity(2), CMat::zeros(2, 2), CMat::zeros(2, 2)], trunc_index: 0, min_term: 0.0 };
        assert_eq!(optimal_truncation(&f, 0.5).unwrap(), (1, 0.0));
    }

    #[test]
    fn increasing_terms_mean_radius_too_large() {
        let coeffs = (0..6).map(|k| CMat::identity(1).scale_re((k + 1) as f64)).collect();
        let f = FormalSeriesF { coeffs, trunc_index: 0, min_term: 0.0 };
        assert_eq!(optimal_truncation(&f, 2.0), Err(Error::RadiusTooLarge));
    }

    #[test]
    fn h_leading_coefficient_is_g() {
        let g = CMat::from_rows(vec![vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(0.0, 1.0), c(2.0, 0.0)]]);
        let j = CMat::diag(&[c(0.2, 0.1), c(-0.3, 0.0)]);
        let h = frobenius_h(&g, &j, &CMat::diag(&[c(0.0, 1.0), c(0.0, 0.0)]), 5).unwrap();
        assert_eq!(h.coeffs[0], g);
    }

    #[test]
    fn integer_gap_rejected() {
        let j = CMat::diag(&[c(1.5, 0.0), c(0.5, 0.0)]);
        let a0 = CMat::diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(frobenius_h(&CMat::identity(2), &j, &a0, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_at_center_and_upto_zero() {
        let a0 = CMat::diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let b = CMat::from_rows(vec![vec![c(0.1, 0.0), c(0.7, 0.2)], vec![c(-0.3, 0.0), c(0.2, 0.0)]]);
        let f = formal_f(&a0, &b, 8).unwrap();
        assert_eq!(eval_series(&f, &c(0.0, 0.0), 8).unwrap(), CMat::identity(2));
        assert_eq!(eval_series(&f, &c(0.3, 0.2), 0).unwrap(), CMat::identity(2));
        assert!(eval_series(&f, &c(0.3, 0.2), 9).is_err());
    }
}
