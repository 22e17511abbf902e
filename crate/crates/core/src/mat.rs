//! Dense row-major matrices over a [`Scalar`].

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Double-precision complex matrix.
pub type CMat = Mat<Complex64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length; panics on non-square input.
    pub fn n(&self) -> usize {
        assert_eq!(self.rows, self.cols, "matrix is not square");
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// δ(m): the diagonal part.
    pub fn diag_part(&self) -> Self {
        Self::diag(&self.diagonal())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_c64(&self) -> CMat {
        self.map(|x| x.to_c64())
    }

    pub fn from_c64(m: &CMat) -> Self {
        m.map(|x| T::from_c64(*x))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Max-abs-entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)].clone())
    }

    pub fn set_column(&mut self, j: usize, v: &Self) {
        for i in 0..self.rows {
            self[(i, j)] = v[(i, 0)].clone();
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// Entries strictly below the diagonal zeroed.
    pub fn upper(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| if i <= j { self[(i, j)].clone() } else { T::zero() })
    }

    /// Entries strictly above the diagonal zeroed.
    pub fn lower(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| if i >= j { self[(i, j)].clone() } else { T::zero() })
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(self.lu()?.solve(&Self::identity(self.n())))
    }

    /// Solve `self · x = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        Ok(self.lu()?.solve(rhs))
    }

    pub fn det(&self) -> Result<T> {
        match self.lu() {
            Ok(lu) => Ok(lu.det()),
            Err(Error::Singular(_)) => Ok(T::zero()),
            Err(e) => Err(e),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                for j in 0..rhs.cols {
                    let t = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = t;
                }
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|x| -x.clone())
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Mat<T> {
            type Output = Mat<T>;
            fn $m(self, rhs: Mat<T>) -> Mat<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Scalar> $tr<&Mat<T>> for Mat<T> {
            type Output = Mat<T>;
            fn $m(self, rhs: &Mat<T>) -> Mat<T> {
                (&self).$m(rhs)
            }
        }
        impl<T: Scalar> $tr<Mat<T>> for &Mat<T> {
            type Output = Mat<T>;
            fn $m(self, rhs: Mat<T>) -> Mat<T> {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl<T: Scalar> Neg for Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        -&self
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    sign_flips: usize,
}

impl<T: Scalar> Lu<T> {
    pub fn new(m: &Mat<T>) -> Result<Self> {
        let n = m.n();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut flips = 0;
        let scale = m.norm_max();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > scale * T::eps() * (n as f64)) || !best.is_finite() {
                return Err(Error::Singular(format!("zero pivot at column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                flips += 1;
            }
            let piv = lu[(k, k)].clone();
            for i in k + 1..n {
                let f = lu[(i, k)].clone() / piv.clone();
                for j in k + 1..n {
                    let t = lu[(i, j)].clone() - f.clone() * lu[(k, j)].clone();
                    lu[(i, j)] = t;
                }
                lu[(i, k)] = f;
            }
        }
        Ok(Lu { lu, perm, sign_flips: flips })
    }

    pub fn solve(&self, rhs: &Mat<T>) -> Mat<T> {
        let n = self.lu.rows;
        assert_eq!(rhs.rows, n);
        let mut x = Mat::from_fn(n, rhs.cols, |i, j| rhs[(self.perm[i], j)].clone());
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut s = x[(i, c)].clone();
                for k in 0..i {
                    s = s - self.lu[(i, k)].clone() * x[(k, c)].clone();
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)].clone();
                for k in i + 1..n {
                    s = s - self.lu[(i, k)].clone() * x[(k, c)].clone();
                }
                x[(i, c)] = s / self.lu[(i, i)].clone();
            }
        }
        x
    }

    pub fn det(&self) -> T {
        let mut d = if self.sign_flips % 2 == 0 { T::one() } else { -T::one() };
        for i in 0..self.lu.rows {
            d = d * self.lu[(i, i)].clone();
        }
        d
    }
}

impl CMat {
    /// Matrix with a single unit entry at (i, j).
    pub fn unit(n: usize, i: usize, j: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.map(|x| x * s)
    }

    pub fn from_re_im(rows: &[Vec<[f64; 2]>]) -> CMat {
        CMat::from_rows(rows.iter().map(|r| r.iter().map(|c| Complex64::new(c[0], c[1])).collect()).collect())
    }

    pub fn to_re_im(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-abs distance to another matrix.
    pub fn dist(&self, other: &CMat) -> f64 {
        (self - other).norm_max()
    }
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_re_im().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let c = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || rows.iter().any(|r| r.len() != c) {
            return Err(D::Error::custom("matrix must be a non-empty rectangular array"));
        }
        Ok(CMat::from_re_im(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{set_ext_precision, Ext};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_and_det_small() {
        let a = CMat::from_rows(vec![vec![c(0.0, 0.0), c(2.0, 0.0)], vec![c(1.0, 1.0), c(3.0, 0.0)]]);
        // det = 0*3 - 2*(1+i)
        assert!((a.det().unwrap() - c(-2.0, -2.0)).norm() < 1e-15);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).dist(&CMat::identity(2)) < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = CMat::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
        assert_eq!(a.det().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn ext_matches_double() {
        let _g = set_ext_precision(200);
        let a = CMat::from_fn(3, 3, |i, j| c(((i * 7 + j * j) % 5) as f64 + 0.5, (i as f64) - (j as f64) * 0.25));
        let ae: Mat<Ext> = Mat::from_c64(&a);
        let inv = ae.inverse().unwrap();
        let resid = (&ae * &inv - Mat::identity(3)).norm_max();
        assert!(resid < 1e-55);
        assert!(inv.to_c64().dist(&a.inverse().unwrap()) < 1e-12);
    }

    #[test]
    fn serde_roundtrip() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64, -(j as f64)));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[[0.0,-0.0],[0.0,-1.0]],[[1.0,-0.0],[1.0,-1.0]]]");
        let b: CMat = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
