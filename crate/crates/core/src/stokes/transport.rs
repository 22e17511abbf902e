//! Analytic continuation of solutions of Y′ = (A₀/z² + B/z)Y along radial
//! segments and circular arcs, by local Taylor expansion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{CMat, Mat};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// Move along the ray to modulus `to`.
    Radial { to: f64 },
    /// Move along the circle to argument `to` (positive sense when increasing).
    Arc { to: f64 },
}

/// Start point in polar form; `start_arg` is the value of arg z (so the
/// branch of log z is tracked continuously along the segments).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub start_rho: f64,
    pub start_arg: f64,
    pub segments: Vec<Segment>,
}

impl PathSpec {
    pub fn new(start_rho: f64, start_arg: f64) -> Self {
        PathSpec { start_rho, start_arg, segments: Vec::new() }
    }

    pub fn radial(mut self, to: f64) -> Self {
        self.segments.push(Segment::Radial { to });
        self
    }

    pub fn arc(mut self, to: f64) -> Self {
        self.segments.push(Segment::Arc { to });
        self
    }

    /// End point (modulus, arg).
    pub fn end(&self) -> (f64, f64) {
        let mut p = (self.start_rho, self.start_arg);
        for s in &self.segments {
            match *s {
                Segment::Radial { to } => p.0 = to,
                Segment::Arc { to } => p.1 = to,
            }
        }
        p
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> PathSpec {
        let mut pts = vec![(self.start_rho, self.start_arg)];
        for s in &self.segments {
            let mut p = *pts.last().unwrap();
            match *s {
                Segment::Radial { to } => p.0 = to,
                Segment::Arc { to } => p.1 = to,
            }
            pts.push(p);
        }
        let (r, a) = *pts.last().unwrap();
        let mut out = PathSpec::new(r, a);
        for k in (0..self.segments.len()).rev() {
            out.segments.push(match self.segments[k] {
                Segment::Radial { .. } => Segment::Radial { to: pts[k].0 },
                Segment::Arc { .. } => Segment::Arc { to: pts[k].1 },
            });
        }
        out
    }
}

/// The point ρe^{iφ} and its logarithm ln ρ + iφ, consistently in T.
pub fn polar<T: Scalar>(rho: f64, phi: f64) -> (T, T) {
    let log = T::from_f64(rho).ln() + T::i() * T::from_f64(phi);
    (log.clone().exp(), log)
}

/// Coefficients of the connection, with a bound on the step size.
pub(crate) struct System<T> {
    pub a0: Mat<T>,
    pub b: Mat<T>,
    /// max |aᵢ| (after centering) and ‖B‖, for step control.
    pub a_scale: f64,
    pub b_scale: f64,
}

impl<T: Scalar> System<T> {
    pub fn new(a: &[T], b: &Mat<T>, b_scale: f64) -> Self {
        let a_scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
        System { a0: Mat::diag(a), b: b.clone(), a_scale, b_scale: b_scale.max(b.norm_max() * b.n() as f64) }
    }

    fn max_step(&self, rho: f64) -> f64 {
        (0.5 * rho).min(rho * rho / (self.a_scale + rho * (self.b_scale + 1.0)))
    }

    /// One Taylor step from c to c + h; `None` if the series shows cancellation
    /// or fails to converge.
    fn taylor_step(&self, c: &T, h: &T, y: &Mat<T>, tol: f64) -> Option<Mat<T>> {
        let n = self.a0.n();
        let c2 = c.clone() * c.clone();
        let p = &self.a0 + &self.b.scale(c);
        let mut prev = Mat::zeros(n, y.cols());
        let mut cur = y.clone();
        let mut sum = y.clone();
        let mut biggest = y.norm_max();
        let y_norm = y.norm_max().max(f64::MIN_POSITIVE);
        let mut small_run = 0;
        for k in 0..600usize {
            let kf = T::from_f64(k as f64);
            let two_ck = T::from_f64(2.0) * c.clone() * kf;
            let t1 = &(&p * &cur) - &cur.scale(&two_ck);
            let mut next = t1.scale(h);
            if k > 0 {
                let t2 = &(&self.b * &prev) - &prev.scale(&T::from_f64(k as f64 - 1.0));
                next = &next + &t2.scale(&(h.clone() * h.clone()));
            }
            next = next.scale(&(T::one() / (c2.clone() * T::from_f64(k as f64 + 1.0))));
            let size = next.norm_max();
            if !size.is_finite() {
                return None;
            }
            sum = &sum + &next;
            biggest = biggest.max(size);
            prev = cur;
            cur = next;
            let s_norm = sum.norm_max().max(f64::MIN_POSITIVE);
            if size <= tol * s_norm {
                small_run += 1;
                if small_run >= 2 {
                    return if biggest <= 1e3 * s_norm.max(y_norm) { Some(sum) } else { None };
                }
            } else {
                small_run = 0;
            }
        }
        None
    }
}

/// Continue `y` along `path`; returns the end value.
pub(crate) fn transport_generic<T: Scalar>(sys: &System<T>, y0: &Mat<T>, path: &PathSpec, tol: f64) -> Result<Mat<T>> {
    let mut y = y0.clone();
    let (mut rho, mut phi) = (path.start_rho, path.start_arg);
    if !(rho > 0.0) {
        return Err(Error::Domain("path must avoid z = 0".into()));
    }
    for seg in &path.segments {
        let (target, radial) = match *seg {
            Segment::Radial { to } => (to, true),
            Segment::Arc { to } => (to, false),
        };
        if radial && !(target > 0.0) {
            return Err(Error::Domain("path must avoid z = 0".into()));
        }
        loop {
            let remaining = if radial { target - rho } else { target - phi };
            if remaining == 0.0 {
                break;
            }
            let mut frac = 1.0;
            loop {
                let hmax = sys.max_step(rho) * frac;
                let (nrho, nphi) = if radial {
                    let d = remaining.abs().min(hmax);
                    let d = if remaining.abs() - d < 1e-3 * hmax { remaining.abs() } else { d };
                    (rho + d * remaining.signum(), phi)
                } else {
                    let d = remaining.abs().min(hmax / rho);
                    let d = if remaining.abs() - d < 1e-3 * hmax / rho { remaining.abs() } else { d };
                    (rho, phi + d * remaining.signum())
                };
                let (c, _) = polar::<T>(rho, phi);
                let (c_next, _) = polar::<T>(nrho, nphi);
                let h = c_next - c.clone();
                if let Some(next) = sys.taylor_step(&c, &h, &y, tol) {
                    y = next;
                    rho = nrho;
                    phi = nphi;
                    break;
                }
                frac *= 0.5;
                if frac < 1e-12 {
                    return Err(Error::Numerical(format!("step underflow at |z| = {rho:.6e}, arg z = {phi:.6}")));
                }
            }
        }
    }
    Ok(y)
}

/// Continue a solution of Y′ = (A₀/z² + B/z)Y along `path` in double precision.
pub fn transport(a0: &CMat, b: &CMat, y0: &CMat, path: &PathSpec, tol: f64) -> Result<CMat> {
    let n = a0.n();
    if b.n() != n || y0.rows() != n {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let a: Vec<Complex64> = a0.diagonal();
    let sys = System::new(&a, b, 0.0);
    transport_generic(&sys, y0, path, tol.max(1e-18))
}
