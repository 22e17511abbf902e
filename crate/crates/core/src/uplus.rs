//! Unipotent upper-triangular Stokes matrices U₊ as the fixed set of the
//! symmetric involution of G*, the bracket induced there, and the closed
//! forms for n = 3 and n = 4.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::plg::{chart, chart_bivector, chart_index_plus, from_chart, sym_involution, upper_pairs, GStarPoint};

/// πi/2, the default factor in front of the closed-form brackets.
pub const DU_DEFAULT_CONSTANT: Complex64 = Complex64::new(0.0, PI / 2.0);

/// Step of the central differences for dσ.
pub const SIGMA_FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UPlusPoint {
    #[serde(rename = "S")]
    pub s: CMat,
}

impl UPlusPoint {
    pub fn new(s: CMat) -> Result<Self> {
        let n = s.n();
        for i in 0..n {
            if s[(i, i)] != Complex64::new(1.0, 0.0) {
                return Err(Error::Domain("diagonal of S must be 1".into()));
            }
            for j in 0..i {
                if s[(i, j)] != Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain("S must be upper triangular".into()));
                }
            }
        }
        if !s.is_finite() {
            return Err(Error::Domain("non-finite entry in S".into()));
        }
        Ok(UPlusPoint { s })
    }

    /// Strictly upper entries in row-major order.
    pub fn from_coords(n: usize, coords: &[Complex64]) -> Result<Self> {
        let pairs = upper_pairs(n);
        if coords.len() != pairs.len() {
            return Err(Error::Domain(format!("expected {} coordinates", pairs.len())));
        }
        let mut s = CMat::identity(n);
        for (&(i, j), &v) in pairs.iter().zip(coords) {
            s[(i, j)] = v;
        }
        Self::new(s)
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn coords(&self) -> Vec<Complex64> {
        upper_pairs(self.n()).into_iter().map(|(i, j)| self.s[(i, j)]).collect()
    }
}

/// S ↦ (Sᵀ, S, 0).
pub fn embed(s: &UPlusPoint) -> GStarPoint {
    GStarPoint { b_minus: s.s.transpose(), b_plus: s.s.clone(), lambda: CMat::zeros(s.n(), s.n()) }
}

/// dσ at p in chart coordinates, by central differences.
pub fn sigma_derivative(p: &GStarPoint, h: f64) -> CMat {
    let n = p.n();
    let x = chart(p);
    let nn = x.len();
    let mut d = CMat::zeros(nn, nn);
    for a in 0..nn {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[a] += h;
        xm[a] -= h;
        let fp = chart(&sym_involution(&from_chart(n, &xp)));
        let fm = chart(&sym_involution(&from_chart(n, &xm)));
        for b in 0..nn {
            d[(b, a)] = (fp[b] - fm[b]) / (2.0 * h);
        }
    }
    d
}

/// The induced bracket on all coordinate pairs of U₊.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedBivector {
    pub pairs: Vec<(usize, usize)>,
    /// values[a][b] = {S_pairs[a], S_pairs[b]}.
    pub values: CMat,
    /// ‖dσ² − I‖.
    pub projector_residual: f64,
}

/// Project the G* bivector at embed(S) onto the +1 eigenspace of dσ along
/// the −1 eigenspace and read off the coordinates S_ij.
pub fn induced_bivector_all(s: &UPlusPoint, tol: f64) -> Result<InducedBivector> {
    let n = s.n();
    let p = embed(s);
    let ds = sigma_derivative(&p, SIGMA_FD_STEP);
    let nn = n * n;
    let id = CMat::identity(nn);
    let projector_residual = (&ds * &ds).dist(&id);
    if !(projector_residual <= tol) {
        return Err(Error::Numerical(format!("eigenspace split defect {projector_residual:.3e}")));
    }
    let proj = (&id + &ds).scale_re(0.5);
    let pi = chart_bivector(&p)?;
    let projected = &(&proj * &pi) * &proj.transpose();
    let pairs = upper_pairs(n);
    let idx: Vec<usize> = pairs.iter().map(|&(i, j)| chart_index_plus(n, i, j)).collect();
    let values = CMat::from_fn(pairs.len(), pairs.len(), |a, b| projected[(idx[a], idx[b])]);
    Ok(InducedBivector { pairs, values, projector_residual })
}

/// {S_ij, S_km} of the induced structure.
pub fn induced_bivector(s: &UPlusPoint, p1: (usize, usize), p2: (usize, usize)) -> Result<Complex64> {
    let all = induced_bivector_all(s, 1e-7)?;
    let a = all.pairs.iter().position(|&q| q == p1);
    let b = all.pairs.iter().position(|&q| q == p2);
    match (a, b) {
        (Some(a), Some(b)) => Ok(all.values[(a, b)]),
        _ => Err(Error::Domain("index pairs must be strictly upper".into())),
    }
}

fn du3(s: &CMat, p: (usize, usize), q: (usize, usize)) -> Option<Complex64> {
    let (x, y, z) = (s[(0, 1)], s[(0, 2)], s[(1, 2)]);
    const X: (usize, usize) = (0, 1);
    const Y: (usize, usize) = (0, 2);
    const Z: (usize, usize) = (1, 2);
    match (p, q) {
        (X, Y) => Some(x * y - 2.0 * z),
        (Y, Z) => Some(y * z - 2.0 * x),
        (Z, X) => Some(z * x - 2.0 * y),
        _ => None,
    }
}

fn du4(s: &CMat, p: (usize, usize), q: (usize, usize)) -> Option<Complex64> {
    let (u, v, w) = (s[(0, 1)], s[(0, 2)], s[(0, 3)]);
    let (x, y, z) = (s[(1, 2)], s[(1, 3)], s[(2, 3)]);
    const U: (usize, usize) = (0, 1);
    const V: (usize, usize) = (0, 2);
    const W: (usize, usize) = (0, 3);
    const X: (usize, usize) = (1, 2);
    const Y: (usize, usize) = (1, 3);
    const Z: (usize, usize) = (2, 3);
    let zero = Complex64::new(0.0, 0.0);
    match (p, q) {
        (U, Z) => Some(zero),
        (V, Y) => Some(2.0 * u * z - 2.0 * x * w),
        (W, X) => Some(zero),
        (U, V) => Some(2.0 * x - u * v),
        (U, W) => Some(2.0 * y - u * w),
        (X, U) => Some(2.0 * v - x * u),
        (Y, U) => Some(2.0 * w - y * u),
        (V, W) => Some(2.0 * z - v * w),
        (V, X) => Some(2.0 * u - v * x),
        (Z, V) => Some(2.0 * w - z * v),
        (W, Y) => Some(2.0 * u - w * y),
        (W, Z) => Some(2.0 * v - w * z),
        (X, Y) => Some(2.0 * z - x * y),
        (Z, X) => Some(2.0 * y - z * x),
        (Y, Z) => Some(2.0 * x - y * z),
        _ => None,
    }
}

/// The closed-form bracket of two coordinate functions before the global
/// constant (n = 3: x = S₁₂, y = S₁₃, z = S₂₃; n = 4: u, v, w, x, y, z are
/// S₁₂, S₁₃, S₁₄, S₂₃, S₂₄, S₃₄). Pairs are 0-based.
pub fn du_bracket_raw(s: &UPlusPoint, p: (usize, usize), q: (usize, usize)) -> Result<Complex64> {
    let n = s.n();
    let table: fn(&CMat, (usize, usize), (usize, usize)) -> Option<Complex64> = match n {
        3 => du3,
        4 => du4,
        _ => return Err(Error::Domain(format!("closed form known for n = 3, 4 only, got {n}"))),
    };
    let pairs = upper_pairs(n);
    if !pairs.contains(&p) || !pairs.contains(&q) {
        return Err(Error::Domain("index pairs must be strictly upper".into()));
    }
    if p == q {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(table(&s.s, p, q).or_else(|| table(&s.s, q, p).map(|v| -v)).expect("table covers every pair"))
}

/// `constant` times the closed-form bracket.
pub fn du_bracket_closed(s: &UPlusPoint, p: (usize, usize), q: (usize, usize), constant: Complex64) -> Result<Complex64> {
    Ok(constant * du_bracket_raw(s, p, q)?)
}

/// x² + y² + z² − xyz with x = S₁₂, y = S₁₃, z = S₂₃.
pub fn markoff(s: &UPlusPoint) -> Result<Complex64> {
    if s.n() != 3 {
        return Err(Error::Domain("the Markoff polynomial needs n = 3".into()));
    }
    let (x, y, z) = (s.s[(0, 1)], s.s[(0, 2)], s.s[(1, 2)]);
    Ok(x * x + y * y + z * z - x * y * z)
}

/// The Markoff polynomial on integers, exactly.
pub fn markoff_integer(x: i64, y: i64, z: i64) -> i128 {
    let (x, y, z) = (x as i128, y as i128, z as i128);
    x * x + y * y + z * z - x * y * z
}
