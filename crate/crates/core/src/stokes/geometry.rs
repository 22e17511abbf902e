//! Anti-Stokes directions, sectors, dominance order and per-column
//! evaluation windows.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::CMat;

const ANGLE_TOL: f64 = 1e-10;

/// Diagonal entries a₁..a_n of A₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularType {
    pub a: Vec<Complex64>,
}

impl IrregularType {
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain("irregular type needs n >= 1".into()));
        }
        for i in 0..a.len() {
            if !(a[i].re.is_finite() && a[i].im.is_finite()) {
                return Err(Error::Domain("non-finite A0 entry".into()));
            }
            for j in 0..i {
                if (a[i] - a[j]).norm() <= 1e-12 * (1.0 + a[i].norm()) {
                    return Err(Error::Domain(format!("A0 entries {j} and {i} coincide")));
                }
            }
        }
        Ok(IrregularType { a })
    }

    pub fn from_diag(a0: &CMat) -> Result<Self> {
        Self::new(a0.diagonal())
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> CMat {
        CMat::diag(&self.a)
    }

    /// Entries shifted to mean zero; Stokes data and C are unchanged by this.
    pub fn centered(&self) -> Vec<Complex64> {
        let m: Complex64 = self.a.iter().sum::<Complex64>() / self.a.len() as f64;
        self.a.iter().map(|x| x - m).collect()
    }

    /// Distinct values of arg(aᵢ − aⱼ) in [0, 2π).
    pub fn anti_stokes_directions(&self) -> Vec<f64> {
        let mut dirs = Vec::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j {
                    dirs.push(wrap(arg(self.a[i] - self.a[j]), 0.0));
                }
            }
        }
        dedup_angles(dirs)
    }

    /// Smallest |aᵢ − aⱼ|.
    pub fn kappa_min(&self) -> f64 {
        let mut k = f64::INFINITY;
        for i in 0..self.n() {
            for j in 0..i {
                k = k.min((self.a[i] - self.a[j]).norm());
            }
        }
        k
    }

    /// Largest |aᵢ − aⱼ|.
    pub fn kappa_max(&self) -> f64 {
        let mut k: f64 = 0.0;
        for i in 0..self.n() {
            for j in 0..i {
                k = k.max((self.a[i] - self.a[j]).norm());
            }
        }
        k
    }
}

/// Initial sector and log branch. `log_base` is the value of arg z assigned
/// to the direction `sector0_ray`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchChoice {
    pub sector0_ray: f64,
    pub log_base: f64,
}

impl BranchChoice {
    /// Bisector of the sector containing (or starting at) the positive real
    /// axis, with arg z taken in (−π, π].
    pub fn default_for(a: &IrregularType) -> Self {
        let dirs = a.anti_stokes_directions();
        if dirs.is_empty() {
            return BranchChoice { sector0_ray: 0.0, log_base: 0.0 };
        }
        // first direction strictly above 0 and last at or below 0
        let hi = dirs.iter().cloned().find(|&d| d > ANGLE_TOL).unwrap_or(dirs[0] + TAU);
        let lo = dirs.iter().rev().cloned().find(|&d| d <= ANGLE_TOL).unwrap_or(dirs[dirs.len() - 1] - TAU);
        let lo = if lo > ANGLE_TOL { lo - TAU } else { lo };
        let ray = wrap(0.5 * (lo + hi), -PI);
        BranchChoice { sector0_ray: ray, log_base: ray }
    }

    /// Offset between geometric angles measured from the ray frame and arg z
    /// on Sect₀.
    pub fn frame_offset(&self) -> f64 {
        self.log_base - self.sector0_ray
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.frame_offset() / TAU;
        if (k - k.round()).abs() > 1e-12 || !self.sector0_ray.is_finite() {
            return Err(Error::Domain("log_base must equal sector0_ray modulo 2π".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorGeometry {
    /// d₁ < … < d_{2l}, all in (ray, ray + 2π).
    pub dirs: Vec<f64>,
    pub l: usize,
    pub theta: f64,
    /// perm[i] is the dominance rank of index i along θ.
    pub perm: Vec<usize>,
    #[serde(rename = "P")]
    pub p: CMat,
}

impl SectorGeometry {
    /// Bisector of Sect₀ in the ray frame.
    pub fn bisector0(&self) -> f64 {
        if self.l == 0 {
            return self.theta;
        }
        0.5 * (self.dirs[2 * self.l - 1] - TAU + self.dirs[0])
    }

    /// Bisector of Sect_l = (d_l, d_{l+1}) in the ray frame.
    pub fn bisector_l(&self) -> f64 {
        if self.l == 0 {
            return self.theta;
        }
        0.5 * (self.dirs[self.l - 1] + self.dirs[self.l])
    }
}

pub(crate) fn arg(z: Complex64) -> f64 {
    z.im.atan2(z.re)
}

/// Representative of x in [lo, lo + 2π).
pub(crate) fn wrap(x: f64, lo: f64) -> f64 {
    let mut y = (x - lo).rem_euclid(TAU) + lo;
    if y >= lo + TAU {
        y -= TAU;
    }
    y
}

fn dedup_angles(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().is_none_or(|&y| x - y > ANGLE_TOL) {
            out.push(x);
        }
    }
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= ANGLE_TOL {
        out.pop();
    }
    out
}

pub fn sector_geometry(a: &IrregularType, branch: &BranchChoice) -> Result<SectorGeometry> {
    branch.validate()?;
    let n = a.n();
    let ray = branch.sector0_ray;
    let raw = a.anti_stokes_directions();
    for &d in &raw {
        let gap = wrap(d - ray, -PI).abs();
        if gap <= ANGLE_TOL {
            return Err(Error::Domain(format!("sector0_ray {ray} lies on an anti-Stokes direction")));
        }
    }
    let mut dirs: Vec<f64> = raw.iter().map(|&d| wrap(d, ray)).collect();
    dirs.sort_by(f64::total_cmp);
    if dirs.len() % 2 != 0 {
        return Err(Error::Numerical("odd number of anti-Stokes directions".into()));
    }
    let l = dirs.len() / 2;
    let theta = if l == 0 { ray } else { 0.5 * (dirs[0] + dirs[l - 1]) };
    let u = Complex64::from_polar(1.0, -theta);
    let score: Vec<f64> = a.a.iter().map(|x| (x * u).re).collect();
    let scale = a.kappa_max().max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if (score[i] - score[j]).abs() <= 1e-10 * scale {
                return Err(Error::DegenerateBisector(format!(
                    "theta = {theta} is a Stokes direction for the pair ({j}, {i})"
                )));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| score[j].total_cmp(&score[i]));
    let mut perm = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        perm[i] = rank;
    }
    let p = CMat::from_fn(n, n, |i, j| if perm[i] == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    Ok(SectorGeometry { dirs, l, theta, perm, p })
}

/// Evaluation direction for column `j` of the canonical solution on the
/// sector containing the direction `reference`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnWindow {
    pub lo: f64,
    pub hi: f64,
    pub psi: f64,
    /// max_k |aₖ − aⱼ| cos(ψ − arg(aₖ − aⱼ)); positive values amplify errors.
    pub growth: f64,
    /// min_k |aₖ − aⱼ|.
    pub rho_min: f64,
}

pub fn column_window(a: &IrregularType, j: usize, reference: f64) -> ColumnWindow {
    let xi: Vec<Complex64> = (0..a.n()).filter(|&k| k != j).map(|k| a.a[k] - a.a[j]).collect();
    if xi.is_empty() {
        return ColumnWindow { lo: reference - PI, hi: reference + PI, psi: reference, growth: 0.0, rho_min: f64::INFINITY };
    }
    let sig: Vec<f64> = xi.iter().map(|&x| wrap(arg(x), reference)).collect();
    let hi = sig.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = sig.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - TAU;
    let growth_at = |psi: f64| xi.iter().map(|x| x.norm() * (psi - arg(*x)).cos()).fold(f64::NEG_INFINITY, f64::max);
    let steps = 2000;
    let margin = 1e-3 * (hi - lo);
    let mut best = (reference, growth_at(reference));
    for s in 0..=steps {
        let psi = lo + margin + (hi - lo - 2.0 * margin) * s as f64 / steps as f64;
        let g = growth_at(psi);
        if g < best.1 - 1e-12 {
            best = (psi, g);
        }
    }
    let rho_min = xi.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
    ColumnWindow { lo, hi, psi: best.0, growth: best.1, rho_min }
}
