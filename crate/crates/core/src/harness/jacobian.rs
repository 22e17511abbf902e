//! Finite-difference derivatives of ν in left-trivialized coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mat::CMat;
use crate::plg::{DualPair, GStarPoint};
use crate::stokes::{gstar_from_stokes, BranchChoice, IrregularType, StokesConfig, StokesPlan};

/// ν with the discretization frozen at a base point, so that nearby
/// evaluations differ smoothly.
pub struct FrozenNu {
    plan: StokesPlan,
}

impl FrozenNu {
    pub fn new(b: &CMat, a: &IrregularType, branch: &BranchChoice, cfg: &StokesConfig) -> Result<Self> {
        Ok(FrozenNu { plan: StokesPlan::new(a, branch, b, cfg)? })
    }

    pub fn eval(&self, b: &CMat) -> Result<GStarPoint> {
        gstar_from_stokes(&self.plan.run(b, None)?)
    }

    /// p⁻¹ ∂ν/∂t along B + tE at p = ν(B), by central differences.
    pub fn derivative(&self, b: &CMat, p: &GStarPoint, e: &CMat, h: f64) -> Result<DualPair> {
        let fwd = self.eval(&(b + &e.scale_re(h)))?;
        let bwd = self.eval(&(b - &e.scale_re(h)))?;
        let s = 1.0 / (2.0 * h);
        Ok(DualPair {
            z_minus: (&p.b_minus.inverse()? * &(&fwd.b_minus - &bwd.b_minus)).scale_re(s).lower(),
            z_plus: (&p.b_plus.inverse()? * &(&fwd.b_plus - &bwd.b_plus)).scale_re(s).upper(),
        })
    }
}

/// dν at B on the elementary directions E_ab (index a·n + b).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobianNu {
    pub point: GStarPoint,
    pub columns: Vec<DualPair>,
    pub step: f64,
    /// Largest change of an entry when the step is halved, relative to the
    /// largest entry.
    pub richardson: f64,
}

impl JacobianNu {
    /// dν(Ḃ) for an arbitrary Ḃ, by linearity.
    pub fn apply(&self, bdot: &CMat) -> DualPair {
        let n = bdot.n();
        let mut out = DualPair::zero(n);
        for a in 0..n {
            for b in 0..n {
                let c = bdot[(a, b)];
                let col = &self.columns[a * n + b];
                out.z_minus = &out.z_minus + &col.z_minus.map(|x| x * c);
                out.z_plus = &out.z_plus + &col.z_plus.map(|x| x * c);
            }
        }
        out
    }

    /// The matrix ξ with Tr(ξ Ḃ) = ⟨dν(Ḃ), X⟩ for all Ḃ.
    pub fn pullback(&self, x: &CMat) -> Result<CMat> {
        let n = x.n();
        let mut xi = CMat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                xi[(b, a)] = crate::plg::pairing(&self.columns[a * n + b], x)?;
            }
        }
        Ok(xi)
    }
}

fn flatten(cols: &[DualPair]) -> Vec<Complex64> {
    cols.iter().flat_map(|c| c.z_minus.as_slice().iter().chain(c.z_plus.as_slice()).copied()).collect()
}

/// Default step 1e−5·max(1, ‖B‖).
pub fn default_step(b: &CMat) -> f64 {
    1e-5 * b.norm_max().max(1.0)
}

pub fn jacobian_nu(b: &CMat, a: &IrregularType, branch: &BranchChoice, h: f64, cfg: &StokesConfig) -> Result<JacobianNu> {
    let n = b.n();
    let nu = FrozenNu::new(b, a, branch, cfg)?;
    let p = nu.eval(b)?;
    let mut full = Vec::with_capacity(n * n);
    let mut half = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let e = CMat::unit(n, i, j);
            full.push(nu.derivative(b, &p, &e, h)?);
            half.push(nu.derivative(b, &p, &e, h / 2.0)?);
        }
    }
    let (f, g) = (flatten(&full), flatten(&half));
    let scale = f.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let richardson = f.iter().zip(&g).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
    // one Richardson step: (4 D(h/2) − D(h)) / 3
    let columns = full
        .iter()
        .zip(&half)
        .map(|(f, g)| DualPair {
            z_minus: (&g.z_minus.scale_re(4.0) - &f.z_minus).scale_re(1.0 / 3.0),
            z_plus: (&g.z_plus.scale_re(4.0) - &f.z_plus).scale_re(1.0 / 3.0),
        })
        .collect();
    Ok(JacobianNu { point: p, columns, step: h, richardson })
}
