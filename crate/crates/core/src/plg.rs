//! The dual Poisson Lie group G* of GL_n(C), its unitary form K*, dressing
//! solves and the associated bivectors.
//!
//! Covectors at p ∈ G* are represented by elements Y ∈ gl_n through left
//! trivialization and the pairing ⟨(Z₋, Z₊), Y⟩ = Tr((Z₊ − Z₋)Y).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, iwasawa};
use crate::mat::CMat;

const I_PI: Complex64 = Complex64::new(0.0, PI);

/// A point (b₋, b₊, Λ) of G*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GStarPoint {
    pub b_minus: CMat,
    pub b_plus: CMat,
    #[serde(rename = "Lambda")]
    pub lambda: CMat,
}

/// An element (Z₋, Z₊) of Lie(G*).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub z_minus: CMat,
    pub z_plus: CMat,
}

/// Upper-triangular b with positive real diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStarPoint {
    pub b: CMat,
}

/// An element B ∈ g, identified with Tr(B ·) ∈ g*.
pub type GDualVector = CMat;

impl GStarPoint {
    pub fn identity(n: usize) -> Self {
        GStarPoint { b_minus: CMat::identity(n), b_plus: CMat::identity(n), lambda: CMat::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.b_plus.n()
    }

    /// Build from triangular parts and Λ, overwriting the diagonals of b± by exp(±πiΛ).
    pub fn from_parts(b_minus: &CMat, b_plus: &CMat, lambda: &[Complex64]) -> Self {
        let n = lambda.len();
        let mut bm = b_minus.lower();
        let mut bp = b_plus.upper();
        for i in 0..n {
            let e = (I_PI * lambda[i]).exp();
            bp[(i, i)] = e;
            bm[(i, i)] = e.inv();
        }
        GStarPoint { b_minus: bm, b_plus: bp, lambda: CMat::diag(lambda) }
    }

    /// Largest violation of triangularity, δ(b₋)δ(b₊) = 1 and δ(b₊) = exp(πiΛ).
    pub fn invariant_residual(&self) -> f64 {
        let n = self.n();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    r = r.max(self.b_minus[(i, j)].norm());
                }
                if i > j {
                    r = r.max(self.b_plus[(i, j)].norm()).max(self.lambda[(i, j)].norm());
                }
                if i < j {
                    r = r.max(self.lambda[(i, j)].norm());
                }
            }
            let dm = self.b_minus[(i, i)];
            let dp = self.b_plus[(i, i)];
            r = r.max((dm * dp - 1.0).norm());
            r = r.max((dp - (I_PI * self.lambda[(i, i)]).exp()).norm());
        }
        r
    }

    pub fn lambda_diag(&self) -> Vec<Complex64> {
        self.lambda.diagonal()
    }

    /// Componentwise product; only used to realize left translation.
    pub(crate) fn mul(&self, other: &GStarPoint) -> GStarPoint {
        GStarPoint {
            b_minus: &self.b_minus * &other.b_minus,
            b_plus: &self.b_plus * &other.b_plus,
            lambda: &self.lambda + &other.lambda,
        }
    }

    /// p · exp(t (Z₋, Z₊)).
    pub fn exp_curve(&self, z: &DualPair, t: Complex64) -> Result<GStarPoint> {
        let lam = z.z_plus.diag_part().map(|d| d * t / I_PI);
        let e = GStarPoint {
            b_minus: expm(&z.z_minus.map(|x| x * t))?,
            b_plus: expm(&z.z_plus.map(|x| x * t))?,
            lambda: lam,
        };
        Ok(self.mul(&e))
    }

    /// Max-abs distance over all three components.
    pub fn dist(&self, other: &GStarPoint) -> f64 {
        self.b_minus.dist(&other.b_minus).max(self.b_plus.dist(&other.b_plus)).max(self.lambda.dist(&other.lambda))
    }

    pub fn norm_max(&self) -> f64 {
        self.b_minus.norm_max().max(self.b_plus.norm_max()).max(self.lambda.norm_max())
    }

    /// The K* point if p is fixed by the Hermitian involution.
    pub fn to_kstar(&self, tol: f64) -> Result<KStarPoint> {
        let r = herm_involution(self)?.dist(self);
        if r > tol {
            return Err(Error::Domain(format!("point is not in K* (residual {r:.3e})")));
        }
        Ok(KStarPoint { b: self.b_plus.clone() })
    }
}

impl DualPair {
    pub fn zero(n: usize) -> Self {
        DualPair { z_minus: CMat::zeros(n, n), z_plus: CMat::zeros(n, n) }
    }

    /// Largest violation of triangularity and δ(Z₋) + δ(Z₊) = 0.
    pub fn invariant_residual(&self) -> f64 {
        let n = self.z_plus.n();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    r = r.max(self.z_minus[(i, j)].norm());
                }
                if i > j {
                    r = r.max(self.z_plus[(i, j)].norm());
                }
            }
            r = r.max((self.z_minus[(i, i)] + self.z_plus[(i, i)]).norm());
        }
        r
    }
}

impl KStarPoint {
    pub fn new(b: CMat) -> Result<Self> {
        let n = b.n();
        for i in 0..n {
            let d = b[(i, i)];
            if d.im.abs() > 1e-12 * d.re.abs().max(1.0) || d.re <= 0.0 {
                return Err(Error::Domain("K* diagonal must be real and positive".into()));
            }
            for j in 0..i {
                if b[(i, j)].norm() != 0.0 {
                    return Err(Error::Domain("K* element must be upper triangular".into()));
                }
            }
        }
        Ok(KStarPoint { b })
    }

    /// (b^{-†}, b, Λ) with exp(πiΛ) = δ(b).
    pub fn to_gstar(&self) -> Result<GStarPoint> {
        let n = self.b.n();
        let lam: Vec<Complex64> = (0..n).map(|i| Complex64::new(self.b[(i, i)].re.ln(), 0.0) / I_PI).collect();
        Ok(GStarPoint { b_minus: self.b.inverse()?.adjoint(), b_plus: self.b.clone(), lambda: CMat::diag(&lam) })
    }
}

fn check_dims(a: &CMat, b: &CMat) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.n() != b.n() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    Ok(())
}

/// Tr((Z₊ − Z₋) y).
pub fn pairing(zp: &DualPair, y: &CMat) -> Result<Complex64> {
    check_dims(&zp.z_plus, y)?;
    check_dims(&zp.z_minus, y)?;
    Ok((&(&zp.z_plus - &zp.z_minus) * y).trace())
}

/// π(p) = b₋⁻¹ b₊.
pub fn pi_map(p: &GStarPoint) -> Result<CMat> {
    Ok(&p.b_minus.inverse()? * &p.b_plus)
}

/// Unknowns: strict lower of Z₋, strict upper of Z₊, shared diagonal d.
fn unknown_pair(n: usize, k: usize) -> DualPair {
    let mut z = DualPair::zero(n);
    let one = Complex64::new(1.0, 0.0);
    let mut idx = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if idx == k {
                if i > j {
                    z.z_minus[(i, j)] = one;
                } else {
                    z.z_plus[(i, j)] = one;
                }
                return z;
            }
            idx += 1;
        }
    }
    let d = k - idx;
    z.z_plus[(d, d)] = one;
    z.z_minus[(d, d)] = -one;
    z
}

fn dressing_lhs(bm: &CMat, bm_inv: &CMat, bp: &CMat, bp_inv: &CMat, z: &DualPair) -> CMat {
    &(&(bp * &z.z_plus) * bp_inv) - &(&(bm * &z.z_minus) * bm_inv)
}

/// Solve b₊Z₊b₊⁻¹ − b₋Z₋b₋⁻¹ = b₊Xb₊⁻¹ − b₋Xb₋⁻¹ for (Z₋, Z₊) ∈ Lie(G*);
/// also returns λ̇ = δ(Z₊)/(πi).
pub fn dressing_solve(p: &GStarPoint, x: &CMat) -> Result<(DualPair, CMat)> {
    check_dims(&p.b_plus, x)?;
    let n = x.n();
    let bm_inv = p.b_minus.inverse()?;
    let bp_inv = p.b_plus.inverse()?;
    let rhs = &(&(&p.b_plus * x) * &bp_inv) - &(&(&p.b_minus * x) * &bm_inv);
    let nn = n * n;
    let mut sys = CMat::zeros(nn, nn);
    for k in 0..nn {
        let col = dressing_lhs(&p.b_minus, &bm_inv, &p.b_plus, &bp_inv, &unknown_pair(n, k));
        for r in 0..nn {
            sys[(r, k)] = col.as_slice()[r];
        }
    }
    let b = CMat::from_fn(nn, 1, |r, _| rhs.as_slice()[r]);
    let u = sys.solve(&b).map_err(|_| Error::DressingSingular)?;
    let mut z = DualPair::zero(n);
    for k in 0..nn {
        let e = unknown_pair(n, k);
        z.z_minus = &z.z_minus + &e.z_minus.map(|v| v * u[(k, 0)]);
        z.z_plus = &z.z_plus + &e.z_plus.map(|v| v * u[(k, 0)]);
    }
    let lam_dot = z.z_plus.diag_part().map(|d| d / I_PI);
    Ok((z, lam_dot))
}

/// Residual of the defining equation of [`dressing_solve`].
pub fn dressing_residual(p: &GStarPoint, x: &CMat, z: &DualPair) -> Result<f64> {
    let bm_inv = p.b_minus.inverse()?;
    let bp_inv = p.b_plus.inverse()?;
    let lhs = dressing_lhs(&p.b_minus, &bm_inv, &p.b_plus, &bp_inv, z);
    let rhs = &(&(&p.b_plus * x) * &bp_inv) - &(&(&p.b_minus * x) * &bm_inv);
    Ok(lhs.dist(&rhs))
}

/// Tangent vector (ḃ₋, ḃ₊, Λ̇) of the dressing vector field of `x` at `p`.
pub fn dressing_vector(p: &GStarPoint, x: &CMat) -> Result<GStarPoint> {
    let (z, lam_dot) = dressing_solve(p, x)?;
    Ok(GStarPoint { b_minus: &p.b_minus * &z.z_minus, b_plus: &p.b_plus * &z.z_plus, lambda: lam_dot })
}

/// The Poisson bivector of G* on left-trivialized covectors; `scaled`
/// multiplies by 2πi.
pub fn gstar_bivector(p: &GStarPoint, x: &CMat, y: &CMat, scaled: bool) -> Result<Complex64> {
    let (z, _) = dressing_solve(p, x)?;
    let v = pairing(&z, y)?;
    Ok(if scaled { v * I_PI * 2.0 } else { v })
}

/// Left-trivialized covector Y of a differential, given by its values on
/// the Lie(G*) directions (Z₋, Z₊) at p.
pub fn covector_from_differential(n: usize, mut df: impl FnMut(&DualPair) -> Complex64) -> CMat {
    let one = Complex64::new(1.0, 0.0);
    let mut y = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut z = DualPair::zero(n);
            if i < j {
                z.z_plus[(i, j)] = one;
                y[(j, i)] = df(&z);
            } else if i > j {
                z.z_minus[(i, j)] = one;
                y[(j, i)] = -df(&z);
            } else {
                z.z_plus[(i, i)] = one;
                z.z_minus[(i, i)] = -one;
                y[(i, i)] = df(&z) * 0.5;
            }
        }
    }
    y
}

/// Index pairs (i, j), i < j, in row-major order.
pub fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

/// Chart on G*: strictly lower entries of b₋, strictly upper entries of
/// b₊ (both row-major), then the diagonal of Λ.
pub fn chart(p: &GStarPoint) -> Vec<Complex64> {
    let n = p.n();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..i {
            v.push(p.b_minus[(i, j)]);
        }
    }
    for (i, j) in upper_pairs(n) {
        v.push(p.b_plus[(i, j)]);
    }
    v.extend(p.lambda.diagonal());
    v
}

pub fn from_chart(n: usize, v: &[Complex64]) -> GStarPoint {
    let mut bm = CMat::zeros(n, n);
    let mut bp = CMat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..i {
            bm[(i, j)] = v[k];
            k += 1;
        }
    }
    for (i, j) in upper_pairs(n) {
        bp[(i, j)] = v[k];
        k += 1;
    }
    GStarPoint::from_parts(&bm, &bp, &v[k..])
}

pub(crate) fn chart_index_plus(n: usize, i: usize, j: usize) -> usize {
    let m = n * (n - 1) / 2;
    m + upper_pairs(n).iter().position(|&p| p == (i, j)).expect("strictly upper pair")
}

/// Chart coordinates of the left-trivialized tangent vector p·Z.
fn chart_velocity(p: &GStarPoint, z: &DualPair) -> Vec<Complex64> {
    let v = GStarPoint {
        b_minus: &p.b_minus * &z.z_minus,
        b_plus: &p.b_plus * &z.z_plus,
        lambda: z.z_plus.diag_part().map(|d| d / Complex64::new(0.0, PI)),
    };
    let n = p.n();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..i {
            out.push(v.b_minus[(i, j)]);
        }
    }
    for (i, j) in upper_pairs(n) {
        out.push(v.b_plus[(i, j)]);
    }
    out.extend(v.lambda.diagonal());
    out
}

/// The 2πi-scaled bivector of G* at p in chart coordinates.
pub fn chart_bivector(p: &GStarPoint) -> Result<CMat> {
    let n = p.n();
    let nn = n * n;
    let covectors: Vec<CMat> = (0..nn).map(|a| covector_from_differential(n, |z| chart_velocity(p, z)[a])).collect();
    let mut pi = CMat::zeros(nn, nn);
    for a in 0..nn {
        for b in 0..nn {
            pi[(a, b)] = gstar_bivector(p, &covectors[a], &covectors[b], true)?;
        }
    }
    Ok(pi)
}

/// t·p = (t b₋ t⁻¹, t b₊ t⁻¹, Λ).
pub fn torus_act(t: &CMat, p: &GStarPoint) -> Result<GStarPoint> {
    let ti = t.inverse()?;
    Ok(GStarPoint {
        b_minus: &(t * &p.b_minus) * &ti,
        b_plus: &(t * &p.b_plus) * &ti,
        lambda: p.lambda.clone(),
    })
}

/// μ_T(p) = 2πi Λ.
pub fn moment_t(p: &GStarPoint) -> CMat {
    p.lambda.map(|x| x * I_PI * 2.0)
}

/// Tr([x, y] B).
pub fn kk_bracket(b: &GDualVector, x: &CMat, y: &CMat) -> Complex64 {
    (&x.commutator(y) * b).trace()
}

/// (b₊^{-†}, b₋^{-†}, −Λ̄).
pub fn herm_involution(p: &GStarPoint) -> Result<GStarPoint> {
    Ok(GStarPoint {
        b_minus: p.b_plus.inverse()?.adjoint().lower(),
        b_plus: p.b_minus.inverse()?.adjoint().upper(),
        lambda: p.lambda.map(|x| -x.conj()),
    })
}

/// (b₊ᵀ, b₋ᵀ, −Λ).
pub fn sym_involution(p: &GStarPoint) -> GStarPoint {
    GStarPoint { b_minus: p.b_plus.transpose(), b_plus: p.b_minus.transpose(), lambda: p.lambda.map(|x| -x) }
}

/// Right dressing k·b = ρ(b k⁻¹), the AN part of the Iwasawa decomposition.
pub fn kstar_dressing(k: &CMat, b: &KStarPoint) -> Result<KStarPoint> {
    let n = k.n();
    if (&k.adjoint() * k).dist(&CMat::identity(n)) > 1e-10 {
        return Err(Error::Domain("k is not unitary".into()));
    }
    let (_, a, nmat) = iwasawa(&(&b.b * &k.adjoint()))?;
    Ok(KStarPoint { b: (&a * &nmat).upper() })
}

/// Poisson bivector of K* on skew-Hermitian covectors: Im Tr(Z₊ y).
pub fn kstar_bivector(b: &KStarPoint, x: &CMat, y: &CMat) -> Result<f64> {
    for m in [x, y] {
        if m.dist(&m.adjoint().map(|v| -v)) > 1e-10 * (1.0 + m.norm_max()) {
            return Err(Error::Domain("covectors must be skew-Hermitian".into()));
        }
    }
    let p = b.to_gstar()?;
    let (z, _) = dressing_solve(&p, x)?;
    let defect = z.z_minus.dist(&z.z_plus.adjoint().map(|v| -v));
    if defect > 1e-9 * (1.0 + z.z_plus.norm_max()) {
        return Err(Error::Numerical(format!("dressing solve left the real form (defect {defect:.3e})")));
    }
    Ok((&z.z_plus * y).trace().im)
}
