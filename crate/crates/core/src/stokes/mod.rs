//! Stokes data, connection matrix and the monodromy maps ν, ν̂.
//!
//! Canonical solutions are initialized column by column by least-term
//! truncation of F̂ at a small radius, in a direction where that column is
//! determined to full accuracy, then continued along radial segments and
//! arcs of a matching circle |z| = R where all exponential factors are of
//! comparable size.

mod geometry;
mod transport;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use geometry::{column_window, sector_geometry, BranchChoice, ColumnWindow, IrregularType, SectorGeometry};
pub use transport::{polar, transport, PathSpec, Segment};

use crate::error::{Error, Result};
use crate::linalg::{eig, expm};
use crate::mat::{CMat, Mat};
use crate::plg::GStarPoint;
use crate::scalar::{set_ext_precision, Ext, Scalar};
use crate::series::{eval_chi, eval_column, formal_f_generic, frobenius_h_adaptive, optimal_truncation_column, with_truncation};
use transport::{transport_generic, System};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StokesConfig {
    /// Target size of the least term at the initialization radius.
    pub eps_target: f64,
    /// Relative tail tolerance of each Taylor step (double precision).
    pub ode_tol: f64,
    pub precision: Precision,
    /// Switch to extended precision when double cannot absorb the growth.
    pub auto_extend: bool,
    /// Multiplies every initialization radius.
    pub radius_scale: f64,
    /// Single initialization radius for all columns, bypassing the rule.
    pub r0_override: Option<f64>,
    /// Off-triangle mass above which the extraction is rejected.
    pub triangularity_tol: f64,
    pub ext_bits: Option<u32>,
}

impl Default for StokesConfig {
    fn default() -> Self {
        StokesConfig {
            eps_target: 1e-15,
            ode_tol: 1e-17,
            precision: Precision::Double,
            auto_extend: true,
            radius_scale: 1.0,
            r0_override: None,
            triangularity_tol: 1e-6,
            ext_bits: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StokesResiduals {
    pub off_triangle_plus: f64,
    pub off_triangle_minus: f64,
    /// Least-term size times the worst growth factor, over all columns.
    pub truncation_bound: f64,
    /// Working-precision roundoff times the worst growth factor.
    pub roundoff_bound: f64,
    /// Spectrum distance between S₋S₊e^{2πiΛ} and e^{2πiB}.
    pub monodromy_spectrum: f64,
    /// ‖S₋S₊e^{2πiΛ} − P⁻¹Ce^{2πiJ}C⁻¹P‖ when C is known.
    pub monodromy_direct: Option<f64>,
    /// Change of C between matching radii R and 2R.
    pub connection_drift: Option<f64>,
    pub precision_bits: u32,
    pub matching_radius: f64,
    pub init_radii: Vec<f64>,
    pub terms: Vec<usize>,
}

impl StokesResiduals {
    /// A posteriori accuracy bound for the Stokes entries.
    pub fn certified_bound(&self) -> f64 {
        self.truncation_bound + self.roundoff_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesData {
    #[serde(rename = "S_plus")]
    pub s_plus: CMat,
    #[serde(rename = "S_minus")]
    pub s_minus: CMat,
    #[serde(rename = "Lambda")]
    pub lambda: CMat,
    #[serde(rename = "P")]
    pub p: CMat,
    #[serde(rename = "C")]
    pub c: Option<CMat>,
    #[serde(rename = "M0")]
    pub m0: CMat,
    pub residuals: StokesResiduals,
}

impl StokesData {
    /// S₋S₊e^{2πiΛ}.
    pub fn local_monodromy(&self) -> Result<CMat> {
        let e = expm(&self.lambda.map(|x| x * Complex64::new(0.0, TAU)))?;
        Ok(&(&self.s_minus * &self.s_plus) * &e)
    }
}

/// Column initialization data for one sector.
#[derive(Clone, Debug)]
struct ColumnPlan {
    /// arg z at the start point.
    arg: f64,
    radius: f64,
    terms: usize,
    growth_exponent: f64,
    min_term: f64,
}

/// Everything about a Stokes computation that depends on A₀, the branch and
/// the configuration but not on B (the truncation orders are fixed from a
/// reference B, so nearby B reuse the same discretization).
#[derive(Clone, Debug)]
pub struct StokesPlan {
    pub irregular: IrregularType,
    pub branch: BranchChoice,
    pub geometry: SectorGeometry,
    centered: Vec<Complex64>,
    sector0: Vec<ColumnPlan>,
    sector_l: Vec<ColumnPlan>,
    radius: f64,
    /// arg z at the two matching points, in the frames of Φ₀ and Φ_l.
    arg_m1: f64,
    arg_m2: f64,
    b_scale: f64,
    bits: Option<u32>,
    ode_tol: f64,
    triangularity_tol: f64,
}

fn to_ext(v: &[Complex64]) -> Vec<Ext> {
    v.iter().map(|x| Ext::from_c64(*x)).collect()
}

fn least_within<T: Scalar>(f: &crate::series::FormalSeriesF<T>, j: usize, r: f64) -> Result<(usize, f64)> {
    let (k, m) = optimal_truncation_column(f, j, r)?;
    if k + 1 >= f.coeffs.len() {
        return Err(Error::PrecisionBudget(format!("least term not reached within {} coefficients", f.coeffs.len())));
    }
    Ok((k, m))
}

fn ln_eps_f64() -> f64 {
    (f64::EPSILON / 2.0).ln()
}

impl StokesPlan {
    pub fn new(a: &IrregularType, branch: &BranchChoice, b_ref: &CMat, cfg: &StokesConfig) -> Result<Self> {
        let n = a.n();
        if b_ref.n() != n {
            return Err(Error::Domain("B and A0 dimensions differ".into()));
        }
        if !b_ref.is_finite() {
            return Err(Error::Domain("non-finite B".into()));
        }
        let geometry = sector_geometry(a, branch)?;
        let offset = branch.frame_offset();
        let centered = a.centered();
        let radius = a.kappa_max().max(1.0);
        let level = 1.5 * (1.0 / cfg.eps_target).ln();
        let refs = [geometry.bisector0(), geometry.bisector_l()];
        let mut windows = Vec::new();
        for &reference in &refs {
            for j in 0..n {
                let w: ColumnWindow = column_window(a, j, reference);
                let r = if n == 1 {
                    radius
                } else {
                    let slack = w.rho_min - w.growth.max(0.0);
                    if slack <= 0.05 * w.rho_min {
                        return Err(Error::PrecisionBudget(format!(
                            "column {j} cannot be initialized: growth {:.3} against decay {:.3}",
                            w.growth, w.rho_min
                        )));
                    }
                    cfg.r0_override.unwrap_or(slack / level) * cfg.radius_scale
                };
                if r < 1e-3 {
                    return Err(Error::PrecisionBudget(format!("initialization radius {r:.3e} below floor 1e-3")));
                }
                windows.push((w, r));
            }
        }
        let needed = windows.iter().map(|(w, r)| (1.6 * w.rho_min / r).min(1e6).ceil() as usize + 12).max().unwrap_or(8);
        let needed = needed.clamp(8, crate::series::MAX_TERMS);
        // beyond ~150 terms the coefficients leave the f64 exponent range
        let truncations: Vec<(usize, f64)> = if n == 1 {
            vec![(1, 0.0); windows.len()]
        } else if needed <= 150 {
            let f = formal_f_generic(&a.a, b_ref, needed)?;
            windows.iter().enumerate().map(|(idx, (_, r))| least_within(&f, idx % n, *r)).collect::<Result<_>>()?
        } else {
            let _guard = set_ext_precision(64);
            let f = formal_f_generic(&to_ext(&a.a), &Mat::from_c64(b_ref), needed)?;
            windows.iter().enumerate().map(|(idx, (_, r))| least_within(&f, idx % n, *r)).collect::<Result<_>>()?
        };
        let mut sectors = [Vec::new(), Vec::new()];
        for (idx, ((w, r), (k, m))) in windows.into_iter().zip(truncations).enumerate() {
            let s = idx / n;
            let arg_shift = offset - if s == 1 { TAU } else { 0.0 };
            let arg = if n == 1 { refs[s] + arg_shift } else { w.psi + arg_shift };
            let growth_exponent = if n == 1 { 0.0 } else { w.growth.max(0.0) / r };
            sectors[s].push(ColumnPlan { arg, radius: r, terms: k, growth_exponent, min_term: m });
        }
        let worst_growth = sectors.iter().flatten().map(|c| c.growth_exponent).fold(0.0, f64::max);
        // roundoff of the working precision amplified by the worst growth
        let max_terms = sectors.iter().flatten().map(|c| c.terms).max().unwrap_or(1);
        let need_ext = worst_growth + ln_eps_f64() > (1e-13f64).ln() || max_terms > 150;
        let bits = match (cfg.precision, cfg.auto_extend && need_ext) {
            (Precision::Extended, _) | (Precision::Double, true) => {
                let needed = 64.0 + (worst_growth + level) / std::f64::consts::LN_2;
                Some(cfg.ext_bits.unwrap_or(0).max(needed.ceil() as u32).max(crate::scalar::EXT_DEFAULT_BITS))
            }
            _ => None,
        };
        let [sector0, sector_l] = sectors;
        Ok(StokesPlan {
            irregular: a.clone(),
            branch: branch.clone(),
            arg_m1: geometry.bisector0() + offset,
            arg_m2: geometry.bisector_l() + offset - TAU,
            geometry,
            centered,
            sector0,
            sector_l,
            radius,
            b_scale: 2.0 * (b_ref.norm_max() * n as f64).max(1.0),
            bits,
            ode_tol: cfg.ode_tol,
            triangularity_tol: cfg.triangularity_tol,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits.unwrap_or(53)
    }

    pub fn matching_radius(&self) -> f64 {
        self.radius
    }

    fn residual_template(&self) -> StokesResiduals {
        let cols = self.sector0.iter().chain(&self.sector_l);
        let mut trunc: f64 = 0.0;
        let mut round: f64 = 0.0;
        let eps = match self.bits {
            Some(b) => 2f64.powi(-(b as i32)),
            None => f64::EPSILON / 2.0,
        };
        for c in cols {
            let g = c.growth_exponent.exp();
            trunc = trunc.max(c.min_term * g);
            // steps along the radial leg contribute independently
            round = round.max(eps * g * 1e3);
        }
        StokesResiduals {
            truncation_bound: trunc,
            roundoff_bound: round,
            precision_bits: self.precision_bits(),
            matching_radius: self.radius,
            init_radii: self.sector0.iter().chain(&self.sector_l).map(|c| c.radius).collect(),
            terms: self.sector0.iter().chain(&self.sector_l).map(|c| c.terms).collect(),
            ..Default::default()
        }
    }

    /// Stokes data of B, and C when (g, J) is supplied.
    pub fn run(&self, b: &CMat, gj: Option<(&CMat, &CMat)>) -> Result<StokesData> {
        let n = self.irregular.n();
        if b.n() != n {
            return Err(Error::Domain("B and A0 dimensions differ".into()));
        }
        let raw = match self.bits {
            None => self.run_in::<Complex64>(b, gj)?,
            Some(bits) => {
                let _guard = set_ext_precision(bits);
                self.run_in::<Ext>(b, gj)?
            }
        };
        self.finish(b, raw)
    }

    fn run_in<T: Scalar>(&self, b: &CMat, gj: Option<(&CMat, &CMat)>) -> Result<RawTransitions> {
        let n = self.irregular.n();
        let bt: Mat<T> = Mat::from_c64(b);
        let a: Vec<T> = self.centered.iter().map(|x| T::from_c64(*x)).collect();
        let sys = System::new(&a, &bt, self.b_scale);
        let tol = match self.bits {
            None => self.ode_tol,
            Some(bits) => 2f64.powi(-(bits as i32)),
        };
        let f = if n > 1 {
            let max_terms = self.sector0.iter().chain(&self.sector_l).map(|c| c.terms).max().unwrap_or(1);
            Some(formal_f_generic(&a, &bt, max_terms.max(2))?)
        } else {
            None
        };
        let canonical = |cols: &[ColumnPlan], end_arg: f64| -> Result<Mat<T>> {
            let mut phi = Mat::zeros(n, n);
            for (j, c) in cols.iter().enumerate() {
                let (z, logz) = polar::<T>(c.radius, c.arg);
                let series = match &f {
                    Some(f) => eval_column(f, j, &z, c.terms - 1),
                    None => Mat::identity(1),
                };
                let expo = (bt[(j, j)].clone() * logz - a[j].clone() / z).exp();
                let col = series.scale(&expo);
                let path = PathSpec::new(c.radius, c.arg).radial(self.radius).arc(end_arg);
                phi.set_column(j, &transport_generic(&sys, &col, &path, tol)?);
            }
            Ok(phi)
        };
        let phi0_m1 = canonical(&self.sector0, self.arg_m1)?;
        let phil_m2 = canonical(&self.sector_l, self.arg_m2)?;
        let phi0_m2 = transport_generic(&sys, &phi0_m1, &PathSpec::new(self.radius, self.arg_m1).arc(self.arg_m2 + TAU), tol)?;
        let phil_m1 = transport_generic(&sys, &phil_m2, &PathSpec::new(self.radius, self.arg_m2).arc(self.arg_m1), tol)?;

        let two_pi_i = T::from_f64(2.0) * T::pi() * T::i();
        let m0_inv = Mat::diag(&(0..n).map(|j| (-(two_pi_i.clone() * bt[(j, j)].clone())).exp()).collect::<Vec<_>>());
        let minus = phi0_m1.solve(&phil_m1)?;
        let plus = &phil_m2.solve(&phi0_m2)? * &m0_inv;

        let (c, drift) = match gj {
            None => (None, None),
            Some((g, j)) => {
                let gt: Mat<T> = Mat::from_c64(g);
                let jt: Mat<T> = Mat::from_c64(j);
                let h = frobenius_h_adaptive(&gt, &jt, &a, 1.0 / self.radius, tol)?;
                let chi_at = |rho: f64| -> Result<Mat<T>> {
                    let (z, logz) = polar::<T>(rho, self.arg_m1);
                    eval_chi(&h, &z, &logz)
                };
                let c1 = phi0_m1.solve(&chi_at(self.radius)?)?;
                let far = transport_generic(&sys, &phi0_m1, &PathSpec::new(self.radius, self.arg_m1).radial(2.0 * self.radius), tol)?;
                let c2 = far.solve(&chi_at(2.0 * self.radius)?)?;
                let drift = (&c1 - &c2).norm_max();
                (Some(c1.to_c64()), Some(drift))
            }
        };
        Ok(RawTransitions { minus: minus.to_c64(), plus: plus.to_c64(), c, drift })
    }

    fn finish(&self, b: &CMat, raw: RawTransitions) -> Result<StokesData> {
        let p = &self.geometry.p;
        let pt = p.transpose();
        let sm_raw = &(&pt * &raw.minus) * p;
        let sp_raw = &(&pt * &raw.plus) * p;
        let (s_minus, off_m) = project_unit_triangular(&sm_raw, false);
        let (s_plus, off_p) = project_unit_triangular(&sp_raw, true);
        let worst = off_m.max(off_p);
        if !(worst <= self.triangularity_tol) {
            return Err(Error::Triangularity(worst));
        }
        let lambda = &(&pt * &b.diag_part()) * p;
        let m0 = expm(&b.diag_part().map(|x| x * Complex64::new(0.0, TAU)))?;
        let mut residuals = self.residual_template();
        residuals.off_triangle_minus = off_m;
        residuals.off_triangle_plus = off_p;
        residuals.connection_drift = raw.drift;
        let mut sd = StokesData { s_plus, s_minus, lambda, p: p.clone(), c: raw.c, m0, residuals };
        sd.residuals.monodromy_spectrum = monodromy_residual(&sd, b)?;
        Ok(sd)
    }
}

struct RawTransitions {
    minus: CMat,
    plus: CMat,
    c: Option<CMat>,
    drift: Option<f64>,
}

/// Zero the wrong triangle and set the diagonal to 1; returns the discarded mass.
pub fn project_unit_triangular(m: &CMat, upper: bool) -> (CMat, f64) {
    let n = m.n();
    let mut off: f64 = 0.0;
    let out = CMat::from_fn(n, n, |i, j| {
        if i == j {
            off = off.max((m[(i, i)] - 1.0).norm());
            Complex64::new(1.0, 0.0)
        } else if (i < j) == upper {
            m[(i, j)]
        } else {
            off = off.max(m[(i, j)].norm());
            Complex64::new(0.0, 0.0)
        }
    });
    (out, off)
}

fn j_is_admissible(j: &CMat) -> bool {
    match eig(j) {
        Ok(s) => s.values.iter().all(|a| {
            s.values.iter().all(|b| {
                let d = a - b;
                let k = d.re.round();
                k == 0.0 || (d - Complex64::new(k, 0.0)).norm() > 1e-8
            })
        }),
        Err(_) => false,
    }
}

/// Stokes data of d − (A₀/z² + B/z)dz. C is included (with g = I, J = B)
/// whenever B has no two eigenvalues differing by a nonzero integer.
pub fn stokes_data(a: &IrregularType, b: &CMat, branch: &BranchChoice, cfg: &StokesConfig) -> Result<StokesData> {
    let plan = StokesPlan::new(a, branch, b, cfg)?;
    let id = CMat::identity(b.n());
    let gj = if j_is_admissible(b) { Some((&id, b)) } else { None };
    let mut sd = plan.run(b, gj)?;
    if let Some(c) = &sd.c {
        sd.residuals.monodromy_direct = Some(direct_residual(&sd, c, b)?);
    }
    Ok(sd)
}

/// ‖S₋S₊e^{2πiΛ} − P⁻¹Ce^{2πiJ}C⁻¹P‖.
pub fn direct_residual(sd: &StokesData, c: &CMat, j: &CMat) -> Result<f64> {
    let lhs = sd.local_monodromy()?;
    let e = expm(&j.map(|x| x * Complex64::new(0.0, TAU)))?;
    let pt = sd.p.transpose();
    let rhs = &(&(&(&pt * c) * &e) * &c.inverse()?) * &sd.p;
    Ok(lhs.dist(&rhs))
}

/// Assignment distance between the spectra of S₋S₊e^{2πiΛ} and e^{2πiB}.
pub fn monodromy_residual(sd: &StokesData, b: &CMat) -> Result<f64> {
    let lhs = eig(&sd.local_monodromy()?)?;
    let rhs = eig(&expm(&b.map(|x| x * Complex64::new(0.0, TAU)))?)?;
    Ok(lhs.assignment_distance(&rhs)?.0)
}

/// The point of G* attached to Stokes data.
pub fn gstar_from_stokes(sd: &StokesData) -> Result<GStarPoint> {
    let lam = sd.lambda.diagonal();
    let i_pi = Complex64::new(0.0, PI);
    let e_m = CMat::diag(&lam.iter().map(|l| (-i_pi * l).exp()).collect::<Vec<_>>());
    let e_2 = CMat::diag(&lam.iter().map(|l| (i_pi * 2.0 * l).exp()).collect::<Vec<_>>());
    let b_minus = (&e_m * &sd.s_minus.inverse()?).lower();
    let b_plus = (&(&e_m * &sd.s_plus) * &e_2).upper();
    Ok(GStarPoint::from_parts(&b_minus, &b_plus, &lam))
}

/// ν(B).
pub fn nu(b: &CMat, a: &IrregularType, branch: &BranchChoice, cfg: &StokesConfig) -> Result<GStarPoint> {
    let plan = StokesPlan::new(a, branch, b, cfg)?;
    gstar_from_stokes(&plan.run(b, None)?)
}

/// ν̂(g, J) = (ν(gJg⁻¹), C).
pub fn nu_hat(g: &CMat, j: &CMat, a: &IrregularType, branch: &BranchChoice, cfg: &StokesConfig) -> Result<(GStarPoint, CMat, StokesData)> {
    if !j_is_admissible(j) {
        return Err(Error::Domain("J has eigenvalues differing by a nonzero integer".into()));
    }
    let b = &(g * j) * &g.inverse()?;
    let plan = StokesPlan::new(a, branch, &b, cfg)?;
    let mut sd = plan.run(&b, Some((g, j)))?;
    let c = sd.c.clone().expect("connection matrix requested");
    sd.residuals.monodromy_direct = Some(direct_residual(&sd, &c, j)?);
    Ok((gstar_from_stokes(&sd)?, c, sd))
}

/// Connection matrix C with χ = Φ₀·C.
pub fn connection_matrix(g: &CMat, j: &CMat, a: &IrregularType, branch: &BranchChoice, cfg: &StokesConfig) -> Result<CMat> {
    Ok(nu_hat(g, j, a, branch, cfg)?.1)
}

/// Φ_i at the bisector point r₀e^{iθᵢ} of Sect_i (i ∈ {0, l}) by direct
/// evaluation of the optimally truncated series; returns (point, value).
pub fn canonical_solution(
    a: &IrregularType,
    b: &CMat,
    sector_index: usize,
    r0: f64,
    geometry: &SectorGeometry,
    branch: &BranchChoice,
) -> Result<(Complex64, CMat)> {
    let n = a.n();
    let (dir, arg) = if sector_index == 0 {
        (geometry.bisector0(), geometry.bisector0() + branch.frame_offset())
    } else if sector_index == geometry.l {
        (geometry.bisector_l(), geometry.bisector_l() + branch.frame_offset() - TAU)
    } else {
        return Err(Error::Domain(format!("sector index must be 0 or l = {}", geometry.l)));
    };
    let point = Complex64::from_polar(r0, dir);
    if !(r0 > 0.0) {
        return Err(Error::Domain("r0 must be positive".into()));
    }
    let needed = if n > 1 { ((2.0 * a.kappa_max() / r0).min(1e6).ceil() as usize + 12).min(crate::series::MAX_TERMS) } else { 1 };
    let value = if needed <= 150 {
        canonical_value::<Complex64>(&a.a, &Mat::from_c64(b), r0, arg, needed)?
    } else {
        let _guard = set_ext_precision(crate::scalar::EXT_DEFAULT_BITS);
        canonical_value::<Ext>(&to_ext(&a.a), &Mat::from_c64(b), r0, arg, needed)?.to_c64()
    };
    Ok((point, value))
}

fn canonical_value<T: Scalar>(a: &[T], b: &Mat<T>, r0: f64, arg: f64, terms: usize) -> Result<Mat<T>> {
    let n = a.len();
    let (z, logz) = polar::<T>(r0, arg);
    let f = if n > 1 { Some(with_truncation(formal_f_generic(a, b, terms)?, r0)?) } else { None };
    let mut value = Mat::zeros(n, n);
    for j in 0..n {
        let series = match &f {
            Some(f) => eval_column(f, j, &z, f.trunc_index - 1),
            None => Mat::identity(1),
        };
        let e = (b[(j, j)].clone() * logz.clone() - a[j].clone() / z.clone()).exp();
        value.set_column(j, &series.scale(&e));
    }
    Ok(value)
}
