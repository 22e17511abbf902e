//! Run configuration (JSON).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::stokes::{BranchChoice, IrregularType, Precision, StokesConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub stokes_eps: f64,
    /// Overrides the headline tolerance of a check.
    pub check_tol: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ode_tol: 1e-17, stokes_eps: 1e-15, check_tol: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    /// Dimensions swept by the checks; empty means just `n`.
    pub dims: Vec<usize>,
    /// Diagonal of A₀ as [re, im] pairs; default i·(n−1, …, 1, 0).
    #[serde(rename = "A0")]
    pub a0: Option<Vec<[f64; 2]>>,
    #[serde(rename = "B")]
    pub b: Option<Vec<Vec<[f64; 2]>>>,
    pub seed: u64,
    pub trials: usize,
    /// Haar samples per dimension for the convexity check.
    pub samples: usize,
    pub tolerances: Tolerances,
    pub precision: Precision,
    pub r0_override: Option<f64>,
    pub output_dir: Option<String>,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            dims: Vec::new(),
            a0: None,
            b: None,
            seed: 0,
            trials: 20,
            samples: 500,
            tolerances: Tolerances::default(),
            precision: Precision::Double,
            r0_override: None,
            output_dir: None,
            svg: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for &n in &self.dims() {
            if n == 0 {
                return Err(Error::Config("n must be at least 1".into()));
            }
            if n > 8 {
                return Err(Error::Config(format!("n = {n} exceeds the supported maximum 8")));
            }
        }
        if let Some(a) = &self.a0 {
            if a.len() != self.n {
                return Err(Error::Config(format!("A0 has {} entries, n = {}", a.len(), self.n)));
            }
            self.irregular_type(self.n)?;
        }
        if let Some(b) = &self.b {
            if b.len() != self.n || b.iter().any(|r| r.len() != self.n) {
                return Err(Error::Config("B must be n×n".into()));
            }
        }
        let t = &self.tolerances;
        if !(t.ode_tol > 0.0 && t.stokes_eps > 0.0 && t.stokes_eps < 1e-2) {
            return Err(Error::Config("tolerances must be positive and stokes_eps < 1e-2".into()));
        }
        if let Some(r) = self.r0_override {
            if !(r > 0.0) {
                return Err(Error::Config("r0_override must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        if self.dims.is_empty() {
            vec![self.n]
        } else {
            self.dims.clone()
        }
    }

    /// A₀ for dimension `n`: the configured one when its size matches,
    /// otherwise i·diag(n−1, …, 0).
    pub fn irregular_type(&self, n: usize) -> Result<IrregularType> {
        match &self.a0 {
            Some(a) if a.len() == n => {
                IrregularType::new(a.iter().map(|&[re, im]| Complex64::new(re, im)).collect()).map_err(|e| Error::Config(e.to_string()))
            }
            _ => default_irregular_type(n),
        }
    }

    pub fn branch(&self, a: &IrregularType) -> BranchChoice {
        BranchChoice::default_for(a)
    }

    pub fn b_matrix(&self) -> Option<CMat> {
        self.b.as_ref().map(|rows| CMat::from_re_im(rows))
    }

    pub fn stokes_config(&self) -> StokesConfig {
        StokesConfig {
            eps_target: self.tolerances.stokes_eps,
            ode_tol: self.tolerances.ode_tol,
            precision: self.precision,
            r0_override: self.r0_override,
            ..StokesConfig::default()
        }
    }

    /// Per-trial stream index, distinct across dimensions.
    pub fn stream(n: usize, trial: usize) -> u64 {
        ((n as u64) << 32) | trial as u64
    }
}

pub fn default_irregular_type(n: usize) -> Result<IrregularType> {
    IrregularType::new((0..n).map(|k| Complex64::new(0.0, (n - 1 - k) as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_json(r#"{"n": 3, "seed": 7, "A0": [[0,0],[1,0],[0,1]]}"#).unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.irregular_type(3).unwrap().a[1], Complex64::new(1.0, 0.0));
        assert_eq!(cfg.irregular_type(2).unwrap().a, vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_json(r#"{"n": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n": 2, "A0": [[1,0],[1,0]]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n": 2, "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n": 2, "B": [[[0,0]]]}"#).is_err());
    }
}
