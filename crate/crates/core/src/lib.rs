//! Stokes data and the monodromy map of the irregular connection
//! d − (A₀/z² + B/z)dz, together with the Poisson structures on g*, G*, K*
//! and on the space U₊ of Stokes matrices.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod mat;
pub mod plg;
pub mod scalar;
pub mod series;
pub mod stokes;
pub mod uplus;

pub use error::{Error, Result};
pub use mat::{CMat, Mat};
pub use num_complex::Complex64;
