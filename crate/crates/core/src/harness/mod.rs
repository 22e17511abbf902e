//! Verification harness: seeded sampling, finite-difference Jacobians and
//! the property checks.

pub mod checks;
pub mod config;
pub mod jacobian;
pub mod report;
pub mod sampling;

pub use checks::{run_check, CHECKS};
pub use config::RunConfig;
pub use report::{to_json, CheckReport};
