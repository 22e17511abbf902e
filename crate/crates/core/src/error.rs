use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not in big cell: leading minor tau_{k} vanishes")]
    NotInBigCell { k: usize },
    #[error("dressing solve singular")]
    DressingSingular,
    #[error("radius too large: series terms increase from the start")]
    RadiusTooLarge,
    #[error("precision budget exceeded: {0} (enable extended precision)")]
    PrecisionBudget(String),
    #[error("triangularity violated: off-triangle residual {0:.3e}")]
    Triangularity(f64),
    #[error("degenerate bisector: {0}")]
    DegenerateBisector(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Whether the error comes from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::Numerical(_)
                | Error::DressingSingular
                | Error::RadiusTooLarge
                | Error::PrecisionBudget(_)
                | Error::Triangularity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
