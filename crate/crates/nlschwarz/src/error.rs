use thiserror::Error;

/// Errors produced by mesh construction, assembly, factorizations and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("singular matrix{}", fmt_subdomain(.subdomain))]
    SingularMatrix { subdomain: Option<usize> },

    #[error("non-physical deformation (det F <= 0){}", fmt_element(.element))]
    NonPhysicalDeformation { element: Option<usize> },

    #[error("inner Newton diverged on {}: residual {residual:.3e} after {iterations} iterations",
            level_name(.subdomain))]
    InnerDivergence {
        /// `Some(i)` for subdomain `i`, `None` for the coarse level.
        subdomain: Option<usize>,
        residual: f64,
        iterations: usize,
    },

    #[error("GMRES breakdown: Arnoldi norm {arnoldi_norm:.3e} with residual {residual:.3e}")]
    GmresBreakdown { arnoldi_norm: f64, residual: f64 },

    #[error("empty coarse space: the decomposition has no interface vertex nodes")]
    EmptyCoarseSpace,

    #[error("interface component {component} has no anchors (no adjacent vertex node and no Dirichlet endpoint)")]
    UnassignedComponent { component: usize },

    #[error("stale correction state: the tangent was requested at a different iterate than the residual evaluation")]
    StaleState,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_subdomain(s: &Option<usize>) -> String {
    match s {
        Some(i) => format!(" in subdomain {i}"),
        None => String::new(),
    }
}

fn fmt_element(e: &Option<usize>) -> String {
    match e {
        Some(i) => format!(" in element {i}"),
        None => String::new(),
    }
}

fn level_name(s: &Option<usize>) -> String {
    match s {
        Some(i) => format!("subdomain {i}"),
        None => "the coarse level".to_string(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
