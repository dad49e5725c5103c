use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor was fed values violating a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Operation requires a different geometry kind (e.g. cuboid-only ops).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Displacement direction not supported by the requested closed form.
    #[error("unsupported displacement: {0}")]
    UnsupportedDisplacement(String),

    /// Argument outside a special function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Derivative or expansion order above the supported cap.
    #[error("unsupported order {requested} (maximum {max})")]
    UnsupportedOrder { requested: usize, max: usize },

    /// Too few local minima to fit a line through them.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Cost guard tripped on an over-large problem.
    #[error("size limit exceeded: {sites} sites (maximum {max})")]
    SizeLimit { sites: u64, max: u64 },

    /// Adaptive quadrature ran out of budget before reaching the tolerance.
    #[error(
        "quadrature did not converge: estimated relative error {achieved:.3e} \
         (requested {requested:.3e}) after {evaluations} evaluations"
    )]
    QuadratureNonConvergence {
        achieved: f64,
        requested: f64,
        evaluations: u64,
    },
}
