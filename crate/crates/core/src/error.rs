//! Error taxonomy shared by every module.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the solvers and simulators.
///
/// Unstable closed loops in *cost evaluation* are deliberately **not** errors:
/// sweeps over gains report an infinite-cost signal (`f64::INFINITY`) so that
/// unstable regions can appear in plots. Errors are reserved for invalid
/// inputs and for solvers that cannot certify their output.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent grids, lengths, or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A fixed point or ODE solution exists numerically but violates the
    /// admissibility/stability certificate required by the theory.
    #[error("no equilibrium certificate: {0}")]
    NoEquilibrium(String),

    /// The request exceeds a deliberate resource guard (e.g. the slow
    /// double-integral oracle on a large grid).
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Internal cross-check failed; indicates a bug, not a user error.
    #[error("internal consistency: {0}")]
    Internal(String),
}
