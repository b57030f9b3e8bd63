use thiserror::Error;

/// Everything that can go wrong inside the simulator, the phase-space
/// oracles and the optimizer.
#[derive(Debug, Error)]
pub enum Error {
    /// Amplitude mass would be lost off the top of the truncated Fock space.
    #[error("truncation error: {what} (lost mass {mass:e}, limit {limit:e})")]
    Truncation {
        what: &'static str,
        mass: f64,
        limit: f64,
    },

    #[error("photon number {n} out of range for dimension {dim}")]
    Index { n: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    /// A projective outcome that cannot occur for the given state.
    #[error("detection outcome has zero probability")]
    ZeroProbability,

    /// The cross-Wigner kernel recurrence is only trusted up to `max` levels.
    #[error("truncation error: state dimension {dim} exceeds Wigner kernel limit {max}")]
    KernelLimit { dim: usize, max: usize },

    #[error("Wigner grids do not share the same sampling")]
    GridMismatch,

    /// The Wigner function does not vanish on the grid boundary, so the
    /// moment integrals are not trustworthy.
    #[error("Wigner function not contained in grid: |W| = {edge:e} on boundary")]
    BoundaryMass { edge: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible starting point for g_eff0 = {g_eff0}")]
    Infeasible { g_eff0: f64 },

    #[error("optimizer did not converge: {0}")]
    NotConverged(String),

    #[error("malformed grid file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
