use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: n = {n}, k = {k} (need 1 <= k <= n-1)")]
    InvalidDimension { n: usize, k: usize },
    #[error("kappa must be positive and finite, got {0}")]
    InvalidKappa(f64),
    #[error("spectral gap {measured} disagrees with 2*kappa = {expected}")]
    GapMismatch { measured: f64, expected: f64 },
    #[error("element violates the invariants of {space}: residual {residual:.3e}")]
    NotInSpace { space: &'static str, residual: f64 },
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("kernel {kernel} evaluated outside its domain at {at}")]
    KernelDomain { kernel: String, at: f64 },
    #[error("operator is not self-adjoint: asymmetry {0:.3e}")]
    NotSelfAdjoint(f64),
    #[error("operator has negative eigenvalue {0:.3e}")]
    NegativeSpectrum(f64),
    #[error("point is not on the orbit: {0}")]
    NotOnOrbit(String),
    #[error("subspaces are not transverse (condition number {0:.3e})")]
    NotTransverse(f64),
    #[error("projection did not converge: gradient {grad:.3e} after {iters} iterations")]
    NoConvergence { grad: f64, iters: usize },
    #[error("projection is degenerate: spectral gap {0:.3e}")]
    Degenerate(f64),
    #[error("chart is ill-conditioned at this point (condition number {0:.3e})")]
    ChartBreakdown(f64),
    #[error("kernel {0} has no stored Taylor coefficients")]
    NoTaylor(String),
    #[error("finite-difference step {0} is not usable")]
    BadStep(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
