use thiserror::Error;

/// Failure modes surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two eigenvalues are closer than the requested separation while a
    /// strict (uniquely labelled) spectrum was demanded.
    #[error("near-degenerate eigenvalues: gap {gap:.3e} below threshold {threshold:.3e}")]
    NearDegenerate { gap: f64, threshold: f64 },

    /// An iterative stage (root polish, inverse iteration, QR sweep) did not
    /// reach its residual target.
    #[error("eigensolver failed to converge: residual {residual:.3e} after {iterations} iterations")]
    ConvergenceFailure { residual: f64, iterations: usize },

    /// A left/right pairing matrix was numerically singular, so the
    /// biorthonormal dual set does not exist.
    #[error("singular left/right pairing (pivot {pivot:.3e}); eigenbasis is defective or incomplete")]
    SingularPairing { pivot: f64 },

    /// A propagated state left the representable range (the generator has a
    /// large positive imaginary part or the step size is far too coarse).
    #[error("state norm overflow during propagation at t = {t:.6}")]
    StepOverflow { t: f64 },

    /// Matrix/vector dimensions do not match the operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input failed a structural validation (hermiticity, trace, rates).
    #[error("invalid model input: {0}")]
    InvalidModel(String),

    /// No eigenvalue within tolerance of zero, where a steady state was
    /// requested.
    #[error("no zero mode found (closest eigenvalue magnitude {closest:.3e})")]
    NoZeroMode { closest: f64 },

    /// A perturbative denominator fell below the guard threshold, so the
    /// first-order amplitude is not trustworthy.
    #[error("perturbative denominator {denominator:.3e} below guard {guard:.3e} for channel {channel}")]
    SmallDenominator {
        denominator: f64,
        guard: f64,
        channel: String,
    },

    /// A closed-form eigenvector normalization vanished (isolated parameter
    /// point where the analytic expressions break down).
    #[error("analytic eigenvector normalization vanished for level {level}")]
    DegenerateEigenvector { level: usize },
}
