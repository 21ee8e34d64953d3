use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor was handed a value that violates a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation needs non-zero accumulated dispersion.
    #[error("accumulated dispersion is zero: {0}")]
    ZeroDispersion(&'static str),

    /// An analytic formula was asked for outside its derivation regime.
    #[error("outside analytic regime: {0}")]
    OutsideRegime(String),

    /// Root bracketing failed: both ends of the bracket have the same sign.
    #[error("no sign change on [{lo}, {hi}]; widen the bracket")]
    SameSignBracket { lo: f64, hi: f64 },

    /// An iterative search ran out of iterations; carries the best iterate.
    #[error("no convergence after {iterations} iterations (best x = {best_x}, f = {best_value})")]
    NoConvergence {
        iterations: usize,
        best_x: f64,
        best_value: f64,
    },

    /// Time-domain intensity leaks into the grid edges; the grid cannot
    /// represent the state without wrap-around.
    #[error(
        "grid aliasing: edge intensity is {edge_ratio:.3e} of the peak (limit 1e-12); \
         enlarge the span or the number of points"
    )]
    GridAliasing { edge_ratio: f64 },

    /// An automatically sized grid would exceed the dense-grid budget.
    #[error("grid of {required} points per axis exceeds the dense-grid limit of {limit}")]
    GridTooLarge { required: usize, limit: usize },

    /// Conditional slices disagree beyond tolerance, or too little mass remains.
    #[error("oracle inconsistency: {0}")]
    OracleInconsistent(String),

    /// Wavelength outside the validity range of a Sellmeier fit.
    #[error("wavelength {wavelength:.4e} m outside Sellmeier validity [{lo:.4e}, {hi:.4e}] m")]
    WavelengthOutOfRange { wavelength: f64, lo: f64, hi: f64 },

    /// Transverse wavevector exceeds the total wavevector (evanescent wave).
    #[error("evanescent configuration: |k_x| exceeds the total wavevector")]
    Evanescent,

    /// No crystal orientation satisfies the phase-matching condition.
    #[error("not phase-matchable: phase mismatch has no zero crossing for this configuration")]
    NotPhaseMatchable,

    /// The width estimate divides by a vanishing frequency derivative.
    #[error("sigma estimate singular: d(phase mismatch)/d(omega) is ~0")]
    SigmaEstimateSingular,

    /// QBER is undefined because no events are accepted.
    #[error("undefined QBER: acceptance probability is zero")]
    UndefinedQber,

    /// The link is insecure even with a zero-length varied arm.
    #[error("key rate is zero even at zero channel length; no security distance exists")]
    InsecureAtZeroLength,

    /// An internal cross-check failed (indicates a bug, not bad input).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
