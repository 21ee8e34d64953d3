//! Temporal widths of down-converted photon pairs after dispersive fiber
//! propagation, optimization of the source that emits them, an estimate of
//! the phase-matching width a BBO crystal can actually deliver, and the
//! entanglement-based BB84 link budget that ties it all together.
//!
//! Layout:
//! - [`temporal`]: closed-form arrival-time widths (heralded/unheralded,
//!   with and without detector jitter).
//! - [`analytic`]: closed-form optima over the pump duration and the
//!   regime classification for asymmetric links.
//! - [`numeric`]: golden-section/coordinate-descent searches, sweeps,
//!   bisection; doubles as the oracle for the analytic results.
//! - [`oracle`]: grid construction of the joint two-photon intensity and
//!   empirical width measurement, used to validate every closed form.
//! - [`crystal`]: Sellmeier model of BBO and the effective phase-matching
//!   width of a cut crystal.
//! - [`qkd`]: detection windows, dark counts, QBER, key-rate lower bound,
//!   and maximum-security-distance solvers.
//! - [`montecarlo`]: event-level simulator backing the QKD formulas.
//!
//! All public interfaces use SI base units.

pub mod analytic;
pub mod crystal;
pub mod error;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod qkd;
pub mod temporal;
pub mod units;

pub use error::{Error, Result};
pub use temporal::{ChannelParams, DetectorParams, SourceParams, TemporalWidths};
