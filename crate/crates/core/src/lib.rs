//! Optomechanically induced transparency in a cavity coupled to a chain of
//! mechanical modes with phase-dependent phonon exchange.
//!
//! The crate covers the mean-field steady state, first- and second-order probe
//! sidebands (direct solve for any chain length, closed forms for one or two
//! modes), dark-mode analysis, the N-mode normal-mode picture, and a
//! time-domain oracle that integrates the full nonlinear equations.
//!
//! Everything numerical is generic over [`Real`]; `f64` aliases are exported
//! at the crate root, and `f32` aliases carry a `32` suffix.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Matrix assembly reads better with explicit indices.
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod analysis;
pub mod config;
pub mod darkmode;
pub mod error;
pub mod figures;
pub mod linalg;
pub mod model;
pub mod nmode;
pub mod oracle;
pub mod presets;
pub mod scalar;
pub mod sidebands;
pub mod steady;
pub mod sweep;
pub mod units;

pub use error::{OmitError, Result};
pub use scalar::{rel_diff, Cx, Real};

pub type SystemConfig64 = model::SystemConfig<f64>;
pub type SystemConfig32 = model::SystemConfig<f32>;
pub type SteadyState64 = steady::SteadyState<f64>;
pub type SteadyState32 = steady::SteadyState<f32>;
pub type Spectrum64 = sidebands::spectrum::Spectrum<f64>;
pub type Spectrum32 = sidebands::spectrum::Spectrum<f32>;
pub type SidebandAmplitudes64 = sidebands::SidebandAmplitudes<f64>;
pub type SidebandAmplitudes32 = sidebands::SidebandAmplitudes<f32>;
