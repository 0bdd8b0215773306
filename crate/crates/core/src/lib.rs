//! Offset linear canonical transforms, their short-time variant, ambiguity
//! functions and magnitude-only recovery.

pub mod ambiguity;
pub mod error;
mod fft;
pub mod harness;
pub mod pairs;
pub mod params;
pub mod phase;
pub mod recovery;
pub mod signal;
pub mod stolct;
pub mod transforms;

pub use error::{Error, Result};
pub use params::{ParameterMatrix, SpecialCase};
pub use phase::{phase_invariant_error, PhaseAlignment};
pub use signal::{BandLimit, Grid, SampledSignal, Support};
