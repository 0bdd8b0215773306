//! Magnitude-only recovery: multi-transform tomography, short-time recovery,
//! sign recovery for real signals and sampled recovery of bandlimited signals.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::Result;
use crate::phase::phase_invariant_error;
use crate::signal::SampledSignal;

mod bandlimited;
mod lag_matrix;
mod multi;
mod nonseparable;
mod stft;

pub use bandlimited::{recover_bandlimited_sampled, sample_for_recovery, BandlimitedMode, BandlimitedSetup};
pub use lag_matrix::{assemble_lag_matrix, LagProductMatrix};
pub use multi::{recover_from_multi_olct, MagnitudeData, RANK_GAP_WARNING};
pub use nonseparable::{recover_nonseparable_real, signs_from_components, Separability, AMP_FLOOR};
pub use stft::{recover_from_stolct, StolctRecoveryOptions};

/// Output of every solver.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    /// Phase-invariant error against ground truth once [`RecoveryReport::compare`]
    /// is called; before that, a solver-specific data misfit.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub signal: SampledSignal,
}

impl RecoveryReport {
    pub(crate) fn new(signal: SampledSignal, residual: f64) -> Self {
        Self { residual, verdict: None, diagnostics: BTreeMap::new(), warnings: Vec::new(), signal }
    }

    pub(crate) fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), value);
    }

    /// Replaces the residual by the phase-invariant error against `truth`,
    /// keeping the previous value as the `data_misfit` diagnostic.
    pub fn compare(mut self, truth: &SampledSignal) -> Result<Self> {
        self.diagnostics.entry("data_misfit".into()).or_insert(self.residual);
        self.residual = phase_invariant_error(truth, &self.signal)?.residual;
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
