use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use super::generate::SignalSpec;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::recovery::BandlimitedMode;
use crate::signal::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    MultiOlct,
    Stolct,
    Nonseparable,
    Bandlimited,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::MultiOlct => "multi-olct",
            SolverKind::Stolct => "stolct",
            SolverKind::Nonseparable => "nonseparable",
            SolverKind::Bandlimited => "bandlimited",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown solver '{s}'")))
    }
}

/// Where the parameter matrices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MatrixSource {
    List { matrices: Vec<ParameterMatrix> },
    /// `count` matrices `(r b, b, (r b - 1) / b, 1)` whose ratios `r = a / b`
    /// are stratified over one period `[0, 2 pi / step^2)` of the lag model.
    RatioSweep {
        count: usize,
        seed: u64,
        #[serde(default = "unit")]
        b: f64,
        #[serde(default)]
        y0: f64,
        #[serde(default)]
        w0: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl MatrixSource {
    pub fn len(&self) -> usize {
        match self {
            MatrixSource::List { matrices } => matrices.len(),
            MatrixSource::RatioSweep { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The matrices for a signal sampled with spacing `step`.
    pub fn matrices(&self, step: f64) -> Result<Vec<ParameterMatrix>> {
        match self {
            MatrixSource::List { matrices } => Ok(matrices.clone()),
            &MatrixSource::RatioSweep { count, seed, b, y0, w0 } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let period = 2.0 * PI / (step * step);
                (0..count)
                    .map(|k| {
                        let r = period * (k as f64 + rng.random_range(0.1..0.9)) / count as f64;
                        let a = r * b;
                        ParameterMatrix::new(a, b, (a - 1.0) / b, 1.0, y0, w0)
                    })
                    .collect()
            }
        }
    }
}

/// Measurement grids; missing entries get defaults derived from the signal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// STOLCT shift grid (lattice-aligned).
    #[serde(default)]
    pub shifts: Option<Grid>,
    /// STOLCT frequency grid.
    #[serde(default)]
    pub freqs: Option<Grid>,
    /// Frequencies at which the bandlimited solver samples.
    #[serde(default)]
    pub u: Option<Grid>,
    /// Shift range `[vmin, vmax]` covered by the bandlimited samples.
    #[serde(default)]
    pub v_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub solver: SolverKind,
    pub signal: SignalSpec,
    #[serde(default)]
    pub window: Option<SignalSpec>,
    pub matrices: MatrixSource,
    /// Relative noise level: Gaussian noise of deviation `noise_sigma * max`
    /// is added to magnitude-squared data, which is then clamped at zero.
    #[serde(default)]
    pub noise_sigma: f64,
    /// When non-empty, runs every listed level instead of `noise_sigma`.
    #[serde(default)]
    pub noise_sweep: Vec<f64>,
    /// Multi-OLCT only: solve with the first `k` matrices for every listed `k`.
    #[serde(default)]
    pub measurement_counts: Vec<usize>,
    #[serde(default = "one_trial")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub bandlimited: Option<BandlimitedMode>,
    /// Sampling rate of the bandlimited solver relative to the required rate.
    #[serde(default = "unit")]
    pub rate_factor: f64,
    pub output_path: PathBuf,
}

fn one_trial() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn noise_levels(&self) -> Vec<f64> {
        if self.noise_sweep.is_empty() {
            vec![self.noise_sigma]
        } else {
            self.noise_sweep.clone()
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        match self.solver {
            SolverKind::MultiOlct if !self.measurement_counts.is_empty() => self.measurement_counts.clone(),
            SolverKind::MultiOlct => vec![self.matrices.len()],
            _ => vec![1],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.id.is_empty() {
            return bad("id must not be empty".into());
        }
        for &s in std::iter::once(&self.noise_sigma).chain(&self.noise_sweep) {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("noise level {s} must be finite and nonnegative"));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.matrices.is_empty() {
            return bad("at least one matrix is required".into());
        }
        if let Some(&k) = self.measurement_counts.iter().find(|&&k| k == 0 || k > self.matrices.len()) {
            return bad(format!("measurement count {k} must lie in 1..={}", self.matrices.len()));
        }
        if !(self.rate_factor.is_finite() && self.rate_factor > 0.0) {
            return bad(format!("rate_factor {} must be positive", self.rate_factor));
        }
        if self.solver != SolverKind::MultiOlct && self.window.is_none() {
            return bad(format!("solver {} needs a window", self.solver.as_str()));
        }
        if self.solver == SolverKind::Bandlimited {
            if self.bandlimited.is_none() {
                return bad("solver bandlimited needs a bandlimited mode".into());
            }
            if self.grids.u.is_none() {
                return bad("solver bandlimited needs grids.u".into());
            }
        }
        if let Some([lo, hi]) = self.grids.v_range {
            if !(lo < hi) {
                return bad(format!("v_range [{lo}, {hi}] is empty"));
            }
        }
        Ok(())
    }
}
