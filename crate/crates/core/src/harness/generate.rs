use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::SampledSignal;
use crate::stolct::Window;

/// Shape of a generated test signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    Gaussian { sigma: f64, center: f64 },
    /// `e^{j rate (t - center)^2 / 2}`, optionally under a Gaussian envelope.
    Chirp {
        rate: f64,
        center: f64,
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// `n` uniform samples in `[-1, 1]` (complex unless `real`), centred in the frame.
    RandomCompact {
        n: usize,
        seed: u64,
        #[serde(default)]
        real: bool,
    },
    /// `n` samples whose DFT vanishes outside `|freq| <= omega` (cycles per unit).
    RandomBandlimited {
        omega: f64,
        n: usize,
        seed: u64,
        #[serde(default)]
        real: bool,
    },
    /// Two smooth bumps of half-width `width` whose supports are `gap` apart.
    TwoBumps {
        gap: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        flip: bool,
    },
    /// `exp(-1 / (1 - x^2))` bump, `x = (t - center) / width`, scaled to peak 1.
    Bump { center: f64, width: f64 },
}

fn one() -> f64 {
    1.0
}

/// A signal kind sampled on `length` points of spacing `step`. The frame
/// starts at lattice index `origin`, or is centred on zero when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub length: usize,
    pub step: f64,
    #[serde(default)]
    pub origin: Option<i64>,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, length: usize, step: f64) -> Self {
        Self { kind, length, step, origin: None }
    }

    pub fn origin(&self) -> i64 {
        self.origin.unwrap_or(-((self.length / 2) as i64))
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.length == 0 {
            return bad("length must be positive".into());
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step {} must be positive", self.step));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match self.kind {
            SignalKind::Gaussian { sigma, center } if !positive(sigma) || !center.is_finite() => {
                bad(format!("gaussian needs sigma > 0, got {sigma}"))
            }
            SignalKind::Chirp { rate, center, sigma } if !rate.is_finite() || !center.is_finite() || sigma.is_some_and(|s| !positive(s)) => {
                bad("chirp needs finite rate and center and sigma > 0".into())
            }
            SignalKind::RandomCompact { n, .. } | SignalKind::RandomBandlimited { n, .. } if n == 0 || n > self.length => {
                bad(format!("n = {n} must lie in 1..={}", self.length))
            }
            SignalKind::RandomBandlimited { omega, .. } if !positive(omega) || omega >= 0.5 / self.step => {
                bad(format!("omega = {omega} must lie in (0, {})", 0.5 / self.step))
            }
            SignalKind::TwoBumps { gap, width, .. } if !(gap.is_finite() && gap >= 0.0) || !positive(width) => {
                bad(format!("two_bumps needs gap >= 0 and width > 0, got {gap}, {width}"))
            }
            SignalKind::Bump { center, width } if !positive(width) || !center.is_finite() => {
                bad(format!("bump needs width > 0, got {width}"))
            }
            _ => Ok(()),
        }
    }
}

fn bump(t: f64, center: f64, width: f64) -> f64 {
    let x = (t - center) / width;
    if x.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Deterministic samples of `spec`.
pub fn generate_signal(spec: &SignalSpec) -> Result<SampledSignal> {
    spec.validate()?;
    let (origin, step, len) = (spec.origin(), spec.step, spec.length);
    let real = |f: &dyn Fn(f64) -> f64| SampledSignal::from_fn(origin, step, len, |t| Complex64::new(f(t), 0.0));
    match spec.kind {
        SignalKind::Gaussian { sigma, center } => real(&|t| (-(t - center).powi(2) / (2.0 * sigma * sigma)).exp()),
        SignalKind::Chirp { rate, center, sigma } => SampledSignal::from_fn(origin, step, len, |t| {
            let env = sigma.map_or(1.0, |s| (-(t - center).powi(2) / (2.0 * s * s)).exp());
            Complex64::from_polar(env, 0.5 * rate * (t - center).powi(2))
        }),
        SignalKind::Bump { center, width } => real(&|t| bump(t, center, width)),
        SignalKind::TwoBumps { gap, width, flip } => {
            let c = 0.5 * gap + width;
            let s = if flip { -1.0 } else { 1.0 };
            real(&|t| bump(t, -c, width) + s * bump(t, c, width))
        }
        SignalKind::RandomCompact { n, seed, real } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = vec![Complex64::new(0.0, 0.0); len];
            let first = (len - n) / 2;
            for v in &mut x[first..first + n] {
                let re = rng.random_range(-1.0..=1.0);
                let im = if real { 0.0 } else { rng.random_range(-1.0..=1.0) };
                *v = Complex64::new(re, im);
            }
            SampledSignal::new(x, origin, step)
        }
        SignalKind::RandomBandlimited { omega, n, seed, real } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kmax = (omega * n as f64 * step).floor() as i64;
            // keep the Nyquist bin empty so real signals stay real
            let kmax = kmax.min((n as i64 - 1) / 2);
            let mut spec_bins = vec![Complex64::new(0.0, 0.0); n];
            let idx = |k: i64| k.rem_euclid(n as i64) as usize;
            for k in -kmax..=kmax {
                let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                spec_bins[idx(k)] = z;
            }
            if real {
                spec_bins[0].im = 0.0;
                for k in 1..=kmax {
                    spec_bins[idx(-k)] = spec_bins[idx(k)].conj();
                }
            }
            fft::inverse(&mut spec_bins);
            let peak = spec_bins.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if peak == 0.0 {
                return Err(Error::InvalidSpec("band holds no DFT bins".into()));
            }
            let mut x = vec![Complex64::new(0.0, 0.0); len];
            let first = (len - n) / 2;
            for (v, z) in x[first..first + n].iter_mut().zip(&spec_bins) {
                *v = if real { Complex64::new(z.re / peak, 0.0) } else { z / peak };
            }
            SampledSignal::new(x, origin, step)
        }
    }
}

/// A window for the short-time solvers: Gaussians stay analytic when
/// `analytic` is set, everything else is sampled.
pub fn generate_window(spec: &SignalSpec, analytic: bool) -> Result<Window> {
    match spec.kind {
        SignalKind::Gaussian { sigma, center } if analytic => {
            spec.validate()?;
            Window::gaussian(sigma, center)
        }
        _ => Ok(Window::Sampled(generate_signal(spec)?)),
    }
}
