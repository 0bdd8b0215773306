//! Uniform grids and finitely supported sampled signals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Uniform axis `start + i * step`, `i in 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    start: f64,
    step: f64,
    count: usize,
}

/// Accepted spellings: `{"start", "step", "count"}`, `"start,step,count"` or `[start, step, count]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrid {
    Fields { start: f64, step: f64, count: usize },
    Triple(String),
    Array(f64, f64, usize),
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        match raw {
            RawGrid::Fields { start, step, count } | RawGrid::Array(start, step, count) => {
                Grid::new(start, step, count)
            }
            RawGrid::Triple(s) => Grid::parse_triple(&s),
        }
    }
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() {
            return Err(Error::NonFinite("grid"));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        if count == 0 {
            return Err(Error::InvalidGrid("count must be at least 1".into()));
        }
        Ok(Self { start, step, count })
    }

    /// Grid of `count` points centred on zero (`-count/2 ..`).
    pub fn centered(step: f64, count: usize) -> Result<Self> {
        Self::new(-((count / 2) as f64) * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }
    /// `count * step`.
    pub fn span(&self) -> f64 {
        self.count as f64 * self.step
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Parses `start,step,count`.
    pub fn parse_triple(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("grid '{s}' must be start,step,count")));
        }
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|e| Error::Config(format!("grid '{s}': {e}")))
        };
        let count = parts[2]
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("grid '{s}': {e}")))?;
        Self::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// Positive band limit Ω. Functions in `PW_Ω` are recovered from samples at
/// rate `2Ω` by the Shannon series, so Ω is measured in cycles per unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandLimit(f64);

impl BandLimit {
    pub fn new(omega: f64) -> Result<Self> {
        if omega.is_finite() && omega > 0.0 {
            Ok(Self(omega))
        } else {
            Err(Error::Config(format!("band limit {omega} must be positive")))
        }
    }

    pub fn omega(&self) -> f64 {
        self.0
    }

    /// Minimum sampling rate of the Shannon series, `2Ω`.
    pub fn nyquist_rate(&self) -> f64 {
        2.0 * self.0
    }
}

/// Lattice support `[origin, origin + len)` with sample step `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub origin: i64,
    pub len: usize,
    pub step: f64,
}

impl Support {
    pub fn of(x: &SampledSignal) -> Self {
        Self { origin: x.origin(), len: x.len(), step: x.step() }
    }

    pub fn time(&self, k: usize) -> f64 {
        (self.origin + k as i64) as f64 * self.step
    }
}

/// Finitely supported samples: `samples[k]` sits at `t = (origin + k) * step`;
/// everything outside is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    origin: i64,
    step: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, origin: i64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("sample step {step} must be positive")));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("signal samples"));
        }
        Ok(Self { samples, origin, step })
    }

    /// Discrete-native signal (`step = 1`).
    pub fn discrete(samples: Vec<Complex64>, origin: i64) -> Self {
        Self::new(samples, origin, 1.0).expect("unit step is valid")
    }

    pub fn from_real(values: &[f64], origin: i64, step: f64) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            origin,
            step,
        )
    }

    /// Samples a function on `t = (origin + k) * step`, `k in 0..len`.
    pub fn from_fn(origin: i64, step: f64, len: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..len)
            .map(|k| f((origin + k as i64) as f64 * step))
            .collect();
        Self::new(samples, origin, step)
    }

    pub fn zeros(origin: i64, step: f64, len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], origin, step)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }
    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
    pub fn origin(&self) -> i64 {
        self.origin
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    /// One past the last lattice index of the support.
    pub fn end_index(&self) -> i64 {
        self.origin + self.samples.len() as i64
    }

    /// Physical time of the `k`-th stored sample.
    pub fn time(&self, k: usize) -> f64 {
        (self.origin + k as i64) as f64 * self.step
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Value at lattice index `n` (zero outside the support).
    pub fn at(&self, n: i64) -> Complex64 {
        let k = n - self.origin;
        if k >= 0 && (k as usize) < self.samples.len() {
            self.samples[k as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Linear interpolation at physical time `t`.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let pos = t / self.step;
        let lo = pos.floor();
        let frac = pos - lo;
        let lo = lo as i64;
        self.at(lo) * (1.0 - frac) + self.at(lo + 1) * frac
    }

    /// Plain l2 norm of the samples.
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `step * sum |x|^2`, the Riemann approximation of the L2 energy.
    pub fn energy(&self) -> f64 {
        self.step * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, &z)| f(self.time(k), z))
            .collect();
        Self { samples, origin: self.origin, step: self.step }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, z| z * s)
    }

    /// Re-expresses the signal on lattice indices `[origin, origin + len)`.
    pub fn with_support(&self, origin: i64, len: usize) -> Self {
        let samples = (0..len as i64).map(|k| self.at(origin + k)).collect();
        Self { samples, origin, step: self.step }
    }

    /// Smallest common support of two signals on the same lattice.
    pub fn union_support(&self, other: &Self) -> Result<(i64, usize)> {
        self.check_same_step(other)?;
        let lo = self.origin.min(other.origin);
        let hi = self.end_index().max(other.end_index());
        Ok((lo, (hi - lo).max(0) as usize))
    }

    pub fn check_same_step(&self, other: &Self) -> Result<()> {
        if (self.step - other.step).abs() > 1e-12 * self.step.max(other.step) {
            return Err(Error::GridMismatch(format!(
                "sample steps {} and {} differ",
                self.step, other.step
            )));
        }
        Ok(())
    }

    /// Drops leading and trailing samples with modulus at most `tol`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let first = self.samples.iter().position(|z| z.norm() > tol);
        match first {
            None => Self { samples: Vec::new(), origin: self.origin, step: self.step },
            Some(first) => {
                let last = self.samples.iter().rposition(|z| z.norm() > tol).unwrap();
                Self {
                    samples: self.samples[first..=last].to_vec(),
                    origin: self.origin + first as i64,
                    step: self.step,
                }
            }
        }
    }

    pub fn to_json(&self) -> SigJson {
        SigJson {
            origin: self.origin,
            step: self.step,
            re: self.samples.iter().map(|z| z.re).collect(),
            im: self.samples.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_json(raw: SigJson) -> Result<Self> {
        if raw.re.len() != raw.im.len() {
            return Err(Error::Config(format!(
                "sig-json arrays differ in length ({} vs {})",
                raw.re.len(),
                raw.im.len()
            )));
        }
        let samples = raw
            .re
            .iter()
            .zip(&raw.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Self::new(samples, raw.origin, raw.step)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: SigJson = serde_json::from_str(&text)?;
        Self::from_json(raw)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}

/// On-disk "sig-json" layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigJson {
    pub origin: i64,
    pub step: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Serialize for SampledSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledSignal {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = SigJson::deserialize(de)?;
        SampledSignal::from_json(raw).map_err(serde::de::Error::custom)
    }
}

/// Inner product `sum_n conj(x[n]) y[n]` over the common lattice.
pub fn inner(x: &SampledSignal, y: &SampledSignal) -> Complex64 {
    let lo = x.origin().max(y.origin());
    let hi = x.end_index().min(y.end_index());
    (lo..hi).map(|n| x.at(n).conj() * y.at(n)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 0.0, 3).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        let g = Grid::parse_triple("-1,0.5,5").unwrap();
        assert_eq!(g.end(), 1.0);
        assert!(Grid::parse_triple("1,2").is_err());
        let c = Grid::centered(0.5, 4).unwrap();
        assert_eq!(c.start(), -1.0);
        assert!(serde_json::from_str::<Grid>(r#"{"start":0,"step":-1,"count":2}"#).is_err());
        assert_eq!(serde_json::from_str::<Grid>(r#""-1,0.5,5""#).unwrap(), g);
        assert_eq!(serde_json::from_str::<Grid>("[-1, 0.5, 5]").unwrap(), g);
    }

    #[test]
    fn support_bookkeeping() {
        let x = SampledSignal::from_real(&[1.0, 2.0, 3.0], -1, 1.0).unwrap();
        assert_eq!(x.at(-2), Complex64::new(0.0, 0.0));
        assert_eq!(x.at(1), Complex64::new(3.0, 0.0));
        assert_eq!(x.end_index(), 2);
        let y = SampledSignal::from_real(&[1.0], 4, 1.0).unwrap();
        assert_eq!(x.union_support(&y).unwrap(), (-1, 6));
        let w = x.with_support(-3, 6);
        assert_eq!(w.samples()[2], Complex64::new(1.0, 0.0));
        assert_eq!(w.trimmed(0.0), x);
        assert_eq!(inner(&x, &x).re, 14.0);
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let x = SampledSignal::new(
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)],
            3,
            0.5,
        )
        .unwrap();
        let text = serde_json::to_string(&x).unwrap();
        let back: SampledSignal = serde_json::from_str(&text).unwrap();
        assert_eq!(back, x);
        let bad = r#"{"origin":0,"step":1,"re":[1,2],"im":[0]}"#;
        assert!(serde_json::from_str::<SampledSignal>(bad).is_err());
        // JSON has no NaN literal; out-of-range numbers parse to infinity or fail
        let inf = r#"{"origin":0,"step":1,"re":[1e999],"im":[0]}"#;
        assert!(serde_json::from_str::<SampledSignal>(inf).is_err());
        assert!(SampledSignal::new(vec![Complex64::new(f64::NAN, 0.0)], 0, 1.0).is_err());
    }
}
