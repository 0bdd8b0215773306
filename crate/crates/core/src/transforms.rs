//! Forward and inverse discrete OLCT: direct kernel sums and a chirp-FFT path.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;
use crate::params::ParameterMatrix;
use crate::signal::{Grid, SampledSignal};

/// OLCT values on a uniform u-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
    grid: Grid,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>, grid: Grid) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count()
            )));
        }
        Ok(Self { values, grid })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }
    pub fn magnitudes_squared(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }
    /// `du * sum |S|^2`.
    pub fn energy(&self) -> f64 {
        self.grid.step() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    grid: Grid,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumJson {
            grid: self.grid,
            re: self.values.iter().map(|z| z.re).collect(),
            im: self.values.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SpectrumJson::deserialize(de)?;
        if raw.re.len() != raw.im.len() {
            return Err(D::Error::custom("re and im differ in length"));
        }
        if raw.re.iter().chain(&raw.im).any(|v| !v.is_finite()) {
            return Err(D::Error::custom("non-finite spectrum value"));
        }
        let values = raw.re.iter().zip(&raw.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Spectrum::new(values, raw.grid).map_err(D::Error::custom)
    }
}

/// How the `b = 0` branch evaluates `x(d (u - y0))` between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegenerateBranch {
    /// Linear interpolation between neighbouring samples.
    #[default]
    Interpolate,
    /// Fail with `DegenerateGrid` unless every point lands on the lattice.
    ExactOnly,
}

/// Direct evaluation of the OLCT on `ugrid` (Riemann sum weighted by the sample step).
pub fn olct_forward(x: &SampledSignal, a: &ParameterMatrix, ugrid: &Grid) -> Result<Spectrum> {
    olct_forward_with(x, a, ugrid, DegenerateBranch::default())
}

pub fn olct_forward_with(
    x: &SampledSignal,
    a: &ParameterMatrix,
    ugrid: &Grid,
    branch: DegenerateBranch,
) -> Result<Spectrum> {
    if a.is_degenerate() {
        return degenerate_forward(x, a, ugrid, branch);
    }
    let values = (0..ugrid.count())
        .into_par_iter()
        .map(|m| point_value(x, a, ugrid.point(m)))
        .collect();
    Spectrum::new(values, *ugrid)
}

/// Value of the discretised OLCT at a single output point `u` (`b != 0`).
pub(crate) fn point_value(x: &SampledSignal, a: &ParameterMatrix, u: f64) -> Complex64 {
    let sum: Complex64 = x
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &v)| v * Complex64::from_polar(1.0, a.kernel_phase(x.time(k), u)))
        .sum();
    sum * a.kernel_scale() * x.step()
}

fn degenerate_forward(
    x: &SampledSignal,
    a: &ParameterMatrix,
    ugrid: &Grid,
    branch: DegenerateBranch,
) -> Result<Spectrum> {
    let (c, d, y0, w0) = (a.c(), a.d(), a.y0(), a.w0());
    let amp = Complex64::new(d, 0.0).sqrt();
    let mut values = Vec::with_capacity(ugrid.count());
    for u in ugrid.points() {
        let t = d * (u - y0);
        let sample = match branch {
            DegenerateBranch::Interpolate => x.interpolate(t),
            DegenerateBranch::ExactOnly => {
                let pos = t / x.step();
                if (pos - pos.round()).abs() > 1e-9 {
                    return Err(Error::DegenerateGrid);
                }
                x.at(pos.round() as i64)
            }
        };
        let phase = 0.5 * c * d * (u - y0).powi(2) + u * w0;
        values.push(amp * Complex64::from_polar(1.0, phase) * sample);
    }
    Spectrum::new(values, *ugrid)
}

/// Output grid of [`olct_fast`] for a transform of length `len`: `u_m = y0 + b xi_m`.
pub fn fast_grid(x: &SampledSignal, a: &ParameterMatrix, len: usize) -> Result<Grid> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let dxi = 2.0 * PI / (len as f64 * x.step());
    let half = (len / 2) as f64;
    let b = a.b();
    let first = if b > 0.0 { -half } else { (len - 1) as f64 - half };
    Grid::new(a.y0() + b * first * dxi, b.abs() * dxi, len)
}

/// Chirp-FFT evaluation on the induced grid, padded to the next power of two `>= 2N`.
pub fn olct_fast(x: &SampledSignal, a: &ParameterMatrix) -> Result<Spectrum> {
    olct_fast_len(x, a, fft::padded_len(2 * x.len()))
}

/// Chirp-FFT evaluation with an explicit transform length `len >= N`.
///
/// The output covers one full period `2 pi |b| / step` of the u-axis.
pub fn olct_fast_len(x: &SampledSignal, a: &ParameterMatrix, len: usize) -> Result<Spectrum> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    if len < x.len() {
        return Err(Error::InvalidGrid(format!(
            "transform length {len} is shorter than the signal ({})",
            x.len()
        )));
    }
    let (b, y0, w0) = (a.b(), a.y0(), a.w0());
    let chirp = a.a() / (2.0 * b);
    let dt = x.step();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (k, &v) in x.samples().iter().enumerate() {
        let t = x.time(k);
        // (-1)^k moves bin zero to the centre of the output
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        buf[k] = v * Complex64::from_polar(sign, chirp * t * t);
    }
    fft::forward(&mut buf);
    let dxi = 2.0 * PI / (len as f64 * dt);
    let half = (len / 2) as i64;
    let t0 = x.origin() as f64 * dt;
    let scale = a.kernel_scale() * dt;
    let mut values: Vec<Complex64> = (0..len)
        .map(|m| {
            let xi = (m as i64 - half) as f64 * dxi;
            let u = y0 + b * xi;
            let phase = a.d() / (2.0 * b) * (u - y0).powi(2) + u * w0 - xi * t0;
            buf[m] * scale * Complex64::from_polar(1.0, phase)
        })
        .collect();
    if b < 0.0 {
        values.reverse();
    }
    Spectrum::new(values, fast_grid(x, a, len)?)
}

/// Discretised inversion integral `f(t) = C int S(u) K_{A^-1}(u, t) du` on `tgrid`.
///
/// `tgrid` must lie on a lattice `n * step`. A warning is logged when the
/// spectrum is sampled more coarsely than `2 pi |b| / span(tgrid)`.
pub fn olct_inverse(s: &Spectrum, a: &ParameterMatrix, tgrid: &Grid) -> Result<SampledSignal> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let step = tgrid.step();
    let pos = tgrid.start() / step;
    if (pos - pos.round()).abs() > 1e-9 {
        return Err(Error::InvalidGrid(format!(
            "time grid start {} is not a multiple of its step {step}",
            tgrid.start()
        )));
    }
    let ug = s.grid();
    let required = 2.0 * PI * a.b().abs() / tgrid.span();
    if ug.step() > required * (1.0 + 1e-12) {
        log::warn!(
            "spectrum step {} exceeds {required}; the inversion will alias",
            ug.step()
        );
    }
    let inv = a.inverse();
    let scale = a.inversion_constant() * inv.kernel_scale() * ug.step();
    let samples = (0..tgrid.count())
        .into_par_iter()
        .map(|k| {
            let t = tgrid.point(k);
            let sum: Complex64 = s
                .values()
                .iter()
                .enumerate()
                .map(|(m, &v)| v * Complex64::from_polar(1.0, inv.kernel_phase(ug.point(m), t)))
                .sum();
            sum * scale
        })
        .collect();
    SampledSignal::new(samples, pos.round() as i64, step)
}

/// Pointwise modulus of [`olct_forward`].
pub fn olct_magnitude(x: &SampledSignal, a: &ParameterMatrix, ugrid: &Grid) -> Result<Vec<f64>> {
    Ok(olct_forward(x, a, ugrid)?.magnitudes())
}
