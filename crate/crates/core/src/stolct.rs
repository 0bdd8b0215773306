//! Short-time OLCT, the magnitude/ambiguity identity, and sampling of
//! magnitudes for bandlimited signals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ambiguity::cross_ambiguity;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{BandLimit, Grid, SampledSignal};
use crate::transforms::{fast_grid, olct_fast_len};

/// Window function `phi` of the short-time transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Sampled window; shifts must lie on its sample lattice.
    Sampled(SampledSignal),
    /// `exp(-(t - center)^2 / (2 sigma^2))`, evaluated at arbitrary shifts.
    Gaussian { sigma: f64, center: f64 },
}

impl From<SampledSignal> for Window {
    fn from(s: SampledSignal) -> Self {
        Window::Sampled(s)
    }
}

impl Window {
    pub fn gaussian(sigma: f64, center: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0 && center.is_finite()) {
            return Err(Error::Config(format!("gaussian window needs sigma > 0, got {sigma}")));
        }
        Ok(Window::Gaussian { sigma, center })
    }

    pub fn id(&self) -> String {
        match self {
            Window::Sampled(s) => format!("sampled(origin={},len={},step={})", s.origin(), s.len(), s.step()),
            Window::Gaussian { sigma, center } => format!("gaussian(sigma={sigma},center={center})"),
        }
    }

    /// `conj(phi(t_k - v))` for every sample time of `f`.
    fn shifted_conj(&self, f: &SampledSignal, v: f64) -> Result<Vec<Complex64>> {
        match self {
            Window::Sampled(w) => {
                f.check_same_step(w)?;
                let p = v / f.step();
                if (p - p.round()).abs() > 1e-9 {
                    return Err(Error::GridMismatch(format!(
                        "shift {v} is not on the sample lattice of step {}",
                        f.step()
                    )));
                }
                let p = p.round() as i64;
                Ok((0..f.len() as i64).map(|k| w.at(f.origin() + k - p).conj()).collect())
            }
            Window::Gaussian { sigma, center } => Ok(f
                .times()
                .map(|t| Complex64::new((-(t - v - center).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0))
                .collect()),
        }
    }

    /// Window self-correlation `V_phi phi(tau, u) = int phi(t) conj(phi(t - tau)) e^{-j u t} dt`.
    ///
    /// Sampled windows use the lattice sum (with `tau` on the lattice); Gaussian
    /// windows use the closed form of the integral.
    pub fn self_correlation(&self, tau: f64, u: f64) -> Result<Complex64> {
        match self {
            Window::Sampled(w) => {
                let lag = Grid::new(tau, 1.0, 1)?;
                let s = cross_ambiguity(w, w, &lag, &Grid::new(u, 1.0, 1)?)?;
                Ok(s.get(0, 0) * Complex64::from_polar(1.0, -0.5 * tau * u))
            }
            Window::Gaussian { sigma, center } => {
                let s2 = sigma * sigma;
                let amp = (PI * s2).sqrt() * (-tau * tau / (4.0 * s2)).exp() * (-s2 * u * u / 4.0).exp();
                Ok(Complex64::from_polar(amp, -u * (center + 0.5 * tau)))
            }
        }
    }
}

/// Short-time OLCT values on a shift x frequency grid (row-major, one row per shift).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrequencyMap {
    values: Vec<Complex64>,
    shift_grid: Grid,
    freq_grid: Grid,
    window_id: String,
}

impl TimeFrequencyMap {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn shift_grid(&self) -> Grid {
        self.shift_grid
    }
    pub fn freq_grid(&self) -> Grid {
        self.freq_grid
    }
    pub fn window_id(&self) -> &str {
        &self.window_id
    }
    pub fn get(&self, shift: usize, freq: usize) -> Complex64 {
        self.values[shift * self.freq_grid.count() + freq]
    }
    pub fn row(&self, shift: usize) -> &[Complex64] {
        let w = self.freq_grid.count();
        &self.values[shift * w..(shift + 1) * w]
    }
    pub fn magnitudes(&self) -> MagnitudeMap {
        MagnitudeMap {
            values: self.values.iter().map(|z| z.norm()).collect(),
            shift_grid: self.shift_grid,
            freq_grid: self.freq_grid,
            window_id: self.window_id.clone(),
        }
    }
}

#[derive(Serialize)]
struct MapJson<'a> {
    shift_grid: Grid,
    freq_grid: Grid,
    window_id: &'a str,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for TimeFrequencyMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.shift_grid.count()).map(|i| self.row(i));
        MapJson {
            shift_grid: self.shift_grid,
            freq_grid: self.freq_grid,
            window_id: &self.window_id,
            re: rows.clone().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: rows.map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
        .serialize(s)
    }
}

/// Real-valued map `|V(v, u)|` (or its square) on a shift x frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeMap {
    pub values: Vec<f64>,
    pub shift_grid: Grid,
    pub freq_grid: Grid,
    pub window_id: String,
}

impl MagnitudeMap {
    pub fn new(values: Vec<f64>, shift_grid: Grid, freq_grid: Grid) -> Result<Self> {
        if values.len() != shift_grid.count() * freq_grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} map",
                values.len(),
                shift_grid.count(),
                freq_grid.count()
            )));
        }
        Ok(Self { values, shift_grid, freq_grid, window_id: String::new() })
    }

    pub fn get(&self, shift: usize, freq: usize) -> f64 {
        self.values[shift * self.freq_grid.count() + freq]
    }

    pub fn squared(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }

    /// CSV with one row per shift and one column per frequency.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let cols = self.freq_grid.count();
        for row in self.values.chunks(cols) {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `V_phi^A f(v, u) = int f(t) conj(phi(t - v)) K_A(t, u) dt`, discretised with the sample step of `f`.
///
/// When `freq_grid` is the chirp-FFT grid of its own length the rows are
/// computed by FFT; otherwise a precomputed kernel matrix is applied.
pub fn stolct(
    f: &SampledSignal,
    window: &Window,
    a: &ParameterMatrix,
    shift_grid: &Grid,
    freq_grid: &Grid,
) -> Result<TimeFrequencyMap> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let fast = freq_grid.count() >= f.len() && {
        let g = fast_grid(f, a, freq_grid.count())?;
        let tol = 1e-9 * g.step();
        (g.start() - freq_grid.start()).abs() < tol && (g.step() - freq_grid.step()).abs() < tol
    };
    let kernel: Vec<Complex64> = if fast {
        Vec::new()
    } else {
        let scale = a.kernel_scale() * f.step();
        freq_grid
            .points()
            .flat_map(|u| {
                f.times()
                    .map(move |t| scale * Complex64::from_polar(1.0, a.kernel_phase(t, u)))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let n = f.len();
    let rows: Vec<Vec<Complex64>> = (0..shift_grid.count())
        .into_par_iter()
        .map(|i| -> Result<Vec<Complex64>> {
            let w = window.shifted_conj(f, shift_grid.point(i))?;
            let prod: Vec<Complex64> = f.samples().iter().zip(&w).map(|(x, y)| x * y).collect();
            if fast {
                let p = SampledSignal::new(prod, f.origin(), f.step())?;
                Ok(olct_fast_len(&p, a, freq_grid.count())?.values().to_vec())
            } else {
                Ok(kernel
                    .chunks(n.max(1))
                    .map(|k| k.iter().zip(&prod).map(|(k, p)| k * p).sum())
                    .take(freq_grid.count())
                    .collect())
            }
        })
        .collect::<Result<_>>()?;
    let mut values: Vec<Complex64> = rows.into_iter().flatten().collect();
    if n == 0 {
        values = vec![Complex64::new(0.0, 0.0); shift_grid.count() * freq_grid.count()];
    }
    Ok(TimeFrequencyMap {
        values,
        shift_grid: *shift_grid,
        freq_grid: *freq_grid,
        window_id: window.id(),
    })
}

/// Points `(p, u')` at which the magnitude identity is compared: lag `b v' = p * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityProbe {
    pub lags: Vec<i64>,
    pub mods: Grid,
}

/// Compares `F(|V_phi^A f|^2)(u', -v')` with `e^{j y0 v'} A f~(b v', u') conj(A phi(b v', u'))`,
/// where `f~(t) = f(t) e^{j a t^2 / 2b}` and `v' = p * step / b`.
///
/// The left side is the two-dimensional Fourier sum of the sampled magnitude
/// map over `vgrid x ugrid`; the right side uses two lattice ambiguity
/// surfaces. Returns the largest relative deviation over points where the
/// right side exceeds `1e-8` of its maximum (zero when that maximum is zero).
pub fn stolct_magnitude_identity_residual(
    f: &SampledSignal,
    phi: &SampledSignal,
    a: &ParameterMatrix,
    vgrid: &Grid,
    ugrid: &Grid,
    probe: &IdentityProbe,
) -> Result<f64> {
    let map = stolct(f, &Window::Sampled(phi.clone()), a, vgrid, ugrid)?;
    let mag2: Vec<f64> = map.values().iter().map(|z| z.norm_sqr()).collect();
    let ratio = a.a() / (2.0 * a.b());
    let ft = f.map(|t, v| v * Complex64::from_polar(1.0, ratio * t * t));
    let dt = f.step();
    let lag_grid = |p: i64| Grid::new(p as f64 * dt, dt, 1);
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &p in &probe.lags {
        let vp = p as f64 * dt / a.b();
        let af = cross_ambiguity(&ft, &ft, &lag_grid(p)?, &probe.mods)?;
        let ap = cross_ambiguity(phi, phi, &lag_grid(p)?, &probe.mods)?;
        // w-sum first: one complex weight per shift row
        let rows: Vec<Complex64> = (0..vgrid.count())
            .map(|q| {
                mag2[q * ugrid.count()..(q + 1) * ugrid.count()]
                    .iter()
                    .zip(ugrid.points())
                    .map(|(&m, w)| Complex64::from_polar(m, w * vp))
                    .sum::<Complex64>()
                    * ugrid.step()
            })
            .collect();
        for (i, up) in probe.mods.points().enumerate() {
            let l: Complex64 = rows
                .iter()
                .zip(vgrid.points())
                .map(|(r, v)| r * Complex64::from_polar(1.0, -v * up))
                .sum::<Complex64>()
                * vgrid.step();
            lhs.push(l);
            rhs.push(Complex64::from_polar(1.0, a.y0() * vp) * af.get(0, i) * ap.get(0, i).conj());
        }
    }
    let peak = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs
        .iter()
        .zip(&rhs)
        .filter(|(_, r)| r.norm() > 1e-8 * peak)
        .map(|(l, r)| (l - r).norm() / r.norm())
        .fold(0.0, f64::max))
}

/// Sampling rule for magnitudes of bandlimited signals.
///
/// Band limits are in cycles per unit, so a band `Omega` is recovered from
/// samples at rate `2 Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplingRule {
    /// Window in `PW_{Omega1}`, real signal in `PW_{Omega2}`: spacing `1 / (4 Omega^u)`.
    FtBand { window: BandLimit, signal: BandLimit },
    /// Signal whose OLCT lives in the band `Omega`: spacing `b / (4 Omega')`.
    OlctBand { signal: BandLimit },
}

/// `Omega^u = max(|Omega1 + (u - y0)/b|, |-Omega1 + (u - y0)/b|)`.
pub fn ft_band_at(omega1: f64, a: &ParameterMatrix, u: f64) -> f64 {
    let s = (u - a.y0()) / a.b();
    (omega1 + s).abs().max((-omega1 + s).abs())
}

/// `Omega' = max(|Omega - y0|, |Omega + y0|)`.
pub fn olct_band_prime(omega: f64, a: &ParameterMatrix) -> f64 {
    (omega - a.y0()).abs().max((omega + a.y0()).abs())
}

impl SamplingRule {
    /// Band (in `v`) of `|V(., u)|^2`.
    pub fn magnitude_band(&self, a: &ParameterMatrix, u: f64) -> f64 {
        match *self {
            SamplingRule::FtBand { window, .. } => 2.0 * ft_band_at(window.omega(), a, u),
            SamplingRule::OlctBand { signal } => 2.0 * olct_band_prime(signal.omega(), a) / a.b().abs(),
        }
    }

    /// Largest admissible shift spacing at frequency `u`.
    pub fn spacing(&self, a: &ParameterMatrix, u: f64) -> f64 {
        1.0 / (2.0 * self.magnitude_band(a, u))
    }
}

/// Uniform samples `values[i]` at `v = (start + i) * spacing` for one frequency `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StolctSamples {
    pub u: f64,
    /// Band of `|V(., u)|^2` claimed by the sampling rule.
    pub band: f64,
    pub spacing: f64,
    pub start: i64,
    /// `|V_phi^A f(v, u)|`.
    pub values: Vec<f64>,
}

/// Samples `|V_phi^A f(., u)|` at `v = n * spacing`, `n in n_range`, with the
/// spacing dictated by `rule`.
pub fn sample_stolct_magnitude(
    f: &SampledSignal,
    window: &Window,
    a: &ParameterMatrix,
    u: f64,
    rule: &SamplingRule,
    n_range: std::ops::Range<i64>,
) -> Result<StolctSamples> {
    sample_stolct_magnitude_with_spacing(f, window, a, u, rule, n_range, rule.spacing(a, u))
}

/// As [`sample_stolct_magnitude`] with an explicit spacing (for under- or over-sampling).
pub fn sample_stolct_magnitude_with_spacing(
    f: &SampledSignal,
    window: &Window,
    a: &ParameterMatrix,
    u: f64,
    rule: &SamplingRule,
    n_range: std::ops::Range<i64>,
    spacing: f64,
) -> Result<StolctSamples> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let kernel: Vec<Complex64> = f
        .times()
        .map(|t| a.kernel_scale() * f.step() * Complex64::from_polar(1.0, a.kernel_phase(t, u)))
        .collect();
    let start = n_range.start;
    let values = n_range
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| -> Result<f64> {
            let w = window.shifted_conj(f, n as f64 * spacing)?;
            let s: Complex64 = f
                .samples()
                .iter()
                .zip(&w)
                .zip(&kernel)
                .map(|((x, y), k)| x * y * k)
                .sum();
            Ok(s.norm())
        })
        .collect::<Result<_>>()?;
    Ok(StolctSamples { u, band: rule.magnitude_band(a, u), spacing, start, values })
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Truncated Shannon series `sum_n s_n sinc(rate t - n)` over the `2 radius + 1`
/// samples nearest to each target point. Samples sit at `(start + i) / rate`.
///
/// Fails with `NyquistViolation` when `rate < 2 band`.
pub fn interpolate_bandlimited(
    samples: &[Complex64],
    start: i64,
    rate: f64,
    band: &BandLimit,
    tgrid: &Grid,
    radius: usize,
) -> Result<Vec<Complex64>> {
    let required = band.nyquist_rate();
    if rate < required * (1.0 - 1e-12) {
        return Err(Error::NyquistViolation { rate, required });
    }
    let r = radius as i64;
    let end = start + samples.len() as i64;
    Ok(tgrid
        .points()
        .map(|t| {
            let x = t * rate;
            let c = x.round() as i64;
            ((c - r).max(start)..(c + r + 1).min(end))
                .map(|n| samples[(n - start) as usize] * sinc(x - n as f64))
                .sum()
        })
        .collect())
}

/// Real-valued convenience wrapper around [`interpolate_bandlimited`].
pub fn interpolate_bandlimited_real(
    samples: &[f64],
    start: i64,
    rate: f64,
    band: &BandLimit,
    tgrid: &Grid,
    radius: usize,
) -> Result<Vec<f64>> {
    let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(interpolate_bandlimited(&c, start, rate, band, tgrid, radius)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SpecialCase;
    use crate::transforms::{olct_fast, olct_forward};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, origin: i64, step: f64, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SampledSignal::new(s, origin, step).unwrap()
    }

    fn matrix() -> ParameterMatrix {
        ParameterMatrix::new(0.5, 1.5, (0.5 * 1.2 - 1.0) / 1.5, 1.2, 0.3, -0.4).unwrap()
    }

    fn direct(f: &SampledSignal, phi: &SampledSignal, a: &ParameterMatrix, v: i64, u: f64) -> Complex64 {
        (0..f.len())
            .map(|k| {
                let n = f.origin() + k as i64;
                f.samples()[k] * phi.at(n - v).conj() * a.kernel(f.time(k), u)
            })
            .sum::<Complex64>()
            * f.step()
    }

    #[test]
    fn flat_window_reproduces_forward_transform() {
        let f = random(20, -7, 0.5, 1);
        let ones = SampledSignal::from_real(&[1.0; 20], -7, 0.5).unwrap();
        let a = matrix();
        let ug = Grid::new(-3.0, 0.13, 40).unwrap();
        let m = stolct(&f, &ones.into(), &a, &Grid::new(0.0, 0.5, 1).unwrap(), &ug).unwrap();
        let o = olct_forward(&f, &a, &ug).unwrap();
        for (x, y) in m.row(0).iter().zip(o.values()) {
            assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn impulse_gives_flat_rows() {
        let f = SampledSignal::from_real(&[1.0], 3, 1.0).unwrap();
        let phi = SampledSignal::from_fn(-5, 1.0, 11, |t| Complex64::new((-t * t / 8.0).exp(), 0.0)).unwrap();
        let a = matrix();
        let m = stolct(&f, &phi.clone().into(), &a, &Grid::new(-2.0, 1.0, 5).unwrap(), &Grid::new(-1.0, 0.3, 9).unwrap())
            .unwrap();
        for i in 0..5 {
            let v = -2 + i as i64;
            let want = phi.at(3 - v).norm() / (2.0 * PI * 1.5f64).sqrt();
            for j in 0..9 {
                assert!((m.get(i, j).norm() - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fft_and_kernel_paths_match_direct_sum() {
        let f = random(24, -10, 1.0, 2);
        let phi = random(9, -4, 1.0, 3);
        let a = matrix();
        let shifts = Grid::new(-12.0, 1.0, 25).unwrap();
        let fg = olct_fast(&f, &a).unwrap().grid();
        let other = Grid::new(-2.0, 0.21, 17).unwrap();
        for ug in [fg, other] {
            let m = stolct(&f, &phi.clone().into(), &a, &shifts, &ug).unwrap();
            for (i, v) in (-12..=12).enumerate() {
                for (j, u) in ug.points().enumerate() {
                    let d = direct(&f, &phi, &a, v, u);
                    assert!((m.get(i, j) - d).norm() <= 1e-10 * d.norm().max(1e-3));
                }
            }
        }
    }

    #[test]
    fn shifts_off_lattice_are_rejected() {
        let f = random(8, 0, 1.0, 4);
        let r = stolct(&f, &f.clone().into(), &matrix(), &Grid::new(0.5, 1.0, 2).unwrap(), &Grid::new(0.0, 1.0, 2).unwrap());
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn magnitude_identity_holds() {
        let a = ParameterMatrix::special(SpecialCase::Fractional(PI / 3.0))
            .unwrap()
            .with_offsets(0.2, 0.1)
            .unwrap();
        let f = random(16, -8, 1.0, 5);
        let phi = random(16, -8, 1.0, 6);
        let vgrid = Grid::new(-15.0, 1.0, 31).unwrap();
        let ugrid = fast_grid(&f, &a, 64).unwrap();
        let probe = IdentityProbe { lags: vec![-3, 0, 1, 5], mods: Grid::new(-2.0, 0.4, 11).unwrap() };
        let r = stolct_magnitude_identity_residual(&f, &phi, &a, &vgrid, &ugrid, &probe).unwrap();
        assert!(r < 1e-9, "{r}");
        let zero = SampledSignal::zeros(-8, 1.0, 16).unwrap();
        assert_eq!(stolct_magnitude_identity_residual(&zero, &phi, &a, &vgrid, &ugrid, &probe).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_self_correlation_matches_quadrature() {
        let w = Window::gaussian(0.8, 0.25).unwrap();
        let h = 0.01;
        let fine = SampledSignal::from_fn(-1200, h, 2400, |t| {
            Complex64::new((-(t - 0.25).powi(2) / (2.0 * 0.64)).exp(), 0.0)
        })
        .unwrap();
        let sw = Window::Sampled(fine);
        for &(tau, u) in &[(0.0, 0.0), (0.3, 1.2), (-0.5, -2.0)] {
            let exact = w.self_correlation(tau, u).unwrap();
            let quad = sw.self_correlation(tau, u).unwrap();
            assert!((exact - quad).norm() < 1e-10, "{exact} {quad}");
        }
    }

    #[test]
    fn band_formulas() {
        let fr = ParameterMatrix::special(SpecialCase::Fourier).unwrap();
        assert_eq!(ft_band_at(1.5, &fr, 0.0), 1.5);
        let a = ParameterMatrix::new(0.5, 2.0, (0.5 * 3.0 - 1.0) / 2.0, 3.0, 0.0, 0.0).unwrap();
        assert_eq!(ft_band_at(1.0, &a, 6.0), 4.0);
        let rule = SamplingRule::FtBand { window: BandLimit::new(1.0).unwrap(), signal: BandLimit::new(1.0).unwrap() };
        assert_eq!(rule.spacing(&a, 6.0), 1.0 / 16.0);
        let shifted = a.with_offsets(0.7, 0.0).unwrap();
        assert_eq!(ft_band_at(1.25, &shifted, 0.7), 1.25);
        assert_eq!(olct_band_prime(2.0, &shifted), 2.7);
        let r = SamplingRule::OlctBand { signal: BandLimit::new(2.0).unwrap() };
        assert!((r.spacing(&shifted, 0.0) - 2.0 / (4.0 * 2.7)).abs() < 1e-15);
    }

    #[test]
    fn shannon_interpolation() {
        let band = BandLimit::new(0.5).unwrap();
        let s: Vec<Complex64> = (-10..10).map(|n| Complex64::new((0.4 * n as f64).sin(), 0.0)).collect();
        let at = Grid::new(-10.0, 1.0, 20).unwrap();
        let back = interpolate_bandlimited(&s, -10, 1.0, &band, &at, 64).unwrap();
        for (x, y) in s.iter().zip(&back) {
            assert!((x - y).norm() < 1e-15);
        }
        let zeros = interpolate_bandlimited_real(&[0.0; 8], 0, 1.0, &band, &Grid::new(0.0, 0.3, 20).unwrap(), 64).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));
        assert!(matches!(
            interpolate_bandlimited(&s, 0, 0.5, &band, &at, 64),
            Err(Error::NyquistViolation { .. })
        ));
        // Gaussian-windowed bandlimited test signal
        let g = |t: f64| (-(t * t) / 50.0).exp() * (0.6 * t).cos() * sinc(0.5 * t);
        let rate = 2.0;
        let start = -200;
        let samples: Vec<f64> = (start..-start).map(|n| g(n as f64 / rate)).collect();
        let dense = Grid::new(-20.0, 0.125, 321).unwrap();
        let r = interpolate_bandlimited_real(&samples, start, rate, &BandLimit::new(0.75).unwrap(), &dense, 64).unwrap();
        let err = dense.points().zip(&r).map(|(t, v)| (g(t) - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn magnitude_csv() {
        let m = MagnitudeMap::new(vec![1.0, 2.0, 3.0, 4.0], Grid::new(0.0, 1.0, 2).unwrap(), Grid::new(0.0, 1.0, 2).unwrap()).unwrap();
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1e0,2e0\n3e0,4e0\n");
    }

    #[test]
    fn magnitudes_ignore_global_phase() {
        let f = random(12, -6, 1.0, 8);
        let g = f.scale(Complex64::from_polar(1.0, 2.2));
        let phi: Window = random(5, -2, 1.0, 9).into();
        let a = matrix();
        let s = Grid::new(-8.0, 1.0, 17).unwrap();
        let u = Grid::new(-2.0, 0.25, 17).unwrap();
        let m1 = stolct(&f, &phi, &a, &s, &u).unwrap().magnitudes();
        let m2 = stolct(&g, &phi, &a, &s, &u).unwrap().magnitudes();
        for (x, y) in m1.values.iter().zip(&m2.values) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
