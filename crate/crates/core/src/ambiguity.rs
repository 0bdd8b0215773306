//! Ambiguity and cross-ambiguity functions on the lag lattice, and their
//! relation to OLCT-domain data.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{Grid, SampledSignal};
use crate::transforms::{olct_fast, point_value};

/// Surface `A(f, g)(tau, eta)` stored row-major with one row per lag.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    values: Vec<Complex64>,
    lag_grid: Grid,
    mod_grid: Grid,
}

impl AmbiguitySurface {
    pub fn lag_grid(&self) -> Grid {
        self.lag_grid
    }
    pub fn mod_grid(&self) -> Grid {
        self.mod_grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn get(&self, lag: usize, m: usize) -> Complex64 {
        self.values[lag * self.mod_grid.count() + m]
    }
    pub fn row(&self, lag: usize) -> &[Complex64] {
        let w = self.mod_grid.count();
        &self.values[lag * w..(lag + 1) * w]
    }
}

#[derive(Serialize, Deserialize)]
struct SurfaceJson {
    lag_grid: Grid,
    mod_grid: Grid,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for AmbiguitySurface {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.lag_grid.count()).map(|i| self.row(i));
        SurfaceJson {
            lag_grid: self.lag_grid,
            mod_grid: self.mod_grid,
            re: rows.clone().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: rows.map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
        .serialize(s)
    }
}

/// Lattice offset of `lag_grid` in units of the sample step.
fn lag_lattice(step: f64, lag_grid: &Grid) -> Result<(i64, i64)> {
    let ratio = lag_grid.step() / step;
    let start = lag_grid.start() / step;
    if (ratio - ratio.round()).abs() > 1e-9 || (start - start.round()).abs() > 1e-9 {
        return Err(Error::GridMismatch(format!(
            "lag grid (start {}, step {}) is not on the sample lattice of step {step}",
            lag_grid.start(),
            lag_grid.step()
        )));
    }
    Ok((start.round() as i64, ratio.round() as i64))
}

/// Auto-ambiguity `A f = A(f, f)`.
pub fn ambiguity(f: &SampledSignal, lag_grid: &Grid, mod_grid: &Grid) -> Result<AmbiguitySurface> {
    cross_ambiguity(f, f, lag_grid, mod_grid)
}

/// `A(f, g)(p step, eta) = e^{j p step eta / 2} step sum_t f(t) conj(g(t - p step)) e^{-j eta t}`.
///
/// Lags must lie on the sample lattice; rows are computed in parallel.
pub fn cross_ambiguity(
    f: &SampledSignal,
    g: &SampledSignal,
    lag_grid: &Grid,
    mod_grid: &Grid,
) -> Result<AmbiguitySurface> {
    f.check_same_step(g)?;
    let (p0, dp) = lag_lattice(f.step(), lag_grid)?;
    let rows: Vec<Vec<Complex64>> = (0..lag_grid.count())
        .into_par_iter()
        .map(|i| lag_row(f, g, p0 + i as i64 * dp, mod_grid))
        .collect();
    Ok(AmbiguitySurface {
        values: rows.into_iter().flatten().collect(),
        lag_grid: *lag_grid,
        mod_grid: *mod_grid,
    })
}

/// One row of the cross-ambiguity at integer lag `p`.
pub(crate) fn lag_row(f: &SampledSignal, g: &SampledSignal, p: i64, mod_grid: &Grid) -> Vec<Complex64> {
    let dt = f.step();
    let lo = f.origin().max(g.origin() + p);
    let hi = f.end_index().min(g.end_index() + p);
    let prod: Vec<(f64, Complex64)> = (lo..hi)
        .map(|n| (n as f64 * dt, f.at(n) * g.at(n - p).conj()))
        .collect();
    let tau = p as f64 * dt;
    mod_grid
        .points()
        .map(|eta| {
            let s: Complex64 = prod
                .iter()
                .map(|&(t, v)| v * Complex64::from_polar(1.0, -eta * t))
                .sum();
            s * dt * Complex64::from_polar(1.0, 0.5 * tau * eta)
        })
        .collect()
}

/// Off-lattice evaluation of the shifted factor in [`cross_ambiguity_at`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Linear interpolation between neighbouring samples.
    #[default]
    Linear,
    /// Full Shannon series over all samples.
    Sinc,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `A(f, g)(tau, eta)` at an arbitrary lag, interpolating `g(t - tau)` from its samples.
pub fn cross_ambiguity_at(
    f: &SampledSignal,
    g: &SampledSignal,
    tau: f64,
    eta: f64,
    method: Interpolation,
) -> Result<Complex64> {
    f.check_same_step(g)?;
    let dt = f.step();
    let pos = tau / dt;
    if (pos - pos.round()).abs() < 1e-12 {
        let row = lag_row(f, g, pos.round() as i64, &Grid::new(eta, 1.0, 1)?);
        return Ok(row[0]);
    }
    let shifted = |t: f64| -> Complex64 {
        match method {
            Interpolation::Linear => g.interpolate(t - tau),
            Interpolation::Sinc => {
                let x = (t - tau) / dt;
                g.samples()
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * sinc(x - (g.origin() + k as i64) as f64))
                    .sum()
            }
        }
    };
    let s: Complex64 = f
        .samples()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let t = f.time(k);
            v * shifted(t).conj() * Complex64::from_polar(1.0, -eta * t)
        })
        .sum();
    Ok(s * dt * Complex64::from_polar(1.0, 0.5 * tau * eta))
}

/// Both sides of the OLCT ambiguity push-forward at one point `(tau, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pushforward {
    /// `A(O f, O g)(tau, eta)`.
    pub lhs: Complex64,
    /// `e^{j(tau w0 - eta y0)} A(f, g)(d tau - b eta, a eta - c tau)`.
    pub rhs: Complex64,
    pub method: Interpolation,
}

impl Pushforward {
    pub fn relative_deviation(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.lhs.norm().max(f64::MIN_POSITIVE)
    }
}

/// Evaluates the ambiguity push-forward identity at `(tau, eta)`.
///
/// The left side uses the chirp-FFT spectrum of `f` and the OLCT of `g`
/// evaluated directly on the u-grid shifted by `tau`; the right side
/// evaluates the cross-ambiguity of the originals at the mapped point.
pub fn olct_ambiguity_pushforward(
    f: &SampledSignal,
    g: &SampledSignal,
    a: &ParameterMatrix,
    tau: f64,
    eta: f64,
    method: Interpolation,
) -> Result<Pushforward> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let of = olct_fast(f, a)?;
    let ug = of.grid();
    let sum: Complex64 = of
        .values()
        .par_iter()
        .enumerate()
        .map(|(m, v)| {
            let u = ug.point(m);
            v * point_value(g, a, u - tau).conj() * Complex64::from_polar(1.0, -eta * u)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let lhs = sum * ug.step() * Complex64::from_polar(1.0, 0.5 * tau * eta);
    let tp = a.d() * tau - a.b() * eta;
    let ep = a.a() * eta - a.c() * tau;
    let phase = tau * a.w0() - eta * a.y0();
    let rhs = Complex64::from_polar(1.0, phase) * cross_ambiguity_at(f, g, tp, ep, method)?;
    Ok(Pushforward { lhs, rhs, method })
}

/// Value of the ambiguity function on the line through the origin in direction `(-b, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePoint {
    pub eta: f64,
    /// `(-b eta, a eta)`.
    pub point: (f64, f64),
    pub value: Complex64,
}

/// Turns `|O^A f(u)|^2` sampled on `ugrid` into `A f(-b eta, a eta)` for each `eta`:
/// `A f(-b eta, a eta) = e^{j eta y0} int |O^A f(u)|^2 e^{-j u eta} du`.
pub fn magnitude_to_ambiguity_slice(
    mag2: &[f64],
    ugrid: &Grid,
    a: &ParameterMatrix,
    etas: &[f64],
) -> Result<Vec<SlicePoint>> {
    if mag2.len() != ugrid.count() {
        return Err(Error::GridMismatch(format!(
            "{} magnitudes for a grid of {} points",
            mag2.len(),
            ugrid.count()
        )));
    }
    Ok(etas
        .iter()
        .map(|&eta| {
            let s: Complex64 = mag2
                .iter()
                .zip(ugrid.points())
                .map(|(&m, u)| Complex64::from_polar(m, -u * eta))
                .sum();
            SlicePoint {
                eta,
                point: (-a.b() * eta, a.a() * eta),
                value: s * ugrid.step() * Complex64::from_polar(1.0, eta * a.y0()),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SpecialCase;
    use crate::transforms::olct_forward;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss_fn(c: f64, s: f64, k: f64) -> impl Fn(f64) -> Complex64 {
        move |t| Complex64::from_polar((-(t - c).powi(2) / (2.0 * s * s)).exp(), k * t)
    }

    fn sampled(step: f64, half: i64, f: impl Fn(f64) -> Complex64) -> SampledSignal {
        SampledSignal::from_fn(-half, step, 2 * half as usize, f).unwrap()
    }

    /// Symmetric-form quadrature `int f(t + tau/2) conj g(t - tau/2) e^{-j eta t} dt`.
    fn quadrature(
        f: &dyn Fn(f64) -> Complex64,
        g: &dyn Fn(f64) -> Complex64,
        tau: f64,
        eta: f64,
        h: f64,
    ) -> Complex64 {
        let n = (12.0 / h) as i64;
        (-n..=n)
            .map(|i| {
                let t = i as f64 * h;
                f(t + tau / 2.0) * g(t - tau / 2.0).conj() * Complex64::from_polar(1.0, -eta * t)
            })
            .sum::<Complex64>()
            * h
    }

    #[test]
    fn origin_value_and_zero_lag_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = (0..12)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = SampledSignal::new(s, -4, 0.5).unwrap();
        let lags = Grid::new(0.0, 0.5, 1).unwrap();
        let mods = Grid::new(-2.0, 0.25, 17).unwrap();
        let a = ambiguity(&f, &lags, &mods).unwrap();
        assert!((a.get(0, 8) - Complex64::new(f.energy(), 0.0)).norm() < 1e-14);
        for (m, eta) in mods.points().enumerate() {
            let ft: Complex64 = f
                .samples()
                .iter()
                .enumerate()
                .map(|(k, z)| Complex64::from_polar(z.norm_sqr() * 0.5, -eta * f.time(k)))
                .sum();
            assert!((a.get(0, m) - ft).norm() < 1e-13);
        }
    }

    #[test]
    fn hermitian_and_bounded() {
        let f = sampled(0.25, 24, gauss_fn(0.3, 1.0, 0.8));
        let lags = Grid::new(-2.0, 0.5, 9).unwrap();
        let mods = Grid::new(-3.0, 0.5, 13).unwrap();
        let a = ambiguity(&f, &lags, &mods).unwrap();
        let origin = a.get(4, 6).re;
        for i in 0..9 {
            for m in 0..13 {
                assert!((a.get(i, m) - a.get(8 - i, 12 - m).conj()).norm() < 1e-10);
                assert!(a.get(i, m).norm() <= origin * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn gaussian_surface_matches_quadrature() {
        let ff = gauss_fn(0.3, 1.0, 0.8);
        let f = sampled(0.125, 96, &ff);
        let lags = Grid::new(-1.0, 0.25, 9).unwrap();
        let mods = Grid::new(-2.0, 0.5, 9).unwrap();
        let a = ambiguity(&f, &lags, &mods).unwrap();
        for (i, tau) in lags.points().enumerate() {
            for (m, eta) in mods.points().enumerate() {
                let q = quadrature(&ff, &ff, tau, eta, 0.125 / 8.0);
                assert!((a.get(i, m) - q).norm() < 1e-6 * q.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn cross_version_agrees() {
        let ff = gauss_fn(0.3, 1.0, 0.8);
        let gf = gauss_fn(-0.2, 0.8, -0.4);
        let f = sampled(0.125, 96, &ff);
        let g = sampled(0.125, 96, &gf);
        let lags = Grid::new(-0.5, 0.25, 5).unwrap();
        let mods = Grid::new(-1.0, 0.5, 5).unwrap();
        let x = cross_ambiguity(&f, &g, &lags, &mods).unwrap();
        assert_eq!(cross_ambiguity(&f, &f, &lags, &mods).unwrap(), ambiguity(&f, &lags, &mods).unwrap());
        let ip: Complex64 = f.samples().iter().zip(g.samples()).map(|(p, q)| p * q.conj()).sum();
        assert!((x.get(2, 2) - ip * 0.125).norm() < 1e-14);
        for (i, tau) in lags.points().enumerate() {
            for (m, eta) in mods.points().enumerate() {
                let q = quadrature(&ff, &gf, tau, eta, 0.125 / 8.0);
                assert!((x.get(i, m) - q).norm() < 1e-6 * q.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn off_lattice_lags_are_rejected() {
        let f = sampled(0.5, 4, gauss_fn(0.0, 1.0, 0.0));
        let lags = Grid::new(0.0, 0.75, 3).unwrap();
        let mods = Grid::new(0.0, 1.0, 1).unwrap();
        assert!(matches!(ambiguity(&f, &lags, &mods), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn interpolated_lags_approximate_quadrature() {
        let ff = gauss_fn(0.3, 1.0, 0.8);
        let f = sampled(0.125, 96, &ff);
        let q = quadrature(&ff, &ff, 0.31, 0.7, 0.125 / 8.0);
        let lin = cross_ambiguity_at(&f, &f, 0.31, 0.7, Interpolation::Linear).unwrap();
        let snc = cross_ambiguity_at(&f, &f, 0.31, 0.7, Interpolation::Sinc).unwrap();
        assert!((lin - q).norm() < 1e-2 * q.norm());
        assert!((snc - q).norm() < 1e-8 * q.norm());
    }

    #[test]
    fn pushforward_holds_on_gaussians() {
        let f = sampled(0.125, 96, gauss_fn(0.3, 1.0, 0.8));
        let g = sampled(0.125, 96, gauss_fn(-0.2, 0.8, -0.4));
        let a = ParameterMatrix::new(0.6, 1.3, (0.6 * 1.1 - 1.0) / 1.3, 1.1, 0.4, -0.7).unwrap();
        for &(tau, eta) in &[(0.0, 0.0), (0.4, 0.3), (-0.5, 0.8), (0.0, 0.6)] {
            let p = olct_ambiguity_pushforward(&f, &g, &a, tau, eta, Interpolation::Sinc).unwrap();
            assert!(p.relative_deviation() < 1e-4, "{tau} {eta}: {p:?}");
        }
    }

    #[test]
    fn slice_matches_direct_ambiguity() {
        let f = sampled(0.125, 96, gauss_fn(0.3, 1.0, 0.8));
        let a = ParameterMatrix::special(SpecialCase::Fractional(0.8))
            .unwrap()
            .with_offsets(0.4, -0.2)
            .unwrap();
        let spec = olct_fast(&f, &a).unwrap();
        let etas = [0.0, 0.3, -0.7, 1.2];
        let slice =
            magnitude_to_ambiguity_slice(&spec.magnitudes_squared(), &spec.grid(), &a, &etas).unwrap();
        assert!((slice[0].value.re - spec.energy()).abs() < 1e-12);
        for s in &slice {
            let direct =
                cross_ambiguity_at(&f, &f, s.point.0, s.point.1, Interpolation::Sinc).unwrap();
            assert!((s.value - direct).norm() < 1e-4 * direct.norm(), "{s:?} vs {direct}");
        }
        // same magnitudes, same slice
        let rot = f.scale(Complex64::from_polar(1.0, 1.3));
        let g = Grid::new(-6.0, 0.05, 241).unwrap();
        let m1: Vec<f64> = olct_forward(&f, &a, &g).unwrap().magnitudes_squared();
        let m2: Vec<f64> = olct_forward(&rot, &a, &g).unwrap().magnitudes_squared();
        let s1 = magnitude_to_ambiguity_slice(&m1, &g, &a, &etas).unwrap();
        let s2 = magnitude_to_ambiguity_slice(&m2, &g, &a, &etas).unwrap();
        for (p, q) in s1.iter().zip(&s2) {
            assert!((p.value - q.value).norm() < 1e-12);
        }
    }
}
