use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::nonseparable::{sign_recovery, unchirped_links};
use super::RecoveryReport;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{BandLimit, Grid, SampledSignal, Support};
use crate::stolct::{
    interpolate_bandlimited, olct_band_prime,
    sample_stolct_magnitude_with_spacing, SamplingRule, StolctSamples, Window,
};

/// Which band assumption the samples were taken under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BandlimitedMode {
    /// Real signal in `PW_{signal}`, window in `PW_{window}`; recovered up to sign.
    FtBand { window: BandLimit, signal: BandLimit },
    /// OLCT supported in the band `signal`; recovered up to a global phase
    /// using lags `0` and `gamma` (default `b / (2 Omega')`).
    OlctBand { signal: BandLimit, gamma: Option<f64> },
}

impl BandlimitedMode {
    pub fn rule(&self) -> SamplingRule {
        match *self {
            BandlimitedMode::FtBand { window, signal } => SamplingRule::FtBand { window, signal },
            BandlimitedMode::OlctBand { signal, .. } => SamplingRule::OlctBand { signal },
        }
    }
}

/// Everything the sampled solver needs besides the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSetup {
    pub matrix: ParameterMatrix,
    pub window: Window,
    pub mode: BandlimitedMode,
    /// Lattice on which the recovered signal is returned.
    pub support: Support,
    pub radius: usize,
    pub floor: f64,
    pub vanish_limit: f64,
}

impl BandlimitedSetup {
    pub fn new(matrix: ParameterMatrix, window: Window, mode: BandlimitedMode, support: Support) -> Self {
        Self { matrix, window, mode, support, radius: 64, floor: 1e-8, vanish_limit: 0.2 }
    }

    fn gamma(&self) -> Option<f64> {
        match self.mode {
            BandlimitedMode::FtBand { .. } => None,
            BandlimitedMode::OlctBand { signal, gamma } => {
                Some(gamma.unwrap_or(self.matrix.b().abs() / (2.0 * olct_band_prime(signal.omega(), &self.matrix))))
            }
        }
    }

    /// Angular half-width of the band occupied by the lag products.
    fn lag_band(&self) -> f64 {
        match self.mode {
            BandlimitedMode::FtBand { signal, .. } => 2.0 * PI * 2.0 * signal.omega(),
            BandlimitedMode::OlctBand { signal, .. } => {
                2.0 * PI * 2.0 * olct_band_prime(signal.omega(), &self.matrix) / self.matrix.b().abs()
            }
        }
    }
}

/// Samples `|V(., u)|` for every `u` of `ugrid` over shifts in `[vmin, vmax]`,
/// at `rate_factor` times the rate required by the setup's band assumption.
pub fn sample_for_recovery(
    f: &SampledSignal,
    setup: &BandlimitedSetup,
    ugrid: &Grid,
    vmin: f64,
    vmax: f64,
    rate_factor: f64,
) -> Result<Vec<StolctSamples>> {
    let rule = setup.mode.rule();
    ugrid
        .points()
        .map(|u| {
            let spacing = rule.spacing(&setup.matrix, u) / rate_factor;
            let n_range = (vmin / spacing).floor() as i64..(vmax / spacing).ceil() as i64 + 1;
            sample_stolct_magnitude_with_spacing(f, &setup.window, &setup.matrix, u, &rule, n_range, spacing)
        })
        .collect()
}

/// Recovers a bandlimited signal from magnitudes sampled at the required sampling rates.
///
/// The Shannon series of each `|V(., u)|^2` is Fourier transformed in closed
/// form, `T sum_n s_n e^{-j n T u'}`, which is exact inside the band. A sum over
/// `u` then yields the window-weighted ambiguity rows at lag `0` and at one
/// more lag (the output step, or `gamma`), which are divided by the window
/// correlation and inverted to the lag products `f~(t) conj(f~(t - tau))`.
/// The samples must come from a uniform u-grid.
pub fn recover_bandlimited_sampled(samples: &[StolctSamples], setup: &BandlimitedSetup) -> Result<RecoveryReport> {
    let a = &setup.matrix;
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    if samples.len() < 2 {
        return Err(Error::InvalidGrid("need samples at two or more frequencies".into()));
    }
    let du = samples[1].u - samples[0].u;
    if du <= 0.0 || samples.windows(2).any(|w| ((w[1].u - w[0].u) - du).abs() > 1e-9 * du.abs()) {
        return Err(Error::InvalidGrid("sample frequencies must form a uniform increasing grid".into()));
    }
    let rule = setup.mode.rule();
    for s in samples {
        let required = rule.spacing(a, s.u);
        if s.spacing > required * (1.0 + 1e-9) {
            return Err(Error::NyquistViolation { rate: 1.0 / s.spacing, required: 1.0 / required });
        }
    }

    let lag = match setup.gamma() {
        None => setup.support.step,
        Some(g) => {
            let BandlimitedMode::OlctBand { signal, .. } = setup.mode else { unreachable!() };
            let largest = a.b().abs() / (2.0 * olct_band_prime(signal.omega(), a));
            if !(g > 0.0) || g > largest * (1.0 + 1e-12) {
                return Err(Error::NyquistViolation { rate: 1.0 / g, required: 1.0 / largest });
            }
            g
        }
    };
    let lags = [0.0, lag];

    // the lag products are read back on the output support, and in the OLCT
    // mode on a lattice reaching `radius` steps of gamma beyond it
    let margin = setup.gamma().map_or(0.0, |g| 2.0 * setup.radius as f64 * g);
    let span = setup.support.len as f64 * setup.support.step + margin;
    let dup = PI / span;
    let nmod = (setup.lag_band() / dup).ceil() as i64;
    let mods: Vec<f64> = (-nmod..=nmod).map(|i| i as f64 * dup).collect();

    // fourier[i][m]: transform of the interpolated |V(., u_i)|^2 at mods[m]
    let fourier: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|s| {
            mods.iter()
                .map(|&up| {
                    let step = Complex64::from_polar(1.0, -s.spacing * up);
                    let mut z = Complex64::from_polar(1.0, -(s.start as f64) * s.spacing * up);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for v in &s.values {
                        acc += z * (v * v);
                        z *= step;
                    }
                    acc * s.spacing
                })
                .collect()
        })
        .collect();

    let mut masked = 0usize;
    let mut spectra = Vec::new();
    for &tau in &lags {
        let vp = tau / a.b();
        let turn: Vec<Complex64> = samples.iter().map(|s| Complex64::from_polar(du, s.u * vp)).collect();
        let corr: Vec<Complex64> = mods
            .iter()
            .map(|&up| setup.window.self_correlation(tau, up))
            .collect::<Result<_>>()?;
        let peak = corr.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let offset = Complex64::from_polar(1.0, -a.y0() * vp);
        let spec: Vec<Complex64> = corr
            .iter()
            .enumerate()
            .map(|(m, c)| {
                if c.norm() <= setup.floor * peak {
                    masked += 1;
                    return Complex64::new(0.0, 0.0);
                }
                let lhs: Complex64 = fourier.iter().zip(&turn).map(|(row, t)| row[m] * t).sum();
                lhs * offset / c.conj()
            })
            .collect();
        spectra.push(spec);
    }
    let fraction = masked as f64 / (mods.len() * lags.len()) as f64;
    if fraction > setup.vanish_limit {
        return Err(Error::WindowVanishes { fraction, limit: setup.vanish_limit });
    }
    // lag product at an arbitrary time
    let product = |lag: usize, t: f64| -> Complex64 {
        spectra[lag]
            .iter()
            .zip(&mods)
            .map(|(v, up)| v * Complex64::from_polar(1.0, up * t))
            .sum::<Complex64>()
            * dup
            / (2.0 * PI)
    };

    let sup = setup.support;
    let mut report = match setup.gamma() {
        None => {
            let row0: Vec<Complex64> = (0..sup.len).map(|k| product(0, sup.time(k))).collect();
            let row: Vec<Complex64> = (0..sup.len).map(|k| product(1, sup.time(k))).collect();
            let (amp, verdict, comps) = sign_recovery(&row0, &unchirped_links(&row, a, &sup))?;
            let mut r = RecoveryReport::new(SampledSignal::from_real(&amp, sup.origin, sup.step)?, 0.0);
            r.verdict = Some(verdict.as_str().to_string());
            r.diag("components", comps as f64);
            r
        }
        Some(gamma) => {
            let energy: Vec<f64> = (0..sup.len).map(|k| product(0, sup.time(k)).re).collect();
            let (kmax, emax) = energy
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (k, &e)| if e > acc.1 { (k, e) } else { acc });
            let anchor_amp = emax.max(0.0).sqrt();
            if anchor_amp < 1e-10 {
                return Err(Error::AnchorDegenerate(anchor_amp));
            }
            let t0 = sup.time(kmax);
            let r = setup.radius as i64;
            let lo = ((sup.time(0) - t0) / gamma).floor() as i64 - r;
            let hi = ((sup.time(sup.len - 1) - t0) / gamma).ceil() as i64 + r;
            let amps: Vec<f64> = (lo..=hi)
                .into_par_iter()
                .map(|k| product(0, t0 + k as f64 * gamma).re.max(0.0).sqrt())
                .collect();
            let links: Vec<Complex64> = (lo..=hi)
                .into_par_iter()
                .map(|k| product(1, t0 + k as f64 * gamma))
                .collect();
            let idx = |k: i64| (k - lo) as usize;
            let mut phase = vec![0.0; amps.len()];
            for k in 1..=hi {
                phase[idx(k)] = phase[idx(k - 1)] + links[idx(k)].arg();
            }
            for k in (lo..0).rev() {
                phase[idx(k)] = phase[idx(k + 1)] - links[idx(k + 1)].arg();
            }
            let lattice: Vec<Complex64> = amps.iter().zip(&phase).map(|(&m, &p)| Complex64::from_polar(m, p)).collect();
            let band = BandLimit::new(1.0 / (2.0 * gamma))?;
            let tg = Grid::new(sup.time(0) - t0, sup.step, sup.len)?;
            let chirped = interpolate_bandlimited(&lattice, lo, 1.0 / gamma, &band, &tg, setup.radius)?;
            let ratio = a.a() / (2.0 * a.b());
            let values = chirped
                .iter()
                .enumerate()
                .map(|(k, z)| {
                    let t = sup.time(k);
                    z * Complex64::from_polar(1.0, -ratio * t * t)
                })
                .collect();
            let mut r = RecoveryReport::new(SampledSignal::new(values, sup.origin, sup.step)?, 0.0);
            r.diag("gamma", gamma);
            r.diag("anchor_time", t0);
            r.diag("lattice_points", lattice.len() as f64);
            r
        }
    };
    // misfit of the rebuilt magnitudes against the data
    let mut misfit: f64 = 0.0;
    for s in samples {
        let again = sample_stolct_magnitude_with_spacing(
            &report.signal,
            &setup.window,
            a,
            s.u,
            &rule,
            s.start..s.start + s.values.len() as i64,
            s.spacing,
        )?;
        for (x, y) in again.values.iter().zip(&s.values) {
            misfit = misfit.max((x - y).abs());
        }
    }
    report.residual = misfit;
    report.diag("masked_fraction", fraction);
    Ok(report)
}
