use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::lag_matrix::assemble_lag_matrix;
use super::RecoveryReport;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{SampledSignal, Support};
use crate::stolct::{stolct, MagnitudeMap, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StolctRecoveryOptions {
    /// Window correlation values below `floor * max` are masked.
    pub floor: f64,
    /// Largest tolerated fraction of masked points on the needed lags.
    pub vanish_limit: f64,
}

impl Default for StolctRecoveryOptions {
    fn default() -> Self {
        Self { floor: 1e-8, vanish_limit: 0.2 }
    }
}

/// Recovers `f` on `support` from `|V_phi^A f|` sampled on every lattice shift
/// and on one full period of the frequency axis.
///
/// The 2-D Fourier sum of `|V|^2` equals `e^{j y0 v} V_f~f~(b v, u) conj(V_phi phi(b v, u))`
/// with `f~ = f e^{j a t^2 / 2b}`; dividing out the window term and inverting
/// each lag row in `u` gives `f~(t) conj(f~(t - b v))`, whose leading
/// eigenvector is `f~` up to a global phase.
pub fn recover_from_stolct(
    mag: &MagnitudeMap,
    phi: &SampledSignal,
    a: &ParameterMatrix,
    support: &Support,
    options: &StolctRecoveryOptions,
) -> Result<RecoveryReport> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let (dt, n) = (support.step, support.len);
    let (vg, ug) = (mag.shift_grid, mag.freq_grid);
    let lags: Vec<i64> = (-(n as i64 - 1)..n as i64).collect();
    let lr = lag_rows(mag, phi, a, support, &lags, options.floor)?;
    let fraction = lr.masked_fraction();
    if fraction > options.vanish_limit {
        return Err(Error::WindowVanishes { fraction, limit: options.vanish_limit });
    }
    let rows: BTreeMap<i64, Vec<Complex64>> = lags.iter().copied().zip(lr.rows).collect();
    let lag = assemble_lag_matrix(&rows, n, support.origin, dt)?;
    let gap = lag.rank_gap();
    let chirped = lag.leading_signal(200, 1e-12);
    let ratio = a.a() / (2.0 * a.b());
    let signal = chirped.map(|t, v| v * Complex64::from_polar(1.0, -ratio * t * t));
    let again = stolct(&signal, &Window::Sampled(phi.clone()), a, &vg, &ug)?;
    let misfit = again
        .values()
        .iter()
        .zip(&mag.values)
        .map(|(z, m)| (z.norm() - m).abs())
        .fold(0.0, f64::max);
    let mut report = RecoveryReport::new(signal, misfit);
    report.diag("rank_gap", gap);
    report.diag("masked_fraction", fraction);
    report.diag("masked_points", lr.masked as f64);
    if gap > 0.1 {
        report.warnings.push(format!("RankDeficiency: sigma2/sigma1 = {gap:.3e}"));
    }
    Ok(report)
}

/// Lag rows `f~(t) conj(f~(t - p step))` recovered from a magnitude map.
pub(super) struct LagRows {
    pub rows: Vec<Vec<Complex64>>,
    /// Masked points on lags that carry data.
    pub masked: usize,
    pub needed: usize,
}

impl LagRows {
    pub fn masked_fraction(&self) -> f64 {
        if self.needed == 0 {
            0.0
        } else {
            self.masked as f64 / self.needed as f64
        }
    }
}

/// Inverts the magnitude/ambiguity identity for the requested lags.
///
/// A lag counts as needed when its Fourier data carries more than `1e-14` of
/// the zero-lag energy; only needed lags contribute to the masked fraction.
pub(super) fn lag_rows(
    mag: &MagnitudeMap,
    phi: &SampledSignal,
    a: &ParameterMatrix,
    support: &Support,
    lags: &[i64],
    floor: f64,
) -> Result<LagRows> {
    if a.is_degenerate() {
        return Err(Error::DegenerateParameter);
    }
    let (dt, n) = (support.step, support.len);
    if (phi.step() - dt).abs() > 1e-12 * dt {
        return Err(Error::GridMismatch("window and signal steps differ".into()));
    }
    let (vg, ug) = (mag.shift_grid, mag.freq_grid);
    let first_shift = support.origin - (phi.end_index() - 1);
    let last_shift = support.origin + n as i64 - 1 - phi.origin();
    let q0 = vg.start() / dt;
    if (vg.step() - dt).abs() > 1e-12 * dt
        || (q0 - q0.round()).abs() > 1e-9
        || (q0.round() as i64) > first_shift
        || (q0.round() as i64 + vg.count() as i64 - 1) < last_shift
    {
        return Err(Error::GridMismatch(format!(
            "shift grid must step by {dt} and cover lattice shifts {first_shift}..={last_shift}"
        )));
    }
    let period = 2.0 * PI * a.b().abs() / dt;
    if (ug.span() - period).abs() > 1e-9 * period || ug.count() < 2 * n - 1 {
        return Err(Error::InvalidGrid(format!(
            "frequency grid must span one period {period} with at least {} points",
            2 * n - 1
        )));
    }
    let mag2 = mag.squared();
    let m = n;
    let mods: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / (m as f64 * dt)).collect();
    let zero_lhs = lhs_row(&mag2, mag, a, 0, dt, &mods);
    let energy = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let e0 = energy(&zero_lhs);
    let per_lag: Vec<(Vec<Complex64>, Vec<Complex64>)> = lags
        .par_iter()
        .map(|&p| {
            let lhs = if p == 0 { zero_lhs.clone() } else { lhs_row(&mag2, mag, a, p, dt, &mods) };
            let win = mods.iter().map(|&up| window_correlation(phi, p, up)).collect();
            (lhs, win)
        })
        .collect();
    let win_max = per_lag
        .iter()
        .flat_map(|(_, w)| w.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let mut out = LagRows { rows: Vec::with_capacity(lags.len()), masked: 0, needed: 0 };
    let t0 = support.origin as f64 * dt;
    for (lhs, win) in &per_lag {
        let is_needed = energy(lhs) > 1e-14 * e0;
        let vals: Vec<Complex64> = lhs
            .iter()
            .zip(win)
            .map(|(l, w)| {
                if w.norm() > floor * win_max {
                    l / w.conj()
                } else {
                    if is_needed {
                        out.masked += 1;
                    }
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        if is_needed {
            out.needed += m;
        }
        // r[k] = 1/(M dt) sum_i V_i e^{j u'_i t_k}
        let row = (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                vals.iter()
                    .zip(&mods)
                    .map(|(v, up)| v * Complex64::from_polar(1.0, up * t))
                    .sum::<Complex64>()
                    / (m as f64 * dt)
            })
            .collect();
        out.rows.push(row);
    }
    Ok(out)
}

/// `e^{-j y0 v'} sum_q sum_w |V(v_q, w)|^2 e^{-j v_q u'} e^{j w v'} dv dw` with `v' = p step / b`.
fn lhs_row(
    mag2: &[f64],
    mag: &MagnitudeMap,
    a: &ParameterMatrix,
    p: i64,
    dt: f64,
    mods: &[f64],
) -> Vec<Complex64> {
    let (vg, ug) = (mag.shift_grid, mag.freq_grid);
    let vp = p as f64 * dt / a.b();
    let rows: Vec<Complex64> = (0..vg.count())
        .map(|q| {
            mag2[q * ug.count()..(q + 1) * ug.count()]
                .iter()
                .zip(ug.points())
                .map(|(&m2, w)| Complex64::from_polar(m2, w * vp))
                .sum::<Complex64>()
                * ug.step()
        })
        .collect();
    mods.iter()
        .map(|&up| {
            rows.iter()
                .zip(vg.points())
                .map(|(r, v)| r * Complex64::from_polar(1.0, -v * up))
                .sum::<Complex64>()
                * vg.step()
                * Complex64::from_polar(1.0, -a.y0() * vp)
        })
        .collect()
}

/// `V_phi phi(p step, u) = step sum_t phi(t) conj(phi(t - p step)) e^{-j u t}`.
fn window_correlation(phi: &SampledSignal, p: i64, u: f64) -> Complex64 {
    let dt = phi.step();
    (phi.origin().max(phi.origin() + p)..phi.end_index().min(phi.end_index() + p))
        .map(|n| phi.at(n) * phi.at(n - p).conj() * Complex64::from_polar(1.0, -u * n as f64 * dt))
        .sum::<Complex64>()
        * dt
}
