use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::lag_matrix::{assemble_lag_matrix, LagProductMatrix};
use super::RecoveryReport;
use crate::ambiguity::magnitude_to_ambiguity_slice;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{Grid, Support};
use crate::transforms::olct_forward;

/// A warning is attached when `sigma_1 / sigma_2` of the completed lag matrix is below this.
pub const RANK_GAP_WARNING: f64 = 10.0;

/// `|O^A f(u)|^2` sampled on `ugrid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeData {
    pub matrix: ParameterMatrix,
    pub ugrid: Grid,
    pub mag2: Vec<f64>,
}

fn distinct_ratios(data: &[MagnitudeData]) -> usize {
    let mut r: Vec<f64> = data.iter().filter_map(|d| d.matrix.chirp_ratio()).collect();
    r.sort_by(f64::total_cmp);
    r.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
    r.len()
}

/// Recovers a signal on `support` from `|O^A f|^2` for many matrices `A`.
///
/// Each measurement gives the ambiguity function along the line `(-b eta, a eta)`;
/// the line crosses lag `p * step` at `eta = -p step / b`, so every lag row
/// `f(t) conj(f(t - p step))` is solved by least squares across matrices. The
/// zero lag only carries the total energy, so the diagonal is completed by
/// alternating with the leading eigenpair. Each `ugrid` must cover exactly one
/// period `2 pi |b| / step` with at least `2 len - 1` points.
pub fn recover_from_multi_olct(data: &[MagnitudeData], support: &Support) -> Result<RecoveryReport> {
    let n = support.len;
    let dt = support.step;
    if data.iter().any(|d| d.matrix.is_degenerate()) {
        return Err(Error::DegenerateParameter);
    }
    let distinct = distinct_ratios(data);
    if distinct < n {
        return Err(Error::InsufficientDiversity { distinct, needed: n });
    }
    for d in data {
        let period = 2.0 * PI * d.matrix.b().abs() / dt;
        if (d.ugrid.span() - period).abs() > 1e-9 * period || d.ugrid.count() < 2 * n - 1 {
            return Err(Error::InvalidGrid(format!(
                "measurement grid spans {} with {} points; expected one period {period} with at least {}",
                d.ugrid.span(),
                d.ugrid.count(),
                2 * n - 1
            )));
        }
    }
    let ni = n as i64;
    let lags: Vec<i64> = (-(ni - 1)..ni).collect();
    // slice values V(p step, sigma) = e^{-j p step sigma / 2} A f(p step, sigma)
    let mut per_lag: BTreeMap<i64, Vec<(f64, Complex64)>> = BTreeMap::new();
    for d in data {
        let (a, b) = (d.matrix.a(), d.matrix.b());
        let etas: Vec<f64> = lags.iter().map(|&p| -(p as f64) * dt / b).collect();
        let slice = magnitude_to_ambiguity_slice(&d.mag2, &d.ugrid, &d.matrix, &etas)?;
        for (&p, s) in lags.iter().zip(slice) {
            let sigma = a * s.eta;
            let tau = p as f64 * dt;
            per_lag
                .entry(p)
                .or_default()
                .push((sigma, s.value * Complex64::from_polar(1.0, -0.5 * tau * sigma)));
        }
    }
    let energy = per_lag[&0].iter().map(|(_, v)| v.re).sum::<f64>() / data.len() as f64 / dt;
    let mut rows: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
    let mut worst_fit: f64 = 0.0;
    for &p in &lags {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        if p != 0 {
            let ks: Vec<usize> = (0..ni).filter(|k| (0..ni).contains(&(k - p))).map(|k| k as usize).collect();
            let obs = &per_lag[&p];
            let m = DMatrix::from_fn(obs.len(), ks.len(), |i, j| {
                Complex64::from_polar(dt, -obs[i].0 * support.time(ks[j]))
            });
            let y = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.1));
            let sol = m
                .clone()
                .svd(true, true)
                .solve(&y, 1e-13)
                .map_err(|e| Error::InvalidGrid(format!("least squares failed at lag {p}: {e}")))?;
            worst_fit = worst_fit.max((&m * &sol - &y).norm() / y.norm().max(f64::MIN_POSITIVE));
            for (j, &k) in ks.iter().enumerate() {
                row[k] = sol[j];
            }
        }
        rows.insert(p, row);
    }
    let mut lag = assemble_lag_matrix(&rows, n, support.origin, dt)?;
    let iterations = complete_diagonal(&mut lag, energy);
    let gap = lag.rank_gap();
    let signal = lag.leading_signal(200, 1e-12);
    let mut misfit: f64 = 0.0;
    for d in data {
        let s = olct_forward(&signal, &d.matrix, &d.ugrid)?;
        for (m, want) in s.values().iter().zip(&d.mag2) {
            misfit = misfit.max((m.norm_sqr() - want).abs());
        }
    }
    let mut report = RecoveryReport::new(signal, misfit);
    report.diag("rank_gap", gap);
    report.diag("distinct_ratios", distinct as f64);
    report.diag("completion_iterations", iterations as f64);
    report.diag("lag_fit_residual", worst_fit);
    report.diag("energy", energy);
    if gap > 1.0 / RANK_GAP_WARNING {
        report.warnings.push(format!("RankDeficiency: sigma2/sigma1 = {gap:.3e}"));
    }
    Ok(report)
}

/// Fills the unobserved diagonal with `lambda |v|^2` of the current leading
/// eigenpair until it stops changing. Returns the number of sweeps.
fn complete_diagonal(lag: &mut LagProductMatrix, energy: f64) -> usize {
    let mut diag = initial_diagonal(lag, energy);
    for it in 1..=200 {
        lag.set_diagonal(&diag);
        let (lambda, v) = lag.leading_eigenpair(200, 1e-12);
        let next: Vec<f64> = v.iter().map(|z| lambda.max(0.0) * z.norm_sqr()).collect();
        let change = next.iter().zip(&diag).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        diag = next;
        if change < 1e-14 * energy.max(f64::MIN_POSITIVE) {
            lag.set_diagonal(&diag);
            return it;
        }
    }
    lag.set_diagonal(&diag);
    200
}

/// For `M = v v^*` with energy `E`, row `i` gives `d_i (E - d_i) = sum_{j != i} |M_ij|^2`.
/// All but at most one index take the smaller root; the choice whose total
/// is closest to `E` wins.
fn initial_diagonal(lag: &LagProductMatrix, energy: f64) -> Vec<f64> {
    let m = lag.entries();
    let n = lag.dim();
    let roots: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm_sqr()).sum();
            let disc = (energy * energy - 4.0 * r).max(0.0).sqrt();
            ((energy - disc) / 2.0, (energy + disc) / 2.0)
        })
        .collect();
    let low: f64 = roots.iter().map(|r| r.0).sum();
    let mut best = (None, (low - energy).abs());
    for (i, r) in roots.iter().enumerate() {
        let dev = (low - r.0 + r.1 - energy).abs();
        if dev < best.1 {
            best = (Some(i), dev);
        }
    }
    roots
        .iter()
        .enumerate()
        .map(|(i, r)| if best.0 == Some(i) { r.1 } else { r.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::phase_invariant_error;
    use crate::signal::SampledSignal;
    use crate::transforms::{fast_grid, olct_fast_len};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SampledSignal::discrete(s, -5)
    }

    fn measure(f: &SampledSignal, ratios: impl Iterator<Item = f64>) -> Vec<MagnitudeData> {
        ratios
            .map(|r| {
                let a = ParameterMatrix::new(r, 1.0, r - 1.0, 1.0, 0.0, 0.0).unwrap();
                let s = olct_fast_len(f, &a, 2 * f.len()).unwrap();
                MagnitudeData { matrix: a, ugrid: s.grid(), mag2: s.magnitudes_squared() }
            })
            .collect()
    }

    // stratified over one period of the lag model
    fn spread(m: usize, seed: u64) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(move |k| 2.0 * PI * (k as f64 + rng.random_range(0.1..0.9)) / m as f64)
    }

    #[test]
    fn three_point_signal_is_recovered() {
        let f = SampledSignal::from_real(&[0.0, 1.0, -2.0, 0.5], -5, 1.0).unwrap();
        let data = measure(&f, spread(8, 1));
        let r = recover_from_multi_olct(&data, &Support::of(&f)).unwrap().compare(&f).unwrap();
        assert!(r.residual < 1e-10, "{}", r.residual);
    }

    #[test]
    fn random_signal_with_many_ratios() {
        let f = random(12, 7);
        let data = measure(&f, spread(24, 2));
        let r = recover_from_multi_olct(&data, &Support::of(&f)).unwrap();
        assert!(r.residual < 1e-9, "misfit {} {:?}", r.residual, r.diagnostics);
        assert!(r.diagnostics["rank_gap"] < 1e-6);
        assert!(r.warnings.is_empty());
        let r = r.compare(&f).unwrap();
        assert!(r.residual < 1e-8, "{}", r.residual);
    }

    #[test]
    fn too_few_ratios() {
        let f = random(12, 8);
        let data = measure(&f, (1..=8).map(|k| k as f64 / 8.0));
        assert!(matches!(
            recover_from_multi_olct(&data, &Support::of(&f)),
            Err(Error::InsufficientDiversity { distinct: 8, needed: 12 })
        ));
    }

    #[test]
    fn grids_must_cover_one_period() {
        let f = random(6, 9);
        let mut data = measure(&f, (1..=8).map(|k| k as f64 / 8.0));
        let a = data[0].matrix;
        data[0].ugrid = fast_grid(&f, &a, 8).unwrap();
        data[0].mag2.truncate(8);
        assert!(matches!(recover_from_multi_olct(&data, &Support::of(&f)), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn corrupted_measurement_is_flagged() {
        let f = random(10, 10);
        let mut data = measure(&f, spread(20, 3));
        let other = measure(&random(10, 11), std::iter::once(data[3].matrix.a()));
        data[3].mag2 = other[0].mag2.clone();
        let r = recover_from_multi_olct(&data, &Support::of(&f)).unwrap();
        assert!(r.residual > 1e-2);
        assert!(r.warnings.iter().any(|w| w.starts_with("RankDeficiency")), "{:?}", r.diagnostics);
        assert!(phase_invariant_error(&f, &r.signal).unwrap().residual > 1e-6);
    }
}
