use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use super::config::{ExperimentConfig, SolverKind};
use super::generate::{generate_signal, generate_window};
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::recovery::{
    recover_bandlimited_sampled, recover_from_multi_olct, recover_from_stolct, recover_nonseparable_real,
    sample_for_recovery, BandlimitedSetup, MagnitudeData, RecoveryReport, StolctRecoveryOptions,
};
use crate::signal::{Grid, SampledSignal, Support};
use crate::stolct::{stolct, MagnitudeMap, StolctSamples, Window};
use crate::transforms::{fast_grid, olct_fast};

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub solver: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub num_matrices: usize,
    pub noise_sigma: f64,
    /// Phase-invariant error against the generated signal; NaN for failed runs.
    pub residual: f64,
    pub runtime_ms: f64,
    /// Solver verdict, `ok`, or the error name of a failed run.
    pub verdict: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: usize,
}

enum Clean {
    Multi(Vec<MagnitudeData>),
    Map { mag: MagnitudeMap, phi: SampledSignal, matrix: ParameterMatrix, real: bool },
    Samples { samples: Vec<StolctSamples>, setup: BandlimitedSetup },
}

struct Prepared {
    truth: SampledSignal,
    support: Support,
    clean: Clean,
}

/// Shift grid covering every lattice shift at which `phi` overlaps `f`.
pub fn covering_shifts(f: &SampledSignal, phi: &SampledSignal) -> Result<Grid> {
    let first = f.origin() - (phi.end_index() - 1);
    Grid::new(first as f64 * f.step(), f.step(), f.len() + phi.len() - 1)
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let truth = generate_signal(&cfg.signal)?;
    let support = Support::of(&truth);
    let matrices = cfg.matrices.matrices(truth.step())?;
    let clean = match cfg.solver {
        SolverKind::MultiOlct => Clean::Multi(
            matrices
                .iter()
                .map(|a| {
                    let s = olct_fast(&truth, a)?;
                    Ok(MagnitudeData { matrix: *a, ugrid: s.grid(), mag2: s.magnitudes_squared() })
                })
                .collect::<Result<_>>()?,
        ),
        SolverKind::Stolct | SolverKind::Nonseparable => {
            let spec = cfg.window.as_ref().ok_or_else(|| Error::Config("missing window".into()))?;
            let phi = generate_signal(spec)?;
            let matrix = matrices[0];
            let shifts = match cfg.grids.shifts {
                Some(g) => g,
                None => covering_shifts(&truth, &phi)?,
            };
            let freqs = match cfg.grids.freqs {
                Some(g) => g,
                None => fast_grid(&truth, &matrix, 2 * truth.len())?,
            };
            let mag = stolct(&truth, &Window::Sampled(phi.clone()), &matrix, &shifts, &freqs)?.magnitudes();
            Clean::Map { mag, phi, matrix, real: cfg.solver == SolverKind::Nonseparable }
        }
        SolverKind::Bandlimited => {
            let spec = cfg.window.as_ref().ok_or_else(|| Error::Config("missing window".into()))?;
            let mode = cfg.bandlimited.ok_or_else(|| Error::Config("missing bandlimited mode".into()))?;
            let ugrid = cfg.grids.u.ok_or_else(|| Error::Config("missing grids.u".into()))?;
            let setup = BandlimitedSetup::new(matrices[0], generate_window(spec, true)?, mode, support);
            let [lo, hi] = cfg.grids.v_range.unwrap_or_else(|| {
                let (t0, t1) = (truth.time(0), truth.time(truth.len() - 1));
                let half = 0.5 * (t1 - t0);
                [t0 - half, t1 + half]
            });
            let samples = sample_for_recovery(&truth, &setup, &ugrid, lo, hi, cfg.rate_factor)?;
            Clean::Samples { samples, setup }
        }
    };
    Ok(Prepared { truth, support, clean })
}

/// Adds `sigma * max(values)` Gaussian noise to squared data and clamps at zero.
pub fn add_noise(values: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma == 0.0 {
        return;
    }
    let scale = sigma * values.iter().copied().fold(0.0, f64::max);
    for v in values.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v = (*v + scale * e).max(0.0);
    }
}

fn noisy_magnitudes(values: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    add_noise(&mut sq, sigma, rng);
    sq.into_iter().map(f64::sqrt).collect()
}

fn solve(p: &Prepared, count: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Result<RecoveryReport> {
    let report = match &p.clean {
        Clean::Multi(data) => {
            let data: Vec<MagnitudeData> = data[..count]
                .iter()
                .map(|d| {
                    let mut d = d.clone();
                    add_noise(&mut d.mag2, sigma, rng);
                    d
                })
                .collect();
            recover_from_multi_olct(&data, &p.support)?
        }
        Clean::Map { mag, phi, matrix, real } => {
            let noisy = MagnitudeMap { values: noisy_magnitudes(&mag.values, sigma, rng), ..mag.clone() };
            if *real {
                recover_nonseparable_real(&noisy, phi, matrix, &p.support)?
            } else {
                recover_from_stolct(&noisy, phi, matrix, &p.support, &StolctRecoveryOptions::default())?
            }
        }
        Clean::Samples { samples, setup } => {
            let samples: Vec<StolctSamples> = samples
                .iter()
                .map(|s| StolctSamples { values: noisy_magnitudes(&s.values, sigma, rng), ..s.clone() })
                .collect();
            recover_bandlimited_sampled(&samples, setup)?
        }
    };
    report.compare(&p.truth)
}

/// Runs the configuration once (first noise level, all matrices, trial 0).
pub fn run_single(cfg: &ExperimentConfig) -> Result<RecoveryReport> {
    cfg.validate()?;
    let p = prepare(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let count = cfg.counts().into_iter().max().unwrap_or(1);
    solve(&p, count, cfg.noise_levels()[0], &mut rng)
}

struct Run {
    id: String,
    count: usize,
    sigma: f64,
    trial: usize,
}

/// Runs every (measurement count, noise level, trial) combination on a pool
/// of `workers` threads and writes the artifacts under `cfg.output_path`:
/// `results.csv`, `residual_vs_noise.csv`, `residual_vs_count.csv`,
/// `reports/<run>.json` and `signals/{truth,<run>}.json`.
///
/// Noise for trial `k` comes from stream `k` of a ChaCha8 generator seeded
/// with `cfg.seed`, so every noise level and count sees the same draws.
/// Failed runs are recorded with the error name and do not stop the batch.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let prepared = prepare(cfg)?;
    let mut runs = Vec::new();
    for count in cfg.counts() {
        for sigma in cfg.noise_levels() {
            for trial in 0..cfg.trials {
                let id = format!("{}-m{count}-e{sigma:e}-t{trial}", cfg.id);
                runs.push(Run { id, count, sigma, trial });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<(Result<RecoveryReport>, f64)> = pool.install(|| {
        runs.par_iter()
            .map(|r| {
                let clock = Instant::now();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(r.trial as u64);
                let out = solve(&prepared, r.count, r.sigma, &mut rng);
                (out, clock.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });

    let n = cfg.signal.length;
    let mut rows = Vec::with_capacity(runs.len());
    let mut failures = 0;
    let dir = &cfg.output_path;
    std::fs::create_dir_all(dir.join("reports"))?;
    std::fs::create_dir_all(dir.join("signals"))?;
    prepared.truth.write(&dir.join("signals").join("truth.json"))?;
    for (run, (out, ms)) in runs.iter().zip(&results) {
        let (residual, verdict) = match out {
            Ok(rep) => {
                std::fs::write(dir.join("reports").join(format!("{}.json", run.id)), rep.to_json()?)?;
                rep.signal.write(&dir.join("signals").join(format!("{}.json", run.id)))?;
                (rep.residual, rep.verdict.clone().unwrap_or_else(|| "ok".into()))
            }
            Err(e) => {
                failures += 1;
                let body = serde_json::json!({ "error": e.name(), "message": e.to_string() });
                std::fs::write(dir.join("reports").join(format!("{}.json", run.id)), serde_json::to_string_pretty(&body)?)?;
                (f64::NAN, e.name().to_string())
            }
        };
        rows.push(ResultRow {
            experiment_id: run.id.clone(),
            solver: cfg.solver.as_str().to_string(),
            n,
            num_matrices: if cfg.solver == SolverKind::MultiOlct { run.count } else { 1 },
            noise_sigma: run.sigma,
            residual,
            runtime_ms: *ms,
            verdict,
        });
    }
    write_rows(&dir.join("results.csv"), &rows)?;
    write_tables(dir, &rows)?;
    Ok(ExperimentOutcome { rows, failures })
}

fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TableRow {
    num_matrices: usize,
    noise_sigma: f64,
    runs: usize,
    failures: usize,
    median_residual: f64,
}

/// Median of the finite values, NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn write_tables(dir: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut groups: BTreeMap<(usize, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.num_matrices, r.noise_sigma.to_bits())).or_default().push(r.residual);
    }
    let table: Vec<TableRow> = groups
        .iter()
        .map(|(&(m, s), v)| TableRow {
            num_matrices: m,
            noise_sigma: f64::from_bits(s),
            runs: v.len(),
            failures: v.iter().filter(|x| !x.is_finite()).count(),
            median_residual: median(v),
        })
        .collect();
    let mut by_noise: Vec<&TableRow> = table.iter().collect();
    by_noise.sort_by(|a, b| a.num_matrices.cmp(&b.num_matrices).then(a.noise_sigma.total_cmp(&b.noise_sigma)));
    let mut by_count: Vec<&TableRow> = table.iter().collect();
    by_count.sort_by(|a, b| a.noise_sigma.total_cmp(&b.noise_sigma).then(a.num_matrices.cmp(&b.num_matrices)));
    for (name, t) in [("residual_vs_noise.csv", by_noise), ("residual_vs_count.csv", by_count)] {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        for r in t {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}
