use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use olct::ambiguity::{ambiguity, cross_ambiguity};
use olct::harness::{run_experiment, run_single, ExperimentConfig, SolverKind};
use olct::pairs::{certify_pair, make_nontrivial_pair};
use olct::stolct::{stolct, Window};
use olct::transforms::{olct_fast, olct_forward, olct_inverse, Spectrum};
use olct::{Error, Grid, ParameterMatrix, Result, SampledSignal};

#[derive(Parser)]
#[command(name = "olct", about = "Offset linear canonical transforms and magnitude-only recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward or inverse OLCT of a signal file.
    Olct(OlctArgs),
    /// Short-time OLCT with a sampled window.
    Stolct(StolctArgs),
    /// (Cross-)ambiguity surface on a lag/modulation grid.
    Ambiguity(AmbiguityArgs),
    /// Build or certify nontrivial ambiguity pairs.
    Pair {
        #[command(subcommand)]
        action: PairAction,
    },
    /// Run one solver on the measurements described by a config file.
    Recover(RecoverArgs),
    /// Run a batch experiment from a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct OlctArgs {
    /// `a,b,c,d` or `a,b,c,d,y0,w0`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: ParameterMatrix,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Use the chirp-FFT-chirp path on its natural grid.
    #[arg(long)]
    fast: bool,
    /// Read a spectrum and invert it onto `--grid`.
    #[arg(long)]
    inverse: bool,
    /// Output grid `start,step,count` (required unless `--fast`).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<Grid>,
}

#[derive(Args)]
struct StolctArgs {
    #[arg(long, allow_hyphen_values = true)]
    matrix: ParameterMatrix,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    window: PathBuf,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    shifts: Grid,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    freqs: Grid,
    #[arg(long)]
    out: PathBuf,
    /// Write `|V|` as CSV (one row per shift) instead of the complex map.
    #[arg(long)]
    magnitude: bool,
}

#[derive(Args)]
struct AmbiguityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Second signal for the cross-ambiguity.
    #[arg(long)]
    other: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    lags: Grid,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    mods: Grid,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum PairAction {
    /// `x = g1 * g2`, `y = e^{j beta} g1 * conj-reversed g2` shifted by `n0`, chirped by `A`.
    Make {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n0: i64,
        #[arg(long, allow_hyphen_values = true)]
        matrix: ParameterMatrix,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare `|O^A x|` and `|O^A y|` on a grid and classify the pair.
    Certify {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        matrix: ParameterMatrix,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    config: PathBuf,
    /// Report destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    Grid::parse_triple(s).map_err(|e| e.to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_input(path: &Path) -> Result<SampledSignal> {
    SampledSignal::read(path).map_err(|e| match e {
        Error::Io(err) => Error::Config(format!("{}: {err}", path.display())),
        other => other,
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Olct(args) => {
            if args.inverse {
                let text = std::fs::read_to_string(&args.input)
                    .map_err(|e| Error::Config(format!("{}: {e}", args.input.display())))?;
                let spec: Spectrum = serde_json::from_str(&text)?;
                let tgrid = args.grid.ok_or_else(|| Error::Config("--inverse needs --grid".into()))?;
                olct_inverse(&spec, &args.matrix, &tgrid)?.write(&args.out)
            } else {
                let x = read_input(&args.input)?;
                let spec = match (args.fast, args.grid) {
                    (true, _) => olct_fast(&x, &args.matrix)?,
                    (false, Some(g)) => olct_forward(&x, &args.matrix, &g)?,
                    (false, None) => return Err(Error::Config("either --fast or --grid is required".into())),
                };
                write_json(&args.out, &spec)
            }
        }
        Command::Stolct(args) => {
            let f = read_input(&args.input)?;
            let phi = read_input(&args.window)?;
            let map = stolct(&f, &Window::Sampled(phi), &args.matrix, &args.shifts, &args.freqs)?;
            if args.magnitude {
                map.magnitudes().write_csv(std::fs::File::create(&args.out)?)
            } else {
                write_json(&args.out, &map)
            }
        }
        Command::Ambiguity(args) => {
            let f = read_input(&args.input)?;
            let surface = match &args.other {
                Some(p) => cross_ambiguity(&f, &read_input(p)?, &args.lags, &args.mods)?,
                None => ambiguity(&f, &args.lags, &args.mods)?,
            };
            write_json(&args.out, &surface)
        }
        Command::Pair { action } => match action {
            PairAction::Make { g1, g2, beta, n0, matrix, out } => {
                let pair = make_nontrivial_pair(&read_input(&g1)?, &read_input(&g2)?, &matrix, beta, n0)?;
                write_json(&out, &pair)
            }
            PairAction::Certify { x, y, matrix, grid, tol } => {
                let cert = certify_pair(&read_input(&x)?, &read_input(&y)?, &matrix, &grid, tol)?;
                println!("{}", serde_json::to_string_pretty(&cert)?);
                Ok(())
            }
        },
        Command::Recover(args) => {
            let mut cfg = ExperimentConfig::read(&args.config)?;
            if let Some(s) = args.solver {
                cfg.solver = s;
                cfg.validate()?;
            }
            let report = run_single(&cfg)?;
            match args.out {
                Some(p) => std::fs::write(p, report.to_json()?)?,
                None => println!("{}", report.to_json()?),
            }
            Ok(())
        }
        Command::Experiment(args) => {
            let cfg = ExperimentConfig::read(&args.config)?;
            let outcome = run_experiment(&cfg, args.workers)?;
            println!(
                "{} runs, {} failed; results in {}",
                outcome.rows.len(),
                outcome.failures,
                cfg.output_path.join("results.csv").display()
            );
            // a batch with failed runs still writes everything, then reports failure
            return Ok(if outcome.failures > 0 { 1 } else { 0 });
        }
    }
    .map(|()| 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
