use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmedo_bench::experiment::{run_experiment, BaselineSpec, ExperimentSpec};
use kmedo_bench::ingest::{load_points_csv, parse_columns};
use kmedo_bench::log::{emit_log_csv, read_log, write_log};
use kmedo_bench::verify::verify;
use kmedo_bench::{BenchError, Result};
use kmedo_core::oracle::brute_force_kmedo;
use kmedo_core::{Instance, MetricSpace, OnlineConfig, PointId, Setting, ZMode};

#[derive(Parser)]
#[command(name = "kmedo", version, about = "Online k-median with outliers: replay, oracle and log checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a point stream and write the per-step log.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Log destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force k-median with outliers on a small point file.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "0-9")]
        columns: String,
        #[arg(long, default_value_t = 10_000)]
        max_rows: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 200)]
        z: usize,
        /// Candidate sites; the input points themselves when absent.
        #[arg(long)]
        facilities: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Check a log against the invariants and a fresh run of the same flags.
    Verify {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Log to check.
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    StaticF,
    FEqC,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZModeArg {
    Static,
    Incremental,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Zero-based columns, e.g. `0-9,12`.
    #[arg(long, default_value = "0-9")]
    columns: String,
    #[arg(long, default_value_t = 10_000)]
    max_rows: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Outlier budget; the final one in the incremental mode.
    #[arg(long, default_value_t = 200)]
    z: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    /// Lazy trigger factor; 0 runs local search on every arrival.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "f-eq-c")]
    setting: SettingArg,
    /// Candidate sites for the static-f setting.
    #[arg(long)]
    facilities: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "static")]
    z_mode: ZModeArg,
    #[arg(long, default_value_t = 0.05)]
    epsilon_z: f64,
    /// Offline restarts per checkpoint; 0 disables the baseline.
    #[arg(long, default_value_t = 5)]
    baseline_restarts: usize,
    /// Arrivals between baseline checkpoints.
    #[arg(long, default_value_t = 50)]
    stride: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplies every distance.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Replay the rows in a seeded random order.
    #[arg(long)]
    shuffle: bool,
}

impl ExperimentArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let z_mode = match self.z_mode {
            ZModeArg::Static => ZMode::Static,
            ZModeArg::Incremental => ZMode::Incremental { epsilon_z: self.epsilon_z },
        };
        let setting = match self.setting {
            SettingArg::StaticF => Setting::StaticF,
            SettingArg::FEqC => Setting::FEqualsC,
        };
        let baseline = match self.baseline_restarts {
            0 => BaselineSpec::None,
            restarts => BaselineSpec::OfflineLs { restarts, stride: self.stride },
        };
        let spec = ExperimentSpec {
            input: self.input.clone(),
            columns: parse_columns(&self.columns)?,
            max_rows: self.max_rows,
            facilities: self.facilities.clone(),
            config: OnlineConfig {
                epsilon: self.epsilon,
                gamma: self.gamma,
                ell: self.ell,
                setting,
                z_mode,
                lazy_alpha: self.alpha,
                ..OnlineConfig::new(self.k, self.z)
            },
            baseline,
            scale: self.scale,
            shuffle: self.shuffle,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { exp, out } => {
            let spec = exp.spec()?;
            let outcome = run_experiment(&spec)?;
            match out {
                Some(path) => emit_log_csv(&outcome.rows, &path)?,
                None => write_log(&outcome.rows, std::io::stdout().lock())
                    .map_err(|source| BenchError::Io { path: "<stdout>".into(), source })?,
            }
            eprintln!(
                "{} steps, recourse {}, engine {:.2?}, baseline {:.2?}",
                outcome.rows.len(),
                outcome.recourse_total,
                outcome.engine_time,
                outcome.baseline_time
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { input, columns, max_rows, k, z, facilities, scale } => {
            let columns = parse_columns(&columns)?;
            let clients = load_points_csv(&input, &columns, max_rows)?;
            let sites = match &facilities {
                Some(path) => load_points_csv(path, &columns, usize::MAX)?,
                None => Vec::new(),
            };
            let space = MetricSpace::euclidean(&[sites.as_slice(), clients.as_slice()].concat())?.with_scale(scale)?;
            let nf = sites.len();
            let client_ids: Vec<PointId> = (nf..nf + clients.len()).map(PointId).collect();
            let instance = if facilities.is_some() {
                Instance::new(&space, (0..nf).map(PointId).collect(), client_ids, k, z)?
            } else {
                Instance::facilities_are_clients(&space, client_ids, k, z)?
            };
            let opt = brute_force_kmedo(&instance)?;
            // zero-based rows: medians in the site file (the input when there is none), outliers in the input
            let list = |ids: &[PointId], shift: usize| {
                ids.iter().map(|i| (i.0 - shift).to_string()).collect::<Vec<_>>().join(" ")
            };
            println!("cost {:.16e}", opt.cost);
            println!("medians {}", list(&opt.medians, 0));
            println!("outliers {}", list(&opt.outliers, nf));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { exp, log } => {
            let spec = exp.spec()?;
            let rows = read_log(&log)?;
            let violations = verify(&rows, &spec)?;
            if violations.is_empty() {
                println!("ok: {} steps", rows.len());
                return Ok(ExitCode::SUCCESS);
            }
            for v in &violations {
                println!("t={}: {}", v.t, v.what);
            }
            Ok(ExitCode::from(3))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
