use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bdi::harness::{
    ablate, parse_grid, run_all, summarize, sweep, sweep_csv, trace_csv, write_atomic, write_json,
    ConfigOverrides, Document, RunConfig, SweepParam,
};
use bdi::tasks::{generate_offline, write_csv, DatasetRecords, Task, TaskSpec};

#[derive(Parser)]
#[command(
    name = "bdi",
    version,
    about = "Bidirectional NTK learning for offline design optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one design per seed and write a report per seed
    Run(ConfigOverrides),
    /// Full, forward-only, backward-only and RBF variants over shared seeds
    Ablate(ConfigOverrides),
    /// Vary one hyperparameter over a grid
    Sweep {
        /// yh, alpha, lambda or steps
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values, e.g. 5,10,15
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        config: ConfigOverrides,
    },
    /// Aggregate result files into a ranking table and plot-ready CSVs
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Directory for summary.json, traces.csv and sweeps.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an offline dataset as CSV
    GenData(ConfigOverrides),
}

fn emit(out: Option<&Path>, text: &str) -> bdi::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> bdi::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn execute(cli: Cli) -> bdi::Result<()> {
    match cli.command {
        Command::Run(flags) => {
            let cfg = RunConfig::resolve(&flags)?;
            let reports = run_all(&cfg)?;
            for r in &reports {
                log::info!(
                    "seed {}: normalized {:.4} (dataset best {:.4}) in {:.2}s",
                    r.seed,
                    r.result.score_normalized,
                    r.dataset.best_normalized,
                    r.wall_clock_seconds
                );
            }
            match (&cfg.out, reports.as_slice()) {
                (Some(p), [single]) => write_json(p, single)?,
                (Some(dir), many) => {
                    for r in many {
                        write_json(&dir.join(format!("seed-{}.json", r.seed)), r)?;
                    }
                }
                (None, _) => {
                    for r in &reports {
                        println!("{}", serde_json::to_string(r)?);
                    }
                }
            }
        }
        Command::Ablate(flags) => {
            let cfg = RunConfig::resolve(&flags)?;
            let table = ablate(&cfg)?;
            eprint!("{}", table.render());
            emit(cfg.out.as_deref(), &pretty(&table)?)?;
        }
        Command::Sweep {
            param,
            grid,
            config,
        } => {
            let cfg = RunConfig::resolve(&config)?;
            let table = sweep(&cfg, param, &parse_grid(&grid)?)?;
            eprint!("{}", table.render());
            emit(cfg.out.as_deref(), &pretty(&table)?)?;
        }
        Command::Report { paths, out } => {
            let docs = paths
                .iter()
                .map(|p| Document::load(p))
                .collect::<bdi::Result<Vec<_>>>()?;
            let summary = summarize(&docs)?;
            print!("{}", summary.render());
            if let Some(dir) = out {
                write_json(&dir.join("summary.json"), &summary)?;
                write_atomic(&dir.join("traces.csv"), trace_csv(&docs)?.as_bytes())?;
                write_atomic(&dir.join("sweeps.csv"), sweep_csv(&docs)?.as_bytes())?;
            }
        }
        Command::GenData(flags) => {
            let cfg = RunConfig::resolve(&flags)?;
            let seed = cfg.seed.0[0];
            let task = Task::new(TaskSpec::new(cfg.task, cfg.dim, seed))?;
            let data = generate_offline(&task, cfg.n, cfg.keep_fraction)?;
            let mut buf = Vec::new();
            write_csv(&DatasetRecords::from(&data), &mut buf)?;
            match &cfg.out {
                Some(p) => write_atomic(p, &buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
