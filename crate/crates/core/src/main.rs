use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use sepca::harness::{
    self, diagnostics, mean_trajectory, run_experiment_with, run_refine_study, write_csv_to,
    write_refine_csv_to, ExperimentConfig, RefineStudyConfig, Status, Threads, Timing,
};
use sepca::OperatorMode;

#[derive(Parser)]
#[command(name = "sepca", version, about = "Sparse PCA under the single-spike model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write one CSV row per trial and stage.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output path, `-` for stdout. Falls back to the config's out_path.
        #[arg(long)]
        out: Option<String>,
        /// Override master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the worker count.
        #[arg(long)]
        threads: Option<usize>,
        /// Write wall_ms = 0 so output bytes depend only on the config.
        #[arg(long)]
        no_timing: bool,
    },
    /// Tabulate s(p) for the flat, power-law and exponential profiles.
    ProfileTable {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Track sin error per TPower iteration under both operators.
    RefineStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Theory-side checks.
    Diagnostics {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value = "-")]
        out: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Dk,
    NoiseScaling,
    Complexity,
}

fn open_out(path: &str) -> anyhow::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).with_context(|| format!("cannot create {path}"))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn resolve_out(flag: Option<String>, from_config: Option<String>) -> String {
    flag.or(from_config).unwrap_or_else(|| "-".to_string())
}

fn threads_override(threads: Option<usize>) -> anyhow::Result<Option<Threads>> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(t) => Ok(Some(Threads::Count(t))),
        None => Ok(None),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            no_timing,
        } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("cannot load config {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(t) = threads_override(threads)? {
                cfg.threads = t;
            }
            let out = resolve_out(out, cfg.out_path.clone());
            // open before the sweep so an unwritable path fails fast
            let sink = open_out(&out)?;
            let timing = if no_timing { Timing::Off } else { Timing::On };
            let clock = Instant::now();
            let rows = run_experiment_with(&cfg, timing)?;
            write_csv_to(&rows, sink)?;
            let failed = rows.iter().filter(|r| r.status == Status::Failed).count();
            eprintln!(
                "{} rows ({} failed) in {:.1}s -> {}",
                rows.len(),
                failed,
                clock.elapsed().as_secs_f64(),
                out
            );
        }
        Command::ProfileTable { k, out } => {
            let sink = open_out(&out)?;
            harness::write_profile_table(k, sink)?;
            eprintln!("s(p) for k={k} -> {out}");
        }
        Command::RefineStudy {
            config,
            out,
            threads,
        } => {
            let mut cfg = RefineStudyConfig::load(&config)
                .with_context(|| format!("cannot load config {}", config.display()))?;
            if let Some(t) = threads_override(threads)? {
                cfg.threads = t;
            }
            let out = resolve_out(out, cfg.out_path.clone());
            let sink = open_out(&out)?;
            let rows = run_refine_study(&cfg)?;
            write_refine_csv_to(&cfg, &rows, sink)?;
            for op in [OperatorMode::Centered, OperatorMode::Uncentered] {
                let traj = mean_trajectory(&rows, op);
                eprintln!(
                    "{op}: mean sin error t=0 {:.4}, t={} {:.4}",
                    traj.first().copied().unwrap_or(f64::NAN),
                    cfg.iterations,
                    traj.last().copied().unwrap_or(f64::NAN)
                );
            }
            eprintln!("{} rows -> {out}", rows.len());
        }
        Command::Diagnostics { which, out, seed } => {
            let sink = open_out(&out)?;
            match which {
                Which::Dk => {
                    let report = diagnostics::dk_report(seed)?;
                    diagnostics::write_dk_csv(&report, sink)?;
                    eprintln!(
                        "{} checks, {} violations of the stated bound, {} of the perturbed bound",
                        report.entries.len(),
                        report.violations(),
                        report.perturbed_violations()
                    );
                }
                Which::NoiseScaling => {
                    let table = diagnostics::noise_scaling(seed)?;
                    diagnostics::write_noise_csv(&table, sink)?;
                    for (p, med) in &table.vary_p {
                        eprintln!("m={} p={p}: median {med:.4}", diagnostics::NOISE_FIXED_M);
                    }
                    for (m, med) in &table.vary_m {
                        eprintln!("m={m} p={}: median {med:.4}", diagnostics::NOISE_FIXED_P);
                    }
                }
                Which::Complexity => {
                    let rows = diagnostics::complexity_report(seed)?;
                    diagnostics::write_complexity_csv(&rows, sink)?;
                    let violations = rows.iter().filter(|r| !r.satisfied).count();
                    eprintln!("{} profiles, {violations} violations of A <= B", rows.len());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
