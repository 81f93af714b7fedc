//! `nlsq`: runs one experiment from a configuration file and writes its
//! reports, CSV tables and a manifest to an output directory.
//!
//! Exit codes: 0 all checks passed, 1 a check failed or was inconclusive,
//! 2 configuration or I/O error, 3 resource guard.

mod commands;
mod config;
mod output;
mod schema;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use output::{Manifest, Timings};

#[derive(Parser)]
#[command(name = "nlsq", version, about = "Quasi-invariance laboratory for truncated 2-D NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for reports; created if missing.
    #[arg(long, global = true, env = "NLSQ_OUT_DIR", default_value = "nlsq-out")]
    out_dir: PathBuf,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "NLSQ_WORKERS")]
    workers: Option<usize>,

    /// Replaces `seed` from the configuration.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Draw Gaussian fields and check their covariance.
    Sample,
    /// Evolve one field and record conserved quantities.
    Evolve,
    /// Decompose the modified-energy derivative and check it against finite differences.
    EnergyAudit,
    /// Enumerate resonance counting sets.
    Counting,
    /// Monte-Carlo change-of-variables tests.
    QiTest,
    /// Localized exponential moments and the tail of S.
    Moments,
    /// Print the report schema.
    Schema,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Command::Sample => Experiment::Sample,
            Command::Evolve => Experiment::Evolve,
            Command::EnergyAudit => Experiment::EnergyAudit,
            Command::Counting => Experiment::Counting,
            Command::QiTest => Experiment::QiTest,
            Command::Moments => Experiment::Moments,
            Command::Schema => return None,
        })
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_GUARD: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.experiment() {
        None => emit_schema(&cli.out_dir),
        Some(experiment) => run(&cli, experiment),
    }
}

fn emit_schema(out_dir: &Path) -> ExitCode {
    let text = serde_json::to_string_pretty(&schema::schema()).expect("schema serializes");
    let manifest = serde_json::to_string_pretty(&schema::manifest_schema()).expect("schema serializes");
    let written = std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(out_dir.join("schema.json"), format!("{text}\n")))
        .and_then(|_| std::fs::write(out_dir.join("manifest.schema.json"), format!("{manifest}\n")));
    if let Err(e) = written {
        eprintln!("error: {}: {e}", out_dir.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    // a closed pipe is not an error for a printing command
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::SUCCESS
}

fn run(cli: &Cli, experiment: Experiment) -> ExitCode {
    let start = Instant::now();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config is required for `{}`", experiment.name());
        return ExitCode::from(EXIT_CONFIG);
    };
    let label = path.display().to_string();
    let raw = match std::fs::read_to_string(path) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("{label}:0: config: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match ExperimentConfig::parse(&raw, &label) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = cfg.validate(experiment, &raw, &label) {
        eprintln!("{e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(seed) = cli.seed_override {
        cfg.seed = seed;
    }
    if cli.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(EXIT_CONFIG);
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let parse_seconds = start.elapsed().as_secs_f64();

    let started = Instant::now();
    let result = pool.install(|| commands::run(experiment, &cfg));
    let run_seconds = started.elapsed().as_secs_f64();
    let out = match result {
        Ok(out) => out,
        Err(e @ nls_qi::Error::ResourceGuard { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_GUARD);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let started = Instant::now();
    let mut artifacts = match output::report_artifact(experiment.name(), &cfg, &out.reports) {
        Ok(a) => vec![a],
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let passed = out.passed();
    for r in &out.reports {
        println!(
            "{} {}: estimate {} stderr {} bound {}",
            r.name,
            r.verdict,
            output::fmt_f64(r.estimate),
            output::fmt_f64(r.stderr),
            r.bound.map(output::fmt_f64).unwrap_or_else(|| "none".into())
        );
    }
    artifacts.extend(out.artifacts);
    let files = match output::write_artifacts(&cli.out_dir, &artifacts) {
        Ok(files) => files,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.out_dir.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let manifest = Manifest {
        schema_version: schema::SCHEMA_VERSION.into(),
        tool: "nlsq".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: experiment.name().into(),
        config_path: label,
        config: cfg,
        seed_override: cli.seed_override,
        workers: pool.current_num_threads(),
        timings: Timings {
            parse_seconds,
            run_seconds,
            write_seconds: started.elapsed().as_secs_f64(),
        },
        files,
    };
    if let Err(e) = output::write_manifest(&cli.out_dir, &manifest) {
        eprintln!("error: {}: {e}", cli.out_dir.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
