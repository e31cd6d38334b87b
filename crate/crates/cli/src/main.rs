use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frameavg_cli::config::ExperimentConfig;
use frameavg_cli::error::CliError;
use frameavg_cli::{probe, record, sweep, verify};
use log::{error, info};

#[derive(Parser)]
#[command(name = "frameavg", version, about = "Frame-averaging irreversibility experiments on periodic spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output_path` from the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact identity suite at the smallest configured size.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// One CSV row per (N, averaging kind).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Write 0 in the wall_time_s column so repeated runs are byte-identical.
        #[arg(long)]
        omit_timing: bool,
    },
    /// Entropy gain of weighted spatial averages against R.
    Saturate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omit_timing: bool,
    },
    /// Commutator norms of the kick with evolved single-site probes.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Evolution time of the probe.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        time: f64,
        /// Single-site probe operator: X, Y or Z.
        #[arg(long, default_value = "X")]
        probe_op: String,
    },
}

fn output_path(common: &Common, cfg: &ExperimentConfig) -> Option<PathBuf> {
    common.output.clone().or_else(|| cfg.output_path.clone())
}

fn create(path: &Path) -> Result<File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn setup(common: &Common) -> Result<ExperimentConfig, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs as usize)
        .build_global()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    ExperimentConfig::from_path(&common.config)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify { common } => {
            let cfg = setup(&common)?;
            let report = verify::verify_identities(&cfg)?;
            for c in &report.checks {
                println!("{c}");
            }
            if let Some(path) = output_path(&common, &cfg) {
                report
                    .write_csv(create(&path)?)
                    .map_err(|source| CliError::Csv { path: path.clone(), source })?;
            }
            let passed = report.passed();
            println!("verify N={}: {}", report.n, if passed { "PASS" } else { "FAIL" });
            Ok(passed)
        }
        Command::Sweep { common, omit_timing } => {
            let cfg = setup(&common)?;
            let outcome = sweep::convergence_sweep(&cfg)?;
            finish_records(&common, &cfg, outcome, omit_timing)
        }
        Command::Saturate { common, omit_timing } => {
            let cfg = setup(&common)?;
            let outcome = sweep::saturation_scan(&cfg)?;
            finish_records(&common, &cfg, outcome, omit_timing)
        }
        Command::Probe { common, time, probe_op } => {
            let cfg = setup(&common)?;
            let report = probe::locality_probe(&cfg, time, &probe_op)?;
            match output_path(&common, &cfg) {
                Some(path) => report
                    .write_csv(create(&path)?)
                    .map_err(|source| CliError::Csv { path: path.clone(), source })?,
                None => report
                    .write_csv(std::io::stdout().lock())
                    .map_err(|source| CliError::Csv { path: "<stdout>".into(), source })?,
            }
            Ok(report.passed())
        }
    }
}

fn finish_records(
    common: &Common,
    cfg: &ExperimentConfig,
    outcome: sweep::SweepOutcome,
    omit_timing: bool,
) -> Result<bool, CliError> {
    let mut records = outcome.records();
    if omit_timing {
        records.iter_mut().for_each(|r| r.wall_time_s = 0.0);
    }
    match output_path(common, cfg) {
        Some(path) => {
            record::emit_csv(&records, &path)?;
            info!("wrote {} rows to {}", records.len(), path.display());
        }
        None => record::write_records(std::io::stdout().lock(), &records)
            .map_err(|source| CliError::Csv { path: "<stdout>".into(), source })?,
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
