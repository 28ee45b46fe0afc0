use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::campaign::{run_campaign, RunRecord};
use super::config::{ExperimentConfig, MethodSpec};
use super::output::{aggregate, read_runs, records_as_runs, write_run, write_summary};
use crate::error::{Error, Result};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
const EXIT_OTHER: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "safe-explore", version, about = "Safe exploration campaigns with GP constraint models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed and SAFE_EXPLORE_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Method label, e.g. `ise`, `stageopt:1`, `heuristic`, `line_ise`.
    #[arg(long)]
    method: Vec<String>,
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one campaign and write `run.csv`.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Replication index.
        #[arg(long, default_value_t = 0)]
        replication: usize,
    },
    /// Run every method for every replication and write the run files plus
    /// `summary.csv`.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Aggregate run files into `summary.csv`.
    Report {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

/// Parse `args` (including the program name) and execute; returns the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Json(_) => EXIT_CONFIG,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_OTHER,
    }
}

struct Prepared {
    cfg: ExperimentConfig,
    seed: u64,
    methods: Vec<MethodSpec>,
}

fn prepare(args: &RunArgs) -> Result<Prepared> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(n) = args.iterations {
        cfg.iterations = n;
    }
    let methods = if args.method.is_empty() {
        cfg.methods()
    } else {
        args.method.iter().map(|m| m.parse()).collect::<Result<Vec<_>>>()?
    };
    cfg.method = methods[0];
    cfg.sweep_methods = methods.clone();
    cfg.validate()?;
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.effective_seed()?,
    };
    Ok(Prepared { cfg, seed, methods })
}

fn write_run_file(record: &RunRecord, path: &Path) -> Result<()> {
    write_run(record, BufWriter::new(File::create(path)?))
}

fn report_status(records: &[RunRecord]) -> i32 {
    let mut code = 0;
    for r in records {
        if let Some(e) = &r.error {
            eprintln!("{}: aborted after {} rows: {e}", r.run_id, r.rows.len());
            code = if r.numerical_abort { EXIT_NUMERICAL } else { EXIT_OTHER };
        }
    }
    code
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run { args, replication } => {
            let p = prepare(&args)?;
            fs::create_dir_all(&args.out)?;
            let record = run_campaign(&p.cfg, p.methods[0], p.seed, replication)?;
            let path = args.out.join("run.csv");
            write_run_file(&record, &path)?;
            if let Some(last) = record.final_row() {
                println!(
                    "{}: {} evaluations, coverage {:.2}%, violations {:.2}% -> {}",
                    record.run_id,
                    record.rows.len(),
                    last.coverage_pct,
                    record.violation_pct(),
                    path.display()
                );
            }
            Ok(report_status(std::slice::from_ref(&record)))
        }
        Command::Sweep { args } => {
            let p = prepare(&args)?;
            fs::create_dir_all(&args.out)?;
            let mut records = Vec::new();
            for rep in 0..p.cfg.replications {
                for &m in &p.methods {
                    let record = run_campaign(&p.cfg, m, p.seed, rep)?;
                    let name = format!("{}_rep{rep}.csv", m.label().replace([':', '/'], "_"));
                    write_run_file(&record, &args.out.join(name))?;
                    records.push(record);
                }
            }
            let summary = aggregate(&records_as_runs(&records));
            let path = args.out.join("summary.csv");
            write_summary(&summary, BufWriter::new(File::create(&path)?))?;
            println!("{} runs -> {}", records.len(), path.display());
            Ok(report_status(&records))
        }
        Command::Report { out, inputs } => {
            let mut runs = Vec::new();
            for path in &inputs {
                let file = File::open(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                runs.extend(read_runs(file)?);
            }
            fs::create_dir_all(&out)?;
            let path = out.join("summary.csv");
            write_summary(&aggregate(&runs), BufWriter::new(File::create(&path)?))?;
            println!("{} runs -> {}", runs.len(), path.display());
            Ok(0)
        }
    }
}
