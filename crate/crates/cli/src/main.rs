use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use matvar_cli::report::write_outputs;
use matvar_cli::{run, CliError, ExperimentConfig, Operation};

#[derive(Parser)]
#[command(name = "matvar", version, about = "Matrix-weighted variable-exponent experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment file (TOML); optional for `suite`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for `<op>.csv` and `<op>.manifest.toml`; CSV goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Luxemburg norms of the configured function.
    Norm,
    /// Matrix A_p(·) constant on every cube of the family.
    Apconst,
    /// Reducing operators with fitted and held-out sandwich ranges.
    Reducing,
    /// ‖A_Q f‖ ≤ 4[W]‖f‖ over seeded random f.
    Avgbound,
    /// Mollifier error table over a halving t-schedule.
    Mollify,
    /// Smooth approximation in the weighted Sobolev norm.
    Hw,
    /// Cutoff truncation sweep.
    Truncate,
    /// All acceptance criteria.
    Suite,
}

impl Command {
    fn operation(self) -> Operation {
        match self {
            Command::Norm => Operation::Norm,
            Command::Apconst => Operation::Apconst,
            Command::Reducing => Operation::Reducing,
            Command::Avgbound => Operation::Avgbound,
            Command::Mollify => Operation::Mollify,
            Command::Hw => Operation::Hw,
            Command::Truncate => Operation::Truncate,
            Command::Suite => Operation::Suite,
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let op = cli.command.operation();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if op == Operation::Suite => ExperimentConfig::default(),
        None => return Err(CliError::Usage(format!("`{}` needs --config <path>", op.name()))),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(k) => k,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let start = Instant::now();
    let report = pool.install(|| run(op, &cfg))?;
    let wall = start.elapsed().as_secs_f64();
    let echo = (op != Operation::Suite || cli.config.is_some()).then_some(&cfg);
    match cli.out.as_ref().or(cfg.out.as_ref()) {
        Some(dir) => {
            let path = write_outputs(dir, &report, echo, threads, wall)?;
            for line in &report.summary {
                println!("{line}");
            }
            println!("wrote {}", path.display());
        }
        None => {
            print!("{}", report.to_csv(echo)?);
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
    }
    if let Some(v) = &report.violation {
        eprintln!("matvar {}: violation: {v}", op.name());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("matvar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
