use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hkorbit::config::{extract_tolerances, RunConfig};
use hkorbit::convergence::{run_convergence, to_csv, SweepConfig};
use hkorbit::io::PointFile;
use hkorbit::metric::run_metric_at;
use hkorbit::report::run_verify;
use hkorbit::CliError;

/// Numerical verification of the hyperkähler structure on complexified
/// Grassmannian orbits. Tolerances are overridden with `--tol-<check> <value>`.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomised verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 32)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated subset of algebra,roots,mostow,hyperkahler,tangent,closedness.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate potential, metric, quaternion residuals and the A_V spectrum at a point.
    Metric {
        #[command(flatten)]
        common: Common,
        /// JSON point file.
        point: PathBuf,
    },
    /// Sweep a fixed rank-one pattern over increasing n and write CSV.
    Convergence {
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        rotation: f64,
        #[arg(long, default_value_t = 0.7)]
        amplitude: f64,
        #[arg(long, default_value_t = 64)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli, tols: &[(String, f64)]) -> Result<bool, CliError> {
    if !tols.is_empty() && !matches!(cli.command, Command::Verify { .. }) {
        return Err(CliError::Config("--tol-<name> only applies to verify".into()));
    }
    match cli.command {
        Command::Verify {
            common,
            trials,
            seed,
            suites,
            jobs,
        } => {
            let mut cfg = RunConfig::new(common.n, common.k, common.kappa, trials, seed);
            if let Some(s) = suites {
                cfg = cfg.with_suites(&s)?;
            }
            cfg = cfg.with_tolerances(tols)?;
            cfg.out = common.out.as_ref().map(|p| p.display().to_string());
            let report = run_verify(&cfg, jobs)?;
            for s in &report.suites {
                eprintln!(
                    "{:<12} {} ({:.2}s)",
                    s.suite,
                    if s.passed { "pass" } else { "FAIL" },
                    s.wall_seconds
                );
            }
            emit(common.out.as_ref(), &serde_json::to_string_pretty(&report)?)?;
            Ok(report.passed)
        }
        Command::Metric { common, point } => {
            let cfg = RunConfig::new(common.n, common.k, common.kappa, 0, 0);
            let file: PointFile = serde_json::from_str(&std::fs::read_to_string(&point)?)?;
            let record = run_metric_at(&cfg, &file)?;
            emit(common.out.as_ref(), &serde_json::to_string_pretty(&record)?)?;
            Ok(true)
        }
        Command::Convergence {
            kappa,
            ns,
            rotation,
            amplitude,
            max_n,
            out,
        } => {
            let cfg = SweepConfig {
                kappa,
                rotation,
                amplitude,
                max_n,
                ..SweepConfig::default()
            };
            let rows = run_convergence(&ns, &cfg)?;
            emit(out.as_ref(), to_csv(&rows)?.trim_end())?;
            Ok(rows.iter().all(|r| r.status == "ok"))
        }
    }
}

fn main() -> ExitCode {
    let parsed = extract_tolerances(std::env::args().collect());
    let (args, tols) = match parsed {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(Cli::parse_from(args), &tols) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
