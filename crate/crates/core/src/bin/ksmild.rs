use clap::{Parser, Subcommand};
use ksmild::mild_solver::CheckMode;
use ksmild::scenario::{run_scenario, verify_scenario, RunOptions, Scenario, SCHEMA_VERSION};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ksmild", about = "Keller-Segel mild-solution scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report directory; each scenario writes into <out>/<name>/.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Hypothesis violations are errors.
    #[arg(long, global = true, conflicts_with = "warn")]
    strict: bool,
    /// Hypothesis violations are logged and the run continues.
    #[arg(long, global = true)]
    warn: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs every experiment of a scenario.
    Run { config: PathBuf },
    /// Runs only the semigroup estimate verification of a scenario.
    Verify { config: PathBuf },
    /// Prints the version and the supported config schema.
    Version,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mode = match (cli.strict, cli.warn) {
        (true, _) => Some(CheckMode::Strict),
        (_, true) => Some(CheckMode::Warn),
        _ => None,
    };
    let options = RunOptions { out_dir: cli.out, seed: cli.seed, mode };
    let (config, verify_only) = match cli.command {
        Command::Version => {
            println!("ksmild {} (config schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
            return ExitCode::SUCCESS;
        }
        Command::Run { config } => (config, false),
        Command::Verify { config } => (config, true),
    };
    let result = Scenario::load(&config).and_then(|s| {
        if verify_only {
            verify_scenario(&s, &options)
        } else {
            run_scenario(&s, &options)
        }
    });
    match result {
        Ok(summary) => {
            for s in &summary.steps {
                let status = if s.pass { "pass" } else { "FAIL" };
                match &s.error {
                    Some(e) => println!("step {} {}: {status} ({e})", s.step, s.kind),
                    None => println!("step {} {}: {status}", s.step, s.kind),
                }
            }
            println!("reports in {}", summary.report_dir.display());
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
