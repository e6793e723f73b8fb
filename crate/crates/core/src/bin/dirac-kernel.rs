use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_kernel::scenario::{exit_code, load_scenario, run};

const THREADS_ENV: &str = "DIRAC_KERNEL_THREADS";

#[derive(Parser)]
#[command(name = "dirac-kernel", version, about = "Dirac propagator scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run {
        scenario: PathBuf,
        /// Output directory (default: `<scenario stem>_out` next to the file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker thread cap; overrides DIRAC_KERNEL_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn thread_cap(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .filter(|k| *k > 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!("{}: valid ({})", scenario.display(), s.file.task.name());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", scenario.display());
                ExitCode::from(exit_code(&e) as u8)
            }
        },
        Command::Run { scenario, out, threads } => {
            if let Some(k) = thread_cap(threads) {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                    eprintln!("thread pool: {e}");
                }
            }
            let s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", scenario.display());
                    return ExitCode::from(exit_code(&e) as u8);
                }
            };
            let out = out.unwrap_or_else(|| {
                let stem = scenario.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                scenario.with_file_name(format!("{stem}_out"))
            });
            match run(&s, &out) {
                Ok(outcome) => {
                    for c in &outcome.checks {
                        println!("{} {} = {:.6e}", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.value);
                    }
                    if outcome.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(3)
                    }
                }
                Err(e) => {
                    eprintln!("{}: {e}", scenario.display());
                    ExitCode::from(exit_code(&e) as u8)
                }
            }
        }
    }
}
