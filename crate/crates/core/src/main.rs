use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rtcc::config::{RunConfig, Severity};
use rtcc::fcidump::{load_fcidump, write_fcidump};
use rtcc::runner::run;

/// Core-hole spectral functions from real-time coupled-cluster dynamics.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run description and write its outputs.
    Run { config: PathBuf },
    /// Check a run description without running it.
    Validate { config: PathBuf },
    /// Parse an FCIDUMP and write it back to stdout.
    FcidumpEcho { file: PathBuf },
}

fn init_threads() {
    if let Some(n) = std::env::var("RTCC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("ignoring RTCC_THREADS: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    init_threads();
    match Cli::parse().command {
        Command::Validate { config } => {
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let diagnostics = cfg.validate();
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                ExitCode::from(1)
            } else {
                println!("ok");
                ExitCode::SUCCESS
            }
        }
        Command::Run { config } => {
            let settings = match RunConfig::load(&config).and_then(|c| c.settings()) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match run(&settings) {
                Ok(report) => {
                    for m in &report.methods {
                        match (&m.qp, &m.error) {
                            (Some(qp), _) => println!("{:<14} QP {:>10.6} Ha  Z {:.4}", m.method, qp.omega0, qp.z),
                            (None, Some(e)) => println!("{:<14} FAILED {e}", m.method),
                            (None, None) => println!("{:<14} no spectrum", m.method),
                        }
                    }
                    if report.n_failed() > 0 {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::FcidumpEcho { file } => {
            let result = std::fs::File::open(&file)
                .map_err(rtcc::Error::from)
                .and_then(|f| load_fcidump(BufReader::new(f)))
                .and_then(|h| {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    write_fcidump(&mut lock, &h)?;
                    lock.flush()?;
                    Ok(())
                });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
