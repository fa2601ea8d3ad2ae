use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use super::{run_scenario, write_outputs, Config, ExecutorMode, RunMeta};
use crate::kernel::{digest64, LogLevel};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "multisim", version, about = "Multilevel epidemic simulation runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its trajectory and run log.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "sequential")]
        mode: String,
        #[arg(long)]
        units: Option<usize>,
        /// Print the wall-clock time of the run.
        #[arg(long)]
        time: bool,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute a trajectory digest and compare it with its metadata.
    Replay {
        #[arg(long)]
        trajectory: PathBuf,
    },
}

const EXIT_OK: i32 = 0;
const EXIT_CONFIG: i32 = 1;
const EXIT_RUNTIME: i32 = 2;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> crate::Result<()> {
    match command {
        Command::Validate { config } => {
            let cfg = Config::load(&config)?;
            cfg.validate()?;
            let _ = writeln!(out, "ok {} digest={:016x}", config.display(), cfg.digest());
            Ok(())
        }
        Command::Run {
            config,
            seed,
            out: out_dir,
            mode,
            units,
            time,
        } => {
            let cfg = Config::load(&config)?;
            let mode = ExecutorMode::from_cli(&mode, units)?;
            let seed = seed.unwrap_or(cfg.run.seed);
            let dir = out_dir
                .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let started = Instant::now();
            let output = run_scenario(&cfg, seed, mode)?;
            let elapsed = started.elapsed();
            write_outputs(&dir, &output, LogLevel::from_env())?;
            let _ = writeln!(
                out,
                "records={} digest={:016x} out={}",
                output.trajectory.len(),
                output.trajectory.digest(),
                dir.display()
            );
            if time {
                let _ = writeln!(out, "wall_time_s={:.3}", elapsed.as_secs_f64());
            }
            Ok(())
        }
        Command::Replay { trajectory } => {
            let csv = std::fs::read(&trajectory).map_err(|e| Error::io(&trajectory, e))?;
            let meta_path = trajectory.with_extension("meta");
            let meta = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
            let (meta, recorded) = RunMeta::parse(&meta).ok_or_else(|| {
                super::ConfigError::Invalid(format!("malformed metadata {}", meta_path.display()))
            })?;
            let actual = digest64(&csv);
            if actual != recorded {
                return Err(Error::Io {
                    path: trajectory.display().to_string(),
                    source: std::io::Error::other(format!(
                        "digest {actual:016x} does not match recorded {recorded:016x}"
                    )),
                });
            }
            let _ = writeln!(
                out,
                "match digest={actual:016x} seed={} mode={}",
                meta.seed, meta.mode
            );
            Ok(())
        }
    }
}
