use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crowdrep::commands::{cmd_allocate, cmd_run, CommandError};
use crowdrep::config::{parse_config, ConfigError, RunConfig};
use crowdrep::verify::{self, Mutation};

/// Task allocation and answer aggregation experiments for crowdsourcing
/// with class-level worker reputation.
#[derive(Debug, Parser)]
#[command(name = "crowdrep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write the results as CSV.
    Run {
        /// Configuration file.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Use a shipped preset (S1, S2, S3) with its default sweep.
        #[arg(long)]
        preset: Option<String>,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path; `-` prints to standard output. Defaults to the
        /// configured output, else standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the greedy allocation for one budget.
    Allocate {
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Workers per task on average; defaults to the single beta of the
        /// sweep, else the configured beta.
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Print the degree matrix as CSV instead of the report.
        #[arg(long)]
        csv: bool,
    },
    /// Run the oracle and property suites.
    Verify {
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Inject a known defect to confirm the suites can fail.
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutationArg {
    FlipMapWeight,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn load(config: Option<&Path>, preset: Option<&str>) -> Result<RunConfig, CommandError> {
    let text = match (config, preset) {
        (Some(path), _) => fs::read_to_string(path).map_err(|source| CommandError::Io { path: path.to_owned(), source })?,
        (None, Some(name)) => format!("scenario = {}", toml_string(name)),
        (None, None) => unreachable!("clap requires a config or a preset"),
    };
    parse_config(&text).map_err(|e| match (config, e) {
        (Some(path), ConfigError::Syntax { line, column, message }) => {
            ConfigError::Syntax { line, column, message: format!("{}: {message}", path.display()) }.into()
        }
        (_, e) => e.into(),
    })
}

fn toml_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn exit_code(err: &CommandError) -> u8 {
    match err {
        CommandError::Config(_) => EXIT_CONFIG,
        CommandError::Io { .. } | CommandError::Run(_) => EXIT_RUNTIME,
    }
}

fn run(cli: Cli) -> Result<ExitCode, CommandError> {
    match cli.command {
        Command::Run { config, preset, trials, seed, output } => {
            let mut cfg = load(config.as_deref(), preset.as_deref()).map_err(config_io_error)?;
            if let Some(t) = trials {
                if t == 0 {
                    return Err(ConfigError::Invalid { key: "trials".into(), line: None, message: "must be at least 1".into() }.into());
                }
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let to_stdout = output.as_deref() == Some(Path::new("-")) || (output.is_none() && cfg.output.is_none());
            let target = if to_stdout { None } else { output.as_deref().or(cfg.output.as_deref()).map(Path::to_owned) };
            let (records, csv) = cmd_run(&cfg, target.as_deref())?;
            if to_stdout {
                print!("{csv}");
            } else {
                let flagged = records.iter().filter(|r| r.tie_flag_rate > 0.0).count();
                eprintln!(
                    "wrote {} rows to {} ({flagged} with nonzero tie/flag rate)",
                    records.len(),
                    target.expect("file output").display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Allocate { config, preset, beta, csv } => {
            let cfg = load(config.as_deref(), preset.as_deref()).map_err(config_io_error)?;
            let report = cmd_allocate(&cfg, beta)?;
            let mut out = std::io::stdout().lock();
            let text = if csv { report.degrees_csv() } else { report.text() };
            let _ = out.write_all(text.as_bytes());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { seed, mutate } => {
            let mutation = match mutate {
                Some(MutationArg::FlipMapWeight) => Mutation::FlipMapWeight,
                None => Mutation::None,
            };
            let report = verify::run_all(seed, mutation);
            println!("{report}");
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY) })
        }
    }
}

/// Reading the configuration file is part of loading the configuration.
fn config_io_error(err: CommandError) -> CommandError {
    match err {
        CommandError::Io { path, source } => ConfigError::Invalid {
            key: "config".into(),
            line: None,
            message: format!("cannot read {}: {source}", path.display()),
        }
        .into(),
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("crowdrep").chain(args.iter().copied())).unwrap()
    }

    fn code(args: &[&str]) -> u8 {
        match run(cli(args)) {
            Ok(c) if c == ExitCode::SUCCESS => 0,
            Ok(_) => EXIT_VERIFY,
            Err(e) => exit_code(&e),
        }
    }

    #[test]
    fn config_or_preset_is_required() {
        let parse = |a: &[&str]| Cli::try_parse_from(std::iter::once("crowdrep").chain(a.iter().copied()));
        assert!(parse(&["run"]).is_err());
        assert!(parse(&["run", "a.toml", "--preset", "S1"]).is_err());
        assert!(parse(&["run", "--preset", "S1", "--trials", "3"]).is_ok());
        assert!(parse(&["verify", "--mutate", "flip-map-weight"]).is_ok());
    }

    #[test]
    fn run_writes_the_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        let out = dir.path().join("out.csv");
        fs::write(&cfg, "scenario = \"S1\"\nschemes = [\"map_greedy\"]\n[sweep]\nvariable = \"beta\"\nvalues = [6]\n").unwrap();
        let args = ["run", cfg.to_str().unwrap(), "--trials", "4", "-o", out.to_str().unwrap()];
        assert_eq!(code(&args), 0);
        let csv = fs::read_to_string(&out).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("map_greedy,6.00000e0,0.00000e0,"));
    }

    #[test]
    fn configuration_errors_exit_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "scenario = \"S1\"\ncolour = 3\n").unwrap();
        assert_eq!(code(&["run", bad.to_str().unwrap()]), EXIT_CONFIG);
        assert_eq!(code(&["run", "--preset", "S9"]), EXIT_CONFIG);
        assert_eq!(code(&["run", "--preset", "S1", "--trials", "0"]), EXIT_CONFIG);
        let missing = dir.path().join("missing.toml");
        assert_eq!(code(&["allocate", missing.to_str().unwrap()]), EXIT_CONFIG);
        assert_eq!(code(&["allocate", "--preset", "S1", "--beta=-1"]), EXIT_CONFIG);
    }

    #[test]
    fn unwritable_output_is_a_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("no").join("out.csv");
        fs::write(dir.path().join("c.toml"), "scenario = \"S1\"\nschemes = [\"majority\"]\n[sweep]\nvariable = \"beta\"\nvalues = [2]\n").unwrap();
        let cfg = dir.path().join("c.toml");
        assert_eq!(code(&["run", cfg.to_str().unwrap(), "--trials", "1", "-o", out.to_str().unwrap()]), EXIT_RUNTIME);
    }

    #[test]
    fn allocate_and_verify() {
        assert_eq!(code(&["allocate", "--preset", "S3", "--beta", "2", "--csv"]), 0);
        assert_eq!(code(&["verify", "--seed", "5", "--mutate", "flip-map-weight"]), EXIT_VERIFY);
    }
}
