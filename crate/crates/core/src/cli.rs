//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dsl::{lint, parse, Diagnostic};
use crate::engine::{engine_schema, explain};
use crate::matching::{run_match, MatchQuery};
use crate::metrics::MetricParams;
use crate::profile::{generate_synthetic, load_community, save_community, GeneratorConfig};
use crate::sim::{load_report, run_scenario, save_report, Scenario, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "normroute", version, about = "Norm-mediated question routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and lint a norm file; prints one line per diagnostic.
    Check { norms: PathBuf },
    /// Rank a community against a query and print the ranking as CSV.
    Match {
        community: PathBuf,
        /// Query JSON; its `questioner` field names the asking member.
        query: PathBuf,
        /// Distance at which physical proximity falls to 1/e.
        #[arg(long, default_value_t = MetricParams::default().decay_length_km)]
        decay_km: f64,
    },
    /// Replay a scenario and write the report.
    Simulate {
        scenario: PathBuf,
        /// Overrides the scenario's run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the score histogram as CSV.
        #[arg(long)]
        histogram_csv: Option<PathBuf>,
    },
    /// Summarize a report.
    Report {
        report: PathBuf,
        /// Print the score histogram with log-scaled bars.
        #[arg(long)]
        histogram: bool,
        /// Print the histogram as CSV instead of the summary.
        #[arg(long, conflicts_with = "histogram")]
        csv: bool,
    },
    /// Show why a norm did or did not fire when a question was created.
    Explain {
        report: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long)]
        norm: String,
    },
    /// Write a synthetic community file.
    Generate {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Check { norms } => check(&norms, err),
        Command::Match {
            community,
            query,
            decay_km,
        } => {
            let community = load_community(&community)?;
            let query: MatchQuery = serde_json::from_str(&read(&query)?)
                .map_err(|e| Failure(format!("{}: {e}", query.display())))?;
            let params = MetricParams {
                decay_length_km: decay_km,
                ..MetricParams::default()
            };
            params.validate()?;
            let outcome = run_match(&query, &community, &params)?;
            outcome.write_csv(out)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            scenario,
            seed,
            out: path,
            histogram_csv,
        } => {
            let (mut sc, base) = Scenario::load(&scenario)?;
            if let Some(seed) = seed {
                sc.seed = seed;
            }
            let report = match run_scenario(&sc, &base) {
                Err(SimError::Norms {
                    source_label,
                    diagnostics,
                }) => {
                    let label = base.join(source_label).display().to_string();
                    print_diagnostics(err, &label, &diagnostics);
                    return Ok(EXIT_FAILURE);
                }
                other => other?,
            };
            match path {
                Some(p) => save_report(&report, p)?,
                None => out.write_all(report.to_json().as_bytes())?,
            }
            if let Some(p) = histogram_csv {
                let file =
                    fs::File::create(&p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
                report.histogram.write_csv(file)?;
            }
            Ok(EXIT_OK)
        }
        Command::Report {
            report,
            histogram,
            csv,
        } => {
            let report = load_report(report)?;
            if csv {
                report.histogram.write_csv(out)?;
            } else {
                out.write_all(report.summary().as_bytes())?;
                if histogram {
                    out.write_all(b"\n")?;
                    out.write_all(report.histogram.render().as_bytes())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Explain {
            report,
            question,
            norm,
        } => {
            let report = load_report(report)?;
            let q = report
                .question(&question)
                .ok_or_else(|| Failure(format!("no question `{question}` in report")))?;
            out.write_all(explain(&q.traces, &norm)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            size,
            seed,
            out: path,
        } => {
            let community = generate_synthetic(&GeneratorConfig::pilot(size), seed)?;
            save_community(&community, path)?;
            Ok(EXIT_OK)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn print_diagnostics(err: &mut dyn Write, file: &str, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        let _ = writeln!(err, "{}", d.render(file));
    }
}

/// Parse and lint against the engine schema.
pub fn check_norms(text: &str) -> Vec<Diagnostic> {
    match parse(text) {
        Ok(norms) => lint(&norms, &engine_schema()),
        Err(e) => vec![e.diagnostic],
    }
}

fn check(path: &Path, err: &mut dyn Write) -> CmdResult {
    let diagnostics = check_norms(&read(path)?);
    print_diagnostics(err, &path.display().to_string(), &diagnostics);
    Ok(if diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
