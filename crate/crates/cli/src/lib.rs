//! Command-line scenario runner for `qflow`.
//!
//! Exit codes: 0 when every check passes, 1 when a numerical guard trips or a
//! check fails, 2 for usage and configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod config;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::Scenario;
use crate::run::{run_scenario, RunError, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qflow",
    version,
    about = "Madelung flow, weak values and Wigner-Moyal phase space scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file, or a named oracle case with --case.
    Run {
        /// Scenario file (TOML).
        config: Option<PathBuf>,
        /// Output directory (overrides the scenario's `output`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Run a named oracle case instead of a scenario file.
        #[arg(long, value_name = "NAME", conflicts_with = "config")]
        case: Option<String>,
        /// Report only the named check.
        #[arg(long, value_name = "NAME")]
        check: Option<String>,
        /// Number of flow-line seeds.
        #[arg(long, value_name = "N")]
        seed_count: Option<usize>,
        /// Override the reduced Planck constant.
        #[arg(long, value_name = "X")]
        hbar: Option<f64>,
    },
    /// List oracle cases and bundled scenario templates.
    ListCases,
    /// Describe an oracle case or print a scenario template.
    Describe { name: String },
    /// Parse and validate a scenario file without running it.
    ValidateConfig { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<Scenario, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Scenario::parse(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn case_scenario(name: &str) -> Result<Scenario, String> {
    if cases::find(name).is_none() {
        let known: Vec<&str> = cases::CASES.iter().map(|c| c.name).collect();
        return Err(format!(
            "unknown case `{name}`; known: {}",
            known.join(", ")
        ));
    }
    let src = format!("name = \"{name}\"\n[initial]\nkind = \"case\"\nname = \"{name}\"\n[analyses]\nmadelung = true\n");
    Scenario::parse(&src).map_err(|e| e.to_string())
}

/// Parse `args` (including the program name) and execute. Returns the exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match cli.command {
        Command::ListCases => {
            let _ = writeln!(out, "oracle cases:");
            for c in &cases::CASES {
                let _ = writeln!(out, "  {:<20} {}", c.name, cases::summary(c.name));
            }
            let _ = writeln!(out, "scenario templates:");
            for t in &cases::TEMPLATES {
                let _ = writeln!(out, "  {:<20} {}", t.name, t.summary);
            }
            EXIT_OK
        }
        Command::Describe { name } => describe(&name, out, err),
        Command::ValidateConfig { config } => match load(&config) {
            Ok(s) => {
                let _ = writeln!(out, "{}: ok (scenario `{}`)", config.display(), s.name);
                EXIT_OK
            }
            Err(m) => {
                let _ = writeln!(err, "error: {m}");
                EXIT_USAGE
            }
        },
        Command::Run {
            config,
            out: out_dir,
            case,
            check,
            seed_count,
            hbar,
        } => {
            let scenario = match (config, case) {
                (Some(path), None) => load(&path),
                (None, Some(name)) => case_scenario(&name),
                _ => Err("run needs a scenario file or --case NAME".to_string()),
            };
            let scenario = match scenario {
                Ok(s) => s,
                Err(m) => {
                    let _ = writeln!(err, "error: {m}");
                    return EXIT_USAGE;
                }
            };
            if let Some(h) = hbar {
                if !(h > 0.0 && h.is_finite()) {
                    let _ = writeln!(err, "error: --hbar must be positive, got {h}");
                    return EXIT_USAGE;
                }
            }
            if seed_count == Some(0) {
                let _ = writeln!(err, "error: --seed-count must be >= 1");
                return EXIT_USAGE;
            }
            let opts = RunOptions {
                out: out_dir,
                seed_count,
                hbar,
                check,
            };
            match run_scenario(&scenario, &opts) {
                Ok(report) => {
                    for c in &report.checks {
                        let _ = writeln!(
                            out,
                            "{} {:<28} {} = {:.3e} (tolerance {:.1e})",
                            if c.pass { "pass" } else { "FAIL" },
                            c.name,
                            c.metric,
                            c.value,
                            c.tolerance
                        );
                    }
                    let _ = writeln!(
                        out,
                        "report: {}",
                        report.out_dir.join("report.json").display()
                    );
                    if report.pass() {
                        EXIT_OK
                    } else {
                        EXIT_NUMERICAL
                    }
                }
                Err(RunError::Numerical(e)) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_NUMERICAL
                }
                Err(RunError::Io(m)) => {
                    let _ = writeln!(err, "error: io: {m}");
                    EXIT_NUMERICAL
                }
                Err(RunError::Input(m)) => {
                    let _ = writeln!(err, "error: {m}");
                    EXIT_USAGE
                }
            }
        }
    }
}

fn describe(name: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(entry) = cases::find(name) {
        let case = match (entry.build)(&qflow::UnitSystem::default()) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_NUMERICAL;
            }
        };
        let _ = writeln!(out, "{name}: {}", cases::summary(name));
        let _ = writeln!(out, "  {}", entry.formulas);
        let g = &case.grid;
        let shape: Vec<String> = g.shape().iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            out,
            "  grid: {} {:?}, potential: {}",
            shape.join("x"),
            g.boundary(),
            case.potential.name()
        );
        let _ = writeln!(out, "  energy: {}", case.energy);
        let _ = writeln!(out, "  checks:");
        for e in &case.expectations {
            let key = serde_json::to_value(e.quantity)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "    {:<18} {:<22} tolerance {:.0e}",
                key,
                e.quantity.as_str(),
                e.tolerance
            );
        }
        return EXIT_OK;
    }
    if let Some(t) = cases::template(name) {
        let _ = writeln!(out, "# {}: {}", t.name, t.summary);
        let _ = write!(out, "{}", t.source);
        return EXIT_OK;
    }
    let _ = writeln!(err, "error: unknown case or template `{name}`");
    EXIT_USAGE
}
