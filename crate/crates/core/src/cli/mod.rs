//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain or configuration error, 2 I/O error,
//! 3 validation failure.

pub mod angle;
pub mod commands;
pub mod config;
pub mod table;
pub mod validate;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{merge, parse_file, RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {detail}")]
    Config { field: String, detail: String },

    #[error(transparent)]
    Domain(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
}

impl CliError {
    pub fn config(field: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Domain(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bloch-qfi",
    version,
    about = "QFI of repeated qubit rotations under dephasing and tilting noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the noisy 3×3 map of one gate application.
    Matrix,
    /// Bloch vectors and their θ-derivatives for t = 0..=steps.
    Evolve,
    /// QFI curve for t = 0..=steps.
    Qfi {
        /// Also emit dephased, perpendicular, parallel and sum series.
        #[arg(long)]
        decompose: bool,
    },
    /// Optimal number of gate applications under pure dephasing.
    Optimal,
    /// Run the oracle-versus-analytic checks.
    Validate {
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Rotation angle in radians, e.g. 0.3, pi/4, 3*pi/8.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Rotation axis x,y,z (normalised). Default 0,0,1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub axis: Option<String>,
    /// Dephasing concentration, a non-negative number or inf.
    #[arg(long, global = true)]
    pub k_dephase: Option<String>,
    /// Tilting concentration, a non-negative number or inf.
    #[arg(long, global = true)]
    pub k_tilt: Option<String>,
    /// Initial Bloch vector x,y,z. Default 1,0,0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b0: Option<String>,
    /// Initial polar angle from ẑ (default pi/2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Initial azimuth (default 0).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Initial Bloch radius (default 1).
    #[arg(long, global = true)]
    pub radius: Option<String>,
    /// Number of gate applications.
    #[arg(long, global = true)]
    pub steps: Option<String>,
    /// name=v1,v2,... with name one of theta, k_dephase, k_tilt, alpha. Repeatable.
    #[arg(long, global = true)]
    pub sweep: Vec<String>,
    /// Output file (default standard output).
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<String>,
    /// Key-value file with defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Options {
    fn settings(&self) -> Settings {
        let mut s = Settings::new();
        let single = [
            ("theta", &self.theta),
            ("axis", &self.axis),
            ("k-dephase", &self.k_dephase),
            ("k-tilt", &self.k_tilt),
            ("b0", &self.b0),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("radius", &self.radius),
            ("steps", &self.steps),
            ("output", &self.output),
            ("format", &self.format),
            ("seed", &self.seed),
            ("samples", &self.samples),
        ];
        for (key, value) in single {
            if let Some(v) = value {
                s.insert(key.to_string(), vec![v.clone()]);
            }
        }
        if !self.sweep.is_empty() {
            s.insert("sweep".into(), self.sweep.clone());
        }
        s
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_file(&text)?
            }
            None => Settings::new(),
        };
        RunConfig::from_settings(&merge(file, self.settings()))
    }
}

fn emit(config: &RunConfig, report: &commands::Report, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    for note in &report.notes {
        let _ = writeln!(err, "{note}");
    }
    match &config.output {
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.display().to_string(),
                source,
            };
            let mut w = BufWriter::new(File::create(path).map_err(io)?);
            report.table.write(config.format, &mut w).map_err(io)?;
            w.flush().map_err(io)
        }
        None => report.table.write(config.format, out).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn validate(config: &RunConfig, scale: f64, out: &mut dyn Write) -> Result<(), CliError> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(CliError::config("tolerance-scale", format!("must be a finite non-negative number, got {scale}")));
    }
    let samples = config.samples.unwrap_or(validate::DEFAULT_SAMPLES);
    let seed = config.seed.unwrap_or(validate::DEFAULT_SEED);
    let outcomes = validate::run_all(samples, seed, scale)?;
    let io = |source| CliError::Io {
        path: "<stdout>".into(),
        source,
    };
    writeln!(out, "samples {samples}, seed {seed}, tolerance scale {scale}").map_err(io)?;
    let mut failed = Vec::new();
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{status} {:<24} max deviation {:.3e} {} (tolerance {:.3e})",
            o.name, o.max_deviation, o.unit, o.tolerance
        )
        .map_err(io)?;
        if !o.passed() {
            failed.push(o.name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.options.resolve()?;
    let report = match &cli.command {
        Command::Matrix => commands::matrix(&config)?,
        Command::Evolve => commands::evolve_states(&config)?,
        Command::Qfi { decompose: false } => commands::qfi(&config)?,
        Command::Qfi { decompose: true } => commands::qfi_decomposed(&config)?,
        Command::Optimal => commands::optimal(&config)?,
        Command::Validate { tolerance_scale } => return validate(&config, *tolerance_scale, out),
    };
    emit(&config, &report, out, err)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
