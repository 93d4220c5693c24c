use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qfluct::measurement::PipelineConfig;

/// Directory that relative output paths, and default report files, go to.
pub const OUTPUT_DIR_ENV: &str = "QFLUCT_OUTPUT_DIR";

pub const MIN_RESOLUTION: usize = 256;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Domain(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Domain(m) => write!(f, "outside the closed-form domain: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<qfluct::Error> for CliError {
    fn from(e: qfluct::Error) -> Self {
        match e {
            qfluct::Error::OutOfDomain(m) => CliError::Domain(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Grid nodes of the measurement pipeline.
    #[arg(long, global = true, default_value_t = 2048)]
    pub resolution: usize,
    /// Grid half-width in units of the widest profile.
    #[arg(long, global = true, default_value_t = 8.0)]
    pub half_width_mult: f64,
    /// Allowed negative margin of a relation check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub margin_tol: f64,
    /// Allowed relative deviation between pipeline and closed form.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub rel_tol: f64,
    /// Seed of the random density-matrix ensemble.
    #[arg(long, global = true, default_value_t = 0x5eed_2024)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report path; `-` writes to stdout. Relative paths resolve against
    /// $QFLUCT_OUTPUT_DIR when it is set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub margin_tol: f64,
    pub rel_tol: f64,
    pub seed: u64,
    pub format: Format,
    /// `None` means stdout.
    pub output: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        if self.resolution < MIN_RESOLUTION {
            return Err(CliError::Usage(format!(
                "--resolution must be at least {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        for (name, v) in [
            ("--half-width-mult", self.half_width_mult),
            ("--margin-tol", self.margin_tol),
            ("--rel-tol", self.rel_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(RunConfig {
            pipeline: PipelineConfig {
                nodes: self.resolution,
                half_width_mult: self.half_width_mult,
                ..PipelineConfig::default()
            },
            margin_tol: self.margin_tol,
            rel_tol: self.rel_tol,
            seed: self.seed,
            format: self.format,
            output: self.output.clone(),
        })
    }
}

impl RunConfig {
    /// Where a command's report goes, or `None` for stdout.
    pub fn output_path(&self, command: &str) -> Option<PathBuf> {
        let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        match (&self.output, dir) {
            (Some(p), _) if p.as_os_str() == "-" => None,
            (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(d)) => Some(d.join(format!("{command}.{}", self.format.extension()))),
            (None, None) => None,
        }
    }
}
