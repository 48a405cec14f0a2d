//! Experiment runner behind the `stirap` binary: config files, builtin
//! presets, and the simulate / design / spectrum drivers.

pub mod complex;
pub mod config;
pub mod presets;
pub mod run;

use thiserror::Error;

pub use config::ExperimentConfig;
pub use run::{run_design, run_simulate, run_spectrum, simulate, RunOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset {0:?} (available: fig2a, fig2b, fig3a, fig3b, fig4, fig5)")]
    UnknownPreset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Solver(#[from] crate::Error),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::UnknownPreset(_) => "UnknownPreset",
            CliError::Io { .. } => "IoError",
            CliError::Solver(e) => e.class(),
        }
    }

    /// Suggested fix for errors a user can act on.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Solver(crate::Error::NoPositiveWidth(_)) => Some(
                "the control width must satisfy 1/T_C² = 1/T_P² + 1/T_B² − 1/T_S² > 0; widen the Stokes pulse or narrow the pump or branching pulse",
            ),
            CliError::Solver(crate::Error::RestrictionViolated) => Some(
                "μ_24·μ_35* equals μ_23·μ_45*, so extra dark states exist; change the phase or magnitude of one Stokes or branching dipole",
            ),
            CliError::Solver(crate::Error::ZeroDipole(_)) => {
                Some("the named coupling must be nonzero for the control amplitude to be defined")
            }
            CliError::Solver(crate::Error::GridTooCoarse { .. }) => {
                Some("pass a smaller --grid-step or raise grid.max_refinements")
            }
            CliError::Solver(crate::Error::AccidentalNullSpace) => {
                Some("Ω_S4·Ω_B3* equals Ω_S3·Ω_B4*; perturb a Stokes or branching coupling")
            }
            _ => None,
        }
    }

    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownPreset(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Solver(_) => 1,
        }
    }
}
