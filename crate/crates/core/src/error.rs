use thiserror::Error;

use crate::pulse::PulseRole;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no {0:?} pulse supplied")]
    MissingPulse(PulseRole),

    #[error("{0:?} pulse supplied more than once")]
    DuplicatePulse(PulseRole),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// All Rabi frequencies vanish, or every component of the null vector
    /// cancels; no unique null eigenstate exists.
    #[error("null eigenvector is undefined (field-free or fully degenerate Rabi set)")]
    DegenerateCase,

    /// `Ω_S4 Ω_B3* = Ω_S3 Ω_B4*`: extra null eigenstates appear and the dark
    /// state loses its overlap with the initial level.
    #[error("accidental null space: Ω_S4·Ω_B3* equals Ω_S3·Ω_B4*")]
    AccidentalNullSpace,

    #[error("width equation has no positive solution for the control pulse ({0})")]
    NoPositiveWidth(String),

    #[error("required dipole magnitude {0} vanishes")]
    ZeroDipole(&'static str),

    #[error("dipole ratios violate the restriction; extra null states make the scheme inapplicable")]
    RestrictionViolated,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error(
        "step-halving did not converge: final populations still moved by {change:.3e} at step {step:.3e}"
    )]
    GridTooCoarse { step: f64, change: f64 },

    #[error("branching ratio indeterminate: both target populations are below 1e-15")]
    Indeterminate,

    #[error("invalid initial state: {0}")]
    InvalidState(String),
}

impl Error {
    /// Stable machine-readable class name, used for CLI diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            Error::MissingPulse(_) => "MissingPulse",
            Error::DuplicatePulse(_) => "DuplicatePulse",
            Error::InvalidPulse(_) => "InvalidPulse",
            Error::InvalidSystem(_) => "InvalidSystem",
            Error::DegenerateCase => "DegenerateCase",
            Error::AccidentalNullSpace => "AccidentalNullSpace",
            Error::NoPositiveWidth(_) => "NoPositiveWidth",
            Error::ZeroDipole(_) => "ZeroDipole",
            Error::RestrictionViolated => "RestrictionViolated",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::Indeterminate => "Indeterminate",
            Error::InvalidState(_) => "InvalidState",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
