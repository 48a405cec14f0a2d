//! Experiment configuration files.
//!
//! ```toml
//! name = "fig2a"
//!
//! [couplings]            # complex peak Ω·T, or { magnitude, phase } dipoles
//! pump = "40"
//! stokes3 = "30"
//! stokes4 = "20+20i"
//! branch3 = "20"
//! branch4 = "30+20i"
//! control = "10+50i"
//!
//! [decay]
//! level3 = 0.0
//! level4 = 0.0
//!
//! [pulses.pump]          # amplitude defaults to 2, phase to 0
//! center = 1.0
//! width = 1.0
//! # ... stokes, branching
//! [pulses.control]
//! solve = true           # or explicit center/width/amplitude/phase
//!
//! [target]
//! level = 3              # or theta = ..., beta = ...
//! ```

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::complex::{format_complex, parse_complex};
use super::CliError;
use crate::design::{design_control_pulse, DesignProblem, DesignSolution, SuppressedTarget};
use crate::propagate::{
    default_step, PropagationSettings, TimeGrid, DEFAULT_CONVERGENCE_TOLERANCE, DEFAULT_MAX_REFINEMENTS,
    DEFAULT_WINDOW_WIDTHS,
};
use crate::pulse::{DipoleCoupling, PulseEnvelope, PulseRole, PulseSet, Transition};
use crate::superposition::TargetSuperposition;
use crate::system::FiveLevelSystem;

pub const DEFAULT_PULSE_AMPLITUDE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub couplings: CouplingsConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    pub pulses: PulsesConfig,
    pub target: TargetConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A coupling: either the complex peak `Ω·T` reached by a pulse of amplitude
/// 2 and zero phase, or an explicit dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSpec {
    Peak(Complex64),
    Dipole { magnitude: f64, phase: f64 },
}

impl Serialize for CouplingSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        match self {
            CouplingSpec::Peak(z) => s.serialize_str(&format_complex(*z)),
            CouplingSpec::Dipole { magnitude, phase } => {
                let mut st = s.serialize_struct("Dipole", 2)?;
                st.serialize_field("magnitude", magnitude)?;
                st.serialize_field("phase", phase)?;
                st.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for CouplingSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = CouplingSpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a complex number string \"re+imi\" or a table { magnitude, phase }")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<CouplingSpec, E> {
                parse_complex(v).map(CouplingSpec::Peak).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<CouplingSpec, E> {
                Ok(CouplingSpec::Peak(Complex64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<CouplingSpec, E> {
                self.visit_f64(v as f64)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<CouplingSpec, A::Error> {
                let (mut magnitude, mut phase) = (None, None);
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "magnitude" => magnitude = Some(map.next_value::<f64>()?),
                        "phase" => phase = Some(map.next_value::<f64>()?),
                        other => return Err(de::Error::unknown_field(other, &["magnitude", "phase"])),
                    }
                }
                Ok(CouplingSpec::Dipole {
                    magnitude: magnitude.ok_or_else(|| de::Error::missing_field("magnitude"))?,
                    phase: phase.unwrap_or(0.0),
                })
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsConfig {
    pub pump: CouplingSpec,
    pub stokes3: CouplingSpec,
    pub stokes4: CouplingSpec,
    pub branch3: CouplingSpec,
    pub branch4: CouplingSpec,
    pub control: CouplingSpec,
}

impl CouplingsConfig {
    fn get(&self, tr: Transition) -> CouplingSpec {
        match tr {
            Transition::Pump => self.pump,
            Transition::Stokes3 => self.stokes3,
            Transition::Stokes4 => self.stokes4,
            Transition::Branch3 => self.branch3,
            Transition::Branch4 => self.branch4,
            Transition::Control => self.control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    #[serde(default)]
    pub level3: f64,
    #[serde(default)]
    pub level4: f64,
}

fn default_amplitude() -> f64 {
    DEFAULT_PULSE_AMPLITUDE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub center: f64,
    pub width: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default)]
    pub solve: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsesConfig {
    pub pump: PulseConfig,
    pub stokes: PulseConfig,
    pub branching: PulseConfig,
    /// Absent means "solve".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// Product level to suppress (3 or 4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    /// Suppressed superposition `sin θ|3⟩ + e^{iβ} cos θ|4⟩`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_refinements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File stem; defaults to the experiment name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    #[serde(default)]
    pub plot: bool,
    /// Cap on CSV rows; the trajectory is subsampled uniformly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rows: Option<usize>,
}

fn field_error(field: &str, e: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    /// Checks that need no solver: target declaration and pulse fields.
    pub fn validate(&self) -> Result<(), CliError> {
        self.suppressed_target()?;
        self.system()?;
        for (name, p) in [("pump", &self.pulses.pump), ("stokes", &self.pulses.stokes), ("branching", &self.pulses.branching)] {
            PulseEnvelope::new(PulseRole::Pump, p.amplitude, p.center, p.width, p.phase)
                .map_err(|e| field_error(&format!("pulses.{name}"), e))?;
        }
        if let Some(c) = &self.pulses.control {
            if !c.solve && (c.center.is_none() || c.width.is_none()) {
                return Err(field_error("pulses.control", "needs center and width unless solve = true"));
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<FiveLevelSystem, CliError> {
        let mut dipoles = Vec::with_capacity(6);
        for tr in Transition::ALL {
            let d = match self.couplings.get(tr) {
                CouplingSpec::Peak(z) => DipoleCoupling::from_complex(tr, z),
                CouplingSpec::Dipole { magnitude, phase } => DipoleCoupling::for_transition(tr, magnitude, phase),
            };
            dipoles.push(d.map_err(|e| field_error(&format!("couplings.{}", tr.name()), e))?);
        }
        FiveLevelSystem::new(dipoles, self.decay.level3, self.decay.level4).map_err(|e| field_error("decay", e))
    }

    pub fn suppressed_target(&self) -> Result<SuppressedTarget, CliError> {
        match (self.target.level, self.target.theta, self.target.beta) {
            (Some(3), None, None) => Ok(SuppressedTarget::Level3),
            (Some(4), None, None) => Ok(SuppressedTarget::Level4),
            (Some(l), None, None) => Err(field_error("target.level", format!("must be 3 or 4, got {l}"))),
            (None, Some(theta), Some(beta)) if theta.is_finite() && beta.is_finite() => {
                Ok(SuppressedTarget::Superposition(TargetSuperposition::new(theta, beta)))
            }
            (None, Some(_), Some(_)) => Err(field_error("target", "theta and beta must be finite")),
            _ => Err(field_error("target", "declare exactly one of `level` or the pair `theta`, `beta`")),
        }
    }

    fn envelope(role: PulseRole, field: &str, p: &PulseConfig) -> Result<PulseEnvelope, CliError> {
        PulseEnvelope::new(role, p.amplitude, p.center, p.width, p.phase).map_err(|e| field_error(field, e))
    }

    pub fn design_problem(&self) -> Result<DesignProblem, CliError> {
        let p = &self.pulses;
        Ok(DesignProblem::new(
            self.system()?,
            Self::envelope(PulseRole::Pump, "pulses.pump", &p.pump)?,
            Self::envelope(PulseRole::Stokes, "pulses.stokes", &p.stokes)?,
            Self::envelope(PulseRole::Branching, "pulses.branching", &p.branching)?,
            self.suppressed_target()?,
        )?)
    }

    pub fn control_is_solved(&self) -> bool {
        self.pulses.control.is_none_or(|c| c.solve)
    }

    /// The four pulses, solving for the control pulse when requested.
    pub fn pulse_set(&self) -> Result<(PulseSet, Option<DesignSolution>), CliError> {
        let problem = self.design_problem()?;
        match self.pulses.control {
            Some(c) if !c.solve => {
                let control = PulseEnvelope::new(
                    PulseRole::Control,
                    c.amplitude.unwrap_or(DEFAULT_PULSE_AMPLITUDE),
                    c.center.expect("validated"),
                    c.width.expect("validated"),
                    c.phase.unwrap_or(0.0),
                )
                .map_err(|e| field_error("pulses.control", e))?;
                let pulses = PulseSet { pump: problem.pump, stokes: problem.stokes, branching: problem.branching, control };
                Ok((pulses, None))
            }
            _ => {
                let solution = design_control_pulse(&problem)?;
                Ok((solution.pulses(&problem), Some(solution)))
            }
        }
    }

    /// Grid from the config, falling back to the defaults for `pulses`.
    /// `step_override` replaces the initial step.
    pub fn time_grid(&self, system: &FiveLevelSystem, pulses: &PulseSet, step_override: Option<f64>) -> Result<TimeGrid, CliError> {
        let (d_start, d_end) = pulses.window(DEFAULT_WINDOW_WIDTHS);
        let start = self.grid.t_start.unwrap_or(d_start);
        let end = self.grid.t_end.unwrap_or(d_end);
        let step = step_override.or(self.grid.step).unwrap_or_else(|| default_step(system, pulses));
        TimeGrid::new(start, end, step).map_err(|e| field_error("grid", e))
    }

    pub fn propagation_settings(&self, include_decay: bool) -> PropagationSettings {
        PropagationSettings {
            include_decay,
            max_refinements: self.grid.max_refinements.unwrap_or(DEFAULT_MAX_REFINEMENTS),
            tolerance: self.grid.tolerance.unwrap_or(DEFAULT_CONVERGENCE_TOLERANCE),
        }
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
[couplings]
pump = "40"
stokes3 = "30"
stokes4 = "20+20i"
branch3 = "20"
branch4 = "30+20i"
control = { magnitude = 1.0 }
[pulses.pump]
center = 1.0
width = 1.0
[pulses.stokes]
center = 0.0
width = 1.0
[pulses.branching]
center = 0.0
width = 1.0
[target]
level = 3
"#;

    #[test]
    fn minimal_config_solves_control() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert!(cfg.control_is_solved());
        let (pulses, solution) = cfg.pulse_set().unwrap();
        assert!(solution.is_some());
        let system = cfg.system().unwrap();
        let peak = crate::pulse::RabiSchedule::new(&system, &pulses).peaks().control;
        assert!((peak - Complex64::new(10.0, 50.0)).norm() < 1e-9, "{peak}");
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn bad_target_declarations() {
        let both = MINIMAL.replace("level = 3", "level = 3\ntheta = 0.5\nbeta = 0.0");
        assert!(matches!(ExperimentConfig::parse(&both), Err(CliError::Config(m)) if m.contains("target")));
        let none = MINIMAL.replace("level = 3", "");
        assert!(ExperimentConfig::parse(&none).is_err());
        let five = MINIMAL.replace("level = 3", "level = 5");
        assert!(ExperimentConfig::parse(&five).is_err());
        let half = MINIMAL.replace("level = 3", "theta = 0.5");
        assert!(ExperimentConfig::parse(&half).is_err());
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad = MINIMAL.replace("\"20+20i\"", "\"20+20j\"");
        let Err(CliError::Config(msg)) = ExperimentConfig::parse(&bad) else { panic!() };
        assert!(msg.contains("stokes4") || msg.contains("line"), "{msg}");
        let neg = MINIMAL.replacen("width = 1.0", "width = -1.0", 1);
        let Err(CliError::Config(msg)) = ExperimentConfig::parse(&neg) else { panic!() };
        assert!(msg.contains("pulses.pump"), "{msg}");
        let unknown = MINIMAL.replace("[target]", "[target]\nlevle = 3");
        assert!(ExperimentConfig::parse(&unknown).is_err());
    }

    #[test]
    fn explicit_control_needs_timing() {
        let cfg = format!("{MINIMAL}\n[pulses.control]\namplitude = 2.0\n");
        assert!(ExperimentConfig::parse(&cfg).is_err());
        let cfg = format!("{MINIMAL}\n[pulses.control]\ncenter = 1.0\nwidth = 1.0\n");
        let parsed = ExperimentConfig::parse(&cfg).unwrap();
        assert!(!parsed.control_is_solved());
        assert!(parsed.pulse_set().unwrap().1.is_none());
    }
}
