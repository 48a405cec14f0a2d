//! Gaussian laser pulses, transition dipoles, and the six complex Rabi
//! frequencies they generate.
//!
//! Time is dimensionless throughout: a reference pulse width defines the unit,
//! so widths, centers, and every `Ω·T` product are plain numbers. All fields
//! are resonant and the interaction picture is used, which means carrier
//! frequencies never enter the dynamics and are carried only as metadata.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::FiveLevelSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseRole {
    Pump,
    Stokes,
    Branching,
    Control,
}

impl PulseRole {
    pub const ALL: [PulseRole; 4] = [
        PulseRole::Pump,
        PulseRole::Stokes,
        PulseRole::Branching,
        PulseRole::Control,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PulseRole::Pump => "pump",
            PulseRole::Stokes => "stokes",
            PulseRole::Branching => "branching",
            PulseRole::Control => "control",
        }
    }
}

impl fmt::Display for PulseRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One Gaussian pulse, `E(t) = Ẽ f(t) cos(ωt + φ)` with
/// `f(t) = exp[-(t - center)² / width²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEnvelope {
    pub role: PulseRole,
    pub peak_amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub phase: f64,
    pub carrier_frequency: Option<f64>,
}

impl PulseEnvelope {
    pub fn new(role: PulseRole, peak_amplitude: f64, center: f64, width: f64, phase: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidPulse(format!("{role} width must be positive, got {width}")));
        }
        if !(peak_amplitude >= 0.0) || !peak_amplitude.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "{role} peak amplitude must be non-negative, got {peak_amplitude}"
            )));
        }
        if !center.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidPulse(format!("{role} center and phase must be finite")));
        }
        Ok(Self { role, peak_amplitude, center, width, phase, carrier_frequency: None })
    }

    pub fn with_carrier(mut self, omega: f64) -> Self {
        self.carrier_frequency = Some(omega);
        self
    }

    pub fn with_amplitude(mut self, peak_amplitude: f64) -> Self {
        self.peak_amplitude = peak_amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Shift in time and stretch widths by `factor` about `t = 0`.
    pub fn time_scaled(mut self, factor: f64) -> Self {
        self.center *= factor;
        self.width *= factor;
        self
    }

    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        envelope_value(self, t)
    }
}

#[inline]
pub fn envelope_value(pulse: &PulseEnvelope, t: f64) -> f64 {
    let x = (t - pulse.center) / pulse.width;
    (-x * x).exp()
}

/// The six dipole-allowed transitions of the level scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    /// 1 ↔ 2, driven by the pump.
    Pump,
    /// 2 ↔ 3, driven by the Stokes pulse.
    Stokes3,
    /// 2 ↔ 4, driven by the Stokes pulse.
    Stokes4,
    /// 3 ↔ 5, driven by the branching pulse.
    Branch3,
    /// 4 ↔ 5, driven by the branching pulse.
    Branch4,
    /// 1 ↔ 5, driven by the control pulse.
    Control,
}

impl Transition {
    pub const ALL: [Transition; 6] = [
        Transition::Pump,
        Transition::Stokes3,
        Transition::Stokes4,
        Transition::Branch3,
        Transition::Branch4,
        Transition::Control,
    ];

    /// Levels (1-based) joined by this transition, lower index first.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::Pump => (1, 2),
            Transition::Stokes3 => (2, 3),
            Transition::Stokes4 => (2, 4),
            Transition::Branch3 => (3, 5),
            Transition::Branch4 => (4, 5),
            Transition::Control => (1, 5),
        }
    }

    pub fn from_levels(a: usize, b: usize) -> Option<Self> {
        let key = if a < b { (a, b) } else { (b, a) };
        Transition::ALL.into_iter().find(|tr| tr.levels() == key)
    }

    pub fn driven_by(self) -> PulseRole {
        match self {
            Transition::Pump => PulseRole::Pump,
            Transition::Stokes3 | Transition::Stokes4 => PulseRole::Stokes,
            Transition::Branch3 | Transition::Branch4 => PulseRole::Branching,
            Transition::Control => PulseRole::Control,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Transition::Pump => "pump",
            Transition::Stokes3 => "stokes3",
            Transition::Stokes4 => "stokes4",
            Transition::Branch3 => "branch3",
            Transition::Branch4 => "branch4",
            Transition::Control => "control",
        }
    }
}

/// Transition dipole moment `μ_kj = |μ_kj| e^{iα_kj}` between two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoupling {
    pub from_level: usize,
    pub to_level: usize,
    pub magnitude: f64,
    pub phase: f64,
}

impl DipoleCoupling {
    pub fn new(from_level: usize, to_level: usize, magnitude: f64, phase: f64) -> Result<Self> {
        if from_level == to_level || Transition::from_levels(from_level, to_level).is_none() {
            return Err(Error::InvalidSystem(format!(
                "({from_level},{to_level}) is not a coupled pair of the level scheme"
            )));
        }
        if !(magnitude >= 0.0) || !magnitude.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "dipole ({from_level},{to_level}) needs a finite non-negative magnitude and finite phase"
            )));
        }
        Ok(Self { from_level, to_level, magnitude, phase })
    }

    pub fn for_transition(transition: Transition, magnitude: f64, phase: f64) -> Result<Self> {
        let (a, b) = transition.levels();
        Self::new(a, b, magnitude, phase)
    }

    /// Dipole whose magnitude and phase are those of `z`.
    pub fn from_complex(transition: Transition, z: Complex64) -> Result<Self> {
        let phase = if z == Complex64::new(0.0, 0.0) { 0.0 } else { z.arg() };
        Self::for_transition(transition, z.norm(), phase)
    }

    pub fn transition(&self) -> Transition {
        Transition::from_levels(self.from_level, self.to_level).expect("validated at construction")
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Exactly one pulse per role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSet {
    pub pump: PulseEnvelope,
    pub stokes: PulseEnvelope,
    pub branching: PulseEnvelope,
    pub control: PulseEnvelope,
}

impl PulseSet {
    /// Assemble from an unordered collection, rejecting missing or repeated roles.
    pub fn from_pulses<I: IntoIterator<Item = PulseEnvelope>>(pulses: I) -> Result<Self> {
        let mut slots: [Option<PulseEnvelope>; 4] = [None; 4];
        for p in pulses {
            let slot = &mut slots[p.role as usize];
            if slot.is_some() {
                return Err(Error::DuplicatePulse(p.role));
            }
            *slot = Some(p);
        }
        let take = |role: PulseRole| slots[role as usize].ok_or(Error::MissingPulse(role));
        Ok(Self {
            pump: take(PulseRole::Pump)?,
            stokes: take(PulseRole::Stokes)?,
            branching: take(PulseRole::Branching)?,
            control: take(PulseRole::Control)?,
        })
    }

    pub fn get(&self, role: PulseRole) -> &PulseEnvelope {
        match role {
            PulseRole::Pump => &self.pump,
            PulseRole::Stokes => &self.stokes,
            PulseRole::Branching => &self.branching,
            PulseRole::Control => &self.control,
        }
    }

    pub fn get_mut(&mut self, role: PulseRole) -> &mut PulseEnvelope {
        match role {
            PulseRole::Pump => &mut self.pump,
            PulseRole::Stokes => &mut self.stokes,
            PulseRole::Branching => &mut self.branching,
            PulseRole::Control => &mut self.control,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &PulseEnvelope> {
        [&self.pump, &self.stokes, &self.branching, &self.control].into_iter()
    }

    pub fn min_center(&self) -> f64 {
        self.iter().map(|p| p.center).fold(f64::INFINITY, f64::min)
    }

    pub fn max_center(&self) -> f64 {
        self.iter().map(|p| p.center).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_width(&self) -> f64 {
        self.iter().map(|p| p.width).fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        self.iter().map(|p| p.width).fold(f64::INFINITY, f64::min)
    }

    /// `[min center - k·max width, max center + k·max width]`.
    pub fn window(&self, widths: f64) -> (f64, f64) {
        let w = self.max_width();
        (self.min_center() - widths * w, self.max_center() + widths * w)
    }

    pub fn time_scaled(&self, factor: f64) -> Self {
        Self {
            pump: self.pump.time_scaled(factor),
            stokes: self.stokes.time_scaled(factor),
            branching: self.branching.time_scaled(factor),
            control: self.control.time_scaled(factor),
        }
    }
}

/// The six complex Rabi frequencies at one instant, in units of 1/T.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RabiSet {
    pub pump: Complex64,
    pub stokes3: Complex64,
    pub stokes4: Complex64,
    pub branch3: Complex64,
    pub branch4: Complex64,
    pub control: Complex64,
}

impl RabiSet {
    pub fn new(
        pump: Complex64,
        stokes3: Complex64,
        stokes4: Complex64,
        branch3: Complex64,
        branch4: Complex64,
        control: Complex64,
    ) -> Self {
        Self { pump, stokes3, stokes4, branch3, branch4, control }
    }

    pub fn get(&self, transition: Transition) -> Complex64 {
        self.as_array()[transition.index()]
    }

    pub fn as_array(&self) -> [Complex64; 6] {
        [self.pump, self.stokes3, self.stokes4, self.branch3, self.branch4, self.control]
    }

    pub fn from_array(a: [Complex64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_array(self.as_array().map(|z| z * c))
    }

    /// `Ω²`, the sum of `|Ω|²` over all six couplings.
    pub fn total_square(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Time-independent part of each Rabi frequency, `|μ|(Ẽ/2)e^{i·phase}`, paired
/// with the envelope that multiplies it.
///
/// Pump, Stokes and control couplings carry `e^{i(φ + α)}`; the two branching
/// couplings carry `e^{-i(φ_B - α)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiSchedule {
    peaks: [Complex64; 6],
    pulses: PulseSet,
}

impl RabiSchedule {
    pub fn new(system: &FiveLevelSystem, pulses: &PulseSet) -> Self {
        let peaks = Transition::ALL.map(|tr| {
            let dipole = system.coupling(tr);
            let pulse = pulses.get(tr.driven_by());
            let phase = match tr {
                Transition::Branch3 | Transition::Branch4 => -(pulse.phase - dipole.phase),
                _ => pulse.phase + dipole.phase,
            };
            Complex64::from_polar(dipole.magnitude * pulse.peak_amplitude / 2.0, phase)
        });
        Self { peaks, pulses: *pulses }
    }

    /// Rabi frequency of each coupling at its pulse's peak.
    pub fn peaks(&self) -> RabiSet {
        RabiSet::from_array(self.peaks)
    }

    pub fn pulses(&self) -> &PulseSet {
        &self.pulses
    }

    pub fn at(&self, t: f64) -> RabiSet {
        let fp = self.pulses.pump.envelope(t);
        let fs = self.pulses.stokes.envelope(t);
        let fb = self.pulses.branching.envelope(t);
        let fc = self.pulses.control.envelope(t);
        let p = &self.peaks;
        RabiSet::new(p[0] * fp, p[1] * fs, p[2] * fs, p[3] * fb, p[4] * fb, p[5] * fc)
    }
}

pub fn rabi_set(system: &FiveLevelSystem, pulses: &PulseSet, t: f64) -> RabiSet {
    RabiSchedule::new(system, pulses).at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pulse(role: PulseRole, center: f64, width: f64) -> PulseEnvelope {
        PulseEnvelope::new(role, 2.0, center, width, 0.0).unwrap()
    }

    #[test]
    fn envelope_values() {
        let p = pulse(PulseRole::Pump, 1.0, 1.0);
        assert_eq!(p.envelope(1.0), 1.0);
        assert!((p.envelope(2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((p.envelope(3.0) - 0.018_315_638_888_734_18).abs() < 1e-15);
        let wide = pulse(PulseRole::Stokes, -2.0, 3.5);
        assert!((wide.envelope(1.5) - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn invalid_pulses_rejected() {
        assert!(PulseEnvelope::new(PulseRole::Pump, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PulseEnvelope::new(PulseRole::Pump, 1.0, 0.0, -1.0, 0.0).is_err());
        assert!(PulseEnvelope::new(PulseRole::Pump, -1.0, 0.0, 1.0, 0.0).is_err());
        assert!(PulseEnvelope::new(PulseRole::Pump, 1.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn dipole_edges_validated() {
        for (a, b) in [(1, 2), (2, 3), (2, 4), (3, 5), (4, 5), (1, 5), (5, 1)] {
            assert!(DipoleCoupling::new(a, b, 1.0, 0.0).is_ok(), "({a},{b})");
        }
        for (a, b) in [(1, 3), (1, 4), (3, 4), (2, 5), (2, 2), (0, 1), (5, 6)] {
            assert!(DipoleCoupling::new(a, b, 1.0, 0.0).is_err(), "({a},{b})");
        }
        assert!(DipoleCoupling::new(1, 2, -1.0, 0.0).is_err());
    }

    #[test]
    fn pulse_set_roles() {
        let all = PulseRole::ALL.map(|r| pulse(r, 0.0, 1.0));
        assert!(PulseSet::from_pulses(all).is_ok());
        assert_eq!(
            PulseSet::from_pulses(all[..3].iter().copied()),
            Err(Error::MissingPulse(PulseRole::Control))
        );
        let dup = [all[0], all[1], all[1], all[2], all[3]];
        assert_eq!(PulseSet::from_pulses(dup), Err(Error::DuplicatePulse(PulseRole::Stokes)));
    }

    fn unit_system() -> FiveLevelSystem {
        FiveLevelSystem::from_peak_rabis([c(1.0, 0.0); 6], 0.0, 0.0).unwrap()
    }

    #[test]
    fn zero_phases_at_centers_are_real() {
        let sys = FiveLevelSystem::new(
            Transition::ALL.map(|tr| DipoleCoupling::for_transition(tr, 3.0, 0.0).unwrap()),
            0.0,
            0.0,
        )
        .unwrap();
        let pulses = PulseSet::from_pulses(
            PulseRole::ALL.map(|r| PulseEnvelope::new(r, 4.0, 0.7, 1.3, 0.0).unwrap()),
        )
        .unwrap();
        let r = rabi_set(&sys, &pulses, 0.7);
        for z in r.as_array() {
            assert_eq!(z, c(6.0, 0.0));
        }
    }

    #[test]
    fn branching_phase_enters_with_negative_sign() {
        let sys = unit_system();
        let mut pulses = PulseSet::from_pulses(PulseRole::ALL.map(|r| pulse(r, 0.0, 1.0))).unwrap();
        let before = rabi_set(&sys, &pulses, 0.3);
        pulses.branching.phase = FRAC_PI_2;
        let after = rabi_set(&sys, &pulses, 0.3);
        let expected = before.branch3 * Complex64::from_polar(1.0, -FRAC_PI_2);
        assert!((after.branch3 - expected).norm() < 1e-15);
        let expected4 = before.branch4 * Complex64::from_polar(1.0, -FRAC_PI_2);
        assert!((after.branch4 - expected4).norm() < 1e-15);
        assert_eq!(after.pump, before.pump);

        pulses.stokes.phase = FRAC_PI_2;
        let s = rabi_set(&sys, &pulses, 0.3);
        assert!((s.stokes3 - before.stokes3 * Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn dipole_phase_of_branching_coupling_keeps_positive_sign() {
        let mut couplings = Transition::ALL.map(|tr| DipoleCoupling::for_transition(tr, 1.0, 0.0).unwrap());
        couplings[Transition::Branch3.index()].phase = 0.4;
        let sys = FiveLevelSystem::new(couplings, 0.0, 0.0).unwrap();
        let mut pulses = PulseSet::from_pulses(PulseRole::ALL.map(|r| pulse(r, 0.0, 1.0))).unwrap();
        pulses.branching.phase = 0.1;
        let r = rabi_set(&sys, &pulses, 0.0);
        assert!((r.branch3.arg() - (-(0.1 - 0.4))).abs() < 1e-15);
    }

    #[test]
    fn fig2_preset_values_at_origin() {
        let sys = FiveLevelSystem::from_peak_rabis(
            [c(40.0, 0.0), c(30.0, 0.0), c(20.0, 20.0), c(20.0, 0.0), c(30.0, 20.0), c(10.0, 50.0)],
            0.0,
            0.0,
        )
        .unwrap();
        let pulses = PulseSet::from_pulses([
            pulse(PulseRole::Pump, 1.0, 1.0),
            pulse(PulseRole::Stokes, 0.0, 1.0),
            pulse(PulseRole::Branching, 0.0, 1.0),
            pulse(PulseRole::Control, 1.0, 1.0),
        ])
        .unwrap();
        let r = rabi_set(&sys, &pulses, 0.0);
        assert!((r.stokes4 - c(20.0, 20.0)).norm() < 1e-13);
        assert!((r.branch4 - c(30.0, 20.0)).norm() < 1e-13);
        assert!((r.pump - c(40.0 / E, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn amplitude_scaling_is_linear() {
        let sys = unit_system();
        let pulses = PulseSet::from_pulses(PulseRole::ALL.map(|r| pulse(r, 0.2, 0.9))).unwrap();
        let mut scaled = pulses;
        scaled.stokes.peak_amplitude *= 3.0;
        for t in [-2.0, 0.0, 0.5, 1.7] {
            let a = rabi_set(&sys, &pulses, t);
            let b = rabi_set(&sys, &scaled, t);
            assert!((b.stokes3 - a.stokes3 * 3.0).norm() <= 1e-15 * b.stokes3.norm().max(1.0));
            assert_eq!(a.pump, b.pump);
        }
    }
}
