//! Control-pulse design.
//!
//! Given pump, Stokes, and branching pulses, choose the control pulse so that
//! the null eigenvector acquires a third node on the unwanted product state at
//! every instant. For a node on |3⟩ this requires `Ω_P* Ω_B4* = Ω_S4 Ω_C*`
//! identically in time, which splits into four conditions:
//!
//! * phase:  `φ_B + φ_C − φ_P − φ_S = α_45 + α_24 + α_12 − α_15`
//! * amplitude: `Ẽ_P Ẽ_B |μ_12||μ_45| e^{−(t_P−t_B)²/(T_P²+T_B²)} = Ẽ_S Ẽ_C |μ_24||μ_15| e^{−(t_S−t_C)²/(T_S²+T_C²)}`
//! * width:  `1/T_P² + 1/T_B² = 1/T_S² + 1/T_C²`
//! * timing: `(T_B² t_P + T_P² t_B)/(T_P²+T_B²) = (T_S² t_C + T_C² t_S)/(T_S²+T_C²)`
//!
//! A node on |4⟩ swaps `(μ_45, μ_24)` for `(μ_35, μ_23)`; a node on |3'⟩ uses
//! the rotated dipoles `μ'_45, μ'_24`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pulse::{DipoleCoupling, PulseEnvelope, PulseRole, PulseSet, RabiSchedule, Transition};
use crate::spectrum::{node_residual, ProductLevel, RELATIVE_TOLERANCE};
use crate::superposition::{rotated_system, TargetSuperposition};
use crate::system::FiveLevelSystem;

/// Number of uniformly spaced times at which a design is verified.
pub const RESIDUAL_SAMPLES: usize = 1000;

/// Half-width of the verification window, in units of the widest pulse.
pub const RESIDUAL_WINDOW_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuppressedTarget {
    Level3,
    Level4,
    /// Suppress `|3'⟩ = sin θ|3⟩ + e^{iβ} cos θ|4⟩`.
    Superposition(TargetSuperposition),
}

impl SuppressedTarget {
    /// The system in the basis where the suppressed state is a bare level,
    /// together with that level.
    pub fn working_frame(&self, system: &FiveLevelSystem) -> Result<(FiveLevelSystem, ProductLevel)> {
        match self {
            SuppressedTarget::Level3 => Ok((*system, ProductLevel::Level3)),
            SuppressedTarget::Level4 => Ok((*system, ProductLevel::Level4)),
            SuppressedTarget::Superposition(t) => Ok((rotated_system(system, t)?, ProductLevel::Level3)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignProblem {
    pub system: FiveLevelSystem,
    pub pump: PulseEnvelope,
    pub stokes: PulseEnvelope,
    pub branching: PulseEnvelope,
    pub suppressed_target: SuppressedTarget,
}

impl DesignProblem {
    pub fn new(
        system: FiveLevelSystem,
        pump: PulseEnvelope,
        stokes: PulseEnvelope,
        branching: PulseEnvelope,
        suppressed_target: SuppressedTarget,
    ) -> Result<Self> {
        for (p, role) in [(&pump, PulseRole::Pump), (&stokes, PulseRole::Stokes), (&branching, PulseRole::Branching)] {
            if p.role != role {
                return Err(Error::InvalidPulse(format!("expected a {role} pulse, got {}", p.role)));
            }
        }
        Ok(Self { system, pump, stokes, branching, suppressed_target })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSolution {
    pub control: PulseEnvelope,
    /// Largest node residual over the verification window.
    pub residual_report: f64,
    pub restriction_ok: bool,
}

impl DesignSolution {
    pub fn pulses(&self, problem: &DesignProblem) -> PulseSet {
        PulseSet { pump: problem.pump, stokes: problem.stokes, branching: problem.branching, control: self.control }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlTiming {
    pub width: f64,
    pub center: f64,
}

/// Control width and center from the width and timing equations.
///
/// `widths` and `centers` are `[pump, stokes, branching]`.
pub fn solve_timing(widths: [f64; 3], centers: [f64; 3]) -> Result<ControlTiming> {
    let [tp, ts, tb] = widths;
    let [cp, cs, cb] = centers;
    if !(tp > 0.0 && ts > 0.0 && tb > 0.0) {
        return Err(Error::NoPositiveWidth(format!("input widths must be positive, got {widths:?}")));
    }
    let (tp2, ts2, tb2) = (tp * tp, ts * ts, tb * tb);
    let inv_c2 = 1.0 / tp2 + 1.0 / tb2 - 1.0 / ts2;
    if !(inv_c2 > 0.0) || !inv_c2.is_finite() {
        return Err(Error::NoPositiveWidth(format!(
            "1/T_P² + 1/T_B² = {:.6} must exceed 1/T_S² = {:.6}",
            1.0 / tp2 + 1.0 / tb2,
            1.0 / ts2
        )));
    }
    let tc2 = 1.0 / inv_c2;
    let mean = (tb2 * cp + tp2 * cb) / (tp2 + tb2);
    let center = (mean * (ts2 + tc2) - tc2 * cs) / ts2;
    Ok(ControlTiming { width: tc2.sqrt(), center })
}

/// Wrap into `[−π, π)`.
pub fn principal_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// The Stokes and branching dipoles that reach the kept product state.
fn kept_dipoles(frame: &FiveLevelSystem, level: ProductLevel) -> (DipoleCoupling, DipoleCoupling) {
    match level {
        ProductLevel::Level3 => (*frame.coupling(Transition::Stokes4), *frame.coupling(Transition::Branch4)),
        ProductLevel::Level4 => (*frame.coupling(Transition::Stokes3), *frame.coupling(Transition::Branch3)),
    }
}

/// Control phase `φ_C` in `[−π, π)`.
pub fn solve_phase(
    system: &FiveLevelSystem,
    target: &SuppressedTarget,
    pump_phase: f64,
    stokes_phase: f64,
    branching_phase: f64,
) -> Result<f64> {
    let (frame, level) = target.working_frame(system)?;
    let (stokes, branch) = kept_dipoles(&frame, level);
    let a12 = frame.coupling(Transition::Pump).phase;
    let a15 = frame.coupling(Transition::Control).phase;
    Ok(principal_phase(branch.phase + stokes.phase + a12 - a15 + pump_phase + stokes_phase - branching_phase))
}

fn dipole_label(level: ProductLevel, target: &SuppressedTarget) -> &'static str {
    match (target, level) {
        (SuppressedTarget::Superposition(_), _) => "μ'_24",
        (_, ProductLevel::Level3) => "μ_24",
        (_, ProductLevel::Level4) => "μ_23",
    }
}

/// Control peak amplitude `Ẽ_C` for a control of the given width and center.
pub fn solve_amplitude(
    system: &FiveLevelSystem,
    pump: &PulseEnvelope,
    stokes: &PulseEnvelope,
    branching: &PulseEnvelope,
    control_width: f64,
    control_center: f64,
    target: &SuppressedTarget,
) -> Result<f64> {
    let (frame, level) = target.working_frame(system)?;
    let (s_kept, b_kept) = kept_dipoles(&frame, level);
    let mu12 = frame.coupling(Transition::Pump).magnitude;
    let mu15 = frame.coupling(Transition::Control).magnitude;
    if !(s_kept.magnitude > 0.0) {
        return Err(Error::ZeroDipole(dipole_label(level, target)));
    }
    if !(mu15 > 0.0) {
        return Err(Error::ZeroDipole("μ_15"));
    }
    if !(stokes.peak_amplitude > 0.0) {
        return Err(Error::InvalidPulse("Stokes amplitude must be positive to solve for the control".into()));
    }
    let overlap = |c1: f64, w1: f64, c2: f64, w2: f64| -(c1 - c2).powi(2) / (w1 * w1 + w2 * w2);
    let lhs_exp = overlap(pump.center, pump.width, branching.center, branching.width);
    let rhs_exp = overlap(stokes.center, stokes.width, control_center, control_width);
    let amplitude = pump.peak_amplitude * branching.peak_amplitude * mu12 * b_kept.magnitude
        / (stokes.peak_amplitude * s_kept.magnitude * mu15)
        * (lhs_exp - rhs_exp).exp();
    Ok(amplitude)
}

/// `(|μ_23|/|μ_24|) e^{i(α_23−α_24)} ≠ (|μ_35|/|μ_45|) e^{−i(α_35−α_45)}`,
/// compared in cross-multiplied form at relative tolerance 1e-9.
pub fn check_restriction(system: &FiveLevelSystem, target: &SuppressedTarget) -> bool {
    let frame = match target.working_frame(system) {
        Ok((f, _)) => f,
        Err(_) => return false,
    };
    let m23 = frame.coupling(Transition::Stokes3).as_complex();
    let m24 = frame.coupling(Transition::Stokes4).as_complex();
    let m35 = frame.coupling(Transition::Branch3).as_complex();
    let m45 = frame.coupling(Transition::Branch4).as_complex();
    // μ_24 μ_35* vs μ_23 μ_45*, i.e. Ω_S4 Ω_B3* vs Ω_S3 Ω_B4* stripped of fields.
    let a = m24 * m35.conj();
    let b = m23 * m45.conj();
    let scale = a.norm().max(b.norm());
    scale > 0.0 && (a - b).norm() > RELATIVE_TOLERANCE * scale
}

/// Largest node residual on the suppressed state over `samples` uniformly
/// spaced times in `[start, end]`.
pub fn max_node_residual(
    system: &FiveLevelSystem,
    pulses: &PulseSet,
    target: &SuppressedTarget,
    start: f64,
    end: f64,
    samples: usize,
) -> Result<f64> {
    let (frame, level) = target.working_frame(system)?;
    let schedule = RabiSchedule::new(&frame, pulses);
    let n = samples.max(2);
    Ok((0..n)
        .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
        .map(|t| node_residual(&schedule.at(t), level))
        .fold(0.0, f64::max))
}

pub fn design_control_pulse(problem: &DesignProblem) -> Result<DesignSolution> {
    let DesignProblem { system, pump, stokes, branching, suppressed_target: target } = problem;
    if !check_restriction(system, target) {
        return Err(Error::RestrictionViolated);
    }
    let timing = solve_timing(
        [pump.width, stokes.width, branching.width],
        [pump.center, stokes.center, branching.center],
    )?;
    let phase = solve_phase(system, target, pump.phase, stokes.phase, branching.phase)?;
    let amplitude = solve_amplitude(system, pump, stokes, branching, timing.width, timing.center, target)?;
    let control = PulseEnvelope::new(PulseRole::Control, amplitude, timing.center, timing.width, phase)?;

    let pulses = PulseSet { pump: *pump, stokes: *stokes, branching: *branching, control };
    let (start, end) = pulses.window(RESIDUAL_WINDOW_WIDTHS);
    let residual_report = max_node_residual(system, &pulses, target, start, end, RESIDUAL_SAMPLES)?;
    Ok(DesignSolution { control, residual_report, restriction_ok: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2(case_b: bool) -> FiveLevelSystem {
        let (s3, b3) = if case_b { (c(10.0, 0.0), c(0.0, 80.0)) } else { (c(30.0, 0.0), c(20.0, 0.0)) };
        // Control dipole fixed to 1 so that Ẽ_C/2 is the control Rabi peak.
        FiveLevelSystem::from_peak_rabis([c(40.0, 0.0), s3, c(20.0, 20.0), b3, c(30.0, 20.0), c(1.0, 0.0)], 0.0, 0.0)
            .unwrap()
    }

    fn pulse(role: PulseRole, center: f64, width: f64) -> PulseEnvelope {
        PulseEnvelope::new(role, 2.0, center, width, 0.0).unwrap()
    }

    fn problem(system: FiveLevelSystem, target: SuppressedTarget, b_center: f64, b_width: f64) -> DesignProblem {
        DesignProblem::new(
            system,
            pulse(PulseRole::Pump, 1.0, 1.0),
            pulse(PulseRole::Stokes, 0.0, 1.0),
            pulse(PulseRole::Branching, b_center, b_width),
            target,
        )
        .unwrap()
    }

    fn control_peak(system: &FiveLevelSystem, control: &PulseEnvelope) -> Complex64 {
        let mu = system.coupling(Transition::Control);
        Complex64::from_polar(mu.magnitude * control.peak_amplitude / 2.0, control.phase + mu.phase)
    }

    #[test]
    fn timing_examples() {
        let t = solve_timing([1.0, 1.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
        assert!((t.width - 1.0).abs() < 1e-15 && (t.center - 1.0).abs() < 1e-15);

        let t = solve_timing([1.0, 1.0, SQRT_2], [1.0, 0.0, 0.5]).unwrap();
        assert!((t.width - SQRT_2).abs() < 1e-14);
        assert!((t.center - 2.5).abs() < 1e-14);

        // Reversed roles: stokes→pump, pump→stokes, control→branching.
        let t = solve_timing([1.0, 1.0, 1.0], [0.0, 1.0, 1.0]).unwrap();
        assert!((t.width - 1.0).abs() < 1e-15 && t.center.abs() < 1e-15);
    }

    #[test]
    fn timing_without_positive_width() {
        // 1/T_P² + 1/T_B² = 0.5 < 1/T_S² = 1.
        assert!(matches!(solve_timing([2.0, 1.0, 2.0], [0.0; 3]), Err(Error::NoPositiveWidth(_))));
        assert!(matches!(solve_timing([1.0, 0.0, 1.0], [0.0; 3]), Err(Error::NoPositiveWidth(_))));
    }

    #[test]
    fn phase_examples() {
        let zero = FiveLevelSystem::from_peak_rabis([c(1.0, 0.0); 6], 0.0, 0.0).unwrap();
        assert_eq!(solve_phase(&zero, &SuppressedTarget::Level3, 0.0, 0.0, 0.0).unwrap(), 0.0);
        let rotated12 = zero.with_coupling(DipoleCoupling::for_transition(Transition::Pump, 1.0, FRAC_PI_2).unwrap());
        let phi = solve_phase(&rotated12, &SuppressedTarget::Level3, 0.0, 0.0, 0.0).unwrap();
        assert!((phi - FRAC_PI_2).abs() < 1e-15);
        // Laser phases: φ_C = ... + φ_P + φ_S − φ_B.
        let phi = solve_phase(&zero, &SuppressedTarget::Level3, 0.1, 0.2, 0.4).unwrap();
        assert!((phi - (-0.1)).abs() < 1e-15);
    }

    #[test]
    fn principal_phase_range() {
        assert_eq!(principal_phase(PI), -PI);
        assert_eq!(principal_phase(-PI), -PI);
        assert!((principal_phase(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert!((principal_phase(0.3 + 4.0 * PI) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn amplitude_examples() {
        let unit = FiveLevelSystem::from_peak_rabis([c(1.0, 0.0); 6], 0.0, 0.0).unwrap();
        let p = PulseEnvelope::new(PulseRole::Pump, 1.0, 0.7, 1.0, 0.0).unwrap();
        let s = PulseEnvelope::new(PulseRole::Stokes, 1.0, -0.2, 1.0, 0.0).unwrap();
        let b = PulseEnvelope::new(PulseRole::Branching, 1.0, 0.7, 1.0, 0.0).unwrap();
        let e = solve_amplitude(&unit, &p, &s, &b, 1.0, -0.2, &SuppressedTarget::Level3).unwrap();
        assert!((e - 1.0).abs() < 1e-15);

        let e2 = solve_amplitude(&unit, &p.with_amplitude(2.0), &s, &b, 1.0, -0.2, &SuppressedTarget::Level3).unwrap();
        assert!((e2 - 2.0 * e).abs() < 1e-15);

        let no_mu24 = unit.with_coupling(DipoleCoupling::for_transition(Transition::Stokes4, 0.0, 0.0).unwrap());
        assert_eq!(
            solve_amplitude(&no_mu24, &p, &s, &b, 1.0, -0.2, &SuppressedTarget::Level3),
            Err(Error::ZeroDipole("μ_24"))
        );
        let no_mu15 = unit.with_coupling(DipoleCoupling::for_transition(Transition::Control, 0.0, 0.0).unwrap());
        assert_eq!(
            solve_amplitude(&no_mu15, &p, &s, &b, 1.0, -0.2, &SuppressedTarget::Level4),
            Err(Error::ZeroDipole("μ_15"))
        );
    }

    #[test]
    fn fig2_preset_design() {
        for case_b in [false, true] {
            let sys = fig2(case_b);
            let sol = design_control_pulse(&problem(sys, SuppressedTarget::Level3, 0.0, 1.0)).unwrap();
            assert!((control_peak(&sys, &sol.control) - c(10.0, 50.0)).norm() < 1e-9);
            assert!((sol.control.center - 1.0).abs() < 1e-15);
            assert!((sol.control.width - 1.0).abs() < 1e-15);
            assert!(sol.residual_report < 1e-12, "{}", sol.residual_report);
            assert!(sol.restriction_ok);
        }
    }

    #[test]
    fn fig3_preset_design_carries_e_squared() {
        let sys = fig2(false);
        let sol = design_control_pulse(&problem(sys, SuppressedTarget::Level3, 0.5, SQRT_2)).unwrap();
        let expected = c(10.0, 50.0) * 2.0f64.exp();
        assert!((control_peak(&sys, &sol.control) - expected).norm() < 1e-9);
        assert!((sol.control.center - 2.5).abs() < 1e-14);
        assert!((sol.control.width - SQRT_2).abs() < 1e-14);
        assert!(sol.residual_report < 1e-12);
    }

    #[test]
    fn fig5_preset_design() {
        let sys = fig2(false);
        let target = SuppressedTarget::Superposition(TargetSuperposition::new(FRAC_PI_4, -FRAC_PI_2));
        let sol = design_control_pulse(&problem(sys, target, 0.0, 1.0)).unwrap();
        assert!((control_peak(&sys, &sol.control) - c(80.0, 40.0)).norm() < 1e-9);
        assert!((sol.control.phase - c(80.0, 40.0).arg()).abs() < 1e-12);
        assert!(sol.residual_report < 1e-12);
    }

    #[test]
    fn level_four_design_places_node_on_four() {
        use crate::pulse::rabi_set;
        use crate::spectrum::null_eigenvector;
        let sys = fig2(false);
        let prob = problem(sys, SuppressedTarget::Level4, 0.0, 1.0);
        let sol = design_control_pulse(&prob).unwrap();
        assert!(sol.residual_report < 1e-12);
        let pulses = sol.pulses(&prob);
        for t in [-1.0, 0.0, 0.5, 1.3, 2.0] {
            let v = null_eigenvector(&rabi_set(&sys, &pulses, t)).unwrap();
            assert!(v.population(4) < 1e-26);
            assert!(v.population(3) > 1e-6);
        }
    }

    #[test]
    fn restriction_examples() {
        assert!(check_restriction(&fig2(false), &SuppressedTarget::Level3));
        assert!(check_restriction(&fig2(true), &SuppressedTarget::Level4));
        let degenerate = FiveLevelSystem::from_peak_rabis(
            [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)],
            0.0,
            0.0,
        )
        .unwrap();
        assert!(!check_restriction(&degenerate, &SuppressedTarget::Level3));
        let err = design_control_pulse(&problem(degenerate, SuppressedTarget::Level3, 0.0, 1.0));
        assert_eq!(err, Err(Error::RestrictionViolated));

        let scaled = FiveLevelSystem::from_peak_rabis(
            [c(40.0, 0.0), c(90.0, 0.0), c(60.0, 60.0), c(60.0, 0.0), c(90.0, 60.0), c(1.0, 0.0)],
            0.0,
            0.0,
        )
        .unwrap();
        assert_eq!(
            check_restriction(&scaled, &SuppressedTarget::Level3),
            check_restriction(&fig2(false), &SuppressedTarget::Level3)
        );
    }

    #[test]
    fn design_is_scale_covariant() {
        let sys = fig2(true);
        let base = problem(sys, SuppressedTarget::Level3, 0.3, 1.2);
        let e0 = design_control_pulse(&base).unwrap().control.peak_amplitude;
        let mut scaled = base;
        scaled.pump.peak_amplitude *= 3.0;
        scaled.stokes.peak_amplitude *= 0.5;
        scaled.branching.peak_amplitude *= 1.7;
        let e1 = design_control_pulse(&scaled).unwrap().control.peak_amplitude;
        assert!((e1 - e0 * 3.0 * 1.7 / 0.5).abs() < 1e-12 * e1);
    }

    #[test]
    fn wrong_roles_rejected() {
        let sys = fig2(false);
        let p = pulse(PulseRole::Pump, 1.0, 1.0);
        assert!(DesignProblem::new(sys, p, p, p, SuppressedTarget::Level3).is_err());
    }
}
