//! Rotated product basis
//!
//! ```text
//! |3'⟩ = sin θ |3⟩ + e^{iβ} cos θ |4⟩
//! |4'⟩ = cos θ |3⟩ − e^{iβ} sin θ |4⟩
//! ```
//!
//! Expressed in this basis the Hamiltonian keeps its shape, with the four
//! dipoles touching the product states replaced by linear combinations. Any
//! node condition for |3⟩ therefore carries over to |3'⟩ unchanged once the
//! primed dipoles are substituted.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::Result;
use crate::pulse::{DipoleCoupling, RabiSet, Transition};
use crate::system::{Amplitudes, FiveLevelSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSuperposition {
    pub theta: f64,
    pub beta: f64,
}

impl TargetSuperposition {
    pub fn new(theta: f64, beta: f64) -> Self {
        Self { theta, beta }
    }

    /// Coefficients of |3'⟩ on (|3⟩, |4⟩).
    pub fn suppressed_state(&self) -> (Complex64, Complex64) {
        let (s, c) = self.theta.sin_cos();
        (Complex64::new(s, 0.0), Complex64::from_polar(c, self.beta))
    }

    /// Coefficients of |4'⟩ on (|3⟩, |4⟩).
    pub fn target_state(&self) -> (Complex64, Complex64) {
        let (s, c) = self.theta.sin_cos();
        (Complex64::new(c, 0.0), -Complex64::from_polar(s, self.beta))
    }

    /// The six Rabi frequencies with |3⟩, |4⟩ replaced by |3'⟩, |4'⟩.
    pub fn rotate_rabis(&self, r: &RabiSet) -> RabiSet {
        let (s, c) = self.theta.sin_cos();
        let e = Complex64::from_polar(1.0, self.beta);
        RabiSet {
            stokes3: r.stokes3 * s + e * c * r.stokes4,
            stokes4: r.stokes3 * c - e * s * r.stokes4,
            branch3: r.branch3 * s + e.conj() * c * r.branch4,
            branch4: r.branch3 * c - e.conj() * s * r.branch4,
            ..*r
        }
    }
}

/// `μ'_23, μ'_24, μ'_35, μ'_45` as complex numbers; `.norm()` and `.arg()` give
/// the effective magnitudes and phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedDipoles {
    pub mu23: Complex64,
    pub mu24: Complex64,
    pub mu35: Complex64,
    pub mu45: Complex64,
}

pub fn rotated_dipoles(system: &FiveLevelSystem, target: &TargetSuperposition) -> RotatedDipoles {
    let (s, c) = target.theta.sin_cos();
    let beta = target.beta;
    let m23 = system.coupling(Transition::Stokes3);
    let m24 = system.coupling(Transition::Stokes4);
    let m35 = system.coupling(Transition::Branch3);
    let m45 = system.coupling(Transition::Branch4);

    let a23 = Complex64::from_polar(m23.magnitude, m23.phase);
    let b24 = Complex64::from_polar(m24.magnitude, beta + m24.phase);
    let a35 = Complex64::from_polar(m35.magnitude, m35.phase);
    let b45 = Complex64::from_polar(m45.magnitude, -(beta - m45.phase));

    RotatedDipoles {
        mu23: a23 * s + b24 * c,
        mu24: a23 * c - b24 * s,
        mu35: a35 * s + b45 * c,
        mu45: a35 * c - b45 * s,
    }
}

/// Same system seen in the rotated product basis. Decay rates are copied
/// unchanged, which is only meaningful when `Γ₃ = Γ₄`.
pub fn rotated_system(system: &FiveLevelSystem, target: &TargetSuperposition) -> Result<FiveLevelSystem> {
    let d = rotated_dipoles(system, target);
    Ok(system
        .with_coupling(DipoleCoupling::from_complex(Transition::Stokes3, d.mu23)?)
        .with_coupling(DipoleCoupling::from_complex(Transition::Stokes4, d.mu24)?)
        .with_coupling(DipoleCoupling::from_complex(Transition::Branch3, d.mu35)?)
        .with_coupling(DipoleCoupling::from_complex(Transition::Branch4, d.mu45)?))
}

/// Magnitude/arctangent closed forms for `|μ'_24|, |μ'_45|, α'_24, α'_45`.
///
/// The magnitude forms carry no interference term between the two bare
/// dipoles, so they agree with [`rotated_dipoles`] only when that term
/// vanishes. They are kept as a cross-check; see [`ClosedFormCheck`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormDipoles {
    pub magnitude_24: f64,
    pub magnitude_45: f64,
    pub phase_24: f64,
    pub phase_45: f64,
}

pub fn closed_form_dipoles(system: &FiveLevelSystem, target: &TargetSuperposition) -> ClosedFormDipoles {
    let (s, c) = target.theta.sin_cos();
    let beta = target.beta;
    let m23 = system.coupling(Transition::Stokes3);
    let m24 = system.coupling(Transition::Stokes4);
    let m35 = system.coupling(Transition::Branch3);
    let m45 = system.coupling(Transition::Branch4);

    let magnitude_24 = (c * c * m23.magnitude.powi(2) + s * s * m24.magnitude.powi(2)).sqrt();
    let magnitude_45 = (c * c * m35.magnitude.powi(2) + s * s * m45.magnitude.powi(2)).sqrt();
    let phase_24 = f64::atan2(
        c * m23.phase.sin() * m23.magnitude - s * (beta + m24.phase).sin() * m24.magnitude,
        c * m23.phase.cos() * m23.magnitude - s * (beta + m24.phase).cos() * m24.magnitude,
    );
    let phase_45 = f64::atan2(
        c * m35.phase.sin() * m35.magnitude + s * (beta - m45.phase).sin() * m45.magnitude,
        c * m35.phase.cos() * m35.magnitude - s * (beta - m45.phase).cos() * m45.magnitude,
    );
    ClosedFormDipoles { magnitude_24, magnitude_45, phase_24, phase_45 }
}

/// Differences between the closed forms and the direct complex values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCheck {
    pub magnitude_24: f64,
    pub magnitude_45: f64,
    pub phase_24: f64,
    pub phase_45: f64,
}

impl ClosedFormCheck {
    pub fn max_magnitude_error(&self) -> f64 {
        self.magnitude_24.max(self.magnitude_45)
    }

    pub fn max_phase_error(&self) -> f64 {
        self.phase_24.max(self.phase_45)
    }
}

pub fn closed_form_check(system: &FiveLevelSystem, target: &TargetSuperposition) -> ClosedFormCheck {
    let direct = rotated_dipoles(system, target);
    let closed = closed_form_dipoles(system, target);
    let phase_gap = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    ClosedFormCheck {
        magnitude_24: (direct.mu24.norm() - closed.magnitude_24).abs(),
        magnitude_45: (direct.mu45.norm() - closed.magnitude_45).abs(),
        phase_24: phase_gap(direct.mu24.arg(), closed.phase_24),
        phase_45: phase_gap(direct.mu45.arg(), closed.phase_45),
    }
}

/// `(P_3', P_4')` from the |3⟩, |4⟩ amplitudes of `psi`.
pub fn project_onto_targets(psi: &Amplitudes, target: &TargetSuperposition) -> (f64, f64) {
    let (a3, a4) = target.suppressed_state();
    let (b3, b4) = target.target_state();
    let (c3, c4) = (psi[2], psi[3]);
    let p3 = (a3.conj() * c3 + a4.conj() * c4).norm_sqr();
    let p4 = (b3.conj() * c3 + b4.conj() * c4).norm_sqr();
    (p3, p4)
}

/// `|4'⟩` written as `cos θ |n₃⟩⊗|e₃⟩ − sin θ e^{iβ} |n₄⟩⊗|e₄⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledForm {
    pub coefficient_3: Complex64,
    pub coefficient_4: Complex64,
}

pub fn entangled_representation(target: &TargetSuperposition) -> EntangledForm {
    let (c3, c4) = target.target_state();
    EntangledForm { coefficient_3: c3, coefficient_4: c4 }
}

const DISPLAY_EPS: f64 = 1e-12;

fn trim_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Returns (is_negative, magnitude text) where the text is empty for unit
/// real coefficients.
fn coefficient_text(z: Complex64) -> (bool, String) {
    if z.im.abs() <= DISPLAY_EPS {
        let neg = z.re < 0.0;
        let mag = z.re.abs();
        if (mag - 1.0).abs() <= DISPLAY_EPS {
            (neg, String::new())
        } else {
            (neg, trim_number(mag))
        }
    } else if z.re.abs() <= DISPLAY_EPS {
        let neg = z.im < 0.0;
        let mag = z.im.abs();
        if (mag - 1.0).abs() <= DISPLAY_EPS {
            (neg, "i".to_string())
        } else {
            (neg, format!("{}i", trim_number(mag)))
        }
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        (false, format!("({}{}{}i)", trim_number(z.re), sign, trim_number(z.im.abs())))
    }
}

impl fmt::Display for EntangledForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = [(self.coefficient_3, "|n₃⟩⊗|e₃⟩"), (self.coefficient_4, "|n₄⟩⊗|e₄⟩")];
        let mut first = true;
        for (z, ket) in terms {
            if z.norm() <= DISPLAY_EPS {
                continue;
            }
            let (neg, text) = coefficient_text(z);
            let sep = if text.is_empty() { "" } else { "·" };
            match (first, neg) {
                (true, false) => write!(f, "{text}{sep}{ket}")?,
                (true, true) => write!(f, "−{text}{sep}{ket}")?,
                (false, false) => write!(f, " + {text}{sep}{ket}")?,
                (false, true) => write!(f, " − {text}{sep}{ket}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
