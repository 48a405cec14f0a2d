//! Analytic eigensystem of the dressed Hamiltonian.
//!
//! The Hamiltonian always has one zero eigenvalue whose eigenvector has
//! structural nodes on |2⟩ and |5⟩:
//!
//! ```text
//! |λ₁⟩ ∝ ( Ω_S4 Ω_B3* − Ω_S3 Ω_B4*,  0,  Ω_P* Ω_B4* − Ω_S4 Ω_C*,  Ω_S3 Ω_C* − Ω_P* Ω_B3*,  0 )
//! ```
//!
//! The remaining four eigenvalues are `±√x` for the two roots of
//! `x² − Ω² x + Q = 0`, where `Ω²` is the summed `|Ω|²` of all six couplings and
//! `Q` is the squared norm of the unnormalized vector above.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulse::RabiSet;
use crate::system::{inner, Amplitudes};

/// Relative cancellation threshold for degenerate/accidental detection. Each
/// difference `a − b` of Rabi products is compared against `max(|a|, |b|)`.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// Below this largest `|Ω|` (units of 1/T) the field is considered off.
pub const FIELD_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One of the two degenerate product states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductLevel {
    Level3,
    Level4,
}

impl ProductLevel {
    /// 1-based level number.
    pub fn level(self) -> usize {
        match self {
            ProductLevel::Level3 => 3,
            ProductLevel::Level4 => 4,
        }
    }

    pub fn from_level(level: usize) -> Option<Self> {
        match level {
            3 => Some(ProductLevel::Level3),
            4 => Some(ProductLevel::Level4),
            _ => None,
        }
    }
}

/// The three nonzero entries of the unnormalized null vector, each paired with
/// the larger magnitude of the two products it is the difference of.
#[derive(Debug, Clone, Copy)]
struct NullComponents {
    values: [Complex64; 3],
    scales: [f64; 3],
}

fn null_components(r: &RabiSet) -> NullComponents {
    let (p, s3, s4, b3, b4, c) = (r.pump, r.stokes3, r.stokes4, r.branch3, r.branch4, r.control);
    let pairs = [
        (s4 * b3.conj(), s3 * b4.conj()),
        (p.conj() * b4.conj(), s4 * c.conj()),
        (s3 * c.conj(), p.conj() * b3.conj()),
    ];
    NullComponents {
        values: pairs.map(|(a, b)| a - b),
        scales: pairs.map(|(a, b)| a.norm().max(b.norm())),
    }
}

impl NullComponents {
    fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    fn scale_sqr(&self) -> f64 {
        self.scales.iter().map(|s| s * s).sum()
    }

    fn vanishes(&self) -> bool {
        let scale = self.scale_sqr();
        scale == 0.0 || self.norm_sqr() <= RELATIVE_TOLERANCE * RELATIVE_TOLERANCE * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullEigenvector {
    pub components: Amplitudes,
    /// Norm of the vector before normalization.
    pub normalization: f64,
}

impl NullEigenvector {
    /// Overlap `⟨λ₁|level⟩` squared, for a 1-based level.
    pub fn population(&self, level: usize) -> f64 {
        self.components[level - 1].norm_sqr()
    }

    /// Same state with its global phase chosen to maximize overlap with
    /// `reference` (real, non-negative `⟨reference|self⟩`).
    pub fn aligned_with(&self, reference: &Amplitudes) -> Self {
        let ov = inner(reference, &self.components);
        if ov.norm() == 0.0 {
            return *self;
        }
        let phase = ov.conj() / ov.norm();
        Self { components: self.components.map(|z| z * phase), normalization: self.normalization }
    }

    pub fn fidelity(&self, psi: &Amplitudes) -> f64 {
        inner(&self.components, psi).norm_sqr()
    }
}

pub fn null_eigenvector(rabis: &RabiSet) -> Result<NullEigenvector> {
    if rabis.max_magnitude() <= FIELD_FLOOR {
        return Err(Error::DegenerateCase);
    }
    let comps = null_components(rabis);
    if comps.vanishes() {
        return Err(Error::DegenerateCase);
    }
    if comps.scales[0] > 0.0 && comps.values[0].norm() <= RELATIVE_TOLERANCE * comps.scales[0] {
        return Err(Error::AccidentalNullSpace);
    }

    let [c1, c3, c4] = comps.values;
    let norm = comps.norm_sqr().sqrt();
    let mut v = [c1 / norm, ZERO, c3 / norm, c4 / norm, ZERO];

    // Largest component real positive.
    let lead = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("five components");
    let phase = lead.conj() / lead.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[1] = ZERO;
    v[4] = ZERO;
    Ok(NullEigenvector { components: v, normalization: norm })
}

/// Roots `(x₊, x₋)` of `x² − Ω² x + Q = 0`, `x₊ ≥ x₋ ≥ 0`.
pub fn quadratic_roots(rabis: &RabiSet) -> (f64, f64) {
    let omega2 = rabis.total_square();
    let q = null_components(rabis).norm_sqr();
    let disc = (omega2 * omega2 - 4.0 * q).max(0.0);
    let x_plus = 0.5 * (omega2 + disc.sqrt());
    // Vieta keeps the small root accurate.
    let x_minus = if x_plus > 0.0 { (q / x_plus).min(x_plus) } else { 0.0 };
    (x_plus, x_minus)
}

/// `true` when the small root `x₋` is a structural zero (extra null states).
fn small_root_vanishes(rabis: &RabiSet) -> bool {
    null_components(rabis).vanishes()
}

/// The four nonzero eigenvalues `[−√x₊, −√x₋, √x₋, √x₊]`.
pub fn nonzero_eigenvalues(rabis: &RabiSet) -> Result<[f64; 4]> {
    if small_root_vanishes(rabis) {
        return Err(Error::AccidentalNullSpace);
    }
    let (xp, xm) = quadratic_roots(rabis);
    let (a, b) = (xp.sqrt(), xm.sqrt());
    Ok([-a, -b, b, a])
}

/// Smallest `|λ|` among eigenvalues that are not structurally zero; zero when
/// the field is off.
pub fn null_gap(rabis: &RabiSet) -> f64 {
    let (xp, xm) = quadratic_roots(rabis);
    if small_root_vanishes(rabis) {
        xp.sqrt()
    } else {
        xm.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedSpectrum {
    pub null_state: NullEigenvector,
    pub nonzero_eigenvalues: [f64; 4],
    pub total_rabi_square: f64,
}

impl DressedSpectrum {
    /// All five eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 5] {
        let e = self.nonzero_eigenvalues;
        [e[0], e[1], 0.0, e[2], e[3]]
    }
}

pub fn dressed_spectrum(rabis: &RabiSet) -> Result<DressedSpectrum> {
    Ok(DressedSpectrum {
        null_state: null_eigenvector(rabis)?,
        nonzero_eigenvalues: nonzero_eigenvalues(rabis)?,
        total_rabi_square: rabis.total_square(),
    })
}

/// Dimensionless violation of the node condition on `level`: the relevant
/// null-vector entry divided by the product of the two largest `|Ω|`.
pub fn node_residual(rabis: &RabiSet, level: ProductLevel) -> f64 {
    let comps = null_components(rabis);
    let numerator = match level {
        ProductLevel::Level3 => comps.values[1].norm(),
        ProductLevel::Level4 => comps.values[2].norm(),
    };
    let mut mags = rabis.as_array().map(|z| z.norm());
    mags.sort_by(|a, b| b.total_cmp(a));
    let denom = mags[0] * mags[1];
    if denom == 0.0 {
        0.0
    } else {
        numerator / denom
    }
}

/// `Ω_S4 Ω_B3* ≠ Ω_S3 Ω_B4*` at relative tolerance [`RELATIVE_TOLERANCE`].
pub fn restriction_holds(rabis: &RabiSet) -> bool {
    let comps = null_components(rabis);
    comps.values[0].norm() > RELATIVE_TOLERANCE * comps.scales[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{build_hamiltonian, FiveLevelSystem};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2a_peaks() -> RabiSet {
        RabiSet::new(c(40.0, 0.0), c(30.0, 0.0), c(20.0, 20.0), c(20.0, 0.0), c(30.0, 20.0), c(10.0, 50.0))
    }

    fn residual_norm(r: &RabiSet, v: &Amplitudes) -> f64 {
        let sys = FiveLevelSystem::from_peak_rabis([c(1.0, 0.0); 6], 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&sys, r, false);
        h.apply(v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / h.frobenius_norm()
    }

    #[test]
    fn fig2_preset_peaks_give_three_node_state() {
        let r = fig2a_peaks();
        let v = null_eigenvector(&r).unwrap();
        assert_eq!(v.components[1], ZERO);
        assert_eq!(v.components[4], ZERO);
        assert!(v.components[2].norm() < 1e-15);
        // Remaining entries ∝ (Ω_B4*, −Ω_C*).
        let ratio = v.components[3] / v.components[0];
        assert!((ratio - (-c(10.0, -50.0) / c(30.0, -20.0))).norm() < 1e-14);
        assert!(residual_norm(&r, &v.components) < 1e-15);
        assert!(node_residual(&r, ProductLevel::Level3) < 1e-15);
        assert!(node_residual(&r, ProductLevel::Level4) > 0.1);
    }

    #[test]
    fn three_pulse_limits() {
        let mut r = fig2a_peaks();
        r.control = ZERO;
        let v = null_eigenvector(&r).unwrap();
        // ∝ (Ω_S4Ω_B3* − Ω_S3Ω_B4*, 0, Ω_P*Ω_B4*, −Ω_P*Ω_B3*, 0)
        let kr = [r.stokes4 * r.branch3.conj() - r.stokes3 * r.branch4.conj(), r.pump.conj() * r.branch4.conj(), -r.pump.conj() * r.branch3.conj()];
        let n = kr.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ov = v.components[0].conj() * kr[0] + v.components[2].conj() * kr[1] + v.components[3].conj() * kr[2];
        assert!((ov.norm() / n - 1.0).abs() < 1e-14);
        assert!(node_residual(&r, ProductLevel::Level3) > 0.0);

        let mut r = fig2a_peaks();
        r.pump = ZERO;
        let v = null_eigenvector(&r).unwrap();
        let kr = [r.stokes4 * r.branch3.conj() - r.stokes3 * r.branch4.conj(), -r.control.conj() * r.stokes4, r.control.conj() * r.stokes3];
        let n = kr.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ov = v.components[0].conj() * kr[0] + v.components[2].conj() * kr[1] + v.components[3].conj() * kr[2];
        assert!((ov.norm() / n - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_pulse_quadratic_and_errors() {
        let r = RabiSet { pump: c(3.0, 0.0), ..Default::default() };
        let (xp, xm) = quadratic_roots(&r);
        assert_eq!((xp, xm), (9.0, 0.0));
        assert_eq!(nonzero_eigenvalues(&r), Err(Error::AccidentalNullSpace));
        assert_eq!(null_eigenvector(&r), Err(Error::DegenerateCase));
        assert_eq!(null_gap(&r), 3.0);
    }

    #[test]
    fn equal_real_couplings_collapse_small_root() {
        let r = RabiSet::from_array([c(2.0, 0.0); 6]);
        let (xp, xm) = quadratic_roots(&r);
        assert!((xp - 24.0).abs() < 1e-12);
        assert_eq!(xm, 0.0);
        assert_eq!(nonzero_eigenvalues(&r), Err(Error::AccidentalNullSpace));
        assert!(!restriction_holds(&r));
    }

    #[test]
    fn zero_field_is_degenerate() {
        assert_eq!(null_eigenvector(&RabiSet::default()), Err(Error::DegenerateCase));
        assert_eq!(null_eigenvector(&fig2a_peaks().scaled(1e-44)), Err(Error::DegenerateCase));
        assert_eq!(null_gap(&RabiSet::default()), 0.0);
    }

    #[test]
    fn accidental_case_detected() {
        // Ω_S4Ω_B3* = Ω_S3Ω_B4* with a nonzero remainder.
        let mut r = fig2a_peaks();
        r.stokes3 = c(1.0, 1.0);
        r.stokes4 = c(2.0, 0.5);
        r.branch3 = c(3.0, -1.0);
        r.branch4 = r.branch3 * (r.stokes4 / r.stokes3).conj();
        assert!(!restriction_holds(&r));
        assert_eq!(null_eigenvector(&r), Err(Error::AccidentalNullSpace));
        assert!(restriction_holds(&fig2a_peaks()));
    }

    #[test]
    fn eigenvalues_sorted_and_paired() {
        let r = fig2a_peaks().scaled(0.37);
        let e = nonzero_eigenvalues(&r).unwrap();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(e[0], -e[3]);
        assert_eq!(e[1], -e[2]);
        let sum_sq: f64 = e.iter().map(|x| x * x).sum();
        assert!((sum_sq - 2.0 * r.total_square()).abs() < 1e-12 * sum_sq);
    }

    #[test]
    fn node_residual_is_scale_free() {
        let mut r = fig2a_peaks();
        r.control = c(-3.0, 7.0);
        let a = node_residual(&r, ProductLevel::Level3);
        let b = node_residual(&r.scaled(1e4), ProductLevel::Level3);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn alignment_removes_phase_jump() {
        let v = null_eigenvector(&fig2a_peaks()).unwrap();
        let rotated = NullEigenvector { components: v.components.map(|z| z * c(0.0, 1.0)), ..v };
        let back = rotated.aligned_with(&v.components);
        for (a, b) in back.components.iter().zip(&v.components) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
