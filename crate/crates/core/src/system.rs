//! Level structure and the rotating-wave Hamiltonian.
//!
//! Levels are numbered 1..=5 in the public API: |1⟩ initial, |2⟩ intermediate,
//! |3⟩ and |4⟩ the degenerate product states, |5⟩ the branch state. Only the
//! product states may decay; a diagonal entry `-iΓ` damps the amplitude as
//! `e^{-Γt}`, so the population decays at `2Γ`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulse::{DipoleCoupling, RabiSet, Transition};

pub type Amplitudes = [Complex64; 5];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveLevelSystem {
    couplings: [DipoleCoupling; 6],
    pub decay_rate_3: f64,
    pub decay_rate_4: f64,
}

impl FiveLevelSystem {
    /// Build from the six dipoles (any order, each edge exactly once).
    pub fn new<I>(couplings: I, decay_rate_3: f64, decay_rate_4: f64) -> Result<Self>
    where
        I: IntoIterator<Item = DipoleCoupling>,
    {
        let mut slots: [Option<DipoleCoupling>; 6] = [None; 6];
        for d in couplings {
            let tr = d.transition();
            if slots[tr.index()].replace(d).is_some() {
                return Err(Error::InvalidSystem(format!("coupling {:?} given twice", tr.levels())));
            }
        }
        let mut out = [DipoleCoupling::for_transition(Transition::Pump, 0.0, 0.0)?; 6];
        for tr in Transition::ALL {
            out[tr.index()] = slots[tr.index()]
                .ok_or_else(|| Error::InvalidSystem(format!("coupling {:?} missing", tr.levels())))?;
        }
        for (name, g) in [("decay_rate_3", decay_rate_3), ("decay_rate_4", decay_rate_4)] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::InvalidSystem(format!("{name} must be finite and non-negative, got {g}")));
            }
        }
        Ok(Self { couplings: out, decay_rate_3, decay_rate_4 })
    }

    /// Direct form: each coupling is given as its complex peak `Ω·T`, in
    /// [`Transition::ALL`] order. The dipole takes magnitude `|Ω|` and phase
    /// `arg Ω`, so a pulse of peak amplitude 2 and zero phase reproduces `Ω`.
    pub fn from_peak_rabis(peaks: [Complex64; 6], decay_rate_3: f64, decay_rate_4: f64) -> Result<Self> {
        let mut dipoles = Vec::with_capacity(6);
        for tr in Transition::ALL {
            dipoles.push(DipoleCoupling::from_complex(tr, peaks[tr.index()])?);
        }
        Self::new(dipoles, decay_rate_3, decay_rate_4)
    }

    pub fn coupling(&self, transition: Transition) -> &DipoleCoupling {
        &self.couplings[transition.index()]
    }

    pub fn couplings(&self) -> &[DipoleCoupling; 6] {
        &self.couplings
    }

    pub fn with_coupling(mut self, dipole: DipoleCoupling) -> Self {
        self.couplings[dipole.transition().index()] = dipole;
        self
    }

    pub fn with_decay(mut self, decay_rate_3: f64, decay_rate_4: f64) -> Self {
        self.decay_rate_3 = decay_rate_3;
        self.decay_rate_4 = decay_rate_4;
        self
    }

    pub fn has_decay(&self) -> bool {
        self.decay_rate_3 > 0.0 || self.decay_rate_4 > 0.0
    }
}

/// Dense 5×5 complex matrix; indexing is 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: [[Complex64; 5]; 5],
}

impl HamiltonianMatrix {
    pub fn zeros() -> Self {
        Self { entries: [[ZERO; 5]; 5] }
    }

    pub fn apply(&self, v: &Amplitudes) -> Amplitudes {
        let mut out = [ZERO; 5];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(v).map(|(h, x)| h * x).sum();
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        (0..5).all(|i| (0..5).all(|j| self.entries[i][j] == self.entries[j][i].conj()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for HamiltonianMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i][j]
    }
}

impl IndexMut<(usize, usize)> for HamiltonianMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i][j]
    }
}

pub fn build_hamiltonian(system: &FiveLevelSystem, rabis: &RabiSet, include_decay: bool) -> HamiltonianMatrix {
    let mut h = HamiltonianMatrix::zeros();
    for tr in Transition::ALL {
        let (a, b) = tr.levels();
        let z = rabis.get(tr);
        h[(a - 1, b - 1)] = z;
        h[(b - 1, a - 1)] = z.conj();
    }
    if include_decay {
        h[(2, 2)] = Complex64::new(0.0, -system.decay_rate_3);
        h[(3, 3)] = Complex64::new(0.0, -system.decay_rate_4);
    }
    h
}

pub fn populations(v: &Amplitudes) -> [f64; 5] {
    v.map(|z| z.norm_sqr())
}

pub fn norm_sqr(v: &Amplitudes) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨a|b⟩`.
pub fn inner(a: &Amplitudes, b: &Amplitudes) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Basis state |level⟩ (1-based).
pub fn basis_state(level: usize) -> Amplitudes {
    assert!((1..=5).contains(&level), "level {level} out of range 1..=5");
    let mut v = [ZERO; 5];
    v[level - 1] = Complex64::new(1.0, 0.0);
    v
}
