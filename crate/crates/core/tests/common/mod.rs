#![allow(dead_code)]

use nalgebra::{Complex as NaComplex, Matrix5};

use stirap_core::pulse::RabiSet;
use stirap_core::system::{build_hamiltonian, Amplitudes, FiveLevelSystem, HamiltonianMatrix};
use stirap_core::Complex64;

/// Hamiltonian for a bare Rabi set (decay off).
pub fn hamiltonian(rabis: &RabiSet) -> HamiltonianMatrix {
    let unit = FiveLevelSystem::from_peak_rabis([Complex64::new(1.0, 0.0); 6], 0.0, 0.0).unwrap();
    build_hamiltonian(&unit, rabis, false)
}

/// Dense Hermitian eigensolver: ascending eigenvalues and matching eigenvectors.
pub fn dense_eigen(h: &HamiltonianMatrix) -> (Vec<f64>, Vec<Amplitudes>) {
    let m = Matrix5::from_fn(|i, j| NaComplex::new(h[(i, j)].re, h[(i, j)].im));
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| std::array::from_fn(|i| Complex64::new(eig.eigenvectors[(i, k)].re, eig.eigenvectors[(i, k)].im)))
        .collect();
    (values, vectors)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
