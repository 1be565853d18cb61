//! Ergotropy, passive states, and the incoherent/coherent split.
//!
//! All energies are in units of the qubit splitting `omega0`. The energy
//! eigenbasis is whatever [`eig_hermitian`] returns for `h`; for the diagonal
//! Hamiltonians used in this crate that is the computational basis, which
//! fixes the dephasing map used by the incoherent component.

use crate::error::{Error, Result};
use crate::numkernel::{eig_hermitian, ComplexMatrix, C64};

/// Trace deviation or negative eigenvalue beyond which a state is rejected.
pub const PHYSICAL_TOL: f64 = 1e-8;
/// Round-off slack below zero that is silently clamped.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErgotropyBreakdown {
    pub total: f64,
    pub incoherent: f64,
    pub coherent: f64,
    pub mean_energy: f64,
}

/// Spectral data shared by every quantity in this module.
struct Spectra {
    /// Energies, ascending.
    energies: Vec<f64>,
    /// Eigenvalues of rho, descending.
    occupations: Vec<f64>,
    /// Populations `<e_k|rho|e_k>` in the energy eigenbasis, same order as `energies`.
    populations: Vec<f64>,
    energy_basis: ComplexMatrix,
    mean_energy: f64,
}

fn check_dims(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() || !h.is_square() || rho.rows() != h.rows() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, Hamiltonian is {}x{}",
            rho.rows(),
            rho.cols(),
            h.rows(),
            h.cols()
        )));
    }
    Ok(())
}

fn spectra(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<Spectra> {
    check_dims(rho, h)?;
    let (mut occupations, _) = eig_hermitian(rho)?;
    let trace_deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = occupations.first().copied().unwrap_or(0.0);
    if trace_deviation > PHYSICAL_TOL || min_eigenvalue < -PHYSICAL_TOL {
        return Err(Error::NotPhysical {
            trace_deviation,
            min_eigenvalue,
        });
    }
    occupations.reverse();

    let (energies, energy_basis) = eig_hermitian(h)?;
    let rotated = energy_basis.dagger().matmul(rho).matmul(&energy_basis);
    let populations = rotated.diag_real();
    let mean_energy = rho.matmul(h).trace().re;
    Ok(Spectra {
        energies,
        occupations,
        populations,
        energy_basis,
        mean_energy,
    })
}

fn paired_energy(energies: &[f64], weights: &[f64]) -> f64 {
    energies.iter().zip(weights).map(|(e, w)| e * w).sum()
}

fn clamp(value: f64) -> f64 {
    debug_assert!(value > -1e-6, "ergotropy {value} far below zero");
    if value < 0.0 {
        0.0
    } else {
        value
    }
}

impl Spectra {
    fn total(&self) -> f64 {
        clamp(self.mean_energy - paired_energy(&self.energies, &self.occupations))
    }

    fn incoherent(&self) -> f64 {
        let mut sorted = self.populations.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let diagonal_energy = paired_energy(&self.energies, &self.populations);
        clamp(diagonal_energy - paired_energy(&self.energies, &sorted))
    }
}

/// Maximal work extractable by a cyclic unitary.
pub fn ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    Ok(spectra(rho, h)?.total())
}

/// Ergotropy of the state dephased in the energy eigenbasis.
pub fn incoherent_ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    Ok(spectra(rho, h)?.incoherent())
}

pub fn coherent_ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    breakdown(rho, h).map(|b| b.coherent)
}

/// `Re tr(rho h)`.
pub fn mean_energy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    check_dims(rho, h)?;
    let tr = rho.matmul(h).trace();
    debug_assert!(tr.im.abs() <= 1e-8, "complex mean energy {tr}");
    Ok(tr.re)
}

pub fn breakdown(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ErgotropyBreakdown> {
    let s = spectra(rho, h)?;
    let total = s.total();
    let incoherent = s.incoherent().min(total);
    Ok(ErgotropyBreakdown {
        total,
        incoherent,
        coherent: clamp(total - incoherent),
        mean_energy: s.mean_energy,
    })
}

/// Passive companion `sum_j r_j |e_j><e_j|`, descending occupations on
/// ascending energies.
pub fn passive_state(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = spectra(rho, h)?;
    let diag = ComplexMatrix::from_real_diag(&s.occupations);
    Ok(diag.conjugate_by(&s.energy_basis))
}
