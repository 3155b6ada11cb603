//! Spectra and time evolution of tangential operators.

mod evolve;
mod hermiticity;
mod spectrum;

use num_complex::Complex64;

pub use evolve::{evolve, evolve_with_stride, EvolutionTrace, NORMALIZATION_TOL, STEP_GROWTH_WARNING};
pub use hermiticity::{hermiticity_report, HermiticityReport, HERMITICITY_TOL};
pub use spectrum::{eigen_solve, SolveMethod, Spectrum, DENSE_LIMIT, RESIDUAL_TOL};

use crate::error::{Error, Result};
use crate::operator::NormalChannel;

/// A separated level `E_t + E_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedLevel {
    pub tangential_index: usize,
    pub normal_level: u32,
    pub tangential: Complex64,
    pub normal: f64,
    pub total: Complex64,
}

/// Adds oscillator levels to tangential eigenvalues for each requested
/// `(tangential index, oscillator level)` pair.
pub fn total_energy(
    spectrum: &Spectrum,
    omega: f64,
    pairs: &[(usize, u32)],
) -> Result<Vec<CombinedLevel>> {
    pairs
        .iter()
        .map(|&(index, level)| {
            let tangential = *spectrum.eigenvalues.get(index).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "tangential index {index} out of range (have {})",
                    spectrum.len()
                ))
            })?;
            let normal = NormalChannel::new(omega, level)?.energy;
            Ok(CombinedLevel {
                tangential_index: index,
                normal_level: level,
                tangential,
                normal,
                total: tangential + normal,
            })
        })
        .collect()
}
