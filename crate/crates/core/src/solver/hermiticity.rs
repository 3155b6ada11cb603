use num_complex::Complex64;

use crate::operator::TangentialOperator;

/// Absolute part of the comparison tolerance.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Self-adjointness of an operator under its surface measure.
///
/// All quantities refer to `M_w = W^(1/2) M W^(-1/2)` with `W` the diagonal of
/// measure weights, so `M` is self-adjoint under the measure iff `M_w` is
/// Hermitian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiticityReport {
    /// `max |M_w - M_w^H|` over all entries.
    pub max_asymmetry: f64,
    /// `max_asymmetry / max |M_w|`.
    pub relative_asymmetry: f64,
    /// Frobenius norm of `(M_w - M_w^H) / 2`.
    pub anti_hermitian_norm: f64,
    /// `max |(M_w - M_w^H)/2 - i diag(e A3 H)|`.
    pub coupling_mismatch: f64,
    /// The anti-Hermitian part is exactly the imaginary `e A3 H` diagonal.
    pub matches_coupling: bool,
    pub is_hermitian: bool,
    /// Threshold used for both flags: `HERMITICITY_TOL` plus a rounding
    /// allowance proportional to the largest entry.
    pub tolerance: f64,
}

pub fn hermiticity_report(op: &TangentialOperator) -> HermiticityReport {
    let mat = op.matrix();
    let w = op.measure_weights();
    let coupling = op.coupling();
    let n = op.dim();

    let mut scale: f64 = 0.0;
    let mut max_asym: f64 = 0.0;
    let mut frob2 = 0.0;
    let mut mismatch: f64 = 0.0;

    for i in 0..n {
        let d = mat.diag[i];
        scale = scale.max(d.norm());
        let anti = Complex64::new(0.0, d.im);
        max_asym = max_asym.max(2.0 * d.im.abs());
        frob2 += anti.norm_sqr();
        mismatch = mismatch.max((anti - Complex64::new(0.0, coupling[i])).norm());
    }
    for i in 0..n.saturating_sub(1) {
        let ratio = (w[i] / w[i + 1]).sqrt();
        let upper = mat.upper[i] * ratio;
        let lower = mat.lower[i] / ratio;
        scale = scale.max(upper.norm()).max(lower.norm());
        let gap = upper - lower.conj();
        max_asym = max_asym.max(gap.norm());
        // (i, i+1) and (i+1, i) entries of the anti-Hermitian part have equal modulus
        let anti = 0.5 * gap;
        frob2 += 2.0 * anti.norm_sqr();
        mismatch = mismatch.max(anti.norm());
    }

    let tolerance = HERMITICITY_TOL + 64.0 * f64::EPSILON * scale;
    HermiticityReport {
        max_asymmetry: max_asym,
        relative_asymmetry: if scale > 0.0 { max_asym / scale } else { 0.0 },
        anti_hermitian_norm: frob2.sqrt(),
        coupling_mismatch: mismatch,
        matches_coupling: mismatch <= tolerance,
        is_hermitian: max_asym <= tolerance,
        tolerance,
    }
}
