//! Finite-difference assembly of the tangential Hamiltonian for one azimuthal
//! channel, plus the analytic normal oscillator.
//!
//! Units are natural (`hbar = m = 1`); the charge `e` enters exactly as in the
//! minimal substitution `d -> d + ieA`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::VectorPotentialSpec;
use crate::geometry::{curvature_potential, eval_geometry, SurfaceProfile};
use crate::grid::RadialGrid;
use crate::tridiag::Tridiagonal;

/// Which kinetic coefficients to use.
///
/// `AsWritten` multiplies the radial Laplacian by `Z^2` and the drift term by
/// `Z^4`. `HermitianCorrected` uses the Laplace-Beltrami coefficients `1/Z^2`
/// and `1/Z^4`, assembled in flux form so the matrix is exactly self-adjoint
/// under the surface measure `rho Z d rho`. Both coincide on a flat profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorMode {
    AsWritten,
    #[default]
    HermitianCorrected,
}

impl OperatorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorMode::AsWritten => "as-written",
            OperatorMode::HermitianCorrected => "hermitian-corrected",
        }
    }
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(OperatorMode::AsWritten),
            "hermitian-corrected" => Ok(OperatorMode::HermitianCorrected),
            other => Err(Error::InvalidArgument(format!(
                "unknown operator mode `{other}` (expected as-written or hermitian-corrected)"
            ))),
        }
    }
}

/// The discretised tangential operator for a fixed azimuthal index `m`.
#[derive(Debug, Clone)]
pub struct TangentialOperator {
    m: i32,
    mode: OperatorMode,
    charge: f64,
    grid: RadialGrid,
    matrix: Tridiagonal,
    measure_weights: Vec<f64>,
    potential: Vec<Complex64>,
}

impl TangentialOperator {
    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Tridiagonal {
        &self.matrix
    }

    /// `rho_j Z_j d rho` per node.
    pub fn measure_weights(&self) -> &[f64] {
        &self.measure_weights
    }

    /// Diagonal potential per node: centrifugal, geometric, field terms.
    pub fn potential(&self) -> &[Complex64] {
        &self.potential
    }

    /// The imaginary part of the potential, `e A3 H` per node.
    pub fn coupling(&self) -> Vec<f64> {
        self.potential.iter().map(|v| v.im).collect()
    }

    /// The operator plus `shift * I`.
    pub fn shifted(&self, shift: Complex64) -> Self {
        let mut out = self.clone();
        for (d, p) in out.matrix.diag.iter_mut().zip(out.potential.iter_mut()) {
            *d += shift;
            *p += shift;
        }
        out
    }

    /// `(M + M*) / 2` where `M*` is the adjoint under the surface measure.
    pub fn hermitian_part(&self) -> Self {
        let w = &self.measure_weights;
        let m = &self.matrix;
        let mut out = self.clone();
        for i in 0..m.upper.len() {
            let ratio = w[i + 1] / w[i];
            out.matrix.upper[i] = 0.5 * (m.upper[i] + m.lower[i].conj() * ratio);
            out.matrix.lower[i] = 0.5 * (m.lower[i] + m.upper[i].conj() / ratio);
        }
        for d in out.matrix.diag.iter_mut() {
            d.im = 0.0;
        }
        for p in out.potential.iter_mut() {
            p.im = 0.0;
        }
        out
    }

    /// `<u, v>` under the surface measure.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter()
            .zip(v)
            .zip(&self.measure_weights)
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum()
    }

    /// `sqrt(sum |v_j|^2 rho_j Z_j d rho)`.
    pub fn surface_norm(&self, v: &[Complex64]) -> f64 {
        v.iter()
            .zip(&self.measure_weights)
            .map(|(a, w)| a.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// `v` rescaled to unit surface norm.
    pub fn normalized(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let norm = self.surface_norm(v);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cannot normalise a state with norm {norm}"
            )));
        }
        Ok(v.iter().map(|a| a / norm).collect())
    }
}

/// Assembles the tangential operator of `profile` in `field` for channel `m`.
///
/// Per node this is the radial kinetic term, the drift term, the centrifugal
/// barrier `m^2 / 2 rho^2`, the geometric potential `-(H^2 - K)/2`, the
/// azimuthal coupling `e m A2 / rho`, the radial coupling `-ie (A1/Z) d_rho`,
/// the imaginary coupling `ie A3 H` and the diamagnetic term `e^2 |A|^2 / 2`,
/// with `A` evaluated on the surface. Derivatives are second-order central
/// differences. The wall at `rho_max` is Dirichlet; at the axis the ghost
/// value follows the parity of `m`: `chi(0) = chi(rho_1)` (zero flux) for
/// `m = 0` and `chi(0) = 0` otherwise.
pub fn build_tangential(
    profile: &SurfaceProfile,
    field: &VectorPotentialSpec,
    m: i32,
    grid: &RadialGrid,
    mode: OperatorMode,
    e: f64,
) -> Result<TangentialOperator> {
    if !e.is_finite() {
        return Err(Error::InvalidArgument(format!("charge must be finite, got {e}")));
    }
    if grid.rho_max() > profile.rho_max() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "grid extends to {} but profile `{}` ends at {}",
            grid.rho_max(),
            profile.name(),
            profile.rho_max()
        )));
    }
    let n = grid.n_points();
    let dr = grid.spacing();
    let dr2 = dr * dr;
    let m2 = f64::from(m) * f64::from(m);
    let i = Complex64::i();

    let mut matrix = Tridiagonal::zeros(n);
    let mut weights = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);

    for j in 0..n {
        let rho = grid.node(j);
        let rho_up = (j as f64 + 1.5) * dr;
        let rho_lo = (j as f64 + 0.5) * dr;
        let g = eval_geometry(profile, rho)?;
        let z = g.z;

        let (num_up, num_lo, den) = match mode {
            OperatorMode::AsWritten => (z * z, z * z, 1.0),
            OperatorMode::HermitianCorrected => {
                let z_at = |r: f64| -> Result<f64> {
                    let s = profile.derivatives(r)?.s_rho;
                    Ok((1.0 + s * s).sqrt())
                };
                (1.0 / z_at(rho_up)?, 1.0 / z_at(rho_lo)?, z)
            }
        };
        let kin_up = -0.5 * (num_up * rho_up) / (rho * den * dr2);
        let kin_lo = -0.5 * (num_lo * rho_lo) / (rho * den * dr2);
        let mut up = Complex64::new(kin_up, 0.0);
        let mut lo = Complex64::new(kin_lo, 0.0);
        let mut diag = Complex64::new(-(kin_up + kin_lo), 0.0);

        if mode == OperatorMode::AsWritten {
            let drift = 0.5 * z.powi(4) * g.s_rho * g.s_rhorho / (2.0 * dr);
            up += drift;
            lo -= drift;
        }

        let a = field.components(profile, rho, 0.0)?;
        let radial = e * a.a1 / z / (2.0 * dr);
        up -= i * radial;
        lo += i * radial;

        let v = Complex64::new(
            0.5 * m2 / (rho * rho)
                + curvature_potential(&g)
                + e * f64::from(m) * a.a2 / rho
                + 0.5 * e * e * a.squared_norm(),
            e * a.a3 * g.mean_curvature,
        );
        diag += v;

        if j == 0 {
            if m == 0 {
                diag += lo;
            }
        } else {
            matrix.lower[j - 1] = lo;
        }
        if j + 1 < n {
            matrix.upper[j] = up;
        }
        matrix.diag[j] = diag;
        weights.push(rho * z * dr);
        potential.push(v);
    }

    Ok(TangentialOperator {
        m,
        mode,
        charge: e,
        grid: *grid,
        matrix,
        measure_weights: weights,
        potential,
    })
}

/// Largest entrywise difference between two operators on the same grid.
pub fn max_entry_difference(a: &TangentialOperator, b: &TangentialOperator) -> f64 {
    let (x, y) = (a.matrix(), b.matrix());
    assert_eq!(x.dim(), y.dim(), "operators live on different grids");
    x.lower
        .iter()
        .zip(&y.lower)
        .chain(x.diag.iter().zip(&y.diag))
        .chain(x.upper.iter().zip(&y.upper))
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

/// One level of the normal harmonic confinement `V_n = omega^2 q^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalChannel {
    pub omega: f64,
    pub level: u32,
    pub energy: f64,
}

impl NormalChannel {
    pub fn new(omega: f64, level: u32) -> Result<Self> {
        Ok(Self {
            omega,
            level,
            energy: normal_energy(omega, i64::from(level))?,
        })
    }
}

/// `omega (n + 1/2)`.
pub fn normal_energy(omega: f64, n: i64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    if n < 0 {
        return Err(Error::Domain(format!("oscillator level must be >= 0, got {n}")));
    }
    Ok(omega * (n as f64 + 0.5))
}

/// Compares the confinement with the `A3 d_q ln chi_n` term that separation
/// neglects, at the oscillator width `q* = omega^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecouplingReport {
    pub omega: f64,
    pub q_star: f64,
    pub confinement: f64,
    pub max_normal_field: f64,
    pub neglected_term: f64,
    /// `confinement / neglected_term`; infinite when `A3` vanishes.
    pub ratio: f64,
    pub passed: bool,
}

pub const DECOUPLING_THRESHOLD: f64 = 100.0;

pub fn decoupling_check(
    omega: f64,
    field: &VectorPotentialSpec,
    profile: &SurfaceProfile,
    grid: &RadialGrid,
) -> Result<DecouplingReport> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let q_star = omega.powf(-0.5);
    let confinement = 0.5 * omega * omega * q_star * q_star;
    // ground-state Gaussian: d_q ln chi = -omega q
    let log_derivative = omega * q_star;
    let mut max_a3: f64 = 0.0;
    for rho in grid.nodes() {
        max_a3 = max_a3.max(field.components(profile, rho, 0.0)?.a3.abs());
    }
    let neglected_term = max_a3 * log_derivative;
    let ratio = if neglected_term == 0.0 {
        f64::INFINITY
    } else {
        confinement / neglected_term
    };
    Ok(DecouplingReport {
        omega,
        q_star,
        confinement,
        max_normal_field: max_a3,
        neglected_term,
        ratio,
        passed: ratio >= DECOUPLING_THRESHOLD,
    })
}
