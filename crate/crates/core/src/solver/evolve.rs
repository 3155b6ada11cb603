use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::TangentialOperator;

/// How far the initial state's surface norm may sit from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// A norm change by more than this factor in a single step is reported.
pub const STEP_GROWTH_WARNING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    /// `t_k = k dt` for `k = 0..=steps`.
    pub times: Vec<f64>,
    /// Surface norm `sqrt(sum |chi|^2 rho Z d rho)` at every time.
    pub norms: Vec<f64>,
    /// `<e A3 H>` weighted by `|chi|^2` under the surface measure.
    pub mean_coupling: Vec<f64>,
    pub state_times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    /// Least-squares slope of `ln norm` against `t`.
    pub log_norm_slope: f64,
    pub warnings: Vec<String>,
}

impl EvolutionTrace {
    pub fn final_norm_ratio(&self) -> f64 {
        self.norms[self.norms.len() - 1] / self.norms[0]
    }
}

/// Crank-Nicolson propagation of `i d_t chi = M chi`, keeping every state.
pub fn evolve(
    op: &TangentialOperator,
    initial: &[Complex64],
    dt: f64,
    steps: usize,
) -> Result<EvolutionTrace> {
    evolve_with_stride(op, initial, dt, steps, 1)
}

/// As [`evolve`], but stores a state only every `stride` steps (and at the
/// final step). Norms are recorded at every step regardless.
pub fn evolve_with_stride(
    op: &TangentialOperator,
    initial: &[Complex64],
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<EvolutionTrace> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if steps == 0 || stride == 0 {
        return Err(Error::InvalidArgument("steps and stride must be at least 1".into()));
    }
    if initial.len() != op.dim() {
        return Err(Error::InvalidArgument(format!(
            "state has {} components, operator has {}",
            initial.len(),
            op.dim()
        )));
    }
    let norm0 = op.surface_norm(initial);
    if !((norm0 - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::InvalidArgument(format!(
            "initial state must have unit surface norm, got {norm0}"
        )));
    }

    let tau = Complex64::new(0.0, 0.5 * dt);
    let one = Complex64::new(1.0, 0.0);
    let implicit = op.matrix().scaled_plus_identity(tau, one).lu()?;
    let explicit = op.matrix().scaled_plus_identity(-tau, one);
    let coupling = op.coupling();
    let weights = op.measure_weights();

    let mean_coupling = |chi: &[Complex64]| -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((a, w), c) in chi.iter().zip(weights).zip(&coupling) {
            let p = a.norm_sqr() * w;
            num += p * c;
            den += p;
        }
        num / den
    };

    let mut chi = initial.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); chi.len()];
    let mut trace = EvolutionTrace {
        times: vec![0.0],
        norms: vec![norm0],
        mean_coupling: vec![mean_coupling(&chi)],
        state_times: vec![0.0],
        states: vec![chi.clone()],
        log_norm_slope: 0.0,
        warnings: Vec::new(),
    };

    for step in 1..=steps {
        explicit.matvec_into(&chi, &mut next);
        implicit.solve_in_place(&mut next);
        std::mem::swap(&mut chi, &mut next);

        let t = step as f64 * dt;
        let norm = op.surface_norm(&chi);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Unstable { step, norm });
        }
        let prev = trace.norms[trace.norms.len() - 1];
        let growth = norm / prev;
        if !(1.0 / STEP_GROWTH_WARNING..=STEP_GROWTH_WARNING).contains(&growth) {
            let msg = format!("norm changed by a factor {growth:.3e} at step {step}");
            log::warn!("{msg}");
            trace.warnings.push(msg);
        }
        trace.times.push(t);
        trace.norms.push(norm);
        trace.mean_coupling.push(mean_coupling(&chi));
        if step % stride == 0 || step == steps {
            trace.state_times.push(t);
            trace.states.push(chi.clone());
        }
    }

    let logs: Vec<f64> = trace.norms.iter().map(|n| n.ln()).collect();
    trace.log_norm_slope = least_squares_slope(&trace.times, &logs);
    Ok(trace)
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::VectorPotentialSpec;
    use crate::geometry::SurfaceProfile;
    use crate::grid::RadialGrid;
    use crate::operator::{build_tangential, OperatorMode};
    use crate::solver::eigen_solve;

    fn disc(n: usize) -> TangentialOperator {
        let p = SurfaceProfile::flat(1.0).unwrap();
        let g = RadialGrid::new(n, 1.0).unwrap();
        build_tangential(&p, &VectorPotentialSpec::zero(), 0, &g, OperatorMode::default(), 1.0).unwrap()
    }

    #[test]
    fn slope_fit_is_exact_on_lines() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.5, 6.0, 8.5];
        assert!((least_squares_slope(&x, &y) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn hermitian_generator_conserves_norm() {
        let op = disc(64);
        let bump: Vec<Complex64> = op
            .grid()
            .nodes()
            .map(|r| Complex64::new((-(r * r) / 0.1).exp(), 0.3 * r))
            .collect();
        let init = op.normalized(&bump).unwrap();
        let trace = evolve_with_stride(&op, &init, 1e-3, 2000, 500).unwrap();
        let drift = trace.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-9, "{drift}");
        assert!(trace.log_norm_slope.abs() < 1e-9);
        assert_eq!(trace.states.len(), 5);
        assert!(trace.warnings.is_empty());
    }

    #[test]
    fn uniform_imaginary_shift_grows_and_decays() {
        let op = disc(100);
        let ground = eigen_solve(&op, 1).unwrap().eigenvectors[0].clone();
        for c in [0.2, -0.2] {
            let gen = op.shifted(Complex64::new(0.0, c));
            let trace = evolve_with_stride(&gen, &ground, 1e-3, 1000, 1000).unwrap();
            assert!(((trace.log_norm_slope - c) / c).abs() < 1e-4);
            assert!((trace.final_norm_ratio() - c.exp()).abs() < 1e-4 * c.exp());
            assert!((trace.mean_coupling[0] - c).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let op = disc(16);
        let v = vec![Complex64::new(1.0, 0.0); 16];
        assert!(evolve(&op, &v, 1e-3, 10).is_err());
        let u = op.normalized(&v).unwrap();
        assert!(evolve(&op, &u, 0.0, 10).is_err());
        assert!(evolve(&op, &u, 1e-3, 0).is_err());
        assert!(evolve(&op, &u[..8], 1e-3, 10).is_err());
    }

    #[test]
    fn violent_growth_is_flagged() {
        let op = disc(16).shifted(Complex64::new(0.0, 50.0));
        let u = op.normalized(&vec![Complex64::new(1.0, 0.0); 16]).unwrap();
        // amplification (1 + dt c/2) / (1 - dt c/2) = 39 for the slow modes
        let trace = evolve(&op, &u, 0.038, 3).unwrap();
        assert!(!trace.warnings.is_empty());
    }
}
