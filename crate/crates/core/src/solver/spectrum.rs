//! Eigenpairs of the tangential operator with the smallest real parts.
//!
//! Small grids go through a dense complex eigendecomposition. Larger grids use
//! block shift-and-invert subspace iteration on the tridiagonal matrix with a
//! real shift below the Gershgorin disc bound. Either way every pair is
//! polished by inverse iteration and checked against the residual contract
//! before it is returned.

use std::cmp::Ordering;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::TangentialOperator;
use crate::solver::hermiticity::hermiticity_report;
use crate::tridiag::Tridiagonal;

/// Largest dimension handled by the dense decomposition.
pub const DENSE_LIMIT: usize = 512;

/// Every returned pair satisfies `|Mv - lambda v| / |v|` below this.
pub const RESIDUAL_TOL: f64 = 1e-8;

const MAX_ITERATIONS: usize = 1000;
const SEED: u64 = 0x6375_7276_6261_6e64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Dense,
    ShiftInvert { iterations: usize },
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub m: i32,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// One vector per eigenvalue, unit norm under the surface measure, phase
    /// fixed so the largest component is real and positive.
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    /// The operator was self-adjoint under the surface measure, so eigenvalues
    /// are weighted Rayleigh quotients and exactly real.
    pub hermitian: bool,
    pub method: SolveMethod,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn by_real_then_imag(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn residual(mat: &Tridiagonal, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = mat.matvec(v);
    let r: f64 = mv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / norm2(v)
}

fn rayleigh(op: &TangentialOperator, hermitian: bool, v: &[Complex64]) -> Complex64 {
    let mv = op.matrix().matvec(v);
    if hermitian {
        Complex64::new((op.inner(v, &mv) / op.inner(v, v)).re, 0.0)
    } else {
        dot(v, &mv) / dot(v, v)
    }
}

/// The `k` eigenpairs of `op` with the smallest real parts.
pub fn eigen_solve(op: &TangentialOperator, k: usize) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from a {n}-point operator"
        )));
    }
    let hermitian = hermiticity_report(op).is_hermitian;
    let (candidates, method) = if n <= DENSE_LIMIT {
        (dense_candidates(op.matrix(), k)?, SolveMethod::Dense)
    } else {
        let (c, iterations) = subspace_candidates(op.matrix(), k)?;
        (c, SolveMethod::ShiftInvert { iterations })
    };

    let mut pairs = Vec::with_capacity(k);
    for (lambda, v) in candidates {
        let (lambda, v, r) = polish(op, hermitian, lambda, v)?;
        if !(r < RESIDUAL_TOL) {
            return Err(Error::Convergence {
                iterations: match method {
                    SolveMethod::Dense => 0,
                    SolveMethod::ShiftInvert { iterations } => iterations,
                },
                residual: r,
            });
        }
        pairs.push((lambda, fix_phase(op.normalized(&v)?), r));
    }
    pairs.sort_by(|a, b| by_real_then_imag(&a.0, &b.0));

    Ok(Spectrum {
        m: op.m(),
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.1).collect(),
        hermitian,
        method,
    })
}

fn fix_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let phase = v[best] / v[best].norm();
    for a in v.iter_mut() {
        *a /= phase;
    }
    v
}

/// Inverse iteration at the current estimate; two steps reach the rounding
/// floor from any reasonable start.
fn polish(
    op: &TangentialOperator,
    hermitian: bool,
    lambda: Complex64,
    v: Vec<Complex64>,
) -> Result<(Complex64, Vec<Complex64>, f64)> {
    let mat = op.matrix();
    let nv = norm2(&v);
    let mut v: Vec<Complex64> = v.iter().map(|a| a / nv).collect();
    // keep whichever starting estimate fits v better
    let rq = rayleigh(op, hermitian, &v);
    let (mut lambda, mut r) = {
        let (a, b) = (residual(mat, rq, &v), residual(mat, lambda, &v));
        if a <= b {
            (rq, a)
        } else {
            (lambda, b)
        }
    };
    for _ in 0..2 {
        let scale = mat.norm_inf().max(1.0);
        let shift = lambda + Complex64::new(scale * 1e-14, 0.0);
        let lu = match mat.scaled_plus_identity(Complex64::new(1.0, 0.0), -shift).lu() {
            Ok(lu) => lu,
            Err(_) => break,
        };
        let mut w = v.clone();
        lu.solve_in_place(&mut w);
        let nw = norm2(&w);
        if !(nw.is_finite() && nw > 0.0) {
            break;
        }
        let w: Vec<Complex64> = w.iter().map(|a| a / nw).collect();
        let mu = rayleigh(op, hermitian, &w);
        let rw = residual(mat, mu, &w);
        if rw <= r {
            v = w;
            lambda = mu;
            r = rw;
        }
    }
    Ok((lambda, v, r))
}

fn dense_candidates(mat: &Tridiagonal, k: usize) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let n = mat.dim();
    let a = Mat::<Complex64>::from_fn(n, n, |i, j| mat.get(i, j));
    let evd = a.eigen().map_err(|e| {
        log::error!("dense eigendecomposition failed: {e:?}");
        Error::Convergence {
            iterations: 0,
            residual: f64::NAN,
        }
    })?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| by_real_then_imag(&s[x], &s[y]));
    Ok(order
        .into_iter()
        .take(k)
        .map(|c| (s[c], (0..n).map(|i| u[(i, c)]).collect()))
        .collect())
}

/// Lower bound on the real part of the spectrum from Gershgorin discs.
fn gershgorin_floor(mat: &Tridiagonal) -> f64 {
    let n = mat.dim();
    (0..n)
        .map(|i| {
            let mut radius = 0.0;
            if i > 0 {
                radius += mat.lower[i - 1].norm();
            }
            if i + 1 < n {
                radius += mat.upper[i].norm();
            }
            mat.diag[i].re - radius
        })
        .fold(f64::INFINITY, f64::min)
}

fn orthonormalize(block: &mut [Vec<Complex64>], rng: &mut ChaCha8Rng) {
    for c in 0..block.len() {
        for _attempt in 0..3 {
            for _pass in 0..2 {
                for prev in 0..c {
                    let (head, tail) = block.split_at_mut(c);
                    let proj = dot(&head[prev], &tail[0]);
                    for (x, q) in tail[0].iter_mut().zip(&head[prev]) {
                        *x -= proj * q;
                    }
                }
            }
            let nrm = norm2(&block[c]);
            if nrm > 1e-200 && nrm.is_finite() {
                for x in block[c].iter_mut() {
                    *x /= nrm;
                }
                break;
            }
            // collapsed column: restart it from noise
            for x in block[c].iter_mut() {
                *x = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
}

fn subspace_candidates(
    mat: &Tridiagonal,
    k: usize,
) -> Result<(Vec<(Complex64, Vec<Complex64>)>, usize)> {
    let n = mat.dim();
    let p = (2 * k).max(k + 8).min(n);
    let floor = gershgorin_floor(mat);
    let sigma = floor - 1e-3 * floor.abs().max(1.0);
    let lu = mat
        .scaled_plus_identity(Complex64::new(1.0, 0.0), Complex64::new(-sigma, 0.0))
        .lu()?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut block: Vec<Vec<Complex64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    orthonormalize(&mut block, &mut rng);

    let mut worst = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        for col in block.iter_mut() {
            lu.solve_in_place(col);
        }
        orthonormalize(&mut block, &mut rng);

        // Rayleigh-Ritz on span(block)
        let applied: Vec<Vec<Complex64>> = block.iter().map(|q| mat.matvec(q)).collect();
        let h = Mat::<Complex64>::from_fn(p, p, |a, b| dot(&block[a], &applied[b]));
        let evd = h.eigen().map_err(|_| Error::Convergence {
            iterations: iteration,
            residual: worst,
        })?;
        let theta = evd.S();
        let s = evd.U();

        let combine = |source: &[Vec<Complex64>], c: usize| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (b, col) in source.iter().enumerate() {
                let coef = s[(b, c)];
                for (o, x) in out.iter_mut().zip(col) {
                    *o += coef * x;
                }
            }
            out
        };

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&x, &y| by_real_then_imag(&theta[x], &theta[y]));

        let ritz: Vec<Vec<Complex64>> = order.iter().map(|&c| combine(&block, c)).collect();
        worst = 0.0;
        for (slot, &c) in order.iter().take(k).enumerate() {
            let mx = combine(&applied, c);
            let x = &ritz[slot];
            let r = mx
                .iter()
                .zip(x)
                .map(|(a, b)| (a - theta[c] * b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / norm2(x);
            worst = worst.max(r / theta[c].norm().max(1.0));
        }
        if worst < 1e-9 {
            let pairs = order
                .iter()
                .take(k)
                .zip(ritz)
                .map(|(&c, v)| (theta[c], v))
                .collect();
            return Ok((pairs, iteration));
        }
        block = ritz;
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        residual: worst,
    })
}
