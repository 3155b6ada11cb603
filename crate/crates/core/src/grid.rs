use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Uniform interior grid on `(0, rho_max)`: nodes `rho_j = j * spacing` for
/// `j = 1..=n_points`, with `spacing = rho_max / (n_points + 1)`. Neither the
/// axis nor the outer wall carries a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    n_points: usize,
    rho_max: f64,
    spacing: f64,
}

impl RadialGrid {
    pub fn new(n_points: usize, rho_max: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(rho_max.is_finite() && rho_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "rho_max must be positive and finite, got {rho_max}"
            )));
        }
        Ok(Self {
            n_points,
            rho_max,
            spacing: rho_max / (n_points as f64 + 1.0),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Radius of the zero-based node `i` (that is, `rho_{i+1}`).
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.node(i))
    }
}
