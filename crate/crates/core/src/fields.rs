//! Static, axisymmetric vector potentials expressed in the surface frame.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{eval_geometry, position, scale_factors, SurfaceProfile};
use crate::grid::RadialGrid;

/// Step for the normal derivative in [`divergence`].
pub const Q_STEP: f64 = 1e-5;

type FrameFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;
type CartesianFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// Physical components of `A` along `(e1, e2, e3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameComponents {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl FrameComponents {
    pub fn squared_norm(&self) -> f64 {
        self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSource {
    FrameGiven,
    CartesianProjected,
}

/// Closed support interval `[start, end]` in `rho`; the field vanishes outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaInterval {
    pub start: f64,
    pub end: f64,
}

impl GammaInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && start <= end) {
            return Err(Error::InvalidArgument(format!(
                "gamma interval must satisfy 0 <= start <= end, got [{start}, {end}]"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.start && rho <= self.end
    }
}

#[derive(Clone)]
enum Representation {
    Frame(FrameFn),
    Cartesian(CartesianFn),
}

/// A vector potential with no `phi` dependence. Frame-given fields are
/// functions of `(rho, q)`; Cartesian fields are projected onto the frame at
/// `phi = 0`, which for an axisymmetric field is representative of every `phi`.
#[derive(Clone)]
pub struct VectorPotentialSpec {
    label: String,
    repr: Representation,
    region: Option<GammaInterval>,
}

impl fmt::Debug for VectorPotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorPotentialSpec")
            .field("label", &self.label)
            .field("source", &self.source())
            .field("region", &self.region)
            .finish()
    }
}

impl VectorPotentialSpec {
    pub fn zero() -> Self {
        Self::frame_synthetic(0.0, 0.0, 0.0).labelled("zero")
    }

    /// Symmetric gauge of a uniform field `B` along the axis,
    /// `A = (B/2)(-y, x, 0)`.
    pub fn axial_uniform(b: f64) -> Self {
        Self::from_cartesian_fn(format!("axial-uniform(B={b})"), move |x| {
            [-0.5 * b * x[1], 0.5 * b * x[0], 0.0]
        })
    }

    /// The constant Cartesian field `(0, 0, c)`.
    pub fn cartesian_constant(c: f64) -> Self {
        Self::from_cartesian_fn(format!("cartesian-constant(c={c})"), move |_| [0.0, 0.0, c])
    }

    /// Constant frame components, typically combined with [`Self::with_region`].
    pub fn frame_synthetic(a1: f64, a2: f64, a3: f64) -> Self {
        Self::from_frame_fn(format!("frame-synthetic({a1}, {a2}, {a3})"), move |_, _| {
            [a1, a2, a3]
        })
    }

    pub fn from_frame_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            repr: Representation::Frame(Arc::new(f)),
            region: None,
        }
    }

    pub fn from_cartesian_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            repr: Representation::Cartesian(Arc::new(f)),
            region: None,
        }
    }

    pub fn with_region(mut self, region: GammaInterval) -> Self {
        self.region = Some(region);
        self
    }

    fn labelled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn region(&self) -> Option<GammaInterval> {
        self.region
    }

    pub fn source(&self) -> FieldSource {
        match self.repr {
            Representation::Frame(_) => FieldSource::FrameGiven,
            Representation::Cartesian(_) => FieldSource::CartesianProjected,
        }
    }

    /// `(A1, A2, A3)` at `(rho, q)` on `profile`.
    pub fn components(&self, profile: &SurfaceProfile, rho: f64, q: f64) -> Result<FrameComponents> {
        if let Some(region) = self.region {
            if !region.contains(rho) {
                return Ok(FrameComponents::default());
            }
        }
        let c = match &self.repr {
            Representation::Frame(f) => {
                let [a1, a2, a3] = f(rho, q);
                FrameComponents { a1, a2, a3 }
            }
            Representation::Cartesian(f) => project_to_frame(f.as_ref(), profile, rho, 0.0, q)?,
        };
        if !(c.a1.is_finite() && c.a2.is_finite() && c.a3.is_finite()) {
            return Err(Error::Evaluation {
                profile: profile.name().to_string(),
                quantity: "vector potential",
                rho,
            });
        }
        Ok(c)
    }
}

/// Projects a Cartesian field evaluated at `x(rho, phi, q)` onto the local frame.
pub fn project_to_frame(
    cartesian_field: &(dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync),
    profile: &SurfaceProfile,
    rho: f64,
    phi: f64,
    q: f64,
) -> Result<FrameComponents> {
    let sample = eval_geometry(profile, rho)?;
    if !sample.valid_q_range.contains(q) {
        return Err(Error::ChartDegenerate {
            rho,
            q,
            f: sample.jacobian_factor(q),
        });
    }
    let x = position(profile, rho, phi, q)?;
    let a = cartesian_field(x);
    let frame = sample.frame_at(phi);
    let dot = |e: [f64; 3]| a[0] * e[0] + a[1] * e[1] + a[2] * e[2];
    Ok(FrameComponents {
        a1: dot(frame.e1),
        a2: dot(frame.e2),
        a3: dot(frame.e3),
    })
}

/// Divergence of an axisymmetric field in the `(rho, phi, q)` coordinates,
/// `(1 / h1 h2) [d_rho(h2 A1) + d_q(h1 h2 A3)]`, by central differences with
/// step `h_rho` in `rho` and [`Q_STEP`] in `q`. One-sided second-order stencils
/// are used where a central one would leave `[0, rho_max]`.
pub fn divergence(
    field: &VectorPotentialSpec,
    profile: &SurfaceProfile,
    rho: f64,
    q: f64,
    h_rho: f64,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "divergence needs rho > 0 (the measure vanishes on the axis), got {rho}"
        )));
    }
    if !(h_rho > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h_rho}")));
    }
    let here = scale_factors(&eval_geometry(profile, rho)?, q)?;

    let radial_flux = |r: f64| -> Result<f64> {
        let a = field.components(profile, r, q)?;
        if a.a1 == 0.0 {
            return Ok(0.0);
        }
        let s = scale_factors(&eval_geometry(profile, r)?, q)?;
        Ok(s.h2 * a.a1)
    };
    let normal_flux = |qq: f64| -> Result<f64> {
        let a = field.components(profile, rho, qq)?;
        if a.a3 == 0.0 {
            return Ok(0.0);
        }
        let s = scale_factors(&eval_geometry(profile, rho)?, qq)?;
        Ok(s.h1 * s.h2 * a.a3)
    };

    let rho_max = profile.rho_max() * (1.0 + 1e-12);
    let d_rho = if rho - h_rho >= 0.0 && rho + h_rho <= rho_max {
        (radial_flux(rho + h_rho)? - radial_flux(rho - h_rho)?) / (2.0 * h_rho)
    } else if rho + 2.0 * h_rho <= rho_max {
        (-3.0 * radial_flux(rho)? + 4.0 * radial_flux(rho + h_rho)? - radial_flux(rho + 2.0 * h_rho)?)
            / (2.0 * h_rho)
    } else {
        (3.0 * radial_flux(rho)? - 4.0 * radial_flux(rho - h_rho)? + radial_flux(rho - 2.0 * h_rho)?)
            / (2.0 * h_rho)
    };
    let d_q = (normal_flux(q + Q_STEP)? - normal_flux(q - Q_STEP)?) / (2.0 * Q_STEP);
    Ok((d_rho + d_q) / (here.h1 * here.h2))
}

/// Outcome of a gauge scan on the surface (`q = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    pub passed: bool,
    pub tolerance: f64,
    pub max_violation: f64,
    pub at_rho: f64,
    /// `(rho, divergence)` per grid node; `NaN` where evaluation failed.
    pub divergence: Vec<(f64, f64)>,
    pub failures: Vec<String>,
}

/// Checks `div A = 0` at every node of `grid`. Evaluation failures are recorded
/// in the report and make the check fail; they are never propagated.
pub fn is_coulomb_gauge(
    field: &VectorPotentialSpec,
    profile: &SurfaceProfile,
    grid: &RadialGrid,
    tol: f64,
) -> GaugeReport {
    let mut report = GaugeReport {
        passed: true,
        tolerance: tol,
        max_violation: 0.0,
        at_rho: grid.node(0),
        divergence: Vec::with_capacity(grid.n_points()),
        failures: Vec::new(),
    };
    for rho in grid.nodes() {
        let (value, violation) = match divergence(field, profile, rho, 0.0, grid.spacing()) {
            Ok(d) if d.is_finite() => (d, d.abs()),
            Ok(d) => (d, f64::INFINITY),
            Err(e) => {
                report.failures.push(format!("rho = {rho}: {e}"));
                (f64::NAN, f64::INFINITY)
            }
        };
        if violation > report.max_violation {
            report.max_violation = violation;
            report.at_rho = rho;
        }
        report.divergence.push((rho, value));
    }
    report.passed = report.max_violation <= tol;
    report
}

/// `A3(rho, 0) * H(rho)` at every node.
pub fn coupling_profile(
    field: &VectorPotentialSpec,
    profile: &SurfaceProfile,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    grid.nodes()
        .map(|rho| {
            let a3 = field.components(profile, rho, 0.0)?.a3;
            Ok(a3 * eval_geometry(profile, rho)?.mean_curvature)
        })
        .collect()
}
