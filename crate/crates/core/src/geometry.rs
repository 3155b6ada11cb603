//! Differential geometry of a surface of revolution `z = S(rho)`.
//!
//! Points near the surface are addressed by `(rho, phi, q)` where `q` is the
//! signed offset along the unit normal `e3`. Curvatures follow the sign
//! convention `H = -(kappa_1 + kappa_2) / 2`, so a cap that bends downward
//! (towards `-z`) away from the axis has positive `H`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Below `AXIS_EPS * rho_max` the ratio `S_rho / rho` is replaced by its axis
/// limit `S_rhorho(0)`.
pub const AXIS_EPS: f64 = 1e-8;

/// Relative step used when derivatives come from central differences.
pub const FD_STEP: f64 = 1e-5;

/// `F(q)` must stay above this value for `q` to be inside the usable chart.
pub const CHART_FLOOR: f64 = 0.01;

/// Built-in generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// `S = 0`.
    Flat,
    /// `S = a rho^2`.
    Paraboloid { a: f64 },
    /// `S = amplitude * exp(-rho^2 / sigma^2)`.
    GaussianBump { amplitude: f64, sigma: f64 },
    /// `S = sqrt(radius^2 - rho^2) - radius`; umbilic everywhere.
    SphereCap { radius: f64 },
}

impl ProfileShape {
    fn name(&self) -> &'static str {
        match self {
            ProfileShape::Flat => "flat",
            ProfileShape::Paraboloid { .. } => "paraboloid",
            ProfileShape::GaussianBump { .. } => "gaussian-bump",
            ProfileShape::SphereCap { .. } => "sphere-cap",
        }
    }

    fn height(&self, rho: f64) -> f64 {
        match *self {
            ProfileShape::Flat => 0.0,
            ProfileShape::Paraboloid { a } => a * rho * rho,
            ProfileShape::GaussianBump { amplitude, sigma } => {
                amplitude * (-(rho * rho) / (sigma * sigma)).exp()
            }
            ProfileShape::SphereCap { radius } => (radius * radius - rho * rho).sqrt() - radius,
        }
    }

    fn analytic(&self, rho: f64) -> ProfileDerivatives {
        match *self {
            ProfileShape::Flat => ProfileDerivatives {
                s: 0.0,
                s_rho: 0.0,
                s_rhorho: 0.0,
            },
            ProfileShape::Paraboloid { a } => ProfileDerivatives {
                s: a * rho * rho,
                s_rho: 2.0 * a * rho,
                s_rhorho: 2.0 * a,
            },
            ProfileShape::GaussianBump { amplitude, sigma } => {
                let s2 = sigma * sigma;
                let s = amplitude * (-(rho * rho) / s2).exp();
                ProfileDerivatives {
                    s,
                    s_rho: -2.0 * rho / s2 * s,
                    s_rhorho: (-2.0 / s2 + 4.0 * rho * rho / (s2 * s2)) * s,
                }
            }
            ProfileShape::SphereCap { radius } => {
                let w = (radius * radius - rho * rho).sqrt();
                ProfileDerivatives {
                    s: w - radius,
                    s_rho: -rho / w,
                    s_rhorho: -(radius * radius) / (w * w * w),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// `S` and its first two derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDerivatives {
    pub s: f64,
    pub s_rho: f64,
    pub s_rhorho: f64,
}

#[derive(Clone)]
enum Generator {
    Catalog(ProfileShape),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// The generator `S(rho)` of an axially symmetric surface on `[0, rho_max]`.
#[derive(Clone)]
pub struct SurfaceProfile {
    name: String,
    rho_max: f64,
    source: DerivativeSource,
    generator: Generator,
}

impl fmt::Debug for SurfaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("SurfaceProfile");
        d.field("name", &self.name)
            .field("rho_max", &self.rho_max)
            .field("source", &self.source);
        if let Generator::Catalog(shape) = &self.generator {
            d.field("shape", shape);
        }
        d.finish()
    }
}

impl SurfaceProfile {
    /// A catalog profile with analytic derivatives.
    pub fn new(shape: ProfileShape, rho_max: f64) -> Result<Self> {
        check_rho_max(rho_max)?;
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{what} must be finite")))
            }
        };
        match shape {
            ProfileShape::Flat => {}
            ProfileShape::Paraboloid { a } => finite(a, "paraboloid coefficient")?,
            ProfileShape::GaussianBump { amplitude, sigma } => {
                finite(amplitude, "bump amplitude")?;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "bump width must be positive, got {sigma}"
                    )));
                }
            }
            ProfileShape::SphereCap { radius } => {
                // the finite-difference stencil may reach slightly past rho_max
                if !(radius.is_finite() && radius > rho_max * (1.0 + 2.0 * FD_STEP)) {
                    return Err(Error::InvalidArgument(format!(
                        "sphere cap needs radius > rho_max, got radius {radius}, rho_max {rho_max}"
                    )));
                }
            }
        }
        Ok(Self {
            name: shape.name().to_string(),
            rho_max,
            source: DerivativeSource::Analytic,
            generator: Generator::Catalog(shape),
        })
    }

    pub fn flat(rho_max: f64) -> Result<Self> {
        Self::new(ProfileShape::Flat, rho_max)
    }

    pub fn paraboloid(a: f64, rho_max: f64) -> Result<Self> {
        Self::new(ProfileShape::Paraboloid { a }, rho_max)
    }

    pub fn gaussian_bump(amplitude: f64, sigma: f64, rho_max: f64) -> Result<Self> {
        Self::new(ProfileShape::GaussianBump { amplitude, sigma }, rho_max)
    }

    pub fn sphere_cap(radius: f64, rho_max: f64) -> Result<Self> {
        Self::new(ProfileShape::SphereCap { radius }, rho_max)
    }

    /// A user-supplied generator. Derivatives are always taken by central
    /// differences with step `FD_STEP * rho_max`; `S` is extended evenly
    /// across the axis.
    pub fn from_fn<F>(name: impl Into<String>, rho_max: f64, height: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_rho_max(rho_max)?;
        Ok(Self {
            name: name.into(),
            rho_max,
            source: DerivativeSource::FiniteDifference,
            generator: Generator::Custom(Arc::new(height)),
        })
    }

    /// The same surface, differentiated numerically.
    pub fn with_finite_differences(mut self) -> Self {
        self.source = DerivativeSource::FiniteDifference;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        self.source
    }

    pub fn shape(&self) -> Option<ProfileShape> {
        match &self.generator {
            Generator::Catalog(shape) => Some(*shape),
            Generator::Custom(_) => None,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.generator, Generator::Catalog(ProfileShape::Flat))
    }

    fn raw_height(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        match &self.generator {
            Generator::Catalog(shape) => shape.height(rho),
            Generator::Custom(f) => f(rho),
        }
    }

    /// `S`, `S_rho`, `S_rhorho` at `rho`.
    pub fn derivatives(&self, rho: f64) -> Result<ProfileDerivatives> {
        self.check_domain(rho)?;
        let d = match (&self.generator, self.source) {
            (Generator::Catalog(shape), DerivativeSource::Analytic) => shape.analytic(rho),
            _ => {
                let h = FD_STEP * self.rho_max;
                let s = self.raw_height(rho);
                let plus = self.raw_height(rho + h);
                let minus = self.raw_height(rho - h);
                ProfileDerivatives {
                    s,
                    s_rho: (plus - minus) / (2.0 * h),
                    s_rhorho: (plus - 2.0 * s + minus) / (h * h),
                }
            }
        };
        for (quantity, v) in [("S", d.s), ("S_rho", d.s_rho), ("S_rhorho", d.s_rhorho)] {
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    profile: self.name.clone(),
                    quantity,
                    rho,
                });
            }
        }
        Ok(d)
    }

    fn check_domain(&self, rho: f64) -> Result<()> {
        // grid nodes are built as j * spacing and can overshoot rho_max by an ulp
        let slack = 1e-12 * self.rho_max;
        if !(rho >= 0.0 && rho <= self.rho_max + slack) {
            return Err(Error::Domain(format!(
                "rho = {rho} outside [0, {}] for profile `{}`",
                self.rho_max, self.name
            )));
        }
        Ok(())
    }
}

fn check_rho_max(rho_max: f64) -> Result<()> {
    if rho_max.is_finite() && rho_max > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "rho_max must be positive and finite, got {rho_max}"
        )))
    }
}

/// Orthonormal frame `(e1, e2, e3)` in Cartesian components. `e1` is the
/// meridional tangent, `e2` the azimuthal tangent and `e3` the normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub e3: [f64; 3],
}

impl Frame {
    fn from_slope(s_rho: f64, phi: f64) -> Self {
        let z = (1.0 + s_rho * s_rho).sqrt();
        let (sin, cos) = phi.sin_cos();
        Frame {
            e1: [cos / z, sin / z, s_rho / z],
            e2: [-sin, cos, 0.0],
            e3: [-s_rho * cos / z, -s_rho * sin / z, 1.0 / z],
        }
    }

    pub fn vectors(&self) -> [[f64; 3]; 3] {
        [self.e1, self.e2, self.e3]
    }
}

/// Open interval of normal offsets on which `F(q) > CHART_FLOOR`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRange {
    pub lower: f64,
    pub upper: f64,
}

impl QRange {
    pub fn contains(&self, q: f64) -> bool {
        q > self.lower && q < self.upper
    }
}

/// Everything the operator needs to know about one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub rho: f64,
    pub s_rho: f64,
    pub s_rhorho: f64,
    /// Metric factor `sqrt(1 + S_rho^2)`.
    pub z: f64,
    /// Meridional principal curvature `S_rhorho / Z^3`.
    pub kappa_meridian: f64,
    /// Azimuthal principal curvature `S_rho / (rho Z)`, regularised on the axis.
    pub kappa_azimuth: f64,
    pub mean_curvature: f64,
    pub gaussian_curvature: f64,
    /// Frame at `phi = 0`; see [`GeometrySample::frame_at`].
    pub frame: Frame,
    pub valid_q_range: QRange,
}

impl GeometrySample {
    /// `H^2 - K`, written as `(kappa_1 - kappa_2)^2 / 4` so it never goes
    /// negative through cancellation.
    pub fn h2_minus_k(&self) -> f64 {
        let d = self.kappa_meridian - self.kappa_azimuth;
        0.25 * d * d
    }

    /// `F(q) = 1 + 2 q H + q^2 K`.
    pub fn jacobian_factor(&self, q: f64) -> f64 {
        1.0 + 2.0 * q * self.mean_curvature + q * q * self.gaussian_curvature
    }

    pub fn frame_at(&self, phi: f64) -> Frame {
        Frame::from_slope(self.s_rho, phi)
    }
}

/// Evaluates `Z`, `H`, `K` and the frame of `profile` at `rho`.
pub fn eval_geometry(profile: &SurfaceProfile, rho: f64) -> Result<GeometrySample> {
    let d = profile.derivatives(rho)?;
    let z = (1.0 + d.s_rho * d.s_rho).sqrt();
    let slope_over_rho = if rho < AXIS_EPS * profile.rho_max() {
        d.s_rhorho
    } else {
        d.s_rho / rho
    };
    let kappa_meridian = d.s_rhorho / (z * z * z);
    let kappa_azimuth = slope_over_rho / z;
    let mean_curvature = -0.5 * (kappa_azimuth + kappa_meridian);
    let gaussian_curvature = kappa_meridian * kappa_azimuth;
    Ok(GeometrySample {
        rho,
        s_rho: d.s_rho,
        s_rhorho: d.s_rhorho,
        z,
        kappa_meridian,
        kappa_azimuth,
        mean_curvature,
        gaussian_curvature,
        frame: Frame::from_slope(d.s_rho, 0.0),
        valid_q_range: q_range(mean_curvature, gaussian_curvature),
    })
}

/// Largest interval around zero where `1 + 2qH + q^2 K > CHART_FLOOR`.
fn q_range(h: f64, k: f64) -> QRange {
    let c = 1.0 - CHART_FLOOR;
    let mut roots = [f64::NAN; 2];
    if k == 0.0 {
        if h != 0.0 {
            roots[0] = -c / (2.0 * h);
        }
    } else {
        // k q^2 + 2 h q + c = 0, stable form
        let disc = h * h - c * k;
        if disc >= 0.0 {
            let t = -(h + h.signum() * disc.sqrt());
            if t != 0.0 {
                roots = [t / k, c / t];
            }
        }
    }
    let mut range = QRange {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    for r in roots.into_iter().filter(|r| r.is_finite()) {
        if r > 0.0 {
            range.upper = range.upper.min(r);
        } else if r < 0.0 {
            range.lower = range.lower.max(r);
        }
    }
    range
}

/// The Cartesian frame at `(rho, phi)`.
pub fn frame_vectors(profile: &SurfaceProfile, rho: f64, phi: f64) -> Result<Frame> {
    let d = profile.derivatives(rho)?;
    Ok(Frame::from_slope(d.s_rho, phi))
}

/// Cartesian position of the point `(rho, phi, q)`, i.e. `r(rho, phi) + q e3`.
pub fn position(profile: &SurfaceProfile, rho: f64, phi: f64, q: f64) -> Result<[f64; 3]> {
    let d = profile.derivatives(rho)?;
    let frame = Frame::from_slope(d.s_rho, phi);
    let (sin, cos) = phi.sin_cos();
    let r = [rho * cos, rho * sin, d.s];
    Ok([
        r[0] + q * frame.e3[0],
        r[1] + q * frame.e3[1],
        r[2] + q * frame.e3[2],
    ])
}

/// Scale factors of the one-forms `(d rho, d phi, dq)` at normal offset `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub q: f64,
}

impl ScaleFactors {
    /// `h1 h2 h3`, the volume element per `d rho d phi dq`.
    pub fn volume(&self) -> f64 {
        self.h1 * self.h2 * self.h3
    }
}

pub fn scale_factors(sample: &GeometrySample, q: f64) -> Result<ScaleFactors> {
    if !sample.valid_q_range.contains(q) {
        return Err(Error::ChartDegenerate {
            rho: sample.rho,
            q,
            f: sample.jacobian_factor(q),
        });
    }
    Ok(ScaleFactors {
        h1: sample.z * (1.0 - q * sample.s_rhorho / (sample.z * sample.z * sample.z)),
        h2: sample.rho - q * sample.s_rho / sample.z,
        h3: 1.0,
        q,
    })
}

/// The geometric potential `-(H^2 - K) / 2`.
pub fn curvature_potential(sample: &GeometrySample) -> f64 {
    -0.5 * sample.h2_minus_k()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn parab() -> SurfaceProfile {
        SurfaceProfile::paraboloid(0.5, 2.0).unwrap()
    }

    fn catalog() -> Vec<SurfaceProfile> {
        vec![
            SurfaceProfile::flat(1.0).unwrap(),
            SurfaceProfile::paraboloid(0.5, 1.5).unwrap(),
            SurfaceProfile::gaussian_bump(0.4, 0.5, 1.5).unwrap(),
            SurfaceProfile::sphere_cap(2.0, 1.5).unwrap(),
        ]
    }

    fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[test]
    fn flat_is_trivial() {
        let p = SurfaceProfile::flat(3.0).unwrap();
        for rho in [0.0, 0.1, 1.7, 3.0] {
            let g = eval_geometry(&p, rho).unwrap();
            assert_eq!(g.z, 1.0);
            assert_eq!(g.mean_curvature, 0.0);
            assert_eq!(g.gaussian_curvature, 0.0);
            assert_eq!(curvature_potential(&g), 0.0);
            assert_eq!(g.valid_q_range.lower, f64::NEG_INFINITY);
            assert_eq!(g.valid_q_range.upper, f64::INFINITY);
        }
    }

    #[test]
    fn paraboloid_at_unit_radius() {
        let g = eval_geometry(&parab(), 1.0).unwrap();
        assert!((g.z - SQRT2).abs() < 1e-15);
        assert!((g.mean_curvature - (-3.0 / (4.0 * SQRT2))).abs() < 1e-15);
        assert!((g.mean_curvature + 0.530330).abs() < 1e-6);
        assert!((g.gaussian_curvature - 0.25).abs() < 1e-15);
        assert!((g.h2_minus_k() - 1.0 / 32.0).abs() < 1e-15);
        let hk = g.mean_curvature.powi(2) - g.gaussian_curvature;
        assert!((hk - 1.0 / 32.0).abs() < 1e-15);
        assert!((curvature_potential(&g) + 0.015625).abs() < 1e-15);
    }

    #[test]
    fn paraboloid_axis_is_umbilic() {
        let g = eval_geometry(&parab(), 0.0).unwrap();
        assert_eq!(g.mean_curvature, -1.0);
        assert_eq!(g.gaussian_curvature, 1.0);
        assert_eq!(g.h2_minus_k(), 0.0);
        assert_eq!(curvature_potential(&g), 0.0);
    }

    #[test]
    fn axis_limits_approached_linearly() {
        for p in catalog() {
            let g0 = eval_geometry(&p, 0.0).unwrap();
            let mut prev = f64::INFINITY;
            for rho in [1e-2, 5e-3, 2.5e-3] {
                let g = eval_geometry(&p, rho).unwrap();
                let err = (g.mean_curvature - g0.mean_curvature).abs()
                    + (g.gaussian_curvature - g0.gaussian_curvature).abs();
                assert!(err <= 50.0 * rho, "{}: {err} at {rho}", p.name());
                assert!(err <= prev);
                prev = err;
            }
        }
    }

    #[test]
    fn analytic_slopes_vanish_on_axis() {
        for p in catalog() {
            assert!(p.derivatives(0.0).unwrap().s_rho.abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_cap_is_umbilic() {
        let p = SurfaceProfile::sphere_cap(2.0, 1.5).unwrap();
        for j in 0..=100 {
            let g = eval_geometry(&p, 1.5 * j as f64 / 100.0).unwrap();
            assert!((g.mean_curvature - 0.5).abs() < 1e-12);
            assert!((g.gaussian_curvature - 0.25).abs() < 1e-12);
            assert!(g.h2_minus_k() < 1e-10);
        }
    }

    #[test]
    fn paraboloid_frame_at_unit_radius() {
        let f = frame_vectors(&parab(), 1.0, 0.0).unwrap();
        let s = 1.0 / SQRT2;
        for (got, want) in f.e1.iter().zip([s, 0.0, s]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in f.e3.iter().zip([-s, 0.0, s]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(f.e2, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn flat_frame_is_cartesian() {
        let f = frame_vectors(&SurfaceProfile::flat(1.0).unwrap(), 0.3, 0.0).unwrap();
        assert_eq!(f.e1, [1.0, 0.0, 0.0]);
        assert_eq!(f.e2, [0.0, 1.0, 0.0]);
        assert_eq!(f.e3, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn frame_orthonormal_on_sample_grid() {
        for p in catalog() {
            for i in 0..100 {
                let rho = p.rho_max() * i as f64 / 99.0;
                for k in 0..16 {
                    let phi = std::f64::consts::TAU * k as f64 / 16.0;
                    let f = frame_vectors(&p, rho, phi).unwrap();
                    let v = f.vectors();
                    for a in 0..3 {
                        for b in 0..3 {
                            let delta = if a == b { 1.0 } else { 0.0 };
                            assert!((dot(v[a], v[b]) - delta).abs() < 1e-12);
                        }
                    }
                    let c = cross(f.e1, f.e2);
                    for (x, y) in c.iter().zip(f.e3) {
                        assert!((x - y).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn scale_factors_on_surface() {
        for p in catalog() {
            let g = eval_geometry(&p, 0.7).unwrap();
            let s = scale_factors(&g, 0.0).unwrap();
            assert_eq!((s.h1, s.h2, s.h3), (g.z, 0.7, 1.0));
        }
        let flat = eval_geometry(&SurfaceProfile::flat(1.0).unwrap(), 0.4).unwrap();
        let s = scale_factors(&flat, 12.5).unwrap();
        assert_eq!((s.h1, s.h2), (1.0, 0.4));
    }

    #[test]
    fn paraboloid_jacobian_at_offset() {
        let g = eval_geometry(&parab(), 1.0).unwrap();
        let s = scale_factors(&g, 0.1).unwrap();
        let f = 1.0 + 2.0 * 0.1 * (-3.0 / (4.0 * SQRT2)) + 0.01 * 0.25;
        assert!((f - 0.896434).abs() < 1e-6);
        assert!((s.h1 * s.h2 - SQRT2 * f).abs() < 1e-14);
        assert!((s.h1 * s.h2 - 1.267749).abs() < 1e-6);
    }

    #[test]
    fn chart_range_brackets_floor() {
        // paraboloid: both principal curvatures positive, F only drops for q > 0
        let g = eval_geometry(&parab(), 1.0).unwrap();
        let r = g.valid_q_range;
        assert_eq!(r.lower, f64::NEG_INFINITY);
        assert!((g.jacobian_factor(r.upper) - CHART_FLOOR).abs() < 1e-12);
        assert!(matches!(
            scale_factors(&g, r.upper * 1.001),
            Err(Error::ChartDegenerate { .. })
        ));

        // saddle point on the flank of a bump: degenerates on both sides
        let bump = SurfaceProfile::gaussian_bump(0.5, 0.5, 1.5).unwrap();
        let g = eval_geometry(&bump, 0.6).unwrap();
        assert!(g.gaussian_curvature < 0.0);
        let r = g.valid_q_range;
        assert!(r.lower.is_finite() && r.upper.is_finite());
        assert!((g.jacobian_factor(r.upper) - CHART_FLOOR).abs() < 1e-12);
        assert!((g.jacobian_factor(r.lower) - CHART_FLOOR).abs() < 1e-12);
        assert!(scale_factors(&g, r.lower * 1.001).is_err());
        assert!(scale_factors(&g, r.lower * 0.999).is_ok());

        let cap = eval_geometry(&SurfaceProfile::sphere_cap(2.0, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(cap.valid_q_range.upper, f64::INFINITY);
        assert!((cap.jacobian_factor(cap.valid_q_range.lower) - CHART_FLOOR).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_track_analytic() {
        let exact = SurfaceProfile::gaussian_bump(0.4, 0.5, 1.5).unwrap();
        let fd = exact.clone().with_finite_differences();
        for rho in [0.0, 0.2, 0.6, 1.4] {
            let a = exact.derivatives(rho).unwrap();
            let b = fd.derivatives(rho).unwrap();
            assert!((a.s_rho - b.s_rho).abs() < 1e-8);
            assert!((a.s_rhorho - b.s_rhorho).abs() < 1e-4);
        }
    }

    #[test]
    fn custom_profile_uses_finite_differences() {
        let p = SurfaceProfile::from_fn("quartic", 1.0, |r| 0.25 * r.powi(4)).unwrap();
        assert_eq!(p.derivative_source(), DerivativeSource::FiniteDifference);
        let d = p.derivatives(0.5).unwrap();
        assert!((d.s_rho - 0.125).abs() < 1e-9);
        assert!((d.s_rhorho - 0.75).abs() < 1e-5);
        assert_eq!(p.derivatives(0.0).unwrap().s_rho, 0.0);
    }

    #[test]
    fn domain_and_evaluation_errors() {
        let p = parab();
        assert!(matches!(eval_geometry(&p, -0.1), Err(Error::Domain(_))));
        assert!(matches!(eval_geometry(&p, 2.1), Err(Error::Domain(_))));
        let bad = SurfaceProfile::from_fn("log", 1.0, |r| r.ln()).unwrap();
        assert!(matches!(
            eval_geometry(&bad, 0.0),
            Err(Error::Evaluation { .. })
        ));
        assert!(SurfaceProfile::sphere_cap(1.0, 1.0).is_err());
        assert!(SurfaceProfile::flat(0.0).is_err());
        assert!(SurfaceProfile::gaussian_bump(1.0, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn curvature_inequality_holds(a in -3.0f64..3.0, rho in 0.0f64..1.0) {
            let p = SurfaceProfile::paraboloid(a, 1.0).unwrap();
            let g = eval_geometry(&p, rho).unwrap();
            prop_assert!(g.z >= 1.0);
            let hk = g.mean_curvature.powi(2) - g.gaussian_curvature;
            prop_assert!(hk >= -1e-14);
            prop_assert!((hk - g.h2_minus_k()).abs() <= 1e-12 * (1.0 + g.mean_curvature.powi(2)));
        }

        #[test]
        fn jacobian_identity(amp in -1.0f64..1.0, sigma in 0.3f64..2.0, rho in 0.0f64..1.0, t in 0.0f64..1.0) {
            let p = SurfaceProfile::gaussian_bump(amp, sigma, 1.0).unwrap();
            let g = eval_geometry(&p, rho).unwrap();
            let r = g.valid_q_range;
            let lo = r.lower.max(-10.0);
            let hi = r.upper.min(10.0);
            let q = lo + (hi - lo) * (0.001 + 0.998 * t);
            let s = scale_factors(&g, q).unwrap();
            let want = rho * g.z * g.jacobian_factor(q);
            prop_assert!((s.h1 * s.h2 - want).abs() <= 1e-12 * want.abs().max(1e-300));
        }
    }
}
