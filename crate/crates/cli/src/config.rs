//! The TOML run configuration.

use serde::{Deserialize, Serialize};

use curvband::{GammaInterval, OperatorMode, SurfaceProfile, VectorPotentialSpec};

use crate::error::{CliError, CliResult};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Flat,
    Paraboloid,
    Gaussian,
    SphereCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    pub rho_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    #[default]
    None,
    AxialUniform,
    CartesianConstant,
    FrameSynthetic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_points: default_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKey {
    AsWritten,
    #[default]
    HermitianCorrected,
}

impl From<ModeKey> for OperatorMode {
    fn from(m: ModeKey) -> Self {
        match m {
            ModeKey::AsWritten => OperatorMode::AsWritten,
            ModeKey::HermitianCorrected => OperatorMode::HermitianCorrected,
        }
    }
}

impl From<OperatorMode> for ModeKey {
    fn from(m: OperatorMode) -> Self {
        match m {
            OperatorMode::AsWritten => ModeKey::AsWritten,
            OperatorMode::HermitianCorrected => ModeKey::HermitianCorrected,
        }
    }
}

/// A fully resolved run configuration. Keys without a value in the file take
/// their defaults during parsing, so serialising and re-parsing is lossless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: ModeKey,
    #[serde(default = "default_charge")]
    pub charge_e: f64,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<i32>,
    #[serde(default = "default_k_eigen")]
    pub k_eigen: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default)]
    pub n_normal: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_output")]
    pub output_path: String,
    #[serde(default = "default_gauge_tol")]
    pub gauge_tol: f64,
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

fn default_points() -> usize {
    1000
}
fn default_charge() -> f64 {
    1.0
}
fn default_m_list() -> Vec<i32> {
    vec![0]
}
fn default_k_eigen() -> usize {
    6
}
fn default_output() -> String {
    ".".into()
}
fn default_gauge_tol() -> f64 {
    1e-10
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("run configs always serialise")
}

fn invalid(field: &str, constraint: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {constraint}"))
}

fn finite(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0, got {v}")))
    }
}

/// Requires `value` exactly when `needed`.
fn param(section: &str, key: &str, kind: &str, value: Option<f64>, needed: bool) -> CliResult<f64> {
    let field = format!("{section}.{key}");
    match (value, needed) {
        (Some(v), true) => finite(&field, v).map(|_| v),
        (None, true) => Err(invalid(&field, format!("required for kind {kind}"))),
        (Some(_), false) => Err(invalid(&field, format!("not used by kind {kind}"))),
        (None, false) => Ok(0.0),
    }
}

impl RunConfig {
    pub fn minimal(kind: SurfaceKind, rho_max: f64) -> Self {
        Self {
            mode: ModeKey::default(),
            charge_e: default_charge(),
            m_list: default_m_list(),
            k_eigen: default_k_eigen(),
            omega: None,
            n_normal: 0,
            dt: None,
            steps: None,
            output_path: default_output(),
            gauge_tol: default_gauge_tol(),
            surface: SurfaceConfig {
                kind,
                rho_max,
                a: None,
                amplitude: None,
                sigma: None,
                radius: None,
            },
            field: FieldConfig::default(),
            grid: GridConfig::default(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        positive("surface.rho_max", self.surface.rho_max)?;
        self.profile()?;
        self.field()?;
        if self.grid.n_points < MIN_POINTS {
            return Err(invalid("grid.n_points", format!("n_points ≥ {MIN_POINTS}, got {}", self.grid.n_points)));
        }
        finite("charge_e", self.charge_e)?;
        if self.m_list.is_empty() {
            return Err(invalid("m_list", "must not be empty"));
        }
        if self.k_eigen == 0 || self.k_eigen > self.grid.n_points {
            return Err(invalid(
                "k_eigen",
                format!("must lie in 1..={}, got {}", self.grid.n_points, self.k_eigen),
            ));
        }
        if let Some(w) = self.omega {
            positive("omega", w)?;
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if self.steps == Some(0) {
            return Err(invalid("steps", "must be ≥ 1"));
        }
        positive("gauge_tol", self.gauge_tol)?;
        Ok(())
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode.into()
    }

    pub fn profile(&self) -> CliResult<SurfaceProfile> {
        let s = &self.surface;
        let kind = match s.kind {
            SurfaceKind::Flat => "flat",
            SurfaceKind::Paraboloid => "paraboloid",
            SurfaceKind::Gaussian => "gaussian",
            SurfaceKind::SphereCap => "sphere-cap",
        };
        let a = param("surface", "a", kind, s.a, s.kind == SurfaceKind::Paraboloid)?;
        let gaussian = s.kind == SurfaceKind::Gaussian;
        let amplitude = param("surface", "amplitude", kind, s.amplitude, gaussian)?;
        let sigma = param("surface", "sigma", kind, s.sigma, gaussian)?;
        let radius = param("surface", "radius", kind, s.radius, s.kind == SurfaceKind::SphereCap)?;
        let built = match s.kind {
            SurfaceKind::Flat => SurfaceProfile::flat(s.rho_max),
            SurfaceKind::Paraboloid => SurfaceProfile::paraboloid(a, s.rho_max),
            SurfaceKind::Gaussian => SurfaceProfile::gaussian_bump(amplitude, sigma, s.rho_max),
            SurfaceKind::SphereCap => SurfaceProfile::sphere_cap(radius, s.rho_max),
        };
        built.map_err(|e| invalid("surface", e))
    }

    pub fn field(&self) -> CliResult<VectorPotentialSpec> {
        let f = &self.field;
        let kind = match f.kind {
            FieldKind::None => "none",
            FieldKind::AxialUniform => "axial-uniform",
            FieldKind::CartesianConstant => "cartesian-constant",
            FieldKind::FrameSynthetic => "frame-synthetic",
        };
        let b = param("field", "b", kind, f.b, f.kind == FieldKind::AxialUniform)?;
        let c = param("field", "c", kind, f.c, f.kind == FieldKind::CartesianConstant)?;
        let synthetic = f.kind == FieldKind::FrameSynthetic;
        // unset frame components default to zero
        let component = |key: &str, v: Option<f64>| match v {
            Some(_) => param("field", key, kind, v, synthetic),
            None => Ok(0.0),
        };
        let a1 = component("a1", f.a1)?;
        let a2 = component("a2", f.a2)?;
        let a3 = component("a3", f.a3)?;
        let spec = match f.kind {
            FieldKind::None => VectorPotentialSpec::zero(),
            FieldKind::AxialUniform => VectorPotentialSpec::axial_uniform(b),
            FieldKind::CartesianConstant => VectorPotentialSpec::cartesian_constant(c),
            FieldKind::FrameSynthetic => VectorPotentialSpec::frame_synthetic(a1, a2, a3),
        };
        match f.gamma_interval {
            None => Ok(spec),
            Some([start, end]) => {
                let region = GammaInterval::new(start, end).map_err(|e| invalid("field.gamma_interval", e))?;
                Ok(spec.with_region(region))
            }
        }
    }
}
