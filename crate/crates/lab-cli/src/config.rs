//! TOML experiment configuration: one file, one experiment.

use modelspace::boundary_measures::{CantorComponent, Family, GapSchedule, SingularMeasure};
use modelspace::C64;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Model(#[from] modelspace::error::ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Kind {
    #[serde(rename = "ENTROPY")]
    Entropy,
    #[serde(rename = "DECOMPOSE")]
    Decompose,
    #[serde(rename = "APPROX_KERNEL")]
    ApproxKernel,
    #[serde(rename = "CYCLICITY")]
    Cyclicity,
    #[serde(rename = "PAIRING_CHECK")]
    PairingCheck,
    #[serde(rename = "SMOOTHING_SUITE")]
    SmoothingSuite,
}

impl Kind {
    pub fn tag(&self) -> &'static str {
        match self {
            Kind::Entropy => "ENTROPY",
            Kind::Decompose => "DECOMPOSE",
            Kind::ApproxKernel => "APPROX_KERNEL",
            Kind::Cyclicity => "CYCLICITY",
            Kind::PairingCheck => "PAIRING_CHECK",
            Kind::SmoothingSuite => "SMOOTHING_SUITE",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomCfg {
    /// Position in normalized turns.
    pub angle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentCfg {
    /// "GEOMETRIC" or "POLYLOG".
    pub family: String,
    /// Geometric ratio (GEOMETRIC only).
    pub r: Option<f64>,
    /// Polylog exponent (POLYLOG only).
    pub beta: Option<f64>,
    #[serde(default)]
    pub base_start: f64,
    pub base_len: f64,
    pub depth: u32,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCfg {
    #[serde(default)]
    pub atoms: Vec<AtomCfg>,
    #[serde(default)]
    pub components: Vec<ComponentCfg>,
}

impl MeasureCfg {
    pub fn build(&self) -> Result<SingularMeasure, ConfigError> {
        let mut components = Vec::new();
        for c in &self.components {
            let family = match c.family.as_str() {
                "GEOMETRIC" => Family::Geometric {
                    r: c.r.ok_or_else(|| {
                        ConfigError::Invalid("GEOMETRIC component needs `r`".into())
                    })?,
                },
                "POLYLOG" => Family::Polylog {
                    beta: c.beta.ok_or_else(|| {
                        ConfigError::Invalid("POLYLOG component needs `beta`".into())
                    })?,
                },
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown schedule family {other:?} (expected GEOMETRIC or POLYLOG)"
                    )))
                }
            };
            let schedule = GapSchedule::new(family, c.base_start, c.base_len, c.depth)?;
            components.push(CantorComponent { schedule, mass: c.mass });
        }
        let m = SingularMeasure {
            atoms: self.atoms.iter().map(|a| (a.angle, a.mass)).collect(),
            components,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.components.is_empty()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub n: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { n: 1 << 14 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCfg {
    pub radial: usize,
    pub angular: usize,
}

impl Default for QuadCfg {
    fn default() -> Self {
        QuadCfg { radial: 64, angular: 512 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCfg {
    pub alpha: f64,
    pub c: f64,
}

impl Default for ProfileCfg {
    fn default() -> Self {
        ProfileCfg { alpha: 3.0, c: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveCfg {
    pub label: String,
    pub measure: MeasureCfg,
    /// Discretization level for singular-inner evaluation at the quadrature
    /// nodes (ignored for purely atomic measures).
    #[serde(default = "default_level")]
    pub level: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingCfg {
    pub pairs: usize,
    pub max_degree: usize,
    pub p: f64,
}

impl Default for PairingCfg {
    fn default() -> Self {
        PairingCfg { pairs: 50, max_degree: 8, p: 2.0 }
    }
}

fn default_level() -> u32 {
    12
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default)]
    pub quadrature: QuadCfg,
    #[serde(default)]
    pub profile: ProfileCfg,
    #[serde(default)]
    pub measure: MeasureCfg,
    /// Smoothing indices for APPROX_KERNEL / SMOOTHING_SUITE.
    #[serde(default)]
    pub smoothing_ns: Vec<u32>,
    /// Kernel points as [re, im].
    #[serde(default)]
    pub lambdas: Vec<[f64; 2]>,
    /// Polynomial degrees for CYCLICITY.
    #[serde(default)]
    pub degrees: Vec<usize>,
    /// Distance curves for CYCLICITY.
    #[serde(default)]
    pub curves: Vec<CurveCfg>,
    #[serde(default)]
    pub pairing: PairingCfg,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: ExperimentConfig = toml::from_str(&text)?;
        Ok(cfg)
    }

    pub fn lambda_points(&self) -> Vec<C64> {
        self.lambdas.iter().map(|&[re, im]| C64::new(re, im)).collect()
    }

    /// Validates everything the run will reference before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.grid.n.is_power_of_two() || self.grid.n < 8 {
            return Err(ConfigError::Invalid(format!(
                "grid.n must be a power of two >= 8, got {}",
                self.grid.n
            )));
        }
        if self.quadrature.radial < 2 || self.quadrature.angular < 4 {
            return Err(ConfigError::Invalid(format!(
                "quadrature orders too small: radial {}, angular {}",
                self.quadrature.radial, self.quadrature.angular
            )));
        }
        if !(self.profile.alpha >= 1.0) || !(self.profile.c > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "profile needs alpha >= 1 and c > 0, got alpha {}, c {}",
                self.profile.alpha, self.profile.c
            )));
        }
        self.measure.build()?;
        for curve in &self.curves {
            curve.measure.build()?;
            if curve.measure.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "curve {:?} has an empty measure",
                    curve.label
                )));
            }
        }
        for &lam in &self.lambdas {
            let z = C64::new(lam[0], lam[1]);
            if z.norm() >= 1.0 {
                return Err(ConfigError::Invalid(format!(
                    "kernel point {z} lies outside the open disc"
                )));
            }
        }
        match self.kind {
            Kind::Entropy | Kind::Decompose => {
                if self.measure.is_empty() {
                    return Err(ConfigError::Invalid(
                        "ENTROPY/DECOMPOSE need a nonempty measure".into(),
                    ));
                }
            }
            Kind::ApproxKernel => {
                if self.measure.is_empty() {
                    return Err(ConfigError::Invalid("APPROX_KERNEL needs a measure".into()));
                }
                if self.lambdas.is_empty() {
                    return Err(ConfigError::Invalid(
                        "APPROX_KERNEL needs at least one lambda".into(),
                    ));
                }
            }
            Kind::Cyclicity => {
                if self.curves.is_empty() || self.degrees.is_empty() {
                    return Err(ConfigError::Invalid(
                        "CYCLICITY needs curves and degrees".into(),
                    ));
                }
            }
            Kind::PairingCheck => {
                if self.pairing.pairs == 0 {
                    return Err(ConfigError::Invalid(
                        "PAIRING_CHECK needs pairing.pairs >= 1".into(),
                    ));
                }
                if !(self.pairing.p > 1.0) {
                    return Err(ConfigError::Invalid(format!(
                        "pairing.p must exceed 1, got {}",
                        self.pairing.p
                    )));
                }
            }
            Kind::SmoothingSuite => {
                if self.measure.is_empty() {
                    return Err(ConfigError::Invalid("SMOOTHING_SUITE needs a measure".into()));
                }
            }
        }
        Ok(())
    }
}
