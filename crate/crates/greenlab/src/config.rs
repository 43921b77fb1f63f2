//! Run configuration: a single JSON document (or the equivalent CLI flags),
//! validated before any computation starts. Unknown keys are rejected.

use crate::expr::Expr;
use crate::manifold::WarpProfile;
use crate::solver::SolveOptions;
use crate::verify::{BatteryConfig, Inject};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config error: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config error: cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    /// Round sphere of curvature `k` (the comparison constant doubles as the
    /// curvature; `k = "auto"` resolves to 1).
    Model,
    /// Unit round 3-sphere paired with an explicit comparison constant
    /// `k ∈ (0, 1]`.
    S3,
    /// `sin(ρ)(1 + ε sin²ρ)` on `[0, π]`.
    Perturbed { eps: f64 },
    /// Custom warp with expressions for f, f', f''.
    Custom { f: String, f1: String, f2: String, length: f64 },
}

/// Comparison constant: a number, or `"auto"` for the admissible `k_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Auto,
    Value(f64),
}

impl Serialize for KChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KChoice::Auto => s.serialize_str("auto"),
            KChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(KChoice::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(KChoice::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "k must be a number or \"auto\", got \"{t}\""
            ))),
        }
    }
}

impl std::str::FromStr for KChoice {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(KChoice::Auto);
        }
        s.parse::<f64>()
            .map(KChoice::Value)
            .map_err(|_| ConfigError::Invalid(format!("k must be a number or \"auto\", got \"{s}\"")))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_interior")]
    pub interior: usize,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { interior: default_interior(), per_decade: default_per_decade() }
    }
}

fn default_interior() -> usize {
    2048
}

fn default_per_decade() -> usize {
    64
}

fn default_rtol() -> f64 {
    1e-12
}

fn default_r_points() -> usize {
    200
}

fn default_schema() -> u32 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmitFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl std::str::FromStr for EmitFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            "both" => Ok(EmitFormat::Both),
            other => Err(ConfigError::Invalid(format!(
                "format must be csv, json, or both, got \"{other}\""
            ))),
        }
    }
}

/// Fault injection spec; exactly one variant may be set (test-only surface).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InjectSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mis_normalize: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflate_k: Option<f64>,
}

impl InjectSpec {
    pub fn parse_flag(s: &str) -> Result<Self> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("inject must look like name=value, got \"{s}\"")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("inject value must be a number, got \"{value}\"")))?;
        match key {
            "mis_normalize" => Ok(Self { mis_normalize: Some(v), ..Default::default() }),
            "inflate_k" => Ok(Self { inflate_k: Some(v), ..Default::default() }),
            other => Err(ConfigError::Invalid(format!(
                "unknown injection \"{other}\" (expected mis_normalize or inflate_k)"
            ))),
        }
    }

    pub fn to_inject(self) -> Result<Inject> {
        match (self.mis_normalize, self.inflate_k) {
            (None, None) => Ok(Inject::None),
            (Some(f), None) => Ok(Inject::MisNormalize(f)),
            (None, Some(f)) => Ok(Inject::InflateK(f)),
            (Some(_), Some(_)) => {
                Err(ConfigError::Invalid("at most one injection may be set".into()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<f64>,
}

/// The complete run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub manifold: ManifoldSpec,
    pub n: u32,
    pub k: KChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default = "default_r_points")]
    pub r_points: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub format: EmitFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject: Option<InjectSpec>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(ConfigError::Invalid(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.n < 3 {
            return Err(ConfigError::Invalid(format!("n must be ≥ 3, got {}", self.n)));
        }
        if let KChoice::Value(k) = self.k {
            if !(k > 0.0) || !k.is_finite() {
                return Err(ConfigError::Invalid(format!("k must be positive, got {k}")));
            }
        }
        match &self.manifold {
            ManifoldSpec::S3 => {
                if self.n != 3 {
                    return Err(ConfigError::Invalid(format!(
                        "the s3 family lives in dimension 3, got n = {}",
                        self.n
                    )));
                }
                match self.k {
                    KChoice::Value(k) if k > 0.0 && k <= 1.0 => {}
                    KChoice::Value(k) => {
                        return Err(ConfigError::Invalid(format!(
                            "the s3 family requires k in (0, 1], got {k}"
                        )))
                    }
                    KChoice::Auto => {
                        return Err(ConfigError::Invalid(
                            "the s3 family requires an explicit k in (0, 1]".into(),
                        ))
                    }
                }
            }
            ManifoldSpec::Perturbed { eps } => {
                if !(eps.abs() <= 0.2) || !eps.is_finite() {
                    return Err(ConfigError::Invalid(format!(
                        "perturbed requires |eps| ≤ 0.2, got {eps}"
                    )));
                }
            }
            ManifoldSpec::Custom { f, f1, f2, length } => {
                for (name, src) in [("f", f), ("f1", f1), ("f2", f2)] {
                    Expr::parse(src).map_err(|e| {
                        ConfigError::Invalid(format!("custom expression {name}: {e}"))
                    })?;
                }
                if !(length > &0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "custom length must be positive, got {length}"
                    )));
                }
            }
            ManifoldSpec::Model => {}
        }
        if let Some(betas) = &self.beta {
            if betas.iter().any(|b| !(*b > 0.0)) {
                return Err(ConfigError::Invalid("beta values must be positive".into()));
            }
        }
        if self.r_points < 8 {
            return Err(ConfigError::Invalid(format!(
                "r_points must be at least 8, got {}",
                self.r_points
            )));
        }
        if !(1e-14..=1e-6).contains(&self.rtol) {
            return Err(ConfigError::Invalid(format!(
                "rtol must lie in [1e-14, 1e-6], got {}",
                self.rtol
            )));
        }
        if self.grid.interior < 64 || self.grid.per_decade < 8 {
            return Err(ConfigError::Invalid(
                "grid must have at least 64 interior points and 8 per decade".into(),
            ));
        }
        if let Some(inj) = self.inject {
            inj.to_inject()?;
        }
        Ok(())
    }

    pub fn build_profile(&self) -> Result<WarpProfile> {
        let profile = match &self.manifold {
            ManifoldSpec::Model => {
                let k = match self.k {
                    KChoice::Value(k) => k,
                    KChoice::Auto => 1.0,
                };
                WarpProfile::model(self.n, k)
            }
            ManifoldSpec::S3 => match self.k {
                KChoice::Value(k) => WarpProfile::scaled_s3(k),
                KChoice::Auto => unreachable!("validated"),
            },
            ManifoldSpec::Perturbed { eps } => WarpProfile::perturbed_sphere(self.n, *eps),
            ManifoldSpec::Custom { f, f1, f2, length } => WarpProfile::custom(
                self.n,
                *length,
                Expr::parse(f).expect("validated"),
                Expr::parse(f1).expect("validated"),
                Expr::parse(f2).expect("validated"),
            ),
        };
        profile.map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The comparison constant to solve with; `auto` resolves to `k_star`.
    pub fn resolve_k(&self, profile: &WarpProfile) -> f64 {
        match self.k {
            KChoice::Value(k) => k,
            KChoice::Auto => profile.ricci_admissibility().k_star,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            rtol: self.rtol,
            per_decade: self.grid.per_decade,
            interior_points: self.grid.interior,
        }
    }

    pub fn battery_config(&self) -> Result<BatteryConfig> {
        let mut cfg = BatteryConfig {
            solve: self.solve_options(),
            r_points: self.r_points,
            betas: self.beta.clone(),
            inject: self.inject.unwrap_or_default().to_inject()?,
            ..BatteryConfig::default()
        };
        if let Some(t) = self.tolerances.identity {
            cfg.identity_tol = t;
        }
        if let Some(t) = self.tolerances.monotonicity {
            cfg.mono_slack = t;
        }
        if let Some(t) = self.tolerances.global {
            cfg.global_tol = t;
        }
        if let Some(t) = self.tolerances.derivative {
            cfg.derivative_tol = t;
        }
        Ok(cfg)
    }
}
