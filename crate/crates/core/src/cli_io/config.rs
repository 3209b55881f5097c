//! Run configuration: JSON, validated before any computation.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::grid_file::read_grid;
use crate::disc_index::{five_point_disc, synthesize_disc_field, IndexConfig, SyntheticPoint};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, Interpolation};
use crate::geometry::{MetricField, TubeChart, Vector};
use crate::verify::{OrbitSearchConfig, PushoffConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldConfig {
    /// `sin r e_θ + cos r e_z`.
    #[default]
    TwistedTube,
    Lundquist {
        #[serde(default = "one")]
        lambda0: f64,
    },
    Constant {
        value: [f64; 3],
    },
    Affine {
        matrix: [[f64; 3]; 3],
        #[serde(default)]
        offset: [f64; 3],
    },
    Grid {
        path: PathBuf,
        #[serde(default)]
        tricubic: bool,
    },
    Synthetic {
        points: Vec<SyntheticPoint>,
        #[serde(default = "one")]
        lambda: f64,
    },
    FivePoint,
    Scaled {
        factor: f64,
        field: Box<FieldConfig>,
    },
    Sum {
        a: Box<FieldConfig>,
        b: Box<FieldConfig>,
    },
    Perturbed {
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        field: Box<FieldConfig>,
    },
}

fn one() -> f64 {
    1.0
}

impl FieldConfig {
    /// Names accepted by `--builtin`.
    pub const BUILTINS: [&'static str; 3] = ["twisted-tube", "lundquist", "five-point"];

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "twisted-tube" | "tube" => Ok(FieldConfig::TwistedTube),
            "lundquist" => Ok(FieldConfig::Lundquist { lambda0: 1.0 }),
            "five-point" => Ok(FieldConfig::FivePoint),
            other => Err(Error::InvalidInput(format!(
                "unknown builtin field `{other}`; expected one of {:?}",
                Self::BUILTINS
            ))),
        }
    }

    /// Grid paths are resolved against `base` when relative.
    pub fn build(&self, chart: &TubeChart, base: &Path) -> Result<FieldSpec> {
        Ok(match self {
            FieldConfig::TwistedTube => FieldSpec::twisted_tube(),
            FieldConfig::Lundquist { lambda0 } => FieldSpec::lundquist(*lambda0),
            FieldConfig::Constant { value } => FieldSpec::constant(Vector::from(*value)),
            FieldConfig::Affine { matrix, offset } => {
                let m = Matrix3::from_fn(|i, j| matrix[i][j]);
                FieldSpec::affine(m, Vector::from(*offset))
            }
            FieldConfig::Grid { path, tricubic } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let mut grid = read_grid(&full)?;
                if *tricubic {
                    grid = grid.with_interpolation(Interpolation::Tricubic);
                }
                FieldSpec::Sampled(Arc::new(grid))
            }
            FieldConfig::Synthetic { points, lambda } => {
                FieldSpec::Synthetic(Arc::new(synthesize_disc_field(*chart, points, *lambda)?))
            }
            FieldConfig::FivePoint => FieldSpec::Synthetic(Arc::new(five_point_disc(*chart))),
            FieldConfig::Scaled { factor, field } => field.build(chart, base)?.scaled(*factor),
            FieldConfig::Sum { a, b } => a.build(chart, base)?.plus(b.build(chart, base)?),
            FieldConfig::Perturbed { amplitude, seed, field } => {
                field.build(chart, base)?.perturbed(*amplitude, *seed, chart)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig { radius: 1.0, length: TAU }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    #[default]
    Euclidean,
    /// `g = factor · δ`.
    Scaled { factor: f64 },
}

impl MetricConfig {
    pub fn build(&self) -> Result<MetricField> {
        match *self {
            MetricConfig::Euclidean => Ok(MetricField::Euclidean),
            MetricConfig::Scaled { factor } if factor > 0.0 && factor.is_finite() => Ok(MetricField::Scaled(factor)),
            MetricConfig::Scaled { factor } => Err(Error::InvalidInput(format!("metric factor {factor} must be positive"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldConfig,
    pub chart: ChartConfig,
    pub metric: MetricConfig,
    pub index: IndexConfig,
    pub orbits: OrbitSearchConfig,
    pub pushoff: PushoffConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.chart;
        if !(c.radius > 0.0 && c.radius.is_finite() && c.length > 0.0 && c.length.is_finite()) {
            return Err(Error::InvalidInput(format!("chart needs R > 0 and L > 0, got R = {}, L = {}", c.radius, c.length)));
        }
        self.metric.build()?;
        let s = &self.index.scan;
        if s.resolution < 8 || s.winding_samples < 16 {
            return Err(Error::InvalidInput("scan resolution must be ≥ 8 and winding samples ≥ 16".into()));
        }
        let b = &self.index.boundary;
        if b.n_theta < 8 || b.n_z < 4 {
            return Err(Error::InvalidInput("boundary grid must be at least 8 × 4".into()));
        }
        Ok(())
    }

    pub fn chart(&self) -> Result<TubeChart> {
        TubeChart::new(self.chart.radius, self.chart.length)
    }
}
