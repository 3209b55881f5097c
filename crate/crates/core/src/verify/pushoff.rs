//! Independent self-linking number from a push-off inside `ξ = ker α`.
//!
//! A nonvanishing section `Z` of `ξ` over the disc is built by transporting a
//! vector from the disc centre outward along rays, projecting onto `X^⊥` at
//! every step. The boundary pushed along `Z` gives `slk = lk(γ, γ + δZ)`.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linking::gauss_linking;
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{MeridionalDisc, MetricField, Point, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushoffConfig {
    /// Push distance as a fraction of `R`.
    pub push_fraction: f64,
    pub curve_segments: usize,
    pub radial_steps: usize,
}

impl Default for PushoffConfig {
    fn default() -> Self {
        PushoffConfig { push_fraction: 1e-2, curve_segments: 512, radial_steps: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushoffResult {
    pub slk: i32,
    pub linking_raw: f64,
    pub segments: usize,
}

/// `v − g(v, X)/g(X, X) · X`, normalised in `g`.
fn project_xi(g: &MetricField, p: &Point, x: &Vector, v: &Vector) -> Option<Vector> {
    let xx = g.pair(p, x, x);
    if !(xx > 0.0) {
        return None;
    }
    let w = v - x * (g.pair(p, v, x) / xx);
    let n = g.norm(p, &w);
    (n > 1e-3 * g.norm(p, v)).then(|| w / n)
}

fn transported_section(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField, phi: f64, z0: Vector, steps: usize) -> Result<Vector> {
    let mut z = z0;
    for k in 1..=steps {
        let rho = k as f64 / steps as f64;
        let p = disc.embed(Vector2::new(rho * phi.cos(), rho * phi.sin()));
        let x = field.evaluate(&p);
        z = project_xi(metric, &p, &x, &z).ok_or_else(|| {
            Error::OracleUnavailable(format!("transport collapsed at ρ = {rho}, φ = {phi}"))
        })?;
    }
    Ok(z)
}

fn linking_at(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField, cfg: &PushoffConfig, n: usize) -> Result<f64> {
    let centre = disc.embed(Vector2::zeros());
    let xc = field.evaluate(&centre);
    let z0 = project_xi(metric, &centre, &xc, &Vector::x())
        .or_else(|| project_xi(metric, &centre, &xc, &Vector::y()))
        .ok_or_else(|| Error::OracleUnavailable("no reference vector in ξ at the disc centre".into()))?;
    let delta = cfg.push_fraction * disc.chart.radius();
    let s = disc.direction.sign();
    let pairs: Vec<(Point, Point)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let gamma = disc.boundary_point(t);
            let z = transported_section(field, disc, metric, s * t, z0, cfg.radial_steps)?;
            Ok((gamma, gamma + z.normalize() * delta))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<Point>, Vec<Point>) = pairs.into_iter().unzip();
    Ok(gauss_linking(&a, &b))
}

/// Self-linking number of the oriented boundary of `disc` by push-off.
pub fn slk_pushoff_oracle(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField, cfg: &PushoffConfig) -> Result<PushoffResult> {
    let mut n = cfg.curve_segments.max(128);
    for _ in 0..2 {
        let lk = linking_at(field, disc, metric, cfg, n)?;
        let slk = lk.round();
        if (lk - slk).abs() < 0.1 {
            return Ok(PushoffResult { slk: slk as i32, linking_raw: lk, segments: n });
        }
        n *= 2;
    }
    Err(Error::OracleUnavailable(format!("linking number does not round cleanly at {n} segments")))
}
