//! Riemannian curl, divergence, eigenvalue estimation and contact-form checks.
//!
//! With `α = g(X, ·)` and `μ = ρ dx∧dy∧dz`, the curl `W` defined by
//! `μ(W, ·, ·) = dα` is `W = (∇ × α)/ρ`, where `∇ ×` acts on the Cartesian
//! components of the covector `α`. Likewise `div_μ X = ρ⁻¹ ∂ᵢ(ρ Xⁱ)`, and
//! `α∧dα = (α · ∇×α) dx∧dy∧dz`.

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{MetricField, Orientation, Point, TubeChart, Vector, VolumeForm};

/// Everything needed to differentiate a field on the chart.
#[derive(Clone, Debug)]
pub struct FieldContext<'a> {
    pub field: &'a FieldSpec,
    pub metric: &'a MetricField,
    pub volume: &'a VolumeForm,
    pub chart: TubeChart,
    pub orientation: Orientation,
}

impl<'a> FieldContext<'a> {
    pub fn new(field: &'a FieldSpec, metric: &'a MetricField, volume: &'a VolumeForm, chart: TubeChart) -> Self {
        FieldContext {
            field,
            metric,
            volume,
            chart,
            orientation: Orientation::RightHanded,
        }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    fn alpha(&self, p: &Point) -> Vector {
        self.metric.matrix(p) * self.field.evaluate(p)
    }

    /// Central-difference step at `p`, shrunk for sampled data so the
    /// stencil stays inside the lattice.
    fn step(&self, p: &Point) -> Result<f64> {
        let nominal = self.field.fd_step(&self.chart);
        if self.field.is_analytic() {
            return Ok(nominal);
        }
        let radius = self.chart.radius();
        let mut h = nominal;
        loop {
            let inside = (0..3).all(|j| {
                let mut e = Vector::zeros();
                e[j] = h;
                (p + e).xy().norm() <= radius && (p - e).xy().norm() <= radius
            });
            if inside {
                return Ok(h);
            }
            h *= 0.5;
            if h < 1e-3 * nominal {
                return Err(Error::ShrinkStep { point: [p.x, p.y, p.z], step: h });
            }
        }
    }

    /// `J[(i, j)] = ∂ⱼ fᵢ` by central differences.
    fn jacobian(&self, p: &Point, h: f64, f: impl Fn(&Point) -> Vector) -> Matrix3<f64> {
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut e = Vector::zeros();
            e[j] = h;
            let d = (f(&(p + e)) - f(&(p - e))) / (2.0 * h);
            jac.set_column(j, &d);
        }
        jac
    }

    /// `∇ × α` in Cartesian components (the 2-form `dα` as a vector).
    pub fn d_alpha(&self, p: &Point) -> Result<Vector> {
        let h = self.step(p)?;
        let j = self.jacobian(p, h, |q| self.alpha(q));
        Ok(Vector::new(
            j[(2, 1)] - j[(1, 2)],
            j[(0, 2)] - j[(2, 0)],
            j[(1, 0)] - j[(0, 1)],
        ))
    }
}

/// Riemannian curl of `X` at `p`.
pub fn curl(ctx: &FieldContext<'_>, p: &Point) -> Result<Vector> {
    let rho = ctx.volume.density(ctx.metric, p);
    Ok(ctx.d_alpha(p)? / rho)
}

/// `μ`-divergence of `X` at `p`.
pub fn divergence(ctx: &FieldContext<'_>, p: &Point) -> Result<f64> {
    let h = ctx.step(p)?;
    let rho = ctx.volume.density(ctx.metric, p);
    let j = ctx.jacobian(p, h, |q| ctx.field.evaluate(q) * ctx.volume.density(ctx.metric, q));
    Ok(j.trace() / rho)
}

/// Fixed sample points stratified in `(r, θ, z)`.
#[derive(Clone, Debug)]
pub struct SampleSet(pub Vec<Point>);

impl SampleSet {
    pub fn stratified(chart: &TubeChart, n_r: usize, n_theta: usize, n_z: usize) -> Self {
        let mut pts = Vec::with_capacity(n_r * n_theta * n_z);
        for i in 0..n_r {
            let r = chart.radius() * (i as f64 + 0.5) / n_r as f64;
            for j in 0..n_theta {
                // Stagger θ between radial shells so samples do not line up.
                let theta = std::f64::consts::TAU * (j as f64 + 0.37 * i as f64) / n_theta as f64;
                for k in 0..n_z {
                    let z = chart.length() * (k as f64 + 0.5) / n_z as f64;
                    pts.push(chart.point(r, theta, z));
                }
            }
        }
        SampleSet(pts)
    }

    pub fn default_for(chart: &TubeChart) -> Self {
        Self::stratified(chart, 6, 8, 4)
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub lambda: f64,
    /// `max ‖curl X − λX‖_g / ‖X‖_g` over the samples.
    pub residual: f64,
    /// Median of `‖curl X‖_g / ‖X‖_g`, the scale for the zero-eigenvalue cutoff.
    pub curl_scale: f64,
}

struct PointData {
    x: Vector,
    w: Vector,
    norm_x: f64,
}

fn gather(ctx: &FieldContext<'_>, samples: &SampleSet) -> Result<Vec<PointData>> {
    let data: Vec<PointData> = samples
        .points()
        .par_iter()
        .map(|p| {
            let x = ctx.field.try_evaluate(p)?;
            let w = curl(ctx, p)?;
            Ok(PointData { x, w, norm_x: ctx.metric.norm(p, &x) })
        })
        .collect::<Result<_>>()?;
    let max_norm = data.iter().map(|d| d.norm_x).fold(0.0, f64::max);
    for (d, p) in data.iter().zip(samples.points()) {
        if !(d.norm_x > 1e-9 * max_norm && d.norm_x > 1e-300) {
            return Err(Error::VanishingField { point: [p.x, p.y, p.z], norm: d.norm_x });
        }
    }
    Ok(data)
}

/// Least-squares eigenvalue `Σ g(curl X, X) / Σ g(X, X)` and its residual.
pub fn estimate_lambda(ctx: &FieldContext<'_>, samples: &SampleSet) -> Result<LambdaEstimate> {
    let data = gather(ctx, samples)?;
    let pts = samples.points();
    let (mut num, mut den) = (0.0, 0.0);
    for (d, p) in data.iter().zip(pts) {
        num += ctx.metric.pair(p, &d.w, &d.x);
        den += ctx.metric.pair(p, &d.x, &d.x);
    }
    let lambda = num / den;
    let mut residual = 0.0_f64;
    let mut ratios = Vec::with_capacity(data.len());
    for (d, p) in data.iter().zip(pts) {
        residual = residual.max(ctx.metric.norm(p, &(d.w - d.x * lambda)) / d.norm_x);
        ratios.push(ctx.metric.norm(p, &d.w) / d.norm_x);
    }
    ratios.sort_by(f64::total_cmp);
    let curl_scale = ratios[ratios.len() / 2];
    Ok(LambdaEstimate { lambda, residual, curl_scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeltramiTolerances {
    pub curl: f64,
    pub div: f64,
}

impl BeltramiTolerances {
    pub const ANALYTIC: BeltramiTolerances = BeltramiTolerances { curl: 1e-6, div: 1e-6 };
    pub const SAMPLED: BeltramiTolerances = BeltramiTolerances { curl: 5e-3, div: 5e-3 };

    pub fn for_field(field: &FieldSpec) -> Self {
        if field.is_analytic() {
            Self::ANALYTIC
        } else {
            Self::SAMPLED
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeltramiReport {
    pub lambda: f64,
    pub curl_residual: f64,
    /// `max |div_μ X|` over the samples, divided by the RMS of `‖X‖_g`.
    pub div_residual: f64,
    pub curl_scale: f64,
    pub tolerances: BeltramiTolerances,
    pub passed: bool,
}

pub fn beltrami_residuals(
    ctx: &FieldContext<'_>,
    samples: &SampleSet,
    tolerances: BeltramiTolerances,
) -> Result<BeltramiReport> {
    let est = estimate_lambda(ctx, samples)?;
    let pts = samples.points();
    let divs: Vec<f64> = pts.par_iter().map(|p| divergence(ctx, p)).collect::<Result<_>>()?;
    let mean_sq = pts
        .iter()
        .map(|p| {
            let x = ctx.field.evaluate(p);
            ctx.metric.pair(p, &x, &x)
        })
        .sum::<f64>()
        / pts.len() as f64;
    let div_residual = divs.iter().fold(0.0_f64, |m, d| m.max(d.abs())) / mean_sq.sqrt();
    Ok(BeltramiReport {
        lambda: est.lambda,
        curl_residual: est.residual,
        div_residual,
        curl_scale: est.curl_scale,
        tolerances,
        passed: est.residual < tolerances.curl && div_residual < tolerances.div,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactSign {
    Positive,
    Negative,
    Indeterminate,
}

impl ContactSign {
    pub fn as_i32(self) -> i32 {
        match self {
            ContactSign::Positive => 1,
            ContactSign::Negative => -1,
            ContactSign::Indeterminate => 0,
        }
    }
}

/// Common sign of `α∧dα` against the ambient orientation.
pub fn contact_volume_sign(ctx: &FieldContext<'_>, samples: &SampleSet) -> Result<ContactSign> {
    let values: Vec<(f64, f64)> = samples
        .points()
        .par_iter()
        .map(|p| {
            let a = ctx.alpha(p);
            let da = ctx.d_alpha(p)?;
            Ok((a.dot(&da), a.norm() * da.norm()))
        })
        .collect::<Result<_>>()?;
    let scale = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let mut sign = 0.0;
    for (v, _) in values {
        if !(v.abs() > 1e-9 * scale) {
            return Ok(ContactSign::Indeterminate);
        }
        if sign == 0.0 {
            sign = v.signum();
        } else if v.signum() != sign {
            return Ok(ContactSign::Indeterminate);
        }
    }
    Ok(match sign * ctx.orientation.sign() {
        s if s > 0.0 => ContactSign::Positive,
        s if s < 0.0 => ContactSign::Negative,
        _ => ContactSign::Indeterminate,
    })
}

/// `max ‖dα(X, ·)‖ / ‖X‖²_g`; zero exactly when `X` spans the kernel of `dα`.
pub fn reeb_residual(ctx: &FieldContext<'_>, samples: &SampleSet) -> Result<f64> {
    let values: Vec<f64> = samples
        .points()
        .par_iter()
        .map(|p| {
            let x = ctx.field.evaluate(p);
            let nx2 = ctx.metric.pair(p, &x, &x);
            if !(nx2 > 1e-300) {
                return Err(Error::VanishingField { point: [p.x, p.y, p.z], norm: nx2.sqrt() });
            }
            // dα(X, v) = (∇×α)·(X × v) = ((∇×α) × X)·v.
            let covector = ctx.d_alpha(p)?.cross(&x);
            let op_norm = covector.dot(&(ctx.metric.inverse(p) * covector)).max(0.0).sqrt();
            Ok(op_norm / nx2)
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `½∫‖X‖²_g dμ` by the composite midpoint rule in `(r, θ, z)`.
pub fn l2_energy(ctx: &FieldContext<'_>, (n_r, n_theta, n_z): (usize, usize, usize)) -> f64 {
    let c = &ctx.chart;
    let dr = c.radius() / n_r as f64;
    let dt = std::f64::consts::TAU / n_theta as f64;
    let dz = c.length() / n_z as f64;
    let shells: Vec<f64> = (0..n_r)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            let mut s = 0.0;
            for j in 0..n_theta {
                for k in 0..n_z {
                    let p = c.point(r, (j as f64 + 0.5) * dt, (k as f64 + 0.5) * dz);
                    let x = ctx.field.evaluate(&p);
                    s += ctx.metric.pair(&p, &x, &x) * ctx.volume.density(ctx.metric, &p) * r;
                }
            }
            s
        })
        .collect();
    0.5 * shells.iter().sum::<f64>() * dr * dt * dz
}
