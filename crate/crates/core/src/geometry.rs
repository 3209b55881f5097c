//! Solid-torus chart, Riemannian metric, volume form and meridional discs.
//!
//! Points and vectors are stored in Cartesian components `(x, y, z)` with
//! `x = r cos θ`, `y = r sin θ` and `z` unwrapped (the chart identifies
//! `z ~ z + L`). Working in Cartesian components keeps every evaluator smooth
//! across the core `r = 0`, where the cylindrical frame is undefined.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;

pub type Point = Vector3<f64>;
pub type Vector = Vector3<f64>;

/// Below this radius (as a fraction of `R`) the cylindrical frame is replaced
/// by the Cartesian patch.
pub const CORE_PATCH_FRACTION: f64 = 0.05;

/// Minimum angle (radians) between a transverse curve and the foliation.
pub const TRANSVERSE_MIN_ANGLE: f64 = 1e-3;

/// The solid torus `V = D² × S¹` as a periodic tube of radius `R` and period `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeChart {
    radius: f64,
    length: f64,
}

impl TubeChart {
    pub fn new(radius: f64, length: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("tube radius must be > 0, got {radius}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("tube period must be > 0, got {length}")));
        }
        Ok(TubeChart { radius, length })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(r, θ, z)` with `θ ∈ [0, 2π)` and `z ∈ [0, L)`.
    pub fn cylindrical(&self, p: &Point) -> (f64, f64, f64) {
        let r = p.x.hypot(p.y);
        let theta = if r > 0.0 { p.y.atan2(p.x).rem_euclid(TAU) } else { 0.0 };
        (r, theta, p.z.rem_euclid(self.length))
    }

    pub fn point(&self, r: f64, theta: f64, z: f64) -> Point {
        Point::new(r * theta.cos(), r * theta.sin(), z)
    }

    /// Unit radial vector; on the core patch the frame is pinned to the x axis.
    pub fn e_r(&self, p: &Point) -> Vector {
        let r = p.x.hypot(p.y);
        if r <= f64::MIN_POSITIVE {
            Vector::x()
        } else {
            Vector::new(p.x / r, p.y / r, 0.0)
        }
    }

    pub fn e_theta(&self, p: &Point) -> Vector {
        let er = self.e_r(p);
        Vector::new(-er.y, er.x, 0.0)
    }

    pub fn in_core_patch(&self, p: &Point) -> bool {
        p.x.hypot(p.y) < CORE_PATCH_FRACTION * self.radius
    }

    pub fn check_domain(&self, p: &Point) -> Result<()> {
        let r = p.x.hypot(p.y);
        if !(r.is_finite() && p.z.is_finite()) || r > self.radius * (1.0 + 1e-6) {
            return Err(Error::Domain {
                point: [p.x, p.y, p.z],
                r,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// Jacobian of `(r, θ, z) ↦ (x, y, z)`; its columns are `∂r, ∂θ, ∂z`.
    pub fn coordinate_basis(&self, p: &Point) -> Matrix3<f64> {
        let r = p.x.hypot(p.y);
        let er = self.e_r(p);
        let et = self.e_theta(p);
        Matrix3::from_columns(&[er, et * r, Vector::z()])
    }
}

type MetricFn = dyn Fn(&Point) -> Matrix3<f64> + Send + Sync;
type DensityFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// Riemannian metric `g`, as a matrix in Cartesian components.
#[derive(Clone, Default)]
pub enum MetricField {
    #[default]
    Euclidean,
    /// `g = factor · δ`; `factor = c²` for a length rescaling by `c`.
    Scaled(f64),
    Custom(Arc<MetricFn>),
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricField::Euclidean => write!(f, "Euclidean"),
            MetricField::Scaled(c) => write!(f, "Scaled({c})"),
            MetricField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl MetricField {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&Point) -> Matrix3<f64> + Send + Sync + 'static,
    {
        MetricField::Custom(Arc::new(f))
    }

    pub fn matrix(&self, p: &Point) -> Matrix3<f64> {
        match self {
            MetricField::Euclidean => Matrix3::identity(),
            MetricField::Scaled(c) => Matrix3::identity() * *c,
            MetricField::Custom(f) => f(p),
        }
    }

    /// Matrix at `p`, rejected unless symmetric positive definite.
    pub fn checked_matrix(&self, p: &Point) -> Result<Matrix3<f64>> {
        let m = self.matrix(p);
        let spd_err = || Error::MetricNotSpd { point: [p.x, p.y, p.z] };
        if !m.iter().all(|v| v.is_finite()) || (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(spd_err());
        }
        let chol = m.cholesky().ok_or_else(spd_err)?;
        if chol.l_dirty().diagonal().iter().any(|d| d * d <= 1e-12) {
            return Err(spd_err());
        }
        Ok(m)
    }

    pub fn inverse(&self, p: &Point) -> Matrix3<f64> {
        match self {
            MetricField::Euclidean => Matrix3::identity(),
            MetricField::Scaled(c) => Matrix3::identity() / *c,
            MetricField::Custom(f) => f(p).try_inverse().unwrap_or_else(Matrix3::zeros),
        }
    }

    #[inline]
    pub fn pair(&self, p: &Point, u: &Vector, v: &Vector) -> f64 {
        match self {
            MetricField::Euclidean => u.dot(v),
            MetricField::Scaled(c) => c * u.dot(v),
            MetricField::Custom(f) => u.dot(&(f(p) * v)),
        }
    }

    #[inline]
    pub fn norm(&self, p: &Point, v: &Vector) -> f64 {
        self.pair(p, v, v).max(0.0).sqrt()
    }

    /// Metric in the chart's coordinate basis `(∂r, ∂θ, ∂z)`.
    pub fn cylindrical_matrix(&self, chart: &TubeChart, p: &Point) -> Matrix3<f64> {
        let j = chart.coordinate_basis(p);
        j.transpose() * self.matrix(p) * j
    }

    /// Volume density `√det g` relative to `dx∧dy∧dz`.
    pub fn volume_density(&self, p: &Point) -> f64 {
        match self {
            MetricField::Euclidean => 1.0,
            MetricField::Scaled(c) => c.powf(1.5),
            MetricField::Custom(f) => f(p).determinant().max(0.0).sqrt(),
        }
    }
}

/// `g_p(u, v)` with a domain check on `p`.
pub fn metric_pair(g: &MetricField, chart: &TubeChart, p: &Point, u: &Vector, v: &Vector) -> Result<f64> {
    chart.check_domain(p)?;
    let m = g.checked_matrix(p)?;
    Ok(u.dot(&(m * v)))
}

/// Volume form `μ`, as a density relative to `dx∧dy∧dz`.
///
/// Relative to `dr∧dθ∧dz` the density picks up the extra factor `r`.
#[derive(Clone, Default)]
pub enum VolumeForm {
    #[default]
    Metric,
    Density(Arc<DensityFn>),
}

impl fmt::Debug for VolumeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeForm::Metric => write!(f, "Metric"),
            VolumeForm::Density(_) => write!(f, "Density(..)"),
        }
    }
}

impl VolumeForm {
    pub fn density(&self, g: &MetricField, p: &Point) -> f64 {
        match self {
            VolumeForm::Metric => g.volume_density(p),
            VolumeForm::Density(f) => f(p),
        }
    }
}

/// Orientation of the ambient solid torus relative to `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    RightHanded,
    LeftHanded,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::RightHanded => 1.0,
            Orientation::LeftHanded => -1.0,
        }
    }
}

/// Shape of a meridional disc: `z = z₀ + a·u + b·v + ε(1 − u² − v²)` over the unit disc.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscShape {
    pub z0: f64,
    #[serde(default)]
    pub tilt: [f64; 2],
    #[serde(default)]
    pub bump: f64,
}

impl DiscShape {
    pub fn flat(z0: f64) -> Self {
        DiscShape { z0, tilt: [0.0, 0.0], bump: 0.0 }
    }

    pub fn bumped(z0: f64, bump: f64) -> Self {
        DiscShape { z0, tilt: [0.0, 0.0], bump }
    }

    pub fn with_bump(mut self, bump: f64) -> Self {
        self.bump = bump;
        self
    }
}

/// Which way the boundary circle `t ↦ embed(cos t, sin t)` is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryDirection {
    /// Increasing `t` (counter-clockwise in `(u, v)`).
    Forward,
    Reversed,
}

impl BoundaryDirection {
    pub fn sign(self) -> f64 {
        match self {
            BoundaryDirection::Forward => 1.0,
            BoundaryDirection::Reversed => -1.0,
        }
    }
}

/// An oriented embedded disc in `V` whose boundary circle lies on `r = R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeridionalDisc {
    pub chart: TubeChart,
    pub shape: DiscShape,
    pub direction: BoundaryDirection,
}

/// Tangent frame and unit normal of an oriented disc at one point.
#[derive(Clone, Copy, Debug)]
pub struct DiscFrame {
    pub tangent1: Vector,
    pub tangent2: Vector,
    pub normal: Vector,
}

impl MeridionalDisc {
    pub fn new(chart: TubeChart, shape: DiscShape) -> Self {
        MeridionalDisc {
            chart,
            shape,
            direction: BoundaryDirection::Forward,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.direction = match self.direction {
            BoundaryDirection::Forward => BoundaryDirection::Reversed,
            BoundaryDirection::Reversed => BoundaryDirection::Forward,
        };
        self
    }

    pub fn embed(&self, uv: Vector2<f64>) -> Point {
        let r = self.chart.radius();
        let s = &self.shape;
        let (u, v) = (uv.x, uv.y);
        Point::new(
            r * u,
            r * v,
            s.z0 + s.tilt[0] * u + s.tilt[1] * v + s.bump * (1.0 - u * u - v * v),
        )
    }

    /// Coordinate tangents `(∂/∂u, ∂/∂v)` of the embedding.
    pub fn coordinate_tangents(&self, uv: Vector2<f64>) -> (Vector, Vector) {
        let r = self.chart.radius();
        let s = &self.shape;
        (
            Vector::new(r, 0.0, s.tilt[0] - 2.0 * s.bump * uv.x),
            Vector::new(0.0, r, s.tilt[1] - 2.0 * s.bump * uv.y),
        )
    }

    /// Boundary curve `γ(t)`, traversed in the disc's boundary direction.
    pub fn boundary_point(&self, t: f64) -> Point {
        let t = self.direction.sign() * t;
        self.embed(Vector2::new(t.cos(), t.sin()))
    }

    pub fn boundary_tangent(&self, t: f64) -> Vector {
        let s = self.direction.sign();
        let ts = s * t;
        let (tu, tv) = self.coordinate_tangents(Vector2::new(ts.cos(), ts.sin()));
        (tu * (-ts.sin()) + tv * ts.cos()) * s
    }

    /// Positive unit normal of the oriented disc at `uv`.
    pub fn normal(&self, g: &MetricField, uv: Vector2<f64>) -> Result<Vector> {
        Ok(disc_frame(self, g, uv)?.normal)
    }
}

/// Tangent frame and `g`-unit normal at `uv`.
///
/// The normal is `g`-orthogonal to both tangents and `(t₁, t₂, n)` is
/// positively oriented; reversing the disc swaps the tangents and negates `n`.
pub fn disc_frame(disc: &MeridionalDisc, g: &MetricField, uv: Vector2<f64>) -> Result<DiscFrame> {
    let (tu, tv) = disc.coordinate_tangents(uv);
    let p = disc.embed(uv);
    let cross = tu.cross(&tv);
    if cross.norm() <= 1e-12 * tu.norm() * tv.norm() {
        return Err(Error::DegenerateEmbedding { uv: [uv.x, uv.y] });
    }
    // Raising the index of the covector t_u × t_v gives a vector g-orthogonal to both tangents.
    let raised = g.inverse(&p) * cross;
    let len = g.norm(&p, &raised);
    if !(len.is_finite() && len > 0.0) {
        return Err(Error::DegenerateEmbedding { uv: [uv.x, uv.y] });
    }
    let n = raised / len;
    Ok(match disc.direction {
        BoundaryDirection::Forward => DiscFrame { tangent1: tu, tangent2: tv, normal: n },
        BoundaryDirection::Reversed => DiscFrame { tangent1: tv, tangent2: tu, normal: -n },
    })
}

/// Orient the disc boundary so that `α(γ') = g(X, γ') > 0` everywhere.
///
/// The boundary direction is recomputed from scratch, so applying this twice
/// gives the same orientation. Fails with `NotTransverse` when `α(γ')`
/// falls below `sin(TRANSVERSE_MIN_ANGLE)·|X||γ'|` or changes sign.
pub fn orient_boundary(
    disc: &MeridionalDisc,
    field: &FieldSpec,
    g: &MetricField,
    samples: usize,
) -> Result<MeridionalDisc> {
    let base = MeridionalDisc {
        direction: BoundaryDirection::Forward,
        ..*disc
    };
    let floor = TRANSVERSE_MIN_ANGLE.sin();
    let samples = samples.max(16);
    let mut sign = 0.0;
    for k in 0..samples {
        let t = TAU * k as f64 / samples as f64;
        let p = base.boundary_point(t);
        let tangent = base.boundary_tangent(t);
        let x = field.evaluate(&p);
        let value = g.pair(&p, &x, &tangent);
        let scale = g.norm(&p, &x) * g.norm(&p, &tangent);
        if !(value.abs() > floor * scale) {
            return Err(Error::NotTransverse { t });
        }
        let s = value.signum();
        if sign == 0.0 {
            sign = s;
        } else if s != sign {
            return Err(Error::NotTransverse { t });
        }
    }
    Ok(if sign > 0.0 { base } else { base.reversed() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldSpec, Profile};
    use std::f64::consts::PI;

    fn chart() -> TubeChart {
        TubeChart::new(1.0, TAU).unwrap()
    }

    #[test]
    fn euclidean_pair_on_orthonormal_frame() {
        let c = chart();
        let p = Point::new(1.0, 0.0, 0.0);
        let et = c.e_theta(&p);
        let v = metric_pair(&MetricField::Euclidean, &c, &p, &et, &et).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let zero = metric_pair(&MetricField::Euclidean, &c, &p, &Vector::zeros(), &et).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn cylindrical_metric_theta_theta_is_r_squared() {
        let c = TubeChart::new(3.0, 1.0).unwrap();
        let p = c.point(2.0, 0.7, 0.2);
        let m = MetricField::Euclidean.cylindrical_matrix(&c, &p);
        assert!((m[(1, 1)] - 4.0).abs() < 1e-12);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-12 && (m[(2, 2)] - 1.0).abs() < 1e-12);
        let d_theta = c.coordinate_basis(&p).column(1).into_owned();
        let v = metric_pair(&MetricField::Euclidean, &c, &p, &d_theta, &d_theta).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pair_outside_chart_is_domain_error() {
        let c = chart();
        let p = Point::new(2.0, 0.0, 0.0);
        let e = metric_pair(&MetricField::Euclidean, &c, &p, &Vector::x(), &Vector::x());
        assert!(matches!(e, Err(Error::Domain { .. })));
    }

    #[test]
    fn non_spd_metric_rejected() {
        let g = MetricField::custom(|_| Matrix3::from_diagonal(&Vector::new(1.0, -1.0, 1.0)));
        assert!(g.checked_matrix(&Point::zeros()).is_err());
    }

    #[test]
    fn flat_disc_normal_is_e_z() {
        let d = MeridionalDisc::new(chart(), DiscShape::flat(0.0));
        for uv in [Vector2::new(0.0, 0.0), Vector2::new(0.3, -0.5), Vector2::new(0.9, 0.1)] {
            let f = disc_frame(&d, &MetricField::Euclidean, uv).unwrap();
            assert!((f.normal - Vector::z()).norm() < 1e-14);
        }
        let f = disc_frame(&d.reversed(), &MetricField::Euclidean, Vector2::new(0.2, 0.2)).unwrap();
        assert!((f.normal + Vector::z()).norm() < 1e-14);
    }

    #[test]
    fn tilted_disc_normal_tilts_by_atan_eps() {
        // z = ε·u on a unit-radius tube: the graph normal is (−ε, 0, 1)/√(1+ε²).
        let eps = 0.3;
        let d = MeridionalDisc::new(
            chart(),
            DiscShape { z0: 0.0, tilt: [eps, 0.0], bump: 0.0 },
        );
        let f = disc_frame(&d, &MetricField::Euclidean, Vector2::new(0.1, 0.4)).unwrap();
        let angle = f.normal.x.atan2(f.normal.z);
        assert!((angle + eps.atan()).abs() < 1e-14);
        assert!(f.normal.y.abs() < 1e-15);
    }

    #[test]
    fn frames_are_g_orthonormal_and_positive() {
        let g = MetricField::custom(|p: &Point| {
            let a = 1.0 + 0.3 * p.x * p.x;
            Matrix3::new(a, 0.2, 0.0, 0.2, 2.0, 0.1 * p.y, 0.0, 0.1 * p.y, 1.5)
        });
        let d = MeridionalDisc::new(chart(), DiscShape { z0: 0.3, tilt: [0.2, -0.1], bump: 0.1 });
        for dir in [d, d.reversed()] {
            for k in 0..20 {
                let a = k as f64 * 0.7;
                let uv = Vector2::new(0.8 * a.cos() * (k as f64 / 20.0), 0.8 * a.sin());
                let f = disc_frame(&dir, &g, uv).unwrap();
                let p = dir.embed(uv);
                assert!((g.pair(&p, &f.normal, &f.normal) - 1.0).abs() < 1e-10);
                assert!(g.pair(&p, &f.normal, &f.tangent1).abs() < 1e-10);
                assert!(g.pair(&p, &f.normal, &f.tangent2).abs() < 1e-10);
                let vol = Matrix3::from_columns(&[f.tangent1, f.tangent2, f.normal]).determinant();
                assert!(vol > 0.0);
            }
        }
    }

    fn tube() -> FieldSpec {
        FieldSpec::tube(Profile::Sin(1.0), Profile::Cos(1.0))
    }

    #[test]
    fn orient_boundary_follows_sign_of_r_sin_r() {
        let g = MetricField::Euclidean;
        let d = MeridionalDisc::new(chart(), DiscShape::flat(0.0));
        let o = orient_boundary(&d, &tube(), &g, 256).unwrap();
        assert_eq!(o.direction, BoundaryDirection::Forward);
        // Idempotent.
        let o2 = orient_boundary(&o, &tube(), &g, 256).unwrap();
        assert_eq!(o2.direction, o.direction);

        let wide = MeridionalDisc::new(TubeChart::new(4.0, TAU).unwrap(), DiscShape::flat(0.0));
        let o = orient_boundary(&wide, &tube(), &g, 256).unwrap();
        assert_eq!(o.direction, BoundaryDirection::Reversed);
        let t = 0.3;
        let x = tube().evaluate(&o.boundary_point(t));
        assert!(x.dot(&o.boundary_tangent(t)) > 0.0);
    }

    #[test]
    fn axial_boundary_field_is_not_transverse() {
        let d = MeridionalDisc::new(chart(), DiscShape::flat(0.0));
        let ez = FieldSpec::constant(Vector::z());
        assert!(matches!(
            orient_boundary(&d, &ez, &MetricField::Euclidean, 64),
            Err(Error::NotTransverse { .. })
        ));
        let at_pi = MeridionalDisc::new(TubeChart::new(PI, TAU).unwrap(), DiscShape::flat(0.0));
        assert!(orient_boundary(&at_pi, &tube(), &MetricField::Euclidean, 64).is_err());
    }
}
