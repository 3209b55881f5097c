//! Orthogonal projection of `X` onto the tangent planes of a meridional disc.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{disc_frame, MeridionalDisc, MetricField, Point, Vector};

/// A planar vector field on the closed unit disc.
pub trait PlanarField: Sync {
    fn eval(&self, uv: Vector2<f64>) -> Vector2<f64>;
}

impl<F> PlanarField for F
where
    F: Fn(Vector2<f64>) -> Vector2<f64> + Sync,
{
    fn eval(&self, uv: Vector2<f64>) -> Vector2<f64> {
        self(uv)
    }
}

/// `X_D = X − g(X, n) n`, expressed in the coordinate basis `(∂u, ∂v)` of the disc.
#[derive(Clone, Debug)]
pub struct ProjectedField {
    pub field: FieldSpec,
    pub disc: MeridionalDisc,
    pub metric: MetricField,
}

/// Pointwise decomposition of `X` along the disc.
#[derive(Clone, Copy, Debug)]
pub struct Decomposition {
    pub point: Point,
    pub x: Vector,
    pub tangential: Vector,
    /// `g(X, n)` with `n` the positive unit normal.
    pub normal_component: f64,
    pub normal: Vector,
    pub coords: Vector2<f64>,
}

impl ProjectedField {
    pub fn new(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField) -> Result<Self> {
        // Reject degenerate embeddings up front.
        disc_frame(disc, metric, Vector2::zeros())?;
        Ok(ProjectedField {
            field: field.clone(),
            disc: *disc,
            metric: metric.clone(),
        })
    }

    pub fn decompose(&self, uv: Vector2<f64>) -> Result<Decomposition> {
        let p = self.disc.embed(uv);
        let (tu, tv) = self.disc.coordinate_tangents(uv);
        let x = self.field.evaluate(&p);
        let g = &self.metric;
        let gram = Matrix2::new(g.pair(&p, &tu, &tu), g.pair(&p, &tu, &tv), g.pair(&p, &tv, &tu), g.pair(&p, &tv, &tv));
        let rhs = Vector2::new(g.pair(&p, &x, &tu), g.pair(&p, &x, &tv));
        let coords = gram
            .try_inverse()
            .map(|inv| inv * rhs)
            .ok_or(Error::DegenerateEmbedding { uv: [uv.x, uv.y] })?;
        let tangential = tu * coords.x + tv * coords.y;
        let normal = disc_frame(&self.disc, g, uv)?.normal;
        Ok(Decomposition {
            point: p,
            x,
            tangential,
            normal_component: g.pair(&p, &x, &normal),
            normal,
            coords,
        })
    }

    fn coords(&self, uv: Vector2<f64>) -> Vector2<f64> {
        let p = self.disc.embed(uv);
        let (tu, tv) = self.disc.coordinate_tangents(uv);
        let x = self.field.evaluate(&p);
        let g = &self.metric;
        let (a, b, d) = (g.pair(&p, &tu, &tu), g.pair(&p, &tu, &tv), g.pair(&p, &tv, &tv));
        let (f1, f2) = (g.pair(&p, &x, &tu), g.pair(&p, &x, &tv));
        let det = a * d - b * b;
        Vector2::new((d * f1 - b * f2) / det, (a * f2 - b * f1) / det)
    }
}

impl PlanarField for ProjectedField {
    fn eval(&self, uv: Vector2<f64>) -> Vector2<f64> {
        self.coords(uv)
    }
}

/// The characteristic-foliation direction: `X_D` rotated by +90°.
pub struct Rotated<'a, F: PlanarField>(pub &'a F);

impl<F: PlanarField> PlanarField for Rotated<'_, F> {
    fn eval(&self, uv: Vector2<f64>) -> Vector2<f64> {
        let w = self.0.eval(uv);
        Vector2::new(-w.y, w.x)
    }
}

/// Convenience constructor matching the pipeline vocabulary.
pub fn project_to_disc(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField) -> Result<ProjectedField> {
    ProjectedField::new(field, disc, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DiscShape, TubeChart};
    use nalgebra::Matrix3;
    use std::f64::consts::TAU;

    fn disc(shape: DiscShape) -> MeridionalDisc {
        MeridionalDisc::new(TubeChart::new(1.5, TAU).unwrap(), shape)
    }

    #[test]
    fn normal_field_projects_to_zero() {
        let f = FieldSpec::constant(Vector::z());
        let pf = project_to_disc(&f, &disc(DiscShape::flat(0.0)), &MetricField::Euclidean).unwrap();
        for uv in [Vector2::new(0.1, 0.2), Vector2::new(-0.7, 0.3)] {
            assert!(pf.eval(uv).norm() < 1e-15);
        }
    }

    #[test]
    fn azimuthal_field_is_tangential() {
        let f = FieldSpec::tube(crate::fields::Profile::Const(1.0), crate::fields::Profile::Const(0.0));
        let d = disc(DiscShape::flat(0.0));
        let pf = project_to_disc(&f, &d, &MetricField::Euclidean).unwrap();
        let uv = Vector2::new(0.3, 0.4);
        let dec = pf.decompose(uv).unwrap();
        assert!((dec.tangential.norm() - 1.0).abs() < 1e-14);
        assert!(dec.normal_component.abs() < 1e-15);
        // e_θ = (−v, u)/|uv| ; coordinate basis has |∂u| = R.
        let w = pf.eval(uv) * 1.5;
        assert!((w - Vector2::new(-0.4, 0.3) / 0.5).norm() < 1e-14);
    }

    #[test]
    fn twisted_tube_projects_to_sin_r_e_theta() {
        let f = FieldSpec::twisted_tube();
        let d = disc(DiscShape::flat(0.2));
        let pf = project_to_disc(&f, &d, &MetricField::Euclidean).unwrap();
        let uv = Vector2::new(-0.5, 0.6);
        let dec = pf.decompose(uv).unwrap();
        let r = 1.5 * uv.norm();
        let et = TubeChart::new(1.5, TAU).unwrap().e_theta(&dec.point);
        assert!((dec.tangential - et * r.sin()).norm() < 1e-14);
        assert!((dec.normal_component - r.cos()).abs() < 1e-14);
    }

    #[test]
    fn decomposition_reconstructs_x() {
        let g = MetricField::custom(|p: &Point| Matrix3::new(1.2, 0.1, 0.0, 0.1, 1.0 + 0.2 * p.x * p.x, 0.05, 0.0, 0.05, 0.9));
        let f = FieldSpec::lundquist(1.0).plus(FieldSpec::constant(Vector::new(0.1, -0.2, 0.3)));
        let d = disc(DiscShape { z0: 0.1, tilt: [0.2, 0.1], bump: 0.15 });
        let pf = project_to_disc(&f, &d, &g).unwrap();
        for k in 0..12 {
            let a = k as f64;
            let uv = Vector2::new(0.8 * (0.5 * a).cos() * (a / 12.0), 0.8 * (0.5 * a).sin());
            let dec = pf.decompose(uv).unwrap();
            let back = dec.tangential + dec.normal * dec.normal_component;
            assert!((back - dec.x).norm() < 1e-10);
            assert!((pf.eval(uv) - dec.coords).norm() < 1e-12);
        }
    }
}
