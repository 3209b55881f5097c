//! Fields with prescribed singularities on the meridional disc.
//!
//! For points `a_k` with degrees `d_k` the planar part is
//!
//! ```text
//! F(w) = i · Π (w − a_k)^{d_k} · Π conj(w − a_k)^{|d_k|} · exp(−χ(|w|) · log G(w))
//! ```
//!
//! with `w = (x + iy)/R`, the first product over positive degrees and the
//! second over negative ones. `G` collects the factors `(1 − a_k/w)` so that
//! for `|w| ≥ r₂` the field is a pure swirl `i·w·|w|^{2M}`, tangent to the
//! boundary torus. The axial component is a sum of disjoint bumps with the
//! requested signs, so `σ` at each point is exactly the bump sign.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, TubeChart, Vector};

type C = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPoint {
    /// Position in normalised disc coordinates `(u, v)`.
    pub position: [f64; 2],
    /// Poincaré index; `+1` elliptic, `−1` hyperbolic.
    pub index: i32,
    pub sigma: i32,
}

impl SyntheticPoint {
    pub fn elliptic(u: f64, v: f64, sigma: i32) -> Self {
        SyntheticPoint { position: [u, v], index: 1, sigma }
    }

    pub fn hyperbolic(u: f64, v: f64, sigma: i32) -> Self {
        SyntheticPoint { position: [u, v], index: -1, sigma }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticDiscField {
    pub chart: TubeChart,
    pub points: Vec<SyntheticPoint>,
    /// Declared eigenvalue; the field only realises the disc data.
    pub lambda: f64,
    r1: f64,
    r2: f64,
    radii: Vec<f64>,
}

const MIN_SEPARATION: f64 = 1e-3;
const MAX_RADIUS: f64 = 0.8;

/// Build a z-independent field whose projection to any flat meridional disc
/// has exactly the given singularities.
pub fn synthesize_disc_field(chart: TubeChart, points: &[SyntheticPoint], lambda: f64) -> Result<SyntheticDiscField> {
    if points.is_empty() {
        return Err(Error::SpecCollision("at least one singular point is required".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.index == 0 {
            return Err(Error::SpecCollision(format!("point {i} has index 0")));
        }
        if p.sigma != 1 && p.sigma != -1 {
            return Err(Error::SpecCollision(format!("point {i} has sigma {}, expected ±1", p.sigma)));
        }
        let r = p.position[0].hypot(p.position[1]);
        if !(r <= MAX_RADIUS) {
            return Err(Error::SpecCollision(format!("point {i} at |uv| = {r} is too close to the boundary")));
        }
    }
    let total: i32 = points.iter().map(|p| p.index).sum();
    if total != 1 {
        return Err(Error::SpecCollision(format!("indices sum to {total}, a transverse boundary requires 1")));
    }
    let mut radii = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for (j, q) in points.iter().enumerate() {
            if i != j {
                let d = (p.position[0] - q.position[0]).hypot(p.position[1] - q.position[1]);
                if d < MIN_SEPARATION {
                    return Err(Error::SpecCollision(format!("points {i} and {j} coincide (distance {d:e})")));
                }
                nearest = nearest.min(d);
            }
        }
        let r = p.position[0].hypot(p.position[1]);
        radii.push((0.45 * nearest).min(0.9 * (1.0 - r)).min(0.3));
    }
    let max_r = points.iter().map(|p| p.position[0].hypot(p.position[1])).fold(0.0, f64::max);
    Ok(SyntheticDiscField {
        chart,
        points: points.to_vec(),
        lambda,
        r1: max_r + 0.08,
        r2: 0.95,
        radii,
    })
}

/// Two positive and one negative elliptic point, two negative saddles.
pub fn five_point_disc(chart: TubeChart) -> SyntheticDiscField {
    let pts = [
        SyntheticPoint::elliptic(-0.45, 0.25, 1),
        SyntheticPoint::elliptic(0.45, 0.25, 1),
        SyntheticPoint::elliptic(0.0, -0.45, -1),
        SyntheticPoint::hyperbolic(0.0, 0.25, -1),
        SyntheticPoint::hyperbolic(0.3, -0.25, -1),
    ];
    synthesize_disc_field(chart, &pts, 1.0).expect("fixture is well formed")
}

impl SyntheticDiscField {
    fn planar(&self, w: C) -> C {
        let mut prod = C::new(0.0, 1.0);
        let mut log_g = C::new(0.0, 0.0);
        let rw = w.norm();
        let chi = smoothstep((rw - self.r1) / (self.r2 - self.r1));
        for p in &self.points {
            let a = C::new(p.position[0], p.position[1]);
            let d = p.index.unsigned_abs() as i32;
            let factor = if p.index > 0 { w - a } else { (w - a).conj() };
            prod *= factor.powi(d);
            if chi > 0.0 {
                let l = (C::new(1.0, 0.0) - a / w).ln() * d as f64;
                log_g += if p.index > 0 { l } else { l.conj() };
            }
        }
        if chi > 0.0 {
            prod * (-log_g * chi).exp()
        } else {
            prod
        }
    }

    fn axial(&self, w: C) -> f64 {
        self.points
            .iter()
            .zip(&self.radii)
            .map(|(p, rho)| {
                let s = (w - C::new(p.position[0], p.position[1])).norm() / rho;
                p.sigma as f64 * bump(s)
            })
            .sum()
    }

    pub fn evaluate(&self, p: &Point) -> Vector {
        let w = C::new(p.x, p.y) / self.chart.radius();
        let f = self.planar(w);
        Vector::new(f.re, f.im, self.axial(w))
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn chart() -> TubeChart {
        TubeChart::new(1.0, TAU).unwrap()
    }

    #[test]
    fn vanishes_exactly_at_prescribed_points() {
        let f = five_point_disc(chart());
        for p in &f.points {
            let x = f.evaluate(&Point::new(p.position[0], p.position[1], 0.3));
            assert!(x.xy().norm() < 1e-15);
            assert!((x.z - p.sigma as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_is_a_pure_swirl() {
        let f = five_point_disc(chart());
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            let p = Point::new(t.cos(), t.sin(), 0.0);
            let x = f.evaluate(&p);
            let radial = x.x * t.cos() + x.y * t.sin();
            let azim = -x.x * t.sin() + x.y * t.cos();
            assert!(radial.abs() < 1e-12 * azim.abs());
            assert!(azim > 0.0);
            assert!(x.z.abs() < 1e-300);
        }
    }

    #[test]
    fn rejects_collisions_and_bad_totals() {
        let c = chart();
        let same = [SyntheticPoint::elliptic(0.1, 0.1, 1), SyntheticPoint::elliptic(0.1, 0.1, -1), SyntheticPoint::hyperbolic(0.0, 0.5, 1)];
        assert!(matches!(synthesize_disc_field(c, &same, 1.0), Err(Error::SpecCollision(_))));
        let two = [SyntheticPoint::elliptic(0.1, 0.1, 1), SyntheticPoint::elliptic(-0.3, 0.1, 1)];
        assert!(matches!(synthesize_disc_field(c, &two, 1.0), Err(Error::SpecCollision(_))));
        let edge = [SyntheticPoint::elliptic(0.95, 0.0, 1)];
        assert!(synthesize_disc_field(c, &edge, 1.0).is_err());
    }
}
