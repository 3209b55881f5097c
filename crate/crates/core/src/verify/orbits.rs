//! Closed-orbit search by Newton iteration on first-return maps.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{clip_to_chart, dopri_step, integrate_flowline, Stepper};
use crate::error::Result;
use crate::fields::FieldSpec;
use crate::geometry::{Point, TubeChart, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSearchConfig {
    pub seeds_r: usize,
    pub seeds_z: usize,
    /// Longest return time considered, in units of `L`.
    pub max_period_lengths: f64,
    pub integration_tol: f64,
    pub closure_tol: f64,
    pub max_newton: usize,
}

impl Default for OrbitSearchConfig {
    fn default() -> Self {
        OrbitSearchConfig {
            seeds_r: 8,
            seeds_z: 8,
            max_period_lengths: 50.0,
            integration_tol: 1e-11,
            closure_tol: 1e-6,
            max_newton: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    /// Half-plane `θ = 0`, coordinates `(r, z)`.
    Meridional,
    /// Plane `z = z₀`, coordinates `(x, y)`.
    Axial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub start: [f64; 3],
    pub period: f64,
    /// `(m, n)`: turns around the core, turns along `S¹`.
    pub winding: [i32; 2],
    pub contractible: bool,
    pub closure_residual: f64,
    /// Both winding numbers came out within `1e-6` of integers.
    pub winding_exact: bool,
    pub section: Section,
    /// Polyline through the orbit, for rendering and deduplication.
    pub samples: Vec<[f64; 3]>,
}

const MAX_STEPS: usize = 2_000_000;

struct Return {
    coords: Vector2<f64>,
    time: f64,
    dtheta: f64,
    dz: f64,
}

struct SectionMap<'a> {
    field: &'a FieldSpec,
    chart: TubeChart,
    section: Section,
    z0: f64,
    direction: f64,
    max_time: f64,
    tol: f64,
}

impl SectionMap<'_> {
    fn point(&self, s: Vector2<f64>) -> Point {
        match self.section {
            Section::Meridional => Point::new(s.x.clamp(0.0, self.chart.radius()), 0.0, s.y),
            Section::Axial => {
                let mut p = Point::new(s.x, s.y, self.z0);
                clip_to_chart(&self.chart, &mut p);
                p
            }
        }
    }

    fn event(&self, theta_acc: f64, p: &Point, start_z: f64) -> f64 {
        match self.section {
            Section::Meridional => theta_acc - TAU * self.direction,
            Section::Axial => p.z - start_z - self.chart.length() * self.direction,
        }
    }

    fn first_return(&self, s: Vector2<f64>) -> Option<Return> {
        let start = self.point(s);
        let f = |p: &Point| self.field.evaluate(p);
        let speed = f(&start).norm().max(1e-12);
        let h_max = 0.05 * self.chart.radius().min(self.chart.length()) / speed;
        let mut stepper = Stepper::new(self.tol, 0.01 * h_max, h_max);
        let (mut t, mut y, mut theta) = (0.0, start, 0.0);
        let mut e0 = self.event(0.0, &y, start.z);
        let core = 1e-3 * self.chart.radius();
        for _ in 0..MAX_STEPS {
            if t >= self.max_time {
                break;
            }
            if self.section == Section::Meridional && y.xy().norm() < core {
                // Angles around the core are unreliable; the axial section covers it.
                return None;
            }
            let limit = match self.section {
                // Keep angle increments unambiguous near the core.
                Section::Meridional => 0.2 * y.xy().norm().max(1e-9) / f(&y).norm().max(1e-300),
                Section::Axial => f64::INFINITY,
            };
            let (h, mut y1) = stepper.advance(&f, t, &y, limit).ok()?;
            clip_to_chart(&self.chart, &mut y1);
            let dth = angle(&y, &y1);
            let e1 = self.event(theta + dth, &y1, start.z);
            if e0 < 0.0 && e1 >= 0.0 || e0 > 0.0 && e1 <= 0.0 {
                // Bisect the crossing inside the accepted step.
                let (mut lo, mut hi) = (0.0, h);
                let mut yc = y1;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (ym, _) = dopri_step(&f, &y, mid);
                    let em = self.event(theta + angle(&y, &ym), &ym, start.z);
                    if em.signum() == e0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                        yc = ym;
                    }
                }
                let dth = angle(&y, &yc);
                let coords = match self.section {
                    Section::Meridional => Vector2::new(yc.xy().norm(), yc.z),
                    Section::Axial => Vector2::new(yc.x, yc.y),
                };
                return Some(Return { coords, time: t + hi, dtheta: theta + dth, dz: yc.z - start.z });
            }
            t += h;
            theta += dth;
            y = y1;
            e0 = e1;
        }
        None
    }

    /// Return displacement with `z` wrapped into `(−L/2, L/2]`.
    fn displacement(&self, s: Vector2<f64>) -> Option<(Vector2<f64>, Return)> {
        let r = self.first_return(s)?;
        let mut d = r.coords - s;
        if self.section == Section::Meridional {
            let l = self.chart.length();
            d.y -= l * (d.y / l).round();
        }
        Some((d, r))
    }
}

fn angle(a: &Point, b: &Point) -> f64 {
    (a.x * b.y - a.y * b.x).atan2(a.x * b.x + a.y * b.y)
}

fn newton_orbit(map: &SectionMap<'_>, s0: Vector2<f64>, cfg: &OrbitSearchConfig) -> Option<(Vector2<f64>, Return)> {
    let scale = map.chart.radius();
    let tol = 1e-10 * scale.max(1.0);
    let mut s = s0;
    let (mut d, mut ret) = map.displacement(s)?;
    for _ in 0..cfg.max_newton {
        if d.norm() < tol {
            return Some((s, ret));
        }
        let h = 1e-7 * scale;
        let mut jac = Matrix2::zeros();
        for k in 0..2 {
            let mut e = Vector2::zeros();
            e[k] = h;
            let (dp, _) = map.displacement(s + e)?;
            let (dm, _) = map.displacement(s - e)?;
            jac.set_column(k, &((dp - dm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * jac;
        let mu = 1e-12 * jtj.trace() + 1e-300;
        let step = -((jtj + Matrix2::identity() * mu).try_inverse()? * jac.transpose() * d);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let cand = s + step * t;
            if let Some((dc, rc)) = map.displacement(cand) {
                if dc.norm() < d.norm() {
                    s = cand;
                    d = dc;
                    ret = rc;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (d.norm() < tol).then_some((s, ret))
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let t = if ab.norm_squared() > 0.0 { ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to a polyline, identifying `z` modulo `l`.
fn distance_to_orbit(p: &Point, samples: &[[f64; 3]], l: f64) -> f64 {
    let pts: Vec<Point> = samples.iter().map(|q| Point::new(q[0], q[1], q[2])).collect();
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0].z + w[1].z);
            let mut q = *p;
            q.z -= l * ((q.z - mid) / l).round();
            segment_distance(&q, &w[0], &w[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Seed a stratified set of return maps and collect the closed orbits found.
pub fn find_closed_orbits(field: &FieldSpec, chart: &TubeChart, cfg: &OrbitSearchConfig) -> Result<Vec<OrbitRecord>> {
    // The axis is seeded explicitly: the core orbit can be degenerate, and
    // Newton from nearby seeds then stalls on nearly closed neighbours.
    let seeds: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
        .chain((0..cfg.seeds_r).flat_map(|i| {
            (0..cfg.seeds_z).map(move |k| {
                (
                    (i as f64 + 0.5) / cfg.seeds_r as f64 * chart.radius(),
                    k as f64 / cfg.seeds_z as f64 * chart.length(),
                )
            })
        }))
        .collect();
    let l = chart.length();
    let found: Vec<Option<OrbitRecord>> = seeds
        .par_iter()
        .map(|&(r, z)| {
            let p = chart.point(r, 0.0, z);
            let x = field.evaluate(&p);
            let xt = x.dot(&chart.e_theta(&p));
            let (section, s0, direction) = if xt.abs() >= x.z.abs() {
                (Section::Meridional, Vector2::new(r, z), xt.signum())
            } else {
                (Section::Axial, Vector2::new(p.x, p.y), x.z.signum())
            };
            let map = SectionMap {
                field,
                chart: *chart,
                section,
                z0: z,
                direction,
                max_time: cfg.max_period_lengths * l / x.norm().max(1e-12),
                tol: cfg.integration_tol,
            };
            let (s, ret) = newton_orbit(&map, s0, cfg)?;
            let start = map.point(s);
            let fl = integrate_flowline(field, chart, start, ret.time, 0.1 * cfg.integration_tol).ok()?;
            let end = *fl.points.last()?;
            let mut gap = end - start;
            gap.z -= l * (gap.z / l).round();
            let closure_residual = gap.norm();
            if closure_residual >= cfg.closure_tol {
                return None;
            }
            let max_r = fl.points.iter().map(|q| q.xy().norm()).fold(0.0, f64::max);
            let m_raw = ret.dtheta / TAU;
            let n_raw = ret.dz / l;
            let on_core = max_r < 1e-6 * chart.radius();
            let m = if on_core { 0 } else { m_raw.round() as i32 };
            let n = n_raw.round() as i32;
            let winding_exact = (on_core || (m_raw - m as f64).abs() < 1e-6) && (n_raw - n as f64).abs() < 1e-6;
            let stride = (fl.points.len() / 256).max(1);
            let mut samples: Vec<[f64; 3]> = fl.points.iter().step_by(stride).map(|q| [q.x, q.y, q.z]).collect();
            samples.push([end.x, end.y, end.z]);
            Some(OrbitRecord {
                start: [start.x, start.y, start.z],
                period: ret.time,
                winding: [m, n],
                contractible: n == 0,
                closure_residual,
                winding_exact,
                section,
                samples,
            })
        })
        .collect();

    let mut orbits: Vec<OrbitRecord> = Vec::new();
    for rec in found.into_iter().flatten() {
        let p = Point::new(rec.start[0], rec.start[1], rec.start[2]);
        let dup = orbits
            .iter()
            .any(|o| o.winding == rec.winding && distance_to_orbit(&p, &o.samples, l) < 1e-5 * chart.radius().max(1.0));
        if !dup {
            orbits.push(rec);
        }
    }
    log::info!("found {} closed orbits from {} seeds", orbits.len(), seeds.len());
    Ok(orbits)
}

/// True when `p` lies on the axis to within `eps`.
pub fn on_axis(p: &Vector, eps: f64) -> bool {
    p.xy().norm() < eps
}
