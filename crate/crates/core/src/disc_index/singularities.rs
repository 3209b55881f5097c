//! Zeros of a planar field on the unit disc and their Poincaré indices.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projection::PlanarField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Cells per axis across `[−1, 1]²`.
    pub resolution: usize,
    /// Initial samples on each winding circle.
    pub winding_samples: usize,
    pub merge_radius: f64,
    /// Newton stops once `‖F‖ < newton_tol · scale`.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            resolution: 96,
            winding_samples: 64,
            merge_radius: 1e-4,
            newton_tol: 1e-10,
            max_newton: 50,
        }
    }
}

/// A refined zero of the planar field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub uv: Vector2<f64>,
    pub jacobian: Matrix2<f64>,
    pub residual: f64,
    /// Winding of the seed cell (0 for seeds found by the local-minimum test).
    pub cell_winding: i32,
}

impl Zero {
    /// Rank of the Jacobian with a relative cutoff.
    pub fn rank(&self, scale: f64) -> usize {
        let j = &self.jacobian;
        let fro2 = j.norm_squared();
        if fro2.sqrt() <= 1e-6 * scale {
            0
        } else if j.determinant().abs() <= 1e-6 * fro2 {
            1
        } else {
            2
        }
    }
}

/// Scanned field data reused by the caller for scale estimates.
pub struct Scan {
    pub zeros: Vec<Zero>,
    /// Median `‖F‖` over the lattice nodes inside the disc.
    pub scale: f64,
}

fn jacobian<F: PlanarField + ?Sized>(f: &F, uv: Vector2<f64>) -> Matrix2<f64> {
    let h = 1e-6;
    let du = (f.eval(uv + Vector2::new(h, 0.0)) - f.eval(uv - Vector2::new(h, 0.0))) / (2.0 * h);
    let dv = (f.eval(uv + Vector2::new(0.0, h)) - f.eval(uv - Vector2::new(0.0, h))) / (2.0 * h);
    Matrix2::from_columns(&[du, dv])
}

/// Damped Newton with a Levenberg–Marquardt fallback for near-singular Jacobians.
fn newton<F: PlanarField + ?Sized>(f: &F, start: Vector2<f64>, tol: f64, max_iter: usize) -> (Vector2<f64>, f64) {
    let mut x = start;
    let mut fx = f.eval(x);
    let mut res = fx.norm();
    for _ in 0..max_iter {
        if res < tol {
            break;
        }
        let j = jacobian(f, x);
        let jtj = j.transpose() * j;
        let mu = 1e-14 * jtj.trace() + 1e-300;
        let step = match j.try_inverse() {
            Some(inv) if j.determinant().abs() > 1e-10 * jtj.trace() => -(inv * fx),
            _ => match (jtj + Matrix2::identity() * mu).try_inverse() {
                Some(m) => -(m * j.transpose() * fx),
                None => break,
            },
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = x + step * t;
            let fc = f.eval(cand);
            if fc.norm() < res {
                x = cand;
                fx = fc;
                res = fc.norm();
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, res)
}

/// Winding number of `F` around a closed polyline, subdividing edges until
/// every angle increment is below `π/2`.
fn edge_turn<F: PlanarField + ?Sized>(f: &F, a: Vector2<f64>, b: Vector2<f64>, fa: Vector2<f64>, fb: Vector2<f64>, depth: u32) -> Option<f64> {
    let d = angle_between(fa, fb)?;
    if d.abs() < std::f64::consts::FRAC_PI_2 || depth == 0 {
        return Some(d);
    }
    let m = (a + b) * 0.5;
    let fm = f.eval(m);
    Some(edge_turn(f, a, m, fa, fm, depth - 1)? + edge_turn(f, m, b, fm, fb, depth - 1)?)
}

fn angle_between(a: Vector2<f64>, b: Vector2<f64>) -> Option<f64> {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return None;
    }
    Some((a.x * b.y - a.y * b.x).atan2(a.dot(&b)))
}

/// Locate all zeros of `F` in the closed unit disc.
pub fn find_singularities<F: PlanarField>(f: &F, cfg: &ScanConfig) -> Result<Scan> {
    let n = cfg.resolution.max(8);
    let h = 2.0 / n as f64;
    let node = |i: usize, j: usize| Vector2::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
    let values: Vec<Vector2<f64>> = (0..(n + 1) * (n + 1))
        .into_par_iter()
        .map(|idx| f.eval(node(idx / (n + 1), idx % (n + 1))))
        .collect();
    let val = |i: usize, j: usize| values[i * (n + 1) + j];

    let mut norms: Vec<f64> = (0..(n + 1) * (n + 1))
        .filter(|idx| node(idx / (n + 1), idx % (n + 1)).norm() <= 1.0)
        .map(|idx| values[idx].norm())
        .collect();
    norms.sort_by(f64::total_cmp);
    let scale = norms[norms.len() / 2];
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::NonGenericField("projected field vanishes on most of the disc".into()));
    }
    let tol = cfg.newton_tol * scale;

    // Seeds: cells with nonzero winding, and nodes where ‖F‖ is a local
    // minimum small enough that a zero plausibly lies within two cells.
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let c = node(i, j) + Vector2::new(0.5 * h, 0.5 * h);
            c.norm() - 0.75 * h < 1.0
        })
        .collect();
    let mut seeds: Vec<(Vector2<f64>, i32)> = cells
        .par_iter()
        .filter_map(|&(i, j)| {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut total = 0.0;
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                match edge_turn(f, node(a.0, a.1), node(b.0, b.1), val(a.0, a.1), val(b.0, b.1), 10) {
                    Some(d) => total += d,
                    // A zero on the cell boundary: let Newton decide.
                    None => return Some((node(a.0, a.1), 0)),
                }
            }
            let w = (total / TAU).round() as i32;
            (w != 0).then(|| (node(i, j) + Vector2::new(0.5 * h, 0.5 * h), w))
        })
        .collect();
    for i in 1..n {
        for j in 1..n {
            let p = node(i, j);
            if p.norm() > 1.0 + h {
                continue;
            }
            let v = val(i, j).norm();
            let mut is_min = true;
            let mut spread = 0.0_f64;
            for di in -1i32..=1 {
                for dj in -1i32..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = val((i as i32 + di) as usize, (j as i32 + dj) as usize);
                    is_min &= v <= w.norm();
                    spread = spread.max((w - val(i, j)).norm());
                }
            }
            if is_min && v < 2.0 * spread {
                seeds.push((p, 0));
            }
        }
    }

    let refined: Vec<(Vector2<f64>, i32, Vector2<f64>, f64)> = seeds
        .par_iter()
        .map(|&(s, w)| {
            let (x, res) = newton(f, s, tol, cfg.max_newton);
            (s, w, x, res)
        })
        .collect();

    let mut zeros: Vec<Zero> = Vec::new();
    for (seed, w, x, res) in refined {
        let inside = x.norm() <= 1.0 + 1e-9;
        if res >= tol || !inside {
            if w != 0 {
                return Err(Error::DegenerateSingularity { cell: [seed.x, seed.y], residual: res });
            }
            continue;
        }
        if let Some(z) = zeros.iter_mut().find(|z| (z.uv - x).norm() < cfg.merge_radius) {
            if w != 0 {
                z.cell_winding = w;
            }
            continue;
        }
        zeros.push(Zero { uv: x, jacobian: jacobian(f, x), residual: res, cell_winding: w });
    }
    zeros.sort_by(|a, b| a.uv.x.total_cmp(&b.uv.x).then(a.uv.y.total_cmp(&b.uv.y)));

    let rank_one = zeros.iter().filter(|z| z.rank(scale) == 1).count();
    if rank_one >= 3 {
        return Err(Error::NonGenericField(format!(
            "{rank_one} zeros with rank-one Jacobian, consistent with a curve of zeros"
        )));
    }
    Ok(Scan { zeros, scale })
}

/// Poincaré index of `F` around the circle of `radius` about `center`.
///
/// Sampling doubles until every angle increment is below `π/2`; the total
/// turning must then be within `1e-6` of a multiple of `2π`.
pub fn poincare_index<F: PlanarField + ?Sized>(f: &F, center: Vector2<f64>, radius: f64, samples: usize, norm_floor: f64) -> Result<i32> {
    let radius_err = |reason: &str| Error::Radius { center: [center.x, center.y], radius, reason: reason.into() };
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(radius_err("radius must be positive"));
    }
    let mut n = samples.max(16);
    loop {
        let vals: Vec<Vector2<f64>> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                f.eval(center + Vector2::new(t.cos(), t.sin()) * radius)
            })
            .collect();
        if vals.iter().any(|v| !(v.norm() > norm_floor)) {
            return Err(radius_err("field vanishes on the circle"));
        }
        let mut total = 0.0;
        let mut max_step = 0.0_f64;
        for k in 0..n {
            let d = angle_between(vals[k], vals[(k + 1) % n]).expect("nonzero values");
            max_step = max_step.max(d.abs());
            total += d;
        }
        if max_step < std::f64::consts::FRAC_PI_2 {
            let k = (total / TAU).round();
            if (total - TAU * k).abs() > 1e-6 {
                return Err(Error::Numerical(format!("winding {total} is not a multiple of 2π")));
            }
            return Ok(k as i32);
        }
        if n >= 1 << 20 {
            return Err(radius_err("angle increments stay above π/2"));
        }
        n *= 2;
    }
}
