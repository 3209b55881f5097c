//! Vector fields sampled on an `(r, θ, z)` lattice.
//!
//! Lattice nodes sit at `r_i = i·R/(N_r − 1)`, `θ_j = 2πj/N_θ`, `z_k = kL/N_z`;
//! `θ` and `z` wrap periodically. Values are stored in the orthonormal
//! cylindrical frame `(e_r, e_θ, e_z)` as read from disk.
//!
//! Interpolation works on the cylindrical components and rotates the result
//! into the frame at the query angle, so tangent boundary data stays exactly
//! tangent and axisymmetric fields carry no chord error in `θ`. Nodes on the
//! core (and nodes reflected through it) have no frame and enter in Cartesian
//! components instead.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{Point, TubeChart, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Trilinear,
    /// Catmull-Rom in each axis.
    Tricubic,
}

#[derive(Clone, Debug)]
pub struct SampledGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
    pub chart: TubeChart,
    pub metric_tag: String,
    /// Cylindrical components, `r`-major then `θ` then `z`.
    values: Vec<[f64; 3]>,
    cartesian: Vec<Vector>,
    interpolation: Interpolation,
}

impl SampledGrid {
    pub fn new(
        (n_r, n_theta, n_z): (usize, usize, usize),
        chart: TubeChart,
        values: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if n_r < 4 || n_theta < 4 || n_z < 4 {
            return Err(Error::Data(format!(
                "lattice must be at least 4 in each axis, got {n_r}x{n_theta}x{n_z}"
            )));
        }
        if values.len() != n_r * n_theta * n_z {
            return Err(Error::Data(format!(
                "shape mismatch: expected {} vectors, found {}",
                n_r * n_theta * n_z,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::Data(format!("non-finite value at flat index {i}")));
        }
        let mut grid = SampledGrid {
            n_r,
            n_theta,
            n_z,
            chart,
            metric_tag: "euclidean".to_string(),
            values,
            cartesian: Vec::new(),
            interpolation: Interpolation::default(),
        };
        grid.cartesian = (0..grid.values.len())
            .map(|idx| {
                let j = (idx / n_z) % n_theta;
                let theta = TAU * j as f64 / n_theta as f64;
                let [vr, vt, vz] = grid.values[idx];
                let (s, c) = theta.sin_cos();
                Vector::new(vr * c - vt * s, vr * s + vt * c, vz)
            })
            .collect();
        Ok(grid)
    }

    /// Sample `field` on the lattice.
    pub fn from_field(field: &FieldSpec, chart: TubeChart, dims: (usize, usize, usize)) -> Result<Self> {
        let (n_r, n_theta, n_z) = dims;
        let mut values = Vec::with_capacity(n_r * n_theta * n_z);
        for i in 0..n_r {
            for j in 0..n_theta {
                for k in 0..n_z {
                    let p = Self::node_position(&chart, dims, i, j, k);
                    let theta = TAU * j as f64 / n_theta as f64;
                    let x = field.try_evaluate(&p)?;
                    let (s, c) = theta.sin_cos();
                    values.push([x.x * c + x.y * s, -x.x * s + x.y * c, x.z]);
                }
            }
        }
        Self::new(dims, chart, values)
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    fn node_position(chart: &TubeChart, dims: (usize, usize, usize), i: usize, j: usize, k: usize) -> Point {
        let r = chart.radius() * i as f64 / (dims.0 - 1) as f64;
        let theta = TAU * j as f64 / dims.1 as f64;
        let z = chart.length() * k as f64 / dims.2 as f64;
        chart.point(r, theta, z)
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        (
            self.chart.radius() / (self.n_r - 1) as f64,
            TAU / self.n_theta as f64,
            self.chart.length() / self.n_z as f64,
        )
    }

    /// Stencil for finite differences on interpolated data: one lattice
    /// spacing (the largest in physical units), so that central differences
    /// of the interpolant reproduce nodal central differences.
    pub fn fd_step(&self) -> f64 {
        let (dr, dt, dz) = self.spacing();
        match self.interpolation {
            Interpolation::Trilinear => dr.max(dz).max(0.5 * self.chart.radius() * dt),
            Interpolation::Tricubic => 1e-4 * self.chart.radius(),
        }
    }

    /// Flat index of a stencil node, and whether it must enter in Cartesian
    /// components (on or through the core).
    #[inline]
    fn node(&self, i: isize, j: isize, k: isize) -> (usize, bool) {
        // Reflect through the core for i < 0: (−r, θ) ≡ (r, θ + π).
        let (i, j, cartesian) = if i < 0 && self.n_theta.is_multiple_of(2) {
            (-i, j + self.n_theta as isize / 2, true)
        } else {
            let i = i.clamp(0, self.n_r as isize - 1);
            (i, j, i == 0)
        };
        let i = i.min(self.n_r as isize - 1) as usize;
        let j = j.rem_euclid(self.n_theta as isize) as usize;
        let k = k.rem_euclid(self.n_z as isize) as usize;
        ((i * self.n_theta + j) * self.n_z + k, cartesian)
    }

    #[inline]
    fn accumulate(&self, (idx, cartesian): (usize, bool), w: f64, cart: &mut Vector, cyl: &mut Vector) {
        if cartesian {
            *cart += self.cartesian[idx] * w;
        } else {
            *cyl += Vector::from(self.values[idx]) * w;
        }
    }

    pub fn evaluate(&self, p: &Point) -> Vector {
        let (r, theta, z) = self.chart.cylindrical(p);
        let fr = (r / self.chart.radius() * (self.n_r - 1) as f64).min((self.n_r - 1) as f64);
        let ft = theta / TAU * self.n_theta as f64;
        let fz = z / self.chart.length() * self.n_z as f64;
        let (i0, tr) = split(fr);
        let (j0, tt) = split(ft);
        let (k0, tz) = split(fz);
        let (mut cart, mut cyl) = (Vector::zeros(), Vector::zeros());
        match self.interpolation {
            Interpolation::Trilinear => {
                for (di, wi) in [(0, 1.0 - tr), (1, tr)] {
                    for (dj, wj) in [(0, 1.0 - tt), (1, tt)] {
                        for (dk, wk) in [(0, 1.0 - tz), (1, tz)] {
                            let w = wi * wj * wk;
                            if w != 0.0 {
                                self.accumulate(self.node(i0 + di, j0 + dj, k0 + dk), w, &mut cart, &mut cyl);
                            }
                        }
                    }
                }
            }
            Interpolation::Tricubic => {
                let wr = catmull_rom(tr);
                let wt = catmull_rom(tt);
                let wz = catmull_rom(tz);
                for (a, wa) in wr.iter().enumerate() {
                    for (b, wb) in wt.iter().enumerate() {
                        for (c, wc) in wz.iter().enumerate() {
                            let node = self.node(i0 + a as isize - 1, j0 + b as isize - 1, k0 + c as isize - 1);
                            self.accumulate(node, wa * wb * wc, &mut cart, &mut cyl);
                        }
                    }
                }
            }
        }
        let (s, c) = theta.sin_cos();
        cart + Vector::new(cyl.x * c - cyl.y * s, cyl.x * s + cyl.y * c, cyl.z)
    }
}

fn split(f: f64) -> (isize, f64) {
    let i = f.floor();
    (i as isize, f - i)
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}
