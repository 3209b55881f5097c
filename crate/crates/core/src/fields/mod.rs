//! Vector fields on the solid torus and the vector calculus around them.

pub mod bessel;
pub mod calculus;
pub mod grid;

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disc_index::synthetic::SyntheticDiscField;
use crate::error::{Error, Result};
use crate::geometry::{Point, TubeChart, Vector};

pub use calculus::{
    beltrami_residuals, contact_volume_sign, curl, divergence, estimate_lambda, l2_energy,
    reeb_residual, BeltramiReport, BeltramiTolerances, ContactSign, SampleSet,
};
pub use grid::{Interpolation, SampledGrid};

/// Radial profile of a cylindrically symmetric tube field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Sin(f64),
    Cos(f64),
    Const(f64),
}

impl Profile {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Sin(k) => (k * r).sin(),
            Profile::Cos(k) => (k * r).cos(),
            Profile::Const(c) => c,
        }
    }
}

/// Smooth fixed-seed trigonometric perturbation, periodic in `z`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub amplitude: f64,
    pub seed: u64,
    modes: Vec<Mode>,
}

#[derive(Clone, Debug)]
struct Mode {
    wave: Vector,
    phase: f64,
    direction: Vector,
}

impl Perturbation {
    const MODES: usize = 6;

    pub fn new(amplitude: f64, seed: u64, chart: &TubeChart) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k_axial = TAU / chart.length();
        let modes = (0..Self::MODES)
            .map(|_| {
                let kx = rng.random_range(-2.0..2.0) / chart.radius();
                let ky = rng.random_range(-2.0..2.0) / chart.radius();
                let m = rng.random_range(0..3) as f64;
                let phase = rng.random_range(0.0..TAU);
                let d = Vector::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let direction = if d.norm() > 1e-3 { d.normalize() } else { Vector::z() };
                Mode {
                    wave: Vector::new(kx, ky, m * k_axial),
                    phase,
                    direction,
                }
            })
            .collect();
        Perturbation { amplitude, seed, modes }
    }

    fn eval(&self, p: &Point) -> Vector {
        let norm = (Self::MODES as f64).sqrt();
        self.modes
            .iter()
            .map(|m| m.direction * (m.wave.dot(p) + m.phase).sin())
            .fold(Vector::zeros(), |acc, v| acc + v)
            * (self.amplitude / norm)
    }
}

/// A vector field on the solid torus.
#[derive(Clone, Debug)]
pub enum FieldSpec {
    /// `X = f(r) e_θ + g(r) e_z`.
    Tube { azimuthal: Profile, axial: Profile },
    /// Force-free field `J₁(λ₀r) e_θ + J₀(λ₀r) e_z`, a curl eigenfield with eigenvalue `λ₀`.
    Lundquist { lambda0: f64 },
    Synthetic(Arc<SyntheticDiscField>),
    Sampled(Arc<SampledGrid>),
    /// `X(p) = A p + b` in Cartesian components.
    Affine { matrix: Matrix3<f64>, offset: Vector },
    Scaled(f64, Box<FieldSpec>),
    Sum(Box<FieldSpec>, Box<FieldSpec>),
    Perturbed(Box<FieldSpec>, Arc<Perturbation>),
}

impl FieldSpec {
    pub fn tube(azimuthal: Profile, axial: Profile) -> Self {
        FieldSpec::Tube { azimuthal, axial }
    }

    /// `sin r e_θ + cos r e_z`.
    pub fn twisted_tube() -> Self {
        Self::tube(Profile::Sin(1.0), Profile::Cos(1.0))
    }

    pub fn lundquist(lambda0: f64) -> Self {
        FieldSpec::Lundquist { lambda0 }
    }

    pub fn constant(v: Vector) -> Self {
        FieldSpec::Affine {
            matrix: Matrix3::zeros(),
            offset: v,
        }
    }

    pub fn affine(matrix: Matrix3<f64>, offset: Vector) -> Self {
        FieldSpec::Affine { matrix, offset }
    }

    pub fn scaled(self, c: f64) -> Self {
        FieldSpec::Scaled(c, Box::new(self))
    }

    pub fn plus(self, other: FieldSpec) -> Self {
        FieldSpec::Sum(Box::new(self), Box::new(other))
    }

    pub fn perturbed(self, amplitude: f64, seed: u64, chart: &TubeChart) -> Self {
        FieldSpec::Perturbed(Box::new(self), Arc::new(Perturbation::new(amplitude, seed, chart)))
    }

    /// Field value in Cartesian components. Deterministic and pure.
    pub fn evaluate(&self, p: &Point) -> Vector {
        match self {
            FieldSpec::Tube { azimuthal, axial } => {
                let r = p.x.hypot(p.y);
                let f = azimuthal.eval(r);
                // f(r) e_θ = (f(r)/r)(−y, x); f(r)/r stays finite on the core for f(0) = 0.
                let f_over_r = if r > 1e-300 {
                    f / r
                } else {
                    derivative_at_zero(azimuthal)
                };
                Vector::new(-p.y * f_over_r, p.x * f_over_r, axial.eval(r))
            }
            FieldSpec::Lundquist { lambda0 } => {
                let r = p.x.hypot(p.y);
                let x = lambda0 * r;
                let j1_over_r = if r > 1e-300 {
                    bessel::j1(x) / r
                } else {
                    0.5 * lambda0
                };
                Vector::new(-p.y * j1_over_r, p.x * j1_over_r, bessel::j0(x))
            }
            FieldSpec::Synthetic(s) => s.evaluate(p),
            FieldSpec::Sampled(g) => g.evaluate(p),
            FieldSpec::Affine { matrix, offset } => matrix * p + offset,
            FieldSpec::Scaled(c, inner) => inner.evaluate(p) * *c,
            FieldSpec::Sum(a, b) => a.evaluate(p) + b.evaluate(p),
            FieldSpec::Perturbed(inner, pert) => inner.evaluate(p) + pert.eval(p),
        }
    }

    /// Like [`evaluate`](Self::evaluate) but rejects non-finite values.
    pub fn try_evaluate(&self, p: &Point) -> Result<Vector> {
        let v = self.evaluate(p);
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::Data(format!("non-finite field value at {:?}", [p.x, p.y, p.z])))
        }
    }

    /// True when no sampled grid is involved.
    pub fn is_analytic(&self) -> bool {
        match self {
            FieldSpec::Sampled(_) => false,
            FieldSpec::Scaled(_, f) | FieldSpec::Perturbed(f, _) => f.is_analytic(),
            FieldSpec::Sum(a, b) => a.is_analytic() && b.is_analytic(),
            _ => true,
        }
    }

    /// Declared eigenvalue of a fixture known only through disc data.
    pub fn declared_lambda(&self) -> Option<f64> {
        match self {
            FieldSpec::Synthetic(s) => Some(s.lambda),
            FieldSpec::Scaled(c, f) if *c > 0.0 => f.declared_lambda(),
            _ => None,
        }
    }

    /// Central-difference step used by the calculus routines.
    pub fn fd_step(&self, chart: &TubeChart) -> f64 {
        let analytic = (1e-4 * chart.radius()).max(1e-5);
        self.coarsest_grid_step().map_or(analytic, |h| h.max(analytic))
    }

    fn coarsest_grid_step(&self) -> Option<f64> {
        match self {
            FieldSpec::Sampled(g) => Some(g.fd_step()),
            FieldSpec::Scaled(_, f) | FieldSpec::Perturbed(f, _) => f.coarsest_grid_step(),
            FieldSpec::Sum(a, b) => match (a.coarsest_grid_step(), b.coarsest_grid_step()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }
}

fn derivative_at_zero(p: &Profile) -> f64 {
    match *p {
        Profile::Sin(k) => k,
        _ => 0.0,
    }
}
