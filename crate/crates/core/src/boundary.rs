//! The boundary torus: invariance, the characteristic line field and its
//! classification.
//!
//! On `∂V` the kernel of `α` restricted to the torus is spanned by `F = J X∂`,
//! the boundary part of `X` rotated by +90° in the induced metric. Since
//! `α(F) = 0` identically, `F` is a continuous global section and needs no
//! propagation of orientation.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{MetricField, TubeChart, TRANSVERSE_MIN_ANGLE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub n_theta: usize,
    pub n_z: usize,
    /// `max |α(e_θ)| / |X|` below which the foliation counts as meridional.
    pub meridional_tol: f64,
    /// Witnesses are re-checked with this many times more samples.
    pub witness_refine: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { n_theta: 256, n_z: 256, meridional_tol: 1e-5, witness_refine: 4 }
    }
}

/// Values of `α` on the orthonormal boundary frame `(e_θ, e_z)` together with
/// the induced Gram matrix `[h₁₁, h₁₂, h₂₂]` of that frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySample {
    pub alpha: [f64; 2],
    pub gram: [f64; 3],
}

type Source = Arc<dyn Fn(f64, f64) -> BoundarySample + Send + Sync>;

/// Characteristic line field on `∂V`, sampled on an `(θ, z)` grid and
/// evaluable anywhere through its source.
#[derive(Clone)]
pub struct TorusLineField {
    pub chart: TubeChart,
    pub n_theta: usize,
    pub n_z: usize,
    source: Source,
}

impl std::fmt::Debug for TorusLineField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusLineField")
            .field("chart", &self.chart)
            .field("n_theta", &self.n_theta)
            .field("n_z", &self.n_z)
            .finish_non_exhaustive()
    }
}

impl TorusLineField {
    /// Line field of a boundary vector with components `(X_θ, X_z)` in the
    /// Euclidean induced metric.
    pub fn from_boundary_vector<F>(chart: TubeChart, n_theta: usize, n_z: usize, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        TorusLineField {
            chart,
            n_theta,
            n_z,
            source: Arc::new(move |t, z| BoundarySample { alpha: f(t, z), gram: [1.0, 0.0, 1.0] }),
        }
    }

    pub fn sample(&self, theta: f64, z: f64) -> BoundarySample {
        (self.source)(theta, z)
    }

    /// Unit direction of `F` in the frame `(e_θ, e_z)`.
    pub fn direction(&self, theta: f64, z: f64) -> [f64; 2] {
        let s = self.sample(theta, z);
        let c = [-s.alpha[1], s.alpha[0]];
        let [h11, h12, h22] = s.gram;
        let n = (h11 * c[0] * c[0] + 2.0 * h12 * c[0] * c[1] + h22 * c[1] * c[1]).sqrt();
        if n > 0.0 {
            [c[0] / n, c[1] / n]
        } else {
            [0.0, 0.0]
        }
    }

    pub fn theta_at(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }

    pub fn z_at(&self, k: usize) -> f64 {
        self.chart.length() * k as f64 / self.n_z as f64
    }
}

/// Dual norm of `α` with respect to the Gram matrix `h`.
fn alpha_norm(s: &BoundarySample) -> f64 {
    let [h11, h12, h22] = s.gram;
    let det = h11 * h22 - h12 * h12;
    let [a, b] = s.alpha;
    ((h22 * a * a - 2.0 * h12 * a * b + h11 * b * b) / det).max(0.0).sqrt()
}

fn vector_norm(s: &BoundarySample, v: [f64; 2]) -> f64 {
    let [h11, h12, h22] = s.gram;
    (h11 * v[0] * v[0] + 2.0 * h12 * v[0] * v[1] + h22 * v[1] * v[1]).max(0.0).sqrt()
}

/// Fail unless `X` is tangent to the boundary torus within `tol`.
///
/// Returns `max |X·e_r| / |X|` over an `n_theta × n_z` grid.
pub fn check_invariance(field: &FieldSpec, chart: &TubeChart, tol: f64, (n_theta, n_z): (usize, usize)) -> Result<f64> {
    let r = chart.radius();
    let mut worst = 0.0_f64;
    for j in 0..n_theta {
        let t = TAU * j as f64 / n_theta as f64;
        for k in 0..n_z {
            let p = chart.point(r, t, chart.length() * k as f64 / n_z as f64);
            let x = field.try_evaluate(&p)?;
            let n = x.norm();
            if n > 0.0 {
                worst = worst.max(x.dot(&chart.e_r(&p)).abs() / n);
            }
        }
    }
    if worst > tol {
        return Err(Error::NotInvariant { max_radial: worst });
    }
    Ok(worst)
}

/// Characteristic line field of `ker α ∩ T∂V`.
pub fn boundary_foliation(field: &FieldSpec, metric: &MetricField, chart: &TubeChart, cfg: &BoundaryConfig) -> Result<TorusLineField> {
    let (f, g) = (field.clone(), metric.clone());
    let c = *chart;
    let source: Source = Arc::new(move |theta, z| {
        let (field, metric) = (&f, &g);
        let p = c.point(c.radius(), theta, z);
        let x = field.evaluate(&p);
        let e1 = c.e_theta(&p);
        let e2 = crate::geometry::Vector::z();
        BoundarySample {
            alpha: [metric.pair(&p, &x, &e1), metric.pair(&p, &x, &e2)],
            gram: [metric.pair(&p, &e1, &e1), metric.pair(&p, &e1, &e2), metric.pair(&p, &e2, &e2)],
        }
    });
    let lf = TorusLineField { chart: *chart, n_theta: cfg.n_theta, n_z: cfg.n_z, source };
    // Scale from the boundary and a mid-radius ring, so a field vanishing on
    // the whole boundary is still caught.
    let mut max_norm = (0..16)
        .map(|j| {
            let p = chart.point(0.5 * chart.radius(), TAU * j as f64 / 16.0, 0.0);
            metric.norm(&p, &field.evaluate(&p))
        })
        .fold(0.0_f64, f64::max);
    let mut min_norm = f64::INFINITY;
    let mut at = [0.0; 2];
    for j in 0..lf.n_theta {
        for k in 0..lf.n_z {
            let n = alpha_norm(&lf.sample(lf.theta_at(j), lf.z_at(k)));
            max_norm = max_norm.max(n);
            if n < min_norm {
                min_norm = n;
                at = [lf.theta_at(j), lf.z_at(k)];
            }
        }
    }
    if !(min_norm > 1e-9 * max_norm) {
        let p = chart.point(chart.radius(), at[0], at[1]);
        return Err(Error::VanishingField { point: [p.x, p.y, p.z], norm: min_norm });
    }
    Ok(lf)
}

/// A transverse closed curve `z = z₀ + a cos θ + b sin θ`, the boundary of a
/// tilted-plane meridional disc with the given tilt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z0: f64,
    pub tilt: [f64; 2],
    /// Smallest `|α(c')| / (|α| |c'|)` along the curve.
    pub min_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafClass {
    Meridian,
    Longitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedLeaf {
    pub class: LeafClass,
    /// `z` of a meridian, `θ` of a longitude.
    pub position: f64,
    /// Sign of `F` along the leaf direction.
    pub orientation: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryClassification {
    TransversalExists { witness: Witness },
    MeridionalFoliation { max_ratio: f64 },
    ReebComponent { closed_leaves: Vec<ClosedLeaf> },
    Degenerate { diagnostics: String },
}

impl BoundaryClassification {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryClassification::TransversalExists { .. } => "transversal-exists",
            BoundaryClassification::MeridionalFoliation { .. } => "meridional-foliation",
            BoundaryClassification::ReebComponent { .. } => "reeb-component",
            BoundaryClassification::Degenerate { .. } => "degenerate",
        }
    }
}

/// Signed minimum of `α(c')/(|α||c'|)` along the witness curve.
fn curve_ratio(lf: &TorusLineField, z0: f64, a: f64, b: f64, samples: usize) -> f64 {
    let r = lf.chart.radius();
    let mut sign = 0.0;
    let mut min = f64::INFINITY;
    for j in 0..samples {
        let t = TAU * j as f64 / samples as f64;
        let (s, c) = t.sin_cos();
        let z = z0 + a * c + b * s;
        let dz = -a * s + b * c;
        let sm = lf.sample(t, z);
        let tangent = [r, dz];
        let value = sm.alpha[0] * tangent[0] + sm.alpha[1] * tangent[1];
        let ratio = value / (alpha_norm(&sm) * vector_norm(&sm, tangent));
        if sign == 0.0 {
            sign = ratio.signum();
        }
        if ratio * sign <= 0.0 {
            return 0.0;
        }
        min = min.min(ratio.abs());
    }
    min
}

fn search_witness(lf: &TorusLineField, cfg: &BoundaryConfig) -> Option<Witness> {
    let floor = TRANSVERSE_MIN_ANGLE.sin();
    let l = lf.chart.length();
    let verify = |w: Witness| {
        let fine = curve_ratio(lf, w.z0, w.tilt[0], w.tilt[1], lf.n_theta * cfg.witness_refine.max(1));
        (fine > floor).then_some(Witness { min_ratio: fine, ..w })
    };
    // Flat meridians first.
    let mut best: Option<Witness> = None;
    for k in 0..lf.n_z {
        let z0 = lf.z_at(k);
        let m = curve_ratio(lf, z0, 0.0, 0.0, lf.n_theta);
        if m > floor && best.is_none_or(|b| m > b.min_ratio) {
            best = Some(Witness { z0, tilt: [0.0, 0.0], min_ratio: m });
        }
    }
    if let Some(w) = best.and_then(verify) {
        return Some(w);
    }
    // Tilted graphs.
    let n_z = lf.n_z.min(32);
    let samples = lf.n_theta.min(128);
    for step in 1..=8 {
        let amp = l * step as f64 / 16.0;
        for q in 0..16 {
            let phi = TAU * q as f64 / 16.0;
            let (a, b) = (amp * phi.cos(), amp * phi.sin());
            for k in 0..n_z {
                let z0 = l * k as f64 / n_z as f64;
                let m = curve_ratio(lf, z0, a, b, samples);
                if m > floor {
                    if let Some(w) = verify(Witness { z0, tilt: [a, b], min_ratio: m }) {
                        return Some(w);
                    }
                }
            }
        }
    }
    None
}

/// Classic RK4 along a leaf written as a graph over one coordinate; `None`
/// when the leaf stops being a graph.
fn leaf_return(lf: &TorusLineField, class: LeafClass, start: f64) -> Option<(f64, i32)> {
    let r = lf.chart.radius();
    let (span, steps) = match class {
        LeafClass::Meridian => (TAU, 256),
        LeafClass::Longitude => (lf.chart.length(), 256),
    };
    let h = span / steps as f64;
    let mut orient = 0;
    let mut slope = |s: f64, y: f64| -> Option<f64> {
        let (theta, z) = match class {
            LeafClass::Meridian => (s, y),
            LeafClass::Longitude => (y, s),
        };
        let f = lf.direction(theta, z);
        let (along, across) = match class {
            LeafClass::Meridian => (f[0], f[1]),
            LeafClass::Longitude => (f[1], f[0]),
        };
        if along.abs() < 1e-3 {
            return None;
        }
        let o = along.signum() as i32;
        if orient == 0 {
            orient = o;
        } else if o != orient {
            return None;
        }
        // Meridian: dz/dθ = R F_z / F_θ. Longitude: dθ/dz = F_θ / (R F_z).
        Some(match class {
            LeafClass::Meridian => r * across / along,
            LeafClass::Longitude => across / (r * along),
        })
    };
    let mut y = start;
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = slope(s, y)?;
        let k2 = slope(s + 0.5 * h, y + 0.5 * h * k1)?;
        let k3 = slope(s + 0.5 * h, y + 0.5 * h * k2)?;
        let k4 = slope(s + h, y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Some((y - start, orient))
}

fn closed_leaves(lf: &TorusLineField, class: LeafClass) -> Vec<ClosedLeaf> {
    let (n, at, tol): (usize, Box<dyn Fn(usize) -> f64>, f64) = match class {
        LeafClass::Meridian => (lf.n_z, Box::new(|k| lf.z_at(k)), 1e-6 * lf.chart.length()),
        LeafClass::Longitude => (lf.n_theta, Box::new(|j| lf.theta_at(j)), 1e-6),
    };
    let returns: Vec<Option<(f64, i32)>> = (0..n).map(|k| leaf_return(lf, class, at(k))).collect();
    let mut leaves = Vec::new();
    for k in 0..n {
        let Some((d, o)) = returns[k] else { continue };
        if d.abs() < tol {
            leaves.push(ClosedLeaf { class, position: at(k), orientation: o });
            continue;
        }
        let next = (k + 1) % n;
        if let Some((dn, on)) = returns[next] {
            if dn.abs() >= tol && d.signum() != dn.signum() && o == on {
                let (mut lo, mut hi) = (at(k), if next == 0 { at(k) + (at(1) - at(0)) } else { at(next) });
                let mut dlo = d;
                let mut ok = true;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    match leaf_return(lf, class, mid) {
                        Some((dm, _)) if dm.signum() == dlo.signum() => {
                            lo = mid;
                            dlo = dm;
                        }
                        Some(_) => hi = mid,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    leaves.push(ClosedLeaf { class, position: 0.5 * (lo + hi), orientation: o });
                }
            }
        }
    }
    leaves
}

fn has_reeb_band(leaves: &[ClosedLeaf]) -> bool {
    if leaves.len() < 2 {
        return false;
    }
    (0..leaves.len()).any(|i| leaves[i].orientation != leaves[(i + 1) % leaves.len()].orientation)
}

/// Decide which case of the boundary trichotomy applies.
pub fn classify_boundary(lf: &TorusLineField, cfg: &BoundaryConfig) -> BoundaryClassification {
    if let Some(witness) = search_witness(lf, cfg) {
        return BoundaryClassification::TransversalExists { witness };
    }
    let mut max_ratio = 0.0_f64;
    for j in 0..lf.n_theta {
        for k in 0..lf.n_z {
            let s = lf.sample(lf.theta_at(j), lf.z_at(k));
            // |α(e_θ)| relative to |X|, with e_θ of unit length.
            max_ratio = max_ratio.max(s.alpha[0].abs() / (alpha_norm(&s) * s.gram[0].sqrt()));
        }
    }
    if max_ratio <= cfg.meridional_tol {
        return BoundaryClassification::MeridionalFoliation { max_ratio };
    }
    let mut leaves = Vec::new();
    for class in [LeafClass::Meridian, LeafClass::Longitude] {
        let found = closed_leaves(lf, class);
        if has_reeb_band(&found) {
            leaves.extend(found);
        }
    }
    if !leaves.is_empty() {
        return BoundaryClassification::ReebComponent { closed_leaves: leaves };
    }
    BoundaryClassification::Degenerate {
        diagnostics: format!(
            "no transverse meridian found, max |α(e_θ)|/|X| = {max_ratio:.3e} exceeds the meridional tolerance {:.1e}, and no Reeb band was detected",
            cfg.meridional_tol
        ),
    }
}

/// Warnings implied by a boundary classification.
pub fn reeb_component_sanity(class: &BoundaryClassification, beltrami_passed: bool) -> Vec<String> {
    let mut out = Vec::new();
    if let BoundaryClassification::ReebComponent { closed_leaves } = class {
        out.push(format!(
            "boundary foliation has a Reeb component ({} closed leaves); index falls back to sign(λ)",
            closed_leaves.len()
        ));
        if beltrami_passed {
            out.push("a Reeb component on the boundary of a Beltrami field contradicts tightness; check the input".into());
        }
    }
    out
}

/// Boundary with two longitudinal closed leaves of opposite orientation:
/// `X∂ = cos θ e_θ − sin²θ e_z`.
pub fn reeb_fixture(chart: TubeChart, n: usize) -> TorusLineField {
    TorusLineField::from_boundary_vector(chart, n, n, |t, _z| [t.cos(), -t.sin() * t.sin()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldSpec, Profile};
    use crate::geometry::{Point, Vector};
    use std::f64::consts::PI;

    fn cfg() -> BoundaryConfig {
        BoundaryConfig { n_theta: 64, n_z: 64, ..Default::default() }
    }

    #[test]
    fn twisted_tube_is_invariant() {
        let c = TubeChart::new(2.0, TAU).unwrap();
        assert!(check_invariance(&FieldSpec::twisted_tube(), &c, 1e-6, (32, 16)).unwrap() < 1e-12);
    }

    #[test]
    fn radial_field_is_not_invariant() {
        let c = TubeChart::new(1.0, TAU).unwrap();
        let f = FieldSpec::affine(nalgebra::Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0), Vector::z());
        let err = check_invariance(&f, &c, 1e-6, (16, 8)).unwrap_err();
        assert!(matches!(err, Error::NotInvariant { max_radial } if max_radial > 0.5));
    }

    #[test]
    fn foliation_is_orthogonal_to_x() {
        let c = TubeChart::new(1.3, 2.0).unwrap();
        let f = FieldSpec::lundquist(1.0);
        let lf = boundary_foliation(&f, &MetricField::Euclidean, &c, &cfg()).unwrap();
        for (t, z) in [(0.1, 0.2), (2.0, 1.5), (4.0, 0.0)] {
            let d = lf.direction(t, z);
            let x = f.evaluate(&c.point(1.3, t, z));
            let p = c.point(1.3, t, z);
            let along = c.e_theta(&p) * d[0] + Vector::z() * d[1];
            assert!(along.dot(&x).abs() < 1e-14);
            assert!((along.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn foliation_rotation_example() {
        // X∂ = e_z: F = (−1, 0), along −e_θ.
        let c = TubeChart::new(1.0, 1.0).unwrap();
        let lf = TorusLineField::from_boundary_vector(c, 8, 8, |_, _| [0.0, 1.0]);
        assert_eq!(lf.direction(0.3, 0.4), [-1.0, 0.0]);
    }

    #[test]
    fn tight_tube_has_transverse_meridian() {
        let c = TubeChart::new(1.0, TAU).unwrap();
        let lf = boundary_foliation(&FieldSpec::twisted_tube(), &MetricField::Euclidean, &c, &cfg()).unwrap();
        match classify_boundary(&lf, &cfg()) {
            BoundaryClassification::TransversalExists { witness } => {
                assert!((witness.min_ratio - 1f64.sin()).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn half_turn_tube_is_meridional() {
        let c = TubeChart::new(PI, TAU).unwrap();
        let lf = boundary_foliation(&FieldSpec::twisted_tube(), &MetricField::Euclidean, &c, &cfg()).unwrap();
        assert!(matches!(classify_boundary(&lf, &cfg()), BoundaryClassification::MeridionalFoliation { .. }));
    }

    #[test]
    fn reeb_fixture_is_detected() {
        let c = TubeChart::new(1.0, TAU).unwrap();
        let lf = reeb_fixture(c, 64);
        match classify_boundary(&lf, &cfg()) {
            BoundaryClassification::ReebComponent { closed_leaves } => {
                let pos: Vec<f64> = closed_leaves.iter().map(|l| l.position).collect();
                assert!(pos.iter().any(|p| p.abs() < 1e-9));
                assert!(pos.iter().any(|p| (p - PI).abs() < 1e-9));
                assert!(closed_leaves.iter().all(|l| l.class == LeafClass::Longitude));
            }
            other => panic!("{other:?}"),
        }
        let w = reeb_component_sanity(&classify_boundary(&lf, &cfg()), true);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn closed_leaves_without_reeb_band_are_degenerate() {
        // Every leaf is a closed graph z = z₀ + Rε(cos θ − 1), all oriented alike.
        let c = TubeChart::new(1.0, TAU).unwrap();
        let lf = TorusLineField::from_boundary_vector(c, 64, 64, |t, _| [0.01 * t.sin(), 1.0]);
        let class = classify_boundary(&lf, &cfg());
        assert!(matches!(class, BoundaryClassification::Degenerate { .. }), "{class:?}");
    }

    #[test]
    fn vanishing_boundary_field_is_rejected() {
        let c = TubeChart::new(PI, TAU).unwrap();
        let f = FieldSpec::tube(Profile::Sin(1.0), Profile::Const(0.0));
        let err = boundary_foliation(&f, &MetricField::Euclidean, &c, &cfg()).unwrap_err();
        assert!(matches!(err, Error::VanishingField { .. }));
        let _ = Point::zeros();
    }
}
