//! Self-linking number of the disc boundary and the index 𝕀.
//!
//! Pipeline: orient the boundary, project `X` onto the disc, locate the
//! zeros of the projection, compute `σ` and the Poincaré index at each, sum.

pub mod projection;
pub mod singularities;
pub mod synthetic;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::boundary::{self, BoundaryClassification, BoundaryConfig};
use crate::error::{Error, Result};
use crate::fields::{
    beltrami_residuals, calculus::FieldContext, contact_volume_sign, l2_energy, BeltramiReport, BeltramiTolerances,
    ContactSign, FieldSpec, SampleSet,
};
use crate::geometry::{
    orient_boundary, BoundaryDirection, DiscShape, MeridionalDisc, MetricField, TubeChart, VolumeForm,
};

pub use projection::{project_to_disc, PlanarField, ProjectedField, Rotated};
pub use singularities::{find_singularities, poincare_index, ScanConfig, Zero};
pub use synthetic::{five_point_disc, synthesize_disc_field, SyntheticDiscField, SyntheticPoint};

/// Sign fixed once by calibration: `slk = SLK_SIGN · Σ σ·Ind`.
pub const SLK_SIGN: i32 = -1;

/// Samples used when checking that the boundary is transverse.
pub const BOUNDARY_SAMPLES: usize = 720;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    Elliptic,
    Hyperbolic,
    HigherOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityRecord {
    pub uv: [f64; 2],
    pub position: [f64; 3],
    pub poincare_index: i32,
    pub sigma: i32,
    pub kind: SingularityKind,
    /// `|det J| / ‖J‖²_F`, in `[0, ½]`.
    pub jacobian_conditioning: f64,
    pub winding_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlkResult {
    pub slk: i32,
    pub sum_sigma_index: i32,
    pub sum_index: i32,
    pub boundary_winding: i32,
    pub disc: DiscShape,
    pub direction: BoundaryDirection,
    pub singularities: Vec<SingularityRecord>,
}

/// `σ = sign g(X, n)` at a projected rest point.
pub fn sigma(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField, uv: Vector2<f64>, floor: f64) -> Result<i32> {
    let pf = ProjectedField::new(field, disc, metric)?;
    let dec = pf.decompose(uv)?;
    if !(dec.normal_component.abs() > floor) {
        return Err(Error::SigmaContradiction { uv: [uv.x, uv.y], normal: dec.normal_component });
    }
    Ok(dec.normal_component.signum() as i32)
}

/// Self-linking number of `∂D` for an already oriented disc.
pub fn compute_slk(field: &FieldSpec, disc: &MeridionalDisc, metric: &MetricField, scan: &ScanConfig) -> Result<SlkResult> {
    let pf = ProjectedField::new(field, disc, metric)?;
    let found = find_singularities(&pf, scan)?;
    let norm_floor = 1e-12 * found.scale;
    let zeros = &found.zeros;

    let mut records = Vec::with_capacity(zeros.len());
    for (i, z) in zeros.iter().enumerate() {
        let nearest = zeros
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, o)| (o.uv - z.uv).norm())
            .fold(f64::INFINITY, f64::min);
        let boundary_gap = 1.0 - z.uv.norm();
        let radius = (0.5 * nearest).min(0.1).min(0.5 * boundary_gap.max(0.0)).max(1e-3);
        let index = poincare_index(&pf, z.uv, radius, scan.winding_samples, norm_floor)?;
        let dec = pf.decompose(z.uv)?;
        let sig_floor = 1e-8 * dec.x.norm().max(found.scale);
        if !(dec.normal_component.abs() > sig_floor) {
            return Err(Error::SigmaContradiction { uv: [z.uv.x, z.uv.y], normal: dec.normal_component });
        }
        let sigma = dec.normal_component.signum() as i32;
        let kind = match index {
            1 => SingularityKind::Elliptic,
            -1 => SingularityKind::Hyperbolic,
            _ => SingularityKind::HigherOrder,
        };
        let j = &z.jacobian;
        let fro2 = j.norm_squared();
        records.push(SingularityRecord {
            uv: [z.uv.x, z.uv.y],
            position: [dec.point.x, dec.point.y, dec.point.z],
            poincare_index: index,
            sigma,
            kind,
            jacobian_conditioning: if fro2 > 0.0 { j.determinant().abs() / fro2 } else { 0.0 },
            winding_radius: radius,
        });
    }

    let boundary_winding = poincare_index(&pf, Vector2::zeros(), 1.0, 4 * scan.winding_samples, norm_floor)?;
    let sum_index: i32 = records.iter().map(|r| r.poincare_index).sum();
    if sum_index != boundary_winding {
        return Err(Error::Numerical(format!(
            "Poincaré–Hopf audit failed: indices sum to {sum_index}, boundary winding is {boundary_winding}"
        )));
    }
    let sum_sigma_index: i32 = records.iter().map(|r| r.sigma * r.poincare_index).sum();
    Ok(SlkResult {
        slk: SLK_SIGN * sum_sigma_index,
        sum_sigma_index,
        sum_index,
        boundary_winding,
        disc: disc.shape,
        direction: disc.direction,
        singularities: records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// 𝕀 ≠ 0: a contractible closed orbit is forced.
    OrbitForced,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaSource {
    Estimated,
    Declared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub disc: DiscShape,
    pub scan: ScanConfig,
    pub boundary: BoundaryConfig,
    /// `None` picks the analytic or sampled defaults.
    pub beltrami_tolerances: Option<BeltramiTolerances>,
    /// `|λ| ≤ zero_lambda_tol · curl_scale` counts as `λ = 0`.
    pub zero_lambda_tol: f64,
    pub invariance_tol: f64,
    pub beltrami_samples: [usize; 3],
    /// Bump the disc, then perturb the field, when the projection is not generic.
    pub auto_retry: bool,
    pub retry_bump_fraction: f64,
    pub retry_perturbation: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            disc: DiscShape::flat(0.0),
            scan: ScanConfig::default(),
            boundary: BoundaryConfig::default(),
            beltrami_tolerances: None,
            zero_lambda_tol: 1e-6,
            invariance_tol: 1e-6,
            beltrami_samples: [6, 8, 4],
            auto_retry: true,
            retry_bump_fraction: 0.05,
            retry_perturbation: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub lambda: f64,
    pub lambda_sign: i32,
    pub lambda_source: LambdaSource,
    pub beltrami: Option<BeltramiReport>,
    pub contact_sign: ContactSign,
    pub boundary: BoundaryClassification,
    /// 1: `λ = 0`; 2: transverse meridian; 3: no transverse meridian.
    pub branch: u8,
    pub slk: Option<SlkResult>,
    pub index: i32,
    /// `None` when the Beltrami check failed; the index is then advisory.
    pub verdict: Option<Verdict>,
    pub energy: f64,
    pub retries: Vec<String>,
    pub warnings: Vec<String>,
}

impl IndexReport {
    pub fn beltrami_passed(&self) -> bool {
        self.beltrami.as_ref().is_none_or(|b| b.passed)
    }
}

fn sign_of(lambda: f64) -> i32 {
    if lambda > 0.0 {
        1
    } else if lambda < 0.0 {
        -1
    } else {
        0
    }
}

/// Self-linking number with the retry policy: bump the disc, then perturb
/// an analytic field, logging each retry.
fn slk_with_retries(
    field: &FieldSpec,
    disc: &MeridionalDisc,
    metric: &MetricField,
    cfg: &IndexConfig,
    retries: &mut Vec<String>,
) -> Result<SlkResult> {
    match compute_slk(field, disc, metric, &cfg.scan) {
        Err(Error::NonGenericField(msg)) if cfg.auto_retry => {
            let chart = disc.chart;
            let bump = disc.shape.bump + cfg.retry_bump_fraction * chart.radius();
            retries.push(format!("non-generic projection ({msg}); retrying with disc bump {bump}"));
            let bumped = MeridionalDisc { shape: disc.shape.with_bump(bump), ..*disc };
            match compute_slk(field, &bumped, metric, &cfg.scan) {
                Err(Error::NonGenericField(msg)) if field.is_analytic() => {
                    retries.push(format!(
                        "still non-generic ({msg}); retrying with perturbation amplitude {}",
                        cfg.retry_perturbation
                    ));
                    let perturbed = field.clone().perturbed(cfg.retry_perturbation, 0x5eed, &chart);
                    let oriented = orient_boundary(&bumped, &perturbed, metric, BOUNDARY_SAMPLES)?;
                    compute_slk(&perturbed, &oriented, metric, &cfg.scan)
                }
                other => other,
            }
        }
        other => other,
    }
}

/// Compute 𝕀 for `field` on the solid torus described by `chart`.
pub fn compute_index(
    field: &FieldSpec,
    chart: TubeChart,
    metric: &MetricField,
    volume: &VolumeForm,
    cfg: &IndexConfig,
) -> Result<IndexReport> {
    boundary::check_invariance(field, &chart, cfg.invariance_tol, (cfg.boundary.n_theta, cfg.boundary.n_z))?;
    let ctx = FieldContext::new(field, metric, volume, chart);
    let [sr, st, sz] = cfg.beltrami_samples;
    let samples = SampleSet::stratified(&chart, sr, st, sz);
    let mut warnings = Vec::new();

    let (lambda, lambda_source, beltrami, zero_cut) = match field.declared_lambda() {
        Some(l) => {
            warnings.push("eigenvalue taken from the field declaration; Beltrami check skipped".to_string());
            (l, LambdaSource::Declared, None, 0.0)
        }
        None => {
            let tol = cfg.beltrami_tolerances.unwrap_or_else(|| BeltramiTolerances::for_field(field));
            let rep = beltrami_residuals(&ctx, &samples, tol)?;
            if !rep.passed {
                warnings.push(format!(
                    "field is not Beltrami within tolerance (curl residual {:.3e}, div residual {:.3e}); verdict withheld",
                    rep.curl_residual, rep.div_residual
                ));
            }
            let cut = cfg.zero_lambda_tol * rep.curl_scale + 1e-12;
            (rep.lambda, LambdaSource::Estimated, Some(rep), cut)
        }
    };
    let lambda_sign = if lambda.abs() <= zero_cut { 0 } else { sign_of(lambda) };

    let contact_sign = contact_volume_sign(&ctx, &samples).unwrap_or(ContactSign::Indeterminate);
    if lambda_sign != 0 && contact_sign != ContactSign::Indeterminate && contact_sign.as_i32() != lambda_sign {
        warnings.push(format!(
            "sign of α∧dα ({}) disagrees with sign of λ ({lambda_sign})",
            contact_sign.as_i32()
        ));
    }
    let energy = l2_energy(&ctx, (16, 16, 8));

    let foliation = boundary::boundary_foliation(field, metric, &chart, &cfg.boundary)?;
    let classification = boundary::classify_boundary(&foliation, &cfg.boundary);
    warnings.extend(boundary::reeb_component_sanity(&classification, beltrami.as_ref().is_none_or(|b| b.passed)));

    let mut retries = Vec::new();
    let (branch, slk) = if lambda_sign == 0 {
        (1, None)
    } else {
        let configured = MeridionalDisc::new(chart, cfg.disc);
        match orient_boundary(&configured, field, metric, BOUNDARY_SAMPLES) {
            Ok(disc) => (2, Some(slk_with_retries(field, &disc, metric, cfg, &mut retries)?)),
            Err(Error::NotTransverse { .. }) => match &classification {
                BoundaryClassification::TransversalExists { witness } => {
                    let shape = DiscShape { z0: witness.z0, tilt: witness.tilt, bump: cfg.disc.bump };
                    retries.push(format!("configured disc boundary is not transverse; using witness disc {shape:?}"));
                    let disc = orient_boundary(&MeridionalDisc::new(chart, shape), field, metric, BOUNDARY_SAMPLES)?;
                    (2, Some(slk_with_retries(field, &disc, metric, cfg, &mut retries)?))
                }
                BoundaryClassification::MeridionalFoliation { .. } | BoundaryClassification::ReebComponent { .. } => {
                    (3, None)
                }
                BoundaryClassification::Degenerate { diagnostics } => {
                    return Err(Error::BoundaryUnresolved(diagnostics.clone()));
                }
            },
            Err(e) => return Err(e),
        }
    };

    let index = match branch {
        1 => 0,
        2 => lambda_sign * slk.as_ref().map_or(0, |s| s.slk) + 1,
        _ => lambda_sign,
    };
    let passed = beltrami.as_ref().is_none_or(|b| b.passed);
    let verdict = passed.then_some(if index != 0 { Verdict::OrbitForced } else { Verdict::Inconclusive });
    log::info!("index {index} (branch {branch}, λ = {lambda:.6e})");

    Ok(IndexReport {
        lambda,
        lambda_sign,
        lambda_source,
        beltrami,
        contact_sign,
        boundary: classification,
        branch,
        slk,
        index,
        verdict,
        energy,
        retries,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Profile;
    use std::f64::consts::TAU;

    #[test]
    fn tight_tube_has_slk_minus_one() {
        let chart = TubeChart::new(1.0, TAU).unwrap();
        let f = FieldSpec::twisted_tube();
        let disc = orient_boundary(&MeridionalDisc::new(chart, DiscShape::flat(0.0)), &f, &MetricField::Euclidean, 360).unwrap();
        let s = compute_slk(&f, &disc, &MetricField::Euclidean, &ScanConfig::default()).unwrap();
        assert_eq!(s.singularities.len(), 1);
        assert_eq!(s.singularities[0].poincare_index, 1);
        assert_eq!(s.singularities[0].sigma, 1);
        assert_eq!(s.slk, -1);
    }

    #[test]
    fn five_point_sums() {
        let chart = TubeChart::new(1.0, TAU).unwrap();
        let f = FieldSpec::Synthetic(std::sync::Arc::new(five_point_disc(chart)));
        let disc = orient_boundary(&MeridionalDisc::new(chart, DiscShape::flat(0.0)), &f, &MetricField::Euclidean, 360).unwrap();
        let s = compute_slk(&f, &disc, &MetricField::Euclidean, &ScanConfig::default()).unwrap();
        assert_eq!(s.singularities.len(), 5);
        assert_eq!(s.sum_index, 1);
        assert_eq!(s.sum_sigma_index, 3);
        assert_eq!(s.slk, -3);
    }

    #[test]
    fn sigma_flips_with_disc_direction() {
        let chart = TubeChart::new(1.0, TAU).unwrap();
        let f = FieldSpec::tube(Profile::Sin(1.0), Profile::Const(1.0));
        let d = MeridionalDisc::new(chart, DiscShape::flat(0.0));
        let a = sigma(&f, &d, &MetricField::Euclidean, Vector2::zeros(), 1e-12).unwrap();
        let b = sigma(&f, &d.reversed(), &MetricField::Euclidean, Vector2::zeros(), 1e-12).unwrap();
        assert_eq!(a, -b);
    }
}
