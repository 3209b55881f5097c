//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail for reasons outside the
//! code (see the README); any other failure fails the target. Runs without
//! the libtest harness so the lines always show in `cargo test` output.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Vector2;

use bscope::boundary::{reeb_component_sanity, reeb_fixture};
use bscope::cli_io::cli::calibrate;
use bscope::cli_io::{read_grid, write_grid};
use bscope::disc_index::{poincare_index, ScanConfig};
use bscope::fields::calculus::{beltrami_residuals, FieldContext, SampleSet};
use bscope::fields::{BeltramiTolerances, SampledGrid};
use bscope::verify::{find_closed_orbits, slk_pushoff_oracle, OrbitSearchConfig, PushoffConfig};
use bscope::{
    boundary_foliation, classify_boundary, compute_index, compute_slk, BoundaryConfig, DiscShape, FieldSpec, IndexConfig,
    IndexReport, MetricField, TubeChart, VolumeForm, SLK_SIGN,
};

const KNOWN_RED: &[u8] = &[4];

type Check = Result<String, String>;

struct Outcome {
    id: u8,
    passed: bool,
}

fn run(id: u8, title: &str, budget: Duration, f: impl FnOnce() -> Check) -> Outcome {
    let t = Instant::now();
    let res = f();
    let dt = t.elapsed();
    let (mut passed, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if dt > budget {
        passed = false;
        detail = format!("{detail}; over budget ({:.1?} > {budget:?})", dt);
    }
    println!("criterion {id} {}: {title} [{:.2?}] {detail}", if passed { "PASS" } else { "FAIL" }, dt);
    Outcome { id, passed }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn index_of(field: &FieldSpec, chart: TubeChart) -> Result<IndexReport, String> {
    compute_index(field, chart, &MetricField::Euclidean, &VolumeForm::Metric, &IndexConfig::default())
        .map_err(|e| e.to_string())
}

fn five_point_disc() -> Check {
    let entry = common::corpus().into_iter().find(|e| e.name == "five-point").unwrap();
    let r = index_of(&entry.field, entry.chart)?;
    let slk = r.slk.as_ref().map(|s| s.slk);
    ensure(slk == Some(-3) && r.index == -2, format!("slk = {slk:?}, 𝕀 = {}", r.index))?;
    Ok(format!("slk = -3, 𝕀 = -2, {} singularities", r.slk.unwrap().singularities.len()))
}

fn calibration() -> Check {
    let r = index_of(&FieldSpec::twisted_tube(), TubeChart::new(1.0, TAU).unwrap())?;
    let slk = r.slk.as_ref().map(|s| s.slk);
    ensure(slk == Some(-1) && r.index == 0, format!("slk = {slk:?}, 𝕀 = {}", r.index))?;
    let cal = calibrate(&ScanConfig::default(), &PushoffConfig::default()).map_err(|e| e.to_string())?;
    ensure(cal.stable && cal.slk_sign == Some(SLK_SIGN), format!("calibration {cal:?}"))?;
    Ok(format!("slk = -1, 𝕀 = 0, s⋆ = {SLK_SIGN} stable at {:?}", cal.runs.iter().map(|r| r.resolution).collect::<Vec<_>>()))
}

fn oracle_equivalence() -> Check {
    let g = MetricField::Euclidean;
    let mut compared = 0;
    let mut max_abs = 0;
    let mut worst_residual = 0.0_f64;
    for e in common::corpus().iter().filter(|e| e.transverse) {
        let disc = common::flat_disc(e, &g);
        let s = compute_slk(&e.field, &disc, &g, &ScanConfig::default()).map_err(|x| format!("{}: {x}", e.name))?;
        let o = slk_pushoff_oracle(&e.field, &disc, &g, &PushoffConfig::default()).map_err(|x| format!("{}: {x}", e.name))?;
        let residual = (o.linking_raw - o.slk as f64).abs();
        ensure(s.slk == o.slk && residual < 0.1, format!("{}: disc {} vs oracle {} (raw {})", e.name, s.slk, o.slk, o.linking_raw))?;
        compared += 1;
        max_abs = max_abs.max(s.slk.abs());
        worst_residual = worst_residual.max(residual);
    }
    ensure(compared >= 5 && max_abs >= 2, format!("{compared} fields, max |slk| {max_abs}"))?;
    Ok(format!("{compared} fields agree, max |slk| = {max_abs}, worst rounding residual {worst_residual:.1e}"))
}

fn beltrami_verification() -> Check {
    let g = MetricField::Euclidean;
    let vol = VolumeForm::Metric;
    let chart = TubeChart::new(1.0, TAU).unwrap();
    let samples = SampleSet::stratified(&chart, 6, 8, 4);
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, field) in [("twisted tube", FieldSpec::twisted_tube()), ("Lundquist", FieldSpec::lundquist(1.0))] {
        let ctx = FieldContext::new(&field, &g, &vol, chart);
        let r = beltrami_residuals(&ctx, &samples, BeltramiTolerances::ANALYTIC).map_err(|e| e.to_string())?;
        let good = r.passed && (r.lambda - 1.0).abs() < 1e-6;
        ok &= good;
        notes.push(format!(
            "{name}: λ = {:.9}, curl {:.1e}, div {:.1e} {}",
            r.lambda,
            r.curl_residual,
            r.div_residual,
            if good { "ok" } else { "FAILS" }
        ));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("lundquist64.bsg");
    let grid = SampledGrid::from_field(&FieldSpec::lundquist(1.0), chart, (64, 64, 64)).map_err(|e| e.to_string())?;
    write_grid(&path, &grid).map_err(|e| e.to_string())?;
    let sampled = FieldSpec::Sampled(std::sync::Arc::new(read_grid(&path).map_err(|e| e.to_string())?));
    let ctx = FieldContext::new(&sampled, &g, &vol, chart);
    let r = beltrami_residuals(&ctx, &samples, BeltramiTolerances::SAMPLED).map_err(|e| e.to_string())?;
    let good = r.passed && (r.lambda - 1.0).abs() < 5e-3;
    ok &= good;
    notes.push(format!(
        "64³ Lundquist export: λ = {:.5}, curl {:.1e}, div {:.1e} {}",
        r.lambda,
        r.curl_residual,
        r.div_residual,
        if good { "ok" } else { "FAILS" }
    ));
    let detail = notes.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn poincare_battery() -> Check {
    type Planar = fn(Vector2<f64>) -> Vector2<f64>;
    let battery: [(&str, Planar, i32); 4] = [
        ("(u, v)", |p| p, 1),
        ("(u, −v)", |p| Vector2::new(p.x, -p.y), -1),
        ("(u² − v², 2uv)", |p| Vector2::new(p.x * p.x - p.y * p.y, 2.0 * p.x * p.y), 2),
        ("(−v, u)", |p| Vector2::new(-p.y, p.x), 1),
    ];
    for (name, f, want) in battery {
        let got = poincare_index(&f, Vector2::zeros(), 0.5, 64, 1e-12).map_err(|e| e.to_string())?;
        ensure(got == want, format!("{name}: index {got}, expected {want}"))?;
    }
    let g = MetricField::Euclidean;
    let mut audited = 0;
    for e in common::corpus().iter().filter(|e| e.transverse) {
        let s = compute_slk(&e.field, &common::flat_disc(e, &g), &g, &ScanConfig::default()).map_err(|x| x.to_string())?;
        ensure(s.sum_index == s.boundary_winding, format!("{}: Σ Ind {} ≠ winding {}", e.name, s.sum_index, s.boundary_winding))?;
        audited += 1;
    }
    Ok(format!("4 planar fields exact; Poincaré–Hopf holds on {audited} corpus discs"))
}

fn trichotomy() -> Check {
    let cfg = BoundaryConfig::default();
    let g = MetricField::Euclidean;
    let tube = FieldSpec::twisted_tube();
    let mut seen = Vec::new();
    for (r, want) in [(1.0, "transversal-exists"), (2.5, "transversal-exists"), (PI, "meridional-foliation")] {
        let chart = TubeChart::new(r, TAU).unwrap();
        let lf = boundary_foliation(&tube, &g, &chart, &cfg).map_err(|e| e.to_string())?;
        let class = classify_boundary(&lf, &cfg);
        ensure(class.name() == want, format!("R = {r}: {} (expected {want})", class.name()))?;
        seen.push(format!("R = {r:.4}: {want}"));
    }
    let fixture = reeb_fixture(TubeChart::new(1.0, TAU).unwrap(), 128);
    let class = classify_boundary(&fixture, &cfg);
    ensure(class.name() == "reeb-component", format!("Reeb fixture: {}", class.name()))?;
    let warnings = reeb_component_sanity(&class, false);
    ensure(
        !warnings.iter().any(|w| w.contains("contradicts")),
        format!("contradiction warning not suppressed: {warnings:?}"),
    )?;
    let r = index_of(&tube, TubeChart::new(PI, TAU).unwrap())?;
    ensure(r.branch == 3 && r.index == 1, format!("R = π: branch {}, 𝕀 = {}", r.branch, r.index))?;
    Ok(format!("{}; fixture: reeb-component; R = π gives 𝕀 = 1 by branch 3", seen.join(", ")))
}

fn dynamical() -> Check {
    let chart = TubeChart::new(PI, TAU).unwrap();
    let orbits = find_closed_orbits(&FieldSpec::twisted_tube(), &chart, &OrbitSearchConfig::default())
        .map_err(|e| e.to_string())?;
    let w = orbits.iter().find(|o| o.contractible).ok_or("no contractible orbit found")?;
    let r = w.start[0].hypot(w.start[1]);
    let period_err = (w.period - PI * PI).abs() / (PI * PI);
    let r_err = (r - PI / 2.0).abs() / (PI / 2.0);
    ensure(
        period_err < 1e-4 && r_err < 1e-4 && w.winding[1] == 0 && w.winding_exact,
        format!("r = {r}, period = {}, winding = {:?}", w.period, w.winding),
    )?;
    Ok(format!("r = {r:.8}, period = {:.8} (rel err {period_err:.1e}), winding {:?}", w.period, w.winding))
}

fn invariance() -> Check {
    let mut checked = 0;
    for e in common::corpus() {
        let base_cfg = IndexConfig::default();
        let base = index_of(&e.field, e.chart).map_err(|x| format!("{}: {x}", e.name))?.index;
        let mut bump = base_cfg.clone();
        bump.disc = DiscShape::bumped(0.0, 0.1);
        let mut doubled = base_cfg.clone();
        doubled.scan.resolution *= 2;
        doubled.boundary.n_theta *= 2;
        doubled.boundary.n_z *= 2;
        doubled.beltrami_samples = base_cfg.beltrami_samples.map(|n| 2 * n);
        let eu = MetricField::Euclidean;
        let variants: [(&str, FieldSpec, MetricField, &IndexConfig); 5] = [
            ("bump 0.1", e.field.clone(), eu.clone(), &bump),
            ("doubled grids", e.field.clone(), eu.clone(), &doubled),
            ("X/2", e.field.clone().scaled(0.5), eu.clone(), &base_cfg),
            ("3X", e.field.clone().scaled(3.0), eu.clone(), &base_cfg),
            ("4g", e.field.clone(), MetricField::Scaled(4.0), &base_cfg),
        ];
        for (label, f, g, cfg) in variants {
            let i = compute_index(&f, e.chart, &g, &VolumeForm::Metric, cfg)
                .map_err(|x| format!("{} under {label}: {x}", e.name))?
                .index;
            ensure(i == base, format!("{} under {label}: 𝕀 = {i}, base {base}", e.name))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} perturbed runs match their base index"))
}

fn determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_bscope");
    let mut reports = Vec::new();
    for args in [
        ["index", "--builtin", "five-point", "--no-timestamp"],
        ["index", "--builtin", "lundquist", "--no-timestamp"],
    ] {
        let mut outs = Vec::new();
        for _ in 0..2 {
            let o = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
            ensure(o.status.success(), format!("{args:?} exited {:?}", o.status.code()))?;
            outs.push(o.stdout);
        }
        ensure(outs[0] == outs[1], format!("{args:?}: reports differ"))?;
        reports.push(outs[0].len());
    }
    Ok(format!("identical reports ({} and {} bytes)", reports[0], reports[1]))
}

fn main() {
    let s = Duration::from_secs;
    let outcomes = [
        run(1, "five-point disc field", s(10), five_point_disc),
        run(2, "calibration anchor", s(30), calibration),
        run(3, "oracle equivalence", s(120), oracle_equivalence),
        run(4, "Beltrami verification", s(60), beltrami_verification),
        run(5, "Poincaré index battery", s(5), poincare_battery),
        run(6, "boundary trichotomy", s(30), trichotomy),
        run(7, "dynamical cross-validation", s(60), dynamical),
        run(8, "invariance suite", s(180), invariance),
        run(9, "determinism", s(60), determinism),
    ];
    let unexpected: Vec<u8> = outcomes.iter().filter(|o| !o.passed && !KNOWN_RED.contains(&o.id)).map(|o| o.id).collect();
    for o in outcomes.iter().filter(|o| o.passed && KNOWN_RED.contains(&o.id)) {
        println!("note: criterion {} passed but is listed as known red", o.id);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
