//! `bscope` subcommands and exit-code mapping.

use std::ffi::OsString;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use super::config::{ChartConfig, FieldConfig, RunConfig};
use super::grid_file::{read_header, write_grid};
use super::render::{render_disc, RenderInput};
use super::report::{Calibration, CalibrationRun, ReportDocument};
use crate::boundary::{boundary_foliation, check_invariance, classify_boundary};
use crate::disc_index::{compute_index, compute_slk, ProjectedField, ScanConfig, BOUNDARY_SAMPLES, SLK_SIGN};
use crate::error::{Error, Result};
use crate::fields::calculus::{beltrami_residuals, FieldContext, SampleSet};
use crate::fields::{BeltramiTolerances, FieldSpec, SampledGrid};
use crate::geometry::{orient_boundary, MeridionalDisc, MetricField, TubeChart, VolumeForm};
use crate::verify::{cross_validate, find_closed_orbits, slk_pushoff_oracle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_BELTRAMI: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 6;

#[derive(Parser, Debug)]
#[command(name = "bscope", version, about = "Contractible-closed-orbit index of curl eigenfields on a solid torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in field: twisted-tube, lundquist or five-point.
    #[arg(long)]
    builtin: Option<String>,
    /// Sampled field in `.bsg` format; the chart is read from its header.
    #[arg(long, conflicts_with = "builtin")]
    grid: Option<PathBuf>,
    /// Tube radius; overrides the config.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Period in z; overrides the config.
    #[arg(long = "L")]
    length: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical reports.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline: Beltrami check, boundary class, slk and 𝕀.
    Index {
        #[command(flatten)]
        common: Common,
        /// Also search for closed orbits and annotate the verdict.
        #[arg(long)]
        cross_validate: bool,
        /// Exit 4 when the field fails the Beltrami check.
        #[arg(long)]
        strict: bool,
    },
    /// Self-linking number of the configured disc boundary.
    Slk {
        #[command(flatten)]
        common: Common,
        /// Skip the push-off linking oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Curl and divergence residuals; exit 4 on failure.
    CheckBeltrami {
        #[command(flatten)]
        common: Common,
    },
    /// Classify the characteristic foliation of the boundary torus.
    Boundary {
        #[command(flatten)]
        common: Common,
    },
    /// Search for closed orbits.
    Orbits {
        #[command(flatten)]
        common: Common,
    },
    /// SVG of the disc foliation with singularity glyphs.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        render_out: PathBuf,
    },
    /// Tight-tube calibration of the slk sign convention.
    Calibrate {
        #[command(flatten)]
        common: Common,
    },
    /// Sample the configured field onto a `.bsg` grid.
    ExportGrid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid_out: PathBuf,
        #[arg(long, num_args = 3, value_names = ["N_R", "N_THETA", "N_Z"], default_values_t = [64, 64, 64])]
        dims: Vec<usize>,
    },
}

struct Resolved {
    cfg: RunConfig,
    base: PathBuf,
}

impl Resolved {
    fn field(&self) -> Result<(FieldSpec, TubeChart, MetricField)> {
        let chart = self.cfg.chart()?;
        let field = self.cfg.field.build(&chart, &self.base)?;
        if let FieldSpec::Sampled(g) = &field {
            let (r, l) = (g.chart.radius(), g.chart.length());
            if (r - chart.radius()).abs() > 1e-12 * r || (l - chart.length()).abs() > 1e-12 * l {
                return Err(Error::InvalidInput(format!(
                    "grid chart (R = {r}, L = {l}) differs from configured chart (R = {}, L = {})",
                    chart.radius(),
                    chart.length()
                )));
            }
        }
        Ok((field, chart, self.cfg.metric.build()?))
    }
}

fn resolve(c: &Common) -> Result<Resolved> {
    let (mut cfg, base) = match &c.config {
        Some(p) => (RunConfig::load(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(name) = &c.builtin {
        cfg.field = FieldConfig::builtin(name)?;
    }
    if let Some(path) = &c.grid {
        let h = read_header(path)?;
        // Absolute, so the config echo replays from any directory.
        let path = std::fs::canonicalize(path)?;
        cfg.field = FieldConfig::Grid { path, tricubic: false };
        cfg.chart = ChartConfig { radius: h.radius, length: h.length };
    }
    if let Some(r) = c.radius {
        cfg.chart.radius = r;
    }
    if let Some(l) = c.length {
        cfg.chart.length = l;
    }
    cfg.validate()?;
    Ok(Resolved { cfg, base })
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("BSCOPE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("BSCOPE_THREADS must be a positive integer, got `{v}`")))?;
    // A second call in the same process keeps the first pool.
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        info!("rayon pool already initialised; BSCOPE_THREADS={n} ignored");
    }
    Ok(())
}

fn emit(doc: &mut ReportDocument, common: &Common) -> Result<()> {
    if !common.no_timestamp {
        doc.stamp();
    }
    let mut text = doc.to_json();
    text.push('\n');
    match &common.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn oriented_disc(field: &FieldSpec, chart: TubeChart, metric: &MetricField, cfg: &RunConfig) -> Result<MeridionalDisc> {
    orient_boundary(&MeridionalDisc::new(chart, cfg.index.disc), field, metric, BOUNDARY_SAMPLES)
}

fn run_index(common: &Common, cross: bool, strict: bool) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, metric) = r.field()?;
    let report = compute_index(&field, chart, &metric, &VolumeForm::Metric, &r.cfg.index)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    let mut doc = ReportDocument::new("index", r.cfg.clone());
    if cross {
        let orbits = find_closed_orbits(&field, &chart, &r.cfg.orbits)?;
        doc.cross_validation = Some(cross_validate(&report, &orbits));
        doc.orbits = Some(orbits);
    }
    let code = if strict && !report.beltrami_passed() { EXIT_NOT_BELTRAMI } else { EXIT_OK };
    doc.index = Some(report);
    emit(&mut doc, common)?;
    Ok(code)
}

fn run_slk(common: &Common, oracle: bool) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, metric) = r.field()?;
    let disc = oriented_disc(&field, chart, &metric, &r.cfg)?;
    let slk = compute_slk(&field, &disc, &metric, &r.cfg.index.scan)?;
    let mut doc = ReportDocument::new("slk", r.cfg.clone());
    if oracle {
        match slk_pushoff_oracle(&field, &disc, &metric, &r.cfg.pushoff) {
            Ok(o) => {
                if o.slk != slk.slk {
                    doc.warnings.push(format!("push-off oracle gives slk = {}, disc count gives {}", o.slk, slk.slk));
                }
                doc.oracle = Some(o);
            }
            Err(Error::OracleUnavailable(m)) => doc.warnings.push(format!("push-off oracle unavailable: {m}")),
            Err(e) => return Err(e),
        }
    }
    doc.slk = Some(slk);
    emit(&mut doc, common)?;
    Ok(EXIT_OK)
}

fn run_check_beltrami(common: &Common) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, metric) = r.field()?;
    let volume = VolumeForm::Metric;
    let ctx = FieldContext::new(&field, &metric, &volume, chart);
    let [a, b, c] = r.cfg.index.beltrami_samples;
    let tol = r.cfg.index.beltrami_tolerances.unwrap_or_else(|| BeltramiTolerances::for_field(&field));
    let rep = beltrami_residuals(&ctx, &SampleSet::stratified(&chart, a, b, c), tol)?;
    let mut doc = ReportDocument::new("check-beltrami", r.cfg.clone());
    if let Some(l) = field.declared_lambda() {
        doc.warnings.push(format!("field declares λ = {l}; synthetic fields are not expected to pass"));
    }
    let code = if rep.passed { EXIT_OK } else { EXIT_NOT_BELTRAMI };
    if !rep.passed {
        eprintln!(
            "bscope: field is not Beltrami: curl residual {:.3e} (tol {:.1e}), div residual {:.3e} (tol {:.1e})",
            rep.curl_residual, tol.curl, rep.div_residual, tol.div
        );
    }
    doc.beltrami = Some(rep);
    emit(&mut doc, common)?;
    Ok(code)
}

fn run_boundary(common: &Common) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, metric) = r.field()?;
    let b = &r.cfg.index.boundary;
    check_invariance(&field, &chart, r.cfg.index.invariance_tol, (b.n_theta, b.n_z))?;
    let lf = boundary_foliation(&field, &metric, &chart, b)?;
    let mut doc = ReportDocument::new("boundary", r.cfg.clone());
    doc.boundary = Some(classify_boundary(&lf, b));
    emit(&mut doc, common)?;
    Ok(EXIT_OK)
}

fn run_orbits(common: &Common) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, _) = r.field()?;
    let orbits = find_closed_orbits(&field, &chart, &r.cfg.orbits)?;
    let mut doc = ReportDocument::new("orbits", r.cfg.clone());
    if !orbits.iter().any(|o| o.contractible) {
        doc.warnings.push("no contractible closed orbit found within the search budget".into());
    }
    doc.orbits = Some(orbits);
    emit(&mut doc, common)?;
    Ok(EXIT_OK)
}

fn run_render(common: &Common, svg_path: &Path) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, metric) = r.field()?;
    let disc = oriented_disc(&field, chart, &metric, &r.cfg)?;
    let slk = compute_slk(&field, &disc, &metric, &r.cfg.index.scan)?;
    let mut doc = ReportDocument::new("render", r.cfg.clone());
    let index = match compute_index(&field, chart, &metric, &VolumeForm::Metric, &r.cfg.index) {
        Ok(rep) => {
            let i = rep.index;
            doc.index = Some(rep);
            Some(i)
        }
        Err(e) => {
            doc.warnings.push(format!("index unavailable: {e}"));
            None
        }
    };
    let projected = ProjectedField::new(&field, &disc, &metric)?;
    let mut warnings = doc.warnings.clone();
    if let Some(rep) = &doc.index {
        warnings.extend(rep.warnings.iter().cloned());
    }
    let svg = render_disc(&RenderInput {
        projected: &projected,
        singularities: &slk.singularities,
        direction: disc.direction,
        slk: Some(slk.slk),
        index,
        title: format!("{} on R = {}, L = {}", field_label(&r.cfg.field), chart.radius(), chart.length()),
        warnings,
    });
    std::fs::write(svg_path, svg)?;
    doc.slk = Some(slk);
    emit(&mut doc, common)?;
    Ok(EXIT_OK)
}

fn field_label(f: &FieldConfig) -> String {
    match f {
        FieldConfig::TwistedTube => "twisted tube".into(),
        FieldConfig::Lundquist { lambda0 } => format!("Lundquist field, λ₀ = {lambda0}"),
        FieldConfig::FivePoint => "five-singularity disc field".into(),
        FieldConfig::Grid { path, .. } => format!("grid {}", path.display()),
        FieldConfig::Synthetic { points, .. } => format!("synthetic disc field, {} rest points", points.len()),
        other => format!("{other:?}").split_whitespace().next().unwrap_or("field").to_lowercase(),
    }
}

/// Resolutions at which the calibration scan is repeated.
pub const CALIBRATION_RESOLUTIONS: [usize; 2] = [128, 256];

pub fn calibrate(scan: &ScanConfig, pushoff: &crate::verify::PushoffConfig) -> Result<Calibration> {
    let chart = TubeChart::new(1.0, TAU)?;
    let field = FieldSpec::twisted_tube();
    let metric = MetricField::Euclidean;
    let disc = orient_boundary(&MeridionalDisc::new(chart, Default::default()), &field, &metric, BOUNDARY_SAMPLES)?;
    let oracle = slk_pushoff_oracle(&field, &disc, &metric, pushoff)?.slk;
    let mut runs = Vec::new();
    for resolution in CALIBRATION_RESOLUTIONS {
        let s = compute_slk(&field, &disc, &metric, &ScanConfig { resolution, ..*scan })?;
        let implied_sign = (s.sum_sigma_index != 0 && oracle % s.sum_sigma_index == 0)
            .then(|| oracle / s.sum_sigma_index)
            .filter(|v| v.abs() == 1);
        runs.push(CalibrationRun { resolution, sum_sigma_index: s.sum_sigma_index, oracle_slk: oracle, implied_sign });
    }
    let first = runs[0].implied_sign;
    let stable = first.is_some() && runs.iter().all(|r| r.implied_sign == first);
    let slk_sign = if stable { first } else { None };
    Ok(Calibration { runs, stable, slk_sign, matches_builtin: slk_sign == Some(SLK_SIGN) })
}

fn run_calibrate(common: &Common) -> Result<i32> {
    let mut r = resolve(common)?;
    r.cfg.field = FieldConfig::TwistedTube;
    r.cfg.chart = ChartConfig::default();
    let cal = calibrate(&r.cfg.index.scan, &r.cfg.pushoff)?;
    let mut doc = ReportDocument::new("calibrate", r.cfg.clone());
    let code = if cal.stable { EXIT_OK } else { EXIT_NUMERICAL };
    if !cal.stable {
        eprintln!("bscope: calibration unstable across resolutions {CALIBRATION_RESOLUTIONS:?}");
    } else if !cal.matches_builtin {
        doc.warnings.push(format!("calibrated s⋆ = {:?} differs from built-in {SLK_SIGN}", cal.slk_sign));
    }
    doc.calibration = Some(cal);
    emit(&mut doc, common)?;
    Ok(code)
}

fn run_export(common: &Common, out: &Path, dims: &[usize]) -> Result<i32> {
    let r = resolve(common)?;
    let (field, chart, _) = r.field()?;
    if dims.len() != 3 || dims.iter().any(|&n| n < 4) {
        return Err(Error::InvalidInput(format!("--dims needs three sizes ≥ 4, got {dims:?}")));
    }
    let grid = SampledGrid::from_field(&field, chart, (dims[0], dims[1], dims[2]))?;
    write_grid(out, &grid)?;
    info!("wrote {} samples to {}", grid.values().len(), out.display());
    Ok(EXIT_OK)
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Index { common, cross_validate, strict } => run_index(common, *cross_validate, *strict),
        Command::Slk { common, no_oracle } => run_slk(common, !no_oracle),
        Command::CheckBeltrami { common } => run_check_beltrami(common),
        Command::Boundary { common } => run_boundary(common),
        Command::Orbits { common } => run_orbits(common),
        Command::Render { common, render_out } => run_render(common, render_out),
        Command::Calibrate { common } => run_calibrate(common),
        Command::ExportGrid { common, grid_out, dims } => run_export(common, grid_out, dims),
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| dispatch(&cli.command));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bscope: error: {e}");
            e.exit_code()
        }
    }
}
