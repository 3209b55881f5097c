//! SVG of the characteristic foliation on a meridional disc.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::disc_index::{PlanarField, ProjectedField, Rotated, SingularityKind, SingularityRecord};
use crate::geometry::BoundaryDirection;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;
const LEGEND: f64 = 90.0;

pub struct RenderInput<'a> {
    pub projected: &'a ProjectedField,
    pub singularities: &'a [SingularityRecord],
    pub direction: BoundaryDirection,
    pub slk: Option<i32>,
    pub index: Option<i32>,
    pub title: String,
    pub warnings: Vec<String>,
}

fn to_px(uv: Vector2<f64>) -> (f64, f64) {
    let s = 0.5 * (SIZE - 2.0 * MARGIN);
    (MARGIN + s * (1.0 + uv.x), MARGIN + s * (1.0 - uv.y))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn comment_safe(s: &str) -> String {
    s.replace("--", "- -")
}

/// Trace one streamline of the unit direction field both ways from `seed`.
fn streamline(f: &dyn Fn(Vector2<f64>) -> Option<Vector2<f64>>, seed: Vector2<f64>, avoid: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let step = 0.01;
    let mut halves = Vec::new();
    for sign in [1.0, -1.0] {
        let mut pts = Vec::new();
        let mut p = seed;
        let mut prev: Option<Vector2<f64>> = None;
        for _ in 0..250 {
            let Some(d1) = f(p) else { break };
            // Line fields have no preferred sign; keep the heading continuous.
            let d1 = match prev {
                Some(q) if q.dot(&d1) < 0.0 => -d1,
                _ => d1,
            } * sign;
            let mid = p + d1 * (0.5 * step);
            let Some(mut d2) = f(mid) else { break };
            if d2.dot(&d1) < 0.0 {
                d2 = -d2;
            }
            let next = p + d2 * step;
            if next.norm() > 1.0 || avoid.iter().any(|a| (next - a).norm() < 0.015) {
                break;
            }
            prev = Some(d2 * sign);
            p = next;
            pts.push(p);
        }
        halves.push(pts);
    }
    let mut line: Vec<Vector2<f64>> = halves[1].iter().rev().cloned().collect();
    line.push(seed);
    line.extend(halves[0].iter().cloned());
    line
}

pub fn render_disc(input: &RenderInput<'_>) -> String {
    let rot = Rotated(input.projected);
    let dir = |uv: Vector2<f64>| {
        let w = rot.eval(uv);
        let n = w.norm();
        (n > 1e-12).then(|| w / n)
    };
    let centres: Vec<Vector2<f64>> = input.singularities.iter().map(|s| Vector2::new(s.uv[0], s.uv[1])).collect();

    let height = SIZE + LEGEND;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{height}" viewBox="0 0 {SIZE} {height}">"#
    );
    for w in &input.warnings {
        let _ = writeln!(svg, "<!-- warning: {} -->", comment_safe(w));
    }
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(&input.title));
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{SIZE}" height="{height}" fill="white"/>"#);
    let (cx, cy) = to_px(Vector2::zeros());
    let rad = 0.5 * (SIZE - 2.0 * MARGIN);
    let _ = writeln!(svg, r##"<circle cx="{cx}" cy="{cy}" r="{rad}" fill="#fafafa" stroke="black" stroke-width="1.5"/>"##);

    let _ = writeln!(svg, r##"<g fill="none" stroke="#4a6fa5" stroke-width="0.8" stroke-opacity="0.8">"##);
    let n = 14;
    for i in 0..n {
        for j in 0..n {
            let seed = Vector2::new(-1.0 + (2.0 * i as f64 + 1.0) / n as f64, -1.0 + (2.0 * j as f64 + 1.0) / n as f64);
            if seed.norm() > 0.97 || centres.iter().any(|c| (seed - c).norm() < 0.02) {
                continue;
            }
            let line = streamline(&dir, seed, &centres);
            if line.len() < 3 {
                continue;
            }
            let mut d = String::new();
            for (k, p) in line.iter().enumerate() {
                let (x, y) = to_px(*p);
                let _ = write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
            }
            let _ = writeln!(svg, r#"<path d="{}"/>"#, d.trim_end());
        }
    }
    let _ = writeln!(svg, "</g>");

    // Boundary orientation arrow at t = π/4, pointing along γ'.
    let t = std::f64::consts::FRAC_PI_4;
    let s = match input.direction {
        BoundaryDirection::Forward => 1.0,
        BoundaryDirection::Reversed => -1.0,
    };
    let base = Vector2::new(t.cos(), t.sin());
    let tangent = Vector2::new(-t.sin(), t.cos()) * s;
    let tip = to_px(base + tangent * 0.06);
    let l = to_px(base - tangent * 0.03 + base * 0.035);
    let r = to_px(base - tangent * 0.03 - base * 0.035);
    let _ = writeln!(
        svg,
        r#"<polygon class="boundary-arrow" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="black"/>"#,
        tip.0, tip.1, l.0, l.1, r.0, r.1
    );

    for rec in input.singularities {
        let (x, y) = to_px(Vector2::new(rec.uv[0], rec.uv[1]));
        let colour = if rec.sigma > 0 { "#c0392b" } else { "#2c3e90" };
        let glyph = match rec.kind {
            SingularityKind::Elliptic => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="{colour}"/>"#),
            SingularityKind::Hyperbolic => format!(
                r#"<rect x="{:.2}" y="{:.2}" width="11" height="11" fill="{colour}" transform="rotate(45 {x:.2} {y:.2})"/>"#,
                x - 5.5,
                y - 5.5
            ),
            SingularityKind::HigherOrder => format!(
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
                x,
                y - 7.0,
                x - 6.0,
                y + 5.0,
                x + 6.0,
                y + 5.0
            ),
        };
        let label = format!("({:+}, {})", rec.poincare_index, if rec.sigma > 0 { "+" } else { "−" });
        let _ = writeln!(svg, r#"<g class="singularity">{glyph}<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text></g>"#, x + 8.0, y - 8.0, escape(&label));
    }

    let ly = SIZE + 20.0;
    let slk = input.slk.map_or("n/a".to_string(), |v| v.to_string());
    let idx = input.index.map_or("n/a".to_string(), |v| v.to_string());
    let _ = writeln!(svg, r#"<g class="legend" font-family="sans-serif" font-size="14">"#);
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{ly}">{}</text>"#, escape(&input.title));
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{}">slk = {}   𝕀 = {}</text>"#, ly + 22.0, escape(&slk), escape(&idx));
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN}" y="{}" font-size="11">circle: elliptic, diamond: hyperbolic; red σ = +1, blue σ = −1; labels (Ind, σ)</text>"##,
        ly + 44.0
    );
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    svg
}
