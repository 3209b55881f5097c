//! Dormand–Prince 5(4) integration of flowlines.

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::geometry::{Point, TubeChart, Vector};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step: fifth-order solution and error estimate.
pub fn dopri_step(f: &impl Fn(&Point) -> Vector, y: &Point, h: f64) -> (Point, Vector) {
    let k1 = f(y);
    let k2 = f(&(y + h * A21 * k1));
    let k3 = f(&(y + h * (A31 * k1 + A32 * k2)));
    let k4 = f(&(y + h * (A41 * k1 + A42 * k2 + A43 * k3)));
    let k5 = f(&(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)));
    let k6 = f(&(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)));
    let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = f(&y5);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y5, err)
}

/// Adaptive step controller state.
#[derive(Clone, Copy, Debug)]
pub struct Stepper {
    pub tol: f64,
    pub h: f64,
    pub h_max: f64,
}

impl Stepper {
    pub fn new(tol: f64, h0: f64, h_max: f64) -> Self {
        Stepper { tol, h: h0.min(h_max), h_max }
    }

    /// Take one accepted step of at most `limit` from `(t, y)`; returns the step used.
    pub fn advance(&mut self, f: &impl Fn(&Point) -> Vector, t: f64, y: &Point, limit: f64) -> Result<(f64, Point)> {
        loop {
            let h = self.h.min(limit);
            if !(h > 1e-14 * (1.0 + t.abs())) {
                return Err(Error::Stiffness { t, step: h });
            }
            let (y5, err) = dopri_step(f, y, h);
            let scale = self.tol * (1.0 + y.norm().max(y5.norm()));
            let e = err.norm() / scale;
            if !e.is_finite() {
                self.h = 0.25 * h;
                continue;
            }
            let factor = if e > 0.0 { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
            if e <= 1.0 {
                if h >= self.h {
                    self.h = (h * factor).min(self.h_max);
                }
                return Ok((h, y5));
            }
            self.h = h * factor;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flowline {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// Steps that left the chart and were projected back onto `r = R`.
    pub clipped: usize,
}

/// Clamp `p` onto the closed tube; true when it was outside.
pub fn clip_to_chart(chart: &TubeChart, p: &mut Point) -> bool {
    let r = p.x.hypot(p.y);
    if r > chart.radius() {
        let s = chart.radius() / r;
        p.x *= s;
        p.y *= s;
        true
    } else {
        false
    }
}

/// Integrate `dx/dt = X(x)` from `start` for `duration` with per-step error `tol`.
pub fn integrate_flowline(field: &FieldSpec, chart: &TubeChart, start: Point, duration: f64, tol: f64) -> Result<Flowline> {
    let f = |p: &Point| field.evaluate(p);
    let speed = field.evaluate(&start).norm().max(1e-12);
    let h_max = 0.1 * chart.radius().min(chart.length()) / speed;
    let mut stepper = Stepper::new(tol, 0.01 * h_max, h_max);
    let mut t = 0.0;
    let mut y = start;
    let mut out = Flowline { times: vec![0.0], points: vec![start], clipped: 0 };
    let dir = duration.signum();
    let g = |p: &Point| f(p) * dir;
    while t < duration.abs() {
        let (h, mut y1) = stepper.advance(&g, t, &y, duration.abs() - t)?;
        if clip_to_chart(chart, &mut y1) {
            out.clipped += 1;
        }
        t += h;
        y = y1;
        out.times.push(t * dir);
        out.points.push(y);
    }
    if out.clipped > 0 {
        log::warn!("flowline left the chart {} times and was clipped", out.clipped);
    }
    Ok(out)
}
