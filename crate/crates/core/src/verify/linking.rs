//! Gauss linking number of two closed polygons.
//!
//! Each pair of segments contributes the signed solid angle of the
//! quadrilateral they span, which is exact for straight segments.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::geometry::Point;

fn unit(v: crate::geometry::Vector) -> Option<crate::geometry::Vector> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

/// Signed solid-angle contribution of segments `p1→p2` and `p3→p4`, over `4π`.
fn segment_pair(p1: &Point, p2: &Point, p3: &Point, p4: &Point) -> f64 {
    let r13 = p3 - p1;
    let r14 = p4 - p1;
    let r23 = p3 - p2;
    let r24 = p4 - p2;
    let r12 = p2 - p1;
    let r34 = p4 - p3;
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(r13.cross(&r14)),
        unit(r14.cross(&r24)),
        unit(r24.cross(&r23)),
        unit(r23.cross(&r13)),
    ) else {
        return 0.0;
    };
    let clamp = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = clamp(n1.dot(&n2)) + clamp(n2.dot(&n3)) + clamp(n3.dot(&n4)) + clamp(n4.dot(&n1));
    let s = r34.cross(&r12).dot(&r13);
    omega * s.signum() / (4.0 * PI)
}

/// Linking number of closed polygons `a` and `b` (last vertex joins the first).
pub fn gauss_linking(a: &[Point], b: &[Point]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    (0..na)
        .into_par_iter()
        .map(|i| {
            let (p1, p2) = (&a[i], &a[(i + 1) % na]);
            (0..nb).map(|j| segment_pair(p1, p2, &b[j], &b[(j + 1) % nb])).sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}
