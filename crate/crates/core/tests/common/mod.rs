//! Field corpus shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use bscope::disc_index::{five_point_disc, synthesize_disc_field, SyntheticPoint, BOUNDARY_SAMPLES};
use bscope::fields::SampledGrid;
use bscope::geometry::orient_boundary;
use bscope::{DiscShape, FieldSpec, MeridionalDisc, MetricField, TubeChart};

pub struct Entry {
    pub name: &'static str,
    pub field: FieldSpec,
    pub chart: TubeChart,
    /// Whether some flat meridian is transverse, so that slk is defined.
    pub transverse: bool,
}

fn chart(r: f64) -> TubeChart {
    TubeChart::new(r, TAU).unwrap()
}

fn synthetic(points: &[SyntheticPoint]) -> FieldSpec {
    FieldSpec::Synthetic(Arc::new(synthesize_disc_field(chart(1.0), points, 1.0).unwrap()))
}

fn sampled_lundquist() -> FieldSpec {
    let grid = SampledGrid::from_field(&FieldSpec::lundquist(1.0), chart(1.0), (32, 48, 16)).unwrap();
    FieldSpec::Sampled(Arc::new(grid))
}

pub fn corpus() -> Vec<Entry> {
    use SyntheticPoint as P;
    let e = |name, field, r, transverse| Entry { name, field, chart: chart(r), transverse };
    vec![
        e("tube-R1", FieldSpec::twisted_tube(), 1.0, true),
        e("tube-R2.5", FieldSpec::twisted_tube(), 2.5, true),
        e("tube-Rpi", FieldSpec::twisted_tube(), PI, false),
        e("lundquist-R1", FieldSpec::lundquist(1.0), 1.0, true),
        e("lundquist-R3", FieldSpec::lundquist(1.0), 3.0, true),
        e("lundquist-R1-sampled", sampled_lundquist(), 1.0, true),
        e("five-point", FieldSpec::Synthetic(Arc::new(five_point_disc(chart(1.0)))), 1.0, true),
        e("single-negative-centre", synthetic(&[P::elliptic(0.1, 0.05, -1)]), 1.0, true),
        e(
            "negative-pair-saddle",
            synthetic(&[P::elliptic(-0.45, 0.1, -1), P::elliptic(0.45, 0.1, -1), P::hyperbolic(0.0, -0.2, 1)]),
            1.0,
            true,
        ),
    ]
}

pub fn flat_disc(entry: &Entry, metric: &MetricField) -> MeridionalDisc {
    flat_disc_with(entry, metric, DiscShape::flat(0.0))
}

pub fn flat_disc_with(entry: &Entry, metric: &MetricField, shape: DiscShape) -> MeridionalDisc {
    orient_boundary(&MeridionalDisc::new(entry.chart, shape), &entry.field, metric, BOUNDARY_SAMPLES).unwrap()
}
