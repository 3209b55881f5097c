//! Independent checks: Gauss linking, push-off oracle, closed-orbit search.

pub mod flow;
pub mod linking;
pub mod orbits;
pub mod pushoff;

use serde::{Deserialize, Serialize};

use crate::disc_index::IndexReport;

pub use flow::{integrate_flowline, Flowline};
pub use linking::gauss_linking;
pub use orbits::{find_closed_orbits, OrbitRecord, OrbitSearchConfig, Section};
pub use pushoff::{slk_pushoff_oracle, PushoffConfig, PushoffResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annotation {
    /// 𝕀 ≠ 0 and a contractible orbit was found.
    Confirmed,
    /// 𝕀 ≠ 0 but the search found no contractible orbit.
    UnconfirmedWithinBudget,
    /// 𝕀 = 0: the index makes no claim.
    IndexInconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub annotation: Annotation,
    pub contractible_orbits: usize,
    pub witness: Option<OrbitRecord>,
}

/// Compare the index verdict with a closed-orbit search.
pub fn cross_validate(report: &IndexReport, orbits: &[OrbitRecord]) -> CrossValidation {
    let witness = orbits.iter().find(|o| o.contractible).cloned();
    let contractible_orbits = orbits.iter().filter(|o| o.contractible).count();
    let annotation = match (report.index != 0, witness.is_some()) {
        (false, _) => Annotation::IndexInconclusive,
        (true, true) => Annotation::Confirmed,
        (true, false) => Annotation::UnconfirmedWithinBudget,
    };
    CrossValidation { annotation, contractible_orbits, witness }
}
