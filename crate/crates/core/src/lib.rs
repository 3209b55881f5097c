//! Contractible closed orbits of Beltrami fields on a solid torus.
//!
//! The crate computes the index 𝕀 of a curl eigenfield `X` on
//! `V = D² × S¹`: the sign of its eigenvalue combined with the self-linking
//! number of a transverse meridian, read off the singularities of `X`
//! projected onto a meridional disc. A nonzero 𝕀 forces a contractible
//! closed orbit; the [`verify`] module searches for one independently.

// `!(x > tol)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli_io;
pub mod disc_index;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod verify;

pub use boundary::{
    boundary_foliation, check_invariance, classify_boundary, BoundaryClassification, BoundaryConfig, TorusLineField,
};
pub use disc_index::{compute_index, compute_slk, IndexConfig, IndexReport, SlkResult, Verdict, SLK_SIGN};
pub use error::{Error, Result};
pub use fields::FieldSpec;
pub use geometry::{DiscShape, MeridionalDisc, MetricField, TubeChart, VolumeForm};
