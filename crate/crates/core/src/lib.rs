//! Certification of r-regularity for shapes given by boundary samples and
//! scaled normals.
//!
//! A bounded open set is r-regular when every boundary point has an inner and
//! an outer tangent ball of radius `r`. From boundary data this is decided by
//! two conditions: the scaled normal field `eta` (with `|eta| = r`) is
//! 1-Lipschitz, and any two boundary points whose intrinsic distance is at
//! least `pi/2` times their Euclidean distance are at least `2r` apart.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod certifier;
pub mod error;
pub mod geometry;
pub mod index;
pub mod intrinsic;
pub mod normal_field;
pub mod projection;
mod serde_util;
pub mod shapes;
pub mod spatial;
pub mod tolerance;

pub use boundary::{Boundary, BoundarySample, Vec3};
pub use error::{RegulusError, Result};
pub use geometry::Radius;
pub use index::IndexedBoundary;
pub use tolerance::Tolerances;
