//! Numerical laboratory for planar self-affine sets.
//!
//! Starting from an iterated function system of contractive invertible
//! affine maps of the plane, the crate checks strong separation, domination
//! and irreducibility of the linear parts and the projection condition, and
//! estimates the Assouad dimension of the attractor in two independent ways:
//! from localized covering counts, and as one plus the largest dimension of a
//! slice of the attractor along a Furstenberg direction. It also generates
//! tangent sets and tests them for comb structure.
//!
//! ```
//! use atl::{dimension, systems};
//!
//! let carpet = systems::carpet23();
//! let est = dimension::box_dimension(&carpet, &dimension::BoxOptions::default()).unwrap();
//! assert!((est.value - 1.3496).abs() < 0.05);
//! ```

pub mod cli;
pub mod dimension;
pub mod ergodic;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod linalg;
pub mod pieces;
pub mod semigroup;
pub mod stream;
pub mod systems;
pub mod tangent;

pub use error::{Error, Result};
pub use ifs::{AffineMap, AttractorCloud, Budget, IfSystem, Rect, Word};
pub use linalg::{Mat2, Vec2};
pub use semigroup::{Direction, DirectionSet, Multicone};
