//! Crystallographic toolkit for cubic-to-monoclinic and cubic-to-orthorhombic
//! martensite: twin systems, habit planes, cofactor conditions, star twins and
//! rank-one connections in two-well quasiconvex hulls.

pub mod cofactor;
pub mod error;
pub mod habit;
pub mod lattice;
pub mod linalg3;
pub mod materials;
pub mod qchull;
pub mod report;
pub mod startwin;
pub mod tolerances;
pub mod twinning;

pub use error::{CofkitError, Result};
pub use linalg3::{Mat3, Vec3};
pub use tolerances::Tolerances;
