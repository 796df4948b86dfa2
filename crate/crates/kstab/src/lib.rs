//! Exact-arithmetic stability invariants for polarised pairs and maps.
//!
//! Everything is computed over the rationals: lattice-point enumeration,
//! Ehrhart and weight polynomials, mixed volumes, and the symbolic
//! intersection algebra. No floating point appears anywhere in an
//! invariant computation.

pub mod error;
pub mod exactmath;
pub mod fibration;
pub mod intersect;
pub mod invariants;
pub mod kodaira;
pub mod polytope;
pub mod suites;
pub mod torictc;

pub use error::KstabError;
pub use exactmath::{BiPoly, Rat, UniPoly};
