//! Lattice polytopes, exact lattice-point enumeration, Ehrhart polynomials,
//! mixed volumes, and piecewise-linear convex functions: the combinatorial
//! substrate for toric test-configurations.
//!
//! Everything is immutable and every operation is a pure function over
//! exact rationals.

mod hull;
mod lattice;
pub mod linalg;
mod mixed;
mod plfun;
pub mod simplex;

pub use hull::{dot_int_rat, in_convex_hull, to_primitive_integer, Facet, QPolytope};
pub use lattice::{enumerate_lattice_points, LatticePolytope};
pub use mixed::{mixed_volume, mixed_volume_q};
pub use plfun::{
    graph_polytope, vertices_from_inequalities, GraphPolytope, PLConvexFunction, PLPiece,
};
