//! Exact rational arithmetic and exact polynomial fitting.
//!
//! Everything downstream is built on this module. All values are immutable
//! after construction and all operations are pure functions.

mod bipoly;
mod interp;
mod poly;
mod rat;

pub use bipoly::{extract_e_coefficients, BiPoly};
pub use interp::{interpolate, interpolate_checked};
pub use poly::{leading_coefficient, UniPoly};
pub use rat::Rat;
