//! Exact-arithmetic invariants for gluing punctured tropical curves.
//!
//! The crate computes the combinatorial data governing logarithmic gluing:
//! connected-component counts of fs fibre products of log points, tropical
//! gluing maps and their multiplicities, rigid-curve degrees, wall-type
//! invariants, the classical two-component degeneration coefficient, the
//! wall recursion and the blow-up partition formula, plus a brute-force
//! genus-zero toric tropical counting oracle. No floating point anywhere.

pub mod basic_cone;
pub mod complex;
pub mod cones;
pub mod error;
pub mod json;
pub mod lattice;
pub mod lp;
pub mod formulas;
pub mod gluing;
pub mod monoids;
pub mod project;
pub mod toric;
pub mod types;

pub use error::{Error, Result};
