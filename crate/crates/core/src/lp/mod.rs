//! Local hidden variable feasibility by linear programming.

pub mod lhv;
pub mod simplex;

pub use lhv::{lhv_feasible, Certificate, LhvVerdict};
pub use simplex::{EqualitySystem, Feasibility};
