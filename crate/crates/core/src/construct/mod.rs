//! The deterministic LqHV signed measure and its diagnostics.

pub mod coefficient;
pub mod expectation;
pub mod jordan;
pub mod measure;
pub mod stochastic;

pub use coefficient::{coefficient, collapsed_empty_coefficient, CoefficientTable};
pub use expectation::{chsh_value, product_expectation_family, product_expectation_model};
pub use jordan::{jordan_decompose, JordanPair, JordanSummary};
pub use measure::{
    build_deterministic_measure, build_from_family, check_budget, verify_marginals, verify_measure, BuildOptions,
    CoordinateVariable, DeterministicLqHVModel, SignedMeasure, VerifyReport, DEFAULT_ATOM_BUDGET,
};
pub use stochastic::{determinize, StochasticLqHVModel};
