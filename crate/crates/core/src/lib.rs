//! Nonsignaling consistency checks and explicit local quasi hidden variable
//! models for finite multipartite correlation scenarios.
//!
//! A scenario assigns each of `N` sites a number of measurement settings and
//! a finite outcome set. A [`DistributionFamily`] holds one joint table per
//! setting tuple. When the family is nonsignaling, [`build_from_family`]
//! produces a normalized signed measure on `Λ₁^{S₁}×⋯×Λ_N^{S_N}` whose
//! marginals onto the coordinates of each setting tuple reproduce the
//! corresponding joint table exactly. [`lhv_feasible`] decides whether a
//! nonnegative such measure exists.
//!
//! All numerics are generic over [`Scalar`]: `f64` or exact [`Rational`].

pub mod boxes;
pub mod consistency;
pub mod construct;
pub mod error;
pub mod io;
pub mod lp;
pub mod quantum;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod tensor;

pub use consistency::{
    check_nonsignaling, compare_scenarios_epr, extract_marginal_family, marginalize, EprReport, MarginalFamily, Witness,
};
pub use construct::{
    build_deterministic_measure, build_from_family, coefficient, determinize, jordan_decompose,
    product_expectation_family, product_expectation_model, verify_marginals, verify_measure, BuildOptions,
    CoefficientTable, DeterministicLqHVModel, JordanPair, SignedMeasure, StochasticLqHVModel, VerifyReport,
};
pub use error::{Error, ErrorKind, Result};
pub use lp::{lhv_feasible, Certificate, LhvVerdict};
pub use quantum::{born_family, DensityMatrix, Povm, QuantumScenario};
pub use scalar::{Mode, Rational, Scalar, DEFAULT_TOL};
pub use scenario::{DistributionFamily, Scenario, SettingTuple, SiteSet};
pub use tensor::Tensor;
