use super::simplex::{EqualitySystem, Feasibility};
use crate::boxes::split_assignment;
use crate::consistency::check_nonsignaling;
use crate::construct::{check_budget, SignedMeasure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DistributionFamily, Scenario};
use crate::tensor::Tensor;

/// A linear functional on families, one coefficient per table entry,
/// separating a family from every local deterministic vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T> {
    scenario: Scenario,
    /// `coefficients[tuple index]` has the shape of the joint tables.
    coefficients: Vec<Tensor<T>>,
}

impl<T: Scalar> Certificate<T> {
    pub fn new(scenario: Scenario, coefficients: Vec<Tensor<T>>) -> Result<Self> {
        if coefficients.len() != scenario.n_tuples() || coefficients.iter().any(|c| c.shape() != scenario.outcomes()) {
            return Err(Error::input("certificate shape does not match the scenario"));
        }
        Ok(Certificate { scenario, coefficients })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &[Tensor<T>] {
        &self.coefficients
    }

    /// `Σ_{tuple, λ} y[tuple](λ)·P_tuple(λ)`.
    pub fn evaluate(&self, family: &DistributionFamily<T>) -> Result<T> {
        if family.scenario() != &self.scenario {
            return Err(Error::input("certificate and family have different scenarios"));
        }
        let mut total = T::zero();
        for (c, t) in self.coefficients.iter().zip(family.tables()) {
            for (a, b) in c.data().iter().zip(t.data()) {
                total += &(a.clone() * b.clone());
            }
        }
        Ok(total)
    }

    /// Value on the local deterministic vertex `assignment[site][setting]`.
    pub fn evaluate_vertex(&self, assignment: &[Vec<usize>]) -> T {
        let mut total = T::zero();
        for (tuple, c) in self.scenario.tuples().zip(&self.coefficients) {
            let out: Vec<usize> = tuple
                .settings()
                .iter()
                .enumerate()
                .map(|(site, &s)| assignment[site][s])
                .collect();
            total += c.get(&out);
        }
        total
    }

    /// Strictly positive on `family`, nonpositive on every local
    /// deterministic vertex (checked by enumeration).
    pub fn separates(&self, family: &DistributionFamily<T>, tol: f64) -> Result<bool> {
        if !self.evaluate(family)?.positive_beyond(tol) {
            return Ok(false);
        }
        Ok(crate::boxes::local_assignments(&self.scenario).all(|a| (-self.evaluate_vertex(&a)).nonneg_within(tol)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhvVerdict<T> {
    pub feasible: bool,
    /// Nonnegative simulating measure, when feasible.
    pub measure: Option<SignedMeasure<T>>,
    /// Separating functional, when infeasible.
    pub certificate: Option<Certificate<T>>,
}

/// Looks for a nonnegative measure on the joint space whose tuple marginals
/// equal the family's tables. Each atom is a local deterministic vertex, so
/// feasibility is membership in the local polytope.
pub fn lhv_feasible<T: Scalar>(family: &DistributionFamily<T>, tol: f64, budget: usize) -> Result<LhvVerdict<T>> {
    let scenario = family.scenario();
    let n_atoms = check_budget(scenario, budget)?;
    check_nonsignaling(family, tol).map_err(|w| Error::Signaling(Box::new(w)))?;

    let table_len: usize = scenario.outcomes().iter().product();
    let n_rows = scenario.n_tuples() * table_len;
    let mut rows = vec![vec![T::zero(); n_atoms]; n_rows];
    let joint_shape = scenario.joint_shape();
    for (atom, point) in crate::tensor::MultiIndex::new(&joint_shape).enumerate() {
        let answers = split_assignment(scenario, &point);
        for (t, tuple) in scenario.tuples().enumerate() {
            let out: Vec<usize> = tuple
                .settings()
                .iter()
                .enumerate()
                .map(|(site, &s)| answers[site][s])
                .collect();
            let entry = crate::tensor::offset_in(scenario.outcomes(), &out);
            rows[t * table_len + entry][atom] = T::one();
        }
    }
    let rhs: Vec<T> = family.tables().iter().flat_map(|t| t.data().iter().cloned()).collect();
    let system = EqualitySystem { rows, rhs };

    match system.solve(tol) {
        Feasibility::Feasible(x) => {
            let x = x
                .into_iter()
                .map(|v| if v.is_negative() { T::zero() } else { v })
                .collect();
            let measure = SignedMeasure::new(scenario.clone(), Tensor::from_vec(joint_shape, x)?, tol)?;
            Ok(LhvVerdict {
                feasible: true,
                measure: Some(measure),
                certificate: None,
            })
        }
        Feasibility::Infeasible { y, .. } => {
            let coefficients = y
                .chunks(table_len)
                .map(|c| Tensor::from_vec(scenario.outcomes().to_vec(), c.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Ok(LhvVerdict {
                feasible: false,
                measure: None,
                certificate: Some(Certificate::new(scenario.clone(), coefficients)?),
            })
        }
    }
}
