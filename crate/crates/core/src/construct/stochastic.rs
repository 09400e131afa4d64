use std::collections::BTreeMap;

use super::measure::{check_budget, DeterministicLqHVModel, SignedMeasure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{Scenario, SettingTuple};
use crate::tensor::Tensor;

/// A stochastic LqHV model on a finite `Ω`: a normalized, possibly signed
/// weight `ν` and, per `(site, setting)`, a row-stochastic matrix whose row
/// `ω` is `P_n^{(s)}(·|ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticLqHVModel<T> {
    nu: Vec<T>,
    /// Keyed by 0-based `(site, setting)`; shape `[|Ω|, K_n]`.
    conditionals: BTreeMap<(usize, usize), Tensor<T>>,
}

impl<T: Scalar> StochasticLqHVModel<T> {
    pub fn new(nu: Vec<T>, conditionals: BTreeMap<(usize, usize), Tensor<T>>, tol: f64) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::input("Ω must be nonempty"));
        }
        if nu.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::input("ν has a non-finite entry"));
        }
        let total: T = nu.iter().cloned().sum();
        if !total.approx_eq(&T::one(), tol) {
            return Err(Error::NotNormalized {
                what: "ν".into(),
                sum: total.to_string(),
            });
        }
        for (&(site, setting), m) in &conditionals {
            let label = format!("conditional for site {} setting {}", site + 1, setting + 1);
            if m.rank() != 2 || m.shape()[0] != nu.len() {
                return Err(Error::input(format!(
                    "{label} must have {} rows, has shape {:?}",
                    nu.len(),
                    m.shape()
                )));
            }
            for row in m.data().chunks(m.shape()[1]) {
                if let Some(v) = row.iter().find(|v| !v.nonneg_within(tol)) {
                    return Err(Error::NegativeProbability {
                        what: label,
                        value: v.to_string(),
                    });
                }
                let s: T = row.iter().cloned().sum();
                if !s.approx_eq(&T::one(), tol) {
                    return Err(Error::NotNormalized {
                        what: label,
                        sum: s.to_string(),
                    });
                }
            }
        }
        Ok(StochasticLqHVModel { nu, conditionals })
    }

    pub fn omega_size(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[T] {
        &self.nu
    }

    fn conditional(&self, scenario: &Scenario, site: usize, setting: usize) -> Result<&Tensor<T>> {
        let m = self.conditionals.get(&(site, setting)).ok_or_else(|| {
            Error::input(format!(
                "missing conditional for site {} setting {}",
                site + 1,
                setting + 1
            ))
        })?;
        if m.shape()[1] != scenario.outcomes()[site] {
            return Err(Error::input(format!(
                "conditional for site {} setting {} has {} outcomes, scenario has {}",
                site + 1,
                setting + 1,
                m.shape()[1],
                scenario.outcomes()[site]
            )));
        }
        Ok(m)
    }

    fn check_cover(&self, scenario: &Scenario) -> Result<()> {
        for site in 0..scenario.n_parties() {
            for setting in 0..scenario.settings()[site] {
                self.conditional(scenario, site, setting)?;
            }
        }
        Ok(())
    }

    /// Joint table at `tuple`: `Σ_ω ν(ω)·∏_n P_n^{(s_n)}(λ_n|ω)`. Entries are
    /// returned as computed; a signed `ν` may make them negative.
    pub fn joint_table(&self, scenario: &Scenario, tuple: &SettingTuple) -> Result<Tensor<T>> {
        scenario.check_tuple(tuple)?;
        let mats = tuple
            .settings()
            .iter()
            .enumerate()
            .map(|(site, &s)| self.conditional(scenario, site, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.mix(scenario.outcomes().to_vec(), &mats))
    }

    /// `Σ_ω ν(ω)·∏_k M_k(λ_k|ω)` over the given conditional matrices.
    fn mix(&self, shape: Vec<usize>, mats: &[&Tensor<T>]) -> Tensor<T> {
        Tensor::from_fn(shape, |out| {
            let mut acc = T::zero();
            for (w, nu) in self.nu.iter().enumerate() {
                let mut v = nu.clone();
                for (m, &o) in mats.iter().zip(out) {
                    v *= m.get(&[w, o]);
                }
                acc += &v;
            }
            acc
        })
    }
}

/// Deterministic model on the joint space:
/// `μ(λ) = Σ_ω ν(ω)·∏_{n,s} P_n^{(s)}(λ_{n,s}|ω)` with coordinate variables.
pub fn determinize<T: Scalar>(
    model: &StochasticLqHVModel<T>,
    scenario: &Scenario,
    budget: usize,
    tol: f64,
) -> Result<DeterministicLqHVModel<T>> {
    model.check_cover(scenario)?;
    check_budget(scenario, budget)?;
    let mats = scenario
        .axes()
        .iter()
        .map(|a| model.conditional(scenario, a.site, a.setting))
        .collect::<Result<Vec<_>>>()?;
    let atoms = model.mix(scenario.joint_shape(), &mats);
    let measure = SignedMeasure::new(scenario.clone(), atoms, tol)?;
    DeterministicLqHVModel::new(measure, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::measure::DEFAULT_ATOM_BUDGET;
    use crate::scalar::{rat, Rational};

    fn cond(rows: Vec<Vec<Rational>>) -> Tensor<Rational> {
        let k = rows[0].len();
        Tensor::from_vec(vec![rows.len(), k], rows.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn single_point_is_product_of_conditionals() {
        let s = Scenario::new(vec![2, 1], vec![2, 2]).unwrap();
        let q = [
            vec![rat(1, 3), rat(2, 3)],
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 5), rat(4, 5)],
        ];
        let mut c = BTreeMap::new();
        c.insert((0, 0), cond(vec![q[0].clone()]));
        c.insert((0, 1), cond(vec![q[1].clone()]));
        c.insert((1, 0), cond(vec![q[2].clone()]));
        let m = StochasticLqHVModel::new(vec![rat(1, 1)], c, 0.0).unwrap();
        let det = determinize(&m, &s, DEFAULT_ATOM_BUDGET, 0.0).unwrap();
        let atoms = det.measure().atoms();
        for idx in atoms.indices() {
            let expect = q[0][idx[0]].clone() * q[1][idx[1]].clone() * q[2][idx[2]].clone();
            assert_eq!(atoms.get(&idx), &expect);
        }
    }

    #[test]
    fn indicator_conditionals_give_point_mass_mixture() {
        let s = Scenario::new(vec![1, 1], vec![2, 2]).unwrap();
        let mut c = BTreeMap::new();
        c.insert(
            (0, 0),
            cond(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]),
        );
        c.insert(
            (1, 0),
            cond(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]]),
        );
        let m = StochasticLqHVModel::new(vec![rat(1, 2), rat(1, 2)], c, 0.0).unwrap();
        let det = determinize(&m, &s, DEFAULT_ATOM_BUDGET, 0.0).unwrap();
        assert_eq!(
            det.measure().atoms().data(),
            &[rat(0, 1), rat(1, 2), rat(1, 2), rat(0, 1)]
        );
    }

    #[test]
    fn signed_weights_combine_atomwise() {
        // ν = (2, −1) over two product conditionals
        let s = Scenario::new(vec![1, 1], vec![2, 2]).unwrap();
        let mut c = BTreeMap::new();
        c.insert(
            (0, 0),
            cond(vec![vec![rat(1, 2), rat(1, 2)], vec![rat(3, 4), rat(1, 4)]]),
        );
        c.insert(
            (1, 0),
            cond(vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]]),
        );
        let m = StochasticLqHVModel::new(vec![rat(2, 1), rat(-1, 1)], c, 0.0).unwrap();
        let det = determinize(&m, &s, DEFAULT_ATOM_BUDGET, 0.0).unwrap();
        // T1 = (1/4,1/4,1/4,1/4), T2 = (3/8,3/8,1/8,1/8); 2·T1 − T2
        assert_eq!(
            det.measure().atoms().data(),
            &[rat(1, 8), rat(1, 8), rat(3, 8), rat(3, 8)]
        );
    }

    #[test]
    fn missing_conditional_is_an_input_error() {
        let s = Scenario::new(vec![2], vec![2]).unwrap();
        let mut c = BTreeMap::new();
        c.insert((0, 0), cond(vec![vec![rat(1, 2), rat(1, 2)]]));
        let m = StochasticLqHVModel::new(vec![rat(1, 1)], c, 0.0).unwrap();
        let err = determinize(&m, &s, DEFAULT_ATOM_BUDGET, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_improper_conditionals() {
        let mut c = BTreeMap::new();
        c.insert((0, 0), cond(vec![vec![rat(1, 2), rat(1, 3)]]));
        assert!(StochasticLqHVModel::new(vec![rat(1, 1)], c, 0.0).is_err());
        assert!(StochasticLqHVModel::<Rational>::new(vec![rat(1, 2)], BTreeMap::new(), 0.0).is_err());
    }
}
