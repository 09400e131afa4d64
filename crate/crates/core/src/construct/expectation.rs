use super::measure::DeterministicLqHVModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DistributionFamily, Scenario, SettingTuple};

fn check_observables<T>(scenario: &Scenario, observables: &[Vec<T>]) -> Result<()> {
    if observables.len() != scenario.n_parties() {
        return Err(Error::input(format!(
            "{} observables for {} sites",
            observables.len(),
            scenario.n_parties()
        )));
    }
    for (n, (phi, &k)) in observables.iter().zip(scenario.outcomes()).enumerate() {
        if phi.len() != k {
            return Err(Error::input(format!(
                "observable at site {} has {} values, site has {k} outcomes",
                n + 1,
                phi.len()
            )));
        }
    }
    Ok(())
}

/// `Σ_λ ∏_n φ_n(λ_n)·P_s(λ)`.
pub fn product_expectation_family<T: Scalar>(
    family: &DistributionFamily<T>,
    tuple: &SettingTuple,
    observables: &[Vec<T>],
) -> Result<T> {
    check_observables(family.scenario(), observables)?;
    let table = family.table(tuple)?;
    let mut total = T::zero();
    for (idx, p) in table.indices().zip(table.data()) {
        let mut v = p.clone();
        for (phi, &o) in observables.iter().zip(&idx) {
            v *= &phi[o];
        }
        total += &v;
    }
    Ok(total)
}

/// `Σ_ω̃ ∏_n φ_n(f_{n,s_n}(ω̃))·μ(ω̃)`, evaluated over the whole joint space.
pub fn product_expectation_model<T: Scalar>(
    model: &DeterministicLqHVModel<T>,
    tuple: &SettingTuple,
    observables: &[Vec<T>],
) -> Result<T> {
    let scenario = model.scenario();
    check_observables(scenario, observables)?;
    scenario.check_tuple(tuple)?;
    let vars = tuple
        .settings()
        .iter()
        .enumerate()
        .map(|(site, &s)| model.variable(site, s))
        .collect::<Result<Vec<_>>>()?;
    let atoms = model.measure().atoms();
    let mut total = T::zero();
    for (point, mu) in atoms.indices().zip(atoms.data()) {
        if mu.is_zero() {
            continue;
        }
        let mut v = mu.clone();
        for (phi, var) in observables.iter().zip(&vars) {
            v *= &phi[var.eval(&point)];
        }
        total += &v;
    }
    Ok(total)
}

/// `E(1,1) + E(1,2) + E(2,1) − E(2,2)` with the ±1 encoding `0 ↦ +1`,
/// `1 ↦ −1`, for two-party two-setting binary families.
pub fn chsh_value<T: Scalar>(family: &DistributionFamily<T>) -> Result<T> {
    let s = family.scenario();
    if s.settings() != [2, 2] || s.outcomes() != [2, 2] {
        return Err(Error::input("CHSH needs two binary sites with two settings each"));
    }
    let pm = vec![vec![T::one(), -T::one()]; 2];
    let e = |x: usize, y: usize| product_expectation_family(family, &SettingTuple::new(vec![x, y]), &pm);
    Ok(e(0, 0)? + e(0, 1)? + e(1, 0)? - e(1, 1)?)
}
