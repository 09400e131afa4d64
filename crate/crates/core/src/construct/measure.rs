use rayon::prelude::*;
use serde::Serialize;

use super::coefficient::CoefficientTable;
use crate::consistency::{extract_marginal_family, MarginalFamily};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::scenario::{Axis, DistributionFamily, Scenario, SettingTuple, SiteSet};
use crate::tensor::{offset_in, Tensor};

/// Default cap on the number of joint-space atoms.
pub const DEFAULT_ATOM_BUDGET: usize = 10_000_000;

/// A normalized finite signed measure on `Λ₁^{S₁}×⋯×Λ_N^{S_N}`, one axis per
/// `(site, setting)` in the order of [`Scenario::axes`].
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure<T> {
    scenario: Scenario,
    atoms: Tensor<T>,
}

impl<T: Scalar> SignedMeasure<T> {
    pub fn new(scenario: Scenario, atoms: Tensor<T>, tol: f64) -> Result<Self> {
        if atoms.shape() != scenario.joint_shape() {
            return Err(Error::input(format!(
                "atom tensor has shape {:?}, joint space is {:?}",
                atoms.shape(),
                scenario.joint_shape()
            )));
        }
        if atoms.data().iter().any(|a| !a.is_finite_value()) {
            return Err(Error::input("measure has a non-finite atom"));
        }
        let total = atoms.sum();
        if !total.approx_eq(&T::one(), tol) {
            return Err(Error::NotNormalized {
                what: "signed measure".into(),
                sum: total.to_string(),
            });
        }
        Ok(SignedMeasure { scenario, atoms })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn atoms(&self) -> &Tensor<T> {
        &self.atoms
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.scenario.axes()
    }

    pub fn total(&self) -> T {
        self.atoms.sum()
    }

    pub fn min_atom(&self) -> T {
        self.atoms.min().cloned().unwrap_or_else(T::zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.data().iter().all(|a| !a.is_negative())
    }

    /// Marginal onto the coordinates `{(n, s_n)}` selected by `tuple`. This
    /// is the measure of every intersection of coordinate preimages.
    pub fn tuple_marginal(&self, tuple: &SettingTuple) -> Result<Tensor<T>> {
        self.scenario.check_tuple(tuple)?;
        Ok(self.atoms.marginalize(&self.scenario.tuple_axes(tuple)))
    }

    pub fn jordan(&self) -> super::jordan::JordanPair<T> {
        super::jordan::jordan_decompose(self)
    }
}

/// The coordinate projection `ω̃ ↦ λ_n^{(s_n)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordinateVariable {
    pub site: usize,
    pub setting: usize,
    pub axis: usize,
}

impl CoordinateVariable {
    pub fn eval(&self, point: &[usize]) -> usize {
        point[self.axis]
    }
}

/// A signed measure on the joint space together with the coordinate
/// variables `f_{n,s}`. Construction checks that every setting tuple's
/// marginal is a nonnegative table, so all rectangle events carry
/// nonnegative measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicLqHVModel<T> {
    measure: SignedMeasure<T>,
}

impl<T: Scalar> DeterministicLqHVModel<T> {
    pub fn new(measure: SignedMeasure<T>, tol: f64) -> Result<Self> {
        for tuple in measure.scenario().tuples() {
            let m = measure.tuple_marginal(&tuple)?;
            if let Some(v) = m.data().iter().find(|v| !v.nonneg_within(tol)) {
                return Err(Error::NegativeProbability {
                    what: format!("marginal of the measure at tuple {tuple}"),
                    value: v.to_string(),
                });
            }
        }
        Ok(DeterministicLqHVModel { measure })
    }

    pub fn measure(&self) -> &SignedMeasure<T> {
        &self.measure
    }

    pub fn into_measure(self) -> SignedMeasure<T> {
        self.measure
    }

    pub fn scenario(&self) -> &Scenario {
        self.measure.scenario()
    }

    pub fn variable(&self, site: usize, setting: usize) -> Result<CoordinateVariable> {
        let s = self.scenario();
        if site >= s.n_parties() || setting >= s.settings()[site] {
            return Err(Error::input(format!(
                "no variable for site {} setting {}",
                site + 1,
                setting + 1
            )));
        }
        Ok(CoordinateVariable {
            site,
            setting,
            axis: s.axis_position(site, setting),
        })
    }

    pub fn joint_table(&self, tuple: &SettingTuple) -> Result<Tensor<T>> {
        self.measure.tuple_marginal(tuple)
    }

    /// The family of joint tables this model represents.
    pub fn to_family(&self, tol: f64) -> Result<DistributionFamily<T>> {
        let tables = self
            .scenario()
            .tuples()
            .map(|t| self.joint_table(&t))
            .collect::<Result<Vec<_>>>()?;
        DistributionFamily::new(self.scenario().clone(), tables, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub budget: usize,
    pub tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            budget: DEFAULT_ATOM_BUDGET,
            tol: DEFAULT_TOL,
        }
    }
}

/// Joint-space size, refused above `budget`.
pub fn check_budget(scenario: &Scenario, budget: usize) -> Result<usize> {
    let atoms = scenario.joint_space_size().unwrap_or(u128::MAX);
    if atoms > budget as u128 {
        return Err(Error::BudgetExceeded { atoms, budget });
    }
    Ok(atoms as usize)
}

/// Builds `μ = Σ_T c_T·Q_T`. For each subset `T` and settings `t` on it,
/// `Q_T` places the common marginal `P_T^t` on the coordinates `(n, t_n)`,
/// `n ∈ T`, and the single-site marginal `P_{n,s}` on every other coordinate.
/// The result is normalized and reproduces every joint table as the marginal
/// onto the coordinates of its setting tuple.
pub fn build_deterministic_measure<T: Scalar>(
    family: &DistributionFamily<T>,
    marginals: &MarginalFamily<T>,
    opts: BuildOptions,
) -> Result<DeterministicLqHVModel<T>> {
    let scenario = family.scenario();
    if marginals.scenario() != scenario || marginals.subset_tables(scenario.full_set()) != family.tables() {
        return Err(Error::UnverifiedMarginals);
    }
    let n_atoms = check_budget(scenario, opts.budget)?;
    let terms = Terms::new(scenario, marginals);
    let shape = scenario.joint_shape();
    let atoms: Vec<T> = (0..n_atoms)
        .into_par_iter()
        .map_init(
            || vec![0usize; shape.len()],
            |point, flat| {
                unravel(&shape, flat, point);
                terms.atom(point)
            },
        )
        .collect();
    let measure = SignedMeasure::new(scenario.clone(), Tensor::from_vec(shape, atoms)?, opts.tol)?;
    DeterministicLqHVModel::new(measure, opts.tol)
}

/// Extracts the common marginals (checking the nonsignaling condition) and
/// builds the measure.
pub fn build_from_family<T: Scalar>(
    family: &DistributionFamily<T>,
    opts: BuildOptions,
) -> Result<DeterministicLqHVModel<T>> {
    check_budget(family.scenario(), opts.budget)?;
    let marginals = extract_marginal_family(family, opts.tol)?;
    build_deterministic_measure(family, &marginals, opts)
}

fn unravel(shape: &[usize], mut flat: usize, out: &mut [usize]) {
    for (o, &n) in out.iter_mut().zip(shape).rev() {
        *o = flat % n;
        flat /= n;
    }
}

struct Terms<'a, T> {
    scenario: &'a Scenario,
    marginals: &'a MarginalFamily<T>,
    /// Nonzero `(T, c_T)` pairs with the sites and setting counts of `T`.
    subsets: Vec<(SiteSet, T, Vec<usize>, Vec<usize>)>,
}

impl<'a, T: Scalar> Terms<'a, T> {
    fn new(scenario: &'a Scenario, marginals: &'a MarginalFamily<T>) -> Self {
        let table = CoefficientTable::new(scenario);
        let subsets = table
            .iter()
            .filter(|&(_, c)| c != 0)
            .map(|(t, c)| {
                let sites = t.sites();
                let counts = sites.iter().map(|&n| scenario.settings()[n]).collect();
                let c = i64::try_from(c).expect("coefficient fits in i64 at budgeted sizes");
                (t, T::from_i64(c), sites, counts)
            })
            .collect();
        Terms {
            scenario,
            marginals,
            subsets,
        }
    }

    fn atom(&self, point: &[usize]) -> T {
        let sc = self.scenario;
        let n = sc.n_parties();
        // single[n][s] = P_{n,s}(λ_{n,s})
        let mut single: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut all: Vec<T> = Vec::with_capacity(n);
        for site in 0..n {
            let row: Vec<T> = (0..sc.settings()[site])
                .map(|s| {
                    let lam = point[sc.axis_position(site, s)];
                    self.marginals.single(site, s).data()[lam].clone()
                })
                .collect();
            let mut prod = T::one();
            for v in &row {
                prod *= v;
            }
            all.push(prod);
            single.push(row);
        }
        let mut total = T::zero();
        for (subset, coeff, sites, counts) in &self.subsets {
            let mut outside = T::one();
            for site in (0..n).filter(|&m| !subset.contains(m)) {
                outside *= &all[site];
            }
            if outside.is_zero() {
                continue;
            }
            let tables = self.marginals.subset_tables(*subset);
            let mut inner = T::zero();
            let mut outcome_idx = vec![0usize; sites.len()];
            for (k, settings) in crate::tensor::MultiIndex::new(counts).enumerate() {
                let mut v = T::one();
                for (j, (&site, &t)) in sites.iter().zip(&settings).enumerate() {
                    outcome_idx[j] = point[sc.axis_position(site, t)];
                    for (s, p) in single[site].iter().enumerate() {
                        if s != t {
                            v *= p;
                        }
                    }
                }
                if v.is_zero() {
                    continue;
                }
                let table = &tables[k];
                v *= &table.data()[offset_in(table.shape(), &outcome_idx)];
                inner += &v;
            }
            total += &(coeff.clone() * inner * outside);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Largest absolute entrywise error between reproduced and given tables.
    pub max_error: f64,
    /// True when every entry matches (exactly in rational mode, within the
    /// tolerance otherwise).
    pub matches: bool,
    pub worst_tuple: Option<SettingTuple>,
    /// Smallest reproduced table entry.
    pub min_reproduced: f64,
    /// Every reproduced entry is `≥ −tol` (`≥ 0` in rational mode).
    pub nonnegative: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.matches && self.nonnegative
    }
}

/// Compares every tuple marginal of the model's measure with the family.
pub fn verify_marginals<T: Scalar>(
    model: &DeterministicLqHVModel<T>,
    family: &DistributionFamily<T>,
    tol: f64,
) -> Result<VerifyReport> {
    verify_measure(model.measure(), family, tol)
}

/// [`verify_marginals`] for a bare measure, with no nonnegativity
/// precondition on its marginals.
pub fn verify_measure<T: Scalar>(
    measure: &SignedMeasure<T>,
    family: &DistributionFamily<T>,
    tol: f64,
) -> Result<VerifyReport> {
    if measure.scenario() != family.scenario() {
        return Err(Error::input("measure and family have different scenarios"));
    }
    let mut report = VerifyReport {
        max_error: 0.0,
        matches: true,
        worst_tuple: None,
        min_reproduced: f64::INFINITY,
        nonnegative: true,
    };
    for (tuple, table) in family.iter() {
        let got = measure.tuple_marginal(&tuple)?;
        let err = got.max_gap(table).expect("same scenario");
        if !got.approx_eq(table, tol) {
            report.matches = false;
        }
        if err > report.max_error {
            report.max_error = err;
            report.worst_tuple = Some(tuple.clone());
        }
        for v in got.data() {
            report.min_reproduced = report.min_reproduced.min(v.to_f64());
            if !v.nonneg_within(tol) {
                report.nonnegative = false;
            }
        }
    }
    Ok(report)
}
