//! Finite correlation scenarios and their families of joint tables.
//!
//! Settings and outcomes are 0-based inside the crate. The JSON formats and
//! the CLI use 1-based setting labels; conversion happens at that boundary.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{checked_size, MultiIndex, Tensor};

/// Site subsets are bitmasks, which caps the party count.
pub const MAX_PARTIES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

/// One axis of the joint space `Λ₁^{S₁}×⋯×Λ_N^{S_N}`: the outcome of
/// measurement `setting` at `site`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub site: usize,
    pub setting: usize,
    pub outcomes: usize,
}

impl Scenario {
    pub fn new(settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        if settings.len() != outcomes.len() {
            return Err(Error::InvalidScenario(format!(
                "{} setting counts but {} outcome counts",
                settings.len(),
                outcomes.len()
            )));
        }
        if settings.len() > MAX_PARTIES {
            return Err(Error::InvalidScenario(format!(
                "{} parties exceeds the supported maximum of {MAX_PARTIES}",
                settings.len()
            )));
        }
        if let Some(n) = settings.iter().position(|&s| s == 0) {
            return Err(Error::InvalidScenario(format!("site {} has no settings", n + 1)));
        }
        if let Some(n) = outcomes.iter().position(|&k| k == 0) {
            return Err(Error::InvalidScenario(format!("site {} has no outcomes", n + 1)));
        }
        let scenario = Scenario { settings, outcomes };
        if checked_size(&scenario.settings).is_none() || checked_size(&scenario.outcomes).is_none() {
            return Err(Error::InvalidScenario("setting or outcome space overflows".into()));
        }
        if scenario.joint_space_size().is_none() {
            return Err(Error::InvalidScenario("joint space size overflows".into()));
        }
        Ok(scenario)
    }

    /// Every site with the same setting and outcome counts.
    pub fn uniform(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        Scenario::new(vec![settings; parties], vec![outcomes; parties])
    }

    pub fn n_parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn n_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn tuples(&self) -> impl Iterator<Item = SettingTuple> {
        MultiIndex::new(&self.settings).map(SettingTuple)
    }

    pub fn tuple_index(&self, tuple: &SettingTuple) -> Result<usize> {
        self.check_tuple(tuple)?;
        Ok(crate::tensor::offset_in(&self.settings, &tuple.0))
    }

    pub fn check_tuple(&self, tuple: &SettingTuple) -> Result<()> {
        if tuple.0.len() != self.n_parties() {
            return Err(Error::input(format!(
                "setting tuple {tuple} has {} entries, scenario has {} parties",
                tuple.0.len(),
                self.n_parties()
            )));
        }
        for (n, (&s, &count)) in tuple.0.iter().zip(&self.settings).enumerate() {
            if s >= count {
                return Err(Error::input(format!(
                    "setting tuple {tuple}: site {} has only {count} settings",
                    n + 1
                )));
            }
        }
        Ok(())
    }

    /// Size of `Λ₁^{S₁}×⋯×Λ_N^{S_N}`, or `None` on overflow.
    pub fn joint_space_size(&self) -> Option<u128> {
        self.settings
            .iter()
            .zip(&self.outcomes)
            .try_fold(1u128, |acc, (&s, &k)| {
                let per_site = (k as u128).checked_pow(u32::try_from(s).ok()?)?;
                acc.checked_mul(per_site)
            })
    }

    /// Axes of the joint space in the fixed order (1,1),…,(1,S₁),…,(N,S_N).
    pub fn axes(&self) -> Vec<Axis> {
        let mut axes = Vec::new();
        for (site, (&s, &k)) in self.settings.iter().zip(&self.outcomes).enumerate() {
            for setting in 0..s {
                axes.push(Axis {
                    site,
                    setting,
                    outcomes: k,
                });
            }
        }
        axes
    }

    pub fn joint_shape(&self) -> Vec<usize> {
        self.axes().iter().map(|a| a.outcomes).collect()
    }

    /// Position of axis `(site, setting)` in [`Scenario::axes`].
    pub fn axis_position(&self, site: usize, setting: usize) -> usize {
        self.settings[..site].iter().sum::<usize>() + setting
    }

    /// Axis positions selected by a setting tuple, in site order.
    pub fn tuple_axes(&self, tuple: &SettingTuple) -> Vec<usize> {
        tuple
            .0
            .iter()
            .enumerate()
            .map(|(site, &s)| self.axis_position(site, s))
            .collect()
    }

    pub fn full_set(&self) -> SiteSet {
        SiteSet::full(self.n_parties())
    }
}

/// One measurement setting per site, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingTuple(pub Vec<usize>);

impl SettingTuple {
    pub fn new(settings: Vec<usize>) -> Self {
        SettingTuple(settings)
    }

    /// From 1-based labels as they appear in files.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&s| {
                s.checked_sub(1)
                    .ok_or_else(|| Error::input("setting labels are 1-based"))
            })
            .collect::<Result<Vec<_>>>()
            .map(SettingTuple)
    }

    /// Parses `"1,2,1"` (1-based).
    pub fn parse_key(key: &str) -> Result<Self> {
        let labels = key
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad setting tuple key `{key}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        SettingTuple::from_one_based(&labels)
    }

    /// `"1,2,1"` (1-based).
    pub fn key(&self) -> String {
        self.0.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn settings(&self) -> &[usize] {
        &self.0
    }

    /// Settings at the sites of `sites`, in increasing site order.
    pub fn restrict(&self, sites: SiteSet) -> Vec<usize> {
        sites.iter().map(|n| self.0[n]).collect()
    }
}

/// Serialized as its 1-based key.
impl serde::Serialize for SettingTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl fmt::Display for SettingTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

/// A subset of sites, as a bitmask over 0-based site indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SiteSet(u32);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn from_mask(mask: u32) -> Self {
        SiteSet(mask)
    }

    pub fn full(n: usize) -> Self {
        SiteSet(((1u64 << n) - 1) as u32)
    }

    pub fn from_sites(sites: &[usize]) -> Self {
        SiteSet(sites.iter().fold(0, |m, &s| m | (1 << s)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 & (1 << site) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: SiteSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn sites(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `{0,…,n−1}`, by increasing mask.
    pub fn all(n: usize) -> impl Iterator<Item = SiteSet> {
        (0..(1u64 << n)).map(|m| SiteSet(m as u32))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.iter().map(|s| (s + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// One joint probability table per setting tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFamily<T> {
    scenario: Scenario,
    tables: Vec<Tensor<T>>,
}

impl<T: Scalar> DistributionFamily<T> {
    /// `tables` are indexed in row-major order over setting tuples. Entries
    /// must be nonnegative and every table must sum to one (within `tol` in
    /// floating mode, exactly in rational mode).
    pub fn new(scenario: Scenario, tables: Vec<Tensor<T>>, tol: f64) -> Result<Self> {
        if tables.len() != scenario.n_tuples() {
            return Err(Error::input(format!(
                "expected {} tables, got {}",
                scenario.n_tuples(),
                tables.len()
            )));
        }
        for (tuple, table) in scenario.tuples().zip(&tables) {
            validate_table(&scenario, &tuple, table, tol)?;
        }
        Ok(DistributionFamily { scenario, tables })
    }

    /// Builds a family by evaluating `f` at every setting tuple.
    pub fn from_fn(scenario: Scenario, tol: f64, mut f: impl FnMut(&SettingTuple) -> Tensor<T>) -> Result<Self> {
        let tables = scenario.tuples().map(|t| f(&t)).collect();
        DistributionFamily::new(scenario, tables, tol)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self, tuple: &SettingTuple) -> Result<&Tensor<T>> {
        let idx = self.scenario.tuple_index(tuple)?;
        Ok(&self.tables[idx])
    }

    pub fn tables(&self) -> &[Tensor<T>] {
        &self.tables
    }

    pub fn iter(&self) -> impl Iterator<Item = (SettingTuple, &Tensor<T>)> {
        self.scenario.tuples().zip(&self.tables)
    }

    pub fn map_tables<U: Scalar>(&self, tol: f64, mut f: impl FnMut(&T) -> Result<U>) -> Result<DistributionFamily<U>> {
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let data = t.data().iter().map(&mut f).collect::<Result<Vec<U>>>()?;
                Tensor::from_vec(t.shape().to_vec(), data)
            })
            .collect::<Result<Vec<_>>>()?;
        DistributionFamily::new(self.scenario.clone(), tables, tol)
    }

    /// Same family in another arithmetic mode.
    pub fn convert<U: Scalar>(&self, tol: f64) -> Result<DistributionFamily<U>> {
        self.map_tables(tol, crate::scalar::convert)
    }
}

fn validate_table<T: Scalar>(scenario: &Scenario, tuple: &SettingTuple, table: &Tensor<T>, tol: f64) -> Result<()> {
    if table.shape() != scenario.outcomes() {
        return Err(Error::input(format!(
            "table {tuple} has shape {:?}, expected {:?}",
            table.shape(),
            scenario.outcomes()
        )));
    }
    for v in table.data() {
        if !v.is_finite_value() {
            return Err(Error::input(format!("table {tuple} has a non-finite entry")));
        }
        if !v.nonneg_within(tol) {
            return Err(Error::NegativeProbability {
                what: format!("table {tuple}"),
                value: v.to_string(),
            });
        }
    }
    let sum = table.sum();
    if !sum.approx_eq(&T::one(), tol) {
        return Err(Error::NotNormalized {
            what: format!("table {tuple}"),
            sum: sum.to_string(),
        });
    }
    Ok(())
}
