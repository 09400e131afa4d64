//! Marginalization and the nonsignaling consistency checks.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DistributionFamily, Scenario, SettingTuple, SiteSet};
use crate::tensor::{offset_in, MultiIndex, Tensor};

/// Sums the table at `tuple` over every outcome axis outside `keep`.
pub fn marginalize<T: Scalar>(
    family: &DistributionFamily<T>,
    tuple: &SettingTuple,
    keep: SiteSet,
) -> Result<Tensor<T>> {
    let n = family.scenario().n_parties();
    if keep.is_empty() {
        return Err(Error::input("marginal over an empty site set"));
    }
    if !keep.is_subset_of(SiteSet::full(n)) {
        return Err(Error::input(format!("site set {keep} is not within {n} parties")));
    }
    Ok(family.table(tuple)?.marginalize(&keep.sites()))
}

/// Evidence that two setting tuples sharing the settings on `site_subset`
/// produce different marginals there.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// 0-based sites.
    pub site_subset: Vec<usize>,
    /// `(site, setting)` pairs, 0-based.
    pub common_settings: Vec<(usize, usize)>,
    pub tuple_a: SettingTuple,
    pub tuple_b: SettingTuple,
    pub max_discrepancy: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites = SiteSet::from_sites(&self.site_subset);
        write!(
            f,
            "marginals at sites {sites} differ by {} between tuples {} and {}",
            self.max_discrepancy, self.tuple_a, self.tuple_b
        )
    }
}

impl std::error::Error for Witness {}

/// Marginal of every tuple over every nonempty proper site subset, grouped
/// by the settings on that subset.
struct SubsetMarginals<T> {
    subset: SiteSet,
    /// `groups[partial-setting index]` lists `(tuple, marginal)`.
    groups: Vec<Vec<(SettingTuple, Tensor<T>)>>,
}

fn subset_marginals<T: Scalar>(family: &DistributionFamily<T>, subset: SiteSet) -> SubsetMarginals<T> {
    let scenario = family.scenario();
    let sites = subset.sites();
    let sub_settings: Vec<usize> = sites.iter().map(|&n| scenario.settings()[n]).collect();
    let n_groups: usize = sub_settings.iter().product();
    let mut groups: Vec<Vec<(SettingTuple, Tensor<T>)>> = (0..n_groups).map(|_| Vec::new()).collect();
    for (tuple, table) in family.iter() {
        let key = offset_in(&sub_settings, &tuple.restrict(subset));
        groups[key].push((tuple.clone(), table.marginalize(&sites)));
    }
    SubsetMarginals { subset, groups }
}

/// Checks that for every nonempty proper site subset, all setting tuples
/// agreeing on that subset give the same marginal there. Every compatible
/// pair is compared; on failure the witness carries the largest discrepancy
/// found.
pub fn check_nonsignaling<T: Scalar>(family: &DistributionFamily<T>, tol: f64) -> Result<(), Witness> {
    let n = family.scenario().n_parties();
    let full = SiteSet::full(n);
    let mut worst: Option<Witness> = None;
    for subset in SiteSet::all(n).filter(|s| !s.is_empty() && *s != full) {
        let marg = subset_marginals(family, subset);
        for group in &marg.groups {
            for (i, (ta, ma)) in group.iter().enumerate() {
                for (tb, mb) in &group[i + 1..] {
                    if ma.approx_eq(mb, tol) {
                        continue;
                    }
                    let gap = ma.max_gap(mb).unwrap_or(f64::INFINITY);
                    if worst.as_ref().is_none_or(|w| gap > w.max_discrepancy) {
                        worst = Some(Witness {
                            site_subset: marg.subset.sites(),
                            common_settings: marg.subset.iter().map(|site| (site, ta.settings()[site])).collect(),
                            tuple_a: ta.clone(),
                            tuple_b: tb.clone(),
                            max_discrepancy: gap,
                        });
                    }
                }
            }
        }
    }
    match worst {
        Some(w) => Err(w),
        None => Ok(()),
    }
}

/// The common marginals of a nonsignaling family: for every site subset
/// and every assignment of settings on it, one probability tensor over the
/// outcomes of those sites. The empty subset holds the rank-0 tensor `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFamily<T> {
    scenario: Scenario,
    /// Indexed by subset mask, then by the row-major index of the settings
    /// on that subset.
    by_subset: Vec<Vec<Tensor<T>>>,
}

impl<T: Scalar> MarginalFamily<T> {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Marginal on `subset` with `settings` given for its sites in
    /// increasing site order.
    pub fn get(&self, subset: SiteSet, settings: &[usize]) -> Result<&Tensor<T>> {
        let sites = subset.sites();
        if settings.len() != sites.len() || !subset.is_subset_of(self.scenario.full_set()) {
            return Err(Error::input(format!(
                "settings {settings:?} do not match site subset {subset}"
            )));
        }
        let sub_settings: Vec<usize> = sites.iter().map(|&n| self.scenario.settings()[n]).collect();
        if settings.iter().zip(&sub_settings).any(|(s, c)| s >= c) {
            return Err(Error::input(format!("settings {settings:?} out of range")));
        }
        let idx = offset_in(&sub_settings, settings);
        Ok(&self.by_subset[subset.mask() as usize][idx])
    }

    /// Single-site marginal `P_{s}` at `site`.
    pub fn single(&self, site: usize, setting: usize) -> &Tensor<T> {
        &self.by_subset[1usize << site][setting]
    }

    pub(crate) fn subset_tables(&self, subset: SiteSet) -> &[Tensor<T>] {
        &self.by_subset[subset.mask() as usize]
    }
}

/// Extracts the common marginals after checking the nonsignaling
/// condition. Each stored marginal is the average over all compatible
/// tuples (identical values in rational mode).
pub fn extract_marginal_family<T: Scalar>(family: &DistributionFamily<T>, tol: f64) -> Result<MarginalFamily<T>> {
    check_nonsignaling(family, tol).map_err(|w| Error::Signaling(Box::new(w)))?;
    let scenario = family.scenario().clone();
    let n = scenario.n_parties();
    let full = scenario.full_set();
    let mut by_subset = Vec::with_capacity(1 << n);
    for subset in SiteSet::all(n) {
        if subset.is_empty() {
            by_subset.push(vec![Tensor::from_vec(vec![], vec![T::one()])?]);
            continue;
        }
        if subset == full {
            by_subset.push(family.tables().to_vec());
            continue;
        }
        let marg = subset_marginals(family, subset);
        let averaged = marg
            .groups
            .into_iter()
            .map(|group| average(group.into_iter().map(|(_, m)| m)))
            .collect();
        by_subset.push(averaged);
    }
    Ok(MarginalFamily { scenario, by_subset })
}

fn average<T: Scalar>(mut tensors: impl Iterator<Item = Tensor<T>>) -> Tensor<T> {
    let first = tensors.next().expect("every setting group is nonempty");
    let mut count = 1i64;
    let shape = first.shape().to_vec();
    let mut acc = first.into_data();
    for t in tensors {
        for (a, v) in acc.iter_mut().zip(t.data()) {
            *a += v;
        }
        count += 1;
    }
    if count > 1 {
        let c = T::from_i64(count);
        for a in &mut acc {
            *a = a.clone() / c.clone();
        }
    }
    Tensor::from_vec(shape, acc).expect("shape preserved")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EprReport {
    pub passed: bool,
    pub max_discrepancy: f64,
    /// Where the largest discrepancy occurred: 0-based sites and settings.
    pub worst_sites: Option<Vec<usize>>,
    pub worst_settings: Option<Vec<usize>>,
    pub comparisons: usize,
}

/// Compares the common sub-tuple marginals of two families over every
/// nonempty proper site subset, for every setting assignment on that subset
/// available in both families. Both families must have the same party count
/// and outcome counts; their setting counts may differ.
pub fn compare_scenarios_epr<T: Scalar>(
    family_a: &DistributionFamily<T>,
    family_b: &DistributionFamily<T>,
    tol: f64,
) -> Result<EprReport> {
    let sa = family_a.scenario();
    let sb = family_b.scenario();
    if sa.n_parties() != sb.n_parties() || sa.outcomes() != sb.outcomes() {
        return Err(Error::input("families differ in party count or outcome counts"));
    }
    let ma = extract_marginal_family(family_a, tol)?;
    let mb = extract_marginal_family(family_b, tol)?;
    let n = sa.n_parties();
    let full = SiteSet::full(n);
    let mut report = EprReport {
        passed: true,
        max_discrepancy: 0.0,
        worst_sites: None,
        worst_settings: None,
        comparisons: 0,
    };
    for subset in SiteSet::all(n).filter(|s| !s.is_empty() && *s != full) {
        let common: Vec<usize> = subset
            .iter()
            .map(|site| sa.settings()[site].min(sb.settings()[site]))
            .collect();
        for settings in MultiIndex::new(&common) {
            let a = ma.get(subset, &settings)?;
            let b = mb.get(subset, &settings)?;
            report.comparisons += 1;
            if a.approx_eq(b, tol) {
                continue;
            }
            report.passed = false;
            let gap = a.max_gap(b).unwrap_or(f64::INFINITY);
            if gap > report.max_discrepancy || report.worst_sites.is_none() {
                report.max_discrepancy = gap;
                report.worst_sites = Some(subset.sites());
                report.worst_settings = Some(settings);
            }
        }
    }
    Ok(report)
}
