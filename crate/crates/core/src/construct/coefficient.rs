//! Inclusion–exclusion coefficients of the N-party construction.
//!
//! The measure is `Σ_T c_T·Q_T` over site subsets `T`, with
//! `c_T = (−1)^{N−|T|}·∏_{n∉T}(S_n−1)`. Marginal reproduction is equivalent
//! to the Möbius identity checked by [`CoefficientTable::mobius_sum`].

use crate::scenario::{Scenario, SiteSet};

/// `c_T` for one site subset.
pub fn coefficient(scenario: &Scenario, subset: SiteSet) -> i128 {
    let n = scenario.n_parties();
    let mut c: i128 = if (n - subset.len()).is_multiple_of(2) { 1 } else { -1 };
    for site in 0..n {
        if !subset.contains(site) {
            let f = scenario.settings()[site] as i128 - 1;
            c = c.checked_mul(f).expect("coefficient overflows i128");
        }
    }
    c
}

/// Coefficient of the all-single-marginals product once the `|T| ≤ 1` terms
/// are folded into the empty-set term (each such `Q_T` equals
/// `|settings on T|·Q_∅`). For two parties this is `−(S₁S₂−1)`, for three
/// `2S₁S₂S₃−S₁S₂−S₂S₃−S₁S₃+1`.
pub fn collapsed_empty_coefficient(scenario: &Scenario) -> i128 {
    let n = scenario.n_parties();
    let mut total = coefficient(scenario, SiteSet::EMPTY);
    if n == 1 {
        // the single site is the full set and is not folded
        return total;
    }
    for site in 0..n {
        let t = SiteSet::from_sites(&[site]);
        total += coefficient(scenario, t) * scenario.settings()[site] as i128;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    settings: Vec<usize>,
    /// Indexed by subset mask.
    coeffs: Vec<i128>,
}

impl CoefficientTable {
    pub fn new(scenario: &Scenario) -> Self {
        let coeffs = SiteSet::all(scenario.n_parties())
            .map(|t| coefficient(scenario, t))
            .collect();
        CoefficientTable {
            settings: scenario.settings().to_vec(),
            coeffs,
        }
    }

    pub fn get(&self, subset: SiteSet) -> i128 {
        self.coeffs[subset.mask() as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SiteSet, i128)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| (SiteSet::from_mask(m as u32), c))
    }

    /// `Σ_{T⊇U} c_T·∏_{n∈T∖U}(S_n−1)`: the weight with which the
    /// `U`-marginal term appears when the measure is marginalized onto one
    /// setting tuple.
    pub fn mobius_sum(&self, lower: SiteSet) -> i128 {
        let n = self.settings.len();
        SiteSet::all(n)
            .filter(|t| lower.is_subset_of(*t))
            .map(|t| {
                let mult: i128 = t
                    .iter()
                    .filter(|&site| !lower.contains(site))
                    .map(|site| self.settings[site] as i128 - 1)
                    .product();
                self.get(t) * mult
            })
            .sum()
    }

    /// `c_full = 1`, the Möbius sum is 0 on every proper subset and 1 on
    /// the full set.
    pub fn identity_holds(&self) -> bool {
        let n = self.settings.len();
        let full = SiteSet::full(n);
        self.get(full) == 1 && SiteSet::all(n).all(|u| self.mobius_sum(u) == if u == full { 1 } else { 0 })
    }
}
