//! Canonical analytic families: PR boxes, isotropic boxes, local
//! deterministic vertices, a signaling counterexample, and seeded random
//! mixtures of nonsignaling vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DistributionFamily, Scenario, SettingTuple};
use crate::tensor::{MultiIndex, Tensor};

/// Bipartite scenario with two binary measurements per site.
pub fn chsh_scenario() -> Scenario {
    Scenario::uniform(2, 2, 2).expect("valid")
}

/// `P(a,b|x,y) = 1/2` when `a ⊕ b = x·y` (settings mapped to `x = s−1`).
pub fn pr_box<T: Scalar>() -> DistributionFamily<T> {
    pr_vertex(0)
}

/// The eight relabelled PR boxes: `a ⊕ b = x·y ⊕ αx ⊕ βy ⊕ γ` where
/// `variant = 4α + 2β + γ`.
pub fn pr_vertex<T: Scalar>(variant: u8) -> DistributionFamily<T> {
    let vertex = Vertex::Pr {
        pair: (0, 1),
        variant,
        others: vec![vec![]; 2],
    };
    vertex.family(&chsh_scenario()).expect("valid PR vertex")
}

/// `p·PR + (1−p)·white noise`.
pub fn isotropic_box<T: Scalar>(p: T) -> Result<DistributionFamily<T>> {
    if p < T::zero() || p > T::one() {
        return Err(Error::input(format!("isotropic weight {p} is outside [0, 1]")));
    }
    let noise = uniform_family(chsh_scenario())?;
    let q = T::one() - p.clone();
    mixture(&[pr_box(), noise], &[p, q])
}

/// Uniform table at every tuple.
pub fn uniform_family<T: Scalar>(scenario: Scenario) -> Result<DistributionFamily<T>> {
    let size: usize = scenario.outcomes().iter().product();
    let w = T::one() / T::from_i64(size as i64);
    let shape = scenario.outcomes().to_vec();
    DistributionFamily::from_fn(scenario, 0.0, |_| Tensor::from_fn(shape.clone(), |_| w.clone()))
}

/// Product family `⊗_n p_{n,s_n}` from per-site, per-setting distributions
/// `dists[site][setting]`.
pub fn product_family<T: Scalar>(scenario: Scenario, dists: &[Vec<Vec<T>>], tol: f64) -> Result<DistributionFamily<T>> {
    if dists.len() != scenario.n_parties() {
        return Err(Error::input("one list of distributions per site is required"));
    }
    for (n, site) in dists.iter().enumerate() {
        if site.len() != scenario.settings()[n] || site.iter().any(|d| d.len() != scenario.outcomes()[n]) {
            return Err(Error::input(format!(
                "site {} distributions have the wrong shape",
                n + 1
            )));
        }
    }
    let shape = scenario.outcomes().to_vec();
    DistributionFamily::from_fn(scenario, tol, |tuple| {
        Tensor::from_fn(shape.clone(), |out| {
            let mut v = T::one();
            for (n, &o) in out.iter().enumerate() {
                v *= &dists[n][tuple.settings()[n]][o];
            }
            v
        })
    })
}

/// Point-mass family where site `n` under setting `s` always answers
/// `assignment[n][s]`.
pub fn local_deterministic_vertex<T: Scalar>(
    scenario: &Scenario,
    assignment: &[Vec<usize>],
) -> Result<DistributionFamily<T>> {
    Vertex::Local(assignment.to_vec()).family(scenario)
}

/// All local deterministic assignments of a scenario, in row-major order.
pub fn local_assignments(scenario: &Scenario) -> impl Iterator<Item = Vec<Vec<usize>>> + '_ {
    let shape = scenario.joint_shape();
    MultiIndex::new(&shape).map(move |flat| split_assignment(scenario, &flat))
}

/// Splits a joint-space point into per-site, per-setting outcomes.
pub fn split_assignment(scenario: &Scenario, flat: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(scenario.n_parties());
    let mut pos = 0;
    for &s in scenario.settings() {
        out.push(flat[pos..pos + s].to_vec());
        pos += s;
    }
    out
}

/// Two sites, site 1 with two settings and site 2 with one; site 2 answers
/// 0 under `s₁ = 1` and 1 under `s₁ = 2`.
pub fn signaling_example<T: Scalar>() -> DistributionFamily<T> {
    let scenario = Scenario::new(vec![2, 1], vec![2, 2]).expect("valid");
    let half = T::ratio(1, 2);
    let z = T::zero();
    let tables = vec![
        Tensor::from_vec(vec![2, 2], vec![half.clone(), z.clone(), half.clone(), z.clone()]),
        Tensor::from_vec(vec![2, 2], vec![z.clone(), half.clone(), z, half]),
    ]
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .expect("valid shapes");
    DistributionFamily::new(scenario, tables, 0.0).expect("valid tables")
}

/// Convex combination `Σ w_i F_i / Σ w_i` of families over one scenario.
pub fn mixture<T: Scalar>(families: &[DistributionFamily<T>], weights: &[T]) -> Result<DistributionFamily<T>> {
    if families.is_empty() || families.len() != weights.len() {
        return Err(Error::input("one weight per family is required"));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::input("mixture weights must be nonnegative"));
    }
    let total: T = weights.iter().cloned().sum();
    if total.is_zero() {
        return Err(Error::input("mixture weights are all zero"));
    }
    let scenario = families[0].scenario().clone();
    if families.iter().any(|f| f.scenario() != &scenario) {
        return Err(Error::input("mixture components have different scenarios"));
    }
    let tables = (0..scenario.n_tuples())
        .map(|i| {
            let shape = families[0].tables()[i].shape().to_vec();
            let mut acc = vec![T::zero(); families[0].tables()[i].len()];
            for (f, w) in families.iter().zip(weights) {
                let w = w.clone() / total.clone();
                for (a, v) in acc.iter_mut().zip(f.tables()[i].data()) {
                    *a += &(v.clone() * w.clone());
                }
            }
            Tensor::from_vec(shape, acc)
        })
        .collect::<Result<Vec<_>>>()?;
    DistributionFamily::new(scenario, tables, 1e-12)
}

/// Extreme points of the nonsignaling sets that the random generator mixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vertex {
    /// `assignment[site][setting]` is the deterministic answer.
    Local(Vec<Vec<usize>>),
    /// Relabelled PR box on `pair` (both sites binary with two settings),
    /// deterministic answers `others[site][setting]` elsewhere.
    Pr {
        pair: (usize, usize),
        variant: u8,
        others: Vec<Vec<usize>>,
    },
}

impl Vertex {
    pub fn family<T: Scalar>(&self, scenario: &Scenario) -> Result<DistributionFamily<T>> {
        let n = scenario.n_parties();
        let check_answers = |answers: &[Vec<usize>], skip: Option<(usize, usize)>| -> Result<()> {
            if answers.len() != n {
                return Err(Error::input("one answer list per site is required"));
            }
            for (site, a) in answers.iter().enumerate() {
                if skip.is_some_and(|(i, j)| site == i || site == j) {
                    continue;
                }
                if a.len() != scenario.settings()[site] || a.iter().any(|&o| o >= scenario.outcomes()[site]) {
                    return Err(Error::input(format!("answers for site {} are out of range", site + 1)));
                }
            }
            Ok(())
        };
        let shape = scenario.outcomes().to_vec();
        match self {
            Vertex::Local(a) => {
                check_answers(a, None)?;
                DistributionFamily::from_fn(scenario.clone(), 0.0, |tuple| {
                    Tensor::from_fn(shape.clone(), |out| {
                        if out
                            .iter()
                            .enumerate()
                            .all(|(site, &o)| a[site][tuple.settings()[site]] == o)
                        {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                })
            }
            Vertex::Pr {
                pair: (i, j),
                variant,
                others,
            } => {
                let (i, j) = (*i, *j);
                if i == j || i >= n || j >= n {
                    return Err(Error::input("PR pair must name two distinct sites"));
                }
                for site in [i, j] {
                    if scenario.settings()[site] != 2 || scenario.outcomes()[site] != 2 {
                        return Err(Error::input(format!(
                            "PR vertex needs two binary settings at site {}",
                            site + 1
                        )));
                    }
                }
                if *variant >= 8 {
                    return Err(Error::input("PR variant must be below 8"));
                }
                check_answers(others, Some((i, j)))?;
                let (alpha, beta, gamma) = ((variant >> 2) & 1, (variant >> 1) & 1, variant & 1);
                let half = T::ratio(1, 2);
                DistributionFamily::from_fn(scenario.clone(), 0.0, |tuple: &SettingTuple| {
                    let s = tuple.settings();
                    let (x, y) = (s[i] as u8, s[j] as u8);
                    let target = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
                    Tensor::from_fn(shape.clone(), |out| {
                        let rest_ok = out
                            .iter()
                            .enumerate()
                            .filter(|&(site, _)| site != i && site != j)
                            .all(|(site, &o)| others[site][s[site]] == o);
                        if rest_ok && ((out[i] ^ out[j]) as u8) == target {
                            half.clone()
                        } else {
                            T::zero()
                        }
                    })
                })
            }
        }
    }
}

/// The 16 local deterministic and 8 PR vertices of the two-party,
/// two-setting, binary scenario.
pub fn chsh_vertices() -> Vec<Vertex> {
    let scenario = chsh_scenario();
    let mut out: Vec<Vertex> = local_assignments(&scenario).map(Vertex::Local).collect();
    out.extend((0..8).map(|variant| Vertex::Pr {
        pair: (0, 1),
        variant,
        others: vec![vec![]; 2],
    }));
    out
}

fn random_vertex(scenario: &Scenario, rng: &mut impl Rng) -> Vertex {
    let n = scenario.n_parties();
    let answers: Vec<Vec<usize>> = (0..n)
        .map(|site| {
            (0..scenario.settings()[site])
                .map(|_| rng.gen_range(0..scenario.outcomes()[site]))
                .collect()
        })
        .collect();
    let pr_sites: Vec<usize> = (0..n)
        .filter(|&site| scenario.settings()[site] == 2 && scenario.outcomes()[site] == 2)
        .collect();
    if pr_sites.len() >= 2 && rng.gen_bool(0.5) {
        let a = pr_sites[rng.gen_range(0..pr_sites.len())];
        let mut b = a;
        while b == a {
            b = pr_sites[rng.gen_range(0..pr_sites.len())];
        }
        Vertex::Pr {
            pair: (a.min(b), a.max(b)),
            variant: rng.gen_range(0..8),
            others: answers,
        }
    } else {
        Vertex::Local(answers)
    }
}

/// Seeded convex mixture: one vertex is drawn per weight (local
/// deterministic, or a PR box on a random pair of binary two-setting sites
/// when the scenario has one) and the vertices are mixed with the
/// normalized weights.
pub fn random_nonsignaling_family<T: Scalar>(
    scenario: &Scenario,
    seed: u64,
    weights: &[T],
) -> Result<DistributionFamily<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices: Vec<Vertex> = weights.iter().map(|_| random_vertex(scenario, &mut rng)).collect();
    random_mixture_of(scenario, &vertices, weights)
}

/// Like [`random_nonsignaling_family`] but also draws the weights, as
/// small positive integers.
pub fn random_nonsignaling_family_auto<T: Scalar>(
    scenario: &Scenario,
    seed: u64,
    components: usize,
) -> Result<DistributionFamily<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f3e_19e5);
    let weights: Vec<T> = (0..components.max(1))
        .map(|_| T::from_i64(rng.gen_range(1..=9)))
        .collect();
    random_nonsignaling_family(scenario, seed, &weights)
}

fn random_mixture_of<T: Scalar>(
    scenario: &Scenario,
    vertices: &[Vertex],
    weights: &[T],
) -> Result<DistributionFamily<T>> {
    let families = vertices
        .iter()
        .map(|v| v.family(scenario))
        .collect::<Result<Vec<_>>>()?;
    mixture(&families, weights)
}
