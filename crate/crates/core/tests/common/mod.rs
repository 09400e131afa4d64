//! Independent oracles shared by the integration tests.
//!
//! The literal two- and three-party measures below are written out term by
//! term, with marginals obtained by direct summation of a joint table
//! rather than through the library's marginal extraction.

#![allow(dead_code)]

use lqhv::scalar::rat;
use lqhv::{DistributionFamily, Rational, SettingTuple, Tensor};

type P = Vec<Vec<Rational>>;

/// `P_s(a)` at `site`, read off the tuple with setting 0 at every other site.
pub fn single_marginal(f: &DistributionFamily<Rational>, site: usize) -> P {
    let sc = f.scenario();
    (0..sc.settings()[site])
        .map(|s| {
            let mut t = vec![0; sc.n_parties()];
            t[site] = s;
            let table = f.table(&SettingTuple::new(t)).unwrap();
            let mut out = vec![rat(0, 1); sc.outcomes()[site]];
            for (idx, p) in table.indices().zip(table.data()) {
                out[idx[site]] += p;
            }
            out
        })
        .collect()
}

/// `P_{(s,t)}(a,b)` for the site pair `(i, j)` of a three-party family,
/// read off the tuple with setting 0 at the remaining site.
pub fn pair_marginal(f: &DistributionFamily<Rational>, i: usize, j: usize) -> Vec<Vec<Vec<Vec<Rational>>>> {
    let sc = f.scenario();
    (0..sc.settings()[i])
        .map(|s| {
            (0..sc.settings()[j])
                .map(|t| {
                    let mut tuple = vec![0; sc.n_parties()];
                    tuple[i] = s;
                    tuple[j] = t;
                    let table = f.table(&SettingTuple::new(tuple)).unwrap();
                    let mut out = vec![vec![rat(0, 1); sc.outcomes()[j]]; sc.outcomes()[i]];
                    for (idx, p) in table.indices().zip(table.data()) {
                        out[idx[i]][idx[j]] += p;
                    }
                    out
                })
                .collect()
        })
        .collect()
}

fn prod_except(p: &P, coords: &[usize], skip: Option<usize>) -> Rational {
    let mut v = rat(1, 1);
    for (s, &a) in coords.iter().enumerate() {
        if Some(s) != skip {
            v *= &p[s][a];
        }
    }
    v
}

fn shape_of(f: &DistributionFamily<Rational>) -> Vec<usize> {
    let sc = f.scenario();
    let mut shape = Vec::new();
    for n in 0..sc.n_parties() {
        shape.extend(std::iter::repeat_n(sc.outcomes()[n], sc.settings()[n]));
    }
    shape
}

/// Two-party measure:
/// `Σ_{s₁,s₂} P_{(s₁,s₂)}(λ₁^{s₁},λ₂^{s₂}) ∏_{s̃₁≠s₁}P_{s̃₁} ∏_{s̃₂≠s₂}P_{s̃₂}
///  − (S₁S₂−1) ∏P_{s₁} ∏P_{s₂}`.
pub fn literal_two_party(f: &DistributionFamily<Rational>) -> Tensor<Rational> {
    let sc = f.scenario();
    assert_eq!(sc.n_parties(), 2);
    let (s1, s2) = (sc.settings()[0], sc.settings()[1]);
    let p1 = single_marginal(f, 0);
    let p2 = single_marginal(f, 1);
    Tensor::from_fn(shape_of(f), |pt| {
        let (l1, l2) = pt.split_at(s1);
        let mut total = rat(0, 1);
        for a in 0..s1 {
            for b in 0..s2 {
                let joint = f.table(&SettingTuple::new(vec![a, b])).unwrap();
                total += &(joint.get(&[l1[a], l2[b]]).clone()
                    * prod_except(&p1, l1, Some(a))
                    * prod_except(&p2, l2, Some(b)));
            }
        }
        let c = rat((s1 * s2) as i64 - 1, 1);
        total -= &(c * prod_except(&p1, l1, None) * prod_except(&p2, l2, None));
        total
    })
}

/// Three-party measure: full-tuple terms, minus `(S_m−1)∏P_m` times the
/// pair sum of the other two sites for each `m`, plus
/// `(2S₁S₂S₃ − S₁S₂ − S₂S₃ − S₁S₃ + 1) ∏P₁∏P₂∏P₃`.
pub fn literal_three_party(f: &DistributionFamily<Rational>) -> Tensor<Rational> {
    let sc = f.scenario();
    assert_eq!(sc.n_parties(), 3);
    let s = sc.settings().to_vec();
    let p = [single_marginal(f, 0), single_marginal(f, 1), single_marginal(f, 2)];
    let p12 = pair_marginal(f, 0, 1);
    let p13 = pair_marginal(f, 0, 2);
    let p23 = pair_marginal(f, 1, 2);
    Tensor::from_fn(shape_of(f), |pt| {
        let l1 = &pt[..s[0]];
        let l2 = &pt[s[0]..s[0] + s[1]];
        let l3 = &pt[s[0] + s[1]..];
        let l = [l1, l2, l3];
        let mut total = rat(0, 1);
        for a in 0..s[0] {
            for b in 0..s[1] {
                for c in 0..s[2] {
                    let joint = f.table(&SettingTuple::new(vec![a, b, c])).unwrap();
                    total += &(joint.get(&[l1[a], l2[b], l3[c]]).clone()
                        * prod_except(&p[0], l1, Some(a))
                        * prod_except(&p[1], l2, Some(b))
                        * prod_except(&p[2], l3, Some(c)));
                }
            }
        }
        let pair_sum = |pm: &Vec<Vec<Vec<Vec<Rational>>>>, i: usize, j: usize| {
            let mut acc = rat(0, 1);
            for x in 0..s[i] {
                for y in 0..s[j] {
                    acc += &(pm[x][y][l[i][x]][l[j][y]].clone()
                        * prod_except(&p[i], l[i], Some(x))
                        * prod_except(&p[j], l[j], Some(y)));
                }
            }
            acc
        };
        let all = |m: usize| prod_except(&p[m], l[m], None);
        total -= &(rat(s[0] as i64 - 1, 1) * all(0) * pair_sum(&p23, 1, 2));
        total -= &(rat(s[1] as i64 - 1, 1) * all(1) * pair_sum(&p13, 0, 2));
        total -= &(rat(s[2] as i64 - 1, 1) * all(2) * pair_sum(&p12, 0, 1));
        let (a, b, c) = (s[0] as i64, s[1] as i64, s[2] as i64);
        let k = 2 * a * b * c - a * b - b * c - a * c + 1;
        total += &(rat(k, 1) * all(0) * all(1) * all(2));
        total
    })
}
