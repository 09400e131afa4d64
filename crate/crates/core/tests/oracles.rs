mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lqhv::boxes::{self, random_nonsignaling_family_auto};
use lqhv::construct::{collapsed_empty_coefficient, DEFAULT_ATOM_BUDGET};
use lqhv::scalar::rat;
use lqhv::{
    build_from_family, check_nonsignaling, coefficient, BuildOptions, DeterministicLqHVModel, DistributionFamily,
    Rational, Scenario, SignedMeasure, SiteSet, Tensor,
};

fn exact() -> BuildOptions {
    BuildOptions {
        budget: DEFAULT_ATOM_BUDGET,
        tol: 0.0,
    }
}

#[test]
fn two_party_literal_matches_with_unequal_settings() {
    for (s, k) in [
        (vec![3, 2], vec![2, 2]),
        (vec![1, 3], vec![3, 2]),
        (vec![3, 3], vec![2, 2]),
    ] {
        let sc = Scenario::new(s, k).unwrap();
        for seed in 0..5 {
            let f: DistributionFamily<Rational> = random_nonsignaling_family_auto(&sc, seed, 3).unwrap();
            let model = build_from_family(&f, exact()).unwrap();
            assert_eq!(model.measure().atoms(), &common::literal_two_party(&f));
        }
    }
}

#[test]
fn three_party_literal_matches_with_unequal_settings() {
    for s in [vec![3, 2, 1], vec![1, 2, 3], vec![2, 3, 2]] {
        let sc = Scenario::new(s, vec![2, 2, 2]).unwrap();
        for seed in 0..3 {
            let f: DistributionFamily<Rational> = random_nonsignaling_family_auto(&sc, seed, 3).unwrap();
            let model = build_from_family(&f, exact()).unwrap();
            assert_eq!(model.measure().atoms(), &common::literal_three_party(&f));
        }
    }
}

#[test]
fn constant_terms_match_closed_forms() {
    for s1 in 1..=4i128 {
        for s2 in 1..=4i128 {
            let sc = Scenario::new(vec![s1 as usize, s2 as usize], vec![2, 2]).unwrap();
            assert_eq!(collapsed_empty_coefficient(&sc), -(s1 * s2 - 1));
            assert_eq!(coefficient(&sc, SiteSet::full(2)), 1);
            for s3 in 1..=4i128 {
                let sc = Scenario::new(vec![s1 as usize, s2 as usize, s3 as usize], vec![2; 3]).unwrap();
                let k = 2 * s1 * s2 * s3 - s1 * s2 - s2 * s3 - s1 * s3 + 1;
                assert_eq!(collapsed_empty_coefficient(&sc), k);
                assert_eq!(coefficient(&sc, SiteSet::from_sites(&[1, 2])), -(s1 - 1));
                assert_eq!(coefficient(&sc, SiteSet::from_sites(&[0, 2])), -(s2 - 1));
                assert_eq!(coefficient(&sc, SiteSet::from_sites(&[0, 1])), -(s3 - 1));
            }
        }
    }
}

#[test]
fn pr_atoms_follow_the_satisfied_tuple_count() {
    // an atom fixes answers a1,a2,b1,b2; k counts tuples with a⊕b = xy
    let f = boxes::pr_box::<Rational>();
    let model = build_from_family(&f, exact()).unwrap();
    let atoms = model.measure().atoms();
    let mut negatives = 0;
    for idx in atoms.indices() {
        let k = (0..2)
            .flat_map(|x| (0..2).map(move |y| (x, y)))
            .filter(|&(x, y)| (idx[x] ^ idx[2 + y]) == (x & y))
            .count() as i64;
        assert_eq!(atoms.get(&idx), &rat(2 * k - 3, 16));
        negatives += usize::from(k == 1);
    }
    assert_eq!(negatives, 8);
}

/// Any normalized signed measure with nonnegative tuple marginals yields a
/// nonsignaling family.
#[test]
fn signed_measures_read_off_nonsignaling_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let scenarios = [
        Scenario::uniform(2, 2, 2).unwrap(),
        Scenario::new(vec![3, 2], vec![2, 2]).unwrap(),
        Scenario::uniform(3, 2, 2).unwrap(),
    ];
    let mut accepted = 0;
    let mut signed = 0;
    for round in 0..300 {
        let sc = &scenarios[round % scenarios.len()];
        let shape = sc.joint_shape();
        let len: usize = shape.iter().product();
        let raw: Vec<i64> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    -rng.gen_range(1..=3)
                } else {
                    rng.gen_range(0..=12)
                }
            })
            .collect();
        let total: i64 = raw.iter().sum();
        if total <= 0 {
            continue;
        }
        let atoms = Tensor::from_vec(shape, raw.iter().map(|&v| rat(v, total)).collect()).unwrap();
        let measure = SignedMeasure::new(sc.clone(), atoms, 0.0).unwrap();
        let Ok(model) = DeterministicLqHVModel::new(measure, 0.0) else {
            continue;
        };
        let f = model.to_family(0.0).unwrap();
        assert!(check_nonsignaling(&f, 0.0).is_ok());
        accepted += 1;
        signed += usize::from(!model.measure().is_nonnegative());
    }
    assert!(accepted >= 50, "only {accepted} measures had valid marginals");
    assert!(signed >= 10, "only {signed} accepted measures were signed");
}
