use std::collections::BTreeMap;

use contractnet_core::bruteforce::{random_table, random_union};
use contractnet_core::choice::{
    am_decompose, blair_leq, check_heredity, check_outcast, is_path_independent, is_respecting,
    largest_null_set, pullback, respecting_order, weak_representation, DEFAULT_CAP,
};
use contractnet_core::{ChoiceFunction, ChoiceSpec, ContractId, Mask};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(n: usize) -> Vec<ContractId> {
    (0..n).map(|i| ContractId::new(format!("e{i}"))).collect()
}

/// A random order-based or union function of the given kind.
fn random_rule(seed: u64, n: usize, kind: u8) -> ChoiceFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = names(n);
    order.shuffle(&mut rng);
    let spec = match kind % 4 {
        0 => ChoiceSpec::Linear { ranking: order },
        1 => {
            let mut tiers: Vec<Vec<ContractId>> = vec![vec![]];
            for (k, c) in order.into_iter().enumerate() {
                if k > 0 && rng.random_bool(0.5) {
                    tiers.push(vec![]);
                }
                tiers.last_mut().unwrap().push(c);
            }
            ChoiceSpec::Weak { tiers }
        }
        2 => ChoiceSpec::Quota {
            quota: rng.random_range(1..=n),
            ranking: order,
        },
        _ => {
            let k = rng.random_range(1..=3);
            return random_union(&mut rng, n, k).unwrap();
        }
    };
    ChoiceFunction::from_spec(&spec, None).unwrap()
}

// Oracles scanning every pair of menus.
fn oracle_pi(f: &ChoiceFunction) -> bool {
    let all: Vec<Mask> = f.full().subsets().collect();
    all.iter().all(|&a| {
        all.iter()
            .all(|&b| f.choose(a.union(b)) == f.choose(f.choose(a).union(b)))
    })
}

fn oracle_heredity(f: &ChoiceFunction) -> bool {
    let all: Vec<Mask> = f.full().subsets().collect();
    all.iter().all(|&big| {
        big.subsets()
            .all(|small| f.choose(big).intersection(small).is_subset(f.choose(small)))
    })
}

fn oracle_outcast(f: &ChoiceFunction) -> bool {
    let all: Vec<Mask> = f.full().subsets().collect();
    all.iter().all(|&big| {
        big.subsets()
            .filter(|&mid| f.choose(big).is_subset(mid))
            .all(|mid| f.choose(mid) == f.choose(big))
    })
}

proptest! {
    #[test]
    fn generated_rules_are_path_independent(seed in any::<u64>(), n in 1usize..=5, kind in 0u8..4) {
        let f = random_rule(seed, n, kind);
        prop_assert!(is_path_independent(&f, DEFAULT_CAP).unwrap().is_none());
        prop_assert!(oracle_pi(&f));
        for m in f.full().subsets() {
            let c = f.choose(m);
            prop_assert!(c.is_subset(m));
            prop_assert_eq!(f.choose(c), c);
        }
    }

    #[test]
    fn checks_agree_with_pair_scans(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_table(&mut rng, n).unwrap();
        let pi = is_path_independent(&f, DEFAULT_CAP).unwrap().is_none();
        let h = check_heredity(&f, DEFAULT_CAP).unwrap().is_none();
        let o = check_outcast(&f, DEFAULT_CAP).unwrap().is_none();
        prop_assert_eq!(pi, oracle_pi(&f));
        prop_assert_eq!(h, oracle_heredity(&f));
        prop_assert_eq!(o, oracle_outcast(&f));
        prop_assert_eq!(h && o, pi);
    }

    #[test]
    fn checks_agree_on_unions(seed in any::<u64>(), n in 1usize..=4) {
        // unions of linear orders are Plott; perturbing one menu often breaks it
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_union(&mut rng, n, 2).unwrap();
        let target = rng.random_range(0..(1u64 << n));
        let g = ChoiceFunction::tabulate(f.ground().to_vec(), |m| {
            if m.0 == target { m } else { f.choose(m) }
        }).unwrap();
        let pi = is_path_independent(&g, DEFAULT_CAP).unwrap().is_none();
        prop_assert_eq!(pi, oracle_pi(&g));
        let ho = check_heredity(&g, DEFAULT_CAP).unwrap().is_none()
            && check_outcast(&g, DEFAULT_CAP).unwrap().is_none();
        prop_assert_eq!(ho, pi);
    }

    #[test]
    fn respecting_orders(seed in any::<u64>(), n in 1usize..=5, kind in 0u8..4, pin_seed in any::<u64>()) {
        let f = random_rule(seed, n, kind);
        prop_assume!(f.full().subsets().skip(1).all(|m| !f.choose(m).is_empty()));
        let l = respecting_order(&f, None, DEFAULT_CAP).unwrap();
        prop_assert!(is_respecting(&f, l.ranking().unwrap()));
        let mut rng = ChaCha8Rng::seed_from_u64(pin_seed);
        let menu = Mask(rng.random_range(1..(1u64 << n)));
        let chosen: Vec<usize> = f.choose(menu).iter().collect();
        let a = chosen[rng.random_range(0..chosen.len())];
        let p = respecting_order(&f, Some((menu, a)), DEFAULT_CAP).unwrap();
        let r = p.ranking().unwrap();
        prop_assert!(is_respecting(&f, r));
        prop_assert_eq!(r.iter().copied().find(|&x| menu.contains(x)), Some(a));
    }

    #[test]
    fn am_union_reproduces(seed in any::<u64>(), n in 1usize..=5, k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_union(&mut rng, n, k).unwrap();
        let parts = am_decompose(&f, DEFAULT_CAP).unwrap();
        prop_assert!(parts.iter().all(|p| p.is_linear() && is_respecting(&f, p.ranking().unwrap())));
        for m in f.full().subsets() {
            let u = parts.iter().fold(Mask::EMPTY, |acc, p| acc.union(p.choose(m)));
            prop_assert_eq!(u, f.choose(m));
        }
    }

    #[test]
    fn blair_is_a_preorder(seed in any::<u64>(), n in 1usize..=4, kind in 0u8..4) {
        let f = random_rule(seed, n, kind);
        let all: Vec<Mask> = f.full().subsets().collect();
        for &a in &all {
            prop_assert!(blair_leq(&f, a, a));
        }
        for &a in &all {
            for &b in &all {
                if !blair_leq(&f, a, b) { continue; }
                for &c in &all {
                    if blair_leq(&f, b, c) {
                        prop_assert!(blair_leq(&f, a, c), "{:?} {:?} {:?}", a, b, c);
                    }
                }
            }
        }
    }

    #[test]
    fn null_elements_are_invisible(seed in any::<u64>(), n in 1usize..=4, extra in 1usize..=2) {
        // a union on the first n elements, extended by `extra` elements never chosen
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_union(&mut rng, n, 2).unwrap();
        let keep = Mask::full(n);
        let f = ChoiceFunction::tabulate(names(n + extra), |m| base.choose(m.intersection(keep))).unwrap();
        let null = largest_null_set(&f, DEFAULT_CAP).unwrap();
        prop_assert_eq!(null.members, names(n + extra)[n..].to_vec());
        let nulls = Mask::full(n + extra).difference(keep);
        for a in keep.subsets() {
            for z in nulls.subsets() {
                prop_assert_eq!(f.choose(a.union(z)), f.choose(a));
            }
        }
    }

    #[test]
    fn weak_representation_is_exact(seed in any::<u64>(), n in 1usize..=4, kind in 0u8..4) {
        let f = random_rule(seed, n, kind);
        if let Some(w) = weak_representation(&f, DEFAULT_CAP).unwrap() {
            prop_assert!(w.same_choices(&f));
        } else {
            prop_assert!(!f.is_weak());
        }
    }

    #[test]
    fn pullback_stays_path_independent(seed in any::<u64>(), n in 1usize..=3, copies in 1usize..=2, kind in 0u8..4) {
        let g = random_rule(seed, n, kind);
        let mut ground = Vec::new();
        let mut proj = BTreeMap::new();
        for y in g.ground() {
            for k in 1..=copies {
                let x = ContractId::new(format!("{y}#{k}"));
                proj.insert(x.clone(), y.clone());
                ground.push(x);
            }
        }
        let f = pullback(&ground, &proj, &g).unwrap();
        prop_assert!(is_path_independent(&f, DEFAULT_CAP).unwrap().is_none());
        for m in f.full().subsets() {
            let image: Mask = m.iter().map(|x| g.index_of(proj[&f.ground()[x]].as_str()).unwrap()).collect();
            let expect: Mask = m.iter()
                .filter(|&x| g.choose(image).contains(g.index_of(proj[&f.ground()[x]].as_str()).unwrap()))
                .collect();
            prop_assert_eq!(f.choose(m), expect);
        }
    }
}
