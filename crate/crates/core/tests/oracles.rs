//! The library against the brute-force references, on random instances.

use cyl_floer::analysis::Analysis;
use cyl_floer::generate::random_instance;
use cyl_floer::persistence::{delta_matching_exists, Barcode, FiniteBar, InfiniteBar};
use cyl_floer::rational::Rational;
use cyl_floer::surgery::{delete_leaf, find_leaves};
use cyl_floer_oracles::{best_bottleneck, brute_barcode, brute_delta_matching, telescoped_actions};
use proptest::prelude::*;

fn bound() -> Rational {
    Rational::from_int(4)
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(a, b)| Rational::new(a, b))
}

fn barcode_of(bars: &[(Rational, Option<Rational>)]) -> Barcode {
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for (b, d) in bars {
        match d {
            Some(d) => finite.push(FiniteBar {
                birth: b.clone(),
                death: d.clone(),
                birth_point: 0,
                death_point: 0,
            }),
            None => infinite.push(InfiniteBar {
                birth: b.clone(),
                point: 0,
            }),
        }
    }
    Barcode {
        finite,
        infinite,
        betas: Vec::new(),
        gamma: Rational::zero(),
    }
}

fn bars() -> impl Strategy<Value = Vec<(Rational, Option<Rational>)>> {
    prop::collection::vec(
        (small_rational(), prop::option::of(1i64..=8)).prop_map(|(b, len)| {
            let d = len.map(|l| &b + &Rational::new(l, 2));
            (b, d)
        }),
        0..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn actions_match_hand_telescoping(n in 1usize..=6, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let a = Analysis::new(&inst, 3).unwrap();
        prop_assert_eq!(a.actions.values, telescoped_actions(&inst));
    }

    #[test]
    fn barcode_matches_chain_enumeration(n in 1usize..=5, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let a = Analysis::new(&inst, 3).unwrap();
        prop_assert_eq!(a.barcode.intervals(), brute_barcode(&a.complex.counts, &a.actions.values));
    }

    #[test]
    fn deletion_barcodes_match_chain_enumeration(n in 2usize..=5, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        for leaf in find_leaves(&inst).unwrap() {
            let d = delete_leaf(&inst, &leaf, None, &Rational::zero()).unwrap();
            let after = Analysis::with_actions(&d.instance, d.actions.clone(), 3).unwrap();
            prop_assert_eq!(after.barcode.intervals(), brute_barcode(&after.complex.counts, &after.actions.values));
        }
    }

    #[test]
    fn matching_agrees_with_search(a in bars(), b in bars(), delta in (0i64..=6).prop_map(|k| Rational::new(k, 2))) {
        let (fast, witness) = delta_matching_exists(&barcode_of(&a), &barcode_of(&b), &delta);
        prop_assert_eq!(fast, brute_delta_matching(&a, &b, &delta));
        prop_assert_eq!(fast, witness.is_some());
    }

    /// The monotone pairing of two sorted sequences is a best bottleneck pairing.
    #[test]
    fn monotone_matching_is_optimal(
        (mut x, mut y) in (1usize..=6).prop_flat_map(|k| (
            prop::collection::vec(small_rational(), k),
            prop::collection::vec(small_rational(), k),
        ))
    ) {
        x.sort_by(|a, b| b.cmp(a));
        y.sort_by(|a, b| b.cmp(a));
        let monotone = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).max().unwrap();
        prop_assert_eq!(monotone, best_bottleneck(&x, &y));
    }
}
