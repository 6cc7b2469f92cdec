use cyl_floer::action::{action_table, exactness_defect};
use cyl_floer::arrangement::{reconstruct_arrangement, validate};
use cyl_floer::bound::{reduce, theorem_bound, TargetPolicy};
use cyl_floer::generate::random_instance;
use cyl_floer::instance::Instance;
use cyl_floer::rational::Rational;
use cyl_floer::suite::{check_instance, SuiteOptions};
use cyl_floer::surgery::{delete_leaf, find_leaves, insert_leaf};
use cyl_floer_oracles::telescoped_actions;
use proptest::prelude::*;

fn bound() -> Rational {
    Rational::from_int(4)
}

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=12).prop_map(|(a, b)| Rational::new(a, b))
}

/// Every (leaf, target) deletion of `inst`.
fn deletions(inst: &Instance) -> Vec<(String, String)> {
    let arr = reconstruct_arrangement(inst).unwrap();
    let view = cyl_floer::arrangement::derive_trees(&arr.skeleton);
    let mut out = Vec::new();
    for leaf in find_leaves(inst).unwrap() {
        let v = arr.skeleton.face(&leaf.face).unwrap();
        for (w, _) in view.distance_two(v) {
            out.push((leaf.face.clone(), arr.faces()[w].id.clone()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn suite_passes(n in 1usize..=6, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let rep = check_instance(&inst, &SuiteOptions::default());
        let failures: Vec<_> = rep.failures().collect();
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    #[test]
    fn suite_passes_with_epsilon(n in 2usize..=5, seed in any::<u64>(), k in 1i64..=4) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        // Each step takes at most ε from a face, so ε below w_min / n keeps every weight positive.
        let w_min = inst.trees.top.vertices.iter().chain(&inst.trees.bottom.vertices)
            .filter_map(|v| v.area.finite())
            .min()
            .unwrap()
            .clone();
        let epsilon = w_min * Rational::new(k, 8 * n as i64);
        let opts = SuiteOptions { epsilon, ..SuiteOptions::default() };
        let rep = check_instance(&inst, &opts);
        let failures: Vec<_> = rep.failures().collect();
        prop_assert!(failures.is_empty(), "{:?}", failures);
        prop_assert_eq!(&rep.outcomes["reduction"], &cyl_floer::suite::Outcome::Pass);
    }

    #[test]
    fn surgery_round_trips_for_every_target(n in 2usize..=5, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let leaves = find_leaves(&inst).unwrap();
        for (leaf, target) in deletions(&inst) {
            let l = leaves.iter().find(|l| l.face == leaf).unwrap();
            let d = delete_leaf(&inst, l, Some(&target), &Rational::zero()).unwrap();
            prop_assert!(validate(&d.instance).valid);
            prop_assert!(exactness_defect(&d.instance).unwrap().is_zero());
            prop_assert_eq!(&insert_leaf(&d.instance, &d.event.inverse).unwrap(), &inst);
            // The shift formula agrees with telescoping the new trees, up to a constant.
            let fresh = telescoped_actions(&d.instance);
            let c = &d.actions.values[0] - &fresh[0];
            prop_assert!(d.actions.values.iter().zip(&fresh).all(|(a, b)| a - b == c));
        }
    }

    #[test]
    fn bound_chain(n in 1usize..=6, seed in any::<u64>(), policy in prop_oneof![
        Just(TargetPolicy::SmallestLabel),
        Just(TargetPolicy::LargestArea),
    ]) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let t = reduce(&inst, policy, &Rational::zero(), 3).unwrap();
        prop_assert_eq!(t.steps.len(), n - 1);
        prop_assert!(t.chain_holds());
        prop_assert!(t.gamma <= t.constructive_cost && t.constructive_cost <= t.theorem_bound);
        let cap = (Rational::pow2(n as u32) - Rational::one()) * &t.gamma;
        prop_assert!(t.theorem_bound <= cap);
    }

    #[test]
    fn instances_survive_json(n in 1usize..=6, seed in any::<u64>()) {
        let inst = random_instance(n, seed, &bound()).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let arr = reconstruct_arrangement(&back).unwrap();
        prop_assert!(action_table(&arr).unwrap().is_generic());
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..=6, seed in any::<u64>()) {
        prop_assert_eq!(random_instance(n, seed, &bound()).unwrap(), random_instance(n, seed, &bound()).unwrap());
    }

    #[test]
    fn rational_field(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), a);
    }
}

#[test]
fn theorem_bound_of_known_barcodes() {
    let inst = cyl_floer::fixtures::zigzag();
    let a = cyl_floer::analysis::Analysis::new(&inst, 3).unwrap();
    assert_eq!(theorem_bound(&a.barcode), Rational::from_int(5));
}
