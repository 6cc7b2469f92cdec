//! Random instances built by repeated leaf insertion into the two-point curve.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::action_table;
use crate::arrangement::{derive_trees, reconstruct_arrangement, Side};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::instance::{Instance, Weight};
use crate::rational::Rational;
use crate::surgery::{insert_leaf, InsertParams};

pub const RETRY_BUDGET: usize = 64;
const GRID: i64 = 16;

fn grid_fraction(rng: &mut ChaCha8Rng, of: &Rational, max_k: i64) -> Rational {
    of * &Rational::new(rng.gen_range(1..=max_k), GRID)
}

/// One random insertion with `epsilon = 0`.
pub fn random_insertion(inst: &Instance, rng: &mut ChaCha8Rng, area_bound: &Rational) -> Result<Instance> {
    let arr = reconstruct_arrangement(inst)?;
    let view = derive_trees(&arr.skeleton);
    let sk = &arr.skeleton;
    let m = arr.points();
    let t = rng.gen_range(0..m);
    let side = if rng.gen_bool(0.5) { Side::Up } else { Side::Down };
    let seg = arr.segments()[t];
    let mface = match side {
        Side::Up => seg.down,
        Side::Down => seg.up,
    };
    let &alpha = arr.face_arcs(mface).choose(rng).expect("faces have arcs");
    let arc = arr.arcs[alpha];
    let a1 = if arc.inner == mface { arc.outer } else { arc.inner };
    let &(u, _) = view.adjacent[a1].choose(rng).expect("trees are connected");

    let leaf_area = match sk.faces[u].weight.finite() {
        Some(w) => grid_fraction(rng, w, GRID - 1),
        None => grid_fraction(rng, area_bound, GRID),
    };
    let split = match &sk.faces[mface].weight {
        Weight::Unbounded => {
            let part = Weight::Finite(grid_fraction(rng, area_bound, GRID));
            if rng.gen_bool(0.5) {
                (Weight::Unbounded, part)
            } else {
                (part, Weight::Unbounded)
            }
        }
        Weight::Finite(total) => {
            let w1 = grid_fraction(rng, total, GRID - 1);
            let w2 = total - &w1;
            (Weight::Finite(w1), Weight::Finite(w2))
        }
    };
    insert_leaf(
        inst,
        &InsertParams {
            segment: t,
            arc: (arc.start, arc.end),
            side,
            split,
            leaf_area,
            source: sk.faces[u].id.clone(),
            epsilon: Rational::zero(),
            leaf_id: None,
            split_id: None,
            rotate: 0,
        },
    )
}

/// A valid instance with `2n` points and pairwise distinct actions, deterministic in `seed`.
pub fn random_instance(n: usize, seed: u64, area_bound: &Rational) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    if !area_bound.is_positive() {
        return Err(Error::Invalid("area bound must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        let mut inst = fixtures::base(grid_fraction(&mut rng, area_bound, GRID));
        for _ in 1..n {
            inst = random_insertion(&inst, &mut rng, area_bound)?;
        }
        let arr = reconstruct_arrangement(&inst)?;
        if action_table(&arr)?.is_generic() {
            return Ok(inst);
        }
    }
    Err(Error::GenerationExhausted(RETRY_BUDGET))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let bound = Rational::from_int(4);
        let a = random_instance(3, 7, &bound).unwrap();
        let b = random_instance(3, 7, &bound).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.n, 3);
        assert!(crate::arrangement::validate(&a).valid);
    }

    #[test]
    fn base_lenses_are_equal() {
        let inst = random_instance(1, 99, &Rational::one()).unwrap();
        let top = inst.trees.top.vertices[1].area.clone();
        let bottom = inst.trees.bottom.vertices[1].area.clone();
        assert_eq!(top, bottom);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(random_instance(0, 1, &Rational::one()).is_err());
        assert!(random_instance(2, 1, &Rational::zero()).is_err());
    }
}
