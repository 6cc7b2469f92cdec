//! Slow, direct reference computations. Each one avoids the library's own algorithm for the
//! quantity it checks, so agreement is evidence rather than repetition.

use std::collections::{BTreeMap, HashSet};

use cyl_floer::instance::{Instance, Tree};
use cyl_floer::rational::Rational;

/// Actions telescoped straight from the tree file: crossing segment `t` changes the action by
/// the weight of the subtree cut off by edge `t`, with a plus sign when the edge is oriented
/// away from its root. Anchored at `A(s1) = 0`.
pub fn telescoped_actions(inst: &Instance) -> Vec<Rational> {
    let mut step: BTreeMap<usize, Rational> = BTreeMap::new();
    for tree in [&inst.trees.top, &inst.trees.bottom] {
        for e in &tree.edges {
            let (far, away) = if is_ancestor(tree, &e.up, &e.down) {
                (&e.down, true)
            } else {
                (&e.up, false)
            };
            let w = subtree_weight(tree, far, if away { &e.up } else { &e.down });
            step.insert(e.label, if away { w } else { -w });
        }
    }
    let mut out = vec![Rational::zero()];
    for label in 1..2 * inst.n {
        let next = out.last().unwrap() + &step[&label];
        out.push(next);
    }
    out
}

fn neighbours<'a>(tree: &'a Tree, v: &str) -> Vec<&'a str> {
    tree.edges
        .iter()
        .filter_map(|e| {
            if e.up == v {
                Some(e.down.as_str())
            } else if e.down == v {
                Some(e.up.as_str())
            } else {
                None
            }
        })
        .collect()
}

/// Faces reachable from `v` without passing through `blocked`.
fn component<'a>(tree: &'a Tree, v: &'a str, blocked: &str) -> Vec<&'a str> {
    let mut seen = vec![v];
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for y in neighbours(tree, x) {
            if y != blocked && !seen.contains(&y) {
                seen.push(y);
                stack.push(y);
            }
        }
    }
    seen
}

/// True when `a` lies on the root side of the edge `a`–`b`.
fn is_ancestor(tree: &Tree, a: &str, b: &str) -> bool {
    !component(tree, b, a).contains(&tree.root.as_str())
}

fn subtree_weight(tree: &Tree, v: &str, parent: &str) -> Rational {
    component(tree, v, parent)
        .into_iter()
        .filter_map(|f| tree.vertex(f).and_then(|x| x.area.finite()).cloned())
        .sum()
}

/// Barcode by enumerating every chain. `counts[q][p]` is the number of lunes from `q` to `p`,
/// so `∂q = Σ counts[q][p]·p` mod 2. Intervals come back sorted, `None` for infinite bars.
pub fn brute_barcode(counts: &[Vec<u32>], actions: &[Rational]) -> Vec<(Rational, Option<Rational>)> {
    let m = actions.len();
    assert!(m <= 16, "brute force is exponential in the number of points");
    let boundary: Vec<u32> = (0..m)
        .map(|q| (0..m).filter(|&p| counts[q][p] % 2 == 1).fold(0, |acc, p| acc | 1 << p))
        .collect();
    let d = |x: u32| (0..m).filter(|&q| x >> q & 1 == 1).fold(0, |acc, q| acc ^ boundary[q]);
    let mut levels: Vec<&Rational> = actions.iter().collect();
    levels.sort();
    levels.dedup();
    let k = levels.len();
    let below: Vec<u32> = levels
        .iter()
        .map(|lvl| (0..m).filter(|&p| &actions[p] <= *lvl).fold(0, |acc, p| acc | 1 << p))
        .collect();
    let subsets = |mask: u32| {
        let mut out = Vec::new();
        let mut s = mask;
        loop {
            out.push(s);
            if s == 0 {
                break;
            }
            s = (s - 1) & mask;
        }
        out
    };
    let cycles: Vec<HashSet<u32>> = below
        .iter()
        .map(|&b| subsets(b).into_iter().filter(|&x| d(x) == 0).collect())
        .collect();
    let bounds: Vec<HashSet<u32>> = below.iter().map(|&b| subsets(b).into_iter().map(d).collect()).collect();
    let log2 = |n: usize| n.trailing_zeros() as i64;
    // Rank of H(C_i) -> H(C_j), levels 1-based, 0 = empty.
    let r = |i: usize, j: usize| -> i64 {
        if i == 0 {
            return 0;
        }
        let z = &cycles[i - 1];
        let b = &bounds[j - 1];
        log2(z.len()) - log2(z.intersection(b).count())
    };
    let mut bars = Vec::new();
    for i in 1..=k {
        for j in i + 1..=k {
            let mu = r(i, j - 1) - r(i - 1, j - 1) - r(i, j) + r(i - 1, j);
            for _ in 0..mu {
                bars.push((levels[i - 1].clone(), Some(levels[j - 1].clone())));
            }
        }
        for _ in 0..r(i, k) - r(i - 1, k) {
            bars.push((levels[i - 1].clone(), None));
        }
    }
    bars.sort();
    bars
}

/// Tries every partial injection of `a` into `b`. Matched bars move each endpoint by at
/// most `delta` (infinite only with infinite); unmatched bars have length at most `2·delta`.
pub fn brute_delta_matching(
    a: &[(Rational, Option<Rational>)],
    b: &[(Rational, Option<Rational>)],
    delta: &Rational,
) -> bool {
    fn close(x: &(Rational, Option<Rational>), y: &(Rational, Option<Rational>), delta: &Rational) -> bool {
        let near = |u: &Rational, v: &Rational| (u - v).abs() <= *delta;
        near(&x.0, &y.0)
            && match (&x.1, &y.1) {
                (None, None) => true,
                (Some(u), Some(v)) => near(u, v),
                _ => false,
            }
    }
    fn droppable(x: &(Rational, Option<Rational>), delta: &Rational) -> bool {
        match &x.1 {
            None => false,
            Some(d) => d - &x.0 <= delta + delta,
        }
    }
    fn go(
        i: usize,
        a: &[(Rational, Option<Rational>)],
        b: &[(Rational, Option<Rational>)],
        used: &mut Vec<bool>,
        delta: &Rational,
    ) -> bool {
        if i == a.len() {
            return b.iter().zip(used.iter()).all(|(y, &u)| u || droppable(y, delta));
        }
        if droppable(&a[i], delta) && go(i + 1, a, b, used, delta) {
            return true;
        }
        for j in 0..b.len() {
            if !used[j] && close(&a[i], &b[j], delta) {
                used[j] = true;
                let ok = go(i + 1, a, b, used, delta);
                used[j] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(0, a, b, &mut vec![false; b.len()], delta)
}

/// `min over permutations σ of max_i |x_i − y_σ(i)|`, by trying all of them.
pub fn best_bottleneck(x: &[Rational], y: &[Rational]) -> Rational {
    assert_eq!(x.len(), y.len());
    fn go(i: usize, x: &[Rational], y: &[Rational], used: &mut Vec<bool>, cur: Rational, best: &mut Option<Rational>) {
        if i == x.len() {
            if best.as_ref().is_none_or(|b| cur < *b) {
                *best = Some(cur);
            }
            return;
        }
        for j in 0..y.len() {
            if !used[j] {
                used[j] = true;
                let c = (&x[i] - &y[j]).abs();
                go(i + 1, x, y, used, if c > cur { c } else { cur.clone() }, best);
                used[j] = false;
            }
        }
    }
    let mut best = None;
    go(0, x, y, &mut vec![false; y.len()], Rational::zero(), &mut best);
    best.unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyl_floer::fixtures;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn zigzag_actions_by_hand() {
        assert_eq!(telescoped_actions(&fixtures::zigzag()), vec![r(0), r(1), r(-1), r(2)]);
        assert_eq!(telescoped_actions(&fixtures::base(r(1))), vec![r(0), r(1)]);
    }

    #[test]
    fn acyclic_pair() {
        // One lune from point 1 down to point 0.
        let counts = vec![vec![0, 0], vec![1, 0]];
        assert_eq!(brute_barcode(&counts, &[r(0), r(2)]), vec![(r(0), Some(r(2)))]);
        assert_eq!(
            brute_barcode(&[vec![0, 0], vec![0, 0]], &[r(0), r(2)]),
            vec![(r(0), None), (r(2), None)]
        );
    }

    #[test]
    fn matching_by_search() {
        let a = vec![(r(0), None), (r(1), Some(r(2)))];
        let b = vec![(r(1), None)];
        assert!(brute_delta_matching(&a, &b, &r(1)));
        assert!(!brute_delta_matching(&a, &b, &Rational::new(1, 4)));
        assert_eq!(best_bottleneck(&[r(3), r(1)], &[r(0), r(4)]), r(1));
    }
}
