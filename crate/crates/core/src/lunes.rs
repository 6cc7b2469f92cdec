//! Smooth lunes as 2-chains and the Floer differential.
//!
//! A lune from `q` to `p` is bounded by a path along L0 from `q` to `p` and a path along L
//! from `p` back to `q`, with the region on the left. For every choice of paths the face
//! multiplicities `nu` are forced by the jump across each edge (left minus right equals the
//! signed edge multiplicity); a candidate is accepted when these jumps are consistent and
//! the resulting 2-chain has the local shape of an immersed disc with two convex corners,
//! and its boundary, lifted to the universal cover, turns exactly once.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::action::ActionTable;
use crate::arrangement::{derive_trees, forward_len, Arrangement, Quadrant, Side, TreeView};
use crate::error::{Error, Result};
use crate::instance::point_name;
use crate::rational::Rational;
use crate::z2::{Z2Matrix, Z2Vec};

pub const DEFAULT_MAX_WRAPS: u32 = 3;
pub const MAX_WRAPS_ENV: &str = "CYL_FLOER_MAX_WRAPS";

/// The wrap bound from the environment, or the default.
pub fn max_wraps_from_env() -> u32 {
    std::env::var(MAX_WRAPS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_WRAPS)
}

/// Direction of travel along L0: `Ccw` increases the point index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseDirection {
    Ccw,
    Cw,
}

/// Direction of travel along L relative to [`Arrangement::l_cycle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveDirection {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryData {
    pub from: usize,
    pub to: usize,
    pub base_direction: BaseDirection,
    pub base_wraps: u32,
    pub curve_direction: CurveDirection,
    pub curve_wraps: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lune {
    pub boundary: BoundaryData,
    /// Multiplicity per face index.
    pub nu: Vec<u32>,
    pub area: Rational,
}

impl Lune {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.nu.iter().enumerate().filter(|(_, &k)| k > 0).map(|(f, _)| f)
    }
}

/// Precomputed jump constraints for one arrangement.
pub struct LuneEnumerator<'a> {
    arr: &'a Arrangement,
    /// (left face, right face) per edge slot: segments first, then arcs.
    jumps: Vec<(usize, usize)>,
    /// BFS spanning order from the top root: (face, slot, face it is reached from).
    tree: Vec<(usize, usize, usize)>,
    /// Edge slots not used by the spanning tree; checked after propagation.
    extra: Vec<usize>,
    l_pos: Vec<usize>,
    /// Per step `i` of `l_cycle`: sign of traversing it forwards relative to the arc orientation.
    step_sign: Vec<i64>,
    /// Per step `i` of `l_cycle`: change of the position on the universal cover of L0 when
    /// traversing it forwards.
    step_shift: Vec<i64>,
    first_last_check: bool,
    turning_check: bool,
}

impl<'a> LuneEnumerator<'a> {
    pub fn new(arr: &'a Arrangement) -> Self {
        let m = arr.points();
        let mut jumps = Vec::with_capacity(2 * m);
        for s in arr.segments() {
            jumps.push((s.up, s.down));
        }
        for a in &arr.arcs {
            jumps.push((a.inner, a.outer));
        }
        let nf = arr.faces().len();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for (slot, &(l, r)) in jumps.iter().enumerate() {
            incident[l].push(slot);
            incident[r].push(slot);
        }
        let root = arr.skeleton.top_root;
        let mut seen = vec![false; nf];
        let mut used = vec![false; jumps.len()];
        seen[root] = true;
        let mut tree = Vec::with_capacity(nf);
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            for &slot in &incident[f] {
                let (l, r) = jumps[slot];
                let g = if l == f { r } else { l };
                if !seen[g] {
                    seen[g] = true;
                    used[slot] = true;
                    tree.push((g, slot, f));
                    queue.push_back(g);
                }
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "face adjacency is connected");
        let extra = (0..jumps.len()).filter(|&s| !used[s]).collect();

        let step_sign = (0..m)
            .map(|i| {
                let a = &arr.arcs[arr.l_step_arc(i)];
                let step = (arr.l_cycle[i], arr.l_cycle[(i + 1) % m]);
                if a.oriented() == step {
                    1
                } else {
                    -1
                }
            })
            .collect();

        let step_shift: Vec<i64> = (0..m)
            .map(|i| {
                let a = &arr.arcs[arr.l_step_arc(i)];
                let len = a.len(m) as i64;
                if arr.l_cycle[i] == a.start {
                    len
                } else {
                    -len
                }
            })
            .collect();

        LuneEnumerator {
            arr,
            jumps,
            tree,
            extra,
            l_pos: arr.l_positions(),
            step_sign,
            step_shift,
            first_last_check: true,
            turning_check: true,
        }
    }

    /// Toggles the requirement that the crossings next to the corners along L avoid the
    /// interior of the L0 side. Only used to study how much the condition matters.
    pub fn with_first_last_check(mut self, on: bool) -> Self {
        self.first_last_check = on;
        self
    }

    pub fn with_turning_check(mut self, on: bool) -> Self {
        self.turning_check = on;
        self
    }

    pub fn arrangement(&self) -> &Arrangement {
        self.arr
    }

    /// All lunes from `q` to `p` with at most `max_wraps` extra turns on either side.
    pub fn enumerate(&self, q: usize, p: usize, max_wraps: u32) -> Vec<Lune> {
        assert_ne!(q, p, "a lune joins distinct points");
        let mut out = Vec::new();
        for base_direction in [BaseDirection::Ccw, BaseDirection::Cw] {
            for curve_direction in [CurveDirection::Forward, CurveDirection::Backward] {
                if !self.corners_convex(q, p, base_direction, curve_direction) {
                    continue;
                }
                for base_wraps in 0..=max_wraps {
                    for curve_wraps in 0..=max_wraps {
                        let b = BoundaryData {
                            from: q,
                            to: p,
                            base_direction,
                            base_wraps,
                            curve_direction,
                            curve_wraps,
                        };
                        if let Some(l) = self.try_boundary(b) {
                            out.push(l);
                        }
                    }
                }
            }
        }
        out.sort_by_key(|l| l.boundary);
        out.dedup_by_key(|l| l.boundary);
        out
    }

    /// The side of L used next to each corner must match the side of L0 the region sits on.
    fn corners_convex(&self, q: usize, p: usize, base: BaseDirection, curve: CurveDirection) -> bool {
        let m = self.arr.points();
        let want = match base {
            BaseDirection::Ccw => Side::Up,
            BaseDirection::Cw => Side::Down,
        };
        let (leave_p, arrive_q) = match curve {
            CurveDirection::Forward => (self.l_pos[p], (self.l_pos[q] + m - 1) % m),
            CurveDirection::Backward => ((self.l_pos[p] + m - 1) % m, self.l_pos[q]),
        };
        Arrangement::l_step_side(leave_p) == want && Arrangement::l_step_side(arrive_q) == want
    }

    /// Signed multiplicities of the boundary chain, per edge slot.
    pub fn boundary_chain(&self, b: &BoundaryData) -> Vec<i64> {
        let m = self.arr.points();
        let (q, p) = (b.from, b.to);
        let mut chain = vec![0i64; 2 * m];
        let bw = b.base_wraps as i64;
        let (lo, hi, sign) = match b.base_direction {
            BaseDirection::Ccw => (q, p, 1),
            BaseDirection::Cw => (p, q, -1),
        };
        for (t, c) in chain.iter_mut().enumerate().take(m) {
            let extra = forward_len(lo, t, m) < forward_len(lo, hi, m);
            *c = sign * (bw + extra as i64);
        }
        let cw = b.curve_wraps as i64;
        let (lo, hi, dir) = match b.curve_direction {
            CurveDirection::Forward => (self.l_pos[p], self.l_pos[q], 1),
            CurveDirection::Backward => (self.l_pos[q], self.l_pos[p], -1),
        };
        for i in 0..m {
            let extra = forward_len(lo, i, m) < forward_len(lo, hi, m);
            let slot = m + self.arr.l_step_arc(i);
            chain[slot] = dir * self.step_sign[i] * (cw + extra as i64);
        }
        chain
    }

    fn try_boundary(&self, b: BoundaryData) -> Option<Lune> {
        let arr = self.arr;
        let sk = &arr.skeleton;
        let (lifted, sides) = self.lifted_curve(&b)?;
        let chain = self.boundary_chain(&b);
        let mut nu = vec![0i64; sk.faces.len()];
        for &(g, slot, from) in &self.tree {
            let (l, _) = self.jumps[slot];
            nu[g] = if l == g {
                nu[from] + chain[slot]
            } else {
                nu[from] - chain[slot]
            };
        }
        for &slot in &self.extra {
            let (l, r) = self.jumps[slot];
            if nu[l] - nu[r] != chain[slot] {
                return None;
            }
        }
        if nu[sk.bottom_root] != 0 || nu.iter().any(|&k| k < 0) || nu.iter().all(|&k| k == 0) {
            return None;
        }
        for s in 0..arr.points() {
            let at = |qd| nu[arr.quadrant(s, qd)];
            let corner = at(Quadrant::NE) - at(Quadrant::NW) + at(Quadrant::SW) - at(Quadrant::SE);
            let want = if s == b.from {
                1
            } else if s == b.to {
                -1
            } else {
                0
            };
            if corner != want {
                return None;
            }
        }
        if self.first_last_check && !Self::crossings_clear(&lifted) {
            return None;
        }
        if self.turning_check && Self::half_turns(&lifted, &sides) != 1 {
            return None;
        }
        let area = nu
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(f, &k)| sk.area(f).expect("roots carry nu = 0") * &Rational::from_int(k))
            .sum();
        Some(Lune {
            boundary: b,
            nu: nu.into_iter().map(|k| k as u32).collect(),
            area,
        })
    }

    /// Positions on the universal cover of L0 (a line, with `s_i` at `i + 2n·k`) of the
    /// points met along the L side, from `p` to `q`, with `q` lifted to its own index.
    /// `None` when the two sides do not close up on the cover.
    fn lifted_curve(&self, b: &BoundaryData) -> Option<(Vec<i64>, Vec<Side>)> {
        let m = self.arr.points();
        let (q, p) = (b.from, b.to);
        let base_len = match b.base_direction {
            BaseDirection::Ccw => (forward_len(q, p, m) + b.base_wraps as usize * m) as i64,
            BaseDirection::Cw => -((forward_len(p, q, m) + b.base_wraps as usize * m) as i64),
        };
        let block = match b.curve_direction {
            CurveDirection::Forward => forward_len(self.l_pos[p], self.l_pos[q], m),
            CurveDirection::Backward => forward_len(self.l_pos[q], self.l_pos[p], m),
        };
        let steps = block + b.curve_wraps as usize * m;
        let mut pos = Vec::with_capacity(steps + 1);
        let mut sides = Vec::with_capacity(steps);
        let mut x = q as i64 + base_len;
        pos.push(x);
        for k in 0..steps {
            let (i, d) = match b.curve_direction {
                CurveDirection::Forward => ((self.l_pos[p] + k) % m, 1),
                CurveDirection::Backward => ((self.l_pos[p] + m - 1 - k % m) % m, -1),
            };
            x += d * self.step_shift[i];
            pos.push(x);
            sides.push(Arrangement::l_step_side(i));
        }
        (x == q as i64).then_some((pos, sides))
    }

    /// On the cover, the crossings next to the corners along the L side must not lie inside
    /// the L0 side; otherwise the disc folds at their preimages.
    /// Net number of counterclockwise half turns along the L side. With two convex corners the
    /// boundary of an immersed disc turns once, so this must be 1.
    fn half_turns(lifted: &[i64], sides: &[Side]) -> i64 {
        lifted
            .windows(2)
            .zip(sides)
            .map(|(w, side)| {
                let right = w[1] > w[0];
                match (side, right) {
                    (Side::Up, false) | (Side::Down, true) => 1,
                    _ => -1,
                }
            })
            .sum()
    }

    fn crossings_clear(lifted: &[i64]) -> bool {
        if lifted.len() < 3 {
            return true;
        }
        let (a, z) = (lifted[0], lifted[lifted.len() - 1]);
        let (lo, hi) = (a.min(z), a.max(z));
        [lifted[1], lifted[lifted.len() - 2]]
            .into_iter()
            .all(|x| x <= lo || x >= hi)
    }
}

pub fn enumerate_lunes(arr: &Arrangement, q: usize, p: usize, max_wraps: u32) -> Vec<Lune> {
    LuneEnumerator::new(arr).enumerate(q, p, max_wraps)
}

/// The lune spanned by the subtree behind segment `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborLune {
    pub label: usize,
    pub from: usize,
    pub to: usize,
    pub faces: Vec<usize>,
    pub area: Rational,
}

pub fn neighbor_lunes(arr: &Arrangement, view: &TreeView) -> Vec<NeighborLune> {
    let m = arr.points();
    (0..m)
        .map(|t| {
            let (from, to) = if view.sign[t] > 0 {
                ((t + 1) % m, t)
            } else {
                (t, (t + 1) % m)
            };
            NeighborLune {
                label: t,
                from,
                to,
                faces: view.subtree[t].clone(),
                area: view.subtree_weight[t].clone(),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FloerComplex {
    pub points: usize,
    /// Generators by ascending action (ties by index).
    pub order: Vec<usize>,
    /// `counts[q][p]`: number of lunes from `q` to `p`.
    pub counts: Vec<Vec<u32>>,
    pub lunes: BTreeMap<(usize, usize), Vec<Lune>>,
    /// Column `q` holds `∂q` in point coordinates.
    pub boundary: Z2Matrix,
}

impl FloerComplex {
    pub fn n(&self, q: usize, p: usize) -> u32 {
        self.counts[q][p]
    }

    pub fn boundary_of(&self, q: usize) -> &Z2Vec {
        &self.boundary.cols[q]
    }

    pub fn homology_rank(&self) -> usize {
        self.points - 2 * self.boundary.rank()
    }
}

/// Counts lunes for every ordered pair without checking the complex invariants.
pub fn raw_complex(enumerator: &LuneEnumerator, actions: &ActionTable, max_wraps: u32) -> FloerComplex {
    let m = enumerator.arrangement().points();
    let mut counts = vec![vec![0u32; m]; m];
    let mut lunes = BTreeMap::new();
    let mut boundary = Z2Matrix::zeros(m, m);
    for (q, row) in counts.iter_mut().enumerate() {
        for (p, count) in row.iter_mut().enumerate() {
            if q == p {
                continue;
            }
            let found = enumerator.enumerate(q, p, max_wraps);
            *count = found.len() as u32;
            if found.len() % 2 == 1 {
                boundary.set(p, q, true);
            }
            if !found.is_empty() {
                lunes.insert((q, p), found);
            }
        }
    }
    FloerComplex {
        points: m,
        order: actions.order(),
        counts,
        lunes,
        boundary,
    }
}

pub fn differential(arr: &Arrangement, actions: &ActionTable, max_wraps: u32) -> Result<FloerComplex> {
    let complex = raw_complex(&LuneEnumerator::new(arr), actions, max_wraps);
    check_complex(arr, actions, &complex)?;
    Ok(complex)
}

/// Every lune strictly lowers the action.
pub fn check_filtration(actions: &ActionTable, c: &FloerComplex) -> std::result::Result<(), String> {
    match c.lunes.keys().find(|&&(q, p)| actions.get(q) <= actions.get(p)) {
        Some(&(q, p)) => Err(format!(
            "lune from {} to {} does not lower the action",
            point_name(q),
            point_name(p)
        )),
        None => Ok(()),
    }
}

pub fn check_d_squared(c: &FloerComplex) -> std::result::Result<(), String> {
    if c.boundary.mul(&c.boundary).is_zero() {
        Ok(())
    } else {
        Err("∂² ≠ 0".into())
    }
}

pub fn check_homology_rank(c: &FloerComplex) -> std::result::Result<(), String> {
    match c.homology_rank() {
        2 => Ok(()),
        r => Err(format!("homology has rank {r} instead of 2")),
    }
}

/// The subtree lune of every segment is among the enumerated lunes.
pub fn check_neighbor_lunes(arr: &Arrangement, view: &TreeView, c: &FloerComplex) -> std::result::Result<(), String> {
    for nl in neighbor_lunes(arr, view) {
        let found = c.lunes.get(&(nl.from, nl.to)).is_some_and(|ls| {
            ls.iter().any(|l| {
                l.nu.iter()
                    .enumerate()
                    .all(|(f, &k)| k == nl.faces.binary_search(&f).is_ok() as u32)
            })
        });
        if !found {
            return Err(format!(
                "neighbour lune of segment {} ({} to {}) was not enumerated",
                nl.label + 1,
                point_name(nl.from),
                point_name(nl.to)
            ));
        }
    }
    Ok(())
}

/// Filtration, ∂² = 0, rank-2 homology and presence of every neighbour lune.
pub fn check_complex(arr: &Arrangement, actions: &ActionTable, c: &FloerComplex) -> Result<()> {
    let view = derive_trees(&arr.skeleton);
    check_filtration(actions, c)
        .and_then(|()| check_d_squared(c))
        .and_then(|()| check_homology_rank(c))
        .and_then(|()| check_neighbor_lunes(arr, &view, c))
        .map_err(Error::InvariantViolation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::action_table;
    use crate::arrangement::reconstruct_arrangement;
    use crate::fixtures;

    #[test]
    fn zigzag_single_lune_under_b1() {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let ls = enumerate_lunes(&arr, 1, 0, 3);
        assert_eq!(ls.len(), 1);
        let b1 = arr.skeleton.face("B1").unwrap();
        assert_eq!(ls[0].support().collect::<Vec<_>>(), vec![b1]);
        assert_eq!(ls[0].nu[b1], 1);
        assert_eq!(ls[0].area, Rational::one());
        assert!(enumerate_lunes(&arr, 0, 1, 3).is_empty());
    }

    #[test]
    fn zigzag_differential() {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let t = action_table(&arr).unwrap();
        let c = differential(&arr, &t, 3).unwrap();
        let mut nonzero = vec![];
        for q in 0..4 {
            for p in 0..4 {
                if c.n(q, p) > 0 {
                    nonzero.push((q + 1, p + 1, c.n(q, p)));
                }
            }
        }
        assert_eq!(nonzero, vec![(2, 1, 1), (2, 3, 1), (4, 1, 1), (4, 3, 1)]);
        assert_eq!(c.homology_rank(), 2);
    }

    #[test]
    fn base_has_two_cancelling_lunes() {
        let arr = reconstruct_arrangement(&fixtures::base(Rational::one())).unwrap();
        let t = action_table(&arr).unwrap();
        let c = differential(&arr, &t, 3).unwrap();
        assert_eq!(c.n(1, 0), 2);
        assert_eq!(c.n(0, 1), 0);
        assert!(c.boundary.is_zero());
    }

    #[test]
    fn neighbour_lune_directions() {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let view = derive_trees(&arr.skeleton);
        let nl = neighbor_lunes(&arr, &view);
        assert_eq!(
            (nl[2].from, nl[2].to, nl[2].area.clone()),
            (3, 2, Rational::from_int(3))
        );
        assert_eq!((nl[1].from, nl[1].to), (1, 2));
    }

    #[test]
    fn wraps_do_not_change_zigzag() {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let e = LuneEnumerator::new(&arr);
        for q in 0..4 {
            for p in 0..4 {
                if q != p {
                    assert_eq!(e.enumerate(q, p, 0), e.enumerate(q, p, 4));
                }
            }
        }
    }
}
