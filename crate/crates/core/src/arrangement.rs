//! Structural validation and reconstruction of the curve arrangement from a tree pair.
//!
//! Points, segments and arcs are 0-based internally: point `i` is `s_{i+1}` and
//! segment `t` runs from point `t` to point `t+1` (mod 2n), i.e. it carries label `t+1`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{FaceId, Instance, TreeSide, Weight};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Up,
    Down,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Up => Side::Down,
            Side::Down => Side::Up,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: FaceId,
    pub weight: Weight,
    pub tree: TreeSide,
    pub side: Side,
    pub is_root: bool,
    /// Incident segments in increasing order.
    pub segments: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub up: usize,
    pub down: usize,
}

/// An arc of L. It covers the segments `start, start+1, …, end-1` of L0 (cyclically);
/// `inner` is the face directly under it (on its side), `outer` the face beyond.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub side: Side,
    pub start: usize,
    pub end: usize,
    pub inner: usize,
    pub outer: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrant {
    NE = 0,
    NW = 1,
    SW = 2,
    SE = 3,
}

/// Faces and segments read off the trees, after the structural checks.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub n: usize,
    pub faces: Vec<Face>,
    pub segments: Vec<Segment>,
    pub top_root: usize,
    pub bottom_root: usize,
    pub index: BTreeMap<FaceId, usize>,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    pub skeleton: Skeleton,
    pub arcs: Vec<Arc>,
    /// Per point, the index of its upper and lower arc.
    pub up_arc: Vec<usize>,
    pub down_arc: Vec<usize>,
    /// Points in the order met along L, starting at `s1` and leaving it along its lower arc.
    pub l_cycle: Vec<usize>,
    pub quadrants: Vec<[usize; 4]>,
}

impl Skeleton {
    pub fn points(&self) -> usize {
        2 * self.n
    }

    pub fn face(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn area(&self, f: usize) -> Option<&Rational> {
        self.faces[f].weight.finite()
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn conflict(msg: impl Into<String>) -> Error {
    Error::ReconstructionConflict(msg.into())
}

/// Tree shape, parity, root placement and positivity checks.
pub fn check_structure(inst: &Instance) -> Result<Skeleton> {
    let n = inst.n;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let m = 2 * n;

    let mut faces = Vec::new();
    let mut index = BTreeMap::new();
    for side in [TreeSide::Top, TreeSide::Bottom] {
        let tree = inst.tree(side);
        for v in &tree.vertices {
            if v.id.is_empty() {
                return Err(invalid("empty face id"));
            }
            if index.insert(v.id.clone(), faces.len()).is_some() {
                return Err(invalid(format!("duplicate face id {:?}", v.id)));
            }
            faces.push(Face {
                id: v.id.clone(),
                weight: v.area.clone(),
                tree: side,
                side: Side::Up,
                is_root: false,
                segments: Vec::new(),
            });
        }
    }

    let unbounded = |side: TreeSide| {
        inst.tree(side)
            .vertices
            .iter()
            .filter(|v| v.area.is_unbounded())
            .count()
    };
    let (ut, ub) = (unbounded(TreeSide::Top), unbounded(TreeSide::Bottom));
    if (ut == 2 && ub == 0) || (ut == 0 && ub == 2) {
        return Err(invalid(
            "both unbounded faces lie in the same tree (the curve would be contractible)",
        ));
    }

    let mut roots = [0usize; 2];
    for (k, side) in [TreeSide::Top, TreeSide::Bottom].into_iter().enumerate() {
        let tree = inst.tree(side);
        let name = if k == 0 { "top" } else { "bottom" };
        if tree.vertices.len() != n + 1 {
            return Err(invalid(format!(
                "{name} tree has {} vertices, expected {}",
                tree.vertices.len(),
                n + 1
            )));
        }
        if tree.edges.len() != n {
            return Err(invalid(format!(
                "{name} tree has {} edges, expected {n}",
                tree.edges.len()
            )));
        }
        let root = match tree.vertex(&tree.root) {
            Some(v) => v,
            None => {
                return Err(invalid(format!(
                    "{name} root {:?} is not a vertex of the {name} tree",
                    tree.root
                )))
            }
        };
        if !root.area.is_unbounded() {
            return Err(invalid(format!("root {:?} must be unbounded", root.id)));
        }
        for v in &tree.vertices {
            match &v.area {
                Weight::Unbounded if v.id != tree.root => {
                    return Err(invalid(format!(
                        "face {:?} is unbounded but is not the {name} root",
                        v.id
                    )))
                }
                Weight::Finite(a) if !a.is_positive() => {
                    return Err(invalid(format!("face {:?} has non-positive area {a}", v.id)))
                }
                _ => {}
            }
        }
        roots[k] = index[&tree.root];
        faces[roots[k]].is_root = true;
    }

    let mut segments: Vec<Option<Segment>> = vec![None; m];
    let mut parity = [None::<usize>; 2];
    let mut role: Vec<Option<Side>> = vec![None; faces.len()];
    for (k, side) in [TreeSide::Top, TreeSide::Bottom].into_iter().enumerate() {
        let tree = inst.tree(side);
        for e in &tree.edges {
            if e.label == 0 || e.label > m {
                return Err(invalid(format!("edge label {} outside 1..={m}", e.label)));
            }
            let t = e.label - 1;
            if segments[t].is_some() {
                return Err(invalid(format!("edge label {} used twice", e.label)));
            }
            match parity[k] {
                None => parity[k] = Some(e.label % 2),
                Some(p) if p != e.label % 2 => {
                    return Err(invalid(format!("edge {} breaks the parity split of its tree", e.label)))
                }
                _ => {}
            }
            let lookup = |id: &FaceId| -> Result<usize> {
                match index.get(id) {
                    Some(&f) if faces[f].tree == side => Ok(f),
                    _ => Err(invalid(format!(
                        "edge {} refers to {:?}, which is not a vertex of the same tree",
                        e.label, id
                    ))),
                }
            };
            let (u, d) = (lookup(&e.up)?, lookup(&e.down)?);
            if u == d {
                return Err(invalid(format!("edge {} is a loop", e.label)));
            }
            for (f, s) in [(u, Side::Up), (d, Side::Down)] {
                match role[f] {
                    Some(r) if r != s => {
                        return Err(invalid(format!("face {:?} lies both above and below L0", faces[f].id)))
                    }
                    _ => role[f] = Some(s),
                }
            }
            segments[t] = Some(Segment { up: u, down: d });
        }
    }
    if parity[0] == parity[1] {
        return Err(invalid("labels of both trees have the same parity"));
    }
    let segments: Vec<Segment> = segments.into_iter().map(|s| s.expect("all labels present")).collect();

    // n edges on n+1 vertices: connected iff acyclic iff a tree.
    for (k, &root) in roots.iter().enumerate() {
        let side = if k == 0 { TreeSide::Top } else { TreeSide::Bottom };
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            for s in &segments {
                for (a, b) in [(s.up, s.down), (s.down, s.up)] {
                    if a == f && seen.insert(b) {
                        queue.push_back(b);
                    }
                }
            }
        }
        if seen.len() != n + 1 {
            return Err(invalid(format!("the {side:?} tree is not connected").to_lowercase()));
        }
    }

    for (f, face) in faces.iter_mut().enumerate() {
        face.side = role[f].expect("connected trees touch every face");
    }
    if faces[roots[0]].side != Side::Up {
        return Err(invalid("the top root must lie above L0"));
    }
    if faces[roots[1]].side != Side::Down {
        return Err(invalid("the bottom root must lie below L0"));
    }
    for (t, s) in segments.iter().enumerate() {
        faces[s.up].segments.push(t);
        faces[s.down].segments.push(t);
    }
    for face in &mut faces {
        face.segments.sort_unstable();
    }

    Ok(Skeleton {
        n,
        faces,
        segments,
        top_root: roots[0],
        bottom_root: roots[1],
        index,
    })
}

/// Number of segments in the forward range `from → to` (points, mod `m`).
pub fn forward_len(from: usize, to: usize, m: usize) -> usize {
    (to + m - from) % m
}

/// Whether point `x` lies strictly inside the forward range `from → to`.
pub fn strictly_inside(from: usize, to: usize, x: usize, m: usize) -> bool {
    let d = forward_len(from, x, m);
    d > 0 && d < forward_len(from, to, m)
}

impl Arc {
    pub fn covers_segment(&self, t: usize, m: usize) -> bool {
        forward_len(self.start, t, m) < forward_len(self.start, self.end, m)
    }

    pub fn len(&self, m: usize) -> usize {
        forward_len(self.start, self.end, m)
    }

    pub fn other_end(&self, p: usize) -> usize {
        if p == self.start {
            self.end
        } else {
            self.start
        }
    }

    /// Endpoints in the orientation that keeps the inner face on the left.
    pub fn oriented(&self) -> (usize, usize) {
        match self.side {
            Side::Up => (self.end, self.start),
            Side::Down => (self.start, self.end),
        }
    }
}

pub fn reconstruct_arrangement(inst: &Instance) -> Result<Arrangement> {
    let sk = check_structure(inst)?;
    reconstruct_from_skeleton(sk)
}

type Derivation = (usize, usize, usize);

pub fn reconstruct_from_skeleton(sk: Skeleton) -> Result<Arrangement> {
    let m = sk.points();
    // (side, {x, y}) -> derivations (face, gap start, gap end)
    let mut derived: BTreeMap<(Side, usize, usize), Vec<Derivation>> = BTreeMap::new();
    for (f, face) in sk.faces.iter().enumerate() {
        let segs = &face.segments;
        for i in 0..segs.len() {
            let a = segs[i];
            let b = segs[(i + 1) % segs.len()];
            let x = (a + 1) % m;
            let y = b;
            if x == y {
                return Err(conflict(format!(
                    "face {:?} meets itself across the arc at s{}",
                    face.id,
                    x + 1
                )));
            }
            derived
                .entry((face.side, x.min(y), x.max(y)))
                .or_default()
                .push((f, x, y));
        }
    }

    let mut seen_points: BTreeMap<(Side, usize), usize> = BTreeMap::new();
    for (&(side, x, y), ds) in &derived {
        if ds.len() != 2 || ds[0].0 == ds[1].0 || ds[0].1 != ds[1].2 || ds[0].2 != ds[1].1 {
            let names: Vec<&str> = ds.iter().map(|d| sk.faces[d.0].id.as_str()).collect();
            return Err(conflict(format!(
                "the {side:?} arc s{}-s{} is derived inconsistently by faces {names:?}",
                x + 1,
                y + 1
            )));
        }
        for p in [x, y] {
            *seen_points.entry((side, p)).or_default() += 1;
        }
    }
    for side in [Side::Up, Side::Down] {
        for p in 0..m {
            if seen_points.get(&(side, p)).copied().unwrap_or(0) != 1 {
                return Err(conflict(
                    format!("point s{} does not have exactly one {side:?} arc", p + 1).to_lowercase(),
                ));
            }
        }
    }

    // Nesting: the outer face of every arc is the one reached first from the root.
    let mut by_face: Vec<Vec<(Side, usize, usize)>> = vec![Vec::new(); sk.faces.len()];
    for &(side, x, y) in derived.keys() {
        for d in &derived[&(side, x, y)] {
            by_face[d.0].push((side, x, y));
        }
    }
    let mut arcs = Vec::new();
    for (side, root) in [(Side::Up, sk.top_root), (Side::Down, sk.bottom_root)] {
        let mut reached = BTreeSet::from([root]);
        let mut queue = VecDeque::from([(root, None::<(Side, usize, usize)>)]);
        while let Some((f, parent)) = queue.pop_front() {
            for &key in &by_face[f] {
                if Some(key) == parent {
                    continue;
                }
                let ds = &derived[&key];
                let (mine, other) = if ds[0].0 == f { (ds[0], ds[1]) } else { (ds[1], ds[0]) };
                if !reached.insert(other.0) {
                    return Err(conflict(
                        format!(
                            "face {:?} is reached twice while nesting {side:?} arcs",
                            sk.faces[other.0].id
                        )
                        .to_lowercase(),
                    ));
                }
                arcs.push(Arc {
                    side,
                    start: mine.1,
                    end: mine.2,
                    inner: other.0,
                    outer: f,
                });
                queue.push_back((other.0, Some(key)));
            }
        }
        let expected = sk.faces.iter().filter(|f| f.side == side).count();
        if reached.len() != expected {
            return Err(conflict(
                format!(
                    "{} of {expected} {side:?} faces are nested under the root",
                    reached.len()
                )
                .to_lowercase(),
            ));
        }
    }
    arcs.sort_by_key(|a| (a.side, a.start.min(a.end), a.start.max(a.end)));

    // Arcs on one side must be laminar and the innermost arc over each segment
    // must bound the face the trees put there.
    for (i, a) in arcs.iter().enumerate() {
        for b in &arcs[i + 1..] {
            if a.side == b.side
                && strictly_inside(a.start, a.end, b.start, m) != strictly_inside(a.start, a.end, b.end, m)
            {
                return Err(conflict(format!(
                    "arcs s{}-s{} and s{}-s{} cross",
                    a.start + 1,
                    a.end + 1,
                    b.start + 1,
                    b.end + 1
                )));
            }
        }
    }
    for (t, seg) in sk.segments.iter().enumerate() {
        for (side, face, root) in [(Side::Up, seg.up, sk.top_root), (Side::Down, seg.down, sk.bottom_root)] {
            let innermost = arcs
                .iter()
                .filter(|a| a.side == side && a.covers_segment(t, m))
                .min_by_key(|a| a.len(m));
            let expected = innermost.map_or(root, |a| a.inner);
            if expected != face {
                return Err(conflict(format!(
                    "segment {} has {:?} {} it, but the arcs enclose {:?}",
                    t + 1,
                    sk.faces[face].id,
                    if side == Side::Up { "above" } else { "below" },
                    sk.faces[expected].id
                )));
            }
        }
    }

    let mut up_arc = vec![usize::MAX; m];
    let mut down_arc = vec![usize::MAX; m];
    for (i, a) in arcs.iter().enumerate() {
        let slot = if a.side == Side::Up { &mut up_arc } else { &mut down_arc };
        slot[a.start] = i;
        slot[a.end] = i;
    }

    let mut l_cycle = vec![0usize];
    let mut p = 0;
    loop {
        let q = arcs[down_arc[p]].other_end(p);
        let r = arcs[up_arc[q]].other_end(q);
        l_cycle.push(q);
        if r == 0 {
            break;
        }
        l_cycle.push(r);
        p = r;
    }
    if l_cycle.len() != m {
        return Err(conflict(format!(
            "L splits into several closed curves (the component through s1 has {} of {m} points)",
            l_cycle.len()
        )));
    }

    let quadrants = (0..m)
        .map(|p| {
            let prev = (p + m - 1) % m;
            [
                sk.segments[p].up,
                sk.segments[prev].up,
                sk.segments[prev].down,
                sk.segments[p].down,
            ]
        })
        .collect();

    Ok(Arrangement {
        skeleton: sk,
        arcs,
        up_arc,
        down_arc,
        l_cycle,
        quadrants,
    })
}

impl Arrangement {
    pub fn n(&self) -> usize {
        self.skeleton.n
    }

    pub fn points(&self) -> usize {
        self.skeleton.points()
    }

    pub fn faces(&self) -> &[Face] {
        &self.skeleton.faces
    }

    pub fn segments(&self) -> &[Segment] {
        &self.skeleton.segments
    }

    pub fn arc_at(&self, p: usize, side: Side) -> &Arc {
        match side {
            Side::Up => &self.arcs[self.up_arc[p]],
            Side::Down => &self.arcs[self.down_arc[p]],
        }
    }

    pub fn quadrant(&self, p: usize, q: Quadrant) -> usize {
        self.quadrants[p][q as usize]
    }

    /// Position of every point within `l_cycle`.
    pub fn l_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.points()];
        for (i, &p) in self.l_cycle.iter().enumerate() {
            pos[p] = i;
        }
        pos
    }

    /// Side of the arc from `l_cycle[i]` to `l_cycle[i+1]`.
    pub fn l_step_side(i: usize) -> Side {
        if i.is_multiple_of(2) {
            Side::Down
        } else {
            Side::Up
        }
    }

    /// Index of the arc from `l_cycle[i]` to `l_cycle[i+1]`.
    pub fn l_step_arc(&self, i: usize) -> usize {
        let p = self.l_cycle[i % self.points()];
        match Self::l_step_side(i % self.points()) {
            Side::Up => self.up_arc[p],
            Side::Down => self.down_arc[p],
        }
    }

    /// Arcs bounding face `f`, in the order of its segments.
    pub fn face_arcs(&self, f: usize) -> Vec<usize> {
        let m = self.points();
        self.skeleton.faces[f]
            .segments
            .iter()
            .map(|&t| {
                let p = (t + 1) % m;
                match self.skeleton.faces[f].side {
                    Side::Up => self.up_arc[p],
                    Side::Down => self.down_arc[p],
                }
            })
            .collect()
    }
}

/// Per-tree parent, sign and subtree-weight data.
#[derive(Clone, Debug)]
pub struct TreeView {
    /// Parent face and connecting segment; `None` for the roots.
    pub parent: Vec<Option<(usize, usize)>>,
    /// Neighbours of every face as (face, segment).
    pub adjacent: Vec<Vec<(usize, usize)>>,
    /// `s(e_t)`: +1 iff the up → down orientation of segment `t` points away from its root.
    pub sign: Vec<i8>,
    /// `v(e_t)`: the endpoint of segment `t` farther from the root.
    pub child: Vec<usize>,
    /// `W(T_{v(e_t)})`.
    pub subtree_weight: Vec<Rational>,
    /// Faces of `T_{v(e_t)}`.
    pub subtree: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
}

pub fn derive_trees(sk: &Skeleton) -> TreeView {
    let nf = sk.faces.len();
    let mut adjacent = vec![Vec::new(); nf];
    for (t, s) in sk.segments.iter().enumerate() {
        adjacent[s.up].push((s.down, t));
        adjacent[s.down].push((s.up, t));
    }
    for a in &mut adjacent {
        a.sort_by_key(|&(_, t)| t);
    }
    let mut parent = vec![None; nf];
    let mut depth = vec![0; nf];
    let mut order = Vec::with_capacity(nf);
    for root in [sk.top_root, sk.bottom_root] {
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            order.push(f);
            for &(g, t) in &adjacent[f] {
                if g != root && parent[g].is_none() {
                    parent[g] = Some((f, t));
                    depth[g] = depth[f] + 1;
                    queue.push_back(g);
                }
            }
        }
    }

    let mut below: Vec<Vec<usize>> = (0..nf).map(|f| vec![f]).collect();
    let mut weight: Vec<Rational> = sk
        .faces
        .iter()
        .map(|f| f.weight.finite().cloned().unwrap_or_else(Rational::zero))
        .collect();
    for &f in order.iter().rev() {
        if let Some((p, _)) = parent[f] {
            let w = weight[f].clone();
            weight[p] += w;
            let sub = std::mem::take(&mut below[f]);
            below[p].extend(sub.iter().copied());
            below[f] = sub;
        }
    }

    let m = sk.segments.len();
    let mut sign = vec![0i8; m];
    let mut child = vec![0usize; m];
    let mut subtree_weight = Vec::with_capacity(m);
    let mut subtree = Vec::with_capacity(m);
    for (t, s) in sk.segments.iter().enumerate() {
        let away = parent[s.down] == Some((s.up, t));
        sign[t] = if away { 1 } else { -1 };
        child[t] = if away { s.down } else { s.up };
        subtree_weight.push(weight[child[t]].clone());
        let mut faces = below[child[t]].clone();
        faces.sort_unstable();
        subtree.push(faces);
    }

    TreeView {
        parent,
        adjacent,
        sign,
        child,
        subtree_weight,
        subtree,
        depth,
    }
}

impl TreeView {
    /// `c(f)`: sum of signs along the path from the root to `f`.
    pub fn exactness_coefficient(&self, f: usize) -> i64 {
        let mut c = 0;
        let mut g = f;
        while let Some((p, t)) = self.parent[g] {
            c += self.sign[t] as i64;
            g = p;
        }
        c
    }

    pub fn degree(&self, f: usize) -> usize {
        self.adjacent[f].len()
    }

    /// Faces at tree distance exactly 2 from `f`, with the label of the edge at the far end.
    pub fn distance_two(&self, f: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &(a, _) in &self.adjacent[f] {
            for &(w, k) in &self.adjacent[a] {
                if w != f {
                    out.push((w, k));
                }
            }
        }
        out.sort_by_key(|&(_, k)| k);
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleResult {
    pub rule: &'static str,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub rules: Vec<RuleResult>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn first_error(&self) -> Option<&RuleResult> {
        self.rules.iter().find(|r| !r.ok)
    }
}

/// Runs every structural rule and reports each one; later rules are skipped once one fails.
pub fn validate(inst: &Instance) -> ValidationReport {
    let mut rules = Vec::new();
    let mut warnings = Vec::new();
    let mut push = |rule, res: std::result::Result<(), String>| {
        let ok = res.is_ok();
        rules.push(RuleResult {
            rule,
            ok,
            detail: res.err(),
        });
        ok
    };

    let done = |rules: Vec<RuleResult>, warnings| ValidationReport {
        valid: rules.iter().all(|r| r.ok),
        rules,
        warnings,
    };

    let sk = match check_structure(inst) {
        Ok(sk) => {
            push("structure", Ok(()));
            sk
        }
        Err(e) => {
            push("structure", Err(e.to_string()));
            return done(rules, warnings);
        }
    };
    let view = derive_trees(&sk);
    let arr = match reconstruct_from_skeleton(sk) {
        Ok(a) => {
            push("reconstruction", Ok(()));
            a
        }
        Err(e) => {
            push("reconstruction", Err(e.to_string()));
            return done(rules, warnings);
        }
    };
    let defect = crate::action::defect_of(&view);
    if !push(
        "exactness",
        if defect.is_zero() {
            Ok(())
        } else {
            Err(format!("exactness defect is {defect}"))
        },
    ) {
        return done(rules, warnings);
    }
    let table = crate::action::table_of(&arr, &view);
    for (a, b) in table.ties() {
        warnings.push(format!(
            "s{} and s{} have the same action {}",
            a + 1,
            b + 1,
            table.values[a]
        ));
    }
    done(rules, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn base_case_structure() {
        let arr = reconstruct_arrangement(&fixtures::base(Rational::one())).unwrap();
        assert_eq!(arr.arcs.len(), 2);
        assert_eq!(arr.l_cycle, vec![0, 1]);
        assert_eq!(arr.faces().len(), 4);
    }

    #[test]
    fn zigzag_structure() {
        let inst = fixtures::zigzag();
        let arr = reconstruct_arrangement(&inst).unwrap();
        assert_eq!(arr.arcs.len(), 4);
        assert_eq!(arr.l_cycle, vec![0, 1, 2, 3]);
        let view = derive_trees(&arr.skeleton);
        assert_eq!(view.sign, vec![1, -1, 1, -1]);
        for face in arr.faces().iter().filter(|f| !f.is_root) {
            assert_eq!(face.segments.len(), 1, "{} is a lens", face.id);
        }
    }

    #[test]
    fn three_leaves_structure() {
        let arr = reconstruct_arrangement(&fixtures::three_leaves()).unwrap();
        assert_eq!(arr.arcs.len(), 8);
        assert_eq!(arr.faces().len(), 10);
        assert_eq!(arr.faces().iter().filter(|f| f.is_root).count(), 2);
        assert_eq!(arr.l_cycle, vec![0, 7, 2, 3, 6, 5, 4, 1]);
        let view = derive_trees(&arr.skeleton);
        assert_eq!(view.sign[0], 1);
        assert_eq!(view.sign[6], -1);
    }

    #[test]
    fn quadrants_follow_segments() {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let sk = &arr.skeleton;
        let b1 = sk.face("B1").unwrap();
        let a2 = sk.face("A2").unwrap();
        // s1 sits between segment 4 (A2 above, R2 below) and segment 1 (R1 above, B1 below).
        assert_eq!(arr.quadrant(0, Quadrant::SE), b1);
        assert_eq!(arr.quadrant(0, Quadrant::NW), a2);
    }

    #[test]
    fn both_roots_in_one_tree_is_rejected() {
        let mut inst = fixtures::base(Rational::one());
        inst.trees.top.vertices[1].area = crate::instance::Weight::Unbounded;
        inst.trees.bottom.vertices[0].area = crate::instance::Weight::Finite(Rational::one());
        let err = check_structure(&inst).unwrap_err();
        assert!(err.to_string().contains("contractible"), "{err}");
    }

    #[test]
    fn unrealizable_pair_is_a_conflict() {
        // The bottom tree R2 -2- A -4- X puts R2 under segment 2 alone, which forces
        // a lower arc s3-s2 that no other face derives.
        let mut inst = fixtures::zigzag();
        inst.trees.bottom = crate::instance::Tree {
            root: "R2".into(),
            vertices: vec![
                crate::instance::Vertex {
                    id: "R2".into(),
                    area: Weight::Unbounded,
                },
                crate::instance::Vertex {
                    id: "A".into(),
                    area: Weight::Finite(Rational::one()),
                },
                crate::instance::Vertex {
                    id: "X".into(),
                    area: Weight::Finite(Rational::one()),
                },
            ],
            edges: vec![
                crate::instance::Edge {
                    label: 2,
                    up: "A".into(),
                    down: "R2".into(),
                },
                crate::instance::Edge {
                    label: 4,
                    up: "A".into(),
                    down: "X".into(),
                },
            ],
        };
        assert!(check_structure(&inst).is_ok());
        assert!(matches!(
            reconstruct_arrangement(&inst),
            Err(Error::ReconstructionConflict(_))
        ));
    }

    #[test]
    fn parity_violation_is_rejected() {
        let mut bad = fixtures::zigzag();
        bad.trees.top.edges[1].label = 4;
        bad.trees.bottom.edges[1].label = 3;
        assert!(check_structure(&bad).is_err());
    }

    #[test]
    fn validation_report_flags_defect() {
        let inst = fixtures::base_with(Rational::one(), Rational::from_int(2));
        let rep = validate(&inst);
        assert!(!rep.valid);
        assert_eq!(rep.first_error().unwrap().rule, "exactness");
        assert!(validate(&fixtures::zigzag()).valid);
    }
}
