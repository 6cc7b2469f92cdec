//! Barcodes of the filtered Floer complex.

use serde::Serialize;

use crate::action::ActionTable;
use crate::error::{Error, Result};
use crate::lunes::FloerComplex;
use crate::rational::Rational;
use crate::z2::{kernel_basis, rank_of, Z2Vec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteBar {
    pub birth: Rational,
    pub death: Rational,
    #[serde(skip)]
    pub birth_point: usize,
    #[serde(skip)]
    pub death_point: usize,
}

impl FiniteBar {
    pub fn length(&self) -> Rational {
        &self.death - &self.birth
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InfiniteBar {
    pub birth: Rational,
    #[serde(skip)]
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Barcode {
    pub finite: Vec<FiniteBar>,
    pub infinite: Vec<InfiniteBar>,
    pub betas: Vec<Rational>,
    pub gamma: Rational,
}

/// `∂e_i = f_i`, `∂g_i = 0`, all in point coordinates.
#[derive(Clone, Debug)]
pub struct JordanBasis {
    pub e: Vec<Z2Vec>,
    pub f: Vec<Z2Vec>,
    pub g: Vec<Z2Vec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BarStats {
    pub betas: Vec<Rational>,
    pub gamma: Rational,
    pub beta_min: Option<Rational>,
}

impl Barcode {
    fn from_bars(mut finite: Vec<FiniteBar>, mut infinite: Vec<InfiniteBar>) -> Barcode {
        finite.sort_by(|a, b| (&a.birth, &a.death, a.birth_point).cmp(&(&b.birth, &b.death, b.birth_point)));
        infinite.sort_by(|a, b| (&a.birth, a.point).cmp(&(&b.birth, b.point)));
        let mut betas: Vec<Rational> = finite.iter().map(FiniteBar::length).collect();
        betas.sort_by(|a, b| b.cmp(a));
        let gamma = match infinite.as_slice() {
            [a, b] => &b.birth - &a.birth,
            _ => Rational::zero(),
        };
        Barcode {
            finite,
            infinite,
            betas,
            gamma,
        }
    }

    /// (birth, death) pairs, sorted; `None` marks an infinite bar.
    pub fn intervals(&self) -> Vec<(Rational, Option<Rational>)> {
        let mut out: Vec<_> = self
            .finite
            .iter()
            .map(|b| (b.birth.clone(), Some(b.death.clone())))
            .chain(self.infinite.iter().map(|b| (b.birth.clone(), None)))
            .collect();
        out.sort();
        out
    }

    pub fn shifted(&self, c: &Rational) -> Barcode {
        Barcode::from_bars(
            self.finite
                .iter()
                .map(|b| FiniteBar {
                    birth: &b.birth + c,
                    death: &b.death + c,
                    ..b.clone()
                })
                .collect(),
            self.infinite
                .iter()
                .map(|b| InfiniteBar {
                    birth: &b.birth + c,
                    point: b.point,
                })
                .collect(),
        )
    }
}

/// Column reduction in filtration order; the pivot of a column is its highest generator.
pub fn barcode(complex: &FloerComplex, actions: &ActionTable) -> Result<(Barcode, JordanBasis)> {
    let m = complex.points;
    let order = &complex.order;
    let mut rank_of_point = vec![0; m];
    for (i, &p) in order.iter().enumerate() {
        rank_of_point[p] = i;
    }
    let low = |v: &Z2Vec| v.max_by_key(|p| rank_of_point[p]);

    let mut r: Vec<Z2Vec> = Vec::with_capacity(m);
    let mut v: Vec<Z2Vec> = Vec::with_capacity(m);
    // pivot generator -> column position in `order`
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for (j, &q) in order.iter().enumerate() {
        let mut col = complex.boundary_of(q).clone();
        let mut comb = Z2Vec::unit(m, q);
        while let Some(piv) = low(&col) {
            match owner[piv] {
                Some(i) => {
                    col.xor_assign(&r[i]);
                    comb.xor_assign(&v[i]);
                }
                None => {
                    owner[piv] = Some(j);
                    break;
                }
            }
        }
        r.push(col);
        v.push(comb);
    }

    let mut basis = JordanBasis {
        e: vec![],
        f: vec![],
        g: vec![],
    };
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for (j, &q) in order.iter().enumerate() {
        if let Some(piv) = low(&r[j]) {
            finite.push(FiniteBar {
                birth: actions.get(piv).clone(),
                death: actions.get(q).clone(),
                birth_point: piv,
                death_point: q,
            });
            basis.e.push(v[j].clone());
            basis.f.push(r[j].clone());
        } else if owner[q].is_none() {
            infinite.push(InfiniteBar {
                birth: actions.get(q).clone(),
                point: q,
            });
            basis.g.push(v[j].clone());
        }
    }

    let code = Barcode::from_bars(finite, infinite);
    check_barcode(&code, actions)?;
    check_jordan(complex, actions, &basis, &rank_of_point)?;
    Ok((code, basis))
}

fn check_barcode(code: &Barcode, actions: &ActionTable) -> Result<()> {
    let n = actions.len() / 2;
    if code.finite.len() + 1 != n || code.infinite.len() != 2 {
        return Err(Error::InvariantViolation(format!(
            "barcode has {} finite and {} infinite bars, expected {} and 2",
            code.finite.len(),
            code.infinite.len(),
            n.saturating_sub(1)
        )));
    }
    let mut ends: Vec<&Rational> = code
        .finite
        .iter()
        .flat_map(|b| [&b.birth, &b.death])
        .chain(code.infinite.iter().map(|b| &b.birth))
        .collect();
    ends.sort();
    let mut spectrum: Vec<&Rational> = actions.values.iter().collect();
    spectrum.sort();
    if ends != spectrum {
        return Err(Error::InvariantViolation(
            "bar endpoints differ from the action spectrum".into(),
        ));
    }
    if code.finite.iter().any(|b| b.birth >= b.death) {
        return Err(Error::InvariantViolation("finite bar of non-positive length".into()));
    }
    Ok(())
}

fn check_jordan(
    complex: &FloerComplex,
    actions: &ActionTable,
    basis: &JordanBasis,
    rank_of_point: &[usize],
) -> Result<()> {
    let fail = |s: &str| Err(Error::InvariantViolation(format!("Jordan basis: {s}")));
    let m = complex.points;
    for (e, f) in basis.e.iter().zip(&basis.f) {
        if &complex.boundary.apply(e) != f {
            return fail("∂e ≠ f");
        }
    }
    if basis.g.iter().any(|g| !complex.boundary.apply(g).is_zero()) {
        return fail("∂g ≠ 0");
    }
    // Distinct leading generators make the basis orthogonal: the leading generator of any
    // sum is the largest of its summands' leading generators.
    let mut leads = vec![false; m];
    for v in basis.e.iter().chain(&basis.f).chain(&basis.g) {
        let Some(l) = v.max_by_key(|p| rank_of_point[p]) else {
            return fail("zero basis vector");
        };
        if std::mem::replace(&mut leads[l], true) {
            return fail("two basis vectors share a leading generator");
        }
        let top = v.ones().map(|p| actions.get(p)).max().expect("nonzero");
        if top != actions.get(l) {
            return fail("leading generator does not carry the top action");
        }
    }
    if leads.iter().any(|&b| !b) {
        return fail("basis does not span");
    }
    Ok(())
}

/// Barcode from persistent ranks `rank(H(C^{≤a}) → H(C^{≤b}))`, by inclusion–exclusion.
pub fn barcode_rank_oracle(complex: &FloerComplex, actions: &ActionTable) -> Barcode {
    let m = complex.points;
    let mut levels: Vec<Rational> = actions.values.clone();
    levels.sort();
    levels.dedup();
    let k = levels.len();
    let below = |lvl: &Rational| -> Vec<usize> { (0..m).filter(|&p| actions.get(p) <= lvl).collect() };

    // cycles[i], boundaries[i] for the sublevel set at levels[i].
    let mut cycles = Vec::with_capacity(k);
    let mut boundaries = Vec::with_capacity(k);
    for lvl in &levels {
        let gens = below(lvl);
        let cols: Vec<Z2Vec> = gens.iter().map(|&p| complex.boundary_of(p).clone()).collect();
        let z: Vec<Z2Vec> = kernel_basis(&cols)
            .into_iter()
            .map(|c| Z2Vec::from_indices(m, c.ones().map(|i| gens[i])))
            .collect();
        cycles.push(z);
        boundaries.push(cols);
    }
    // r[i][j] for i <= j, with index 0 meaning the empty level.
    let rank = |i: usize, j: usize| -> i64 {
        if i == 0 {
            return 0;
        }
        let z = &cycles[i - 1];
        let b = &boundaries[j - 1];
        let dz = z.len() as i64;
        let db = rank_of(b.clone()) as i64;
        let dsum = rank_of(z.iter().chain(b).cloned().collect()) as i64;
        dz - (dz + db - dsum)
    };
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for i in 1..=k {
        for j in i + 1..=k {
            let mu = rank(i, j - 1) - rank(i - 1, j - 1) - rank(i, j) + rank(i - 1, j);
            for _ in 0..mu.max(0) {
                finite.push(FiniteBar {
                    birth: levels[i - 1].clone(),
                    death: levels[j - 1].clone(),
                    birth_point: usize::MAX,
                    death_point: usize::MAX,
                });
            }
        }
        let mu = rank(i, k) - rank(i - 1, k);
        for _ in 0..mu.max(0) {
            infinite.push(InfiniteBar {
                birth: levels[i - 1].clone(),
                point: usize::MAX,
            });
        }
    }
    Barcode::from_bars(finite, infinite)
}

pub fn bar_stats(b: &Barcode) -> BarStats {
    BarStats {
        betas: b.betas.clone(),
        gamma: b.gamma.clone(),
        beta_min: b.betas.last().cloned(),
    }
}

/// One side of a matched pair: a bar index or the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchEnd {
    Finite(usize),
    Infinite(usize),
    Diagonal,
}

/// Bars of `b1` matched to bars of `b2`; bars absent from the list are matched to the diagonal.
pub type Matching = Vec<(MatchEnd, MatchEnd)>;

/// Decides whether a δ-matching between `b1` and `b2` exists.
///
/// Matched bars move each endpoint by at most δ, infinite bars match infinite bars, and
/// every unmatched bar has length at most 2δ.
pub fn delta_matching_exists(b1: &Barcode, b2: &Barcode, delta: &Rational) -> (bool, Option<Matching>) {
    let bars = |b: &Barcode| -> Vec<(MatchEnd, Rational, Option<Rational>)> {
        b.finite
            .iter()
            .enumerate()
            .map(|(i, x)| (MatchEnd::Finite(i), x.birth.clone(), Some(x.death.clone())))
            .chain(
                b.infinite
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (MatchEnd::Infinite(i), x.birth.clone(), None)),
            )
            .collect()
    };
    let (l, r) = (bars(b1), bars(b2));
    let (nl, nr) = (l.len(), r.len());
    let two_delta = delta + delta;
    let short = |x: &(MatchEnd, Rational, Option<Rational>)| x.2.as_ref().is_some_and(|d| d - &x.1 <= two_delta);
    let close = |a: &Rational, b: &Rational| (a - b).abs() <= *delta;
    // Left vertices: bars of b1, then diagonal copies of bars of b2. Right: bars of b2,
    // then diagonal copies of bars of b1.
    let size = nl + nr;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, x) in l.iter().enumerate() {
        for (j, y) in r.iter().enumerate() {
            let ok = match (&x.2, &y.2) {
                (Some(d1), Some(d2)) => close(&x.1, &y.1) && close(d1, d2),
                (None, None) => close(&x.1, &y.1),
                _ => false,
            };
            if ok {
                adj[i].push(j);
            }
        }
        if short(&l[i]) {
            adj[i].push(nr + i);
        }
    }
    for j in 0..nr {
        if short(&r[j]) {
            adj[nl + j].push(j);
        }
        adj[nl + j].extend(nr..nr + nl);
    }

    let mut match_r: Vec<Option<usize>> = vec![None; size];
    for u in 0..size {
        let mut seen = vec![false; size];
        if !augment(u, &adj, &mut match_r, &mut seen) {
            return (false, None);
        }
    }
    let mut pairs: Matching = Vec::new();
    for (j, u) in match_r.iter().enumerate() {
        let u = u.expect("perfect matching");
        if u < nl && j < nr {
            pairs.push((l[u].0, r[j].0));
        } else if u < nl {
            pairs.push((l[u].0, MatchEnd::Diagonal));
        } else if j < nr {
            pairs.push((MatchEnd::Diagonal, r[j].0));
        }
    }
    pairs.sort_by_key(|&(a, b)| (a != MatchEnd::Diagonal, format!("{a:?}{b:?}")));
    (true, Some(pairs))
}

fn augment(u: usize, adj: &[Vec<usize>], match_r: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if match_r[v].is_none_or(|w| augment(w, adj, match_r, seen)) {
            match_r[v] = Some(u);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::action_table;
    use crate::arrangement::reconstruct_arrangement;
    use crate::fixtures;
    use crate::lunes::differential;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn zigzag_code() -> (Barcode, JordanBasis, FloerComplex, ActionTable) {
        let arr = reconstruct_arrangement(&fixtures::zigzag()).unwrap();
        let t = action_table(&arr).unwrap();
        let c = differential(&arr, &t, 3).unwrap();
        let (b, j) = barcode(&c, &t).unwrap();
        (b, j, c, t)
    }

    #[test]
    fn zigzag_barcode() {
        let (b, j, c, t) = zigzag_code();
        assert_eq!(b.intervals(), vec![(r(-1), None), (r(0), Some(r(1))), (r(2), None)]);
        assert_eq!(b.betas, vec![r(1)]);
        assert_eq!(b.gamma, r(3));
        assert_eq!(j.e, vec![Z2Vec::unit(4, 1)]);
        assert_eq!(j.g[1], Z2Vec::from_indices(4, [1, 3]));
        assert_eq!(barcode_rank_oracle(&c, &t).intervals(), b.intervals());
        let s = bar_stats(&b);
        assert_eq!(s.beta_min, Some(r(1)));
    }

    #[test]
    fn base_barcode() {
        let arr = reconstruct_arrangement(&fixtures::base(r(1))).unwrap();
        let t = action_table(&arr).unwrap();
        let c = differential(&arr, &t, 3).unwrap();
        let (b, _) = barcode(&c, &t).unwrap();
        assert_eq!(b.intervals(), vec![(r(0), None), (r(1), None)]);
        assert_eq!(b.gamma, r(1));
        assert_eq!(bar_stats(&b).beta_min, None);
    }

    #[test]
    fn gauge_invariance() {
        let (b, _, c, t) = zigzag_code();
        let t5 = t.shifted(&r(5));
        let (b5, _) = barcode(&c, &t5).unwrap();
        assert_eq!(b5, b.shifted(&r(5)));
        assert_eq!((b5.betas, b5.gamma), (b.betas, b.gamma));
    }

    #[test]
    fn matching_basics() {
        let (b, ..) = zigzag_code();
        assert!(delta_matching_exists(&b, &b, &Rational::zero()).0);
        // Shift one infinite bar by 2: gamma changes by 2 > 2 * (1/2).
        let mut moved = b.clone();
        moved.infinite[1].birth = r(4);
        assert!(!delta_matching_exists(&b, &moved, &Rational::new(1, 2)).0);
        assert!(delta_matching_exists(&b, &moved, &r(2)).0);
        // Dropping the finite bar [0,1) needs 2δ >= 1.
        let mut dropped = b.clone();
        dropped.finite.clear();
        assert!(!delta_matching_exists(&b, &dropped, &Rational::new(1, 3)).0);
        let (ok, m) = delta_matching_exists(&b, &dropped, &Rational::new(1, 2));
        assert!(ok);
        assert!(m.unwrap().contains(&(MatchEnd::Finite(0), MatchEnd::Diagonal)));
    }
}
