//! Action values of the intersection points.
//!
//! Neighbouring points differ by `s(e_t) * W(T_{v(e_t)})`; the table is anchored at `A(s1) = 0`.
//! Only differences carry meaning.

use crate::arrangement::{check_structure, derive_trees, Arrangement, TreeView};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTable {
    pub values: Vec<Rational>,
}

impl ActionTable {
    pub fn get(&self, p: usize) -> &Rational {
        &self.values[p]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Points sorted by ascending action, ties broken by index.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].cmp(&self.values[b]).then(a.cmp(&b)));
        idx
    }

    /// Pairs `(a, b)` with `a < b` and equal action.
    pub fn ties(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.values.len() {
            for b in a + 1..self.values.len() {
                if self.values[a] == self.values[b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_generic(&self) -> bool {
        let mut v = self.values.clone();
        v.sort();
        v.windows(2).all(|w| w[0] != w[1])
    }

    pub fn shifted(&self, c: &Rational) -> ActionTable {
        ActionTable {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Whether `self - other` is constant.
    pub fn same_up_to_constant(&self, other: &ActionTable) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        let c = &self.values[0] - &other.values[0];
        self.values.iter().zip(&other.values).all(|(a, b)| a - b == c)
    }
}

pub fn defect_of(view: &TreeView) -> Rational {
    view.sign
        .iter()
        .zip(&view.subtree_weight)
        .map(|(&s, w)| if s > 0 { w.clone() } else { -w })
        .sum()
}

pub fn exactness_defect(inst: &Instance) -> Result<Rational> {
    let sk = check_structure(inst)?;
    Ok(defect_of(&derive_trees(&sk)))
}

/// Telescopes the differences from `A(s1) = 0`; assumes zero defect.
pub fn table_of(arr: &Arrangement, view: &TreeView) -> ActionTable {
    let m = arr.points();
    let mut values = Vec::with_capacity(m);
    let mut acc = Rational::zero();
    for t in 0..m {
        values.push(acc.clone());
        let w = &view.subtree_weight[t];
        if view.sign[t] > 0 {
            acc += w;
        } else {
            acc -= w;
        }
    }
    ActionTable { values }
}

pub fn action_table(arr: &Arrangement) -> Result<ActionTable> {
    let view = derive_trees(&arr.skeleton);
    let defect = defect_of(&view);
    if !defect.is_zero() {
        return Err(Error::NonExact(defect));
    }
    Ok(table_of(arr, &view))
}
