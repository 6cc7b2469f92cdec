//! Dense linear algebra over Z/2.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Z2Vec {
    len: usize,
    words: Vec<u64>,
}

impl Z2Vec {
    pub fn zeros(len: usize) -> Self {
        Z2Vec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        if self.get(i) != b {
            self.flip(i);
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Z2Vec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Largest set index under `key` (ties: first maximal in index order).
    pub fn max_by_key<K: Ord>(&self, key: impl Fn(usize) -> K) -> Option<usize> {
        let mut best: Option<(K, usize)> = None;
        for i in self.ones() {
            let k = key(i);
            if best.as_ref().is_none_or(|(bk, _)| k > *bk) {
                best = Some((k, i));
            }
        }
        best.map(|(_, i)| i)
    }
}

impl fmt::Debug for Z2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A matrix stored by columns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Z2Matrix {
    pub rows: usize,
    pub cols: Vec<Z2Vec>,
}

impl Z2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Z2Matrix {
            rows,
            cols: vec![Z2Vec::zeros(rows); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Z2Matrix {
            rows: n,
            cols: (0..n).map(|i| Z2Vec::unit(n, i)).collect(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cols[c].get(r)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.cols[c].set(r, b)
    }

    pub fn apply(&self, v: &Z2Vec) -> Z2Vec {
        let mut out = Z2Vec::zeros(self.rows);
        for c in v.ones() {
            out.xor_assign(&self.cols[c]);
        }
        out
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &Z2Matrix) -> Z2Matrix {
        assert_eq!(self.ncols(), rhs.rows, "shape mismatch");
        Z2Matrix {
            rows: self.rows,
            cols: rhs.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn add(&self, rhs: &Z2Matrix) -> Z2Matrix {
        assert_eq!((self.rows, self.ncols()), (rhs.rows, rhs.ncols()), "shape mismatch");
        let mut out = self.clone();
        for (a, b) in out.cols.iter_mut().zip(&rhs.cols) {
            a.xor_assign(b);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Z2Vec::is_zero)
    }

    pub fn rank(&self) -> usize {
        rank_of(self.cols.clone())
    }
}

/// Rank of the span of `vectors`.
pub fn rank_of(mut vectors: Vec<Z2Vec>) -> usize {
    let mut rank = 0;
    let len = vectors.first().map_or(0, Z2Vec::len);
    for bit in 0..len {
        let Some(p) = (rank..vectors.len()).find(|&i| vectors[i].get(bit)) else {
            continue;
        };
        vectors.swap(rank, p);
        let pivot = vectors[rank].clone();
        for v in vectors.iter_mut().skip(rank + 1) {
            if v.get(bit) {
                v.xor_assign(&pivot);
            }
        }
        rank += 1;
    }
    rank
}

/// A basis of the kernel of the linear map whose columns are `cols` (vectors in `Z2^cols.len()`).
pub fn kernel_basis(cols: &[Z2Vec]) -> Vec<Z2Vec> {
    let n = cols.len();
    // Reduce [cols ; identity] column-wise; columns reduced to zero in the top part give the kernel.
    let mut work: Vec<(Z2Vec, Z2Vec)> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), Z2Vec::unit(n, i)))
        .collect();
    let rows = cols.first().map_or(0, Z2Vec::len);
    let mut used = vec![false; n];
    for bit in 0..rows {
        let Some(p) = (0..n).find(|&i| !used[i] && work[i].0.get(bit)) else {
            continue;
        };
        used[p] = true;
        let pivot = work[p].clone();
        for (i, w) in work.iter_mut().enumerate() {
            if i != p && w.0.get(bit) {
                w.0.xor_assign(&pivot.0);
                w.1.xor_assign(&pivot.1);
            }
        }
    }
    work.into_iter()
        .zip(used)
        .filter(|((top, _), u)| !u && top.is_zero())
        .map(|((_, comb), _)| comb)
        .collect()
}
