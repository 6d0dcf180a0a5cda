//! Sparse exact linear algebra over the rationals.
//!
//! Vectors are sorted `(index, value)` lists with no stored zeros. The
//! [`Echelon`] basis keeps one row per pivot, where a row's pivot is its
//! smallest index and its pivot entry is one. Free-variable choices are
//! always zero, so results are deterministic for a fixed column order.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::Rat;

pub type SparseVec = Vec<(usize, Rat)>;

pub fn dense_to_sparse(v: &[Rat]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, a)| (i, a.clone()))
        .collect()
}

pub fn sparse_to_dense(v: &SparseVec, n: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); n];
    for (i, a) in v {
        out[*i] = a.clone();
    }
    out
}

/// `a + c·b`
pub fn axpy(a: &SparseVec, c: &Rat, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let s = &a[i].1 + c * &b[j].1;
            if !s.is_zero() {
                out.push((a[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row-echelon basis of a subspace, grown one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.rows.contains_key(&i)
    }

    pub fn row(&self, pivot: usize) -> Option<&SparseVec> {
        self.rows.get(&pivot)
    }

    /// Eliminates every pivot index from `v`.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Rat> = v.iter().cloned().collect();
        let mut cursor = 0usize;
        loop {
            let next = acc.range(cursor..).map(|(i, _)| *i).find(|i| self.rows.contains_key(i));
            let Some(i) = next else { break };
            let c = acc.remove(&i).unwrap();
            for (j, a) in self.rows[&i].iter().skip(1) {
                let e = acc.entry(*j).or_insert_with(Rat::zero);
                *e -= &c * a;
                if e.is_zero() {
                    acc.remove(j);
                }
            }
            cursor = i + 1;
        }
        acc.into_iter().collect()
    }

    /// Adds `v` to the span; returns its new pivot when it was independent.
    pub fn insert(&mut self, v: &SparseVec) -> Option<usize> {
        let r = self.reduce(v);
        let (p, lead) = r.first()?.clone();
        let inv = lead.recip();
        let row: SparseVec = r.into_iter().map(|(i, a)| (i, a * &inv)).collect();
        self.rows.insert(p, row);
        Some(p)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Solution of `Σ x_p row_p = target-part`, back-substituted with free variables zero.
    /// Columns at or beyond `ncols` are treated as right-hand sides (only `ncols` itself is read).
    fn back_substitute(&self, ncols: usize, free: Option<usize>) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); ncols];
        if let Some(j) = free {
            x[j] = Rat::one();
        }
        for (&p, row) in self.rows.iter().rev() {
            if p >= ncols {
                continue;
            }
            let mut v = Rat::zero();
            for (j, a) in row.iter().skip(1) {
                if *j < ncols {
                    if !x[*j].is_zero() {
                        v -= a * &x[*j];
                    }
                } else if *j == ncols && free.is_none() {
                    v += a;
                }
            }
            x[p] = v;
        }
        x
    }
}

/// Column-stored sparse matrix; column `j` is the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn rows(&self) -> Vec<SparseVec> {
        let mut rows = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, a) in col {
                rows[*i].push((j, a.clone()));
            }
        }
        rows
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = Vec::new();
        for (j, a) in v {
            out = axpy(&out, a, &self.cols[*j]);
        }
        out
    }

    /// `self ∘ rhs`
    pub fn compose(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, rhs.nrows);
        SparseMatrix {
            nrows: self.nrows,
            ncols: rhs.ncols,
            cols: rhs.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new();
        for c in &self.cols {
            e.insert(c);
        }
        e.rank()
    }

    /// Kernel basis in reduced-echelon form: one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::new();
        for r in self.rows() {
            e.insert(&r);
        }
        (0..self.ncols)
            .filter(|j| !e.is_pivot(*j))
            .map(|j| dense_to_sparse(&e.back_substitute(self.ncols, Some(j))))
            .collect()
    }
}

/// Solves `Σ_j x_j·column_j = rhs` where equations are given as sparse rows over
/// `ncols` unknowns. Returns the particular solution with free unknowns set to zero,
/// or `None` when the system is inconsistent.
pub fn solve_rows(rows: &[SparseVec], rhs: &[Rat], ncols: usize) -> Option<Vec<Rat>> {
    let mut e = Echelon::new();
    for (r, b) in rows.iter().zip(rhs) {
        let mut aug = r.clone();
        if !b.is_zero() {
            aug.push((ncols, b.clone()));
        }
        if e.insert(&aug) == Some(ncols) {
            return None;
        }
    }
    Some(e.back_substitute(ncols, None))
}

/// Reduced row echelon basis of the span of `rows`, listed by ascending pivot.
pub fn rref(rows: &[SparseVec]) -> Vec<SparseVec> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    let pivots: Vec<usize> = e.pivots().collect();
    let mut out: Vec<SparseVec> = pivots.iter().map(|p| e.row(*p).unwrap().clone()).collect();
    for i in (0..out.len()).rev() {
        let p = pivots[i];
        for j in 0..i {
            if let Ok(k) = out[j].binary_search_by_key(&p, |(c, _)| *c) {
                let c = -out[j][k].1.clone();
                out[j] = axpy(&out[j], &c, &out[i]);
            }
        }
    }
    out
}

/// Basis of `kernel` modulo `image`: kernel vectors (in the given order) that extend the image.
pub fn complement_in(kernel: &[SparseVec], image: &[SparseVec]) -> Vec<SparseVec> {
    let mut e = Echelon::new();
    for v in image {
        e.insert(v);
    }
    kernel
        .iter()
        .filter(|v| e.insert(v).is_some())
        .cloned()
        .collect()
}
