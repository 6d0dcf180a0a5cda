//! Filtered resolutions of the twisted module, their truncation at the
//! b-function bound, and cohomology of the truncated complex.
//!
//! Stages run left to right and end with `F_0 = D[1]`; stage `F_j` carries
//! cohomological degree `2 − j`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{complement_in, dense_to_sparse, SparseMatrix, SparseVec};
use crate::poly::{Mono, Poly, Rat, Vars};
use crate::resolution::adapted_resolution;
use crate::saito::LogFrame;
use crate::weyl::{WeightVector, WeylOp};

/// `F_L → … → F_1 → F_0`, maps acting by right multiplication on row vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredComplex {
    /// Shifts of the summands of each stage.
    pub shifts: Vec<Vec<i64>>,
    /// `maps[k][i][j]`: from summand `i` of stage `k` to summand `j` of stage `k+1`.
    pub maps: Vec<Vec<Vec<WeylOp>>>,
}

impl FilteredComplex {
    pub fn stages(&self) -> usize {
        self.shifts.len()
    }

    /// Stage index of `F_j`, if the complex is that long.
    pub fn stage_of(&self, j: usize) -> Option<usize> {
        self.stages().checked_sub(j + 1)
    }

    /// The map `F_{j+1} → F_j`, empty when `F_{j+1}` is absent.
    pub fn map_into(&self, j: usize) -> &[Vec<WeylOp>] {
        match self.stage_of(j + 1) {
            Some(k) => &self.maps[k],
            None => &[],
        }
    }

    /// Every pair of consecutive maps composes to zero.
    pub fn composite_is_zero(&self) -> bool {
        self.maps.windows(2).all(|w| {
            w[0].iter().all(|row| {
                (0..w[1].first().map_or(0, Vec::len)).all(|c| {
                    row.iter()
                        .zip(&w[1])
                        .fold(WeylOp::zero(2), |acc, (a, r)| &acc + &(a * &r[c]))
                        .is_zero()
                })
            })
        })
    }

    fn all_entries(&self) -> impl Iterator<Item = (usize, usize, usize, &WeylOp)> {
        self.maps.iter().enumerate().flat_map(|(k, m)| {
            m.iter()
                .enumerate()
                .flat_map(move |(i, row)| row.iter().enumerate().map(move |(j, e)| (k, i, j, e)))
        })
    }

    /// `source shift + ord_w(entry) ≤ target shift` for every entry.
    pub fn is_filtered(&self) -> bool {
        let w = WeightVector::integration(2);
        self.all_entries().all(|(k, i, j, e)| match e.ord(&w) {
            None => true,
            Some(o) => self.shifts[k][i] + o as i64 <= self.shifts[k + 1][j],
        })
    }

    /// Every entry is `w`-homogeneous of order exactly `target − source`, so
    /// the complex is graded and its filtration is strict.
    pub fn is_graded(&self) -> bool {
        let w = WeightVector::integration(2);
        self.all_entries().all(|(k, i, j, e)| {
            e.is_zero()
                || (e.is_w_homogeneous(&w) && self.shifts[k][i] + e.ord(&w).unwrap() as i64 == self.shifts[k + 1][j])
        })
    }
}

/// Spencer-type resolution built from a certified frame.
pub fn spencer_resolution(frame: &LogFrame) -> Result<FilteredComplex> {
    let w = WeightVector::integration(2);
    let ord = |p: &WeylOp| p.ord(&w).map(|o| o as i64);
    let m1 = 1 - ord(&frame.ell1).unwrap_or(0);
    let m2 = 1 - ord(&frame.ell2).unwrap_or(0);
    let e1 = &(-&frame.ell2) - &WeylOp::from_poly(&frame.b1);
    let e2 = &frame.ell1 - &WeylOp::from_poly(&frame.b2);
    let left = [ord(&e1).map(|o| m1 - o), ord(&e2).map(|o| m2 - o)]
        .into_iter()
        .flatten()
        .min()
        .ok_or_else(|| Error::Internal("zero Spencer map".into()))?;
    let c = FilteredComplex {
        shifts: vec![vec![left], vec![m1, m2], vec![1]],
        maps: vec![vec![vec![e1, e2]], vec![vec![frame.ell1.clone()], vec![frame.ell2.clone()]]],
    };
    if !c.composite_is_zero() {
        return Err(Error::Internal("Spencer maps do not compose to zero".into()));
    }
    Ok(c)
}

/// Weight-adapted resolution of `D/D(ℓ1, ℓ2)`, in stage order.
pub fn strict_resolution(frame: &LogFrame) -> Result<FilteredComplex> {
    let res = adapted_resolution(&[frame.ell1.clone(), frame.ell2.clone()], &WeightVector::integration(2), 1)?;
    let mut shifts = res.shifts;
    let mut maps = res.maps;
    shifts.reverse();
    maps.reverse();
    Ok(FilteredComplex { shifts, maps })
}

/// The Spencer complex when it is graded, otherwise a weight-adapted resolution.
pub fn filtered_resolution(frame: &LogFrame) -> Result<FilteredComplex> {
    let spencer = spencer_resolution(frame)?;
    if spencer.is_graded() {
        Ok(spencer)
    } else {
        strict_resolution(frame)
    }
}

/// Monomials `x^a y^b` with `a + b ≤ d`, graded with `x` before `y`: `1, x, y, x², xy, y², …`.
pub fn monomials_up_to(d: i64) -> Vec<Mono> {
    let mut out = Vec::new();
    for deg in 0..=d.max(-1) {
        for a in (0..=deg).rev() {
            out.push(Mono([a as u16, (deg - a) as u16, 0]));
        }
    }
    out
}

/// Finite-dimensional slice of `Ω(2) ⊗ F•`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedComplex {
    /// Degree bound `k0 − 1`, or `None` for the empty complex.
    pub bound: Option<i64>,
    /// Basis labels `(summand, monomial)` for each stage.
    pub bases: Vec<Vec<(usize, Mono)>>,
    /// `mats[k]`: stage `k` to stage `k+1`, one column per source basis vector.
    pub mats: Vec<SparseMatrix>,
    summands: Vec<usize>,
}

impl TruncatedComplex {
    pub fn stage_dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    /// Dimensions at `F_2, F_1, F_0`.
    pub fn dims(&self) -> [usize; 3] {
        [2, 1, 0].map(|j| self.stage_of(j).map_or(0, |k| self.bases[k].len()))
    }

    pub fn stage_of(&self, j: usize) -> Option<usize> {
        self.bases.len().checked_sub(j + 1)
    }

    /// Splits a vector at `F_j` into one polynomial per summand.
    pub fn to_polys(&self, j: usize, v: &SparseVec) -> Vec<Poly> {
        let vars = Vars::xy();
        let Some(k) = self.stage_of(j) else { return Vec::new() };
        let mut out = vec![Poly::zero(&vars); self.summands[k]];
        for (i, c) in v {
            let (s, m) = self.bases[k][*i];
            out[s].add_term(m, c.clone());
        }
        out
    }

    pub fn composite_is_zero(&self) -> bool {
        self.mats.windows(2).all(|w| w[1].compose(&w[0]).is_zero())
    }
}

/// Truncation at the b-function root `k0` (`None`: no integral root, empty complex).
pub fn truncate(complex: &FilteredComplex, k0: Option<i64>) -> Result<TruncatedComplex> {
    truncate_at(complex, k0.map(|k| k - 1))
}

/// Truncation keeping `x^a y^b` in a summand of shift `m` when `a + b ≤ bound + m`.
pub fn truncate_at(complex: &FilteredComplex, bound: Option<i64>) -> Result<TruncatedComplex> {
    let bases: Vec<Vec<(usize, Mono)>> = complex
        .shifts
        .iter()
        .map(|shifts| {
            let Some(b) = bound else { return Vec::new() };
            shifts
                .iter()
                .enumerate()
                .flat_map(|(s, m)| monomials_up_to(b + m).into_iter().map(move |mu| (s, mu)))
                .collect()
        })
        .collect();
    let mats = complex
        .maps
        .iter()
        .enumerate()
        .map(|(k, m)| stage_map(m, &bases[k], &bases[k + 1]))
        .collect::<Result<_>>()?;
    let summands = complex.shifts.iter().map(Vec::len).collect();
    Ok(TruncatedComplex { bound, bases, mats, summands })
}

/// Matrix of `μ ↦ class(μ · entry)` between truncated stages.
fn stage_map(entries: &[Vec<WeylOp>], src: &[(usize, Mono)], dst: &[(usize, Mono)]) -> Result<SparseMatrix> {
    let index: HashMap<(usize, Mono), usize> = dst.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let adj: Vec<Vec<WeylOp>> = entries.iter().map(|row| row.iter().map(WeylOp::adjoint).collect()).collect();
    let vars = Vars::xy();
    let mut cols = Vec::with_capacity(src.len());
    for (s, mu) in src {
        let mono = Poly::monomial(&vars, *mu, Rat::from_integer(1.into()));
        let mut col: Vec<(usize, Rat)> = Vec::new();
        for (j, a) in adj[*s].iter().enumerate() {
            // class(μ·P) = P^T(μ)
            let img = a.apply(&mono);
            for (m, c) in img.terms() {
                let i = index.get(&(j, *m)).ok_or_else(|| {
                    Error::Internal(format!("image {} of {:?} leaves the truncated stage", img, mu))
                })?;
                col.push((*i, c.clone()));
            }
        }
        col.sort_by_key(|(i, _)| *i);
        cols.push(col);
    }
    Ok(SparseMatrix {
        nrows: dst.len(),
        ncols: src.len(),
        cols,
    })
}

/// Cohomology dimensions with representative cocycles per degree.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyClasses {
    pub dims: [usize; 3],
    /// Indexed by degree; vectors live at stage `F_{2−i}`.
    pub representatives: [Vec<SparseVec>; 3],
    /// Dimensions at `F_3, F_4, …`, which vanish for an exact resolution.
    pub higher: Vec<usize>,
}

/// Kernel modulo image at each stage of the truncated complex.
pub fn cohomology(tc: &TruncatedComplex) -> CohomologyClasses {
    let n = tc.bases.len();
    let at = |k: usize| -> Vec<SparseVec> {
        let kernel = match tc.mats.get(k) {
            Some(m) => m.kernel(),
            None => (0..tc.bases[k].len()).map(|i| dense_to_sparse(&unit(tc.bases[k].len(), i))).collect(),
        };
        match k.checked_sub(1) {
            Some(prev) => complement_in(&kernel, &tc.mats[prev].cols),
            None => kernel,
        }
    };
    let mut representatives: [Vec<SparseVec>; 3] = Default::default();
    for (i, slot) in representatives.iter_mut().enumerate() {
        if let Some(k) = tc.stage_of(2 - i) {
            *slot = at(k);
        }
    }
    let higher = (0..n.saturating_sub(3)).rev().map(|k| at(k).len()).collect();
    CohomologyClasses {
        dims: [0, 1, 2].map(|i| representatives[i].len()),
        representatives,
        higher,
    }
}

fn unit(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::from_integer(0.into()); n];
    v[i] = Rat::from_integer(1.into());
    v
}
