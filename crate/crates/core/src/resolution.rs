//! Weight-adapted free resolutions of `D/I` built level by level: a weight-order
//! module Gröbner basis in the homogenized Weyl algebra, then its Schreyer
//! syzygies, until the syzygies vanish.
//!
//! A term `x^α ∂^β e_i` of a level is keyed by the leading term of its image
//! `x^α ∂^β·G_i` one level down (Schreyer order), ties broken by `i`. The key
//! starts with the shifted weight, so every map is strict, and the S-pair
//! syzygies of a Gröbner basis are again a Gröbner basis for the next order.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::Rat;
use crate::weyl::{mono_product, Exp, WeightVector, WeylOp};

/// `(shifted weight, exponent of the image's leading term, position)`.
type Key = (i32, Exp, usize);

/// Homogeneous vector: every term has `|e| + h + dshift[pos] = deg`.
#[derive(Clone, Debug, PartialEq)]
struct MVec {
    deg: i32,
    terms: BTreeMap<Key, Rat>,
}

impl MVec {
    fn lead(&self) -> (&Key, &Rat) {
        self.terms.iter().next_back().unwrap()
    }
}

struct Level {
    w: WeightVector,
    wshift: Vec<i32>,
    eshift: Vec<Exp>,
    dshift: Vec<i32>,
}

fn exp_add(a: &Exp, b: &Exp) -> Exp {
    let mut e = a.0;
    for (x, y) in e.iter_mut().zip(b.0.iter()) {
        *x += y;
    }
    Exp(e)
}

impl Level {
    fn key(&self, e: Exp, pos: usize) -> Key {
        (self.w.weight(&e) + self.wshift[pos], exp_add(&e, &self.eshift[pos]), pos)
    }

    fn actual(&self, k: &Key) -> Exp {
        self.eshift[k.2].quotient_of(&k.1)
    }

    fn h_of(&self, deg: i32, k: &Key) -> i32 {
        deg - self.actual(k).degree() as i32 - self.dshift[k.2]
    }

    fn lead_h(&self, v: &MVec) -> i32 {
        self.h_of(v.deg, v.lead().0)
    }

    fn homogenize(&self, comps: &[WeylOp]) -> Option<MVec> {
        let deg = comps
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms().map(move |(e, _)| e.degree() as i32 + self.dshift[i]))
            .max()?;
        let mut terms = BTreeMap::new();
        for (i, p) in comps.iter().enumerate() {
            for (e, c) in p.terms() {
                terms.insert(self.key(*e, i), c.clone());
            }
        }
        Some(MVec { deg, terms })
    }

    fn add_left_multiple(&self, acc: &mut BTreeMap<Key, Rat>, c: &Rat, u: &Exp, g: &BTreeMap<Key, Rat>) {
        for (key, a) in g {
            let ca = c * a;
            let pos = key.2;
            for (p, k) in mono_product(u, &self.actual(key)) {
                let v = if k.is_one() { ca.clone() } else { &ca * Rat::from_integer(k) };
                use std::collections::btree_map::Entry;
                match acc.entry(self.key(p, pos)) {
                    Entry::Vacant(s) => {
                        s.insert(v);
                    }
                    Entry::Occupied(mut o) => {
                        *o.get_mut() += v;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
        }
    }

    fn divides(&self, g: &MVec, k: &Key, h: i32) -> bool {
        let l = g.lead().0;
        l.2 == k.2 && l.1.divides(&k.1) && self.lead_h(g) <= h
    }

    /// Full reduction; with `cof` the multipliers `Σ q_k` are accumulated per basis member.
    fn reduce(&self, mut p: MVec, basis: &[MVec], mut cof: Option<&mut Vec<BTreeMap<Exp, Rat>>>) -> MVec {
        let mut rem = BTreeMap::new();
        while let Some((k, c)) = p.terms.pop_last() {
            let h = self.h_of(p.deg, &k);
            match basis.iter().position(|g| self.divides(g, &k, h)) {
                Some(gi) => {
                    let g = &basis[gi];
                    let (lk, lc) = g.lead();
                    let u = lk.1.quotient_of(&k.1);
                    let q = &c / lc;
                    p.terms.insert(k, c);
                    self.add_left_multiple(&mut p.terms, &-q.clone(), &u, &g.terms);
                    if let Some(cof) = cof.as_deref_mut() {
                        let slot = cof[gi].entry(u).or_insert_with(Rat::zero);
                        *slot += q;
                        if slot.is_zero() {
                            cof[gi].remove(&u);
                        }
                    }
                }
                None => {
                    rem.insert(k, c);
                }
            }
        }
        MVec { deg: p.deg, terms: rem }
    }

    fn monic(&self, mut v: MVec) -> MVec {
        let inv = v.lead().1.recip();
        for c in v.terms.values_mut() {
            *c *= &inv;
        }
        v
    }

    fn pair_lcm(&self, a: &MVec, b: &MVec) -> (Exp, i32) {
        (a.lead().0 .1.lcm(&b.lead().0 .1), self.lead_h(a).max(self.lead_h(b)))
    }

    /// `(u_a, u_b, S)` with `S = u_a·a/lc(a) − u_b·b/lc(b)`.
    fn spoly(&self, a: &MVec, b: &MVec) -> (Exp, Exp, MVec) {
        let (l, hl) = self.pair_lcm(a, b);
        let ua = a.lead().0 .1.quotient_of(&l);
        let ub = b.lead().0 .1.quotient_of(&l);
        let mut terms = BTreeMap::new();
        self.add_left_multiple(&mut terms, &a.lead().1.recip(), &ua, &a.terms);
        self.add_left_multiple(&mut terms, &-b.lead().1.recip(), &ub, &b.terms);
        let pos = a.lead().0 .2;
        let deg = (l.degree() - self.eshift[pos].degree()) as i32 + hl + self.dshift[pos];
        (ua, ub, MVec { deg, terms })
    }

    fn buchberger(&self, input: Vec<MVec>) -> Vec<MVec> {
        let mut g: Vec<MVec> = Vec::new();
        let mut queue: BTreeSet<(i32, usize, usize)> = BTreeSet::new();
        let mut pending: HashSet<(usize, usize)> = HashSet::new();
        let mut input = input;
        input.sort_by_key(|v| v.deg);
        let push = |g: &mut Vec<MVec>, queue: &mut BTreeSet<(i32, usize, usize)>, pending: &mut HashSet<(usize, usize)>, e: MVec| {
            let j = g.len();
            for (i, gi) in g.iter().enumerate() {
                if gi.lead().0 .2 == e.lead().0 .2 {
                    let (l, hl) = self.pair_lcm(gi, &e);
                    let pos = e.lead().0 .2;
                    let deg = (l.degree() - self.eshift[pos].degree()) as i32 + hl + self.dshift[pos];
                    queue.insert((deg, i, j));
                    pending.insert((i, j));
                }
            }
            g.push(e);
        };
        for e in input {
            let r = self.reduce(e, &g, None);
            if !r.terms.is_empty() {
                push(&mut g, &mut queue, &mut pending, self.monic(r));
            }
        }
        while let Some((_, i, j)) = queue.pop_first() {
            pending.remove(&(i, j));
            let (l, hl) = self.pair_lcm(&g[i], &g[j]);
            let pos = g[i].lead().0 .2;
            let chain = (0..g.len()).any(|k| {
                k != i
                    && k != j
                    && g[k].lead().0 .2 == pos
                    && g[k].lead().0 .1.divides(&l)
                    && self.lead_h(&g[k]) <= hl
                    && !pending.contains(&(i.min(k), i.max(k)))
                    && !pending.contains(&(j.min(k), j.max(k)))
            });
            if chain {
                continue;
            }
            let (_, _, s) = self.spoly(&g[i], &g[j]);
            let r = self.reduce(s, &g, None);
            if !r.terms.is_empty() {
                push(&mut g, &mut queue, &mut pending, self.monic(r));
            }
        }
        let keep = self.minimal_leads(&g);
        // interreduce tails so the dehomogenized maps stay small
        let mut out = Vec::with_capacity(keep.len());
        for i in 0..keep.len() {
            let others: Vec<MVec> = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
            let (lk, lc) = keep[i].lead();
            let mut tail = keep[i].clone();
            tail.terms.remove(lk);
            let mut r = self.reduce(tail, &others, None);
            r.terms.insert(*lk, lc.clone());
            out.push(r);
        }
        out
    }

    /// Members whose leading monomial (with its `h` power) no other member divides.
    fn minimal_leads(&self, g: &[MVec]) -> Vec<MVec> {
        let mut keep = Vec::new();
        for (i, e) in g.iter().enumerate() {
            let (k, _) = e.lead();
            let h = self.lead_h(e);
            let redundant = g.iter().enumerate().any(|(j, o)| {
                j != i && self.divides(o, k, h) && (o.lead().0 != k || self.lead_h(o) != h || j < i)
            });
            if !redundant {
                keep.push(e.clone());
            }
        }
        keep
    }

    /// Schreyer syzygies of a Gröbner basis, as homogeneous vectors of the next level.
    fn schreyer(&self, g: &[MVec], next: &Level) -> Result<Vec<MVec>> {
        let mut out = Vec::new();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if g[i].lead().0 .2 != g[j].lead().0 .2 {
                    continue;
                }
                let (ua, ub, s) = self.spoly(&g[i], &g[j]);
                let deg = s.deg;
                let mut cof = vec![BTreeMap::new(); g.len()];
                let r = self.reduce(s, g, Some(&mut cof));
                if !r.terms.is_empty() {
                    return Err(Error::Internal("S-vector does not reduce to zero".into()));
                }
                let mut terms = BTreeMap::new();
                let mut add = |e: Exp, pos: usize, c: Rat| {
                    let slot = terms.entry(next.key(e, pos)).or_insert_with(Rat::zero);
                    *slot += c;
                };
                add(ua, i, g[i].lead().1.recip());
                add(ub, j, -g[j].lead().1.recip());
                for (k, q) in cof.into_iter().enumerate() {
                    for (u, c) in q {
                        add(u, k, -c);
                    }
                }
                terms.retain(|_, c| !c.is_zero());
                if !terms.is_empty() {
                    out.push(MVec { deg, terms });
                }
            }
        }
        Ok(out)
    }

    fn dehomogenize(&self, v: &MVec, nvars: usize, rank: usize) -> Vec<WeylOp> {
        let mut out = vec![WeylOp::zero(nvars); rank];
        for (k, c) in &v.terms {
            out[k.2].add_term(self.actual(k), c.clone());
        }
        out
    }
}

/// Free resolution `F_L → … → F_1 → F_0` with filtration shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedResolution {
    /// `shifts[k][i]`: shift of generator `i` of `F_k`.
    pub shifts: Vec<Vec<i64>>,
    /// `maps[k]`: rows are the images of the generators of `F_{k+1}` in `F_k`.
    pub maps: Vec<Vec<Vec<WeylOp>>>,
}

/// Maximal resolution length before giving up.
pub const MAX_LEVELS: usize = 10;

/// Weight-adapted resolution of `D/D·gens` with `F_0 = D[target_shift]`, pruned
/// of unit entries that join generators of equal shift.
pub fn adapted_resolution(gens: &[WeylOp], w: &WeightVector, target_shift: i64) -> Result<AdaptedResolution> {
    let nvars = gens.first().map(WeylOp::nvars).ok_or_else(|| Error::Internal("empty ideal".into()))?;
    let mut level = Level {
        w: *w,
        wshift: vec![-(target_shift as i32)],
        eshift: vec![Exp::ONE],
        dshift: vec![0],
    };
    let mut shifts = vec![vec![target_shift]];
    let mut maps = Vec::new();
    let input: Vec<MVec> = gens.iter().filter_map(|g| level.homogenize(std::slice::from_ref(g))).collect();
    let mut g = level.buchberger(input);
    for _ in 0..MAX_LEVELS {
        if g.is_empty() {
            let mut res = AdaptedResolution { shifts, maps };
            res.prune();
            return Ok(res);
        }
        let rank = level.wshift.len();
        maps.push(g.iter().map(|v| level.dehomogenize(v, nvars, rank)).collect());
        let next = Level {
            w: *w,
            wshift: g.iter().map(|v| v.lead().0 .0).collect(),
            eshift: g.iter().map(|v| v.lead().0 .1).collect(),
            dshift: g.iter().map(|v| v.deg).collect(),
        };
        shifts.push(next.wshift.iter().map(|s| -(*s as i64)).collect());
        let syz = level.schreyer(&g, &next)?;
        g = next.minimal_leads(&syz);
        level = next;
    }
    Err(Error::Internal(format!("resolution longer than {MAX_LEVELS} levels")))
}

impl AdaptedResolution {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Splits off `D[m] → D[m]` summands given by constant entries; the result is
    /// filtered homotopy equivalent, so every truncation keeps its cohomology.
    pub fn prune(&mut self) {
        loop {
            let hit = (0..self.maps.len()).find_map(|k| {
                self.maps[k].iter().enumerate().find_map(|(i, row)| {
                    row.iter().enumerate().find_map(|(j, e)| {
                        let unit = !e.is_zero() && e.as_poly().is_some_and(|p| p.is_constant());
                        (unit && self.shifts[k + 1][i] == self.shifts[k][j]).then_some((k, i, j))
                    })
                })
            });
            let Some((k, i, j)) = hit else { break };
            self.cancel(k, i, j);
        }
        while self.maps.last().is_some_and(|m| m.is_empty()) {
            self.maps.pop();
            self.shifts.pop();
        }
    }

    fn cancel(&mut self, k: usize, i: usize, j: usize) {
        let m = &self.maps[k];
        let inv = m[i][j].as_poly().unwrap().constant_term().recip();
        let pivot_row: Vec<WeylOp> = m[i].iter().map(|e| e.scale(&inv)).collect();
        let mut next = Vec::with_capacity(m.len() - 1);
        for (a, row) in m.iter().enumerate() {
            if a == i {
                continue;
            }
            let factor = row[j].clone();
            let new_row = row
                .iter()
                .zip(&pivot_row)
                .enumerate()
                .filter(|(b, _)| *b != j)
                .map(|(_, (e, p))| if factor.is_zero() { e.clone() } else { e - &(&factor * p) })
                .collect();
            next.push(new_row);
        }
        self.maps[k] = next;
        self.shifts[k + 1].remove(i);
        self.shifts[k].remove(j);
        if let Some(up) = self.maps.get_mut(k + 1) {
            for row in up.iter_mut() {
                row.remove(i);
            }
        }
        if k > 0 {
            self.maps[k - 1].remove(j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WeylOp {
        WeylOp::parse(s, 2).unwrap()
    }

    fn row_times(row: &[WeylOp], m: &[Vec<WeylOp>]) -> Vec<WeylOp> {
        let n = m[0].len();
        (0..n)
            .map(|j| {
                row.iter()
                    .zip(m)
                    .fold(WeylOp::zero(2), |acc, (c, r)| &acc + &(c * &r[j]))
            })
            .collect()
    }

    fn check(res: &AdaptedResolution) {
        let wt = WeightVector::integration(2);
        for k in 0..res.maps.len() {
            for (i, row) in res.maps[k].iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if let Some(o) = e.ord(&wt) {
                        assert!(res.shifts[k + 1][i] + o as i64 <= res.shifts[k][j]);
                    }
                }
            }
            if k + 1 < res.maps.len() {
                for row in &res.maps[k + 1] {
                    assert!(row_times(row, &res.maps[k]).iter().all(WeylOp::is_zero));
                }
            }
        }
    }

    #[test]
    fn derivatives_resolve_by_koszul() {
        let res = adapted_resolution(&[w("dx"), w("dy")], &WeightVector::integration(2), 1).unwrap();
        check(&res);
        let ranks: Vec<usize> = res.maps.iter().map(|m| m.len()).collect();
        assert_eq!(ranks, vec![2, 1]);
        assert_eq!(res.shifts, vec![vec![1], vec![2, 2], vec![3]]);
    }

    #[test]
    fn twisted_cusp_module() {
        let gens = [w("x*dx + y*dy + 3"), w("(-x^2+x*y)*dx - 2*x + y")];
        let res = adapted_resolution(&gens, &WeightVector::integration(2), 1).unwrap();
        check(&res);
        assert!(res.maps.len() >= 2);
    }

    #[test]
    fn inhomogeneous_generators() {
        // twisted ideal of a non-quasi-homogeneous curve
        let gens = [
            w("x*y^3*dx + y^4*dy - 23/6*x^2*y*dx + x*y^2*dx - 5/6*y^3*dx + 1/3*x^2*y*dy - 3*x*y^2*dy + 4/3*y^3*dy + 6*y^3 + 1/2*x^2*dx - 2*x*y*dx + 1/2*x^2*dy + 1/2*x*y*dy - 3/2*y^2*dy - 115/6*x*y + 43/6*y^2 + 5/2*x - 9*y"),
            w("4/25*x^2*y^2*dx + 4/25*x*y^3*dy - 46/75*x^3*dx - 2/25*x^2*y*dx - 8/15*x*y^2*dx + 4/75*x^3*dy - 12/25*x^2*y*dy - 2/75*x*y^2*dy - 2/5*y^3*dy + 24/25*x*y^2 - 46/15*x^2 - 22/75*x*y - 12/5*y^2"),
        ];
        let res = adapted_resolution(&gens, &WeightVector::integration(2), 1).unwrap();
        check(&res);
        let ranks: Vec<usize> = res.shifts.iter().map(Vec::len).collect();
        assert_eq!(ranks, vec![1, 3, 2]);
    }
}
