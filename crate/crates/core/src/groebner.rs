//! Commutative Gröbner bases for ideals and submodules of free modules over ℚ.
//!
//! Monomials within a component are compared by graded reverse lex. Module
//! terms are ordered either position-over-term (lower index larger) or
//! term-over-position with degree shifts.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Mono, Poly, Rat, Vars};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModuleOrder {
    /// Position first (component 0 largest), then grevlex.
    Pot,
    /// Shifted total degree first, then grevlex, then position.
    Top,
}

/// Element of a graded free module `⊕ R(-shift_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModVec {
    pub entries: Vec<Poly>,
    pub shifts: Vec<i32>,
}

impl ModVec {
    pub fn new(entries: Vec<Poly>, shifts: Vec<i32>) -> Self {
        assert_eq!(entries.len(), shifts.len());
        ModVec { entries, shifts }
    }

    pub fn unshifted(entries: Vec<Poly>) -> Self {
        let n = entries.len();
        ModVec::new(entries, vec![0; n])
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Degree of a homogeneous vector; `Err(NotHomogeneous)` otherwise, `Ok(None)` for zero.
    pub fn degree(&self) -> Result<Option<i32>> {
        let mut deg = None;
        for (p, s) in self.entries.iter().zip(&self.shifts) {
            if p.is_zero() {
                continue;
            }
            if !p.is_homogeneous() {
                return Err(Error::NotHomogeneous);
            }
            let d = p.degree().unwrap() as i32 + s;
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return Err(Error::NotHomogeneous),
                _ => {}
            }
        }
        Ok(deg)
    }

    /// `Σ entries_i · gens_i`
    pub fn dot(&self, gens: &[Poly]) -> Poly {
        let vars = gens[0].vars().clone();
        self.entries
            .iter()
            .zip(gens)
            .fold(Poly::zero(&vars), |acc, (a, g)| acc + a * g)
    }

    pub fn scale(&self, c: &Rat) -> ModVec {
        ModVec::new(self.entries.iter().map(|p| p.scale(c)).collect(), self.shifts.clone())
    }
}

type Key = (i64, Mono, Reverse<usize>);

#[derive(Clone, Debug, Default, PartialEq)]
struct Elem {
    terms: BTreeMap<Key, Rat>,
}

impl Elem {
    fn lead(&self) -> Option<(&Key, &Rat)> {
        self.terms.iter().next_back()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&mut self, k: Key, c: Rat) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Ctx {
    order: ModuleOrder,
    shifts: Vec<i64>,
}

impl Ctx {
    fn key(&self, pos: usize, m: Mono) -> Key {
        let primary = match self.order {
            ModuleOrder::Pot => -(pos as i64),
            ModuleOrder::Top => m.degree() as i64 + self.shifts[pos],
        };
        (primary, m, Reverse(pos))
    }

    fn to_elem(&self, v: &ModVec) -> Elem {
        let mut e = Elem::default();
        for (pos, p) in v.entries.iter().enumerate() {
            for (m, c) in p.terms() {
                e.terms.insert(self.key(pos, *m), c.clone());
            }
        }
        e
    }

    fn to_modvec(&self, e: &Elem, vars: &Vars) -> ModVec {
        let mut entries = vec![Poly::zero(vars); self.shifts.len()];
        for ((_, m, Reverse(pos)), c) in &e.terms {
            entries[*pos].add_term(*m, c.clone());
        }
        ModVec::new(entries, self.shifts.iter().map(|&s| s as i32).collect())
    }

    /// `acc += c · u · b`
    fn add_multiple(&self, acc: &mut Elem, c: &Rat, u: &Mono, b: &Elem, skip_lead: bool) {
        let n = if skip_lead { b.terms.len() - 1 } else { b.terms.len() };
        for ((_, m, Reverse(pos)), a) in b.terms.iter().take(n) {
            acc.add(self.key(*pos, m.mul(u)), c * a);
        }
    }

    fn monic(&self, mut e: Elem) -> Elem {
        if let Some((_, lc)) = e.lead() {
            if !lc.is_one() {
                let inv = lc.recip();
                for v in e.terms.values_mut() {
                    *v *= &inv;
                }
            }
        }
        e
    }

    fn find_reducer<'a>(&self, k: &Key, basis: &'a [Elem]) -> Option<&'a Elem> {
        basis.iter().find(|b| {
            let (bk, _) = b.lead().unwrap();
            bk.2 == k.2 && bk.1.divides(&k.1)
        })
    }

    /// Division by a monic basis. With `full` every term is reduced, otherwise only the lead.
    fn reduce(&self, mut p: Elem, basis: &[Elem], full: bool) -> Elem {
        let mut rem = Elem::default();
        while let Some((k, c)) = p.terms.pop_last() {
            match self.find_reducer(&k, basis) {
                Some(b) => {
                    let u = b.lead().unwrap().0 .1.quotient_of(&k.1);
                    self.add_multiple(&mut p, &-c, &u, b, true);
                }
                None => {
                    rem.terms.insert(k, c);
                    if !full {
                        break;
                    }
                }
            }
        }
        rem.terms.append(&mut p.terms);
        rem
    }

    fn spoly(&self, a: &Elem, b: &Elem) -> Option<Elem> {
        let (ka, _) = a.lead().unwrap();
        let (kb, _) = b.lead().unwrap();
        if ka.2 != kb.2 {
            return None;
        }
        let l = ka.1.lcm(&kb.1);
        let mut s = Elem::default();
        self.add_multiple(&mut s, &Rat::one(), &ka.1.quotient_of(&l), a, true);
        self.add_multiple(&mut s, &-Rat::one(), &kb.1.quotient_of(&l), b, true);
        Some(s)
    }

    fn pair_key(&self, a: &Elem, b: &Elem) -> Key {
        let (ka, _) = a.lead().unwrap();
        let (kb, _) = b.lead().unwrap();
        self.key(ka.2 .0, ka.1.lcm(&kb.1))
    }

    fn buchberger(&self, input: Vec<Elem>) -> Vec<Elem> {
        let rank1 = self.shifts.len() == 1;
        let mut g: Vec<Elem> = Vec::new();
        let mut pending: BTreeSet<(Key, usize, usize)> = BTreeSet::new();
        let add = |g: &mut Vec<Elem>, pending: &mut BTreeSet<(Key, usize, usize)>, e: Elem| {
            let j = g.len();
            for i in 0..j {
                let (ki, _) = g[i].lead().unwrap();
                let (kj, _) = e.lead().unwrap();
                if ki.2 != kj.2 {
                    continue;
                }
                pending.insert((self.pair_key(&g[i], &e), i, j));
            }
            g.push(e);
        };
        for e in input {
            let e = self.reduce(e, &g, true);
            if !e.is_zero() {
                add(&mut g, &mut pending, self.monic(e));
            }
        }
        while let Some(item) = pending.pop_first() {
            let (pk, i, j) = item;
            let (li, lj) = (g[i].lead().unwrap().0 .1, g[j].lead().unwrap().0 .1);
            // coprime leads: the pair reduces to zero for ideals
            if rank1 && li.lcm(&lj) == li.mul(&lj) {
                continue;
            }
            let chain = (0..g.len()).any(|k| {
                if k == i || k == j {
                    return false;
                }
                let (kk, _) = g[k].lead().unwrap();
                kk.2 == pk.2
                    && kk.1.divides(&pk.1)
                    && !pending.iter().any(|(_, a, b)| {
                        (*a, *b) == (i.min(k), i.max(k)) || (*a, *b) == (j.min(k), j.max(k))
                    })
            });
            if chain {
                continue;
            }
            let s = self.spoly(&g[i], &g[j]).unwrap();
            let r = self.reduce(s, &g, true);
            if !r.is_zero() {
                add(&mut g, &mut pending, self.monic(r));
            }
        }
        self.interreduce(g)
    }

    fn interreduce(&self, g: Vec<Elem>) -> Vec<Elem> {
        let mut keep: Vec<Elem> = Vec::new();
        for (i, e) in g.iter().enumerate() {
            let (ke, _) = e.lead().unwrap();
            let redundant = g.iter().enumerate().any(|(j, b)| {
                let (kb, _) = b.lead().unwrap();
                j != i && kb.2 == ke.2 && kb.1.divides(&ke.1) && (kb.1 != ke.1 || j < i)
            });
            if !redundant {
                keep.push(e.clone());
            }
        }
        let mut out = Vec::with_capacity(keep.len());
        for i in 0..keep.len() {
            let others: Vec<Elem> = keep
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| e.clone())
                .collect();
            out.push(self.monic(self.reduce(keep[i].clone(), &others, true)));
        }
        out.sort_by(|a, b| b.lead().unwrap().0.cmp(a.lead().unwrap().0));
        out
    }
}

/// Reduced Gröbner basis of a submodule (rank 1 for ideals).
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: Vars,
    ctx: Ctx,
    elems: Vec<Elem>,
}

impl GroebnerBasis {
    pub fn order(&self) -> ModuleOrder {
        self.ctx.order
    }

    pub fn rank(&self) -> usize {
        self.ctx.shifts.len()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn generators(&self) -> Vec<ModVec> {
        self.elems.iter().map(|e| self.ctx.to_modvec(e, &self.vars)).collect()
    }

    /// Members of an ideal basis as polynomials.
    pub fn polys(&self) -> Vec<Poly> {
        self.generators().into_iter().map(|v| v.entries[0].clone()).collect()
    }

    /// Leading monomials with their positions.
    pub fn leading_monomials(&self) -> Vec<(usize, Mono)> {
        self.elems
            .iter()
            .map(|e| {
                let (k, _) = e.lead().unwrap();
                (k.2 .0, k.1)
            })
            .collect()
    }

    pub fn is_unit(&self) -> bool {
        self.rank() == 1 && self.leading_monomials().iter().any(|(_, m)| *m == Mono::ONE)
    }

    pub fn normal_form(&self, v: &ModVec) -> ModVec {
        let e = self.ctx.reduce(self.ctx.to_elem(v), &self.elems, true);
        self.ctx.to_modvec(&e, &self.vars)
    }

    pub fn normal_form_poly(&self, p: &Poly) -> Poly {
        self.normal_form(&ModVec::unshifted(vec![p.clone()])).entries[0].clone()
    }

    pub fn contains(&self, v: &ModVec) -> bool {
        self.normal_form(v).is_zero()
    }

    pub fn contains_poly(&self, p: &Poly) -> bool {
        self.normal_form_poly(p).is_zero()
    }

    /// Checks that every S-vector of two members reduces to zero.
    pub fn s_pairs_reduce_to_zero(&self) -> bool {
        for i in 0..self.elems.len() {
            for j in i + 1..self.elems.len() {
                if let Some(s) = self.ctx.spoly(&self.elems[i], &self.elems[j]) {
                    if !self.ctx.reduce(s, &self.elems, true).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Reduced grevlex Gröbner basis of the ideal generated by `gens`.
pub fn buchberger(gens: &[Poly]) -> GroebnerBasis {
    let vecs: Vec<ModVec> = gens.iter().map(|p| ModVec::unshifted(vec![p.clone()])).collect();
    module_gb(&vecs, ModuleOrder::Pot)
}

/// Reduced Gröbner basis of the submodule generated by `gens`.
pub fn module_gb(gens: &[ModVec], order: ModuleOrder) -> GroebnerBasis {
    assert!(!gens.is_empty(), "module_gb needs at least one generator");
    let vars = gens
        .iter()
        .flat_map(|v| v.entries.iter())
        .next()
        .map(|p| p.vars().clone())
        .unwrap();
    let ctx = Ctx {
        order,
        shifts: gens[0].shifts.iter().map(|&s| s as i64).collect(),
    };
    let input = gens.iter().map(|v| ctx.to_elem(v)).filter(|e| !e.is_zero()).collect();
    let elems = ctx.buchberger(input);
    GroebnerBasis { vars, ctx, elems }
}

/// Generators of the syzygy module of `gens`, each satisfying `Σ v_i g_i = 0`.
///
/// Works on the augmented vectors `g_i·e_0 + e_i` under position-over-term with
/// `e_0` largest: basis members without an `e_0` component generate the syzygies.
/// Shifts of the result are the degrees of the generators, so homogeneous input
/// yields homogeneous syzygies.
pub fn syzygy_module(gens: &[Poly]) -> Vec<ModVec> {
    let n = gens.len();
    let vars = gens[0].vars().clone();
    let shifts: Vec<i32> = gens.iter().map(|g| g.degree().unwrap_or(0) as i32).collect();
    let mut aug_shifts = vec![0];
    aug_shifts.extend(&shifts);
    let aug: Vec<ModVec> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut entries = vec![Poly::zero(&vars); n + 1];
            entries[0] = g.clone();
            entries[i + 1] = Poly::one(&vars);
            ModVec::new(entries, aug_shifts.clone())
        })
        .collect();
    let gb = module_gb(&aug, ModuleOrder::Pot);
    gb.generators()
        .into_iter()
        .filter(|v| v.entries[0].is_zero())
        .map(|v| ModVec::new(v.entries[1..].to_vec(), shifts.clone()))
        .collect()
}

/// Minimal homogeneous generating set, by ascending-degree redundancy elimination.
pub fn minimalize_graded(gens: &[ModVec]) -> Result<Vec<ModVec>> {
    let mut items: Vec<(i32, usize, &ModVec)> = Vec::new();
    for (i, v) in gens.iter().enumerate() {
        if let Some(d) = v.degree()? {
            items.push((d, i, v));
        }
    }
    items.sort_by_key(|(d, i, _)| (*d, *i));
    let mut kept: Vec<ModVec> = Vec::new();
    for (_, _, v) in items {
        if !kept.is_empty() && module_gb(&kept, ModuleOrder::Pot).contains(v) {
            continue;
        }
        kept.push(v.clone());
    }
    Ok(kept)
}

/// Krull dimension of `R/(gens)`, `-1` for the unit ideal.
///
/// Computed as the largest set of variables containing no leading monomial of a
/// grevlex Gröbner basis (an independent set of the initial ideal).
pub fn krull_dim(gens: &[Poly]) -> i32 {
    let nonzero: Vec<Poly> = gens.iter().filter(|p| !p.is_zero()).cloned().collect();
    let n = match gens.first() {
        Some(p) => p.nvars(),
        None => return -1,
    };
    if nonzero.is_empty() {
        return n as i32;
    }
    let gb = buchberger(&nonzero);
    if gb.is_unit() {
        return -1;
    }
    let leads: Vec<Mono> = gb.leading_monomials().into_iter().map(|(_, m)| m).collect();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let independent = leads
            .iter()
            .all(|m| (0..n).any(|v| m.0[v] > 0 && mask & (1 << v) == 0));
        if independent {
            best = best.max(mask.count_ones() as i32);
        }
    }
    best
}
