//! The Weyl algebra in one or two variables.
//!
//! Operators are stored in normal order, all `x` to the left of all `∂`.
//! Weight-order Gröbner bases are computed in the homogenized algebra
//! (`∂x·x = x·∂x + h²`) and dehomogenized afterwards.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{fmt_terms, parse_with, Mono, Parseable, Poly, Rat, Vars};

/// Exponents `(x1, x2, ∂1, ∂2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Exp(pub [u16; 4]);

impl Exp {
    pub const ONE: Exp = Exp([0; 4]);

    pub fn new(x: [u16; 2], d: [u16; 2]) -> Exp {
        Exp([x[0], x[1], d[0], d[1]])
    }

    pub fn x(&self) -> [u16; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn d(&self) -> [u16; 2] {
        [self.0[2], self.0[3]]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn d_degree(&self) -> u32 {
        self.0[2] as u32 + self.0[3] as u32
    }

    pub fn divides(&self, other: &Exp) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other − self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Exp) -> Exp {
        let mut e = other.0;
        for (a, b) in e.iter_mut().zip(self.0.iter()) {
            *a -= b;
        }
        Exp(e)
    }

    pub fn lcm(&self, other: &Exp) -> Exp {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a = (*a).max(*b);
        }
        Exp(e)
    }
}

impl Ord for Exp {
    /// Graded reverse lex with `x1 > x2 > ∂1 > ∂2`.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `k!·C(b,k)·C(c,k)`: coefficient of `x^{c-k} ∂^{b-k}` in `∂^b x^c`.
fn commute_coeff(b: u16, c: u16, k: u16) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r *= BigInt::from(b - i);
    }
    r * num_integer::binomial(BigInt::from(c), BigInt::from(k))
}

/// Normal-ordered product of two monomials.
pub(crate) fn mono_product(a: &Exp, b: &Exp) -> Vec<(Exp, BigInt)> {
    let k0max = a.0[2].min(b.0[0]);
    let k1max = a.0[3].min(b.0[1]);
    let mut out = Vec::with_capacity((k0max as usize + 1) * (k1max as usize + 1));
    for k0 in 0..=k0max {
        let c0 = commute_coeff(a.0[2], b.0[0], k0);
        for k1 in 0..=k1max {
            let c1 = commute_coeff(a.0[3], b.0[1], k1);
            let e = Exp([
                a.0[0] + b.0[0] - k0,
                a.0[1] + b.0[1] - k1,
                a.0[2] + b.0[2] - k0,
                a.0[3] + b.0[3] - k1,
            ]);
            out.push((e, &c0 * &c1));
        }
    }
    out
}

/// Weight on `(x1, x2, ∂1, ∂2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub u: [i32; 2],
    pub v: [i32; 2],
}

impl WeightVector {
    /// `(1,…,1,−1,…,−1)` in `nvars` variables.
    pub fn integration(nvars: usize) -> Self {
        match nvars {
            1 => WeightVector { u: [1, 0], v: [-1, 0] },
            _ => WeightVector { u: [1, 1], v: [-1, -1] },
        }
    }

    pub fn weight(&self, e: &Exp) -> i32 {
        self.u[0] * e.0[0] as i32
            + self.u[1] * e.0[1] as i32
            + self.v[0] * e.0[2] as i32
            + self.v[1] * e.0[3] as i32
    }
}

/// Element `Σ c·x^α ∂^β` of the Weyl algebra in one or two variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeylOp {
    nvars: usize,
    terms: BTreeMap<Exp, Rat>,
}

pub fn poly_vars(nvars: usize) -> Vars {
    match nvars {
        1 => Vars::new(&["x"]),
        _ => Vars::xy(),
    }
}

impl WeylOp {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars == 1 || nvars == 2, "Weyl algebra in 1 or 2 variables");
        WeylOp {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(nvars, Exp::ONE, c)
    }

    pub fn monomial(nvars: usize, e: Exp, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(e, c);
        p
    }

    pub fn x(nvars: usize, i: usize) -> Self {
        let mut e = Exp::ONE;
        e.0[i] = 1;
        Self::monomial(nvars, e, Rat::one())
    }

    pub fn d(nvars: usize, i: usize) -> Self {
        let mut e = Exp::ONE;
        e.0[2 + i] = 1;
        Self::monomial(nvars, e, Rat::one())
    }

    pub fn from_poly(p: &Poly) -> Self {
        let n = p.nvars();
        let mut out = Self::zero(n);
        for (m, c) in p.terms() {
            out.add_term(Exp::new([m.0[0], if n > 1 { m.0[1] } else { 0 }], [0, 0]), c.clone());
        }
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, Rat)>>(nvars: usize, it: I) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    /// Parses an operator written with `x`, `y`, `dx`, `dy`; products are taken in the written order.
    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        parse_with(text, &WeylOp::zero(nvars))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exp) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, e: Exp, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
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

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        WeylOp {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect(),
        }
    }

    /// Order in `∂`.
    pub fn d_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exp::d_degree).max()
    }

    /// `ord_w`: largest weight of a term; `None` for zero.
    pub fn ord(&self, w: &WeightVector) -> Option<i32> {
        self.terms.keys().map(|e| w.weight(e)).max()
    }

    /// Terms of maximal weight.
    pub fn initial(&self, w: &WeightVector) -> Self {
        let Some(top) = self.ord(w) else {
            return self.clone();
        };
        WeylOp {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| w.weight(e) == top)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn is_w_homogeneous(&self, w: &WeightVector) -> bool {
        let mut ws = self.terms.keys().map(|e| w.weight(e));
        match ws.next() {
            None => true,
            Some(a) => ws.all(|b| b == a),
        }
    }

    /// Polynomial coefficients `a_β` of `Σ a_β(x) ∂^β`.
    pub fn d_coeffs(&self) -> BTreeMap<[u16; 2], Poly> {
        let vars = poly_vars(self.nvars);
        let mut out: BTreeMap<[u16; 2], Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let x = e.x();
            out.entry(e.d())
                .or_insert_with(|| Poly::zero(&vars))
                .add_term(Mono([x[0], x[1], 0]), c.clone());
        }
        out
    }

    /// `Σ a_β(x) ∂^β` from its coefficients.
    pub fn from_d_coeffs(nvars: usize, coeffs: &BTreeMap<[u16; 2], Poly>) -> Self {
        let mut out = Self::zero(nvars);
        for (b, p) in coeffs {
            for (m, c) in p.terms() {
                out.add_term(Exp::new([m.0[0], m.0[1]], *b), c.clone());
            }
        }
        out
    }

    /// The polynomial part, when the operator has no `∂`.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.d_degree().unwrap_or(0) > 0 {
            return None;
        }
        Some(self.d_coeffs().remove(&[0, 0]).unwrap_or_else(|| Poly::zero(&poly_vars(self.nvars))))
    }

    /// Rewrites in `∂`-left order: key `e` with value `c` stands for `c·∂^{e.d} x^{e.x}`.
    pub fn to_d_left(&self) -> BTreeMap<Exp, Rat> {
        let mut out: BTreeMap<Exp, Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            // x^a ∂^b = Σ_k (−1)^k k! C(a,k) C(b,k) ∂^{b−k} x^{a−k}, per variable
            let (a, b) = (e.x(), e.d());
            for k0 in 0..=a[0].min(b[0]) {
                let c0 = commute_coeff(b[0], a[0], k0);
                for k1 in 0..=a[1].min(b[1]) {
                    let c1 = commute_coeff(b[1], a[1], k1);
                    let mut v = c * Rat::from_integer(&c0 * &c1);
                    if (k0 + k1) % 2 == 1 {
                        v = -v;
                    }
                    let key = Exp::new([a[0] - k0, a[1] - k1], [b[0] - k0, b[1] - k1]);
                    let slot = out.entry(key).or_insert_with(Rat::zero);
                    *slot += v;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Inverse of [`WeylOp::to_d_left`].
    pub fn from_d_left(nvars: usize, terms: &BTreeMap<Exp, Rat>) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in terms {
            for (p, k) in mono_product(&Exp::new([0, 0], e.d()), &Exp::new(e.x(), [0, 0])) {
                out.add_term(p, c * Rat::from_integer(k));
            }
        }
        out
    }

    /// Formal adjoint: the anti-automorphism fixing `x` and sending `∂` to `−∂`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let sign = if e.d_degree() % 2 == 1 { -c.clone() } else { c.clone() };
            for (p, k) in mono_product(&Exp::new([0, 0], e.d()), &Exp::new(e.x(), [0, 0])) {
                out.add_term(p, &sign * Rat::from_integer(k));
            }
        }
        out
    }

    /// Natural action on polynomials.
    pub fn apply(&self, g: &Poly) -> Poly {
        let vars = g.vars().clone();
        let mut out = Poly::zero(&vars);
        let mut cache: BTreeMap<[u16; 2], Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let b = e.d();
            let dg = cache
                .entry(b)
                .or_insert_with(|| {
                    let mut h = g.clone();
                    for _ in 0..b[0] {
                        h = h.derive_index(0);
                    }
                    for _ in 0..b[1] {
                        h = h.derive_index(1);
                    }
                    h
                })
                .clone();
            let x = e.x();
            out = out + dg.mul_mono(&Mono([x[0], x[1], 0]), c);
        }
        out
    }

    /// Class in `D/(∂x·D + ∂y·D)`, realized as `adjoint(P)·1`.
    pub fn class_in_omega(&self) -> Poly {
        self.adjoint().apply(&Poly::one(&poly_vars(self.nvars)))
    }

    fn mul_impl(&self, rhs: &WeylOp) -> WeylOp {
        assert_eq!(self.nvars, rhs.nvars, "operators in different algebras");
        let mut out = WeylOp::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let c = ca * cb;
                for (e, k) in mono_product(a, b) {
                    out.add_term(e, &c * Rat::from_integer(k));
                }
            }
        }
        out
    }

    /// `[self, rhs] = self·rhs − rhs·self`
    pub fn commutator(&self, rhs: &WeylOp) -> WeylOp {
        &(self * rhs) - &(rhs * self)
    }

    pub fn pow(&self, k: u32) -> WeylOp {
        let mut out = WeylOp::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl<'a> Add<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn add(self, rhs: &WeylOp) -> WeylOp {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn sub(self, rhs: &WeylOp) -> WeylOp {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn mul(self, rhs: &WeylOp) -> WeylOp {
        self.mul_impl(rhs)
    }
}

impl Neg for &WeylOp {
    type Output = WeylOp;
    fn neg(self) -> WeylOp {
        self.scale(&-Rat::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<WeylOp> for WeylOp {
            type Output = WeylOp;
            fn $f(self, rhs: WeylOp) -> WeylOp {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for WeylOp {
    type Output = WeylOp;
    fn neg(self) -> WeylOp {
        -&self
    }
}

impl Parseable for WeylOp {
    fn constant(&self, c: Rat) -> Self {
        WeylOp::constant(self.nvars, c)
    }
    fn variable(&self, name: &str) -> Result<Self> {
        let n = self.nvars;
        match (name, n) {
            ("x", _) => Ok(WeylOp::x(n, 0)),
            ("dx", _) => Ok(WeylOp::d(n, 0)),
            ("y", 2) => Ok(WeylOp::x(n, 1)),
            ("dy", 2) => Ok(WeylOp::d(n, 1)),
            _ => Err(Error::UnknownVariable(name.to_string())),
        }
    }
    fn p_add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn p_sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn p_mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn p_neg(&self) -> Self {
        -self
    }
    fn p_pow(&self, e: u32) -> Self {
        self.pow(e)
    }
}

fn fmt_exp(e: &Exp) -> String {
    let names = ["x", "y", "dx", "dy"];
    let mut parts = Vec::new();
    for (i, name) in names.iter().enumerate() {
        match e.0[i] {
            0 => {}
            1 => parts.push(name.to_string()),
            k => parts.push(format!("{name}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, self.terms.iter().rev().map(|(e, c)| (fmt_exp(e), c)))
    }
}

impl fmt::Debug for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylOp({})", self)
    }
}

// ---------------------------------------------------------------------------
// Gröbner bases for weight orders

type Key = (i32, Exp);

/// Homogeneous element of the homogenized Weyl algebra. The `h` exponent of a
/// term is `deg − |e|` and is left implicit.
#[derive(Clone, Debug, PartialEq)]
struct HElem {
    deg: u32,
    terms: BTreeMap<Key, Rat>,
}

impl HElem {
    fn lead(&self) -> (&Key, &Rat) {
        self.terms.iter().next_back().unwrap()
    }

    fn lead_h(&self) -> u32 {
        self.deg - self.lead().0 .1.degree()
    }

    fn monic(mut self) -> Self {
        let inv = self.lead().1.recip();
        if !inv.is_one() {
            for v in self.terms.values_mut() {
                *v *= &inv;
            }
        }
        self
    }
}

struct Engine {
    w: WeightVector,
}

impl Engine {
    fn homogenize(&self, p: &WeylOp) -> HElem {
        let deg = p.terms.keys().map(Exp::degree).max().unwrap_or(0);
        HElem {
            deg,
            terms: p.terms.iter().map(|(e, c)| ((self.w.weight(e), *e), c.clone())).collect(),
        }
    }

    /// `acc += c · u · g` (left multiplication by the monomial `u`).
    fn add_left_multiple(&self, acc: &mut BTreeMap<Key, Rat>, c: &Rat, u: &Exp, g: &BTreeMap<Key, Rat>) {
        for ((_, e), a) in g {
            let ca = c * a;
            for (p, k) in mono_product(u, e) {
                let v = if k.is_one() { ca.clone() } else { &ca * Rat::from_integer(k) };
                let key = (self.w.weight(&p), p);
                use std::collections::btree_map::Entry;
                match acc.entry(key) {
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

    fn find_reducer<'a>(&self, e: &Exp, h: u32, basis: &'a [HElem]) -> Option<&'a HElem> {
        basis.iter().find(|g| g.lead().0 .1.divides(e) && g.lead_h() <= h)
    }

    /// Full reduction in the homogenized algebra by a monic basis.
    fn reduce(&self, mut p: HElem, basis: &[HElem]) -> HElem {
        let mut rem = BTreeMap::new();
        while let Some((k, c)) = p.terms.pop_last() {
            let h = p.deg - k.1.degree();
            match self.find_reducer(&k.1, h, basis) {
                Some(g) => {
                    let u = g.lead().0 .1.quotient_of(&k.1);
                    p.terms.insert(k, c.clone());
                    self.add_left_multiple(&mut p.terms, &-c, &u, &g.terms);
                    debug_assert!(!p.terms.contains_key(&k));
                }
                None => {
                    rem.insert(k, c);
                }
            }
        }
        HElem { deg: p.deg, terms: rem }
    }

    fn pair_lcm(&self, a: &HElem, b: &HElem) -> (Exp, u32) {
        let l = a.lead().0 .1.lcm(&b.lead().0 .1);
        (l, a.lead_h().max(b.lead_h()))
    }

    fn spoly(&self, a: &HElem, b: &HElem) -> HElem {
        let (l, hl) = self.pair_lcm(a, b);
        let mut terms = BTreeMap::new();
        let ua = a.lead().0 .1.quotient_of(&l);
        let ub = b.lead().0 .1.quotient_of(&l);
        self.add_left_multiple(&mut terms, &a.lead().1.recip(), &ua, &a.terms);
        self.add_left_multiple(&mut terms, &-b.lead().1.recip(), &ub, &b.terms);
        HElem {
            deg: l.degree() + hl,
            terms,
        }
    }

    fn divides_lcm(&self, g: &HElem, l: &(Exp, u32)) -> bool {
        g.lead().0 .1.divides(&l.0) && g.lead_h() <= l.1
    }

    fn buchberger(&self, gens: &[WeylOp]) -> Vec<HElem> {
        let mut g: Vec<HElem> = Vec::new();
        let mut queue: BTreeSet<(u32, Key, usize, usize)> = BTreeSet::new();
        let mut pending: HashSet<(usize, usize)> = HashSet::new();
        let push = |g: &mut Vec<HElem>,
                    queue: &mut BTreeSet<(u32, Key, usize, usize)>,
                    pending: &mut HashSet<(usize, usize)>,
                    e: HElem| {
            let j = g.len();
            for (i, gi) in g.iter().enumerate() {
                let (l, hl) = self.pair_lcm(gi, &e);
                queue.insert((l.degree() + hl, (self.w.weight(&l), l), i, j));
                pending.insert((i, j));
            }
            g.push(e);
        };
        let mut input: Vec<HElem> = gens.iter().filter(|p| !p.is_zero()).map(|p| self.homogenize(p)).collect();
        input.sort_by_key(|e| e.deg);
        for e in input {
            let r = self.reduce(e, &g);
            if !r.terms.is_empty() {
                push(&mut g, &mut queue, &mut pending, r.monic());
            }
        }
        while let Some((_, _, i, j)) = queue.pop_first() {
            pending.remove(&(i, j));
            let l = self.pair_lcm(&g[i], &g[j]);
            let chain = (0..g.len()).any(|k| {
                k != i
                    && k != j
                    && self.divides_lcm(&g[k], &l)
                    && !pending.contains(&(i.min(k), i.max(k)))
                    && !pending.contains(&(j.min(k), j.max(k)))
            });
            if chain {
                continue;
            }
            let s = self.spoly(&g[i], &g[j]);
            let r = self.reduce(s, &g);
            if !r.terms.is_empty() {
                push(&mut g, &mut queue, &mut pending, r.monic());
            }
        }
        // drop members whose lead is divisible by another lead
        let mut keep = Vec::new();
        for (i, e) in g.iter().enumerate() {
            let redundant = g.iter().enumerate().any(|(j, o)| {
                j != i
                    && o.lead().0 .1.divides(&e.lead().0 .1)
                    && o.lead_h() <= e.lead_h()
                    && (o.lead().0 != e.lead().0 || o.lead_h() != e.lead_h() || j < i)
            });
            if !redundant {
                keep.push(e.clone());
            }
        }
        keep
    }

    /// Reduction of a `w`-homogeneous operator by `w`-homogeneous monic operators in `D`.
    fn reduce_plain(&self, p: &WeylOp, basis: &[BTreeMap<Key, Rat>]) -> WeylOp {
        let mut acc: BTreeMap<Key, Rat> = p.terms.iter().map(|(e, c)| ((self.w.weight(e), *e), c.clone())).collect();
        let mut rem = BTreeMap::new();
        while let Some((k, c)) = acc.pop_last() {
            let reducer = basis.iter().find(|g| g.iter().next_back().unwrap().0 .1.divides(&k.1));
            match reducer {
                Some(g) => {
                    let u = g.iter().next_back().unwrap().0 .1.quotient_of(&k.1);
                    acc.insert(k, c.clone());
                    self.add_left_multiple(&mut acc, &-c, &u, g);
                }
                None => {
                    rem.insert(k.1, c);
                }
            }
        }
        WeylOp {
            nvars: p.nvars,
            terms: rem,
        }
    }
}

/// Gröbner basis of a left ideal with respect to a weight vector refined by
/// `(x,∂)`-degree and graded reverse lex.
#[derive(Clone, Debug)]
pub struct WeylGb {
    nvars: usize,
    w: WeightVector,
    homog: Vec<HElem>,
    elems: Vec<WeylOp>,
    initial: Vec<WeylOp>,
}

impl WeylGb {
    /// Dehomogenized members.
    pub fn generators(&self) -> &[WeylOp] {
        &self.elems
    }

    /// Initial forms of the members; they generate `in_w` of the ideal.
    pub fn initial_forms(&self) -> &[WeylOp] {
        &self.initial
    }

    pub fn weight(&self) -> WeightVector {
        self.w
    }

    fn initial_keys(&self) -> Vec<BTreeMap<Key, Rat>> {
        let eng = Engine { w: self.w };
        self.initial
            .iter()
            .map(|p| {
                let lc = p.terms.values().next_back().unwrap().recip();
                let h = eng.homogenize(&p.scale(&lc));
                // order of the dehomogenized terms: weight, then degree, then grevlex
                h.terms
            })
            .collect()
    }

    /// Normal form of a `w`-homogeneous operator modulo `in_w` of the ideal.
    pub fn initial_normal_form(&self, p: &WeylOp) -> WeylOp {
        assert!(p.is_w_homogeneous(&self.w), "normal form needs a w-homogeneous operator");
        Engine { w: self.w }.reduce_plain(p, &self.initial_keys())
    }

    pub fn initial_contains(&self, p: &WeylOp) -> bool {
        self.initial_normal_form(p).is_zero()
    }

    /// Every S-pair of the homogenized basis reduces to zero.
    pub fn s_pairs_reduce_to_zero(&self) -> bool {
        let eng = Engine { w: self.w };
        for i in 0..self.homog.len() {
            for j in i + 1..self.homog.len() {
                let s = eng.spoly(&self.homog[i], &self.homog[j]);
                if !eng.reduce(s, &self.homog).terms.is_empty() {
                    return false;
                }
            }
        }
        true
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
}

/// Weight-order Gröbner basis of the left ideal `D·gens`.
pub fn weyl_gb(gens: &[WeylOp], w: &WeightVector) -> WeylGb {
    assert!(!gens.is_empty(), "weyl_gb needs at least one generator");
    let nvars = gens[0].nvars;
    let eng = Engine { w: *w };
    let homog = eng.buchberger(gens);
    let elems: Vec<WeylOp> = homog
        .iter()
        .map(|h| WeylOp {
            nvars,
            terms: h.terms.iter().map(|((_, e), c)| (*e, c.clone())).collect(),
        })
        .collect();
    let initial = elems.iter().map(|p| p.initial(w)).collect();
    WeylGb {
        nvars,
        w: *w,
        homog,
        elems,
        initial,
    }
}

/// Generator of `in_w(I) ∩ K[s]` with `s = −Σ u_i ∂_i x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BFunction {
    /// Monic polynomial in the variable `s`.
    pub b: Poly,
    /// Distinct integral roots, ascending.
    pub integral_roots: Vec<i64>,
    /// Largest integral root.
    pub k0: Option<i64>,
}

impl BFunction {
    pub fn max_nonnegative_root(&self) -> Option<i64> {
        self.k0.filter(|k| *k >= 0)
    }

    pub fn degree(&self) -> u32 {
        self.b.degree().unwrap_or(0)
    }
}

pub const DEFAULT_B_DEGREE_CAP: usize = 256;

/// The operator `s = −Σ u_i ∂_i x_i`.
pub fn s_operator(nvars: usize, w: &WeightVector) -> WeylOp {
    let mut s = WeylOp::zero(nvars);
    for i in 0..nvars {
        let t = &WeylOp::d(nvars, i) * &WeylOp::x(nvars, i);
        s = &s - &t.scale(&Rat::from_integer(BigInt::from(w.u[i])));
    }
    s
}

/// Integration b-function of `D·gens` for the weight `w`.
///
/// The powers of `s` are reduced modulo `in_w(I)` one at a time; the first
/// linear dependency among the normal forms gives the monic generator.
pub fn bfunction_integration(gens: &[WeylOp], w: &WeightVector) -> Result<BFunction> {
    bfunction_with_cap(gens, w, DEFAULT_B_DEGREE_CAP)
}

pub fn bfunction_with_cap(gens: &[WeylOp], w: &WeightVector, cap: usize) -> Result<BFunction> {
    let gb = weyl_gb(gens, w);
    bfunction_from_gb(&gb, cap)
}

pub fn bfunction_from_gb(gb: &WeylGb, cap: usize) -> Result<BFunction> {
    let nvars = gb.nvars;
    let svars = Vars::new(&["s"]);
    let s = s_operator(nvars, &gb.w);
    let mut index: BTreeMap<Exp, usize> = BTreeMap::new();
    let mut to_vec = |p: &WeylOp| -> Vec<(usize, Rat)> {
        let mut v: Vec<(usize, Rat)> = p
            .terms
            .iter()
            .map(|(e, c)| {
                let n = index.len();
                (*index.entry(*e).or_insert(n), c.clone())
            })
            .collect();
        v.sort_by_key(|(i, _)| *i);
        v
    };
    let mut nfs: Vec<Vec<(usize, Rat)>> = Vec::new();
    let mut echelon = crate::linalg::Echelon::new();
    let mut current = gb.initial_normal_form(&WeylOp::one(nvars));
    for _ in 0..=cap {
        let v = to_vec(&current);
        if echelon.contains(&v) {
            // solve Σ_{j<k} c_j nf_j = −nf_k
            let nrows = index.len();
            let mut rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); nrows];
            for (j, nf) in nfs.iter().enumerate() {
                for (i, c) in nf {
                    rows[*i].push((j, c.clone()));
                }
            }
            let mut rhs = vec![Rat::zero(); nrows];
            for (i, c) in &v {
                rhs[*i] = -c.clone();
            }
            let sol = crate::linalg::solve_rows(&rows, &rhs, nfs.len())
                .ok_or_else(|| Error::Internal("b-function dependency not solvable".into()))?;
            let mut coeffs = sol;
            coeffs.push(Rat::one());
            let b = Poly::from_terms(
                &svars,
                coeffs.iter().enumerate().map(|(j, c)| (Mono([j as u16, 0, 0]), c.clone())),
            );
            let integral_roots = integral_roots(&coeffs)?;
            let k0 = integral_roots.iter().copied().max();
            return Ok(BFunction {
                b,
                integral_roots,
                k0,
            });
        }
        echelon.insert(&v);
        nfs.push(v);
        current = gb.initial_normal_form(&(&s * &current));
    }
    Err(Error::NonHolonomicOrZeroB(cap))
}

fn eval_int(coeffs: &[BigInt], r: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * r + c)
}

/// Distinct integer roots of a polynomial given by rational coefficients (low to high).
pub fn integral_roots(coeffs: &[Rat]) -> Result<Vec<i64>> {
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * Rat::from_integer(den.clone())).to_integer()).collect();
    let mut roots = Vec::new();
    let m = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if m > 0 {
        roots.push(0);
    }
    let rest = &ints[m..];
    if rest.len() <= 1 {
        return Ok(roots);
    }
    // Fujiwara bound on root size for the monic polynomial
    let n = coeffs.len() - 1;
    let mut bound = 0f64;
    for (i, c) in coeffs[..n].iter().enumerate() {
        let a = (c / &coeffs[n]).to_f64().unwrap_or(f64::INFINITY).abs();
        if a > 0.0 {
            bound = bound.max(a.powf(1.0 / (n - i) as f64));
        }
    }
    let bound = (2.0 * bound * 1.001).ceil() + 1.0;
    if !bound.is_finite() || bound > 1e7 {
        return Err(Error::Internal("integral root search out of range".into()));
    }
    let a = rest[0].abs();
    let candidates: Vec<BigInt> = (1..=bound as u64)
        .map(BigInt::from)
        .filter(|d| (&a % d).is_zero())
        .collect();
    for d in candidates {
        for r in [d.clone(), -d] {
            if eval_int(rest, &r).is_zero() {
                roots.push(r.to_i64().ok_or_else(|| Error::Internal("huge integral root".into()))?);
            }
        }
    }
    roots.sort_unstable();
    roots.dedup();
    Ok(roots)
}
