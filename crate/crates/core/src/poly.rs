//! Exact multivariate polynomials over the rationals.
//!
//! A [`Poly`] carries its ordered variable list and a sparse map from
//! exponent vectors to nonzero rational coefficients. At most three
//! variables are supported (`x`, `y` and a homogenizing `t`, or a single
//! auxiliary symbol such as `s`). Terms are kept in graded reverse
//! lexicographic order with the first variable largest, which is also the
//! canonical printing order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Always in lowest terms with a positive denominator.
pub type Rat = BigRational;

pub const MAX_VARS: usize = 3;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Serializes a rational as `a/b` (denominator always written).
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => Some(Rat::from_integer(s.parse().ok()?)),
    }
}

/// Ordered list of variable names, shared cheaply between polynomials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vars(Arc<[String]>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        assert!(names.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        Vars(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn xy() -> Self {
        Vars::new(&["x", "y"])
    }

    pub fn xyt() -> Self {
        Vars::new(&["x", "y", "t"])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0[..])
    }
}

/// Exponent vector. Unused trailing slots are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mono(pub [u16; MAX_VARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; MAX_VARS]);

    pub fn var(i: usize) -> Mono {
        let mut e = [0; MAX_VARS];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        Mono(e)
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Mono) -> Mono {
        let mut e = other.0;
        for (a, b) in e.iter_mut().zip(self.0.iter()) {
            *a -= b;
        }
        Mono(e)
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a = (*a).max(*b);
        }
        Mono(e)
    }

    /// Graded lexicographic comparison (first variable largest).
    pub fn cmp_grlex(&self, other: &Mono) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl Ord for Mono {
    /// Graded reverse lexicographic order, first variable largest.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for i in (0..MAX_VARS).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero(vars: &Vars) -> Poly {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: &Vars) -> Poly {
        Poly::constant(vars, Rat::one())
    }

    pub fn constant(vars: &Vars, c: Rat) -> Poly {
        Poly::monomial(vars, Mono::ONE, c)
    }

    pub fn monomial(vars: &Vars, m: Mono, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly {
            vars: vars.clone(),
            terms,
        }
    }

    /// The variable at position `i` as a polynomial.
    pub fn var(vars: &Vars, i: usize) -> Poly {
        Poly::monomial(vars, Mono::var(i), Rat::one())
    }

    pub fn var_named(vars: &Vars, name: &str) -> Result<Poly> {
        let i = vars
            .index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(Poly::var(vars, i))
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rat)>>(vars: &Vars, it: I) -> Poly {
        let mut p = Poly::zero(vars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == Mono::ONE)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Mono::ONE)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn degree_in(&self, v: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[v] as u32).max()
    }

    /// Leading term under graded reverse lex.
    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
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

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to the variable at index `v`.
    pub fn derive_index(&self, v: usize) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e > 0 {
                let mut n = *m;
                n.0[v] -= 1;
                out.add_term(n, c * rat_int(e as i64));
            }
        }
        out
    }

    pub fn derive(&self, v: &str) -> Result<Poly> {
        let i = self
            .vars
            .index(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        Ok(self.derive_index(i))
    }

    /// Substitutes a rational value for the variable at index `v` (the variable stays in the list).
    pub fn substitute(&self, v: usize, value: &Rat) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut n = *m;
            let e = n.0[v];
            n.0[v] = 0;
            out.add_term(n, c * num_traits::pow(value.clone(), e as usize));
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate() {
                if m.0[i] > 0 {
                    t *= num_traits::pow(x.clone(), m.0[i] as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Re-expresses the polynomial over another variable list, matching by name.
    pub fn with_vars(&self, target: &Vars) -> Result<Poly> {
        let mut map = [0usize; MAX_VARS];
        for (i, name) in self.vars.names().iter().enumerate() {
            map[i] = target
                .index(name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut n = Mono::ONE;
            for i in 0..self.nvars() {
                n.0[map[i]] += m.0[i];
            }
            out.add_term(n, c.clone());
        }
        Ok(out)
    }

    /// Homogenizes with respect to `v0`, appending it to the variable list if absent.
    pub fn homogenize(&self, v0: &str) -> Result<Poly> {
        let (vars, idx) = match self.vars.index(v0) {
            Some(i) => (self.vars.clone(), i),
            None => {
                if self.nvars() >= MAX_VARS {
                    return Err(Error::UnknownVariable(v0.to_string()));
                }
                let mut names = self.vars.names().to_vec();
                names.push(v0.to_string());
                let i = names.len() - 1;
                (Vars::new(&names), i)
            }
        };
        let d = self.degree().unwrap_or(0);
        let mut out = Poly::zero(&vars);
        for (m, c) in &self.terms {
            let mut n = *m;
            n.0[idx] += (d - m.degree()) as u16;
            out.add_term(n, c.clone());
        }
        Ok(out)
    }

    /// Sets `v0 = 1` and removes it from the variable list.
    pub fn dehomogenize(&self, v0: &str) -> Result<Poly> {
        let idx = self
            .vars
            .index(v0)
            .ok_or_else(|| Error::UnknownVariable(v0.to_string()))?;
        let names: Vec<String> = self
            .vars
            .names()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, s)| s.clone())
            .collect();
        let vars = Vars::new(&names);
        let mut out = Poly::zero(&vars);
        for (m, c) in &self.terms {
            let mut n = Mono::ONE;
            let mut j = 0;
            for i in 0..self.nvars() {
                if i != idx {
                    n.0[j] = m.0[i];
                    j += 1;
                }
            }
            out.add_term(n, c.clone());
        }
        Ok(out)
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (*dm, dc.clone());
        let mut r = self.clone();
        let mut q = Poly::zero(&self.vars);
        while let Some((m, c)) = r.leading() {
            if !dm.divides(m) {
                return None;
            }
            let qm = dm.quotient_of(m);
            let qc = c / &dc;
            r = &r - &d.mul_mono(&qm, &qc);
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Coefficients with respect to variable `v`, indexed by its exponent.
    fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v).unwrap_or(0) as usize;
        let mut out = vec![Poly::zero(&self.vars); deg + 1];
        for (m, c) in &self.terms {
            let mut n = *m;
            let e = n.0[v] as usize;
            n.0[v] = 0;
            out[e].add_term(n, c.clone());
        }
        out
    }

    fn highest_var(&self) -> Option<usize> {
        (0..self.nvars())
            .rev()
            .find(|&v| self.terms.keys().any(|m| m.0[v] > 0))
    }

    fn content_in(&self, v: usize) -> Poly {
        let mut c = Poly::zero(&self.vars);
        for coef in self.coeffs_in(v) {
            if coef.is_zero() {
                continue;
            }
            c = c.gcd(&coef);
            if c.is_constant() {
                break;
            }
        }
        c
    }

    fn primitive_in(&self, v: usize) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides")
    }

    fn pseudo_rem(a: &Poly, b: &Poly, v: usize) -> Poly {
        let db = b.degree_in(v).unwrap_or(0);
        let bc = b.coeffs_in(v);
        let lc = bc[db as usize].clone();
        let mut r = a.clone();
        while !r.is_zero() {
            let dr = r.degree_in(v).unwrap_or(0);
            if dr < db {
                break;
            }
            let rc = r.coeffs_in(v)[dr as usize].clone();
            let mut shift = Mono::ONE;
            shift.0[v] = (dr - db) as u16;
            r = &(&r * &lc) - &(&rc * &b.mul_mono(&shift, &Rat::one()));
        }
        r
    }

    /// Greatest common divisor, normalized by [`Poly::normalized`]. `gcd(0, q)` is normalized `q`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let v = match (self.highest_var(), other.highest_var()) {
            (None, _) | (_, None) => return Poly::one(&self.vars),
            (Some(a), Some(b)) => a.max(b),
        };
        let ca = self.content_in(v);
        let cb = other.content_in(v);
        let c = ca.gcd(&cb);
        let mut a = self.div_exact(&ca).expect("content divides");
        let mut b = other.div_exact(&cb).expect("content divides");
        if a.degree_in(v) < b.degree_in(v) {
            std::mem::swap(&mut a, &mut b);
        }
        let g = loop {
            if b.is_zero() {
                break a.primitive_in(v);
            }
            if b.degree_in(v) == Some(0) {
                break Poly::one(&self.vars);
            }
            let r = Poly::pseudo_rem(&a, &b, v);
            a = b;
            b = if r.is_zero() { r } else { r.primitive_in(v) };
        };
        (&c * &g).normalized()
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient under graded lex.
    pub fn normalized(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            num = num.gcd(&(c.numer() * (&den / c.denom())));
        }
        let lead = self
            .terms
            .iter()
            .max_by(|a, b| a.0.cmp_grlex(b.0))
            .map(|(_, c)| c.clone())
            .unwrap();
        let mut factor = Rat::new(den, num);
        if lead.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Makes the grevlex leading coefficient one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Parses a polynomial in the given variables; see the crate README for the grammar.
    pub fn parse(text: &str, vars: &Vars) -> Result<Poly> {
        parse_with(text, &Poly::zero(vars))
    }

    /// Univariate polynomial coefficient list (low to high) in variable 0.
    pub fn univariate_coeffs(&self) -> Vec<Rat> {
        let d = self.degree_in(0).unwrap_or(0) as usize;
        let mut out = vec![Rat::zero(); d + 1];
        for (m, c) in &self.terms {
            out[m.0[0] as usize] += c;
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

fn fmt_mono(m: &Mono, vars: &Vars) -> String {
    let mut parts = Vec::new();
    for i in 0..vars.len() {
        match m.0[i] {
            0 => {}
            1 => parts.push(vars.name(i).to_string()),
            e => parts.push(format!("{}^{}", vars.name(i), e)),
        }
    }
    parts.join("*")
}

/// Writes `Σ c·m` in descending order with `+`/`-` separators.
pub(crate) fn fmt_terms<'a, I>(f: &mut fmt::Formatter<'_>, it: I) -> fmt::Result
where
    I: Iterator<Item = (String, &'a Rat)>,
{
    let mut first = true;
    for (m, c) in it {
        let neg = c.is_negative();
        let a = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        first = false;
        if m.is_empty() {
            write!(f, "{}", a)?;
        } else if a.is_one() {
            write!(f, "{}", m)?;
        } else {
            write!(f, "{}*{}", a, m)?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(
            f,
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| (fmt_mono(m, &self.vars), c)),
        )
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.vars, rhs.vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.vars, rhs.vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.vars, rhs.vars);
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Values the expression grammar can build.
pub(crate) trait Parseable: Sized {
    fn constant(&self, c: Rat) -> Self;
    fn variable(&self, name: &str) -> Result<Self>;
    fn p_add(&self, rhs: &Self) -> Self;
    fn p_sub(&self, rhs: &Self) -> Self;
    fn p_mul(&self, rhs: &Self) -> Self;
    fn p_neg(&self) -> Self;
    fn p_pow(&self, e: u32) -> Self;
}

impl Parseable for Poly {
    fn constant(&self, c: Rat) -> Self {
        Poly::constant(&self.vars, c)
    }
    fn variable(&self, name: &str) -> Result<Self> {
        Poly::var_named(&self.vars, name)
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
        Poly::pow(self, e)
    }
}

/// Parses `text` with `proto` supplying constants and variables.
pub(crate) fn parse_with<T: Parseable>(text: &str, proto: &T) -> Result<T> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        proto,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a, T> {
    src: &'a [u8],
    pos: usize,
    proto: &'a T,
}

impl<T: Parseable> Parser<'_, T> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<T> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.p_add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.p_sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<T> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.p_mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<T> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.p_neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<T> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let n = self.integer()?;
            let e = n
                .to_u32()
                .filter(|e| *e <= 1000)
                .ok_or(Error::Parse {
                    pos: start,
                    msg: "exponent out of range".into(),
                })?;
            return Ok(base.p_pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a non-negative integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<T> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.integer()?;
                    if d.is_zero() {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "zero denominator".into(),
                        });
                    }
                    return Ok(self.proto.constant(Rat::new(n, d)));
                }
                Ok(self.proto.constant(Rat::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.proto.variable(name)
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// `gcd(f, ∂x f, ∂y f)` is a nonzero constant (characteristic zero squarefreeness).
pub fn check_reduced(f: &Poly) -> Result<bool> {
    if f.is_constant() {
        return Err(Error::ZeroOrConstantInput);
    }
    Ok(reducedness_witness(f).is_constant())
}

/// `gcd(f, ∂f/∂v …)` over all variables of `f`.
pub fn reducedness_witness(f: &Poly) -> Poly {
    let mut g = f.clone();
    for v in 0..f.nvars() {
        g = g.gcd(&f.derive_index(v));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::parse(s, &Vars::xy()).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(p("x*y*(x-y)").to_string(), "x^2*y - x*y^2");
        assert_eq!(p("1/3*x^2").to_string(), "1/3*x^2");
        assert_eq!(p("-x^2").to_string(), "-x^2");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p(" 2 - 3 * y ").to_string(), "-3*y + 2");
        let q = p("(x^3+y^4+x*y^3)*(x^2-y^2)");
        assert_eq!(q.degree(), Some(6));
        assert_eq!(Poly::parse(&q.to_string(), &Vars::xy()).unwrap(), q);
    }

    #[test]
    fn parse_errors() {
        match Poly::parse("x*z", &Vars::xy()) {
            Err(Error::UnknownVariable(v)) => assert_eq!(v, "z"),
            other => panic!("{other:?}"),
        }
        match Poly::parse("x+*y", &Vars::xy()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Poly::parse("(x+y", &Vars::xy()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Poly::parse("1/0", &Vars::xy()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Poly::parse("x y", &Vars::xy()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("x*y*(x-y)").derive("x").unwrap(), p("2*x*y - y^2"));
        assert!(p("7/2").derive("x").unwrap().is_zero());
        assert!(matches!(p("x").derive("t"), Err(Error::UnknownVariable(_))));
        let f = p("(x^3+y^4+x*y^3)*(x^2-y^2)");
        let f1 = p("5*x^4 + 3*x^2*y^3 - 3*x^2*y^2 + 2*x*y^4 - y^5");
        assert_eq!(f.derive("x").unwrap(), f1);
    }

    #[test]
    fn gcds() {
        assert_eq!(p("x^2*y").gcd(&p("x*y^2")), p("x*y"));
        let f = p("x*y*(x-y)");
        assert_eq!(f.gcd(&f), f.normalized());
        assert_eq!(Poly::zero(&Vars::xy()).gcd(&p("-2*x")), p("x"));
        assert_eq!(p("(x+1)*(y-2)^2").gcd(&p("(y-2)*(x^2+y)")), p("y-2"));
        assert!(p("x^2+1").gcd(&p("y")).is_constant());
        assert_eq!(reducedness_witness(&p("x^2*y")), p("x"));
    }

    #[test]
    fn reducedness() {
        assert!(check_reduced(&p("x*y*(x-y)")).unwrap());
        assert!(!check_reduced(&p("x^2*y")).unwrap());
        assert!(check_reduced(&p("(x^3+y^4+x*y^3)*(x^2+y^2)")).unwrap());
        assert!(check_reduced(&p("x*(x-1)")).unwrap());
        assert!(matches!(
            check_reduced(&p("3")),
            Err(Error::ZeroOrConstantInput)
        ));
        assert!(matches!(
            check_reduced(&p("0")),
            Err(Error::ZeroOrConstantInput)
        ));
    }

    #[test]
    fn homogenization() {
        let h = p("x^2 + y").homogenize("t").unwrap();
        assert_eq!(h, Poly::parse("x^2 + t*y", &Vars::xyt()).unwrap());
        assert!(h.is_homogeneous());
        assert_eq!(h.dehomogenize("t").unwrap(), p("x^2 + y"));
        assert!(matches!(
            p("x").dehomogenize("t"),
            Err(Error::UnknownVariable(_))
        ));
        let f = p("(x^3+y^4+x*y^3)*(x^2-y^2)");
        let h = f.homogenize("t").unwrap();
        let expect = Poly::parse("(t*x^3+y^4+x*y^3)*(x^2-y^2)", &Vars::xyt()).unwrap();
        assert_eq!(h, expect);
    }

    #[test]
    fn exact_division() {
        let f = p("x*y*(x-y)");
        assert_eq!(f.div_exact(&p("x-y")).unwrap(), p("x*y"));
        assert!(f.div_exact(&p("x+y")).is_none());
    }
}
