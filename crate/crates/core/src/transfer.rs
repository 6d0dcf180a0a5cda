//! Zig-zag through the Koszul/Spencer double complex, turning classes of the
//! truncated complex into forms with `M̃` coefficients, and the undetermined
//! coefficient solves that pull those forms back to logarithmic forms.
//!
//! The vertical Koszul maps are `a ↦ (∂x·a, ∂y·a)` and `(a, b) ↦ −∂y·a + ∂x·b`
//! in every column, so a degree-1 element `(a, b)` is the form `a·dx + b·dy`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::derham::{CohomologyClasses, FilteredComplex, TruncatedComplex};
use crate::error::{Error, Result};
use crate::linalg::{solve_rows, SparseVec};
use crate::poly::{Mono, Poly, Rat, Vars};
use crate::saito::LogFrame;
use crate::weyl::{Exp, WeylOp};

/// A differential form with operator coefficients, read modulo the ideal of `M̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct DForm {
    pub degree: usize,
    /// `[g]`, `[dx, dy]` or `[dx∧dy]`.
    pub coeffs: Vec<WeylOp>,
}

impl DForm {
    pub fn new(degree: usize, coeffs: Vec<WeylOp>) -> Result<Self> {
        let want = if degree == 1 { 2 } else { 1 };
        if degree > 2 || coeffs.len() != want {
            return Err(Error::Internal(format!("form of degree {} with {} components", degree, coeffs.len())));
        }
        Ok(DForm { degree, coeffs })
    }
}

/// Bases of `H^i(Ω•(log f))` in frame coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogFormBasis {
    /// `g` meaning the function `g`.
    pub h0: Vec<Poly>,
    /// `(c1, c2)` meaning `c1·ω₁ + c2·ω₂`.
    pub h1: Vec<(Poly, Poly)>,
    /// `g` meaning `g·ω₁∧ω₂`.
    pub h2: Vec<Poly>,
    /// Witnesses behind `h1`, in the same order.
    pub tau1: Vec<Tau1Solution>,
    /// Witnesses behind `h0`, in the same order.
    pub tau0: Vec<Tau0Solution>,
}

impl LogFormBasis {
    pub fn dims(&self) -> [usize; 3] {
        [self.h0.len(), self.h1.len(), self.h2.len()]
    }

    /// Substitutes every witness back into its identity.
    pub fn verify(&self, forms: &[Vec<DForm>; 3], frame: &LogFrame) -> bool {
        let t1 = forms[1]
            .iter()
            .zip(&self.tau1)
            .all(|(w, s)| s.verify(&[w.coeffs[0].clone(), w.coeffs[1].clone()], frame));
        let t0 = forms[0].iter().zip(&self.tau0).all(|(w, s)| s.verify(&w.coeffs[0], frame));
        t1 && t0 && self.tau1.len() == forms[1].len() && self.tau0.len() == forms[0].len()
    }
}

/// `(a, b)` with `−∂y·a + ∂x·b = r`.
pub fn koszul_split(r: &WeylOp) -> Result<(WeylOp, WeylOp)> {
    let n = r.nvars();
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    for (e, c) in r.to_d_left() {
        let [dx, dy] = e.d();
        if dx > 0 {
            b.insert(Exp::new(e.x(), [dx - 1, dy]), c);
        } else if dy > 0 {
            a.insert(Exp::new(e.x(), [0, dy - 1]), -c);
        } else {
            return Err(Error::NotInImage);
        }
    }
    let (a, b) = (WeylOp::from_d_left(n, &a), WeylOp::from_d_left(n, &b));
    debug_assert_eq!(&(-(&WeylOp::d(n, 1) * &a)) + &(&WeylOp::d(n, 0) * &b), *r);
    Ok((a, b))
}

/// `a` with `∂x·a = r1` and `∂y·a = r2`.
pub fn koszul_integrate(r1: &WeylOp, r2: &WeylOp) -> Result<WeylOp> {
    let n = r1.nvars();
    let mut a = BTreeMap::new();
    for (e, c) in r1.to_d_left() {
        let [dx, dy] = e.d();
        if dx == 0 {
            return Err(Error::NotIntegrable);
        }
        a.insert(Exp::new(e.x(), [dx - 1, dy]), c);
    }
    let a = WeylOp::from_d_left(n, &a);
    if &WeylOp::d(n, 1) * &a != *r2 {
        return Err(Error::NotIntegrable);
    }
    Ok(a)
}

fn internal(e: Error) -> Error {
    match e {
        Error::NotInImage | Error::NotIntegrable => Error::InternalTransferFailure(e.to_string()),
        other => other,
    }
}

/// Transfers every representative; `out[i]` holds the degree-`i` forms.
pub fn transfer_classes(
    classes: &CohomologyClasses,
    tc: &TruncatedComplex,
    complex: &FilteredComplex,
) -> Result<[Vec<DForm>; 3]> {
    let op = |p: &Poly| WeylOp::from_poly(p);
    let ops = |ps: Vec<Poly>| ps.iter().map(op).collect::<Vec<_>>();
    let mut out: [Vec<DForm>; 3] = Default::default();
    for v in &classes.representatives[2] {
        let g = &tc.to_polys(0, v)[0];
        out[2].push(DForm::new(2, vec![op(g)])?);
    }
    for v in &classes.representatives[1] {
        out[1].push(transfer_h1(&ops(tc.to_polys(1, v)), complex)?);
    }
    for v in &classes.representatives[0] {
        out[0].push(transfer_h0(&ops(tc.to_polys(2, v)), complex)?);
    }
    Ok(out)
}

/// `Σ c_i·row_i` for a vector `c` against the rows of a map.
fn push_right(c: &[WeylOp], map: &[Vec<WeylOp>]) -> Vec<WeylOp> {
    let n = map.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| c.iter().zip(map).fold(WeylOp::zero(2), |acc, (a, row)| &acc + &(a * &row[j])))
        .collect()
}

/// `c ∈ F_1 ↦ split(c·∂₁)`, read as `a·dx + b·dy`.
pub fn transfer_h1(c: &[WeylOp], complex: &FilteredComplex) -> Result<DForm> {
    let r = &push_right(c, complex.map_into(0))[0];
    let (a, b) = koszul_split(r).map_err(internal)?;
    DForm::new(1, vec![a, b])
}

/// Two zig-zag steps: split each component of `z·∂₂`, push the pieces right, integrate.
pub fn transfer_h0(z: &[WeylOp], complex: &FilteredComplex) -> Result<DForm> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in push_right(z, complex.map_into(1)) {
        let (ak, bk) = koszul_split(&r).map_err(internal)?;
        a.push(ak);
        b.push(bk);
    }
    let d1 = complex.map_into(0);
    let u = koszul_integrate(&push_right(&a, d1)[0], &push_right(&b, d1)[0]).map_err(internal)?;
    DForm::new(0, vec![u])
}

/// `g·dx∧dy/f = g·ω₁∧ω₂` up to the frame constant; nothing to solve.
pub fn tau2_preimage(g: &Poly) -> Poly {
    g.clone()
}

/// Degree cap used when none is configured.
pub fn default_degree_cap(f: &Poly) -> usize {
    3 * f.degree().unwrap_or(0) as usize + 10
}

/// Witness for `A c1 + C c2 = m1 + Σ d1ʲ ℓⱼ + ∂x e` and `B c1 + D c2 = m2 + Σ d2ʲ ℓⱼ + ∂y e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau1Solution {
    pub c1: Poly,
    pub c2: Poly,
    /// `d[i][j]` multiplies `ℓⱼ` in equation `i`.
    pub d: [[WeylOp; 2]; 2],
    pub e: WeylOp,
    /// Total `x, y` degree bound that first succeeded.
    pub degree: usize,
    pub d_order: u16,
}

impl Tau1Solution {
    /// Substitutes back into both identities.
    pub fn verify(&self, m: &[WeylOp; 2], frame: &LogFrame) -> bool {
        let op = WeylOp::from_poly;
        let (c1, c2) = (op(&self.c1), op(&self.c2));
        let lhs = [
            &(&op(&frame.fw1.0) * &c1) + &(&op(&frame.fw2.0) * &c2),
            &(&op(&frame.fw1.1) * &c1) + &(&op(&frame.fw2.1) * &c2),
        ];
        (0..2).all(|i| {
            let mut rhs = m[i].clone();
            for j in 0..2 {
                rhs = &rhs + &(&self.d[i][j] * frame.ells()[j]);
            }
            rhs = &rhs + &(&WeylOp::d(2, i) * &self.e);
            lhs[i] == rhs
        })
    }
}

/// Witness for `g f = m + Σ dⱼ ℓⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau0Solution {
    pub g: Poly,
    pub d: [WeylOp; 2],
    pub degree: usize,
    pub d_order: u16,
}

impl Tau0Solution {
    pub fn verify(&self, m: &WeylOp, frame: &LogFrame) -> bool {
        let lhs = WeylOp::from_poly(&(&self.g * &frame.f));
        let rhs = &(m + &(&self.d[0] * &frame.ell1)) + &(&self.d[1] * &frame.ell2);
        lhs == rhs
    }
}

/// Operator monomials `x^α ∂^β` with `|α| ≤ n`, `|β| ≤ dd`.
fn op_monomials(n: usize, dd: u16) -> Vec<Exp> {
    let mut out = Vec::new();
    for mu in crate::derham::monomials_up_to(n as i64) {
        for db in 0..=dd {
            for b0 in (0..=db).rev() {
                out.push(Exp::new([mu.0[0], mu.0[1]], [b0, db - b0]));
            }
        }
    }
    out
}

fn op_degree(ops: &[&WeylOp]) -> usize {
    ops.iter()
        .flat_map(|p| p.terms().map(|(e, _)| (e.x()[0] + e.x()[1]) as usize))
        .max()
        .unwrap_or(0)
}

/// Solves `Σ_j u_j·cols[j] = target` componentwise in the Weyl algebra.
fn solve_columns(cols: &[Vec<WeylOp>], target: &[WeylOp]) -> Option<Vec<Rat>> {
    let mut index: HashMap<(usize, Exp), usize> = HashMap::new();
    let mut rows: Vec<SparseVec> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        for (k, p) in col.iter().enumerate() {
            for (e, c) in p.terms() {
                let r = *index.entry((k, *e)).or_insert_with(|| {
                    rows.push(Vec::new());
                    rows.len() - 1
                });
                rows[r].push((j, c.clone()));
            }
        }
    }
    let mut rhs = vec![Rat::zero(); rows.len()];
    for (k, p) in target.iter().enumerate() {
        for (e, c) in p.terms() {
            {
                let r = index.get(&(k, *e))?;
                rhs[*r] = c.clone()
            }
        }
    }
    solve_rows(&rows, &rhs, cols.len())
}

fn poly_from(coeffs: &[Rat], monos: &[Mono]) -> Poly {
    Poly::from_terms(&Vars::xy(), monos.iter().zip(coeffs).map(|(m, c)| (*m, c.clone())))
}

fn op_from(coeffs: &[Rat], monos: &[Exp]) -> WeylOp {
    WeylOp::from_terms(2, monos.iter().zip(coeffs).map(|(m, c)| (*m, c.clone())))
}

/// Degree schedule shared by both preimage solvers.
fn schedule(start: usize, cap: usize) -> impl Iterator<Item = (usize, u16)> {
    (start..=cap.max(start)).flat_map(|n| (0..=2u16).map(move |dd| (n, dd)))
}

/// Coordinates `(c1, c2)` of a transferred degree-1 form.
pub fn tau1_preimage(form: &DForm, frame: &LogFrame, cap: usize) -> Result<Tau1Solution> {
    let m = [form.coeffs[0].clone(), form.coeffs[1].clone()];
    let fdeg = frame.f.degree().unwrap_or(0) as usize;
    let start = op_degree(&[&m[0], &m[1]]).max(fdeg);
    if start > cap {
        return Err(Error::DegreeCapExceeded(cap));
    }
    let op = WeylOp::from_poly;
    let fw = [[op(&frame.fw1.0), op(&frame.fw1.1)], [op(&frame.fw2.0), op(&frame.fw2.1)]];
    let zero = WeylOp::zero(2);
    let mut cache: HashMap<(Exp, usize), WeylOp> = HashMap::new();
    for (n, dd) in schedule(start, cap) {
        let opm = op_monomials(n, dd);
        let pm = crate::derham::monomials_up_to(n as i64);
        let mut cols: Vec<Vec<WeylOp>> = Vec::new();
        // d1ʲ, d2ʲ, e first, c last: free unknowns are zero, so c stays small
        for i in 0..2 {
            for j in 0..2 {
                for e in &opm {
                    let p = cache
                        .entry((*e, j))
                        .or_insert_with(|| -(&WeylOp::monomial(2, *e, Rat::one()) * frame.ells()[j]))
                        .clone();
                    cols.push(if i == 0 { vec![p, zero.clone()] } else { vec![zero.clone(), p] });
                }
            }
        }
        for e in &opm {
            let mono = WeylOp::monomial(2, *e, Rat::one());
            cols.push(vec![-(&WeylOp::d(2, 0) * &mono), -(&WeylOp::d(2, 1) * &mono)]);
        }
        for w in &fw {
            for mu in &pm {
                let mono = WeylOp::monomial(2, Exp::new([mu.0[0], mu.0[1]], [0, 0]), Rat::one());
                cols.push(vec![&w[0] * &mono, &w[1] * &mono]);
            }
        }
        let Some(x) = solve_columns(&cols, &m) else { continue };
        let k = opm.len();
        let p = pm.len();
        let sol = Tau1Solution {
            d: [
                [op_from(&x[0..k], &opm), op_from(&x[k..2 * k], &opm)],
                [op_from(&x[2 * k..3 * k], &opm), op_from(&x[3 * k..4 * k], &opm)],
            ],
            e: op_from(&x[4 * k..5 * k], &opm),
            c1: poly_from(&x[5 * k..5 * k + p], &pm),
            c2: poly_from(&x[5 * k + p..5 * k + 2 * p], &pm),
            degree: n,
            d_order: dd,
        };
        if !sol.verify(&m, frame) {
            return Err(Error::Internal("τ¹ solution failed substitution".into()));
        }
        return Ok(sol);
    }
    Err(Error::DegreeCapExceeded(cap))
}

/// The polynomial `g` with `g f ≡ m` modulo the ideal of `M̃`.
pub fn tau0_preimage(m: &WeylOp, frame: &LogFrame, cap: usize) -> Result<Tau0Solution> {
    let fdeg = frame.f.degree().unwrap_or(0) as usize;
    let start = op_degree(&[m]).max(fdeg);
    if start > cap {
        return Err(Error::DegreeCapExceeded(cap));
    }
    let fop = WeylOp::from_poly(&frame.f);
    let target = [m.clone()];
    for (n, dd) in schedule(start, cap) {
        let opm = op_monomials(n, dd);
        let pm = crate::derham::monomials_up_to(n as i64);
        let mut cols: Vec<Vec<WeylOp>> = Vec::new();
        for j in 0..2 {
            for e in &opm {
                cols.push(vec![-(&WeylOp::monomial(2, *e, Rat::one()) * frame.ells()[j])]);
            }
        }
        for mu in &pm {
            cols.push(vec![&fop * &WeylOp::monomial(2, Exp::new([mu.0[0], mu.0[1]], [0, 0]), Rat::one())]);
        }
        let Some(x) = solve_columns(&cols, &target) else { continue };
        let k = opm.len();
        let sol = Tau0Solution {
            d: [op_from(&x[0..k], &opm), op_from(&x[k..2 * k], &opm)],
            g: poly_from(&x[2 * k..], &pm),
            degree: n,
            d_order: dd,
        };
        if !sol.verify(m, frame) {
            return Err(Error::Internal("τ⁰ solution failed substitution".into()));
        }
        return Ok(sol);
    }
    Err(Error::DegreeCapExceeded(cap))
}

/// Runs the three preimage maps over transferred forms.
pub fn log_basis(forms: &[Vec<DForm>; 3], frame: &LogFrame, cap: usize) -> Result<LogFormBasis> {
    let mut out = LogFormBasis::default();
    for w in &forms[2] {
        let g = w.coeffs[0]
            .as_poly()
            .ok_or_else(|| Error::Internal("degree-2 class with derivatives".into()))?;
        out.h2.push(tau2_preimage(&g));
    }
    for w in &forms[1] {
        let s = tau1_preimage(w, frame, cap)?;
        out.h1.push((s.c1.clone(), s.c2.clone()));
        out.tau1.push(s);
    }
    for w in &forms[0] {
        let s = tau0_preimage(&w.coeffs[0], frame, cap)?;
        out.h0.push(s.g.clone());
        out.tau0.push(s);
    }
    Ok(out)
}
