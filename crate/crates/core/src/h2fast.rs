//! Direct computation of `H²(Ω•(log f))` as a quotient of bounded-degree
//! polynomials by the images of first-order operators, with the degree bound
//! taken from the integration b-function of the adjoint operators.

use crate::error::{Error, Result};
use crate::groebner::{krull_dim, syzygy_module};
use crate::linalg::{Echelon, SparseVec};
use crate::poly::{check_reduced, Mono, Poly, Rat};
use crate::weyl::{bfunction_from_gb, poly_vars, weyl_gb, BFunction, WeightVector, WeylOp, DEFAULT_B_DEGREE_CAP};

/// Result of the fast `H²` computation.
#[derive(Clone, Debug, PartialEq)]
pub struct H2Report {
    pub dim: usize,
    /// Entry `g` stands for `g·dx∧dy/f`.
    pub basis: Vec<Poly>,
    pub k0: Option<i64>,
    pub b: BFunction,
    pub conditions: [bool; 3],
    pub operators: Vec<WeylOp>,
    /// Adjoints of a weight Gröbner basis of `D·{Lᵢᵀ}`; their images span the
    /// relations in each degree, which the raw `Lᵢ` need not do.
    pub image_operators: Vec<WeylOp>,
}

/// `L = q∂x − p∂y + q_x − p_y − r` for a syzygy `f_y p − f_x q + f r = 0`.
pub fn operator_from_syzygy(p: &Poly, q: &Poly, r: &Poly) -> WeylOp {
    let op = WeylOp::from_poly;
    let zero_order = &(&q.derive_index(0) - &p.derive_index(1)) - r;
    &(&(&op(q) * &WeylOp::d(2, 0)) - &(&op(p) * &WeylOp::d(2, 1))) + &op(&zero_order)
}

/// One operator per syzygy generator of `(f_y, −f_x, f)`, trivial syzygies appended.
pub fn syzygy_operators(f: &Poly) -> Result<Vec<WeylOp>> {
    if !check_reduced(f)? {
        return Err(Error::NotReduced(crate::poly::reducedness_witness(f).to_string()));
    }
    let fx = f.derive_index(0);
    let fy = f.derive_index(1);
    let zero = Poly::zero(f.vars());
    let mut triples: Vec<[Poly; 3]> = syzygy_module(&[fy.clone(), -&fx, f.clone()])
        .into_iter()
        .map(|v| [v.entries[0].clone(), v.entries[1].clone(), v.entries[2].clone()])
        .collect();
    let trivial = [
        [zero.clone(), f.clone(), fx.clone()],
        [f.clone(), zero.clone(), -&fy],
        [fx.clone(), fy.clone(), zero.clone()],
    ];
    for t in trivial {
        let nonzero = t.iter().any(|p| !p.is_zero());
        let key = t.iter().map(Poly::normalized).collect::<Vec<_>>();
        let seen = triples.iter().any(|s| s.iter().map(Poly::normalized).collect::<Vec<_>>() == key);
        if nonzero && !seen {
            triples.push(t);
        }
    }
    let mut out = Vec::with_capacity(triples.len());
    for [p, q, r] in &triples {
        debug_assert!((&(&(&fy * p) - &(&fx * q)) + &(f * r)).is_zero());
        let l = operator_from_syzygy(p, q, r);
        if !l.is_zero() && !out.contains(&l) {
            out.push(l);
        }
    }
    Ok(out)
}

/// `[dim V(f, f_x, f_y) ≤ 0, dim V(f, f_x) ≤ 1, dim V(f, f_y) ≤ 1]`.
pub fn check_conditions(f: &Poly) -> [bool; 3] {
    let fx = f.derive_index(0);
    let fy = f.derive_index(1);
    [
        krull_dim(&[f.clone(), fx.clone(), fy.clone()]) <= 0,
        krull_dim(&[f.clone(), fx]) <= 1,
        krull_dim(&[f.clone(), fy]) <= 1,
    ]
}

/// Monomials of total degree at most `k` in `nvars` variables, ascending by degree.
pub fn bounded_monomials(nvars: usize, k: i64) -> Vec<Mono> {
    match nvars {
        1 => (0..=k.max(-1)).map(|a| Mono([a as u16, 0, 0])).collect(),
        _ => crate::derham::monomials_up_to(k),
    }
}

/// The subspace `Σ Lᵢ·F_{k − ord(Lᵢ)}` of `F_k`, kept in echelon form.
///
/// Columns are indexed from the largest monomial down, so image vectors eliminate
/// high-degree monomials first and the surviving standard monomials are as low as possible.
pub struct ImageSpace {
    monos: Vec<Mono>,
    ech: Echelon,
    nvars: usize,
}

impl ImageSpace {
    pub fn new(ops: &[WeylOp], k: i64, nvars: usize) -> Self {
        let vars = poly_vars(nvars);
        let w = WeightVector::integration(nvars);
        let mut space = ImageSpace {
            monos: bounded_monomials(nvars, k),
            ech: Echelon::new(),
            nvars,
        };
        for l in ops {
            let Some(o) = l.ord(&w) else { continue };
            for mu in bounded_monomials(nvars, k - o as i64) {
                let img = l.apply(&Poly::monomial(&vars, mu, Rat::from_integer(1.into())));
                let v = space.vector(&img).expect("operator image exceeds the degree bound");
                space.ech.insert(&v);
            }
        }
        space
    }

    fn vector(&self, p: &Poly) -> Option<SparseVec> {
        let n = self.monos.len();
        let mut v = Vec::new();
        for (m, c) in p.terms() {
            let i = self.monos.iter().position(|x| x == m)?;
            v.push((n - 1 - i, c.clone()));
        }
        v.sort_by_key(|(i, _)| *i);
        Some(v)
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    /// Standard monomials: a basis of the quotient `F_k / image`.
    pub fn quotient_basis(&self) -> Vec<Poly> {
        let vars = poly_vars(self.nvars);
        let n = self.monos.len();
        self.monos
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.ech.is_pivot(n - 1 - i))
            .map(|(_, m)| Poly::monomial(&vars, *m, Rat::from_integer(1.into())))
            .collect()
    }

    /// Dimension of the span of `polys` in the quotient; `None` if one leaves `F_k`.
    pub fn rank_modulo(&self, polys: &[Poly]) -> Option<usize> {
        let mut ech = self.ech.clone();
        let mut r = 0;
        for p in polys {
            if ech.insert(&self.vector(p)?).is_some() {
                r += 1;
            }
        }
        Some(r)
    }

    /// Both lists are bases of the same subspace of the quotient.
    pub fn same_span(&self, a: &[Poly], b: &[Poly]) -> bool {
        let joint: Vec<Poly> = a.iter().chain(b).cloned().collect();
        let ra = self.rank_modulo(a);
        ra == Some(a.len()) && self.rank_modulo(b) == Some(b.len()) && self.rank_modulo(&joint) == ra
    }
}

/// Basis of `F_k / Σ Lᵢ·F_{k − ord(Lᵢ)}` by standard monomials.
pub fn quotient_basis(ops: &[WeylOp], k: i64, nvars: usize) -> Vec<Poly> {
    ImageSpace::new(ops, k, nvars).quotient_basis()
}

/// b-function of `D·{Lᵢᵀ}` for the integration weight.
pub fn adjoint_bfunction(ops: &[WeylOp], cap: usize) -> Result<BFunction> {
    adjoint_standard_basis(ops, cap).map(|(b, _)| b)
}

/// The b-function together with `Gᵀ` for a weight Gröbner basis `G` of `D·{Lᵢᵀ}`.
///
/// The quotient must be taken modulo these: with bare generators the sum
/// `Σ Lᵢ·F_{k − ord(Lᵢ)}` can miss relations whose cofactors have higher order.
pub fn adjoint_standard_basis(ops: &[WeylOp], cap: usize) -> Result<(BFunction, Vec<WeylOp>)> {
    let n = ops.first().map(WeylOp::nvars).unwrap_or(2);
    let adj: Vec<WeylOp> = ops.iter().map(WeylOp::adjoint).collect();
    let gb = weyl_gb(&adj, &WeightVector::integration(n));
    let b = bfunction_from_gb(&gb, cap)?;
    let image = gb.generators().iter().map(WeylOp::adjoint).collect();
    Ok((b, image))
}

/// The full fast algorithm for a reduced bivariate `f`.
pub fn h2_basis(f: &Poly) -> Result<H2Report> {
    let conditions = check_conditions(f);
    let operators = syzygy_operators(f)?;
    if conditions.contains(&false) {
        return Err(Error::ConditionsViolated(conditions));
    }
    let (b, image_operators) = adjoint_standard_basis(&operators, DEFAULT_B_DEGREE_CAP)?;
    let basis = match b.k0 {
        Some(k) => quotient_basis(&image_operators, k, 2),
        None => Vec::new(),
    };
    Ok(H2Report {
        dim: basis.len(),
        basis,
        k0: b.k0,
        b,
        conditions,
        operators,
        image_operators,
    })
}

/// The single-operator, one-variable version: `(b, K[x]_{≤k0} / L·K[x]_{≤k0 − ord L})`.
pub fn one_variable(l: &WeylOp) -> Result<(BFunction, Vec<Poly>)> {
    let (b, image) = adjoint_standard_basis(std::slice::from_ref(l), DEFAULT_B_DEGREE_CAP)?;
    let basis = match b.k0 {
        Some(k) => quotient_basis(&image, k, 1),
        None => Vec::new(),
    };
    Ok((b, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Vars;

    fn p(s: &str) -> Poly {
        Poly::parse(s, &Vars::xy()).unwrap()
    }

    fn w(s: &str) -> WeylOp {
        WeylOp::parse(s, 2).unwrap()
    }

    /// `f·[(q e)_x − (p e)_y] − e·(q f_x − p f_y)`, i.e. `f²` times the `dx∧dy` part of `d(e·(p dx + q dy)/f)`.
    fn twisted_d(f: &Poly, p: &Poly, q: &Poly, e: &Poly) -> Poly {
        let lhs = &(&(q * e).derive_index(0) - &(p * e).derive_index(1)) * f;
        &lhs - &(e * &(&(q * &f.derive_index(0)) - &(p * &f.derive_index(1))))
    }

    #[test]
    fn operators_for_a_line() {
        let ops = syzygy_operators(&p("x")).unwrap();
        assert!(ops.contains(&w("-dy")));
        assert!(ops.contains(&w("x*dx")));
    }

    #[test]
    fn operator_from_a_syzygy() {
        let f = p("x*y*(x-y)");
        let l = operator_from_syzygy(&p("0"), &p("x*(x-y)"), &p("2*x-y"));
        assert_eq!(l, w("x^2*dx - x*y*dx"));
        assert!((&(&(&f.derive_index(1) * &p("0")) - &(&f.derive_index(0) * &p("x*(x-y)"))) + &(&f * &p("2*x-y"))).is_zero());
    }

    #[test]
    fn operators_match_exterior_derivative() {
        let f = p("x^3 + y^4 + x*y^3");
        let fx = f.derive_index(0);
        let fy = f.derive_index(1);
        let syz = syzygy_module(&[fy.clone(), -&fx, f.clone()]);
        for e in ["1", "x*y - 3", "x^4*y + 2*y^2"] {
            let e = p(e);
            for v in &syz {
                let (pp, q, r) = (&v.entries[0], &v.entries[1], &v.entries[2]);
                let l = operator_from_syzygy(pp, q, r);
                assert_eq!(twisted_d(&f, pp, q, &e), &f * &l.apply(&e));
            }
        }
    }

    #[test]
    fn conditions() {
        assert_eq!(check_conditions(&p("x*y*(x-y)")), [true; 3]);
        assert_eq!(check_conditions(&p("(x^3+y^4+x*y^3)*(x^2+y^2)")), [true; 3]);
        assert_eq!(check_conditions(&p("x*(x-1)")), [true; 3]);
        assert_eq!(check_conditions(&p("x")), [true; 3]);
    }

    #[test]
    fn smooth_line_has_no_h2() {
        let r = h2_basis(&p("x")).unwrap();
        assert_eq!(r.dim, 0);
    }

    #[test]
    fn worked_example() {
        let r = h2_basis(&p("x*y*(x-y)")).unwrap();
        assert_eq!(r.k0, Some(1));
        assert_eq!(r.dim, 2);
        assert_eq!(r.basis, vec![p("x"), p("y")]);
    }

    #[test]
    fn one_variable_quotient() {
        let l = WeylOp::parse("(1-x)*x*dx + 2*x", 1).unwrap();
        let (b, basis) = one_variable(&l).unwrap();
        assert_eq!(b.k0, Some(3));
        let v = Vars::new(&["x"]);
        assert_eq!(basis, vec![Poly::parse("1", &v).unwrap(), Poly::parse("x^3", &v).unwrap()]);
    }

    #[test]
    fn stability_at_raised_bounds() {
        let f = p("x*y*(x-y)");
        let ops = syzygy_operators(&f).unwrap();
        for k in 1..=3 {
            assert_eq!(quotient_basis(&ops, k, 2).len(), 2);
        }
    }

    #[test]
    fn spans_modulo_image() {
        let ops = syzygy_operators(&p("x*y*(x-y)")).unwrap();
        let img = ImageSpace::new(&ops, 1, 2);
        assert_eq!(img.dim() + 2, 3);
        assert!(img.same_span(&[p("x"), p("y")], &[p("x + y"), p("x - y")]));
        assert!(img.same_span(&[p("x"), p("y")], &[p("x + 1"), p("y")]));
        assert!(!img.same_span(&[p("x"), p("y")], &[p("x"), p("x + 1")]));
        assert_eq!(img.rank_modulo(&[p("x^2")]), None);
    }

    #[test]
    fn non_reduced_is_rejected() {
        assert!(matches!(syzygy_operators(&p("x^2*y")), Err(Error::NotReduced(_))));
    }
}
