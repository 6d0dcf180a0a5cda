//! Free bases of logarithmic derivations and their certificates.
//!
//! A syzygy triple `(s0, s1, s2)` with `s0·f + s1·f_x + s2·f_y = 0` gives the
//! logarithmic vector field `δ = s1·∂x + s2·∂y` with `δ(f) = −s0·f`.

use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groebner::{minimalize_graded, syzygy_module, ModVec};
use crate::linalg::{rref, SparseVec};
use crate::poly::{check_reduced, Mono, Poly, Rat, Vars};
use crate::weyl::WeylOp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyzygyTriple {
    pub s0: Poly,
    pub s1: Poly,
    pub s2: Poly,
}

impl SyzygyTriple {
    /// Builds a triple, rejecting it unless `s0·f + s1·f_x + s2·f_y = 0`.
    pub fn new(s0: Poly, s1: Poly, s2: Poly, f: &Poly) -> Result<Self> {
        let t = SyzygyTriple { s0, s1, s2 };
        if !t.annihilates(f) {
            return Err(Error::BadSyzygy(format!("({}, {}, {})", t.s0, t.s1, t.s2)));
        }
        Ok(t)
    }

    pub fn annihilates(&self, f: &Poly) -> bool {
        let fx = f.derive_index(0);
        let fy = f.derive_index(1);
        (&(&(&self.s0 * f) + &(&self.s1 * &fx)) + &(&self.s2 * &fy)).is_zero()
    }

    /// `δ = s1·∂x + s2·∂y`
    pub fn delta(&self) -> WeylOp {
        &(&WeylOp::from_poly(&self.s1) * &WeylOp::d(2, 0)) + &(&WeylOp::from_poly(&self.s2) * &WeylOp::d(2, 1))
    }

    /// `ℓ = −s0 + s1·∂x + s2·∂y`
    pub fn ell(&self) -> WeylOp {
        &self.delta() - &WeylOp::from_poly(&self.s0)
    }

    pub fn strings(&self) -> [String; 3] {
        [self.s0.to_string(), self.s1.to_string(), self.s2.to_string()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreeBasis {
    Found(SyzygyTriple, SyzygyTriple),
    /// The minimal graded syzygy module needs this many generators.
    NotFree { generators: usize },
}

fn homog(p: &Poly) -> Result<Poly> {
    p.with_vars(&Vars::xyt())?.homogenize("t")
}

fn dehomog(p: &Poly) -> Result<Poly> {
    p.dehomogenize("t")?.with_vars(&Vars::xy())
}

/// Sort key for monomials of `x, y, t` under grevlex with `t > x > y`.
fn t_first(m: &Mono) -> Mono {
    Mono([m.0[2], m.0[0], m.0[1]])
}

/// Reduced echelon form of equal-degree syzygies, coordinates ordered as
/// `(f_x, f_y, f)` and monomials by grevlex with `t > x > y`; rows with the
/// smallest pivot come first.
fn normalize_degree_block(block: &[ModVec]) -> Vec<ModVec> {
    let order = [1usize, 2, 0];
    let mut keys: Vec<(usize, Mono)> = Vec::new();
    for v in block {
        for (rank, pos) in order.iter().enumerate() {
            for (m, _) in v.entries[*pos].terms() {
                keys.push((rank, *m));
            }
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| t_first(&b.1).cmp(&t_first(&a.1))));
    keys.dedup();
    let index = |rank: usize, m: &Mono| keys.iter().position(|k| k.0 == rank && k.1 == *m).unwrap();
    let rows: Vec<SparseVec> = block
        .iter()
        .map(|v| {
            let mut r: SparseVec = Vec::new();
            for (rank, pos) in order.iter().enumerate() {
                for (m, c) in v.entries[*pos].terms() {
                    r.push((index(rank, m), c.clone()));
                }
            }
            r.sort_by_key(|(i, _)| *i);
            r
        })
        .collect();
    let vars = block[0].entries[0].vars().clone();
    rref(&rows)
        .into_iter()
        .rev()
        .map(|r| {
            let mut entries = vec![Poly::zero(&vars); 3];
            for (i, c) in r {
                let (rank, m) = keys[i];
                entries[order[rank]].add_term(m, c);
            }
            ModVec::new(entries, block[0].shifts.clone())
        })
        .collect()
}

/// Minimal homogeneous syzygies of `(h, h_x, h_y)` for the homogenization `h` of `f`.
pub fn homogeneous_minimal_syzygies(f: &Poly) -> Result<Vec<ModVec>> {
    let gens = [homog(f)?, homog(&f.derive_index(0))?, homog(&f.derive_index(1))?];
    let min = minimalize_graded(&syzygy_module(&gens))?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < min.len() {
        let d = min[i].degree()?;
        let mut j = i;
        while j < min.len() && min[j].degree()? == d {
            j += 1;
        }
        out.extend(normalize_degree_block(&min[i..j]));
        i = j;
    }
    Ok(out)
}

/// Free basis from the minimal syzygies of the homogenized `(h, h₁, h₂)` when there are two of them.
pub fn find_free_basis(f: &Poly) -> Result<FreeBasis> {
    if !check_reduced(f)? {
        return Err(Error::NotReduced(crate::poly::reducedness_witness(f).to_string()));
    }
    let min = homogeneous_minimal_syzygies(f)?;
    if min.len() != 2 {
        return Ok(FreeBasis::NotFree {
            generators: min.len(),
        });
    }
    let mut triples = Vec::new();
    for v in &min {
        triples.push(SyzygyTriple::new(
            dehomog(&v.entries[0])?,
            dehomog(&v.entries[1])?,
            dehomog(&v.entries[2])?,
            f,
        )?);
    }
    let t = triples.pop().unwrap();
    let s = triples.pop().unwrap();
    Ok(FreeBasis::Found(s, t))
}

/// On-disk basis: `{"f": …, "s": [s0, s1, s2], "t": [t0, t1, t2]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisFile {
    pub f: String,
    pub s: [String; 3],
    pub t: [String; 3],
}

/// Parses and verifies a basis document for `f`.
pub fn parse_basis(text: &str, f: &Poly) -> Result<(SyzygyTriple, SyzygyTriple)> {
    let doc: BasisFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let vars = Vars::xy();
    let parse = |s: &str| Poly::parse(s, &vars).map_err(|e| Error::Format(format!("`{s}`: {e}")));
    let g = parse(&doc.f)?;
    if g.is_zero() || f.is_zero() {
        return Err(Error::Format("zero polynomial in basis file".into()));
    }
    // the stated polynomial must be a rational multiple of the requested one
    let (mg, cg) = g.leading().map(|(m, c)| (*m, c.clone())).unwrap();
    let ratio = cg / f.coeff(&mg);
    if f.coeff(&mg).is_zero() || f.scale(&ratio) != g {
        return Err(Error::Format(format!("basis file is for f = {g}, not {f}")));
    }
    let triple = |v: &[String; 3]| -> Result<SyzygyTriple> {
        SyzygyTriple::new(parse(&v[0])?, parse(&v[1])?, parse(&v[2])?, f)
    };
    Ok((triple(&doc.s)?, triple(&doc.t)?))
}

pub fn import_basis(path: &Path, f: &Poly) -> Result<(SyzygyTriple, SyzygyTriple)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_basis(&text, f)
}

pub fn basis_to_json(f: &Poly, s: &SyzygyTriple, t: &SyzygyTriple) -> String {
    serde_json::to_string_pretty(&BasisFile {
        f: f.to_string(),
        s: s.strings(),
        t: t.strings(),
    })
    .unwrap()
}

/// A free basis of `Der(−log f)` certified by Saito's criterion, with the data
/// the rest of the pipeline needs.
#[derive(Clone, Debug, PartialEq)]
pub struct LogFrame {
    pub f: Poly,
    pub s: SyzygyTriple,
    pub t: SyzygyTriple,
    pub delta1: WeylOp,
    pub delta2: WeylOp,
    /// Rows are the coefficients of `δ1` and `δ2`.
    pub a: [[Poly; 2]; 2],
    /// `det(a) = c·f`
    pub c: Rat,
    pub b1: Poly,
    pub b2: Poly,
    pub ell1: WeylOp,
    pub ell2: WeylOp,
    /// `f·ω₁ = fw1.0·dx + fw1.1·dy`
    pub fw1: (Poly, Poly),
    /// `f·ω₂ = fw2.0·dx + fw2.1·dy`
    pub fw2: (Poly, Poly),
}

impl LogFrame {
    pub fn ells(&self) -> [&WeylOp; 2] {
        [&self.ell1, &self.ell2]
    }

    /// `δᵢ(f)/f`, which equals `−s0` of the triple.
    pub fn g(&self) -> (Poly, Poly) {
        (-&self.s.s0, -&self.t.s0)
    }

    /// Re-checks every identity the frame is built on.
    pub fn verify(&self) -> Result<()> {
        let f = &self.f;
        let fail = |what: &str| Err(Error::Internal(format!("frame identity failed: {what}")));
        if !self.s.annihilates(f) || !self.t.annihilates(f) {
            return fail("syzygy");
        }
        let det = &(&self.a[0][0] * &self.a[1][1]) - &(&self.a[0][1] * &self.a[1][0]);
        if self.c.is_zero() || det != f.scale(&self.c) {
            return fail("determinant");
        }
        let br = self.delta1.commutator(&self.delta2);
        let rhs = &(&WeylOp::from_poly(&self.b1) * &self.delta1) + &(&WeylOp::from_poly(&self.b2) * &self.delta2);
        if br != rhs {
            return fail("bracket");
        }
        for (d, s0) in [(&self.delta1, &self.s.s0), (&self.delta2, &self.t.s0)] {
            if d.apply(f) != -&(s0 * f) {
                return fail("logarithmic derivation");
            }
        }
        let (g1, g2) = self.g();
        let lhs = &self.delta1.apply(&g2) - &self.delta2.apply(&g1);
        if lhs != &(&self.b1 * &g1) + &(&self.b2 * &g2) {
            return fail("flatness");
        }
        // cofactor pairing: ⟨δᵢ, fωⱼ⟩ = c·f·[i = j]
        let cf = f.scale(&self.c);
        let zero = Poly::zero(f.vars());
        for (i, row) in self.a.iter().enumerate() {
            for (j, w) in [&self.fw1, &self.fw2].iter().enumerate() {
                let pair = &(&row[0] * &w.0) + &(&row[1] * &w.1);
                if pair != if i == j { cf.clone() } else { zero.clone() } {
                    return fail("dual pairing");
                }
            }
        }
        if self.ell1 != self.s.ell() || self.ell2 != self.t.ell() {
            return fail("twisted generators");
        }
        Ok(())
    }
}

/// Certifies `(s, t)` as a free basis via `det A = c·f` and assembles the frame.
pub fn certify_saito(s: &SyzygyTriple, t: &SyzygyTriple, f: &Poly) -> Result<LogFrame> {
    for tr in [s, t] {
        if !tr.annihilates(f) {
            return Err(Error::BadSyzygy(format!("({}, {}, {})", tr.s0, tr.s1, tr.s2)));
        }
    }
    let a = [[s.s1.clone(), s.s2.clone()], [t.s1.clone(), t.s2.clone()]];
    let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
    let c = match (det.leading(), f.leading()) {
        (Some((md, cd)), Some((mf, cf))) if md == mf => cd / cf,
        _ => return Err(Error::SaitoFail(det.to_string())),
    };
    if det != f.scale(&c) {
        return Err(Error::SaitoFail(det.to_string()));
    }
    let delta1 = s.delta();
    let delta2 = t.delta();
    // coefficient row of [δ1, δ2]
    let v1 = &delta1.apply(&a[1][0]) - &delta2.apply(&a[0][0]);
    let v2 = &delta1.apply(&a[1][1]) - &delta2.apply(&a[0][1]);
    let num1 = &(&v1 * &a[1][1]) - &(&v2 * &a[1][0]);
    let num2 = &(&v2 * &a[0][0]) - &(&v1 * &a[0][1]);
    let b1 = num1
        .div_exact(&det)
        .ok_or_else(|| Error::DivisionFail(format!("({num1}) / ({det})")))?;
    let b2 = num2
        .div_exact(&det)
        .ok_or_else(|| Error::DivisionFail(format!("({num2}) / ({det})")))?;
    let frame = LogFrame {
        f: f.clone(),
        s: s.clone(),
        t: t.clone(),
        ell1: s.ell(),
        ell2: t.ell(),
        fw1: (a[1][1].clone(), -&a[1][0]),
        fw2: (-&a[0][1], a[0][0].clone()),
        delta1,
        delta2,
        a,
        c,
        b1,
        b2,
    };
    frame.verify()?;
    Ok(frame)
}

/// Generators `ℓ = −s0 + s1·∂x + s2·∂y` of the left ideal defining the twisted module.
pub fn build_tilde_ideal(s: &SyzygyTriple, t: &SyzygyTriple) -> (WeylOp, WeylOp) {
    (s.ell(), t.ell())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn p(s: &str) -> Poly {
        Poly::parse(s, &Vars::xy()).unwrap()
    }

    fn triple(f: &Poly, a: &str, b: &str, c: &str) -> SyzygyTriple {
        SyzygyTriple::new(p(a), p(b), p(c), f).unwrap()
    }

    pub(crate) fn cusp_frame() -> LogFrame {
        let f = p("x*y*(x-y)");
        let s = triple(&f, "-3", "x", "y");
        let t = triple(&f, "2*x-y", "-x^2+x*y", "0");
        certify_saito(&s, &t, &f).unwrap()
    }

    #[test]
    fn cusp_frame_data() {
        let fr = cusp_frame();
        assert_eq!(fr.ell1, WeylOp::parse("3 + x*dx + y*dy", 2).unwrap());
        assert_eq!(fr.ell2, WeylOp::parse("-(2*x-y) + (-x^2+x*y)*dx", 2).unwrap());
        assert_eq!(fr.fw1, (p("0"), p("x*(x-y)")));
        assert_eq!(fr.fw2, (p("-y"), p("x")));
        assert_eq!((fr.b1.clone(), fr.b2.clone()), (p("0"), p("1")));
        assert_eq!(fr.c, rat(1, 1));
    }

    #[test]
    fn adjoint_of_spencer_entry() {
        // (−δ2 − b1)^T = δ2 + δ2(f)/f
        let fr = cusp_frame();
        let lhs = (&(-&fr.delta2) - &WeylOp::from_poly(&fr.b1)).adjoint();
        let rhs = &fr.delta2 + &WeylOp::from_poly(&fr.g().1);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn smooth_frame() {
        let f = p("x");
        let s = triple(&f, "-1", "x", "0");
        let t = triple(&f, "0", "0", "1");
        let (l1, l2) = build_tilde_ideal(&s, &t);
        assert_eq!(l1, WeylOp::parse("x*dx + 1", 2).unwrap());
        assert_eq!(l2, WeylOp::parse("dy", 2).unwrap());
        assert!(certify_saito(&s, &t, &f).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        let f = p("x*y*(x-y)");
        assert!(matches!(SyzygyTriple::new(p("3"), p("x"), p("y"), &f), Err(Error::BadSyzygy(_))));
        let fx = f.derive_index(0);
        let fy = f.derive_index(1);
        let s = SyzygyTriple::new(p("0"), f.clone(), fx.clone().scale(&rat(-1, 1)), &f);
        // (0, f, ·) with f·f_x + s2·f_y = 0 needs s2 = −f·f_x/f_y: use the Koszul pair instead
        assert!(s.is_err());
        let k1 = SyzygyTriple::new(-&fx, f.clone(), p("0"), &f).unwrap();
        let k2 = SyzygyTriple::new(-&fy, p("0"), f.clone(), &f).unwrap();
        assert!(matches!(certify_saito(&k1, &k2, &f), Err(Error::SaitoFail(_))));
    }

    #[test]
    fn hilbert_burch_route() {
        let f = p("(x^3+y^4+x*y^3)*(x^2-y^2)");
        let FreeBasis::Found(s, t) = find_free_basis(&f).unwrap() else {
            panic!("expected a free basis")
        };
        assert_eq!(s.s1, p("x^3 + 1/3*x^2*y - 4/3*x*y^2"));
        assert_eq!(s.s2, p("2/3*x^2*y + 1/3*x*y^2 - y^3"));
        assert_eq!(s.s0, p("-5*x^2 - 5/3*x*y + 6*y^2"));
        assert_eq!(t.s1, p("x^2 - 4*x*y - 3*x^2*y - 4*x*y^2 + y^3"));
        let fr = certify_saito(&s, &t, &f).unwrap();
        assert!(!fr.c.is_zero());
    }

    #[test]
    fn non_free_and_import() {
        let f = p("(x^3+y^4+x*y^3)*(x^2+y^2)");
        assert_eq!(find_free_basis(&f).unwrap(), FreeBasis::NotFree { generators: 3 });
        let doc = r#"{
            "f": "(x^3+y^4+x*y^3)*(x^2+y^2)",
            "s": ["(115/6*y-5/2)*x - 6*y^3 - 43/6*y^2 + 9*y",
                  "(-23/6*y+1/2)*x^2 + (y^3+y^2-2*y)*x - 5/6*y^3",
                  "(1/3*y+1/2)*x^2 + (-3*y^2+1/2*y)*x + y^4 + 4/3*y^3 - 3/2*y^2"],
            "t": ["46/15*x^2 + (-24/25*y^2+22/75*y)*x + 12/5*y^2",
                  "-46/75*x^3 + (4/25*y^2-2/25*y)*x^2 - 8/15*y^2*x",
                  "4/75*x^3 - 12/25*y*x^2 + (4/25*y^3-2/75*y^2)*x - 2/5*y^3"]
        }"#;
        let (s, t) = parse_basis(doc, &f).unwrap();
        let fr = certify_saito(&s, &t, &f).unwrap();
        assert_eq!(fr.c, rat(1, 3));
        let flipped = doc.replace("(115/6*y-5/2)*x", "-(115/6*y-5/2)*x");
        assert!(matches!(parse_basis(&flipped, &f), Err(Error::BadSyzygy(_))));
        assert!(matches!(parse_basis("{\"f\": 1}", &f), Err(Error::Format(_))));
    }

    #[test]
    fn not_reduced() {
        assert!(matches!(find_free_basis(&p("x^2*y")), Err(Error::NotReduced(_))));
    }
}
