//! Acceptance run: each criterion prints one PASS/FAIL line with its timing.
//!
//! A criterion listed in `KNOWN_FAILURES` is still evaluated verbatim and must
//! still fail; the list exists so the workspace test run stays green while the
//! failure stays visible. If one starts passing, the test flags the stale entry.

use std::time::{Duration, Instant};

use logcoh::derham::{cohomology, spencer_resolution, truncate_at, TruncatedComplex};
use logcoh::groebner::buchberger;
use logcoh::h2fast::{h2_basis, one_variable, syzygy_operators, ImageSpace};
use logcoh::linalg::{Echelon, SparseVec};
use logcoh::pipeline::{frame_for, full_pipeline, BasisSource, FullResult};
use logcoh::saito::{certify_saito, find_free_basis, FreeBasis};
use logcoh::transfer::default_degree_cap;
use logcoh::weyl::{weyl_gb, WeightVector, WeylOp};
use logcoh::{Mono, Poly, Rat, Vars};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(criterion, reason)`; see the project notes for the analysis.
const KNOWN_FAILURES: &[(usize, &str)] = &[
    (5, "exact b-function of the adjoint ideal is s(s-3), not s-3"),
    (8, "the one-variable b-function claim s-3 is not reproduced"),
];

const SMALL_BASIS: &str = r#"{
    "f": "(x^3+y^4+x*y^3)*(x^2+y^2)",
    "s": ["(115/6*y-5/2)*x - 6*y^3 - 43/6*y^2 + 9*y",
          "(-23/6*y+1/2)*x^2 + (y^3+y^2-2*y)*x - 5/6*y^3",
          "(1/3*y+1/2)*x^2 + (-3*y^2+1/2*y)*x + y^4 + 4/3*y^3 - 3/2*y^2"],
    "t": ["46/15*x^2 + (-24/25*y^2+22/75*y)*x + 12/5*y^2",
          "-46/75*x^3 + (4/25*y^2-2/25*y)*x^2 - 8/15*y^2*x",
          "4/75*x^3 - 12/25*y*x^2 + (4/25*y^3-2/75*y^2)*x - 2/5*y^3"]
}"#;

fn p(s: &str) -> Poly {
    Poly::parse(s, &Vars::xy()).unwrap()
}

fn ps(v: &[&str]) -> Vec<Poly> {
    v.iter().map(|s| p(s)).collect()
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.0.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|(_, ok)| *ok)
    }

    fn failures(&self) -> Vec<&str> {
        self.0.iter().filter(|(_, ok)| !ok).map(|(w, _)| w.as_str()).collect()
    }
}

/// Rank of a list of coordinate maps, for span comparisons.
fn rank(vectors: &[Vec<(usize, Mono, Rat)>]) -> usize {
    let mut index: Vec<(usize, Mono)> = Vec::new();
    let mut ech = Echelon::new();
    let mut r = 0;
    for v in vectors {
        let mut sv: SparseVec = v
            .iter()
            .map(|(k, m, c)| {
                let i = index.iter().position(|x| *x == (*k, *m)).unwrap_or_else(|| {
                    index.push((*k, *m));
                    index.len() - 1
                });
                (i, c.clone())
            })
            .collect();
        sv.sort_by_key(|(i, _)| *i);
        if ech.insert(&sv).is_some() {
            r += 1;
        }
    }
    r
}

fn coords(components: &[&Poly]) -> Vec<(usize, Mono, Rat)> {
    components
        .iter()
        .enumerate()
        .flat_map(|(k, q)| q.terms().map(move |(m, c)| (k, *m, c.clone())))
        .collect()
}

/// The two lists of polynomial tuples span the same space.
fn same_span(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> bool {
    let va: Vec<_> = a.iter().map(|t| coords(&t.iter().collect::<Vec<_>>())).collect();
    let vb: Vec<_> = b.iter().map(|t| coords(&t.iter().collect::<Vec<_>>())).collect();
    let joint: Vec<_> = va.iter().chain(&vb).cloned().collect();
    let r = rank(&va);
    r == a.len() && rank(&vb) == b.len() && rank(&joint) == r
}

/// Rank of `polys` at stage `F_0` modulo the image of the last truncated map.
fn rank_mod_image(tc: &TruncatedComplex, polys: &[Poly]) -> Option<usize> {
    let k = tc.stage_of(0)?;
    let mut ech = Echelon::new();
    if let Some(m) = k.checked_sub(1).map(|i| &tc.mats[i]) {
        for c in &m.cols {
            ech.insert(c);
        }
    }
    let mut r = 0;
    for q in polys {
        let mut v = Vec::new();
        for (m, c) in q.terms() {
            v.push((tc.bases[k].iter().position(|b| *b == (0, *m))?, c.clone()));
        }
        v.sort_by_key(|(i, _)| *i);
        if ech.insert(&v).is_some() {
            r += 1;
        }
    }
    Some(r)
}

fn full_for(f: &Poly, basis: Option<&BasisSource>) -> logcoh::Result<FullResult> {
    let (frame, _) = frame_for(f, basis)?;
    full_pipeline(&frame, default_degree_cap(f))
}

fn table_poly(q: u32) -> Poly {
    p(&format!("x^10 + y^{q} + x*y^{}", q - 1))
}

fn criterion_1(c: &mut Checks) {
    let r = match full_for(&p("x*y*(x-y)"), None) {
        Ok(r) => r,
        Err(e) => return c.check(format!("full pipeline: {e}"), false),
    };
    c.check("dims (1,3,2)", r.dims() == [1, 3, 2]);
    c.check("truncated stages (1,4,3)", r.truncated.stage_dims() == vec![1, 4, 3]);
    c.check("k0 = 1", r.b.k0 == Some(1));
    let one = |v: &[Poly]| v.iter().map(|q| vec![q.clone()]).collect::<Vec<_>>();
    c.check("H2 spans {x, y}", same_span(&one(&r.basis.h2), &one(&ps(&["x", "y"]))));
    let h1: Vec<Vec<Poly>> = r.basis.h1.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
    let reference = vec![ps(&["0", "-x"]), ps(&["0", "-y"]), ps(&["1", "0"])];
    c.check("H1 spans {-x w2, -y w2, w1}", same_span(&h1, &reference));
    c.check("H0 spans {1}", same_span(&one(&r.basis.h0), &one(&ps(&["1"]))));
}

fn criterion_2(c: &mut Checks) {
    let f = p("(x^3+y^4+x*y^3)*(x^2-y^2)");
    match find_free_basis(&f) {
        Ok(FreeBasis::Found(s, t)) => {
            c.check("two generators found", true);
            c.check("Saito certificate", certify_saito(&s, &t, &f).is_ok_and(|fr| fr.verify().is_ok()));
        }
        other => c.check(format!("two generators found (got {other:?})"), false),
    }
}

fn criterion_3(c: &mut Checks) {
    let f = p("(x^3+y^4+x*y^3)*(x^2+y^2)");
    let nf = find_free_basis(&f);
    c.check("NotFree with 3 generators", matches!(nf, Ok(FreeBasis::NotFree { generators: 3 })));
    let basis = BasisSource::Json(SMALL_BASIS.into());
    let (frame, _) = match frame_for(&f, Some(&basis)) {
        Ok(x) => x,
        Err(e) => return c.check(format!("import: {e}"), false),
    };
    c.check("c = 1/3", frame.c == Rat::new(1.into(), 3.into()));
    let r = match full_pipeline(&frame, default_degree_cap(&f)) {
        Ok(r) => r,
        Err(e) => return c.check(format!("full pipeline: {e}"), false),
    };
    c.check("dims (1,3,7)", r.dims() == [1, 3, 7]);
    c.check("H2 entries are 7 monomials", r.basis.h2.len() == 7 && r.basis.h2.iter().all(|g| g.len() == 1));
    let reference = ps(&["1", "-x", "y^3", "-x*y^3", "x*y^2", "x^3*y", "y^4"]);
    let joint: Vec<Poly> = r.basis.h2.iter().chain(&reference).cloned().collect();
    let ours = rank_mod_image(&r.truncated, &r.basis.h2);
    c.check(
        "H2 spans the listed basis modulo the image",
        ours == Some(7) && rank_mod_image(&r.truncated, &reference) == Some(7) && rank_mod_image(&r.truncated, &joint) == Some(7),
    );
}

fn criterion_4(c: &mut Checks) {
    for (q, want) in [(11, 8), (12, 9), (13, 10), (14, 11)] {
        let t = Instant::now();
        let dim = h2_basis(&table_poly(q)).map(|r| r.dim);
        let secs = t.elapsed().as_secs_f64();
        c.check(format!("q = {q}: h2 = {want} ({secs:.1}s)"), dim.as_ref().is_ok_and(|d| *d == want) && secs < 120.0);
    }
}

fn criterion_5(c: &mut Checks) {
    let v = Vars::new(&["x"]);
    let l = WeylOp::parse("(1-x)*x*dx + 2*x", 1).unwrap();
    match one_variable(&l) {
        Ok((b, basis)) => {
            c.check(format!("b(s) = s - 3 (got {})", b.b), b.b.to_string() == "s - 3");
            let want = vec![Poly::parse("1", &v).unwrap(), Poly::parse("x^3", &v).unwrap()];
            c.check("quotient basis {1, x^3}", basis == want);
        }
        Err(e) => c.check(format!("one-variable route: {e}"), false),
    }
}

fn criterion_6(c: &mut Checks) {
    match full_for(&p("x"), None) {
        Ok(r) => {
            c.check("dims (1,1,0)", r.dims() == [1, 1, 0]);
            let stable = r.truncated.bound.map(|b| truncate_at(&r.complex, Some(b + 1)));
            c.check(
                "dims at bound + 1",
                matches!(stable, Some(Ok(t)) if cohomology(&t).dims == [1, 1, 0]),
            );
        }
        Err(e) => c.check(format!("full pipeline: {e}"), false),
    }
}

/// Reduced polynomials of degree ≤ 5 with a few small-coefficient terms.
fn random_corpus(n: usize, seed: u64) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = Vars::xy();
    let mut out: Vec<Poly> = Vec::new();
    while out.len() < n {
        let terms = rng.gen_range(2..=4);
        let mut f = Poly::zero(&vars);
        for _ in 0..terms {
            let d = rng.gen_range(1..=5u16);
            let a = rng.gen_range(0..=d);
            let c = loop {
                let c: i64 = rng.gen_range(-3..=3);
                if c != 0 {
                    break c;
                }
            };
            f.add_term(Mono([a, d - a, 0]), Rat::from_integer(c.into()));
        }
        let ok = !f.is_constant() && logcoh::poly::check_reduced(&f).unwrap_or(false);
        if ok && !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// Every algebraic invariant we can check on one input.
fn properties_for(f: &Poly, basis: Option<&BasisSource>, c: &mut Checks, both: &mut usize) {
    let tag = f.to_string();
    let fx = f.derive_index(0);
    let fy = f.derive_index(1);
    let gb = buchberger(&[f.clone(), fx.clone(), fy.clone()]);
    c.check(format!("{tag}: S-pairs of (f, fx, fy)"), gb.s_pairs_reduce_to_zero());
    let fast = h2_basis(f);
    if let Ok(ops) = syzygy_operators(f) {
        let w = WeightVector::integration(2);
        let adj: Vec<WeylOp> = ops.iter().map(WeylOp::adjoint).collect();
        c.check(format!("{tag}: Weyl S-pairs of adjoint operators"), weyl_gb(&adj, &w).s_pairs_reduce_to_zero());
        c.check(format!("{tag}: adjoint involution"), ops.iter().all(|l| l.adjoint().adjoint() == *l));
        if ops.len() >= 2 {
            let (a, b) = (&ops[0], &ops[1]);
            c.check(format!("{tag}: adjoint anti-homomorphism"), (a * b).adjoint() == &b.adjoint() * &a.adjoint());
        }
    }
    if let Ok(r) = &fast {
        if let Some(k) = r.k0 {
            let d1 = ImageSpace::new(&r.image_operators, k + 1, 2).quotient_basis().len();
            let d2 = ImageSpace::new(&r.image_operators, k + 2, 2).quotient_basis().len();
            c.check(format!("{tag}: h2 stable at k0+1, k0+2"), d1 == r.dim && d2 == r.dim);
        }
    }
    let (frame, _) = match frame_for(f, basis) {
        Ok(x) => x,
        Err(logcoh::Error::NotFree(_)) => return,
        Err(e) => return c.check(format!("{tag}: frame: {e}"), false),
    };
    c.check(format!("{tag}: syzygy identities and certificate"), frame.verify().is_ok());
    c.check(format!("{tag}: Spencer composite zero"), spencer_resolution(&frame).is_ok_and(|s| s.composite_is_zero()));
    let r = match full_pipeline(&frame, default_degree_cap(f)) {
        Ok(r) => r,
        Err(e) => return c.check(format!("{tag}: full pipeline: {e}"), false),
    };
    c.check(format!("{tag}: resolution composite zero"), r.complex.composite_is_zero());
    c.check(format!("{tag}: resolution filtered"), r.complex.is_filtered());
    c.check(format!("{tag}: no cohomology beyond F_2"), r.classes.higher.iter().all(|d| *d == 0));
    if let Some(b) = r.truncated.bound {
        let stable = (1..=2).all(|e| truncate_at(&r.complex, Some(b + e)).is_ok_and(|t| cohomology(&t).dims == r.dims()));
        c.check(format!("{tag}: truncation stable at +1, +2"), stable);
    }
    c.check(format!("{tag}: tau preimages re-verified"), r.basis.verify(&r.forms, &frame));
    if let Ok(h) = &fast {
        *both += 1;
        c.check(format!("{tag}: h2 agrees across routes"), h.dim == r.dims()[2]);
        let top = r.basis.h2.iter().chain(&h.basis).filter_map(Poly::degree).max().unwrap_or(0) as i64;
        let k = h.k0.unwrap_or(0).max(top);
        let img = ImageSpace::new(&h.image_operators, k, 2);
        c.check(format!("{tag}: h2 bases span the same quotient"), img.same_span(&r.basis.h2, &h.basis));
    }
}

fn criterion_7(c: &mut Checks) {
    let mut inputs: Vec<(Poly, Option<BasisSource>)> = random_corpus(24, 0x5eed).into_iter().map(|f| (f, None)).collect();
    for named in ["x*y*(x-y)", "x", "x*y", "(x^3+y^4+x*y^3)*(x^2-y^2)", "x^2 - y^3"] {
        inputs.push((p(named), None));
    }
    inputs.push((p("(x^3+y^4+x*y^3)*(x^2+y^2)"), Some(BasisSource::Json(SMALL_BASIS.into()))));
    let mut both = 0;
    for (f, basis) in &inputs {
        properties_for(f, basis.as_ref(), c, &mut both);
    }
    c.check(format!("{} inputs, {} run through both routes", inputs.len(), both), both >= 10);
}

fn criterion_8(c: &mut Checks) {
    let cusp = full_for(&p("x*y*(x-y)"), None);
    c.check("worked example dims (1,3,2)", cusp.is_ok_and(|r| r.dims() == [1, 3, 2]));
    let small = p("(x^3+y^4+x*y^3)*(x^2+y^2)");
    let r = full_for(&small, Some(&BasisSource::Json(SMALL_BASIS.into())));
    c.check("Example small dims (1,3,7)", r.as_ref().is_ok_and(|r| r.dims() == [1, 3, 7]));
    if let Ok(r) = &r {
        let ok = r.basis.tau1.iter().all(|s| s.d_order == 0 && s.degree <= 6);
        c.check("Example small tau1 solvable by degree 6 with no derivatives", ok);
    }
    c.check("fast route h2 = 7 for Example small", h2_basis(&small).is_ok_and(|h| h.dim == 7));
    for (q, h2) in [(11, 8), (12, 9), (13, 10), (14, 11), (20, 17), (21, 18)] {
        let r = full_for(&table_poly(q), None);
        c.check(format!("table row q = {q}: (h2,h1,h0) = ({h2},1,1)"), r.is_ok_and(|r| r.dims() == [1, 1, h2]));
    }
    let l = WeylOp::parse("(1-x)*x*dx + 2*x", 1).unwrap();
    let one = one_variable(&l);
    c.check("one-variable b(s) = s - 3", one.as_ref().is_ok_and(|(b, _)| b.b.to_string() == "s - 3"));
    c.check("one-variable quotient {1, x^3}", one.is_ok_and(|(_, basis)| basis.len() == 2));
}

#[test]
fn acceptance() {
    type Criterion = fn(&mut Checks);
    let criteria: [(usize, &str, Criterion, u64); 8] = [
        (1, "worked example end to end", criterion_1, 10),
        (2, "Hilbert-Burch free basis", criterion_2, 10),
        (3, "NotFree path and basis import", criterion_3, 120),
        (4, "fast H2 table", criterion_4, 480),
        (5, "one-variable b-function criterion", criterion_5, 1),
        (6, "smooth calibration f = x", criterion_6, 5),
        (7, "property suites", criterion_7, 900),
        (8, "every published numeric value", criterion_8, 900),
    ];
    let mut unexpected = Vec::new();
    for (n, name, run, limit) in criteria {
        let mut checks = Checks::new();
        let t = Instant::now();
        run(&mut checks);
        let elapsed = t.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        checks.check(format!("runtime under {limit}s"), in_time);
        let pass = checks.passed();
        println!(
            "criterion {n} [{}] {name} ({} checks, {:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            checks.0.len(),
            elapsed.as_secs_f64()
        );
        for w in checks.failures() {
            println!("    failed: {w}");
        }
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == n);
        match (pass, known) {
            (false, None) => unexpected.push(format!("criterion {n} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {n} passes but is listed as a known failure")),
            (false, Some((_, why))) => println!("    known failure: {why}"),
            (true, None) => {}
        }
    }
    assert!(unexpected.is_empty(), "{unexpected:?}");
}
