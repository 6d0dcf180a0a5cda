//! End-to-end orchestration of both routes and the serializable report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::derham::{cohomology, filtered_resolution, truncate, truncate_at, CohomologyClasses, FilteredComplex, TruncatedComplex};
use crate::error::{Error, Result};
use crate::h2fast::{h2_basis, quotient_basis, H2Report};
use crate::poly::{check_reduced, rat_to_string, Poly};
use crate::saito::{certify_saito, find_free_basis, import_basis, parse_basis, FreeBasis, LogFrame, SyzygyTriple};
use crate::transfer::{default_degree_cap, log_basis, transfer_classes, DForm, LogFormBasis};
use crate::weyl::{bfunction_integration, BFunction, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Full,
    Saito,
    H2,
    Bfun,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Full => "full",
            Command::Saito => "saito",
            Command::H2 => "h2",
            Command::Bfun => "bfun",
        }
    }
}

/// Where a free basis comes from when the Hilbert-Burch route is not used.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisSource {
    File(PathBuf),
    Json(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComputeRequest {
    pub command: Command,
    pub f: Poly,
    pub basis: Option<BasisSource>,
    /// 0 results only, 1 verify certificates, 2 also recompute at raised bounds.
    pub check_level: u8,
    pub degree_cap: Option<usize>,
}

impl ComputeRequest {
    pub fn new(command: Command, f: Poly) -> Self {
        ComputeRequest {
            command,
            f,
            basis: None,
            check_level: 1,
            degree_cap: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SaitoBlock {
    pub source: String,
    pub s: [String; 3],
    pub t: [String; 3],
    pub delta1: String,
    pub delta2: String,
    pub c: String,
    pub b1: String,
    pub b2: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BBlock {
    pub b: String,
    pub integral_roots: Vec<i64>,
    pub k0: Option<i64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
}

impl From<[usize; 3]> for Dims {
    fn from(d: [usize; 3]) -> Self {
        Dims { h0: d[0], h1: d[1], h2: d[2] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BasisBlock {
    /// `g`
    pub h0: Vec<String>,
    /// `[c1, c2]` for `c1·ω₁ + c2·ω₂`
    pub h1: Vec<[String; 2]>,
    /// `g` for `g·ω₁∧ω₂`
    pub h2: Vec<String>,
    pub normalization: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct H2Block {
    pub dim: usize,
    /// `g` for `g·dx∧dy/f`
    pub basis: Vec<String>,
    pub k0: Option<i64>,
    pub conditions: [bool; 3],
    pub operators: Vec<String>,
}

/// Machine-readable outcome of one request.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub reduced: Option<bool>,
    pub saito: Option<SaitoBlock>,
    pub b_function: Option<BBlock>,
    pub resolution: Option<String>,
    pub truncated_dims: Option<Vec<usize>>,
    pub dims: Option<Dims>,
    pub basis: Option<BasisBlock>,
    pub h2: Option<H2Block>,
    pub checks: Vec<String>,
    pub exit_code: i32,
    pub error: Option<String>,
    pub timing_ms: BTreeMap<String, f64>,
}

/// Process exit status for a failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotReduced(_) => 2,
        Error::NotFree(_) | Error::SaitoFail(_) | Error::BadSyzygy(_) | Error::DivisionFail(_) => 3,
        Error::ConditionsViolated(_) => 4,
        Error::Parse { .. } | Error::UnknownVariable(_) | Error::ZeroOrConstantInput | Error::Format(_) => 5,
        _ => 6,
    }
}

/// Everything the general algorithm produces.
#[derive(Clone, Debug)]
pub struct FullResult {
    pub frame: LogFrame,
    pub complex: FilteredComplex,
    pub b: BFunction,
    pub truncated: TruncatedComplex,
    pub classes: CohomologyClasses,
    pub forms: [Vec<DForm>; 3],
    pub basis: LogFormBasis,
}

impl FullResult {
    pub fn dims(&self) -> [usize; 3] {
        self.classes.dims
    }
}

/// A certified frame, from the supplied basis or the Hilbert-Burch route.
pub fn frame_for(f: &Poly, basis: Option<&BasisSource>) -> Result<(LogFrame, &'static str)> {
    if f.is_constant() {
        return Err(Error::ZeroOrConstantInput);
    }
    if !check_reduced(f)? {
        return Err(Error::NotReduced(crate::poly::reducedness_witness(f).to_string()));
    }
    let ((s, t), source): ((SyzygyTriple, SyzygyTriple), &'static str) = match basis {
        Some(BasisSource::File(p)) => (import_basis(p, f)?, "basis-file"),
        Some(BasisSource::Json(text)) => (parse_basis(text, f)?, "basis-file"),
        None => match find_free_basis(f)? {
            FreeBasis::Found(s, t) => ((s, t), "hilbert-burch"),
            FreeBasis::NotFree { generators } => return Err(Error::NotFree(generators)),
        },
    };
    Ok((certify_saito(&s, &t, f)?, source))
}

/// b-function of `M̃ = D/D{ℓ₁, ℓ₂}` for integration.
pub fn twisted_bfunction(frame: &LogFrame) -> Result<BFunction> {
    bfunction_integration(&[frame.ell1.clone(), frame.ell2.clone()], &WeightVector::integration(2))
}

/// Frame → filtered resolution → b-function → truncation → transfer → preimages.
pub fn full_pipeline(frame: &LogFrame, cap: usize) -> Result<FullResult> {
    let complex = filtered_resolution(frame)?;
    let b = twisted_bfunction(frame)?;
    let truncated = truncate(&complex, b.k0)?;
    let classes = cohomology(&truncated);
    let forms = transfer_classes(&classes, &truncated, &complex)?;
    let basis = log_basis(&forms, frame, cap)?;
    Ok(FullResult {
        frame: frame.clone(),
        complex,
        b,
        truncated,
        classes,
        forms,
        basis,
    })
}

fn b_block(b: &BFunction) -> BBlock {
    BBlock {
        b: b.b.to_string(),
        integral_roots: b.integral_roots.clone(),
        k0: b.k0,
    }
}

fn saito_block(frame: &LogFrame, source: &str) -> SaitoBlock {
    SaitoBlock {
        source: source.to_string(),
        s: frame.s.strings(),
        t: frame.t.strings(),
        delta1: frame.delta1.to_string(),
        delta2: frame.delta2.to_string(),
        c: rat_to_string(&frame.c),
        b1: frame.b1.to_string(),
        b2: frame.b2.to_string(),
    }
}

fn h2_block(r: &H2Report) -> H2Block {
    H2Block {
        dim: r.dim,
        basis: r.basis.iter().map(Poly::to_string).collect(),
        k0: r.k0,
        conditions: r.conditions,
        operators: r.operators.iter().map(|l| l.to_string()).collect(),
    }
}

fn timed<T>(report: &mut Report, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let out = f();
    report.timing_ms.insert(stage.to_string(), t.elapsed().as_secs_f64() * 1000.0);
    out
}

fn ensure(ok: bool, what: &str, report: &mut Report) -> Result<()> {
    if !ok {
        return Err(Error::Internal(format!("check failed: {what}")));
    }
    report.checks.push(what.to_string());
    Ok(())
}

/// Report for a request that failed before it could be built (for example a parse error).
pub fn failed_report(command: Command, input: &str, e: &Error) -> (Report, i32) {
    let code = exit_code(e);
    let report = Report {
        command: command.name().to_string(),
        input: input.to_string(),
        error: Some(e.to_string()),
        exit_code: code,
        ..Default::default()
    };
    (report, code)
}

/// Runs one request; the report always comes back, the code is the process status.
pub fn run(req: &ComputeRequest) -> (Report, i32) {
    let mut report = Report {
        command: req.command.name().to_string(),
        input: req.f.to_string(),
        ..Default::default()
    };
    let code = match execute(req, &mut report) {
        Ok(()) => 0,
        Err(e) => {
            report.error = Some(e.to_string());
            exit_code(&e)
        }
    };
    report.exit_code = code;
    (report, code)
}

fn execute(req: &ComputeRequest, report: &mut Report) -> Result<()> {
    let f = &req.f;
    if f.is_constant() {
        return Err(Error::ZeroOrConstantInput);
    }
    let reduced = check_reduced(f)?;
    report.reduced = Some(reduced);
    if !reduced {
        return Err(Error::NotReduced(crate::poly::reducedness_witness(f).to_string()));
    }
    if req.command == Command::H2 {
        let r = timed(report, "h2", || h2_basis(f))?;
        if req.check_level >= 2 {
            if let Some(k) = r.k0 {
                for extra in 1..=2 {
                    let d = quotient_basis(&r.image_operators, k + extra, 2).len();
                    ensure(d == r.dim, &format!("h2 stable at k0+{extra}"), report)?;
                }
            }
        }
        report.b_function = Some(b_block(&r.b));
        report.dims = None;
        report.h2 = Some(h2_block(&r));
        return Ok(());
    }
    let (frame, source) = timed(report, "saito", || frame_for(f, req.basis.as_ref()))?;
    if req.check_level >= 1 {
        ensure(frame.verify().is_ok(), "saito certificate", report)?;
    }
    report.saito = Some(saito_block(&frame, source));
    match req.command {
        Command::Saito => return Ok(()),
        Command::Bfun => {
            let b = timed(report, "bfunction", || twisted_bfunction(&frame))?;
            report.b_function = Some(b_block(&b));
            return Ok(());
        }
        _ => {}
    }
    let cap = req.degree_cap.unwrap_or_else(|| default_degree_cap(f));
    let r = timed(report, "full", || full_pipeline(&frame, cap))?;
    if req.check_level >= 1 {
        ensure(r.complex.composite_is_zero(), "resolution composite", report)?;
        ensure(r.complex.is_filtered(), "resolution filtration", report)?;
        ensure(r.truncated.composite_is_zero(), "truncated composite", report)?;
        ensure(r.classes.higher.iter().all(|d| *d == 0), "no cohomology beyond F_2", report)?;
    }
    if req.check_level >= 2 {
        if let Some(bound) = r.truncated.bound {
            for extra in 1..=2 {
                let t = truncate_at(&r.complex, Some(bound + extra))?;
                ensure(cohomology(&t).dims == r.dims(), &format!("dims stable at k0+{extra}"), report)?;
            }
        }
    }
    report.b_function = Some(b_block(&r.b));
    report.resolution = Some(if r.complex.is_graded() { "spencer" } else { "adapted" }.to_string());
    report.truncated_dims = Some(r.truncated.stage_dims());
    report.dims = Some(r.dims().into());
    report.basis = Some(BasisBlock {
        h0: r.basis.h0.iter().map(Poly::to_string).collect(),
        h1: r.basis.h1.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
        h2: r.basis.h2.iter().map(Poly::to_string).collect(),
        normalization: format!(
            "frame coordinates against f*w1, f*w2 as constructed; det = c*f with c = {}",
            rat_to_string(&frame.c)
        ),
    });
    Ok(())
}

fn coord(c: &str, name: &str) -> Option<String> {
    match c {
        "0" => None,
        "1" => Some(name.to_string()),
        "-1" => Some(format!("-{name}")),
        _ if c.contains(['+', ' ']) || c[1..].contains('-') => Some(format!("({c})*{name}")),
        _ => Some(format!("{c}*{name}")),
    }
}

impl Report {
    /// Human-readable rendering with bases written in ω-coordinates.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} f = {}\n", self.command, self.input);
        if let Some(e) = &self.error {
            out += &format!("error (exit {}): {e}\n", self.exit_code);
        }
        if let Some(s) = &self.saito {
            out += &format!("delta1 = {}\ndelta2 = {}\nc = {}  b = ({}, {})  [{}]\n", s.delta1, s.delta2, s.c, s.b1, s.b2, s.source);
        }
        if let Some(b) = &self.b_function {
            let k0 = b.k0.map_or("none".to_string(), |k| k.to_string());
            out += &format!("b(s) = {}  k0 = {}\n", b.b, k0);
        }
        if let Some(t) = &self.truncated_dims {
            let kind = self.resolution.as_deref().unwrap_or("?");
            out += &format!("truncated complex ({kind}): {:?}\n", t);
        }
        if let Some(d) = self.dims {
            out += &format!("dims: h0 = {}, h1 = {}, h2 = {}\n", d.h0, d.h1, d.h2);
        }
        if let Some(b) = &self.basis {
            out += &format!("H0: {}\n", b.h0.join(", "));
            let h1: Vec<String> = b
                .h1
                .iter()
                .map(|[c1, c2]| {
                    let parts: Vec<String> = [coord(c1, "w1"), coord(c2, "w2")].into_iter().flatten().collect();
                    parts.join(" + ")
                })
                .collect();
            out += &format!("H1: {}\n", h1.join(", "));
            let h2: Vec<String> = b.h2.iter().filter_map(|g| coord(g, "w1^w2")).collect();
            out += &format!("H2: {}\n", h2.join(", "));
        }
        if let Some(h) = &self.h2 {
            let k0 = h.k0.map_or("none".to_string(), |k| k.to_string());
            out += &format!("h2 = {}  k0 = {}\nbasis (times dx^dy/f): {}\n", h.dim, k0, h.basis.join(", "));
        }
        out
    }
}
