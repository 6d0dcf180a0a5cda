use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use logcoh::pipeline::{failed_report, run, BasisSource, Command, ComputeRequest, Report};
use logcoh::{Error, Poly, Vars};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Cmd {
    /// Free basis, filtered resolution, truncation, transfer and preimages
    Full,
    /// Free basis and its Saito certificate only
    Saito,
    /// H2 by the syzygy-operator quotient
    H2,
    /// b-function of the twisted module
    Bfun,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Full => Command::Full,
            Cmd::Saito => Command::Saito,
            Cmd::H2 => Command::H2,
            Cmd::Bfun => Command::Bfun,
        }
    }
}

/// Logarithmic de Rham cohomology of a reduced plane curve f(x, y) = 0 over Q.
#[derive(Debug, Parser)]
#[command(name = "logcoh", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// The polynomial, e.g. "x*y*(x-y)"
    #[arg(long = "f", required_unless_present = "corpus", conflicts_with = "corpus")]
    f: Option<String>,
    /// JSON file with a free basis {"f", "s": [3], "t": [3]}
    #[arg(long)]
    basis_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// 0 results only, 1 verify certificates, 2 also recheck at raised bounds
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
    check_level: u8,
    /// Largest x, y degree tried by the preimage solves
    #[arg(long, env = "LOGCOH_DEGREE_CAP")]
    degree_cap: Option<usize>,
    /// Directory of *.poly files, each with an optional <stem>.basis.json
    #[arg(long)]
    corpus: Option<PathBuf>,
}

struct Job {
    label: String,
    text: String,
    basis: Option<PathBuf>,
}

fn request(cli: &Cli, job: &Job) -> (Report, i32) {
    let command: Command = cli.command.into();
    let f = match Poly::parse(&job.text, &Vars::xy()) {
        Ok(f) => f,
        Err(e) => return failed_report(command, &job.text, &e),
    };
    let mut req = ComputeRequest::new(command, f);
    req.basis = job.basis.clone().map(BasisSource::File);
    req.check_level = cli.check_level;
    req.degree_cap = cli.degree_cap;
    run(&req)
}

fn read_poly(path: &Path) -> Result<String, Error> {
    let raw = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let body: Vec<&str> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    Ok(body.join(" "))
}

fn corpus_jobs(dir: &Path) -> Result<Vec<Job>, Error> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Format(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "poly"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            let basis = path.with_file_name(format!("{stem}.basis.json"));
            Ok(Job {
                label: path.display().to_string(),
                text: read_poly(&path)?,
                basis: basis.exists().then_some(basis),
            })
        })
        .collect()
}

fn emit(cli: &Cli, reports: &[(String, Report)], single: bool) {
    match (cli.format, single) {
        (Format::Json, true) => println!("{}", serde_json::to_string_pretty(&reports[0].1).expect("report serializes")),
        (Format::Json, false) => {
            let all: Vec<_> = reports
                .iter()
                .map(|(file, r)| serde_json::json!({ "file": file, "report": r }))
                .collect();
            println!("{}", serde_json::to_string_pretty(&all).expect("report serializes"));
        }
        (Format::Text, true) => print!("{}", reports[0].1.to_text()),
        (Format::Text, false) => {
            for (file, r) in reports {
                println!("== {file}");
                print!("{}", r.to_text());
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (reports, code) = match (&cli.corpus, &cli.f) {
        (Some(dir), _) => match corpus_jobs(dir) {
            Ok(jobs) => {
                let out: Vec<(String, Report, i32)> = jobs
                    .par_iter()
                    .map(|job| {
                        let (r, c) = request(&cli, job);
                        (job.label.clone(), r, c)
                    })
                    .collect();
                let code = out.iter().map(|(_, _, c)| *c).max().unwrap_or(0);
                (out.into_iter().map(|(l, r, _)| (l, r)).collect::<Vec<_>>(), code)
            }
            Err(e) => {
                let (r, c) = failed_report(cli.command.into(), &dir.display().to_string(), &e);
                (vec![(dir.display().to_string(), r)], c)
            }
        },
        (None, Some(text)) => {
            let job = Job {
                label: text.clone(),
                text: text.clone(),
                basis: cli.basis_file.clone(),
            };
            let (r, c) = request(&cli, &job);
            (vec![(text.clone(), r)], c)
        }
        (None, None) => unreachable!("clap requires --f or --corpus"),
    };
    emit(&cli, &reports, cli.corpus.is_none());
    ExitCode::from(code as u8)
}
