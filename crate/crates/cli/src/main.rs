use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use trinomial::amoeba::{amoeba_scan, AmoebaOptions, GridSpec};
use trinomial::mellinbarnes::{residues, DivisorPairing, MBIntegralData, ResidueCone};
use trinomial::oracle::{monomial_from_log, principal_path};
use trinomial::rational::{self, Rational};
use trinomial::{
    build_reduction, IntegerMatrix, MultiIndex, PairSelection, PairTag, Part, PuiseuxSeries, RationalMatrix, Reduction,
    TaylorSeries, TrinomialSystem,
};

mod format;

use format::{complex, complex_json, integer_matrix, rational_matrix};

#[derive(Parser)]
#[command(name = "trinomial", version, about = "Hypergeometric and Puiseux series solutions of reduced trinomial systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write results to a file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "TRINOMIAL_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SystemArgs {
    /// System file: {"n": .., "omega": [columns], "sigma": [columns]}.
    #[arg(long)]
    system: PathBuf,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    system: SystemArgs,

    /// Pair tags per equation (w0, s0, ws); all w0 when omitted.
    #[arg(long)]
    pairs: Option<String>,

    /// Exponent vector of the monomial y^d, e.g. 1,1 or 1/2,3/4.
    #[arg(long)]
    d: String,

    #[arg(long, default_value_t = 10)]
    max_degree: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the reduction data of a pair selection.
    Reduce {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        pairs: String,
    },
    /// Dump Taylor coefficients up to a total degree.
    Taylor {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Dump Puiseux coefficients and support points.
    Puiseux {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Evaluate the series at a point.
    Eval {
        #[command(flatten)]
        series: SeriesArgs,
        /// Point x, e.g. 0.1,0.1 or 20+1i,1.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Only this branch; every branch when omitted.
        #[arg(long)]
        branch: Option<usize>,
    },
    /// Compare the series against numerical continuation.
    Verify {
        #[command(flatten)]
        series: SeriesArgs,
        /// Evaluation point; repeat for several.
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Base number of continuation steps.
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Residue lattice and coefficients of the Mellin-Barnes integral.
    MbResidues {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        d: String,
        /// Divisor groups of 1-based polar families, e.g. "2,3|1,4".
        #[arg(long)]
        pairing: String,
        /// Cone rays separated by ';', e.g. "2,-1;-1,2".
        #[arg(long, allow_hyphen_values = true)]
        rays: String,
        /// Cone apex inside U; a default interior point when omitted.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        /// Largest total pole order.
        #[arg(long, default_value_t = 6)]
        bound: u64,
        /// Skip points with zero residue.
        #[arg(long)]
        nonzero: bool,
    },
    /// Sample the discriminant amoeba on a grid.
    Amoeba {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        lower: String,
        #[arg(long, allow_hyphen_values = true)]
        upper: String,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        #[arg(long, default_value_t = 20)]
        attempts: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<trinomial::Error> for Failure {
    fn from(e: trinomial::Error) -> Self {
        let message = format!("[{}] {e}", e.module());
        if e.is_numerical() {
            Failure::Numerical(message)
        } else {
            Failure::Validation(message)
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(format!("[io] {e}"))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn invalid<T>(message: impl Into<String>) -> Outcome<T> {
    Err(Failure::Validation(message.into()))
}

fn load_system(path: &Path) -> Outcome<(TrinomialSystem, String)> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("[cli] {}: {e}", path.display())))?;
    let system = TrinomialSystem::from_json(&text)?;
    let canonical = system.to_json();
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok((system, hash))
}

fn parse_point(text: &str, n: usize) -> Outcome<Vec<Complex64>> {
    let x = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<Complex64>()
                .map_err(|_| Failure::Validation(format!("[cli] bad complex number {v:?}")))
        })
        .collect::<Outcome<Vec<_>>>()?;
    if x.len() != n {
        return invalid(format!("[cli] expected {n} coordinates, got {}", x.len()));
    }
    Ok(x)
}

fn parse_reals(text: &str) -> Outcome<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Failure::Validation(format!("[cli] bad number {v:?}"))))
        .collect()
}

fn selection(pairs: Option<&str>, n: usize) -> Outcome<PairSelection> {
    let sel = match pairs {
        Some(p) => p.parse::<PairSelection>()?,
        None => PairSelection::uniform(n, PairTag::W0),
    };
    if sel.len() != n {
        return invalid(format!("[systems] expected {n} pair tags, got {}", sel.len()));
    }
    Ok(sel)
}

fn d_vector(text: &str, n: usize) -> Outcome<Vec<Rational>> {
    let d = rational::parse_list(text)?;
    if d.len() != n {
        return invalid(format!("[cli] expected {n} entries in d, got {}", d.len()));
    }
    Ok(d)
}

/// Writes the header line and the body; JSON bodies get the header as `meta`.
struct Report {
    format: Format,
    meta: Value,
    header: String,
}

impl Report {
    fn new(format: Format, seed: u64, hash: &str) -> Self {
        let version = env!("CARGO_PKG_VERSION");
        let args: Vec<String> = std::env::args().skip(1).collect();
        Self {
            format,
            header: format!("# trinomial {version} seed={seed} input_sha256={hash}\n# command: {}\n", args.join(" ")),
            meta: json!({"tool": "trinomial", "version": version, "seed": seed, "input_sha256": hash, "command": args}),
        }
    }

    fn emit(&self, out: &mut dyn Write, csv: &str, body: Value) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                out.write_all(self.header.as_bytes())?;
                out.write_all(csv.as_bytes())
            }
            Format::Json => {
                let mut object = body;
                object["meta"] = self.meta.clone();
                writeln!(out, "{}", serde_json::to_string_pretty(&object).expect("json serializes"))
            }
        }
    }
}

fn indices_text(red: &Reduction, part: Part) -> String {
    let v: Vec<String> = red.indices(part).iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn reduce(red: &Reduction) -> (String, Value) {
    let matrices: Vec<(&str, String, Value)> = vec![
        ("kappa", integer_matrix(red.kappa()), json_integer(red.kappa())),
        ("beta_bar", integer_matrix(red.beta_bar()), json_integer(red.beta_bar())),
        ("kappa_inv", rational_matrix(red.kappa_inv()), json_rational(red.kappa_inv())),
        ("phi", rational_matrix(red.phi()), json_rational(red.phi())),
        ("psi", rational_matrix(red.psi()), json_rational(red.psi())),
    ];
    let factors: Vec<String> = red.snf().invariant_factors().iter().map(|v| v.to_string()).collect();
    let mut csv = String::from("quantity,value\n");
    csv += &format!("selection,\"{}\"\n", red.selection());
    for (name, text, _) in &matrices {
        csv += &format!("{name},\"{text}\"\n");
    }
    for part in [Part::J, Part::L, Part::T] {
        csv += &format!("{part:?},\"{}\"\n", indices_text(red, part));
    }
    csv += &format!("invariant_factors,\"[{}]\"\n", factors.join(","));
    csv += &format!("branch_count,{}\n", red.branch_count());
    let mut body = json!({
        "selection": red.selection().to_string(),
        "J": red.indices(Part::J).iter().map(|i| i + 1).collect::<Vec<_>>(),
        "L": red.indices(Part::L).iter().map(|i| i + 1).collect::<Vec<_>>(),
        "T": red.indices(Part::T).iter().map(|i| i + 1).collect::<Vec<_>>(),
        "invariant_factors": factors,
        "branch_count": red.branch_count(),
    });
    for (name, _, value) in matrices {
        body[name] = value;
    }
    (csv, body)
}

fn json_integer(m: &IntegerMatrix) -> Value {
    json!((0..m.dim()).map(|i| m.row(i).iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn json_rational(m: &RationalMatrix) -> Value {
    json!((0..m.dim()).map(|i| m.row(i).iter().map(rational::format).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn k_json(k: &MultiIndex) -> Value {
    json!(k.0)
}

/// Series value at `x` on one branch: the Taylor series for the identity
/// selection, the Puiseux series otherwise.
fn evaluate(series: &PuiseuxSeries, x: &[Complex64], degree: u64, branch: usize) -> trinomial::Result<Complex64> {
    if series.reduction().is_identity() {
        series.taylor().evaluate(x, degree)
    } else {
        series.evaluate(x, degree, branch)
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Validation(format!("[cli] {e}")))?;
    }
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    let verdict = match &cli.command {
        Command::Reduce { system, pairs } => {
            let (sys, hash) = load_system(&system.system)?;
            let red = build_reduction(&sys, &selection(Some(pairs), sys.n())?)?;
            let (csv, body) = reduce(&red);
            Report::new(cli.format, cli.seed, &hash).emit(&mut out, &csv, body)?;
            Ok(())
        }
        Command::Taylor { series } | Command::Puiseux { series } => {
            let (sys, hash) = load_system(&series.system.system)?;
            let red = build_reduction(&sys, &selection(series.pairs.as_deref(), sys.n())?)?;
            let d = d_vector(&series.d, sys.n())?;
            let report = Report::new(cli.format, cli.seed, &hash);
            let mut csv = Vec::new();
            let body = if matches!(cli.command, Command::Taylor { .. }) {
                let s = TaylorSeries::new(red, d)?;
                s.write_csv(&mut csv, series.max_degree)?;
                let rows: Vec<Value> = s
                    .coefficients(series.max_degree)?
                    .iter()
                    .map(|(k, c)| json!({"k": k_json(k), "coefficient": rational::format(c)}))
                    .collect();
                json!({"coefficients": rows})
            } else {
                let s = PuiseuxSeries::new(red, d)?;
                s.write_csv(&mut csv, series.max_degree)?;
                let rows = MultiIndex::up_to_degree(sys.n(), series.max_degree)
                    .iter()
                    .map(|k| {
                        let c = s.coefficient(k)?;
                        Ok(json!({
                            "k": k_json(k),
                            "m": s.support(k).iter().map(rational::format).collect::<Vec<_>>(),
                            "magnitude": rational::format(&c.magnitude),
                            "phase": rational::format(&c.phase),
                        }))
                    })
                    .collect::<trinomial::Result<Vec<_>>>()?;
                json!({"branch_count": s.branch_count(), "coefficients": rows})
            };
            report.emit(&mut out, &String::from_utf8(csv).expect("utf-8 csv"), body)?;
            Ok(())
        }
        Command::Eval { series, x, branch } => {
            let (sys, hash) = load_system(&series.system.system)?;
            let red = build_reduction(&sys, &selection(series.pairs.as_deref(), sys.n())?)?;
            let s = PuiseuxSeries::new(red, d_vector(&series.d, sys.n())?)?;
            let x = parse_point(x, sys.n())?;
            let count = if s.reduction().is_identity() { 1 } else { s.branch_count() };
            let branches: Vec<usize> = match branch {
                Some(b) => vec![*b],
                None => (0..count).collect(),
            };
            let mut csv = format!("# branches={count}\nbranch,value\n");
            let mut rows = Vec::new();
            for b in branches {
                let v = evaluate(&s, &x, series.max_degree, b)?;
                csv += &format!("{b},\"{}\"\n", complex(v));
                rows.push(json!({"branch": b, "value": complex_json(v)}));
            }
            Report::new(cli.format, cli.seed, &hash).emit(&mut out, &csv, json!({"branch_count": count, "values": rows}))?;
            Ok(())
        }
        Command::Verify { series, x, tol, steps } => {
            let (sys, hash) = load_system(&series.system.system)?;
            let red = build_reduction(&sys, &selection(series.pairs.as_deref(), sys.n())?)?;
            let d = d_vector(&series.d, sys.n())?;
            let s = PuiseuxSeries::new(red, d.clone())?;
            let mut csv = String::from("x,series,oracle,branch,delta\n");
            let mut rows = Vec::new();
            let mut worst = 0f64;
            for point in x {
                let xv = parse_point(point, sys.n())?;
                let path = principal_path(&sys, &xv, *steps, 1e-12)?;
                let exact = monomial_from_log(&path.endpoint().log_y, &d);
                let (branch, value, delta) = if s.reduction().is_identity() {
                    let v = s.taylor().evaluate(&xv, series.max_degree)?;
                    (0, v, (v - exact).norm())
                } else {
                    s.best_branch(&xv, series.max_degree, exact)?
                };
                worst = worst.max(delta);
                csv += &format!("\"{point}\",\"{}\",\"{}\",{branch},{delta:.3e}\n", complex(value), complex(exact));
                rows.push(json!({
                    "x": point, "series": complex_json(value), "oracle": complex_json(exact),
                    "branch": branch, "delta": delta,
                }));
            }
            let pass = worst < *tol;
            let verdict = if pass { "PASS" } else { "FAIL" };
            csv += &format!("# max_abs_delta={worst:.3e} tol={tol:e}\n{verdict}\n");
            Report::new(cli.format, cli.seed, &hash).emit(
                &mut out,
                &csv,
                json!({"points": rows, "max_abs_delta": worst, "tol": tol, "result": verdict}),
            )?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Numerical(format!("[oracle] max |delta| {worst:.3e} exceeds {tol:e}")))
            }
        }
        Command::MbResidues { system, d, pairing, rays, gamma, bound, nonzero } => {
            let (sys, hash) = load_system(&system.system)?;
            let n = sys.n();
            let mut data = MBIntegralData::new(&sys, d_vector(d, n)?)?;
            if let Some(g) = gamma {
                data = data.with_gamma(rational::parse_list(g)?)?;
            }
            let pairing = DivisorPairing::parse(pairing, n)?;
            let cone = ResidueCone::parse(data.gamma().to_vec(), rays)?;
            let res = residues(&data, &pairing, &cone, *bound)?;
            let ks: Vec<String> = (1..=n).map(|j| format!("k{j}")).collect();
            let zs: Vec<String> = (1..=n).map(|j| format!("z{j}")).collect();
            let mut csv = format!(
                "# pairing={pairing} gamma=({})\n{},families,{},residue\n",
                data.gamma().iter().map(rational::format).collect::<Vec<_>>().join(","),
                ks.join(","),
                zs.join(",")
            );
            let mut rows = Vec::new();
            for r in res.iter().filter(|r| !*nonzero || !r.is_zero()) {
                let hit = &r.hit;
                let value = match &r.exact {
                    Some(v) => rational::format(v),
                    None => format!("{:.16e}", r.value),
                };
                let families: Vec<String> = hit.families.iter().map(|f| (f + 1).to_string()).collect();
                let z: Vec<String> = r.point.z.iter().map(rational::format).collect();
                let k: Vec<String> = hit.nu.0.iter().map(|v| v.to_string()).collect();
                csv += &format!("{},{},{},{value}\n", k.join(","), families.join(";"), z.join(","));
                rows.push(json!({
                    "k": k_json(&hit.nu), "families": hit.families.iter().map(|f| f + 1).collect::<Vec<_>>(),
                    "z": z, "residue": value, "exact": r.exact.is_some(),
                }));
            }
            Report::new(cli.format, cli.seed, &hash).emit(&mut out, &csv, json!({"pairing": pairing.to_string(), "residues": rows}))?;
            Ok(())
        }
        Command::Amoeba { system, lower, upper, resolution, attempts, tol } => {
            let (sys, hash) = load_system(&system.system)?;
            let spec = GridSpec {
                lower: parse_reals(lower)?,
                upper: parse_reals(upper)?,
                resolution: *resolution,
            };
            let options = AmoebaOptions {
                attempts: *attempts,
                tol: *tol,
                seed: cli.seed,
                ..Default::default()
            };
            let grid = amoeba_scan(&sys, &spec, &options)?;
            let mut csv = Vec::new();
            grid.write_csv(&mut csv)?;
            let (complement, unbounded) = grid.complement_components();
            let summary = format!(
                "# amoeba_components={} complement_components={complement} unbounded={unbounded}\n",
                grid.amoeba_components()
            );
            let mut text = String::from_utf8(csv).expect("utf-8 csv");
            text += &summary;
            let cells: Vec<Value> = grid
                .centers
                .iter()
                .zip(&grid.members)
                .zip(&grid.scores)
                .map(|((c, m), s)| json!({"rho": c, "member": m, "score": s}))
                .collect();
            Report::new(cli.format, cli.seed, &hash).emit(
                &mut out,
                &text,
                json!({
                    "cells": cells, "amoeba_components": grid.amoeba_components(),
                    "complement_components": complement, "unbounded_complement_components": unbounded,
                }),
            )?;
            Ok(())
        }
    };
    out.flush()?;
    verdict
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
