//! Batch front end: reads operator files and inline parameters, runs one
//! analysis per invocation, writes a machine-readable report to stdout.
//!
//! Exit codes: 0 pass/feasible, 1 refuted/infeasible, 2 inconclusive,
//! 3 input or usage error. Reports are deterministic for fixed inputs and
//! seed (the timing field excluded).

mod io;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use sepwit_core::abc::{self, AbcParams};
use sepwit_core::choi::{self, SuperOperator};
use sepwit_core::cones::{self, CertifiedPositiveMap};
use sepwit_core::eig;
use sepwit_core::matrix::HermitianOperator;
use sepwit_core::report::{Certificate, TestReport, Verdict};
use sepwit_core::rng::RandomModel;
use sepwit_core::separability;
use sepwit_core::witness;
use sepwit_core::{BipartiteOperator, ComplexMatrix};

use io::{matrix_json, operator_json, parse_operator_file, vector_json};

#[derive(Parser)]
#[command(name = "sepwit", version, about = "Bipartite operator analysis")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Numerical tolerance for PSD/refutation thresholds
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every randomized procedure
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for sampled necessary tests
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Report format
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "text"])]
    report: String,
}

#[derive(Subcommand)]
enum Command {
    /// Realign an operator file (swap the middle index pair)
    Reshuffle {
        #[arg(long = "in")]
        input: String,
    },
    /// Jamiolkowski transform of a map given by its elementary-basis matrix
    Choi {
        #[arg(long = "in")]
        input: String,
    },
    /// Circled product of two operators on equal square factors
    Circmul {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Complete-positivity (Choi) test of a map
    CpTest {
        #[arg(long = "in")]
        input: String,
        /// Interpret the input as a Choi operator instead of a map matrix
        #[arg(long)]
        choi: bool,
    },
    /// Sampled k-block-positivity test with see-saw refinement
    Blockpos {
        #[arg(long = "in")]
        input: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Basis-quadruple necessary test for block positivity
    Sommers {
        #[arg(long = "in")]
        input: String,
    },
    /// Construct an operator that defeats a finite block battery
    Counterexample {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "n-left", default_value_t = 3)]
        n_left: usize,
        #[arg(long = "n-right", default_value_t = 3)]
        n_right: usize,
    },
    /// Exact block-positivity decision for the tridiagonal family
    Abc {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
    },
    /// Positive partial transpose criterion
    Ppt {
        #[arg(long = "in")]
        input: String,
    },
    /// Reduction criterion
    Reduction {
        #[arg(long = "in")]
        input: String,
    },
    /// Positive-maps criterion with a named battery
    KposCriterion {
        #[arg(long = "in")]
        input: String,
        /// Comma-separated battery: transposition, reduction
        #[arg(long, default_value = "transposition,reduction")]
        maps: String,
    },
    /// Schmidt rank (rank of the realignment)
    SchmidtRank {
        #[arg(long = "in")]
        input: String,
    },
    /// Exact length of a diagonal state via nonnegative rank
    LengthDiag {
        #[arg(long = "in")]
        input: String,
    },
    /// Sum-of-squares certificate search for a real PT-invariant operator
    Sos {
        #[arg(long = "in")]
        input: String,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Hilbert-Schmidt pairing of two maps
    Pairing {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Interpret inputs as Choi operators instead of map matrices
        #[arg(long)]
        choi: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests exit 0; anything else is a usage error
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(3);
        }
    };
    let started = Instant::now();
    let global = cli.global.clone();
    match run(cli) {
        Ok(outcome) => {
            let code = exit_code(&outcome.verdict);
            emit(&global, outcome, started);
            std::process::exit(code);
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}

struct Outcome {
    command: &'static str,
    verdict: &'static str,
    value: Option<f64>,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    fn new(command: &'static str, verdict: &'static str) -> Self {
        Self {
            command,
            verdict,
            value: None,
            extra: serde_json::Map::new(),
        }
    }

    fn from_report(command: &'static str, rep: &TestReport) -> Self {
        let mut out = Self::new(command, rep.verdict.as_str());
        out.value = rep.value;
        if let Some(cert) = &rep.certificate {
            out.extra
                .insert("certificate".into(), certificate_json(cert));
        }
        out
    }

    fn with(mut self, key: &str, v: serde_json::Value) -> Self {
        self.extra.insert(key.into(), v);
        self
    }

    fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

fn exit_code(verdict: &str) -> i32 {
    match verdict {
        "pass" | "feasible" => 0,
        "refuted" | "infeasible" => 1,
        "inconclusive" => 2,
        _ => 3,
    }
}

fn emit(global: &GlobalOpts, outcome: Outcome, started: Instant) {
    let timing_ms = started.elapsed().as_millis() as u64;
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), json!(outcome.command));
    obj.insert("verdict".into(), json!(outcome.verdict));
    if let Some(v) = outcome.value {
        obj.insert("value".into(), json!(v));
    }
    for (k, v) in outcome.extra {
        obj.insert(k, v);
    }
    obj.insert(
        "params".into(),
        json!({"tol": global.tol, "seed": global.seed, "samples": global.samples}),
    );
    obj.insert("timing_ms".into(), json!(timing_ms));
    let doc = serde_json::Value::Object(obj);
    if global.report == "text" {
        print_text(&doc, 0);
    } else {
        println!("{}", serde_json::to_string(&doc).unwrap());
    }
}

fn print_text(v: &serde_json::Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                match val {
                    serde_json::Value::Object(_) => {
                        println!("{pad}{k}:");
                        print_text(val, indent + 1);
                    }
                    serde_json::Value::Array(_) => {
                        println!("{pad}{k}: {}", serde_json::to_string(val).unwrap());
                    }
                    _ => println!("{pad}{k}: {val}"),
                }
            }
        }
        other => println!("{pad}{other}"),
    }
}

fn certificate_json(cert: &Certificate) -> serde_json::Value {
    match cert {
        Certificate::Vector { vector, value } => json!({
            "type": "vector",
            "vector": vector_json(vector),
            "value": value,
        }),
        Certificate::ProductVector { left, right, value } => json!({
            "type": "product-vector",
            "left": vector_json(left),
            "right": vector_json(right),
            "value": value,
        }),
        Certificate::Eigenpair {
            eigenvalue,
            eigenvector,
            source_index,
        } => json!({
            "type": "eigenpair",
            "eigenvalue": eigenvalue,
            "eigenvector": vector_json(eigenvector),
            "source_index": source_index,
        }),
        Certificate::Quadruple { indices, lhs, rhs } => json!({
            "type": "quadruple",
            "indices": indices,
            "lhs": lhs,
            "rhs": rhs,
        }),
        Certificate::NonnegFactorization {
            left,
            right,
            residual,
        } => json!({
            "type": "nonneg-factorization",
            "left": left,
            "right": right,
            "residual": residual,
        }),
        Certificate::PatternExhaustion {
            patterns_tried,
            rectangles,
            reason,
        } => json!({
            "type": "pattern-exhaustion",
            "patterns_tried": patterns_tried,
            "rectangles": rectangles,
            "reason": reason,
        }),
        Certificate::SosFactor { b, residual } => json!({
            "type": "sos-factor",
            "b": b,
            "residual": residual,
        }),
        Certificate::Scalar { name, value } => json!({
            "type": "scalar",
            "name": name,
            "value": value,
        }),
    }
}

fn parse_complex(text: &str, flag: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("--{flag}: cannot parse {s:?}: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(format!("--{flag}: expected \"re\" or \"re,im\", got {text:?}")),
    }
}

/// Interpret a square operator file as a map matrix in the elementary basis.
fn map_from_rep_file(path: &str) -> Result<SuperOperator, String> {
    let op = parse_operator_file(path)?;
    if op.dim_a() != op.dim_b() {
        return Err(format!(
            "{path}: a map matrix needs dimA = dimB (the d^2 x d^2 representation)"
        ));
    }
    SuperOperator::from_rep(op.dim_a(), op.dim_a(), op.matrix().clone())
        .map_err(|e| format!("{path}: {e}"))
}

fn run(cli: Cli) -> Result<Outcome, String> {
    let g = &cli.global;
    let model = RandomModel::new(g.seed);
    match cli.command {
        Command::Reshuffle { input } => {
            let op = parse_operator_file(&input)?;
            let r = op.realign();
            let rank = eig::numeric_rank(&r, 1e-8);
            Ok(Outcome::new("reshuffle", "pass")
                .with("realigned", matrix_json(&r))
                .with("rank", json!(rank)))
        }
        Command::Choi { input } => {
            let phi = map_from_rep_file(&input)?;
            let j = choi::jamiolkowski(&phi);
            let herm = j.herm_deviation() <= 1e-10 * j.matrix().max_norm().max(1.0);
            let mut out = Outcome::new("choi", "pass").with("choi", operator_json(&j, Some("map-choi")));
            out = out.with("hermitian", json!(herm));
            if herm {
                let h = HermitianOperator::symmetrize(j.matrix()).map_err(err)?;
                let min = eig::eig_hermitian(&h).map_err(err)?.min_eigenvalue();
                out = out.with("min_eigenvalue", json!(min));
            }
            Ok(out)
        }
        Command::Circmul { a, b } => {
            let x = parse_operator_file(&a)?;
            let y = parse_operator_file(&b)?;
            let prod = choi::circled_product(&x, &y).map_err(err)?;
            Ok(Outcome::new("circmul", "pass").with("product", operator_json(&prod, None)))
        }
        Command::CpTest { input, choi: as_choi } => {
            let j = if as_choi {
                parse_operator_file(&input)?
            } else {
                choi::jamiolkowski(&map_from_rep_file(&input)?)
            };
            if j.herm_deviation() > 1e-10 * j.matrix().max_norm().max(1.0) {
                return Ok(Outcome::new("cp-test", "refuted")
                    .with("reason", json!("Choi operator is not Hermitian")));
            }
            let h = HermitianOperator::symmetrize(j.matrix()).map_err(err)?;
            let eigs = eig::eig_hermitian(&h).map_err(err)?;
            let min = eigs.min_eigenvalue();
            if min >= -g.tol {
                Ok(Outcome::new("cp-test", "pass").with_value(min))
            } else {
                let v = eigs.eigenvector(eigs.eigenvalues.len() - 1);
                Ok(Outcome::new("cp-test", "refuted")
                    .with_value(min)
                    .with(
                        "certificate",
                        json!({
                            "type": "eigenpair",
                            "eigenvalue": min,
                            "eigenvector": vector_json(&v),
                        }),
                    ))
            }
        }
        Command::Blockpos { input, k } => {
            let op = parse_operator_file(&input)?;
            let rep = cones::is_k_block_positive_sampled(&op, k, g.samples, &model).map_err(err)?;
            Ok(Outcome::from_report("blockpos", &rep).with("k", json!(k)))
        }
        Command::Sommers { input } => {
            let op = parse_operator_file(&input)?;
            let rep = witness::sommers_test(&op, g.tol).map_err(err)?;
            Ok(Outcome::from_report("sommers", &rep))
        }
        Command::Counterexample { d, n_left, n_right } => {
            if d < 2 {
                return Err("need --d >= 2".into());
            }
            let mut rng = model.stream(1);
            let ups: Vec<Vec<Complex64>> = (0..n_left.max(1))
                .map(|_| sepwit_core::rng::random_unit_vector(&mut rng, d))
                .collect();
            let us: Vec<Vec<Complex64>> = (0..n_right.max(1))
                .map(|_| sepwit_core::rng::random_unit_vector(&mut rng, d))
                .collect();
            let ce = witness::insufficiency_counterexample(&ups, &us, &model).map_err(err)?;
            let battery = witness::necessary_battery(&ce.a, &ups, &us, g.tol).map_err(err)?;
            let value = ce
                .a
                .product_form(&ce.upsilon0, &ce.u0)
                .map_err(err)?
                .re;
            let verdict = if battery.verdict == Verdict::Passed {
                "pass"
            } else {
                "refuted"
            };
            Ok(Outcome::new("counterexample", verdict)
                .with_value(value)
                .with("operator", operator_json(&ce.a, Some("witness")))
                .with("upsilon0", vector_json(&ce.upsilon0))
                .with("u0", vector_json(&ce.u0))
                .with("nu", json!(ce.nu))
                .with("mu", json!(ce.mu))
                .with("battery", json!(battery.verdict.as_str())))
        }
        Command::Abc { a, b, c } => {
            let p = AbcParams::new(
                parse_complex(&a, "a")?,
                parse_complex(&b, "b")?,
                parse_complex(&c, "c")?,
            );
            let path = if p.is_case_a() {
                "case-a"
            } else if p.is_case_b() {
                "case-b"
            } else {
                "general"
            };
            let accepted = abc::decide(&p).map_err(err)?;
            let general = abc::decide_general(&p).map_err(err)?;
            let mut out = Outcome::new("abc", if accepted { "pass" } else { "refuted" })
                .with("path", json!(path))
                .with("general_path_agrees", json!(accepted == general))
                .with("operator", operator_json(&abc::build_abc(&p), Some("witness")));
            if !accepted {
                if let Some((ups, u, value)) =
                    abc::refuting_product_vector(&p, 100_000).map_err(err)?
                {
                    out = out.with(
                        "certificate",
                        json!({
                            "type": "product-vector",
                            "left": vector_json(&ups),
                            "right": vector_json(&u),
                            "value": value,
                        }),
                    );
                }
            }
            Ok(out)
        }
        Command::Ppt { input } => {
            let op = parse_operator_file(&input)?;
            let rep = separability::ppt_test(&op, g.tol).map_err(err)?;
            Ok(Outcome::from_report("ppt", &rep))
        }
        Command::Reduction { input } => {
            let op = parse_operator_file(&input)?;
            let rep = separability::reduction_test(&op, g.tol).map_err(err)?;
            Ok(Outcome::from_report("reduction", &rep))
        }
        Command::KposCriterion { input, maps } => {
            let op = parse_operator_file(&input)?;
            let battery: Vec<CertifiedPositiveMap> = maps
                .split(',')
                .map(|name| match name.trim() {
                    "transposition" | "t" => Ok(CertifiedPositiveMap::Transposition(op.dim_a())),
                    "reduction" => Ok(CertifiedPositiveMap::Reduction(op.dim_a())),
                    other => Err(format!("unknown battery map {other:?}")),
                })
                .collect::<Result<_, _>>()?;
            let rep = cones::k_positive_maps_criterion(&op, &battery, 1, g.tol).map_err(err)?;
            Ok(Outcome::from_report("kpos-criterion", &rep))
        }
        Command::SchmidtRank { input } => {
            let op = parse_operator_file(&input)?;
            let rank = separability::schmidt_rank(&op, separability::SCHMIDT_TOL).map_err(err)?;
            Ok(Outcome::new("schmidt-rank", "pass").with_value(rank as f64))
        }
        Command::LengthDiag { input } => {
            let op = parse_operator_file(&input)?;
            length_diag_from_state(&op, &model, g.tol)
        }
        Command::Sos {
            input,
            iters,
            restarts,
        } => {
            let op = parse_operator_file(&input)?;
            let sym = separability::pt_symmetrize_real(&op).map_err(err)?;
            let symmetrized =
                sym.matrix().sub(op.matrix()).map_err(err)?.fro_norm()
                    > 1e-12 * op.matrix().fro_norm().max(1.0);
            let (rep, _cert) =
                separability::sos_search(&sym, iters, restarts, &model).map_err(err)?;
            Ok(Outcome::from_report("sos", &rep).with("symmetrized", json!(symmetrized)))
        }
        Command::Pairing { a, b, choi: as_choi } => {
            let (phi, psi) = if as_choi {
                let x = parse_operator_file(&a)?;
                let y = parse_operator_file(&b)?;
                (choi::jamiolkowski_inverse(&x), choi::jamiolkowski_inverse(&y))
            } else {
                (map_from_rep_file(&a)?, map_from_rep_file(&b)?)
            };
            let value = choi::map_pairing(&phi, &psi).map_err(err)?;
            Ok(Outcome::new("pairing", "pass").with_value(value))
        }
    }
}

/// Extract the diagonal coefficient matrix of a diagonal bipartite state and
/// bracket its nonnegative rank; the length equals the first feasible term
/// count, searched upward from the Schmidt rank.
fn length_diag_from_state(
    op: &BipartiteOperator,
    model: &RandomModel,
    tol: f64,
) -> Result<Outcome, String> {
    let (da, db) = (op.dim_a(), op.dim_b());
    let scale = op.matrix().max_norm().max(1e-300);
    // off-diagonal mass means the state is outside the diagonal reduction
    for r in 0..op.side() {
        for c in 0..op.side() {
            if r != c && op.matrix()[(r, c)].norm() > tol.max(1e-12) * scale {
                return Err("length-diag needs a diagonal state (off-diagonal entries present)".into());
            }
        }
    }
    let mut m = vec![vec![0.0f64; db]; da];
    for j in 0..da {
        for k in 0..db {
            let v = op.entry(j, k, j, k).re;
            if v < -tol * scale {
                return Err(format!("negative diagonal entry at ({j},{k})"));
            }
            m[j][k] = v.max(0.0);
        }
    }
    let mmat = ComplexMatrix::from_fn(da, db, |r, c| Complex64::new(m[r][c], 0.0));
    let rank = eig::numeric_rank(&mmat, separability::SCHMIDT_TOL);
    let mut decisions = Vec::new();
    let mut feasible_at: Option<(usize, serde_json::Value)> = None;
    let mut all_conclusive = true;
    for l in rank..=4 {
        let rep = separability::nonneg_rank_decide(&m, l, model).map_err(err)?;
        decisions.push(json!({"l": l, "verdict": rep.verdict.as_str()}));
        match rep.verdict {
            Verdict::Feasible => {
                let cert = rep
                    .certificate
                    .as_ref()
                    .map(certificate_json)
                    .unwrap_or(serde_json::Value::Null);
                feasible_at = Some((l, cert));
                break;
            }
            Verdict::Infeasible => {}
            _ => all_conclusive = false,
        }
    }
    match feasible_at {
        Some((l, cert)) if all_conclusive => Ok(Outcome::new("length-diag", "feasible")
            .with_value(l as f64)
            .with("length", json!(l))
            .with("schmidt_rank", json!(rank))
            .with("decisions", serde_json::Value::Array(decisions))
            .with("certificate", cert)),
        Some((l, cert)) => Ok(Outcome::new("length-diag", "inconclusive")
            .with("upper_bound", json!(l))
            .with("lower_bound", json!(rank))
            .with("schmidt_rank", json!(rank))
            .with("decisions", serde_json::Value::Array(decisions))
            .with("certificate", cert)),
        None => Ok(Outcome::new("length-diag", "inconclusive")
            .with("lower_bound", json!(rank))
            .with("schmidt_rank", json!(rank))
            .with("decisions", serde_json::Value::Array(decisions))),
    }
}

fn err(e: sepwit_core::CoreError) -> String {
    e.to_string()
}
