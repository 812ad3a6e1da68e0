use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use k4frac::gadget::{fractional_k4_decomposition_with, Arithmetic};
use k4frac::generate::{complete, complete_minus_matching, random_min_degree};
use k4frac::nlp::{run_chain_suite, ChainConfig};
use k4frac::report::{
    certificate_checks, chain_checks, search_checks, weight_checks, CertificationReport, Mode,
};
use k4frac::{
    certify_sign_chain, format_rational, parse_edge_list, parse_rational, search,
    write_edge_list, CertifyError, ProgramId, Rational, SearchConfig, SweepOptions, WeightError,
};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DEGREE: u8 = 3;
const EXIT_NEGATIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "k4frac", version, about = "Exact checks for fractional K4-decompositions of dense graphs")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the gadget weighting of a graph and check it is a decomposition.
    VerifyGraph(VerifyArgs),
    /// Write a generated edge list.
    Gen(GenArgs),
    /// Run the sampled inequality suite at one value of d.
    ChainCheck(ChainArgs),
    /// Certify the threshold polynomial is negative on [lo, hi].
    Certify(CertifyArgs),
    /// Numerically maximize one of the final programs and compare with W13.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct VerifyArgs {
    path: PathBuf,
    /// Exact rational arithmetic (default).
    #[arg(long, conflicts_with = "fast")]
    exact: bool,
    /// Float arithmetic with tolerance 1e-9.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write every K4 weight to this file.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Complete,
    CompleteMinusMatching,
    RandomMinDegree,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: usize,
    /// Minimum degree for random-min-degree.
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability before repair; defaults to delta/(n-1).
    #[arg(long)]
    p: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, value_parser = parse_rational, default_value = "2/33")]
    d: Rational,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    lo: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "2/33")]
    hi: Rational,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    program: ProgramId,
    #[arg(long, value_parser = parse_rational, default_value = "2/33")]
    d: Rational,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let started = Instant::now();
    let outcome = match cli.command {
        Command::VerifyGraph(a) => verify_graph(a, started),
        Command::Gen(a) => gen(a),
        Command::ChainCheck(a) => chain_check(a, started),
        Command::Certify(a) => certify(a, started),
        Command::Optimize(a) => optimize(a, started),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

struct Failure(u8, String);

fn usage(msg: impl ToString) -> Failure {
    Failure(EXIT_USAGE, msg.to_string())
}

fn elapsed_ms(started: Instant) -> u64 {
    started.elapsed().as_millis() as u64
}

fn write_report(
    path: Option<&Path>,
    rep: &mut CertificationReport,
    code: u8,
    started: Instant,
) -> Result<(), Failure> {
    rep.finish(code as i32, elapsed_ms(started));
    if let Some(p) = path {
        fs::write(p, rep.to_json() + "\n")
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn inputs<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn verify_graph(a: VerifyArgs, started: Instant) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.path)
        .map_err(|e| usage(format!("cannot read {}: {e}", a.path.display())))?;
    let g = parse_edge_list(&text).map_err(|e| usage(format!("{}: {e}", a.path.display())))?;
    let opts = SweepOptions {
        arithmetic: if a.fast { Arithmetic::Float } else { Arithmetic::Exact },
        ..SweepOptions::default()
    };
    let mode = if a.fast { "fast" } else { "exact" };
    let mut rep = CertificationReport::new(
        Mode::GraphVerify,
        inputs([("path", a.path.display().to_string()), ("arithmetic", mode.to_string())]),
        None,
    );
    println!("graph: n = {}, edges = {}, min degree = {}", g.n(), g.edge_count(), g.min_degree());
    let map = match fractional_k4_decomposition_with(&g, &opts) {
        Ok(map) => map,
        Err(WeightError::NegativeWeight { clique, value }) => {
            println!("negative weight {value} on K4 {clique:?}");
            println!("verdict: not a fractional K4-decomposition");
            // Rerun without the nonnegativity gate so the report carries the sums.
            if let Ok(map) = k4frac::compute_k4_weights(&g, &opts) {
                rep.checks = weight_checks(&map, opts.float_tolerance);
            }
            write_report(a.report.as_deref(), &mut rep, EXIT_NEGATIVE, started)?;
            return Ok(EXIT_NEGATIVE);
        }
        Err(e @ WeightError::DegreeTooLow { .. }) => {
            write_report(a.report.as_deref(), &mut rep, EXIT_DEGREE, started)?;
            return Err(Failure(EXIT_DEGREE, e.to_string()));
        }
        Err(e) => return Err(usage(e)),
    };
    if let Some(p) = &a.weights {
        fs::write(p, map.to_text()).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
    }
    let min = map.min_weight.as_ref().map_or("none".to_string(), |(v, _)| v.to_string());
    println!("K4s: {}", map.len());
    println!("min weight: {min}");
    println!("max |edge sum - 1|: {}", map.max_edge_sum_deviation);
    rep.checks = weight_checks(&map, opts.float_tolerance);
    let code = if rep.all_passed() { EXIT_PASS } else { EXIT_FAIL };
    println!(
        "verdict: {}",
        if code == EXIT_PASS { "fractional K4-decomposition" } else { "edge sums are not all one" }
    );
    write_report(a.report.as_deref(), &mut rep, code, started)?;
    Ok(code)
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    if a.n == 0 {
        return Err(usage("n must be positive"));
    }
    let g = match a.kind {
        GenKind::Complete => complete(a.n),
        GenKind::CompleteMinusMatching => complete_minus_matching(a.n),
        GenKind::RandomMinDegree => {
            let delta = a.delta.ok_or_else(|| usage("random-min-degree needs --delta"))?;
            random_min_degree(a.n, delta, a.seed, a.p).map_err(usage)?
        }
    };
    let text = write_edge_list(&g);
    match &a.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    eprintln!("wrote n = {}, edges = {}, min degree = {}", g.n(), g.edge_count(), g.min_degree());
    Ok(EXIT_PASS)
}

fn chain_check(a: ChainArgs, started: Instant) -> Result<u8, Failure> {
    if a.d < Rational::from_integer(0.into()) || a.d >= k4frac::rational::ratio(1, 4) {
        return Err(usage(format!("d = {} must lie in [0, 1/4)", format_rational(&a.d))));
    }
    let cfg = ChainConfig { d: a.d.clone(), samples: a.samples, seed: a.seed, ..ChainConfig::default() };
    let report = run_chain_suite(&cfg);
    let mut rep = CertificationReport::new(
        Mode::ChainCheck,
        inputs([("d", format_rational(&a.d)), ("samples", a.samples.to_string())]),
        Some(a.seed),
    );
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{status} {:<40} {} samples, {} witnesses", c.name, c.samples, c.witness_count);
        if let Some(w) = c.witnesses.first() {
            println!("     first witness: {} at {}", w.relation, w.point);
        }
    }
    rep.checks = chain_checks(&report);
    let code = if report.passed() { EXIT_PASS } else { EXIT_FAIL };
    println!("verdict: {} witnesses", report.witness_count());
    write_report(a.report.as_deref(), &mut rep, code, started)?;
    Ok(code)
}

fn certify(a: CertifyArgs, started: Instant) -> Result<u8, Failure> {
    let mut rep = CertificationReport::new(
        Mode::Certify,
        inputs([("lo", format_rational(&a.lo)), ("hi", format_rational(&a.hi))]),
        None,
    );
    let code = match certify_sign_chain(&a.lo, &a.hi) {
        Ok(cert) => {
            for r in &cert.records {
                println!(
                    "order {}: {:?} on [{}, {}], value {} at {}",
                    r.order,
                    r.direction,
                    a.lo,
                    a.hi,
                    r.value,
                    r.endpoint
                );
            }
            println!("verdict: W(d) < 0 on [{}, {}]", a.lo, a.hi);
            rep.checks = certificate_checks(&cert, None);
            EXIT_PASS
        }
        Err(CertifyError::CertificationFailed { step, reason, certificate }) => {
            println!("failed at the order-{step} step: {reason}");
            rep.checks = certificate_checks(&certificate, Some((step, &reason)));
            EXIT_FAIL
        }
        Err(e @ CertifyError::InvalidInterval { .. }) => return Err(usage(e)),
    };
    write_report(a.report.as_deref(), &mut rep, code, started)?;
    Ok(code)
}

fn optimize(a: OptimizeArgs, started: Instant) -> Result<u8, Failure> {
    let mut cfg = SearchConfig::new(a.program, a.d.clone());
    cfg.seed = a.seed;
    if let Some(k) = a.grid {
        cfg.resolution = k;
    }
    let result = search(&cfg).map_err(usage)?;
    let mut rep = CertificationReport::new(
        Mode::Optimize,
        inputs([
            ("program", a.program.to_string()),
            ("d", format_rational(&a.d)),
            ("grid", cfg.resolution.to_string()),
        ]),
        Some(a.seed),
    );
    println!("program {} at d = {}", a.program, a.d);
    println!("argmax: {}", result.point);
    println!("best (exact): {}", result.exact_value);
    println!("best (float): {:e} +- {:e}", result.float_value, result.float_error);
    println!("W13(d): {}", result.upper_bound);
    println!("margin: {}", result.margin);
    rep.checks = search_checks(&result);
    let code = if rep.all_passed() { EXIT_PASS } else { EXIT_FAIL };
    write_report(a.report.as_deref(), &mut rep, code, started)?;
    Ok(code)
}
