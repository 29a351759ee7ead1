//! The `padiflow` command line: argument parsing, problem files and reports.
//!
//! Reports are JSON on standard output unless `--human` is given. Exit status
//! is 0 on success, 1 when a hypothesis or precondition fails, 2 when the
//! input cannot be parsed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::charp::closure_scan;
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, set_initial_enclosure_width, LogValue};
use crate::foliation::{classify_singularity, invariance_defect, normalize, separatrix_series, Mat2, SingularityKind, VectorField, Which};
use crate::ode::{check_self_bounded, solve_direct, solve_newton, OdeProblem};
use crate::selftest;
use crate::series::TruncSeries;
use crate::size::{aanalyticity_budget, lambda_exponent, BudgetParams};

/// Name of the environment variable overriding the initial enclosure width.
pub const PRECISION_ENV: &str = "PADIFLOW_PRECISION";

const DEFAULT_FIELD_ORDER: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "padiflow", version, about = "Exact p-adic series solvers, separatrices and radius ledgers")]
pub struct Cli {
    /// Tabular text instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an ODE problem by both solvers and print the radius ledger.
    Solve {
        /// JSON problem file.
        #[arg(long)]
        input: PathBuf,
        /// Truncation order N; defaults to the file's "order", then the data order.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Both separatrices of a vector field and their invariance defects.
    Separatrix {
        /// JSON problem file.
        #[arg(long)]
        input: PathBuf,
        /// Truncation order N (default 16).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Size exponents of a series, or of a field's separatrices, at one prime.
    Size {
        /// JSON problem file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        prime: Option<u64>,
        /// Separatrix order for field inputs (default 16).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Scan a prime range for p-closure of the reduced field.
    Pclosed {
        /// JSON problem file.
        #[arg(long)]
        input: PathBuf,
        /// Lower end of the prime range; overrides "primeRange".
        #[arg(long)]
        from: Option<u64>,
        /// Upper end of the prime range, inclusive.
        #[arg(long)]
        to: Option<u64>,
    },
    /// Partial sum over primes and tail bound of the analyticity budget.
    Budget {
        /// Largest prime summed exactly.
        #[arg(long)]
        pmax: u64,
        /// Numerator of alpha = s/t; primes up to max(s, t) are skipped.
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long)]
        t: u64,
        /// Radius constant, a rational.
        #[arg(long = "C", default_value = "14")]
        c: String,
        /// Comma-separated primes left out of the sum.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<u64>,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// A problem file, tagged by `"kind"`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum ProblemFile {
    #[serde(rename_all = "camelCase")]
    Ode {
        problem: OdeProblem,
        #[serde(default)]
        order: Option<usize>,
        /// Replaces the radius stored in `problem`.
        #[serde(default)]
        logr: Option<LogValue>,
    },
    Field(FieldInput),
    #[serde(rename_all = "camelCase")]
    Series {
        series: TruncSeries,
        #[serde(default)]
        prime: Option<u64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct FieldInput {
    field: VectorField,
    #[serde(default)]
    order: Option<usize>,
    #[serde(default)]
    prime: Option<u64>,
    #[serde(default)]
    prime_range: Option<[u64; 2]>,
}

impl ProblemFile {
    fn kind(&self) -> &'static str {
        match self {
            ProblemFile::Ode { .. } => "ode",
            ProblemFile::Field(_) => "field",
            ProblemFile::Series { .. } => "series",
        }
    }
}

/// What a run prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    json: Value,
    human: String,
    ok: bool,
}

fn load(path: &PathBuf) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn wrong_kind(got: &ProblemFile, want: &str) -> Error {
    Error::Parse(format!("expected a problem of kind {want:?}, got {:?}", got.kind()))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn series_lines(s: &TruncSeries) -> String {
    let mut out = String::new();
    for (e, c) in s.terms() {
        let _ = writeln!(out, "  T^{e}: {}", format_rational(c));
    }
    if out.is_empty() {
        out.push_str("  0\n");
    }
    let _ = writeln!(out, "  + O(T^{})", s.order() + 1);
    out
}

fn solve(input: &PathBuf, order: Option<usize>) -> Result<Report> {
    let (prob, file_order) = match load(input)? {
        ProblemFile::Ode { problem, order, logr } => {
            let problem = match logr {
                Some(l) => {
                    if l.prime() != problem.prime() {
                        return Err(Error::Parse("logr is tagged with a different prime than the problem".into()));
                    }
                    OdeProblem::new(problem.a().clone(), problem.b().clone(), problem.c().clone(), problem.alpha(), l)?
                }
                None => problem,
            };
            (problem, order)
        }
        other => return Err(wrong_kind(&other, "ode")),
    };
    let n = order.or(file_order).unwrap_or_else(|| prob.data_order());
    let direct = solve_direct(&prob, n)?;
    let sol = solve_newton(&prob, n)?;
    let agree = sol.y == direct;
    let self_bounded = check_self_bounded(&sol.y, &sol.ledger.certified_r);
    let within = sol.ledger.within_paper_bound()?;
    let json = json!({
        "command": "solve",
        "p": prob.prime().get(),
        "s": prob.alpha().s(),
        "t": prob.alpha().t(),
        "order": n,
        "direct": to_json(&direct),
        "newton": to_json(&sol.y),
        "agree": agree,
        "ledger": to_json(&sol.ledger),
        "totalDecrement": to_json(&sol.ledger.total_decrement()),
        "selfBounded": self_bounded,
        "withinBound": within,
    });
    let mut human = format!("p = {}, alpha = {}, order {n}\n", prob.prime(), prob.alpha());
    let _ = writeln!(human, "solution (solvers {}):", if agree { "agree" } else { "DISAGREE" });
    human.push_str(&series_lines(&sol.y));
    let _ = writeln!(human, "k1 = {}", sol.ledger.k1);
    let _ = writeln!(human, "{:>4}  {:<8}  {:>12}  log r_k", "k", "regime", "approx");
    for e in &sol.ledger.entries {
        let regime = if e.regime == crate::ode::Regime::PreK1 { "pre-k1" } else { "post-k1" };
        let _ = writeln!(human, "{:>4}  {:<8}  {:>12.6}  {}", e.k, regime, e.logr.approx(), e.logr);
    }
    let _ = writeln!(human, "certified log R = {} ({:.6})", sol.ledger.certified_r, sol.ledger.certified_r.approx());
    let _ = writeln!(human, "total decrement within 14 t (log p)^2/(p-1)^2: {within}");
    let _ = writeln!(human, "self-bounded: {self_bounded}");
    Ok(Report {
        json,
        human,
        ok: agree && self_bounded && within,
    })
}

fn mat_json(s: &Mat2) -> Value {
    json!(s.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Order of the defect through `horizon`, or `"+inf"` when it vanishes there.
fn defect_order(v: &VectorField, phi: &TruncSeries, which: Which, horizon: usize) -> Result<Value> {
    Ok(match invariance_defect(v, phi, which, horizon)?.valuation() {
        Some(k) => json!(k),
        None => json!("+inf"),
    })
}

fn field_input(input: &PathBuf) -> Result<FieldInput> {
    match load(input)? {
        ProblemFile::Field(f) => Ok(f),
        other => Err(wrong_kind(&other, "field")),
    }
}

/// The field in normal form together with the basis change used, if any.
fn normal_form(v: &VectorField) -> Result<(VectorField, Option<Mat2>)> {
    if v.normal_form_lambda().is_some() {
        return Ok((v.clone(), None));
    }
    let (w, s) = normalize(v)?;
    Ok((w, Some(s)))
}

fn separatrix(input: &PathBuf, order: Option<usize>) -> Result<Report> {
    let FieldInput { field: v, order: file_order, .. } = field_input(input)?;
    let n = order.or(file_order).unwrap_or(DEFAULT_FIELD_ORDER);
    let class = classify_singularity(&v)?;
    if class.kind != SingularityKind::NondegenerateReduced {
        return Err(Error::precondition(format!("separatrices need a non-degenerate reduced singularity, found {}", class.kind)));
    }
    let (w, basis) = normal_form(&v)?;
    let phi1 = separatrix_series(&w, Which::One, n)?;
    let phi2 = separatrix_series(&w, Which::Two, n)?;
    let horizon = 2 * n;
    let d1 = defect_order(&w, &phi1, Which::One, horizon)?;
    let d2 = defect_order(&w, &phi2, Which::Two, horizon)?;
    let mut json = json!({
        "command": "separatrix",
        "class": to_json(&class),
        "order": n,
        "phi1": to_json(&phi1),
        "phi2": to_json(&phi2),
        "defectOrder": {"phi1": d1, "phi2": d2},
        "defectHorizon": horizon,
    });
    let mut human = format!("class: {}", class.kind);
    if let Some(a) = &class.alpha {
        let _ = write!(human, " (alpha = {})", format_rational(a));
    }
    human.push('\n');
    if let Some(s) = &basis {
        json["normalized"] = json!({"field": to_json(&w), "basis": mat_json(s)});
        let _ = writeln!(human, "normalized field: {w}");
    }
    let _ = write!(human, "phi1:\n{}phi2:\n{}", series_lines(&phi1), series_lines(&phi2));
    let plain = |d: &Value| d.as_str().map_or_else(|| d.to_string(), str::to_string);
    let _ = writeln!(human, "defect order through {horizon}: phi1 {}, phi2 {}", plain(&d1), plain(&d2));
    Ok(Report { json, human, ok: true })
}

fn prime_arg(p: Option<u64>) -> Result<u64> {
    p.ok_or_else(|| Error::Parse("a prime is required (--prime or \"prime\" in the input)".into()))
}

fn size(input: &PathBuf, prime: Option<u64>, order: Option<usize>) -> Result<Report> {
    let named: Vec<(&str, TruncSeries)>;
    let p = match load(input)? {
        ProblemFile::Series { series, prime: fp } => {
            named = vec![("phi", series)];
            prime_arg(prime.or(fp))?
        }
        ProblemFile::Field(FieldInput { field, order: fo, prime: fp, .. }) => {
            let n = order.or(fo).unwrap_or(DEFAULT_FIELD_ORDER);
            let (w, _) = normal_form(&field)?;
            named = vec![("phi1", separatrix_series(&w, Which::One, n)?), ("phi2", separatrix_series(&w, Which::Two, n)?)];
            prime_arg(prime.or(fp))?
        }
        other => return Err(wrong_kind(&other, "series or field")),
    };
    let mut estimates = serde_json::Map::new();
    let mut human = format!("p = {p}\n");
    for (name, s) in &named {
        let est = lambda_exponent(s, p)?;
        let _ = writeln!(
            human,
            "{name}: lambda_p = {}, size >= p^{} ({}), rho exponent >= {}",
            est.lambda_p,
            format_rational(&est.lower_bound_log_p),
            if est.exact { "exact" } else { "bound" },
            est.rho_lower_log_p
        );
        estimates.insert(name.to_string(), to_json(&est));
    }
    Ok(Report {
        json: json!({"command": "size", "p": p, "estimates": estimates}),
        human,
        ok: true,
    })
}

fn pclosed(input: &PathBuf, from: Option<u64>, to: Option<u64>) -> Result<Report> {
    let FieldInput { field: v, prime, prime_range: range, .. } = field_input(input)?;
    let (lo, hi) = match (from, to, range, prime) {
        (Some(a), Some(b), _, _) => (a, b),
        (a, b, Some([x, y]), _) => (a.unwrap_or(x), b.unwrap_or(y)),
        (None, None, None, Some(p)) => (p, p),
        _ => return Err(Error::Parse("a prime range is required (--from/--to or \"primeRange\")".into())),
    };
    if lo > hi {
        return Err(Error::invalid(format!("empty prime range [{lo}, {hi}]")));
    }
    let scan = closure_scan(&v, lo, hi)?;
    let mut human = String::new();
    for (p, c) in &scan {
        let _ = writeln!(human, "{p:>8}  {c}");
    }
    let rows: Vec<Value> = scan.iter().map(|(p, c)| json!({"p": p, "status": c})).collect();
    Ok(Report {
        json: json!({"command": "pclosed", "from": lo, "to": hi, "primes": rows}),
        human,
        ok: true,
    })
}

fn budget(pmax: u64, s: u64, t: u64, c: &str, exclude: &[u64]) -> Result<Report> {
    let mut params = BudgetParams::new(s, t);
    params.c = parse_rational(c)?;
    params.excluded = exclude.iter().copied().collect::<BTreeSet<_>>();
    let b = aanalyticity_budget(&params, pmax)?;
    let human = format!(
        "pMax = {pmax}, s = {s}, t = {t}, C = {}\npartial sum in [{:.9}, {:.9}]\ntail      <= {:.9}\n",
        format_rational(&params.c),
        b.partial.lo.to_f64(),
        b.partial.hi.to_f64(),
        b.tail.hi.to_f64()
    );
    let mut json = to_json(&b);
    json["command"] = json!("budget");
    json["s"] = json!(s);
    json["t"] = json!(t);
    json["C"] = json!(format_rational(&params.c));
    json["excluded"] = json!(params.excluded);
    Ok(Report { json, human, ok: true })
}

fn run_selftest(seed: u64) -> Report {
    let suites = selftest::run_all(seed);
    let ok = suites.iter().all(|s| s.passed);
    let mut human = String::new();
    for s in &suites {
        let _ = writeln!(human, "{:<4} {:<11} {:>5} cases  {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.cases, s.detail);
    }
    Report {
        json: json!({"command": "selftest", "seed": seed, "passed": ok, "suites": to_json(&suites)}),
        human,
        ok,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalidArgument",
        Error::HypothesisViolated { .. } => "hypothesisViolated",
        Error::PreconditionViolated(_) => "preconditionViolated",
        Error::BadReduction { .. } => "badReduction",
        Error::InsufficientBudget { .. } => "insufficientBudget",
        Error::Undecided { .. } => "undecided",
        Error::Parse(_) => "parse",
    }
}

fn error_outcome(e: &Error, human: bool) -> Outcome {
    let mut body = json!({"kind": error_kind(e), "message": e.to_string()});
    if let Error::HypothesisViolated { index: Some(i), .. } = e {
        body["index"] = json!(i);
    }
    Outcome {
        code: e.exit_code(),
        stdout: if human { String::new() } else { format!("{:#}\n", json!({ "error": body })) },
        stderr: format!("padiflow: {e}\n"),
    }
}

/// Runs the command line `args` (including the program name). `precision`
/// is the value of [`PRECISION_ENV`], if set.
pub fn run<I, T>(args: I, precision: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Some(w) = precision {
        let set = parse_rational(w).and_then(|w| set_initial_enclosure_width(&w).map_err(|e| Error::Parse(format!("{PRECISION_ENV}: {e}"))));
        if let Err(e) = set {
            return error_outcome(&e, cli.human);
        }
    }
    let report = match &cli.command {
        Command::Solve { input, order } => solve(input, *order),
        Command::Separatrix { input, order } => separatrix(input, *order),
        Command::Size { input, prime, order } => size(input, *prime, *order),
        Command::Pclosed { input, from, to } => pclosed(input, *from, *to),
        Command::Budget { pmax, s, t, c, exclude } => budget(*pmax, *s, *t, c, exclude),
        Command::Selftest { seed } => Ok(run_selftest(*seed)),
    };
    match report {
        Err(e) => error_outcome(&e, cli.human),
        Ok(r) => Outcome {
            code: if r.ok { 0 } else { 1 },
            stdout: if cli.human { r.human } else { format!("{:#}\n", r.json) },
            stderr: String::new(),
        },
    }
}

