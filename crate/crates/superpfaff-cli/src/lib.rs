//! Argument parsing and command bodies for the `superpfaff` binary.
//!
//! Every command returns a JSON document or a [`Failure`] carrying the process exit code:
//! 2 for parse errors, unknown suites and bad dimensions, 3 for parity or structure
//! violations, 4 for points on a stratum boundary (or otherwise outside the domain), 5 for
//! capacity limits and results that are not representable in the chosen ring.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use superpfaff::berezin::integrate_exp_mu;
use superpfaff::random::{point_rng, random_spo, random_spo_group, SoulDensity, SpoOptions};
use superpfaff::spf::{boundary_probe, default_eps, run_suite, spf, ScalarMode, SuiteConfig, SUITES};
use superpfaff::superlinalg::{to_orthonormal_frame, SuperMatrix, WeilMatrix};
use superpfaff::superspace::SymplecticSuperSpace;
use superpfaff::{Error, GaussRational, Scalar, WeilElement};

#[derive(Parser, Debug)]
#[command(name = "superpfaff", version, about = "Evaluate and verify the superPfaffian on spo(V)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate Spf at a supermatrix read from a JSON file (`-` for stdin).
    Eval {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Also integrate exp μ directly when the point lies in 𝒱⁺.
        #[arg(long)]
        with_oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized identity suite and print its report.
    Check {
        suite: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print a seeded random Weil point of spo(V) or SpO(V).
    Random {
        #[arg(value_enum)]
        kind: Kind,
        m: usize,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "weil-gens")]
        weil_gens: Option<u32>,
        /// Signature (p,q) of the even quadratic form, e.g. `1,1`.
        #[arg(long, value_parser = parse_pair)]
        stratum: Option<(usize, usize)>,
        /// Multiply the group element by an odd reflection (SpO only).
        #[arg(long)]
        reflect: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report parity and spo violations of a supermatrix, with block coordinates.
    Validate {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary-value probe 𝒊^{(m−n)/2}·Spf(𝒊(X + 𝒊εY)) at a scalar point.
    Probe {
        file: PathBuf,
        /// Direction Y in 𝒱⁻; defaults to J on every 2×2 diagonal block of A.
        #[arg(long)]
        direction: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, visible_alias = "n", default_value_t = 20)]
    pub points: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "weil-gens")]
    pub weil_gens: Option<u32>,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Rational,
    Complex,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    #[value(name = "spo")]
    Spo,
    #[value(name = "SpO")]
    SpoGroup,
}

/// A failed command: message and exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::Structure(_) | Error::Parity(_) => 3,
            Error::SingularBody(_) | Error::StratumBoundary(_) | Error::Domain(_) | Error::Branch(_) => 4,
            Error::Capacity(_) | Error::Inexact(_) => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Result of a command: the JSON to print and the exit code (non-zero for a failed check).
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub code: i32,
    pub out: Option<PathBuf>,
}

impl Report {
    fn ok(json: Value, out: Option<PathBuf>) -> Self {
        Report { json, code: 0, out }
    }
}

pub fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Eval { file, mode, with_oracle, out } => Ok(Report::ok(eval(&read_json(&file)?, mode, with_oracle)?, out)),
        Command::Check { suite, run } => check(&suite, &run),
        Command::Random { kind, m, n, seed, weil_gens, stratum, reflect, out } => {
            Ok(Report::ok(random(kind, m, n, seed, weil_gens, stratum, reflect)?, out))
        }
        Command::Validate { file, out } => validate(&read_json(&file)?, out),
        Command::Probe { file, direction, out } => {
            let dir = direction.map(|d| read_json(&d)).transpose()?;
            Ok(Report::ok(probe(&read_json(&file)?, dir.as_ref())?, out))
        }
    }
}

/// Writes the report to `--out` when given, else returns the text for stdout.
pub fn emit(report: &Report) -> Result<Option<String>, Failure> {
    let text = serde_json::to_string_pretty(&report.json).expect("values serialize");
    match &report.out {
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display())))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

/// Bare numbers (or `{"num","den"}`) as matrix entries are shorthand for constant Weil elements.
pub fn expand_scalar_entries(v: &mut Value) {
    let blocks = ["A", "B", "C", "D"];
    let is_weil = |e: &Value| e.get("terms").is_some();
    let n_gen = blocks
        .iter()
        .filter_map(|b| v.get(*b).and_then(Value::as_array))
        .flatten()
        .filter_map(Value::as_array)
        .flatten()
        .filter(|e| is_weil(e))
        .filter_map(|e| e.get("n_gen").and_then(Value::as_u64))
        .max()
        .unwrap_or(0);
    // `[]` stands for an m×0 or n×0 block.
    let dim = |k: &str| v.get("space").and_then(|s| s.get(k)).and_then(Value::as_u64).unwrap_or(0) as usize;
    let (m, n) = (dim("m"), dim("n"));
    for (b, rows, cols) in [("B", m, n), ("C", n, m)] {
        if cols == 0 && v.get(b).and_then(Value::as_array).is_some_and(Vec::is_empty) {
            v[b] = json!(vec![Vec::<Value>::new(); rows]);
        }
    }
    for b in blocks {
        let Some(rows) = v.get_mut(b).and_then(Value::as_array_mut) else { continue };
        for e in rows.iter_mut().filter_map(Value::as_array_mut).flatten() {
            if !is_weil(e) && (e.is_number() || e.get("num").is_some()) {
                *e = json!({"n_gen": n_gen, "terms": [{"gens": [], "re": e.take()}]});
            }
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::parse(format!("cannot read stdin: {e}")))?
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?
    };
    let mut v = serde_json::from_str(&text).map_err(|e| Failure::parse(format!("invalid JSON in {}: {e}", path.display())))?;
    expand_scalar_entries(&mut v);
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected p,q")?;
    Ok((a.trim().parse().map_err(|_| "bad p")?, b.trim().parse().map_err(|_| "bad q")?))
}

/// Space first, so malformed dimensions are reported as parse errors.
fn parse_space(v: &Value) -> Result<SymplecticSuperSpace, Failure> {
    let sp = v.get("space").ok_or_else(|| Failure::parse("missing \"space\""))?;
    SymplecticSuperSpace::from_json(sp).map_err(|e| Failure::parse(e.to_string()))
}

fn parse_matrix<S: Scalar>(v: &Value) -> Result<SuperMatrix<S>, Failure> {
    parse_space(v)?;
    let x = SuperMatrix::<S>::from_json(v)?;
    if x.space().odd_signature().1 > 0 {
        return Ok(to_orthonormal_frame(&x)?);
    }
    Ok(x)
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn value_json<S: Scalar>(v: &WeilElement<S>) -> Value {
    if v.n_gen() == 0 {
        pair(v.body().to_c64())
    } else {
        v.to_c64().to_json()
    }
}

fn eval_in<S: Scalar>(v: &Value, mode: &str, with_oracle: bool) -> Result<Value, Failure> {
    let x = parse_matrix::<S>(v)?;
    let out = spf(&x)?;
    let mut doc = json!({
        "value": value_json(&out.value),
        "stratum": [out.stratum.0, out.stratum.1],
        "mode": mode,
    });
    if S::KIND.is_exact() {
        doc["exact"] = out.value.to_json();
    }
    if let Some(note) = &out.branch_note {
        doc["branch"] = json!(note);
    }
    if with_oracle {
        if out.stratum == (x.space().m(), 0) {
            let oracle = integrate_exp_mu(&x)?;
            doc["oracle"] = value_json(&oracle);
            doc["discrepancy"] = json!(oracle.relative_error(&out.value));
        } else {
            doc["oracle"] = Value::Null;
            doc["oracle_note"] = json!("the Gaussian oracle needs a point with body in 𝒱⁺");
        }
    }
    Ok(doc)
}

/// Exact evaluation unless the input has floats or the root is irrational, then complex doubles.
pub fn eval(v: &Value, mode: Option<Mode>, with_oracle: bool) -> Result<Value, Failure> {
    match mode {
        Some(Mode::Rational) => eval_in::<GaussRational>(v, "rational", with_oracle),
        Some(Mode::Complex) => eval_in::<Complex64>(v, "complex", with_oracle),
        None => match eval_in::<GaussRational>(v, "rational", with_oracle) {
            Err(f) if f.code == 5 || f.code == 2 => {
                parse_space(v)?;
                eval_in::<Complex64>(v, "complex", with_oracle)
            }
            other => other,
        },
    }
}

pub fn check(suite: &str, args: &RunArgs) -> Result<Report, Failure> {
    if !SUITES.contains(&suite) {
        return Err(Failure::parse(format!("unknown suite '{suite}'; expected one of {}", SUITES.join(", "))));
    }
    if args.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(Failure::parse("--tol must be positive"));
    }
    if args.weil_gens == Some(0) {
        return Err(Failure::parse("--weil-gens must be at least 1"));
    }
    let mode = match args.mode {
        Mode::Rational => ScalarMode::Rational,
        Mode::Complex => ScalarMode::Complex,
    };
    let cfg = SuiteConfig { seed: args.seed, points: args.points, tol: args.tol, n_gen: args.weil_gens, mode };
    let report = run_suite(suite, &cfg)?;
    let mut json = report.to_json();
    json["seed"] = json!(args.seed);
    Ok(Report { json, code: if report.passed() { 0 } else { 1 }, out: args.out.clone() })
}

pub fn random(
    kind: Kind,
    m: usize,
    n: usize,
    seed: u64,
    weil_gens: Option<u32>,
    stratum: Option<(usize, usize)>,
    reflect: bool,
) -> Result<Value, Failure> {
    let sp = SymplecticSuperSpace::new(m, n).map_err(|_| Failure::parse(format!("m must be even, got ({m},{n})")))?;
    if let Some((p, q)) = stratum {
        if p + q != m {
            return Err(Failure::parse(format!("stratum ({p},{q}) does not add up to m = {m}")));
        }
    }
    let nw = weil_gens.unwrap_or(n as u32 + 4);
    let mut rng = point_rng(seed, 0);
    let x = match kind {
        Kind::Spo => random_spo(&mut rng, sp, nw, SpoOptions { stratum, ..Default::default() }),
        Kind::SpoGroup => random_spo_group(&mut rng, sp, nw, reflect, SoulDensity::default()),
    };
    Ok(x.to_json())
}

fn nonzero_entries<S: Scalar>(m: &WeilMatrix<S>, block: &str, what: &str, out: &mut Vec<Value>) {
    for (i, j, e) in m.entries() {
        if !e.is_zero() {
            out.push(json!({"block": block, "row": i + 1, "col": j + 1, "violation": what}));
        }
    }
}

fn validate_in<S: Scalar>(v: &Value) -> Result<Value, Failure> {
    let x = SuperMatrix::<S>::from_json_unchecked(v)?;
    let mut issues: Vec<Value> = x
        .parity_violations()
        .into_iter()
        .map(|(b, i, j)| json!({"block": b.to_string(), "row": i, "col": j, "violation": "parity"}))
        .collect();
    if issues.is_empty() {
        let frame = if x.space().odd_signature().1 > 0 { to_orthonormal_frame(&x)? } else { x.clone() };
        // X ∈ spo iff X* = −X.
        let defect = frame.adjoint_star().try_add(&frame)?;
        let [a, b, c, d] = defect.blocks();
        for (blk, name) in [(a, "A"), (b, "B"), (c, "C"), (d, "D")] {
            nonzero_entries(blk, name, "X* + X ≠ 0", &mut issues);
        }
        if S::KIND.is_exact() || issues.is_empty() {
            return Ok(json!({"valid": issues.is_empty(), "violations": issues}));
        }
        // Float input: only report entries above a relative tolerance.
        let scale = x.blocks().iter().map(|b| b.norm_inf()).fold(1.0, f64::max);
        issues.clear();
        for (blk, name) in [(a, "A"), (b, "B"), (c, "C"), (d, "D")] {
            for (i, j, e) in blk.entries() {
                if e.norm_inf() > 1e-9 * scale {
                    issues.push(json!({"block": name, "row": i + 1, "col": j + 1, "violation": "X* + X ≠ 0"}));
                }
            }
        }
    }
    Ok(json!({"valid": issues.is_empty(), "violations": issues}))
}

/// Exit 0 for a valid spo point, 3 when violations were found.
pub fn validate(v: &Value, out: Option<PathBuf>) -> Result<Report, Failure> {
    parse_space(v)?;
    let json = match validate_in::<GaussRational>(v) {
        Err(f) if f.code == 2 => validate_in::<Complex64>(v)?,
        other => other?,
    };
    let code = if json["valid"] == json!(true) { 0 } else { 3 };
    Ok(Report { json, code, out })
}

pub fn probe(v: &Value, direction: Option<&Value>) -> Result<Value, Failure> {
    let x = parse_matrix::<Complex64>(v)?;
    let (m, n) = (x.space().m(), x.space().n());
    let y = match direction {
        Some(d) => parse_matrix::<Complex64>(d)?,
        None => {
            let mut a = WeilMatrix::zeros(m, m, 0);
            for k in (0..m).step_by(2) {
                a.set(k, k + 1, WeilElement::one(0));
                a.set(k + 1, k, -WeilElement::<Complex64>::one(0));
            }
            SuperMatrix::block_diag(*x.space(), a, WeilMatrix::zeros(n, n, 0))?
        }
    };
    let p = boundary_probe(&x, &y, &default_eps())?;
    Ok(json!({
        "eps": p.eps,
        "values": p.values.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
        "limit": pair(p.limit),
        "error_estimate": p.error_estimate,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Parse("x".into())).code, 2);
        assert_eq!(Failure::from(Error::Parity("x".into())).code, 3);
        assert_eq!(Failure::from(Error::StratumBoundary("x".into())).code, 4);
        assert_eq!(Failure::from(Error::Capacity("x".into())).code, 5);
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("2, 0"), Ok((2, 0)));
        assert!(parse_pair("2").is_err());
    }

    #[test]
    fn scalar_shorthand_takes_the_shared_generator_count() {
        let w = json!({"n_gen": 3, "terms": []});
        let mut v = json!({"space": {"m": 2, "n": 0}, "A": [[0, w], [{"num": 1, "den": 2}, 0]], "B": []});
        expand_scalar_entries(&mut v);
        assert_eq!(v["A"][1][0], json!({"n_gen": 3, "terms": [{"gens": [], "re": {"num": 1, "den": 2}}]}));
        assert_eq!(v["B"], json!([[], []]));
        assert_eq!(v["C"], Value::Null);
    }
}
