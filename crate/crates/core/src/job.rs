//! Batch front end: input parsing, job parameters and JSON reports.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::correlators::{hyperelliptic_combination, tuples, CorrelatorEngine};
use crate::curve::{characteristic_data, MatrixPolynomial};
use crate::divisor::pole_divisor;
use crate::error::{Error, Result};
use crate::jets::{jet_from_projectors, tau_second_derivative, validate_jet, TauLevel};
use crate::matrix::Matrix;
use crate::projectors::all_branch_expansions;
use crate::scalar::{format_rational, parse_rational, rat, Rational};
use crate::series::TailSeries;
use crate::theta::verify_main_theorem;

pub const KMAX_CAP: usize = 16;
pub const MAX_N_CAP: usize = 6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

fn field_error(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn parse_entry(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| match e {
            Error::Parse(m) => field_error(path, m),
            other => other,
        }),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(rat(i, 1)),
            None if n.is_f64() => Err(field_error(path, "floats rejected; use p/q")),
            None => Err(field_error(path, "integer out of range; use a string")),
        },
        _ => Err(field_error(path, "expected a rational string like \"p/q\"")),
    }
}

fn parse_usize(obj: &serde_json::Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| field_error(key, "missing or not a non-negative integer"))
}

/// `{"n": int, "m": int, "coefficients": [B^0, B^1, ..., B^m]}` with `B^0`
/// multiplying `z^m`. Entries are strings `"p/q"` or JSON integers.
pub fn parse_matrix_polynomial(text: &str) -> Result<MatrixPolynomial<Rational>> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let n = parse_usize(obj, "n")?;
    let m = parse_usize(obj, "m")?;
    let coeffs = obj
        .get("coefficients")
        .and_then(Value::as_array)
        .ok_or_else(|| field_error("coefficients", "missing or not an array"))?;
    if coeffs.len() != m + 1 {
        return Err(field_error("coefficients", format!("expected {} matrices for m = {m}, got {}", m + 1, coeffs.len())));
    }
    let mut mats = Vec::with_capacity(m + 1);
    for (p, cm) in coeffs.iter().enumerate() {
        let rows = cm
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| field_error(&format!("coefficients[{p}]"), format!("expected {n} rows")))?;
        let mut parsed = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            let entries = row
                .as_array()
                .filter(|r| r.len() == n)
                .ok_or_else(|| field_error(&format!("coefficients[{p}][{i}]"), format!("expected {n} entries")))?;
            parsed.push(
                entries
                    .iter()
                    .enumerate()
                    .map(|(j, v)| parse_entry(v, &format!("coefficients[{p}][{i}][{j}]")))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        mats.push(Matrix::from_rows(parsed));
    }
    MatrixPolynomial::from_descending(mats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CurveInfo,
    Correlators,
    Divisor,
    Jet,
    VerifyTheta,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CurveInfo => "curve-info",
            Command::Correlators => "correlators",
            Command::Divisor => "divisor",
            Command::Jet => "jet",
            Command::VerifyTheta => "verify-theta",
        }
    }
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub input: PathBuf,
    pub kmax: usize,
    pub max_n: usize,
    /// Number of branch-expansion terms reported by `curve-info`.
    pub order: usize,
    pub tol: f64,
    /// One-based sheets with orders, for a single correlator.
    pub indices: Option<Vec<(usize, usize)>>,
    /// Seeds the random diagonal conjugation used as an invariance check.
    pub seed: Option<u64>,
}

impl JobSpec {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        JobSpec {
            command,
            input: input.into(),
            kmax: 2,
            max_n: if command == Command::VerifyTheta { 4 } else { 3 },
            order: 4,
            tol: if command == Command::VerifyTheta { 1e-6 } else { crate::divisor::DEFAULT_TOL },
            indices: None,
            seed: None,
        }
    }

    fn check_ranges(&self) -> Result<()> {
        if self.kmax > KMAX_CAP {
            return Err(Error::InvalidInput(format!("kmax must be at most {KMAX_CAP}")));
        }
        if !(2..=MAX_N_CAP).contains(&self.max_n) {
            return Err(Error::InvalidInput(format!("max-n must be between 2 and {MAX_N_CAP}")));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidInput("tol must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `"a1,k1;a2,k2;..."` with one-based sheets.
pub fn parse_indices(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, k) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("index pair {pair:?} must read \"a,k\"")))?;
            let a: usize = a.trim().parse().map_err(|_| Error::Parse(format!("bad sheet in {pair:?}")))?;
            let k: usize = k.trim().parse().map_err(|_| Error::Parse(format!("bad order in {pair:?}")))?;
            if a == 0 {
                return Err(Error::Parse("sheets are numbered from 1".into()));
            }
            Ok((a, k))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct JobOutcome {
    pub exit_code: i32,
    pub report: Value,
}

impl JobOutcome {
    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn series_json(s: &TailSeries<Rational>) -> Value {
    let terms: Vec<Value> = s
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
        .map(|(i, c)| json!({"exp": s.leading_exponent() - i as i64, "coeff": format_rational(c)}))
        .collect();
    json!({"terms": terms, "known_down_to": s.floor()})
}

fn curve_info(w: &MatrixPolynomial<Rational>, job: &JobSpec) -> Result<(bool, Value)> {
    let data = characteristic_data(w);
    let exps = all_branch_expansions(w, job.order)?;
    let branches: Vec<Value> = exps
        .iter()
        .map(|e| json!({"sheet": e.sheet + 1, "w": series_json(&e.w.truncate(job.order))}))
        .collect();
    let coefficients: Vec<String> = data.a.iter().map(|p| p.to_string()).collect();
    let ok = !data.has_failure();
    Ok((
        ok,
        json!({
            "n": data.n,
            "m": data.m,
            "genus": data.genus,
            "R_coefficients": coefficients,
            "diagnostics": data.diagnostics,
            "branches": branches,
        }),
    ))
}

fn random_diagonal(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let num = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
            rat(num, rng.gen_range(1..=7))
        })
        .collect()
}

fn correlators(w: &MatrixPolynomial<Rational>, job: &JobSpec) -> Result<(bool, Value)> {
    let n = w.n();
    if let Some(idx) = &job.indices {
        if idx.len() < 2 {
            return Err(Error::InvalidInput("a correlator needs at least two (sheet, order) pairs".into()));
        }
        if idx.iter().any(|&(a, _)| a > n) {
            return Err(Error::InvalidInput(format!("sheets run from 1 to {n}")));
        }
        let sheets: Vec<usize> = idx.iter().map(|p| p.0 - 1).collect();
        let orders: Vec<usize> = idx.iter().map(|p| p.1).collect();
        let kmax = *orders.iter().max().expect("nonempty");
        let table = CorrelatorEngine::new(w, sheets.len(), kmax)?.table_for(&sheets, kmax)?;
        let v = table.get(&sheets, &orders).expect("tuple inside the table");
        return Ok((
            true,
            json!({"a": idx.iter().map(|p| p.0).collect::<Vec<_>>(), "k": orders, "value": format_rational(v)}),
        ));
    }
    let engine = CorrelatorEngine::new(w, job.max_n, job.kmax)?;
    let mut tables = Vec::new();
    let mut combos = Vec::new();
    let hyperelliptic = n == 2 && w.leading_eigenvalues().iter().all(|b| *b == rat(1, 1) || *b == rat(-1, 1));
    for arity in 2..=job.max_n {
        let table = engine.full_table(arity, job.kmax)?;
        if hyperelliptic {
            for k in tuples(arity, job.kmax + 1).into_iter().filter(|k| k.windows(2).all(|p| p[0] <= p[1])) {
                let v = hyperelliptic_combination(w, &table, &k)?;
                combos.push(json!({"N": arity, "k": k, "value": format_rational(&v)}));
            }
        }
        tables.push(serde_json::to_value(&table)?);
    }
    let mut report = json!({"tables": tables});
    if hyperelliptic {
        report["hyperelliptic"] = Value::Array(combos);
    }
    let mut ok = true;
    if let Some(seed) = job.seed {
        let d = random_diagonal(n, seed);
        let conj = w.conjugate_by_diagonal(&d);
        let other = CorrelatorEngine::new(&conj, job.max_n, job.kmax)?;
        let mut invariant = true;
        for arity in 2..=job.max_n {
            invariant &= other.full_table(arity, job.kmax)? == engine.full_table(arity, job.kmax)?;
        }
        ok = invariant;
        report["conjugation_check"] = json!({
            "seed": seed,
            "diagonal": d.iter().map(format_rational).collect::<Vec<_>>(),
            "invariant": invariant,
        });
    }
    Ok((ok, report))
}

fn divisor(w: &MatrixPolynomial<Rational>, job: &JobSpec) -> Result<(bool, Value)> {
    let rep = pole_divisor(w, job.tol)?;
    let ok = rep.points.len() == rep.expected_degree && rep.d_degree == Some(rep.expected_degree);
    Ok((ok, serde_json::to_value(&rep)?))
}

fn jet(w: &MatrixPolynomial<Rational>) -> Result<(bool, Value)> {
    let jet = jet_from_projectors(w)?;
    let check = validate_jet(&jet);
    let n = w.n();
    let mut tau = serde_json::Map::new();
    for (label, level) in [("00", TauLevel::L00), ("01", TauLevel::L01), ("02", TauLevel::L02)] {
        let m: Vec<Vec<String>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| tau_second_derivative(&jet, a, b, level).map(|v| format_rational(&v)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        tau.insert(label.to_string(), json!(m));
    }
    Ok((check.passed(), json!({"jet": jet, "constraints": check, "tau_second_derivatives": tau})))
}

fn verify_theta(w: &MatrixPolynomial<Rational>, job: &JobSpec) -> Result<(bool, Value)> {
    let mut targets = vec![(3, job.kmax)];
    if job.max_n >= 4 {
        targets.push((4, job.kmax.saturating_sub(1)));
    }
    let rep = verify_main_theorem(w, &targets, job.tol)?;
    Ok((rep.passed, serde_json::to_value(&rep)?))
}

fn dispatch(job: &JobSpec) -> Result<(bool, Value)> {
    job.check_ranges()?;
    let text = std::fs::read_to_string(&job.input)
        .map_err(|e| Error::Io(format!("{}: {e}", job.input.display())))?;
    let w = parse_matrix_polynomial(&text)?;
    match job.command {
        Command::CurveInfo => curve_info(&w, job),
        Command::Correlators => correlators(&w, job),
        Command::Divisor => divisor(&w, job),
        Command::Jet => jet(&w),
        Command::VerifyTheta => verify_theta(&w, job),
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::Parse(_) | Error::InvalidInput(_) | Error::Io(_))
}

/// Runs one job. Exit code 0 on success, 1 when a check fails, 2 on bad input.
pub fn run(job: &JobSpec) -> JobOutcome {
    let (exit_code, result, errors) = match dispatch(job) {
        Ok((true, v)) => (EXIT_OK, v, vec![]),
        Ok((false, v)) => (EXIT_VERIFICATION_FAILED, v, vec!["verification failed".to_string()]),
        Err(e) if is_input_error(&e) => (EXIT_INPUT_ERROR, Value::Null, vec![e.to_string()]),
        Err(e) => (EXIT_VERIFICATION_FAILED, Value::Null, vec![e.to_string()]),
    };
    JobOutcome {
        exit_code,
        report: json!({"command": job.command.name(), "result": result, "errors": errors}),
    }
}
