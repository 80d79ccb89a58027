//! Command dispatch and deterministic reporting.
//!
//! Every command produces a JSON value whose objects are key-sorted, so the
//! same specification always renders to the same bytes.  Failures are
//! reported in-band as `{"code": ..., "message": ...}`; [`Outcome::status`]
//! classifies them into input errors and truncation problems.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::resolution::{self, ResolutionTree, ResolveOptions};
use crate::series::DEFAULT_PRECISION;
use crate::spec::CurveSpec;
use crate::{strata, tangent};

/// Default degree bound for stratum equations.
pub const DEFAULT_PDEG: usize = 3;

/// The five commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Resolve,
    Invariants,
    Tangent,
    Stratum,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Resolve => "resolve",
            Command::Invariants => "invariants",
            Command::Tangent => "tangent",
            Command::Stratum => "stratum",
            Command::Report => "report",
        }
    }
}

/// Overrides from the command line; `None` falls back to the spec file and
/// then to the library defaults.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub precision: Option<usize>,
    pub pdeg: Option<usize>,
    pub max_ext: Option<u32>,
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InputError,
    Truncation,
}

impl Status {
    /// Process exit code: 0 on success, 1 on input errors, 2 on truncation
    /// problems.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InputError => 1,
            Status::Truncation => 2,
        }
    }

    fn of(e: &Error) -> Status {
        if e.is_truncation() {
            Status::Truncation
        } else {
            Status::InputError
        }
    }
}

/// Result of one command on one specification.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub value: Value,
}

pub fn error_json(e: &Error) -> Value {
    json!({ "code": e.code(), "message": e.to_string() })
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

/// Run `cmd` on a parsed specification.
pub fn run(cmd: Command, spec: &CurveSpec, opts: &RunOptions) -> Outcome {
    let precision = opts.precision.or(spec.precision).unwrap_or(DEFAULT_PRECISION);
    let pdeg = opts.pdeg.or(spec.pdeg).unwrap_or(DEFAULT_PDEG);
    let ropts = ResolveOptions { max_ext: opts.max_ext.unwrap_or(resolution::DEFAULT_MAX_EXTENSION) };
    let header = json!({ "command": cmd.name(), "spec": spec.to_text() });
    let tree = spec.equation().and_then(|f| resolution::resolve_with(&f, &ropts));
    let tree = match tree {
        Ok(t) => t,
        Err(e) => return finish(header, Status::of(&e), json!({ "error": error_json(&e) })),
    };
    let (status, body) = match cmd {
        Command::Resolve => single(resolve_section(&tree, precision)),
        Command::Invariants => single(invariants_section(&tree)),
        Command::Tangent => single(tangent_section(&tree)),
        Command::Stratum => single(stratum_section(&tree, pdeg)),
        Command::Report => full_report(&tree, precision, pdeg),
    };
    finish(header, status, body)
}

fn finish(header: Value, status: Status, body: Value) -> Outcome {
    let mut v = header;
    let obj = v.as_object_mut().unwrap();
    obj.insert("status".into(), to_value(&status));
    if let Value::Object(m) = body {
        obj.extend(m);
    }
    Outcome { status, value: v }
}

fn single(r: Result<Value>) -> (Status, Value) {
    match r {
        Ok(v) => (Status::Ok, json!({ "result": v })),
        Err(e) => (Status::of(&e), json!({ "error": error_json(&e) })),
    }
}

/// Resolution tree plus truncated branch parametrizations.
pub fn resolve_section(tree: &ResolutionTree, precision: usize) -> Result<Value> {
    let mut v = tree.to_json();
    let brs = tree.branches(precision)?;
    let rendered: Vec<Value> = brs
        .iter()
        .map(|b| json!({ "x": b.x.truncate(precision).format("t"), "y": b.y.truncate(precision).format("t") }))
        .collect();
    v.as_object_mut().unwrap().insert("branches".into(), Value::Array(rendered));
    v.as_object_mut().unwrap().insert("precision".into(), json!(precision));
    Ok(v)
}

/// Numeric invariants read off the tree.
pub fn invariants_section(tree: &ResolutionTree) -> Result<Value> {
    let inv = tree.numeric_invariants();
    Ok(json!({
        "delta": inv.delta,
        "mult_sequence": inv.mult_sequence,
        "ef": inv.ef,
        "r": inv.r,
        "sum_m": inv.sum_m,
        "sum_m_m_plus_1_half": inv.sum_m_m_plus_1_half,
        "essential_points": inv.essential_points,
        "tjurina": tangent::t1_R(&tree.equation)?,
        "good_characteristic": tangent::is_good_characteristic(tree)?,
        "field": tree.field.name(),
    }))
}

/// First-order ladder with its identities; `ladder` lists
/// `[Mˢᵉᶜ, T¹ᵉˢ_{R̄/R}, T¹ᵉˢ_{R̄←R}, T¹ᵉˢ_R]`.
pub fn tangent_section(tree: &ResolutionTree) -> Result<Value> {
    Ok(tangent_value(&tangent::t1_es_suite_for(tree)?))
}

fn tangent_value(t: &tangent::EsTangentReport) -> Value {
    let mut v = to_value(t);
    let ladder = json!([t.dim_msec, t.dim_t1_es_over, t.dim_t1_es_norm, t.dim_t1_es_r]);
    v.as_object_mut().unwrap().insert("ladder".into(), ladder);
    v
}

/// Stratum equations and dimensions.
pub fn stratum_section(tree: &ResolutionTree, pdeg: usize) -> Result<Value> {
    let t = tangent::t1_es_suite_for(tree)?;
    stratum_value(tree, pdeg, &t)
}

fn stratum_value(tree: &ResolutionTree, pdeg: usize, t: &tangent::EsTangentReport) -> Result<Value> {
    let fam = strata::semiuniversal_family_for(tree.clone())?;
    Ok(to_value(&strata::stratum_report_with(&fam, pdeg, t)?))
}

/// Every section plus cross-checks between them.  Sections that fail are
/// replaced by their error; the status is the worst one encountered.
fn full_report(tree: &ResolutionTree, precision: usize, pdeg: usize) -> (Status, Value) {
    let mut status = Status::Ok;
    let mut sections = serde_json::Map::new();
    let mut record = |name: &str, r: &Result<Value>, status: &mut Status| {
        let v = match r {
            Ok(v) => v.clone(),
            Err(e) => {
                *status = (*status).max(Status::of(e));
                json!({ "error": error_json(e) })
            }
        };
        sections.insert(name.into(), v);
    };
    let res = resolve_section(tree, precision);
    record("resolution", &res, &mut status);
    let inv = invariants_section(tree);
    record("invariants", &inv, &mut status);
    let tan = tangent::t1_es_suite_for(tree);
    let tan_v = tan.as_ref().map(tangent_value).map_err(|e| e.clone());
    record("tangent", &tan_v, &mut status);
    let st = match &tan {
        Ok(t) => stratum_value(tree, pdeg, t),
        Err(e) => Err(e.clone()),
    };
    record("stratum", &st, &mut status);
    let checks = cross_checks(tree, tan.as_ref().ok(), st.as_ref().ok());
    let all = checks.as_object().map(|m| m.values().all(|v| v != &Value::Bool(false))).unwrap_or(true);
    sections.insert("cross_checks".into(), checks);
    sections.insert("consistent".into(), json!(all));
    (status, json!({ "result": Value::Object(sections) }))
}

fn cross_checks(tree: &ResolutionTree, tan: Option<&tangent::EsTangentReport>, st: Option<&Value>) -> Value {
    let inv = tree.numeric_invariants();
    let mut m = serde_json::Map::new();
    let from_mults: usize = inv.mult_sequence.iter().map(|&k| k * (k.saturating_sub(1)) / 2).sum();
    m.insert("delta_from_multiplicities".into(), json!(from_mults == inv.delta));
    let from_branches = tree
        .branches(16 + 4 * inv.delta)
        .and_then(|b| tangent::delta_from_branches(&b))
        .map(|d| d == inv.delta);
    m.insert("delta_from_semigroups".into(), from_branches.map(Value::Bool).unwrap_or(Value::Null));
    if let Some(t) = tan {
        m.insert("tangent_identities".into(), json!(t.checks.all()));
        let w = strata::wes_dimension_from(tree, t);
        m.insert("stratum_dimension_routes".into(), json!(w.consistent));
        let g = strata::good_char_from(tree, t);
        m.insert("good_characteristic_vanishing".into(), json!(g.vanishing_consistent));
        if let Some(s) = st {
            let agree = s.get("dim_from_conditions").and_then(Value::as_u64) == Some(w.dim as u64);
            m.insert("stratum_equations_match_dimension".into(), json!(agree));
        }
    }
    Value::Object(m)
}

/// Plain-text rendering of an outcome: one `key: value` line per leaf,
/// nested keys joined by dots.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    flatten("", v, &mut out);
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        _ => out.push_str(&format!("{prefix}: {v}\n")),
    }
}
