//! `esing`: resolution data, first-order deformation spaces and
//! equisingular strata of plane curve singularities.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when a truncation did not
//! stabilise or was too coarse (partial results are still printed).

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use esing::corpus;
use esing::report::{self, Command, Outcome, RunOptions, Status};
use esing::spec::parse_spec;

#[derive(Parser, Debug)]
#[command(name = "esing", version, about = "Equisingularity of plane curve singularities in any characteristic")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Resolution tree and branch parametrizations.
    Resolve(Args),
    /// Numeric invariants: δ, multiplicity sequence, ef, Tjurina number.
    Invariants(Args),
    /// First-order deformation spaces and the identities between them.
    Tangent(Args),
    /// Equations and dimension of the weak equisingular stratum.
    Stratum(Args),
    /// Everything above plus cross-checks.
    Report(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// Specification files (`-` reads standard input).
    specs: Vec<PathBuf>,
    /// Run on the built-in test corpus instead of (or in addition to) files.
    #[arg(long, value_enum)]
    corpus: Option<CorpusChoice>,
    /// Series precision for branch parametrizations.
    #[arg(long, value_name = "N")]
    precision: Option<usize>,
    /// Degree bound D_max for stratum equations.
    #[arg(long, value_name = "D_MAX")]
    pdeg: Option<usize>,
    /// Emit key-sorted JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Reserved; accepted for reproducible invocations, has no effect.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Largest total extension degree allowed while splitting tangent cones.
    #[arg(long, value_name = "K")]
    max_ext: Option<u32>,
    /// Number of specifications processed in parallel.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CorpusChoice {
    /// ADE curves, bad-characteristic families, parametrized and random curves.
    Full,
    /// ADE curves only.
    Ade,
    /// Bad-characteristic families only.
    Bad,
    /// Specifications that must be rejected.
    Errors,
}

struct Job {
    label: (&'static str, String),
    text: std::result::Result<String, String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("esing: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let (cmd, args) = match cli.command {
        Cmd::Resolve(a) => (Command::Resolve, a),
        Cmd::Invariants(a) => (Command::Invariants, a),
        Cmd::Tangent(a) => (Command::Tangent, a),
        Cmd::Stratum(a) => (Command::Stratum, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let _ = args.seed;
    let jobs = collect_jobs(&args)?;
    if jobs.is_empty() {
        anyhow::bail!("no specification given (pass files, `-` or --corpus)");
    }
    let opts = RunOptions { precision: args.precision, pdeg: args.pdeg, max_ext: args.max_ext };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build().context("building the thread pool")?;
    let outcomes: Vec<Outcome> = pool.install(|| jobs.par_iter().map(|j| run_job(cmd, j, &opts)).collect());
    let status = outcomes.iter().map(|o| o.status).max().unwrap_or(Status::Ok);
    let rendered = if args.json {
        let v = if outcomes.len() == 1 {
            outcomes.into_iter().next().unwrap().value
        } else {
            Value::Array(outcomes.into_iter().map(|o| o.value).collect())
        };
        serde_json::to_string_pretty(&v)? + "\n"
    } else {
        outcomes.iter().map(|o| report::render_text(&o.value)).collect::<Vec<_>>().join("\n")
    };
    print!("{rendered}");
    Ok(status)
}

fn collect_jobs(args: &Args) -> anyhow::Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for path in &args.specs {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
        };
        jobs.push(Job { label: ("file", path.display().to_string()), text });
    }
    let entries = match args.corpus {
        None => Vec::new(),
        Some(CorpusChoice::Full) => corpus::full(),
        Some(CorpusChoice::Ade) => corpus::ade(),
        Some(CorpusChoice::Bad) => corpus::bad_characteristic(),
        Some(CorpusChoice::Errors) => corpus::error_fixtures().into_iter().map(|(e, _)| e).collect(),
    };
    jobs.extend(entries.into_iter().map(|e| Job { label: ("name", e.name), text: Ok(e.spec) }));
    Ok(jobs)
}

fn run_job(cmd: Command, job: &Job, opts: &RunOptions) -> Outcome {
    let mut out = match &job.text {
        Err(msg) => Outcome {
            status: Status::InputError,
            value: json!({ "status": Status::InputError, "error": { "code": "Io", "message": msg } }),
        },
        Ok(text) => match parse_spec(text) {
            Ok(spec) => report::run(cmd, &spec, opts),
            Err(e) => Outcome { status: Status::InputError, value: json!({ "status": Status::InputError, "error": report::error_json(&e) }) },
        },
    };
    if let Value::Object(m) = &mut out.value {
        m.insert(job.label.0.into(), json!(job.label.1));
    }
    out
}
