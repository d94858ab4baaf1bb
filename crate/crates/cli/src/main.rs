//! `packlab`: list and correspondence packing of complete bipartite graphs.
//!
//! Exit codes: 0 when the claim holds or the computation agrees, 1 when it
//! is refuted or mismatches, 2 on resource or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use packlab_core::certificate::{certify_colouring, certify_packing, Certificate, Instance};
use packlab_core::latin::{count_latin_rectangles_with_limit, known_latin_square_count, DEFAULT_ENUMERATION_LIMIT};
use packlab_core::packing::FoldMode;
use packlab_core::reproduce::{reproduce, ReproduceOptions};
use packlab_core::search::chi::{chi_exact, BadInstance, ChiKind};
use packlab_core::search::greedy::greedy_unpackable_cover;
use packlab_core::search::hunt::{random_unpackable_cover_search, HuntParams};
use packlab_core::search::{
    decide_correspondence_colouring, decide_correspondence_packing, decide_list_colouring, decide_list_packing,
};
use packlab_core::thresholds::{
    forbidden_count_brute, render_table, threshold_table, w_even, w_odd, DEFAULT_BRUTE_BUDGET, DEFAULT_ITERATION_LIMIT,
};
use packlab_core::{
    verify_certificate, Claim, CorrespondenceCover, Error, ListAssignment, SearchBudget, Verdict, VerifyLimits,
};

const THREADS_VAR: &str = "PACKLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// JSON on stdout.
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "packlab", version, about = "List and correspondence packing of complete bipartite graphs")]
#[command(after_help = "Worker threads default to all cores; set PACKLAB_THREADS to override.")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct BudgetArgs {
    /// Largest number of candidates (or table entries) examined.
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    /// Wall-clock cutoff in seconds; hitting it is a resource error.
    #[arg(long)]
    budget_seconds: Option<f64>,
}

impl BudgetArgs {
    fn to_budget(&self, seed: u64) -> SearchBudget {
        SearchBudget { max_candidates: self.budget, max_seconds: self.budget_seconds, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Packable,
    Unpackable,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count Latin squares of order n (or r x n rectangles).
    Latin {
        #[arg(long)]
        n: usize,
        /// Count r x n rectangles instead of squares.
        #[arg(long)]
        rows: Option<usize>,
        /// Largest order enumerated; larger squares use the published count.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        enumerate_up_to: usize,
    },
    /// Count forbidden d x k packing matrices by brute force.
    ForbiddenCount {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        /// Largest number of matrices (first row fixed) examined.
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: u64,
    },
    /// Print the table of threshold bounds.
    Thresholds {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 11)]
        d_max: usize,
        /// Largest number of exact iteration steps attempted.
        #[arg(long, default_value_t = DEFAULT_ITERATION_LIMIT)]
        iteration_limit: u64,
    },
    /// Decide packability (or colourability) of a cover or list assignment.
    Decide {
        #[arg(long, conflicts_with = "assignment", required_unless_present = "assignment")]
        cover: Option<PathBuf>,
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Decide a single colouring instead of a packing.
        #[arg(long)]
        colouring: bool,
        /// Exit 1 unless the answer matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        /// Write a certificate of the answer.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Build a cover without packing greedily and certify it.
    Greedy {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized search for a small cover without packing.
    Hunt {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total local moves over all restarts.
        #[arg(long, default_value_t = 10_000_000)]
        moves: u64,
        #[arg(long, default_value_t = 200_000)]
        moves_per_restart: u64,
        #[arg(long)]
        budget_seconds: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact chromatic-type number of K_{a,b}.
    Chi {
        /// c: correspondence colouring, cstar: correspondence packing,
        /// l: list colouring, lstar: list packing.
        #[arg(long)]
        param: String,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        /// Exit 1 unless the value matches.
        #[arg(long)]
        expect: Option<usize>,
        /// Write a certificate for the bad instance one colour below.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check a certificate.
    Verify {
        certificate: PathBuf,
        /// Largest smaller side checked exhaustively.
        #[arg(long, default_value_t = VerifyLimits::default().max_d)]
        max_d: usize,
        #[arg(long, default_value_t = VerifyLimits::default().max_k)]
        max_k: usize,
    },
    /// Recompute every reproducible value and report.
    Reproduce {
        /// Include the slow items.
        #[arg(long)]
        long: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// What a successful command established.
enum Outcome {
    Holds,
    Refuted,
}

struct Output {
    text: String,
    value: Value,
    outcome: Outcome,
}

impl Output {
    fn holds(text: String, value: Value) -> Self {
        Self { text, value, outcome: Outcome::Holds }
    }

    fn when(ok: bool, text: String, value: Value) -> Self {
        Self { text, value, outcome: if ok { Outcome::Holds } else { Outcome::Refuted } }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(out) => {
            match cli.format {
                Format::Text => print!("{}", out.text),
                Format::Structured => println!("{}", serde_json::to_string_pretty(&out.value).expect("json")),
            }
            match out.outcome {
                Outcome::Holds => ExitCode::SUCCESS,
                Outcome::Refuted => ExitCode::from(1),
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e:#}"),
                Format::Structured => {
                    println!("{}", json!({ "error": format!("{e:#}"), "kind": error_kind(&e) }))
                }
            }
            ExitCode::from(2)
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::ResourceLimit(_)) => "resource",
        Some(Error::Internal(_)) => "internal",
        _ => "input",
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err(anyhow!("{THREADS_VAR} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn write_certificate(path: &Option<PathBuf>, cert: &Certificate) -> anyhow::Result<()> {
    if let Some(p) = path {
        fs::write(p, cert.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<Output> {
    match command {
        Command::Latin { n, rows, enumerate_up_to } => latin(n, rows, enumerate_up_to),
        Command::ForbiddenCount { d, k, budget } => forbidden(d, k, budget),
        Command::Thresholds { d_min, d_max, iteration_limit } => {
            let lines = threshold_table(d_min, d_max, iteration_limit)?;
            let all_separated = lines.iter().all(|l| l.separated() != Some(false));
            let value = Value::Array(lines.iter().map(|l| l.to_json()).collect());
            Ok(Output::when(all_separated, render_table(&lines), value))
        }
        Command::Decide { cover, assignment, colouring, expect, out, budget } => {
            let instance = match (cover, assignment) {
                (Some(p), _) => Instance::Cover(read_json::<CorrespondenceCover>(&p)?),
                (None, Some(p)) => Instance::Assignment(read_json::<ListAssignment>(&p)?),
                (None, None) => return Err(anyhow!("pass --cover or --assignment")),
            };
            decide(instance, colouring, expect, &out, &budget.to_budget(0))
        }
        Command::Greedy { d, k, out } => {
            let g = greedy_unpackable_cover(d, k)?;
            let cert = certify_packing(Instance::Cover(g.cover.clone()), &SearchBudget::default(), "greedy")?;
            let verdict = verify_certificate(&cert, &VerifyLimits { max_d: d, max_k: k })?;
            write_certificate(&out, &cert)?;
            let ok = verdict.is_accept() && cert.claim == Claim::NoKPacking && g.meets_averaging_bound();
            let text = format!(
                "greedy cover of K_{{{d},{}}} with k={k}\ntrace: {:?}\naveraging bound met: {}\ncertificate: {}\n",
                g.t(),
                g.trace,
                g.meets_averaging_bound(),
                if verdict.is_accept() { "verified" } else { "REJECTED" }
            );
            let value = json!({
                "d": d, "k": k, "t": g.t(), "trace": g.trace, "removed": g.removed,
                "averaging_bound_met": g.meets_averaging_bound(), "verdict": verdict,
                "cover": g.cover,
            });
            Ok(Output::when(ok, text, value))
        }
        Command::Hunt { d, k, t, seed, moves, moves_per_restart, budget_seconds, out } => {
            let budget = SearchBudget { max_candidates: moves, max_seconds: budget_seconds, seed };
            let params = HuntParams { moves_per_restart, ..HuntParams::default() };
            let r = random_unpackable_cover_search(d, k, t, &budget, &params)?;
            let Some(cover) = r.cover.clone() else {
                let why = if r.timed_out { "time budget" } else { "move budget" };
                return Err(Error::ResourceLimit(format!(
                    "no cover of K_{{{d},{t}}} without packing found within the {why} ({} restarts, fewest surviving matrices {})",
                    r.restarts, r.best_surviving
                ))
                .into());
            };
            let cert = certify_packing(Instance::Cover(cover.clone()), &budget, "hunt")?;
            write_certificate(&out, &cert)?;
            let ok = cert.claim == Claim::NoKPacking;
            let text = format!(
                "found a {k}-fold cover of K_{{{d},{t}}} without packing (restart {})\n{}\n",
                r.winning_restart.unwrap_or(0),
                serde_json::to_string(&cover)?
            );
            let value = json!({
                "d": d, "k": k, "t": t, "seed": seed, "winning_restart": r.winning_restart,
                "restarts": r.restarts, "cover": cover, "claim": cert.claim,
            });
            Ok(Output::when(ok, text, value))
        }
        Command::Chi { param, a, b, expect, out, budget } => {
            let kind: ChiKind = param.parse()?;
            let report = chi_exact(kind, a, b, &budget.to_budget(0))?;
            if let Some(bad) = &report.bad_instance {
                let instance = match bad {
                    BadInstance::Cover(c) => Instance::Cover(c.clone()),
                    BadInstance::Assignment(l) => Instance::Assignment(l.clone()),
                };
                let cert = if matches!(kind, ChiKind::Packing | ChiKind::ListPacking) {
                    certify_packing(instance, &budget.to_budget(0), "chi")?
                } else {
                    certify_colouring(instance, &budget.to_budget(0), "chi")?
                };
                write_certificate(&out, &cert)?;
            }
            let steps: Vec<String> =
                report.steps.iter().map(|s| format!("k={}: {}", s.k, if s.good { "good" } else { "bad" })).collect();
            let text = format!("chi_{kind}(K_{{{a},{b}}}) = {}\n{}\n", report.value, steps.join("\n"));
            let ok = expect.is_none_or(|e| e == report.value);
            Ok(Output::when(ok, text, serde_json::to_value(&report)?))
        }
        Command::Verify { certificate, max_d, max_k } => {
            let s = fs::read_to_string(&certificate).with_context(|| format!("reading {}", certificate.display()))?;
            let cert = Certificate::from_json(&s)?;
            let verdict = verify_certificate(&cert, &VerifyLimits { max_d, max_k })?;
            let text = match &verdict {
                Verdict::Accept => format!("accept: {}\n", json!(cert.claim).as_str().unwrap_or_default()),
                Verdict::Reject(r) => format!(
                    "reject: {}\n{}",
                    r.reason,
                    r.evidence.as_ref().map_or(String::new(), |e| format!("evidence: {}\n", json!(e)))
                ),
            };
            Ok(Output::when(verdict.is_accept(), text, serde_json::to_value(&verdict)?))
        }
        Command::Reproduce { long, seed, report } => {
            let r = reproduce(&ReproduceOptions { long, seed, ..ReproduceOptions::default() });
            let text = r.render_text();
            if let Some(p) = report {
                fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(Output::when(r.all_pass(), text, serde_json::to_value(&r)?))
        }
    }
}

fn latin(n: usize, rows: Option<usize>, limit: usize) -> anyhow::Result<Output> {
    if let Some(r) = rows {
        let count = count_latin_rectangles_with_limit(r, n, limit)?;
        return Ok(Output::holds(
            format!("{r}x{n} Latin rectangles: {count}\n"),
            json!({ "rows": r, "n": n, "count": count.to_string(), "method": "enumeration" }),
        ));
    }
    let published = known_latin_square_count(n).ok();
    if n > limit {
        let count = published.ok_or_else(|| {
            Error::ResourceLimit(format!("order {n} is beyond enumeration and the published table"))
        })?;
        return Ok(Output::holds(
            format!("Latin squares of order {n}: {count} (published)\n"),
            json!({ "n": n, "count": count.to_string(), "method": "published" }),
        ));
    }
    let count = count_latin_rectangles_with_limit(n - 1, n, limit)?;
    let agrees = published.as_ref().is_none_or(|p| *p == count);
    Ok(Output::when(
        agrees,
        format!(
            "Latin squares of order {n}: {count} (enumerated{})\n",
            if published.is_some() { if agrees { ", matches published" } else { ", DIFFERS from published" } } else { "" }
        ),
        json!({
            "n": n, "count": count.to_string(), "method": "enumeration",
            "published": published.map(|p| p.to_string()), "agrees": agrees,
        }),
    ))
}

fn forbidden(d: usize, k: usize, budget: u64) -> anyhow::Result<Output> {
    let count = forbidden_count_brute(d, k, budget)?;
    let closed = if d >= 2 && k == FoldMode::Odd.k(d) {
        Some(w_odd(d)?)
    } else if d >= 3 && k == FoldMode::Even.k(d) {
        Some(w_even(d)?)
    } else {
        None
    };
    let agrees = closed.as_ref().is_none_or(|c| *c == count);
    let total = packlab_core::thresholds::total_matrices(d, k);
    let text = match &closed {
        Some(c) => format!(
            "forbidden {d}x{k} matrices: {count} of {total} (closed form {c}: {})\n",
            if agrees { "agrees" } else { "DISAGREES" }
        ),
        None => format!("forbidden {d}x{k} matrices: {count} of {total}\n"),
    };
    let value = json!({
        "d": d, "k": k, "forbidden": count.to_string(), "total": total.to_string(),
        "closed_form": closed.map(|c| c.to_string()), "agrees": agrees,
    });
    Ok(Output::when(agrees, text, value))
}

fn decide(
    instance: Instance,
    colouring: bool,
    expect: Option<Expect>,
    out: &Option<PathBuf>,
    budget: &SearchBudget,
) -> anyhow::Result<Output> {
    let (d, t, k) = instance.shape();
    let (found, witness) = match (&instance, colouring) {
        (Instance::Cover(c), false) => {
            let o = decide_correspondence_packing(c, budget)?;
            (o.is_packable(), o.witness().map(|w| json!(w)))
        }
        (Instance::Assignment(l), false) => match decide_list_packing(l, budget)? {
            packlab_core::ListPackingOutcome::Packable(w) => (true, Some(json!(w))),
            packlab_core::ListPackingOutcome::NotPackable => (false, None),
        },
        (Instance::Cover(c), true) => {
            let w = decide_correspondence_colouring(c, budget)?;
            (w.is_some(), w.map(|w| json!(w)))
        }
        (Instance::Assignment(l), true) => {
            let w = decide_list_colouring(l, budget)?;
            (w.is_some(), w.map(|w| json!(w)))
        }
    };
    if out.is_some() {
        let cert = if colouring {
            certify_colouring(instance.clone(), budget, "decide")?
        } else {
            certify_packing(instance.clone(), budget, "decide")?
        };
        write_certificate(out, &cert)?;
    }
    let what = if colouring { "colourable" } else { "packable" };
    let answer = if found { what.to_string() } else { format!("not {what}") };
    let mut text = format!("K_{{{d},{t}}} with k={k}: {answer}\n");
    if let Some(w) = &witness {
        text.push_str(&format!("witness: {w}\n"));
    }
    let ok = match expect {
        None => true,
        Some(Expect::Packable) => found,
        Some(Expect::Unpackable) => !found,
    };
    Ok(Output::when(ok, text, json!({ "d": d, "t": t, "k": k, "found": found, "witness": witness })))
}
