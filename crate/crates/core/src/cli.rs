//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error (or an interlock refusal),
//! 2 a chase failure was reported, 3 a budget ran out and left a verdict open.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chase::{run_chase, Budget, ChaseConfig, ChaseOutcome};
use crate::classify::{classify, is_weakly_acyclic};
use crate::dchase::{
    run_disjunctive_chase, AnswerStatus, ChaseTree, DChaseConfig, Entailment, NodeStatus,
};
use crate::generate;
use crate::parser::{parse_program, serialize_program, Program};

pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_MAX_DEPTH: usize = 64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILURE_REPORTED: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dlpm",
    version,
    about = "Reason with existential and disjunctive rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a program and check rule safety.
    Validate(Common),
    /// Report the syntactic fragments the rules belong to.
    Classify(Common),
    /// Chase the facts with the rules.
    Chase(Run),
    /// Answer the program's queries.
    Query(Run),
    /// Print a random program.
    Generate(Generate),
}

#[derive(Args, Debug)]
struct Common {
    /// Program files, read as one program.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct Run {
    #[command(flatten)]
    common: Common,
    /// Maximum rule applications, or `unlimited`.
    #[arg(long, value_parser = parse_limit, default_value = "100000")]
    max_steps: Limit,
    /// Maximum chase levels per branch, or `unlimited`.
    #[arg(long, value_parser = parse_limit, default_value = "64")]
    max_depth: Limit,
    /// Print every chase step.
    #[arg(long)]
    trace: bool,
    /// Expand branches in parallel; output may vary between runs.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args, Debug)]
struct Generate {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Program)]
    kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "json-like")]
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Any construct of the rule language.
    Program,
    /// Existential rules with a small database.
    Tgds,
    /// Existential-free disjunctive rules over a tiny domain.
    Disjunctive,
}

type Limit = Option<usize>;

fn parse_limit(s: &str) -> Result<Limit, String> {
    if s.eq_ignore_ascii_case("unlimited") {
        return Ok(None);
    }
    s.parse::<usize>()
        .map(Some)
        .map_err(|_| format!("expected a number or `unlimited`, found `{s}`"))
}

/// Runs the CLI on `args` (program name first), writing to the given streams.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<(String, i32), String> {
    match command {
        Command::Validate(c) => validate(&c),
        Command::Classify(c) => {
            let p = load(&c.files)?;
            let report = classify(&p.dependencies);
            Ok(match c.format {
                Format::Text => (report.to_string(), EXIT_OK),
                Format::Json => (report.to_json() + "\n", EXIT_OK),
            })
        }
        Command::Chase(r) => chase_cmd(&r),
        Command::Query(r) => query_cmd(&r),
        Command::Generate(g) => {
            let mut rng = generate::rng(g.seed);
            let p = match g.kind {
                Kind::Program => generate::random_program(&mut rng),
                Kind::Tgds => {
                    let (sig, sigma) =
                        generate::random_tgd_set(&mut rng, &generate::RuleShape::default());
                    let db = generate::random_database(&mut rng, &sig, 8);
                    Program::new(db, sigma, Vec::new())
                }
                Kind::Disjunctive => {
                    let (_, db, sigma) = generate::random_existential_free_program(&mut rng, 14);
                    Program::new(db, sigma, Vec::new())
                }
            };
            Ok((serialize_program(&p), EXIT_OK))
        }
    }
}

/// Reads and parses the files as a single program.
fn load(files: &[PathBuf]) -> Result<Program, String> {
    let mut all = String::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
        // Parse each file alone first so that locations refer to it.
        parse_program(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        all.push_str(&text);
        all.push('\n');
    }
    parse_program(&all).map_err(|e| e.to_string())
}

fn validate(c: &Common) -> Result<(String, i32), String> {
    let p = load(&c.files)?;
    let text = match c.format {
        Format::Text => format!(
            "ok: {} facts, {} dependencies, {} queries\n",
            p.facts.len(),
            p.dependencies.len(),
            p.queries.len()
        ),
        Format::Json => pretty(&json!({
            "valid": true,
            "facts": p.facts.len(),
            "dependencies": p.dependencies.len(),
            "queries": p.queries.len(),
        })),
    };
    Ok((text, EXIT_OK))
}

fn budget_for(r: &Run, p: &Program) -> Result<Budget, String> {
    let budget = Budget::new(r.max_steps, r.max_depth);
    if budget.is_unlimited() && !is_weakly_acyclic(&p.dependencies) {
        return Err("refusing an unlimited budget: the rules are not weakly acyclic, so the chase may not terminate; \
             set --max-steps or --max-depth"
            .into());
    }
    Ok(budget)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn is_disjunctive(p: &Program) -> bool {
    p.dependencies
        .iter()
        .any(|d| d.as_dtgd().is_some_and(|t| !t.is_tgd()))
}

fn tree_for(r: &Run, p: &Program, budget: Budget) -> ChaseTree {
    run_disjunctive_chase(
        &p.facts,
        &p.dependencies,
        &DChaseConfig {
            budget,
            parallel: r.parallel,
            ..Default::default()
        },
    )
}

fn chase_cmd(r: &Run) -> Result<(String, i32), String> {
    let p = load(&r.common.files)?;
    let budget = budget_for(r, &p)?;
    if is_disjunctive(&p) {
        return Ok(tree_report(r, &p, budget));
    }
    let config = ChaseConfig {
        budget,
        trace: r.trace,
        ..Default::default()
    };
    let run = run_chase(&p.facts, &p.dependencies, &config).map_err(|e| e.to_string())?;
    let code = match run.outcome {
        ChaseOutcome::Success { .. } => EXIT_OK,
        ChaseOutcome::Failure { .. } => EXIT_FAILURE_REPORTED,
        ChaseOutcome::BudgetExhausted { .. } => EXIT_BUDGET,
    };
    let text = match r.common.format {
        Format::Text => {
            let mut s = String::new();
            for e in &run.trace {
                let _ = writeln!(s, "{e}");
            }
            match &run.outcome {
                ChaseOutcome::Success { result, steps } => {
                    let _ = writeln!(s, "success after {steps} steps, {} levels", run.levels);
                    s.push_str(&crate::dchase::instance_to_facts(result));
                }
                ChaseOutcome::Failure { step, violation } => {
                    let _ = writeln!(s, "failure after {step} steps: {violation}");
                }
                ChaseOutcome::BudgetExhausted { partial, steps } => {
                    let _ = writeln!(
                        s,
                        "budget exhausted after {steps} steps, {} levels",
                        run.levels
                    );
                    s.push_str(&crate::dchase::instance_to_facts(partial));
                }
            }
            s
        }
        Format::Json => {
            let mut doc = match &run.outcome {
                ChaseOutcome::Success { result, steps } => json!({
                    "outcome": "success", "steps": steps, "levels": run.levels, "instance": to_value(result),
                }),
                ChaseOutcome::Failure { step, violation } => json!({
                    "outcome": "failure", "steps": step, "levels": run.levels, "violation": to_value(violation),
                }),
                ChaseOutcome::BudgetExhausted { partial, steps } => json!({
                    "outcome": "budget_exhausted", "steps": steps, "levels": run.levels, "instance": to_value(partial),
                }),
            };
            if r.trace {
                doc["trace"] = to_value(&run.trace);
            }
            pretty(&doc)
        }
    };
    Ok((text, code))
}

fn tree_report(r: &Run, p: &Program, budget: Budget) -> (String, i32) {
    let tree = tree_for(r, p, budget);
    let saturated = tree.count(|s| *s == NodeStatus::Saturated);
    let failed = tree.count(|s| matches!(s, NodeStatus::Failed { .. }));
    let open = tree.count(|s| *s == NodeStatus::Open);
    let code = if open > 0 {
        EXIT_BUDGET
    } else if tree.all_failed() {
        EXIT_FAILURE_REPORTED
    } else {
        EXIT_OK
    };
    let text = match r.common.format {
        Format::Text => {
            let mut s = format!(
                "{} steps, {saturated} saturated, {failed} failed, {open} open leaves\n",
                tree.steps
            );
            if r.trace {
                s.push_str(&tree.to_text());
            } else {
                for (id, n) in tree.leaves() {
                    if n.status == NodeStatus::Saturated {
                        let _ = writeln!(s, "leaf {id} [branch {}]", n.branch);
                        if let Some(i) = &n.instance {
                            s.push_str(&crate::dchase::instance_to_facts(i));
                        }
                    }
                }
            }
            s
        }
        Format::Json => {
            let leaves: Vec<Value> = tree
                .leaves()
                .map(|(id, n)| {
                    json!({
                        "id": id,
                        "branch": n.branch,
                        "status": to_value(&n.status),
                        "instance": to_value(&n.instance),
                    })
                })
                .collect();
            let mut doc = json!({
                "steps": tree.steps,
                "saturated": saturated,
                "failed": failed,
                "open": open,
                "leaves": leaves,
            });
            if r.trace {
                doc["tree"] = to_value(&tree.to_export());
            }
            pretty(&doc)
        }
    };
    (text, code)
}

fn query_cmd(r: &Run) -> Result<(String, i32), String> {
    let p = load(&r.common.files)?;
    let budget = budget_for(r, &p)?;
    let tree = tree_for(r, &p, budget);
    let mut open_verdict = false;
    let mut lines = String::new();
    let mut docs = Vec::new();
    for nq in &p.queries {
        if nq.query.is_boolean() {
            let v = tree.certain_bcq(&nq.query).map_err(|e| e.to_string())?;
            open_verdict |= v == Entailment::Unknown;
            let _ = writeln!(lines, "{}: {v}", nq.name);
            docs.push(json!({"name": nq.name, "verdict": v.to_string()}));
        } else {
            let a = tree.certain_answers(&nq.query, &p.dependencies);
            open_verdict |= a.status == AnswerStatus::LowerBoundUnknown;
            let tuples: Vec<String> = a
                .tuples
                .iter()
                .map(|t| {
                    let names: Vec<&str> = t.iter().map(|c| c.name()).collect();
                    format!("({})", names.join(", "))
                })
                .collect();
            let suffix = if a.inconsistent { " inconsistent" } else { "" };
            let _ = writeln!(
                lines,
                "{}: {}{suffix} {{{}}}",
                nq.name,
                a.status,
                tuples.join(", ")
            );
            docs.push(json!({
                "name": nq.name,
                "status": a.status.to_string(),
                "inconsistent": a.inconsistent,
                "tuples": tuples,
            }));
        }
    }
    let text = match r.common.format {
        Format::Text => lines,
        Format::Json => pretty(&json!({ "steps": tree.steps, "queries": docs })),
    };
    Ok((text, if open_verdict { EXIT_BUDGET } else { EXIT_OK }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("dlpm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn limits() {
        assert_eq!(parse_limit("10"), Ok(Some(10)));
        assert_eq!(parse_limit("unlimited"), Ok(None));
        assert!(parse_limit("-1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, _, err) = run_args(&["frobnicate"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(!err.is_empty());
        let (code, _, _) = run_args(&["chase"]);
        assert_eq!(code, EXIT_ERROR);
    }

    #[test]
    fn missing_file() {
        let (code, _, err) = run_args(&["validate", "/nonexistent/x.dl"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.starts_with("error: /nonexistent/x.dl"));
    }

    #[test]
    fn generate_is_seeded() {
        let a = run_args(&["generate", "--seed", "5"]);
        let b = run_args(&["generate", "--seed", "5"]);
        assert_eq!(a, b);
        assert_eq!(a.0, EXIT_OK);
        parse_program(&a.1).unwrap();
    }
}
