//! Batch front end over the `dal` library.
//!
//! Every subcommand answers one question and encodes the answer in its
//! exit status: 0 for an affirmative verdict (or a cleanly produced
//! report), 1 for a negative verdict, 2 for usage and input errors,
//! 3 when an internal limit (prefix budget, enumeration cap, instance
//! cap) was hit before an answer was reached.
//!
//! `--format json` switches the output to line-delimited records, one
//! JSON object per line, each carrying a `schema` field so harnesses
//! can detect format drift.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dal::corpus::{compare_corpus, corpus_signature, generate_corpus, summarize, CorpusError, CorpusSpec};
use dal::scenario::{render_report, CaseReport, Scenario, ScenarioError, ScenarioReport};
use dal::semantics::{eval, render_model, Bounds, DalModel, SemanticsError, World};
use dal::syntax::{
    parse_formula, parse_model_file, parse_theory, Formula, ParseOptions, Signature, Term,
};
use dal::tableau::{
    check_sat, prove_valid, prune_to_closure, render_trace, Premise, ProveError, ProverConfig,
    Verdict,
};
use dal::temporal::{Rat, TimeExpr};

const SCHEMA: &str = "dal.cli/1";

#[derive(Parser)]
#[command(name = "dal", version, about = "Reasoning toolkit for a multi-modal action logic")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Text)]
    format: Fmt,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fmt {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a theory, scenario, or model file and report what it declares.
    Parse {
        file: PathBuf,
    },
    /// Print the canonical form of a theory, scenario, or model file.
    ///
    /// Rendering the rendered output reproduces it byte for byte, so the
    /// second pass is a fixed point.
    Render {
        file: PathBuf,
    },
    /// Evaluate a formula in a finite model.
    ModelCheck(ModelCheckArgs),
    /// Decide validity (default) or joint satisfiability (--sat) of
    /// grounded formulas.
    Prove(ProveArgs),
    /// Decide whether a theory entails a formula. Monotone: laws and
    /// facts are used as given, no persistency assumptions are added.
    Entail(EntailArgs),
    /// Compare tableau verdicts against exhaustive model search over a
    /// seeded formula corpus.
    OracleCompare(OracleArgs),
    /// Run an action scenario with nonmonotonic persistency.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct ModelCheckArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// Formula, parsed against the model's signature.
    #[arg(long)]
    formula: String,
    /// World to evaluate at; defaults to the first declared world.
    #[arg(long)]
    world: Option<String>,
    /// Require the formula at every world instead.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct ProveArgs {
    /// Formula to decide. --sat accepts the flag several times and
    /// treats the formulas as one premise set.
    #[arg(long = "formula", required = true)]
    formulas: Vec<String>,
    /// Theory file contributing its signature, bindings, and
    /// constraints. Its statements are NOT assumed; use `entail`.
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Check joint satisfiability instead of validity.
    #[arg(long)]
    sat: bool,
    /// Print the closed-tableau derivation.
    #[arg(long)]
    trace: bool,
    /// Bind a time constant, e.g. --bind t1=2 or --bind d1=1/1000.
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    binds: Vec<String>,
    /// Tableau prefix budget.
    #[arg(long, env = "DAL_MAX_PREFIXES", default_value_t = 10_000)]
    max_prefixes: usize,
}

#[derive(Args)]
struct EntailArgs {
    /// Theory file; axioms and laws hold globally, facts and
    /// occurrences at the initial state.
    #[arg(long)]
    theory: PathBuf,
    /// Query formula, parsed against the theory's signature.
    #[arg(long)]
    formula: String,
    /// Case block supplying bindings and constraints. Defaults to the
    /// only case when exactly one is declared, else to none.
    #[arg(long)]
    case: Option<String>,
    /// Print the derivation when the query is entailed.
    #[arg(long)]
    trace: bool,
    /// Bind or override a time constant.
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    binds: Vec<String>,
    /// Tableau prefix budget.
    #[arg(long, env = "DAL_MAX_PREFIXES", default_value_t = 10_000)]
    max_prefixes: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Corpus seed.
    #[arg(long, env = "DAL_SEED", default_value_t = 0)]
    seed: u64,
    /// Corpus size.
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// World bound for the model search.
    #[arg(long, env = "DAL_MAX_WORLDS", default_value_t = 4)]
    max_worlds: usize,
    /// Object-domain bound for the model search.
    #[arg(long, env = "DAL_DOMAIN", default_value_t = 2)]
    domain: usize,
    /// Refuse enumeration spaces larger than this many models.
    #[arg(long, default_value_t = 4_000_000)]
    cap: u128,
    /// Tableau prefix budget.
    #[arg(long, env = "DAL_MAX_PREFIXES", default_value_t = 10_000)]
    max_prefixes: usize,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file.
    file: PathBuf,
    /// Case to run; defaults to the only case when exactly one is
    /// declared. Without --query and --case, every case is run.
    #[arg(long)]
    case: Option<String>,
    /// Ask one query instead of the declared ones. Exit status reports
    /// the verdict: 0 derived, 1 not derived.
    #[arg(long)]
    query: Option<String>,
    /// Print derivations (query mode; reports always carry them).
    #[arg(long)]
    trace: bool,
    /// Bind or override a time constant in every case.
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    binds: Vec<String>,
    /// Tableau prefix budget.
    #[arg(long, env = "DAL_MAX_PREFIXES", default_value_t = 10_000)]
    max_prefixes: usize,
}

/// A diagnostic bound for stderr plus the exit status it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn fail2(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn fail3(msg: impl Into<String>) -> Failure {
    Failure { code: 3, msg: msg.into() }
}

fn prove_failure(e: ProveError) -> Failure {
    match e {
        ProveError::Budget(_) | ProveError::Extraction(_) => fail3(e.to_string()),
        _ => fail2(e.to_string()),
    }
}

fn semantics_failure(e: SemanticsError) -> Failure {
    match e {
        SemanticsError::TooLarge { .. } | SemanticsError::DomainTooLarge { .. } => {
            fail3(e.to_string())
        }
        _ => fail2(e.to_string()),
    }
}

fn scenario_failure(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::Prove(p) => prove_failure(p),
        ScenarioError::InstanceCap { .. } => fail3(e.to_string()),
        _ => fail2(e.to_string()),
    }
}

fn corpus_failure(e: CorpusError) -> Failure {
    match e {
        CorpusError::Prove(p) => prove_failure(p),
        CorpusError::Semantics(s) => semantics_failure(s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let fmt = cli.format;
    match cli.cmd {
        Cmd::Parse { file } => cmd_parse(&file, fmt),
        Cmd::Render { file } => cmd_render(&file, fmt),
        Cmd::ModelCheck(a) => cmd_model_check(a, fmt),
        Cmd::Prove(a) => cmd_prove(a, fmt),
        Cmd::Entail(a) => cmd_entail(a, fmt),
        Cmd::OracleCompare(a) => cmd_oracle(a, fmt),
        Cmd::Scenario(a) => cmd_scenario(a, fmt),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail2(format!("{}: {}", path.display(), e)))
}

/// Model files are the ones with world-indexed lines; theory files
/// never start a line with these keywords.
fn looks_like_model(text: &str) -> bool {
    text.lines().any(|l| {
        matches!(
            l.trim_start().split_whitespace().next(),
            Some("world" | "rel" | "act" | "holds" | "time")
        )
    })
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: i64 = num.parse().map_err(|_| format!("`{}` is not a rational", s))?;
    let d: i64 = match den {
        Some(d) => d.parse().map_err(|_| format!("`{}` is not a rational", s))?,
        None => 1,
    };
    if d == 0 {
        return Err(format!("`{}` divides by zero", s));
    }
    Ok(Rat::new(n, d))
}

fn parse_binds(binds: &[String]) -> Result<Vec<(String, Rat)>, Failure> {
    let mut out = Vec::new();
    for b in binds {
        let (name, value) = b
            .split_once('=')
            .ok_or_else(|| fail2(format!("--bind takes NAME=VALUE, got `{}`", b)))?;
        let q = parse_rat(value).map_err(fail2)?;
        out.push((name.trim().to_string(), q));
    }
    Ok(out)
}

fn emit(fmt: Fmt, text: impl FnOnce(), record: serde_json::Value) {
    match fmt {
        Fmt::Text => text(),
        Fmt::Json => println!("{}", record),
    }
}

// ---------------------------------------------------------------- parse

fn cmd_parse(file: &Path, fmt: Fmt) -> Result<u8, Failure> {
    let text = read(file)?;
    if looks_like_model(&text) {
        let (_, m) = parse_model_file(&text).map_err(|e| fail2(e.to_string()))?;
        let transitions: usize =
            m.acts.values().flat_map(|t| t.values()).map(|s| s.len()).sum();
        let facts: usize = m.preds.values().map(|e| e.len()).sum();
        emit(
            fmt,
            || {
                println!(
                    "model: worlds={} r_edges={} transitions={} stamps={} facts={}",
                    m.world_count,
                    m.rel.len(),
                    transitions,
                    m.stamps.len(),
                    facts
                )
            },
            json!({
                "schema": SCHEMA,
                "kind": "model",
                "file": file.display().to_string(),
                "worlds": m.world_count,
                "r_edges": m.rel.len(),
                "transitions": transitions,
                "stamps": m.stamps.len(),
                "facts": facts,
            }),
        );
    } else {
        let thy = parse_theory(&text).map_err(|e| fail2(e.to_string()))?;
        emit(
            fmt,
            || {
                println!(
                    "theory: axioms={} laws={} facts={} occurrences={} fluents={} cases={}",
                    thy.axioms.len(),
                    thy.laws.len(),
                    thy.facts.len(),
                    thy.occurrences.len(),
                    thy.fluents.len(),
                    thy.cases.len()
                )
            },
            json!({
                "schema": SCHEMA,
                "kind": "theory",
                "file": file.display().to_string(),
                "axioms": thy.axioms.len(),
                "laws": thy.laws.len(),
                "facts": thy.facts.len(),
                "occurrences": thy.occurrences.len(),
                "fluents": thy.fluents.len(),
                "cases": thy.cases.len(),
            }),
        );
    }
    Ok(0)
}

// --------------------------------------------------------------- render

fn cmd_render(file: &Path, fmt: Fmt) -> Result<u8, Failure> {
    let text = read(file)?;
    let canonical = if looks_like_model(&text) {
        let (_, m) = parse_model_file(&text).map_err(|e| fail2(e.to_string()))?;
        render_model(&m)
    } else {
        let thy = parse_theory(&text).map_err(|e| fail2(e.to_string()))?;
        thy.render()
    };
    emit(
        fmt,
        || print!("{}", canonical),
        json!({ "schema": SCHEMA, "kind": "render", "canonical": canonical }),
    );
    Ok(0)
}

// ---------------------------------------------------------- model-check

fn resolve_world(m: &DalModel, name: &str) -> Result<World, Failure> {
    if let Some(i) = m.world_names.iter().position(|n| n == name) {
        return Ok(World(i));
    }
    Err(fail2(format!("unknown world `{}`", name)))
}

fn cmd_model_check(a: ModelCheckArgs, fmt: Fmt) -> Result<u8, Failure> {
    let text = read(&a.model)?;
    let (sig, m) = parse_model_file(&text).map_err(|e| fail2(e.to_string()))?;
    if m.world_count == 0 {
        return Err(fail2("the model declares no worlds"));
    }
    let mut sig = sig;
    let phi = parse_formula(&a.formula, &mut sig, ParseOptions::strict())
        .map_err(|e| fail2(e.to_string()))?;
    let (holds, place) = if a.all {
        let mut verdict = (true, "every world".to_string());
        for w in m.worlds() {
            if !eval(&m, w, &phi).map_err(semantics_failure)? {
                verdict = (false, m.world_name(w));
                break;
            }
        }
        verdict
    } else {
        let w = match &a.world {
            Some(name) => resolve_world(&m, name)?,
            None => World(0),
        };
        (eval(&m, w, &phi).map_err(semantics_failure)?, m.world_name(w))
    };
    emit(
        fmt,
        || println!("{} at {}", holds, place),
        json!({
            "schema": SCHEMA,
            "kind": "model-check",
            "formula": a.formula,
            "at": place,
            "holds": holds,
        }),
    );
    Ok(if holds { 0 } else { 1 })
}

// ---------------------------------------------------------------- prove

/// Closed time expressions occurring in the formula; they form the
/// instantiation domain for time-sorted quantifiers.
fn closed_times(phi: &Formula, out: &mut Vec<TimeExpr>) {
    let push_term = |t: &Term, out: &mut Vec<TimeExpr>| {
        if let Term::Time(e) = t {
            if t.free_vars().is_empty() && !out.contains(e) {
                out.push(e.clone());
            }
        }
    };
    match phi {
        Formula::True | Formula::False => {}
        Formula::Atom { args, .. } => {
            for t in args {
                push_term(t, out);
            }
        }
        Formula::Cmp(_, l, r) => {
            for e in [l, r] {
                let t = Term::Time(e.clone());
                push_term(&t, out);
            }
        }
        Formula::Not(p) | Formula::Box(p) | Formula::Forall(_, p) | Formula::Exists(_, p) => {
            closed_times(p, out)
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            closed_times(l, out);
            closed_times(r, out);
        }
        Formula::Act(op, p) => {
            for action in &op.actions {
                for t in &action.args {
                    push_term(t, out);
                }
            }
            closed_times(p, out);
        }
    }
}

fn cmd_prove(a: ProveArgs, fmt: Fmt) -> Result<u8, Failure> {
    let mut cfg = ProverConfig { max_prefixes: a.max_prefixes, ..ProverConfig::default() };
    let (mut sig, opts) = match &a.theory {
        Some(path) => {
            let thy = parse_theory(&read(path)?).map_err(|e| fail2(e.to_string()))?;
            cfg.bindings = thy.bindings.clone();
            cfg.constraints = thy.constraints.clone();
            (thy.sig, ParseOptions::strict())
        }
        None => (Signature::default(), ParseOptions::auto()),
    };
    for (name, q) in parse_binds(&a.binds)? {
        cfg.bindings.insert(name, q);
    }
    let mut formulas = Vec::new();
    for f in &a.formulas {
        formulas.push(parse_formula(f, &mut sig, opts).map_err(|e| fail2(e.to_string()))?);
    }
    for phi in &formulas {
        closed_times(phi, &mut cfg.time_domain);
    }

    if a.sat {
        let premises: Vec<Premise> =
            formulas.iter().map(|f| Premise::local(f.clone(), "premise")).collect();
        let res = check_sat(&premises, &sig, &cfg).map_err(prove_failure)?;
        let satisfiable = res.verdict == Verdict::Sat;
        let model = res.countermodel.as_ref().map(render_model);
        let trace = render_trace(&prune_to_closure(&res.trace));
        emit(
            fmt,
            || {
                println!("{}", res.verdict);
                if let Some(m) = &model {
                    println!("model:");
                    print!("{}", m);
                }
                if a.trace && !satisfiable {
                    print!("{}", trace);
                }
            },
            json!({
                "schema": SCHEMA,
                "kind": "sat",
                "formulas": a.formulas,
                "satisfiable": satisfiable,
                "model": model,
                "trace": if a.trace { Some(trace.clone()) } else { None },
            }),
        );
        return Ok(if satisfiable { 0 } else { 1 });
    }

    if formulas.len() != 1 {
        return Err(fail2("validity mode takes exactly one --formula; --sat takes several"));
    }
    let res = prove_valid(&formulas[0], &sig, &cfg).map_err(prove_failure)?;
    let valid = res.verdict == Verdict::Valid;
    let model = res.countermodel.as_ref().map(render_model);
    let trace = render_trace(&prune_to_closure(&res.trace));
    emit(
        fmt,
        || {
            println!("{}", res.verdict);
            if let Some(m) = &model {
                println!("countermodel:");
                print!("{}", m);
            }
            if a.trace && valid {
                print!("{}", trace);
            }
        },
        json!({
            "schema": SCHEMA,
            "kind": "valid",
            "formula": a.formulas[0],
            "valid": valid,
            "countermodel": model,
            "trace": if a.trace { Some(trace.clone()) } else { None },
        }),
    );
    Ok(if valid { 0 } else { 1 })
}

// --------------------------------------------------------------- entail

fn apply_binds(s: &mut Scenario, binds: &[(String, Rat)]) {
    for (name, q) in binds {
        s.bindings.insert(name.clone(), *q);
        for case in &mut s.cases {
            case.bindings.insert(name.clone(), *q);
        }
    }
}

/// Picks the case a one-query command runs against: the named one, the
/// only one, or none.
fn select_case(s: &Scenario, name: &Option<String>) -> Result<Option<String>, Failure> {
    match name {
        Some(n) => {
            if s.cases.iter().any(|c| &c.name == n) {
                Ok(Some(n.clone()))
            } else {
                Err(fail2(format!("case `{}` is not declared", n)))
            }
        }
        None => match s.cases.len() {
            0 => Ok(None),
            1 => Ok(Some(s.cases[0].name.clone())),
            _ => {
                let names: Vec<&str> = s.cases.iter().map(|c| c.name.as_str()).collect();
                Err(fail2(format!("several cases declared; pass --case {}", names.join("|"))))
            }
        },
    }
}

fn cmd_entail(a: EntailArgs, fmt: Fmt) -> Result<u8, Failure> {
    let thy = parse_theory(&read(&a.theory)?).map_err(|e| fail2(e.to_string()))?;
    let mut scenario = Scenario::from_theory(&thy).map_err(scenario_failure)?;
    scenario.persistency = false;
    scenario.max_prefixes = a.max_prefixes;
    apply_binds(&mut scenario, &parse_binds(&a.binds)?);
    let mut sig = scenario.sig.clone();
    let query =
        parse_formula(&a.formula, &mut sig, ParseOptions::strict()).map_err(|e| fail2(e.to_string()))?;
    let case = select_case(&scenario, &a.case)?;
    let run = match &case {
        Some(name) => scenario.prepare_named(name, std::slice::from_ref(&query)),
        None => scenario.prepare(None, std::slice::from_ref(&query)),
    }
    .map_err(scenario_failure)?;
    let d = run.run(&query).map_err(scenario_failure)?;
    let mut record = serde_json::to_value(&d).expect("derivation serializes");
    record["schema"] = json!(SCHEMA);
    record["kind"] = json!("entail");
    emit(
        fmt,
        || {
            println!("{}", if d.derived { "entailed" } else { "not entailed" });
            if a.trace {
                for line in &d.trace {
                    println!("{}", line);
                }
                if let Some(cm) = &d.countermodel {
                    println!("countermodel:");
                    print!("{}", cm);
                }
            }
        },
        record,
    );
    Ok(if d.derived { 0 } else { 1 })
}

// ------------------------------------------------------- oracle-compare

fn cmd_oracle(a: OracleArgs, fmt: Fmt) -> Result<u8, Failure> {
    let corpus = generate_corpus(CorpusSpec { seed: a.seed, count: a.count });
    let sig = corpus_signature();
    let bounds = Bounds { max_worlds: a.max_worlds, max_domain: a.domain, cap: a.cap };
    let cfg = ProverConfig { max_prefixes: a.max_prefixes, ..ProverConfig::default() };
    let records = compare_corpus(&corpus, &sig, &bounds, &cfg).map_err(corpus_failure)?;
    let summary = summarize(&records);
    let clean = summary.disagreements == 0 && summary.witness_failures == 0;
    match fmt {
        Fmt::Text => {
            println!(
                "corpus seed={} count={}: sat={} unsat={} disagreements={} witness_failures={}",
                a.seed,
                summary.total,
                summary.sat,
                summary.unsat,
                summary.disagreements,
                summary.witness_failures
            );
            for r in &records {
                if !r.agree {
                    println!(
                        "disagree at {}: {}  prover={} oracle={}",
                        r.index,
                        r.formula,
                        if r.prover_sat { "sat" } else { "unsat" },
                        if r.oracle_sat { "sat" } else { "unsat" }
                    );
                }
                if r.witness_ok == Some(false) {
                    println!("bad witness at {}: {}", r.index, r.formula);
                }
            }
        }
        Fmt::Json => {
            for r in &records {
                let mut v = serde_json::to_value(r).expect("record serializes");
                v["schema"] = json!(SCHEMA);
                v["kind"] = json!("compare-record");
                println!("{}", v);
            }
            let mut v = serde_json::to_value(&summary).expect("summary serializes");
            v["schema"] = json!(SCHEMA);
            v["kind"] = json!("compare-summary");
            v["seed"] = json!(a.seed);
            println!("{}", v);
        }
    }
    Ok(if clean { 0 } else { 1 })
}

// ------------------------------------------------------------- scenario

fn cmd_scenario(a: ScenarioArgs, fmt: Fmt) -> Result<u8, Failure> {
    let thy = parse_theory(&read(&a.file)?).map_err(|e| fail2(e.to_string()))?;
    let mut scenario = Scenario::from_theory(&thy).map_err(scenario_failure)?;
    scenario.max_prefixes = a.max_prefixes;
    apply_binds(&mut scenario, &parse_binds(&a.binds)?);

    if let Some(q) = &a.query {
        let mut sig = scenario.sig.clone();
        let query =
            parse_formula(q, &mut sig, ParseOptions::strict()).map_err(|e| fail2(e.to_string()))?;
        let case = select_case(&scenario, &a.case)?;
        let run = match &case {
            Some(name) => scenario.prepare_named(name, std::slice::from_ref(&query)),
            None => scenario.prepare(None, std::slice::from_ref(&query)),
        }
        .map_err(scenario_failure)?;
        let d = run.run(&query).map_err(scenario_failure)?;
        let mut record = serde_json::to_value(&d).expect("derivation serializes");
        record["schema"] = json!(SCHEMA);
        record["kind"] = json!("derivation");
        emit(
            fmt,
            || {
                println!("{}", if d.derived { "derived" } else { "not derived" });
                if a.trace {
                    for line in &d.trace {
                        println!("{}", line);
                    }
                    if let Some(cm) = &d.countermodel {
                        println!("countermodel:");
                        print!("{}", cm);
                    }
                }
            },
            record,
        );
        return Ok(if d.derived { 0 } else { 1 });
    }

    let report = match &a.case {
        Some(name) => one_case_report(&scenario, name)?,
        None => scenario.run_all_cases().map_err(scenario_failure)?,
    };
    match fmt {
        Fmt::Text => print!("{}", render_report(&report)),
        Fmt::Json => {
            for c in &report.cases {
                let mut v = serde_json::to_value(c).expect("case serializes");
                v["schema"] = json!(SCHEMA);
                v["kind"] = json!("case");
                println!("{}", v);
            }
        }
    }
    Ok(0)
}

/// Like `run_all_cases` restricted to one declared case.
fn one_case_report(scenario: &Scenario, name: &str) -> Result<ScenarioReport, Failure> {
    let report = match scenario.prepare_named(name, &[]) {
        Ok(run) => {
            let derivations = run.run_declared().map_err(scenario_failure)?;
            CaseReport {
                case: run.name.clone(),
                ran: true,
                diagnosis: None,
                bindings: run.bindings_display.clone(),
                constraints: run.constraints_display.clone(),
                instances: run.instances_display.clone(),
                assumptions: run.assumptions_display.clone(),
                derivations,
            }
        }
        Err(e) if e.is_skippable() => CaseReport {
            case: name.to_string(),
            ran: false,
            diagnosis: Some(e.to_string()),
            bindings: String::new(),
            constraints: Vec::new(),
            instances: Vec::new(),
            assumptions: Vec::new(),
            derivations: Vec::new(),
        },
        Err(e) => return Err(scenario_failure(e)),
    };
    Ok(ScenarioReport { theory: scenario.base_header(), cases: vec![report] })
}
