//! Temporal action scenarios with nonmonotonic persistency.
//!
//! A scenario bundles action laws, initial facts, declared occurrences,
//! and per-case bindings and ordering constraints. Before answering
//! queries it augments the theory with weak frame assumptions: a fluent
//! literal established at some instant is restated at each later
//! relevant instant unless the complementary literal is derivable
//! there, either at the outer level or under the modality of an
//! occurred action. The augmented theory is then handed to the tableau.
//!
//! The relevant instants are finite: whatever the facts, occurrences,
//! occurrence-instantiated laws, constraints, and queries mention,
//! closed once under adding the belief-delay constant `d1` when the
//! signature declares it. An unbound `d1` defaults to 1/1000 and must
//! lie strictly between zero and the smallest gap separating the other
//! instants, so the delayed copies never collide with them. Law
//! variables occurring in action terms are bound by unification against
//! the occurrences; remaining free variables range over the relevant
//! instants and the object constants.
//!
//! Reports number statements the way a hand derivation reads: declared
//! laws, facts, occurrences, and constraints keep their theory numbers,
//! constraint-employing law instances and persistency assumptions take
//! the following numbers, and each trace's derived lines continue from
//! there.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::semantics::render_model;
use crate::syntax::{
    ground, ActionTerm, CaseDecl, Formula, Signature, Sort, SyntaxError, Term, TheoryFile, Var,
};
use crate::tableau::{
    check_sat, constraint_entails, decide_cmp, entails, nnf, prune_to_closure, Premise,
    ProveError, ProverConfig, TraceLine, Verdict,
};
use crate::temporal::{
    check_constraints, format_rat, rat, rat_int, Rat, TemporalError, TimeAtom, TimeBindings,
    TimeConstraint, TimeExpr,
};

/// Reserved time constant naming the belief-formation delay. When the
/// signature declares it and no binding supplies a value, it defaults
/// to 1/1000.
pub const OFFSET_CONST: &str = "d1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Prove(#[from] ProveError),
    #[error("`{0}` is not a declared predicate, so it cannot be a fluent")]
    NotAFluent(String),
    #[error("fluent `{0}` must carry exactly one time-sorted argument")]
    FluentStamp(String),
    #[error("case `{0}` is not declared")]
    UnknownCase(String),
    #[error("law ({law}) expands to more than {cap} instances")]
    InstanceCap { law: usize, cap: usize },
    #[error("delay `{name}` = {value} must lie strictly between 0 and the smallest instant gap ({gap})")]
    OffsetGap { name: String, value: String, gap: String },
    #[error("case `{0}`: the augmented theory is unsatisfiable")]
    Inconsistent(String),
    #[error("unsupported action argument pattern `{0}`")]
    Pattern(String),
    #[error("variable `{0}` is used at both sorts")]
    MixedSorts(String),
}

impl ScenarioError {
    /// Errors that disqualify one case without poisoning the whole
    /// scenario; `run_all_cases` converts them into a skip diagnosis.
    pub fn is_skippable(&self) -> bool {
        matches!(
            self,
            ScenarioError::Temporal(
                TemporalError::Violated(_) | TemporalError::UnboundConstant(_)
            ) | ScenarioError::OffsetGap { .. }
                | ScenarioError::Inconsistent(_)
        )
    }
}

/// A parsed scenario: the numbered theory plus everything needed to
/// prepare its cases.
pub struct Scenario {
    pub sig: Signature,
    globals: Vec<(Formula, &'static str, usize)>,
    facts: Vec<(Formula, usize)>,
    occurrences: Vec<(ActionTerm, usize)>,
    /// Fluent predicate -> index of its time-stamp argument.
    fluents: BTreeMap<String, usize>,
    pub bindings: TimeBindings,
    constraints: Vec<TimeConstraint>,
    pub cases: Vec<CaseDecl>,
    /// First display number available to constraints.
    constraint_start: usize,
    pub offset_default: Rat,
    pub max_instances: usize,
    pub max_prefixes: usize,
    /// Off switch for the abduction step: with `false`, `prepare`
    /// builds only the monotone premise set (laws, facts, occurrences,
    /// constraint-resolved instances) and adds no assumptions.
    pub persistency: bool,
}

impl Scenario {
    pub fn from_theory(thy: &TheoryFile) -> Result<Scenario, ScenarioError> {
        let mut fluents = BTreeMap::new();
        for f in &thy.fluents {
            let sorts = thy
                .sig
                .predicates
                .get(f)
                .ok_or_else(|| ScenarioError::NotAFluent(f.clone()))?;
            let stamps: Vec<usize> = sorts
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == Sort::Time)
                .map(|(i, _)| i)
                .collect();
            match stamps.as_slice() {
                [i] => fluents.insert(f.clone(), *i),
                _ => return Err(ScenarioError::FluentStamp(f.clone())),
            };
        }
        let mut no = 0;
        let mut globals = Vec::new();
        for a in &thy.axioms {
            no += 1;
            globals.push((a.clone(), "axiom", no));
        }
        for l in &thy.laws {
            no += 1;
            globals.push((l.clone(), "law", no));
        }
        let mut facts = Vec::new();
        for f in &thy.facts {
            no += 1;
            facts.push((f.clone(), no));
        }
        let mut occurrences = Vec::new();
        for o in &thy.occurrences {
            no += 1;
            occurrences.push((o.clone(), no));
        }
        Ok(Scenario {
            sig: thy.sig.clone(),
            globals,
            facts,
            occurrences,
            fluents,
            bindings: thy.bindings.clone(),
            constraints: thy.constraints.clone(),
            cases: thy.cases.clone(),
            constraint_start: no + 1,
            offset_default: rat(1, 1000),
            max_instances: 4000,
            max_prefixes: 10_000,
            persistency: true,
        })
    }

    /// Numbered listing of the case-independent theory.
    pub fn base_header(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (g, kind, no) in &self.globals {
            out.push(format!("({}) {}: {}", no, kind, g));
        }
        for (f, no) in &self.facts {
            out.push(format!("({}) premise: {}", no, f));
        }
        for (o, no) in &self.occurrences {
            out.push(format!("({}) occurs: {}", no, o));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            out.push(format!("({}) constraint: {}", self.constraint_start + i, c));
        }
        out
    }

    pub fn prepare_named(
        &self,
        name: &str,
        extra_queries: &[Formula],
    ) -> Result<CaseRun, ScenarioError> {
        let case = self
            .cases
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| ScenarioError::UnknownCase(name.to_string()))?;
        self.prepare(Some(case), extra_queries)
    }

    /// Builds the augmented premise set for one case (or for the bare
    /// theory). `extra_queries` contribute their instants to the
    /// relevant set without being scheduled for execution.
    pub fn prepare(
        &self,
        case: Option<&CaseDecl>,
        extra_queries: &[Formula],
    ) -> Result<CaseRun, ScenarioError> {
        let name = case.map_or_else(|| "base".to_string(), |c| c.name.clone());
        let mut bindings = self.bindings.clone();
        let mut constraints = self.constraints.clone();
        let mut queries: Vec<Formula> = Vec::new();
        if let Some(c) = case {
            for (k, v) in &c.bindings {
                bindings.insert(k.clone(), *v);
            }
            constraints.extend(c.constraints.iter().cloned());
            queries = c.queries.clone();
        }
        let has_offset = self.sig.is_time_const(OFFSET_CONST);
        if has_offset {
            bindings.entry(OFFSET_CONST.to_string()).or_insert(self.offset_default);
        }
        for c in &self.sig.time_consts {
            if !bindings.contains_key(c) {
                return Err(TemporalError::UnboundConstant(c.clone()).into());
            }
        }
        check_constraints(&constraints, &bindings)?;

        // Bind law variables that occur inside action terms against the
        // declared occurrences.
        let mut applied: Vec<(usize, Formula)> = Vec::new();
        for (gi, (g, _, _)) in self.globals.iter().enumerate() {
            for theta in self.thetas_for(g, &bindings)? {
                let mut inst = g.clone();
                for (v, t) in &theta {
                    inst = inst.instantiate(v, t)?;
                }
                applied.push((gi, inst));
            }
        }

        // Relevant instants, keyed by value; the first expression seen
        // for a value becomes its display form.
        let mut points: BTreeMap<Rat, TimeExpr> = BTreeMap::new();
        {
            let mut exprs: Vec<TimeExpr> = Vec::new();
            for (f, _) in &self.facts {
                collect_time_exprs(f, &mut exprs);
            }
            for (o, _) in &self.occurrences {
                for t in &o.args {
                    if let Term::Time(te) = t {
                        exprs.push(te.clone());
                    }
                }
            }
            for (g, _, _) in &self.globals {
                collect_time_exprs(g, &mut exprs);
            }
            for (_, f) in &applied {
                collect_time_exprs(f, &mut exprs);
            }
            for c in &constraints {
                let (l, r) = c.sides();
                exprs.push(l);
                exprs.push(r);
            }
            for q in queries.iter().chain(extra_queries) {
                collect_time_exprs(q, &mut exprs);
            }
            for te in exprs {
                if te.free_vars().is_empty() {
                    points.entry(te.eval(&bindings)?).or_insert(te);
                }
            }
        }
        // Persistency candidates live at the instants the scenario
        // mentions directly; the delayed copies added below only widen
        // the instantiation domain and the defeat tests.
        let candidate_points: Vec<(Rat, TimeExpr)> =
            points.iter().map(|(v, e)| (*v, e.clone())).collect();
        if has_offset {
            let d1 = bindings[OFFSET_CONST];
            let base: Vec<Rat> = points
                .iter()
                .filter(|(_, e)| !e.constants().contains(OFFSET_CONST))
                .map(|(v, _)| *v)
                .collect();
            let gap = base.windows(2).map(|w| w[1] - w[0]).min();
            if d1 <= Rat::zero() || gap.map_or(false, |g| d1 >= g) {
                return Err(ScenarioError::OffsetGap {
                    name: OFFSET_CONST.to_string(),
                    value: format_rat(&d1),
                    gap: format_rat(&gap.unwrap_or_default()),
                });
            }
            let shift = TimeExpr::constant_sym(OFFSET_CONST);
            for (v, e) in &candidate_points {
                if e.constants().contains(OFFSET_CONST) {
                    continue;
                }
                points.entry(*v + d1).or_insert_with(|| e.add(&shift));
            }
        }
        let point_exprs: Vec<TimeExpr> = points.values().cloned().collect();
        let cfg = ProverConfig {
            bindings: bindings.clone(),
            constraints: constraints.clone(),
            time_domain: point_exprs.clone(),
            max_prefixes: self.max_prefixes,
        };
        let cnums: Vec<usize> =
            (0..constraints.len()).map(|i| self.constraint_start + i).collect();

        // Ground the laws: expand leftover free variables, decide the
        // comparisons, drop what collapses to truth.
        let mut premises: Vec<Premise> = Vec::new();
        let mut seen: BTreeSet<Formula> = BTreeSet::new();
        let mut attributed: Vec<ExtraLine> = Vec::new();
        for (gi, inst0) in &applied {
            let (g, kind, no) = &self.globals[*gi];
            for inst in self.expand_free(inst0.clone(), *no, &point_exprs)? {
                let (resolved, cited, symbolic) = resolve_attr(&inst, &cfg, &cnums)?;
                let simp = resolved.simplify();
                if trivially_true(&simp) || !seen.insert(simp.clone()) {
                    continue;
                }
                let label = if simp == *g {
                    format!("{} ({})", kind, no)
                } else if cited.is_empty() {
                    format!("instance of ({})", no)
                } else {
                    format!("instance of ({}) using {}", no, fmt_refs(&cited))
                };
                let premise = Premise::global(simp.clone(), label.clone());
                if symbolic {
                    attributed.push(ExtraLine {
                        label: label.clone(),
                        key: self.nnf_key(&premise, &cfg)?,
                        formula: simp,
                        number: 0,
                    });
                }
                premises.push(premise);
            }
        }
        for (f, no) in &self.facts {
            premises.push(Premise::local(f.clone(), format!("premise ({})", no)));
        }
        for (o, no) in &self.occurrences {
            premises.push(Premise::local(
                Formula::dia_act_one(o.clone(), Formula::True),
                format!("occurrence ({})", no),
            ));
        }

        // Persistency closure: carry each fluent fact forward, instant
        // by instant, unless some context derives the complement.
        let mut assumptions: Vec<ExtraLine> = Vec::new();
        {
            let fact_forms: BTreeSet<Formula> =
                self.facts.iter().map(|(f, _)| f.reduce_times(&bindings)).collect();
            let mut candidates: Vec<Candidate> = Vec::new();
            let persisting = if self.persistency { self.facts.as_slice() } else { &[] };
            for (f, no) in persisting {
                let Some((pos, pred, args)) = f.as_literal() else { continue };
                let Some(&stamp) = self.fluents.get(pred) else { continue };
                let Term::Time(te) = &args[stamp] else { continue };
                let t0 = te.eval(&bindings)?;
                for (v, e) in &candidate_points {
                    if *v <= t0 {
                        continue;
                    }
                    let mut stamped = args.to_vec();
                    stamped[stamp] = Term::Time(e.clone());
                    let atom = Formula::atom(pred, stamped);
                    let (lit, complement) = if pos {
                        (atom.clone(), Formula::not(atom))
                    } else {
                        (Formula::not(atom.clone()), atom)
                    };
                    if fact_forms.contains(&lit.reduce_times(&bindings)) {
                        continue;
                    }
                    candidates.push(Candidate {
                        value: *v,
                        render: lit.to_string(),
                        lit,
                        complement,
                        seed: *no,
                    });
                }
            }
            candidates
                .sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.render.cmp(&b.render)));
            candidates.dedup_by(|a, b| a.lit == b.lit);
            let mut added = vec![false; candidates.len()];
            loop {
                let mut changed = false;
                'cand: for (i, c) in candidates.iter().enumerate() {
                    if added[i] {
                        continue;
                    }
                    let mut contexts = vec![c.complement.clone()];
                    contexts.extend(
                        self.occurrences
                            .iter()
                            .map(|(o, _)| Formula::act_one(o.clone(), c.complement.clone())),
                    );
                    for ctx in contexts {
                        if entails(&premises, &ctx, &self.sig, &cfg)?.affirmative() {
                            continue 'cand;
                        }
                    }
                    let label = format!("persistency from ({})", c.seed);
                    let premise = Premise::local(c.lit.clone(), label.clone());
                    assumptions.push(ExtraLine {
                        label,
                        key: self.nnf_key(&premise, &cfg)?,
                        formula: c.lit.clone(),
                        number: 0,
                    });
                    premises.push(premise);
                    added[i] = true;
                    changed = true;
                }
                if !changed {
                    break;
                }
            }
        }
        if check_sat(&premises, &self.sig, &cfg)?.verdict != Verdict::Sat {
            return Err(ScenarioError::Inconsistent(name));
        }

        let mut next = self.constraint_start + constraints.len();
        let mut case_numbers: BTreeMap<(String, String), usize> = BTreeMap::new();
        for e in attributed.iter_mut().chain(assumptions.iter_mut()) {
            e.number = next;
            next += 1;
            case_numbers.insert((e.label.clone(), e.key.clone()), e.number);
        }
        let instances_display: Vec<String> = attributed
            .iter()
            .map(|e| format!("({}) {}  [{}]", e.number, e.formula, instance_justification(&e.label)))
            .collect();
        let assumptions_display: Vec<String> = assumptions
            .iter()
            .map(|e| format!("({}) {}  [{}]", e.number, e.formula, e.label))
            .collect();
        let constraints_display: Vec<String> = constraints
            .iter()
            .enumerate()
            .skip(self.constraints.len())
            .map(|(i, c)| format!("({}) constraint: {}", self.constraint_start + i, c))
            .collect();
        let mut header = self.base_header();
        header.extend(constraints_display.iter().cloned());
        let bindings_display = bindings
            .iter()
            .map(|(k, v)| format!("{} = {}", k, format_rat(v)))
            .collect::<Vec<_>>()
            .join(", ");

        Ok(CaseRun {
            name,
            sig: self.sig.clone(),
            cfg,
            premises,
            queries,
            header,
            constraints_display,
            instances_display,
            assumptions_display,
            bindings_display,
            points: point_exprs,
            case_numbers,
            seq_start: next,
        })
    }

    /// Runs every declared case; cases whose bindings or constraints do
    /// not work out are skipped with a diagnosis rather than failing
    /// the batch.
    pub fn run_all_cases(&self) -> Result<ScenarioReport, ScenarioError> {
        let mut cases = Vec::new();
        for case in &self.cases {
            match self.prepare(Some(case), &[]) {
                Ok(run) => {
                    let derivations = run.run_declared()?;
                    cases.push(CaseReport {
                        case: run.name.clone(),
                        ran: true,
                        diagnosis: None,
                        bindings: run.bindings_display.clone(),
                        constraints: run.constraints_display.clone(),
                        instances: run.instances_display.clone(),
                        assumptions: run.assumptions_display.clone(),
                        derivations,
                    });
                }
                Err(e) if e.is_skippable() => cases.push(CaseReport {
                    case: case.name.clone(),
                    ran: false,
                    diagnosis: Some(e.to_string()),
                    bindings: case
                        .bindings
                        .iter()
                        .map(|(k, v)| format!("{} = {}", k, format_rat(v)))
                        .collect::<Vec<_>>()
                        .join(", "),
                    constraints: Vec::new(),
                    instances: Vec::new(),
                    assumptions: Vec::new(),
                    derivations: Vec::new(),
                }),
                Err(e) => return Err(e),
            }
        }
        Ok(ScenarioReport { theory: self.base_header(), cases })
    }

    fn thetas_for(
        &self,
        phi: &Formula,
        bindings: &TimeBindings,
    ) -> Result<Vec<Vec<(Var, Term)>>, ScenarioError> {
        let mut patterns = Vec::new();
        collect_action_terms(phi, &mut patterns);
        patterns.retain(|p| !p.free_vars().is_empty());
        let mut thetas: Vec<Vec<(Var, Term)>> = vec![Vec::new()];
        for pat in &patterns {
            let mut next = Vec::new();
            for theta in &thetas {
                let applied = apply_theta_action(pat, theta)?;
                if applied.free_vars().is_empty() {
                    next.push(theta.clone());
                    continue;
                }
                for (occ, _) in &self.occurrences {
                    if let Some(ext) = unify_action(&applied, occ, bindings)? {
                        let mut merged = theta.clone();
                        merged.extend(ext);
                        next.push(merged);
                    }
                }
            }
            thetas = next;
        }
        Ok(thetas)
    }

    /// Expands whatever free variables are left after occurrence
    /// unification: time variables over the relevant instants, object
    /// variables over the object constants.
    fn expand_free(
        &self,
        inst: Formula,
        law_no: usize,
        points: &[TimeExpr],
    ) -> Result<Vec<Formula>, ScenarioError> {
        let mut queue = vec![inst];
        loop {
            let free = queue[0].free_vars();
            let mut sorts: BTreeMap<&str, Sort> = BTreeMap::new();
            for v in &free {
                if let Some(prev) = sorts.insert(v.name.as_str(), v.sort) {
                    if prev != v.sort {
                        return Err(ScenarioError::MixedSorts(v.name.clone()));
                    }
                }
            }
            let Some(v) = free.iter().next().cloned() else { break };
            let values: Vec<Term> = match v.sort {
                Sort::Object => {
                    self.sig.object_consts.iter().map(|c| Term::Const(c.clone())).collect()
                }
                Sort::Time => points.iter().map(|p| Term::Time(p.clone())).collect(),
            };
            if values.is_empty() {
                return Err(SyntaxError::EmptyDomain { sort: v.sort }.into());
            }
            if queue.len().saturating_mul(values.len()) > self.max_instances {
                return Err(ScenarioError::InstanceCap { law: law_no, cap: self.max_instances });
            }
            let mut next = Vec::with_capacity(queue.len() * values.len());
            for f in &queue {
                for val in &values {
                    next.push(f.instantiate(&v, val)?);
                }
            }
            queue = next;
        }
        Ok(queue)
    }

    /// The exact string the tableau will record for this premise's root
    /// assertion, used to match trace lines back to case numbering.
    fn nnf_key(&self, p: &Premise, cfg: &ProverConfig) -> Result<String, ScenarioError> {
        let reduced = p.formula.reduce_times(&cfg.bindings);
        let grounded = ground(&reduced, &self.sig, &cfg.time_domain)?;
        Ok(nnf(&grounded.flatten_modalities(), true, cfg)?.to_string())
    }
}

/// One prepared case: augmented premises plus the numbering needed to
/// render its derivations.
pub struct CaseRun {
    pub name: String,
    pub sig: Signature,
    pub cfg: ProverConfig,
    pub premises: Vec<Premise>,
    pub queries: Vec<Formula>,
    pub header: Vec<String>,
    pub constraints_display: Vec<String>,
    pub instances_display: Vec<String>,
    pub assumptions_display: Vec<String>,
    pub bindings_display: String,
    pub points: Vec<TimeExpr>,
    case_numbers: BTreeMap<(String, String), usize>,
    seq_start: usize,
}

impl CaseRun {
    pub fn run(&self, query: &Formula) -> Result<Derivation, ScenarioError> {
        let res = entails(&self.premises, query, &self.sig, &self.cfg)?;
        let derived = res.verdict == Verdict::Entailed;
        let trace = if derived {
            self.render_derivation(&prune_to_closure(&res.trace))
        } else {
            Vec::new()
        };
        Ok(Derivation {
            case: self.name.clone(),
            query: query.to_string(),
            derived,
            trace,
            countermodel: res.countermodel.as_ref().map(render_model),
        })
    }

    pub fn run_declared(&self) -> Result<Vec<Derivation>, ScenarioError> {
        self.queries.iter().map(|q| self.run(q)).collect()
    }

    fn render_derivation(&self, lines: &[TraceLine]) -> Vec<String> {
        let mut display: BTreeMap<usize, usize> = BTreeMap::new();
        let mut seq = self.seq_start;
        for l in lines {
            let key = (l.rule.clone(), l.formula.clone());
            let n = if let Some(&m) = self.case_numbers.get(&key) {
                m
            } else if let Some(k) = theory_number(&l.rule) {
                k
            } else {
                seq += 1;
                seq - 1
            };
            display.insert(l.id, n);
        }
        lines
            .iter()
            .map(|l| {
                let key = (l.rule.clone(), l.formula.clone());
                let refs: Vec<String> = l
                    .premises
                    .iter()
                    .filter_map(|p| display.get(p).map(|m| format!("({})", m)))
                    .collect();
                let just = if self.case_numbers.contains_key(&key)
                    && l.rule.starts_with("instance of (")
                {
                    instance_justification(&l.rule)
                } else if refs.is_empty() {
                    l.rule.clone()
                } else {
                    format!("{}, from {}", l.rule, refs.join(" and "))
                };
                format!("({}) s{}: {}  [{}]", display[&l.id], l.prefix, l.formula, just)
            })
            .collect()
    }
}

/// Outcome of one query against a prepared case.
#[derive(Clone, Debug, Serialize)]
pub struct Derivation {
    pub case: String,
    pub query: String,
    pub derived: bool,
    pub trace: Vec<String>,
    pub countermodel: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub ran: bool,
    pub diagnosis: Option<String>,
    pub bindings: String,
    pub constraints: Vec<String>,
    pub instances: Vec<String>,
    pub assumptions: Vec<String>,
    pub derivations: Vec<Derivation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub theory: Vec<String>,
    pub cases: Vec<CaseReport>,
}

pub fn render_report(report: &ScenarioReport) -> String {
    let mut out = String::new();
    out.push_str("theory\n");
    for l in &report.theory {
        out.push_str(l);
        out.push('\n');
    }
    for c in &report.cases {
        out.push('\n');
        if c.ran {
            out.push_str(&format!("case {}\n", c.case));
        } else {
            out.push_str(&format!("case {} (skipped)\n", c.case));
        }
        if let Some(d) = &c.diagnosis {
            out.push_str(&format!("  {}\n", d));
        }
        if !c.bindings.is_empty() {
            out.push_str(&format!("  bind: {}\n", c.bindings));
        }
        for l in c.constraints.iter().chain(&c.instances).chain(&c.assumptions) {
            out.push_str(&format!("  {}\n", l));
        }
        for d in &c.derivations {
            out.push_str(&format!(
                "  query {}: {}\n",
                d.query,
                if d.derived { "derived" } else { "not derived" }
            ));
            for t in &d.trace {
                out.push_str(&format!("    {}\n", t));
            }
            if let Some(cm) = &d.countermodel {
                for line in cm.lines() {
                    out.push_str(&format!("    {}\n", line));
                }
            }
        }
    }
    out
}

struct Candidate {
    value: Rat,
    render: String,
    lit: Formula,
    complement: Formula,
    seed: usize,
}

struct ExtraLine {
    label: String,
    key: String,
    formula: Formula,
    number: usize,
}

/// Decides the comparisons of a ground law instance and records which
/// declared constraints justified them: first by matching the
/// comparison as written, then by matching its value under the binding.
fn resolve_attr(
    phi: &Formula,
    cfg: &ProverConfig,
    cnums: &[usize],
) -> Result<(Formula, BTreeSet<usize>, bool), ScenarioError> {
    Ok(match phi {
        Formula::True | Formula::False | Formula::Atom { .. } => {
            (phi.clone(), BTreeSet::new(), false)
        }
        Formula::Cmp(op, lhs, rhs) => {
            let value = match decide_cmp(*op, lhs, rhs, cfg) {
                Ok(v) => v,
                Err(ProveError::OpenTimeConstraint(_)) => {
                    return Ok((phi.clone(), BTreeSet::new(), false))
                }
                Err(e) => return Err(e.into()),
            };
            let query = TimeConstraint::new(lhs, *op, rhs);
            let reduced = TimeConstraint::new(
                &lhs.reduce(&cfg.bindings),
                *op,
                &rhs.reduce(&cfg.bindings),
            );
            let mut cited = BTreeSet::new();
            let mut symbolic = false;
            let mut numeric_hit = None;
            for (i, known) in cfg.constraints.iter().enumerate() {
                if constraint_entails(known, &query) == Some(value) {
                    cited.insert(cnums[i]);
                    symbolic = true;
                    break;
                }
                if numeric_hit.is_none() {
                    let kr = TimeConstraint::new(
                        &known.delta.reduce(&cfg.bindings),
                        known.op,
                        &TimeExpr::zero(),
                    );
                    if constraint_entails(&kr, &reduced) == Some(value) {
                        numeric_hit = Some(cnums[i]);
                    }
                }
            }
            if !symbolic {
                if let Some(n) = numeric_hit {
                    cited.insert(n);
                }
            }
            (if value { Formula::True } else { Formula::False }, cited, symbolic)
        }
        Formula::Not(p) => {
            let (q, c, s) = resolve_attr(p, cfg, cnums)?;
            (Formula::not(q), c, s)
        }
        Formula::And(l, r) => {
            let (a, mut c, s1) = resolve_attr(l, cfg, cnums)?;
            let (b, c2, s2) = resolve_attr(r, cfg, cnums)?;
            c.extend(c2);
            (Formula::and(a, b), c, s1 || s2)
        }
        Formula::Or(l, r) => {
            let (a, mut c, s1) = resolve_attr(l, cfg, cnums)?;
            let (b, c2, s2) = resolve_attr(r, cfg, cnums)?;
            c.extend(c2);
            (Formula::or(a, b), c, s1 || s2)
        }
        Formula::Implies(l, r) => {
            let (a, mut c, s1) = resolve_attr(l, cfg, cnums)?;
            let (b, c2, s2) = resolve_attr(r, cfg, cnums)?;
            c.extend(c2);
            (Formula::implies(a, b), c, s1 || s2)
        }
        Formula::Forall(v, b) => {
            let (q, c, s) = resolve_attr(b, cfg, cnums)?;
            (Formula::forall(v.clone(), q), c, s)
        }
        Formula::Exists(v, b) => {
            let (q, c, s) = resolve_attr(b, cfg, cnums)?;
            (Formula::exists(v.clone(), q), c, s)
        }
        Formula::Box(p) => {
            let (q, c, s) = resolve_attr(p, cfg, cnums)?;
            (Formula::boxed(q), c, s)
        }
        Formula::Act(op, p) => {
            let (q, c, s) = resolve_attr(p, cfg, cnums)?;
            (Formula::act(op.clone(), q), c, s)
        }
    })
}

/// True for formulas no assertion can use: `true` under any stack of
/// boxes, action modalities, and quantifiers.
fn trivially_true(phi: &Formula) -> bool {
    match phi {
        Formula::True => true,
        Formula::Box(p) | Formula::Act(_, p) | Formula::Forall(_, p) => trivially_true(p),
        _ => false,
    }
}

fn collect_time_exprs(phi: &Formula, out: &mut Vec<TimeExpr>) {
    match phi {
        Formula::True | Formula::False => {}
        Formula::Atom { args, .. } => {
            for t in args {
                if let Term::Time(te) = t {
                    out.push(te.clone());
                }
            }
        }
        Formula::Cmp(_, l, r) => {
            out.push(l.clone());
            out.push(r.clone());
        }
        Formula::Not(p) | Formula::Box(p) => collect_time_exprs(p, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            collect_time_exprs(l, out);
            collect_time_exprs(r, out);
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => collect_time_exprs(b, out),
        Formula::Act(op, p) => {
            for a in &op.actions {
                for t in &a.args {
                    if let Term::Time(te) = t {
                        out.push(te.clone());
                    }
                }
            }
            collect_time_exprs(p, out);
        }
    }
}

fn collect_action_terms(phi: &Formula, out: &mut Vec<ActionTerm>) {
    match phi {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Cmp(..) => {}
        Formula::Not(p) | Formula::Box(p) => collect_action_terms(p, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            collect_action_terms(l, out);
            collect_action_terms(r, out);
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => collect_action_terms(b, out),
        Formula::Act(op, p) => {
            for a in &op.actions {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            collect_action_terms(p, out);
        }
    }
}

/// `t` exactly (a single time variable with coefficient 1), the only
/// variable pattern an action argument may use.
fn bare_time_var(te: &TimeExpr) -> Option<&str> {
    if !te.constant.is_zero() {
        return None;
    }
    let mut it = te.atoms();
    let (atom, coeff) = it.next()?;
    if it.next().is_some() || *coeff != rat_int(1) {
        return None;
    }
    match atom {
        TimeAtom::Var(n) => Some(n),
        TimeAtom::Const(_) => None,
    }
}

fn apply_theta_action(
    pat: &ActionTerm,
    theta: &[(Var, Term)],
) -> Result<ActionTerm, ScenarioError> {
    let mut f = Formula::act_one(pat.clone(), Formula::True);
    for (v, t) in theta {
        f = f.instantiate(v, t)?;
    }
    match f {
        Formula::Act(op, _) => Ok(op.actions.into_iter().next().expect("one action")),
        _ => unreachable!("instantiate preserves shape"),
    }
}

fn unify_action(
    pattern: &ActionTerm,
    occ: &ActionTerm,
    bindings: &TimeBindings,
) -> Result<Option<Vec<(Var, Term)>>, ScenarioError> {
    if pattern.symbol != occ.symbol || pattern.args.len() != occ.args.len() {
        return Ok(None);
    }
    let mut theta: Vec<(Var, Term)> = Vec::new();
    for (pat, val) in pattern.args.iter().zip(&occ.args) {
        match pat {
            Term::Var(name) => {
                if !push_binding(&mut theta, Var::object(name.clone()), val.clone(), bindings) {
                    return Ok(None);
                }
            }
            Term::Const(c) => {
                if !matches!(val, Term::Const(v) if v == c) {
                    return Ok(None);
                }
            }
            Term::Time(te) => {
                if let Some(v) = bare_time_var(te) {
                    if !push_binding(&mut theta, Var::time(v.to_string()), val.clone(), bindings)
                    {
                        return Ok(None);
                    }
                } else if te.free_vars().is_empty() {
                    let Term::Time(vt) = val else { return Ok(None) };
                    if te.eval(bindings)? != vt.eval(bindings)? {
                        return Ok(None);
                    }
                } else {
                    return Err(ScenarioError::Pattern(te.to_string()));
                }
            }
            Term::App(..) => return Err(ScenarioError::Pattern(pat.to_string())),
        }
    }
    Ok(Some(theta))
}

fn push_binding(
    theta: &mut Vec<(Var, Term)>,
    var: Var,
    value: Term,
    bindings: &TimeBindings,
) -> bool {
    if let Some((_, prev)) = theta.iter().find(|(v, _)| *v == var) {
        return terms_equal(prev, &value, bindings);
    }
    theta.push((var, value));
    true
}

fn terms_equal(a: &Term, b: &Term, bindings: &TimeBindings) -> bool {
    match (a, b) {
        (Term::Time(x), Term::Time(y)) => match (x.eval(bindings), y.eval(bindings)) {
            (Ok(u), Ok(v)) => u == v,
            _ => x == y,
        },
        _ => a == b,
    }
}

/// Display number a trace label refers back to, if it names a declared
/// statement or a law instance.
fn theory_number(label: &str) -> Option<usize> {
    for prefix in ["premise (", "occurrence (", "instance of (", "law (", "axiom ("] {
        if let Some(rest) = label.strip_prefix(prefix) {
            let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
            return digits.parse().ok();
        }
    }
    None
}

fn extract_refs(label: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut digits = String::new();
    let mut inside = false;
    for ch in label.chars() {
        match ch {
            '(' => {
                inside = true;
                digits.clear();
            }
            ')' => {
                if inside && !digits.is_empty() {
                    if let Ok(n) = digits.parse() {
                        out.push(n);
                    }
                }
                inside = false;
            }
            c if inside && c.is_ascii_digit() => digits.push(c),
            _ => inside = false,
        }
    }
    out
}

fn fmt_refs(ns: &BTreeSet<usize>) -> String {
    ns.iter().map(|n| format!("({})", n)).collect::<Vec<_>>().join(" and ")
}

/// "instance of (3) using (7)" reads as a step justified by both.
fn instance_justification(label: &str) -> String {
    let refs: Vec<String> = extract_refs(label).iter().map(|n| format!("({})", n)).collect();
    format!("from {}", refs.join(" and "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_theory;

    fn scenario(text: &str) -> Scenario {
        Scenario::from_theory(&parse_theory(text).unwrap()).unwrap()
    }

    const MINI: &str = "\
const c : object
pred Q(time)
action a(time)
fluent Q
law ~Q(t) -> [a(t)] Q(t+1)
fact ~Q(0)
occurs a(0)
case main {
  query [a(0)] Q(1)
  query ~Q(1)
}
";

    #[test]
    fn occurrence_law_defeats_persistence() {
        let s = scenario(MINI);
        let report = s.run_all_cases().unwrap();
        assert_eq!(report.cases.len(), 1);
        let case = &report.cases[0];
        assert!(case.ran);
        assert!(case.assumptions.is_empty(), "~Q(1) must be defeated: {:?}", case.assumptions);
        assert!(case.derivations[0].derived, "the action result must be derivable");
        assert!(!case.derivations[1].derived, "~Q(1) must not persist");
        assert!(case.derivations[1].countermodel.is_some());
    }

    #[test]
    fn derived_trace_cites_theory_numbers() {
        let s = scenario(MINI);
        let run = s.prepare_named("main", &[]).unwrap();
        let d = run.run(&run.queries[0].clone()).unwrap();
        assert!(d.derived);
        let text = d.trace.join("\n");
        assert!(text.contains("[instance of (1)]"), "law instance keeps its number:\n{}", text);
        assert!(text.contains("[premise (2)]"), "fact keeps its number:\n{}", text);
        assert!(text.contains("MP, from (1) and (2)"), "unit step cites the theory:\n{}", text);
    }

    #[test]
    fn successor_reasoning_uses_the_action_k_rule() {
        let s = scenario(MINI);
        let run = s.prepare_named("main", &[]).unwrap();
        let mut sig = run.sig.clone();
        let q = crate::syntax::parse_formula(
            "<a(0)> Q(1)",
            &mut sig,
            crate::syntax::ParseOptions::strict(),
        )
        .unwrap();
        let d = run.run(&q).unwrap();
        assert!(d.derived, "the occurrence supplies the successor");
        let text = d.trace.join("\n");
        assert!(text.contains("K for the action modality"), "{}", text);
    }

    #[test]
    fn no_occurrences_literal_persists() {
        let s = scenario(
            "const c : object\npred Q(time)\nfluent Q\nfact Q(0)\ncase only {\n  query Q(3)\n}\n",
        );
        let report = s.run_all_cases().unwrap();
        let case = &report.cases[0];
        assert!(case.derivations[0].derived);
        assert_eq!(case.assumptions.len(), 1);
        assert!(case.assumptions[0].contains("persistency from (1)"), "{:?}", case.assumptions);
    }

    #[test]
    fn closure_is_deterministic() {
        let s = scenario(MINI);
        let a = s.prepare_named("main", &[]).unwrap();
        let b = s.prepare_named("main", &[]).unwrap();
        assert_eq!(a.assumptions_display, b.assumptions_display);
        assert_eq!(
            a.run_declared().unwrap().iter().map(|d| d.trace.clone()).collect::<Vec<_>>(),
            b.run_declared().unwrap().iter().map(|d| d.trace.clone()).collect::<Vec<_>>(),
        );
    }

    #[test]
    fn offset_below_instant_gap_is_required() {
        let s = scenario(
            "const c : object\nconst e : time\nconst d1 : time\npred Q(time)\naction a(time)\n\
             fluent Q\nfact ~Q(0)\noccurs a(e)\nbind e = 1/2000\n",
        );
        match s.prepare(None, &[]) {
            Err(ScenarioError::OffsetGap { .. }) => {}
            Err(e) => panic!("expected an offset gap error, got {}", e),
            Ok(_) => panic!("expected an offset gap error"),
        }
    }

    #[test]
    fn violated_case_is_skipped_with_diagnosis() {
        let s = scenario(
            "const c : object\nconst s : time\npred Q(time)\nfluent Q\nfact Q(0)\n\
             case bad {\n  bind s = 1\n  constraint s < 0\n  query Q(1)\n}\n",
        );
        let report = s.run_all_cases().unwrap();
        assert!(!report.cases[0].ran);
        let msg = report.cases[0].diagnosis.clone().unwrap();
        assert!(msg.contains("constraint violated"), "{}", msg);
    }
}
