//! Labelled tableau prover for the grounded finite-domain fragment.
//!
//! Prefixes form a tree; an edge is either an R-edge (from `dia`) or an
//! a-edge for a ground action term (from `<a>`), and every a-edge
//! counts as an R-edge (the inclusion condition behind `box p -> [a] p`).
//! The rule engine works on negation normal form and keeps, per prefix,
//! the map from asserted formulas to their trace lines:
//!
//! * closure: a prefix carrying `false` or a formula together with its
//!   complement closes the branch;
//! * alpha: conjunctions split in place;
//! * T: `box p` asserts `p` at its own prefix (reflexivity);
//! * nu: `box p` crosses every edge, re-asserting itself (transitivity)
//!   and its body; `[a] p` asserts `p` across matching a-edges. Applied
//!   eagerly, both when the formula arrives and when an edge appears;
//! * beta: disjunctions are first consumed as unit propagations
//!   (one disjunct already refuted on the prefix), and only the
//!   leftovers fork the branch after pi expansion, a deliberate
//!   reordering that keeps derivation traces linear modus-ponens
//!   chains on Horn-shaped theories;
//! * pi: `<a> p` / `dia p` create a fresh prefix unless an existing
//!   prefix already starts from exactly the same formula set
//!   (anywhere-blocking on creation sets, the S4 termination device).
//!
//! Termination: with c subformulas there are at most 2^c distinct
//! creation sets, so at most 2^c prefixes per branch, at most c
//! assertions on each, and at most one fork per disjunction occurrence,
//! which bounds the whole search by roughly c * 4^c rule applications.
//! The bound is astronomically loose; blocking keeps real searches tiny.
//!
//! Time comparisons never reach the rules: they are decided during
//! normalization, numerically under the bindings when possible,
//! otherwise against the declared ordering constraints (the prover
//! consumes constraints, it never branches over them).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::semantics::{eval, validate_model, DalModel, Value, World};
use crate::syntax::{ground, ActionTerm, Formula, Signature, SyntaxError, Term};
use crate::temporal::{CmpOp, TimeBindings, TimeConstraint, TimeExpr};

#[derive(Debug, Error)]
pub enum ProveError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("open time constraint `{0}`: no binding decides it and no declared constraint matches")]
    OpenTimeConstraint(String),
    #[error("argument `{0}` is symbolic; bind its time constants")]
    SymbolicAtom(String),
    #[error("input is not grounded: `{0}` occurs free")]
    NonGround(String),
    #[error("prefix budget of {0} exhausted; raise max_prefixes")]
    Budget(usize),
    #[error("internal: extracted countermodel failed verification: {0}")]
    Extraction(String),
}

/// Knobs for one proof search.
#[derive(Clone, Debug)]
pub struct ProverConfig {
    /// Values for symbolic time constants; applied before grounding.
    pub bindings: TimeBindings,
    /// Ordering assumptions deciding residual symbolic comparisons.
    pub constraints: Vec<TimeConstraint>,
    /// Instantiation domain for time-sorted quantifiers.
    pub time_domain: Vec<TimeExpr>,
    pub max_prefixes: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            bindings: TimeBindings::new(),
            constraints: Vec::new(),
            time_domain: Vec::new(),
            max_prefixes: 10_000,
        }
    }
}

/// Decides a time comparison: numerically when the bindings make both
/// sides numeric, otherwise by matching the declared constraints (a
/// constraint entails the comparison or its complement).
pub fn decide_cmp(
    op: CmpOp,
    lhs: &TimeExpr,
    rhs: &TimeExpr,
    cfg: &ProverConfig,
) -> Result<bool, ProveError> {
    let l = lhs.reduce(&cfg.bindings);
    let r = rhs.reduce(&cfg.bindings);
    let query = TimeConstraint::new(&l, op, &r);
    if l.is_numeric() && r.is_numeric() {
        return Ok(query.eval(&TimeBindings::new()).expect("numeric comparison"));
    }
    for known in &cfg.constraints {
        let known = TimeConstraint::new(
            &known.delta.reduce(&cfg.bindings),
            known.op,
            &TimeExpr::zero(),
        );
        if let Some(v) = constraint_entails(&known, &query) {
            return Ok(v);
        }
    }
    Err(ProveError::OpenTimeConstraint(format!("{} {} {}", l, op, r)))
}

/// What `known` decides about `query`, when both are normalized
/// `delta op 0` forms over the same (or opposite) difference.
pub(crate) fn constraint_entails(known: &TimeConstraint, query: &TimeConstraint) -> Option<bool> {
    use CmpOp::*;
    if known.delta == query.delta {
        return match (known.op, query.op) {
            (Lt, Lt) | (Lt, Le) | (Le, Le) | (Eq, Le) | (Eq, Eq) => Some(true),
            (Lt, Eq) | (Eq, Lt) => Some(false),
            (Le, Lt) | (Le, Eq) => None,
        };
    }
    if known.delta.scale(crate::temporal::rat_int(-1)) == query.delta {
        // known: d op 0; query speaks about -d.
        return match (known.op, query.op) {
            (Lt, _) => Some(false),
            (Le, Lt) => Some(false),
            (Le, Le) | (Le, Eq) => None,
            (Eq, Lt) => Some(false),
            (Eq, Le) | (Eq, Eq) => Some(true),
        };
    }
    None
}

/// Replaces every time comparison by its decided truth value. The
/// result is comparison-free and suitable for `semantics::eval`.
pub fn resolve_cmps(phi: &Formula, cfg: &ProverConfig) -> Result<Formula, ProveError> {
    Ok(match phi {
        Formula::Cmp(op, lhs, rhs) => {
            if decide_cmp(*op, lhs, rhs, cfg)? {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::True | Formula::False | Formula::Atom { .. } => phi.clone(),
        Formula::Not(p) => Formula::not(resolve_cmps(p, cfg)?),
        Formula::And(l, r) => Formula::and(resolve_cmps(l, cfg)?, resolve_cmps(r, cfg)?),
        Formula::Or(l, r) => Formula::or(resolve_cmps(l, cfg)?, resolve_cmps(r, cfg)?),
        Formula::Implies(l, r) => Formula::implies(resolve_cmps(l, cfg)?, resolve_cmps(r, cfg)?),
        Formula::Forall(v, body) => Formula::forall(v.clone(), resolve_cmps(body, cfg)?),
        Formula::Exists(v, body) => Formula::exists(v.clone(), resolve_cmps(body, cfg)?),
        Formula::Box(p) => Formula::boxed(resolve_cmps(p, cfg)?),
        Formula::Act(op, p) => Formula::act(op.clone(), resolve_cmps(p, cfg)?),
    })
}

/// Negation normal form. Negation sits on atoms only, implications are
/// gone, quantifiers have been expanded away, every modality is unary,
/// and comparisons have been decided.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NForm {
    True,
    False,
    Lit { pos: bool, pred: String, args: Vec<Term> },
    And(Box<NForm>, Box<NForm>),
    Or(Box<NForm>, Box<NForm>),
    /// `box p`
    Nec(Box<NForm>),
    /// `dia p`
    Pos(Box<NForm>),
    /// `[a] p`
    All(ActionTerm, Box<NForm>),
    /// `<a> p`
    Ex(ActionTerm, Box<NForm>),
}

impl NForm {
    /// The semantic complement, still in normal form.
    pub fn neg(&self) -> NForm {
        match self {
            NForm::True => NForm::False,
            NForm::False => NForm::True,
            NForm::Lit { pos, pred, args } => {
                NForm::Lit { pos: !pos, pred: pred.clone(), args: args.clone() }
            }
            NForm::And(l, r) => NForm::Or(Box::new(l.neg()), Box::new(r.neg())),
            NForm::Or(l, r) => NForm::And(Box::new(l.neg()), Box::new(r.neg())),
            NForm::Nec(p) => NForm::Pos(Box::new(p.neg())),
            NForm::Pos(p) => NForm::Nec(Box::new(p.neg())),
            NForm::All(a, p) => NForm::Ex(a.clone(), Box::new(p.neg())),
            NForm::Ex(a, p) => NForm::All(a.clone(), Box::new(p.neg())),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            NForm::Or(..) => 2,
            NForm::And(..) => 3,
            NForm::Nec(..) | NForm::Pos(..) | NForm::All(..) | NForm::Ex(..) => 4,
            NForm::Lit { pos: false, .. } => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            NForm::True => f.write_str("true"),
            NForm::False => f.write_str("false"),
            NForm::Lit { pos, pred, args } => {
                if !pos {
                    f.write_str("~")?;
                }
                f.write_str(pred)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            NForm::And(l, r) => {
                l.fmt_prec(f, 3)?;
                f.write_str(" /\\ ")?;
                r.fmt_prec(f, 4)
            }
            NForm::Or(l, r) => {
                l.fmt_prec(f, 2)?;
                f.write_str(" \\/ ")?;
                r.fmt_prec(f, 3)
            }
            NForm::Nec(p) => {
                f.write_str("box ")?;
                p.fmt_prec(f, 4)
            }
            NForm::Pos(p) => {
                f.write_str("dia ")?;
                p.fmt_prec(f, 4)
            }
            NForm::All(a, p) => {
                write!(f, "[{}] ", a)?;
                p.fmt_prec(f, 4)
            }
            NForm::Ex(a, p) => {
                write!(f, "<{}> ", a)?;
                p.fmt_prec(f, 4)
            }
        }
    }
}

impl fmt::Display for NForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn normalize_term(term: &Term, cfg: &ProverConfig) -> Result<Term, ProveError> {
    match term {
        Term::Var(name) => Err(ProveError::NonGround(name.clone())),
        Term::Const(_) => Ok(term.clone()),
        Term::App(f, _) => Err(ProveError::SymbolicAtom(format!("{}(...)", f))),
        Term::Time(te) => {
            let reduced = te.reduce(&cfg.bindings);
            if !reduced.is_numeric() {
                if let Some(v) = reduced.free_vars().into_iter().next() {
                    return Err(ProveError::NonGround(v));
                }
                return Err(ProveError::SymbolicAtom(reduced.to_string()));
            }
            Ok(Term::Time(reduced))
        }
    }
}

fn normalize_action(a: &ActionTerm, cfg: &ProverConfig) -> Result<ActionTerm, ProveError> {
    let mut args = Vec::with_capacity(a.args.len());
    for t in &a.args {
        args.push(normalize_term(t, cfg)?);
    }
    Ok(ActionTerm { symbol: a.symbol.clone(), args })
}

/// Converts a grounded, flattened formula to normal form, deciding
/// comparisons on the way.
pub fn nnf(phi: &Formula, pos: bool, cfg: &ProverConfig) -> Result<NForm, ProveError> {
    Ok(match phi {
        Formula::True => {
            if pos {
                NForm::True
            } else {
                NForm::False
            }
        }
        Formula::False => {
            if pos {
                NForm::False
            } else {
                NForm::True
            }
        }
        Formula::Atom { pred, args } => {
            let mut norm = Vec::with_capacity(args.len());
            for a in args {
                norm.push(normalize_term(a, cfg)?);
            }
            NForm::Lit { pos, pred: pred.clone(), args: norm }
        }
        Formula::Cmp(op, lhs, rhs) => {
            if decide_cmp(*op, lhs, rhs, cfg)? == pos {
                NForm::True
            } else {
                NForm::False
            }
        }
        Formula::Not(p) => nnf(p, !pos, cfg)?,
        Formula::And(l, r) => {
            let (a, b) = (nnf(l, pos, cfg)?, nnf(r, pos, cfg)?);
            if pos {
                NForm::And(Box::new(a), Box::new(b))
            } else {
                NForm::Or(Box::new(a), Box::new(b))
            }
        }
        Formula::Or(l, r) => {
            let (a, b) = (nnf(l, pos, cfg)?, nnf(r, pos, cfg)?);
            if pos {
                NForm::Or(Box::new(a), Box::new(b))
            } else {
                NForm::And(Box::new(a), Box::new(b))
            }
        }
        Formula::Implies(l, r) => {
            let (a, b) = (nnf(l, !pos, cfg)?, nnf(r, pos, cfg)?);
            if pos {
                NForm::Or(Box::new(a), Box::new(b))
            } else {
                NForm::And(Box::new(a), Box::new(b))
            }
        }
        Formula::Forall(v, _) | Formula::Exists(v, _) => {
            return Err(ProveError::NonGround(format!(
                "quantifier over `{}` was not expanded",
                v.name
            )));
        }
        Formula::Box(p) => {
            let body = nnf(p, pos, cfg)?;
            if pos {
                NForm::Nec(Box::new(body))
            } else {
                NForm::Pos(Box::new(body))
            }
        }
        Formula::Act(op, p) => {
            let mut out = nnf(p, pos, cfg)?;
            for a in op.actions.iter().rev() {
                let a = normalize_action(a, cfg)?;
                out = if pos {
                    NForm::All(a, Box::new(out))
                } else {
                    NForm::Ex(a, Box::new(out))
                };
            }
            out
        }
    })
}

/// One line of a proof trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub id: usize,
    pub prefix: usize,
    pub formula: String,
    pub rule: String,
    pub premises: Vec<usize>,
}

/// Renders a trace with stable numbering: `(n) s<prefix>: formula
/// [rule, from (i), (j)]`.
pub fn render_trace(lines: &[TraceLine]) -> String {
    let number: BTreeMap<usize, usize> =
        lines.iter().enumerate().map(|(i, l)| (l.id, i + 1)).collect();
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let mut rule = l.rule.clone();
        let refs: Vec<String> = l
            .premises
            .iter()
            .filter_map(|p| number.get(p).map(|n| format!("({})", n)))
            .collect();
        if !refs.is_empty() {
            rule = format!("{}, from {}", rule, refs.join(" and "));
        }
        out.push_str(&format!("({}) s{}: {}  [{}]\n", i + 1, l.prefix, l.formula, rule));
    }
    out
}

/// Keeps only the lines a closed tableau actually needs: the closure
/// lines and, transitively, every premise they cite. Refutation traces
/// record all eager rule firings; the pruned form reads like a
/// hand-written derivation.
pub fn prune_to_closure(lines: &[TraceLine]) -> Vec<TraceLine> {
    let by_id: BTreeMap<usize, &TraceLine> = lines.iter().map(|l| (l.id, l)).collect();
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> =
        lines.iter().filter(|l| l.rule == "closure").map(|l| l.id).collect();
    while let Some(id) = stack.pop() {
        if !keep.insert(id) {
            continue;
        }
        if let Some(line) = by_id.get(&id) {
            stack.extend(line.premises.iter().copied());
        }
    }
    lines.iter().filter(|l| keep.contains(&l.id)).cloned().collect()
}

/// A statement handed to the prover: its formula, the label its trace
/// line carries (e.g. `premise (4)`), and whether it is asserted
/// globally at every prefix (laws under necessitation) or only at the
/// root (plain facts).
#[derive(Clone, Debug)]
pub struct Premise {
    pub formula: Formula,
    pub label: String,
    pub global: bool,
}

impl Premise {
    pub fn global(formula: Formula, label: impl Into<String>) -> Self {
        Premise { formula, label: label.into(), global: true }
    }

    pub fn local(formula: Formula, label: impl Into<String>) -> Self {
        Premise { formula, label: label.into(), global: false }
    }
}

#[derive(Clone, Debug, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Valid,
    Invalid,
    Entailed,
    NotEntailed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "satisfiable",
            Verdict::Unsat => "unsatisfiable",
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Entailed => "entailed",
            Verdict::NotEntailed => "not entailed",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProofResult {
    pub verdict: Verdict,
    pub trace: Vec<TraceLine>,
    pub countermodel: Option<DalModel>,
}

impl ProofResult {
    pub fn affirmative(&self) -> bool {
        matches!(self.verdict, Verdict::Unsat | Verdict::Valid | Verdict::Entailed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Edge {
    Root,
    R,
    Act(ActionTerm),
}

impl Edge {
    fn is_r(&self) -> bool {
        !matches!(self, Edge::Root)
    }
}

#[derive(Clone)]
struct Prefix {
    parent: Option<usize>,
    edge: Edge,
    formulas: BTreeMap<NForm, usize>,
    children: Vec<(Edge, usize)>,
    /// The formula set this prefix was created with; the blocking key.
    init: BTreeSet<NForm>,
}

impl Prefix {
    fn new(parent: Option<usize>, edge: Edge) -> Self {
        Prefix { parent, edge, formulas: BTreeMap::new(), children: Vec::new(), init: BTreeSet::new() }
    }
}

#[derive(Clone)]
struct Beta {
    prefix: usize,
    line: usize,
    l: NForm,
    r: NForm,
    done: bool,
}

#[derive(Clone)]
struct Pi {
    prefix: usize,
    line: usize,
    kind: Edge,
    body: NForm,
    realized: bool,
}

#[derive(Clone)]
struct Branch {
    prefixes: Vec<Prefix>,
    agenda: VecDeque<(usize, NForm)>,
    betas: Vec<Beta>,
    pis: Vec<Pi>,
    trace: Vec<TraceLine>,
    closed: bool,
}

impl Branch {
    fn new() -> Self {
        Branch {
            prefixes: vec![Prefix::new(None, Edge::Root)],
            agenda: VecDeque::new(),
            betas: Vec::new(),
            pis: Vec::new(),
            trace: Vec::new(),
            closed: false,
        }
    }
}

enum Solved {
    Closed(Vec<TraceLine>),
    Open(Branch),
}

struct Prover<'a> {
    cfg: &'a ProverConfig,
    /// Globally asserted formulas with their root trace lines.
    globals: Vec<(NForm, usize)>,
    next_line: usize,
}

impl<'a> Prover<'a> {
    fn fresh_line(&mut self) -> usize {
        let id = self.next_line;
        self.next_line += 1;
        id
    }

    /// Adds `nf` at a prefix, recording the trace line; detects closure
    /// against the complement. Returns the line id (existing one if the
    /// formula was already present).
    fn assert_at(
        &mut self,
        br: &mut Branch,
        prefix: usize,
        nf: NForm,
        rule: &str,
        premises: &[usize],
    ) -> Option<usize> {
        if br.closed || nf == NForm::True {
            return None;
        }
        if let Some(&existing) = br.prefixes[prefix].formulas.get(&nf) {
            return Some(existing);
        }
        let id = self.fresh_line();
        br.trace.push(TraceLine {
            id,
            prefix,
            formula: nf.to_string(),
            rule: rule.to_string(),
            premises: premises.to_vec(),
        });
        br.prefixes[prefix].formulas.insert(nf.clone(), id);
        if nf == NForm::False {
            let cid = self.fresh_line();
            br.trace.push(TraceLine {
                id: cid,
                prefix,
                formula: "closed".into(),
                rule: "closure".into(),
                premises: vec![id],
            });
            br.closed = true;
            return Some(id);
        }
        if let Some(&other) = br.prefixes[prefix].formulas.get(&nf.neg()) {
            let cid = self.fresh_line();
            br.trace.push(TraceLine {
                id: cid,
                prefix,
                formula: "closed".into(),
                rule: "closure".into(),
                premises: vec![id, other],
            });
            br.closed = true;
            return Some(id);
        }
        br.agenda.push_back((prefix, nf));
        Some(id)
    }

    /// What crossing `edge` out of the formulas at `prefix` asserts on
    /// the far side. Shared by real propagation and the blocking check.
    fn edge_induced(br: &Branch, prefix: usize, edge: &Edge) -> Vec<(NForm, &'static str, usize)> {
        let mut out = Vec::new();
        for (nf, &line) in &br.prefixes[prefix].formulas {
            match nf {
                NForm::Nec(p) => match edge {
                    Edge::Act(_) => {
                        out.push(((**p).clone(), "K for the action modality and (A2)", line));
                        out.push((nf.clone(), "(A2) and (4)", line));
                    }
                    _ => {
                        out.push(((**p).clone(), "K for box", line));
                        out.push((nf.clone(), "(4)", line));
                    }
                },
                NForm::All(a, p) => {
                    if let Edge::Act(b) = edge {
                        if a == b {
                            out.push(((**p).clone(), "K for the action modality", line));
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// The initial formula set a pi-expansion would create. Blocking
    /// compares these sets for equality.
    fn child_init(&self, br: &Branch, pi: &Pi) -> BTreeSet<NForm> {
        let mut init = BTreeSet::new();
        if pi.body != NForm::True {
            init.insert(pi.body.clone());
        }
        for (g, _) in &self.globals {
            init.insert(g.clone());
        }
        for (nf, _, _) in Self::edge_induced(br, pi.prefix, &pi.kind) {
            if nf != NForm::True {
                init.insert(nf);
            }
        }
        init
    }

    fn propagate_edge(&mut self, br: &mut Branch, prefix: usize, edge: &Edge, target: usize) {
        for (nf, rule, line) in Self::edge_induced(br, prefix, edge) {
            self.assert_at(br, target, nf, rule, &[line]);
            if br.closed {
                return;
            }
        }
    }

    /// Applies alpha, T, and nu eagerly until the agenda drains or the
    /// branch closes. Disjunctions and diamonds are queued.
    fn drain(&mut self, br: &mut Branch) {
        while !br.closed {
            let Some((prefix, nf)) = br.agenda.pop_front() else { break };
            let line = match br.prefixes[prefix].formulas.get(&nf) {
                Some(&l) => l,
                None => continue,
            };
            match nf {
                NForm::And(l, r) => {
                    self.assert_at(br, prefix, *l, "alpha", &[line]);
                    if !br.closed {
                        self.assert_at(br, prefix, *r, "alpha", &[line]);
                    }
                }
                NForm::Or(l, r) => {
                    br.betas.push(Beta { prefix, line, l: *l, r: *r, done: false });
                }
                NForm::Nec(ref p) => {
                    self.assert_at(br, prefix, (**p).clone(), "T", &[line]);
                    let children = br.prefixes[prefix].children.clone();
                    for (edge, child) in children {
                        if br.closed {
                            return;
                        }
                        if edge.is_r() {
                            // Propagate just this formula, not the whole
                            // edge set (the rest went over when the edge
                            // appeared).
                            let induced = match edge {
                                Edge::Act(_) => vec![
                                    ((**p).clone(), "K for the action modality and (A2)"),
                                    (nf.clone(), "(A2) and (4)"),
                                ],
                                _ => vec![((**p).clone(), "K for box"), (nf.clone(), "(4)")],
                            };
                            for (g, rule) in induced {
                                self.assert_at(br, child, g, rule, &[line]);
                                if br.closed {
                                    return;
                                }
                            }
                        }
                    }
                }
                NForm::All(ref a, ref p) => {
                    let children = br.prefixes[prefix].children.clone();
                    for (edge, child) in children {
                        if br.closed {
                            return;
                        }
                        if matches!(&edge, Edge::Act(b) if b == a) {
                            self.assert_at(
                                br,
                                child,
                                (**p).clone(),
                                "K for the action modality",
                                &[line],
                            );
                        }
                    }
                }
                NForm::Pos(p) => {
                    br.pis.push(Pi { prefix, line, kind: Edge::R, body: *p, realized: false });
                }
                NForm::Ex(a, p) => {
                    br.pis.push(Pi {
                        prefix,
                        line,
                        kind: Edge::Act(a),
                        body: *p,
                        realized: false,
                    });
                }
                _ => {}
            }
        }
    }

    /// Unit propagation over pending disjunctions: a disjunction whose
    /// one side is refuted on its prefix yields the other side
    /// directly. Returns true when anything happened.
    fn beta_units(&mut self, br: &mut Branch) -> bool {
        let mut progress = false;
        for i in 0..br.betas.len() {
            if br.closed {
                return true;
            }
            if br.betas[i].done {
                continue;
            }
            let b = br.betas[i].clone();
            let fs = &br.prefixes[b.prefix].formulas;
            if fs.contains_key(&b.l) || fs.contains_key(&b.r) {
                br.betas[i].done = true;
                continue;
            }
            if let Some(&nl) = fs.get(&b.l.neg()) {
                br.betas[i].done = true;
                self.assert_at(br, b.prefix, b.r, "MP", &[b.line, nl]);
                progress = true;
            } else if let Some(&nr) = fs.get(&b.r.neg()) {
                br.betas[i].done = true;
                self.assert_at(br, b.prefix, b.l, "MP", &[b.line, nr]);
                progress = true;
            }
        }
        progress
    }

    /// Expands the first unblocked pending diamond, if any.
    fn try_pi(&mut self, br: &mut Branch) -> Result<bool, ProveError> {
        for i in 0..br.pis.len() {
            if br.pis[i].realized {
                continue;
            }
            let pi = br.pis[i].clone();
            let init = self.child_init(br, &pi);
            if br.prefixes.iter().any(|px| px.init == init) {
                continue;
            }
            if br.prefixes.len() >= self.cfg.max_prefixes {
                return Err(ProveError::Budget(self.cfg.max_prefixes));
            }
            let child = br.prefixes.len();
            let mut prefix = Prefix::new(Some(pi.prefix), pi.kind.clone());
            prefix.init = init;
            br.prefixes.push(prefix);
            br.prefixes[pi.prefix].children.push((pi.kind.clone(), child));
            br.pis[i].realized = true;
            let rule = match &pi.kind {
                Edge::Act(a) => format!("pi (<{}>)", a),
                _ => "pi (dia)".to_string(),
            };
            self.assert_at(br, child, pi.body, &rule, &[pi.line]);
            let globals = self.globals.clone();
            for (g, gline) in globals {
                if br.closed {
                    break;
                }
                self.assert_at(br, child, g, "R1 (necessitation)", &[gline]);
            }
            if !br.closed {
                self.propagate_edge(br, pi.prefix, &pi.kind, child);
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn solve(&mut self, mut br: Branch) -> Result<Solved, ProveError> {
        let mut side_traces: Vec<Vec<TraceLine>> = Vec::new();
        loop {
            self.drain(&mut br);
            if br.closed {
                return Ok(Solved::Closed(merge_traces(side_traces, br.trace)));
            }
            if self.beta_units(&mut br) {
                continue;
            }
            if self.try_pi(&mut br)? {
                continue;
            }
            let Some(i) = br.betas.iter().position(|b| !b.done) else {
                return Ok(Solved::Open(br));
            };
            br.betas[i].done = true;
            let b = br.betas[i].clone();
            let mut left = br.clone();
            self.assert_at(&mut left, b.prefix, b.l.clone(), "beta (left)", &[b.line]);
            match self.solve(left)? {
                Solved::Open(open) => return Ok(Solved::Open(open)),
                Solved::Closed(lines) => side_traces.push(lines),
            }
            self.assert_at(&mut br, b.prefix, b.r, "beta (right)", &[b.line]);
        }
    }
}

/// Merges the traces of closed sibling subtrees with this branch's own
/// lines; ids are globally unique and monotone, so a sorted
/// deduplication reconstructs creation order.
fn merge_traces(sides: Vec<Vec<TraceLine>>, own: Vec<TraceLine>) -> Vec<TraceLine> {
    let mut by_id: BTreeMap<usize, TraceLine> = BTreeMap::new();
    for lines in sides.into_iter().chain(std::iter::once(own)) {
        for line in lines {
            by_id.entry(line.id).or_insert(line);
        }
    }
    by_id.into_values().collect()
}

fn term_value(term: &Term) -> Result<Value, ProveError> {
    match term {
        Term::Const(c) => Ok(Value::Obj(c.clone())),
        Term::Time(te) if te.is_numeric() => Ok(Value::Time(te.constant)),
        other => Err(ProveError::Extraction(format!("non-ground term `{}`", other))),
    }
}

fn add_edge(m: &mut DalModel, from: usize, edge: &Edge, to: usize) -> Result<(), ProveError> {
    m.rel.insert((World(from), World(to)));
    if let Edge::Act(a) = edge {
        let mut args = Vec::with_capacity(a.args.len());
        for t in &a.args {
            args.push(term_value(t)?);
        }
        m.acts
            .entry(a.symbol.clone())
            .or_default()
            .entry((World(from), args))
            .or_default()
            .insert(World(to));
    }
    Ok(())
}

/// Builds a model from an open saturated branch: prefixes become
/// worlds, tree edges become R- and action transitions, blocked
/// diamonds loop back to their blockers, R is closed reflexively and
/// transitively, and positive literals populate the extensions.
fn extract(
    prover: &Prover<'_>,
    br: &Branch,
    prepared: &[(Formula, Premise)],
    sig: &Signature,
    cfg: &ProverConfig,
) -> Result<DalModel, ProveError> {
    let mut m = DalModel {
        world_count: br.prefixes.len(),
        domain: sig.object_consts.clone(),
        sig: sig.clone(),
        ..DalModel::default()
    };
    for (i, px) in br.prefixes.iter().enumerate() {
        if let Some(parent) = px.parent {
            add_edge(&mut m, parent, &px.edge, i)?;
        }
    }
    for pi in &br.pis {
        if pi.realized {
            continue;
        }
        let init = prover.child_init(br, pi);
        let blocker = br
            .prefixes
            .iter()
            .position(|px| px.init == init)
            .ok_or_else(|| ProveError::Extraction("pending diamond without blocker".into()))?;
        add_edge(&mut m, pi.prefix, &pi.kind, blocker)?;
    }
    m.close_r();
    for (i, px) in br.prefixes.iter().enumerate() {
        for nf in px.formulas.keys() {
            if let NForm::Lit { pos: true, pred, args } = nf {
                let mut values = Vec::with_capacity(args.len());
                for t in args {
                    values.push(term_value(t)?);
                }
                m.preds.entry(pred.clone()).or_default().insert((World(i), values));
            }
        }
    }
    let violations = validate_model(&m);
    if !violations.is_empty() {
        return Err(ProveError::Extraction(format!("{}", violations[0])));
    }
    for (grounded, premise) in prepared {
        let resolved = resolve_cmps(grounded, cfg)?.flatten_modalities();
        let worlds: Vec<World> = if premise.global {
            m.worlds().collect()
        } else {
            vec![World(0)]
        };
        for w in worlds {
            match eval(&m, w, &resolved) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(ProveError::Extraction(format!(
                        "`{}` fails at {} in the extracted model",
                        grounded, w
                    )));
                }
                Err(e) => return Err(ProveError::Extraction(e.to_string())),
            }
        }
    }
    Ok(m)
}

/// Satisfiability of a premise set. Global premises hold at every
/// prefix (necessitation); local ones at the root only. UNSAT comes
/// with a closed-tableau trace; SAT with a countermodel that has been
/// validated and eval-checked against every premise.
pub fn check_sat(
    premises: &[Premise],
    sig: &Signature,
    cfg: &ProverConfig,
) -> Result<ProofResult, ProveError> {
    let mut prover = Prover { cfg, globals: Vec::new(), next_line: 0 };
    let mut br = Branch::new();
    let mut prepared = Vec::new();
    for p in premises {
        let reduced = p.formula.reduce_times(&cfg.bindings);
        let grounded = ground(&reduced, sig, &cfg.time_domain)?;
        let flat = grounded.flatten_modalities();
        let nf = nnf(&flat, true, cfg)?;
        let line = prover.assert_at(&mut br, 0, nf.clone(), &p.label, &[]);
        if p.global && nf != NForm::True {
            if let Some(line) = line {
                prover.globals.push((nf, line));
            }
        }
        prepared.push((grounded, p.clone()));
    }
    br.prefixes[0].init = br.prefixes[0].formulas.keys().cloned().collect();
    match prover.solve(br)? {
        Solved::Closed(trace) => {
            Ok(ProofResult { verdict: Verdict::Unsat, trace, countermodel: None })
        }
        Solved::Open(br) => {
            let model = extract(&prover, &br, &prepared, sig, cfg)?;
            Ok(ProofResult {
                verdict: Verdict::Sat,
                trace: br.trace,
                countermodel: Some(model),
            })
        }
    }
}

/// Validity in the fragment: `phi` is valid iff its negation is
/// unsatisfiable. Invalid formulas come with a falsifying model.
pub fn prove_valid(
    phi: &Formula,
    sig: &Signature,
    cfg: &ProverConfig,
) -> Result<ProofResult, ProveError> {
    let premise = Premise::local(Formula::not(phi.clone()), "negated goal");
    let mut res = check_sat(&[premise], sig, cfg)?;
    res.verdict = match res.verdict {
        Verdict::Unsat => Verdict::Valid,
        Verdict::Sat => Verdict::Invalid,
        v => v,
    };
    Ok(res)
}

/// Theory entailment: laws/axioms are global (they hold at every
/// prefix, realizing necessitation), facts are local. The trace names
/// the premises used, so callers can render textbook-style derivations.
pub fn entails(
    theory: &[Premise],
    goal: &Formula,
    sig: &Signature,
    cfg: &ProverConfig,
) -> Result<ProofResult, ProveError> {
    let mut premises = theory.to_vec();
    premises.push(Premise::local(Formula::not(goal.clone()), "negated query"));
    let mut res = check_sat(&premises, sig, cfg)?;
    res.verdict = match res.verdict {
        Verdict::Unsat => Verdict::Entailed,
        Verdict::Sat => Verdict::NotEntailed,
        v => v,
    };
    Ok(res)
}
