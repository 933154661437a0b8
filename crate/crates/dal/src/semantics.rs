//! Finite Kripke structures and the evaluation function, plus the
//! bounded model enumerator and a complete bounded model search that
//! the test suite uses as the prover's oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{ActionTerm, Formula, Signature, Sort, Term, Var};
use crate::temporal::{format_rat, Rat, TimeBindings};

/// World id. Worlds are dense indices `0..world_count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub usize);

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// A ground value: a domain object (named by its constant, unique-name
/// semantics) or a rational instant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Obj(String),
    Time(Rat),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Obj(name) => f.write_str(name),
            Value::Time(q) => f.write_str(&format_rat(q)),
        }
    }
}

/// A finite Kripke structure: worlds, one shared object domain, the
/// accessibility relation, per-world predicate extensions, action
/// transition tables, optional per-world function tables and time
/// stamps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DalModel {
    pub world_count: usize,
    /// Display names from the model file; empty means `w0..wN`.
    pub world_names: Vec<String>,
    /// The object domain: the declared object constants, rigidly
    /// interpreted (each constant names itself).
    pub domain: Vec<String>,
    pub sig: Signature,
    pub rel: BTreeSet<(World, World)>,
    pub preds: BTreeMap<String, BTreeSet<(World, Vec<Value>)>>,
    pub acts: BTreeMap<String, BTreeMap<(World, Vec<Value>), BTreeSet<World>>>,
    pub funcs: BTreeMap<String, BTreeMap<(World, Vec<Value>), Value>>,
    pub stamps: BTreeMap<World, Rat>,
}

impl DalModel {
    pub fn worlds(&self) -> impl Iterator<Item = World> {
        (0..self.world_count).map(World)
    }

    pub fn world_name(&self, w: World) -> String {
        self.world_names.get(w.0).cloned().unwrap_or_else(|| w.to_string())
    }

    pub fn r_successors(&self, w: World) -> impl Iterator<Item = World> + '_ {
        self.rel
            .range((w, World(0))..=(w, World(usize::MAX)))
            .map(|(_, to)| *to)
    }

    pub fn act_targets(&self, symbol: &str, w: World, args: &[Value]) -> BTreeSet<World> {
        self.acts
            .get(symbol)
            .and_then(|table| table.get(&(w, args.to_vec())))
            .cloned()
            .unwrap_or_default()
    }

    /// Adds the reflexive-transitive closure to R (used by the CLI's
    /// `--close` flag; `validate_model` itself never repairs).
    pub fn close_r(&mut self) {
        for w in 0..self.world_count {
            self.rel.insert((World(w), World(w)));
        }
        loop {
            let mut added = false;
            let pairs: Vec<_> = self.rel.iter().copied().collect();
            for &(a, b) in &pairs {
                for &(c, d) in &pairs {
                    if b == c && self.rel.insert((a, d)) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
    }
}

/// One structural defect found by [`validate_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// An action transition leaves R: target not accessible in one step.
    Inclusion { action: String, from: World, to: World },
    Reflexivity(World),
    Transitivity(World, World, World),
    /// An extension mentions a world outside `0..world_count`.
    WorldRange { place: String, world: World },
    /// An extension mentions an object outside the domain.
    DomainClosure { place: String, object: String },
    /// Two tuples of one symbol disagree on arity, or a tuple
    /// disagrees with the declared arity.
    Arity { symbol: String, expected: usize, got: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Inclusion { action, from, to } => write!(
                f,
                "inclusion: {}-transition {} -> {} is not an R-edge",
                action, from, to
            ),
            Violation::Reflexivity(w) => write!(f, "reflexivity: ({}, {}) missing from R", w, w),
            Violation::Transitivity(a, b, c) => write!(
                f,
                "transitivity: ({}, {}) and ({}, {}) in R but ({}, {}) missing",
                a, b, b, c, a, c
            ),
            Violation::WorldRange { place, world } => {
                write!(f, "world range: {} mentions unknown world {}", place, world)
            }
            Violation::DomainClosure { place, object } => {
                write!(f, "domain closure: {} mentions unknown object `{}`", place, object)
            }
            Violation::Arity { symbol, expected, got } => {
                write!(f, "arity: `{}` declared with {} argument(s), used with {}", symbol, expected, got)
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("world {0} is not in the model")]
    UnknownWorld(World),
    #[error("symbol `{0}` is not interpreted by the model")]
    Unbound(String),
    #[error("formula is not grounded: free variable `{0}`")]
    NonGround(String),
    #[error("time expression `{0}` is not numeric; bind its constants first")]
    SymbolicTime(String),
    #[error("quantification over the time sort is outside the executable fragment")]
    TimeQuantifier,
    #[error("function `{0}` has no value at this argument tuple")]
    PartialFunction(String),
    #[error("substitution failed: {0}")]
    Subst(String),
    #[error("enumeration space holds about {estimate} models, above the cap of {cap}")]
    TooLarge { estimate: u128, cap: u128 },
    #[error("domain of size {size} exceeds the bound of {max}")]
    DomainTooLarge { size: usize, max: usize },
    #[error("enumeration requires object-sorted arguments; `{0}` has a time position")]
    TimeArgs(String),
    #[error("enumeration does not interpret function symbols (`{0}` declared)")]
    Functions(String),
}

/// Checks the structural laws: action transitions inside R, R reflexive
/// and transitive, arities consistent with the signature, worlds and
/// objects within range. Returns every violation found.
pub fn validate_model(m: &DalModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let in_range = |w: &World| w.0 < m.world_count;
    for w in m.worlds() {
        if !m.rel.contains(&(w, w)) {
            out.push(Violation::Reflexivity(w));
        }
    }
    for &(a, b) in &m.rel {
        for (c, d) in m.rel.range((b, World(0))..=(b, World(usize::MAX))) {
            debug_assert_eq!(b, *c);
            if !m.rel.contains(&(a, *d)) {
                out.push(Violation::Transitivity(a, b, *d));
            }
        }
        if !in_range(&a) {
            out.push(Violation::WorldRange { place: "R".into(), world: a });
        }
        if !in_range(&b) {
            out.push(Violation::WorldRange { place: "R".into(), world: b });
        }
    }
    let check_args = |out: &mut Vec<Violation>, place: &str, symbol: &str, declared: Option<&Vec<Sort>>, args: &[Value]| {
        if let Some(sorts) = declared {
            if sorts.len() != args.len() {
                out.push(Violation::Arity {
                    symbol: symbol.to_string(),
                    expected: sorts.len(),
                    got: args.len(),
                });
            }
        }
        for v in args {
            if let Value::Obj(name) = v {
                if !m.domain.iter().any(|o| o == name) {
                    out.push(Violation::DomainClosure {
                        place: place.to_string(),
                        object: name.clone(),
                    });
                }
            }
        }
    };
    for (pred, ext) in &m.preds {
        for (w, args) in ext {
            let place = format!("holds {}: {}", m.world_name(*w), pred);
            if !in_range(w) {
                out.push(Violation::WorldRange { place: place.clone(), world: *w });
            }
            check_args(&mut out, &place, pred, m.sig.predicates.get(pred), args);
        }
    }
    for (action, table) in &m.acts {
        for ((from, args), targets) in table {
            let place = format!("act {}", action);
            if !in_range(from) {
                out.push(Violation::WorldRange { place: place.clone(), world: *from });
            }
            check_args(&mut out, &place, action, m.sig.actions.get(action), args);
            for to in targets {
                if !in_range(to) {
                    out.push(Violation::WorldRange { place: place.clone(), world: *to });
                }
                if !m.rel.contains(&(*from, *to)) {
                    out.push(Violation::Inclusion {
                        action: action.clone(),
                        from: *from,
                        to: *to,
                    });
                }
            }
        }
    }
    for (func, table) in &m.funcs {
        for ((w, args), value) in table {
            let place = format!("fun {}", func);
            if !in_range(w) {
                out.push(Violation::WorldRange { place: place.clone(), world: *w });
            }
            check_args(&mut out, &place, func, m.sig.functions.get(func), args);
            if let Value::Obj(name) = value {
                if !m.domain.iter().any(|o| o == name) {
                    out.push(Violation::DomainClosure { place, object: name.clone() });
                }
            }
        }
    }
    out
}

fn eval_term(m: &DalModel, w: World, term: &Term) -> Result<Value, SemanticsError> {
    match term {
        Term::Var(name) => Err(SemanticsError::NonGround(name.clone())),
        Term::Const(name) => {
            if m.domain.iter().any(|o| o == name) {
                Ok(Value::Obj(name.clone()))
            } else {
                Err(SemanticsError::Unbound(name.clone()))
            }
        }
        Term::App(f, args) => {
            let table = m.funcs.get(f).ok_or_else(|| SemanticsError::Unbound(f.clone()))?;
            let mut values = Vec::with_capacity(args.len());
            for a in args {
                values.push(eval_term(m, w, a)?);
            }
            table
                .get(&(w, values))
                .cloned()
                .ok_or_else(|| SemanticsError::PartialFunction(f.clone()))
        }
        Term::Time(te) => {
            if !te.is_numeric() {
                if let Some(v) = te.free_vars().into_iter().next() {
                    return Err(SemanticsError::NonGround(v));
                }
                return Err(SemanticsError::SymbolicTime(te.to_string()));
            }
            Ok(Value::Time(te.constant))
        }
    }
}

/// The evaluation function. `phi` must be grounded; sequence modalities
/// are evaluated by relation composition, so flattening first is
/// equivalent but not required. Quantifiers range over the object
/// domain.
pub fn eval(m: &DalModel, w: World, phi: &Formula) -> Result<bool, SemanticsError> {
    if w.0 >= m.world_count {
        return Err(SemanticsError::UnknownWorld(w));
    }
    match phi {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom { pred, args } => {
            if !m.sig.predicates.contains_key(pred) && !m.preds.contains_key(pred) {
                return Err(SemanticsError::Unbound(pred.clone()));
            }
            let mut values = Vec::with_capacity(args.len());
            for a in args {
                values.push(eval_term(m, w, a)?);
            }
            Ok(m.preds.get(pred).map_or(false, |ext| ext.contains(&(w, values))))
        }
        Formula::Cmp(op, lhs, rhs) => {
            for side in [lhs, rhs] {
                if !side.is_numeric() {
                    return Err(SemanticsError::SymbolicTime(side.to_string()));
                }
            }
            let c = crate::temporal::TimeConstraint::new(lhs, *op, rhs);
            c.eval(&TimeBindings::new()).map_err(|_| SemanticsError::SymbolicTime(lhs.to_string()))
        }
        Formula::Not(p) => Ok(!eval(m, w, p)?),
        Formula::And(l, r) => Ok(eval(m, w, l)? && eval(m, w, r)?),
        Formula::Or(l, r) => Ok(eval(m, w, l)? || eval(m, w, r)?),
        Formula::Implies(l, r) => Ok(!eval(m, w, l)? || eval(m, w, r)?),
        Formula::Forall(v, body) => {
            if v.sort == Sort::Time {
                return Err(SemanticsError::TimeQuantifier);
            }
            for o in &m.domain {
                let inst = body
                    .instantiate(v, &Term::Const(o.clone()))
                    .map_err(|e| SemanticsError::Subst(e.to_string()))?;
                if !eval(m, w, &inst)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(v, body) => {
            if v.sort == Sort::Time {
                return Err(SemanticsError::TimeQuantifier);
            }
            for o in &m.domain {
                let inst = body
                    .instantiate(v, &Term::Const(o.clone()))
                    .map_err(|e| SemanticsError::Subst(e.to_string()))?;
                if eval(m, w, &inst)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Box(p) => {
            for w2 in m.r_successors(w) {
                if !eval(m, w2, p)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Act(op, p) => eval_act(m, w, &op.actions, p),
    }
}

fn eval_act(m: &DalModel, w: World, actions: &[ActionTerm], p: &Formula) -> Result<bool, SemanticsError> {
    match actions.split_first() {
        None => eval(m, w, p),
        Some((head, rest)) => {
            if !m.sig.actions.contains_key(&head.symbol) && !m.acts.contains_key(&head.symbol) {
                return Err(SemanticsError::Unbound(head.symbol.clone()));
            }
            let mut values = Vec::with_capacity(head.args.len());
            for a in &head.args {
                values.push(eval_term(m, w, a)?);
            }
            for w2 in m.act_targets(&head.symbol, w, &values) {
                if !eval_act(m, w2, rest, p)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Verdict plus a falsifying witness: the world and the closed
/// instance that failed there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    pub holds: bool,
    pub witness: Option<(World, Formula)>,
}

/// Validity in a model: true at every world. Free object variables are
/// checked via all ground instantiations over the domain; free time
/// variables are an error.
pub fn check_in_model(m: &DalModel, phi: &Formula) -> Result<Valuation, SemanticsError> {
    let mut instances = vec![phi.clone()];
    for v in phi.free_vars() {
        if v.sort == Sort::Time {
            return Err(SemanticsError::NonGround(v.name));
        }
        let mut next = Vec::with_capacity(instances.len() * m.domain.len().max(1));
        for inst in &instances {
            for o in &m.domain {
                next.push(
                    inst.instantiate(&v, &Term::Const(o.clone()))
                        .map_err(|e| SemanticsError::Subst(e.to_string()))?,
                );
            }
        }
        if m.domain.is_empty() {
            next.clear();
        }
        instances = next;
    }
    for w in m.worlds() {
        for inst in &instances {
            if !eval(m, w, inst)? {
                return Ok(Valuation { holds: false, witness: Some((w, inst.clone())) });
            }
        }
    }
    Ok(Valuation { holds: true, witness: None })
}

pub fn valid_in_model(m: &DalModel, phi: &Formula) -> Result<bool, SemanticsError> {
    Ok(check_in_model(m, phi)?.holds)
}

/// Bounds for enumeration and bounded model search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_worlds: usize,
    pub max_domain: usize,
    /// Refuse to enumerate spaces larger than this many models.
    pub cap: u128,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_worlds: 4, max_domain: 2, cap: 4_000_000 }
    }
}

/// All reflexive-transitive relations over `n` worlds, ascending in the
/// bitmask of off-diagonal edges. Counts for n = 1..4: 1, 4, 29, 355.
pub fn preorders(n: usize) -> Vec<BTreeSet<(World, World)>> {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                pairs.push((a, b));
            }
        }
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut adj = vec![vec![false; n]; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                adj[a][b] = true;
            }
        }
        for d in 0..n {
            adj[d][d] = true;
        }
        let mut transitive = true;
        'scan: for a in 0..n {
            for b in 0..n {
                if !adj[a][b] {
                    continue;
                }
                for c in 0..n {
                    if adj[b][c] && !adj[a][c] {
                        transitive = false;
                        break 'scan;
                    }
                }
            }
        }
        if transitive {
            let mut rel = BTreeSet::new();
            for a in 0..n {
                for b in 0..n {
                    if adj[a][b] {
                        rel.insert((World(a), World(b)));
                    }
                }
            }
            out.push(rel);
        }
    }
    out
}

fn object_tuples(domain: &[String], arity: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for tuple in &out {
            for o in domain {
                let mut t = tuple.clone();
                t.push(Value::Obj(o.clone()));
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn check_enumerable(sig: &Signature) -> Result<(), SemanticsError> {
    if let Some((f, _)) = sig.functions.iter().next() {
        return Err(SemanticsError::Functions(f.clone()));
    }
    for (name, sorts) in sig.predicates.iter().chain(sig.actions.iter()) {
        if sorts.contains(&Sort::Time) {
            return Err(SemanticsError::TimeArgs(name.clone()));
        }
    }
    Ok(())
}

struct Frame {
    n: usize,
    rel: BTreeSet<(World, World)>,
    /// Boolean slots: one per (predicate, world, tuple).
    pred_slots: Vec<(String, World, Vec<Value>)>,
    /// One slot per (action, world, tuple); each slot picks a subset of
    /// the world's R-successors, listed here.
    act_slots: Vec<(String, World, Vec<Value>, Vec<World>)>,
}

impl Frame {
    fn new(sig: &Signature, domain: &[String], n: usize, rel: BTreeSet<(World, World)>) -> Self {
        let mut pred_slots = Vec::new();
        for (pred, sorts) in &sig.predicates {
            for w in 0..n {
                for tuple in object_tuples(domain, sorts.len()) {
                    pred_slots.push((pred.clone(), World(w), tuple));
                }
            }
        }
        let mut act_slots = Vec::new();
        for (action, sorts) in &sig.actions {
            for w in 0..n {
                let succs: Vec<World> = rel
                    .iter()
                    .filter(|(from, _)| *from == World(w))
                    .map(|(_, to)| *to)
                    .collect();
                for tuple in object_tuples(domain, sorts.len()) {
                    act_slots.push((action.clone(), World(w), tuple, succs.clone()));
                }
            }
        }
        Frame { n, rel, pred_slots, act_slots }
    }

    /// log2 of the number of models on this frame.
    fn bits(&self) -> u32 {
        let act_bits: usize = self.act_slots.iter().map(|(_, _, _, s)| s.len()).sum();
        (self.pred_slots.len() + act_bits) as u32
    }

    fn count(&self) -> u128 {
        1u128.checked_shl(self.bits()).unwrap_or(u128::MAX)
    }

    fn build(&self, sig: &Signature, domain: &[String], bits: &[bool]) -> DalModel {
        let mut m = DalModel {
            world_count: self.n,
            world_names: Vec::new(),
            domain: domain.to_vec(),
            sig: sig.clone(),
            rel: self.rel.clone(),
            ..DalModel::default()
        };
        let mut i = 0;
        for (pred, w, tuple) in &self.pred_slots {
            if bits[i] {
                m.preds.entry(pred.clone()).or_default().insert((*w, tuple.clone()));
            }
            i += 1;
        }
        for (action, w, tuple, succs) in &self.act_slots {
            let mut targets = BTreeSet::new();
            for s in succs {
                if bits[i] {
                    targets.insert(*s);
                }
                i += 1;
            }
            m.acts
                .entry(action.clone())
                .or_default()
                .insert((*w, tuple.clone()), targets);
        }
        m
    }
}

fn frames(sig: &Signature, bounds: &Bounds) -> Result<Vec<Frame>, SemanticsError> {
    check_enumerable(sig)?;
    let domain = sig.object_consts.clone();
    if domain.len() > bounds.max_domain {
        return Err(SemanticsError::DomainTooLarge {
            size: domain.len(),
            max: bounds.max_domain,
        });
    }
    let mut out = Vec::new();
    for n in 1..=bounds.max_worlds {
        for rel in preorders(n) {
            out.push(Frame::new(sig, &domain, n, rel));
        }
    }
    Ok(out)
}

/// Exact size of the enumeration space for `sig` within `bounds`.
pub fn model_space_size(sig: &Signature, bounds: &Bounds) -> Result<u128, SemanticsError> {
    let mut total: u128 = 0;
    for frame in frames(sig, bounds)? {
        total = total.saturating_add(frame.count());
    }
    Ok(total)
}

/// Exhaustively enumerates every model over `sig` within `bounds`, in a
/// fixed deterministic order: ascending world count, then preorder
/// bitmask order, then the truth assignment treated as a binary
/// odometer. Every yielded model passes `validate_model`. Refuses
/// spaces larger than `bounds.cap`.
pub fn enumerate_models(
    sig: &Signature,
    bounds: &Bounds,
) -> Result<ModelStream, SemanticsError> {
    let estimate = model_space_size(sig, bounds)?;
    if estimate > bounds.cap {
        return Err(SemanticsError::TooLarge { estimate, cap: bounds.cap });
    }
    Ok(ModelStream {
        sig: sig.clone(),
        domain: sig.object_consts.clone(),
        frames: frames(sig, bounds)?,
        frame_idx: 0,
        bits: None,
    })
}

pub struct ModelStream {
    sig: Signature,
    domain: Vec<String>,
    frames: Vec<Frame>,
    frame_idx: usize,
    /// Current odometer state; None means the next frame must start.
    bits: Option<Vec<bool>>,
}

impl Iterator for ModelStream {
    type Item = DalModel;

    fn next(&mut self) -> Option<DalModel> {
        loop {
            let frame = self.frames.get(self.frame_idx)?;
            match &mut self.bits {
                None => {
                    let bits = vec![false; frame.bits() as usize];
                    let model = frame.build(&self.sig, &self.domain, &bits);
                    self.bits = Some(bits);
                    return Some(model);
                }
                Some(bits) => {
                    let mut carried = true;
                    for b in bits.iter_mut() {
                        if *b {
                            *b = false;
                        } else {
                            *b = true;
                            carried = false;
                            break;
                        }
                    }
                    if carried {
                        self.bits = None;
                        self.frame_idx += 1;
                        continue;
                    }
                    let model = frame.build(&self.sig, &self.domain, bits);
                    return Some(model);
                }
            }
        }
    }
}

/// Three-valued partial evaluation result: decided, or the index of the
/// first unassigned bit the verdict depends on.
enum Partial {
    True,
    False,
    Need(usize),
}

struct Search<'a> {
    frame: &'a Frame,
    domain: &'a [String],
    /// pred bit index by (pred, world, tuple)
    pred_bit: BTreeMap<(String, World, Vec<Value>), usize>,
    /// per action slot: successor list with bit indices
    act_bit: BTreeMap<(String, World, Vec<Value>), Vec<(World, usize)>>,
    assign: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    fn new(frame: &'a Frame, domain: &'a [String]) -> Self {
        let mut pred_bit = BTreeMap::new();
        let mut act_bit = BTreeMap::new();
        let mut i = 0;
        for (pred, w, tuple) in &frame.pred_slots {
            pred_bit.insert((pred.clone(), *w, tuple.clone()), i);
            i += 1;
        }
        for (action, w, tuple, succs) in &frame.act_slots {
            let mut entries = Vec::with_capacity(succs.len());
            for s in succs {
                entries.push((*s, i));
                i += 1;
            }
            act_bit.insert((action.clone(), *w, tuple.clone()), entries);
        }
        Search { frame, domain, pred_bit, act_bit, assign: vec![None; i] }
    }

    fn term_value(&self, term: &Term) -> Result<Value, SemanticsError> {
        match term {
            Term::Var(name) => Err(SemanticsError::NonGround(name.clone())),
            Term::Const(name) => Ok(Value::Obj(name.clone())),
            Term::App(f, _) => Err(SemanticsError::Functions(f.clone())),
            Term::Time(te) => {
                if !te.is_numeric() {
                    return Err(SemanticsError::SymbolicTime(te.to_string()));
                }
                Ok(Value::Time(te.constant))
            }
        }
    }

    fn eval_p(&self, w: World, phi: &Formula) -> Result<Partial, SemanticsError> {
        Ok(match phi {
            Formula::True => Partial::True,
            Formula::False => Partial::False,
            Formula::Atom { pred, args } => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.term_value(a)?);
                }
                let bit = self
                    .pred_bit
                    .get(&(pred.clone(), w, values))
                    .copied()
                    .ok_or_else(|| SemanticsError::Unbound(pred.clone()))?;
                match self.assign[bit] {
                    None => Partial::Need(bit),
                    Some(true) => Partial::True,
                    Some(false) => Partial::False,
                }
            }
            Formula::Cmp(op, lhs, rhs) => {
                for side in [lhs, rhs] {
                    if !side.is_numeric() {
                        return Err(SemanticsError::SymbolicTime(side.to_string()));
                    }
                }
                let c = crate::temporal::TimeConstraint::new(lhs, *op, rhs);
                if c.eval(&TimeBindings::new())
                    .map_err(|_| SemanticsError::SymbolicTime(lhs.to_string()))?
                {
                    Partial::True
                } else {
                    Partial::False
                }
            }
            Formula::Not(p) => match self.eval_p(w, p)? {
                Partial::True => Partial::False,
                Partial::False => Partial::True,
                need => need,
            },
            // Kleene evaluation: a side that is already decided can
            // settle the verdict even when the other side still needs a
            // bit, which keeps the backtracking shallow.
            Formula::And(l, r) => match (self.eval_p(w, l)?, self.eval_p(w, r)?) {
                (Partial::False, _) | (_, Partial::False) => Partial::False,
                (Partial::True, o) | (o, Partial::True) => o,
                (need, _) => need,
            },
            Formula::Or(l, r) => match (self.eval_p(w, l)?, self.eval_p(w, r)?) {
                (Partial::True, _) | (_, Partial::True) => Partial::True,
                (Partial::False, o) | (o, Partial::False) => o,
                (need, _) => need,
            },
            Formula::Implies(l, r) => match (self.eval_p(w, l)?, self.eval_p(w, r)?) {
                (Partial::False, _) | (_, Partial::True) => Partial::True,
                (Partial::True, Partial::False) => Partial::False,
                (Partial::True, need) | (need, Partial::False) | (need, _) => need,
            },
            Formula::Forall(v, body) => {
                if v.sort == Sort::Time {
                    return Err(SemanticsError::TimeQuantifier);
                }
                let mut need = None;
                for o in self.domain {
                    let inst = body
                        .instantiate(v, &Term::Const(o.clone()))
                        .map_err(|e| SemanticsError::Subst(e.to_string()))?;
                    match self.eval_p(w, &inst)? {
                        Partial::True => {}
                        Partial::False => return Ok(Partial::False),
                        Partial::Need(b) => need = need.or(Some(b)),
                    }
                }
                match need {
                    Some(b) => Partial::Need(b),
                    None => Partial::True,
                }
            }
            Formula::Exists(v, body) => {
                if v.sort == Sort::Time {
                    return Err(SemanticsError::TimeQuantifier);
                }
                let mut need = None;
                for o in self.domain {
                    let inst = body
                        .instantiate(v, &Term::Const(o.clone()))
                        .map_err(|e| SemanticsError::Subst(e.to_string()))?;
                    match self.eval_p(w, &inst)? {
                        Partial::False => {}
                        Partial::True => return Ok(Partial::True),
                        Partial::Need(b) => need = need.or(Some(b)),
                    }
                }
                match need {
                    Some(b) => Partial::Need(b),
                    None => Partial::False,
                }
            }
            Formula::Box(p) => {
                let mut need = None;
                for (from, to) in &self.frame.rel {
                    if *from != w {
                        continue;
                    }
                    match self.eval_p(*to, p)? {
                        Partial::True => {}
                        Partial::False => return Ok(Partial::False),
                        Partial::Need(b) => need = need.or(Some(b)),
                    }
                }
                match need {
                    Some(b) => Partial::Need(b),
                    None => Partial::True,
                }
            }
            Formula::Act(op, p) => self.eval_act_p(w, &op.actions, p)?,
        })
    }

    fn eval_act_p(
        &self,
        w: World,
        actions: &[ActionTerm],
        p: &Formula,
    ) -> Result<Partial, SemanticsError> {
        let Some((head, rest)) = actions.split_first() else {
            return self.eval_p(w, p);
        };
        let mut values = Vec::with_capacity(head.args.len());
        for a in &head.args {
            values.push(self.term_value(a)?);
        }
        let entries = self
            .act_bit
            .get(&(head.symbol.clone(), w, values))
            .ok_or_else(|| SemanticsError::Unbound(head.symbol.clone()))?;
        let mut need = None;
        for (target, bit) in entries {
            match self.assign[*bit] {
                None => need = need.or(Some(*bit)),
                Some(false) => {}
                Some(true) => match self.eval_act_p(*target, rest, p)? {
                    Partial::True => {}
                    Partial::False => return Ok(Partial::False),
                    Partial::Need(b) => need = need.or(Some(b)),
                },
            }
        }
        Ok(match need {
            Some(b) => Partial::Need(b),
            None => Partial::True,
        })
    }

    /// Complete backtracking search: decide the formula, assigning one
    /// needed bit at a time. Returns a full assignment making it true,
    /// if one exists on this frame.
    fn solve(&mut self, phi: &Formula) -> Result<Option<Vec<bool>>, SemanticsError> {
        match self.eval_p(World(0), phi)? {
            Partial::True => {
                Ok(Some(self.assign.iter().map(|b| b.unwrap_or(false)).collect()))
            }
            Partial::False => Ok(None),
            Partial::Need(bit) => {
                for choice in [false, true] {
                    self.assign[bit] = Some(choice);
                    if let Some(done) = self.solve(phi)? {
                        self.assign[bit] = None;
                        return Ok(Some(done));
                    }
                }
                self.assign[bit] = None;
                Ok(None)
            }
        }
    }
}

/// Complete bounded satisfiability search, independent of the tableau:
/// looks for a model within `bounds` satisfying `phi` at world w0.
/// Enumerating world counts and R-frames exhaustively and deciding the
/// truth assignment by backtracking makes this exactly as complete as
/// `enumerate_models` + `eval` within the same bounds, just without
/// materializing the space. Returns the first hit in the deterministic
/// frame order.
pub fn find_model(
    sig: &Signature,
    bounds: &Bounds,
    phi: &Formula,
) -> Result<Option<DalModel>, SemanticsError> {
    let domain = sig.object_consts.clone();
    for frame in frames(sig, bounds)? {
        let mut search = Search::new(&frame, &domain);
        if let Some(bits) = search.solve(phi)? {
            let model = frame.build(sig, &domain, &bits);
            debug_assert!(validate_model(&model).is_empty());
            debug_assert_eq!(eval(&model, World(0), phi), Ok(true));
            return Ok(Some(model));
        }
    }
    Ok(None)
}

/// Renders a model in the model file syntax; parsing the result
/// reconstructs the model.
pub fn render_model(m: &DalModel) -> String {
    let mut out = String::new();
    let mut push = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    if !m.sig.object_consts.is_empty() {
        push(format!("const {} : object", m.sig.object_consts.join(", ")));
    }
    if !m.sig.time_consts.is_empty() {
        push(format!("const {} : time", m.sig.time_consts.join(", ")));
    }
    for (name, sorts) in &m.sig.predicates {
        push(format!("pred {}{}", name, render_sorts(sorts)));
    }
    for (name, sorts) in &m.sig.actions {
        push(format!("action {}{}", name, render_sorts(sorts)));
    }
    let names: Vec<String> = m.worlds().map(|w| m.world_name(w)).collect();
    if !names.is_empty() {
        push(format!("world {}", names.join(", ")));
    }
    for (w, q) in &m.stamps {
        push(format!("time {} = {}", m.world_name(*w), format_rat(q)));
    }
    for (from, to) in &m.rel {
        push(format!("rel R: {} -> {}", m.world_name(*from), m.world_name(*to)));
    }
    for (action, table) in &m.acts {
        for ((from, args), targets) in table {
            if targets.is_empty() {
                continue;
            }
            let targets: Vec<String> = targets.iter().map(|t| m.world_name(*t)).collect();
            push(format!(
                "act {}{}: {} -> {{{}}}",
                action,
                render_values(args),
                m.world_name(*from),
                targets.join(", ")
            ));
        }
    }
    for (pred, ext) in &m.preds {
        for (w, args) in ext {
            push(format!("holds {}: {}{}", m.world_name(*w), pred, render_values(args)));
        }
    }
    out
}

fn render_sorts(sorts: &[Sort]) -> String {
    if sorts.is_empty() {
        String::new()
    } else {
        format!("({})", sorts.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))
    }
}

fn render_values(args: &[Value]) -> String {
    if args.is_empty() {
        String::new()
    } else {
        format!("({})", args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    }
}

/// Free object variables of a formula, for grounding checks.
pub fn free_object_vars(phi: &Formula) -> Vec<Var> {
    phi.free_vars().into_iter().filter(|v| v.sort == Sort::Object).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, ParseOptions};

    fn small_sig() -> Signature {
        let mut sig = Signature::default();
        sig.add_predicate("P", vec![]).unwrap();
        sig.add_action("a", vec![]).unwrap();
        sig
    }

    /// Two worlds, a-edge w0 -> w1, P only at w1, R the reflexive
    /// closure plus (w0, w1).
    fn two_world_model() -> DalModel {
        let mut sig = small_sig();
        sig.add_predicate("Q", vec![]).unwrap();
        let mut m = DalModel {
            world_count: 2,
            sig,
            ..DalModel::default()
        };
        m.rel.insert((World(0), World(0)));
        m.rel.insert((World(1), World(1)));
        m.rel.insert((World(0), World(1)));
        m.acts
            .entry("a".into())
            .or_default()
            .insert((World(0), vec![]), [World(1)].into());
        m.preds.entry("P".into()).or_default().insert((World(1), vec![]));
        m
    }

    fn fof(text: &str, sig: &mut Signature) -> Formula {
        parse_formula(text, sig, ParseOptions::strict()).unwrap()
    }

    #[test]
    fn validate_reports_inclusion_violation() {
        let mut m = two_world_model();
        m.rel.remove(&(World(0), World(1)));
        let violations = validate_model(&m);
        assert!(violations.contains(&Violation::Inclusion {
            action: "a".into(),
            from: World(0),
            to: World(1),
        }));
    }

    #[test]
    fn validate_accepts_identity_relation() {
        let m = DalModel {
            world_count: 1,
            rel: [(World(0), World(0))].into(),
            ..DalModel::default()
        };
        assert_eq!(validate_model(&m), vec![]);
    }

    #[test]
    fn validate_reports_missing_transitive_edge() {
        let mut m = DalModel { world_count: 3, ..DalModel::default() };
        for w in 0..3 {
            m.rel.insert((World(w), World(w)));
        }
        m.rel.insert((World(0), World(1)));
        m.rel.insert((World(1), World(2)));
        let violations = validate_model(&m);
        assert!(violations.contains(&Violation::Transitivity(World(0), World(1), World(2))));
    }

    #[test]
    fn empty_transition_set_satisfies_box_bottom() {
        let mut m = two_world_model();
        m.acts.get_mut("a").unwrap().clear();
        let mut sig = m.sig.clone();
        let phi = fof("[a] false", &mut sig);
        assert_eq!(eval(&m, World(0), &phi), Ok(true));
        let occurs = fof("<a> true", &mut sig);
        assert_eq!(eval(&m, World(0), &occurs), Ok(false));
    }

    #[test]
    fn top_holds_everywhere() {
        let m = two_world_model();
        for w in m.worlds() {
            assert_eq!(eval(&m, w, &Formula::True), Ok(true));
        }
    }

    #[test]
    fn action_and_box_clauses_differ() {
        let m = two_world_model();
        let mut sig = m.sig.clone();
        let boxed = fof("box P", &mut sig);
        let acted = fof("[a] P", &mut sig);
        assert_eq!(eval(&m, World(0), &acted), Ok(true));
        assert_eq!(eval(&m, World(0), &boxed), Ok(false));
    }

    #[test]
    fn inclusion_axiom_valid_on_the_sample_model() {
        let m = two_world_model();
        let mut sig = m.sig.clone();
        let phi = fof("box P -> [a] P", &mut sig);
        assert_eq!(valid_in_model(&m, &phi), Ok(true));
        let p = fof("P", &mut sig);
        assert_eq!(valid_in_model(&m, &p), Ok(false));
    }

    #[test]
    fn sequence_modalities_evaluate_by_composition() {
        let m = two_world_model();
        let mut sig = m.sig.clone();
        let seq = fof("[a;a] false", &mut sig);
        let flat = seq.flatten_modalities();
        assert_eq!(eval(&m, World(0), &seq), eval(&m, World(0), &flat));
        // w1 has no a-transitions, so [a][a]false holds at w0.
        assert_eq!(eval(&m, World(0), &seq), Ok(true));
    }

    #[test]
    fn quantifiers_range_over_the_domain() {
        let mut m = two_world_model();
        m.domain = vec!["c1".into(), "c2".into()];
        m.sig.add_object_const("c1").unwrap();
        m.sig.add_object_const("c2").unwrap();
        m.sig.add_predicate("S", vec![Sort::Object]).unwrap();
        for w in [World(0), World(1)] {
            m.preds
                .entry("S".into())
                .or_default()
                .insert((w, vec![Value::Obj("c1".into())]));
        }
        let mut sig = m.sig.clone();
        let some = fof("exists x S(x)", &mut sig);
        let all = fof("forall x S(x)", &mut sig);
        assert_eq!(eval(&m, World(0), &some), Ok(true));
        assert_eq!(eval(&m, World(0), &all), Ok(false));
        assert_eq!(
            valid_in_model(&m, &fof("S(c1)", &mut sig)),
            Ok(true)
        );
    }

    #[test]
    fn preorder_counts_match_the_known_sequence() {
        assert_eq!(preorders(1).len(), 1);
        assert_eq!(preorders(2).len(), 4);
        assert_eq!(preorders(3).len(), 29);
        assert_eq!(preorders(4).len(), 355);
    }

    #[test]
    fn one_world_space_has_exactly_four_models() {
        let sig = small_sig();
        let bounds = Bounds { max_worlds: 1, max_domain: 2, cap: 1_000 };
        assert_eq!(model_space_size(&sig, &bounds), Ok(4));
        let models: Vec<_> = enumerate_models(&sig, &bounds).unwrap().collect();
        assert_eq!(models.len(), 4);
        for m in &models {
            assert_eq!(validate_model(m), vec![]);
        }
    }

    #[test]
    fn zero_world_bound_yields_nothing() {
        let sig = small_sig();
        let bounds = Bounds { max_worlds: 0, max_domain: 2, cap: 1_000 };
        assert_eq!(enumerate_models(&sig, &bounds).unwrap().count(), 0);
    }

    #[test]
    fn oversized_spaces_are_refused_with_an_estimate() {
        let sig = small_sig();
        let bounds = Bounds { max_worlds: 3, max_domain: 2, cap: 10 };
        match enumerate_models(&sig, &bounds) {
            Err(SemanticsError::TooLarge { estimate, cap }) => {
                assert!(estimate > 10);
                assert_eq!(cap, 10);
            }
            other => panic!("expected refusal, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn every_two_world_model_passes_validation() {
        let sig = small_sig();
        let bounds = Bounds { max_worlds: 2, max_domain: 2, cap: 100_000 };
        let mut count = 0u32;
        for m in enumerate_models(&sig, &bounds).unwrap() {
            assert_eq!(validate_model(&m), vec![], "model {:?}", m);
            count += 1;
        }
        assert_eq!(u128::from(count), model_space_size(&sig, &bounds).unwrap());
    }

    #[test]
    fn find_model_agrees_with_exhaustive_enumeration() {
        let mut sig = small_sig();
        sig.add_predicate("Q", vec![]).unwrap();
        let bounds = Bounds { max_worlds: 2, max_domain: 2, cap: 1_000_000 };
        let mut texts =
            vec!["P /\\ ~P", "P \\/ ~P", "<a> true", "[a] false", "<a> P /\\ [a] ~P", "box P /\\ dia ~P"];
        texts.push("<a> P /\\ <a> ~P /\\ box (P -> Q)");
        for text in texts {
            let phi = parse_formula(text, &mut sig.clone(), ParseOptions::strict()).unwrap();
            let found = find_model(&sig, &bounds, &phi).unwrap();
            let brute = enumerate_models(&sig, &bounds)
                .unwrap()
                .find(|m| eval(m, World(0), &phi) == Ok(true));
            assert_eq!(found.is_some(), brute.is_some(), "disagree on `{}`", text);
            if let Some(m) = found {
                assert_eq!(eval(&m, World(0), &phi), Ok(true), "witness fails `{}`", text);
                assert_eq!(validate_model(&m), vec![]);
            }
        }
    }

    #[test]
    fn rendered_models_reparse_to_the_same_structure() {
        let m = two_world_model();
        let text = render_model(&m);
        let (_, back) = crate::syntax::parse_model_file(&text).unwrap();
        assert_eq!(back.world_count, m.world_count);
        assert_eq!(back.rel, m.rel);
        assert_eq!(back.preds, m.preds);
        // Empty transition sets are elided by the renderer; the parsed
        // model evaluates identically.
        let mut sig = m.sig.clone();
        let phi = fof("[a] P", &mut sig);
        assert_eq!(eval(&back, World(0), &phi), eval(&m, World(0), &phi));
    }

    #[test]
    fn close_r_builds_the_reflexive_transitive_closure() {
        let mut m = DalModel { world_count: 3, ..DalModel::default() };
        m.rel.insert((World(0), World(1)));
        m.rel.insert((World(1), World(2)));
        m.close_r();
        assert!(validate_model(&m).is_empty());
        assert!(m.rel.contains(&(World(0), World(2))));
    }
}
