//! Time expressions, ordering constraints, and parametric action laws.
//!
//! Time points are exact rationals. A [`TimeExpr`] is a linear
//! combination of symbolic time constants and time variables plus a
//! rational constant; all arithmetic on instants and durations stays in
//! this module so the prover never has to reason about numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::semantics::{DalModel, World};
use crate::syntax::{Formula, SyntaxError, Term, Var};

/// Exact rational scalar used for all time arithmetic.
pub type Rat = Rational64;

/// Assignment of rational instants to symbolic time constants.
pub type TimeBindings = BTreeMap<String, Rat>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n)
}

/// Renders `3`, `-2` or `1/1000` (never `3/1`).
pub fn format_rat(q: &Rat) -> String {
    if q.denom() == &1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemporalError {
    #[error("time expression contains the free variable `{0}`")]
    FreeVariable(String),
    #[error("no binding for time constant `{0}`")]
    UnboundConstant(String),
    #[error("constraint violated: {0}")]
    Violated(TimeConstraint),
    #[error("world {} has no time stamp", (.0).0)]
    MissingStamp(World),
    #[error("time must not decrease along {} -> {}: {1} maps to an earlier instant", (.0).0, (.1).0)]
    NotMonotone(World, World),
    #[error("law instantiation is missing a value for `{0}`")]
    MissingBinding(String),
    #[error("{0}")]
    Sort(String),
}

/// One symbolic summand of a time expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeAtom {
    /// Declared symbolic time constant, e.g. `ds`.
    Const(String),
    /// Time-sorted variable, e.g. the `t` of an action law.
    Var(String),
}

impl TimeAtom {
    pub fn name(&self) -> &str {
        match self {
            TimeAtom::Const(n) | TimeAtom::Var(n) => n,
        }
    }
}

/// Linear time expression: a rational constant plus coefficient-weighted
/// atoms. Kept normalized: like atoms merged, zero coefficients dropped.
/// Atom order follows first appearance so that rendering tracks the
/// source text; equality and ordering are order-insensitive.
#[derive(Clone, Debug, Default)]
pub struct TimeExpr {
    pub constant: Rat,
    terms: Vec<(TimeAtom, Rat)>,
}

impl TimeExpr {
    pub fn zero() -> Self {
        TimeExpr::default()
    }

    pub fn from_rat(q: Rat) -> Self {
        TimeExpr { constant: q, terms: Vec::new() }
    }

    pub fn constant_sym(name: impl Into<String>) -> Self {
        TimeExpr { constant: Rat::zero(), terms: vec![(TimeAtom::Const(name.into()), rat_int(1))] }
    }

    pub fn variable(name: impl Into<String>) -> Self {
        TimeExpr { constant: Rat::zero(), terms: vec![(TimeAtom::Var(name.into()), rat_int(1))] }
    }

    pub fn atom_scaled(atom: TimeAtom, coeff: Rat) -> Self {
        let mut e = TimeExpr::zero();
        e.add_atom(atom, coeff);
        e
    }

    fn add_atom(&mut self, atom: TimeAtom, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        if let Some(entry) = self.terms.iter_mut().find(|(a, _)| *a == atom) {
            entry.1 += coeff;
        } else {
            self.terms.push((atom, coeff));
            return;
        }
        self.terms.retain(|(_, q)| !q.is_zero());
    }

    pub fn add(&self, other: &TimeExpr) -> TimeExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (a, q) in &other.terms {
            out.add_atom(a.clone(), *q);
        }
        out
    }

    pub fn scale(&self, k: Rat) -> TimeExpr {
        if k.is_zero() {
            return TimeExpr::zero();
        }
        TimeExpr {
            constant: self.constant * k,
            terms: self.terms.iter().map(|(a, q)| (a.clone(), *q * k)).collect(),
        }
    }

    pub fn sub(&self, other: &TimeExpr) -> TimeExpr {
        self.add(&other.scale(rat_int(-1)))
    }

    pub fn atoms(&self) -> impl Iterator<Item = &(TimeAtom, Rat)> {
        self.terms.iter()
    }

    pub fn is_numeric(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.terms
            .iter()
            .filter_map(|(a, _)| match a {
                TimeAtom::Var(n) => Some(n.clone()),
                TimeAtom::Const(_) => None,
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.terms
            .iter()
            .filter_map(|(a, _)| match a {
                TimeAtom::Const(n) => Some(n.clone()),
                TimeAtom::Var(_) => None,
            })
            .collect()
    }

    /// Substitutes a time expression for every occurrence of the variable.
    pub fn subst_var(&self, name: &str, value: &TimeExpr) -> TimeExpr {
        let mut out = TimeExpr::from_rat(self.constant);
        for (a, q) in &self.terms {
            match a {
                TimeAtom::Var(n) if n == name => {
                    out = out.add(&value.scale(*q));
                }
                _ => out.add_atom(a.clone(), *q),
            }
        }
        out
    }

    /// Replaces every bound symbolic constant with its rational value.
    /// Unbound constants and variables are left in place.
    pub fn reduce(&self, bindings: &TimeBindings) -> TimeExpr {
        let mut out = TimeExpr::from_rat(self.constant);
        for (a, q) in &self.terms {
            match a {
                TimeAtom::Const(n) => match bindings.get(n) {
                    Some(v) => out.constant += *v * *q,
                    None => out.add_atom(a.clone(), *q),
                },
                TimeAtom::Var(_) => out.add_atom(a.clone(), *q),
            }
        }
        out
    }

    /// Evaluates to a rational instant. Fails on free variables or
    /// constants missing from the bindings.
    pub fn eval(&self, bindings: &TimeBindings) -> Result<Rat, TemporalError> {
        let mut total = self.constant;
        for (a, q) in &self.terms {
            match a {
                TimeAtom::Var(n) => return Err(TemporalError::FreeVariable(n.clone())),
                TimeAtom::Const(n) => match bindings.get(n) {
                    Some(v) => total += *v * *q,
                    None => return Err(TemporalError::UnboundConstant(n.clone())),
                },
            }
        }
        Ok(total)
    }

    fn canon(&self) -> (Rat, Vec<(&TimeAtom, &Rat)>) {
        let mut v: Vec<_> = self.terms.iter().map(|(a, q)| (a, q)).collect();
        v.sort();
        (self.constant, v)
    }
}

impl PartialEq for TimeExpr {
    fn eq(&self, other: &Self) -> bool {
        self.canon() == other.canon()
    }
}

impl Eq for TimeExpr {}

impl PartialOrd for TimeExpr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeExpr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canon().cmp(&other.canon())
    }
}

impl std::hash::Hash for TimeExpr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canon().hash(state);
    }
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "{}", format_rat(&self.constant));
        }
        let mut parts = Vec::new();
        if !self.constant.is_zero() {
            parts.push(format_rat(&self.constant));
        }
        for (a, q) in &self.terms {
            if q == &rat_int(1) {
                parts.push(a.name().to_string());
            } else {
                parts.push(format!("{}*{}", format_rat(q), a.name()));
            }
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// Comparison relations available on time expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
        })
    }
}

/// An ordering constraint between two time expressions, stored in the
/// normalized form `lhs - rhs  op  0`. For equations the sign of the
/// difference is canonicalized so `a = b` and `b = a` coincide.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeConstraint {
    pub delta: TimeExpr,
    pub op: CmpOp,
}

impl TimeConstraint {
    pub fn new(lhs: &TimeExpr, op: CmpOp, rhs: &TimeExpr) -> Self {
        let mut delta = lhs.sub(rhs);
        if op == CmpOp::Eq {
            // Orient the difference by the smallest atom so that
            // `a = b` and `b = a` normalize identically regardless of
            // the order the terms were written in.
            let flip = match delta.terms.iter().min_by(|(a, _), (b, _)| a.cmp(b)) {
                Some((_, q)) => *q < Rat::zero(),
                None => delta.constant < Rat::zero(),
            };
            if flip {
                delta = delta.scale(rat_int(-1));
            }
        }
        TimeConstraint { delta, op }
    }

    pub fn eval(&self, bindings: &TimeBindings) -> Result<bool, TemporalError> {
        let d = self.delta.eval(bindings)?;
        Ok(match self.op {
            CmpOp::Lt => d < Rat::zero(),
            CmpOp::Le => d <= Rat::zero(),
            CmpOp::Eq => d.is_zero(),
        })
    }

    /// Splits the normalized difference back into two non-negative sides
    /// for display, so `ds+d1-t1-db < 0` prints as `ds+d1 < t1+db`.
    pub fn sides(&self) -> (TimeExpr, TimeExpr) {
        let mut lhs = TimeExpr::zero();
        let mut rhs = TimeExpr::zero();
        if self.delta.constant > Rat::zero() {
            lhs.constant = self.delta.constant;
        } else {
            rhs.constant = -self.delta.constant;
        }
        for (a, q) in &self.delta.terms {
            if *q > Rat::zero() {
                lhs.add_atom(a.clone(), *q);
            } else {
                rhs.add_atom(a.clone(), -*q);
            }
        }
        (lhs, rhs)
    }
}

impl fmt::Display for TimeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lhs, rhs) = self.sides();
        write!(f, "{} {} {}", lhs, self.op, rhs)
    }
}

/// Checks every constraint under the bindings; the first violated
/// constraint is reported in the error.
pub fn check_constraints(
    constraints: &[TimeConstraint],
    bindings: &TimeBindings,
) -> Result<(), TemporalError> {
    for c in constraints {
        if !c.eval(bindings)? {
            return Err(TemporalError::Violated(c.clone()));
        }
    }
    Ok(())
}

/// Parametric action law `pre -> [action] post`.
///
/// `vars` is the law's declared variable list; it must cover every
/// variable of the precondition and of the action term (the result may
/// mention a subset, e.g. a motion law whose destination replaces the
/// origin).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionLaw {
    pub precondition: Formula,
    pub action: crate::syntax::ActionTerm,
    pub result: Formula,
    pub vars: Vec<Var>,
}

impl ActionLaw {
    pub fn new(
        precondition: Formula,
        action: crate::syntax::ActionTerm,
        result: Formula,
    ) -> Result<Self, TemporalError> {
        let mut vars: BTreeSet<Var> = precondition.free_vars();
        vars.extend(action.free_vars());
        vars.extend(result.free_vars());
        let law = ActionLaw {
            precondition,
            action,
            result,
            vars: vars.into_iter().collect(),
        };
        law.check_var_lists()?;
        Ok(law)
    }

    fn check_var_lists(&self) -> Result<(), TemporalError> {
        let declared: BTreeSet<&Var> = self.vars.iter().collect();
        let mut used: BTreeSet<Var> = self.precondition.free_vars();
        used.extend(self.action.free_vars());
        for v in &used {
            if !declared.contains(v) {
                return Err(TemporalError::MissingBinding(v.name.clone()));
            }
        }
        Ok(())
    }

    /// The law as a plain formula.
    pub fn formula(&self) -> Formula {
        Formula::implies(
            self.precondition.clone(),
            Formula::act_one(self.action.clone(), self.result.clone()),
        )
    }

    /// Instantiates every declared variable and normalizes the time
    /// arithmetic, so `t := 6, d := 3` turns `t+d` into `9`.
    pub fn instantiate(&self, values: &BTreeMap<String, Term>) -> Result<Formula, TemporalError> {
        let mut out = self.formula();
        for v in &self.vars {
            let value = values
                .get(&v.name)
                .ok_or_else(|| TemporalError::MissingBinding(v.name.clone()))?;
            out = out
                .instantiate(v, value)
                .map_err(|e: SyntaxError| TemporalError::Sort(e.to_string()))?;
        }
        Ok(out)
    }
}

/// Reachability order on worlds: the reflexive-transitive closure of the
/// union of all action transitions.
pub fn reach_order(model: &DalModel) -> BTreeSet<(World, World)> {
    let n = model.world_count;
    let mut reach = vec![false; n * n];
    for w in 0..n {
        reach[w * n + w] = true;
    }
    for table in model.acts.values() {
        for ((from, _), targets) in table {
            for to in targets {
                reach[from.0 * n + to.0] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i * n + k] {
                for j in 0..n {
                    if reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i * n + j] {
                out.insert((World(i), World(j)));
            }
        }
    }
    out
}

/// Verifies that time stamps are a homomorphism from the reachability
/// order into the rational order: `w` reaches `w'` implies
/// `time(w) <= time(w')`. Every world must carry a stamp.
pub fn check_time_homomorphism(model: &DalModel) -> Result<(), TemporalError> {
    for w in 0..model.world_count {
        if !model.stamps.contains_key(&World(w)) {
            return Err(TemporalError::MissingStamp(World(w)));
        }
    }
    for (a, b) in reach_order(model) {
        if model.stamps[&a] > model.stamps[&b] {
            return Err(TemporalError::NotMonotone(a, b));
        }
    }
    Ok(())
}
