//! Terms, formulas, signatures, and the canonical renderer.
//!
//! The language is two-sorted: `object` for domain individuals and
//! `time` for rational instants. Action modalities `[a(...)]` are
//! indexed by action terms; `[a1;a2]` abbreviates composition and `[]`
//! is the identity modality. The diamonds `<a>phi` and `dia phi` are
//! definitional abbreviations and normalize to `~[a]~phi` / `~box ~phi`
//! at construction, so they never appear in a stored [`Formula`].

mod parser;

pub use parser::{parse_formula, parse_model_file, parse_theory, ParseOptions};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::temporal::{CmpOp, Rat, TimeBindings, TimeConstraint, TimeExpr};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("parse error at offset {offset} (line {line}, column {column}): {message}")]
    Parse { offset: usize, line: usize, column: usize, message: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("`{symbol}` expects {expected} argument(s), got {got}")]
    Arity { symbol: String, expected: usize, got: usize },
    #[error("cannot infer a sort for `{0}`; annotate the binder, e.g. `forall {0} : object`")]
    CannotInfer(String),
    #[error("substituting for `{var}` would capture the bound variable `{bound}`")]
    Capture { var: String, bound: String },
    #[error("function applications are outside the executable fragment: `{0}`")]
    NonExecutable(String),
    #[error("cannot ground a {sort} quantifier: the {sort} domain is empty")]
    EmptyDomain { sort: Sort },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("signature error: {0}")]
    Signature(String),
}

/// The two sorts of the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Object,
    Time,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Object => "object",
            Sort::Time => "time",
        })
    }
}

/// A sorted variable. Two occurrences of one name always denote the
/// same variable; the parser rejects mixed-sort use of a name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn object(name: impl Into<String>) -> Self {
        Var { name: name.into(), sort: Sort::Object }
    }

    pub fn time(name: impl Into<String>) -> Self {
        Var { name: name.into(), sort: Sort::Time }
    }
}

/// First-order terms. Time-sorted positions always hold a
/// [`TimeExpr`]; a bare time variable or symbolic constant is a
/// one-atom expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Object-sorted variable.
    Var(String),
    /// Object constant.
    Const(String),
    /// Function application (data-model only; the executable fragment
    /// rejects applications of arity > 0).
    App(String, Vec<Term>),
    /// Time expression.
    Time(TimeExpr),
}

impl Term {
    pub fn time_const(name: impl Into<String>) -> Self {
        Term::Time(TimeExpr::constant_sym(name))
    }

    pub fn time_var(name: impl Into<String>) -> Self {
        Term::Time(TimeExpr::variable(name))
    }

    pub fn time_rat(q: Rat) -> Self {
        Term::Time(TimeExpr::from_rat(q))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Time(_) => Sort::Time,
            _ => Sort::Object,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(n) => {
                out.insert(Var::object(n.clone()));
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            Term::Time(te) => out.extend(te.free_vars().into_iter().map(Var::time)),
        }
    }

    fn contains_app(&self) -> bool {
        matches!(self, Term::App(..))
    }

    fn subst(&self, var: &Var, value: &Term) -> Term {
        match (self, var.sort) {
            (Term::Var(n), Sort::Object) if n == &var.name => value.clone(),
            (Term::App(f, args), _) => {
                Term::App(f.clone(), args.iter().map(|a| a.subst(var, value)).collect())
            }
            (Term::Time(te), Sort::Time) => {
                let replacement = match value {
                    Term::Time(v) => v,
                    _ => unreachable!("sort-checked before substitution"),
                };
                Term::Time(te.subst_var(&var.name, replacement))
            }
            _ => self.clone(),
        }
    }

    fn reduce_times(&self, bindings: &TimeBindings) -> Term {
        match self {
            Term::Time(te) => Term::Time(te.reduce(bindings)),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.reduce_times(bindings)).collect())
            }
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) | Term::Const(n) => f.write_str(n),
            Term::App(g, args) => write_applied(f, g, args),
            Term::Time(te) => write!(f, "{}", te),
        }
    }
}

fn write_applied(f: &mut fmt::Formatter<'_>, head: &str, args: &[Term]) -> fmt::Result {
    f.write_str(head)?;
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{}", a)?;
    }
    f.write_str(")")
}

/// An action term `a(t1,...,tn)` indexing one action modality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionTerm {
    pub symbol: String,
    pub args: Vec<Term>,
}

impl ActionTerm {
    pub fn new(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        ActionTerm { symbol: symbol.into(), args }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn is_grounded(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn subst(&self, var: &Var, value: &Term) -> ActionTerm {
        ActionTerm {
            symbol: self.symbol.clone(),
            args: self.args.iter().map(|a| a.subst(var, value)).collect(),
        }
    }

    pub fn reduce_times(&self, bindings: &TimeBindings) -> ActionTerm {
        ActionTerm {
            symbol: self.symbol.clone(),
            args: self.args.iter().map(|a| a.reduce_times(bindings)).collect(),
        }
    }
}

impl fmt::Display for ActionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_applied(f, &self.symbol, &self.args)
    }
}

/// A (possibly composite) action operator: a sequence of action terms.
/// The empty sequence is the identity modality `[]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ActionOp {
    pub actions: Vec<ActionTerm>,
}

impl ActionOp {
    pub fn one(action: ActionTerm) -> Self {
        ActionOp { actions: vec![action] }
    }

    pub fn empty() -> Self {
        ActionOp::default()
    }
}

impl fmt::Display for ActionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

/// Formulas of the logic. `<A>phi` and `dia phi` normalize to
/// `~[A]~phi` and `~box ~phi` when built through the constructors or
/// the parser, so the stored shape has boxes only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom { pred: String, args: Vec<Term> },
    /// Comparison of two time expressions.
    Cmp(CmpOp, TimeExpr, TimeExpr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    /// Historical necessity `box phi`.
    Box(Box<Formula>),
    /// Action modality `[A]phi`.
    Act(ActionOp, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom { pred: pred.into(), args }
    }

    pub fn not(phi: Formula) -> Self {
        Formula::Not(Box::new(phi))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::and(
            Formula::implies(lhs.clone(), rhs.clone()),
            Formula::implies(rhs, lhs),
        )
    }

    pub fn forall(var: Var, body: Formula) -> Self {
        Formula::Forall(var, Box::new(body))
    }

    pub fn exists(var: Var, body: Formula) -> Self {
        Formula::Exists(var, Box::new(body))
    }

    pub fn boxed(phi: Formula) -> Self {
        Formula::Box(Box::new(phi))
    }

    /// `dia phi`, normalized to `~box ~phi`.
    pub fn dia(phi: Formula) -> Self {
        Formula::not(Formula::boxed(Formula::not(phi)))
    }

    pub fn act(op: ActionOp, phi: Formula) -> Self {
        Formula::Act(op, Box::new(phi))
    }

    pub fn act_one(action: ActionTerm, phi: Formula) -> Self {
        Formula::act(ActionOp::one(action), phi)
    }

    /// `<A>phi`, normalized to `~[A]~phi`.
    pub fn dia_act(op: ActionOp, phi: Formula) -> Self {
        Formula::not(Formula::act(op, Formula::not(phi)))
    }

    pub fn dia_act_one(action: ActionTerm, phi: Formula) -> Self {
        Formula::dia_act(ActionOp::one(action), phi)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            Formula::Cmp(_, lhs, rhs) => {
                out.extend(lhs.free_vars().into_iter().map(Var::time));
                out.extend(rhs.free_vars().into_iter().map(Var::time));
            }
            Formula::Not(p) => p.collect_free(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_free(out);
                r.collect_free(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                out.extend(inner.into_iter().filter(|u| u.name != v.name));
            }
            Formula::Box(p) => p.collect_free(out),
            Formula::Act(op, p) => {
                for a in &op.actions {
                    for t in &a.args {
                        t.collect_vars(out);
                    }
                }
                p.collect_free(out);
            }
        }
    }

    pub fn is_grounded(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Substitutes `value` for every free occurrence of `var`,
    /// including occurrences inside action operator arguments.
    /// Substitution under a binder that occurs free in `value` is
    /// reported as a capture, not silently renamed.
    pub fn instantiate(&self, var: &Var, value: &Term) -> Result<Formula, SyntaxError> {
        if value.sort() != var.sort {
            return Err(SyntaxError::Sort(format!(
                "cannot substitute a {} term for the {} variable `{}`",
                value.sort(),
                var.sort,
                var.name
            )));
        }
        self.subst(var, value)
    }

    fn subst(&self, var: &Var, value: &Term) -> Result<Formula, SyntaxError> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|a| a.subst(var, value)).collect(),
            },
            Formula::Cmp(op, lhs, rhs) => {
                if var.sort == Sort::Time {
                    let v = match value {
                        Term::Time(v) => v,
                        _ => unreachable!(),
                    };
                    Formula::Cmp(*op, lhs.subst_var(&var.name, v), rhs.subst_var(&var.name, v))
                } else {
                    self.clone()
                }
            }
            Formula::Not(p) => Formula::not(p.subst(var, value)?),
            Formula::And(l, r) => Formula::and(l.subst(var, value)?, r.subst(var, value)?),
            Formula::Or(l, r) => Formula::or(l.subst(var, value)?, r.subst(var, value)?),
            Formula::Implies(l, r) => {
                Formula::implies(l.subst(var, value)?, r.subst(var, value)?)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let quantifier = matches!(self, Formula::Forall(..));
                if v.name == var.name {
                    return Ok(self.clone());
                }
                if value.free_vars().iter().any(|u| u.name == v.name) {
                    return Err(SyntaxError::Capture {
                        var: var.name.clone(),
                        bound: v.name.clone(),
                    });
                }
                let inner = body.subst(var, value)?;
                if quantifier {
                    Formula::forall(v.clone(), inner)
                } else {
                    Formula::exists(v.clone(), inner)
                }
            }
            Formula::Box(p) => Formula::boxed(p.subst(var, value)?),
            Formula::Act(op, p) => {
                let op = ActionOp {
                    actions: op.actions.iter().map(|a| a.subst(var, value)).collect(),
                };
                Formula::act(op, p.subst(var, value)?)
            }
        })
    }

    /// Rewrites every composite modality into nested unary ones:
    /// `[a1;a2]phi` becomes `[a1][a2]phi` and `[]phi` becomes `phi`.
    pub fn flatten_modalities(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Cmp(..) => {
                self.clone()
            }
            Formula::Not(p) => Formula::not(p.flatten_modalities()),
            Formula::And(l, r) => Formula::and(l.flatten_modalities(), r.flatten_modalities()),
            Formula::Or(l, r) => Formula::or(l.flatten_modalities(), r.flatten_modalities()),
            Formula::Implies(l, r) => {
                Formula::implies(l.flatten_modalities(), r.flatten_modalities())
            }
            Formula::Forall(v, body) => Formula::forall(v.clone(), body.flatten_modalities()),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.flatten_modalities()),
            Formula::Box(p) => Formula::boxed(p.flatten_modalities()),
            Formula::Act(op, p) => {
                let mut out = p.flatten_modalities();
                for a in op.actions.iter().rev() {
                    out = Formula::act_one(a.clone(), out);
                }
                out
            }
        }
    }

    /// Replaces bound time constants by their rational values and
    /// decides comparisons that become numeric.
    pub fn reduce_times(&self, bindings: &TimeBindings) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|a| a.reduce_times(bindings)).collect(),
            },
            Formula::Cmp(op, lhs, rhs) => {
                let lhs = lhs.reduce(bindings);
                let rhs = rhs.reduce(bindings);
                if lhs.is_numeric() && rhs.is_numeric() {
                    let holds = TimeConstraint::new(&lhs, *op, &rhs)
                        .eval(&TimeBindings::new())
                        .expect("numeric comparison");
                    if holds {
                        Formula::True
                    } else {
                        Formula::False
                    }
                } else {
                    Formula::Cmp(*op, lhs, rhs)
                }
            }
            Formula::Not(p) => Formula::not(p.reduce_times(bindings)),
            Formula::And(l, r) => Formula::and(l.reduce_times(bindings), r.reduce_times(bindings)),
            Formula::Or(l, r) => Formula::or(l.reduce_times(bindings), r.reduce_times(bindings)),
            Formula::Implies(l, r) => {
                Formula::implies(l.reduce_times(bindings), r.reduce_times(bindings))
            }
            Formula::Forall(v, body) => Formula::forall(v.clone(), body.reduce_times(bindings)),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.reduce_times(bindings)),
            Formula::Box(p) => Formula::boxed(p.reduce_times(bindings)),
            Formula::Act(op, p) => {
                let op = ActionOp {
                    actions: op.actions.iter().map(|a| a.reduce_times(bindings)).collect(),
                };
                Formula::act(op, p.reduce_times(bindings))
            }
        }
    }

    /// Propagates `true` / `false` upward. This is a separate pass used
    /// by the grounding pipeline; the renderer never simplifies.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Cmp(..) => {
                self.clone()
            }
            Formula::Not(p) => match p.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                q => Formula::not(q),
            },
            Formula::And(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::True, q) | (q, Formula::True) => q,
                (p, q) => Formula::and(p, q),
            },
            Formula::Or(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::True, _) | (_, Formula::True) => Formula::True,
                (Formula::False, q) | (q, Formula::False) => q,
                (p, q) => Formula::or(p, q),
            },
            Formula::Implies(l, r) => match (l.simplify(), r.simplify()) {
                (Formula::False, _) => Formula::True,
                (_, Formula::True) => Formula::True,
                (Formula::True, q) => q,
                (p, Formula::False) => Formula::not(p),
                (p, q) => Formula::implies(p, q),
            },
            Formula::Forall(v, body) => match body.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                q => Formula::forall(v.clone(), q),
            },
            Formula::Exists(v, body) => match body.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                q => Formula::exists(v.clone(), q),
            },
            Formula::Box(p) => match p.simplify() {
                Formula::True => Formula::True,
                q => Formula::boxed(q),
            },
            Formula::Act(op, p) => Formula::act(op.clone(), p.simplify()),
        }
    }

    fn contains_app(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => false,
            Formula::Atom { args, .. } => args.iter().any(|a| a.contains_app()),
            Formula::Not(p) | Formula::Box(p) => p.contains_app(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.contains_app() || r.contains_app()
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.contains_app(),
            Formula::Act(op, p) => {
                op.actions.iter().any(|a| a.args.iter().any(|t| t.contains_app()))
                    || p.contains_app()
            }
        }
    }

    /// If the formula is a (possibly negated) predicate literal, returns
    /// `(positive, predicate, args)`.
    pub fn as_literal(&self) -> Option<(bool, &str, &[Term])> {
        match self {
            Formula::Atom { pred, args } => Some((true, pred, args)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom { pred, args } => Some((false, pred, args)),
                _ => None,
            },
            _ => None,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(..)
            | Formula::Box(..)
            | Formula::Act(..)
            | Formula::Forall(..)
            | Formula::Exists(..) => 4,
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
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom { pred, args } => write_applied(f, pred, args),
            Formula::Cmp(op, lhs, rhs) => write!(f, "{} {} {}", lhs, op, rhs),
            Formula::Not(p) => {
                f.write_str("~")?;
                p.fmt_prec(f, 4)
            }
            Formula::And(l, r) => {
                l.fmt_prec(f, 3)?;
                f.write_str(" /\\ ")?;
                r.fmt_prec(f, 4)
            }
            Formula::Or(l, r) => {
                l.fmt_prec(f, 2)?;
                f.write_str(" \\/ ")?;
                r.fmt_prec(f, 3)
            }
            Formula::Implies(l, r) => {
                l.fmt_prec(f, 2)?;
                f.write_str(" -> ")?;
                r.fmt_prec(f, 1)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                f.write_str(if matches!(self, Formula::Forall(..)) {
                    "forall "
                } else {
                    "exists "
                })?;
                f.write_str(&v.name)?;
                if infer_binder_sort(body, &v.name).is_none() {
                    write!(f, " : {}", v.sort)?;
                }
                f.write_str(" ")?;
                body.fmt_prec(f, 4)
            }
            Formula::Box(p) => {
                f.write_str("box ")?;
                p.fmt_prec(f, 4)
            }
            Formula::Act(op, p) => {
                write!(f, "[{}] ", op)?;
                p.fmt_prec(f, 4)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Canonical text of a formula; `parse_formula` of the result restores
/// the identical tree.
pub fn render(phi: &Formula) -> String {
    phi.to_string()
}

/// Sort a binder occurrence would be inferred with when reparsing, used
/// by the renderer to decide whether an annotation is required.
pub(crate) fn infer_binder_sort(body: &Formula, name: &str) -> Option<Sort> {
    body.free_vars().into_iter().find(|v| v.name == name).map(|v| v.sort)
}

/// Expands quantifiers over finite domains: object variables over the
/// signature's object constants, time variables over `time_domain`.
/// The result of grounding a closed formula is grounded and
/// quantifier-free.
pub fn ground(
    phi: &Formula,
    sig: &Signature,
    time_domain: &[TimeExpr],
) -> Result<Formula, SyntaxError> {
    if phi.contains_app() {
        return Err(SyntaxError::NonExecutable(phi.to_string()));
    }
    ground_rec(phi, sig, time_domain)
}

fn ground_rec(
    phi: &Formula,
    sig: &Signature,
    time_domain: &[TimeExpr],
) -> Result<Formula, SyntaxError> {
    Ok(match phi {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Cmp(..) => phi.clone(),
        Formula::Not(p) => Formula::not(ground_rec(p, sig, time_domain)?),
        Formula::And(l, r) => {
            Formula::and(ground_rec(l, sig, time_domain)?, ground_rec(r, sig, time_domain)?)
        }
        Formula::Or(l, r) => {
            Formula::or(ground_rec(l, sig, time_domain)?, ground_rec(r, sig, time_domain)?)
        }
        Formula::Implies(l, r) => {
            Formula::implies(ground_rec(l, sig, time_domain)?, ground_rec(r, sig, time_domain)?)
        }
        Formula::Box(p) => Formula::boxed(ground_rec(p, sig, time_domain)?),
        Formula::Act(op, p) => Formula::act(op.clone(), ground_rec(p, sig, time_domain)?),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let conjunctive = matches!(phi, Formula::Forall(..));
            let values: Vec<Term> = match v.sort {
                Sort::Object => sig.object_consts.iter().map(|c| Term::Const(c.clone())).collect(),
                Sort::Time => time_domain.iter().map(|t| Term::Time(t.clone())).collect(),
            };
            if values.is_empty() {
                return Err(SyntaxError::EmptyDomain { sort: v.sort });
            }
            let mut parts = Vec::with_capacity(values.len());
            for value in &values {
                let inst = body.instantiate(v, value)?;
                parts.push(ground_rec(&inst, sig, time_domain)?);
            }
            let mut out = parts.remove(0);
            for p in parts {
                out = if conjunctive { Formula::and(out, p) } else { Formula::or(out, p) };
            }
            out
        }
    })
}

/// Declared vocabulary. Predicate and action namespaces are disjoint;
/// the object-constant list doubles as the quantification domain and
/// must be nonempty for grounding and enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub object_consts: Vec<String>,
    pub time_consts: Vec<String>,
    pub predicates: BTreeMap<String, Vec<Sort>>,
    pub actions: BTreeMap<String, Vec<Sort>>,
    pub functions: BTreeMap<String, Vec<Sort>>,
}

impl Signature {
    pub fn is_object_const(&self, name: &str) -> bool {
        self.object_consts.iter().any(|c| c == name)
    }

    pub fn is_time_const(&self, name: &str) -> bool {
        self.time_consts.iter().any(|c| c == name)
    }

    fn name_free(&self, name: &str) -> bool {
        !self.is_object_const(name)
            && !self.is_time_const(name)
            && !self.predicates.contains_key(name)
            && !self.actions.contains_key(name)
            && !self.functions.contains_key(name)
    }

    pub fn add_object_const(&mut self, name: impl Into<String>) -> Result<(), SyntaxError> {
        let name = name.into();
        if !self.name_free(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.object_consts.push(name);
        Ok(())
    }

    pub fn add_time_const(&mut self, name: impl Into<String>) -> Result<(), SyntaxError> {
        let name = name.into();
        if !self.name_free(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.time_consts.push(name);
        Ok(())
    }

    pub fn add_predicate(
        &mut self,
        name: impl Into<String>,
        sorts: Vec<Sort>,
    ) -> Result<(), SyntaxError> {
        let name = name.into();
        if !self.name_free(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.predicates.insert(name, sorts);
        Ok(())
    }

    pub fn add_action(
        &mut self,
        name: impl Into<String>,
        sorts: Vec<Sort>,
    ) -> Result<(), SyntaxError> {
        let name = name.into();
        if !self.name_free(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.actions.insert(name, sorts);
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        sorts: Vec<Sort>,
    ) -> Result<(), SyntaxError> {
        let name = name.into();
        if !self.name_free(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        if sorts.iter().any(|s| *s != Sort::Object) {
            return Err(SyntaxError::Signature(format!(
                "function `{}` must take object arguments",
                name
            )));
        }
        self.functions.insert(name, sorts);
        Ok(())
    }

    /// A quantifiable signature needs at least one object constant.
    pub fn validate(&self) -> Result<(), SyntaxError> {
        if self.object_consts.is_empty() {
            return Err(SyntaxError::Signature(
                "the object-constant set must be nonempty".into(),
            ));
        }
        Ok(())
    }

    fn check_term(&self, term: &Term, expected: Sort) -> Result<(), SyntaxError> {
        match term {
            Term::Var(_) => {
                if expected != Sort::Object {
                    return Err(SyntaxError::Sort(format!(
                        "object variable used in a {} position",
                        expected
                    )));
                }
            }
            Term::Const(c) => {
                if !self.is_object_const(c) {
                    return Err(SyntaxError::Undeclared(c.clone()));
                }
                if expected != Sort::Object {
                    return Err(SyntaxError::Sort(format!(
                        "object constant `{}` used in a time position",
                        c
                    )));
                }
            }
            Term::App(f, args) => {
                let sorts = self
                    .functions
                    .get(f)
                    .ok_or_else(|| SyntaxError::Undeclared(f.clone()))?;
                if sorts.len() != args.len() {
                    return Err(SyntaxError::Arity {
                        symbol: f.clone(),
                        expected: sorts.len(),
                        got: args.len(),
                    });
                }
                if expected != Sort::Object {
                    return Err(SyntaxError::Sort(format!(
                        "function `{}` used in a time position",
                        f
                    )));
                }
                for (a, s) in args.iter().zip(sorts.clone()) {
                    self.check_term(a, s)?;
                }
            }
            Term::Time(te) => {
                if expected != Sort::Time {
                    return Err(SyntaxError::Sort(
                        "time expression used in an object position".into(),
                    ));
                }
                for (atom, _) in te.atoms() {
                    if let crate::temporal::TimeAtom::Const(c) = atom {
                        if !self.is_time_const(c) {
                            return Err(SyntaxError::Undeclared(c.clone()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_action_term(&self, a: &ActionTerm) -> Result<(), SyntaxError> {
        let sorts = self
            .actions
            .get(&a.symbol)
            .ok_or_else(|| SyntaxError::Undeclared(a.symbol.clone()))?;
        if sorts.len() != a.args.len() {
            return Err(SyntaxError::Arity {
                symbol: a.symbol.clone(),
                expected: sorts.len(),
                got: a.args.len(),
            });
        }
        for (t, s) in a.args.iter().zip(sorts.clone()) {
            self.check_term(t, s)?;
        }
        Ok(())
    }

    /// Checks that every symbol of the formula is declared with the
    /// right arity and argument sorts.
    pub fn check_formula(&self, phi: &Formula) -> Result<(), SyntaxError> {
        match phi {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom { pred, args } => {
                let sorts = self
                    .predicates
                    .get(pred)
                    .ok_or_else(|| SyntaxError::Undeclared(pred.clone()))?;
                if sorts.len() != args.len() {
                    return Err(SyntaxError::Arity {
                        symbol: pred.clone(),
                        expected: sorts.len(),
                        got: args.len(),
                    });
                }
                for (t, s) in args.iter().zip(sorts.clone()) {
                    self.check_term(t, s)?;
                }
                Ok(())
            }
            Formula::Cmp(_, lhs, rhs) => {
                self.check_term(&Term::Time(lhs.clone()), Sort::Time)?;
                self.check_term(&Term::Time(rhs.clone()), Sort::Time)
            }
            Formula::Not(p) | Formula::Box(p) => self.check_formula(p),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                self.check_formula(l)?;
                self.check_formula(r)
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => self.check_formula(body),
            Formula::Act(op, p) => {
                for a in &op.actions {
                    self.check_action_term(a)?;
                }
                self.check_formula(p)
            }
        }
    }
}

/// One `case` block of a scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CaseDecl {
    pub name: String,
    pub constraints: Vec<TimeConstraint>,
    pub bindings: TimeBindings,
    pub queries: Vec<Formula>,
}

/// Parsed theory / scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TheoryFile {
    pub sig: Signature,
    pub axioms: Vec<Formula>,
    pub laws: Vec<Formula>,
    pub facts: Vec<Formula>,
    pub occurrences: Vec<ActionTerm>,
    pub fluents: Vec<String>,
    pub constraints: Vec<TimeConstraint>,
    pub bindings: TimeBindings,
    pub cases: Vec<CaseDecl>,
}

impl TheoryFile {
    /// Canonical text of the whole file: declarations first, then
    /// statements grouped by kind, one per line. Rendering then
    /// reparsing yields the same file, so a second render is
    /// byte-stable.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut push = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        if !self.sig.object_consts.is_empty() {
            push(format!("const {} : object", self.sig.object_consts.join(", ")));
        }
        if !self.sig.time_consts.is_empty() {
            push(format!("const {} : time", self.sig.time_consts.join(", ")));
        }
        for (name, sorts) in &self.sig.predicates {
            push(format!("pred {}{}", name, render_sorts(sorts)));
        }
        for (name, sorts) in &self.sig.actions {
            push(format!("action {}{}", name, render_sorts(sorts)));
        }
        for (name, sorts) in &self.sig.functions {
            push(format!("func {}{}", name, render_sorts(sorts)));
        }
        for f in &self.fluents {
            push(format!("fluent {}", f));
        }
        for a in &self.axioms {
            push(format!("axiom {}", a));
        }
        for l in &self.laws {
            push(format!("law {}", l));
        }
        for fct in &self.facts {
            push(format!("fact {}", fct));
        }
        for o in &self.occurrences {
            push(format!("occurs {}", o));
        }
        for c in &self.constraints {
            push(format!("constraint {}", c));
        }
        for (name, value) in &self.bindings {
            push(format!("bind {} = {}", name, crate::temporal::format_rat(value)));
        }
        for case in &self.cases {
            push(format!("case {} {{", case.name));
            for c in &case.constraints {
                push(format!("  constraint {}", c));
            }
            for (name, value) in &case.bindings {
                push(format!("  bind {} = {}", name, crate::temporal::format_rat(value)));
            }
            for q in &case.queries {
                push(format!("  query {}", q));
            }
            push("}".into());
        }
        out
    }
}

fn render_sorts(sorts: &[Sort]) -> String {
    if sorts.is_empty() {
        String::new()
    } else {
        format!("({})", sorts.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))
    }
}
