//! Seeded formula corpora and the prover-versus-search comparison.
//!
//! The corpus generator draws small grounded formulas over a fixed
//! signature: two object constants, three predicates, two nullary
//! actions. Shapes are capped so that every satisfiable draw has a
//! model within the search bounds: modal depth at most two and at most
//! three diamonds per formula, so a witness never needs more than four
//! worlds. One draw in eight is an unsatisfiable template (a direct
//! contradiction, or the negation of a T, 4, or inclusion instance),
//! keeping both verdicts represented.
//!
//! [`compare_corpus`] decides every formula twice: with the tableau
//! and with the bounded exhaustive search. With the `parallel`
//! feature the corpus shards across threads; records come back in
//! corpus order either way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::semantics::{eval, find_model, validate_model, Bounds, SemanticsError, World};
use crate::syntax::{ActionTerm, Formula, Signature, Sort, Term, Var};
use crate::tableau::{check_sat, Premise, ProveError, ProverConfig, Verdict};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Prove(#[from] ProveError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// The fixed comparison signature: objects c1, c2; nullary P and Q;
/// unary S; nullary actions a and b.
pub fn corpus_signature() -> Signature {
    let mut sig = Signature::default();
    sig.add_object_const("c1").unwrap();
    sig.add_object_const("c2").unwrap();
    sig.add_predicate("P", vec![]).unwrap();
    sig.add_predicate("Q", vec![]).unwrap();
    sig.add_predicate("S", vec![Sort::Object]).unwrap();
    sig.add_action("a", vec![]).unwrap();
    sig.add_action("b", vec![]).unwrap();
    sig
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { seed: 0, count: 500 }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    /// Diamonds left for the current draw; keeps witnesses small.
    diamonds: usize,
}

impl Gen {
    fn atom(&mut self) -> Formula {
        match self.rng.gen_range(0..6) {
            0 => Formula::atom("P", vec![]),
            1 => Formula::atom("Q", vec![]),
            2 => Formula::atom("S", vec![Term::Const("c1".into())]),
            3 => Formula::atom("S", vec![Term::Const("c2".into())]),
            4 => {
                let v = Var::object("x");
                let body = Formula::atom("S", vec![Term::Var("x".into())]);
                if self.rng.gen_bool(0.5) {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
            _ => {
                if self.rng.gen_bool(0.5) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        }
    }

    fn action(&mut self) -> ActionTerm {
        let symbol = if self.rng.gen_bool(0.5) { "a" } else { "b" };
        ActionTerm::new(symbol, vec![])
    }

    fn formula(&mut self, size: usize, modal: usize) -> Formula {
        if size == 0 {
            return self.atom();
        }
        let modal_ok = modal > 0;
        match self.rng.gen_range(0..10) {
            0 | 1 => self.atom(),
            2 => Formula::not(self.formula(size - 1, modal)),
            3 => {
                let l = self.formula(size / 2, modal);
                let r = self.formula(size / 2, modal);
                Formula::and(l, r)
            }
            4 => {
                let l = self.formula(size / 2, modal);
                let r = self.formula(size / 2, modal);
                Formula::or(l, r)
            }
            5 => {
                let l = self.formula(size / 2, modal);
                let r = self.formula(size / 2, modal);
                Formula::implies(l, r)
            }
            6 if modal_ok => Formula::boxed(self.formula(size - 1, modal - 1)),
            7 if modal_ok => {
                let act = self.action();
                Formula::act_one(act, self.formula(size - 1, modal - 1))
            }
            8 if modal_ok && self.diamonds > 0 => {
                self.diamonds -= 1;
                Formula::dia(self.formula(size - 1, modal - 1))
            }
            9 if modal_ok && self.diamonds > 0 => {
                self.diamonds -= 1;
                let act = self.action();
                Formula::dia_act_one(act, self.formula(size - 1, modal - 1))
            }
            _ => self.atom(),
        }
    }

    /// Shapes that are unsatisfiable whatever the subformulas: a direct
    /// contradiction, an executable action with an empty result, a
    /// reflexivity violation, an inclusion violation, a distribution
    /// violation. The subformulas stay propositional; the modal content
    /// comes from the template, and the search refutes each instance
    /// quickly.
    fn unsat_template(&mut self) -> Formula {
        let phi = self.formula(2, 0);
        match self.rng.gen_range(0..5) {
            0 => Formula::and(phi.clone(), Formula::not(phi)),
            1 => {
                let act = self.action();
                Formula::and(
                    Formula::dia_act_one(act.clone(), Formula::True),
                    Formula::act_one(act, Formula::False),
                )
            }
            2 => Formula::and(Formula::boxed(phi.clone()), Formula::not(phi)),
            3 => {
                let act = self.action();
                Formula::and(
                    Formula::boxed(phi.clone()),
                    Formula::dia_act_one(act, Formula::not(phi)),
                )
            }
            _ => {
                let psi = self.formula(1, 0);
                let act = self.action();
                Formula::and(
                    Formula::and(
                        Formula::act_one(act.clone(), Formula::implies(phi.clone(), psi.clone())),
                        Formula::act_one(act.clone(), phi),
                    ),
                    Formula::dia_act_one(act, Formula::not(psi)),
                )
            }
        }
    }

    fn draw(&mut self) -> Formula {
        self.diamonds = 3;
        if self.rng.gen_range(0..8) == 0 {
            self.unsat_template()
        } else {
            self.formula(6, 2)
        }
    }
}

/// Draws `spec.count` formulas; the same spec always yields the same
/// corpus.
pub fn generate_corpus(spec: CorpusSpec) -> Vec<Formula> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(spec.seed), diamonds: 0 };
    (0..spec.count).map(|_| g.draw()).collect()
}

/// One formula, both verdicts. `witness_ok` is set for prover-SAT
/// records: the countermodel re-checked by direct evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRecord {
    pub index: usize,
    pub formula: String,
    pub prover_sat: bool,
    pub oracle_sat: bool,
    pub agree: bool,
    pub witness_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub total: usize,
    pub sat: usize,
    pub unsat: usize,
    pub disagreements: usize,
    pub witness_failures: usize,
}

pub fn summarize(records: &[CompareRecord]) -> CompareSummary {
    CompareSummary {
        total: records.len(),
        sat: records.iter().filter(|r| r.prover_sat).count(),
        unsat: records.iter().filter(|r| !r.prover_sat).count(),
        disagreements: records.iter().filter(|r| !r.agree).count(),
        witness_failures: records.iter().filter(|r| r.witness_ok == Some(false)).count(),
    }
}

/// Runs the tableau and the bounded search over every formula,
/// sharding across threads when the `parallel` feature is on. Records
/// are returned in corpus order regardless.
pub fn compare_corpus(
    formulas: &[Formula],
    sig: &Signature,
    bounds: &Bounds,
    cfg: &ProverConfig,
) -> Result<Vec<CompareRecord>, CorpusError> {
    let indexed: Vec<(usize, Formula)> =
        formulas.iter().cloned().enumerate().collect();
    let results = par::map(indexed, |(index, phi)| -> Result<CompareRecord, CorpusError> {
        let premise = Premise::local(phi.clone(), "formula");
        let proved = check_sat(&[premise], sig, cfg)?;
        let prover_sat = proved.verdict == Verdict::Sat;
        let oracle_sat = find_model(sig, bounds, &phi)?.is_some();
        let witness_ok = match (prover_sat, &proved.countermodel) {
            (true, Some(m)) => {
                Some(validate_model(m).is_empty() && eval(m, World(0), &phi)? == true)
            }
            (true, None) => Some(false),
            _ => None,
        };
        Ok(CompareRecord {
            index,
            formula: phi.to_string(),
            prover_sat,
            oracle_sat,
            agree: prover_sat == oracle_sat,
            witness_ok,
        })
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modal_depth(phi: &Formula) -> usize {
        match phi {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Cmp(..) => 0,
            Formula::Not(p) => modal_depth(p),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                modal_depth(l).max(modal_depth(r))
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => modal_depth(b),
            Formula::Box(p) | Formula::Act(_, p) => 1 + modal_depth(p),
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = generate_corpus(CorpusSpec::default());
        let b = generate_corpus(CorpusSpec::default());
        assert_eq!(a, b);
        let c = generate_corpus(CorpusSpec { seed: 1, ..CorpusSpec::default() });
        assert_ne!(a, c);
    }

    #[test]
    fn corpus_respects_caps() {
        let corpus = generate_corpus(CorpusSpec::default());
        assert_eq!(corpus.len(), 500);
        for phi in &corpus {
            assert!(phi.free_vars().is_empty(), "{}", phi);
            assert!(modal_depth(phi) <= 2, "{}", phi);
        }
    }

    #[test]
    fn sample_comparison_agrees() {
        let corpus = generate_corpus(CorpusSpec { seed: 7, count: 60 });
        let sig = corpus_signature();
        let records =
            compare_corpus(&corpus, &sig, &Bounds::default(), &ProverConfig::default())
                .unwrap();
        let summary = summarize(&records);
        assert_eq!(summary.disagreements, 0, "{:?}", records.iter().filter(|r| !r.agree).collect::<Vec<_>>());
        assert_eq!(summary.witness_failures, 0);
        assert!(summary.sat > 0 && summary.unsat > 0, "{:?}", summary);
    }

    #[test]
    fn templates_are_unsat() {
        let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(11), diamonds: 3 };
        let sig = corpus_signature();
        let cfg = ProverConfig::default();
        for _ in 0..20 {
            g.diamonds = 3;
            let phi = g.unsat_template();
            let premise = Premise::local(phi.clone(), "formula");
            let res = check_sat(&[premise], &sig, &cfg).unwrap();
            assert_eq!(res.verdict, Verdict::Unsat, "{}", phi);
        }
    }
}
