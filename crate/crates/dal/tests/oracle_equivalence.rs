//! Full-corpus agreement between the tableau and the bounded
//! exhaustive search, plus soundness of the axiom schemata over an
//! enumerated model space.

use dal::corpus::{compare_corpus, corpus_signature, generate_corpus, summarize, CorpusSpec};
use dal::semantics::{enumerate_models, valid_in_model, Bounds};
use dal::syntax::{parse_formula, ParseOptions, Signature, Sort};
use dal::tableau::ProverConfig;

#[test]
fn corpus_verdicts_agree() {
    let corpus = generate_corpus(CorpusSpec::default());
    assert!(corpus.len() >= 500);
    let sig = corpus_signature();
    let records =
        compare_corpus(&corpus, &sig, &Bounds::default(), &ProverConfig::default()).unwrap();
    assert_eq!(records.len(), corpus.len());
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.index, i, "records come back in corpus order");
    }
    let summary = summarize(&records);
    let bad: Vec<_> = records.iter().filter(|r| !r.agree).collect();
    assert_eq!(summary.disagreements, 0, "{:?}", bad);
    assert_eq!(summary.witness_failures, 0);
    assert!(summary.sat >= 100, "{:?}", summary);
    assert!(summary.unsat >= 30, "{:?}", summary);
}

/// Every enumerated model over a small signature satisfies the axiom
/// schemata at every world, whatever formulas instantiate them.
#[test]
fn axiom_schemata_hold_in_every_model() {
    let mut sig = Signature::default();
    sig.add_object_const("c1").unwrap();
    sig.add_object_const("c2").unwrap();
    sig.add_predicate("P", vec![]).unwrap();
    sig.add_predicate("S", vec![Sort::Object]).unwrap();
    sig.add_action("a", vec![]).unwrap();

    let instances = [
        // K and duality for the action modality.
        "[a](P -> S(c1)) -> ([a]P -> [a]S(c1))",
        "[a](P /\\ S(c1)) -> ([a]P /\\ [a]S(c1))",
        "~<a>P -> [a]~P",
        // Reflexivity and transitivity of the box.
        "box P -> P",
        "box P -> box box P",
        "box (P -> S(c2)) -> (box P -> box S(c2))",
        // Inclusion of action transitions in R.
        "box P -> [a]P",
        "box S(c1) -> [a](S(c1) \\/ P)",
        // Quantifier exchange over the finite domain.
        "(forall x S(x)) -> S(c1)",
        "S(c2) -> (exists x S(x))",
    ];
    let parsed: Vec<_> = instances
        .iter()
        .map(|s| {
            let mut scratch = sig.clone();
            parse_formula(s, &mut scratch, ParseOptions::free()).unwrap()
        })
        .collect();

    let bounds = Bounds { max_worlds: 3, max_domain: 2, cap: 40_000_000 };
    let mut checked = 0usize;
    for model in enumerate_models(&sig, &bounds).unwrap() {
        for phi in &parsed {
            assert!(
                valid_in_model(&model, phi).unwrap(),
                "axiom instance fails: {}\n{}",
                phi,
                dal::semantics::render_model(&model)
            );
        }
        checked += 1;
    }
    assert!(checked > 1000, "enumeration covered {} models", checked);
}
