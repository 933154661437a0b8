//! The temporal layer end to end: parametric motion laws, time
//! homomorphisms, and the reachability order staying inside R.

use std::collections::BTreeMap;

use dal::semantics::{enumerate_models, Bounds};
use dal::syntax::{parse_model_file, render, ActionTerm, Formula, Signature, Sort, Term, Var};
use dal::temporal::{
    check_time_homomorphism, rat_int, reach_order, ActionLaw, TemporalError, TimeExpr,
};

fn time_term(n: i64) -> Term {
    Term::Time(TimeExpr::from_rat(rat_int(n)))
}

#[test]
fn motion_law_instantiates_to_the_train_formula() {
    let t = TimeExpr::variable("t");
    let d = TimeExpr::variable("d");
    let law = ActionLaw::new(
        Formula::atom(
            "at",
            vec![Term::Time(t.clone()), Term::Var("x".into()), Term::Var("l".into())],
        ),
        ActionTerm::new(
            "move",
            vec![
                Term::Time(t.clone()),
                Term::Time(d.clone()),
                Term::Var("x".into()),
                Term::Var("l".into()),
                Term::Var("l2".into()),
            ],
        ),
        Formula::atom(
            "at",
            vec![Term::Time(t.add(&d)), Term::Var("x".into()), Term::Var("l2".into())],
        ),
    )
    .unwrap();

    assert_eq!(render(&law.formula()), "at(t,x,l) -> [move(t,d,x,l,l2)] at(t+d,x,l2)");

    let mut values: BTreeMap<String, Term> = BTreeMap::new();
    values.insert("t".into(), time_term(6));
    values.insert("d".into(), time_term(3));
    values.insert("x".into(), Term::Const("TGV".into()));
    values.insert("l".into(), Term::Const("Marseille".into()));
    values.insert("l2".into(), Term::Const("Paris".into()));
    let inst = law.instantiate(&values).unwrap();
    assert_eq!(
        render(&inst),
        "at(6,TGV,Marseille) -> [move(6,3,TGV,Marseille,Paris)] at(9,TGV,Paris)"
    );

    let mut missing = values.clone();
    missing.remove("l2");
    assert!(matches!(
        law.instantiate(&missing),
        Err(TemporalError::MissingBinding(v)) if v == "l2"
    ));
}

const CHAIN: &str = "\
const c1 : object
pred P(object)
action a(object)
world w0, w1, w2
time w0 = 0
time w1 = 1
time w2 = 2
rel R: w0 -> w0
rel R: w0 -> w1
rel R: w0 -> w2
rel R: w1 -> w1
rel R: w1 -> w2
rel R: w2 -> w2
act a(c1): w0 -> {w1}
act a(c1): w1 -> {w2}
";

#[test]
fn stamped_chain_is_a_homomorphism() {
    let (_, model) = parse_model_file(CHAIN).unwrap();
    check_time_homomorphism(&model).unwrap();
}

#[test]
fn decreasing_stamp_is_rejected() {
    let planted = CHAIN.replace("time w2 = 2", "time w2 = 1/2");
    let (_, model) = parse_model_file(&planted).unwrap();
    match check_time_homomorphism(&model) {
        Err(TemporalError::NotMonotone(a, b)) => {
            assert!(model.stamps[&a] > model.stamps[&b]);
        }
        other => panic!("expected a monotonicity failure, got {:?}", other),
    }
}

#[test]
fn unstamped_world_is_rejected() {
    let gap = CHAIN.replace("time w1 = 1\n", "");
    let (_, model) = parse_model_file(&gap).unwrap();
    assert!(matches!(
        check_time_homomorphism(&model),
        Err(TemporalError::MissingStamp(_))
    ));
}

#[test]
fn reachability_stays_inside_r_across_the_enumeration() {
    let mut sig = Signature::default();
    sig.add_object_const("c1").unwrap();
    sig.add_object_const("c2").unwrap();
    sig.add_predicate("P", vec![]).unwrap();
    sig.add_predicate("S", vec![Sort::Object]).unwrap();
    sig.add_action("a", vec![]).unwrap();

    let bounds = Bounds { max_worlds: 3, max_domain: 2, cap: 40_000_000 };
    let mut checked = 0usize;
    for model in enumerate_models(&sig, &bounds).unwrap() {
        let reach = reach_order(&model);
        assert!(
            reach.is_subset(&model.rel),
            "reachability escapes R:\n{}",
            dal::semantics::render_model(&model)
        );
        checked += 1;
    }
    assert!(checked > 1000, "enumeration covered {} models", checked);
}
