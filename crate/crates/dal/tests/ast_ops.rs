//! Substitution, free-variable, and modality-flattening behavior on
//! concrete formulas. The randomized suite in `invariants.rs` checks
//! the algebraic laws; these pin the documented corner cases.

use dal::syntax::{parse_formula, Formula, ParseOptions, Signature, Sort, SyntaxError, Term, Var};

fn sig() -> Signature {
    let mut s = Signature::default();
    for c in ["c", "c1", "c2", "c3"] {
        s.add_object_const(c).unwrap();
    }
    s.add_predicate("P", vec![Sort::Object, Sort::Object]).unwrap();
    s.add_predicate("Q", vec![Sort::Object]).unwrap();
    s.add_predicate("S", vec![Sort::Object]).unwrap();
    s.add_action("a", vec![Sort::Object, Sort::Object]).unwrap();
    s.add_action("a1", vec![]).unwrap();
    s.add_action("a2", vec![]).unwrap();
    s.add_action("a3", vec![Sort::Object, Sort::Object]).unwrap();
    s.add_action("m", vec![Sort::Object, Sort::Object, Sort::Object]).unwrap();
    s
}

fn f(text: &str) -> Formula {
    let mut s = sig();
    parse_formula(text, &mut s, ParseOptions::free()).unwrap()
}

fn obj(name: &str) -> Term {
    Term::Const(name.into())
}

#[test]
fn substitution_reaches_action_arguments() {
    let phi = f("[a(x,c)] (~P(c,x) \\/ Q(x))");
    let got = phi.instantiate(&Var::object("x"), &obj("c1")).unwrap();
    assert_eq!(got, f("[a(c1,c)] (~P(c,c1) \\/ Q(c1))"));
}

#[test]
fn substitution_reaches_every_action_in_a_sequence() {
    let phi = f("[a1;a2;a3(c,y)] P(c,y)");
    let got = phi.instantiate(&Var::object("y"), &obj("c3")).unwrap();
    assert_eq!(got, f("[a1;a2;a3(c,c3)] P(c,c3)"));
}

#[test]
fn bound_occurrences_are_untouched() {
    let phi = f("forall x S(x)");
    let got = phi.instantiate(&Var::object("x"), &obj("c")).unwrap();
    assert_eq!(got, phi);
}

#[test]
fn substitution_respects_sorts() {
    let phi = f("S(x)");
    let err = phi
        .instantiate(&Var::object("x"), &Term::time_const("t"))
        .unwrap_err();
    assert!(matches!(err, SyntaxError::Sort(_)), "got {err:?}");
}

#[test]
fn capture_is_reported_not_renamed() {
    let phi = f("forall x P(x,y)");
    let err = phi
        .instantiate(&Var::object("y"), &Term::Var("x".into()))
        .unwrap_err();
    assert!(
        matches!(err, SyntaxError::Capture { ref var, ref bound } if var == "y" && bound == "x"),
        "got {err:?}"
    );
}

#[test]
fn free_variables_include_action_arguments() {
    let phi = f("[m(x,c2,y)] Q(y)");
    let vars: Vec<Var> = phi.free_vars().into_iter().collect();
    assert_eq!(vars, vec![Var::object("x"), Var::object("y")]);
}

#[test]
fn grounded_formulas_have_no_free_variables() {
    let phi = f("[m(c1,c2,c3)] Q(c1)");
    assert!(phi.free_vars().is_empty());
    assert!(phi.is_grounded());
}

#[test]
fn binders_hide_their_variable() {
    let phi = f("forall x P(x,y)");
    let vars: Vec<Var> = phi.free_vars().into_iter().collect();
    assert_eq!(vars, vec![Var::object("y")]);
}

#[test]
fn substitution_removes_exactly_the_substituted_variable() {
    let phi = f("[m(x,c2,y)] Q(y)");
    let before = phi.free_vars();
    let after = phi
        .instantiate(&Var::object("x"), &obj("c1"))
        .unwrap()
        .free_vars();
    let mut expected = before.clone();
    expected.remove(&Var::object("x"));
    assert_eq!(after, expected);
}

#[test]
fn sequences_flatten_to_nested_unary_modalities() {
    assert_eq!(f("[a1;a2] Q(c1)").flatten_modalities(), f("[a1][a2] Q(c1)"));
    assert_eq!(f("[] Q(c1)").flatten_modalities(), f("Q(c1)"));
    let flat = f("[a1] Q(c1)");
    assert_eq!(flat.flatten_modalities(), flat);
}

#[test]
fn flattening_preserves_free_variables() {
    let phi = f("[a1;a3(c,y)] P(c,y)");
    assert_eq!(phi.flatten_modalities().free_vars(), phi.free_vars());
    assert!(f("[m(c1,c2,c3);a1] Q(c1)").flatten_modalities().is_grounded());
}
