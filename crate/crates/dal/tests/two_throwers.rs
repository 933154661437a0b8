//! The bundled two-thrower scenario, end to end: numbering, defeats,
//! and the derivations each case supports.

use dal::scenario::{render_report, Scenario};
use dal::syntax::parse_theory;

fn bundled(name: &str) -> Scenario {
    let path = format!("{}/../../scenarios/{}", env!("CARGO_MANIFEST_DIR"), name);
    let text = std::fs::read_to_string(&path).unwrap();
    Scenario::from_theory(&parse_theory(&text).unwrap()).unwrap()
}

#[test]
fn first_hit_wins() {
    let s = bundled("suzy_billy.dal");
    let run = s.prepare_named("case1", &[]).unwrap();

    assert_eq!(
        run.instances_display,
        ["(8) box (BB(ds+d1) -> BB(t1+db))  [from (3) and (7)]"],
        "one constraint-backed persistence instance"
    );
    assert_eq!(
        run.assumptions_display,
        ["(9) ~BB(ds)  [persistency from (4)]"],
        "only the pre-hit instant stays unbroken"
    );

    let results = run.run_declared().unwrap();
    let derived: Vec<bool> = results.iter().map(|d| d.derived).collect();
    assert_eq!(derived, [true, true, true, true, false]);

    let hit = &results[1];
    let text = hit.trace.join("\n");
    assert!(text.contains("MP, from (1) and (9)"), "{}", text);

    let believed = &results[3];
    let text = believed.trace.join("\n");
    assert!(text.contains("K for the action modality and (A2)"), "{}", text);
    assert!(text.contains("from (3) and (7)"), "{}", text);

    assert!(results[4].countermodel.is_some(), "the failed hit needs a witness");
}

#[test]
fn second_thrower_is_preempted() {
    let s = bundled("suzy_billy.dal");
    let run = s.prepare_named("case2", &[]).unwrap();
    assert_eq!(
        run.assumptions_display,
        [
            "(9) ~BB(t1)  [persistency from (4)]",
            "(10) ~BB(t1+db)  [persistency from (4)]",
        ],
    );
    let results = run.run_declared().unwrap();
    let derived: Vec<bool> = results.iter().map(|d| d.derived).collect();
    assert_eq!(derived, [true, true, true, true, false]);
}

#[test]
fn simultaneous_hits_share_the_instant() {
    let s = bundled("suzy_billy.dal");
    let run = s.prepare_named("case3", &[]).unwrap();
    assert!(run.instances_display.is_empty(), "{:?}", run.instances_display);
    let results = run.run_declared().unwrap();
    assert!(results.iter().all(|d| d.derived), "both throws connect");
}

#[test]
fn lone_thrower_connects() {
    let s = bundled("billy_only.dal");
    let run = s.prepare_named("solo", &[]).unwrap();
    let results = run.run_declared().unwrap();
    assert!(results[0].derived, "nothing preempts the only throw");
}

#[test]
fn report_renders_every_case() {
    let s = bundled("suzy_billy.dal");
    let report = s.run_all_cases().unwrap();
    let text = render_report(&report);
    println!("{}", text);
    for case in ["case1", "case2", "case3"] {
        assert!(text.contains(&format!("case {}", case)));
    }
    assert!(!text.contains("(skipped)"));
}
