//! Command-line contract: exit codes, byte-stable rendering, the
//! structured output schema, and flag/env precedence.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn repo(path: &str) -> String {
    format!("{}/../../{}", env!("CARGO_MANIFEST_DIR"), path)
}

fn dal(args: &[&str]) -> (i32, String, String) {
    dal_env(args, &[])
}

fn dal_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dal"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn dal");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scratch(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("dal-cli-test-{}-{}", std::process::id(), name));
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn rendering_twice_is_byte_stable_for_every_shipped_file() {
    for (i, file) in [
        "theories/axioms.dal",
        "models/remark1.dal",
        "scenarios/suzy_billy.dal",
        "scenarios/billy_only.dal",
    ]
    .iter()
    .enumerate()
    {
        let (code, first, err) = dal(&["render", &repo(file)]);
        assert_eq!(code, 0, "{}: {}", file, err);
        let tmp = scratch(&format!("roundtrip-{}", i), &first);
        let (code, second, err) = dal(&["render", tmp.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {}", file, err);
        assert_eq!(first, second, "{} drifted on the second render", file);
        fs::remove_file(tmp).ok();
    }
}

#[test]
fn input_problems_exit_two() {
    // Unreadable file.
    let (code, _, err) = dal(&["parse", "no/such/file.dal"]);
    assert_eq!(code, 2);
    assert!(err.contains("no/such/file.dal"), "stderr: {}", err);

    // Malformed theory.
    let bad = scratch("garbage", "law P ->\n");
    let (code, _, _) = dal(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    fs::remove_file(bad).ok();

    // Unparseable binding.
    let (code, _, err) = dal(&["prove", "--formula", "P", "--bind", "t=x"]);
    assert_eq!(code, 2);
    assert!(err.contains("rational"), "stderr: {}", err);

    // Undeclared case.
    let (code, _, err) =
        dal(&["scenario", &repo("scenarios/billy_only.dal"), "--case", "nope", "--query", "BB(0)"]);
    assert_eq!(code, 2);
    assert!(err.contains("nope"), "stderr: {}", err);

    // Validity mode takes one formula.
    let (code, _, _) = dal(&["prove", "--formula", "P", "--formula", "P"]);
    assert_eq!(code, 2);

    // Unknown world.
    let (code, _, _) = dal(&[
        "model-check",
        "--model",
        &repo("models/remark1.dal"),
        "--formula",
        "P",
        "--world",
        "w9",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn exhausted_budgets_exit_three() {
    let (code, _, err) = dal(&["prove", "--sat", "--formula", "<a><a> P", "--max-prefixes", "1"]);
    assert_eq!(code, 3, "stderr: {}", err);
    assert!(err.contains("budget"), "stderr: {}", err);

    // The same bound arrives through the environment.
    let (code, _, _) = dal_env(&["prove", "--sat", "--formula", "<a><a> P"], &[("DAL_MAX_PREFIXES", "1")]);
    assert_eq!(code, 3);

    // And the flag wins over the environment.
    let (code, _, _) = dal_env(
        &["prove", "--sat", "--formula", "<a><a> P", "--max-prefixes", "10000"],
        &[("DAL_MAX_PREFIXES", "1")],
    );
    assert_eq!(code, 0);
}

#[test]
fn json_records_carry_the_schema_version() {
    let (code, out, _) = dal(&["oracle-compare", "--count", "6", "--seed", "1", "--format", "json"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 7, "6 records plus a summary");
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).expect("line-delimited JSON");
        assert_eq!(v["schema"], "dal.cli/1", "line: {}", line);
    }
    let summary: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(summary["kind"], "compare-summary");
    assert_eq!(summary["total"], 6);

    let (code, out, _) = dal(&[
        "scenario",
        &repo("scenarios/billy_only.dal"),
        "--query",
        "[T(t1,db,billy)] H(t1+db,billy)",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["schema"], "dal.cli/1");
    assert_eq!(v["kind"], "derivation");
    assert_eq!(v["derived"], true);
    assert_eq!(v["case"], "solo");
}

#[test]
fn entailment_is_the_monotone_core() {
    // The scenario derives the hit only through persistency; the bare
    // theory does not entail it.
    let query = "[T(t1,db,billy)] H(t1+db,billy)";
    let file = repo("scenarios/billy_only.dal");
    let (scenario_code, _, _) = dal(&["scenario", &file, "--query", query]);
    let (entail_code, out, _) = dal(&["entail", "--theory", &file, "--formula", query]);
    assert_eq!(scenario_code, 0);
    assert_eq!(entail_code, 1, "stdout: {}", out);
    assert!(out.contains("not entailed"), "stdout: {}", out);

    // Classical consequences still go through.
    let (code, out, _) = dal(&["entail", "--theory", &file, "--formula", "BB(0) \\/ ~BB(0)"]);
    assert_eq!(code, 0, "stdout: {}", out);
}

#[test]
fn binds_override_the_case_block() {
    let file = repo("scenarios/billy_only.dal");
    // The declared binding puts the throw at 2; rebinding moves it to 5,
    // so the grounded law instance fires there and only there.
    let moved = "[T(5,1,billy)] H(6,billy)";
    let (code, _, _) = dal(&["scenario", &file, "--bind", "t1=5", "--query", moved]);
    assert_eq!(code, 0);
    let (code, _, _) = dal(&["scenario", &file, "--query", moved]);
    assert_eq!(code, 1);
}

#[test]
fn reports_cover_cases_and_mark_skips() {
    let (code, out, _) = dal(&["scenario", &repo("scenarios/suzy_billy.dal")]);
    assert_eq!(code, 0);
    for case in ["case case1", "case case2", "case case3"] {
        assert!(out.contains(case), "stdout: {}", out);
    }
    assert!(!out.contains("(skipped)"), "stdout: {}", out);
    assert!(out.contains("query"), "stdout: {}", out);

    // Restricting to one case keeps the others out.
    let (code, out, _) = dal(&["scenario", &repo("scenarios/suzy_billy.dal"), "--case", "case2"]);
    assert_eq!(code, 0);
    assert!(out.contains("case case2"), "stdout: {}", out);
    assert!(!out.contains("case case1"), "stdout: {}", out);

    // A binding that violates the declared constraint skips the case
    // with a diagnosis instead of failing the report.
    let (code, out, _) =
        dal(&["scenario", &repo("scenarios/suzy_billy.dal"), "--case", "case1", "--bind", "ds=10"]);
    assert_eq!(code, 0);
    assert!(out.contains("(skipped)"), "stdout: {}", out);
    assert!(out.contains("constraint"), "stdout: {}", out);
}

#[test]
fn invalidity_ships_a_checkable_countermodel() {
    let formula = "[a] P \\/ [a] ~P";
    let (code, out, _) = dal(&["prove", "--formula", formula]);
    assert_eq!(code, 1);
    let dump = out.split("countermodel:\n").nth(1).expect("countermodel follows the verdict");
    let tmp = scratch("countermodel", dump);
    let (code, out, err) = dal(&[
        "model-check",
        "--model",
        tmp.to_str().unwrap(),
        "--formula",
        &format!("~({})", formula),
    ]);
    assert_eq!(code, 0, "the dump should refute the formula\nstdout: {}\nstderr: {}", out, err);
    fs::remove_file(tmp).ok();
}

#[test]
fn satisfiable_premises_ship_a_witness() {
    let (code, out, _) = dal(&["prove", "--sat", "--formula", "<a> P", "--formula", "box (P -> S(c1))"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("satisfiable"), "stdout: {}", out);
    assert!(out.contains("model:"), "stdout: {}", out);
}
