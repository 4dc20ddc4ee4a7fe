//! End-to-end tests of the command-line surface, run in-process.

use std::path::PathBuf;

fn data(name: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.pop();
    path.pop();
    path.push("structures");
    path.push(name);
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["orbitforge".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = orbitforge_cli::run(&argv, &mut stdout, &mut stderr);
    (
        code,
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn pk_prints_the_count() {
    let (code, out, _) = run(&["pk", "--k", "2", "--n", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "26\n");
    let (code, out, _) = run(&["pk", "--k", "2", "--n", "5", "--brute"]);
    assert_eq!(code, 0);
    assert_eq!(out, "26\n");
}

#[test]
fn sk_prints_the_count() {
    let (code, out, _) = run(&["sk", "--k", "3", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "10\n");
}

#[test]
fn bounds_tables_include_onset() {
    let (code, out, _) = run(&[
        "bounds", "lower", "--k", "2", "--eps", "1/4", "--n-max", "8",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("onset N = 1"));
    let (code, out, _) = run(&["bounds", "upper", "--k", "2", "--d", "3/4", "--n-max", "12"]);
    assert_eq!(code, 0);
    assert!(out.contains("c = "));
    assert!(out.contains("termwise holds for all n in (3, 12]"));
}

#[test]
fn count_and_sequence() {
    let (code, out, _) = run(&[
        "count",
        "--input",
        &data("covering_wreath.json"),
        "--n",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "10\n");
    let (code, out, _) = run(&[
        "sequence",
        "--input",
        &data("covering_wreath.json"),
        "--n-max",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "n,count\n1,1\n2,2\n3,4\n4,10\n5,26\n");
    // counting all tuples instead of injective ones
    let (code, out, _) = run(&[
        "count",
        "--input",
        &data("cover_two_labels.json"),
        "--n",
        "2",
        "--kind",
        "all",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "8\n");
}

#[test]
fn reducts_and_cover_reducts() {
    let (code, out, _) = run(&[
        "reducts",
        "--input",
        &data("unary_two_inf.json"),
        "--count-only",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "3\n");
    let (code, out, _) = run(&[
        "cover-reducts",
        "--input",
        &data("cover_two_labels.json"),
        "--count-only",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "3\n");
    let (code, out, _) = run(&["cover-reducts", "--input", &data("cover_two_labels.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("total 3"));
}

#[test]
fn truncate_emits_a_group() {
    let (code, out, _) = run(&[
        "truncate",
        "--input",
        &data("covering_wreath.json"),
        "--sizes",
        "o1=3",
        "--emit-group",
    ]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["degree"], 6);
    // deterministic output
    let (_, again, _) = run(&[
        "truncate",
        "--input",
        &data("covering_wreath.json"),
        "--sizes",
        "o1=3",
        "--emit-group",
    ]);
    assert_eq!(out, again);
}

#[test]
fn crosscheck_reports_match() {
    let (code, out, _) = run(&[
        "crosscheck",
        "--input",
        &data("covering_flip_global.json"),
        "--n",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("symbolic: 3"));
    assert!(out.contains("stabilized: true"));
    assert!(out.contains("symbolic matches truncation: true"));
}

#[test]
fn classify_structure_and_csv() {
    let (code, out, _) = run(&[
        "classify",
        "--input",
        &data("covering_wreath.json"),
        "--n-max",
        "8",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("label: sub-factorial"));
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("seq.csv");
    std::fs::write(&csv_path, "n,count\n1,1\n2,1\n3,1\n4,1\n").unwrap();
    let (code, out, _) = run(&["classify", "--sequence-file", csv_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("label: constant"));
}

#[test]
fn split_orbits_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("split.json");
    let (code, _, _) = run(&[
        "split-orbits",
        "--input",
        &data("unary_inf_point.json"),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\"inf\""));
    assert!(!text.contains("\"size\": 1"));
    // the output is a valid input again
    let (code, out, _) = run(&["validate", "--input", out_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "ok\n");
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version":1,"kind":"covering_reduct","orbits":[{"name":"o1","size":"inf"}],
           "fibers":{"o1":["a","b"]},"n_generators":{"o1":[[1,0]]}}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("N_1 ⊲ H_1"));
}

#[test]
fn cap_overruns_exit_2() {
    let (code, _, err) = run(&[
        "--work-cap",
        "10",
        "crosscheck",
        "--input",
        &data("covering_wreath.json"),
        "--n",
        "3",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("work cap"));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let (code, _, _) = run(&["pk", "--k", "2"]);
    assert_eq!(code, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("orbitforge"));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "sequence",
        "--input",
        &data("reduct_swap.json"),
        "--n-max",
        "6",
        "--format",
        "json",
    ];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    assert!(a.contains("\"count\": \"32\""));
}

#[test]
fn caps_env_var_is_honored() {
    // run the real binary so the environment stays isolated
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .args(["pk", "--k", "2", "--n", "5", "--brute"])
        .env("ORBITFORGE_CAPS", "bruteforce_cap=3")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("oracle range exceeded"));
    // a malformed entry is a usage error
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .args(["pk", "--k", "2", "--n", "5"])
        .env("ORBITFORGE_CAPS", "nonsense")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn classify_json_output() {
    let (code, out, _) = run(&[
        "classify",
        "--input",
        &data("reduct_swap.json"),
        "--n-max",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(parsed["label"]
        .as_str()
        .unwrap()
        .starts_with("at-most-exponential"));
    assert_eq!(parsed["heuristic"], true);
    assert!(parsed["estimates"].as_array().unwrap().len() >= 3);
}
