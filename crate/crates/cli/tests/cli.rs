use std::path::Path;

use serde_json::Value;
use vdc_lab::{run, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED};

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("vdc-lab").chain(args.iter().copied()).map(String::from).collect()
}

/// Runs with `--out` into `dir` and returns the exit code and the report text.
fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let out = dir.join(name);
    let mut a = argv(args);
    a.push("--out".into());
    a.push(out.display().to_string());
    let code = run(&a);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("report is JSON")
}

#[test]
fn divis_zero_constant_terms() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "r.json", &["divis", "--polys", "0,0,1", "0,0,0,1", "--upto", "1000"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&text);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["report"]["all_pass"], true);
    assert_eq!(v["report"]["zero_constant_terms"], true);
    assert!(v["report"]["first_failure"].is_null());
}

#[test]
fn divis_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "r.json", &["divis", "--polys=-2,0,1", "--upto", "16"]);
    assert_eq!(code, EXIT_VIOLATED);
    assert_eq!(json(&text)["report"]["first_failure"], 3);
}

#[test]
fn box_constant_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "r.json", &["ineq", "--form", "box", "--demo", "constant", "--N", "4,4", "--H", "1,1"]);
    assert_eq!(code, EXIT_OK);
    let r = &json(&text)["report"];
    assert_eq!(r["lhs"].as_f64().unwrap(), 256.0);
    assert_eq!(r["holds"], true);
    for key in ["lhs", "rhs_weighted", "rhs_simple", "holds"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn spectral_half_atoms_on_odds() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("half0half.json");
    std::fs::write(&measure, r#"{"dim": 1, "atoms": [[0, 1], [1, 2]], "weights": ["1/2", "1/2"]}"#).unwrap();
    let odds = dir.path().join("odds.txt");
    let text: String = (0..500).map(|k| format!("{}\n", 2 * k + 1)).collect();
    std::fs::write(&odds, text).unwrap();
    let (code, text) = run_to(
        dir.path(),
        "r.json",
        &["spectral", "--mode", "vanish", "--measure", measure.to_str().unwrap(), "--set", odds.to_str().unwrap()],
    );
    assert_eq!(code, EXIT_OK);
    let r = &json(&text)["report"];
    assert_eq!(r["verdict"]["kind"], "negative-certificate");
    assert_eq!(r["verdict"]["property"], "vdC");
    assert_eq!(r["window_max_abs"].as_f64().unwrap(), 0.0);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["ineq", "--form", "box", "--demo", "random", "--seed", "7", "--N", "6,5", "--H", "2,3"],
        &["recur", "--system", "rotation:sqrt2m1", "--set", "0:0.1", "--orbit", "--seed", "9", "--N", "5000"],
        &["seq", "--block-measure", r#"{"dim":1,"atoms":[[0,1],[1,3]],"weights":["1/3","2/3"]}"#, "--seed", "3", "--N", "2000"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (c1, a) = run_to(dir.path(), &format!("a{i}.json"), args);
        let (c2, b) = run_to(dir.path(), &format!("b{i}.json"), args);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK), "{args:?}");
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ineq", "--form", "general", "--demo", "random", "--seed", "5", "--N", "12,12", "--fejer", "2,2"];
    let (_, one) = run_to(dir.path(), "one.json", &[&args[..], &["--jobs", "1"]].concat());
    let (_, four) = run_to(dir.path(), "four.json", &[&args[..], &["--jobs", "4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn randomness_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_to(dir.path(), "r.json", &["ineq", "--form", "box", "--demo", "random", "--N", "4", "--H", "2"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _) = run_to(dir.path(), "r.json", &["recur", "--system", "cyclic:5", "--set", "0", "--orbit"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&argv(&["bogus"])), EXIT_USAGE);
    assert_eq!(run(&argv(&["divis", "--polys", "1,x", "--upto", "5"])), EXIT_USAGE);
    assert_eq!(run(&argv(&["ineq", "--form", "box", "--demo", "constant", "--N", "4,4"])), EXIT_USAGE);
}

#[test]
fn every_subcommand_has_help() {
    let expect = [
        ("ineq", "inequalit"),
        ("witness", "Mendès France"),
        ("spectral", "FC+"),
        ("divis", "divisibility"),
        ("recur", "recurrence"),
        ("udtest", "Weyl"),
        ("seq", "block"),
    ];
    for (cmd, _) in expect {
        assert_eq!(run(&argv(&[cmd, "--help"])), EXIT_OK, "{cmd}");
    }
    let bin = env!("CARGO_BIN_EXE_vdc-lab");
    for (cmd, phrase) in expect {
        let out = std::process::Command::new(bin).args([cmd, "--help"]).output().unwrap();
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains(phrase), "{cmd} help lacks {phrase:?}");
    }
}

#[test]
fn weyl_rows_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "w.csv", &["udtest", "--seq", "sqrt(2)*n^2", "--N", "2000", "--kmax", "2", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,re,im,modulus"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn scalar_reports_as_field_value_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "g.csv", &["ineq", "--form", "group", "--orders", "5", "--E", "0 1 2", "--D", "1 2", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.starts_with("field,value\nschema_version,1\n"));
    assert!(text.contains("\nholds,true\n"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("vdc.conf");
    std::fs::write(&conf, "polys = 0,0,1\nupto = 30\n").unwrap();
    let (code, text) = run_to(dir.path(), "r.json", &["divis", "--config", conf.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&text)["report"]["bound"], 30);
}

#[test]
fn witness_search_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("p.json");
    let (code, text) = run_to(
        dir.path(),
        "s.json",
        &["witness", "--search", "--set", "1 2 3", "--eps", "0.34", "--grid", "400", "--emit", emitted.to_str().unwrap()],
    );
    assert_eq!(code, EXIT_OK);
    let r = &json(&text)["report"];
    assert_eq!(r["outcome"], "found");
    let eps = r["eps_certified"].as_f64().unwrap().to_string();
    let (code, text) =
        run_to(dir.path(), "v.json", &["witness", "--verify", emitted.to_str().unwrap(), "--set", "1 2 3", "--eps", &eps]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&text)["report"]["is_witness"], true);
}

#[test]
fn failed_verification_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // P = cos(2 pi x): minimum -1
    let p = r#"{"dim": 1, "entries": [{"h": [1], "re": 0.5, "im": 0.0}, {"h": [-1], "re": 0.5, "im": 0.0}]}"#;
    let (code, _) = run_to(dir.path(), "v.json", &["witness", "--verify", p, "--set", "1", "--eps", "0.5"]);
    assert_eq!(code, EXIT_VIOLATED);
}
