use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_stdin(args, "")
}

fn run_with_stdin(args: &[&str], input: &str) -> (i32, String, String) {
    let mut argv = vec!["cy4tilt"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (vec![], vec![]);
    let code = cy4tilt_cli::run(argv, &mut input.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn labels(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|o| o["label"].as_str().unwrap().to_string()).collect()
}

#[test]
fn mutate_sigma1() {
    let v = json(&["mutate", "--preset", "line_bundles", "1"]);
    assert_eq!(labels(&v["collection"]), ["Ω(1)", "O", "O(2)"]);
    let v = json(&["mutate", "--preset", "line_bundles", "σ1"]);
    assert_eq!(labels(&v["collection"]), ["Ω(1)", "O", "O(2)"]);
}

#[test]
fn mutate_empty_word_is_identity() {
    let v = json(&["mutate", "--preset", "line_bundles"]);
    assert_eq!(labels(&v["collection"]), ["O", "O(1)", "O(2)"]);
}

#[test]
fn mutate_bad_index_is_usage_error() {
    let (code, _, err) = run(&["mutate", "--preset", "line_bundles", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("must be 1 or 2"));
}

#[test]
fn tilt_check_presets() {
    let v = json(&["tilt-check", "--preset", "line_bundles"]);
    assert_eq!(v["gap"], "2");
    assert_eq!(v["tilting"], true);
    let v = json(&["tilt-check", "--preset", "omega_example"]);
    assert_eq!(v["gap"], "5/2");
    assert_eq!(v["tilting"], false);
    assert_eq!(v["thread_shift"], -1);
    assert_eq!(labels(&v["thread"]), ["O(-1)", "Ω(1)", "O"]);
    for p in ["line_bundles", "omega_example", "heart_A"] {
        let v = json(&["tilt-check", "--preset", p]);
        assert!(v["thread_shift"].is_i64(), "{p}");
    }
}

#[test]
fn secondary_outputs() {
    let v = json(&["secondary", "--preset", "line_bundles"]);
    assert_eq!(v["case"], "NoArrows");
    assert!(v["quiver"]["counts"].as_array().unwrap().is_empty());
    let v = json(&["secondary", "--preset", "omega_example"]);
    assert_eq!(v["case"], "Case2");
    let counts = v["quiver"]["counts"].as_array().unwrap();
    assert_eq!(counts.len(), 1);
    assert_eq!((&counts[0]["from"], &counts[0]["to"], &counts[0]["count"]), (&0.into(), &2.into(), &3.into()));
    assert_eq!(v["universal_extension"]["certified"], true);
    let (code, dot, _) = run(&["secondary", "--preset", "omega_example", "--format", "dot"]);
    assert_eq!(code, 0);
    assert_eq!(dot.matches("0 -> 2 [deg=1]").count(), 3);
    assert_eq!(dot.matches("->").count(), 3);
}

#[test]
fn ext_quiver_words() {
    let v = json(&["ext-quiver", "--preset", "heart_A"]);
    let e = |v: &Value, i: usize, j: usize| -> Vec<u64> {
        v["quiver"]["entries"][i][j]["dims"].as_array().unwrap().iter().map(|d| d[0].as_u64().unwrap()).collect()
    };
    assert_eq!(e(&v, 1, 1), [1, 0, 10, 0, 1]);
    assert_eq!(e(&v, 0, 2), [0, 0, 3, 0, 0]);
    let v = json(&["ext-quiver", "--preset", "heart_A", "--word", "L1"]);
    assert_eq!(e(&v, 1, 0), [0, 27, 0, 3, 0]);
    assert_eq!(e(&v, 2, 0), [0, 0, 75, 0, 0]);
    let v = json(&["ext-quiver", "--preset", "heart_A", "--word", "L2"]);
    assert_eq!(e(&v, 1, 0), [0, 0, 6, 3, 0]);
    let (code, _, _) = run(&["ext-quiver", "--word", "Q1"]);
    assert_eq!(code, 2);
}

#[test]
fn explain_adds_trace() {
    let v = json(&["ext-quiver", "--explain"]);
    assert!(!v["trace"].as_array().unwrap().is_empty());
    let v = json(&["ext-quiver"]);
    assert!(v.get("trace").is_none());
}

#[test]
fn report_quiver_matches_golden() {
    let v = json(&["report", "--preset", "line_bundles"]);
    let mut got = serde_json::to_string_pretty(&v["quiver"]).unwrap();
    got.push('\n');
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/line_bundles_quiver.json");
    if std::env::var_os("CY4TILT_BLESS").is_some() {
        std::fs::write(path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(path).unwrap());
    // twisting by O(2) carries A onto this heart, so the quivers agree
    let a = json(&["report", "--preset", "heart_A"]);
    assert_eq!(a["quiver"]["entries"], v["quiver"]["entries"]);
    let tilts = v["available_tilts"].as_array().unwrap();
    assert_eq!(tilts.len(), 6);
    assert!(tilts.iter().all(|t| t["admissible"] == true));
}

#[test]
fn report_is_deterministic() {
    let a = run(&["report", "--preset", "omega_example"]);
    let b = run(&["report", "--preset", "omega_example"]);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
}

#[test]
fn corrupt_json_is_usage_error() {
    let (code, _, err) = run_with_stdin(&["report", "--input", "-"], "[{\"label\": \"O\", \"class\": ");
    assert_eq!(code, 2);
    assert!(err.contains("parsing collection JSON"));
}

#[test]
fn json_input_from_stdin() {
    let input = r#"[
        {"label": "O", "class": {"r": 1, "d": 0, "s": 0}},
        {"label": "O(1)", "class": {"r": 1, "d": 1, "s": [1, 2]}},
        {"label": "O(2)", "class": {"r": 1, "d": 2, "s": 2}}
    ]"#;
    let (code, out, err) = run_with_stdin(&["tilt-check", "--input", "-"], input);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tilting"], true);
}

#[test]
fn n_max_lower_limit() {
    let (code, _, _) = run(&["secondary", "--n-max", "2"]);
    assert_eq!(code, 2);
    let v = json(&["secondary", "--preset", "line_bundles", "--n-max", "3"]);
    assert_eq!(v["n_max"], 3);
}

#[test]
fn non_tilting_heart_is_computation_failure() {
    let (code, _, err) = run(&["ext-quiver", "--preset", "omega_example"]);
    assert_eq!(code, 1);
    assert!(err.contains("not tilting"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cy4tilt");
    let ok = Command::new(bin).args(["tilt-check", "--preset", "line_bundles", "--format", "text"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("tilting true"));
    let bad = Command::new(bin).args(["frobnicate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
