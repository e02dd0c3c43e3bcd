//! End-to-end tests of the `htc` binary: exit codes, report shapes, and the
//! stability of the machine-readable outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn htc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_htc"))
}

fn write_graph(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const IV: &str = "nodes 3\nd 1 2\nd 2 3\nb 2 3\n";
const THREE_CYCLE: &str = "nodes 3\nd 1 2\nd 2 3\nd 3 1\n";
const OVER_EDGED: &str = "nodes 3\nd 1 2\nd 1 3\nd 2 3\nb 1 2\n";
const CHAIN5: &str = "nodes 5\nd 1 2\nd 2 3\nd 3 4\nd 4 5\nb 1 4\nb 1 5\n";

#[test]
fn classify_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for (text, verdict) in [
        (IV, "identifiable"),
        (THREE_CYCLE, "inconclusive"),
        (OVER_EDGED, "infinite_to_one"),
        (CHAIN5, "identifiable"),
    ] {
        let path = write_graph(&dir, "g.txt", text);
        let output = htc().arg("classify").arg(&path).output().unwrap();
        assert_eq!(output.status.code(), Some(0));
        let report = stdout(&output);
        assert!(
            report.contains(&format!("verdict: {verdict}")),
            "{report}"
        );
        assert_eq!(
            report.contains("witness order:"),
            verdict == "identifiable",
            "{report}"
        );
    }
}

#[test]
fn classify_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "iv.txt", IV);
    let output = htc().args(["classify", "--json"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["verdict"], "identifiable");
    assert_eq!(value["solved_nodes"], serde_json::json!([1, 2, 3]));
    assert_eq!(value["witness"]["order"], serde_json::json!([1, 2, 3]));
    assert!(value["witness"]["Y"]["3"].is_array());

    let path = write_graph(&dir, "cycle.txt", THREE_CYCLE);
    let output = htc().args(["classify", "--json"]).arg(&path).output().unwrap();
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["verdict"], "inconclusive");
    assert!(value["witness"].is_null());
}

#[test]
fn classify_parse_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "bad.txt", "nodes 2\nd 1 3\n");
    let output = htc().arg("classify").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("line 2"), "{}", stderr(&output));

    let output = htc().arg("classify").arg("/no/such/file").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn decompose_alias_and_cyclic_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "g.txt", "nodes 3\nd 1 2\nd 2 3\nb 1 3\n");
    let output = htc().arg("decompose").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report = stdout(&output);
    assert!(report.contains("decomposition: identifiable"), "{report}");
    assert!(report.contains("component 2"), "{report}");

    let flagged = htc()
        .args(["classify", "--decompose"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(stdout(&flagged), report);

    let cyclic = write_graph(&dir, "cycle.txt", THREE_CYCLE);
    let output = htc().arg("decompose").arg(&cyclic).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn decompose_json_includes_components() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "g.txt", "nodes 3\nd 1 2\nd 2 3\nb 1 3\n");
    let output = htc()
        .args(["decompose", "--json"])
        .arg(&path)
        .output()
        .unwrap();
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["decomposition"]["combined"], "identifiable");
    let components = value["decomposition"]["components"].as_array().unwrap();
    assert_eq!(components.len(), 2);
    assert!(components[0]["nodes"].is_array());
    assert!(components[0]["verdict"].is_string());
}

#[test]
fn verify_round_trip_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "chain.txt", CHAIN5);
    let output = htc()
        .args(["verify", "--trials", "5", "--seed", "3", "--tol", "1e-6"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report = stdout(&output);
    assert!(report.contains("PASS"), "{report}");
    assert!(report.contains("max relative recovery error"), "{report}");
}

#[test]
fn verify_reports_rank_deficiency_for_infinite_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "over.txt", OVER_EDGED);
    let output = htc().arg("verify").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report = stdout(&output);
    assert!(report.contains("infinite_to_one"), "{report}");
    assert!(report.contains("rank(J)"), "{report}");
    assert!(report.contains("rank deficiency confirmed"), "{report}");
}

#[test]
fn verify_degenerate_params_exit_nongeneric() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "iv.txt", IV);
    // lambda12 = 0: the instrument carries no signal, node 3 unsolvable
    let params = "\
0,0,0
0,0,0.8
0,0,0
1,0,0
0,1,0.2
0,0.2,1
";
    let params_path = write_graph(&dir, "params.csv", params);
    let output = htc()
        .arg("verify")
        .arg(&path)
        .arg("--params")
        .arg(&params_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stdout(&output));
    assert!(stderr(&output).contains("node 3"), "{}", stderr(&output));
}

#[test]
fn verify_good_params_recovers_and_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "iv.txt", IV);
    let params = "\
0,1,0
0,0,1
0,0,0
1,0,0
0,1,0.2
0,0.2,1
";
    let params_path = write_graph(&dir, "params.csv", params);
    let output = htc()
        .arg("verify")
        .arg(&path)
        .arg("--params")
        .arg(&params_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report = stdout(&output);
    assert!(report.contains("recovered parameters"), "{report}");
    assert!(report.contains("max relative error"), "{report}");
}

#[test]
fn enumerate_census_csv() {
    let output = htc()
        .args(["enumerate", "--nodes", "3", "--acyclic"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(
        stdout(&output),
        "m,mode,total,htc_identifiable,htc_infinite,inconclusive\n3,acyclic,22,17,5,0\n"
    );

    let output = htc()
        .args(["enumerate", "--nodes", "3", "--cyclic"])
        .output()
        .unwrap();
    assert_eq!(
        stdout(&output),
        "m,mode,total,htc_identifiable,htc_infinite,inconclusive\n3,cyclic,6,2,3,1\n"
    );

    let output = htc()
        .args(["enumerate", "--nodes", "9"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn enumerate_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("census.csv");
    let output = htc()
        .args(["enumerate", "--nodes", "3", "--acyclic", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.contains("3,acyclic,22,17,5,0"), "{written}");
}

#[test]
fn simulate_is_deterministic_and_validates_input() {
    let args = [
        "simulate", "--nodes", "8", "--edges", "12", "--samples", "50", "--seed", "7",
        "--acyclic",
    ];
    let first = htc().args(args).output().unwrap();
    let second = htc().args(args).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).starts_with("m,n_edges,samples,seed,frac_id,frac_inf,frac_inc\n"));

    let bad = htc()
        .args(["simulate", "--nodes", "3", "--edges", "99", "--samples", "5"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let empty = htc()
        .args(["simulate", "--nodes", "3", "--edges", "2", "--samples", "0"])
        .output()
        .unwrap();
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn gc_command_reports_and_enforces_caps() {
    let dir = tempfile::tempdir().unwrap();
    let iv = write_graph(&dir, "iv.txt", IV);
    let output = htc().arg("gc").arg(&iv).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).starts_with("GC-identifiable"), "{}", stdout(&output));

    let rejected = write_graph(
        &dir,
        "gap.txt",
        "nodes 4\nd 1 2\nd 1 3\nd 2 4\nb 1 3\nb 1 4\nb 3 4\n",
    );
    let output = htc().arg("gc").arg(&rejected).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("not GC-identifiable"), "{}", stdout(&output));

    let cyclic = write_graph(&dir, "cycle.txt", THREE_CYCLE);
    let output = htc().arg("gc").arg(&cyclic).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    let big = write_graph(&dir, "big.txt", "nodes 8\nd 1 2\n");
    let output = htc().arg("gc").arg(&big).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let output = htc().arg("classify").output().unwrap(); // missing path
    assert_eq!(output.status.code(), Some(1));
    let output = htc().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(&dir, "iv.txt", IV);
    let output = htc()
        .arg("classify")
        .arg(&path)
        .env("HTC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let output = htc()
        .arg("classify")
        .arg(&path)
        .env("HTC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
