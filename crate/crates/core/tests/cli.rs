use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dissent::AuditReport;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn dissent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dissent"))
        .args(args)
        .output()
        .expect("spawn dissent")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn audit_small(dir: &Path, name: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(name);
    let profiles = fixture("small/profiles.csv");
    let responses = fixture("small/responses.csv");
    let schema = fixture("small/schema.toml");
    let mut args = vec![
        "audit",
        "--profiles",
        p(&profiles),
        "--responses",
        p(&responses),
        "--schema",
        p(&schema),
        "--out",
        p(&out),
    ];
    args.extend_from_slice(extra);
    (dissent(&args), out)
}

#[test]
fn audit_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = audit_small(dir.path(), "report.json", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(table.starts_with("critic_id,notion,true,lower,upper,estimate,error,fingerprint\n"));
    // 6 critics x 6 notions
    assert_eq!(table.lines().count(), 1 + 36);

    let v = dissent(&["validate", p(&out)]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    assert!(stderr(&v).contains("PASS"));
}

#[test]
fn audit_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = audit_small(dir.path(), "a.json", &["--sp-mode", "pooled"]);
    let (b, rb) = audit_small(dir.path(), "b.json", &["--sp-mode", "pooled"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(std::fs::read(ra).unwrap(), std::fs::read(rb).unwrap());
}

#[test]
fn flags_land_in_the_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = audit_small(
        dir.path(),
        "r.json",
        &[
            "--sp-mode",
            "pooled",
            "--smoothing-alpha",
            "0.5",
            "--undefined-cells",
            "zero",
            "--binarize-threshold",
            "7",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = AuditReport::from_json(&std::fs::read_to_string(out).unwrap()).unwrap();
    let json = serde_json::to_value(&report.fingerprint).unwrap();
    assert_eq!(json["config"]["sp_mode"], "pooled");
    assert_eq!(json["config"]["smoothing_alpha"], 0.5);
    assert_eq!(json["config"]["undefined_cells"], "zero");
    assert_eq!(json["label_mapping"]["threshold"], 7.0);
}

#[test]
fn corrupted_estimate_fails_validation_naming_the_critic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = audit_small(dir.path(), "r.json", &[]);
    let mut report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let critic = report["critics"][2]["critic_id"].as_str().unwrap().to_string();
    report["critics"][2]["indefinite"][0]["estimate"] = serde_json::json!(1.5);
    std::fs::write(&out, serde_json::to_string_pretty(&report).unwrap()).unwrap();

    let v = dissent(&["validate", p(&out)]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stderr(&v).contains(&format!("critic {critic}")), "{}", stderr(&v));
}

#[test]
fn malformed_report_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{\"format_version\": 1").unwrap();
    assert_eq!(dissent(&["validate", p(&path)]).status.code(), Some(1));
}

#[test]
fn dangling_response_is_reported_with_its_id() {
    let dir = tempfile::tempdir().unwrap();
    let responses = dir.path().join("responses.csv");
    let mut text = std::fs::read_to_string(fixture("small/responses.csv")).unwrap();
    text.push_str("w9,nope,yes\n");
    std::fs::write(&responses, text).unwrap();
    let out = dir.path().join("r.json");
    let o = dissent(&[
        "audit",
        "--profiles",
        p(&fixture("small/profiles.csv")),
        "--responses",
        p(&responses),
        "--schema",
        p(&fixture("small/schema.toml")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("w9/nope"), "{}", stderr(&o));
}

#[test]
fn unknown_token_names_file_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let profiles = dir.path().join("profiles.csv");
    let text = std::fs::read_to_string(fixture("small/profiles.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[3] = "p02,4,Martian,Male,0";
    std::fs::write(&profiles, lines.join("\n") + "\n").unwrap();
    let o = dissent(&[
        "audit",
        "--profiles",
        p(&profiles),
        "--responses",
        p(&fixture("small/responses.csv")),
        "--schema",
        p(&fixture("small/schema.toml")),
        "--out",
        p(&dir.path().join("r.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("profiles.csv") && err.contains("Martian"), "{err}");
}

#[test]
fn interchange_round_trip_reproduces_critic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (o, direct) = audit_small(dir.path(), "direct.json", &[]);
    assert!(o.status.success());

    let inter = dir.path().join("inter.csv");
    let e = dissent(&[
        "export",
        "--profiles",
        p(&fixture("small/profiles.csv")),
        "--responses",
        p(&fixture("small/responses.csv")),
        "--schema",
        p(&fixture("small/schema.toml")),
        "--out",
        p(&inter),
    ]);
    assert!(e.status.success(), "{}", stderr(&e));
    let again = dir.path().join("again.json");
    let a = dissent(&[
        "audit",
        "--interchange",
        p(&inter),
        "--labels",
        "2",
        "--groups",
        "4",
        "--out",
        p(&again),
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(dissent(&["validate", p(&again)]).status.code(), Some(0));

    let load = |path: &Path| AuditReport::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(load(&direct).critics, load(&again).critics);
}

#[test]
fn sample_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let inter = dir.path().join("sim.csv");
    let s = dissent(&[
        "sample",
        p(&fixture("scenarios/baseline.toml")),
        "--critics",
        "5",
        "--out",
        p(&inter),
    ]);
    assert!(s.status.success(), "{}", stderr(&s));
    let out = dir.path().join("r.json");
    let a = dissent(&["audit", "--interchange", p(&inter), "--out", p(&out)]);
    assert!(a.status.success(), "{}", stderr(&a));
}

#[test]
fn bad_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "labels = 2\ngroups = 2\nsamples_per_group = 5\nseed = 1\njoint = [[0.5, 0.5, 0.1, 0.0], [1, 0, 0, 0]]\n").unwrap();
    let o = dissent(&["simulate", p(&path), "--out", p(&dir.path().join("t.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("joint[0]"), "{}", stderr(&o));
}

#[test]
fn simulate_flags_the_omr_bound() {
    // EO and PE bounds hold on the same sample; the OMR bound sits above the
    // truth, so the run ends with an invariant-violation status.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = dissent(&[
        "simulate",
        p(&fixture("scenarios/baseline.toml")),
        "--trials",
        "100",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    for n in summary["indefinite"].as_array().unwrap() {
        let violations = n["containment_violations"].as_u64().unwrap();
        match n["kind"].as_str().unwrap() {
            "OMR" => assert!(violations > 0),
            _ => assert_eq!(violations, 0),
        }
    }
    assert_eq!(summary["complement_violations"], 0);
}

#[test]
fn diagonal_scenario_has_zero_ae_and_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    dissent(&["simulate", p(&fixture("scenarios/diagonal.toml")), "--trials", "20", "--out", p(&out)]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    for d in summary["definite"].as_array().unwrap() {
        assert_eq!(d["value"]["max"], 0.0);
        assert_eq!(d["max_identity_gap"], 0.0);
    }
}
