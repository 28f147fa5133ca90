use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramfiber")).args(args).env("GRAMFIBER_THREADS", "1").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classify_r1_direction() {
    let out = run(&["quartic", "classify", "--lambda", "1,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tag"], "ThreeDimFace");
}

#[test]
fn lemma_check_reports_six_disjoint_cones() {
    let out = run(&["sextic", "lemma-check"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let sextics = v["sextics"].as_array().unwrap();
    assert_eq!(sextics.len(), 2);
    for s in sextics {
        assert_eq!(s["report"]["quadrics"].as_array().unwrap().len(), 3);
        assert_eq!(s["report"]["disjoint"], true);
    }
}

#[test]
fn usage_and_numeric_errors_have_distinct_codes() {
    assert_eq!(run(&["no-such-verb"]).status.code(), Some(2));
    let bad = run(&["face", "--form", "{not json", "--lambda", "1,0,1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["error"], "usage");
    let wrong = run(&["quartic", "complete", "--lambda", "1,1,-1,0,0,0"]);
    assert_eq!(wrong.status.code(), Some(3));
    assert_eq!(json(&wrong)["error"], "WrongClass");
    let real = run(&["sextic", "rank2", "--form", r#"{"n":2,"d":6,"coeffs":{"60":1,"06":-1}}"#]);
    assert_eq!(real.status.code(), Some(3));
}

#[test]
fn certificate_uses_exact_strings() {
    let form = r#"{"n":3,"d":4,"coeffs":{"400":1,"040":1,"004":1}}"#;
    let ok = run(&["quartic", "certificate", "--form", form, "--lambda", "1,1,1,0,0,0"]);
    assert_eq!(ok.status.code(), Some(0));
    let v = json(&ok);
    assert_eq!(v["fCheck"], true);
    assert!(v["sos"][0]["weight"].is_string());
    let bad = run(&["quartic", "certificate", "--form", form, "--lambda", "1,2,3,0,0,0"]);
    assert_eq!(bad.status.code(), Some(3));
    assert_eq!(json(&bad)["error"], "PreconditionViolated");
}

#[test]
fn split_and_complete_succeed_on_their_classes() {
    let split = run(&["quartic", "split", "--lambda", "1,1,-1,0,0,0"]);
    assert_eq!(split.status.code(), Some(0));
    assert!(json(&split)["projectionResidual"].as_f64().unwrap() < 1e-7);
    let comp = run(&["quartic", "complete", "--lambda", "1,1,1,0,0,0"]);
    assert_eq!(comp.status.code(), Some(0));
    assert_eq!(json(&comp)["factor"], 1.0);
}

#[test]
fn fiberbody_runs_are_reproducible() {
    let args = ["fiberbody", "sample", "--samples", "5", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let dir = std::env::temp_dir();
    let p1 = dir.join(format!("gramfiber-cloud-{}-a.csv", std::process::id()));
    let p2 = dir.join(format!("gramfiber-cloud-{}-b.csv", std::process::id()));
    for p in [&p1, &p2] {
        let out = run(&["fiberbody", "cloud", "--samples", "8", "--directions", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["written"], 5);
    }
    let (t1, t2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(t1, t2);
    assert_eq!(String::from_utf8(t1).unwrap().lines().count(), 6);
    let _ = std::fs::remove_file(p1);
    let _ = std::fs::remove_file(p2);
}

#[test]
fn face_dim_and_probe_verbs() {
    let fd = run(&["fiberbody", "face-dim", "--context", "quartic", "--samples", "40", "--lambda", "1,0,0,0,0,0"]);
    assert_eq!(fd.status.code(), Some(0));
    assert_eq!(json(&fd)["dim"], 3);
    let probe = run(&["fiberbody", "nc-probe", "--context", "sextic", "--samples", "20", "--lambda", "1,0,1", "--lambda-prime", "2,0.5,1"]);
    assert_eq!(json(&probe)["verdict"], "InCone");
}

#[test]
fn context_dump_and_nc_dim() {
    let v = json(&run(&["context-dump", "--context", "sextic"]));
    assert_eq!(v["dimW"], 3);
    let nc = json(&run(&[
        "nc-dim",
        "--context",
        "sextic",
        "--u",
        r#"{"n":2,"d":3,"coeffs":{"30":1,"03":1}}"#,
        "--u",
        r#"{"n":2,"d":3,"coeffs":{"21":1,"12":-1}}"#,
    ]));
    assert_eq!(nc["inW"], 3);
    assert_eq!(nc["ambient"], nc["oracle"]);
}
