use std::process::{Command, Output};

use serde_json::Value;

fn twistgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistgate"))
        .args(args)
        .env_remove("TWISTGATE_CURVES")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = twistgate(&all);
    let doc: Value = serde_json::from_slice(&out.stdout).expect("one JSON document on stdout");
    (out.status.code().unwrap(), doc)
}

fn assert_schema(doc: &Value, command: &str) {
    let obj = doc.as_object().expect("object");
    assert_eq!(obj.len(), 3, "{doc}");
    assert!(matches!(obj["status"].as_str(), Some("ok" | "check-failed" | "unsupported-input")));
    assert_eq!(obj["command"], command);
    assert!(obj.contains_key("payload"));
}

#[test]
fn curve_info_text() {
    let out = twistgate(&["curve-info", "--label", "15a1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Delta = (c4^3 - c6^2)/1728 = 50625"), "{text}");
    assert!(text.contains("j = c4^3/Delta = 111284641/50625"));
}

#[test]
fn exit_codes_follow_status() {
    let cases: &[(&[&str], i32, &str)] = &[
        (&["curve-info", "--label", "21a1"], 0, "ok"),
        (&["reduction", "--label", "21a1", "--p", "5"], 0, "ok"),
        (&["root-number", "--label", "15a1", "--twist", "13"], 0, "ok"),
        (&["twist-root-check", "--label", "21a1", "--dmax", "200"], 0, "ok"),
        (&["serre-check", "--label", "15a1", "--ell", "5"], 0, "ok"),
        (&["serre-check", "--curve", "0,-1,1,-10,-20", "--ell", "5", "--aux", "3"], 1, "check-failed"),
        (&["serre-check", "--label", "15a1", "--ell", "2"], 2, "unsupported-input"),
        (&["search", "--p", "5", "--r", "2", "--bound", "100"], 0, "ok"),
        (&["check-hypothesis", "--p", "5", "--d", "17"], 0, "ok"),
        (&["check-hypothesis", "--p", "5", "--d", "13"], 2, "unsupported-input"),
        (&["descent-check", "--lemma", "sum", "--k", "2", "--n", "2", "--r", "2"], 0, "ok"),
        (&["descent-check", "--lemma", "tmw", "--d", "17", "--height", "20"], 0, "ok"),
        (&["lvalue", "--label", "21a1"], 0, "ok"),
        (&["reduction", "--label", "15a1", "--p", "2"], 2, "unsupported-input"),
        (&["twist-root-check", "--curve", "1,0,1,4,-6", "--dmax", "50"], 2, "unsupported-input"),
    ];
    for (args, code, status) in cases {
        let (got, doc) = json(args);
        assert_eq!(got, *code, "{args:?}: {doc}");
        assert_eq!(doc["status"], *status, "{args:?}");
        assert_schema(&doc, args[0]);
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["reduction"][..], &["frobnicate"], &["search", "--p", "5"], &["curve-info", "--label", "15a1", "--curve", "1,1,1,1,1"]] {
        let out = twistgate(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn json_payloads() {
    let (_, doc) = json(&["curve-info", "--label", "15a1"]);
    assert_eq!(doc["payload"]["invariants"]["j"], "111284641/50625");
    assert_eq!(doc["payload"]["invariants"]["delta"], "50625");

    let (_, doc) = json(&["check-hypothesis", "--p", "5", "--d", "17,61"]);
    let rows = doc["payload"]["per_character"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let ds: Vec<u64> = rows.iter().map(|r| r["discriminant"].as_u64().unwrap()).collect();
    assert_eq!(ds, [1, 17, 61, 1037]);
    assert!(rows.iter().all(|r| r["root_number"]["value"] == 1));
    assert_eq!(doc["payload"]["overall"], "verified");

    let (_, doc) = json(&["root-number", "--label", "15a1", "--twist", "13"]);
    assert_eq!(doc["payload"]["twist"]["root_number"]["value"], -1);

    let (_, doc) = json(&["search", "--p", "5", "--r", "1", "--bound", "20"]);
    assert_eq!(doc["payload"]["tuples"], serde_json::json!([[17]]));
}

#[test]
fn forced_zero_for_minus_sign() {
    // the twist of 15a1 by 13 has root number -1
    let (code, doc) = json(&["lvalue", "--curve", "1,16,13,-1612,-21463"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["payload"]["check"], "forced-zero");
    assert_eq!(doc["payload"]["estimate"]["root_number"], -1);
}

#[test]
fn alternate_curve_table() {
    let dir = std::env::temp_dir().join(format!("twistgate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curves.tsv");
    std::fs::write(&path, "11a1\t0\t-1\t1\t-10\t-20\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twistgate"))
        .args(["curve-info", "--label", "11a1"])
        .env("TWISTGATE_CURVES", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("-122023936/161051"));

    std::fs::write(&path, "15a1\t1\t1\t1\t-10\t-11\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twistgate"))
        .args(["curve-info", "--label", "15a1"])
        .env("TWISTGATE_CURVES", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "a wrong model for an anchored label is rejected");
    std::fs::remove_dir_all(&dir).ok();
}
