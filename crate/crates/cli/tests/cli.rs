use std::process::{Command, Output};

use serde_json::Value;

fn polyspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyspace"))
        .args(args)
        .env_remove("POLYSPACE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn genetic_code_of_family_vector() {
    let out = polyspace(&["genetic-code", "--lengths", "1,1,2,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"n\":5,\"genes\":[[5,2]]}\n");
}

#[test]
fn genetic_code_accepts_rationals() {
    let out = polyspace(&["genetic-code", "--lengths", "1/2,1,1,2,2,5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["n"], 6);
}

#[test]
fn malformed_input_exits_two_with_position() {
    let out = polyspace(&["genetic-code", "--lengths", "1,1,2,x,3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 6"), "{err}");

    let out = polyspace(&["nonimmersion", "--code", "{{7,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));

    let out = polyspace(&["genetic-code", "--lengths", "1,1,2"]);
    assert_eq!(out.status.code(), Some(2), "nongeneric lengths");

    let out = polyspace(&["table1", "--m", "31:16"]);
    assert_eq!(out.status.code(), Some(2));

    let out = polyspace(&["immersion-4m2", "--code", "{{4,1}}"]);
    assert_eq!(out.status.code(), Some(2), "n < 5");

    let out = polyspace(&["ktheory", "--code", "{{6,3,1}}", "--mode", "family_nk"]);
    assert_eq!(out.status.code(), Some(2), "mode mismatch");
}

#[test]
fn enumerate_lists_134_codes() {
    let out = polyspace(&["enumerate", "--n", "7", "--format", "tsv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 134);

    let v = json(&polyspace(&["enumerate", "--n", "7"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["count"], 134);
    assert_eq!(v["codes"].as_array().unwrap().len(), 134);
}

#[test]
fn table1_tsv_layout() {
    let out = polyspace(&["table1", "--m", "16:31", "--s", "1:8", "--format", "tsv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[0], ["m", "1", "2", "3", "4", "5", "6", "7", "8"]);
    assert_eq!(
        rows[1],
        ["16", "61", "59", "57", "55", "53", "51", "49", "47"]
    );
    assert_eq!(
        rows[16],
        ["31", "113", "111", "111", "105", "105", "105", "105", "97"]
    );
    assert!(rows.iter().all(|r| r.len() == 9));
}

#[test]
fn table1_json_has_schema() {
    let v = json(&polyspace(&["table1", "--m", "16:17", "--s", "1:2"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rows"][1]["m"], 17);
    assert_eq!(v["rows"][1]["dims"], serde_json::json!([63, 61]));
}

#[test]
fn nonimmersion_and_immersion_commands() {
    let v = json(&polyspace(&["nonimmersion", "--code", "{{7,4}}"]));
    assert_eq!(v["mode"], "family_nk");
    assert_eq!(v["nonimmersion_dim"], 13);

    let out = polyspace(&["immersion-4m2", "--code", "{{5,2}}"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dimension"], 6);
    assert_eq!(v["verdict"], "DoesNotImmerse");
}

#[test]
fn cohomology_command() {
    let out = polyspace(&["cohomology", "--code", "{{7,4}}", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let betti: Vec<u64> = v["betti"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(betti.len(), 5);
    assert!(betti.iter().eq(betti.iter().rev()));
    assert!(v["family_checks"]["family"].as_str().is_some());
    assert!(v["family_checks"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["holds"] == true));
}

#[test]
fn ktheory_dump_relations() {
    let out = polyspace(&[
        "ktheory",
        "--code",
        "{{6,3,1}}",
        "--mode",
        "family_nk1",
        "--dump-relations",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["mode"], "family_nk1");
    assert!(!v["relations"].as_array().unwrap().is_empty());
    assert_eq!(v["oracle"]["basis_unimodular"], true);

    let v = json(&polyspace(&["ktheory", "--code", "{{6,3,1}}"]));
    assert!(v.get("relations").is_none());
}

#[test]
fn report_is_deterministic_across_threads() {
    let dir = std::env::temp_dir().join(format!("polyspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("catalog.json");
    let out = polyspace(&[
        "report",
        "--n",
        "6",
        "--threads",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let parallel = Command::new(env!("CARGO_BIN_EXE_polyspace"))
        .args(["report", "--n", "6"])
        .env("POLYSPACE_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(parallel.stdout).unwrap(), written);
    let catalog = polyspace::catalog::Catalog::from_json(&written).unwrap();
    assert_eq!(catalog.to_json(), written);
    assert_eq!(catalog.count, catalog.entries.len());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_reports_every_check() {
    let out = polyspace(&["verify", "--format", "tsv"]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    let failing: Vec<&&str> = rows.iter().filter(|r| r.starts_with("FAIL")).collect();
    // The reference table's (m=28, s=8) cell disagrees with its defining formula.
    assert_eq!(failing.len(), 1, "{text}");
    assert!(failing[0].contains("m=28 s=8"));
    assert_eq!(out.status.code(), Some(3));
}
