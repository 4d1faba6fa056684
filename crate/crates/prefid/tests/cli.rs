use std::path::Path;
use std::process::{Command, Output};

use prefid::io::{read_cohort, write_cohort, DataSource};
use serde_json::Value;

fn prefid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prefid")).args(args).env_remove("PREFID_DATA").output().unwrap()
}

fn prefid_with_data(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prefid")).args(args).env("PREFID_DATA", dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

/// Value column of a two-column `row,value` CSV.
fn csv_value(text: &str, row: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{row},")).map(str::to_string))
        .unwrap_or_else(|| panic!("no row {row} in\n{text}"))
}

#[test]
fn identify_improved_sample_as_csv() {
    let o = prefid(&["identify", "--model", "owa", "--sample", "E'", "--variance", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("row,value\n"));
    assert_eq!(csv_value(&out, "w1"), "0.539577");
    assert_eq!(csv_value(&out, "a"), "43.0502");
    assert_eq!(csv_value(&out, "valid"), "true");
}

#[test]
fn identify_reports_invalid_weights_with_success() {
    let o = prefid(&["identify", "--sample", "E3", "--variance", "0.5", "--model", "owa", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let j = json(&o);
    assert_eq!(j["valid"], Value::Bool(false));
    assert!(j["weights"].as_array().unwrap().iter().any(|w| w.as_f64().unwrap() < 0.0));
    assert!(j.get("rms_weight_dev").is_none());
}

#[test]
fn json_keeps_full_precision() {
    let o = prefid(&["identify", "--sample", "E'", "--format", "json"]);
    let w1 = json(&o)["weights"][0].as_f64().unwrap();
    assert!((w1 - 0.53957671).abs() < 1e-8);
    assert!(w1.to_string().len() > 10);
}

#[test]
fn identify_accepts_id_lists() {
    let named = prefid(&["identify", "--sample", "E'", "--format", "json"]);
    let listed = prefid(&["identify", "--sample", "162,292,592,813,3162", "--format", "json"]);
    assert_eq!(json(&named)["weights"], json(&listed)["weights"]);
}

#[test]
fn reproduce_exchange_table() {
    let o = prefid(&["reproduce", "--table", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# Table 10"));
    assert!(out.contains("row,E1,E2,E3,E4,E5,E6,E7,E8\n"));
    assert!(out.contains("final_det,0.0184172,0.0184172,0.0153643"));
}

#[test]
fn doptimal_trace_json() {
    let o = prefid(&["doptimal", "--model", "maut", "--sample", "E4", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j = json(&o);
    let mut ids: Vec<u64> =
        j[0]["final_sample"]["ids"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    ids.sort_unstable();
    assert_eq!(ids, [162, 733, 1103, 1323, 3062]);
    let steps = j[0]["iterations"].as_array().unwrap();
    assert!(!steps.is_empty());
    for key in ["swapped_in", "swapped_out", "u1", "u2", "det_after"] {
        assert!(steps[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn best_pair_rule_never_ends_lower() {
    let leverage = prefid(&["doptimal", "--sample", "E8", "--format", "json"]);
    let best = prefid(&["doptimal", "--sample", "E8", "--rule", "best-pair", "--format", "json"]);
    let det = |o: &Output| json(o)[0]["final_det"].as_f64().unwrap();
    assert!(det(&best) >= det(&leverage));
}

#[test]
fn choquet_and_coverage() {
    let o = prefid(&["choquet", "--variance", "0.1", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j = json(&o);
    assert!((j["capacity"]["1"].as_f64().unwrap() - 0.30762376).abs() < 1e-6);
    assert_eq!(j["capacity"]["1234"].as_f64(), Some(1.0));
    let c = json(&prefid(&["choquet", "--coverage", "--format", "json"]));
    assert_eq!(c["1"], 22);
    assert_eq!(c["a_b"], 47);
}

#[test]
fn hybrid_and_evaluate() {
    let h = json(&prefid(&["hybrid", "--variance", "0.5", "--format", "json"]));
    assert!((h["omega"].as_f64().unwrap() - 0.64250741).abs() < 1e-6);
    let e = json(&prefid(&["evaluate", "--variance", "0.1", "--format", "json"]));
    assert_eq!(e["validation_ids"].as_array().unwrap().len(), 28);
    assert!(e["hybrid"]["var"].as_f64().unwrap() <= e["owa"]["var"].as_f64().unwrap());
}

#[test]
fn simulate_is_seeded() {
    let a = prefid(&["simulate", "--seed", "7"]);
    let b = prefid(&["simulate", "--seed", "7"]);
    let c = prefid(&["simulate", "--seed", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("id,score,note_v01,note_v05,note_v1\n"));
    assert_eq!(out.lines().count(), 48);
    let zero = stdout(&prefid(&["simulate", "--variance", "0.1"]));
    assert!(zero.starts_with("id,score,note_v01\n"));
}

#[test]
fn reproduce_all_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = prefid(&["reproduce", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 22, "{names:?}");
    assert!(names.iter().any(|n| n == "deltas.csv"));
    assert!(names.iter().any(|n| n == "summary.csv"));
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn missing_data_exits_with_one() {
    let empty = tempfile::tempdir().unwrap();
    let o = prefid_with_data(empty.path(), &["reproduce"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=io exit=1 message="), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn data_directory_overrides_bundled_files() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = DataSource::Bundled.cohort_as_printed().unwrap();
    let mut buf = Vec::new();
    write_cohort(&cohort, &mut buf).unwrap();
    std::fs::write(dir.path().join("cohort.csv"), &buf).unwrap();
    // no errata file: utilities stay as printed
    let o = prefid_with_data(dir.path(), &["identify", "--sample", "E2", "--format", "json"]);
    let printed = prefid(&["identify", "--sample", "E2", "--as-printed", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["weights"], json(&printed)["weights"]);
}

#[test]
fn cohort_round_trip() {
    let cohort = DataSource::Bundled.cohort(false).unwrap();
    let mut buf = Vec::new();
    write_cohort(&cohort, &mut buf).unwrap();
    let back = read_cohort(buf.as_slice()).unwrap();
    assert_eq!(back, cohort);
}

#[test]
fn explicit_cohort_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let mut buf = Vec::new();
    write_cohort(&DataSource::Bundled.cohort(false).unwrap(), &mut buf).unwrap();
    std::fs::write(&path, &buf).unwrap();
    let a = prefid(&["identify", "--sample", "E'", "--cohort", path.to_str().unwrap()]);
    let b = prefid(&["identify", "--sample", "E'"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn named_samples_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    std::fs::write(&path, "name,ids\nbest,162;292;592;813;3162\n").unwrap();
    let o = prefid(&["identify", "--sample", "best", "--samples", path.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["sample"], "best");
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let o = prefid(&["identify", "--sample", "E'", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().starts_with("row,value\n"));
}

#[test]
fn validation_errors_exit_with_one() {
    for args in [
        &["identify", "--sample", "E9"][..],
        &["identify", "--sample", "162,162,592,813,3162"],
        &["identify", "--sample", "E1", "--variance", "2"],
        &["reproduce", "--table", "3"],
        &["frobnicate"],
    ] {
        let o = prefid(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert!(err.starts_with("error kind="), "{err}");
        assert_eq!(err.lines().count(), 1, "{err}");
    }
}

#[test]
fn singular_design_exits_with_two() {
    // five copies of one utility profile make the OWA design rank one
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("id,u1,u2,u3,u4,note_v01,note_v05,note_v1\n");
    for id in 1..=5 {
        text.push_str(&format!("{id},0.5,0.5,0.5,0.5,1,2,3\n"));
    }
    std::fs::write(&path, text).unwrap();
    let o = prefid(&["identify", "--sample", "1,2,3,4,5", "--cohort", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error kind=numerical exit=2"));
}

#[test]
fn help_exits_cleanly() {
    let o = prefid(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("reproduce"));
}

#[test]
fn simulated_notes_read_back_as_a_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let bundled = DataSource::Bundled.cohort(false).unwrap();
    let mut text = String::new();
    let sim = stdout(&prefid(&["simulate", "--seed", "3"]));
    // append the utilities so the file is a full cohort
    for (i, line) in sim.lines().enumerate() {
        let (id, rest) = line.split_once(',').unwrap();
        let us = if i == 0 {
            "u1,u2,u3,u4".to_string()
        } else {
            let p = bundled.get(id.parse().unwrap()).unwrap();
            p.utilities.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        };
        text.push_str(&format!("{id},{us},{rest}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let cohort = read_cohort(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(cohort.len(), 47);
}
