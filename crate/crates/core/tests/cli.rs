use std::path::Path;
use std::process::{Command, Output};

fn carms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carms")).args(args).output().expect("binary runs")
}

const SMALL_TOY: &[&str] = &["toy", "--trials", "2", "--inner", "200", "--alpha", "1,1000", "--seed", "7"];

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&raw).unwrap()
}

fn assert_lines_valid(validator: &jsonschema::Validator, stdout: &[u8]) -> usize {
    let text = std::str::from_utf8(stdout).unwrap();
    let mut count = 0;
    for line in text.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{line}: {errors:?}");
        count += 1;
    }
    count
}

#[test]
fn toy_jsonl_matches_schema() {
    let mut args = SMALL_TOY.to_vec();
    args.extend(["--output", "jsonl"]);
    let out = carms(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let n = assert_lines_valid(&schema("toy_record.schema.json"), &out.stdout);
    assert_eq!(n, 2 * 2 * 4);
}

#[test]
fn timing_field_is_opt_in_and_schema_valid() {
    let mut args = SMALL_TOY.to_vec();
    args.extend(["--output", "jsonl", "--timing", "--method", "loorf"]);
    let out = carms(&args);
    assert!(out.status.success());
    assert_lines_valid(&schema("toy_record.schema.json"), &out.stdout);
    assert!(String::from_utf8_lossy(&out.stdout).contains("elapsed_ms"));
    let plain = carms(SMALL_TOY);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("elapsed_ms"));
}

#[test]
fn correlation_jsonl_matches_schema() {
    for method in ["inverse-cdf", "gumbel", "independent"] {
        let out = carms(&["correlation", "--method", method, "--categories", "4", "--output", "jsonl"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(assert_lines_valid(&schema("correlation_record.schema.json"), &out.stdout), 16);
    }
}

#[test]
fn toy_csv_echoes_config_on_every_row() {
    let out = carms(SMALL_TOY);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    for col in ["method", "copula", "categories", "dims", "samples", "alpha", "trial", "seed", "clip", "orderings"] {
        assert!(header.iter().any(|h| h == col), "missing column {col}");
    }
    assert!(header.iter().any(|h| h == "var_d3_c3"));
    let seed_col = header.iter().position(|h| h == "seed").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.len() == header.len() && &r[seed_col] == "7"));
}

#[test]
fn out_path_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut args = SMALL_TOY.to_vec();
    let path_str = path.to_str().unwrap();
    args.extend(["--out-path", path_str]);
    assert!(carms(&args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), carms(SMALL_TOY).stdout);
}

#[test]
fn different_seeds_give_different_output() {
    let a = carms(SMALL_TOY).stdout;
    let mut args = SMALL_TOY.to_vec();
    *args.last_mut().unwrap() = "8";
    assert_ne!(a, carms(&args).stdout);
}

#[test]
fn selfcheck_passes_and_catches_an_injected_fault() {
    let ok = carms(&["selfcheck"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = carms(&["selfcheck", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("unbiasedness-enumeration"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["toy", "--method", "nope"],
        &["toy", "--copula", "gaussian", "--method", "carms-i"],
        &["toy", "--clip", "-3"],
        &["toy", "--output", "xml"],
        &["toy", "--bogus-flag"],
        &["correlation", "--draws", "10"],
        &["correlation", "--probs", "0.5,0.6,0.1"],
        &["selfcheck", "--level", "extreme"],
    ];
    for args in cases {
        let out = carms(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
