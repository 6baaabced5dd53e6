//! End-to-end tests of the binary: subcommand behaviour, canonical output,
//! reproducibility, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_neoplastic")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("neoplastic-cli-tests")
        .join(format!("{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(bin())
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn gen_corpus(dir: &Path, seed: u64, count: u32, extra: &[&str]) {
    let mut args = vec![
        "gen".to_string(),
        "--seed".into(),
        seed.to_string(),
        "--count".into(),
        count.to_string(),
        "--out".into(),
        dir.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let out = Command::new(bin()).args(&args).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_is_byte_reproducible() {
    let dir = scratch("repro");
    gen_corpus(&dir.join("corpus"), 11, 4, &["--chain"]);
    let manifest = dir.join("corpus/manifest.json");
    for name in ["a.json", "b.json"] {
        let out = run(&[
            "run",
            manifest.to_str().unwrap(),
            "--out",
            dir.join(name).to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(dir.join("a.json")).unwrap();
    let b = fs::read(dir.join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validate_reports_strict_violations_with_exit_zero() {
    let dir = scratch("validate");
    gen_corpus(&dir.join("off"), 5, 2, &["--defect", "diagonal-line"]);
    let out = run(&[
        "validate",
        dir.join("off/manifest.json").to_str().unwrap(),
        "--strict",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("orientation_violation"), "{text}");

    // Violations are data; without --strict the same corpus is clean.
    let out = run(&["validate", dir.join("off/manifest.json").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("orientation_violation"), "{text}");
}

#[test]
fn schema_errors_exit_nonzero_with_path() {
    let dir = scratch("schema");
    let bad = dir.join("bad.json");
    fs::write(
        &bad,
        r#"{"id":"x","ordinal":0,"canvas":{"height_ratio":0},"elements":[]}"#,
    )
    .unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("/canvas/height_ratio"), "{err}");
}

#[test]
fn render_emits_one_rect_per_element_plus_background() {
    let dir = scratch("render");
    gen_corpus(&dir.join("corpus"), 3, 1, &[]);
    let comp_path = dir.join("corpus/comp_000.json");
    let svg_path = dir.join("out.svg");
    let out = run(&[
        "render",
        comp_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let svg = fs::read_to_string(&svg_path).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&comp_path).unwrap()).unwrap();
    let n_elements = doc["elements"].as_array().unwrap().len();
    assert_eq!(svg.matches("<rect").count(), n_elements + 1);
}

#[test]
fn score_csv_has_one_row_per_candidate() {
    let dir = scratch("scorecsv");
    gen_corpus(&dir.join("corpus"), 21, 8, &[]);
    gen_corpus(
        &dir.join("cands"),
        900,
        5,
        &["--defect", "offpalette-color"],
    );
    let csv_path = dir.join("scores.csv");
    let out = run(&[
        "score",
        dir.join("corpus/manifest.json").to_str().unwrap(),
        "--candidates",
        dir.join("cands/manifest.json").to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
        "--out",
        dir.join("scores.json").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5, "{csv}");
}

#[test]
fn neo_seed_env_overrides_config_seed() {
    let dir = scratch("neoseed");
    gen_corpus(&dir.join("corpus"), 2, 2, &["--chain"]);
    let manifest = dir.join("corpus/manifest.json");
    let out = run_env(
        &[
            "run",
            manifest.to_str().unwrap(),
            "--out",
            dir.join("r.json").to_str().unwrap(),
        ],
        "NEO_SEED",
        "777",
    );
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], serde_json::json!(777));
}

#[test]
fn mine_summary_is_human_readable() {
    let dir = scratch("minesum");
    gen_corpus(&dir.join("corpus"), 31, 6, &[]);
    let out = run(&[
        "mine",
        dir.join("corpus/manifest.json").to_str().unwrap(),
        "--summary",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("style invariants:"), "{text}");
    assert!(text.contains("orientation_classes subset_of"), "{text}");
}

#[test]
fn diff_csv_lists_occurrence_frequencies() {
    let dir = scratch("diffcsv");
    gen_corpus(&dir.join("corpus"), 41, 3, &["--chain"]);
    let csv_path = dir.join("freqs.csv");
    let out = run(&[
        "diff",
        dir.join("corpus/manifest.json").to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
        "--out",
        dir.join("diff.json").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("ordinal,id,signature,frequency\n"));
    assert!(csv.lines().count() > 3);
}
