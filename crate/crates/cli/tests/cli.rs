//! CLI behavior: exit codes, subcommand wiring and file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn sde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sde"))
        .args(args)
        .output()
        .unwrap()
}

fn make_corpus(dir: &Path, n: usize) -> PathBuf {
    let corpus = dir.join("corpus.jsonl");
    let out = sde(&[
        "fixtures",
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--dist",
        repo_fixture("distributions/d1_train500.json").to_str().unwrap(),
        "--n",
        &n.to_string(),
        "--seed",
        "7",
        "--out",
        corpus.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    corpus
}

#[test]
fn missing_input_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sde(&[
        "fixtures",
        "--schema",
        "/nonexistent/schema.json",
        "--dist",
        repo_fixture("distributions/d1_train500.json").to_str().unwrap(),
        "--n",
        "5",
        "--seed",
        "1",
        "--out",
        dir.path().join("x.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_strategy_string_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = make_corpus(dir.path(), 3);
    let out = sde(&[
        "render",
        "--corpus",
        corpus.to_str().unwrap(),
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--strategy",
        "inst_first/no_mi/tables/pu/txt/no_cot",
        "--out",
        dir.path().join("s.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tables"));
}

#[test]
fn malformed_corpus_line_exits_1_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\":\"r1\",\"text\":\"x\",\"labels\":{\"food\":\"positive\",\"beverage\":\"unmentioned\",\"price\":\"unmentioned\",\"hygiene\":\"unmentioned\",\"staff attitude\":\"unmentioned\",\"parking convenience\":\"unmentioned\"}}\nnot json\n",
    )
    .unwrap();
    let out = sde(&[
        "render",
        "--corpus",
        corpus.to_str().unwrap(),
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--strategy",
        "ES-SDE",
        "--out",
        dir.path().join("s.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn unknown_flag_exits_1_and_help_exits_0() {
    let out = sde(&["fixtures", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sde(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn parse_subcommand_writes_outcome_lines() {
    let dir = tempfile::tempdir().unwrap();
    let predictions = dir.path().join("preds.jsonl");
    std::fs::write(
        &predictions,
        concat!(
            "{\"id\":\"a\",\"output\":\"food: positive\\nbeverage: unmentioned\\nprice: unmentioned\\nhygiene: unmentioned\\nstaff attitude: unmentioned\\nparking convenience: unmentioned\"}\n",
            "{\"id\":\"b\",\"output\":\"garbage\"}\n",
        ),
    )
    .unwrap();
    let outcomes = dir.path().join("outcomes.jsonl");
    let out = sde(&[
        "parse",
        "--predictions",
        predictions.to_str().unwrap(),
        "--strategy",
        "ES-SDE",
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--out",
        outcomes.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&outcomes).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["id"], "a");
    assert_eq!(rows[0]["format_error"], false);
    assert_eq!(rows[0]["predictions"]["kind"], "masa");
    assert_eq!(rows[0]["predictions"]["labels"]["food"], "positive");
    assert_eq!(rows[1]["format_error"], true);
    assert_eq!(rows[1]["repairs"].as_array().unwrap().len(), 2);
}

#[test]
fn duplicate_prediction_ids_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let predictions = dir.path().join("preds.jsonl");
    std::fs::write(
        &predictions,
        "{\"id\":\"a\",\"output\":\"x\"}\n{\"id\":\"a\",\"output\":\"y\"}\n",
    )
    .unwrap();
    let out = sde(&[
        "parse",
        "--predictions",
        predictions.to_str().unwrap(),
        "--strategy",
        "ES-SDE",
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--out",
        dir.path().join("o.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn grid_render_score_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = make_corpus(dir.path(), 24);
    let runs = dir.path().join("runs");
    let out = sde(&[
        "grid",
        "--baseline",
        "inst_last/no_mi/natural/pu/txt/no_cot",
        "--group",
        "reasoning",
        "--task-id",
        "d1",
        "--train-size",
        "20",
        "--out-dir",
        runs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifests: Vec<PathBuf> = std::fs::read_dir(&runs)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            p.to_str().unwrap().ends_with(".manifest.json").then_some(p)
        })
        .collect();
    assert_eq!(manifests.len(), 3, "baseline + CoT + R-CoT");

    // Emit each run and score echoed eval-split predictions.
    for manifest_path in &manifests {
        let out = sde(&[
            "render",
            "--corpus",
            corpus.to_str().unwrap(),
            "--schema",
            repo_fixture("schemas/d1.json").to_str().unwrap(),
            "--manifest",
            manifest_path.to_str().unwrap(),
            "--out-dir",
            runs.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
        let run_id = manifest["run_id"].as_str().unwrap();
        let strategy = manifest["strategy"].as_str().unwrap();

        // Gold test split = records after train_size.
        let gold_lines: Vec<String> = std::fs::read_to_string(&corpus)
            .unwrap()
            .lines()
            .skip(20)
            .map(str::to_string)
            .collect();
        let gold_path = dir.path().join(format!("{run_id}.gold.jsonl"));
        std::fs::write(&gold_path, gold_lines.join("\n") + "\n").unwrap();

        // Render the test split under the run's strategy and echo responses.
        let rendered = dir.path().join(format!("{run_id}.rendered.jsonl"));
        let out = sde(&[
            "render",
            "--corpus",
            gold_path.to_str().unwrap(),
            "--schema",
            repo_fixture("schemas/d1.json").to_str().unwrap(),
            "--strategy",
            strategy,
            "--out",
            rendered.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut echo = String::new();
        for line in std::fs::read_to_string(&rendered).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            echo.push_str(
                &serde_json::json!({"id": v["id"], "output": v["response"]}).to_string(),
            );
            echo.push('\n');
        }
        let preds = dir.path().join(format!("{run_id}.preds.jsonl"));
        std::fs::write(&preds, echo).unwrap();

        let out = sde(&[
            "score",
            "--manifest",
            manifest_path.to_str().unwrap(),
            "--gold",
            gold_path.to_str().unwrap(),
            "--schema",
            repo_fixture("schemas/d1.json").to_str().unwrap(),
            "--predictions",
            preds.to_str().unwrap(),
            "--out",
            runs.join(format!("{run_id}.report.json")).to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }

    let out = sde(&[
        "report",
        "--reports-dir",
        runs.to_str().unwrap(),
        "--baseline",
        "inst_last/no_mi/natural/pu/txt/no_cot",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("option"), "{table}");
    assert!(table.contains("mean_rank"), "{table}");
    assert!(table.contains("inst_last/no_mi/natural/pu/txt/cot"), "{table}");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(runs.join("report.json")).unwrap()).unwrap();
    assert_eq!(
        summary["deltas"]["inst_last/no_mi/natural/pu/txt/no_cot"].as_f64(),
        Some(0.0)
    );
    assert_eq!(summary["grid"]["options"].as_array().unwrap().len(), 3);
}

#[test]
fn report_on_empty_dir_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = sde(&[
        "report",
        "--reports-dir",
        dir.path().to_str().unwrap(),
        "--baseline",
        "ES-SDE",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn score_with_missing_prediction_exits_1_naming_ids() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = make_corpus(dir.path(), 3);
    let preds = dir.path().join("preds.jsonl");
    std::fs::write(&preds, "{\"id\":\"d1-00001\",\"output\":\"x\"}\n").unwrap();
    let out = sde(&[
        "score",
        "--strategy",
        "ES-SDE",
        "--gold",
        corpus.to_str().unwrap(),
        "--schema",
        repo_fixture("schemas/d1.json").to_str().unwrap(),
        "--predictions",
        preds.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("d1-00002"), "{stderr}");
}
