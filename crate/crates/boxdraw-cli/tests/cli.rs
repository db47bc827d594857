//! End-to-end tests of the command-line surface, driving the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn boxdraw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxdraw"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../boxdraw/tests/data")
        .join(name)
}

#[test]
fn generate_is_deterministic_and_respects_the_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--shape", "square", "--m", "1000", "--ratio", "9", "--seed", "5", "--out",
        "a.csv",
    ];
    assert!(boxdraw(dir.path(), &args).status.success());
    let out = boxdraw(
        dir.path(),
        &[
            "generate", "--shape", "square", "--m", "1000", "--ratio", "9", "--seed", "5", "--out",
            "b.csv",
        ],
    );
    assert!(out.status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",pos")).count(), 100);
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn unknown_shape_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = boxdraw(
        dir.path(),
        &[
            "generate", "--shape", "blob", "--m", "100", "--out", "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("blob"));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn train_then_predict_reproduces_the_printed_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &[
            "generate", "--shape", "corner", "--m", "400", "--ratio", "7", "--seed", "3", "--out",
            "data.csv",
        ],
    )
    .status
    .success());
    let train = boxdraw(
        dir.path(),
        &[
            "train",
            "--trainer",
            "fast",
            "--k",
            "1",
            "--c",
            "0.5",
            "--beta",
            "0.1",
            "--seed",
            "7",
            "data.csv",
            "model.json",
        ],
    );
    assert!(train.status.success(), "{}", stderr(&train));
    let text = stdout(&train);
    let counts = |marker: &str| -> (usize, usize) {
        let line = text.lines().find(|l| l.contains(marker)).unwrap();
        let inside = line.split('(').nth(1).unwrap().trim_end_matches(')');
        let mut parts = inside.split('/');
        (
            parts.next().unwrap().parse().unwrap(),
            parts.next().unwrap().parse().unwrap(),
        )
    };
    let (tp, positives) = counts("accuracy positive");
    let (tn, negatives) = counts("accuracy negative");

    let predict = boxdraw(
        dir.path(),
        &["predict", "model.json", "data.csv", "--out", "preds.csv"],
    );
    assert!(predict.status.success(), "{}", stderr(&predict));
    let preds = std::fs::read_to_string(dir.path().join("preds.csv")).unwrap();
    let mut lines = preds.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,label,prediction");
    let (mut got_tp, mut got_tn, mut got_pos, mut got_neg) = (0usize, 0usize, 0usize, 0usize);
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let (label, pred) = (cells[2], cells[3]);
        if label == "pos" {
            got_pos += 1;
            if pred == "1" {
                got_tp += 1;
            }
        } else {
            got_neg += 1;
            if pred == "-1" {
                got_tn += 1;
            }
        }
    }
    assert_eq!((got_tp, got_pos), (tp, positives));
    assert_eq!((got_tn, got_neg), (tn, negatives));
}

#[test]
fn exact_training_on_the_tiny_fixture_prints_the_oracle_objective() {
    let dir = tempfile::tempdir().unwrap();
    let fixture_path = fixture("tiny1d.csv");
    let out = boxdraw(
        dir.path(),
        &[
            "train",
            "--trainer",
            "exact",
            "--k",
            "1",
            "--ci",
            "0.5",
            "--ce",
            "0.1",
            fixture_path.to_str().unwrap(),
            "model.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // Best box covers both positives: 2 + 0.5 * 2 - 0.1 * 1.
    assert!(text.contains("objective: 2.9"), "{text}");
    assert!(text.contains("proven optimal"), "{text}");

    let describe = boxdraw(dir.path(), &["describe", "model.json"]);
    assert!(
        stdout(&describe).contains("x between"),
        "{}",
        stdout(&describe)
    );
}

#[test]
fn missing_label_column_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "a,b\n1,2\n").unwrap();
    let out = boxdraw(
        dir.path(),
        &["train", "data.csv", "model.json", "--label-column", "cls"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cls"));
    assert!(!dir.path().join("model.json").exists());
}

#[test]
fn renamed_feature_column_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &["generate", "--shape", "square", "--m", "100", "--ratio", "4", "--out", "data.csv",],
    )
    .status
    .success());
    assert!(boxdraw(dir.path(), &["train", "data.csv", "model.json"])
        .status
        .success());
    std::fs::write(dir.path().join("renamed.csv"), "x1,zz,label\n0.1,0.1,pos\n").unwrap();
    let out = boxdraw(dir.path(), &["predict", "model.json", "renamed.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x2"));
}

#[test]
fn predicting_an_empty_file_yields_just_the_header() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &["generate", "--shape", "square", "--m", "100", "--ratio", "4", "--out", "data.csv",],
    )
    .status
    .success());
    assert!(boxdraw(dir.path(), &["train", "data.csv", "model.json"])
        .status
        .success());
    std::fs::write(dir.path().join("empty.csv"), "x1,x2,label\n").unwrap();
    let out = boxdraw(dir.path(), &["predict", "model.json", "empty.csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "x1,x2,label,prediction\n");
}

#[test]
fn emit_lp_counts_match_the_formulation() {
    let dir = tempfile::tempdir().unwrap();
    // Two examples, one feature, one box: 2 continuous + 8 binary variables
    // and 17 rows.
    std::fs::write(dir.path().join("two.csv"), "x,label\n0.2,pos\n-0.4,neg\n").unwrap();
    let out = boxdraw(
        dir.path(),
        &["emit-lp", "two.csv", "--out", "two.lp", "--k", "1"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("variables: 10 (2 continuous, 8 binary)"),
        "{text}"
    );
    assert!(text.contains("constraints: 17"), "{text}");

    let lp = std::fs::read_to_string(dir.path().join("two.lp")).unwrap();
    let rows = lp
        .lines()
        .skip_while(|l| *l != "Subject To")
        .skip(1)
        .take_while(|l| *l != "Bounds")
        .count();
    assert_eq!(rows, 17);
    // Row names carry the constraint family and indices.
    assert!(lp.contains("c5_0_0_0:"));
    assert!(lp.contains("c21_0_0:"));
}

#[test]
fn emit_lp_refuses_oversized_programs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &["generate", "--shape", "square", "--m", "200", "--ratio", "4", "--out", "data.csv",],
    )
    .status
    .success());
    let out = boxdraw(
        dir.path(),
        &[
            "emit-lp", "data.csv", "--out", "big.lp", "--k", "2", "--cap", "100",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("800"), "{}", stderr(&out));
    assert!(!dir.path().join("big.lp").exists());
}

#[test]
fn bound_prints_the_oracle_value_and_scales() {
    let dir = tempfile::tempdir().unwrap();
    let run = |m: &str| {
        let out = boxdraw(
            dir.path(),
            &[
                "bound", "--k", "2", "--m", m, "--delta", "0.05", "--grid", "10,10,10",
            ],
        );
        assert!(out.status.success());
        stdout(&out).trim().parse::<f64>().unwrap()
    };
    let b1000 = run("1000");
    assert!((b1000 - 0.11212171964346597).abs() < 1e-12);
    let b4000 = run("4000");
    assert!((b1000 / b4000 - 2.0).abs() < 1e-12);

    let zero = boxdraw(
        dir.path(),
        &[
            "bound", "--k", "1", "--m", "10", "--delta", "1", "--grid", "2",
        ],
    );
    assert_eq!(stdout(&zero).trim(), "0");
}

#[test]
fn eval_rejects_more_folds_than_positives() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &[
            "generate", "--shape", "square", "--m", "100", "--ratio", "4", "--seed", "1", "--out",
            "data.csv",
        ],
    )
    .status
    .success());
    let out = boxdraw(
        dir.path(),
        &["eval", "data.csv", "--folds", "50", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("stratify"));
}

#[test]
fn eval_with_the_exact_trainer_runs_the_full_protocol() {
    let dir = tempfile::tempdir().unwrap();
    assert!(boxdraw(
        dir.path(),
        &[
            "generate", "--shape", "corner", "--m", "60", "--ratio", "3", "--seed", "2",
            "--out", "data.csv",
        ],
    )
    .status
    .success());
    let out = boxdraw(
        dir.path(),
        &[
            "eval", "data.csv", "--trainer", "exact", "--k", "1", "--folds", "3", "--seed",
            "4", "--out", "exact_report.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exact_report.json")).unwrap())
            .unwrap();
    let mean = report["mean_auh"].as_f64().unwrap();
    assert!(mean > 0.8, "exact trainer mean AUH {mean}");
}

#[test]
fn eval_on_iris0_reports_perfect_auh() {
    let dir = tempfile::tempdir().unwrap();
    let iris = fixture("iris0.csv");
    let out = boxdraw(
        dir.path(),
        &[
            "eval",
            iris.to_str().unwrap(),
            "--label-column",
            "species",
            "--positive-label",
            "Iris-setosa",
            "--folds",
            "10",
            "--out",
            "iris_report.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("mean AUH: 1"), "{}", stdout(&out));
    let report = std::fs::read_to_string(dir.path().join("iris_report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["mean_auh"], 1.0);
    assert_eq!(parsed["folds"].as_array().unwrap().len(), 10);
    let points = std::fs::read_to_string(dir.path().join("iris_report.points.csv")).unwrap();
    assert!(points.starts_with("fold,cost,tp,fp,tn,fn\n"));
    assert_eq!(points.lines().count(), 1 + 10 * 10);
    let hull = std::fs::read_to_string(dir.path().join("iris_report.hull.csv")).unwrap();
    assert!(hull.starts_with("fpr,tpr\n"));
}
