use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emtk_core::corpus::{parse_corpus, Delimiter, EmotionLabel};
use emtk_core::learner::{classify_emotions, EmotionClassifier};
use emtk_core::pipeline::PipelineConfig;
use tempfile::TempDir;

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn emtk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emtk"))
        .args(args)
        .current_dir(dir)
        .env_remove("EMTK_WORKSPACE")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}\nstderr: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn workdir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(repo_file("emotions/sample.csv"), dir.path().join("sample.csv")).unwrap();
    fs::copy(repo_file("polarity/Sample.csv"), dir.path().join("Sample.csv")).unwrap();
    dir
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

/// Three-class corpus where each class has its own cue words.
fn separable_polarity_csv() -> String {
    let cues = [
        ("positive", ["brilliant", "delighted", "superb"]),
        ("negative", ["broken", "horrible", "furious"]),
        ("neutral", ["parameter", "endpoint", "schema"]),
    ];
    let mut out = String::from("id;label;text\n");
    for i in 0..60 {
        let (label, words) = cues[i % 3];
        let text = format!("{} the {} file {} {}", words[i % 3], words[(i + 1) % 3], i % 7, words[(i + 2) % 3]);
        out.push_str(&format!("{i};{label};\"{text}\"\n"));
    }
    out
}

#[test]
fn polarity_sample_one_row_per_input() {
    let dir = workdir();
    let out = emtk(dir.path(), &["polarity", "-F", "A", "-i", "Sample.csv", "-oc", "out.csv", "-vd", "600"]);
    ok(&out);
    let rows = lines(&dir.path().join("out.csv"));
    assert_eq!(rows[0], "id,predicted");
    let input = parse_corpus(&fs::read(dir.path().join("Sample.csv")).unwrap(), Delimiter::Semicolon, false).unwrap();
    assert_eq!(rows.len() - 1, input.len());
    for (row, doc) in rows[1..].iter().zip(&input) {
        let (id, label) = row.split_once(',').unwrap();
        assert_eq!(id, doc.id);
        assert!(["positive", "negative", "neutral"].contains(&label), "{row}");
    }
    assert!(!dir.path().join("out_performance.txt").exists());
}

#[test]
fn polarity_is_idempotent() {
    let dir = workdir();
    let args = ["polarity", "-F", "L", "-i", "Sample.csv", "-oc", "a.csv", "-vd", "50"];
    ok(&emtk(dir.path(), &args));
    let first = fs::read(dir.path().join("a.csv")).unwrap();
    ok(&emtk(dir.path(), &args));
    assert_eq!(first, fs::read(dir.path().join("a.csv")).unwrap());
}

#[test]
fn polarity_keyword_allow_lists() {
    let dir = workdir();
    fs::write(dir.path().join("uni.txt"), "great\nbuild\n").unwrap();
    fs::write(dir.path().join("bi.txt"), "thank you\n").unwrap();
    let out = emtk(
        dir.path(),
        &["polarity", "-F", "K", "-i", "Sample.csv", "-oc", "k.csv", "-vd", "600", "-ul", "uni.txt", "-bl", "bi.txt"],
    );
    ok(&out);
    assert_eq!(lines(&dir.path().join("k.csv")).len(), 13);
}

#[test]
fn polarity_train_then_labeled_run_is_perfect() {
    let dir = workdir();
    fs::write(dir.path().join("gold.csv"), separable_polarity_csv()).unwrap();
    ok(&emtk(dir.path(), &["polarity-train", "-F", "K", "-i", "gold.csv", "-m", "model"]));
    for f in ["model_polarity.model", "features.cfg", "performance_polarity.txt", "n-grams/UnigramsList.txt"] {
        assert!(dir.path().join("model").join(f).exists(), "{f}");
    }
    let out = emtk(dir.path(), &["polarity", "-F", "K", "-i", "gold.csv", "-oc", "pred.csv", "-L", "-m", "model"]);
    ok(&out);
    let report = fs::read_to_string(dir.path().join("pred_performance.txt")).unwrap();
    let macro_line = report.lines().find(|l| l.starts_with("macro")).unwrap();
    assert!(macro_line.split_whitespace().skip(1).take(3).all(|v| v == "1.0000"), "{report}");

    // fragments must match the saved model
    let out = emtk(dir.path(), &["polarity", "-F", "L", "-i", "gold.csv", "-oc", "x.csv", "-m", "model"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("trained with features"), "{}", stderr(&out));
}

#[test]
fn polarity_usage_and_runtime_errors() {
    let dir = workdir();
    let out = emtk(dir.path(), &["polarity", "-F", "A", "-i", "Sample.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--oc"));

    let out = emtk(dir.path(), &["polarity", "-F", "X", "-i", "Sample.csv", "-oc", "o.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = emtk(dir.path(), &["polarity", "-F", "A", "-i", "missing.csv", "-oc", "o.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.csv"));

    fs::write(dir.path().join("ws.dsm"), "not a word space").unwrap();
    let out = emtk(dir.path(), &["polarity", "-F", "S", "-i", "Sample.csv", "-oc", "o.csv", "-W", "ws.dsm"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = workdir();
    fs::write(dir.path().join("bad.csv"), "id;label;text\n1;YES;\"fine\"\n2;NO\n").unwrap();
    let out = emtk(dir.path(), &["emotions", "train", "-i", "bad.csv", "-d", "sc", "-e", "joy"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    assert!(!dir.path().join("training_bad.csv_joy").exists());
}

#[test]
fn emotions_train_politeness_columns() {
    let dir = workdir();
    ok(&emtk(dir.path(), &["emotions", "train", "-i", "sample.csv", "-d", "sc", "-e", "love"]));
    let header = lines(&dir.path().join("training_sample.csv_love/feature-love.csv")).remove(0);
    assert!(header.starts_with("id;label;"));
    assert!(!header.contains("pol:") && !header.contains("mood:"), "{header}");

    let out = emtk(dir.path(), &["emotions", "train", "-i", "sample.csv", "-p", "-d", "sc", "-g", "-e", "love"]);
    ok(&out);
    assert!(stderr(&out).contains("-g"));
    let header = lines(&dir.path().join("training_sample.csv_love/feature-love.csv")).remove(0);
    assert!(header.contains("pol:") && header.contains("mood:"), "{header}");
}

#[test]
fn emotions_train_rejects_unknown_emotion() {
    let dir = workdir();
    let out = emtk(dir.path(), &["emotions", "train", "-i", "sample.csv", "-d", "sc", "-e", "hate"]);
    assert_eq!(out.status.code(), Some(2));
    for e in EmotionLabel::ALL {
        assert!(stderr(&out).contains(e.as_str()), "{}", stderr(&out));
    }
}

#[test]
fn emotions_classify_default_model() {
    let dir = workdir();
    ok(&emtk(dir.path(), &["emotions", "classify", "-i", "sample.csv", "-d", "sc", "-e", "anger"]));
    let out_dir = dir.path().join("classification_sample.csv_anger");
    let rows = lines(&out_dir.join("predictions_anger.csv"));
    assert_eq!(rows[0], "id;predicted");
    assert_eq!(rows.len() - 1, 124);
    assert!(rows[1..].iter().all(|r| r.ends_with(";YES") || r.ends_with(";NO")));
    assert!(!out_dir.join("performance_anger.txt").exists());

    ok(&emtk(dir.path(), &["emotions", "classify", "-i", "sample.csv", "-d", "sc", "-e", "anger", "-l"]));
    let report = fs::read_to_string(out_dir.join("performance_anger.txt")).unwrap().to_lowercase();
    for word in ["precision", "recall", "f1", "confusion matrix"] {
        assert!(report.contains(word), "{word} missing:\n{report}");
    }
}

#[test]
fn emotions_classify_needs_model_trio() {
    let dir = workdir();
    for args in [
        &["emotions", "classify", "-i", "sample.csv", "-d", "sc", "-e", "joy", "-m", "m.model"][..],
        &["emotions", "classify", "-i", "sample.csv", "-d", "sc", "-e", "joy", "-m", "m.model", "-f", "idfs"][..],
        &["emotions", "classify", "-i", "sample.csv", "-d", "sc", "-e", "joy", "-f", "idfs"][..],
    ] {
        assert_eq!(emtk(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn custom_model_round_trip() {
    let dir = workdir();
    ok(&emtk(dir.path(), &["emotions", "train", "-i", "sample.csv", "-d", "sc", "-e", "love"]));
    let tree = dir.path().join("training_sample.csv_love");
    let regime = tree.join("liblinear/NoDownSampling");
    fs::copy(regime.join("testSet.csv"), dir.path().join("held.csv")).unwrap();
    let model = regime.join("model_love_3.model");
    let (idfs, ngrams) = (tree.join("idfs"), tree.join("n-grams"));
    let out = emtk(
        dir.path(),
        &[
            "emotions",
            "classify",
            "-i",
            "held.csv",
            "-d",
            "sc",
            "-e",
            "love",
            "-l",
            "-m",
            model.to_str().unwrap(),
            "-f",
            idfs.to_str().unwrap(),
            "-o",
            ngrams.to_str().unwrap(),
        ],
    );
    ok(&out);
    let cli = lines(&dir.path().join("classification_held.csv_love/predictions_love.csv"));
    assert_eq!(cli, lines(&regime.join("predictions_love_3.csv")));

    // and the same through the library
    let docs = parse_corpus(&fs::read(dir.path().join("held.csv")).unwrap(), Delimiter::Semicolon, true).unwrap();
    let classifier = EmotionClassifier::load(EmotionLabel::Love, &model, &idfs, &ngrams, false).unwrap();
    let run = classify_emotions(&classifier, &docs, &PipelineConfig::with_workers(2)).unwrap();
    assert_eq!(run.predictions_csv(Delimiter::Semicolon).lines().collect::<Vec<_>>(), cli);
}

#[test]
fn bench_single_worker_is_unit_speedup() {
    let dir = workdir();
    let out = emtk(dir.path(), &["bench", "--task", "emotions", "--synthetic", "200", "--workers", "1", "--reps", "1"]);
    ok(&out);
    let csv = lines(&dir.path().join("bench.csv"));
    assert_eq!(csv[0], "task,workers,seconds,speedup,outputs_equal");
    assert_eq!(csv.len(), 2);
    let cols: Vec<&str> = csv[1].split(',').collect();
    assert_eq!((cols[0], cols[1], cols[3], cols[4]), ("emotions", "1", "1.00", "true"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("speedup"));
}

#[test]
fn bench_labeled_input_and_usage_errors() {
    let dir = workdir();
    let out = emtk(
        dir.path(),
        &[
            "bench",
            "--task",
            "polarity",
            "-F",
            "K",
            "-i",
            "sample.csv",
            "-L",
            "--workers",
            "1,2",
            "--reps",
            "1",
            "--csv",
            "r/b.csv",
        ],
    );
    ok(&out);
    assert_eq!(lines(&dir.path().join("r/b.csv")).len(), 3);

    assert_eq!(emtk(dir.path(), &["bench", "-i", "sample.csv"]).status.code(), Some(2));
    let out = emtk(dir.path(), &["bench", "--task", "emotions", "--synthetic", "5", "--workers", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn workspace_root_resolves_relative_paths() {
    let root = workdir();
    let elsewhere = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_emtk"))
            .args(args)
            .current_dir(elsewhere.path())
            .env("EMTK_WORKSPACE", root.path())
            .output()
            .unwrap()
    };
    ok(&run(&["polarity", "-F", "L", "-i", "Sample.csv", "-oc", "out/p.csv"]));
    assert!(root.path().join("out/p.csv").exists());
    assert!(!elsewhere.path().join("out").exists());

    let out = run(&["polarity", "-F", "L", "-i", "../Sample.csv", "-oc", "p.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("escapes"), "{}", stderr(&out));
}

#[test]
fn version_and_help() {
    let dir = workdir();
    let out = emtk(dir.path(), &["--version"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains(emtk_core::resources::DEFAULT_MODEL_NOTE));
    let out = emtk(dir.path(), &["emotions", "classify", "--help"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("-m <MODEL>"));
    assert_eq!(emtk(dir.path(), &[]).status.code(), Some(2));
}
