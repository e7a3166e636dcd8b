use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::CommandFactory;
use hsdetect::cli::Cli;
use hsdetect::corpus::{load_corpus, Corpus, CorpusFormat};
use hsdetect::eval::cross_validate;
use hsdetect::features::FeatureConfig;

fn hsdetect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsdetect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn demo(name: &str) -> String {
    format!("{}/data/demo/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn help_lists_every_flag_of_every_command() {
    let root = Cli::command();
    let out = hsdetect(&["--help"]);
    assert!(out.status.success());
    for sub in root.get_subcommands() {
        let name = sub.get_name();
        let out = hsdetect(&[name, "--help"]);
        assert!(out.status.success(), "{name} --help failed");
        let text = String::from_utf8(out.stdout).unwrap();
        for arg in sub.get_arguments().chain(root.get_arguments()) {
            if let Some(long) = arg.get_long() {
                assert!(text.contains(&format!("--{long}")), "{name} --help lacks --{long}");
            }
        }
    }
}

#[test]
fn exit_codes_follow_error_categories() {
    let dir = tempfile::tempdir().unwrap();
    let bad_config = dir.path().join("bad.toml");
    std::fs::write(&bad_config, "corpus = \"x.tsv\"\nsede = 3\n").unwrap();
    let out = hsdetect(&["--config", path_str(&bad_config), "bias"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));

    let out = hsdetect(&["bias"]);
    assert_eq!(out.status.code(), Some(2), "no corpus given");

    let out = hsdetect(&["bias", "--corpus", path_str(&dir.path().join("missing.tsv"))]);
    assert_eq!(out.status.code(), Some(3));

    let malformed = dir.path().join("malformed.tsv");
    std::fs::write(&malformed, "d1\thate\n").unwrap();
    let out = hsdetect(&["ingest", "--corpus", path_str(&malformed)]);
    assert_eq!(out.status.code(), Some(3));

    let tiny = dir.path().join("tiny.tsv");
    std::fs::write(&tiny, "d1\thate\teins zwei\nd2\tsafe\tdrei vier\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = hsdetect(&["cluster", "--corpus", path_str(&tiny), "--out", path_str(&out_dir)]);
    assert_eq!(out.status.code(), Some(4), "nothing to cluster");
    let out = hsdetect(&["crossval", "--corpus", path_str(&tiny), "--k", "5", "--out", path_str(&out_dir)]);
    assert_eq!(out.status.code(), Some(4), "more folds than documents per class");

    let out = hsdetect(&["crossval", "--corpus", path_str(&tiny), "--bogus"]);
    assert_eq!(out.status.code(), Some(2), "unknown flag");
}

#[test]
fn crossval_report_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsdetect(&[
        "crossval",
        "--corpus",
        &demo("corpus.tsv"),
        "--k",
        "10",
        "--seed",
        "7",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let corpus = load_corpus(demo("corpus.tsv"), CorpusFormat::Tsv).unwrap();
    let labeled = Corpus::new(corpus.iter().filter(|d| d.label.is_labeled()).cloned().collect()).unwrap();
    let report = cross_validate(&labeled, &FeatureConfig::full(), 10, 5, 7).unwrap();
    let written = std::fs::read_to_string(dir.path().join("crossval.json")).unwrap();
    assert_eq!(written.trim_end(), report.to_json().trim_end());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim_end(), report.summary());
    assert!(stdout.contains("P=") && stdout.contains("R=") && stdout.contains("F1"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!("corpus = {:?}\nk = 3\nseed = 1\nfeatures = [\"w1\"]\n", demo("corpus.tsv")),
    )
    .unwrap();
    let out = hsdetect(&["--config", path_str(&config), "crossval", "--out", path_str(&out_dir)]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("crossval.json")).unwrap()).unwrap();
    assert_eq!(json["k"], 3);
    assert_eq!(json["feature_config"]["use_w1"], true);
    assert_eq!(json["feature_config"]["use_ch3"], false);

    let out = hsdetect(&["--config", path_str(&config), "crossval", "--k", "4", "--out", path_str(&out_dir)]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("crossval.json")).unwrap()).unwrap();
    assert_eq!(json["k"], 4);
}

#[test]
fn bundled_config_runs_every_corpus_command() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_path_buf();
    let config = demo("config.toml");
    let expected: [(&str, &[&str]); 11] = [
        ("ingest", &["corpus.jsonl", "ingest.json"]),
        ("train", &["model.json"]),
        ("crossval", &["crossval.json", "crossval.tsv"]),
        ("ablate", &["ablation.tsv", "ablation.json"]),
        ("bias", &["bias.tsv", "bias.json"]),
        ("pairs", &["pairs.tsv", "pairs.json"]),
        ("cluster", &["clusters.json"]),
        ("wordtree", &["wordtree.json"]),
        ("sentiment", &["sentiment.tsv", "sentiment.json"]),
        ("refs", &["refs.tsv", "refs.json"]),
        ("cues", &["cues.tsv"]),
    ];
    for (command, files) in expected {
        let out = hsdetect(&["--config", &config, command, "--out", path_str(&out_dir)]);
        assert!(
            out.status.success(),
            "{command}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty(), "{command} printed no summary");
        for f in files {
            assert!(out_dir.join(f).is_file(), "{command} did not write {f}");
        }
    }

    let model: PathBuf = out_dir.join("model.json");
    let out = hsdetect(&["predict", "--model", path_str(&model), "--text", "zottige Zwiebler quatzen"]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let (label, score) = line.trim().split_once('\t').expect("label and score");
    assert_eq!(label, "hate");
    assert!(score.parse::<f64>().unwrap() > 0.0);

    let out = hsdetect(&["--config", &config, "predict", "--model", path_str(&model), "--out", path_str(&out_dir)]);
    assert!(out.status.success());
    let predictions = std::fs::read_to_string(out_dir.join("predictions.tsv")).unwrap();
    assert_eq!(predictions.lines().count(), 321);
}

#[test]
fn ablation_table_has_six_rows_in_column_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsdetect(&[
        "ablate",
        "--corpus",
        &demo("corpus.tsv"),
        "--k",
        "5",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(out.status.success());
    let tsv = std::fs::read_to_string(dir.path().join("ablation.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "CH3\tCH2\tCH1\tW1\tW2\t@\tP\tR\tF1\tF1_macro");
    assert_eq!(rows.len(), 7);
    let marks: Vec<String> = rows[1..]
        .iter()
        .map(|r| r.split('\t').take(6).collect::<Vec<_>>().join(""))
        .collect();
    assert_eq!(marks, ["✓-----", "✓✓----", "✓✓✓---", "✓✓✓✓--", "✓✓✓✓✓-", "✓✓✓✓✓✓"]);
}

#[test]
fn cues_single_handle_prints_hits() {
    let out = hsdetect(&["cues", "--handle", "sturm88", "--profile", "hello"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["handle"][0]["expansion_or_keyword"], "HH");
    assert_eq!(json["profile"].as_array().unwrap().len(), 0);
}
