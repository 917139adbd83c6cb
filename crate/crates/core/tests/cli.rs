mod common;

use std::time::Instant;

use common::{data_dir, run_cli, run_pipeline};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["corpus.jsonl", "embeddings.txt", "annotations.tsv", "labels.tsv", "split.tsv"] {
        std::fs::copy(data_dir().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn help_and_version_exit_zero() {
    let dir = workdir();
    let out = run_cli(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in ["ingest", "negatives", "aggregate", "encode", "metric", "train", "score", "report"] {
        assert!(stdout(&out).contains(sub), "{sub} missing from help");
    }
    let out = run_cli(dir.path(), &["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(dialeval::VERSION));
}

#[test]
fn usage_errors_exit_two() {
    let dir = workdir();
    let out = run_cli(dir.path(), &["ingest", "--corpus", "corpus.jsonl", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:usage:"), "{}", stderr(&out));
    let out = run_cli(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_category() {
    let dir = workdir();
    let out = run_cli(
        dir.path(),
        &["train", "--mode", "supervised", "--corpus", "corpus.jsonl", "--embeddings", "embeddings.txt", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:missing-labels"), "{}", stderr(&out));

    let out = run_cli(dir.path(), &["ingest", "--corpus", "nope.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:io:"), "{}", stderr(&out));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn unresolved_annotation_ids_are_listed() {
    let dir = workdir();
    std::fs::write(dir.path().join("bad.tsv"), "pair_id\tworker_id\tdimension\tscore\nzz-1\tw1\trelevance\t3\n").unwrap();
    let out = run_cli(dir.path(), &["ingest", "--corpus", "corpus.jsonl", "--annotations", "bad.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zz-1"), "{}", stderr(&out));
}

#[test]
fn report_basic_prints_a_table() {
    let dir = workdir();
    let out = run_cli(dir.path(), &["metric", "run", "--corpus", "corpus.jsonl", "--metrics", "bleu2", "--out", "m.tsv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run_cli(dir.path(), &["report", "basic", "--scores", "m.tsv", "--labels", "labels.tsv", "--out", "r.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.lines().next().unwrap().split_whitespace().eq(["name", "n", "pearson", "spearman", "sd_pred", "sd_label"]));
    assert!(table.contains("bleu2"));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let row = csv.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "bleu2");
    assert_eq!(fields[1], "900");
    let r: f64 = fields[2].parse().unwrap();
    assert!(r > 0.0 && r < 1.0);
}

#[test]
fn outputs_carry_headers() {
    let dir = workdir();
    let out = run_cli(dir.path(), &["negatives", "--corpus", "corpus.jsonl", "--seed", "9", "--out", "n.jsonl"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("n.jsonl")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# dialeval "));
    assert!(header.iter().any(|l| l.starts_with("# command: negatives")));
    assert!(header.iter().any(|l| *l == "# seed: 9"));
    assert!(!header.iter().any(|l| l.contains("time")));

    let out = run_cli(dir.path(), &["--stamp", "negatives", "--corpus", "corpus.jsonl", "--out", "s.jsonl"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
    assert!(text.lines().take_while(|l| l.starts_with('#')).count() > header.len());
}

#[test]
fn config_file_fills_missing_flags_only() {
    let dir = workdir();
    std::fs::write(dir.path().join("cfg.json"), r#"{"k": 2, "seed": 5}"#).unwrap();
    let out = run_cli(
        dir.path(),
        &["--config-file", "cfg.json", "negatives", "--corpus", "corpus.jsonl", "--k", "1", "--out", "a.jsonl"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("added 100 "), "{}", stdout(&out));
    let text = std::fs::read_to_string(dir.path().join("a.jsonl")).unwrap();
    assert!(text.lines().any(|l| l == "# seed: 5"));

    let out = run_cli(dir.path(), &["--config-file", "cfg.json", "negatives", "--corpus", "corpus.jsonl", "--out", "b.jsonl"]);
    assert!(stdout(&out).contains("added 200 "), "{}", stdout(&out));

    let out = run_cli(dir.path(), &["--config-file", "missing.json", "negatives", "--corpus", "corpus.jsonl", "--out", "c.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn end_to_end_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (files, log) = run_pipeline(dir.path());
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "pipeline took {elapsed:.1}s");
    assert!(log.contains("added 100 negative samples"));
    let report = &files.iter().find(|(n, _)| n == "report.csv").unwrap().1;
    let text = String::from_utf8_lossy(report);
    let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "ruber_unref");
    let r: f64 = fields[2].parse().unwrap();
    assert!(r > 0.5, "pearson {r}");
}
