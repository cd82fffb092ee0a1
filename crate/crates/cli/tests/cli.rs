use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use soundscape_eval::dataset::thai_candidates;
use soundscape_eval::ingest::responses_to_csv;
use soundscape_eval::pipeline::{analyze, RunConfig};
use soundscape_eval::questionnaire::generate_items;
use soundscape_eval::synthetic;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soundscape-eval"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn single_diagnostic(o: &Output, tag: &str) {
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error[{tag}]: ")), "{err}");
}

fn demo_inputs(dir: &Path, seed: u64) -> PathBuf {
    let items = generate_items(&thai_candidates(), "Thai").unwrap();
    let path = dir.join("responses.csv");
    fs::write(
        &path,
        responses_to_csv(&synthetic::random_responses(&items, 31, seed)),
    )
    .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_reports_item_count_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["generate", "--seed", "42", "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("178 items"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 179);

    let o = run(&["generate", "--format", "json"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("178 items"));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with('{'));
}

#[test]
fn generate_rejects_malformed_attribute_naming_the_row() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("c.csv");
    fs::write(
        &c,
        "id,attribute,local_text\nx1,pleasant,foo\nx2,plesant,bar\n",
    )
    .unwrap();
    let o = run(&["generate", "--candidates", s(&c), "--language", "X"]);
    assert_eq!(o.status.code(), Some(1));
    single_diagnostic(&o, "validation");
    assert!(stderr(&o).contains("row 2"));

    let o = run(&["generate", "--candidates", s(&c)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_writes_all_report_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let responses = demo_inputs(tmp.path(), 11);
    let out = tmp.path().join("out");
    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--out-dir",
        s(&out),
        "--format",
        "json",
        "--ascii-markers",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "scores_main.json",
        "scores_derived.json",
        "tests.json",
        "distribution.csv",
        "recommendations.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.contains(" candidates, "))
            .count(),
        8
    );
    let scores = fs::read_to_string(out.join("scores_main.json")).unwrap();
    assert!(!scores.contains('\u{2295}'));
}

#[test]
fn weighted_without_participants_names_the_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    let responses = demo_inputs(tmp.path(), 1);
    let out = tmp.path().join("out");
    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--weighted",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    single_diagnostic(&o, "validation");
    assert!(stderr(&o).contains("participants file"));
    assert!(!out.exists());
}

#[test]
fn failure_classes_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        "--responses",
        s(&tmp.path().join("nope.csv")),
        "--out-dir",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    single_diagnostic(&o, "io");

    let responses = demo_inputs(tmp.path(), 1);
    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--alpha-strong",
        "0.2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    single_diagnostic(&o, "validation");

    let o = run(&["analyze", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    single_diagnostic(&o, "usage");

    let mut doc = fs::read_to_string(&responses).unwrap();
    doc.push_str("P01,pleasant.pl-1.APPR,7\n");
    fs::write(&responses, doc).unwrap();
    let out = tmp.path().join("dup");
    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    single_diagnostic(&o, "validation");
    assert!(stderr(&o).contains("Duplicate"));
    assert!(!out.exists());

    let o = run(&["validate", "--responses", s(&responses)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let responses = demo_inputs(tmp.path(), 2);
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "alpha_posthoc_gate = 0.02\nalpha_strong = 0.03\noutput_format = \"csv\"\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--config",
        s(&cfg),
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1), "invalid config must be rejected");

    let o = run(&[
        "analyze",
        "--responses",
        s(&responses),
        "--config",
        s(&cfg),
        "--alpha-strong",
        "0.01",
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("tests.csv").is_file());
    let written = fs::read_to_string(out.join("run_config.toml")).unwrap();
    assert!(
        written.contains("alpha_posthoc_gate = 0.02") && written.contains("alpha_strong = 0.01")
    );
}

#[test]
fn looser_gate_tests_more_families() {
    // Find a synthetic dataset with a family whose omnibus p lies in [0.05, 0.10).
    let cands = thai_candidates();
    let items = generate_items(&cands, "Thai").unwrap();
    let (seed, attr, crit) = (0..200u64)
        .find_map(|seed| {
            let doc = responses_to_csv(&synthetic::random_responses(&items, 31, seed));
            let a = analyze(&cands, &doc, None, &RunConfig::default()).unwrap();
            a.families
                .iter()
                .find(|f| (0.05..0.10).contains(&f.omnibus.p))
                .map(|f| (seed, f.attribute.to_string(), f.criterion.to_string()))
        })
        .expect("a borderline family exists");

    let tmp = tempfile::tempdir().unwrap();
    let responses = demo_inputs(tmp.path(), seed);
    let prefix = format!("{attr},{crit},");
    let rows = |gate: &str| {
        let out = tmp.path().join(format!("gate{gate}"));
        let o = run(&[
            "analyze",
            "--responses",
            s(&responses),
            "--alpha-gate",
            gate,
            "--out-dir",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let posthoc = fs::read_to_string(out.join("posthoc.csv")).unwrap();
        (
            posthoc.lines().filter(|l| l.starts_with(&prefix)).count(),
            posthoc.lines().count(),
        )
    };
    let (strict, strict_total) = rows("0.05");
    let (loose, loose_total) = rows("0.10");
    assert_eq!(strict, 0);
    assert!(loose > 0);
    assert!(loose_total > strict_total);
}

#[test]
fn simulate_then_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    let o = run(&[
        "simulate",
        "--out-dir",
        s(&dir),
        "--participants",
        "12",
        "--seed",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&[
        "validate",
        "--responses",
        s(&dir.join("responses.csv")),
        "--participants",
        s(&dir.join("participants.csv")),
        "--weighted",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: 26 candidates, 178 items"));

    let o = run(&["candidates"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("id,attribute,local_text"));
}
