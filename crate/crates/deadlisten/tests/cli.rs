mod common;
#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::fs;
use std::path::Path;

use serde_json::Value;
use tempfile::TempDir;

use common::{deadlisten, fixture, report_rows, write_index_file, write_labels_file, Run};
use support::fixtures::{optimal_row_fixture, request_counts, OPTIMAL, RES};

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn jsonl(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn model_from_counts(dir: &TempDir) -> std::path::PathBuf {
    let index = dir.path().join("index.csv");
    write_index_file(&index, &request_counts());
    let model = dir.path().join("model.json");
    let run = deadlisten(["classify", s(&index), "--config", OPTIMAL, "--out", s(&model)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    model
}

fn labeled_corpus(dir: &TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let (index, labels) = optimal_row_fixture();
    let (ifile, lfile) = (dir.path().join("corpus.csv"), dir.path().join("labels.csv"));
    write_index_file(&ifile, &index);
    write_labels_file(&lfile, &labels);
    (ifile, lfile)
}

#[test]
fn mine_reports_each_registration() {
    let run = deadlisten(["mine", s(&fixture("fig2"))]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let records = jsonl(&run.stdout);
    let events: Vec<&str> = records.iter().map(|r| r["event"].as_str().unwrap()).collect();
    assert_eq!(events, ["data", "end", "timeout"]);
    for r in &records {
        assert_eq!(r["path"], RES);
        assert_eq!(r["pkg"], "http");
        assert_eq!(r["file"], "index.js");
    }
    assert_eq!((records[2]["line"].as_u64(), records[2]["column"].as_u64()), (Some(10), Some(11)));
}

#[test]
fn chained_registrations_mine_the_same_pairs() {
    let pairs = |name| {
        let mut v: Vec<(String, String)> = jsonl(&deadlisten(["mine", s(&fixture(name))]).stdout)
            .iter()
            .map(|r| (r["path"].as_str().unwrap().to_string(), r["event"].as_str().unwrap().to_string()))
            .collect();
        v.sort();
        v
    };
    assert_eq!(pairs("fig2"), pairs("fig2-chained"));
}

#[test]
fn mine_counts_every_file_and_skips_dependencies() {
    let dir = TempDir::new().unwrap();
    let src = fs::read_to_string(fixture("fig2/index.js")).unwrap();
    fs::create_dir_all(dir.path().join("lib")).unwrap();
    fs::create_dir_all(dir.path().join("node_modules/dep")).unwrap();
    fs::create_dir_all(dir.path().join(".cache")).unwrap();
    fs::write(dir.path().join("a.js"), &src).unwrap();
    fs::write(dir.path().join("lib/b.js"), &src).unwrap();
    fs::write(dir.path().join("node_modules/dep/c.js"), &src).unwrap();
    fs::write(dir.path().join(".cache/d.js"), &src).unwrap();
    fs::write(dir.path().join("e.mjs"), &src).unwrap();

    let run = deadlisten(["mine", s(dir.path())]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let files: Vec<String> = jsonl(&run.stdout).iter().map(|r| r["file"].as_str().unwrap().to_string()).collect();
    assert_eq!(files, ["a.js", "a.js", "a.js", "lib/b.js", "lib/b.js", "lib/b.js"]);

    let run = deadlisten(["mine", s(dir.path()), "--ext", "js,mjs"]);
    assert_eq!(jsonl(&run.stdout).len(), 9);
}

#[test]
fn mine_output_is_stable_across_runs() {
    let a = deadlisten(["mine", s(&fixture("fig2")), s(&fixture("fig2-chained")), s(&fixture("data-end"))]);
    let b = deadlisten(["mine", s(&fixture("fig2")), s(&fixture("fig2-chained")), s(&fixture("data-end"))]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let projects: std::collections::BTreeSet<String> =
        jsonl(&a.stdout).iter().map(|r| r["project"].as_str().unwrap().to_string()).collect();
    assert_eq!(projects.len(), 3);
}

#[test]
fn empty_project_mines_nothing() {
    let dir = TempDir::new().unwrap();
    let run = deadlisten(["mine", s(dir.path())]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
}

#[test]
fn unparsable_files_are_diagnostics() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.js"), "function (").unwrap();
    fs::copy(fixture("fig2/index.js"), dir.path().join("good.js")).unwrap();
    let out = dir.path().join("occ.jsonl");
    let run = deadlisten(["mine", s(dir.path()), "--out", s(&out)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stderr.contains("parse failures: 1"), "{}", run.stderr);
    assert_eq!(jsonl(&fs::read_to_string(&out).unwrap()).len(), 3);

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("occ.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "mine");
    assert_eq!(manifest["summary"]["diagnostics"]["parse_failures"][0]["file"], "bad.js");
}

#[test]
fn missing_project_is_an_error() {
    let run = deadlisten(["mine", "/nonexistent/project"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("cannot read project /nonexistent/project"), "{}", run.stderr);
    assert_eq!(run.stderr.matches("os error").count(), 1, "{}", run.stderr);
}

#[test]
fn aggregate_merges_occurrences_and_indexes() {
    let dir = TempDir::new().unwrap();
    let occ = dir.path().join("occ.jsonl");
    assert_eq!(deadlisten(["mine", s(&fixture("fig2")), "--out", s(&occ)]).code, 0);
    let index = dir.path().join("index.csv");
    write_index_file(&index, &request_counts());

    let run = deadlisten(["aggregate", s(&occ), s(&index), s(&occ)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(
        run.stdout,
        format!("pkg,path,event,count\nhttp,require(http).request(),timeout,215\nhttp,{RES},data,998\nhttp,{RES},end,900\nhttp,{RES},timeout,3\n")
    );
}

#[test]
fn classify_writes_a_model() {
    let dir = TempDir::new().unwrap();
    let model = model_from_counts(&dir);
    let m: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let anomalous = m["packages"]["http"]["anomalous"].as_array().unwrap();
    assert_eq!(anomalous.len(), 1);
    assert_eq!(anomalous[0]["path"], RES);
    assert_eq!(anomalous[0]["event"], "timeout");
    assert_eq!((anomalous[0]["n_a"].as_u64(), anomalous[0]["n_e"].as_u64()), (Some(1895), Some(216)));
    assert!(dir.path().join("model.json.manifest.json").exists());
}

#[test]
fn classify_of_an_empty_corpus_is_empty() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let run = deadlisten(["classify", s(&empty)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let m: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(m["packages"].as_object().unwrap().len(), 0);
}

#[test]
fn bad_thresholds_are_rejected() {
    let dir = TempDir::new().unwrap();
    let index = dir.path().join("index.csv");
    write_index_file(&index, &request_counts());
    for config in ["1.5,0.1,0.1,0.1", "0.1,0.1,0.1", "a,b,c,d", "0,0.1,0.1,0.1"] {
        let run = deadlisten(["classify", s(&index), "--config", config]);
        assert_eq!(run.code, 2, "{config}: {}", run.stdout);
    }
}

#[test]
fn check_reports_the_never_firing_listener() {
    let dir = TempDir::new().unwrap();
    let model = model_from_counts(&dir);
    let run = deadlisten(["check", s(&fixture("fig2")), "--model", s(&model)]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert_eq!(
        run.stdout,
        format!("index.js:10:11: listener for 'timeout' on {RES} is probably never called (k=1, n_a=1895, n_e=216)\n1 finding\n")
    );

    let chained = deadlisten(["check", s(&fixture("fig2-chained")), "--model", s(&model)]);
    assert_eq!(chained.code, 1);
    assert!(chained.stdout.starts_with("index.js:7:"), "{}", chained.stdout);
}

#[test]
fn check_of_a_correct_project_is_clean() {
    let dir = TempDir::new().unwrap();
    let model = model_from_counts(&dir);
    let run = deadlisten(["check", s(&fixture("data-end")), "--model", s(&model)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout, "0 findings\n");
}

#[test]
fn suppressed_pairs_are_not_reported() {
    let dir = TempDir::new().unwrap();
    let model = model_from_counts(&dir);
    let suppress = dir.path().join("suppress.csv");
    fs::write(&suppress, format!("path,event\n{RES},timeout\n")).unwrap();
    let run = deadlisten(["check", s(&fixture("fig2")), "--model", s(&model), "--suppress", s(&suppress)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
}

#[test]
fn check_json_output() {
    let dir = TempDir::new().unwrap();
    let model = model_from_counts(&dir);
    let out = dir.path().join("findings.json");
    let run = deadlisten(["check", s(&fixture("fig2")), "--model", s(&model), "--format", "json", "--out", s(&out)]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let printed: Value = serde_json::from_str(&run.stdout).unwrap();
    let saved: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(printed, saved);
    let f = &printed["findings"][0];
    assert_eq!(
        (f["file"].as_str(), f["line"].as_u64(), f["event"].as_str()),
        (Some("index.js"), Some(10), Some("timeout"))
    );
    assert_eq!(f["long_path"], false);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("findings.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"], OPTIMAL);
}

#[test]
fn long_paths_are_marked_low_confidence() {
    let dir = TempDir::new().unwrap();
    let long = "require(m).a.b.c.d.e";
    let mut b = deadlisten_core::corpus::IndexBuilder::new();
    let pair = |p: &str, e: &str| deadlisten_core::corpus::Pair::new(support::fixtures::path(p), e);
    b.add_count(pair(long, "rare"), 1);
    b.add_count(pair(long, "usual"), 500);
    b.add_count(pair("require(m).z", "rare"), 500);
    let index = dir.path().join("index.csv");
    write_index_file(&index, &b.build());
    let model = dir.path().join("model.json");
    assert_eq!(deadlisten(["classify", s(&index), "--out", s(&model)]).code, 0);

    let project = dir.path().join("proj");
    fs::create_dir(&project).unwrap();
    fs::write(project.join("x.js"), "require('m').a.b.c.d.e.on('rare', () => {});\n").unwrap();
    let run = deadlisten(["check", s(&project), "--model", s(&model)]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert!(run.stdout.lines().next().unwrap().ends_with("[low-confidence: long path]"), "{}", run.stdout);
}

#[test]
fn check_needs_a_readable_model() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("model.json");
    fs::write(&model, "{ not json").unwrap();
    assert_eq!(deadlisten(["check", s(&fixture("fig2")), "--model", s(&model)]).code, 2);
    assert_eq!(deadlisten(["check", s(&fixture("fig2")), "--model", "/nonexistent.json"]).code, 2);
}

#[test]
fn score_reproduces_the_selected_row() {
    let dir = TempDir::new().unwrap();
    let (corpus, labels) = labeled_corpus(&dir);
    let run = deadlisten(["eval", "--corpus", s(&corpus), "--labels", s(&labels), "--mode", "score"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = report_rows(&run.stdout);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with(&format!("{OPTIMAL},90.9,7.5,30,3,")), "{}", rows[0]);
    assert!(run.stdout.contains(&format!("# config={OPTIMAL}\n")));
}

#[test]
fn sweep_covers_the_whole_grid() {
    let dir = TempDir::new().unwrap();
    let (corpus, labels) = labeled_corpus(&dir);
    let run = deadlisten(["eval", "--corpus", s(&corpus), "--labels", s(&labels), "--mode", "sweep"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(report_rows(&run.stdout).len(), 4096);

    let grid = dir.path().join("grid.toml");
    fs::write(&grid, "rarity = [0.1, 0.25]\nconfidence = [0.01, 0.03]\n").unwrap();
    let run =
        deadlisten(["eval", "--corpus", s(&corpus), "--labels", s(&labels), "--mode", "sweep", "--grid", s(&grid)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(report_rows(&run.stdout).len(), 16);
    assert!(run.stdout.contains("# rarity=0.1;0.25\n"));
}

#[test]
fn pareto_marks_the_optimal_configuration() {
    let dir = TempDir::new().unwrap();
    let (corpus, labels) = labeled_corpus(&dir);
    let run = deadlisten(["eval", "--corpus", s(&corpus), "--labels", s(&labels), "--mode", "pareto"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(report_rows(&run.stdout).iter().filter(|r| r.ends_with(",true")).count() == 1, "{}", run.stdout);
}

#[test]
fn experiments_are_reproducible_from_the_seed() {
    let dir = TempDir::new().unwrap();
    let (corpus, labels) = labeled_corpus(&dir);
    let grid = dir.path().join("grid.toml");
    fs::write(&grid, "rarity = [0.05, 0.1, 0.25]\nconfidence = [0.01, 0.03, 0.1]\n").unwrap();
    let eval = |mode: &str, seed: &str| -> Run {
        deadlisten([
            "eval",
            "--corpus",
            s(&corpus),
            "--labels",
            s(&labels),
            "--mode",
            mode,
            "--grid",
            s(&grid),
            "--seed",
            seed,
            "--iterations",
            "3",
            "--percentages",
            "10,50",
        ])
    };
    for mode in ["cv", "subset"] {
        let (a, b) = (eval(mode, "7"), eval(mode, "7"));
        assert_eq!(a.code, 0, "{mode}: {}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "{mode}");
        assert!(a.stdout.contains("# seed=7 rng=ChaCha8\n"));
        assert_ne!(a.stdout, eval(mode, "8").stdout, "{mode}");
    }
    assert_eq!(report_rows(&eval("cv", "7").stdout).len(), 10);
}

#[test]
fn bad_label_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = labeled_corpus(&dir);
    let header = "pkg,path,event,label\n";
    let cases = [
        ("bogus label", format!("{header}http,{RES},timeout,maybe\n"), ":2:"),
        ("duplicate", format!("{header}http,{RES},timeout,correct\nhttp,{RES},timeout,incorrect\n"), "duplicate"),
        ("package mismatch", format!("{header}net,{RES},timeout,correct\n"), "does not match"),
        ("bad header", "a,b,c,d\n".to_string(), "header"),
    ];
    for (name, text, needle) in cases {
        let labels = dir.path().join("labels.csv");
        fs::write(&labels, text).unwrap();
        let run = deadlisten(["eval", "--corpus", s(&corpus), "--labels", s(&labels), "--mode", "score"]);
        assert_eq!(run.code, 2, "{name}");
        assert!(run.stderr.contains(needle), "{name}: {}", run.stderr);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(deadlisten(["frobnicate"]).code, 2);
    assert_eq!(deadlisten(["check", "x"]).code, 2);
    assert_eq!(deadlisten(["--help"]).code, 0);
    assert_eq!(deadlisten(["--version"]).code, 0);
}
