//! Experiment reports as CSV tables. Every report starts with `#` lines
//! echoing the seed, grid and thresholds it was produced with; nothing in
//! a report depends on the clock, so reruns are byte-identical.

use std::fmt::Write as _;

use deadlisten_core::classifier::Config;
use deadlisten_core::eval::{ConfigResult, FoldResult, Grid, ParetoFront, ScoreReport, SubsetReport};

/// Settings echoed into a report header.
#[derive(Debug, Clone)]
pub struct ReportHeader<'a> {
    pub mode: &'a str,
    pub seed: Option<u64>,
    pub grid: Option<&'a Grid>,
    pub min_precision: Option<f64>,
    pub extra: Vec<(&'a str, String)>,
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn config_cells(c: Option<&Config>) -> [String; 4] {
    match c {
        Some(c) => c.as_array().map(|v| v.to_string()),
        None => Default::default(),
    }
}

fn csv_line(out: &mut String, cells: &[String]) {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(cells).expect("writing to memory");
    out.push_str(&String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 cells"));
}

fn header(h: &ReportHeader) -> String {
    let mut out = String::new();
    writeln!(out, "# deadlisten {} eval --mode {}", env!("CARGO_PKG_VERSION"), h.mode).unwrap();
    if let Some(seed) = h.seed {
        writeln!(out, "# seed={seed} rng=ChaCha8").unwrap();
    }
    if let Some(g) = h.grid {
        writeln!(out, "# rarity={}", join(&g.rarity)).unwrap();
        writeln!(out, "# confidence={}", join(&g.confidence)).unwrap();
    }
    if let Some(p) = h.min_precision {
        writeln!(out, "# min_precision={p}").unwrap();
    }
    for (k, v) in &h.extra {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out
}

const SCORE_COLUMNS: [&str; 13] =
    ["p_a", "p_e", "p_ca", "p_ce", "precision", "recall", "tp", "fp", "up", "occ_tp", "projects", "fn", "incorrect"];

fn score_cells(config: &Config, r: &ScoreReport) -> Vec<String> {
    let mut cells: Vec<String> = config_cells(Some(config)).into();
    cells.extend([
        pct(r.precision),
        pct(r.recall),
        r.true_positives.to_string(),
        r.false_positives.to_string(),
        r.unclassified_incorrect.to_string(),
        r.tp_occurrences.to_string(),
        opt(r.tp_projects),
        r.false_negatives.to_string(),
        r.incorrect_labels.to_string(),
    ]);
    cells
}

/// One row per configuration, in the given order.
pub fn score_table(h: &ReportHeader, results: &[ConfigResult]) -> String {
    let mut out = header(h);
    csv_line(&mut out, &SCORE_COLUMNS.map(String::from));
    for r in results {
        csv_line(&mut out, &score_cells(&r.config, &r.report));
    }
    out
}

pub fn pareto_table(h: &ReportHeader, front: &ParetoFront, optimal: Option<&ConfigResult>) -> String {
    let mut h = h.clone();
    h.extra.push(("excluded_undefined_precision", front.excluded_undefined.to_string()));
    h.extra.push(("optimal", optimal.map(|r| r.config.to_string()).unwrap_or_else(|| "none".into())));
    let mut out = header(&h);
    let mut columns: Vec<String> = SCORE_COLUMNS.map(String::from).into();
    columns.push("optimal".into());
    csv_line(&mut out, &columns);
    for r in &front.front {
        let mut cells = score_cells(&r.config, &r.report);
        cells.push((optimal == Some(r)).to_string());
        csv_line(&mut out, &cells);
    }
    out
}

pub fn cv_table(h: &ReportHeader, folds: &[FoldResult]) -> String {
    let mut out = header(h);
    let columns = [
        "round",
        "p_a",
        "p_e",
        "p_ca",
        "p_ce",
        "train_precision",
        "train_recall",
        "train_tp",
        "validation_precision",
        "validation_recall",
        "validation_tp",
        "train_labels",
        "validation_labels",
    ];
    csv_line(&mut out, &columns.map(String::from));
    for f in folds {
        let mut cells = vec![f.fold.to_string()];
        cells.extend(config_cells(f.train.as_ref().map(|t| &t.config)));
        let train = f.train.map(|t| t.report);
        cells.extend([
            pct(train.and_then(|r| r.precision)),
            pct(train.and_then(|r| r.recall)),
            opt(train.map(|r| r.true_positives)),
            pct(f.validation.and_then(|r| r.precision)),
            pct(f.validation.and_then(|r| r.recall)),
            opt(f.validation.map(|r| r.true_positives)),
            f.train_labels.to_string(),
            f.validation_labels.to_string(),
        ]);
        csv_line(&mut out, &cells);
    }
    out
}

/// Per-iteration rows, each percentage followed by a `harmean` summary row.
pub fn subset_table(h: &ReportHeader, report: &SubsetReport) -> String {
    let mut out = header(h);
    let columns = [
        "percentage",
        "iter",
        "p_a",
        "p_e",
        "p_ca",
        "p_ce",
        "subset_precision",
        "subset_recall",
        "full_precision",
        "full_recall",
        "sampled_occurrences",
        "subset_labels",
    ];
    csv_line(&mut out, &columns.map(String::from));
    for s in &report.summaries {
        for r in report.rows.iter().filter(|r| r.percentage == s.percentage) {
            let mut cells = vec![r.percentage.to_string(), (r.iteration + 1).to_string()];
            cells.extend(config_cells(r.subset.as_ref().map(|c| &c.config)));
            cells.extend([
                pct(r.subset.and_then(|c| c.report.precision)),
                pct(r.subset.and_then(|c| c.report.recall)),
                pct(r.full.and_then(|f| f.precision)),
                pct(r.full.and_then(|f| f.recall)),
                r.sampled_occurrences.to_string(),
                r.subset_labels.to_string(),
            ]);
            csv_line(&mut out, &cells);
        }
        let mut cells = vec![s.percentage.to_string(), "harmean".into()];
        cells.extend(config_cells(None));
        cells.extend([
            pct(s.subset_precision),
            pct(s.subset_recall),
            pct(s.full_precision),
            pct(s.full_recall),
            String::new(),
            format!("{} qualifying", s.qualifying_iterations),
        ]);
        csv_line(&mut out, &cells);
    }
    out
}
