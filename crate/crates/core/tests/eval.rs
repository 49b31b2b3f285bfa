mod support;

use deadlisten_core::classifier::{classify_corpus, Config, Verdict};
use deadlisten_core::corpus::Pair;
use deadlisten_core::eval::*;

use support::fixtures::{cfg, mixed_fixture, optimal_row_fixture, path, published_rows, OPTIMAL};

#[test]
fn optimal_row_arithmetic() {
    let (index, labels) = optimal_row_fixture();
    let config = cfg(OPTIMAL);
    let model = classify_corpus(&index, &config);
    let r = score(&model, &labels, &index).unwrap();
    assert_eq!((r.true_positives, r.false_positives, r.incorrect_labels), (30, 3, 399));
    assert!((r.precision.unwrap() - 90.9).abs() <= 0.05);
    assert!((r.recall.unwrap() - 7.5).abs() <= 0.05);
    assert_eq!(r.true_positives + r.false_negatives, r.incorrect_labels);
    assert_eq!(r.tp_occurrences, 30);
    assert_eq!(r.tp_projects, None);
}

#[test]
fn perfect_and_empty_models() {
    let (index, labels) = optimal_row_fixture();
    let incorrect_flagged: Vec<LabeledPair> = labels.iter().take(30).cloned().collect();
    let model = classify_corpus(&index, &cfg(OPTIMAL));
    let r = score(&model, &incorrect_flagged, &index).unwrap();
    assert_eq!((r.precision, r.recall), (Some(100.0), Some(100.0)));

    let nothing = Config::new(0.005, 0.005, 0.005, 0.005).unwrap();
    let only_singletons: Vec<LabeledPair> = labels[33..].to_vec();
    let r = score(&classify_corpus(&index, &nothing), &only_singletons, &index).unwrap();
    assert_eq!((r.true_positives, r.false_positives, r.precision, r.recall), (0, 0, None, Some(0.0)));
}

#[test]
fn labels_must_occur_in_the_index() {
    let (index, mut labels) = optimal_row_fixture();
    labels.push(LabeledPair { pair: Pair::new(path("require(nope)"), "x"), label: Label::Correct });
    let model = classify_corpus(&index, &cfg(OPTIMAL));
    assert!(matches!(score(&model, &labels, &index), Err(EvalError::LabelNotInCorpus { .. })));
    assert!(matches!(sweep(&index, &labels, &Grid::default()), Err(EvalError::LabelNotInCorpus { .. })));
}

#[test]
fn default_grid_has_4096_ordered_configs() {
    let configs = Grid::default().configs().unwrap();
    assert_eq!(configs.len(), 4096);
    assert!(configs.windows(2).all(|w| w[0].lex_cmp(&w[1]).is_lt()));
    let (index, labels) = optimal_row_fixture();
    let results = sweep(&index, &labels, &Grid::default()).unwrap();
    assert_eq!(results.len(), 4096);
}

#[test]
fn sweep_agrees_with_independent_classification() {
    let (index, labels) = mixed_fixture();
    let grid = Grid { rarity: vec![0.05, 0.25], confidence: vec![0.03, 1.0] };
    let results = sweep(&index, &labels, &grid).unwrap();
    assert_eq!(results.len(), 16);
    for r in &results {
        let model = classify_corpus(&index, &r.config);
        assert_eq!(r.report, score(&model, &labels, &index).unwrap(), "{}", r.config);
    }
    let single = Grid { rarity: vec![0.1], confidence: vec![0.05] };
    let one = sweep(&index, &labels, &single).unwrap();
    assert_eq!(one.len(), 1);
    let model = classify_corpus(&index, &cfg("0.1,0.1,0.05,0.05"));
    assert_eq!(one[0].report, score(&model, &labels, &index).unwrap());
}

#[test]
fn published_rows_select_the_highlighted_config() {
    let rows = published_rows();
    let best = select_optimal(&rows, 90.0).unwrap();
    assert_eq!(best.config, cfg(OPTIMAL));
    assert!((best.report.precision.unwrap() - 90.9).abs() < 0.05);
    assert!((best.report.recall.unwrap() - 7.5).abs() < 0.05);
    let front = pareto_front(&rows);
    assert_eq!(front.front.len(), 8);
    assert!(front.front.contains(&best));
    for a in &front.front {
        for b in &front.front {
            let (pa, ra) = (a.report.precision.unwrap(), a.report.recall.unwrap());
            let (pb, rb) = (b.report.precision.unwrap(), b.report.recall.unwrap());
            assert!(!(pb >= pa && rb >= ra && (pb > pa || rb > ra)));
        }
    }
    assert!(matches!(select_optimal(&rows, 100.5), Err(EvalError::NoQualifyingConfig { .. })));
}

fn pr(config: &str, precision: Option<f64>, recall: f64) -> ConfigResult {
    ConfigResult {
        config: cfg(config),
        report: ScoreReport { precision, recall: Some(recall), ..ScoreReport::default() },
    }
}

#[test]
fn pareto_examples() {
    let rows = vec![
        pr("0.1,0.1,0.1,0.1", Some(90.0), 5.0),
        pr("0.2,0.1,0.1,0.1", Some(80.0), 10.0),
        pr("0.3,0.1,0.1,0.1", Some(85.0), 4.0),
    ];
    let front = pareto_front(&rows);
    let got: Vec<_> = front.front.iter().map(|r| r.report.precision.unwrap()).collect();
    assert_eq!(got, [90.0, 80.0]);

    assert_eq!(pareto_front(&rows[..1]).front, rows[..1].to_vec());

    let same = vec![pr("0.1,0.1,0.1,0.1", Some(50.0), 5.0), pr("0.2,0.1,0.1,0.1", Some(50.0), 5.0)];
    assert_eq!(pareto_front(&same).front.len(), 2);

    let undefined = vec![pr("0.1,0.1,0.1,0.1", None, 0.0), pr("0.2,0.1,0.1,0.1", Some(50.0), 5.0)];
    let f = pareto_front(&undefined);
    assert_eq!((f.front.len(), f.excluded_undefined), (1, 1));
}

#[test]
fn selection_tie_breaks() {
    let rows = vec![pr("0.2,0.1,0.1,0.1", Some(91.0), 5.0), pr("0.3,0.1,0.1,0.1", Some(95.0), 5.0)];
    assert_eq!(select_optimal(&rows, 90.0).unwrap().config, cfg("0.3,0.1,0.1,0.1"));
    let rows = vec![pr("0.3,0.1,0.1,0.1", Some(95.0), 5.0), pr("0.2,0.1,0.1,0.1", Some(95.0), 5.0)];
    assert_eq!(select_optimal(&rows, 90.0).unwrap().config, cfg("0.2,0.1,0.1,0.1"));
    let low = vec![pr("0.3,0.1,0.1,0.1", Some(85.0), 5.0)];
    assert!(select_optimal(&low, 90.0).is_err());
}

#[test]
fn harmonic_means() {
    assert_eq!(harmonic_mean([Some(1.0), Some(4.0), Some(4.0)]), Some(2.0));
    assert_eq!(harmonic_mean([None, Some(5.0)]), Some(5.0));
    assert_eq!(harmonic_mean([None]), None);
    assert_eq!(harmonic_mean([Some(0.0), Some(3.0)]), Some(0.0));
}

fn small_params(seed: u64) -> ExperimentParams {
    ExperimentParams {
        grid: Grid { rarity: vec![0.05, 0.1, 0.25], confidence: vec![0.01, 0.05, 0.1, 1.0] },
        min_precision: 50.0,
        seed,
    }
}

#[test]
fn cross_validation_is_reproducible() {
    let (index, labels) = mixed_fixture();
    let extra: Vec<LabeledPair> = index
        .pairs()
        .filter(|(p, _)| !labels.iter().any(|l| &l.pair == *p))
        .take(2)
        .map(|(p, _)| LabeledPair { pair: p.clone(), label: Label::Correct })
        .collect();
    let labels: Vec<LabeledPair> = labels.into_iter().chain(extra).collect();
    assert_eq!(labels.len(), 10);
    let a = cross_validate(&index, &labels, 2, &small_params(7)).unwrap();
    let b = cross_validate(&index, &labels, 2, &small_params(7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().map(|f| f.validation_labels).collect::<Vec<_>>(), [5, 5]);

    let mut reversed = labels.clone();
    reversed.reverse();
    assert_eq!(cross_validate(&index, &reversed, 2, &small_params(7)).unwrap(), a);

    let loo = cross_validate(&index, &labels, labels.len(), &small_params(7)).unwrap();
    assert!(loo.iter().all(|f| f.validation_labels == 1 && f.train_labels == 9));
    assert!(matches!(cross_validate(&index, &labels, 1, &small_params(7)), Err(EvalError::InvalidFolds { .. })));
    assert!(matches!(cross_validate(&index, &labels, 11, &small_params(7)), Err(EvalError::InvalidFolds { .. })));
}

#[test]
fn subset_experiment_is_reproducible() {
    let (index, labels) = mixed_fixture();
    let a = subset_experiment(&index, &labels, &[50.0, 100.0], 3, &small_params(11)).unwrap();
    let b = subset_experiment(&index, &labels, &[50.0, 100.0], 3, &small_params(11)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 6);
    assert_eq!(a.summaries.len(), 2);

    let whole = select_optimal(&sweep(&index, &labels, &small_params(11).grid).unwrap(), 50.0).unwrap();
    for r in a.rows.iter().filter(|r| r.percentage == 100.0) {
        assert_eq!(r.sampled_occurrences as u64, index.total());
        assert_eq!(r.subset.unwrap().config, whole.config);
        assert_eq!(r.full.unwrap(), whole.report);
    }
    assert!(matches!(
        subset_experiment(&index, &labels, &[0.0], 1, &small_params(1)),
        Err(EvalError::InvalidPercentage(_))
    ));
}

#[test]
fn tiny_samples_without_labels_are_reported() {
    let (index, labels) = mixed_fixture();
    let only_rare: Vec<LabeledPair> = labels.into_iter().filter(|l| index.k(&l.pair) == 1).collect();
    let err = subset_experiment(&index, &only_rare, &[0.1], 1, &small_params(3)).unwrap_err();
    assert!(matches!(err, EvalError::EmptySubset { .. }));
}

#[test]
fn anomalous_labels_counted_once() {
    let (index, labels) = mixed_fixture();
    for config in Grid::default().configs().unwrap().iter().step_by(97) {
        let model = classify_corpus(&index, config);
        let r = score(&model, &labels, &index).unwrap();
        let fp = labels
            .iter()
            .filter(|l| l.label != Label::Incorrect && model.verdict(&l.pair) == Some(Verdict::Anomalous))
            .count() as u64;
        assert_eq!(r.false_positives, fp);
        assert_eq!(r.true_positives + r.false_negatives, r.incorrect_labels);
    }
}
