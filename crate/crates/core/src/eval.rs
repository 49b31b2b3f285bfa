//! Scoring against labeled pairs and the configuration experiments built on it.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{bcdf, sf, verdict_from_stats, Config, ConfigError, Model, Verdict};
use crate::corpus::{CountsIndex, IndexBuilder, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Correct,
    Incorrect,
    Imprecise,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Correct => "correct",
            Label::Incorrect => "incorrect",
            Label::Imprecise => "imprecise",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(Label::Correct),
            "incorrect" => Ok(Label::Incorrect),
            "imprecise" => Ok(Label::Imprecise),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledPair {
    pub pair: Pair,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("labeled pair ({path}, {event}) does not occur in the index")]
    LabelNotInCorpus { path: String, event: String },
    #[error("no configuration reaches {min_precision}% precision")]
    NoQualifyingConfig { min_precision: f64 },
    #[error("the {percentage}% sample of iteration {iteration} contains no labeled pair")]
    EmptySubset { percentage: f64, iteration: usize },
    #[error("cannot split {labels} labels into {folds} folds")]
    InvalidFolds { folds: usize, labels: usize },
    #[error("percentage {0} is outside (0, 100]")]
    InvalidPercentage(f64),
    #[error("at least one iteration is required")]
    NoIterations,
    #[error("grid has no rarity or no confidence values")]
    EmptyGrid,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreReport {
    pub true_positives: u64,
    pub false_positives: u64,
    /// INCORRECT pairs left UNCLASSIFIED.
    pub unclassified_incorrect: u64,
    /// INCORRECT pairs not classified ANOMALOUS.
    pub false_negatives: u64,
    pub incorrect_labels: u64,
    /// Percent; absent when nothing labeled was flagged.
    pub precision: Option<f64>,
    /// Percent; absent without INCORRECT labels.
    pub recall: Option<f64>,
    /// Occurrences of the true-positive pairs in the index.
    pub tp_occurrences: u64,
    /// Distinct projects containing a true positive, when the index knows projects.
    pub tp_projects: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigResult {
    pub config: Config,
    pub report: ScoreReport,
}

fn percent(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Accumulates a score from (label, verdict) observations.
struct Tally<'i> {
    index: &'i CountsIndex,
    report: ScoreReport,
    projects: Option<BTreeSet<&'i str>>,
}

impl<'i> Tally<'i> {
    fn new(index: &'i CountsIndex) -> Self {
        let projects = index.has_projects().then(BTreeSet::new);
        Tally { index, report: ScoreReport::default(), projects }
    }

    fn add(&mut self, pair: &Pair, label: Label, verdict: Verdict) {
        let r = &mut self.report;
        match (label, verdict) {
            (Label::Incorrect, Verdict::Anomalous) => {
                r.incorrect_labels += 1;
                r.true_positives += 1;
                r.tp_occurrences += self.index.k(pair);
                if let (Some(set), Some(ps)) = (&mut self.projects, self.index.projects_of(pair)) {
                    set.extend(ps.iter().map(String::as_str));
                }
            }
            (Label::Incorrect, other) => {
                r.incorrect_labels += 1;
                r.false_negatives += 1;
                if other == Verdict::Unclassified {
                    r.unclassified_incorrect += 1;
                }
            }
            (_, Verdict::Anomalous) => r.false_positives += 1,
            _ => {}
        }
    }

    fn finish(mut self) -> ScoreReport {
        let r = &mut self.report;
        r.precision = percent(r.true_positives, r.true_positives + r.false_positives);
        r.recall = percent(r.true_positives, r.incorrect_labels);
        r.tp_projects = self.projects.map(|s| s.len() as u64);
        self.report
    }
}

fn check_labels(index: &CountsIndex, labels: &[LabeledPair]) -> Result<(), EvalError> {
    match labels.iter().find(|l| !index.contains(&l.pair)) {
        Some(l) => Err(EvalError::LabelNotInCorpus { path: l.pair.path.to_string(), event: l.pair.event.clone() }),
        None => Ok(()),
    }
}

/// Scores a model built from `index` against `labels`.
pub fn score(model: &Model, labels: &[LabeledPair], index: &CountsIndex) -> Result<ScoreReport, EvalError> {
    let mut tally = Tally::new(index);
    for l in labels {
        let verdict = model.verdict(&l.pair).ok_or_else(|| EvalError::LabelNotInCorpus {
            path: l.pair.path.to_string(),
            event: l.pair.event.clone(),
        })?;
        tally.add(&l.pair, l.label, verdict);
    }
    Ok(tally.finish())
}

pub const DEFAULT_RARITY: [f64; 8] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.25];
pub const DEFAULT_CONFIDENCE: [f64; 8] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 1.0];
pub const DEFAULT_MIN_PRECISION: f64 = 90.0;

/// Rarity values range over p_a and p_e, confidence values over p_ca and p_ce.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rarity: Vec<f64>,
    pub confidence: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { rarity: DEFAULT_RARITY.to_vec(), confidence: DEFAULT_CONFIDENCE.to_vec() }
    }
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Grid {
    /// All configurations, sorted lexicographically by (p_a, p_e, p_ca, p_ce).
    pub fn configs(&self) -> Result<Vec<Config>, EvalError> {
        let rarity = sorted_unique(&self.rarity);
        let confidence = sorted_unique(&self.confidence);
        if rarity.is_empty() || confidence.is_empty() {
            return Err(EvalError::EmptyGrid);
        }
        let mut out = Vec::with_capacity(rarity.len().pow(2) * confidence.len().pow(2));
        for &p_a in &rarity {
            for &p_e in &rarity {
                for &p_ca in &confidence {
                    for &p_ce in &confidence {
                        out.push(Config::new(p_a, p_e, p_ca, p_ce)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Per labeled pair: the counts feeding both tests.
struct LabeledStats {
    pair: Pair,
    label: Label,
    k_cum_path: u64,
    n_e: u64,
    k_cum_event: u64,
    n_a: u64,
}

/// Scores every configuration. Binomial tails are computed once per
/// labeled pair and distinct rarity value, then reused across the
/// confidence thresholds.
pub fn sweep_configs(
    index: &CountsIndex,
    labels: &[LabeledPair],
    configs: &[Config],
) -> Result<Vec<ConfigResult>, EvalError> {
    check_labels(index, labels)?;
    let stats: Vec<LabeledStats> = labels
        .iter()
        .map(|l| LabeledStats {
            pair: l.pair.clone(),
            label: l.label,
            k_cum_path: index.cumulative_count_for_path(&l.pair).expect("checked above"),
            n_e: index.n_e(&l.pair.event_key()),
            k_cum_event: index.cumulative_count_for_event(&l.pair).expect("checked above"),
            n_a: index.n_a(&l.pair.path),
        })
        .collect();
    let rarities = sorted_unique(&configs.iter().flat_map(|c| [c.p_a, c.p_e]).collect::<Vec<_>>());
    let slot = |p: f64| rarities.binary_search_by(|r| r.total_cmp(&p)).expect("collected above");
    let tails = |k: u64, n: u64| -> Vec<(f64, f64)> {
        rarities
            .iter()
            .map(|&p| (bcdf(k, n, p).expect("consistent counts"), sf(k, n, p).expect("consistent counts")))
            .collect()
    };
    let path_tails: Vec<Vec<(f64, f64)>> = stats.iter().map(|s| tails(s.k_cum_path, s.n_e)).collect();
    let event_tails: Vec<Vec<(f64, f64)>> = stats.iter().map(|s| tails(s.k_cum_event, s.n_a)).collect();

    let mut out = Vec::with_capacity(configs.len());
    for config in configs {
        let (ia, ie) = (slot(config.p_a), slot(config.p_e));
        let mut tally = Tally::new(index);
        for (i, s) in stats.iter().enumerate() {
            let (bcdf_path, sf_path) = path_tails[i][ia];
            let (bcdf_event, sf_event) = event_tails[i][ie];
            tally.add(&s.pair, s.label, verdict_from_stats(bcdf_path, bcdf_event, sf_path, sf_event, config));
        }
        out.push(ConfigResult { config: *config, report: tally.finish() });
    }
    Ok(out)
}

/// One result per grid configuration, in grid order.
pub fn sweep(index: &CountsIndex, labels: &[LabeledPair], grid: &Grid) -> Result<Vec<ConfigResult>, EvalError> {
    sweep_configs(index, labels, &grid.configs()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    /// Non-dominated results, by precision descending.
    pub front: Vec<ConfigResult>,
    /// Results left out because their precision is undefined.
    pub excluded_undefined: usize,
}

fn metrics(r: &ConfigResult) -> (f64, f64) {
    (r.report.precision.unwrap_or(f64::NAN), r.report.recall.unwrap_or(0.0))
}

fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Descending precision, then descending recall, then configuration order.
fn rank_order(a: &ConfigResult, b: &ConfigResult) -> Ordering {
    let (pa, ra) = metrics(a);
    let (pb, rb) = metrics(b);
    pb.total_cmp(&pa).then(rb.total_cmp(&ra)).then(a.config.lex_cmp(&b.config))
}

pub fn pareto_front(results: &[ConfigResult]) -> ParetoFront {
    let defined: Vec<&ConfigResult> = results.iter().filter(|r| r.report.precision.is_some()).collect();
    let mut front: Vec<ConfigResult> =
        defined.iter().filter(|r| !defined.iter().any(|s| dominates(metrics(s), metrics(r)))).map(|r| **r).collect();
    front.sort_by(rank_order);
    ParetoFront { front, excluded_undefined: results.len() - defined.len() }
}

/// Highest recall among results with precision ≥ `min_precision`; ties go
/// to higher precision, then to the lexicographically smaller configuration.
pub fn select_optimal(results: &[ConfigResult], min_precision: f64) -> Result<ConfigResult, EvalError> {
    results
        .iter()
        .filter(|r| r.report.precision.is_some_and(|p| p >= min_precision))
        .min_by(|a, b| {
            let (pa, ra) = metrics(a);
            let (pb, rb) = metrics(b);
            rb.total_cmp(&ra).then(pb.total_cmp(&pa)).then(a.config.lex_cmp(&b.config))
        })
        .copied()
        .ok_or(EvalError::NoQualifyingConfig { min_precision })
}

/// Harmonic mean n / Σ(1/xᵢ) over the defined values; zero if any value is zero.
pub fn harmonic_mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.is_empty() {
        return None;
    }
    if defined.contains(&0.0) {
        return Some(0.0);
    }
    Some(defined.len() as f64 / defined.iter().map(|x| 1.0 / x).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub grid: Grid,
    pub min_precision: f64,
    pub seed: u64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams { grid: Grid::default(), min_precision: DEFAULT_MIN_PRECISION, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub train_labels: usize,
    pub validation_labels: usize,
    /// Configuration chosen on the training folds and its training score.
    pub train: Option<ConfigResult>,
    /// Score of that configuration on the held-out fold.
    pub validation: Option<ScoreReport>,
}

fn canonical_labels(labels: &[LabeledPair]) -> Vec<LabeledPair> {
    let mut sorted = labels.to_vec();
    sorted.sort();
    sorted
}

/// Splits the labels into `folds` random partitions and, per fold, selects
/// a configuration on the others and scores it on the held-out one. The
/// classifier always sees the full index.
pub fn cross_validate(
    index: &CountsIndex,
    labels: &[LabeledPair],
    folds: usize,
    params: &ExperimentParams,
) -> Result<Vec<FoldResult>, EvalError> {
    if folds < 2 || folds > labels.len() {
        return Err(EvalError::InvalidFolds { folds, labels: labels.len() });
    }
    check_labels(index, labels)?;
    let configs = params.grid.configs()?;
    let mut shuffled = canonical_labels(labels);
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let bounds: Vec<usize> = (0..=folds).map(|i| i * shuffled.len() / folds).collect();
    let mut out = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (lo, hi) = (bounds[fold], bounds[fold + 1]);
        let validation = &shuffled[lo..hi];
        let train: Vec<LabeledPair> = shuffled[..lo].iter().chain(&shuffled[hi..]).cloned().collect();
        let chosen = select_optimal(&sweep_configs(index, &train, &configs)?, params.min_precision).ok();
        let validation_score = match &chosen {
            Some(c) => Some(sweep_configs(index, validation, &[c.config])?[0].report),
            None => None,
        };
        out.push(FoldResult {
            fold,
            train_labels: train.len(),
            validation_labels: validation.len(),
            train: chosen,
            validation: validation_score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRow {
    pub percentage: f64,
    pub iteration: usize,
    pub sampled_occurrences: usize,
    pub subset_labels: usize,
    /// Configuration chosen on the subset and its subset score.
    pub subset: Option<ConfigResult>,
    /// Score of that configuration on the whole index and label set.
    pub full: Option<ScoreReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSummary {
    pub percentage: f64,
    pub qualifying_iterations: usize,
    pub subset_precision: Option<f64>,
    pub subset_recall: Option<f64>,
    pub full_precision: Option<f64>,
    pub full_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetReport {
    pub rows: Vec<SubsetRow>,
    pub summaries: Vec<SubsetSummary>,
}

/// Repeatedly samples a share of the occurrence records, selects the best
/// configuration on the sample, and scores it on the whole data.
pub fn subset_experiment(
    index: &CountsIndex,
    labels: &[LabeledPair],
    percentages: &[f64],
    iterations: usize,
    params: &ExperimentParams,
) -> Result<SubsetReport, EvalError> {
    if iterations == 0 {
        return Err(EvalError::NoIterations);
    }
    if let Some(&bad) = percentages.iter().find(|&&p| !(p > 0.0 && p <= 100.0)) {
        return Err(EvalError::InvalidPercentage(bad));
    }
    check_labels(index, labels)?;
    let configs = params.grid.configs()?;
    let labels = canonical_labels(labels);
    let records: Vec<&Pair> = index.pairs().flat_map(|(p, c)| core::iter::repeat_n(p, c.k as usize)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &percentage in percentages {
        let take = libm::round(records.len() as f64 * percentage / 100.0) as usize;
        let first_row = rows.len();
        for iteration in 0..iterations {
            let mut builder = IndexBuilder::new();
            if take == records.len() {
                for p in &records {
                    builder.add_count((*p).clone(), 1);
                }
            } else {
                let mut picked = rand::seq::index::sample(&mut rng, records.len(), take).into_vec();
                picked.sort_unstable();
                for i in picked {
                    builder.add_count(records[i].clone(), 1);
                }
            }
            let subset = builder.build();
            let subset_labels: Vec<LabeledPair> = labels.iter().filter(|l| subset.contains(&l.pair)).cloned().collect();
            if subset_labels.is_empty() {
                return Err(EvalError::EmptySubset { percentage, iteration });
            }
            let chosen = select_optimal(&sweep_configs(&subset, &subset_labels, &configs)?, params.min_precision).ok();
            let full = match &chosen {
                Some(c) => Some(sweep_configs(index, &labels, &[c.config])?[0].report),
                None => None,
            };
            rows.push(SubsetRow {
                percentage,
                iteration,
                sampled_occurrences: take,
                subset_labels: subset_labels.len(),
                subset: chosen,
                full,
            });
        }
        let group = &rows[first_row..];
        summaries.push(SubsetSummary {
            percentage,
            qualifying_iterations: group.iter().filter(|r| r.subset.is_some()).count(),
            subset_precision: harmonic_mean(group.iter().map(|r| r.subset.and_then(|c| c.report.precision))),
            subset_recall: harmonic_mean(group.iter().map(|r| r.subset.and_then(|c| c.report.recall))),
            full_precision: harmonic_mean(group.iter().map(|r| r.full.and_then(|s| s.precision))),
            full_recall: harmonic_mean(group.iter().map(|r| r.full.and_then(|s| s.recall))),
        });
    }
    Ok(SubsetReport { rows, summaries })
}
