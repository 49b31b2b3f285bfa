//! Rarity tests deciding whether a pair is anomalous, expected or neither.
//!
//! A pair ⟨a, e⟩ is anomalous when `a` is rare among the paths `e` is
//! registered on *and* `e` is rare among the events registered on `a`. Each
//! rarity test asks how likely it is to see at most the observed count if
//! the true share were the rarity threshold, and fires when that
//! probability is below the confidence threshold.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{CountsIndex, MissingPair, Pair};
pub use crate::stats::{bcdf, sf, DomainError};

/// Rarity thresholds `p_a`, `p_e` and confidence thresholds `p_ca`, `p_ce`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub p_a: f64,
    pub p_e: f64,
    pub p_ca: f64,
    pub p_ce: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{name} = {value} is outside (0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("expected four comma-separated probabilities, got {0:?}")]
    Syntax(alloc::string::String),
}

impl Config {
    pub fn new(p_a: f64, p_e: f64, p_ca: f64, p_ce: f64) -> Result<Self, ConfigError> {
        let config = Config { p_a, p_e, p_ca, p_ce };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in self.named() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [("p_a", self.p_a), ("p_e", self.p_e), ("p_ca", self.p_ca), ("p_ce", self.p_ce)]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_a, self.p_e, self.p_ca, self.p_ce]
    }

    /// Lexicographic order on (p_a, p_e, p_ca, p_ce).
    pub fn lex_cmp(&self, other: &Config) -> Ordering {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.p_a, self.p_e, self.p_ca, self.p_ce)
    }
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || ConfigError::Syntax(s.into());
        let values: Vec<f64> =
            s.split(',').map(|part| part.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| syntax())?;
        match values[..] {
            [p_a, p_e, p_ca, p_ce] => Config::new(p_a, p_e, p_ca, p_ce),
            _ => Err(syntax()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Anomalous,
    Expected,
    Unclassified,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Anomalous => "anomalous",
            Verdict::Expected => "expected",
            Verdict::Unclassified => "unclassified",
        }
    }
}

/// Which counts feed the rarity tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Cumulative counts k_e(⌈a⌉) and k_a(⌈e⌉).
    Refined,
    /// The raw pair count k(a, e) on both sides.
    Raw,
}

/// A verdict together with the statistics behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub k: u64,
    pub n_a: u64,
    pub n_e: u64,
    /// k_e(⌈a⌉), tested against n_e with rarity p_a.
    pub k_cum_path: u64,
    /// k_a(⌈e⌉), tested against n_a with rarity p_e.
    pub k_cum_event: u64,
    /// bcdf(k_cum_path, n_e, p_a)
    pub bcdf_path: f64,
    /// bcdf(k_cum_event, n_a, p_e)
    pub bcdf_event: f64,
    /// sf(k_cum_path, n_e, p_a)
    pub sf_path: f64,
    /// sf(k_cum_event, n_a, p_e)
    pub sf_event: f64,
}

pub fn classify_pair(index: &CountsIndex, pair: &Pair, config: &Config) -> Result<Classification, MissingPair> {
    classify_pair_with(index, pair, config, CountMode::Refined)
}

pub fn classify_pair_with(
    index: &CountsIndex,
    pair: &Pair,
    config: &Config,
    mode: CountMode,
) -> Result<Classification, MissingPair> {
    let k = index.get(pair).ok_or_else(|| MissingPair::of(pair))?.k;
    let n_a = index.n_a(&pair.path);
    let n_e = index.n_e(&pair.event_key());
    let (k_cum_path, k_cum_event) = match mode {
        CountMode::Refined => (index.cumulative_count_for_path(pair)?, index.cumulative_count_for_event(pair)?),
        CountMode::Raw => (k, k),
    };
    Ok(decide(k, n_a, n_e, k_cum_path, k_cum_event, config))
}

/// Applies both tests to precomputed counts. Counts come from a consistent
/// index, so the binomial preconditions hold.
pub fn decide(k: u64, n_a: u64, n_e: u64, k_cum_path: u64, k_cum_event: u64, config: &Config) -> Classification {
    let stat = |r: Result<f64, DomainError>| r.expect("index counts satisfy 0 <= k <= n, n >= 1");
    let bcdf_path = stat(bcdf(k_cum_path, n_e, config.p_a));
    let bcdf_event = stat(bcdf(k_cum_event, n_a, config.p_e));
    let sf_path = stat(sf(k_cum_path, n_e, config.p_a));
    let sf_event = stat(sf(k_cum_event, n_a, config.p_e));
    let verdict = verdict_from_stats(bcdf_path, bcdf_event, sf_path, sf_event, config);
    Classification { verdict, k, n_a, n_e, k_cum_path, k_cum_event, bcdf_path, bcdf_event, sf_path, sf_event }
}

/// The decision rule on the four tail probabilities.
pub fn verdict_from_stats(bcdf_path: f64, bcdf_event: f64, sf_path: f64, sf_event: f64, config: &Config) -> Verdict {
    let anomalous = bcdf_event < config.p_ce && bcdf_path < config.p_ca;
    let expected = sf_event < config.p_ce && sf_path < config.p_ca;
    debug_assert!(
        !(anomalous && expected) || (config.p_ca > 0.5 && config.p_ce > 0.5),
        "both tails below thresholds at most 0.5"
    );
    if anomalous {
        Verdict::Anomalous
    } else if expected {
        Verdict::Expected
    } else {
        Verdict::Unclassified
    }
}

/// Classification of every pair in an index under one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: Config,
    pub entries: BTreeMap<Pair, Classification>,
}

impl Model {
    pub fn with_verdict(&self, verdict: Verdict) -> impl Iterator<Item = (&Pair, &Classification)> {
        self.entries.iter().filter(move |(_, c)| c.verdict == verdict)
    }

    pub fn anomalous(&self) -> impl Iterator<Item = (&Pair, &Classification)> {
        self.with_verdict(Verdict::Anomalous)
    }

    pub fn is_anomalous(&self, pair: &Pair) -> bool {
        self.entries.get(pair).is_some_and(|c| c.verdict == Verdict::Anomalous)
    }

    pub fn verdict(&self, pair: &Pair) -> Option<Verdict> {
        self.entries.get(pair).map(|c| c.verdict)
    }
}

pub fn classify_corpus(index: &CountsIndex, config: &Config) -> Model {
    classify_corpus_with(index, config, CountMode::Refined)
}

pub fn classify_corpus_with(index: &CountsIndex, config: &Config, mode: CountMode) -> Model {
    let entries = index
        .pairs()
        .map(|(pair, _)| {
            let c = classify_pair_with(index, pair, config, mode).expect("pair taken from the index");
            (pair.clone(), c)
        })
        .collect();
    Model { config: *config, entries }
}
