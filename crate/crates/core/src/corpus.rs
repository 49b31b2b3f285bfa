//! Occurrence counts over ⟨path, event⟩ pairs.
//!
//! All queries are scoped to the root package: paths carry their package,
//! and events are keyed by (package, name), so `timeout` on `http` and
//! `timeout` on `net` never share counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::miner::PairOccurrence;
use crate::path::AccessPath;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKey {
    pub root_package: String,
    pub event_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub path: AccessPath,
    pub event: String,
}

impl Pair {
    pub fn new(path: AccessPath, event: impl Into<String>) -> Self {
        Pair { path, event: event.into() }
    }

    pub fn package(&self) -> &str {
        self.path.package()
    }

    pub fn event_key(&self) -> EventKey {
        EventKey { root_package: self.package().into(), event_name: self.event.clone() }
    }
}

impl From<&PairOccurrence> for Pair {
    fn from(occ: &PairOccurrence) -> Self {
        Pair::new(occ.path.clone(), occ.event.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pair ({path}, {event}) is not in the index")]
pub struct MissingPair {
    pub path: String,
    pub event: String,
}

impl MissingPair {
    pub fn of(pair: &Pair) -> Self {
        use alloc::string::ToString;
        MissingPair { path: pair.path.to_string(), event: pair.event.clone() }
    }
}

/// Accumulates counts; cheap to merge, so partial builders can be filled in
/// parallel and combined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexBuilder {
    counts: BTreeMap<Pair, u64>,
    /// Projects per pair, or `None` once counts without provenance were added.
    projects: Option<BTreeMap<Pair, BTreeSet<String>>>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        IndexBuilder { counts: BTreeMap::new(), projects: Some(BTreeMap::new()) }
    }

    pub fn add(&mut self, occ: &PairOccurrence) {
        let pair = Pair::from(occ);
        if let Some(projects) = &mut self.projects {
            projects.entry(pair.clone()).or_default().insert(occ.project.clone());
        }
        *self.counts.entry(pair).or_insert(0) += 1;
    }

    /// Adds `count` occurrences whose projects are unknown. Project counts
    /// become unavailable for the whole index.
    pub fn add_count(&mut self, pair: Pair, count: u64) {
        if count == 0 {
            return;
        }
        self.projects = None;
        *self.counts.entry(pair).or_insert(0) += count;
    }

    pub fn merge(&mut self, other: IndexBuilder) {
        for (pair, count) in other.counts {
            *self.counts.entry(pair).or_insert(0) += count;
        }
        self.projects = match (self.projects.take(), other.projects) {
            (Some(mut mine), Some(theirs)) => {
                for (pair, set) in theirs {
                    mine.entry(pair).or_default().extend(set);
                }
                Some(mine)
            }
            _ => None,
        };
    }

    pub fn build(self) -> CountsIndex {
        CountsIndex::from_parts(self.counts, self.projects)
    }
}

impl Extend<PairOccurrence> for IndexBuilder {
    fn extend<I: IntoIterator<Item = PairOccurrence>>(&mut self, iter: I) {
        for occ in iter {
            self.add(&occ);
        }
    }
}

impl<'a> Extend<&'a PairOccurrence> for IndexBuilder {
    fn extend<I: IntoIterator<Item = &'a PairOccurrence>>(&mut self, iter: I) {
        for occ in iter {
            self.add(occ);
        }
    }
}

/// Pair counts sorted ascending with running sums, for "total of all
/// counts not above k" queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Ranked {
    sorted: Vec<u64>,
    prefix: Vec<u64>,
}

impl Ranked {
    fn push(&mut self, count: u64) {
        self.sorted.push(count);
    }

    fn finish(&mut self) {
        self.sorted.sort_unstable();
        let mut total = 0;
        self.prefix = self
            .sorted
            .iter()
            .map(|c| {
                total += c;
                total
            })
            .collect();
    }

    fn total(&self) -> u64 {
        self.prefix.last().copied().unwrap_or(0)
    }

    fn sum_at_most(&self, k: u64) -> u64 {
        match self.sorted.partition_point(|&c| c <= k) {
            0 => 0,
            i => self.prefix[i - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// k(a, e)
    pub k: u64,
    /// Number of distinct projects contributing, when known.
    pub projects: Option<u64>,
}

/// Immutable aggregated counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountsIndex {
    pairs: BTreeMap<Pair, PairCounts>,
    by_path: BTreeMap<AccessPath, Ranked>,
    by_event: BTreeMap<EventKey, Ranked>,
    projects: Option<BTreeMap<Pair, BTreeSet<String>>>,
}

pub fn aggregate<'a>(occurrences: impl IntoIterator<Item = &'a PairOccurrence>) -> CountsIndex {
    let mut builder = IndexBuilder::new();
    builder.extend(occurrences);
    builder.build()
}

impl CountsIndex {
    fn from_parts(counts: BTreeMap<Pair, u64>, projects: Option<BTreeMap<Pair, BTreeSet<String>>>) -> Self {
        let mut by_path: BTreeMap<AccessPath, Ranked> = BTreeMap::new();
        let mut by_event: BTreeMap<EventKey, Ranked> = BTreeMap::new();
        let mut pairs = BTreeMap::new();
        for (pair, k) in counts {
            by_path.entry(pair.path.clone()).or_default().push(k);
            by_event.entry(pair.event_key()).or_default().push(k);
            let p = projects.as_ref().map(|m| m.get(&pair).map_or(0, |s| s.len() as u64));
            pairs.insert(pair, PairCounts { k, projects: p });
        }
        by_path.values_mut().for_each(Ranked::finish);
        by_event.values_mut().for_each(Ranked::finish);
        CountsIndex { pairs, by_path, by_event, projects }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether per-pair project counts are available.
    pub fn has_projects(&self) -> bool {
        self.projects.is_some()
    }

    /// Projects contributing to `pair`, when known.
    pub fn projects_of(&self, pair: &Pair) -> Option<&BTreeSet<String>> {
        self.projects.as_ref()?.get(pair)
    }

    /// Pairs in index order with their counts.
    pub fn pairs(&self) -> impl Iterator<Item = (&Pair, &PairCounts)> {
        self.pairs.iter()
    }

    pub fn contains(&self, pair: &Pair) -> bool {
        self.pairs.contains_key(pair)
    }

    pub fn get(&self, pair: &Pair) -> Option<PairCounts> {
        self.pairs.get(pair).copied()
    }

    /// k(a, e); zero for absent pairs.
    pub fn k(&self, pair: &Pair) -> u64 {
        self.pairs.get(pair).map_or(0, |c| c.k)
    }

    /// n_a: occurrences involving path `a` with any event.
    pub fn n_a(&self, path: &AccessPath) -> u64 {
        self.by_path.get(path).map_or(0, Ranked::total)
    }

    /// n_e: occurrences of event `e` on any path of its package.
    pub fn n_e(&self, event: &EventKey) -> u64 {
        self.by_event.get(event).map_or(0, Ranked::total)
    }

    /// Total number of occurrences.
    pub fn total(&self) -> u64 {
        self.pairs.values().map(|c| c.k).sum()
    }

    /// Root packages in sorted order.
    pub fn packages(&self) -> BTreeSet<&str> {
        self.pairs.keys().map(Pair::package).collect()
    }

    /// k_e(⌈a⌉): the occurrences of `e` on paths used with `e` no more often than `a`.
    pub fn cumulative_count_for_path(&self, pair: &Pair) -> Result<u64, MissingPair> {
        let k = self.pairs.get(pair).ok_or_else(|| MissingPair::of(pair))?.k;
        Ok(self.by_event[&pair.event_key()].sum_at_most(k))
    }

    /// k_a(⌈e⌉): the occurrences of `a` with events used on `a` no more often than `e`.
    pub fn cumulative_count_for_event(&self, pair: &Pair) -> Result<u64, MissingPair> {
        let k = self.pairs.get(pair).ok_or_else(|| MissingPair::of(pair))?.k;
        Ok(self.by_path[&pair.path].sum_at_most(k))
    }

    /// Builder holding this index's counts, for merging.
    pub fn to_builder(&self) -> IndexBuilder {
        let counts = self.pairs.iter().map(|(p, c)| (p.clone(), c.k)).collect();
        IndexBuilder { counts, projects: self.projects.clone() }
    }

    /// Pointwise sum of counts and union of project sets.
    pub fn merge(&self, other: &CountsIndex) -> CountsIndex {
        let mut builder = self.to_builder();
        builder.merge(other.to_builder());
        builder.build()
    }
}
