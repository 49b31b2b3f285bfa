use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use deadlisten_core::classifier::{bcdf, classify_corpus, classify_corpus_with, Config, CountMode, Verdict};
use deadlisten_core::corpus::{aggregate, CountsIndex, IndexBuilder, Pair};
use deadlisten_core::eval::{DEFAULT_CONFIDENCE, DEFAULT_RARITY};
use deadlisten_core::miner::{mine_source, PairOccurrence};
use deadlisten_core::path::{is_registration_method, AccessPath, PathStep, REGISTRATION_METHODS};

pub type Check = Result<(), TestCaseError>;

fn ident() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[A-Za-z_$][A-Za-z0-9_$]{0,6}",
        1 => prop::sample::select(REGISTRATION_METHODS.to_vec()).prop_map(String::from),
        1 => "[a-zα-ω][a-z0-9ü]{0,3}",
    ]
}

fn step() -> impl Strategy<Value = PathStep> {
    prop_oneof![
        ident().prop_map(PathStep::PropertyRead),
        Just(PathStep::CallReturn),
        (0u32..1000).prop_map(PathStep::Argument),
        Just(PathStep::Instance),
    ]
}

pub fn access_path() -> impl Strategy<Value = AccessPath> {
    ("(@[a-z]{1,4}/)?[a-z0-9][a-z0-9._-]{0,8}", prop::collection::vec(step(), 0..10))
        .prop_map(|(pkg, steps)| AccessPath::from_steps(&pkg, steps).unwrap())
}

pub fn config() -> impl Strategy<Value = Config> {
    let r = prop::sample::select(DEFAULT_RARITY.to_vec());
    let c = prop::sample::select(DEFAULT_CONFIDENCE.to_vec());
    (r.clone(), r, c.clone(), c).prop_map(|(a, e, ca, ce)| Config::new(a, e, ca, ce).unwrap())
}

fn occurrence(pkg: u8, p: u8, e: u8, project: u8) -> PairOccurrence {
    PairOccurrence {
        path: AccessPath::parse(&format!("require(m{pkg}).p{p}")).unwrap(),
        event: format!("e{e}"),
        project: format!("proj{project}"),
        file: "index.js".into(),
        line: 1,
        column: 1,
    }
}

pub fn occurrences() -> impl Strategy<Value = Vec<PairOccurrence>> {
    prop::collection::vec((0u8..2, 0u8..5, 0u8..4, 0u8..3), 0..120)
        .prop_map(|v| v.into_iter().map(|(pkg, p, e, pr)| occurrence(pkg, p, e, pr)).collect())
}

/// Small index with skewed counts: a few pairs are very frequent.
pub fn small_index() -> impl Strategy<Value = CountsIndex> {
    prop::collection::vec((0u8..2, 0u8..6, 0u8..4, prop_oneof![3 => 1u64..4, 1 => 20u64..400]), 1..25).prop_map(|v| {
        let mut b = IndexBuilder::new();
        for (pkg, p, e, k) in v {
            b.add_count(Pair::new(AccessPath::parse(&format!("require(m{pkg}).p{p}")).unwrap(), format!("e{e}")), k);
        }
        b.build()
    })
}

/// Declarations, registrations and a shuffle seed.
pub type Program = (Vec<(u8, u8)>, Vec<(usize, u8)>, u64);

/// Declarations and registrations of a small program whose statements can be permuted.
pub fn registration_program() -> impl Strategy<Value = Program> {
    (prop::collection::vec((0u8..3, 0u8..3), 1..5), prop::collection::vec((0usize..5, 0u8..3), 1..8), any::<u64>())
}

pub fn round_trip(p: &AccessPath) -> Check {
    let text = p.to_string();
    prop_assert_eq!(&AccessPath::parse(&text).unwrap(), p);
    Ok(())
}

pub fn distinct_serialization(a: &AccessPath, b: &AccessPath) -> Check {
    prop_assert_eq!(a == b, a.to_string() == b.to_string());
    Ok(())
}

pub fn rewrite_idempotent(p: &AccessPath) -> Check {
    let once = p.rewrite_chained_aliases();
    prop_assert_eq!(once.rewrite_chained_aliases(), once.clone());
    for w in once.steps().windows(2) {
        let chained =
            matches!(&w[0], PathStep::PropertyRead(m) if is_registration_method(m)) && w[1] == PathStep::CallReturn;
        prop_assert!(!chained);
    }
    Ok(())
}

/// Σk = n on both sides, every stored k positive, total = stream length.
pub fn counts_consistent(occs: &[PairOccurrence]) -> Check {
    let index = aggregate(occs);
    prop_assert_eq!(index.total(), occs.len() as u64);
    let mut by_path: BTreeMap<AccessPath, u64> = BTreeMap::new();
    let mut by_event: BTreeMap<_, u64> = BTreeMap::new();
    for (pair, c) in index.pairs() {
        prop_assert!(c.k > 0);
        *by_path.entry(pair.path.clone()).or_default() += c.k;
        *by_event.entry(pair.event_key()).or_default() += c.k;
    }
    for (path, n) in by_path {
        prop_assert_eq!(index.n_a(&path), n);
    }
    for (event, n) in by_event {
        prop_assert_eq!(index.n_e(&event), n);
    }
    Ok(())
}

pub fn aggregation_order_independent(occs: &[PairOccurrence], seed: u64) -> Check {
    let mut shuffled = occs.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    prop_assert_eq!(aggregate(occs), aggregate(&shuffled));
    Ok(())
}

pub fn merge_is_joint_aggregation(a: &[PairOccurrence], b: &[PairOccurrence]) -> Check {
    let joint: Vec<PairOccurrence> = a.iter().chain(b).cloned().collect();
    let merged = aggregate(a).merge(&aggregate(b));
    prop_assert_eq!(&merged, &aggregate(&joint));
    prop_assert_eq!(aggregate(b).merge(&aggregate(a)), merged);
    Ok(())
}

pub fn cumulative_bounded_monotone(index: &CountsIndex) -> Check {
    let pairs: Vec<&Pair> = index.pairs().map(|(p, _)| p).collect();
    for p in &pairs {
        let cum = index.cumulative_count_for_path(p).unwrap();
        prop_assert!(index.k(p) <= cum && cum <= index.n_e(&p.event_key()));
        let cum = index.cumulative_count_for_event(p).unwrap();
        prop_assert!(index.k(p) <= cum && cum <= index.n_a(&p.path));
        for q in &pairs {
            if q.event_key() == p.event_key() && index.k(p) <= index.k(q) {
                prop_assert!(
                    index.cumulative_count_for_path(p).unwrap() <= index.cumulative_count_for_path(q).unwrap()
                );
            }
        }
    }
    Ok(())
}

/// Every pair gets exactly one verdict.
pub fn verdicts_partition(index: &CountsIndex, config: &Config) -> Check {
    let model = classify_corpus(index, config);
    let sizes: Vec<usize> = [Verdict::Anomalous, Verdict::Expected, Verdict::Unclassified]
        .iter()
        .map(|v| model.with_verdict(*v).count())
        .collect();
    prop_assert_eq!(sizes.iter().sum::<usize>(), index.len());
    prop_assert!(model.entries.keys().eq(index.pairs().map(|(p, _)| p)));
    Ok(())
}

pub fn bcdf_monotone(n: u64, k: u64, p: f64, q: f64) -> Check {
    let k = k % (n + 1);
    if k < n {
        prop_assert!(bcdf(k, n, p).unwrap() <= bcdf(k + 1, n, p).unwrap() + 1e-12);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(bcdf(k, n, hi).unwrap() <= bcdf(k, n, lo).unwrap() + 1e-12);
        prop_assert_eq!(bcdf(k, n, 1.0).unwrap(), 0.0);
    }
    prop_assert_eq!(bcdf(k, n, 0.0).unwrap(), 1.0);
    prop_assert_eq!(bcdf(n, n, p).unwrap(), 1.0);
    Ok(())
}

pub fn registration_order_irrelevant(decls: &[(u8, u8)], regs: &[(usize, u8)], seed: u64) -> Check {
    let mut stmts: Vec<String> =
        decls.iter().enumerate().map(|(i, (m, f))| format!("const v{i} = require('m{m}').f{f}();")).collect();
    for (v, e) in regs {
        stmts.push(format!("v{}.on('e{e}', () => {{}});", v % decls.len()));
    }
    let original = stmts.join("\n");
    stmts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let permuted = stmts.join("\n");
    let pairs = |src: &str| {
        let mut v: Vec<(String, String)> = mine_source(src, "a.js", "p")
            .unwrap()
            .occurrences
            .into_iter()
            .map(|o| (o.path.to_string(), o.event))
            .collect();
        v.sort();
        v
    };
    prop_assert_eq!(pairs(&original), pairs(&permuted));
    Ok(())
}

/// Refined ANOMALOUS ⊆ raw-count ANOMALOUS.
pub fn refinement_shrinks(index: &CountsIndex, config: &Config) -> Check {
    let refined = classify_corpus(index, config);
    let raw = classify_corpus_with(index, config, CountMode::Raw);
    for (pair, _) in refined.anomalous() {
        prop_assert!(raw.is_anomalous(pair), "{:?} anomalous only after refinement", pair);
    }
    Ok(())
}
