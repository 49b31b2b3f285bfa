use deadlisten_core::classifier::Config;
use deadlisten_core::corpus::{CountsIndex, IndexBuilder, Pair};
use deadlisten_core::eval::{ConfigResult, Label, LabeledPair, ScoreReport};
use deadlisten_core::path::AccessPath;

/// An HTTP request wrapper whose `timeout` listener can never fire.
pub const REQUEST: &str = "const http = require('http');
module.exports.request = (url) =>
  new Promise((resolve, reject) => {
    const req = http.request(url, res => {
      res.on('data', chunk => { /* omitted */ });
      res.on('end', () => {
          /* omitted */
          resolve( res);
      });
      res.on('timeout', () => reject(req)); // bug here
    });
    req.end();
  });
";

/// The same wrapper with chained registrations.
pub const REQUEST_CHAINED: &str = "const http = require('http');
module.exports.request = (url) =>
  new Promise((resolve, reject) => {
    const req = http.request(url, res => {
      res.on('data', chunk => {})
        .on('end', () => { resolve(res); })
        .on('timeout', () => reject(req));
    });
    req.end();
  });
";

/// Line and column of the `timeout` registration in [`REQUEST`].
pub const TIMEOUT_AT: (u32, u32) = (10, 11);

pub const RES: &str = "require(http).request(1)(0)";
pub const REQ: &str = "require(http).request()";
pub const OPTIMAL: &str = "0.1,0.1,0.03,0.01";

pub fn path(text: &str) -> AccessPath {
    AccessPath::parse(text).unwrap()
}

pub fn cfg(s: &str) -> Config {
    s.parse().unwrap()
}

/// Counts around the response object: 996 `data`, 898 `end` and one
/// `timeout`, plus 215 `timeout` registrations on the request object so
/// that n_e(timeout) = 216.
pub fn request_counts() -> CountsIndex {
    let mut b = IndexBuilder::new();
    b.add_count(Pair::new(path(RES), "data"), 996);
    b.add_count(Pair::new(path(RES), "end"), 898);
    b.add_count(Pair::new(path(RES), "timeout"), 1);
    b.add_count(Pair::new(path(REQ), "timeout"), 215);
    b.build()
}

pub fn doge_path(i: usize) -> AccessPath {
    path(&format!("require(socket.io-client).connect()(0).s{i}"))
}

/// 520 paths of one package used with `doge`: 519 once, one three times.
/// Every path also carries 200 `connect` registrations so the event side
/// of the test can fire.
pub fn doge_index() -> CountsIndex {
    let mut b = IndexBuilder::new();
    for i in 0..520 {
        b.add_count(Pair::new(doge_path(i), "doge"), if i == 0 { 3 } else { 1 });
        b.add_count(Pair::new(doge_path(i), "connect"), 200);
    }
    b.build()
}

/// Adds one package in which ⟨require(pkg).rare, e⟩ is flagged under the
/// usual thresholds: `e` is rare on the path and the path is rare for `e`.
fn add_flagged_unit(b: &mut IndexBuilder, pkg: &str) -> Pair {
    let rare = Pair::new(path(&format!("require({pkg}).rare")), "e");
    b.add_count(rare.clone(), 1);
    b.add_count(Pair::new(path(&format!("require({pkg}).rare")), "common"), 500);
    b.add_count(Pair::new(path(&format!("require({pkg}).usual")), "e"), 500);
    rare
}

/// 33 flagged pairs (30 labeled incorrect, 3 correct) and 369 further
/// incorrect pairs that are singletons and never flagged: 399 INCORRECT labels.
pub fn optimal_row_fixture() -> (CountsIndex, Vec<LabeledPair>) {
    let mut b = IndexBuilder::new();
    let mut labels = Vec::new();
    for i in 0..33 {
        let pair = add_flagged_unit(&mut b, &format!("u{i}"));
        let label = if i < 30 { Label::Incorrect } else { Label::Correct };
        labels.push(LabeledPair { pair, label });
    }
    for i in 0..369 {
        let pair = Pair::new(path(&format!("require(s{i})")), "x");
        b.add_count(pair.clone(), 5);
        labels.push(LabeledPair { pair, label: Label::Incorrect });
    }
    (b.build(), labels)
}

/// A small index with mixed verdicts, used for brute-force comparisons.
pub fn mixed_fixture() -> (CountsIndex, Vec<LabeledPair>) {
    let mut b = IndexBuilder::new();
    let counts: &[(&str, &str, u64)] = &[
        ("require(net).connect()", "data", 300),
        ("require(net).connect()", "end", 120),
        ("require(net).connect()", "timeout", 2),
        ("require(net).connect()", "weird", 1),
        ("require(net).createServer()", "connection", 80),
        ("require(net).createServer()", "data", 3),
        ("require(net).Socket[new]()", "data", 40),
        ("require(net).Socket[new]()", "timeout", 60),
        ("require(net).Socket[new]()", "end", 1),
        ("require(fs).createReadStream()", "data", 90),
        ("require(fs).createReadStream()", "close", 30),
        ("require(fs).createReadStream()", "finish", 2),
        ("require(fs).createWriteStream()", "finish", 70),
        ("require(fs).createWriteStream()", "data", 1),
    ];
    for (p, e, k) in counts {
        b.add_count(Pair::new(path(p), *e), *k);
    }
    let labels = [
        ("require(net).connect()", "timeout", Label::Correct),
        ("require(net).connect()", "weird", Label::Incorrect),
        ("require(net).createServer()", "data", Label::Incorrect),
        ("require(net).Socket[new]()", "end", Label::Imprecise),
        ("require(fs).createReadStream()", "finish", Label::Incorrect),
        ("require(fs).createWriteStream()", "data", Label::Incorrect),
        ("require(net).connect()", "data", Label::Correct),
        ("require(fs).createWriteStream()", "finish", Label::Correct),
    ];
    let labels = labels.iter().map(|(p, e, l)| LabeledPair { pair: Pair::new(path(p), *e), label: *l }).collect();
    (b.build(), labels)
}

fn row(config: &str, tp: u64, fp: u64) -> ConfigResult {
    let incorrect = 399;
    ConfigResult {
        config: cfg(config),
        report: ScoreReport {
            true_positives: tp,
            false_positives: fp,
            incorrect_labels: incorrect,
            false_negatives: incorrect - tp,
            precision: Some(100.0 * tp as f64 / (tp + fp) as f64),
            recall: Some(100.0 * tp as f64 / incorrect as f64),
            ..ScoreReport::default()
        },
    }
}

/// The eight published Pareto rows, rebuilt from their TP/FP counts over
/// 399 incorrect labels.
pub fn published_rows() -> Vec<ConfigResult> {
    vec![
        row("0.05,0.05,0.02,0.1", 12, 0),
        row("0.1,0.05,0.05,0.1", 23, 1),
        row("0.1,0.05,0.1,0.1", 24, 2),
        row("0.1,0.1,0.03,0.01", 30, 3),
        row("0.25,0.04,0.01,0.005", 31, 4),
        row("0.25,0.05,0.01,0.01", 32, 5),
        row("0.25,0.01,1,0.04", 35, 6),
        row("0.25,0.01,1,0.1", 39, 7),
    ]
}
