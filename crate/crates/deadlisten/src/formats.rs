//! Interchange files between pipeline stages: occurrence JSONL, the
//! aggregated index CSV, label CSV, model JSON, grid TOML and suppressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use deadlisten_core::classifier::{Classification, Config, Model, Verdict};
use deadlisten_core::corpus::{CountsIndex, IndexBuilder, Pair};
use deadlisten_core::eval::{Grid, Label, LabeledPair};
use deadlisten_core::miner::PairOccurrence;
use deadlisten_core::path::{AccessPath, PathError};

pub const INDEX_HEADER: [&str; 4] = ["pkg", "path", "event", "count"];
pub const LABELS_HEADER: [&str; 4] = ["pkg", "path", "event", "label"];
pub const SUPPRESS_HEADER: [&str; 2] = ["path", "event"];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot access {file}")]
    Io { file: String, source: io::Error },
    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: u64, message: String },
    #[error("{file}:{line}: label syntax error: {message}")]
    LabelSyntax { file: String, line: u64, message: String },
    #[error("{file}:{line}: duplicate label for ({path}, {event}), first given on line {first}")]
    DuplicateLabel { file: String, line: u64, first: u64, path: String, event: String },
}

fn io_err(file: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io { file: file.display().to_string(), source }
}

fn syntax(file: &Path, line: u64, message: impl ToString) -> FormatError {
    FormatError::Syntax { file: file.display().to_string(), line, message: message.to_string() }
}

fn open(file: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(file).map(BufReader::new).map_err(io_err(file))
}

fn create(file: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(file).map(BufWriter::new).map_err(io_err(file))
}

/// Runs `f` against `file`, or against stdout when `file` is `None`.
pub fn write_output<F>(file: Option<&Path>, f: F) -> Result<(), FormatError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match file {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w).and_then(|()| w.flush()).map_err(io_err(path))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).and_then(|()| lock.flush()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn parse_path(file: &Path, line: u64, text: &str, pkg: &str) -> Result<AccessPath, FormatError> {
    let path = AccessPath::parse(text).map_err(|e: PathError| syntax(file, line, format!("path {text:?}: {e}")))?;
    if path.package() != pkg {
        return Err(syntax(file, line, format!("package {pkg:?} does not match path {text:?}")));
    }
    Ok(path)
}

// ---- occurrences ----

#[derive(Debug, Serialize, Deserialize)]
struct OccurrenceRecord {
    path: String,
    event: String,
    pkg: String,
    project: String,
    file: String,
    line: u32,
    #[serde(default)]
    column: u32,
}

pub fn write_occurrences<'a>(
    w: &mut dyn Write,
    occurrences: impl IntoIterator<Item = &'a PairOccurrence>,
) -> io::Result<()> {
    for o in occurrences {
        let record = OccurrenceRecord {
            path: o.path.to_string(),
            event: o.event.clone(),
            pkg: o.package().to_string(),
            project: o.project.clone(),
            file: o.file.clone(),
            line: o.line,
            column: o.column,
        };
        serde_json::to_writer(&mut *w, &record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_occurrences(file: &Path) -> Result<Vec<PairOccurrence>, FormatError> {
    parse_occurrences(file, open(file)?)
}

fn parse_occurrences(file: &Path, reader: impl BufRead) -> Result<Vec<PairOccurrence>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i as u64 + 1;
        let line = line.map_err(io_err(file))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: OccurrenceRecord = serde_json::from_str(&line).map_err(|e| syntax(file, n, e))?;
        out.push(PairOccurrence {
            path: parse_path(file, n, &r.path, &r.pkg)?,
            event: r.event,
            project: r.project,
            file: r.file,
            line: r.line,
            column: r.column,
        });
    }
    Ok(out)
}

// ---- aggregated index ----

/// Index rows in canonical order: package, serialized path, event.
fn sorted_rows(index: &CountsIndex) -> Vec<(String, &Pair, u64)> {
    let mut rows: Vec<(String, &Pair, u64)> = index.pairs().map(|(p, c)| (p.path.to_string(), p, c.k)).collect();
    rows.sort_by(|a, b| (a.1.package(), &a.0, &a.1.event).cmp(&(b.1.package(), &b.0, &b.1.event)));
    rows
}

pub fn write_index(w: &mut dyn Write, index: &CountsIndex) -> io::Result<()> {
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    csv.write_record(INDEX_HEADER)?;
    for (path, pair, k) in sorted_rows(index) {
        csv.write_record([pair.package(), &path, &pair.event, &k.to_string()])?;
    }
    csv.flush()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader)
}

fn check_header(file: &Path, csv: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), FormatError> {
    let header = csv.headers().map_err(|e| syntax(file, 1, e))?;
    if !header.iter().eq(expected.iter().copied()) {
        return Err(syntax(file, 1, format!("expected header {:?}", expected.join(","))));
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub fn read_index(file: &Path) -> Result<IndexBuilder, FormatError> {
    let mut csv = csv_reader(open(file)?);
    check_header(file, &mut csv, &INDEX_HEADER)?;
    let mut builder = IndexBuilder::new();
    for record in csv.records() {
        let record = record.map_err(|e| syntax(file, e.position().map_or(0, |p| p.line()), e))?;
        let line = record_line(&record);
        let path = parse_path(file, line, &record[1], &record[0])?;
        let count: u64 = record[3].parse().map_err(|_| syntax(file, line, format!("bad count {:?}", &record[3])))?;
        if count == 0 {
            return Err(syntax(file, line, "count must be positive"));
        }
        builder.add_count(Pair::new(path, &record[2]), count);
    }
    Ok(builder)
}

/// True when the file starts with the index CSV header.
fn looks_like_index(file: &Path) -> Result<bool, FormatError> {
    let mut first = String::new();
    open(file)?.read_line(&mut first).map_err(io_err(file))?;
    Ok(first.trim_end() == INDEX_HEADER.join(","))
}

/// Loads and merges occurrence JSONL files and index CSV files, told apart
/// by their first line.
pub fn load_counts(files: &[impl AsRef<Path>]) -> Result<IndexBuilder, FormatError> {
    let mut builder = IndexBuilder::new();
    for file in files {
        let file = file.as_ref();
        if looks_like_index(file)? {
            builder.merge(read_index(file)?);
        } else {
            builder.extend(&read_occurrences(file)?);
        }
    }
    Ok(builder)
}

// ---- labels ----

pub fn read_labels(file: &Path) -> Result<Vec<LabeledPair>, FormatError> {
    let label_err =
        |line: u64, message: String| FormatError::LabelSyntax { file: file.display().to_string(), line, message };
    let mut csv = csv_reader(open(file)?);
    check_header(file, &mut csv, &LABELS_HEADER)?;
    let mut seen: BTreeMap<Pair, u64> = BTreeMap::new();
    let mut out = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| label_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&record);
        let path = AccessPath::parse(&record[1]).map_err(|e| label_err(line, format!("path {:?}: {e}", &record[1])))?;
        if path.package() != &record[0] {
            return Err(label_err(line, format!("package {:?} does not match path {:?}", &record[0], &record[1])));
        }
        let label: Label = record[3].parse().map_err(|bad| label_err(line, format!("unknown label {bad:?}")))?;
        let pair = Pair::new(path, &record[2]);
        if let Some(&first) = seen.get(&pair) {
            return Err(FormatError::DuplicateLabel {
                file: file.display().to_string(),
                line,
                first,
                path: record[1].to_string(),
                event: record[2].to_string(),
            });
        }
        seen.insert(pair.clone(), line);
        out.push(LabeledPair { pair, label });
    }
    Ok(out)
}

pub fn write_labels(w: &mut dyn Write, labels: &[LabeledPair]) -> io::Result<()> {
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    csv.write_record(LABELS_HEADER)?;
    for l in labels {
        csv.write_record([l.pair.package(), &l.pair.path.to_string(), &l.pair.event, l.label.as_str()])?;
    }
    csv.flush()
}

// ---- model ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub p_a: f64,
    pub p_e: f64,
    pub p_ca: f64,
    pub p_ce: f64,
}

impl From<Config> for ConfigRecord {
    fn from(c: Config) -> Self {
        ConfigRecord { p_a: c.p_a, p_e: c.p_e, p_ca: c.p_ca, p_ce: c.p_ce }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub path: String,
    pub event: String,
    pub k: u64,
    pub n_a: u64,
    pub n_e: u64,
    pub k_cum_path: u64,
    pub k_cum_event: u64,
    pub bcdf_path: f64,
    pub bcdf_event: f64,
}

impl ModelEntry {
    fn new(pair: &Pair, c: &Classification) -> Self {
        ModelEntry {
            path: pair.path.to_string(),
            event: pair.event.clone(),
            k: c.k,
            n_a: c.n_a,
            n_e: c.n_e,
            k_cum_path: c.k_cum_path,
            k_cum_event: c.k_cum_event,
            bcdf_path: c.bcdf_path,
            bcdf_event: c.bcdf_event,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PackageModel {
    pub anomalous: Vec<ModelEntry>,
    pub expected: Vec<ModelEntry>,
    pub unclassified: Vec<ModelEntry>,
}

/// On-disk model: the configuration and every classified pair by package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub config: ConfigRecord,
    pub packages: BTreeMap<String, PackageModel>,
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let mut packages: BTreeMap<String, PackageModel> = BTreeMap::new();
        for (pair, c) in &model.entries {
            let pkg = packages.entry(pair.package().to_string()).or_default();
            let list = match c.verdict {
                Verdict::Anomalous => &mut pkg.anomalous,
                Verdict::Expected => &mut pkg.expected,
                Verdict::Unclassified => &mut pkg.unclassified,
            };
            list.push(ModelEntry::new(pair, c));
        }
        for pkg in packages.values_mut() {
            for list in [&mut pkg.anomalous, &mut pkg.expected, &mut pkg.unclassified] {
                list.sort_by(|a, b| (&a.path, &a.event).cmp(&(&b.path, &b.event)));
            }
        }
        ModelFile { config: model.config.into(), packages }
    }

    pub fn config(&self) -> Result<Config, deadlisten_core::classifier::ConfigError> {
        let c = self.config;
        Config::new(c.p_a, c.p_e, c.p_ca, c.p_ce)
    }

    /// Anomalous entries keyed by (serialized path, event).
    pub fn anomalous(&self) -> BTreeMap<(&str, &str), &ModelEntry> {
        self.packages.values().flat_map(|p| &p.anomalous).map(|e| ((e.path.as_str(), e.event.as_str()), e)).collect()
    }

    pub fn len(&self) -> usize {
        self.packages.values().map(|p| p.anomalous.len() + p.expected.len() + p.unclassified.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn write_model(w: &mut dyn Write, model: &ModelFile) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, model)?;
    w.write_all(b"\n")
}

pub fn read_model(file: &Path) -> Result<ModelFile, FormatError> {
    let model: ModelFile = serde_json::from_reader(open(file)?).map_err(|e| syntax(file, e.line() as u64, e))?;
    model.config().map_err(|e| syntax(file, 1, e))?;
    Ok(model)
}

// ---- grid ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRecord {
    rarity: Option<Vec<f64>>,
    confidence: Option<Vec<f64>>,
}

/// Reads `rarity = [..]` and `confidence = [..]`; a missing key keeps its default.
pub fn read_grid(file: &Path) -> Result<Grid, FormatError> {
    let mut text = String::new();
    open(file)?.read_to_string(&mut text).map_err(io_err(file))?;
    parse_grid(file, &text)
}

fn parse_grid(file: &Path, text: &str) -> Result<Grid, FormatError> {
    let record: GridRecord = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| text[..s.start].matches('\n').count() as u64 + 1);
        syntax(file, line, e.message())
    })?;
    let mut grid = Grid::default();
    if let Some(r) = record.rarity {
        grid.rarity = r;
    }
    if let Some(c) = record.confidence {
        grid.confidence = c;
    }
    grid.configs().map_err(|e| syntax(file, 1, e))?;
    Ok(grid)
}

// ---- suppressions ----

/// Pairs the user has triaged; findings on them are not reported.
pub fn read_suppressions(file: &Path) -> Result<BTreeSet<(String, String)>, FormatError> {
    let mut csv = csv_reader(open(file)?);
    check_header(file, &mut csv, &SUPPRESS_HEADER)?;
    let mut out = BTreeSet::new();
    for record in csv.records() {
        let record = record.map_err(|e| syntax(file, e.position().map_or(0, |p| p.line()), e))?;
        let line = record_line(&record);
        let path =
            AccessPath::parse(&record[0]).map_err(|e| syntax(file, line, format!("path {:?}: {e}", &record[0])))?;
        out.insert((path.to_string(), record[1].to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_defaults_and_overrides() {
        let p = Path::new("g.toml");
        assert_eq!(parse_grid(p, "").unwrap(), Grid::default());
        let g = parse_grid(p, "rarity = [0.1]\nconfidence = [0.05, 1.0]\n").unwrap();
        assert_eq!((g.rarity, g.confidence), (vec![0.1], vec![0.05, 1.0]));
        assert!(parse_grid(p, "rarity = [1.5]").is_err());
        assert!(parse_grid(p, "rarity = []").is_err());
        let err = parse_grid(p, "\nbogus = 1").unwrap_err().to_string();
        assert!(err.starts_with("g.toml:2:"), "{err}");
    }

    #[test]
    fn occurrence_lines_round_trip() {
        let occ = PairOccurrence {
            path: AccessPath::parse("require(@scope/pkg).a()(0)").unwrap(),
            event: "é,\"x\"".into(),
            project: "p".into(),
            file: "src/a.js".into(),
            line: 3,
            column: 9,
        };
        let mut buf = Vec::new();
        write_occurrences(&mut buf, [&occ]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"path\":\"require(@scope/pkg).a()(0)\",\"event\":"));
        assert_eq!(parse_occurrences(Path::new("x"), &buf[..]).unwrap(), [occ]);
        let bad =
            b"{\"path\":\"require(a)\",\"event\":\"e\",\"pkg\":\"b\",\"project\":\"p\",\"file\":\"f\",\"line\":1}\n";
        assert!(parse_occurrences(Path::new("x"), &bad[..]).is_err());
    }
}
