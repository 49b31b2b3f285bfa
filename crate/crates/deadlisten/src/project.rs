//! Mining whole project directories.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

use deadlisten_core::miner::{mine_source, MiningStats, PairOccurrence};

pub const DEFAULT_EXTENSIONS: &[&str] = &["js"];

/// Directories never descended into: installed dependencies and VCS or
/// tool metadata.
fn skipped_dir(name: &str) -> bool {
    name == "node_modules" || (name.starts_with('.') && name.len() > 1 && name != "..")
}

#[derive(Debug, thiserror::Error)]
#[error("cannot read project {root}")]
pub struct ProjectError {
    pub root: String,
    pub source: io::Error,
}

/// A file the miner could not use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileProblem {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub files: usize,
    pub registrations: usize,
    pub unresolved: usize,
    pub dropped_long_paths: usize,
    pub truncated: usize,
    pub occurrences: usize,
    pub parse_failures: Vec<FileProblem>,
    pub read_failures: Vec<FileProblem>,
}

impl Diagnostics {
    fn add_stats(&mut self, s: &MiningStats) {
        self.registrations += s.registrations;
        self.unresolved += s.unresolved;
        self.dropped_long_paths += s.dropped_long_paths;
        self.truncated += s.truncated;
    }

    pub fn merge(&mut self, other: Diagnostics) {
        self.files += other.files;
        self.registrations += other.registrations;
        self.unresolved += other.unresolved;
        self.dropped_long_paths += other.dropped_long_paths;
        self.truncated += other.truncated;
        self.occurrences += other.occurrences;
        self.parse_failures.extend(other.parse_failures);
        self.read_failures.extend(other.read_failures);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectMining {
    pub occurrences: Vec<PairOccurrence>,
    pub diagnostics: Diagnostics,
}

/// Relative path with `/` separators, or the file name when `file` is the root.
fn display_relative(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).ok().filter(|r| !r.as_os_str().is_empty());
    let rel = rel.unwrap_or_else(|| Path::new(file.file_name().unwrap_or(file.as_os_str())));
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

fn has_extension(path: &Path, extensions: &[String]) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| extensions.iter().any(|x| x == e))
}

/// Source files below `root` in a stable order, plus walk errors.
fn collect_files(root: &Path, extensions: &[String]) -> (Vec<PathBuf>, Vec<FileProblem>) {
    let mut files = Vec::new();
    let mut problems = Vec::new();
    let walk = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_type().is_dir() || !skipped_dir(&e.file_name().to_string_lossy()));
    for entry in walk {
        match entry {
            Ok(e) if e.file_type().is_file() && has_extension(e.path(), extensions) => files.push(e.into_path()),
            Ok(_) => {}
            Err(err) => problems.push(FileProblem {
                file: err.path().map_or_else(|| root.display().to_string(), |p| display_relative(root, p)),
                message: err.to_string(),
            }),
        }
    }
    (files, problems)
}

enum FileOutcome {
    Mined(Vec<PairOccurrence>, MiningStats),
    ParseFailed(FileProblem),
    ReadFailed(FileProblem),
}

fn mine_file(root: &Path, file: &Path, project: &str) -> FileOutcome {
    let name = display_relative(root, file);
    let bytes = match fs::read(file) {
        Ok(b) => b,
        Err(e) => return FileOutcome::ReadFailed(FileProblem { file: name, message: e.to_string() }),
    };
    let text = String::from_utf8_lossy(&bytes);
    match mine_source(&text, &name, project) {
        Ok(m) => FileOutcome::Mined(m.occurrences, m.stats),
        Err(e) => FileOutcome::ParseFailed(FileProblem { file: name, message: e.to_string() }),
    }
}

/// Mines every matching file below `root`. Files are processed in parallel
/// and the result is in walk order, so it is the same on every run.
/// Only an unreadable root is an error; per-file problems are diagnostics.
pub fn mine_project(root: &Path, project: &str, extensions: &[String]) -> Result<ProjectMining, ProjectError> {
    let err = |source| ProjectError { root: root.display().to_string(), source };
    let meta = fs::metadata(root).map_err(err)?;
    if meta.is_dir() {
        fs::read_dir(root).map_err(err)?;
    }
    let (files, walk_problems) = collect_files(root, extensions);
    let outcomes: Vec<FileOutcome> = files.par_iter().map(|f| mine_file(root, f, project)).collect();

    let mut out = ProjectMining::default();
    out.diagnostics.files = files.len();
    out.diagnostics.read_failures = walk_problems;
    for outcome in outcomes {
        match outcome {
            FileOutcome::Mined(occs, stats) => {
                out.diagnostics.add_stats(&stats);
                out.occurrences.extend(occs);
            }
            FileOutcome::ParseFailed(p) => out.diagnostics.parse_failures.push(p),
            FileOutcome::ReadFailed(p) => out.diagnostics.read_failures.push(p),
        }
    }
    out.diagnostics.occurrences = out.occurrences.len();
    Ok(out)
}

/// Parses a comma-separated extension list such as `js,mjs,.cjs`.
pub fn parse_extensions(list: &str) -> Vec<String> {
    list.split(',').map(|e| e.trim().trim_start_matches('.').to_string()).filter(|e| !e.is_empty()).collect()
}
