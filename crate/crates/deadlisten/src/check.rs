//! Bug checking: registrations in a project whose pair the model flags.

use std::collections::BTreeSet;
use std::io::{self, Write};

use serde::Serialize;

use deadlisten_core::miner::PairOccurrence;

use crate::formats::ModelFile;

/// Paths with at least this many steps are reported as low confidence.
pub const LONG_PATH_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub path: String,
    pub event: String,
    pub k: u64,
    pub n_a: u64,
    pub n_e: u64,
    pub long_path: bool,
}

/// Occurrences whose pair is anomalous in `model` and not suppressed, in
/// file order.
pub fn findings(
    occurrences: &[PairOccurrence],
    model: &ModelFile,
    suppressed: &BTreeSet<(String, String)>,
) -> Vec<Finding> {
    let anomalous = model.anomalous();
    let mut out: Vec<Finding> = occurrences
        .iter()
        .filter_map(|o| {
            let path = o.path.to_string();
            let entry = anomalous.get(&(path.as_str(), o.event.as_str()))?;
            let (k, n_a, n_e) = (entry.k, entry.n_a, entry.n_e);
            if suppressed.contains(&(path.clone(), o.event.clone())) {
                return None;
            }
            Some(Finding {
                file: o.file.clone(),
                line: o.line,
                column: o.column,
                long_path: o.path.len() >= LONG_PATH_STEPS,
                path,
                event: o.event.clone(),
                k,
                n_a,
                n_e,
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn write_text(w: &mut dyn Write, findings: &[Finding]) -> io::Result<()> {
    for f in findings {
        write!(
            w,
            "{}:{}:{}: listener for '{}' on {} is probably never called (k={}, n_a={}, n_e={})",
            f.file, f.line, f.column, f.event, f.path, f.k, f.n_a, f.n_e
        )?;
        if f.long_path {
            write!(w, " [low-confidence: long path]")?;
        }
        writeln!(w)?;
    }
    let plural = if findings.len() == 1 { "" } else { "s" };
    writeln!(w, "{} finding{plural}", findings.len())
}

pub fn write_json(w: &mut dyn Write, findings: &[Finding]) -> io::Result<()> {
    #[derive(Serialize)]
    struct Report<'a> {
        findings: &'a [Finding],
    }
    serde_json::to_writer_pretty(&mut *w, &Report { findings })?;
    writeln!(w)
}
