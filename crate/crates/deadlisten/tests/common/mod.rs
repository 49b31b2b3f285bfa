#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deadlisten::formats;
use deadlisten_core::corpus::CountsIndex;
use deadlisten_core::eval::LabeledPair;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }
}

pub fn deadlisten<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_deadlisten")).args(args).output().expect("spawn deadlisten").into()
}

pub fn write_index_file(file: &Path, index: &CountsIndex) {
    let mut buf = Vec::new();
    formats::write_index(&mut buf, index).unwrap();
    fs::write(file, buf).unwrap();
}

pub fn write_labels_file(file: &Path, labels: &[LabeledPair]) {
    let mut buf = Vec::new();
    formats::write_labels(&mut buf, labels).unwrap();
    fs::write(file, buf).unwrap();
}

/// Data rows of a report, without `#` header lines and the column header.
pub fn report_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}
