//! Command-line front end. Exit codes: 0 success or no findings, 1 findings
//! (`check` only), 2 operational error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use deadlisten_core::classifier::{classify_corpus, Config, Verdict};
use deadlisten_core::corpus::CountsIndex;
use deadlisten_core::eval::{
    cross_validate, pareto_front, score, select_optimal, subset_experiment, sweep, ConfigResult, ExperimentParams,
    Grid, DEFAULT_MIN_PRECISION,
};

use crate::check;
use crate::formats::{self, ModelFile};
use crate::manifest::{manifest_path, ManifestBuilder};
use crate::project::{mine_project, parse_extensions, Diagnostics, ProjectMining};
use crate::report::{self, ReportHeader};

/// The configuration selected on the published validation set.
pub const DEFAULT_CONFIG: &str = "0.1,0.1,0.03,0.01";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "deadlisten", version, about = "Find event listeners that are registered for events that never fire")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine listener registrations from project directories into JSON Lines
    Mine {
        /// Project roots; each one counts as a separate project
        #[arg(required = true)]
        projects: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated file extensions to mine
        #[arg(long, default_value = "js")]
        ext: String,
    },
    /// Aggregate occurrence files (or index files) into an index CSV
    Aggregate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every pair of a corpus and write the model JSON
    Classify {
        /// Occurrence JSONL or index CSV files
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Thresholds p_a,p_e,p_ca,p_ce
        #[arg(long, default_value = DEFAULT_CONFIG)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mine one project and report registrations the model flags as anomalous
    Check {
        project: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// CSV of `path,event` pairs never to report
        #[arg(long)]
        suppress: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the findings as JSON to this file
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "js")]
        ext: String,
    },
    /// Score configurations against labeled pairs and run the experiments
    Eval {
        /// Occurrence JSONL or index CSV files forming the corpus
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        /// CSV with header pkg,path,event,label
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Thresholds for `--mode score`
        #[arg(long, default_value = DEFAULT_CONFIG)]
        config: String,
        /// TOML file with `rarity` and `confidence` arrays
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Comma-separated sample sizes in percent
        #[arg(long, default_value = "2,5,10,25,50")]
        percentages: String,
        #[arg(long, default_value_t = DEFAULT_MIN_PRECISION)]
        min_precision: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Score,
    Sweep,
    Pareto,
    Cv,
    Subset,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Score => "score",
            Mode::Sweep => "sweep",
            Mode::Pareto => "pareto",
            Mode::Cv => "cv",
            Mode::Subset => "subset",
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let rest: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, rest) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, args: Vec<String>) -> Result<u8> {
    match command {
        Command::Mine { projects, out, ext } => cmd_mine(&projects, out.as_deref(), &ext, args),
        Command::Aggregate { inputs, out } => cmd_aggregate(&inputs, out.as_deref(), args),
        Command::Classify { inputs, config, out } => cmd_classify(&inputs, &config, out.as_deref(), args),
        Command::Check { project, model, suppress, format, out, ext } => {
            cmd_check(&project, &model, suppress.as_deref(), format, out.as_deref(), &ext, args)
        }
        Command::Eval {
            corpus,
            labels,
            mode,
            config,
            grid,
            seed,
            folds,
            iterations,
            percentages,
            min_precision,
            out,
        } => {
            let grid = match &grid {
                Some(file) => formats::read_grid(file)?,
                None => Grid::default(),
            };
            let params = ExperimentParams { grid, min_precision, seed };
            let opts = EvalOptions { mode, config: &config, folds, iterations, percentages: &percentages };
            cmd_eval(&corpus, &labels, &params, &opts, out.as_deref(), args)
        }
    }
}

fn parse_config(text: &str) -> Result<Config> {
    text.parse::<Config>().with_context(|| format!("invalid --config {text:?}"))
}

fn save_manifest(out: Option<&Path>, manifest: ManifestBuilder) -> Result<()> {
    if let Some(out) = out {
        let file = manifest_path(out);
        let manifest = manifest.finish();
        formats::write_output(Some(&file), |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            writeln!(w)
        })?;
    }
    Ok(())
}

fn mine_all(projects: &[PathBuf], ext: &str) -> Result<ProjectMining> {
    let extensions = parse_extensions(ext);
    if extensions.is_empty() {
        bail!("--ext names no extension");
    }
    let mut all = ProjectMining::default();
    for root in projects {
        let mined = mine_project(root, &root.display().to_string(), &extensions)?;
        all.occurrences.extend(mined.occurrences);
        all.diagnostics.merge(mined.diagnostics);
    }
    Ok(all)
}

fn report_diagnostics(d: &Diagnostics) {
    eprintln!(
        "files mined: {}, registrations: {}, occurrences: {}, unresolved: {}, parse failures: {}, unreadable: {}",
        d.files,
        d.registrations,
        d.occurrences,
        d.unresolved,
        d.parse_failures.len(),
        d.read_failures.len()
    );
}

fn cmd_mine(projects: &[PathBuf], out: Option<&Path>, ext: &str, args: Vec<String>) -> Result<u8> {
    let mut manifest = ManifestBuilder::start("mine", args);
    manifest.inputs(projects);
    let mined = mine_all(projects, ext)?;
    formats::write_output(out, |w| formats::write_occurrences(w, &mined.occurrences))?;
    report_diagnostics(&mined.diagnostics);
    manifest.note("diagnostics", &mined.diagnostics);
    save_manifest(out, manifest)?;
    Ok(EXIT_OK)
}

fn load_index(inputs: &[PathBuf]) -> Result<CountsIndex> {
    Ok(formats::load_counts(inputs)?.build())
}

fn cmd_aggregate(inputs: &[PathBuf], out: Option<&Path>, args: Vec<String>) -> Result<u8> {
    let mut manifest = ManifestBuilder::start("aggregate", args);
    manifest.inputs(inputs);
    let index = load_index(inputs)?;
    formats::write_output(out, |w| formats::write_index(w, &index))?;
    eprintln!("{} occurrences of {} unique pairs in {} packages", index.total(), index.len(), index.packages().len());
    manifest.note("occurrences", index.total()).note("unique_pairs", index.len());
    save_manifest(out, manifest)?;
    Ok(EXIT_OK)
}

fn cmd_classify(inputs: &[PathBuf], config: &str, out: Option<&Path>, args: Vec<String>) -> Result<u8> {
    let config = parse_config(config)?;
    let mut manifest = ManifestBuilder::start("classify", args);
    manifest.inputs(inputs).config(config);
    let index = load_index(inputs)?;
    let model = classify_corpus(&index, &config);
    formats::write_output(out, |w| formats::write_model(w, &ModelFile::from_model(&model)))?;
    let count = |v| model.with_verdict(v).count();
    let (a, e, u) = (count(Verdict::Anomalous), count(Verdict::Expected), count(Verdict::Unclassified));
    eprintln!("classified {} pairs: {a} anomalous, {e} expected, {u} unclassified", index.len());
    manifest.note("pairs", index.len()).note("anomalous", a).note("expected", e).note("unclassified", u);
    save_manifest(out, manifest)?;
    Ok(EXIT_OK)
}

fn cmd_check(
    project: &Path,
    model: &Path,
    suppress: Option<&Path>,
    format: Format,
    out: Option<&Path>,
    ext: &str,
    args: Vec<String>,
) -> Result<u8> {
    let mut manifest = ManifestBuilder::start("check", args);
    manifest.inputs(&[project, model]);
    let model = formats::read_model(model)?;
    manifest.config(model.config()?);
    let suppressed = match suppress {
        Some(file) => formats::read_suppressions(file)?,
        None => Default::default(),
    };
    let mined = mine_all(&[project.to_path_buf()], ext)?;
    let findings = check::findings(&mined.occurrences, &model, &suppressed);
    match format {
        Format::Text => formats::write_output(None, |w| check::write_text(w, &findings))?,
        Format::Json => formats::write_output(None, |w| check::write_json(w, &findings))?,
    }
    if let Some(file) = out {
        formats::write_output(Some(file), |w| check::write_json(w, &findings))?;
    }
    if !mined.diagnostics.parse_failures.is_empty() {
        for p in &mined.diagnostics.parse_failures {
            eprintln!("warning: skipped {}: {}", p.file, p.message);
        }
    }
    manifest.note("diagnostics", &mined.diagnostics).note("findings", findings.len());
    save_manifest(out, manifest)?;
    Ok(if findings.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
}

struct EvalOptions<'a> {
    mode: Mode,
    config: &'a str,
    folds: usize,
    iterations: usize,
    percentages: &'a str,
}

fn parse_percentages(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|p| p.trim().parse::<f64>().with_context(|| format!("invalid percentage {p:?}"))).collect()
}

fn cmd_eval(
    corpus: &[PathBuf],
    labels: &Path,
    params: &ExperimentParams,
    opts: &EvalOptions,
    out: Option<&Path>,
    args: Vec<String>,
) -> Result<u8> {
    let mut manifest = ManifestBuilder::start("eval", args);
    let mut inputs = corpus.to_vec();
    inputs.push(labels.to_path_buf());
    manifest.inputs(&inputs).seed(params.seed).grid(&params.grid.rarity, &params.grid.confidence);
    let index = load_index(corpus)?;
    let labels = formats::read_labels(labels)?;
    let mut header = ReportHeader {
        mode: opts.mode.name(),
        seed: Some(params.seed),
        grid: Some(&params.grid),
        min_precision: Some(params.min_precision),
        extra: vec![("labels", labels.len().to_string()), ("occurrences", index.total().to_string())],
    };
    let text = match opts.mode {
        Mode::Score => {
            let config = parse_config(opts.config)?;
            manifest.config(config);
            header.extra.push(("config", config.to_string()));
            let model = classify_corpus(&index, &config);
            let result = ConfigResult { config, report: score(&model, &labels, &index)? };
            report::score_table(&header, &[result])
        }
        Mode::Sweep => report::score_table(&header, &sweep(&index, &labels, &params.grid)?),
        Mode::Pareto => {
            let results = sweep(&index, &labels, &params.grid)?;
            let optimal = select_optimal(&results, params.min_precision).ok();
            report::pareto_table(&header, &pareto_front(&results), optimal.as_ref())
        }
        Mode::Cv => {
            header.extra.push(("folds", opts.folds.to_string()));
            report::cv_table(&header, &cross_validate(&index, &labels, opts.folds, params)?)
        }
        Mode::Subset => {
            let percentages = parse_percentages(opts.percentages)?;
            header.extra.push(("iterations", opts.iterations.to_string()));
            header.extra.push(("percentages", opts.percentages.to_string()));
            report::subset_table(&header, &subset_experiment(&index, &labels, &percentages, opts.iterations, params)?)
        }
    };
    formats::write_output(out, |w| w.write_all(text.as_bytes()))?;
    manifest.note("mode", opts.mode.name()).note("labels", labels.len());
    save_manifest(out, manifest)?;
    Ok(EXIT_OK)
}
