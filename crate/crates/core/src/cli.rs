//! Command-line front end: `synth`, `train`, `predict`, `cv` and `bound`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bounds::{self, BoundError, BoundReport, Regime, SizePrior, DEFAULT_DELTA};
use crate::data::{
    load_delimited, read_header, read_unlabeled, synth_generate, DataError, Dataset, LabelColumn,
    LoadOptions, SynthSpec,
};
use crate::fmt_real;
use crate::learners::{
    self, LearnError, LearnerKind, LearnerParams, ModelBody, Target, TrainedModel,
};
use crate::model_io::{load_model, save_model, ModelIoError};
use crate::modelsel::{self, default_grid, CvPlan, CvResult, Penalty, SelectError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Model(#[from] ModelIoError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("output error: {0}")]
    Output(#[from] io::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "stumpsel",
    version,
    about = "Sparse conjunctions of decision stumps with risk bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset labeled by a planted conjunction.
    Synth(SynthArgs),
    /// Train a model and report its training error and risk bound.
    Train(TrainArgs),
    /// Label a dataset with a saved model.
    Predict(PredictArgs),
    /// Nested cross-validation over a parameter grid.
    Cv(CvArgs),
    /// Evaluate a risk bound from explicit counts.
    Bound(BoundArgs),
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!(
            "delimiter must be one ASCII character or `tab`, got `{s}`"
        )),
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited dataset with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column, by header name or 0-based index.
    #[arg(long, default_value = "label")]
    pub label_column: LabelColumn,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// Range sidecar with `name lo hi` lines.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    /// Label texts as `negative,positive`.
    #[arg(long)]
    pub label_map: Option<String>,
    /// Value substituted for missing cells.
    #[arg(long, default_value_t = 0.0)]
    pub fill: f64,
}

impl DataArgs {
    fn options(&self) -> Result<LoadOptions, CliError> {
        let label_map = match &self.label_map {
            Some(s) => {
                let (neg, pos) = s.split_once(',').ok_or_else(|| {
                    usage(format!("--label-map wants `negative,positive`, got `{s}`"))
                })?;
                Some((neg.trim().to_string(), pos.trim().to_string()))
            }
            None => None,
        };
        Ok(LoadOptions {
            label_column: self.label_column.clone(),
            delimiter: self.delimiter,
            label_map,
            ranges_path: self.ranges.clone(),
            fill_value: self.fill,
        })
    }

    fn load(&self) -> Result<Dataset, CliError> {
        Ok(load_delimited(&self.data, &self.options()?)?)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of attributes.
    #[arg(long)]
    pub n: usize,
    /// Number of examples.
    #[arg(long)]
    pub m: usize,
    /// Number of planted stumps.
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path; defaults to the dataset path with a `.manifest`
    /// extension.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    #[arg(long)]
    pub learner: LearnerKind,
    #[arg(long, default_value = "conjunction")]
    pub target: Target,
    #[arg(long, default_value = "quadratic")]
    pub size_prior: SizePrior,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    /// Penalty per erred positive; `m` means the training-set size.
    #[arg(long, default_value = "1")]
    pub p: Penalty,
    /// Bit cost (occam) or margin cost (pacbayes, pacbayes-fixed).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub v_max: usize,
    /// Interval half-width for pacbayes-fixed, in attribute units.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Where to save the model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset; labels are used for an error count when the label column
    /// is present.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_column: LabelColumn,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    #[arg(long, default_value_t = 0.0)]
    pub fill: f64,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[arg(long, default_value_t = 5)]
    pub outer_folds: usize,
    #[arg(long, default_value_t = 5)]
    pub inner_folds: usize,
    #[arg(long, default_value_t = 20)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Penalty values (comma separated; `m` allowed).
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<Penalty>>,
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// Stump caps.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<usize>>,
    /// Half-widths as fractions of the median attribute range width.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    /// Dataset name for the table; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// occam, sc or pacbayes.
    pub regime: Regime,
    /// `key=value` inputs; one `key-sweep=lo:hi:step` or
    /// `key-sweep=v1,v2,...` varies a key.
    pub params: Vec<String>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Cv(a) => cmd_cv(&a, out),
        Command::Bound(a) => cmd_bound(&a, out),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let synth = synth_generate(&SynthSpec {
        n: a.n,
        m: a.m,
        r: a.r,
        noise: a.noise,
        seed: a.seed,
    })?;
    let mut buf = Vec::new();
    synth.dataset.write_delimited(&mut buf, b',')?;
    write_file(&a.out, &buf)?;
    let manifest = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.out.with_extension("manifest"));
    write_file(&manifest, synth.manifest().as_bytes())?;
    writeln!(out, "dataset={}", a.out.display())?;
    writeln!(out, "manifest={}", manifest.display())?;
    writeln!(out, "positives={}", synth.dataset.count_positives())?;
    writeln!(out, "negatives={}", synth.dataset.count_negatives())?;
    Ok(())
}

/// Rejects parameters the learner does not take.
fn check_applicable(kind: LearnerKind, has_eta: bool, has_gamma: bool) -> Result<(), CliError> {
    if has_eta && !kind.uses_eta() {
        return Err(usage(format!("--eta does not apply to the {kind} learner")));
    }
    if has_gamma && !kind.uses_gamma() {
        return Err(usage(format!(
            "--gamma applies only to pacbayes-fixed, not {kind}"
        )));
    }
    if !has_gamma && kind.uses_gamma() {
        return Err(usage("pacbayes-fixed needs --gamma"));
    }
    Ok(())
}

fn stump_lines(model: &TrainedModel, ds: &Dataset) -> Vec<String> {
    let name = |k: usize| ds.attribute_name(k);
    match &model.body {
        ModelBody::Compression(c) => c
            .conjunction()
            .stumps()
            .iter()
            .zip(c.anchors_by_attribute())
            .map(|(s, anchor)| {
                format!(
                    "{} {} {} anchor={anchor}",
                    name(s.attr),
                    s.dir,
                    fmt_real(s.threshold)
                )
            })
            .collect(),
        ModelBody::Occam(o) => o
            .steps_by_attribute()
            .iter()
            .map(|s| {
                format!(
                    "{} {} {} bits={} code_index={} interval={}:{}",
                    name(s.stump.attr),
                    s.stump.dir,
                    fmt_real(s.stump.threshold),
                    s.bits,
                    s.code_index,
                    fmt_real(s.interval.0),
                    fmt_real(s.interval.1)
                )
            })
            .collect(),
        ModelBody::Gibbs(g) => g
            .steps_by_attribute()
            .iter()
            .map(|s| {
                format!(
                    "{} {} {} {} ratio={}",
                    name(s.stump.attr),
                    s.stump.dir,
                    fmt_real(s.stump.a),
                    fmt_real(s.stump.b),
                    fmt_real(s.ratio())
                )
            })
            .collect(),
    }
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = a.learner.learner;
    check_applicable(kind, a.eta.is_some(), a.gamma.is_some())?;
    let ds = a.data.load()?;
    let params = LearnerParams {
        p: a.p.resolve(ds.m()),
        eta: a.eta.unwrap_or(0.0),
        v_max: a.v_max,
        gamma: a.gamma,
        size_prior: a.learner.size_prior,
    };
    let model = learners::train(&ds, kind, a.learner.target, &params)?;
    let report = model.training_bound(&ds, a.learner.delta)?;
    if let Some(path) = &a.model_out {
        save_model(path, &model)?;
    }
    let errors = model.count_errors(&ds);
    writeln!(out, "learner={kind}")?;
    writeln!(out, "target={}", a.learner.target)?;
    writeln!(out, "examples={}", ds.m())?;
    writeln!(out, "attributes={}", ds.n())?;
    writeln!(out, "train_errors={errors}")?;
    writeln!(out, "train_error_rate={}", errors as f64 / ds.m() as f64)?;
    writeln!(out, "model_size={}", model.size())?;
    for (i, line) in stump_lines(&model, &ds).iter().enumerate() {
        writeln!(out, "stump_{i}={line}")?;
    }
    if let Some(g) = model.gibbs_errors(&ds) {
        writeln!(out, "gibbs_train_risk={}", g / ds.m() as f64)?;
        writeln!(
            out,
            "bayes_train_errors={}",
            model.bayes_errors(&ds).unwrap_or(0)
        )?;
    }
    if let Some(path) = &a.model_out {
        writeln!(out, "model={}", path.display())?;
    }
    writeln!(out)?;
    write!(out, "{}", report.to_key_values())?;
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let header = read_header(&a.data, a.delimiter)?;
    let labeled = match &a.label_column {
        LabelColumn::Name(name) => header.iter().any(|h| h == name),
        LabelColumn::Index(i) => *i < header.len() && header.len() == model.n_attributes + 1,
    };
    let expect = model.n_attributes;
    let mismatch = |found: usize| {
        usage(format!(
            "model expects n = {expect} attributes but {} has {found}",
            a.data.display()
        ))
    };
    let label_text = |y: u8| match &model.label_names {
        Some(names) => names[y as usize].clone(),
        None => y.to_string(),
    };
    if labeled {
        let width = header.len() - 1;
        if width != expect {
            return Err(mismatch(width));
        }
        let opts = LoadOptions {
            label_column: a.label_column.clone(),
            delimiter: a.delimiter,
            label_map: model.label_names.clone().map(|[n, p]| (n, p)),
            ranges_path: None,
            fill_value: a.fill,
        };
        let ds = load_delimited(&a.data, &opts)?;
        let mut errors = 0;
        for i in 0..ds.m() {
            let y = model.predict(ds.row(i));
            errors += (y != ds.label(i)) as usize;
            writeln!(out, "{}", label_text(y))?;
        }
        writeln!(out, "errors={errors}")?;
        writeln!(out, "error_rate={}", errors as f64 / ds.m() as f64)?;
    } else {
        if header.len() != expect {
            return Err(mismatch(header.len()));
        }
        let file = fs::File::open(&a.data).map_err(|e| DataError::io(&a.data, e))?;
        let rows = read_unlabeled(io::BufReader::new(file), a.delimiter, a.fill)?;
        for row in rows {
            writeln!(out, "{}", label_text(model.predict(&row)))?;
        }
    }
    Ok(())
}

pub fn cmd_cv(a: &CvArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = a.learner.learner;
    let has_eta = a.eta.as_ref().is_some_and(|e| e.iter().any(|&x| x != 0.0));
    if has_eta && !kind.uses_eta() {
        return Err(usage(format!("--eta does not apply to the {kind} learner")));
    }
    if a.gamma.is_some() && !kind.uses_gamma() {
        return Err(usage(format!(
            "--gamma applies only to pacbayes-fixed, not {kind}"
        )));
    }
    let ds = a.data.load()?;
    let mut grid = default_grid(kind);
    if let Some(p) = &a.p {
        grid.p = p.clone();
    }
    if let Some(eta) = &a.eta {
        grid.eta = eta.clone();
    }
    if let Some(v) = &a.v {
        grid.v = v.clone();
    }
    if let Some(g) = &a.gamma {
        grid.gamma = g.clone();
    }
    grid.size_prior = a.learner.size_prior;
    let plan = CvPlan {
        outer_folds: a.outer_folds,
        inner_folds: a.inner_folds,
        permutations: a.permutations,
        seed: a.seed,
        grid,
        target: a.learner.target,
        delta: a.learner.delta,
    };
    let result = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| usage(format!("cannot start {t} threads: {e}")))?
            .install(|| modelsel::nested_cv(&ds, kind, &plan))?,
        None => modelsel::nested_cv(&ds, kind, &plan)?,
    };
    let name = a.name.clone().unwrap_or_else(|| {
        a.data
            .data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into())
    });
    write!(out, "{}", cv_report(&name, &result, &ds))?;
    Ok(())
}

/// Column headers of the cross-validation table.
pub fn cv_header(kind: LearnerKind) -> Vec<&'static str> {
    let mut cols = vec!["Name", "ex", "Genes", "Errs", "S"];
    if kind.is_soft() {
        cols.extend(["G-errs", "B-errs", "Bound"]);
    }
    cols
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))
}

/// Tab-separated table, then one `key=value` block per fold and a summary
/// block.
pub fn cv_report(name: &str, r: &CvResult, ds: &Dataset) -> String {
    let mut s = String::new();
    s.push_str(&cv_header(r.kind).join("\t"));
    s.push('\n');
    let mut row = vec![
        name.to_string(),
        r.m.to_string(),
        r.n.to_string(),
        format!("{:.2} ± {:.2}", r.mean_errors, r.std_errors),
        format!("{:.2} ± {:.2}", r.mean_model_size, r.std_model_size),
    ];
    if r.kind.is_soft() {
        row.push(opt(r.mean_gibbs_errors));
        row.push(opt(r.mean_bayes_errors));
        row.push(opt(r.mean_bound));
    }
    s.push_str(&row.join("\t"));
    s.push('\n');
    for rec in &r.records {
        s.push('\n');
        let mut kv: Vec<(String, String)> = vec![
            ("permutation".into(), rec.permutation.to_string()),
            ("fold".into(), rec.fold.to_string()),
            ("train_size".into(), rec.train_size.to_string()),
            ("test_size".into(), rec.test_size.to_string()),
        ];
        match &rec.outcome {
            Ok(o) => {
                kv.push(("p".into(), o.chosen.p.to_string()));
                kv.push(("eta".into(), o.chosen.eta.to_string()));
                kv.push(("v".into(), o.chosen.v.to_string()));
                if let Some(g) = o.chosen.gamma {
                    kv.push(("gamma_fraction".into(), g.to_string()));
                    kv.push(("gamma".into(), o.params.gamma.unwrap_or(0.0).to_string()));
                }
                kv.push(("train_errors".into(), o.train_errors.to_string()));
                kv.push(("test_errors".into(), o.test_errors.to_string()));
                kv.push(("model_size".into(), o.model_size.to_string()));
                if let Some(g) = o.gibbs_errors {
                    kv.push(("gibbs_errors".into(), g.to_string()));
                }
                if let Some(b) = o.bayes_errors {
                    kv.push(("bayes_errors".into(), b.to_string()));
                }
                if let Some(b) = o.bound {
                    kv.push(("bound".into(), b.to_string()));
                }
                let names: Vec<String> =
                    o.attributes.iter().map(|&k| ds.attribute_name(k)).collect();
                kv.push(("attributes".into(), names.join(",")));
            }
            Err(e) => kv.push(("error".into(), e.clone())),
        }
        for (k, v) in kv {
            s.push_str(&format!("{k}={v}\n"));
        }
    }
    s.push('\n');
    let mut summary: Vec<(&str, String)> = vec![
        ("mean_errors", r.mean_errors.to_string()),
        ("std_errors", r.std_errors.to_string()),
        ("mean_model_size", r.mean_model_size.to_string()),
        ("std_model_size", r.std_model_size.to_string()),
    ];
    if let Some(g) = r.mean_gibbs_errors {
        summary.push(("mean_gibbs_errors", g.to_string()));
    }
    if let Some(b) = r.mean_bayes_errors {
        summary.push(("mean_bayes_errors", b.to_string()));
    }
    if let Some(b) = r.mean_bound {
        summary.push(("mean_bound_times_m", b.to_string()));
    }
    let modal: Vec<String> = r
        .modal_attributes
        .iter()
        .map(|&k| ds.attribute_name(k))
        .collect();
    summary.push(("modal_attributes", modal.join(",")));
    summary.push(("failed_folds", r.failed_folds.to_string()));
    for (k, v) in summary {
        s.push_str(&format!("{k}={v}\n"));
    }
    s
}

/// Expands `lo:hi:step` or a comma list.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("bad number `{s}` in sweep `{spec}`")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || hi < lo {
            return Err(usage(format!("sweep `{spec}` needs lo <= hi and step > 0")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| lo + i as f64 * step).collect());
    }
    if parts.len() != 1 {
        return Err(usage(format!(
            "sweep `{spec}` must be lo:hi:step or a comma list"
        )));
    }
    spec.split(',').map(num).collect()
}

struct BoundInputs<'a> {
    regime: Regime,
    values: &'a BTreeMap<String, String>,
}

impl BoundInputs<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        let v = self
            .raw(key)
            .ok_or_else(|| usage(format!("{} bound needs {key}=", self.regime.name())))?;
        v.parse()
            .map_err(|_| usage(format!("{key}={v} is not a number")))
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        let x = self.real(key)?;
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(usage(format!(
                "{key} must be a nonnegative integer, got {x}"
            )));
        }
        Ok(x as usize)
    }

    fn delta(&self) -> Result<f64, CliError> {
        match self.raw("delta") {
            Some(_) => self.real("delta"),
            None => Ok(DEFAULT_DELTA),
        }
    }

    fn prior(&self) -> Result<SizePrior, CliError> {
        match self.raw("prior") {
            Some(p) => p.parse().map_err(usage),
            None => Ok(SizePrior::default()),
        }
    }

    /// Comma list for `key`; a single value is repeated `k` times when
    /// `k=` is given.
    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| usage(format!("{} bound needs {key}=", self.regime.name())))?;
        let items: Vec<f64> = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| usage(format!("bad value `{s}` in {key}=")))
            })
            .collect::<Result<_, _>>()?;
        match self.raw("k") {
            Some(_) => {
                let k = self.count("k")?;
                if items.len() == 1 {
                    Ok(vec![items[0]; k])
                } else if items.len() == k {
                    Ok(items)
                } else {
                    Err(usage(format!(
                        "k={k} but {key}= lists {} values",
                        items.len()
                    )))
                }
            }
            None => Ok(items),
        }
    }

    fn allowed(&self) -> &'static [&'static str] {
        match self.regime {
            Regime::Occam => &["m", "errors", "n", "k", "bits", "delta", "prior"],
            Regime::SampleCompression => &["m", "i", "j", "n", "delta"],
            Regime::PacBayes => &["m", "n", "k", "ratio", "gibbs-risk", "delta", "prior"],
        }
    }

    fn compute(&self) -> Result<BoundReport, CliError> {
        Ok(match self.regime {
            Regime::Occam => {
                let bits: Vec<u32> = self
                    .list("bits")?
                    .into_iter()
                    .map(|b| {
                        if b >= 0.0 && b.fract() == 0.0 && b < 64.0 {
                            Ok(b as u32)
                        } else {
                            Err(usage(format!(
                                "bits must be small nonnegative integers, got {b}"
                            )))
                        }
                    })
                    .collect::<Result<_, _>>()?;
                bounds::occam_bound(
                    self.count("m")?,
                    self.count("errors")?,
                    self.count("n")?,
                    &bits,
                    self.delta()?,
                    self.prior()?,
                )?
            }
            Regime::SampleCompression => bounds::sc_bound(
                self.count("m")?,
                self.count("i")?,
                self.count("j")?,
                self.count("n")?,
                self.delta()?,
            )?,
            Regime::PacBayes => bounds::pacbayes_bound_full(
                self.count("m")?,
                self.count("n")?,
                &self.list("ratio")?,
                self.real("gibbs-risk")?,
                self.delta()?,
                self.prior()?,
            )?,
        })
    }
}

pub fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut values = BTreeMap::new();
    let mut sweep: Option<(String, Vec<f64>)> = None;
    for p in &a.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got `{p}`")))?;
        if let Some(base) = k.strip_suffix("-sweep") {
            if sweep.is_some() {
                return Err(usage("only one sweep at a time"));
            }
            sweep = Some((base.to_string(), parse_sweep(v)?));
        } else {
            values.insert(k.to_string(), v.to_string());
        }
    }
    let inputs = BoundInputs {
        regime: a.regime,
        values: &values,
    };
    let allowed = inputs.allowed();
    let keys = values
        .keys()
        .map(String::as_str)
        .chain(sweep.iter().map(|(k, _)| k.as_str()));
    for k in keys {
        if !allowed.contains(&k) {
            return Err(usage(format!(
                "`{k}` is not an input of the {} bound (expected {})",
                a.regime.name(),
                allowed.join(", ")
            )));
        }
    }
    let Some((key, points)) = sweep else {
        write!(out, "{}", inputs.compute()?.to_key_values())?;
        return Ok(());
    };
    let mut cols = vec![
        key.clone(),
        "bound".to_string(),
        "bound_times_m".to_string(),
    ];
    if a.regime == Regime::PacBayes {
        cols.extend(["psi".to_string(), "bayes_bound".to_string()]);
    }
    writeln!(out, "{}", cols.join("\t"))?;
    for x in points {
        let mut vals = values.clone();
        vals.insert(key.clone(), x.to_string());
        let report = BoundInputs {
            regime: a.regime,
            values: &vals,
        }
        .compute()?;
        let m = report.component("m")?;
        let mut row = vec![
            x.to_string(),
            format!("{:.6}", report.bound),
            format!("{:.4}", report.bound * m),
        ];
        if a.regime == Regime::PacBayes {
            row.push(format!("{:.6}", report.component("psi")?));
            row.push(format!("{:.6}", report.component("bayes_bound")?));
        }
        writeln!(out, "{}", row.join("\t"))?;
    }
    Ok(())
}
