//! Labeled datasets: delimited-text ingestion, a-priori attribute ranges and
//! a seeded synthetic generator with a planted conjunction.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fmt_real;
use crate::stumps::{DecisionStump, Direction, StumpConjunction};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("file has no header row")]
    MissingHeader,
    #[error("label column {0} not found in header")]
    MissingLabelColumn(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column} ({name}): cannot parse {value:?} as a number")]
    NonNumeric {
        line: u64,
        column: usize,
        name: String,
        value: String,
    },
    #[error("need at least 2 examples, found {0}")]
    TooFewExamples(usize),
    #[error("line {line}, column {column}: label {value:?} is a third label value (already seen {first:?} and {second:?})")]
    TooManyLabels {
        line: u64,
        column: usize,
        value: String,
        first: String,
        second: String,
    },
    #[error("line {line}, column {column}: label {value:?} is not one of the mapped labels {negative:?}/{positive:?}")]
    UnmappedLabel {
        line: u64,
        column: usize,
        value: String,
        negative: String,
        positive: String,
    },
    #[error("label column holds the single value {0:?}; an explicit label mapping is required")]
    SingleLabel(String),
    #[error("range file line {line}: {message}")]
    RangeFile { line: usize, message: String },
    #[error("attribute {attribute}: value {value} at example {example} lies outside its range [{lo}, {hi}]")]
    OutOfRange {
        attribute: usize,
        example: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("expected {expected} attributes, found {found}")]
    AttributeCount { expected: usize, found: usize },
    #[error("labels must be 0 or 1, found {0}")]
    InvalidLabel(u8),
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),
}

impl DataError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A-priori bounds `[lo, hi]` on the values of one attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttrRange {
    pub lo: f64,
    pub hi: f64,
}

impl AttrRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        AttrRange { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// A range with `lo == hi` cannot host a stump threshold interval.
    pub fn is_degenerate(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Where a dataset's ranges came from. Inferred ranges are recomputed when
/// the dataset is split; external ranges travel with every subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeSource {
    Inferred,
    External,
}

/// `m` labeled examples over `n` real attributes. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    labels: Vec<u8>,
    n: usize,
    ranges: Vec<AttrRange>,
    range_source: RangeSource,
    attribute_names: Option<Vec<String>>,
    label_names: Option<[String; 2]>,
}

impl Dataset {
    /// Builds a dataset from rows and 0/1 labels; ranges are inferred from
    /// the rows themselves.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self, DataError> {
        let n = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(DataError::AttributeCount {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, labels, n)
    }

    /// Builds a dataset from a row-major value matrix.
    pub fn from_flat(values: Vec<f64>, labels: Vec<u8>, n: usize) -> Result<Self, DataError> {
        if n == 0 && !values.is_empty() || n > 0 && values.len() != labels.len() * n {
            return Err(DataError::AttributeCount {
                expected: n,
                found: values.len() / labels.len().max(1),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(DataError::InvalidLabel(bad));
        }
        let mut ds = Dataset {
            values,
            labels,
            n,
            ranges: Vec::new(),
            range_source: RangeSource::Inferred,
            attribute_names: None,
            label_names: None,
        };
        ds.ranges = infer_ranges(&ds);
        Ok(ds)
    }

    pub fn with_attribute_names(mut self, names: Vec<String>) -> Result<Self, DataError> {
        if names.len() != self.n {
            return Err(DataError::AttributeCount {
                expected: self.n,
                found: names.len(),
            });
        }
        self.attribute_names = Some(names);
        Ok(self)
    }

    /// Records the original text of label 0 and label 1.
    pub fn with_label_names(mut self, negative: String, positive: String) -> Self {
        self.label_names = Some([negative, positive]);
        self
    }

    /// Replaces the inferred ranges with externally supplied ones. Every
    /// value must lie inside its attribute's range.
    pub fn with_external_ranges(mut self, ranges: Vec<AttrRange>) -> Result<Self, DataError> {
        if ranges.len() != self.n {
            return Err(DataError::AttributeCount {
                expected: self.n,
                found: ranges.len(),
            });
        }
        for i in 0..self.m() {
            for (k, r) in ranges.iter().enumerate() {
                let v = self.value(i, k);
                if !r.contains(v) {
                    return Err(DataError::OutOfRange {
                        attribute: k,
                        example: i,
                        value: v,
                        lo: r.lo,
                        hi: r.hi,
                    });
                }
            }
        }
        self.ranges = ranges;
        self.range_source = RangeSource::External;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.m()).map(move |i| self.row(i))
    }

    #[inline]
    pub fn value(&self, example: usize, attribute: usize) -> f64 {
        self.values[example * self.n + attribute]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn ranges(&self) -> &[AttrRange] {
        &self.ranges
    }

    pub fn range(&self, k: usize) -> AttrRange {
        self.ranges[k]
    }

    pub fn range_source(&self) -> RangeSource {
        self.range_source
    }

    pub fn attribute_names(&self) -> Option<&[String]> {
        self.attribute_names.as_deref()
    }

    pub fn attribute_name(&self, k: usize) -> String {
        match &self.attribute_names {
            Some(names) => names[k].clone(),
            None => format!("a{k}"),
        }
    }

    pub fn label_names(&self) -> Option<&[String; 2]> {
        self.label_names.as_ref()
    }

    pub fn count_positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn count_negatives(&self) -> usize {
        self.m() - self.count_positives()
    }

    /// Attributes whose range is degenerate (`A_i = B_i`).
    pub fn degenerate_attributes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&k| self.ranges[k].is_degenerate())
            .collect()
    }

    /// Attributes usable as stump candidates: nondegenerate range.
    pub fn usable_attributes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&k| !self.ranges[k].is_degenerate())
            .collect()
    }

    /// The examples at `indices`, in that order. Inferred ranges are
    /// recomputed from the subset alone; external ranges are kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.n);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let mut ds = Dataset {
            values,
            labels,
            n: self.n,
            ranges: Vec::new(),
            range_source: self.range_source,
            attribute_names: self.attribute_names.clone(),
            label_names: self.label_names.clone(),
        };
        ds.ranges = match self.range_source {
            RangeSource::Inferred => infer_ranges(&ds),
            RangeSource::External => self.ranges.clone(),
        };
        ds
    }

    /// The same examples with every label complemented.
    pub fn with_swapped_labels(&self) -> Dataset {
        let mut ds = self.clone();
        for y in &mut ds.labels {
            *y = 1 - *y;
        }
        if let Some([neg, pos]) = ds.label_names.take() {
            ds.label_names = Some([pos, neg]);
        }
        ds
    }

    /// Writes the dataset as delimited text: a header of attribute names
    /// followed by `label`, one example per row, values with 17 significant
    /// digits.
    pub fn write_delimited<W: Write>(&self, out: W, delimiter: u8) -> Result<(), DataError> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(out);
        let mut header: Vec<String> = (0..self.n).map(|k| self.attribute_name(k)).collect();
        header.push("label".to_string());
        w.write_record(&header)?;
        for i in 0..self.m() {
            let mut rec: Vec<String> = self.row(i).iter().map(|&v| fmt_real(v)).collect();
            rec.push(match &self.label_names {
                Some(names) => names[self.labels[i] as usize].clone(),
                None => self.labels[i].to_string(),
            });
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| DataError::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_delimited(&self, path: &Path, delimiter: u8) -> Result<(), DataError> {
        let file = File::create(path).map_err(|e| DataError::io(path, e))?;
        self.write_delimited(io::BufWriter::new(file), delimiter)
    }
}

/// Per-attribute `(min, max)` over every example handed in.
pub fn infer_ranges(ds: &Dataset) -> Vec<AttrRange> {
    let mut ranges = vec![AttrRange::new(f64::INFINITY, f64::NEG_INFINITY); ds.n()];
    for row in ds.rows() {
        for (r, &v) in ranges.iter_mut().zip(row) {
            r.lo = r.lo.min(v);
            r.hi = r.hi.max(v);
        }
    }
    if ds.m() == 0 {
        ranges
            .iter_mut()
            .for_each(|r| *r = AttrRange::new(0.0, 0.0));
    }
    ranges
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => write!(f, "{n:?}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// A bare integer is a zero-based column index; anything else a name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Options for [`load_delimited`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: LabelColumn,
    pub delimiter: u8,
    /// Explicit `(negative, positive)` label texts; otherwise the two values
    /// are ordered lexicographically.
    pub label_map: Option<(String, String)>,
    /// Range sidecar file (`name lo hi` per line).
    pub ranges_path: Option<PathBuf>,
    /// Replacement for missing cells (empty, `NA`, `NaN`, `?`).
    pub fill_value: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            label_column: LabelColumn::Name("label".to_string()),
            delimiter: b',',
            label_map: None,
            ranges_path: None,
            fill_value: 0.0,
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty()
        || ["na", "n/a", "nan", "?"]
            .iter()
            .any(|m| cell.eq_ignore_ascii_case(m))
}

/// Loads a labeled dataset from delimited text with one header row.
pub fn load_delimited(path: &Path, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut ds = read_delimited(BufReader::new(file), opts)?;
    if let Some(rp) = &opts.ranges_path {
        let names: Vec<String> = (0..ds.n()).map(|k| ds.attribute_name(k)).collect();
        let ranges = load_range_file(rp, &names)?;
        ds = ds.with_external_ranges(ranges)?;
    }
    Ok(ds)
}

/// Parses delimited text from any reader. Range sidecars are not applied.
pub fn read_delimited<R: io::Read>(input: R, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(DataError::MissingHeader),
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    let label_idx = match &opts.label_column {
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingLabelColumn(opts.label_column.to_string()))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(_) => {
            return Err(DataError::MissingLabelColumn(opts.label_column.to_string()))
        }
    };
    let width = header.len();
    let n = width - 1;

    let mut values = Vec::new();
    let mut raw_labels: Vec<(String, u64)> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(DataError::FieldCount {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        for (col, cell) in rec.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            if is_missing(cell) {
                values.push(opts.fill_value);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(DataError::NonNumeric {
                        line,
                        column: col + 1,
                        name: header[col].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        let label = rec[label_idx].to_string();
        if opts.label_map.is_none() && !seen.contains(&label) {
            if seen.len() == 2 {
                return Err(DataError::TooManyLabels {
                    line,
                    column: label_idx + 1,
                    value: label,
                    first: seen[0].clone(),
                    second: seen[1].clone(),
                });
            }
            seen.push(label.clone());
        }
        raw_labels.push((label, line));
    }
    if raw_labels.len() < 2 {
        return Err(DataError::TooFewExamples(raw_labels.len()));
    }

    let (negative, positive) = match &opts.label_map {
        Some(map) => map.clone(),
        None => {
            if seen.len() < 2 {
                return Err(DataError::SingleLabel(seen[0].clone()));
            }
            seen.sort();
            (seen[0].clone(), seen[1].clone())
        }
    };
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (text, line) in raw_labels {
        labels.push(if text == negative {
            0
        } else if text == positive {
            1
        } else {
            return Err(DataError::UnmappedLabel {
                line,
                column: label_idx + 1,
                value: text,
                negative,
                positive,
            });
        });
    }
    let names: Vec<String> = header
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h)
        .collect();
    Ok(Dataset::from_flat(values, labels, n)?
        .with_attribute_names(names)?
        .with_label_names(negative, positive))
}

/// Reads feature rows from delimited text with a header and no label
/// column. Missing cells become `fill_value`.
pub fn read_unlabeled<R: io::Read>(
    input: R,
    delimiter: u8,
    fill_value: f64,
) -> Result<Vec<Vec<f64>>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(DataError::MissingHeader),
    };
    let width = header.len();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(DataError::FieldCount {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (col, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                row.push(fill_value);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(DataError::NonNumeric {
                        line,
                        column: col + 1,
                        name: header[col].to_string(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Header cells of a delimited file.
pub fn read_header(path: &Path, delimiter: u8) -> Result<Vec<String>, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    match reader.records().next() {
        Some(rec) => Ok(rec?.iter().map(str::to_string).collect()),
        None => Err(DataError::MissingHeader),
    }
}

/// Reads a range sidecar: one `name lo hi` line per attribute. Blank lines
/// and `#` comments are ignored. Every attribute in `names` must appear.
pub fn load_range_file(path: &Path, names: &[String]) -> Result<Vec<AttrRange>, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    parse_ranges(BufReader::new(file), names)
}

pub fn parse_ranges<R: BufRead>(input: R, names: &[String]) -> Result<Vec<AttrRange>, DataError> {
    let mut ranges: Vec<Option<AttrRange>> = vec![None; names.len()];
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| DataError::RangeFile {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DataError::RangeFile {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!(
                "expected `name lo hi`, found {} fields",
                fields.len()
            )));
        }
        let k = names
            .iter()
            .position(|n| n == fields[0])
            .ok_or_else(|| err(format!("unknown attribute {:?}", fields[0])))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("cannot parse {s:?} as a number")))
        };
        let (lo, hi) = (parse(fields[1])?, parse(fields[2])?);
        if lo > hi {
            return Err(err(format!("lower bound {lo} exceeds upper bound {hi}")));
        }
        ranges[k] = Some(AttrRange::new(lo, hi));
    }
    ranges
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            r.ok_or_else(|| DataError::RangeFile {
                line: 0,
                message: format!("no range given for attribute {:?}", names[k]),
            })
        })
        .collect()
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub m: usize,
    /// Number of informative attributes in the planted conjunction.
    pub r: usize,
    /// Label-flip probability, in `[0, 0.5)`.
    pub noise: f64,
    pub seed: u64,
}

/// A synthetic dataset together with the conjunction that labels it.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub spec: SynthSpec,
    pub dataset: Dataset,
    pub planted: StumpConjunction,
    /// Rejected draws before the class balance landed in `[0.3, 0.7]`.
    pub resamples: usize,
}

const SYNTH_MAX_ATTEMPTS: usize = 1000;

/// Draws `m` examples with attributes uniform on `[0, 1)`. The `r` planted
/// stumps each pass with probability `0.5^(1/r)`, so about half the
/// examples are positive before label noise.
pub fn synth_generate(spec: &SynthSpec) -> Result<SynthData, DataError> {
    if spec.m < 4 {
        return Err(DataError::InvalidSynthSpec(format!(
            "m = {} but m >= 4 is required so both classes are nonempty",
            spec.m
        )));
    }
    if spec.r == 0 || spec.r > spec.n {
        return Err(DataError::InvalidSynthSpec(format!(
            "need 1 <= r <= n, got r = {} with n = {}",
            spec.r, spec.n
        )));
    }
    if !(0.0..0.5).contains(&spec.noise) {
        return Err(DataError::InvalidSynthSpec(format!(
            "noise {} outside [0, 0.5)",
            spec.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut attrs = sample(&mut rng, spec.n, spec.r).into_vec();
    attrs.sort_unstable();
    let pass = 0.5f64.powf(1.0 / spec.r as f64);
    let stumps: Vec<DecisionStump> = attrs
        .iter()
        .map(|&k| {
            if rng.random_bool(0.5) {
                DecisionStump::new(k, 1.0 - pass, Direction::Positive)
            } else {
                DecisionStump::new(k, pass, Direction::Negative)
            }
        })
        .collect();
    let planted = StumpConjunction::new(stumps).expect("sampled attributes are distinct");

    for attempt in 0..SYNTH_MAX_ATTEMPTS {
        let values: Vec<f64> = (0..spec.m * spec.n).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = values
            .chunks(spec.n)
            .map(|x| {
                let y = planted.predict(x);
                if spec.noise > 0.0 && rng.random_bool(spec.noise) {
                    1 - y
                } else {
                    y
                }
            })
            .collect();
        let pos = labels.iter().filter(|&&y| y == 1).count() as f64 / spec.m as f64;
        if !(0.3..=0.7).contains(&pos) {
            continue;
        }
        let names = (0..spec.n).map(|k| format!("g{k}")).collect();
        let dataset = Dataset::from_flat(values, labels, spec.n)?.with_attribute_names(names)?;
        return Ok(SynthData {
            spec: spec.clone(),
            dataset,
            planted,
            resamples: attempt,
        });
    }
    Err(DataError::InvalidSynthSpec(format!(
        "no draw with class balance in [0.3, 0.7] after {SYNTH_MAX_ATTEMPTS} attempts"
    )))
}

impl SynthData {
    /// Plain-text manifest: `key=value` lines, then the planted conjunction
    /// in the model stump format.
    pub fn manifest(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        out.push_str(&format!(
            "seed={}\nn={}\nm={}\nr={}\nnoise={}\nresamples={}\npositives={}\n",
            s.seed,
            s.n,
            s.m,
            s.r,
            s.noise,
            self.resamples,
            self.dataset.count_positives()
        ));
        out.push_str(&self.planted.to_text());
        out
    }
}

/// Reads the planted conjunction back out of a manifest.
pub fn parse_manifest(text: &str) -> Option<StumpConjunction> {
    let start = text.find(crate::stumps::DETERMINISTIC_TAG)?;
    StumpConjunction::from_text(&text[start..]).ok()
}

/// Distinct attribute values in ascending order.
pub fn distinct_sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let set: BTreeSet<u64> = values.into_iter().map(ordered_bits).collect();
    set.into_iter().map(from_ordered_bits).collect()
}

// Maps f64 to u64 preserving order, for finite values.
fn ordered_bits(v: f64) -> u64 {
    let v = if v == 0.0 { 0.0 } else { v };
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_ordered_bits(b: u64) -> f64 {
    if b >> 63 == 1 {
        f64::from_bits(b & !(1 << 63))
    } else {
        f64::from_bits(!b)
    }
}
