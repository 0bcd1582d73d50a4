//! Python bindings: datasets, the four learners, saved models, the bound
//! calculators and nested cross-validation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use stumpsel::bounds::{self, BoundReport, SizePrior};
use stumpsel::data::{self, Dataset, LabelColumn, LoadOptions, SynthSpec};
use stumpsel::learners::{self, LearnerKind, LearnerParams, Target, TrainedModel};
use stumpsel::model_io;
use stumpsel::modelsel::{self, CvPlan};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(value_err)
}

fn report_dict(r: &BoundReport) -> BTreeMap<String, f64> {
    let mut d = r.components.clone();
    d.insert("bound".into(), r.bound);
    d.insert("delta".into(), r.delta);
    d
}

/// A labeled dataset (labels 0/1).
#[pyclass(name = "Dataset", module = "stumpsel_py", frozen)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> PyResult<Self> {
        Ok(PyDataset {
            inner: Dataset::new(rows, labels).map_err(value_err)?,
        })
    }

    /// Loads delimited text with a header row.
    #[staticmethod]
    #[pyo3(signature = (path, label_column = "label", delimiter = ","))]
    fn load(path: PathBuf, label_column: &str, delimiter: &str) -> PyResult<Self> {
        let delimiter = match delimiter.as_bytes() {
            [b] => *b,
            _ => return Err(PyValueError::new_err("delimiter must be one byte")),
        };
        let opts = LoadOptions {
            label_column: parse::<LabelColumn>(label_column)?,
            delimiter,
            ..LoadOptions::default()
        };
        let inner = data::load_delimited(&path, &opts).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(PyDataset { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.m() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn __len__(&self) -> usize {
        self.inner.m()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(m={}, n={})", self.inner.m(), self.inner.n())
    }
}

/// A trained conjunction or disjunction of stumps.
#[pyclass(name = "Model", module = "stumpsel_py", frozen)]
struct PyModel {
    inner: TrainedModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = model_io::load_model(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: model_io::model_from_text(text).map_err(value_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        model_io::save_model(&path, &self.inner).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn to_text(&self) -> String {
        model_io::model_to_text(&self.inner)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn target(&self) -> &'static str {
        self.inner.target.name()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn attributes(&self) -> Vec<usize> {
        self.inner.attributes()
    }

    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<u8>> {
        rows.iter()
            .map(|x| {
                if x.len() != self.inner.n_attributes {
                    Err(PyValueError::new_err(format!(
                        "model expects {} attributes, got {}",
                        self.inner.n_attributes,
                        x.len()
                    )))
                } else {
                    Ok(self.inner.predict(x))
                }
            })
            .collect()
    }

    fn count_errors(&self, ds: &PyDataset) -> usize {
        self.inner.count_errors(&ds.inner)
    }

    /// The learner's risk bound on its training set, as a dict of the bound
    /// and its components.
    #[pyo3(signature = (ds, delta = bounds::DEFAULT_DELTA))]
    fn training_bound(&self, ds: &PyDataset, delta: f64) -> PyResult<BTreeMap<String, f64>> {
        let r = self.inner.training_bound(&ds.inner, delta).map_err(value_err)?;
        Ok(report_dict(&r))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(kind={}, target={}, size={})",
            self.inner.kind,
            self.inner.target,
            self.inner.size()
        )
    }
}

/// Trains `learner` (sc, occam, pacbayes, pacbayes-fixed).
#[pyfunction]
#[pyo3(signature = (ds, learner, target = "conjunction", p = 1.0, eta = 0.0, v_max = 10, gamma = None, size_prior = "quadratic"))]
#[allow(clippy::too_many_arguments)]
fn train(
    ds: &PyDataset,
    learner: &str,
    target: &str,
    p: f64,
    eta: f64,
    v_max: usize,
    gamma: Option<f64>,
    size_prior: &str,
) -> PyResult<PyModel> {
    let params = LearnerParams {
        p,
        eta,
        v_max,
        gamma,
        size_prior: parse::<SizePrior>(size_prior)?,
    };
    let inner = learners::train(
        &ds.inner,
        parse::<LearnerKind>(learner)?,
        parse::<Target>(target)?,
        &params,
    )
    .map_err(value_err)?;
    Ok(PyModel { inner })
}

/// Planted-conjunction data: returns the dataset and the planted model text.
#[pyfunction]
#[pyo3(signature = (n, m, r, noise = 0.0, seed = 0))]
fn synth(n: usize, m: usize, r: usize, noise: f64, seed: u64) -> PyResult<(PyDataset, String)> {
    let s = data::synth_generate(&SynthSpec { n, m, r, noise, seed }).map_err(value_err)?;
    Ok((PyDataset { inner: s.dataset }, s.planted.to_text()))
}

#[pyfunction]
fn binomial_tail(kappa: u64, m: u64, r: f64) -> PyResult<f64> {
    bounds::binomial_tail(kappa, m, r).map_err(value_err)
}

#[pyfunction]
fn binomial_tail_inversion(kappa: u64, m: u64, delta: f64) -> PyResult<f64> {
    bounds::binomial_tail_inversion(kappa, m, delta).map_err(value_err)
}

#[pyfunction]
fn kl_bernoulli(q: f64, p: f64) -> PyResult<f64> {
    bounds::kl_bernoulli(q, p).map_err(value_err)
}

#[pyfunction]
fn kl_sup_inversion(q: f64, psi: f64) -> PyResult<f64> {
    bounds::kl_sup_inversion(q, psi).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (m, errors, n, bits, delta = bounds::DEFAULT_DELTA, size_prior = "quadratic"))]
fn occam_bound(
    m: usize,
    errors: usize,
    n: usize,
    bits: Vec<u32>,
    delta: f64,
    size_prior: &str,
) -> PyResult<BTreeMap<String, f64>> {
    let r = bounds::occam_bound(m, errors, n, &bits, delta, parse(size_prior)?).map_err(value_err)?;
    Ok(report_dict(&r))
}

#[pyfunction]
#[pyo3(signature = (m, compress_size, outside_errors, n, delta = bounds::DEFAULT_DELTA))]
fn sc_bound(
    m: usize,
    compress_size: usize,
    outside_errors: usize,
    n: usize,
    delta: f64,
) -> PyResult<BTreeMap<String, f64>> {
    let r = bounds::sc_bound(m, compress_size, outside_errors, n, delta).map_err(value_err)?;
    Ok(report_dict(&r))
}

#[pyfunction]
#[pyo3(signature = (m, n, ratios, gibbs_risk, delta = bounds::DEFAULT_DELTA, size_prior = "quadratic"))]
fn pacbayes_bound(
    m: usize,
    n: usize,
    ratios: Vec<f64>,
    gibbs_risk: f64,
    delta: f64,
    size_prior: &str,
) -> PyResult<BTreeMap<String, f64>> {
    let r = bounds::pacbayes_bound_full(m, n, &ratios, gibbs_risk, delta, parse(size_prior)?)
        .map_err(value_err)?;
    Ok(report_dict(&r))
}

/// `(bits, index, threshold)` of the shortest dyadic code inside `[a, b]`.
#[pyfunction]
fn dyadic_code(lo: f64, hi: f64, a: f64, b: f64) -> PyResult<(u32, u64, f64)> {
    let c = learners::dyadic_code(lo, hi, a, b).map_err(value_err)?;
    Ok((c.bits, c.index, c.threshold))
}

/// Nested cross-validation with the default grid; returns the aggregates.
#[pyfunction]
#[pyo3(signature = (ds, learner, outer_folds = 5, inner_folds = 5, permutations = 20, seed = 0))]
fn nested_cv(
    py: Python<'_>,
    ds: &PyDataset,
    learner: &str,
    outer_folds: usize,
    inner_folds: usize,
    permutations: usize,
    seed: u64,
) -> PyResult<BTreeMap<String, f64>> {
    let kind = parse::<LearnerKind>(learner)?;
    let plan = CvPlan {
        outer_folds,
        inner_folds,
        permutations,
        ..CvPlan::new(kind, seed)
    };
    let r = py
        .detach(|| modelsel::nested_cv(&ds.inner, kind, &plan))
        .map_err(value_err)?;
    let mut d = BTreeMap::new();
    d.insert("mean_errors".into(), r.mean_errors);
    d.insert("std_errors".into(), r.std_errors);
    d.insert("mean_model_size".into(), r.mean_model_size);
    d.insert("std_model_size".into(), r.std_model_size);
    d.insert("failed_folds".into(), r.failed_folds as f64);
    if let Some(g) = r.mean_gibbs_errors {
        d.insert("mean_gibbs_errors".into(), g);
    }
    if let Some(b) = r.mean_bayes_errors {
        d.insert("mean_bayes_errors".into(), b);
    }
    if let Some(b) = r.mean_bound {
        d.insert("mean_bound_times_m".into(), b);
    }
    Ok(d)
}

#[pymodule]
fn stumpsel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_tail, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_tail_inversion, m)?)?;
    m.add_function(wrap_pyfunction!(kl_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(kl_sup_inversion, m)?)?;
    m.add_function(wrap_pyfunction!(occam_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sc_bound, m)?)?;
    m.add_function(wrap_pyfunction!(pacbayes_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dyadic_code, m)?)?;
    m.add_function(wrap_pyfunction!(nested_cv, m)?)?;
    Ok(())
}
