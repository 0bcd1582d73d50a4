//! Text format for trained models: the stump block, a blank line, then
//! learner metadata as `key=value` lines.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::bounds::SizePrior;
use crate::data::AttrRange;
use crate::fmt_real;
use crate::learners::{
    CompressionModel, CompressionStep, GibbsModel, GibbsStep, LearnerKind, LearnerParams,
    ModelBody, OccamModel, OccamStep, Target, TrainedModel,
};
use crate::stumps::{
    GibbsConjunction, StumpConjunction, StumpError, DETERMINISTIC_TAG, INTERVAL_TAG,
};

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model: {0}")]
    Format(String),
    #[error(transparent)]
    Stump(#[from] StumpError),
}

fn bad(msg: impl Into<String>) -> ModelIoError {
    ModelIoError::Format(msg.into())
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn pair(a: f64, b: f64) -> String {
    format!("{}:{}", fmt_real(a), fmt_real(b))
}

pub fn model_to_text(model: &TrainedModel) -> String {
    let mut out = match &model.body {
        ModelBody::Compression(c) => c.conjunction().to_text(),
        ModelBody::Occam(o) => o.conjunction().to_text(),
        ModelBody::Gibbs(g) => g.posterior().to_text(),
    };
    out.push('\n');
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    let p = &model.params;
    kv("learner", model.kind.name().into());
    kv("target", model.target.name().into());
    kv("n_attributes", model.n_attributes.to_string());
    kv("p", fmt_real(p.p));
    kv("eta", fmt_real(p.eta));
    kv("v_max", p.v_max.to_string());
    if let Some(g) = p.gamma {
        kv("gamma", fmt_real(g));
    }
    kv("size_prior", p.size_prior.name().into());
    if let Some([neg, pos]) = &model.label_names {
        kv("label_negative", neg.clone());
        kv("label_positive", pos.clone());
    }
    match &model.body {
        ModelBody::Compression(c) => {
            kv(
                "selection_order",
                join(c.steps(), |s| s.stump.attr.to_string()),
            );
            kv(
                "anchors",
                join(&c.anchors_by_attribute(), |a| a.to_string()),
            );
            kv(
                "compression_indices",
                join(&c.compression_indices(), |a| a.to_string()),
            );
        }
        ModelBody::Occam(o) => {
            let steps = o.steps_by_attribute();
            kv(
                "selection_order",
                join(o.steps(), |s| s.stump.attr.to_string()),
            );
            kv("bits", join(&steps, |s| s.bits.to_string()));
            kv("code_indices", join(&steps, |s| s.code_index.to_string()));
            kv(
                "intervals",
                join(&steps, |s| pair(s.interval.0, s.interval.1)),
            );
            kv("ranges", join(&steps, |s| pair(s.range.lo, s.range.hi)));
        }
        ModelBody::Gibbs(g) => {
            let steps = g.steps_by_attribute();
            kv(
                "selection_order",
                join(g.steps(), |s| s.stump.attr.to_string()),
            );
            kv("ranges", join(&steps, |s| pair(s.range.lo, s.range.hi)));
            kv("ratios", join(&steps, |s| fmt_real(s.ratio())));
        }
    }
    out
}

struct Meta(BTreeMap<String, String>);

impl Meta {
    fn get(&self, key: &str) -> Result<&str, ModelIoError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| bad(format!("missing `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ModelIoError> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| bad(format!("bad value `{v}` for `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str, len: usize) -> Result<Vec<T>, ModelIoError> {
        let v = self.get(key)?;
        let items: Vec<T> = if v.is_empty() {
            Vec::new()
        } else {
            v.split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("bad list `{v}` for `{key}`")))?
        };
        if items.len() != len {
            return Err(bad(format!(
                "`{key}` has {} entries, expected {len}",
                items.len()
            )));
        }
        Ok(items)
    }

    fn pairs(&self, key: &str, len: usize) -> Result<Vec<(f64, f64)>, ModelIoError> {
        let raw: Vec<String> = self.list(key, len)?;
        raw.iter()
            .map(|s| {
                let (a, b) = s
                    .split_once(':')
                    .ok_or_else(|| bad(format!("bad pair `{s}` in `{key}`")))?;
                let a = a.parse().map_err(|_| bad(format!("bad pair `{s}`")))?;
                let b = b.parse().map_err(|_| bad(format!("bad pair `{s}`")))?;
                Ok((a, b))
            })
            .collect()
    }
}

/// Reorders `steps` (sorted by attribute) into the recorded selection order.
fn in_selection_order<T: Copy>(
    steps: Vec<T>,
    attr: impl Fn(&T) -> usize,
    order: &[usize],
) -> Result<Vec<T>, ModelIoError> {
    order
        .iter()
        .map(|&k| {
            steps
                .iter()
                .find(|s| attr(s) == k)
                .copied()
                .ok_or_else(|| bad(format!("selection_order names attribute {k} with no stump")))
        })
        .collect()
}

pub fn model_from_text(text: &str) -> Result<TrainedModel, ModelIoError> {
    let (block, rest) = match text.find("\n\n") {
        Some(pos) => (&text[..pos + 1], &text[pos + 2..]),
        None => return Err(bad("no metadata block after the stumps")),
    };
    let mut meta = BTreeMap::new();
    for line in rest
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{line}`")))?;
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    let meta = Meta(meta);
    let kind: LearnerKind = meta.get("learner")?.parse().map_err(bad)?;
    let target: Target = meta.get("target")?.parse().map_err(bad)?;
    let size_prior: SizePrior = meta.get("size_prior")?.parse().map_err(bad)?;
    let params = LearnerParams {
        p: meta.parse("p")?,
        eta: meta.parse("eta")?,
        v_max: meta.parse("v_max")?,
        gamma: match meta.0.get("gamma") {
            Some(_) => Some(meta.parse("gamma")?),
            None => None,
        },
        size_prior,
    };
    let n_attributes: usize = meta.parse("n_attributes")?;
    let label_names = match (meta.0.get("label_negative"), meta.0.get("label_positive")) {
        (Some(n), Some(p)) => Some([n.clone(), p.clone()]),
        _ => None,
    };
    let first = block
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    let body = if kind.is_soft() {
        if first != INTERVAL_TAG {
            return Err(bad(format!(
                "{kind} model must start with `{INTERVAL_TAG}`"
            )));
        }
        let posterior = GibbsConjunction::from_text(block)?;
        let k = posterior.len();
        let ranges = meta.pairs("ranges", k)?;
        let steps: Vec<GibbsStep> = posterior
            .stumps()
            .iter()
            .zip(ranges)
            .map(|(&stump, (lo, hi))| GibbsStep {
                stump,
                range: AttrRange::new(lo, hi),
            })
            .collect();
        let order: Vec<usize> = meta.list("selection_order", k)?;
        ModelBody::Gibbs(GibbsModel::from_steps(in_selection_order(
            steps,
            |s| s.stump.attr,
            &order,
        )?)?)
    } else {
        if first != DETERMINISTIC_TAG {
            return Err(bad(format!(
                "{kind} model must start with `{DETERMINISTIC_TAG}`"
            )));
        }
        let conj = StumpConjunction::from_text(block)?;
        let k = conj.len();
        let order: Vec<usize> = meta.list("selection_order", k)?;
        match kind {
            LearnerKind::Sc => {
                let anchors: Vec<usize> = meta.list("anchors", k)?;
                let steps: Vec<CompressionStep> = conj
                    .stumps()
                    .iter()
                    .zip(anchors)
                    .map(|(&stump, anchor)| CompressionStep { stump, anchor })
                    .collect();
                ModelBody::Compression(CompressionModel::from_steps(in_selection_order(
                    steps,
                    |s| s.stump.attr,
                    &order,
                )?)?)
            }
            _ => {
                let bits: Vec<u32> = meta.list("bits", k)?;
                let codes: Vec<u64> = meta.list("code_indices", k)?;
                let intervals = meta.pairs("intervals", k)?;
                let ranges = meta.pairs("ranges", k)?;
                let steps: Vec<OccamStep> = (0..k)
                    .map(|i| OccamStep {
                        stump: conj.stumps()[i],
                        bits: bits[i],
                        code_index: codes[i],
                        interval: intervals[i],
                        range: AttrRange::new(ranges[i].0, ranges[i].1),
                    })
                    .collect();
                ModelBody::Occam(OccamModel::from_steps(in_selection_order(
                    steps,
                    |s| s.stump.attr,
                    &order,
                )?)?)
            }
        }
    };
    Ok(TrainedModel {
        kind,
        target,
        n_attributes,
        params,
        body,
        label_names,
    })
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<(), ModelIoError> {
    fs::write(path, model_to_text(model)).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<TrainedModel, ModelIoError> {
    let text = fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::learners::train;

    fn data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..24)
            .map(|i| {
                vec![
                    (i % 5) as f64 * 0.3,
                    ((i * 7) % 11) as f64,
                    ((i * 3) % 8) as f64 / 3.0,
                ]
            })
            .collect();
        let labels = (0..24)
            .map(|i| ((i % 5) > 1 && ((i * 7) % 11) < 8) as u8)
            .collect();
        Dataset::new(rows, labels)
            .unwrap()
            .with_label_names("no".into(), "yes".into())
    }

    #[test]
    fn round_trip_every_kind() {
        let ds = data();
        for kind in LearnerKind::ALL {
            for target in [Target::Conjunction, Target::Disjunction] {
                let params = LearnerParams {
                    p: 2.0,
                    eta: 0.01,
                    v_max: 5,
                    gamma: kind.uses_gamma().then_some(0.2),
                    size_prior: SizePrior::default(),
                };
                let model = train(&ds, kind, target, &params).unwrap();
                let text = model_to_text(&model);
                let back = model_from_text(&text).unwrap();
                assert_eq!(back, model, "{kind} {target}\n{text}");
                assert_eq!(model_to_text(&back), text);
            }
        }
    }

    #[test]
    fn rejects_wrong_tag_and_missing_metadata() {
        let ds = data();
        let model = train(
            &ds,
            LearnerKind::Sc,
            Target::Conjunction,
            &LearnerParams::default(),
        )
        .unwrap();
        let text = model_to_text(&model);
        assert!(model_from_text(&text.replacen(DETERMINISTIC_TAG, INTERVAL_TAG, 1)).is_err());
        assert!(model_from_text(&text.replace("learner=sc\n", "")).is_err());
        assert!(model_from_text("deterministic\n").is_err());
    }
}
