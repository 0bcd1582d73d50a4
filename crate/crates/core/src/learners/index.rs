use std::sync::OnceLock;

use crate::data::{AttrRange, Dataset};

/// One attribute's training values grouped by distinct value.
#[derive(Debug, Clone)]
pub struct SortedAttribute {
    pub attr: usize,
    pub range: AttrRange,
    /// Distinct values, ascending.
    pub values: Vec<f64>,
    /// Example indices ordered by (value, index).
    pub members: Vec<u32>,
    /// `members[starts[g]..starts[g + 1]]` share `values[g]`.
    pub starts: Vec<u32>,
}

impl SortedAttribute {
    pub fn groups(&self) -> usize {
        self.values.len()
    }

    pub fn group(&self, g: usize) -> &[u32] {
        &self.members[self.starts[g] as usize..self.starts[g + 1] as usize]
    }

    fn pair_count(&self) -> usize {
        let g = self.groups();
        g * g.saturating_sub(1) / 2
    }

    /// Offset of pair `(s, t)`, `s < t`, in the flattened upper triangle.
    #[inline]
    pub fn pair_offset(&self, s: usize) -> usize {
        let g = self.groups();
        s * (2 * g - s - 1) / 2
    }
}

/// Per-attribute sort order of a training set, shared across parameter
/// settings. Labels play no part, so one index also serves the
/// label-swapped dataset.
#[derive(Debug)]
pub struct AttributeIndex {
    m: usize,
    attrs: Vec<SortedAttribute>,
    log_ratios: OnceLock<Option<Vec<Vec<f64>>>>,
}

/// Above this many cached pairs the log margin ratios are computed on the
/// fly instead.
const LOG_RATIO_CACHE_LIMIT: usize = 1 << 23;

impl AttributeIndex {
    /// Indexes every attribute with a nondegenerate range and at least two
    /// distinct training values.
    pub fn new(ds: &Dataset) -> Self {
        let m = ds.m();
        let mut attrs = Vec::new();
        let mut order: Vec<u32> = (0..m as u32).collect();
        for k in ds.usable_attributes() {
            order.sort_by(|&i, &j| {
                ds.value(i as usize, k)
                    .total_cmp(&ds.value(j as usize, k))
                    .then(i.cmp(&j))
            });
            let mut values = Vec::new();
            let mut starts = Vec::new();
            for (pos, &i) in order.iter().enumerate() {
                let v = ds.value(i as usize, k);
                if values.last() != Some(&v) {
                    values.push(v);
                    starts.push(pos as u32);
                }
            }
            if values.len() < 2 {
                continue;
            }
            starts.push(m as u32);
            attrs.push(SortedAttribute {
                attr: k,
                range: ds.range(k),
                values,
                members: order.clone(),
                starts,
            });
        }
        AttributeIndex {
            m,
            attrs,
            log_ratios: OnceLock::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn attributes(&self) -> &[SortedAttribute] {
        &self.attrs
    }

    /// `ln((B - A) / (v_t - v_s))` for every pair of distinct values, per
    /// attribute, or `None` when the table would be too large.
    pub(crate) fn log_ratios(&self) -> Option<&[Vec<f64>]> {
        self.log_ratios
            .get_or_init(|| {
                let total: usize = self.attrs.iter().map(|a| a.pair_count()).sum();
                if total > LOG_RATIO_CACHE_LIMIT {
                    return None;
                }
                Some(
                    self.attrs
                        .iter()
                        .map(|sa| {
                            let ln_range = sa.range.width().ln();
                            let g = sa.groups();
                            let mut out = Vec::with_capacity(sa.pair_count());
                            for s in 0..g {
                                for t in s + 1..g {
                                    out.push(ln_range - (sa.values[t] - sa.values[s]).ln());
                                }
                            }
                            out
                        })
                        .collect(),
                )
            })
            .as_deref()
    }
}
