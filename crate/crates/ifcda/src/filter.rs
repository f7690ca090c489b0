//! Importance filtering of soft labels, plus the shared/novel collapse used
//! by the shared-mass MMD term.
//!
//! A soft label is *confident* when its maximum probability strictly exceeds
//! the threshold tau, in which case it is snapped to one-hot at the argmax.
//! Otherwise it is *ambiguous*: only the N largest probabilities are kept and
//! the column is renormalized. Both tie-breaks (argmax and the N-th largest)
//! go to the lower class index. Only target columns are filtered; source
//! labels are ground truth and pass through untouched.

use nalgebra::{DMatrix, DVector};

use crate::dataset::SoftLabelMatrix;
use crate::error::{Error, Result};

/// Sentinel for "keep every probability" (the N = all sweep point).
pub const KEEP_ALL: usize = usize::MAX;

/// Confidence threshold and kept-probability count for ambiguous labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Confidence threshold; the confident branch fires on max > tau.
    pub tau: f64,
    /// Number of probabilities kept in an ambiguous label ([`KEEP_ALL`]
    /// disables truncation).
    pub keep: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { tau: 0.8, keep: 3 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Parameter(format!(
                "tau = {} must lie strictly inside (0, 1)",
                self.tau
            )));
        }
        if self.keep == 0 {
            return Err(Error::Parameter("keep count N must be at least 1".into()));
        }
        Ok(())
    }
}

/// Filter one normalized probability column.
pub fn filter_label(column: &DVector<f64>, cfg: &FilterConfig) -> Result<DVector<f64>> {
    cfg.validate()?;
    let sum: f64 = column.sum();
    if (sum - 1.0).abs() > 1e-6 || column.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Parameter(format!(
            "filter input is not a probability column (sum {sum})"
        )));
    }
    let len = column.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_unstable_by(|&a, &b| column[b].total_cmp(&column[a]).then(a.cmp(&b)));

    let mut out = DVector::zeros(len);
    let argmax = order[0];
    if column[argmax] > cfg.tau {
        out[argmax] = 1.0;
        return Ok(out);
    }
    let kept = cfg.keep.min(len);
    let mass: f64 = order[..kept].iter().map(|&i| column[i]).sum();
    // mass >= max(column) >= 1/len > 0 for a normalized column
    for &i in &order[..kept] {
        out[i] = column[i] / mass;
    }
    Ok(out)
}

/// Filter every target column of a pooled label matrix; the first `n_s`
/// (source) columns are copied bit-identically.
pub fn filter_target_labels(
    f: &SoftLabelMatrix,
    n_s: usize,
    cfg: &FilterConfig,
) -> Result<SoftLabelMatrix> {
    if !f.is_normalized() {
        return Err(Error::Parameter(
            "filtering requires a normalized label matrix".into(),
        ));
    }
    if n_s > f.sample_count() {
        return Err(Error::Parameter(format!(
            "source count {n_s} exceeds sample count {}",
            f.sample_count()
        )));
    }
    let mut probs = f.probs().clone();
    for j in n_s..probs.ncols() {
        let filtered = filter_label(&probs.column(j).into_owned(), cfg)?;
        probs.set_column(j, &filtered);
    }
    SoftLabelMatrix::new(probs, f.class_count(), true)
}

/// 2 x n matrix of (shared mass, novel mass) per sample: row 0 sums the
/// first C rows of the input, row 1 is the novel row.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedLabelMatrix {
    probs: DMatrix<f64>,
}

impl CollapsedLabelMatrix {
    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    /// Per-sample shared-class mass (row 0).
    pub fn shared_mass(&self) -> DVector<f64> {
        self.probs.row(0).transpose()
    }

    /// Per-sample novel mass (row 1).
    pub fn novel_mass(&self) -> DVector<f64> {
        self.probs.row(1).transpose()
    }

    /// Total shared mass over all samples.
    pub fn total_shared_mass(&self) -> f64 {
        self.probs.row(0).sum()
    }

    pub fn sample_count(&self) -> usize {
        self.probs.ncols()
    }
}

/// Collapse a (C+1)-row label matrix into shared/novel masses.
pub fn collapse_shared_novel(f: &SoftLabelMatrix) -> CollapsedLabelMatrix {
    let c = f.class_count();
    let n = f.sample_count();
    let mut probs = DMatrix::zeros(2, n);
    for j in 0..n {
        let mut shared = 0.0;
        for i in 0..c {
            shared += f.probs()[(i, j)];
        }
        probs[(0, j)] = shared;
        probs[(1, j)] = f.probs()[(c, j)];
    }
    CollapsedLabelMatrix { probs }
}
