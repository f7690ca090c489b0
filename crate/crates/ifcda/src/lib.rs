//! # ifcda
//!
//! Unified closed-set / open-set unsupervised domain adaptation.
//!
//! The library learns a pair of linear projections `A_s`, `A_t` that map a
//! labeled source domain and an unlabeled target domain into aligned
//! subspaces, while predicting target labels by anchored label propagation on
//! a p-nearest-neighbor similarity graph. The two steps reinforce each other
//! in an alternating loop:
//!
//! 1. **Label prediction** — propagate source labels across the graph with
//!    per-node anchoring strengths. An extra label component lets the target
//!    reject samples into a novel class in the open-set setting.
//! 2. **Importance filtering** — propagated soft labels are snapped to
//!    one-hot when confident and truncated to their few prominent
//!    probabilities otherwise, which keeps noisy low-confidence mass out of
//!    the losses.
//! 3. **Projection learning** — filtered labels weight a shared-mass MMD
//!    term, a class-wise MMD term, and between/within class scatters; the
//!    resulting trace-ratio objective is solved as a generalized symmetric
//!    eigenproblem. The graph is rebuilt on the embedded features and the
//!    loop repeats.
//!
//! The closed-set setting falls out as the special case where the novel
//! label component is identically zero.
//!
//! Modules mirror the processing stages: [`dataset`] (ingestion, one-hot
//! conversion, synthetic task generation), [`graph`], [`propagation`],
//! [`filter`], [`adaptation`] (loss assembly, eigensolver, outer loop), and
//! [`metrics`]/[`experiment`] (evaluation, reports, sweeps). The `ifcda-cli`
//! crate wraps [`experiment`] in a batch command-line interface.

pub mod adaptation;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod graph;
pub mod metrics;
pub mod propagation;
pub mod synthetic;

pub use adaptation::{AdaptationConfig, AdaptationOutcome, LossMatrices, ProjectionPair};
pub use dataset::{DomainDataset, DomainRole, FileFormat, SoftLabelMatrix};
pub use error::{Error, Result};
pub use experiment::{DataSource, ExperimentResult, RunConfig};
pub use filter::{CollapsedLabelMatrix, FilterConfig};
pub use graph::{SigmaMode, SimilarityGraph};
pub use metrics::MetricsReport;
pub use propagation::AnchorVector;
pub use synthetic::SyntheticSpec;

/// Adaptation scenario: closed-set (shared label space) or open-set (target
/// carries additional novel classes, treated as one extra class `C+1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Csda,
    Osda,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Csda => "csda",
            Scenario::Osda => "osda",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csda" | "closed" | "closed-set" => Ok(Scenario::Csda),
            "osda" | "open" | "open-set" => Ok(Scenario::Osda),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}' (expected csda or osda)"
            ))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
