//! Anchored graph label propagation.
//!
//! Every node l carries an anchoring strength alpha_l in [0, 1]: alpha = 0
//! pins the node to its initial label exactly, alpha near 1 lets the label be
//! determined by the neighbors. With I_alpha = diag(alpha), H the degree
//! diagonal and W the affinity matrix, the propagated labels solve
//!
//! ```text
//! (I - I_alpha H^-1 W) F*^T = (I - I_alpha) F^T
//! ```
//!
//! which is the stationarity condition of the anchored smoothness objective
//! (graph smoothness plus per-node u_l h_l ||f*_l - f_l||^2 with
//! u_l = 1/alpha_l - 1). Rows with alpha_l = 0 reduce to the identity, so
//! pinned labels are handled as exact equality constraints and no infinite
//! u_l is ever materialized. The system matrix is an M-matrix and is
//! nonsingular exactly when every alpha = 1 node has a path to some node
//! with alpha < 1; that condition is checked explicitly before solving so
//! the error can name the offending component.

use nalgebra::DMatrix;

use crate::dataset::SoftLabelMatrix;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::Scenario;

/// Node count up to which the dense factorization is used; larger systems
/// fall back to the stationary iteration.
const DENSE_SOLVE_LIMIT: usize = 3000;
/// Relative-change stopping threshold for the stationary iteration.
const ITERATIVE_TOL: f64 = 1e-10;
const ITERATIVE_MAX_STEPS: usize = 200_000;

/// Per-node anchoring strengths, all in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorVector {
    alpha: Vec<f64>,
}

impl AnchorVector {
    pub fn from_values(alpha: Vec<f64>) -> Result<Self> {
        for (i, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || !(0.0..=1.0).contains(&a) {
                return Err(Error::Parameter(format!(
                    "anchor value {a} at node {i} outside [0, 1]"
                )));
            }
        }
        Ok(AnchorVector { alpha })
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Scenario-specific initial labels and анchors over the pooled
/// source+target columns.
///
/// Closed-set: target labels start as zero columns and target anchors are 1
/// (labels fully determined by propagation). Open-set: target labels start
/// with all mass on the novel row and anchors equal `alpha_set`, so smaller
/// `alpha_set` makes rejection into the novel class easier. Source anchors
/// are always 0.
pub fn init_labels(
    f_s: &SoftLabelMatrix,
    n_t: usize,
    scenario: Scenario,
    alpha_set: f64,
) -> Result<(SoftLabelMatrix, AnchorVector)> {
    let c = f_s.class_count();
    let n_s = f_s.sample_count();
    // source labels must be one-hot over the shared classes, novel row empty
    for j in 0..n_s {
        let col = f_s.probs().column(j);
        let ones = col.iter().filter(|&&v| v == 1.0).count();
        let zeros = col.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != col.len() {
            return Err(Error::Label(format!(
                "source column {j} is not one-hot"
            )));
        }
        if col[c] != 0.0 {
            return Err(Error::Label(format!(
                "source column {j} has mass on the novel row"
            )));
        }
    }
    if n_t == 0 {
        return Err(Error::Parameter("target sample count must be positive".into()));
    }

    let mut f_t = DMatrix::zeros(c + 1, n_t);
    let alpha_t = match scenario {
        Scenario::Csda => 1.0,
        Scenario::Osda => {
            if !(alpha_set.is_finite() && alpha_set > 0.0 && alpha_set < 1.0) {
                return Err(Error::Parameter(format!(
                    "alpha_set = {alpha_set} must lie strictly inside (0, 1) for open-set initialization"
                )));
            }
            for j in 0..n_t {
                f_t[(c, j)] = 1.0;
            }
            alpha_set
        }
    };
    let f_t = SoftLabelMatrix::new(f_t, c, false)?;
    let f = SoftLabelMatrix::hstack(&f_s.clone_unnormalized(), &f_t)?;
    let mut alpha = vec![0.0; n_s];
    alpha.extend(std::iter::repeat(alpha_t).take(n_t));
    Ok((f, AnchorVector::from_values(alpha)?))
}

impl SoftLabelMatrix {
    /// Same contents with the normalized flag cleared; used when stacking
    /// with unnormalized initial target labels.
    fn clone_unnormalized(&self) -> SoftLabelMatrix {
        SoftLabelMatrix::new(self.probs().clone(), self.class_count(), false)
            .expect("relaxing the normalized flag cannot fail")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SolveMethod {
    Dense,
    Iterative,
}

/// Solve the anchored propagation system. Columns with alpha = 0 come back
/// equal to their initial labels.
pub fn propagate(
    graph: &SimilarityGraph,
    f: &SoftLabelMatrix,
    anchors: &AnchorVector,
) -> Result<SoftLabelMatrix> {
    let method = if graph.node_count() <= DENSE_SOLVE_LIMIT {
        SolveMethod::Dense
    } else {
        SolveMethod::Iterative
    };
    propagate_with(graph, f, anchors, method)
}

fn propagate_with(
    graph: &SimilarityGraph,
    f: &SoftLabelMatrix,
    anchors: &AnchorVector,
    method: SolveMethod,
) -> Result<SoftLabelMatrix> {
    let n = graph.node_count();
    if f.sample_count() != n || anchors.len() != n {
        return Err(Error::Data(format!(
            "graph ({n} nodes), labels ({} columns) and anchors ({}) disagree",
            f.sample_count(),
            anchors.len()
        )));
    }
    check_anchor_reachability(graph, anchors)?;

    let alpha = anchors.values();
    let rows = f.probs().nrows();
    // unknowns per node: G = F^T (n x (C+1))
    let g = f.probs().transpose();
    let mut rhs = g.clone();
    for l in 0..n {
        let scale = 1.0 - alpha[l];
        for r in 0..rows {
            rhs[(l, r)] *= scale;
        }
    }

    let solution = match method {
        SolveMethod::Dense => {
            let mut system = DMatrix::<f64>::identity(n, n);
            for l in 0..n {
                if alpha[l] == 0.0 {
                    continue;
                }
                let scale = alpha[l] / graph.degrees()[l];
                for &(j, w) in graph.neighbors(l) {
                    system[(l, j)] -= scale * w;
                }
            }
            let lu = system.lu();
            let diag = lu.u().diagonal();
            let max_pivot = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let min_pivot = diag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
            if !(min_pivot > 0.0) || max_pivot / min_pivot > 1e12 {
                return Err(Error::Propagation(format!(
                    "near-singular propagation system (pivot ratio {:e})",
                    max_pivot / min_pivot
                )));
            }
            lu.solve(&rhs).ok_or_else(|| {
                Error::Propagation("singular propagation system".into())
            })?
        }
        SolveMethod::Iterative => {
            // G_{k+1} = I_alpha H^-1 W G_k + (I - I_alpha) G; the iteration
            // matrix has spectral radius below 1 once anchors are reachable.
            let mut current = rhs.clone();
            let mut converged = false;
            for _ in 0..ITERATIVE_MAX_STEPS {
                let mut next = rhs.clone();
                for l in 0..n {
                    if alpha[l] == 0.0 {
                        continue;
                    }
                    let scale = alpha[l] / graph.degrees()[l];
                    for &(j, w) in graph.neighbors(l) {
                        let coeff = scale * w;
                        for r in 0..rows {
                            next[(l, r)] += coeff * current[(j, r)];
                        }
                    }
                }
                let delta = (&next - &current).amax();
                let scale = next.amax().max(1.0);
                current = next;
                if delta <= ITERATIVE_TOL * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Propagation(
                    "stationary iteration failed to converge".into(),
                ));
            }
            current
        }
    };

    SoftLabelMatrix::new(solution.transpose(), f.class_count(), false)
}

/// Every node must reach some anchored node (alpha < 1) through graph edges;
/// otherwise the system is singular and the unreachable component is named.
fn check_anchor_reachability(graph: &SimilarityGraph, anchors: &AnchorVector) -> Result<()> {
    let n = graph.node_count();
    let mut reached = vec![false; n];
    let mut queue: Vec<usize> = anchors
        .values()
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a < 1.0)
        .map(|(i, _)| i)
        .collect();
    if queue.is_empty() {
        return Err(Error::Propagation(
            "every node has anchor 1; the propagation system has no anchored labels".into(),
        ));
    }
    for &i in &queue {
        reached[i] = true;
    }
    while let Some(i) = queue.pop() {
        for &(j, _) in graph.neighbors(i) {
            if !reached[j] {
                reached[j] = true;
                queue.push(j);
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&i| !reached[i]).collect();
    if unreachable.is_empty() {
        Ok(())
    } else {
        Err(Error::Propagation(format!(
            "nodes {unreachable:?} form a component with no path to any anchored node"
        )))
    }
}

/// Divide each column by its sum, turning propagated scores into
/// probabilities. A zero-sum column signals an unreachable target node.
pub fn column_normalize(f: &SoftLabelMatrix) -> Result<SoftLabelMatrix> {
    let mut probs = f.probs().clone();
    for j in 0..probs.ncols() {
        let sum: f64 = probs.column(j).sum();
        if !(sum > 0.0) {
            return Err(Error::Normalization(format!(
                "column {j} has nonpositive sum {sum}"
            )));
        }
        for i in 0..probs.nrows() {
            probs[(i, j)] /= sum;
        }
    }
    SoftLabelMatrix::new(probs, f.class_count(), true)
}
