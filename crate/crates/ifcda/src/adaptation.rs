//! Loss-matrix assembly, the generalized-eigenproblem projection solver, and
//! the alternating adaptation loop.
//!
//! All loss terms are expressed as quadratic forms in the stacked projection
//! P = [A_s; A_t]: a shared-mass MMD matrix M1, a class-wise MMD matrix M2, a
//! subspace shift/scale regularizer V, and per-domain between/within class
//! scatters. The projection maximizes
//!
//! ```text
//! tr(P^T blockdiag(N_sb, N_tb) P)
//! ------------------------------------------------------
//! tr(P^T (lambda blockdiag(N_sw, N_tw) + delta (M1 + M2) + V) P)
//! ```
//!
//! solved for the k leading generalized eigenpairs by Cholesky reduction of
//! the (regularized) denominator to a standard symmetric eigenproblem.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{to_one_hot, DomainDataset, SoftLabelMatrix};
use crate::error::{Error, Result};
use crate::filter::{collapse_shared_novel, filter_target_labels, CollapsedLabelMatrix, FilterConfig};
use crate::graph::{build_graph, SigmaMode, SimilarityGraph};
use crate::propagation::{column_normalize, init_labels, propagate};
use crate::Scenario;

/// Pooled loss matrices for one outer iteration. `m1`/`m2` are `None` when
/// delta = 0 and the MMD terms are skipped entirely.
#[derive(Debug, Clone)]
pub struct LossMatrices {
    pub m1: Option<DMatrix<f64>>,
    pub m2: Option<DMatrix<f64>>,
    pub v: DMatrix<f64>,
    pub n_sb: DMatrix<f64>,
    pub n_sw: DMatrix<f64>,
    pub n_tb: DMatrix<f64>,
    pub n_tw: DMatrix<f64>,
}

/// Per-domain projections with the generalized eigenvalues that produced
/// them, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    pub a_s: DMatrix<f64>,
    pub a_t: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl ProjectionPair {
    /// The stacked joint projection [A_s; A_t] (2m x k).
    pub fn stacked(&self) -> DMatrix<f64> {
        vstack(&self.a_s, &self.a_t)
    }

    pub fn subspace_dim(&self) -> usize {
        self.a_s.ncols()
    }
}

/// Hyperparameters of the full adaptation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationConfig {
    pub scenario: Scenario,
    /// Projected dimension k (at most the feature dimension).
    pub subspace_dim: usize,
    /// Neighbor count p of the similarity graph.
    pub neighbor_count: usize,
    /// Outer iteration count T; the loop always runs exactly T rounds.
    pub iterations: usize,
    pub filter: FilterConfig,
    /// Target anchoring strength for the open-set scenario, in (0, 1].
    /// Exactly 1 is the degenerate case with no novel-class rejection: the
    /// initialization falls back to the closed-set branch.
    pub alpha_set: f64,
    /// Projection scale regularizer.
    pub gamma: f64,
    /// Subspace shift regularizer (ignored when projections are tied).
    pub beta: f64,
    /// Weight of the within-class scatters in the denominator.
    pub lambda: f64,
    /// Weight of the MMD terms; 0 skips building M1/M2.
    pub delta: f64,
    /// Force A_s = A_t. `None` resolves to the scenario default: off for
    /// closed-set, on for open-set.
    pub tie_projections: Option<bool>,
    /// L2-normalize embedding columns before the graph rebuild.
    pub normalize_embeddings: bool,
    pub seed: u64,
}

impl AdaptationConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        AdaptationConfig {
            scenario,
            subspace_dim: 10,
            neighbor_count: 20,
            iterations: 5,
            filter: FilterConfig::default(),
            alpha_set: 0.98,
            gamma: 0.1,
            beta: 1.0,
            lambda: 0.01,
            delta: 1.0,
            tie_projections: None,
            normalize_embeddings: false,
            seed: 0,
        }
    }

    /// Resolved tie flag.
    pub fn tie(&self) -> bool {
        self.tie_projections
            .unwrap_or(self.scenario == Scenario::Osda)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim == 0 {
            return Err(Error::Parameter("subspace dimension k must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Parameter("iteration count T must be at least 1".into()));
        }
        if self.neighbor_count == 0 {
            return Err(Error::Parameter("neighbor count p must be at least 1".into()));
        }
        self.filter.validate()?;
        for (name, v) in [
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("delta", self.delta),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!("{name} = {v} must be nonnegative")));
            }
        }
        if !(self.alpha_set.is_finite() && self.alpha_set > 0.0 && self.alpha_set <= 1.0) {
            return Err(Error::Parameter(format!(
                "alpha_set = {} must lie in (0, 1]",
                self.alpha_set
            )));
        }
        Ok(())
    }
}

/// Shared-mass MMD matrix M1 (2m x 2m). Weights are the per-sample shared
/// masses; the quadratic form tr(P^T M1 P) equals the squared distance
/// between the weighted projected domain means.
pub fn mmd_shared(
    x_s: &DMatrix<f64>,
    x_t: &DMatrix<f64>,
    fhat_s: &CollapsedLabelMatrix,
    fhat_t: &CollapsedLabelMatrix,
) -> Result<DMatrix<f64>> {
    check_weight_count(x_s, fhat_s.sample_count(), "source")?;
    check_weight_count(x_t, fhat_t.sample_count(), "target")?;
    let w_s = fhat_s.shared_mass();
    let w_t = fhat_t.shared_mass();
    let mass_s = w_s.sum();
    let mass_t = w_t.sum();
    if !(mass_s > 0.0) || !(mass_t > 0.0) {
        return Err(Error::DegenerateWeights(format!(
            "shared mass must be positive in both domains (source {mass_s}, target {mass_t})"
        )));
    }
    let u_s = x_s * w_s / mass_s;
    let u_t = x_t * w_t / mass_t;
    Ok(mean_difference_outer(&u_s, &u_t))
}

/// Class-wise MMD matrix M2 (2m x 2m): one mean-difference term per shared
/// class, weighted by that class's soft probabilities. Classes with zero
/// mass in either domain contribute nothing; if every class degenerates the
/// loss is empty and an error is returned.
pub fn mmd_classwise(
    x_s: &DMatrix<f64>,
    x_t: &DMatrix<f64>,
    f_s: &SoftLabelMatrix,
    f_t: &SoftLabelMatrix,
) -> Result<DMatrix<f64>> {
    check_weight_count(x_s, f_s.sample_count(), "source")?;
    check_weight_count(x_t, f_t.sample_count(), "target")?;
    if f_s.class_count() != f_t.class_count() {
        return Err(Error::Data(format!(
            "class count mismatch {} vs {}",
            f_s.class_count(),
            f_t.class_count()
        )));
    }
    let m = x_s.nrows();
    let mut m2 = DMatrix::zeros(2 * m, 2 * m);
    let mut used = 0usize;
    for class in 0..f_s.class_count() {
        let w_s = f_s.probs().row(class).transpose();
        let w_t = f_t.probs().row(class).transpose();
        let mass_s = w_s.sum();
        let mass_t = w_t.sum();
        if !(mass_s > 0.0) || !(mass_t > 0.0) {
            continue;
        }
        let u_s = x_s * w_s / mass_s;
        let u_t = x_t * w_t / mass_t;
        m2 += mean_difference_outer(&u_s, &u_t);
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateWeights(
            "every class has zero mass in one of the domains; the class-wise loss is empty".into(),
        ));
    }
    Ok(m2)
}

fn check_weight_count(x: &DMatrix<f64>, n: usize, domain: &str) -> Result<()> {
    if x.ncols() != n {
        return Err(Error::Data(format!(
            "{domain} features have {} samples but labels have {n}",
            x.ncols()
        )));
    }
    Ok(())
}

/// v v^T with v = [u_s; -u_t]: the off-diagonal blocks carry the minus sign
/// that turns the quadratic form into the mean *difference*.
fn mean_difference_outer(u_s: &DVector<f64>, u_t: &DVector<f64>) -> DMatrix<f64> {
    let m = u_s.len();
    let mut v = DVector::zeros(2 * m);
    v.rows_mut(0, m).copy_from(u_s);
    v.rows_mut(m, m).copy_from(&(-u_t));
    &v * v.transpose()
}

/// Soft between/within class scatters of one domain, built from the shared
/// rows (1..C) of the label matrix and scaled by the total shared mass.
/// Classes with zero mass are skipped (their inverse-mass weight is taken as
/// zero).
pub fn scatter_matrices(
    x: &DMatrix<f64>,
    f: &SoftLabelMatrix,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_weight_count(x, f.sample_count(), "domain")?;
    let m = x.nrows();
    let n = x.ncols();
    let c = f.class_count();

    // per-sample shared mass (diagonal of B) and per-class mass
    let mut sample_mass = DVector::zeros(n);
    let mut class_mass = vec![0.0f64; c];
    for j in 0..n {
        for i in 0..c {
            let v = f.probs()[(i, j)];
            sample_mass[j] += v;
            class_mass[i] += v;
        }
    }
    let total: f64 = class_mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights(
            "all-zero soft labels: total shared mass is zero".into(),
        ));
    }

    // sum_c mass_c mu_c mu_c^T, computed as (X f_c)(X f_c)^T / mass_c
    let mut class_term = DMatrix::zeros(m, m);
    for class in 0..c {
        if class_mass[class] > 0.0 {
            let xf = x * f.probs().row(class).transpose();
            class_term += &xf * xf.transpose() / class_mass[class];
        }
    }
    // n_hat mu mu^T, via X B 1 = n_hat mu
    let xb = x * &sample_mass;
    let mean_term = &xb * xb.transpose() / total;
    // weighted second moment X B X^T
    let mut x_scaled = x.clone();
    for j in 0..n {
        x_scaled.column_mut(j).scale_mut(sample_mass[j]);
    }
    let moment = x_scaled * x.transpose();

    let n_b = symmetrized(&((class_term.clone() - mean_term) / total));
    let n_w = symmetrized(&((moment - class_term) / total));
    Ok((n_b, n_w))
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Subspace regularizer V = [(beta+gamma) I, -beta I; -beta I, (beta+gamma) I],
/// whose quadratic form is beta ||A_s - A_t||_F^2 + gamma (||A_s||_F^2 + ||A_t||_F^2).
pub fn build_v(beta: f64, gamma: f64, m: usize) -> Result<DMatrix<f64>> {
    if !beta.is_finite() || !gamma.is_finite() || beta < 0.0 || gamma < 0.0 {
        return Err(Error::Parameter(format!(
            "beta = {beta} and gamma = {gamma} must be nonnegative"
        )));
    }
    let mut v = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        v[(i, i)] = beta + gamma;
        v[(m + i, m + i)] = beta + gamma;
        v[(i, m + i)] = -beta;
        v[(m + i, i)] = -beta;
    }
    Ok(v)
}

/// Solve the trace-ratio pencil for the k leading eigenpairs.
///
/// The numerator is blockdiag(N_sb, N_tb) and the denominator
/// lambda blockdiag(N_sw, N_tw) + delta (M1 + M2) + V, regularized by
/// epsilon I with epsilon = 1e-6 tr(D)/dim before the Cholesky reduction.
/// With `tie` set the problem collapses to m x m by summing the four blocks
/// of every pooled matrix, and A_s = A_t.
pub fn solve_projection(
    losses: &LossMatrices,
    lambda: f64,
    delta: f64,
    k: usize,
    tie: bool,
) -> Result<ProjectionPair> {
    let m = losses.n_sb.nrows();
    for (name, mat, dim) in [
        ("N_sb", &losses.n_sb, m),
        ("N_sw", &losses.n_sw, m),
        ("N_tb", &losses.n_tb, m),
        ("N_tw", &losses.n_tw, m),
        ("V", &losses.v, 2 * m),
    ] {
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Data(format!(
                "{name} is {}x{}, expected {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
    }
    if k == 0 || k > m {
        return Err(Error::Parameter(format!(
            "projected dimension k = {k} must lie in 1..={m}"
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0 && delta.is_finite() && delta >= 0.0) {
        return Err(Error::Parameter(format!(
            "lambda = {lambda} and delta = {delta} must be nonnegative"
        )));
    }

    let (numerator, mut denominator) = if tie {
        let num = &losses.n_sb + &losses.n_tb;
        let mut den = (&losses.n_sw + &losses.n_tw) * lambda + fold_blocks(&losses.v, m);
        for mmd in [&losses.m1, &losses.m2].into_iter().flatten() {
            den += fold_blocks(mmd, m) * delta;
        }
        (num, den)
    } else {
        let num = block_diag(&losses.n_sb, &losses.n_tb);
        let mut den = block_diag(&losses.n_sw, &losses.n_tw) * lambda + losses.v.clone();
        for mmd in [&losses.m1, &losses.m2].into_iter().flatten() {
            if mmd.nrows() != 2 * m || mmd.ncols() != 2 * m {
                return Err(Error::Data("MMD matrix dimension mismatch".into()));
            }
            den += mmd * delta;
        }
        (num, den)
    };
    if numerator.iter().chain(denominator.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite entries in the loss matrices".into()));
    }

    let dim = denominator.nrows();
    let eps = 1e-6 * denominator.trace() / dim as f64;
    for i in 0..dim {
        denominator[(i, i)] += eps;
    }

    let chol = denominator.clone().cholesky().ok_or_else(|| {
        Error::Solver("denominator pencil is not positive definite after regularization".into())
    })?;
    let l = chol.l();
    // reduce to the standard symmetric problem C = L^-1 A L^-T
    let y = l
        .solve_lower_triangular(&numerator)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    let reduced = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?
        .transpose();
    let eig = nalgebra::SymmetricEigen::new(symmetrized(&reduced));

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_unstable_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut selected = DMatrix::zeros(dim, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &idx) in order[..k].iter().enumerate() {
        selected.set_column(col, &eig.eigenvectors.column(idx));
        eigenvalues.push(eig.eigenvalues[idx]);
    }
    // back-substitute: P = L^-T Y_k
    let p = l
        .transpose()
        .solve_upper_triangular(&selected)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;

    // residual of the generalized eigensystem actually solved
    let ap = &numerator * &p;
    let mut dp_phi = &denominator * &p;
    for (col, &phi) in eigenvalues.iter().enumerate() {
        dp_phi.column_mut(col).scale_mut(phi);
    }
    let scale = ap.norm();
    if scale > 1e-12 {
        let residual = (&ap - &dp_phi).norm();
        if residual > 1e-6 * scale {
            return Err(Error::Solver(format!(
                "eigensystem residual {residual:e} exceeds tolerance relative to {scale:e}"
            )));
        }
    }

    let (a_s, a_t) = if tie {
        (p.clone(), p)
    } else {
        (p.rows(0, m).into_owned(), p.rows(m, m).into_owned())
    };
    Ok(ProjectionPair {
        a_s,
        a_t,
        eigenvalues,
    })
}

fn block_diag(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let m = top.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(top);
    out.view_mut((m, m), (m, m)).copy_from(bottom);
    out
}

/// Sum of the four m x m blocks of a pooled 2m x 2m matrix; the quadratic
/// form of the result in A equals the pooled form at P = [A; A].
fn fold_blocks(pooled: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    pooled.view((0, 0), (m, m)).into_owned()
        + pooled.view((0, m), (m, m))
        + pooled.view((m, 0), (m, m))
        + pooled.view((m, m), (m, m))
}

fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

fn hcat(left: &DMatrix<f64>, right: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), (left.nrows(), left.ncols())).copy_from(left);
    out.view_mut((0, left.ncols()), (right.nrows(), right.ncols()))
        .copy_from(right);
    out
}

/// Project features into the learned subspace: Z = A^T X (k x n), with
/// optional per-column L2 normalization.
pub fn embed(x: &DMatrix<f64>, a: &DMatrix<f64>, normalize: bool) -> DMatrix<f64> {
    let mut z = a.transpose() * x;
    if normalize {
        for mut col in z.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col.scale_mut(1.0 / norm);
            }
        }
    }
    z
}

/// State captured after each propagation round (round 0 runs on the raw
/// features, before any projection is learned).
#[derive(Debug, Clone)]
pub struct IterationSnapshot {
    pub iteration: usize,
    /// Bandwidth the graph of this round was built with.
    pub sigma: f64,
    /// Filtered target labels, (C+1) x n_t.
    pub target_labels: SoftLabelMatrix,
    /// Generalized eigenvalues of the projection solved this round.
    pub eigenvalues: Option<Vec<f64>>,
}

/// Final result of the alternating loop.
#[derive(Debug, Clone)]
pub struct AdaptationOutcome {
    pub class_count: usize,
    pub projections: ProjectionPair,
    /// Final filtered target labels, (C+1) x n_t.
    pub target_labels: SoftLabelMatrix,
    /// T+1 snapshots: the initial propagation plus one per iteration.
    pub snapshots: Vec<IterationSnapshot>,
}

/// Run the full alternating adaptation:
///
/// 1. build the graph on the pooled raw features, propagate, normalize,
///    filter;
/// 2. T times: assemble the losses from the filtered labels, solve the
///    projection pencil, embed, rebuild the graph on the embeddings, and
///    re-propagate.
///
/// Deterministic for a fixed configuration; errors are annotated with the
/// iteration they occurred in.
pub fn run_ifcda(
    source: &DomainDataset,
    target: &DomainDataset,
    cfg: &AdaptationConfig,
) -> Result<AdaptationOutcome> {
    cfg.validate()?;
    let y_s = source
        .labels()
        .ok_or_else(|| Error::Label("source labels are required".into()))?;
    if source.dim() != target.dim() {
        return Err(Error::Data(format!(
            "feature dimensions disagree: source {} vs target {}",
            source.dim(),
            target.dim()
        )));
    }
    let class_count = *y_s.iter().max().expect("datasets are never empty");
    source.validate_labels(class_count)?;
    target.validate_labels(class_count)?;
    let m = source.dim();
    if cfg.subspace_dim > m {
        return Err(Error::Parameter(format!(
            "subspace dimension k = {} exceeds the feature dimension {m}",
            cfg.subspace_dim
        )));
    }

    let n_s = source.len();
    let n_t = target.len();
    let f_s = to_one_hot(y_s, class_count)?;
    // alpha_set = 1 loses novel-class rejection entirely: fall back to the
    // closed-set initialization (zero target labels, fully free anchors)
    let degenerate_osda = cfg.scenario == Scenario::Osda && cfg.alpha_set >= 1.0 - 1e-12;
    let init_scenario = if degenerate_osda {
        Scenario::Csda
    } else {
        cfg.scenario
    };

    let propagation_round = |graph: &SimilarityGraph| -> Result<SoftLabelMatrix> {
        let (f_init, anchors) = init_labels(&f_s, n_t, init_scenario, cfg.alpha_set)?;
        let propagated = propagate(graph, &f_init, &anchors)?;
        let normalized = column_normalize(&propagated)?;
        let filtered = filter_target_labels(&normalized, n_s, &cfg.filter)?;
        Ok(filtered.columns(n_s, n_t))
    };

    let pooled = hcat(source.features(), target.features());
    let graph = build_graph(&pooled, cfg.neighbor_count, SigmaMode::Auto)
        .map_err(|e| e.at_iteration(0))?;
    let mut target_labels = propagation_round(&graph).map_err(|e| e.at_iteration(0))?;
    let mut snapshots = vec![IterationSnapshot {
        iteration: 0,
        sigma: graph.sigma(),
        target_labels: target_labels.clone(),
        eigenvalues: None,
    }];

    let x_s = source.features();
    let x_t = target.features();
    let mut projections = None;
    for iteration in 1..=cfg.iterations {
        let round = || -> Result<(ProjectionPair, SoftLabelMatrix, f64)> {
            let (m1, m2) = if cfg.delta > 0.0 {
                let collapsed_s = collapse_shared_novel(&f_s);
                let collapsed_t = collapse_shared_novel(&target_labels);
                (
                    Some(mmd_shared(x_s, x_t, &collapsed_s, &collapsed_t)?),
                    Some(mmd_classwise(x_s, x_t, &f_s, &target_labels)?),
                )
            } else {
                (None, None)
            };
            let (n_sb, n_sw) = scatter_matrices(x_s, &f_s)?;
            let (n_tb, n_tw) = scatter_matrices(x_t, &target_labels)?;
            let v = build_v(cfg.beta, cfg.gamma, m)?;
            let losses = LossMatrices {
                m1,
                m2,
                v,
                n_sb,
                n_sw,
                n_tb,
                n_tw,
            };
            let proj =
                solve_projection(&losses, cfg.lambda, cfg.delta, cfg.subspace_dim, cfg.tie())?;
            let z_s = embed(x_s, &proj.a_s, cfg.normalize_embeddings);
            let z_t = embed(x_t, &proj.a_t, cfg.normalize_embeddings);
            let graph = build_graph(&hcat(&z_s, &z_t), cfg.neighbor_count, SigmaMode::Auto)?;
            let labels = propagation_round(&graph)?;
            Ok((proj, labels, graph.sigma()))
        };
        let (proj, labels, sigma) = round().map_err(|e| e.at_iteration(iteration))?;
        target_labels = labels;
        snapshots.push(IterationSnapshot {
            iteration,
            sigma,
            target_labels: target_labels.clone(),
            eigenvalues: Some(proj.eigenvalues.clone()),
        });
        projections = Some(proj);
    }

    Ok(AdaptationOutcome {
        class_count,
        projections: projections.expect("at least one iteration runs"),
        target_labels,
        snapshots,
    })
}
