//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantity (run with `-- --nocapture` to see
//! them). Every tolerance is pinned in the assertions.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifcda::adaptation::{
    build_v, mmd_classwise, mmd_shared, run_ifcda, scatter_matrices, AdaptationConfig,
};
use ifcda::dataset::{to_one_hot, SoftLabelMatrix};
use ifcda::experiment::{run_experiment, write_artifacts, DataSource, RunConfig};
use ifcda::filter::{collapse_shared_novel, filter_label, FilterConfig};
use ifcda::graph::{build_graph, SigmaMode, SimilarityGraph};
use ifcda::metrics::compute_metrics;
use ifcda::propagation::{propagate, AnchorVector};
use ifcda::synthetic::{make_synthetic, SyntheticSpec};
use ifcda::Scenario;

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-30)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

fn random_soft_labels(rng: &mut ChaCha8Rng, c: usize, n: usize) -> SoftLabelMatrix {
    let mut probs = DMatrix::from_fn(c + 1, n, |_, _| rng.random::<f64>());
    for j in 0..n {
        let sum: f64 = probs.column(j).sum();
        for i in 0..c + 1 {
            probs[(i, j)] /= sum;
        }
    }
    SoftLabelMatrix::new(probs, c, true).unwrap()
}

fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols()))
        .copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

/// Independent dense solve of the anchored stationarity system with explicit
/// u_l = 1/alpha_l - 1 and alpha = 0 rows as hard constraints, factored by QR.
fn stationarity_oracle(
    graph: &SimilarityGraph,
    f: &SoftLabelMatrix,
    anchors: &AnchorVector,
) -> DMatrix<f64> {
    let n = graph.node_count();
    let (h, l) = graph.laplacian_parts();
    let g = f.probs().transpose();
    let mut system = DMatrix::zeros(n, n);
    let mut rhs = DMatrix::zeros(n, g.ncols());
    for i in 0..n {
        let a = anchors.values()[i];
        if a == 0.0 {
            system[(i, i)] = 1.0;
            for r in 0..g.ncols() {
                rhs[(i, r)] = g[(i, r)];
            }
        } else {
            let u = 1.0 / a - 1.0;
            for j in 0..n {
                system[(i, j)] = l[(i, j)];
            }
            system[(i, i)] += u * h[i];
            for r in 0..g.ncols() {
                rhs[(i, r)] = u * h[i] * g[(i, r)];
            }
        }
    }
    system.qr().solve(&rhs).expect("oracle system solvable")
}

#[test]
fn criterion_01_propagation_matches_direct_stationarity_solve() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mixed = [0.0, 1.0, 0.98, 0.5, 0.9, 1.0];
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = rng.random_range(20..=100);
        let x = DMatrix::from_fn(3, n, |_, _| rng.random::<f64>() * 6.0 - 3.0);
        let p = (n / 6).max(3);
        let graph = build_graph(&x, p, SigmaMode::Auto).unwrap();
        let c = 3usize;
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(1..=c + 1)).collect();
        let f = to_one_hot(&labels, c).unwrap();
        // anchors mix 0, 1 and 0.98 in every instance
        let alpha: Vec<f64> = (0..n)
            .map(|i| match i {
                0 | 1 | 2 => 0.0,
                3 => 1.0,
                4 => 0.98,
                _ => mixed[rng.random_range(0..mixed.len())],
            })
            .collect();
        let anchors = AnchorVector::from_values(alpha).unwrap();
        let ours = propagate(&graph, &f, &anchors).unwrap();
        let oracle = stationarity_oracle(&graph, &f, &anchors);
        let diff = (ours.probs().transpose() - &oracle).amax();
        assert!(diff <= 1e-8, "case {case}: max-norm {diff}");
        worst = worst.max(diff);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS — propagation oracle: 50 graphs, worst max-norm {worst:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_02_trace_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (m, ns, nt, c, k) = (
            rng.random_range(3..=6),
            rng.random_range(5..=12),
            rng.random_range(5..=12),
            rng.random_range(2..=4),
            rng.random_range(1..=3),
        );
        let x_s = random_matrix(&mut rng, m, ns);
        let x_t = random_matrix(&mut rng, m, nt);
        let f_s = random_soft_labels(&mut rng, c, ns);
        let f_t = random_soft_labels(&mut rng, c, nt);
        let a_s = random_matrix(&mut rng, m, k);
        let a_t = random_matrix(&mut rng, m, k);
        let p = vstack(&a_s, &a_t);
        let quad = |mat: &DMatrix<f64>| (p.transpose() * mat * &p).trace();

        // shared-mass MMD vs direct weighted-mean difference
        let c_s = collapse_shared_novel(&f_s);
        let c_t = collapse_shared_novel(&f_t);
        let m1 = mmd_shared(&x_s, &x_t, &c_s, &c_t).unwrap();
        let direct = |w_s: &DVector<f64>, w_t: &DVector<f64>| -> f64 {
            let u_s = &x_s * w_s / w_s.sum();
            let u_t = &x_t * w_t / w_t.sum();
            (a_s.transpose() * u_s - a_t.transpose() * u_t).norm_squared()
        };
        let e = rel_err(quad(&m1), direct(&c_s.shared_mass(), &c_t.shared_mass()));
        assert!(e <= 1e-9, "M1 identity: rel err {e}");
        worst = worst.max(e);

        // class-wise MMD vs the per-class sum
        let m2 = mmd_classwise(&x_s, &x_t, &f_s, &f_t).unwrap();
        let mut want = 0.0;
        for class in 0..c {
            want += direct(
                &f_s.probs().row(class).transpose(),
                &f_t.probs().row(class).transpose(),
            );
        }
        let e = rel_err(quad(&m2), want);
        assert!(e <= 1e-9, "M2 identity: rel err {e}");
        worst = worst.max(e);

        // scatters vs brute-force weighted means in the embedded space
        let (n_b, n_w) = scatter_matrices(&x_s, &f_s).unwrap();
        let z = a_s.transpose() * &x_s;
        let dim = z.nrows();
        let mut class_mass = vec![0.0; c];
        let mut class_mean = vec![DVector::<f64>::zeros(dim); c];
        for class in 0..c {
            for j in 0..ns {
                let w = f_s.probs()[(class, j)];
                class_mass[class] += w;
                class_mean[class] += w * z.column(j);
            }
        }
        let total: f64 = class_mass.iter().sum();
        let mut grand = DVector::<f64>::zeros(dim);
        for mean in &class_mean {
            grand += mean;
        }
        grand /= total;
        for class in 0..c {
            class_mean[class] /= class_mass[class];
        }
        let mut want_b = 0.0;
        let mut want_w = 0.0;
        for class in 0..c {
            want_b += class_mass[class] / total * (&grand - &class_mean[class]).norm_squared();
            for j in 0..ns {
                let w = f_s.probs()[(class, j)];
                want_w += w / total * (z.column(j) - &class_mean[class]).norm_squared();
            }
        }
        let e = rel_err((a_s.transpose() * &n_b * &a_s).trace(), want_b);
        assert!(e <= 1e-9, "N_b identity: rel err {e}");
        worst = worst.max(e);
        let e = rel_err((a_s.transpose() * &n_w * &a_s).trace(), want_w);
        assert!(e <= 1e-9, "N_w identity: rel err {e}");
        worst = worst.max(e);

        // V vs the Frobenius regularizer
        let beta = rng.random::<f64>() * 2.0;
        let gamma = rng.random::<f64>() * 2.0;
        let v = build_v(beta, gamma, m).unwrap();
        let want = beta * (&a_s - &a_t).norm_squared()
            + gamma * (a_s.norm_squared() + a_t.norm_squared());
        let e = rel_err(quad(&v), want);
        assert!(e <= 1e-9, "V identity: rel err {e}");
        worst = worst.max(e);
    }
    println!("criterion 02 PASS — trace identities over 100 draws, worst rel err {worst:.2e}");
}

#[test]
fn criterion_03_hard_label_reductions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let (m, ns, nt, c) = (5, 12, 9, 3);
        let x_s = random_matrix(&mut rng, m, ns);
        let x_t = random_matrix(&mut rng, m, nt);
        let y_s: Vec<usize> = (0..ns).map(|j| j % c + 1).collect();
        let y_t: Vec<usize> = (0..nt).map(|j| j % c + 1).collect();
        let f_s = to_one_hot(&y_s, c).unwrap();
        let f_t = to_one_hot(&y_t, c).unwrap();

        let mean = |x: &DMatrix<f64>, idx: &[usize]| -> DVector<f64> {
            let mut mu = DVector::zeros(x.nrows());
            for &j in idx {
                mu += x.column(j);
            }
            mu / idx.len() as f64
        };
        let outer = |u_s: &DVector<f64>, u_t: &DVector<f64>| -> DMatrix<f64> {
            let mut v = DVector::zeros(2 * m);
            v.rows_mut(0, m).copy_from(u_s);
            v.rows_mut(m, m).copy_from(&(-u_t));
            &v * v.transpose()
        };

        // uniform-weight construction
        let all_s: Vec<usize> = (0..ns).collect();
        let all_t: Vec<usize> = (0..nt).collect();
        let want_m1 = outer(&mean(&x_s, &all_s), &mean(&x_t, &all_t));
        let m1 = mmd_shared(
            &x_s,
            &x_t,
            &collapse_shared_novel(&f_s),
            &collapse_shared_novel(&f_t),
        )
        .unwrap();
        let e = (&m1 - &want_m1).norm() / want_m1.norm();
        assert!(e <= 1e-12, "case {case}: M1 reduction rel err {e}");
        worst = worst.max(e);

        // hard per-class subsets
        let mut want_m2 = DMatrix::zeros(2 * m, 2 * m);
        for class in 1..=c {
            let idx_s: Vec<usize> = (0..ns).filter(|&j| y_s[j] == class).collect();
            let idx_t: Vec<usize> = (0..nt).filter(|&j| y_t[j] == class).collect();
            want_m2 += outer(&mean(&x_s, &idx_s), &mean(&x_t, &idx_t));
        }
        let m2 = mmd_classwise(&x_s, &x_t, &f_s, &f_t).unwrap();
        let e = (&m2 - &want_m2).norm() / want_m2.norm();
        assert!(e <= 1e-12, "case {case}: M2 reduction rel err {e}");
        worst = worst.max(e);

        // classical partition scatters scaled by 1/n
        let (n_b, n_w) = scatter_matrices(&x_s, &f_s).unwrap();
        let mu = mean(&x_s, &all_s);
        let mut want_b = DMatrix::<f64>::zeros(m, m);
        let mut want_w = DMatrix::<f64>::zeros(m, m);
        for class in 1..=c {
            let idx: Vec<usize> = (0..ns).filter(|&j| y_s[j] == class).collect();
            let mu_c = mean(&x_s, &idx);
            let d = &mu - &mu_c;
            want_b += idx.len() as f64 * &d * d.transpose();
            for &j in &idx {
                let d = x_s.column(j) - &mu_c;
                want_w += &d * d.transpose();
            }
        }
        want_b /= ns as f64;
        want_w /= ns as f64;
        let e = (&n_b - &want_b).norm() / want_b.norm();
        assert!(e <= 1e-12, "case {case}: N_b reduction rel err {e}");
        worst = worst.max(e);
        let e = (&n_w - &want_w).norm() / want_w.norm();
        assert!(e <= 1e-12, "case {case}: N_w reduction rel err {e}");
        worst = worst.max(e);
    }
    println!("criterion 03 PASS — hard-label reductions on 20 instances, worst rel err {worst:.2e}");
}

#[test]
fn criterion_04_scatter_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let (m, n, c) = (
            rng.random_range(2..=6),
            rng.random_range(6..=20),
            rng.random_range(2..=4),
        );
        let x = random_matrix(&mut rng, m, n);
        let f = random_soft_labels(&mut rng, c, n);
        let (n_b, n_w) = scatter_matrices(&x, &f).unwrap();
        let mut total_mass = 0.0;
        let mut grand = DVector::<f64>::zeros(m);
        for class in 0..c {
            for j in 0..n {
                let w = f.probs()[(class, j)];
                total_mass += w;
                grand += w * x.column(j);
            }
        }
        grand /= total_mass;
        let mut total = DMatrix::<f64>::zeros(m, m);
        for class in 0..c {
            for j in 0..n {
                let w = f.probs()[(class, j)];
                let d = x.column(j) - &grand;
                total += w / total_mass * &d * d.transpose();
            }
        }
        let e = ((&n_b + &n_w) - &total).norm() / total.norm();
        assert!(e <= 1e-9, "case {case}: rel err {e}");
        worst = worst.max(e);
    }
    println!("criterion 04 PASS — scatter decomposition on 50 instances, worst rel err {worst:.2e}");
}

#[test]
fn criterion_05_closed_set_is_the_zero_novel_special_case() {
    // zero novel mass; the open-set path with the novel row structurally
    // zeroed (alpha_set = 1 degenerate case) must reproduce the closed-set
    // labels exactly
    let spec = SyntheticSpec {
        class_count: 3,
        novel_class_count: 0,
        source_samples_per_class: 25,
        target_samples_per_class: 25,
        dimension: 2,
        mean_shift: 1.0,
        rotation_angle: 30f64.to_radians(),
        noise_scale: 0.7,
        seed: 9,
    };
    let (source, target) = make_synthetic(&spec).unwrap();
    let mut base = AdaptationConfig::for_scenario(Scenario::Csda);
    base.subspace_dim = 2;
    base.neighbor_count = 10;
    base.iterations = 3;
    base.tie_projections = Some(false);

    let csda = run_ifcda(&source, &target, &base).unwrap();
    let mut osda_cfg = base.clone();
    osda_cfg.scenario = Scenario::Osda;
    osda_cfg.alpha_set = 1.0;
    let osda = run_ifcda(&source, &target, &osda_cfg).unwrap();

    let diff = (csda.target_labels.probs() - osda.target_labels.probs()).amax();
    assert!(diff <= 1e-12, "label matrices differ by {diff}");
    // the novel row stayed structurally zero throughout
    let c = csda.class_count;
    assert!(osda.target_labels.probs().row(c).amax() == 0.0);
    println!("criterion 05 PASS — degenerate open-set path equals closed-set path, max diff {diff:.2e}");
}

#[test]
fn criterion_06_filter_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for case in 0..1000 {
        let len = rng.random_range(2..=10);
        let keep = rng.random_range(1..=6usize);
        let mut raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-6).collect();
        // sprinkle in sharp columns so both branches fire often
        if case % 3 == 0 {
            raw[0] *= 20.0;
        }
        let sum: f64 = raw.iter().sum();
        let column = DVector::from_iterator(len, raw.iter().map(|v| v / sum));
        let cfg = FilterConfig { tau: 0.8, keep };
        let out = filter_label(&column, &cfg).unwrap();

        let out_sum: f64 = out.sum();
        assert!((out_sum - 1.0).abs() <= 1e-12, "case {case}: sum {out_sum}");
        let nonzeros = out.iter().filter(|&&v| v > 0.0).count();
        assert!(
            nonzeros <= keep.max(1),
            "case {case}: {nonzeros} nonzeros with N = {keep}"
        );

        let mut order: Vec<usize> = (0..len).collect();
        order.sort_unstable_by(|&a, &b| column[b].total_cmp(&column[a]).then(a.cmp(&b)));
        let max = column[order[0]];
        if max > 0.8 {
            // confident branch: exactly one-hot at the argmax
            assert_eq!(out[order[0]], 1.0, "case {case}: confident branch");
            assert_eq!(nonzeros, 1, "case {case}");
        } else {
            // ambiguous branch: renormalized top-N truncation
            let kept = keep.min(len);
            let mass: f64 = order[..kept].iter().map(|&i| column[i]).sum();
            for i in 0..len {
                let want = if order[..kept].contains(&i) {
                    column[i] / mass
                } else {
                    0.0
                };
                assert!(
                    (out[i] - want).abs() <= 1e-12,
                    "case {case}: entry {i} is {} want {want}",
                    out[i]
                );
            }
        }
        // support never escapes the top-N input indices
        for i in 0..len {
            if out[i] > 0.0 {
                assert!(
                    order[..keep.min(len)].contains(&i),
                    "case {case}: support escaped"
                );
            }
        }
    }
    println!("criterion 06 PASS — filter contract on 1000 random probability columns");
}

fn osda_trend_config(alpha_set: f64) -> RunConfig {
    let mut cfg = RunConfig::synthetic_default(Scenario::Osda);
    cfg.data = DataSource::Synthetic(SyntheticSpec {
        class_count: 3,
        novel_class_count: 1,
        source_samples_per_class: 40,
        target_samples_per_class: 40,
        dimension: 2,
        mean_shift: 1.0,
        rotation_angle: 30f64.to_radians(),
        noise_scale: 0.6,
        seed: 11,
    });
    cfg.subspace_dim = Some(2);
    cfg.adaptation.scenario = Scenario::Osda;
    cfg.adaptation.iterations = 3;
    cfg.adaptation.neighbor_count = 20;
    cfg.adaptation.alpha_set = alpha_set;
    cfg.adaptation.delta = 3.0;
    cfg.adaptation.lambda = 0.01;
    cfg.adaptation.gamma = 0.1;
    cfg.adaptation.seed = 11;
    cfg
}

#[test]
fn criterion_07_alpha_set_trend() {
    let start = Instant::now();
    // degenerate alpha_set = 1: novel rejection disabled entirely
    let degenerate = run_experiment(&osda_trend_config(1.0)).unwrap();
    let unk_at_one = degenerate.metrics.as_ref().unwrap().unk.unwrap();
    assert_eq!(unk_at_one, 0.0, "UNK must vanish at alpha_set = 1");

    let grid = [0.999, 0.98, 0.95, 0.90];
    let mut unks = Vec::new();
    let mut os_stars = Vec::new();
    for &alpha in &grid {
        let result = run_experiment(&osda_trend_config(alpha)).unwrap();
        let metrics = result.metrics.unwrap();
        unks.push(metrics.unk.unwrap());
        os_stars.push(metrics.os_star.unwrap());
    }
    for w in unks.windows(2) {
        assert!(
            w[1] >= w[0] - 1e-12,
            "UNK not non-decreasing as alpha_set falls: {unks:?}"
        );
    }
    for w in os_stars.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-12,
            "OS* not non-increasing as alpha_set falls: {os_stars:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 07 PASS — alpha_set {:?}: UNK {:?} rising, OS* {:?} falling, UNK(1.0) = 0, {elapsed:?}",
        grid, unks, os_stars
    );
}

#[test]
fn criterion_08_end_to_end_adaptation_gain() {
    let start = Instant::now();
    let mut cfg = RunConfig::synthetic_default(Scenario::Csda);
    cfg.data = DataSource::Synthetic(SyntheticSpec {
        class_count: 3,
        novel_class_count: 0,
        source_samples_per_class: 60,
        target_samples_per_class: 60,
        dimension: 2,
        mean_shift: 1.0,
        rotation_angle: 30f64.to_radians(),
        noise_scale: 0.5,
        seed: 3,
    });
    cfg.subspace_dim = Some(2);
    cfg.adaptation.iterations = 5;
    cfg.adaptation.neighbor_count = 20;
    cfg.adaptation.delta = 1.0;
    cfg.adaptation.lambda = 0.01;
    cfg.adaptation.gamma = 0.1;
    cfg.adaptation.seed = 3;

    let result = run_experiment(&cfg).unwrap();
    let trajectory: Vec<f64> = result
        .trajectory
        .iter()
        .map(|p| p.overall_accuracy)
        .collect();
    assert_eq!(trajectory.len(), 6, "T = 5 gives 6 trajectory points");
    for point in &result.trajectory {
        println!(
            "criterion 08 trajectory: iteration {} accuracy {:.4}",
            point.iteration, point.overall_accuracy
        );
    }
    let baseline = trajectory[0];
    let final_accuracy = *trajectory.last().unwrap();
    assert!(
        final_accuracy >= baseline + 0.10,
        "gain {:.4} below 10 points (baseline {baseline:.4}, final {final_accuracy:.4})",
        final_accuracy - baseline
    );
    // non-decreasing after iteration 2, within a 2-point tolerance
    for i in 2..trajectory.len() - 1 {
        assert!(
            trajectory[i + 1] >= trajectory[i] - 0.02,
            "trajectory decreases after iteration 2: {trajectory:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 08 PASS — baseline {baseline:.4}, final {final_accuracy:.4} (+{:.1} points), {elapsed:?}",
        (final_accuracy - baseline) * 100.0
    );
}

#[test]
fn criterion_09_metric_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let c = rng.random_range(2..=5);
        let n = rng.random_range(c + 1..=80.max(c + 1));
        let mut truth: Vec<usize> = (1..=c + 1).collect();
        let mut pred: Vec<usize> = (0..c + 1).map(|_| rng.random_range(1..=c + 1)).collect();
        for _ in truth.len()..n {
            truth.push(rng.random_range(1..=c + 1));
            pred.push(rng.random_range(1..=c + 1));
        }
        let report = compute_metrics(&pred, &truth, c, Scenario::Osda).unwrap();
        let os = report.os.unwrap();
        let identity = (c as f64 * report.os_star.unwrap() + report.unk.unwrap()) / (c + 1) as f64;
        let diff = (os - identity).abs();
        assert!(diff <= 1e-9, "case {case}: |OS - identity| = {diff}");
        worst = worst.max(diff);
    }
    println!("criterion 09 PASS — OS identity on 100 random instances, worst deviation {worst:.2e}");
}

#[test]
fn criterion_10_reports_are_byte_identical() {
    let mut cfg = osda_trend_config(0.95);
    cfg.adaptation.iterations = 2;
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let written_a = write_artifacts(&run_experiment(&cfg).unwrap(), dir_a.path()).unwrap();
    let written_b = write_artifacts(&run_experiment(&cfg).unwrap(), dir_b.path()).unwrap();
    assert_eq!(written_a.len(), written_b.len());
    for (a, b) in written_a.iter().zip(&written_b) {
        let bytes_a = std::fs::read(a).unwrap();
        let bytes_b = std::fs::read(b).unwrap();
        assert_eq!(
            bytes_a,
            bytes_b,
            "{} differs between identical runs",
            a.file_name().unwrap().to_string_lossy()
        );
        assert!(!bytes_a.is_empty());
    }
    println!(
        "criterion 10 PASS — {} artifacts byte-identical across two runs",
        written_a.len()
    );
}
