//! p-nearest-neighbor Gaussian similarity graph over the pooled
//! source+target samples, with degree and Laplacian derivations.
//!
//! An edge (i, j) exists iff i is among the p nearest neighbors of j or j is
//! among the p nearest of i (Euclidean distance, self excluded). Edge weights
//! are `exp(-||x_i - x_j||^2 / sigma^2)`. Distances are computed exactly by
//! brute force: pooled sample counts stay in the low thousands, and exact
//! computation keeps builds deterministic.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Bandwidth selection for the Gaussian edge weights. `Auto` uses the median
/// Euclidean distance over retained edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaMode {
    Auto,
    Fixed(f64),
}

/// Symmetric nonnegative affinity graph with positive node degrees.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    /// Per-node neighbor lists sorted by index; (neighbor, weight). The lists
    /// are symmetric: j appears in i's list iff i appears in j's.
    neighbors: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    sigma: f64,
}

/// Build the symmetric-OR p-NN graph. Ties in the neighbor ranking break
/// toward the lower sample index.
pub fn build_graph(x: &DMatrix<f64>, p: usize, sigma_mode: SigmaMode) -> Result<SimilarityGraph> {
    let n = x.ncols();
    if p == 0 {
        return Err(Error::Parameter("neighbor count p must be at least 1".into()));
    }
    if p >= n {
        return Err(Error::Parameter(format!(
            "neighbor count p = {p} must be smaller than the sample count {n}"
        )));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite feature value {v}")));
    }
    if let SigmaMode::Fixed(s) = sigma_mode {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Parameter(format!("sigma must be positive, got {s}")));
        }
    }

    // p nearest neighbors of every node, with squared distances.
    let nearest: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.column(i);
            let mut dist: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2 = (xi - x.column(j)).norm_squared();
                    (j, d2)
                })
                .collect();
            dist.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            dist.truncate(p);
            dist
        })
        .collect();

    // Symmetric-OR union; the map keys (min, max) deduplicate directions.
    let mut edge_d2: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, nn) in nearest.iter().enumerate() {
        for &(j, d2) in nn {
            let key = (i.min(j), i.max(j));
            edge_d2.entry(key).or_insert(d2);
        }
    }

    let sigma = match sigma_mode {
        SigmaMode::Fixed(s) => s,
        SigmaMode::Auto => {
            let mut dists: Vec<f64> = edge_d2.values().map(|d2| d2.sqrt()).collect();
            dists.sort_unstable_by(f64::total_cmp);
            let mid = dists.len() / 2;
            let median = if dists.len() % 2 == 1 {
                dists[mid]
            } else {
                0.5 * (dists[mid - 1] + dists[mid])
            };
            if median > 0.0 {
                median
            } else {
                // all retained edges join duplicate points; fall back to the
                // smallest positive distance, or 1 when there is none
                dists
                    .iter()
                    .copied()
                    .find(|d| *d > 0.0)
                    .unwrap_or(1.0)
            }
        }
    };

    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &d2) in &edge_d2 {
        let w = (-d2 / (sigma * sigma)).exp();
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
    }
    for list in &mut neighbors {
        list.sort_unstable_by_key(|&(j, _)| j);
    }
    let degrees: Vec<f64> = neighbors
        .iter()
        .map(|list| list.iter().map(|&(_, w)| w).sum())
        .collect();

    Ok(SimilarityGraph {
        neighbors,
        degrees,
        sigma,
    })
}

impl SimilarityGraph {
    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Dense affinity matrix W.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut w = DMatrix::zeros(n, n);
        for (i, list) in self.neighbors.iter().enumerate() {
            for &(j, wij) in list {
                w[(i, j)] = wij;
            }
        }
        w
    }

    /// Degree diagonal H and Laplacian L = H - W.
    pub fn laplacian_parts(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.node_count();
        let h = DVector::from_row_slice(&self.degrees);
        let mut l = DMatrix::zeros(n, n);
        for (i, list) in self.neighbors.iter().enumerate() {
            l[(i, i)] = self.degrees[i];
            for &(j, wij) in list {
                l[(i, j)] = -wij;
            }
        }
        (h, l)
    }

    /// Dump edges as "i j weight" lines, each undirected edge once with
    /// i < j, 0-based indices.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, list) in self.neighbors.iter().enumerate() {
            for &(j, w) in list {
                if i < j {
                    writeln!(out, "{i} {j} {w}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(seed: u64, m: usize, n: usize) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() * 4.0 - 2.0)
    }

    #[test]
    fn duplicate_points_get_unit_weight() {
        let x = DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let g = build_graph(&x, 1, SigmaMode::Auto).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 1.0)]);
        assert_eq!(g.neighbors(1), &[(0, 1.0)]);
    }

    #[test]
    fn collinear_points_follow_the_neighbor_rule() {
        // points at 0, 1, 3 on a line; p = 1, sigma = 1
        // nn(0) = {1}, nn(1) = {0}, nn(2) = {1}; OR-union edges (0,1), (1,2)
        let x = DMatrix::from_column_slice(1, 3, &[0.0, 1.0, 3.0]);
        // dimension 1 is fine for the graph itself
        let g = build_graph(&x, 1, SigmaMode::Fixed(1.0)).unwrap();
        let w = g.adjacency();
        assert!((w[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((w[(1, 2)] - (-4.0f64).exp()).abs() < 1e-15);
        assert_eq!(w[(0, 2)], 0.0);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn adjacency_is_symmetric_with_zero_diagonal() {
        let x = random_points(3, 4, 40);
        let g = build_graph(&x, 5, SigmaMode::Auto).unwrap();
        let w = g.adjacency();
        assert_eq!(w, w.transpose());
        for i in 0..40 {
            assert_eq!(w[(i, i)], 0.0);
            assert!(g.degrees()[i] > 0.0);
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let x = DMatrix::from_column_slice(1, 2, &[0.0, 1.0]);
        let g = build_graph(&x, 1, SigmaMode::Fixed(1.0)).unwrap();
        let (h, l) = g.laplacian_parts();
        let w01 = (-1.0f64).exp();
        assert!((h[0] - w01).abs() < 1e-15);
        assert!((l[(0, 0)] - w01).abs() < 1e-15);
        assert!((l[(0, 1)] + w01).abs() < 1e-15);
        // W = [[0,1],[1,0]] with sigma such that weight is exactly 1
        let x = DMatrix::from_column_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let g = build_graph(&x, 1, SigmaMode::Fixed(1.0)).unwrap();
        let (h, l) = g.laplacian_parts();
        assert_eq!(h.as_slice(), &[1.0, 1.0]);
        assert_eq!(l, DMatrix::from_column_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let x = random_points(9, 3, 25);
        let g = build_graph(&x, 4, SigmaMode::Auto).unwrap();
        let (_, l) = g.laplacian_parts();
        let ones = DVector::from_element(25, 1.0);
        assert!((&l * &ones).amax() < 1e-12);
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        // dense eigensolver oracle on a random 30-node graph
        let x = random_points(17, 5, 30);
        let g = build_graph(&x, 4, SigmaMode::Auto).unwrap();
        let (_, l) = g.laplacian_parts();
        let eig = nalgebra::SymmetricEigen::new(l);
        let min = eig.eigenvalues.min();
        assert!(min >= -1e-9, "min eigenvalue {min}");
    }

    #[test]
    fn weights_decrease_with_distance() {
        let x = random_points(23, 3, 30);
        let g = build_graph(&x, 5, SigmaMode::Fixed(1.5)).unwrap();
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for i in 0..30 {
            for &(j, w) in g.neighbors(i) {
                if i < j {
                    let d = (x.column(i) - x.column(j)).norm();
                    pairs.push((d, w));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for k in 1..pairs.len() {
            assert!(pairs[k].1 <= pairs[k - 1].1 + 1e-15);
        }
    }

    #[test]
    fn oversized_p_is_a_parameter_error() {
        let x = random_points(1, 2, 5);
        assert!(matches!(
            build_graph(&x, 5, SigmaMode::Auto),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_graph(&x, 0, SigmaMode::Auto),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_graph(&x, 2, SigmaMode::Fixed(0.0)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn edge_list_dump_lists_each_edge_once() {
        let x = DMatrix::from_column_slice(1, 3, &[0.0, 1.0, 3.0]);
        let g = build_graph(&x, 1, SigmaMode::Fixed(1.0)).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0 1 "));
        assert!(lines[1].starts_with("1 2 "));
    }
}
