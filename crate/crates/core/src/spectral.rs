//! Block collapse of rectangular coefficients and normalized spectral clustering.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SampleStream;

const RESTARTS: u64 = 20;
const LLOYD_MAX_ITER: usize = 300;

/// `C_f(i, j) = sum_{k in omega[i]} |C~(k, j)|`.
pub fn collapse(ctilde: &DMatrix<f64>, omega: &[Vec<usize>]) -> DMatrix<f64> {
    let n = ctilde.ncols();
    let mut cf = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = ctilde.column(j);
        for (i, set) in omega.iter().enumerate().take(n) {
            cf[(i, j)] = set.iter().map(|&k| col[k].abs()).sum();
        }
    }
    cf
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    /// Row-normalized spectral embedding, `n x p`.
    pub embedding: DMatrix<f64>,
    pub seed: u64,
    /// Samples with zero degree; their labels are arbitrary.
    pub flagged: Vec<usize>,
}

/// Ng–Jordan–Weiss spectral clustering of a symmetric nonnegative affinity.
pub fn spectral_cluster(af: &DMatrix<f64>, p: usize, seed: u64) -> Result<ClusteringResult> {
    let n = af.nrows();
    if af.ncols() != n {
        return Err(Error::InvalidParameter("affinity must be square".into()));
    }
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!("cannot form {p} clusters from {n} samples")));
    }
    if af.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter("affinity must be finite and nonnegative".into()));
    }
    let scale = if af.max() > 0.0 { af.max() } else { 1.0 };
    let degree: Vec<f64> = (0..n).map(|i| af.row(i).sum()).collect();
    let flagged: Vec<usize> = (0..n).filter(|&i| degree[i] <= 0.0).collect();
    let inv_sqrt: Vec<f64> =
        degree.iter().map(|&d| if d > 0.0 { (scale / d).sqrt() } else { 0.0 }).collect();

    let mut lap = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let w = (af[(i, j)] / scale) * inv_sqrt[i] * inv_sqrt[j];
            lap[(i, j)] = if i == j { 1.0 - w } else { -w };
        }
    }
    // Symmetrize against rounding before the eigensolver.
    let lap = (&lap + lap.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(lap, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut embedding = DMatrix::zeros(n, p);
    for (c, &k) in order.iter().take(p).enumerate() {
        embedding.set_column(c, &eig.eigenvectors.column(k));
    }
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }

    let labels = kmeans(&embedding, p, seed);
    Ok(ClusteringResult { labels, embedding, seed, flagged })
}

fn sq_dist(points: &DMatrix<f64>, i: usize, center: &[f64]) -> f64 {
    center.iter().enumerate().map(|(c, v)| (points[(i, c)] - v).powi(2)).sum()
}

/// k-means over the rows of `points` with seeded k-means++ restarts; the
/// lowest inertia wins, earlier restarts on ties.
pub(crate) fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let runs: Vec<(f64, Vec<usize>)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| lloyd(points, k, &mut SampleStream::derive(seed, r)))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.0 < runs[best].0 {
            best = r;
        }
    }
    runs.into_iter().nth(best).map(|r| r.1).unwrap_or_default()
}

fn lloyd(points: &DMatrix<f64>, k: usize, rng: &mut SampleStream) -> (f64, Vec<usize>) {
    let (n, dim) = points.shape();
    let row = |i: usize| -> Vec<f64> { points.row(i).iter().copied().collect() };

    let mut centers: Vec<Vec<f64>> = vec![row(rng.below(n))];
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.below(n)
        };
        let c = row(pick);
        for (i, best) in closest.iter_mut().enumerate() {
            *best = best.min(sq_dist(points, i, &c));
        }
        centers.push(c);
    }

    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    for _ in 0..LLOYD_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let (mut arg, mut best) = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(points, i, center);
                if d < best {
                    best = d;
                    arg = c;
                }
            }
            dist[i] = best;
            if labels[i] != arg {
                labels[i] = arg;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (c, s) in sums[labels[i]].iter_mut().enumerate() {
                *s += points[(i, c)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster with the point farthest from its center.
                let far = (0..n).fold(0, |a, i| if dist[i] > dist[a] { i } else { a });
                centers[c] = row(far);
                dist[far] = 0.0;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centers[labels[i]])).sum();
    (inertia, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::error_rate;

    fn blocks(sizes: &[usize], seed: u64) -> (DMatrix<f64>, Vec<usize>) {
        let n: usize = sizes.iter().sum();
        let mut truth = Vec::new();
        for (b, &s) in sizes.iter().enumerate() {
            truth.extend(std::iter::repeat(b).take(s));
        }
        let mut rng = SampleStream::new(seed);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                if truth[i] == truth[j] {
                    let w = 0.5 + rng.uniform();
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
            }
        }
        (a, truth)
    }

    #[test]
    fn collapse_without_augmentation_is_abs() {
        let mut rng = SampleStream::new(1);
        let c = DMatrix::from_fn(5, 5, |_, _| rng.standard_normal());
        let omega: Vec<Vec<usize>> = (0..5).map(|j| vec![j]).collect();
        assert_eq!(collapse(&c, &omega), c.abs());
    }

    #[test]
    fn collapse_stacked_identity() {
        let n = 4;
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(i, i)] = 1.0;
            c[(n + i, i)] = -1.0;
        }
        let omega: Vec<Vec<usize>> = (0..n).map(|j| vec![j, j + n]).collect();
        assert_eq!(collapse(&c, &omega), DMatrix::identity(n, n) * 2.0);
    }

    #[test]
    fn collapse_matches_index_loop() {
        let n = 6;
        let mut rng = SampleStream::new(77);
        let c = DMatrix::from_fn(3 * n, n, |_, _| rng.standard_normal());
        let omega: Vec<Vec<usize>> = (0..n).map(|j| vec![j, j + n, j + 2 * n]).collect();
        let cf = collapse(&c, &omega);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for block in 0..3 {
                    s += c[(i + block * n, j)].abs();
                }
                assert!((cf[(i, j)] - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn recovers_blocks() {
        let (a, truth) = blocks(&[7, 9, 5, 8], 3);
        let res = spectral_cluster(&a, 4, 11).unwrap();
        assert_eq!(error_rate(&truth, &res.labels).unwrap(), 0.0);
        assert!(res.flagged.is_empty());
    }

    #[test]
    fn uniform_block_gives_valid_labeling() {
        let a = DMatrix::from_element(10, 10, 1.0) - DMatrix::identity(10, 10);
        let res = spectral_cluster(&a, 2, 0).unwrap();
        assert_eq!(res.labels.len(), 10);
        assert!(res.labels.iter().all(|&l| l < 2));
    }

    #[test]
    fn zero_degree_rows_are_flagged() {
        let (mut a, _) = blocks(&[5, 5], 4);
        a = a.insert_row(10, 0.0).insert_column(10, 0.0);
        let res = spectral_cluster(&a, 2, 0).unwrap();
        assert_eq!(res.flagged, vec![10]);
        assert_eq!(res.labels.len(), 11);
    }

    #[test]
    fn scale_and_permutation_invariance() {
        let (a, truth) = blocks(&[6, 6, 6], 9);
        let base = spectral_cluster(&a, 3, 5).unwrap();
        let scaled = spectral_cluster(&(&a * 37.5), 3, 5).unwrap();
        assert_eq!(base.labels, scaled.labels);

        let n = truth.len();
        let perm: Vec<usize> = SampleStream::new(2).choose(&(0..n).collect::<Vec<_>>(), n);
        let ap = DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        let permuted = spectral_cluster(&ap, 3, 5).unwrap();
        let expect: Vec<usize> = perm.iter().map(|&i| base.labels[i]).collect();
        assert_eq!(error_rate(&expect, &permuted.labels).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_affinity() {
        assert!(spectral_cluster(&DMatrix::from_element(3, 3, -1.0), 2, 0).is_err());
        assert!(spectral_cluster(&DMatrix::zeros(3, 3), 4, 0).is_err());
    }
}
