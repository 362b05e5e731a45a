//! Clustering scores and structural diagnostics.

use nalgebra::DMatrix;
use pathfinding::prelude::{kuhn_munkres, Matrix};

use crate::error::{Error, Result};
use crate::model::LabelState;

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        Err(Error::LengthMismatch(a.len(), b.len()))
    } else {
        Ok(())
    }
}

fn contingency(truth: &[usize], pred: &[usize]) -> (Vec<Vec<usize>>, usize, usize) {
    let rows = truth.iter().max().map_or(0, |m| m + 1);
    let cols = pred.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; cols]; rows];
    for (&t, &p) in truth.iter().zip(pred) {
        table[t][p] += 1;
    }
    (table, rows, cols)
}

/// Percentage of misassigned samples under the best one-to-one matching of
/// predicted to true clusters.
pub fn error_rate(truth: &[usize], pred: &[usize]) -> Result<f64> {
    check_lengths(truth, pred)?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let (table, rows, cols) = contingency(truth, pred);
    let size = rows.max(cols);
    let weights = Matrix::from_fn(size, size, |(r, c)| {
        if r < rows && c < cols {
            table[r][c] as i64
        } else {
            0
        }
    });
    let (matched, _) = kuhn_munkres(&weights);
    Ok(100.0 * (1.0 - matched as f64 / truth.len() as f64))
}

/// Normalized mutual information `100 I / sqrt(H(truth) H(pred))`, natural logs.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    check_lengths(truth, pred)?;
    let n = truth.len() as f64;
    let (table, rows, cols) = contingency(truth, pred);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let col_sums: Vec<f64> =
        (0..cols).map(|c| table.iter().map(|r| r[c]).sum::<usize>() as f64).collect();
    let entropy = |sums: &[f64]| -> f64 {
        sums.iter().filter(|&&s| s > 0.0).map(|&s| -(s / n) * (s / n).ln()).sum()
    };
    let (ht, hp) = (entropy(&row_sums), entropy(&col_sums));
    if ht == 0.0 && hp == 0.0 {
        return Ok(100.0);
    }
    if ht == 0.0 || hp == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let nij = table[r][c] as f64;
            if nij > 0.0 {
                mi += nij / n * (n * nij / (row_sums[r] * col_sums[c])).ln();
            }
        }
    }
    Ok((100.0 * mi / (ht * hp).sqrt()).clamp(0.0, 100.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreservingRate {
    /// Mean same-cluster share of each column's mass.
    pub rate: f64,
    /// Columns with zero mass, counted as 0 in `rate`.
    pub empty_columns: Vec<usize>,
}

/// Mean over columns of the fraction of coefficient mass on same-cluster rows.
pub fn subspace_preserving_rate(cf: &DMatrix<f64>, truth: &[usize]) -> Result<PreservingRate> {
    if cf.nrows() != truth.len() || cf.ncols() != truth.len() {
        return Err(Error::LengthMismatch(cf.nrows(), truth.len()));
    }
    let n = truth.len();
    let mut total = 0.0;
    let mut empty_columns = Vec::new();
    for j in 0..n {
        let mass: f64 = cf.column(j).iter().map(|v| v.abs()).sum();
        if mass == 0.0 {
            empty_columns.push(j);
            continue;
        }
        let same: f64 = (0..n).filter(|&i| truth[i] == truth[j]).map(|i| cf[(i, j)].abs()).sum();
        total += same / mass;
    }
    Ok(PreservingRate { rate: total / n as f64, empty_columns })
}

/// Largest off-cluster mass fraction over the listed columns of an `n x n`
/// coefficient matrix; zero-mass columns contribute 0.
pub fn max_off_subspace_fraction(c: &DMatrix<f64>, truth: &[usize], columns: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for &j in columns {
        let mut off = 0.0;
        let mut mass = 0.0;
        for (i, &t) in truth.iter().enumerate() {
            let v = c[(i, j)].abs();
            mass += v;
            if t != truth[j] {
                off += v;
            }
        }
        if mass > 0.0 {
            worst = worst.max(off / mass);
        }
    }
    worst
}

/// `sum_{h=1..hops} ||W (.) A^h||_F`, where `W` marks pairs of labeled samples
/// with different labels.
pub fn path_strength(af: &DMatrix<f64>, labels: &LabelState, hops: usize) -> Result<f64> {
    let n = af.nrows();
    if af.ncols() != n || labels.n_original() != n {
        return Err(Error::LengthMismatch(n, labels.n_original()));
    }
    if hops == 0 {
        return Err(Error::InvalidParameter("hops must be at least 1".into()));
    }
    let given = labels.given();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| matches!((given[i], given[j]), (Some(a), Some(b)) if a != b))
        .collect();
    let mut power = af.clone();
    let mut total = 0.0;
    for h in 1..=hops {
        if h > 1 {
            power = &power * af;
        }
        total += pairs.iter().map(|&(i, j)| power[(i, j)].powi(2)).sum::<f64>().sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleStream;
    use proptest::prelude::*;

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    pub(crate) fn brute_error(truth: &[usize], pred: &[usize], p: usize) -> f64 {
        let best = permutations(p)
            .iter()
            .map(|perm| truth.iter().zip(pred).filter(|(t, q)| perm[**q] == **t).count())
            .max()
            .unwrap();
        100.0 * (1.0 - best as f64 / truth.len() as f64)
    }

    fn random_labels(n: usize, p: usize, rng: &mut SampleStream) -> Vec<usize> {
        (0..n).map(|_| rng.below(p)).collect()
    }

    #[test]
    fn error_rate_identity_and_renaming() {
        let t = vec![0, 0, 1, 1, 2, 2, 3];
        assert_eq!(error_rate(&t, &t).unwrap(), 0.0);
        let renamed: Vec<usize> = t.iter().map(|l| (l + 1) % 4).collect();
        assert_eq!(error_rate(&t, &renamed).unwrap(), 0.0);
        assert!(error_rate(&t, &t[1..]).is_err());
    }

    #[test]
    fn error_rate_matches_permutation_search() {
        let mut rng = SampleStream::new(404);
        for _ in 0..20 {
            let t = random_labels(40, 4, &mut rng);
            let p = random_labels(40, 4, &mut rng);
            assert_eq!(error_rate(&t, &p).unwrap(), brute_error(&t, &p, 4));
        }
    }

    #[test]
    fn nmi_cases() {
        let t = vec![0, 0, 1, 1, 2, 2];
        assert!((nmi(&t, &t).unwrap() - 100.0).abs() < 1e-12);
        // Balanced checkerboard: the prediction is independent of the truth.
        let a = vec![0, 0, 1, 1];
        let b = vec![0, 1, 0, 1];
        assert!(nmi(&a, &b).unwrap().abs() < 1e-10);
        assert_eq!(nmi(&[0, 0, 0], &[1, 1, 1]).unwrap(), 100.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn nmi_matches_contingency_oracle() {
        let mut rng = SampleStream::new(12);
        let t = random_labels(30, 3, &mut rng);
        let p = random_labels(30, 3, &mut rng);
        let n = 30.0;
        let mut joint = [[0.0f64; 3]; 3];
        for (a, b) in t.iter().zip(&p) {
            joint[*a][*b] += 1.0 / n;
        }
        let pa: Vec<f64> = (0..3).map(|a| joint[a].iter().sum()).collect();
        let pb: Vec<f64> = (0..3).map(|b| (0..3).map(|a| joint[a][b]).sum()).collect();
        let h = |v: &[f64]| -> f64 { v.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum() };
        let mut i = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                if joint[a][b] > 0.0 {
                    i += joint[a][b] * (joint[a][b] / (pa[a] * pb[b])).ln();
                }
            }
        }
        let expect = 100.0 * i / (h(&pa) * h(&pb)).sqrt();
        assert!((nmi(&t, &p).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn preserving_rate_cases() {
        let truth = vec![0, 0, 1, 1];
        let mut block = DMatrix::zeros(4, 4);
        block[(1, 0)] = 1.0;
        block[(0, 1)] = 2.0;
        block[(3, 2)] = 0.5;
        block[(2, 3)] = 0.1;
        assert_eq!(subspace_preserving_rate(&block, &truth).unwrap().rate, 1.0);
        let cross = DMatrix::from_fn(4, 4, |i, j| if truth[i] != truth[j] { 1.0 } else { 0.0 });
        assert_eq!(subspace_preserving_rate(&cross, &truth).unwrap().rate, 0.0);
        let mut partial = block.clone();
        partial.set_column(3, &nalgebra::DVector::zeros(4));
        let r = subspace_preserving_rate(&partial, &truth).unwrap();
        assert_eq!(r.empty_columns, vec![3]);
        assert_eq!(r.rate, 0.75);
    }

    #[test]
    fn preserving_rate_matches_double_loop() {
        let mut rng = SampleStream::new(8);
        let n = 9;
        let truth: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let cf = DMatrix::from_fn(n, n, |_, _| rng.uniform());
        let mut acc = 0.0;
        for j in 0..n {
            let (mut same, mut all) = (0.0, 0.0);
            for i in 0..n {
                all += cf[(i, j)];
                if truth[i] == truth[j] {
                    same += cf[(i, j)];
                }
            }
            acc += same / all;
        }
        let got = subspace_preserving_rate(&cf, &truth).unwrap().rate;
        assert!((got - acc / n as f64).abs() < 1e-14);
    }

    #[test]
    fn path_strength_cases() {
        let labels = LabelState::new(vec![Some(0), Some(1), None], 2, 3).unwrap();
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 1)] = 0.4;
        a[(1, 0)] = 0.4;
        let s = path_strength(&a, &labels, 1).unwrap();
        assert!((s - 2f64.sqrt() * 0.4).abs() < 1e-15);

        let block = LabelState::new(vec![Some(0), Some(0), Some(1), Some(1)], 2, 4).unwrap();
        let mut b = DMatrix::zeros(4, 4);
        b[(0, 1)] = 1.0;
        b[(1, 0)] = 1.0;
        b[(2, 3)] = 3.0;
        b[(3, 2)] = 3.0;
        assert_eq!(path_strength(&b, &block, 5).unwrap(), 0.0);
    }

    #[test]
    fn path_strength_matches_naive_powers() {
        let mut rng = SampleStream::new(31);
        let n = 8;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                if rng.uniform() < 0.4 {
                    let w = rng.uniform();
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
            }
        }
        let given: Vec<Option<usize>> =
            (0..n).map(|i| if i % 3 == 2 { None } else { Some(i % 2) }).collect();
        let labels = LabelState::new(given.clone(), 2, n).unwrap();
        let mut expect = 0.0;
        for h in 1..=5u32 {
            let mut p = DMatrix::identity(n, n);
            for _ in 0..h {
                p = naive_mul(&p, &a);
            }
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (given[i], given[j]) {
                        if x != y {
                            s += p[(i, j)] * p[(i, j)];
                        }
                    }
                }
            }
            expect += f64::sqrt(s);
        }
        assert!((path_strength(&a, &labels, 5).unwrap() - expect).abs() < 1e-10);
    }

    fn naive_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum())
    }

    proptest! {
        #[test]
        fn scores_are_symmetric_and_bounded(seed in any::<u64>(), p in 2usize..6) {
            let mut rng = SampleStream::new(seed);
            let t = random_labels(25, p, &mut rng);
            let q = random_labels(25, p, &mut rng);
            let e = error_rate(&t, &q).unwrap();
            prop_assert!((0.0..=100.0).contains(&e));
            prop_assert_eq!(e, error_rate(&q, &t).unwrap());
            prop_assert!(e <= brute_error(&t, &q, p) + 1e-12);
            let m = nmi(&t, &q).unwrap();
            prop_assert!((0.0..=100.0).contains(&m));
            prop_assert!((m - nmi(&q, &t).unwrap()).abs() < 1e-10);
        }
    }
}
