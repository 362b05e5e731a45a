//! ADMM kernels shared by the unsupervised and semi-supervised coefficient solvers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{gather_columns, RidgeSolver};
use crate::model::{Neighborhood, SolveReport};
use crate::unsupervised::{knn_indices, soft_threshold, svt};

/// One column's self-expressive subproblem over a subset of dictionary rows.
pub(crate) struct ColumnProblem {
    /// Dictionary indices of the local coefficient vector.
    pub rows: Vec<usize>,
    /// Local positions forced to zero in the sparse variable.
    pub excluded: Vec<bool>,
    pub solver: Arc<RidgeSolver>,
    /// `lambda D_j^T x_j`.
    pub rhs: DVector<f64>,
}

/// How the per-column dictionaries are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Support {
    /// Every dictionary column; excluded entries are zeroed in the shrinkage step.
    /// One factorization is shared by all columns.
    Shared,
    /// Every non-excluded column, with a per-column factorization.
    Restricted,
    /// The `k` nearest non-excluded columns.
    Nearest(usize),
}

impl Support {
    pub fn from_neighborhood(n: Neighborhood, full: Support) -> Self {
        match n {
            Neighborhood::Full => full,
            Neighborhood::Knn(k) => Support::Nearest(k),
        }
    }
}

pub(crate) fn build_problems(
    dict: &DMatrix<f64>,
    x: &DMatrix<f64>,
    lambda: f64,
    tau: f64,
    support: Support,
    exclusions: &[Vec<usize>],
) -> Result<Vec<ColumnProblem>> {
    let n_tilde = dict.ncols();
    match support {
        Support::Shared => {
            let solver = Arc::new(RidgeSolver::new(dict, lambda, tau)?);
            let rhs_all = dict.tr_mul(x) * lambda;
            let rows: Vec<usize> = (0..n_tilde).collect();
            Ok(exclusions
                .iter()
                .enumerate()
                .map(|(j, excl)| {
                    let mut excluded = vec![false; n_tilde];
                    for &i in excl {
                        excluded[i] = true;
                    }
                    ColumnProblem {
                        rows: rows.clone(),
                        excluded,
                        solver: Arc::clone(&solver),
                        rhs: rhs_all.column(j).into_owned(),
                    }
                })
                .collect())
        }
        Support::Restricted | Support::Nearest(_) => exclusions
            .par_iter()
            .enumerate()
            .map(|(j, excl)| {
                let rows = match support {
                    Support::Nearest(k) => knn_indices(dict, &x.column(j).into_owned(), excl, k, j)?,
                    _ => {
                        let mut mask = vec![false; n_tilde];
                        for &i in excl {
                            mask[i] = true;
                        }
                        (0..n_tilde).filter(|&i| !mask[i]).collect()
                    }
                };
                let local = gather_columns(dict, &rows);
                let solver = Arc::new(RidgeSolver::new(&local, lambda, tau)?);
                let rhs = local.tr_mul(&x.column(j)) * lambda;
                Ok(ColumnProblem { excluded: vec![false; rows.len()], rows, solver, rhs })
            })
            .collect(),
    }
}

pub(crate) struct ColumnOutcome {
    pub coef: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// ADMM for `min sum_i w_i |a_i| + R_2(c) + (lambda/2)||x - D c||^2` with `a = c`,
/// where the `c`-step solves `(lambda D^T D + tau I) c = lambda D^T x + rho a - delta`.
/// `thresholds[i]` is `w_i / rho`. Stops once `||a - c||^2` and the change of
/// `a` both fall below `tol`; returns the last sparse iterate.
pub(crate) fn shrinkage_admm(
    problem: &ColumnProblem,
    thresholds: &[f64],
    rho: f64,
    tol: f64,
    max_iter: usize,
) -> ColumnOutcome {
    let m = problem.rows.len();
    let mut a = DVector::zeros(m);
    let mut delta = DVector::<f64>::zeros(m);
    let mut out = ColumnOutcome {
        coef: DVector::zeros(m),
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    let mut previous = DVector::zeros(m);
    for it in 1..=max_iter {
        let rhs = &problem.rhs + &a * rho - &delta;
        let c = problem.solver.solve(&rhs);
        previous.copy_from(&a);
        for i in 0..m {
            a[i] = if problem.excluded[i] {
                0.0
            } else {
                soft_threshold(c[i] + delta[i] / rho, thresholds[i])
            };
        }
        let diff = &c - &a;
        delta += &diff * rho;
        let residual = diff.norm_squared();
        out.iterations = it;
        out.residual = residual;
        if residual <= tol && (&a - &previous).norm_squared() <= tol {
            out.converged = true;
            break;
        }
    }
    out.coef = a;
    out
}

/// Runs `shrinkage_admm` on every column and scatters into an `n_tilde x n` matrix.
pub(crate) fn solve_columns<F>(
    problems: &[ColumnProblem],
    n_tilde: usize,
    rho: f64,
    eps: f64,
    max_iter: usize,
    thresholds: F,
) -> (DMatrix<f64>, SolveReport)
where
    F: Fn(usize, &ColumnProblem) -> Vec<f64> + Sync,
{
    let n = problems.len();
    let tol = eps / n as f64;
    let outcomes: Vec<ColumnOutcome> = problems
        .par_iter()
        .enumerate()
        .map(|(j, p)| shrinkage_admm(p, &thresholds(j, p), rho, tol, max_iter))
        .collect();
    let mut c = DMatrix::zeros(n_tilde, n);
    let mut report = SolveReport { iterations: 0, residual: 0.0, converged: true };
    for (j, (p, o)) in problems.iter().zip(&outcomes).enumerate() {
        for (&row, &v) in p.rows.iter().zip(o.coef.iter()) {
            c[(row, j)] = v;
        }
        report.iterations = report.iterations.max(o.iterations);
        report.residual += o.residual;
        report.converged &= o.converged;
    }
    (c, report)
}

/// Closed-form ridge coefficients `(lambda D^T D + tau I)^{-1} lambda D^T x` per column.
pub(crate) fn ridge_columns(problems: &[ColumnProblem], n_tilde: usize) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = problems.par_iter().map(|p| p.solver.solve(&p.rhs)).collect();
    let mut c = DMatrix::zeros(n_tilde, problems.len());
    for (j, (p, col)) in problems.iter().zip(cols).enumerate() {
        for (pos, (&row, &v)) in p.rows.iter().zip(col.iter()).enumerate() {
            if !p.excluded[pos] {
                c[(row, j)] = v;
            }
        }
    }
    c
}

/// Per-column least-squares step on the support, scattered into `out`;
/// entries off the support are set to zero.
fn column_solves<F>(problems: &[ColumnProblem], out: &mut DMatrix<f64>, extra_rhs: F)
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let cols: Vec<DVector<f64>> = problems
        .par_iter()
        .enumerate()
        .map(|(j, p)| {
            let rhs = DVector::from_fn(p.rows.len(), |i, _| p.rhs[i] + extra_rhs(p.rows[i], j));
            p.solver.solve(&rhs)
        })
        .collect();
    out.fill(0.0);
    for (j, (p, col)) in problems.iter().zip(cols).enumerate() {
        for (&row, &v) in p.rows.iter().zip(col.iter()) {
            out[(row, j)] = v;
        }
    }
}

/// Iterate of the two-block nuclear-norm ADMM.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub c: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub rho: f64,
    pub residual: f64,
}

/// Nuclear-norm ADMM with a per-column data-fit variable `A` restricted to each
/// column's support and a global SVT step:
/// `A(:,j) <- (lambda D^T D + rho I)^{-1}(lambda D^T x + rho C - Delta)`,
/// `C <- SVT(A + Delta/rho, 1/rho)`, `Delta <- Delta + rho (A - C)`.
/// Problems must be built with `tau = rho`. Stops when `||A - C||^2` and the
/// change of `C` are both below `eps`. Returns the last `A`.
pub(crate) fn nuclear_admm(
    problems: &[ColumnProblem],
    n_tilde: usize,
    rho: f64,
    eps: f64,
    max_iter: usize,
) -> Result<(DMatrix<f64>, SolveReport)> {
    let n = problems.len();
    let mut st = AdmmState {
        c: DMatrix::zeros(n_tilde, n),
        a: DMatrix::zeros(n_tilde, n),
        delta: DMatrix::zeros(n_tilde, n),
        rho,
        residual: f64::INFINITY,
    };
    let mut report = SolveReport { iterations: 0, residual: f64::INFINITY, converged: false };
    for it in 1..=max_iter {
        {
            let (c, delta) = (&st.c, &st.delta);
            column_solves(problems, &mut st.a, |r, j| rho * c[(r, j)] - delta[(r, j)]);
        }
        let next = svt(&(&st.a + &st.delta / rho), 1.0 / rho)?;
        let moved = (&next - &st.c).norm_squared();
        st.c = next;
        let diff = &st.a - &st.c;
        st.delta += &diff * rho;
        st.residual = diff.norm_squared();
        report.iterations = it;
        report.residual = st.residual;
        if st.residual <= eps && moved <= eps {
            report.converged = true;
            break;
        }
    }
    Ok((st.a, report))
}

/// Three-block nuclear-norm ADMM with a weighted sparse copy `A`:
/// `C <- SVT(Z - Delta1/rho, 1/rho)`, per-column
/// `(lambda D^T D + 2 rho I) Z = lambda D^T x + rho C + rho A + Delta1 + Delta2`,
/// `A <- T(Z - Delta2/rho, W/rho)` with exclusions zeroed, then both multiplier updates.
/// Problems must be built with `tau = 2 rho`. `weights(i, j)` gives `W(i, j)`.
/// Stops when the residual `||C - Z||^2 + ||A - Z||^2` and the change of `A`
/// are both below `eps`. Returns the last `A`.
pub(crate) fn nuclear_weighted_admm<W>(
    problems: &[ColumnProblem],
    n_tilde: usize,
    rho: f64,
    eps: f64,
    max_iter: usize,
    weights: W,
) -> Result<(DMatrix<f64>, SolveReport)>
where
    W: Fn(usize, usize) -> f64 + Sync,
{
    let n = problems.len();
    let mut c: DMatrix<f64>;
    let mut z = DMatrix::zeros(n_tilde, n);
    let mut a = DMatrix::<f64>::zeros(n_tilde, n);
    let mut d1 = DMatrix::<f64>::zeros(n_tilde, n);
    let mut d2 = DMatrix::<f64>::zeros(n_tilde, n);

    // Mask of entries the sparse copy may use.
    let mut allowed = DMatrix::from_element(n_tilde, n, false);
    for (j, p) in problems.iter().enumerate() {
        for (&row, &ex) in p.rows.iter().zip(&p.excluded) {
            allowed[(row, j)] = !ex;
        }
    }

    let mut report = SolveReport { iterations: 0, residual: f64::INFINITY, converged: false };
    for it in 1..=max_iter {
        c = svt(&(&z - &d1 / rho), 1.0 / rho)?;
        {
            let (c, a, d1, d2) = (&c, &a, &d1, &d2);
            column_solves(problems, &mut z, |r, j| {
                rho * c[(r, j)] + rho * a[(r, j)] + d1[(r, j)] + d2[(r, j)]
            });
        }
        let previous = a.clone();
        for j in 0..n {
            for i in 0..n_tilde {
                a[(i, j)] = if allowed[(i, j)] {
                    soft_threshold(z[(i, j)] - d2[(i, j)] / rho, weights(i, j) / rho)
                } else {
                    0.0
                };
            }
        }
        let cz = &c - &z;
        let az = &a - &z;
        d1 += &cz * rho;
        d2 += &az * rho;
        let residual = cz.norm_squared() + az.norm_squared();
        report.iterations = it;
        report.residual = residual;
        if residual <= eps && (&a - &previous).norm_squared() <= eps {
            report.converged = true;
            break;
        }
    }
    Ok((a, report))
}
