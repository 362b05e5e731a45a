//! Unsupervised self-expressive solvers: plain and augmented SSC / LSR / LRR,
//! over the full dictionary or per-sample nearest-neighbor dictionaries.

use nalgebra::{DMatrix, DVector};

use crate::admm::{self, build_problems, Support};
use crate::error::{Error, Result};
use crate::model::{
    effective_lambda, AugmentedDictionary, CoefficientMatrix, DataMatrix, Neighborhood,
    Regularizer, SolveReport, SolverConfig,
};

pub use crate::admm::AdmmState;

/// `max(0, |v| - t) * sign(v)`.
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Singular value thresholding: `U max(S - t, 0) V^T`.
pub fn svt(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(m.clone());
    }
    let svd = nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure)?;
    let u = svd.u.as_ref().ok_or(Error::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdFailure)?;
    let mut out = DMatrix::zeros(rows, cols);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - t;
        if shrunk > 0.0 {
            out += u.column(k) * v_t.row(k) * shrunk;
        }
    }
    Ok(out)
}

/// Indices of the `k` dictionary columns closest to `target`, skipping
/// `exclude`; ties go to the smaller index.
pub(crate) fn knn_indices(
    dict: &DMatrix<f64>,
    target: &DVector<f64>,
    exclude: &[usize],
    k: usize,
    column: usize,
) -> Result<Vec<usize>> {
    let n_tilde = dict.ncols();
    let mut skip = vec![false; n_tilde];
    for &i in exclude {
        skip[i] = true;
    }
    let mut dists: Vec<(f64, usize)> = (0..n_tilde)
        .filter(|&i| !skip[i])
        .map(|i| {
            let d: f64 = dict.column(i).iter().zip(target.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    if k > dists.len() {
        return Err(Error::KTooLarge { k, available: dists.len(), column });
    }
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dists.into_iter().take(k).map(|(_, i)| i).collect())
}

/// The `k` nearest dictionary columns to original sample `j`, excluding `Omega(j)`.
pub fn knn_select(dict: &AugmentedDictionary, j: usize, k: usize) -> Result<Vec<usize>> {
    let target = dict.columns().column(j).into_owned();
    knn_indices(dict.columns(), &target, dict.omega(j), k, j)
}

pub(crate) fn check_dictionary(x: &DataMatrix, dict: &AugmentedDictionary) -> Result<()> {
    let n = x.n_samples();
    if dict.n_original() != n || dict.columns().nrows() != x.dim() {
        return Err(Error::InvalidData("dictionary does not match the data matrix".into()));
    }
    if dict.columns().columns(0, n) != x.values().columns(0, n) {
        return Err(Error::InvalidData("dictionary must start with the original samples".into()));
    }
    Ok(())
}

pub(crate) fn penalty(cfg: &SolverConfig, lambda: f64) -> f64 {
    cfg.rho.unwrap_or(lambda)
}

/// Solves `min R(C) + (lambda/2)||X - X~ C||_F^2` subject to
/// `C(exclusions[j], j) = 0`, over the whole dictionary.
///
/// L1 runs column-separable ADMM with one shared factorization; FRO is the
/// closed-form ridge solution on the non-excluded rows; NUC runs the
/// nuclear-norm ADMM with a global SVT step.
pub fn solve_self_expressive_full(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    cfg: &SolverConfig,
    exclusions: &[Vec<usize>],
) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    check_dictionary(x, dict)?;
    if exclusions.len() != x.n_samples() {
        return Err(Error::InvalidParameter("one exclusion set per sample".into()));
    }
    let lambda = effective_lambda(x, cfg.mu_base)?;
    let (ctilde, report) = solve(x, dict, cfg, lambda, exclusions, Support::Shared, 2.0)?;
    Ok(CoefficientMatrix::from_ctilde(ctilde, dict.omegas(), report))
}

/// Augmented kNN self-expressive clustering: each sample is represented by its
/// `k` nearest dictionary columns outside `Omega(j)`.
///
/// `Neighborhood::Full` uses every admissible column.
pub fn solve_ak_sc(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    cfg: &SolverConfig,
) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    check_dictionary(x, dict)?;
    let lambda = effective_lambda(x, cfg.mu_base)?;
    let support = match cfg.neighborhood {
        Neighborhood::Knn(k) => Support::Nearest(k),
        Neighborhood::Full => Support::Restricted,
    };
    let (ctilde, report) = solve(x, dict, cfg, lambda, dict.omegas(), support, 1.0)?;
    Ok(CoefficientMatrix::from_ctilde(ctilde, dict.omegas(), report))
}

fn solve(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    cfg: &SolverConfig,
    lambda: f64,
    exclusions: &[Vec<usize>],
    l1_support: Support,
    ridge_shift: f64,
) -> Result<(DMatrix<f64>, SolveReport)> {
    let rho = penalty(cfg, lambda);
    let n_tilde = dict.n_tilde();
    let xv = x.values();
    let cols = dict.columns();
    match cfg.regularizer {
        Regularizer::L1 => {
            let problems = build_problems(cols, xv, lambda, rho, l1_support, exclusions)?;
            let base = 1.0 / rho;
            Ok(admm::solve_columns(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter, |_, p| {
                vec![base; p.rows.len()]
            }))
        }
        Regularizer::Fro => {
            let support = match l1_support {
                Support::Shared => Support::Restricted,
                s => s,
            };
            let problems = build_problems(cols, xv, lambda, ridge_shift, support, exclusions)?;
            Ok((admm::ridge_columns(&problems, n_tilde), SolveReport::exact()))
        }
        Regularizer::Nuc => {
            let support = match l1_support {
                Support::Shared => Support::Restricted,
                s => s,
            };
            let problems = build_problems(cols, xv, lambda, rho, support, exclusions)?;
            admm::nuclear_admm(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter)
        }
    }
}
