//! Brute-force geometric diagnostics for small subspaces: dual points, subspace
//! incoherence and inradius. Every routine enumerates polytope vertices, so
//! inputs are limited to at most 4 dimensions and 15 points.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::DataMatrix;

pub const MAX_DIM: usize = 4;
pub const MAX_POINTS: usize = 15;
const FEAS_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of a subspace, one basis vector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        if k == 0 || k > basis.nrows() {
            return Err(Error::InvalidParameter("basis must have 1..=d columns".into()));
        }
        if (basis.tr_mul(&basis) - DMatrix::identity(k, k)).amax() > 1e-10 {
            return Err(Error::InvalidParameter("basis columns are not orthonormal".into()));
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis of the column span of `samples`.
    pub fn spanning(samples: &DMatrix<f64>) -> Result<Self> {
        let (q, _) = range_basis(samples)?;
        if q.ncols() == 0 {
            return Err(Error::DegenerateHull);
        }
        Ok(Self { basis: q })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Coordinates `U^T v`.
    pub fn coordinates(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        self.basis.tr_mul(v)
    }
}

/// Orthonormal basis of range(m) and its rank.
fn range_basis(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    if m.ncols() == 0 {
        return Ok((DMatrix::zeros(m.nrows(), 0), 0));
    }
    let svd = nalgebra::SVD::try_new(m.clone(), true, false, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure)?;
    let u = svd.u.ok_or(Error::SvdFailure)?;
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > RANK_TOL * top.max(1.0))
        .collect();
    let q = DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    Ok((q, keep.len()))
}

fn check_size(dim: usize, points: usize) -> Result<()> {
    if dim > MAX_DIM || points > MAX_POINTS {
        return Err(Error::TooLarge(format!(
            "{dim} dimensions and {points} points (limits {MAX_DIM} and {MAX_POINTS})"
        )));
    }
    Ok(())
}

/// Solves `m w = rhs` for a small square system, rejecting ill-conditioned ones.
fn solve_square(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let sv = m.singular_values();
    if sv.min() <= 1e-10 * sv.max().max(1.0) {
        return None;
    }
    m.clone().lu().solve(rhs)
}

fn push_unique(list: &mut Vec<DVector<f64>>, v: DVector<f64>) {
    if !list.iter().any(|u| (u - &v).amax() < 1e-9) {
        list.push(v);
    }
}

/// Vertices of `{w : |a_i^T w| <= 1}` (symmetric) or `{w : a_i^T w <= 1}`,
/// for the columns `a_i` of a full-row-rank `r x m` matrix.
fn polar_vertices(a: &DMatrix<f64>, symmetric: bool) -> Vec<DVector<f64>> {
    let (r, m) = a.shape();
    let mut out = Vec::new();
    for subset in (0..m).combinations(r) {
        let sys = DMatrix::from_fn(r, r, |row, col| a[(col, subset[row])]);
        let patterns: Vec<DVector<f64>> = if symmetric {
            (0..1usize << r)
                .map(|bits| DVector::from_fn(r, |i, _| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }))
                .collect()
        } else {
            vec![DVector::from_element(r, 1.0)]
        };
        for rhs in patterns {
            let Some(w) = solve_square(&sys, &rhs) else { break };
            let values = a.tr_mul(&w);
            let feasible = if symmetric {
                values.amax() <= 1.0 + FEAS_TOL
            } else {
                values.max() <= 1.0 + FEAS_TOL
            };
            if feasible {
                push_unique(&mut out, w);
            }
        }
    }
    out
}

/// True when `{w : a_i^T w <= 1}` contains a ray, i.e. the origin is not
/// interior to `conv(a_i)`.
fn polar_has_ray(a: &DMatrix<f64>) -> bool {
    let (r, m) = a.shape();
    if r == 1 {
        return a.max() <= 0.0 || a.min() >= 0.0;
    }
    for subset in (0..m).combinations(r - 1) {
        let sys = DMatrix::from_fn(r - 1, r, |row, col| a[(col, subset[row])]);
        let svd = sys.svd(false, true);
        let Some(vt) = svd.v_t else { continue };
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.resize(r, 0.0);
        // Only a one-dimensional null space gives an extreme ray candidate.
        let null_dims = sv.iter().filter(|&&s| s <= 1e-10).count();
        if null_dims != 1 {
            continue;
        }
        let k = (0..vt.nrows()).min_by(|&x, &y| sv[x].total_cmp(&sv[y])).unwrap_or(0);
        let u = vt.row(k).transpose();
        for dir in [u.clone(), -u] {
            if a.tr_mul(&dir).max() <= 1e-12 {
                return true;
            }
        }
    }
    false
}

/// Minimum-norm point of `conv(points)` by enumerating affinely independent
/// subsets of at most `max_size` points.
fn min_norm_in_hull(points: &[DVector<f64>], max_size: usize) -> DVector<f64> {
    let mut best = points[0].clone();
    let mut best_norm = best.norm_squared();
    for size in 1..=max_size.min(points.len()) {
        for subset in (0..points.len()).combinations(size) {
            let base = &points[subset[0]];
            let cand = if size == 1 {
                base.clone()
            } else {
                let e = DMatrix::from_fn(base.len(), size - 1, |r, c| {
                    points[subset[c + 1]][r] - base[r]
                });
                let Some(t) = solve_square(&e.tr_mul(&e), &(-e.tr_mul(base))) else { continue };
                if t.iter().any(|&v| v < -1e-12) || t.sum() > 1.0 + 1e-12 {
                    continue;
                }
                base + e * t
            };
            let norm = cand.norm_squared();
            if norm < best_norm - 1e-15 {
                best = cand;
                best_norm = norm;
            }
        }
    }
    best
}

/// Minimum-norm maximizer of `w^T target` subject to `||A^T w||_inf <= 1`.
///
/// The program is solved in the span of `A`; a target with a component
/// outside that span makes it unbounded.
pub fn dual_point(a: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != target.len() {
        return Err(Error::LengthMismatch(a.nrows(), target.len()));
    }
    let (q, rank) = range_basis(a)?;
    let local = q.tr_mul(target);
    let outside = (target - &q * &local).norm();
    if outside > 1e-10 * target.norm().max(1.0) {
        return Err(Error::UnboundedDual);
    }
    if rank == 0 || local.norm() == 0.0 {
        return Ok(DVector::zeros(a.nrows()));
    }
    check_size(rank, a.ncols())?;
    let coords = q.tr_mul(a);
    let vertices = polar_vertices(&coords, true);
    let values: Vec<f64> = vertices.iter().map(|v| v.dot(&local)).collect();
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * top.abs().max(1.0);
    let optimal: Vec<DVector<f64>> = vertices
        .into_iter()
        .zip(&values)
        .filter(|(_, &v)| v >= top - tol)
        .map(|(w, _)| w)
        .collect();
    let w = min_norm_in_hull(&optimal, rank);
    Ok(q * w)
}

/// Radius of the largest origin-centred ball inside `conv(points)` (or
/// `conv(+-points)` when `symmetric`): `1 / max ||w||` over the polar vertices.
/// Returns 0 when the origin is not interior.
pub fn inradius(points: &DMatrix<f64>, symmetric: bool) -> Result<f64> {
    let (d, m) = points.shape();
    check_size(d, m)?;
    let (_, rank) = range_basis(points)?;
    if rank < d || d == 0 {
        return Err(Error::DegenerateHull);
    }
    if !symmetric && polar_has_ray(points) {
        return Ok(0.0);
    }
    let far = polar_vertices(points, symmetric)
        .iter()
        .map(|w| w.norm())
        .fold(0.0f64, f64::max);
    if far == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / far)
}

fn members(truth: &[usize], label: usize) -> Vec<usize> {
    (0..truth.len()).filter(|&i| truth[i] == label).collect()
}

fn subspace_context(x: &DataMatrix, truth: &[usize], j: usize) -> Result<(SubspaceBasis, DMatrix<f64>)> {
    if truth.len() != x.n_samples() {
        return Err(Error::LengthMismatch(truth.len(), x.n_samples()));
    }
    if j >= truth.len() {
        return Err(Error::InvalidParameter(format!("sample index {j} out of range")));
    }
    let own = members(truth, truth[j]);
    let v = x.values();
    let basis = SubspaceBasis::spanning(&crate::linalg::gather_columns(v, &own))?;
    let others: Vec<usize> = own.into_iter().filter(|&i| i != j).collect();
    let projected = basis.coordinates(&crate::linalg::gather_columns(v, &others));
    Ok((basis, projected))
}

/// `max_{i != l} ||X^(i)^T V(:, j)||_inf` with `V(:, j)` the unit dual direction
/// of sample `j` inside its own subspace `l`.
pub fn subspace_incoherence(x: &DataMatrix, truth: &[usize], j: usize) -> Result<f64> {
    let (basis, projected) = subspace_context(x, truth, j)?;
    let target = basis.coordinates(&x.values().columns(j, 1).into_owned()).column(0).into_owned();
    let w = dual_point(&projected, &target)?;
    let norm = w.norm();
    if norm == 0.0 {
        return Err(Error::UnboundedDual);
    }
    let dir = basis.basis() * (w / norm);
    let v = x.values();
    let mut mu = 0.0f64;
    for (i, &label) in truth.iter().enumerate() {
        if label != truth[j] {
            mu = mu.max(v.column(i).dot(&dir).abs());
        }
    }
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreservingCheck {
    pub mu: f64,
    pub r: f64,
    pub satisfied: bool,
}

/// Evaluates the sufficient condition `mu(x_j) < r(P_{-j})`.
pub fn check_preserving_condition(x: &DataMatrix, truth: &[usize], j: usize) -> Result<PreservingCheck> {
    let (_, projected) = subspace_context(x, truth, j)?;
    let r = inradius(&projected, true)?;
    let mu = subspace_incoherence(x, truth, j)?;
    Ok(PreservingCheck { mu, r, satisfied: mu < r })
}
