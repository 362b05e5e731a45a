//! Shared domain types: data, dictionaries, coefficients, labels, solver settings.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column norms below this are treated as zero.
pub const NEAR_ZERO_NORM: f64 = 1e-12;

/// A `d x n` real matrix with one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    normalized: bool,
}

impl DataMatrix {
    /// Wraps `values`, checking shape (`d >= 1`, `n >= 2`) and finiteness.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::InvalidData("feature dimension must be at least 1".into()));
        }
        if values.ncols() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 samples, got {}",
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidData(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self { values, normalized: false })
    }

    /// Like [`DataMatrix::new`] but also verifies that every column has unit norm.
    pub fn new_normalized(values: DMatrix<f64>) -> Result<Self> {
        let mut x = Self::new(values)?;
        for (j, col) in x.values.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidData(format!("column {j} does not have unit norm")));
            }
        }
        x.normalized = true;
        Ok(x)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }
}

/// Scales every column to unit Euclidean norm. The input is left untouched.
pub fn normalize_columns(x: &DataMatrix) -> Result<DataMatrix> {
    let mut values = x.values.clone();
    normalize_in_place(&mut values)?;
    Ok(DataMatrix { values, normalized: true })
}

pub(crate) fn normalize_in_place(values: &mut DMatrix<f64>) -> Result<()> {
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm < NEAR_ZERO_NORM {
            return Err(Error::NearZeroColumn(j));
        }
        col /= norm;
    }
    Ok(())
}

/// `mu_base / max_{i != j} |x_i^T x_j|`.
pub fn effective_lambda(x: &DataMatrix, mu_base: f64) -> Result<f64> {
    if !(mu_base > 0.0) {
        return Err(Error::InvalidParameter(format!("mu_base must be positive, got {mu_base}")));
    }
    let gram = x.values.transpose() * &x.values;
    let n = gram.nrows();
    let mut max = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            max = max.max(gram[(i, j)].abs());
        }
    }
    if max < 1e-12 {
        return Err(Error::DegenerateGram(max));
    }
    Ok(mu_base / max)
}

/// Dictionary `[X | X_hat]` with provenance bookkeeping.
///
/// `omega[j]` lists `j` and every column derived from original sample `j`
/// alone. `parents[i]` lists the originals column `i` was generated from (the
/// nonzero pattern of row `i` of the parent map S); it is empty for originals.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDictionary {
    columns: DMatrix<f64>,
    n: usize,
    omega: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    strategy_tags: Vec<String>,
}

impl AugmentedDictionary {
    /// Dictionary without augmentation: `X` itself with `Omega(j) = {j}`.
    pub fn from_data(x: &DataMatrix) -> Self {
        let n = x.n_samples();
        Self {
            columns: x.values.clone(),
            n,
            omega: (0..n).map(|j| vec![j]).collect(),
            parents: vec![Vec::new(); n],
            strategy_tags: Vec::new(),
        }
    }

    /// Assembles a dictionary and checks the structural invariants.
    pub fn new(
        columns: DMatrix<f64>,
        n: usize,
        omega: Vec<Vec<usize>>,
        parents: Vec<Vec<usize>>,
        strategy_tags: Vec<String>,
    ) -> Result<Self> {
        let n_tilde = columns.ncols();
        if n > n_tilde || omega.len() != n || parents.len() != n_tilde {
            return Err(Error::InvalidData("inconsistent dictionary bookkeeping".into()));
        }
        if strategy_tags.len() != n_tilde - n {
            return Err(Error::InvalidData("one strategy tag per augmented column".into()));
        }
        for (j, set) in omega.iter().enumerate() {
            if !set.contains(&j) || set.iter().any(|&i| i >= n_tilde || (i < n && i != j)) {
                return Err(Error::InvalidData(format!("invalid exclusion set for sample {j}")));
            }
        }
        for (i, p) in parents.iter().enumerate() {
            if i < n && !p.is_empty() {
                return Err(Error::InvalidData(format!("original column {i} has parents")));
            }
            if i >= n && p.is_empty() {
                return Err(Error::InvalidData(format!("augmented column {i} has no parent")));
            }
            if p.iter().any(|&j| j >= n) {
                return Err(Error::InvalidData(format!("column {i} has an out-of-range parent")));
            }
        }
        Ok(Self { columns, n, omega, parents, strategy_tags })
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn n_original(&self) -> usize {
        self.n
    }

    pub fn n_tilde(&self) -> usize {
        self.columns.ncols()
    }

    pub fn omega(&self, j: usize) -> &[usize] {
        &self.omega[j]
    }

    pub fn omegas(&self) -> &[Vec<usize>] {
        &self.omega
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn strategy_tags(&self) -> &[String] {
        &self.strategy_tags
    }

    /// Augmented columns `i` with `S(i, j) = 1`.
    pub fn children(&self, j: usize) -> Vec<usize> {
        (self.n..self.n_tilde()).filter(|&i| self.parents[i].contains(&j)).collect()
    }

    /// Dense binary parent map `S` of shape `n_tilde x n`.
    pub fn parent_map(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n_tilde(), self.n);
        for (i, p) in self.parents.iter().enumerate() {
            for &j in p {
                s[(i, j)] = 1.0;
            }
        }
        s
    }

    /// The original samples as a data matrix.
    pub fn originals(&self) -> DMatrix<f64> {
        self.columns.columns(0, self.n).into_owned()
    }
}

/// Termination summary of an iterative coefficient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Largest iteration count over all subproblems.
    pub iterations: usize,
    /// Final `||A - C||_F^2`, summed over subproblems.
    pub residual: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn exact() -> Self {
        Self { iterations: 0, residual: 0.0, converged: true }
    }
}

/// Rectangular coefficients `C~` with their square collapse and affinity.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub ctilde: DMatrix<f64>,
    pub cf: DMatrix<f64>,
    pub af: DMatrix<f64>,
    pub report: SolveReport,
}

impl CoefficientMatrix {
    /// Builds `C_f` and `A_f = |C_f| + |C_f|^T` from `C~` using the exclusion sets.
    pub fn from_ctilde(ctilde: DMatrix<f64>, omega: &[Vec<usize>], report: SolveReport) -> Self {
        let cf = crate::spectral::collapse(&ctilde, omega);
        let af = affinity(&cf);
        Self { ctilde, cf, af, report }
    }

    /// Errors with [`Error::NoConvergence`] if the solver hit its iteration cap.
    pub fn ensure_converged(&self) -> Result<()> {
        if self.report.converged {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                residual: self.report.residual,
                iterations: self.report.iterations,
            })
        }
    }
}

/// `|C| + |C|^T`.
pub fn affinity(c: &DMatrix<f64>) -> DMatrix<f64> {
    let abs = c.abs();
    &abs + abs.transpose()
}

/// Given labels, selector and soft label estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelState {
    given: Vec<Option<usize>>,
    p: usize,
    n_tilde: usize,
    pub f: DMatrix<f64>,
}

impl LabelState {
    /// `given[j]` is the known cluster of sample `j` (if any); rows of `F`
    /// start at `Y~`.
    pub fn new(given: Vec<Option<usize>>, p: usize, n_tilde: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("cluster count must be positive".into()));
        }
        if n_tilde < given.len() {
            return Err(Error::InvalidParameter("dictionary smaller than label vector".into()));
        }
        if let Some(bad) = given.iter().flatten().find(|&&l| l >= p) {
            return Err(Error::InvalidParameter(format!("label {bad} out of range for p = {p}")));
        }
        let mut state = Self { given, p, n_tilde, f: DMatrix::zeros(0, 0) };
        state.f = state.ytilde();
        Ok(state)
    }

    pub fn unlabeled(n: usize, p: usize, n_tilde: usize) -> Result<Self> {
        Self::new(vec![None; n], p, n_tilde)
    }

    pub fn given(&self) -> &[Option<usize>] {
        &self.given
    }

    pub fn n_clusters(&self) -> usize {
        self.p
    }

    pub fn n_original(&self) -> usize {
        self.given.len()
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde
    }

    pub fn n_labeled(&self) -> usize {
        self.given.iter().flatten().count()
    }

    /// Labeled original indices of cluster `c`, ascending.
    pub fn labeled_in(&self, c: usize) -> Vec<usize> {
        (0..self.given.len()).filter(|&i| self.given[i] == Some(c)).collect()
    }

    /// Binary `n x p` indicator `Y`.
    pub fn y(&self) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.given.len(), self.p);
        for (i, l) in self.given.iter().enumerate() {
            if let Some(c) = l {
                y[(i, *c)] = 1.0;
            }
        }
        y
    }

    /// `Y` zero-padded to `n_tilde` rows.
    pub fn ytilde(&self) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.n_tilde, self.p);
        for (i, l) in self.given.iter().enumerate() {
            if let Some(c) = l {
                y[(i, *c)] = 1.0;
            }
        }
        y
    }

    /// Diagonal of the selector `U`.
    pub fn u_diag(&self) -> DVector<f64> {
        DVector::from_fn(self.n_tilde, |i, _| match self.given.get(i) {
            Some(Some(_)) => 1.0,
            _ => 0.0,
        })
    }

    /// Resizes the state for a dictionary with `n_tilde` columns, resetting `F` to `Y~`.
    pub fn with_n_tilde(&self, n_tilde: usize) -> Result<Self> {
        Self::new(self.given.clone(), self.p, n_tilde)
    }
}

/// Self-expressive regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularizer {
    /// `||C||_1` (SSC).
    L1,
    /// `||C||_F^2` (LSR).
    Fro,
    /// `||C||_*` (LRR).
    Nuc,
}

/// Which dictionary columns each sample may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    Full,
    Knn(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub regularizer: Regularizer,
    /// `lambda = mu_base / max_{i != j} |x_i^T x_j|`.
    pub mu_base: f64,
    pub lambda2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// ADMM penalty; `None` uses `rho = lambda`.
    pub rho: Option<f64>,
    pub neighborhood: Neighborhood,
    pub admm_eps: f64,
    pub admm_max_iter: usize,
    pub outer_max_iter: usize,
    pub outer_f_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            regularizer: Regularizer::L1,
            mu_base: 50.0,
            lambda2: 1.0,
            gamma1: 1000.0,
            gamma2: 1000.0,
            rho: None,
            neighborhood: Neighborhood::Full,
            admm_eps: 2e-4,
            admm_max_iter: 1000,
            outer_max_iter: 10,
            outer_f_tol: 1e-3,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")))
            }
        };
        positive("mu_base", self.mu_base)?;
        nonneg("lambda2", self.lambda2)?;
        nonneg("gamma1", self.gamma1)?;
        nonneg("gamma2", self.gamma2)?;
        if let Some(rho) = self.rho {
            positive("rho", rho)?;
        }
        positive("admm_eps", self.admm_eps)?;
        positive("outer_f_tol", self.outer_f_tol)?;
        if self.admm_max_iter == 0 || self.outer_max_iter == 0 {
            return Err(Error::InvalidParameter("iteration caps must be positive".into()));
        }
        if self.neighborhood == Neighborhood::Knn(0) {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        Ok(())
    }
}
