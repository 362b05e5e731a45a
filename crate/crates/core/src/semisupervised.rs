//! Semi-supervised clustering by alternating coefficient updates and label
//! propagation over the augmented graph.

use nalgebra::{DMatrix, DVector};

use crate::admm::{self, build_problems, Support};
use crate::augment::cannot_link_sets;
use crate::error::{Error, Result};
use crate::model::{
    effective_lambda, AugmentedDictionary, CoefficientMatrix, DataMatrix, LabelState, Neighborhood,
    Regularizer, SolveReport, SolverConfig,
};
use crate::unsupervised::{check_dictionary, penalty};

/// Symmetric nonnegative weights stored as an upper-triangular edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    size: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    fn new(size: usize) -> Self {
        Self { size, edges: Vec::new() }
    }

    fn push(&mut self, i: usize, j: usize, w: f64) {
        if w > 0.0 && i != j {
            self.edges.push((i.min(j), i.max(j), w));
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.size];
        for &(i, j, w) in &self.edges {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for &(i, j, w) in &self.edges {
            m[(i, j)] += w;
            m[(j, i)] += w;
        }
        m
    }

    /// Combinatorial Laplacian `D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.to_dense();
        for i in 0..self.size {
            let off: f64 = (0..self.size).filter(|&k| k != i).map(|k| -l[(i, k)]).sum();
            l[(i, i)] = off;
        }
        l
    }
}

/// `A~` and `S~` of the propagation step. The original-original block of `A~`
/// is `(|C11| + |C11|^T) / 2`, which has the same quadratic form as `|C11|`;
/// the original-augmented blocks carry `|C21| / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrices {
    pub a_tilde: WeightedGraph,
    pub s_tilde: WeightedGraph,
    /// Rows `0..n_original` are original samples, the rest augmented.
    pub n_original: usize,
}

impl PropagationMatrices {
    pub fn new(ctilde: &DMatrix<f64>, dict: &AugmentedDictionary) -> Result<Self> {
        let n = dict.n_original();
        let n_tilde = dict.n_tilde();
        if ctilde.shape() != (n_tilde, n) {
            return Err(Error::InvalidParameter("coefficient shape does not match the dictionary".into()));
        }
        let mut a = WeightedGraph::new(n_tilde);
        for j in 0..n {
            for i in 0..j {
                a.push(i, j, 0.5 * (ctilde[(i, j)].abs() + ctilde[(j, i)].abs()));
            }
            for i in n..n_tilde {
                a.push(i, j, 0.5 * ctilde[(i, j)].abs());
            }
        }
        let mut s = WeightedGraph::new(n_tilde);
        for i in n..n_tilde {
            for &p in dict.parents(i) {
                s.push(i, p, 0.5);
            }
        }
        Ok(Self { a_tilde: a, s_tilde: s, n_original: n })
    }

    pub fn l_a(&self) -> DMatrix<f64> {
        self.a_tilde.laplacian()
    }

    pub fn l_s(&self) -> DMatrix<f64> {
        self.s_tilde.laplacian()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Soft labels, `n_tilde x p`.
    pub f: DMatrix<f64>,
    /// Rows in components without any labeled sample, set to `1/p`.
    pub flagged: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Solves `(L_A + gamma1 U + gamma2 L_S) F = gamma1 U Y~`.
///
/// Augmented rows only touch original rows and carry no labels, so they are
/// eliminated exactly (Schur complement on a diagonal block); the reduced
/// Laplacian system over the originals is solved by subtraction-free
/// elimination. Augmented rows are then weighted averages of their neighbors.
pub fn update_f(
    prop: &PropagationMatrices,
    u_diag: &DVector<f64>,
    ytilde: &DMatrix<f64>,
    gamma1: f64,
    gamma2: f64,
) -> Result<Propagation> {
    let size = prop.a_tilde.size();
    let p = ytilde.ncols();
    if u_diag.len() != size || ytilde.nrows() != size || prop.s_tilde.size() != size {
        return Err(Error::InvalidParameter("propagation inputs disagree in size".into()));
    }
    if !(gamma1 > 0.0) || gamma2 < 0.0 {
        return Err(Error::SingularPropagation(format!("gamma1 = {gamma1}, gamma2 = {gamma2}")));
    }
    let labeled: Vec<bool> = u_diag.iter().map(|&u| u != 0.0).collect();
    if !labeled.iter().any(|&l| l) {
        return Err(Error::SingularPropagation("no labeled samples".into()));
    }

    // Combined weights W = A~ + gamma2 S~ as an adjacency list.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    let mut add = |i: usize, j: usize, w: f64| {
        if w > 0.0 {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
    };
    for &(i, j, w) in prop.a_tilde.edges() {
        add(i, j, w);
    }
    for &(i, j, w) in prop.s_tilde.edges() {
        add(i, j, gamma2 * w);
    }

    let mut parent: Vec<usize> = (0..size).collect();
    for i in 0..size {
        for &(j, _) in &adj[i] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut has_label = vec![false; size];
    for i in 0..size {
        if labeled[i] {
            let r = find(&mut parent, i);
            has_label[r] = true;
        }
    }
    let active: Vec<bool> = (0..size).map(|i| has_label[find(&mut parent, i)]).collect();
    let flagged: Vec<usize> = (0..size).filter(|&i| !active[i]).collect();

    // Augmented rows are unlabeled and only linked to originals; eliminate them.
    let n_orig = prop.n_original;
    if labeled[n_orig..].iter().any(|&l| l) {
        return Err(Error::InvalidParameter("augmented rows cannot carry labels".into()));
    }
    let kept: Vec<usize> = (0..n_orig).filter(|&i| active[i]).collect();
    let mut pos = vec![usize::MAX; size];
    for (k, &i) in kept.iter().enumerate() {
        pos[i] = k;
    }
    let m = kept.len();

    // Reduced weights between kept rows.
    let mut w = DMatrix::<f64>::zeros(m, m);
    // Accumulate the upper triangle only so the mirrored matrix is exactly symmetric.
    let mut bump = |a: usize, b: usize, v: f64| {
        let (r, c) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
        w[(r, c)] += v;
    };
    for &i in &kept {
        for &(j, wij) in &adj[i] {
            if j < n_orig && i < j {
                bump(i, j, wij);
            }
        }
    }
    let mut elim_degree = vec![0.0; size];
    for q in n_orig..size {
        if !active[q] {
            continue;
        }
        let d: f64 = adj[q].iter().map(|e| e.1).sum();
        if adj[q].iter().any(|&(j, _)| j >= n_orig) {
            return Err(Error::SingularPropagation("augmented rows must not be linked to each other".into()));
        }
        elim_degree[q] = d;
        for (x, &(a, wa)) in adj[q].iter().enumerate() {
            for &(b, wb) in &adj[q][x + 1..] {
                if a != b {
                    bump(a, b, wa * wb / d);
                }
            }
        }
    }
    for r in 0..m {
        for c in 0..r {
            w[(r, c)] = w[(c, r)];
        }
    }

    let excess: Vec<f64> = kept.iter().map(|&i| if labeled[i] { gamma1 } else { 0.0 }).collect();
    if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::SingularPropagation("propagation weights must be finite and nonnegative".into()));
    }
    let rhs = DMatrix::from_fn(m, p, |k, c| if labeled[kept[k]] { gamma1 * ytilde[(kept[k], c)] } else { 0.0 });
    let f_kept = m_matrix_solve(w, excess, rhs)?;

    let uniform = 1.0 / p as f64;
    let mut f = DMatrix::from_element(size, p, uniform);
    for (k, &i) in kept.iter().enumerate() {
        f.set_row(i, &f_kept.row(k));
    }
    for q in n_orig..size {
        if active[q] {
            let mut row = nalgebra::RowDVector::zeros(p);
            for &(j, wj) in &adj[q] {
                row += f_kept.row(pos[j]) * (wj / elim_degree[q]);
            }
            f.set_row(q, &row);
        }
    }
    Ok(Propagation { f, flagged })
}

/// Solves `(diag(W e + s) - W) X = B` for symmetric nonnegative `W` and excess
/// `s >= 0` by elimination that never subtracts: pivots are rebuilt from the
/// remaining off-diagonal mass plus the carried excess, so a nonnegative `B`
/// yields a nonnegative `X` and `X e` stays accurate to rounding.
fn m_matrix_solve(mut w: DMatrix<f64>, mut excess: Vec<f64>, mut b: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = w.nrows();
    let mut pivot = vec![0.0; m];
    for k in 0..m {
        let mass: f64 = (k + 1..m).map(|j| w[(k, j)]).sum();
        pivot[k] = mass + excess[k];
        if !(pivot[k] > 0.0) {
            return Err(Error::SingularPropagation(format!("zero pivot at reduced row {k}")));
        }
        for i in k + 1..m {
            let wik = w[(i, k)];
            if wik == 0.0 {
                continue;
            }
            let factor = wik / pivot[k];
            excess[i] += factor * excess[k];
            for j in k + 1..m {
                if j != i {
                    w[(i, j)] += factor * w[(k, j)];
                }
            }
            for c in 0..b.ncols() {
                b[(i, c)] += factor * b[(k, c)];
            }
        }
    }
    let mut x = DMatrix::zeros(m, b.ncols());
    for k in (0..m).rev() {
        for c in 0..b.ncols() {
            let tail: f64 = (k + 1..m).map(|j| w[(k, j)] * x[(j, c)]).sum();
            x[(k, c)] = (b[(k, c)] + tail) / pivot[k];
        }
    }
    Ok(x)
}

/// Coefficient update with `F` fixed: the l1 (or weighted) penalty on entry
/// `(i, j)` grows with `||F(i,:) - F(j,:)||^2` and `C(Phi_j, j) = 0`.
pub fn update_c_semisupervised(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    f: &DMatrix<f64>,
    cfg: &SolverConfig,
    phi: &[Vec<usize>],
) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    check_dictionary(x, dict)?;
    let lambda = effective_lambda(x, cfg.mu_base)?;
    update_c_with_lambda(x, dict, f, cfg, phi, lambda)
}

fn update_c_with_lambda(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    f: &DMatrix<f64>,
    cfg: &SolverConfig,
    phi: &[Vec<usize>],
    lambda: f64,
) -> Result<CoefficientMatrix> {
    let n = x.n_samples();
    let n_tilde = dict.n_tilde();
    if f.nrows() != n_tilde || phi.len() != n {
        return Err(Error::InvalidParameter("label matrix or cannot-link sets do not match the dictionary".into()));
    }
    let rho = penalty(cfg, lambda);
    let lambda2 = cfg.lambda2;
    let dist = |i: usize, j: usize| -> f64 { (f.row(i) - f.row(j)).norm_squared() };
    let label_free = lambda2 == 0.0 || (0..n).all(|j| (0..n_tilde).all(|i| dist(i, j) == 0.0));

    let cols = dict.columns();
    let xv = x.values();
    let restricted = match cfg.neighborhood {
        Neighborhood::Full => Support::Restricted,
        Neighborhood::Knn(k) => Support::Nearest(k),
    };
    let (ctilde, report): (DMatrix<f64>, SolveReport) = match cfg.regularizer {
        Regularizer::L1 => {
            let support = Support::from_neighborhood(cfg.neighborhood, Support::Shared);
            let problems = build_problems(cols, xv, lambda, rho, support, phi)?;
            admm::solve_columns(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter, |j, p| {
                p.rows.iter().map(|&i| (1.0 + lambda2 * dist(i, j)) / rho).collect()
            })
        }
        Regularizer::Fro if label_free => {
            let problems = build_problems(cols, xv, lambda, 2.0, restricted, phi)?;
            (admm::ridge_columns(&problems, n_tilde), SolveReport::exact())
        }
        Regularizer::Fro => {
            let support = Support::from_neighborhood(cfg.neighborhood, Support::Shared);
            let problems = build_problems(cols, xv, lambda, 2.0 + rho, support, phi)?;
            admm::solve_columns(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter, |j, p| {
                p.rows.iter().map(|&i| lambda2 * dist(i, j) / rho).collect()
            })
        }
        Regularizer::Nuc if label_free => {
            let problems = build_problems(cols, xv, lambda, rho, restricted, phi)?;
            admm::nuclear_admm(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter)?
        }
        Regularizer::Nuc => {
            let problems = build_problems(cols, xv, lambda, 2.0 * rho, restricted, phi)?;
            admm::nuclear_weighted_admm(&problems, n_tilde, rho, cfg.admm_eps, cfg.admm_max_iter, |i, j| {
                lambda2 * dist(i, j)
            })?
        }
    };
    Ok(CoefficientMatrix::from_ctilde(ctilde, dict.omegas(), report))
}

/// Row-wise argmax; ties go to the smaller column.
pub fn argmax_rows(f: &DMatrix<f64>, rows: usize) -> Vec<usize> {
    (0..rows)
        .map(|i| {
            let mut best = 0;
            for c in 1..f.ncols() {
                if f[(i, c)] > f[(i, best)] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `||F_i - F_{i-1}|| / ||F_{i-1}||`.
    pub f_change: f64,
    /// `||C_i - C_{i-1}|| / ||C_{i-1}||`; `None` on the first iteration.
    pub c_change: Option<f64>,
    pub labels: Vec<usize>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiOutcome {
    pub coefficients: CoefficientMatrix,
    pub f: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    /// Whether the relative F change fell below the tolerance.
    pub converged: bool,
    /// Rows of `F` reset to uniform in the last propagation.
    pub flagged: Vec<usize>,
}

/// Alternates coefficient and label updates, the first coefficient update being
/// label-free apart from the cannot-link constraints. Stops
/// when the relative change of `F` drops below `cfg.outer_f_tol` or after
/// `cfg.outer_max_iter` rounds. Final labels are the argmax of `F`'s first `n` rows.
pub fn run_as_sc(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    labels: &LabelState,
    cfg: &SolverConfig,
) -> Result<SemiOutcome> {
    cfg.validate()?;
    check_dictionary(x, dict)?;
    let n = x.n_samples();
    if labels.n_original() != n {
        return Err(Error::LengthMismatch(labels.n_original(), n));
    }
    let labels = labels.with_n_tilde(dict.n_tilde())?;
    if labels.n_labeled() == 0 {
        return Err(Error::SingularPropagation("no labeled samples".into()));
    }
    let lambda = effective_lambda(x, cfg.mu_base)?;
    let phi = cannot_link_sets(dict, &labels);
    let u = labels.u_diag();
    let ytilde = labels.ytilde();

    // The first coefficient update sees equal F rows, so its weights carry no
    // label information; Y~ is the reference for the first F change.
    let mut f = ytilde.clone();
    let mut f_for_c = DMatrix::zeros(ytilde.nrows(), ytilde.ncols());
    let mut previous_c: Option<DMatrix<f64>> = None;
    let mut trace = Vec::new();
    let mut last = None;
    let mut converged = false;
    for iteration in 1..=cfg.outer_max_iter {
        let coef = update_c_with_lambda(x, dict, &f_for_c, cfg, &phi, lambda)?;
        let prop = PropagationMatrices::new(&coef.ctilde, dict)?;
        let next = update_f(&prop, &u, &ytilde, cfg.gamma1, cfg.gamma2)?;
        let f_change = (&next.f - &f).norm() / f.norm();
        let c_change = previous_c.as_ref().map(|c| {
            let denom = c.norm();
            if denom > 0.0 {
                (&coef.ctilde - c).norm() / denom
            } else {
                f64::INFINITY
            }
        });
        trace.push(IterationRecord {
            iteration,
            f_change,
            c_change,
            labels: argmax_rows(&next.f, n),
            report: coef.report,
        });
        f = next.f;
        f_for_c.clone_from(&f);
        previous_c = Some(coef.ctilde.clone());
        last = Some((coef, next.flagged));
        if f_change < cfg.outer_f_tol {
            converged = true;
            break;
        }
    }
    let (coefficients, flagged) = last.ok_or_else(|| Error::InvalidParameter("outer_max_iter is zero".into()))?;
    Ok(SemiOutcome { coefficients, labels: argmax_rows(&f, n), f, trace, converged, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_columns;
    use crate::rng::SampleStream;
    use crate::unsupervised::solve_self_expressive_full;

    fn random_unit(d: usize, n: usize, seed: u64) -> DataMatrix {
        let mut s = SampleStream::new(seed);
        let v = DMatrix::from_fn(d, n, |_, _| s.standard_normal());
        normalize_columns(&DataMatrix::new(v).unwrap()).unwrap()
    }

    fn flip_dict(x: &DataMatrix) -> AugmentedDictionary {
        let n = x.n_samples();
        let mut cols = x.values().clone().resize_horizontally(2 * n, 0.0);
        for j in 0..n {
            let flipped: DVector<f64> = x.values().column(j).iter().rev().copied().collect::<Vec<_>>().into();
            cols.set_column(n + j, &flipped);
        }
        AugmentedDictionary::new(
            cols,
            n,
            (0..n).map(|j| vec![j, j + n]).collect(),
            (0..2 * n).map(|i| if i < n { vec![] } else { vec![i - n] }).collect(),
            vec!["flip".into(); n],
        )
        .unwrap()
    }

    /// Dense reference solve of the full system.
    fn dense_f(prop: &PropagationMatrices, u: &DVector<f64>, y: &DMatrix<f64>, g1: f64, g2: f64) -> DMatrix<f64> {
        let g = prop.l_a() + DMatrix::from_diagonal(&(u * g1)) + prop.l_s() * g2;
        let rhs = DMatrix::from_diagonal(&(u * g1)) * y;
        g.lu().solve(&rhs).unwrap()
    }

    #[test]
    fn laplacians_have_zero_row_sums() {
        let x = random_unit(5, 8, 1);
        let dict = flip_dict(&x);
        let mut rng = SampleStream::new(2);
        let c = DMatrix::from_fn(16, 8, |_, _| rng.standard_normal());
        let prop = PropagationMatrices::new(&c, &dict).unwrap();
        for l in [prop.l_a(), prop.l_s()] {
            assert!((&l - l.transpose()).amax() == 0.0);
            for row in l.row_iter() {
                assert!(row.sum().abs() < 1e-12);
            }
        }
        let a = prop.a_tilde.to_dense();
        assert!(a.iter().all(|&v| v >= 0.0));
        assert_eq!(a.view((8, 8), (8, 8)).amax(), 0.0);
        assert!((a[(9, 0)] - 0.5 * c[(9, 0)].abs()).abs() < 1e-15);
    }

    #[test]
    fn schur_solve_matches_dense() {
        let x = random_unit(5, 10, 3);
        let dict = flip_dict(&x);
        let mut rng = SampleStream::new(4);
        let c = DMatrix::from_fn(20, 10, |_, _| if rng.uniform() < 0.4 { rng.standard_normal() } else { 0.0 });
        let prop = PropagationMatrices::new(&c, &dict).unwrap();
        let labels = LabelState::new(
            (0..10).map(|i| if i < 3 { Some(i % 2) } else { None }).collect(),
            2,
            20,
        )
        .unwrap();
        let (u, y) = (labels.u_diag(), labels.ytilde());
        let got = update_f(&prop, &u, &y, 1000.0, 7.0).unwrap();
        if got.flagged.is_empty() {
            assert!((got.f - dense_f(&prop, &u, &y, 1000.0, 7.0)).amax() < 1e-9);
        }
    }

    #[test]
    fn consistent_forcing_and_isolated_rows() {
        let x = random_unit(4, 6, 5);
        let dict = AugmentedDictionary::from_data(&x);
        let c = DMatrix::from_fn(6, 6, |i, j| if i != j { 0.1 } else { 0.0 });
        let prop = PropagationMatrices::new(&c, &dict).unwrap();
        let labels = LabelState::new(vec![Some(0); 6], 1, 6).unwrap();
        let out = update_f(&prop, &labels.u_diag(), &labels.ytilde(), 1000.0, 1000.0).unwrap();
        assert!((out.f.clone() - DMatrix::from_element(6, 1, 1.0)).amax() < 1e-8);

        // No edges: labeled rows copy Y, unlabeled rows are uniform and flagged.
        let empty = PropagationMatrices::new(&DMatrix::zeros(6, 6), &dict).unwrap();
        let labels = LabelState::new(vec![Some(0), Some(1), None, None, Some(2), None], 3, 6).unwrap();
        let out = update_f(&empty, &labels.u_diag(), &labels.ytilde(), 1000.0, 1000.0).unwrap();
        assert_eq!(out.flagged, vec![2, 3, 5]);
        assert!((out.f.row(1) - labels.ytilde().row(1)).amax() < 1e-12);
        assert!((out.f.row(3).sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn propagation_requires_labels() {
        let x = random_unit(4, 6, 5);
        let dict = AugmentedDictionary::from_data(&x);
        let prop = PropagationMatrices::new(&DMatrix::zeros(6, 6), &dict).unwrap();
        let labels = LabelState::unlabeled(6, 2, 6).unwrap();
        assert!(matches!(
            update_f(&prop, &labels.u_diag(), &labels.ytilde(), 1000.0, 0.0),
            Err(Error::SingularPropagation(_))
        ));
        let labels = LabelState::new(vec![Some(0); 6], 2, 6).unwrap();
        assert!(update_f(&prop, &labels.u_diag(), &labels.ytilde(), 0.0, 0.0).is_err());
    }

    #[test]
    fn label_free_update_matches_unsupervised_bitwise() {
        let x = random_unit(6, 12, 6);
        let dict = flip_dict(&x);
        let none = LabelState::unlabeled(12, 3, 24).unwrap();
        let phi = cannot_link_sets(&dict, &none);
        for reg in [Regularizer::L1, Regularizer::Fro, Regularizer::Nuc] {
            let cfg = SolverConfig { regularizer: reg, gamma2: 0.0, ..Default::default() };
            let uniform = DMatrix::from_element(24, 3, 1.0 / 3.0);
            let semi = update_c_semisupervised(&x, &dict, &uniform, &cfg, &phi).unwrap();
            let unsup = solve_self_expressive_full(&x, &dict, &cfg, dict.omegas()).unwrap();
            assert_eq!(semi.ctilde, unsup.ctilde, "{reg:?}");
        }
    }

    #[test]
    fn different_rows_triple_threshold() {
        // With one-hot rows e1 and e2 and lambda2 = 1 the weight is 1 + 2 = 3.
        let f = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let w = 1.0 + 1.0 * (f.row(0) - f.row(1)).norm_squared();
        assert_eq!(w, 3.0);
    }

    #[test]
    fn argmax_ties_go_low() {
        let f = DMatrix::from_row_slice(2, 3, &[0.2, 0.4, 0.4, 0.5, 0.5, 0.0]);
        assert_eq!(argmax_rows(&f, 2), vec![1, 0]);
    }

    #[test]
    fn fully_labeled_run_returns_given_labels() {
        let bases = crate::synth::make_bases(30.0).unwrap();
        let (x, truth) = crate::synth::sample_union(&bases, 8, 2).unwrap();
        let dict = AugmentedDictionary::from_data(&x);
        let labels = LabelState::new(truth.iter().map(|&t| Some(t)).collect(), 3, 24).unwrap();
        let cfg = SolverConfig { gamma1: 1e6, ..Default::default() };
        let out = run_as_sc(&x, &dict, &labels, &cfg).unwrap();
        assert_eq!(out.labels, truth);
        assert!(!out.trace.is_empty() && out.trace[0].c_change.is_none());
    }
}
