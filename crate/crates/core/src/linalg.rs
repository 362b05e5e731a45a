//! Dense helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Factored `(lambda D^T D + tau I_m)` for a `d x m` dictionary `D`.
///
/// When `m > d` the `d x d` matrix `tau I_d + lambda D D^T` is factored instead
/// and solves go through the push-through identity
/// `(lambda D^T D + tau I)^{-1} = (I - lambda D^T (tau I + lambda D D^T)^{-1} D) / tau`.
#[derive(Debug, Clone)]
pub(crate) struct RidgeSolver {
    lambda: f64,
    tau: f64,
    route: Route,
}

#[derive(Debug, Clone)]
enum Route {
    Primal(Cholesky<f64, Dyn>),
    PushThrough { dict: DMatrix<f64>, chol: Cholesky<f64, Dyn> },
}

impl RidgeSolver {
    pub fn new(dict: &DMatrix<f64>, lambda: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || lambda < 0.0 {
            return Err(Error::SingularSystem(format!("lambda = {lambda}, tau = {tau}")));
        }
        let (d, m) = dict.shape();
        let route = if m <= d {
            let mut g = dict.tr_mul(dict) * lambda;
            for i in 0..m {
                g[(i, i)] += tau;
            }
            Route::Primal(
                Cholesky::new(g).ok_or_else(|| Error::SingularSystem("primal Gram".into()))?,
            )
        } else {
            let mut g = (dict * dict.transpose()) * lambda;
            for i in 0..d {
                g[(i, i)] += tau;
            }
            let chol =
                Cholesky::new(g).ok_or_else(|| Error::SingularSystem("dual Gram".into()))?;
            Route::PushThrough { dict: dict.clone(), chol }
        };
        Ok(Self { lambda, tau, route })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.route {
            Route::Primal(chol) => chol.solve(rhs),
            Route::PushThrough { dict, chol } => {
                let inner = chol.solve(&(dict * rhs));
                let mut out = rhs - dict.tr_mul(&inner) * self.lambda;
                out /= self.tau;
                out
            }
        }
    }
}

/// Columns of `m` listed in `idx`, in order.
pub(crate) fn gather_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleStream;

    fn check(d: usize, m: usize) {
        let mut s = SampleStream::new((d * 100 + m) as u64);
        let dict = DMatrix::from_fn(d, m, |_, _| s.standard_normal());
        let rhs = DVector::from_fn(m, |_, _| s.standard_normal());
        let (lambda, tau) = (7.5, 2.25);
        let solver = RidgeSolver::new(&dict, lambda, tau).unwrap();
        let x = solver.solve(&rhs);
        let mut g = dict.tr_mul(&dict) * lambda;
        for i in 0..m {
            g[(i, i)] += tau;
        }
        assert!((g * x - rhs).amax() < 1e-9);
    }

    #[test]
    fn both_routes_solve_the_system() {
        check(6, 4);
        check(6, 40);
        check(1, 1);
    }

    #[test]
    fn rejects_nonpositive_shift() {
        assert!(RidgeSolver::new(&DMatrix::zeros(2, 2), 1.0, 0.0).is_err());
    }
}
