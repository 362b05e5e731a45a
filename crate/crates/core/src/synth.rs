//! Semi-random union-of-subspaces generator: three 3-dimensional subspaces of
//! R^6 whose mutual angle is set by `theta`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::SubspaceBasis;
use crate::model::{normalize_columns, DataMatrix};
use crate::rng::SampleStream;

/// `U1 = [cos I; sin I]`, `U2 = [cos I; -sin I]`, `U3 = [I; 0]` (each 6 x 3).
pub fn make_bases(theta_deg: f64) -> Result<[SubspaceBasis; 3]> {
    if !(theta_deg > 0.0 && theta_deg <= 90.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 90], got {theta_deg}")));
    }
    let t = theta_deg.to_radians();
    let (c, s) = (t.cos(), t.sin());
    let block = |top: f64, bottom: f64| {
        DMatrix::from_fn(6, 3, |r, k| {
            if r == k {
                top
            } else if r == k + 3 {
                bottom
            } else {
                0.0
            }
        })
    };
    Ok([
        SubspaceBasis::new(block(c, s))?,
        SubspaceBasis::new(block(c, -s))?,
        SubspaceBasis::new(block(1.0, 0.0))?,
    ])
}

/// `n_per` unit-norm samples `U g`, `g ~ N(0, I)`, from each basis in turn.
/// Returns the data and the subspace index of every column.
pub fn sample_union(bases: &[SubspaceBasis], n_per: usize, seed: u64) -> Result<(DataMatrix, Vec<usize>)> {
    if n_per == 0 || bases.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample and one subspace".into()));
    }
    let d = bases[0].basis().nrows();
    if bases.iter().any(|b| b.basis().nrows() != d) {
        return Err(Error::InvalidParameter("bases live in different ambient spaces".into()));
    }
    let mut rng = SampleStream::new(seed);
    let n = n_per * bases.len();
    let mut values = DMatrix::zeros(d, n);
    let mut truth = Vec::with_capacity(n);
    for (label, basis) in bases.iter().enumerate() {
        for k in 0..n_per {
            let g = nalgebra::DVector::from_fn(basis.dim(), |_, _| rng.standard_normal());
            values.set_column(label * n_per + k, &(basis.basis() * g));
            truth.push(label);
        }
    }
    let x = normalize_columns(&DataMatrix::new(values)?)?;
    Ok((x, truth))
}

/// Reveals `per_cluster` randomly chosen labels of every cluster.
pub fn pick_labels(truth: &[usize], per_cluster: usize, seed: u64) -> Result<Vec<Option<usize>>> {
    let p = truth.iter().max().map_or(0, |&m| m + 1);
    let mut rng = SampleStream::new(seed);
    let mut given = vec![None; truth.len()];
    for c in 0..p {
        let members: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == c).collect();
        if members.len() < per_cluster {
            return Err(Error::InsufficientLabels { cluster: c, available: members.len(), required: per_cluster });
        }
        for i in rng.choose(&members, per_cluster) {
            given[i] = Some(c);
        }
    }
    Ok(given)
}
