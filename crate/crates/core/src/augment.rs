//! Dictionary augmentation: per-image transforms (flip, rotation, scaling) and
//! label-driven linear interpolation, plus cannot-link sets.
//!
//! Images are stored row-major in each column: pixel `(r, c)` is entry
//! `r * width + c`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{normalize_in_place, AugmentedDictionary, DataMatrix, LabelState};
use crate::rng::SampleStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageGeometry {
    pub height: usize,
    pub width: usize,
}

impl ImageGeometry {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("image sides must be positive".into()));
        }
        Ok(Self { height, width })
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.pixels() != dim {
            return Err(Error::GeometryMismatch { height: self.height, width: self.width, dim });
        }
        Ok(())
    }
}

/// Bilinear sample at fractional `(y, x)`; pixels outside the image count as 0.
fn bilinear(img: &[f64], geom: ImageGeometry, y: f64, x: f64) -> f64 {
    let (y0, x0) = (y.floor(), x.floor());
    let (fy, fx) = (y - y0, x - x0);
    let (h, w) = (geom.height as isize, geom.width as isize);
    let pixel = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h || c >= w {
            0.0
        } else {
            img[(r * w + c) as usize]
        }
    };
    let (r, c) = (y0 as isize, x0 as isize);
    let mut v = 0.0;
    for (dr, wy) in [(0, 1.0 - fy), (1, fy)] {
        for (dc, wx) in [(0, 1.0 - fx), (1, fx)] {
            let weight = wy * wx;
            if weight != 0.0 {
                v += weight * pixel(r + dr, c + dc);
            }
        }
    }
    v
}

/// Resamples every column with `source(r, c)` giving the input coordinate of
/// output pixel `(r, c)`.
fn resample<F>(x: &DMatrix<f64>, geom: ImageGeometry, source: F) -> DMatrix<f64>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let coords: Vec<(f64, f64)> = (0..geom.height)
        .flat_map(|r| (0..geom.width).map(move |c| (r as f64, c as f64)))
        .map(|(r, c)| source(r, c))
        .collect();
    let cols: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let img = x.column(j);
            let img = img.as_slice();
            coords.iter().map(|&(y, xx)| bilinear(img, geom, y, xx)).collect()
        })
        .collect();
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| cols[j][i])
}

fn center(geom: ImageGeometry) -> (f64, f64) {
    ((geom.height as f64 - 1.0) / 2.0, (geom.width as f64 - 1.0) / 2.0)
}

fn flip_matrix(x: &DMatrix<f64>, geom: ImageGeometry) -> DMatrix<f64> {
    let w = geom.width;
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let (r, c) = (i / w, i % w);
        x[(r * w + (w - 1 - c), j)]
    })
}

fn rotate_matrix(x: &DMatrix<f64>, geom: ImageGeometry, angle_deg: f64) -> DMatrix<f64> {
    let (cy, cx) = center(geom);
    let (s, c) = angle_deg.to_radians().sin_cos();
    resample(x, geom, |r, col| {
        let (dy, dx) = (r - cy, col - cx);
        (cy + s * dx + c * dy, cx + c * dx - s * dy)
    })
}

fn scale_matrix(x: &DMatrix<f64>, geom: ImageGeometry, factor: f64) -> DMatrix<f64> {
    let (cy, cx) = center(geom);
    resample(x, geom, |r, col| (cy + (r - cy) / factor, cx + (col - cx) / factor))
}

/// Mirrors every image about its vertical axis.
pub fn flip_lr(x: &DataMatrix, geom: ImageGeometry) -> Result<DataMatrix> {
    geom.check(x.dim())?;
    DataMatrix::new(flip_matrix(x.values(), geom))
}

/// Rotates every image about its centre (bilinear, zero fill).
pub fn rotate(x: &DataMatrix, geom: ImageGeometry, angle_deg: f64) -> Result<DataMatrix> {
    geom.check(x.dim())?;
    if !(angle_deg.abs() <= 180.0) {
        return Err(Error::InvalidParameter(format!("rotation angle {angle_deg} outside [-180, 180]")));
    }
    DataMatrix::new(rotate_matrix(x.values(), geom, angle_deg))
}

/// Zooms every image about its centre by `factor` (bilinear, zero fill).
pub fn scale(x: &DataMatrix, geom: ImageGeometry, factor: f64) -> Result<DataMatrix> {
    geom.check(x.dim())?;
    if !(0.5..=2.0).contains(&factor) {
        return Err(Error::InvalidParameter(format!("scale factor {factor} outside [0.5, 2]")));
    }
    DataMatrix::new(scale_matrix(x.values(), geom, factor))
}

/// An instance-level augmentation strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Flip,
    /// Angle in degrees drawn uniformly from `[min, max]` per image.
    Rotate { min: f64, max: f64 },
    /// Zoom factor drawn uniformly from `[min, max]` per image.
    Scale { min: f64, max: f64 },
}

/// A single transform applied to one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Flip,
    Rotate(f64),
    Scale(f64),
}

impl Transform {
    pub fn tag(&self) -> String {
        match self {
            Transform::Flip => "flip".into(),
            Transform::Rotate(a) => format!("rotate:{a:?}"),
            Transform::Scale(f) => format!("scale:{f:?}"),
        }
    }

    /// Inverse of [`Transform::tag`].
    pub fn parse(tag: &str) -> Option<Self> {
        match tag.split_once(':') {
            None if tag == "flip" => Some(Transform::Flip),
            Some(("rotate", v)) => v.parse().ok().map(Transform::Rotate),
            Some(("scale", v)) => v.parse().ok().map(Transform::Scale),
            _ => None,
        }
    }

    pub fn apply(&self, img: &DMatrix<f64>, geom: ImageGeometry) -> DMatrix<f64> {
        match *self {
            Transform::Flip => flip_matrix(img, geom),
            Transform::Rotate(a) => rotate_matrix(img, geom, a),
            Transform::Scale(f) => scale_matrix(img, geom, f),
        }
    }
}

/// Instance augmentation: block `k` of `X^` holds one transformed copy of every
/// original column, so `Omega(j) = {j + k n}`. `Flip` adds one block, each
/// ranged strategy adds `reps` blocks. Transform parameters are drawn from
/// `seed` up front, block by block and column by column.
pub fn random_instance_augment(
    x: &DataMatrix,
    geom: ImageGeometry,
    strategies: &[Strategy],
    reps: usize,
    seed: u64,
    normalize: bool,
) -> Result<AugmentedDictionary> {
    geom.check(x.dim())?;
    let n = x.n_samples();
    let mut rng = SampleStream::new(seed);
    let mut plan: Vec<Vec<Transform>> = Vec::new();
    for s in strategies {
        match *s {
            Strategy::Flip => plan.push(vec![Transform::Flip; n]),
            Strategy::Rotate { min, max } | Strategy::Scale { min, max } => {
                if reps == 0 || !(min <= max) {
                    return Err(Error::InvalidParameter("randomized strategies need reps >= 1 and min <= max".into()));
                }
                let (lo, hi) = if matches!(s, Strategy::Rotate { .. }) { (-180.0, 180.0) } else { (0.5, 2.0) };
                if min < lo || max > hi {
                    return Err(Error::InvalidParameter(format!("range [{min}, {max}] outside [{lo}, {hi}]")));
                }
                for _ in 0..reps {
                    let block = (0..n)
                        .map(|_| {
                            let v = rng.uniform_in(min, max);
                            if matches!(s, Strategy::Rotate { .. }) {
                                Transform::Rotate(v)
                            } else {
                                Transform::Scale(v)
                            }
                        })
                        .collect();
                    plan.push(block);
                }
            }
        }
    }

    let m = plan.len();
    let jobs: Vec<(usize, usize)> = (0..m).flat_map(|k| (0..n).map(move |j| (k, j))).collect();
    let cols: Vec<DMatrix<f64>> = jobs
        .par_iter()
        .map(|&(k, j)| plan[k][j].apply(&x.values().columns(j, 1).into_owned(), geom))
        .collect();
    let mut columns = DMatrix::zeros(x.dim(), n * (m + 1));
    columns.columns_mut(0, n).copy_from(x.values());
    let mut augmented = DMatrix::zeros(x.dim(), n * m);
    for (idx, col) in cols.iter().enumerate() {
        augmented.set_column(idx, &col.column(0));
    }
    if normalize {
        normalize_in_place(&mut augmented).map_err(|e| match e {
            Error::NearZeroColumn(i) => Error::NearZeroColumn(n + i),
            other => other,
        })?;
    }
    columns.columns_mut(n, n * m).copy_from(&augmented);

    let omega = (0..n).map(|j| (0..=m).map(|k| j + k * n).collect()).collect();
    let parents = (0..n * (m + 1)).map(|i| if i < n { vec![] } else { vec![i % n] }).collect();
    let tags = plan.iter().flat_map(|block| block.iter().map(Transform::tag)).collect();
    AugmentedDictionary::new(columns, n, omega, parents, tags)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Uniform `[0, 1]` weights rescaled to unit l1 norm.
    UniformL1,
    /// Standard normal weights.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSpec {
    /// Augmented samples per cluster.
    pub n_a: usize,
    /// Parents per augmented sample; `None` uses every labeled sample of the cluster.
    pub q: Option<usize>,
    pub weight_mode: WeightMode,
    pub seed: u64,
    pub normalize: bool,
}

/// Adds `n_a` random combinations of `q` labeled samples per cluster.
/// Augmented column `n + c n_a + k` belongs to cluster `c`; its parents are the
/// combined samples.
pub fn linear_interpolation_augment(
    x: &DataMatrix,
    labels: &LabelState,
    spec: &InterpolationSpec,
) -> Result<AugmentedDictionary> {
    let n = x.n_samples();
    if labels.n_original() != n {
        return Err(Error::LengthMismatch(labels.n_original(), n));
    }
    let p = labels.n_clusters();
    let pools: Vec<Vec<usize>> = (0..p).map(|c| labels.labeled_in(c)).collect();
    for (c, pool) in pools.iter().enumerate() {
        let q = spec.q.unwrap_or(pool.len());
        if q < 2 || pool.len() < q {
            return Err(Error::InsufficientLabels { cluster: c, available: pool.len(), required: q.max(2) });
        }
    }
    let mut rng = SampleStream::new(spec.seed);
    let total = n + p * spec.n_a;
    let mut columns = DMatrix::zeros(x.dim(), total);
    columns.columns_mut(0, n).copy_from(x.values());
    let mut parents = vec![Vec::new(); total];
    let mut tags = Vec::with_capacity(p * spec.n_a);
    for (c, pool) in pools.iter().enumerate() {
        let q = spec.q.unwrap_or(pool.len());
        for k in 0..spec.n_a {
            let chosen = rng.choose(pool, q);
            let mut weights: Vec<f64> = match spec.weight_mode {
                WeightMode::UniformL1 => (0..q).map(|_| rng.uniform()).collect(),
                WeightMode::Gaussian => (0..q).map(|_| rng.standard_normal()).collect(),
            };
            if spec.weight_mode == WeightMode::UniformL1 {
                let sum: f64 = weights.iter().sum();
                if sum > 0.0 {
                    weights.iter_mut().for_each(|w| *w /= sum);
                }
            }
            let mut col = DVector::zeros(x.dim());
            for (&parent, &w) in chosen.iter().zip(&weights) {
                col.axpy(w, &x.values().column(parent), 1.0);
            }
            let idx = n + c * spec.n_a + k;
            columns.set_column(idx, &col);
            let mut ps = chosen;
            ps.sort_unstable();
            parents[idx] = ps;
            tags.push(format!("interp:{c}"));
        }
    }
    if spec.normalize {
        let mut aug = columns.columns(n, total - n).into_owned();
        normalize_in_place(&mut aug).map_err(|e| match e {
            Error::NearZeroColumn(i) => Error::NearZeroColumn(n + i),
            other => other,
        })?;
        columns.columns_mut(n, total - n).copy_from(&aug);
    }
    let omega = (0..n).map(|j| vec![j]).collect();
    AugmentedDictionary::new(columns, n, omega, parents, tags)
}

/// `Phi_j`: `j`, every augmented column derived from `j`, and (when `j` is
/// labeled) every original sample carrying a different label. Sorted.
pub fn cannot_link_sets(dict: &AugmentedDictionary, labels: &LabelState) -> Vec<Vec<usize>> {
    let n = dict.n_original();
    let mut children = vec![Vec::new(); n];
    for i in n..dict.n_tilde() {
        for &p in dict.parents(i) {
            children[p].push(i);
        }
    }
    let given = labels.given();
    (0..n)
        .map(|j| {
            let mut set = vec![j];
            if let Some(Some(lj)) = given.get(j) {
                set.extend((0..n).filter(|&i| matches!(given.get(i), Some(Some(li)) if li != lj)));
            }
            set.extend(&children[j]);
            set.sort_unstable();
            set.dedup();
            set
        })
        .collect()
}
