//! Run configuration read from a TOML file. Every section is optional and
//! falls back to the defaults below.

use std::path::{Path, PathBuf};

use augsc::{Neighborhood, Regularizer, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dataset: Dataset,
    pub augmentation: Augmentation,
    pub solver: Solver,
    pub clustering: Clustering,
    pub output: Output,
    pub sweep: Sweep,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// The three-subspace generator.
    Synthetic,
    /// A CSV or binary matrix file, one sample per row.
    Matrix,
    /// An IDX image file.
    Idx,
    /// A directory of binary PGM images.
    Pgm,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Dataset {
    pub source: Source,
    pub path: Option<PathBuf>,
    /// Matrix format; guessed from the extension when absent.
    pub format: Option<Format>,
    /// Image `[height, width]`; the resize target for PGM directories.
    pub geometry: Option<[usize; 2]>,
    /// Ground-truth labels: a label file, or `"names"` to read `obj<k>__` file names.
    pub labels: Option<String>,
    pub max_samples: Option<usize>,
    pub normalize: bool,
    pub theta: f64,
    pub n_per: usize,
}

impl Default for Dataset {
    fn default() -> Self {
        Self {
            source: Source::Synthetic,
            path: None,
            format: None,
            geometry: None,
            labels: None,
            max_samples: None,
            normalize: true,
            theta: 10.0,
            n_per: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Flip,
    Rotate,
    Scale,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Weights {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Interpolation {
    /// Augmented samples per cluster.
    pub n_a: usize,
    /// Parents per sample; all labeled samples of the cluster when absent.
    pub q: Option<usize>,
    pub weights: Weights,
}

impl Default for Interpolation {
    fn default() -> Self {
        Self { n_a: 50, q: None, weights: Weights::Gaussian }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Augmentation {
    /// Image transforms; needs `dataset.geometry`.
    pub strategies: Vec<StrategyName>,
    pub reps: usize,
    pub rotate_range: [f64; 2],
    pub scale_range: [f64; 2],
    pub normalize: bool,
    /// Label-driven combinations (semi-supervised runs only).
    pub interpolation: Option<Interpolation>,
}

impl Default for Augmentation {
    fn default() -> Self {
        Self {
            strategies: Vec::new(),
            reps: 5,
            rotate_range: [-10.0, 10.0],
            scale_range: [0.9, 1.1],
            normalize: true,
            interpolation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RegName {
    L1,
    Fro,
    Nuc,
}

impl From<RegName> for Regularizer {
    fn from(r: RegName) -> Self {
        match r {
            RegName::L1 => Regularizer::L1,
            RegName::Fro => Regularizer::Fro,
            RegName::Nuc => Regularizer::Nuc,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Solver {
    pub regularizer: RegName,
    pub mu_base: f64,
    pub lambda2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub rho: Option<f64>,
    /// Nearest dictionary columns per sample; the whole dictionary when absent.
    pub knn: Option<usize>,
    pub admm_eps: f64,
    pub admm_max_iter: usize,
    pub outer_max_iter: usize,
    pub outer_f_tol: f64,
}

impl Default for Solver {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            regularizer: RegName::L1,
            mu_base: d.mu_base,
            lambda2: d.lambda2,
            gamma1: d.gamma1,
            gamma2: d.gamma2,
            rho: d.rho,
            knn: None,
            admm_eps: d.admm_eps,
            admm_max_iter: d.admm_max_iter,
            outer_max_iter: d.outer_max_iter,
            outer_f_tol: d.outer_f_tol,
        }
    }
}

impl Solver {
    pub fn to_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            regularizer: self.regularizer.into(),
            mu_base: self.mu_base,
            lambda2: self.lambda2,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            rho: self.rho,
            neighborhood: self.knn.map_or(Neighborhood::Full, Neighborhood::Knn),
            admm_eps: self.admm_eps,
            admm_max_iter: self.admm_max_iter,
            outer_max_iter: self.outer_max_iter,
            outer_f_tol: self.outer_f_tol,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Clustering {
    /// Number of clusters; taken from the ground truth when absent.
    pub p: Option<usize>,
    pub seed: u64,
    /// Revealed ground-truth labels per cluster for `semi`.
    pub labels_per_cluster: usize,
    /// Label file with `-1` for unlabeled samples; overrides `labels_per_cluster`.
    pub given: Option<PathBuf>,
}

impl Default for Clustering {
    fn default() -> Self {
        Self { p: None, seed: 0, labels_per_cluster: 4, given: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Dump {
    /// `A_f`, one row per sample.
    Affinity,
    /// `C~`, one row per represented sample.
    Coefficients,
    /// Soft labels `F` of a semi-supervised run, one row per dictionary column.
    Soft,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub directory: PathBuf,
    pub dumps: Vec<Dump>,
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Self { directory: PathBuf::from("augsc-out"), dumps: Vec::new(), format: Format::Csv }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub thetas: Vec<f64>,
    pub label_percents: Vec<usize>,
    pub augments: Vec<usize>,
    pub seeds: u64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            thetas: vec![10.0, 15.0, 20.0],
            label_percents: vec![0, 10, 20, 30, 40],
            augments: vec![0, 10, 25, 50, 100, 200],
            seeds: 10,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Stable text form used for hashing, without the output directory.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output.directory = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }
}
