use std::path::{Path, PathBuf};

use augsc::augment::{
    linear_interpolation_augment, random_instance_augment, ImageGeometry, InterpolationSpec, Strategy, WeightMode,
};
use augsc::geometry::check_preserving_condition;
use augsc::ingest::{
    load_idx, load_idx_labels, load_labels, load_matrix, load_pgm_dir, pgm_files, write_matrix, MatrixFormat,
};
use augsc::metrics::{error_rate, nmi, subspace_preserving_rate};
use augsc::model::normalize_columns;
use augsc::rng::SampleStream;
use augsc::semisupervised::{run_as_sc, SemiOutcome};
use augsc::spectral::spectral_cluster;
use augsc::synth::{make_bases, pick_labels, sample_union};
use augsc::unsupervised::{solve_ak_sc, solve_self_expressive_full};
use augsc::{AugmentedDictionary, CoefficientMatrix, DataMatrix, LabelState, Neighborhood, SolverConfig};
use rayon::prelude::*;

use crate::config::{Config, Dump, Format, RegName, Source, StrategyName, Weights};
use crate::output::{io_err, mean_std, num, render_csv, OutputDir};
use crate::{CliError, Command, Common, SolverFlags};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth { common, theta, n_per } => {
            let mut cfg = prepare(&common)?;
            if let Some(t) = theta {
                cfg.dataset.theta = t;
            }
            if let Some(n) = n_per {
                cfg.dataset.n_per = n;
            }
            cfg.dataset.source = Source::Synthetic;
            synth(&cfg)
        }
        Command::Augment { common } => augment(&prepare(&common)?),
        Command::Cluster { common, solver } => {
            let mut cfg = prepare(&common)?;
            apply_solver_flags(&mut cfg, &solver)?;
            cluster(&cfg)
        }
        Command::Semi { common, solver, labels_per_cluster, given } => {
            let mut cfg = prepare(&common)?;
            apply_solver_flags(&mut cfg, &solver)?;
            if let Some(k) = labels_per_cluster {
                cfg.clustering.labels_per_cluster = k;
            }
            if given.is_some() {
                cfg.clustering.given = given;
            }
            semi(&cfg)
        }
        Command::Diag { common } => diag(&prepare(&common)?),
        Command::Eval { truth, pred, out } => eval(&truth, &pred, out.as_deref()),
        Command::Sweep { common, jobs, seeds, thetas, label_percents, augments } => {
            let mut cfg = prepare(&common)?;
            if let Some(s) = seeds {
                cfg.sweep.seeds = s;
            }
            if let Some(t) = thetas {
                cfg.sweep.thetas = t;
            }
            if let Some(l) = label_percents {
                cfg.sweep.label_percents = l;
            }
            if let Some(a) = augments {
                cfg.sweep.augments = a;
            }
            sweep(&cfg, jobs)
        }
    }
}

fn prepare(common: &Common) -> Result<Config, CliError> {
    let mut cfg = Config::load(common.config.as_deref())?;
    if let Some(out) = &common.out {
        cfg.output.directory.clone_from(out);
    }
    if let Some(seed) = common.seed {
        cfg.clustering.seed = seed;
    }
    Ok(cfg)
}

fn apply_solver_flags(cfg: &mut Config, flags: &SolverFlags) -> Result<(), CliError> {
    if let Some(r) = &flags.regularizer {
        cfg.solver.regularizer = match r.as_str() {
            "l1" => RegName::L1,
            "fro" => RegName::Fro,
            "nuc" => RegName::Nuc,
            other => return Err(CliError::Usage(format!("unknown regularizer {other:?}; use l1, fro or nuc"))),
        };
    }
    if flags.knn.is_some() {
        cfg.solver.knn = flags.knn;
    }
    if let Some(mu) = flags.mu {
        cfg.solver.mu_base = mu;
    }
    Ok(())
}

fn matrix_format(f: Format) -> MatrixFormat {
    match f {
        Format::Csv => MatrixFormat::Csv,
        Format::Bin => MatrixFormat::Bin,
    }
}

fn matrix_name(stem: &str, f: Format) -> String {
    match f {
        Format::Csv => format!("{stem}.csv"),
        Format::Bin => format!("{stem}.bin"),
    }
}

/// Reads labels either as `sample,label` CSV with a header or as one value per line.
pub fn read_label_file(path: &Path) -> Result<Vec<Option<usize>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    if !first.is_some_and(|l| l.starts_with("sample")) {
        return Ok(load_labels(path, None)?);
    }
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip_while(|(_, l)| !l.trim().starts_with("sample")).skip(1) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = line.split(',').nth(1).map(str::trim).unwrap_or("");
        let v: i64 = value
            .parse()
            .map_err(|_| CliError::Io(format!("{}: line {}: bad label {value:?}", path.display(), k + 1)))?;
        out.push(if v < 0 { None } else { Some(v as usize) });
    }
    Ok(out)
}

fn label_rows(labels: &[Option<usize>]) -> Vec<Vec<String>> {
    labels
        .iter()
        .enumerate()
        .map(|(j, l)| vec![j.to_string(), l.map_or("-1".into(), |v| v.to_string())])
        .collect()
}

fn complete(labels: Vec<Option<usize>>, what: &str) -> Result<Vec<usize>, CliError> {
    labels
        .into_iter()
        .enumerate()
        .map(|(j, l)| l.ok_or_else(|| CliError::Io(format!("{what}: sample {j} has no label"))))
        .collect()
}

/// Object index from names such as `obj7__12.pgm`.
fn object_id(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix("obj")?.split("__").next()?.parse().ok()
}

struct Loaded {
    x: DataMatrix,
    truth: Option<Vec<usize>>,
    geometry: Option<ImageGeometry>,
}

fn geometry(cfg: &Config) -> Result<Option<ImageGeometry>, CliError> {
    cfg.dataset.geometry.map(|[h, w]| ImageGeometry::new(h, w)).transpose().map_err(CliError::from)
}

fn load_dataset(cfg: &Config) -> Result<Loaded, CliError> {
    let ds = &cfg.dataset;
    let seed = cfg.clustering.seed;
    let need_path =
        || ds.path.clone().ok_or_else(|| CliError::Usage("dataset.path is required for this source".into()));
    let (x, mut truth, geom) = match ds.source {
        Source::Synthetic => {
            let (x, truth) = sample_union(&make_bases(ds.theta)?, ds.n_per, seed)?;
            (x, Some(truth), None)
        }
        Source::Matrix => {
            let path = need_path()?;
            let format = ds.format.map_or_else(|| MatrixFormat::from_path(&path), matrix_format);
            (load_matrix(&path, format)?, None, geometry(cfg)?)
        }
        Source::Idx => {
            let (x, g) = load_idx(&need_path()?)?;
            (x, None, Some(g))
        }
        Source::Pgm => {
            let dir = need_path()?;
            let g = geometry(cfg)?.ok_or_else(|| CliError::Usage("dataset.geometry is required for pgm".into()))?;
            let (x, g) = load_pgm_dir(&dir, g)?;
            let truth = if ds.labels.as_deref() == Some("names") {
                let ids: Option<Vec<usize>> = pgm_files(&dir)?.iter().map(|p| object_id(p)).collect();
                let ids = ids.ok_or_else(|| CliError::Io("file names do not follow obj<k>__<i>".into()))?;
                let mut distinct = ids.clone();
                distinct.sort_unstable();
                distinct.dedup();
                Some(ids.iter().map(|id| distinct.binary_search(id).unwrap()).collect())
            } else {
                None
            };
            (x, truth, Some(g))
        }
    };
    if truth.is_none() {
        if let Some(path) = ds.labels.as_deref() {
            let path = PathBuf::from(path);
            truth = Some(if ds.source == Source::Idx {
                load_idx_labels(&path)?
            } else {
                complete(read_label_file(&path)?, "ground truth")?
            });
        }
    }
    let mut x = x;
    if let Some(m) = ds.max_samples {
        if m < x.n_samples() {
            x = DataMatrix::new(x.values().columns(0, m).into_owned())?;
            if let Some(t) = truth.as_mut() {
                t.truncate(m);
            }
        }
    }
    if let Some(t) = &truth {
        if t.len() != x.n_samples() {
            return Err(augsc::Error::LengthMismatch(t.len(), x.n_samples()).into());
        }
    }
    if ds.normalize {
        x = normalize_columns(&x)?;
    }
    Ok(Loaded { x, truth, geometry: geom })
}

fn cluster_count(cfg: &Config, truth: Option<&[usize]>, given: Option<&[Option<usize>]>) -> Result<usize, CliError> {
    if let Some(p) = cfg.clustering.p {
        return Ok(p);
    }
    let from_truth = truth.and_then(|t| t.iter().max()).map(|m| m + 1);
    let from_given = given.and_then(|g| g.iter().flatten().max()).map(|m| m + 1);
    from_truth
        .or(from_given)
        .ok_or_else(|| CliError::Usage("clustering.p is required when no labels are available".into()))
}

fn instance_dictionary(cfg: &Config, data: &Loaded) -> Result<Option<AugmentedDictionary>, CliError> {
    let aug = &cfg.augmentation;
    if aug.strategies.is_empty() {
        return Ok(None);
    }
    let geom = data
        .geometry
        .ok_or_else(|| CliError::Usage("image augmentation needs dataset.geometry".into()))?;
    let strategies: Vec<Strategy> = aug
        .strategies
        .iter()
        .map(|s| match s {
            StrategyName::Flip => Strategy::Flip,
            StrategyName::Rotate => Strategy::Rotate { min: aug.rotate_range[0], max: aug.rotate_range[1] },
            StrategyName::Scale => Strategy::Scale { min: aug.scale_range[0], max: aug.scale_range[1] },
        })
        .collect();
    let seed = SampleStream::derive(cfg.clustering.seed, 2).next_u64();
    Ok(Some(random_instance_augment(&data.x, geom, &strategies, aug.reps, seed, aug.normalize)?))
}

fn interpolation_dictionary(
    cfg: &Config,
    x: &DataMatrix,
    labels: &LabelState,
    n_a: usize,
) -> Result<AugmentedDictionary, CliError> {
    let interp = cfg.augmentation.interpolation.clone().unwrap_or_default();
    let spec = InterpolationSpec {
        n_a,
        q: interp.q,
        weight_mode: match interp.weights {
            Weights::Gaussian => WeightMode::Gaussian,
            Weights::Uniform => WeightMode::UniformL1,
        },
        seed: SampleStream::derive(cfg.clustering.seed, 2).next_u64(),
        normalize: cfg.augmentation.normalize,
    };
    Ok(linear_interpolation_augment(x, labels, &spec)?)
}

fn solve_unsupervised(
    x: &DataMatrix,
    dict: &AugmentedDictionary,
    solver: &SolverConfig,
) -> Result<CoefficientMatrix, CliError> {
    Ok(match solver.neighborhood {
        Neighborhood::Full => solve_self_expressive_full(x, dict, solver, dict.omegas())?,
        Neighborhood::Knn(_) => solve_ak_sc(x, dict, solver)?,
    })
}

fn dump_matrices(
    out: &mut OutputDir,
    cfg: &Config,
    coef: &CoefficientMatrix,
    soft: Option<&augsc::semisupervised::SemiOutcome>,
) -> Result<(), CliError> {
    let f = cfg.output.format;
    for d in &cfg.output.dumps {
        let (stem, m) = match d {
            Dump::Affinity => ("affinity", coef.af.clone()),
            Dump::Coefficients => ("coefficients", coef.ctilde.clone()),
            Dump::Soft => match soft {
                Some(s) => ("soft_labels", s.f.transpose()),
                None => continue,
            },
        };
        let path = out.file(&matrix_name(stem, f));
        write_matrix(&path, &m, matrix_format(f))?;
    }
    Ok(())
}

fn synth(cfg: &Config) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let mut out = OutputDir::create(&cfg.output.directory)?;
    let f = cfg.output.format;
    let path = out.file(&matrix_name("data", f));
    write_matrix(&path, data.x.values(), matrix_format(f))?;
    let truth: Vec<Option<usize>> = data.truth.unwrap_or_default().into_iter().map(Some).collect();
    out.csv("truth.csv", &["sample", "label"], &label_rows(&truth))?;
    out.manifest("synth", &cfg.canonical(), cfg.clustering.seed)
}

fn dictionary_rows(dict: &AugmentedDictionary) -> Vec<Vec<String>> {
    (0..dict.n_tilde())
        .map(|i| {
            let n = dict.n_original();
            let parents: Vec<String> = dict.parents(i).iter().map(usize::to_string).collect();
            let tag = if i < n { "original".to_string() } else { dict.strategy_tags()[i - n].clone() };
            vec![i.to_string(), parents.join(" "), tag]
        })
        .collect()
}

fn augment(cfg: &Config) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let dict = if cfg.augmentation.interpolation.is_some() && cfg.augmentation.strategies.is_empty() {
        let given = given_labels(cfg, &data)?;
        let p = cluster_count(cfg, data.truth.as_deref(), Some(&given))?;
        let labels = LabelState::new(given, p, data.x.n_samples())?;
        let n_a = cfg.augmentation.interpolation.as_ref().map_or(0, |i| i.n_a);
        interpolation_dictionary(cfg, &data.x, &labels, n_a)?
    } else {
        instance_dictionary(cfg, &data)?.unwrap_or_else(|| AugmentedDictionary::from_data(&data.x))
    };
    let mut out = OutputDir::create(&cfg.output.directory)?;
    let f = cfg.output.format;
    let path = out.file(&matrix_name("dictionary", f));
    write_matrix(&path, dict.columns(), matrix_format(f))?;
    out.csv("columns.csv", &["column", "parents", "tag"], &dictionary_rows(&dict))?;
    out.manifest("augment", &cfg.canonical(), cfg.clustering.seed)
}

fn report_rows(coef: &CoefficientMatrix) -> Vec<Vec<String>> {
    vec![
        vec!["admm_iterations".into(), coef.report.iterations.to_string()],
        vec!["admm_residual".into(), num(coef.report.residual)],
        vec!["admm_converged".into(), coef.report.converged.to_string()],
    ]
}

fn cluster(cfg: &Config) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let p = cluster_count(cfg, data.truth.as_deref(), None)?;
    let dict = instance_dictionary(cfg, &data)?.unwrap_or_else(|| AugmentedDictionary::from_data(&data.x));
    let solver = cfg.solver.to_config(cfg.clustering.seed);
    let coef = solve_unsupervised(&data.x, &dict, &solver)?;
    let result = spectral_cluster(&coef.af, p, cfg.clustering.seed)?;

    let mut out = OutputDir::create(&cfg.output.directory)?;
    let pred: Vec<Option<usize>> = result.labels.iter().copied().map(Some).collect();
    out.csv("labels.csv", &["sample", "label"], &label_rows(&pred))?;
    let mut rows = Vec::new();
    if let Some(truth) = &data.truth {
        rows.push(vec!["error_rate".into(), num(error_rate(truth, &result.labels)?)]);
        rows.push(vec!["nmi".into(), num(nmi(truth, &result.labels)?)]);
        rows.push(vec!["preserving_rate".into(), num(subspace_preserving_rate(&coef.cf, truth)?.rate)]);
    }
    rows.extend(report_rows(&coef));
    rows.push(vec!["isolated_samples".into(), result.flagged.len().to_string()]);
    out.csv("metrics.csv", &["metric", "value"], &rows)?;
    dump_matrices(&mut out, cfg, &coef, None)?;
    out.manifest("cluster", &cfg.canonical(), cfg.clustering.seed)
}

fn given_labels(cfg: &Config, data: &Loaded) -> Result<Vec<Option<usize>>, CliError> {
    let given = match (&cfg.clustering.given, &data.truth) {
        (Some(path), _) => read_label_file(path)?,
        (None, Some(truth)) if cfg.clustering.labels_per_cluster > 0 => {
            let seed = SampleStream::derive(cfg.clustering.seed, 1).next_u64();
            pick_labels(truth, cfg.clustering.labels_per_cluster, seed)?
        }
        _ => Vec::new(),
    };
    if given.iter().all(Option::is_none) {
        return Err(CliError::Usage(
            "no labeled samples: semi-supervised runs need labels; use `cluster` for unsupervised clustering".into(),
        ));
    }
    if given.len() != data.x.n_samples() {
        return Err(augsc::Error::LengthMismatch(given.len(), data.x.n_samples()).into());
    }
    Ok(given)
}

fn trace_rows(outcome: &SemiOutcome, truth: Option<&[usize]>) -> Result<Vec<Vec<String>>, CliError> {
    outcome
        .trace
        .iter()
        .map(|r| {
            let err = match truth {
                Some(t) => num(error_rate(t, &r.labels)?),
                None => String::new(),
            };
            Ok(vec![
                r.iteration.to_string(),
                err,
                num(r.f_change),
                r.c_change.map_or(String::new(), num),
                r.report.iterations.to_string(),
                num(r.report.residual),
                r.report.converged.to_string(),
            ])
        })
        .collect()
}

fn semi(cfg: &Config) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let given = given_labels(cfg, &data)?;
    let p = cluster_count(cfg, data.truth.as_deref(), Some(&given))?;
    let labels = LabelState::new(given.clone(), p, data.x.n_samples())?;
    let dict = match (&cfg.augmentation.interpolation, cfg.augmentation.strategies.is_empty()) {
        (Some(_), false) => {
            return Err(CliError::Usage("configure either image strategies or interpolation, not both".into()))
        }
        (Some(i), true) => interpolation_dictionary(cfg, &data.x, &labels, i.n_a)?,
        (None, _) => instance_dictionary(cfg, &data)?.unwrap_or_else(|| AugmentedDictionary::from_data(&data.x)),
    };
    let solver = cfg.solver.to_config(cfg.clustering.seed);
    let outcome = run_as_sc(&data.x, &dict, &labels, &solver)?;

    let mut out = OutputDir::create(&cfg.output.directory)?;
    let pred: Vec<Option<usize>> = outcome.labels.iter().copied().map(Some).collect();
    out.csv("labels.csv", &["sample", "label"], &label_rows(&pred))?;
    out.csv(
        "trace.csv",
        &["iteration", "error_rate", "f_change", "c_change", "admm_iterations", "admm_residual", "admm_converged"],
        &trace_rows(&outcome, data.truth.as_deref())?,
    )?;
    let mut rows = Vec::new();
    if let Some(truth) = &data.truth {
        rows.push(vec!["error_rate".into(), num(error_rate(truth, &outcome.labels)?)]);
        rows.push(vec!["nmi".into(), num(nmi(truth, &outcome.labels)?)]);
    }
    rows.push(vec!["labeled_samples".into(), labels.n_labeled().to_string()]);
    rows.push(vec!["outer_iterations".into(), outcome.trace.len().to_string()]);
    rows.push(vec!["outer_converged".into(), outcome.converged.to_string()]);
    rows.extend(report_rows(&outcome.coefficients));
    rows.push(vec!["unreached_rows".into(), outcome.flagged.len().to_string()]);
    out.csv("metrics.csv", &["metric", "value"], &rows)?;
    dump_matrices(&mut out, cfg, &outcome.coefficients, Some(&outcome))?;
    out.manifest("semi", &cfg.canonical(), cfg.clustering.seed)
}

fn diag(cfg: &Config) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let truth = data
        .truth
        .clone()
        .ok_or_else(|| CliError::Usage("diag needs ground-truth labels (dataset.labels)".into()))?;
    let rows: Vec<Vec<String>> = (0..data.x.n_samples())
        .into_par_iter()
        .map(|j| {
            let (mu, r, ok, status) = match check_preserving_condition(&data.x, &truth, j) {
                Ok(c) => (num(c.mu), num(c.r), c.satisfied.to_string(), "ok".to_string()),
                Err(e) => (String::new(), String::new(), String::new(), e.to_string().replace(',', ";")),
            };
            vec![j.to_string(), truth[j].to_string(), mu, r, ok, status]
        })
        .collect();
    let mut out = OutputDir::create(&cfg.output.directory)?;
    out.csv("diag.csv", &["sample", "label", "incoherence", "inradius", "satisfied", "status"], &rows)?;
    out.manifest("diag", &cfg.canonical(), cfg.clustering.seed)
}

fn eval(truth: &Path, pred: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let t = complete(read_label_file(truth)?, "truth")?;
    let p = complete(read_label_file(pred)?, "prediction")?;
    let rows = vec![vec!["error_rate".into(), num(error_rate(&t, &p)?)], vec!["nmi".into(), num(nmi(&t, &p)?)]];
    match out {
        None => {
            print!("{}", render_csv(&["metric", "value"], &rows));
            Ok(())
        }
        Some(dir) => {
            let mut out = OutputDir::create(dir)?;
            out.csv("metrics.csv", &["metric", "value"], &rows)?;
            let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| io_err(p, e));
            out.manifest("eval", &format!("{}\n{}", read(truth)?, read(pred)?), 0)
        }
    }
}

struct SweepRun {
    mode: &'static str,
    first: f64,
    last: f64,
    outer: usize,
    converged: bool,
}

fn sweep_run(cfg: &Config, theta: f64, pct: usize, n_a: usize, seed: u64) -> Result<SweepRun, CliError> {
    let mut cell = cfg.clone();
    cell.dataset = crate::config::Dataset { source: Source::Synthetic, theta, ..cfg.dataset.clone() };
    cell.clustering.seed = seed;
    let data = load_dataset(&cell)?;
    let truth = data.truth.clone().expect("synthetic data has ground truth");
    let p = truth.iter().max().map_or(0, |m| m + 1);
    let per_cluster = pct * truth.len() / 100 / p;
    let solver = cell.solver.to_config(seed);
    if per_cluster == 0 {
        let coef = solve_unsupervised(&data.x, &AugmentedDictionary::from_data(&data.x), &solver)?;
        let labels = spectral_cluster(&coef.af, p, seed)?.labels;
        let err = error_rate(&truth, &labels)?;
        return Ok(SweepRun { mode: "unsupervised", first: err, last: err, outer: 1, converged: coef.report.converged });
    }
    cell.clustering.labels_per_cluster = per_cluster;
    cell.clustering.given = None;
    let labels = LabelState::new(given_labels(&cell, &data)?, p, data.x.n_samples())?;
    let dict = if n_a == 0 {
        AugmentedDictionary::from_data(&data.x)
    } else {
        interpolation_dictionary(&cell, &data.x, &labels, n_a)?
    };
    let outcome = run_as_sc(&data.x, &dict, &labels, &solver)?;
    Ok(SweepRun {
        mode: "semi",
        first: error_rate(&truth, &outcome.trace[0].labels)?,
        last: error_rate(&truth, &outcome.labels)?,
        outer: outcome.trace.len(),
        converged: outcome.converged,
    })
}

fn sweep(cfg: &Config, jobs: usize) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let sw = &cfg.sweep;
    if sw.seeds == 0 || sw.thetas.is_empty() || sw.label_percents.is_empty() || sw.augments.is_empty() {
        return Err(CliError::Usage("sweep needs at least one seed and one value per axis".into()));
    }
    let mut cells = Vec::new();
    for &theta in &sw.thetas {
        for &pct in &sw.label_percents {
            for &n_a in &sw.augments {
                cells.push((theta, pct, n_a));
            }
        }
    }
    let mut out = OutputDir::create(&cfg.output.directory)?;
    let cell_dir = out.root().join("cells");
    std::fs::create_dir_all(&cell_dir).map_err(|e| io_err(&cell_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let base = cfg.clustering.seed;
    let header = ["theta", "label_percent", "augment", "seed", "mode", "first_error", "final_error", "outer_iterations", "converged"];
    let results: Vec<Result<Vec<SweepRun>, CliError>> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(idx, &(theta, pct, n_a))| {
                let runs = (0..sw.seeds)
                    .map(|s| sweep_run(cfg, theta, pct, n_a, base + s))
                    .collect::<Result<Vec<_>, _>>()?;
                let rows: Vec<Vec<String>> = runs
                    .iter()
                    .enumerate()
                    .map(|(s, r)| {
                        vec![
                            num(theta),
                            pct.to_string(),
                            n_a.to_string(),
                            (base + s as u64).to_string(),
                            r.mode.to_string(),
                            num(r.first),
                            num(r.last),
                            r.outer.to_string(),
                            r.converged.to_string(),
                        ]
                    })
                    .collect();
                let path = cell_dir.join(format!("cell_{idx:04}.csv"));
                std::fs::write(&path, render_csv(&header, &rows)).map_err(|e| io_err(&path, e))?;
                Ok(runs)
            })
            .collect()
    });
    for idx in 0..cells.len() {
        out.file(&format!("cells/cell_{idx:04}.csv"));
    }

    let mut rows = Vec::new();
    for (&(theta, pct, n_a), runs) in cells.iter().zip(results) {
        let runs = runs?;
        let first: Vec<f64> = runs.iter().map(|r| r.first).collect();
        let last: Vec<f64> = runs.iter().map(|r| r.last).collect();
        let (fm, fs) = mean_std(&first);
        let (lm, ls) = mean_std(&last);
        rows.push(vec![
            num(theta),
            pct.to_string(),
            n_a.to_string(),
            runs[0].mode.to_string(),
            runs.len().to_string(),
            num(fm),
            num(fs),
            num(lm),
            num(ls),
            runs.iter().filter(|r| r.converged).count().to_string(),
        ]);
    }
    out.csv(
        "grid.csv",
        &[
            "theta",
            "label_percent",
            "augment",
            "mode",
            "runs",
            "first_error_mean",
            "first_error_std",
            "final_error_mean",
            "final_error_std",
            "converged_runs",
        ],
        &rows,
    )?;
    out.manifest("sweep", &cfg.canonical(), base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn object_ids_from_names() {
        assert_eq!(object_id(Path::new("/d/obj7__12.pgm")), Some(7));
        assert_eq!(object_id(Path::new("obj12__0.pgm")), Some(12));
        assert_eq!(object_id(Path::new("cat_3.pgm")), None);
    }

    #[test]
    fn label_files_in_both_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "sample,label\n0,2\n1,-1\n2,0\n").unwrap();
        assert_eq!(read_label_file(&a).unwrap(), vec![Some(2), None, Some(0)]);
        let b = dir.path().join("b.txt");
        std::fs::write(&b, "2\n-1\n0\n").unwrap();
        assert_eq!(read_label_file(&b).unwrap(), vec![Some(2), None, Some(0)]);
    }
}
