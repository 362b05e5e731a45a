use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn augsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_augsc")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).expect("error line is JSON")
}

#[test]
fn synth_writes_sixty_samples_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let run = augsc(&["synth", "--theta", "10", "--n-per", "20", "--seed", "7", "--out", path(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let data = read(&out.join("data.csv"));
    assert_eq!(data.lines().count(), 60);
    assert!(data.lines().all(|l| l.split(',').count() == 6));
    let truth = read(&out.join("truth.csv"));
    assert_eq!(truth.lines().next(), Some("sample,label"));
    assert_eq!(truth.lines().count(), 61);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["version"].is_string());
}

#[test]
fn reruns_reproduce_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[dataset]\nn_per = 10\ntheta = 20.0\n\n[augmentation.interpolation]\nn_a = 10\n\n\
         [clustering]\nlabels_per_cluster = 3\nseed = 5\n\n[output]\ndumps = [\"affinity\", \"soft\"]\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = augsc(&["semi", "--config", path(&cfg), "--out", path(out)]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    for name in ["labels.csv", "trace.csv", "metrics.csv", "affinity.csv", "soft_labels.csv", "manifest.json"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
    let trace = read(&a.join("trace.csv"));
    assert_eq!(
        trace.lines().next(),
        Some("iteration,error_rate,f_change,c_change,admm_iterations,admm_residual,admm_converged")
    );
    // 30 originals plus 3 x 10 augmented rows.
    assert_eq!(read(&a.join("soft_labels.csv")).lines().count(), 60);
}

#[test]
fn semi_without_labels_points_to_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let run = augsc(&["semi", "--labels-per-cluster", "0", "--out", path(dir.path())]);
    assert_eq!(run.status.code(), Some(1));
    let err = error_line(&run);
    assert_eq!(err["error"], "usage");
    assert!(err["message"].as_str().unwrap().contains("cluster"));
}

#[test]
fn eval_of_renamed_labels_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t.csv"), dir.path().join("p.txt"));
    fs::write(&t, "sample,label\n0,0\n1,0\n2,1\n3,2\n").unwrap();
    fs::write(&p, "2\n2\n0\n1\n").unwrap();
    let run = augsc(&["eval", "--truth", path(&t), "--pred", path(&p)]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("metric,value"));
    assert!(text.contains("error_rate,0.0"));
    assert!(text.contains("nmi,100.0"));
}

#[test]
fn exit_codes_separate_usage_data_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let bad_flag = augsc(&["cluster", "--regularizer", "l7", "--out", path(&out)]);
    assert_eq!(bad_flag.status.code(), Some(1));
    assert_eq!(augsc(&["nonsense"]).status.code(), Some(1));

    let broken = dir.path().join("broken.csv");
    fs::write(&broken, "1,2\n3,x\n").unwrap();
    let cfg = dir.path().join("broken.toml");
    fs::write(&cfg, format!("[dataset]\nsource = \"matrix\"\npath = {:?}\n\n[clustering]\np = 2\n", broken)).unwrap();
    let data = augsc(&["cluster", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(data.status.code(), Some(2));
    assert_eq!(error_line(&data)["error"], "data");

    // Mutually orthogonal samples: every off-diagonal inner product is zero.
    let orth = dir.path().join("orth.csv");
    fs::write(&orth, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let cfg = dir.path().join("orth.toml");
    fs::write(&cfg, format!("[dataset]\nsource = \"matrix\"\npath = {:?}\n\n[clustering]\np = 2\n", orth)).unwrap();
    let numerical = augsc(&["cluster", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(numerical.status.code(), Some(3));
    assert_eq!(error_line(&numerical)["error"], "numerical");
}

#[test]
fn sweep_grid_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let grids: Vec<String> = ["1", "3"]
        .iter()
        .map(|jobs| {
            let out = dir.path().join(format!("w{jobs}"));
            let run = augsc(&[
                "sweep",
                "--jobs",
                jobs,
                "--seeds",
                "2",
                "--thetas",
                "15,20",
                "--label-percents",
                "0,20",
                "--augments",
                "0,10",
                "--out",
                path(&out),
            ]);
            assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
            assert_eq!(fs::read_dir(out.join("cells")).unwrap().count(), 8);
            read(&out.join("grid.csv"))
        })
        .collect();
    assert_eq!(grids[0], grids[1]);
    let mut lines = grids[0].lines();
    assert_eq!(
        lines.next(),
        Some("theta,label_percent,augment,mode,runs,first_error_mean,first_error_std,final_error_mean,final_error_std,converged_runs")
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn cluster_reports_metrics_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[dataset]\ntheta = 60.0\nn_per = 12\n\n[output]\ndumps = [\"affinity\", \"coefficients\"]\nformat = \"bin\"\n")
        .unwrap();
    let out = dir.path().join("c");
    let run = augsc(&["cluster", "--config", path(&cfg), "--out", path(&out), "--knn", "8"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let metrics = read(&out.join("metrics.csv"));
    assert!(metrics.starts_with("metric,value\n"));
    for key in ["error_rate", "nmi", "preserving_rate", "admm_converged"] {
        assert!(metrics.contains(key), "missing {key}");
    }
    assert!(out.join("affinity.bin").exists());
    assert!(out.join("coefficients.bin").exists());
    assert_eq!(read(&out.join("labels.csv")).lines().count(), 37);
}
