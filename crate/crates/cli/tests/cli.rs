use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn glt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glt")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small synthetic dataset and returns its directory.
fn dataset(root: &Path) -> std::path::PathBuf {
    let data = root.join("data");
    let o = glt(&["--out-dir", path(&data), "--links", "6", "--days", "3", "--synth-seed", "4", "synth"]);
    assert!(o.status.success(), "{}", stderr(&o));
    data
}

fn data_flags(data: &Path) -> Vec<String> {
    ["speed", "adjacency", "distance"]
        .iter()
        .flat_map(|k| [format!("--{k}"), path(&data.join(format!("{k}.csv"))).to_string()])
        .collect()
}

fn run(flags: &[String], extra: &[&str]) -> Output {
    let mut args: Vec<&str> = flags.iter().map(String::as_str).collect();
    args.extend_from_slice(extra);
    glt(&args)
}

#[test]
fn build_graph_writes_eleven_masks_and_is_repeatable() {
    let root = tempfile::tempdir().unwrap();
    let data = dataset(root.path());
    let flags = data_flags(&data);
    for out in ["a", "b"] {
        let o = run(&flags, &["--out-dir", path(&root.path().join(out)), "--quiet", "build-graph"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
    let a = root.path().join("a/graph");
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 12);
    assert!(names.contains(&"manifest.txt".to_string()));
    for name in names {
        let x = fs::read(a.join(&name)).unwrap();
        let y = fs::read(root.path().join("b/graph").join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().count(), 11);
    assert!(manifest.lines().all(|l| l.contains("nonzero=") && l.contains("delta_t=20")));
}

#[test]
fn missing_distance_file_is_named() {
    let root = tempfile::tempdir().unwrap();
    let data = dataset(root.path());
    let missing = data.join("absent.csv");
    let o = glt(&[
        "--speed",
        path(&data.join("speed.csv")),
        "--adjacency",
        path(&data.join("adjacency.csv")),
        "--distance",
        path(&missing),
        "--out-dir",
        path(root.path()),
        "build-graph",
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("absent.csv"), "{err}");
    assert!(err.starts_with("io error"));
}

#[test]
fn one_epoch_logs_one_row_and_reruns_match() {
    let root = tempfile::tempdir().unwrap();
    let data = dataset(root.path());
    let flags = data_flags(&data);
    let train = |out: &str| {
        let dir = root.path().join(out);
        let o = run(
            &flags,
            &[
                "--out-dir",
                path(&dir),
                "--max-epochs",
                "1",
                "--window",
                "4",
                "--scale",
                "100",
                "--learning-rate",
                "0.001",
                "--seed",
                "3",
                "train",
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        dir
    };
    let (a, b) = (train("a"), train("b"));
    let log = fs::read_to_string(a.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert!(log.starts_with("epoch,train_mse,val_mse\n1,"));
    for f in ["checkpoint.txt", "train_log.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join("train_log.timing.csv").exists());

    let kv = root.path().join("metrics.txt");
    let common = ["--out-dir", path(&a), "--window", "4", "--scale", "100"];
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["evaluate", "--kv-out", path(&kv)]);
    let o = run(&flags, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert_eq!(line.lines().count(), 1);
    for key in ["rmse_mph=", "mape_pct=", "mae_mph=", "n=", "skipped="] {
        assert!(line.contains(key), "{line}");
    }
    assert_eq!(fs::read_to_string(&kv).unwrap().lines().count(), 5);

    let mut args: Vec<&str> = common.to_vec();
    args.extend(["predict", "--link", "2", "--day", "1"]);
    let o = run(&flags, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(a.join("trace_link2_day1.csv")).unwrap();
    assert_eq!(trace.lines().count(), 289);
    assert_eq!(trace.lines().next(), Some("time_step,ground_truth_mph,predicted_mph"));
}

#[test]
fn contract_violations_exit_nonzero() {
    let root = tempfile::tempdir().unwrap();
    let out = path(root.path());
    let o = glt(&["--out-dir", out, "--horizon", "3", "train"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("horizon"));

    let cfg = root.path().join("bad.toml");
    fs::write(&cfg, "[graph]\nhopz = 2\n").unwrap();
    let o = glt(&["--config", path(&cfg), "build-graph"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad.toml"));

    let o = glt(&["--out-dir", out, "predict", "--link", "0", "--day", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("checkpoint.txt"));
}

#[test]
fn single_gamma_sweep_matches_train() {
    let root = tempfile::tempdir().unwrap();
    let data = dataset(root.path());
    let flags = data_flags(&data);
    let common = ["--window", "4", "--scale", "100", "--max-epochs", "2", "--seed", "5", "--quiet"];
    let sweep_dir = root.path().join("sweep");
    let mut args = common.to_vec();
    args.extend(["--out-dir", path(&sweep_dir), "sweep-gamma", "--gammas", "3", "--repeats", "1"]);
    let o = run(&flags, &args);
    assert!(o.status.success(), "{}", stderr(&o));

    let train_dir = root.path().join("train");
    let mut args = common.to_vec();
    args.extend(["--gamma", "3", "--out-dir", path(&train_dir), "train"]);
    assert!(run(&flags, &args).status.success());

    let cell = sweep_dir.join("sweep/gamma3_seed5");
    assert_eq!(
        fs::read(cell.join("checkpoint.txt")).unwrap(),
        fs::read(train_dir.join("checkpoint.txt")).unwrap()
    );
    let table = glt_cli::SweepTable::read(sweep_dir.join("sweep_gamma.csv")).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!((table.rows[0].gamma, table.rows[0].seed), (3, 5));

    let mut args = common.to_vec();
    args.extend(["--out-dir", path(&train_dir), "evaluate", "--split", "validation"]);
    let o = run(&flags, &args);
    let line = stdout(&o);
    let mae: f64 = line
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("mae_mph="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mae - table.rows[0].val_mae_mph).abs() < 1e-5);
}
