use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn reupload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reupload")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line_count(p: &Path) -> usize {
    fs::read_to_string(p).unwrap().lines().count()
}

const SMALL_CONFIG: &str = r#"
seed = 3
restarts = [0, 1]

[dataset]
generator = "circles"
n = 120

[circuit]
scheme = "original"
layers = [1, 2]

[train]
max_iters = 150
record_every = 5

[noise]
total_counts = 1000
mc_repetitions = 50

[analysis]
landscape_grid = 7
"#;

#[test]
fn dataset_circles_split_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = reupload(&["dataset", "circles", "--n", "500", "--seed", "7", "--out", out]);
    assert_eq!(code(&o), 0, "{o:?}");
    let csv = fs::read_to_string(dir.path().join("circles.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 500);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",train")).count(), 400);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",test")).count(), 100);
    assert!(dir.path().join("circles.meta.json").is_file());
}

#[test]
fn dataset_tetromino_train_and_test_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = reupload(&["dataset", "tetromino", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(line_count(&dir.path().join("tetromino_train.csv")), 101);
    assert_eq!(line_count(&dir.path().join("tetromino_test.csv")), 49);
}

#[test]
fn usage_errors_exit_2() {
    let o = reupload(&["dataset", "circles"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&reupload(&["dataset", "circles", "--n", "100", "--factor", "1.5"])), 2);
    assert_eq!(code(&reupload(&["dataset", "worst-case", "--n", "2", "--labels", "01x"])), 2);
    assert_eq!(code(&reupload(&["frobnicate"])), 2);
    assert_eq!(code(&reupload(&["--help"])), 0);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[dataset]\ngenerator = \"circles\"\n[circuit]\nscheme = \"sideways\"\nlayers = 1\n").unwrap();
    assert_eq!(code(&reupload(&["train", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&reupload(&["train", dir.path().join("missing.toml").to_str().unwrap()])), 2);
}

#[test]
fn degenerate_dataset_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one_class.toml");
    fs::write(
        &cfg,
        "[dataset]\ngenerator = \"worst-case\"\nn = 2\nlabels = [0, 0, 0]\n[circuit]\nscheme = \"original\"\nlayers = 1\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = reupload(&["train", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{o:?}");
}

#[test]
fn missing_report_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = dir.path().join("o");
    let o = reupload(&["analyze", "landscape", "--report", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let o = reupload(&["noise", "--report", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn train_is_byte_identical_and_feeds_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL_CONFIG).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = reupload(&["train", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    assert_eq!(ta, tb);
    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).collect();
    for want in ["summary.csv", "dataset.csv", "L1/report.json", "L2/loss.csv", "L2/noise.json", "L2/landscape_grid.csv"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert_eq!(line_count(&a.join("summary.csv")), 3);
    assert_eq!(line_count(&a.join("L2/landscape_grid.csv")), 50);

    // Sequential execution gives the same bytes.
    let c = dir.path().join("c");
    let o = reupload(&["train", cfg.to_str().unwrap(), "--out", c.to_str().unwrap(), "--sequential"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_tree(&c), ta);

    let report = a.join("L2/report.json");
    let land = dir.path().join("land");
    let o = reupload(&["analyze", "landscape", "--report", report.to_str().unwrap(), "--grid", "9", "--out", land.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(line_count(&land.join("landscape_grid.csv")), 82);
    assert!(line_count(&land.join("landscape_path.csv")) >= 4);

    let noise = dir.path().join("noise");
    let o = reupload(&["noise", "--report", report.to_str().unwrap(), "--counts", "10000", "--reps", "200", "--out", noise.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("±"));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(noise.join("noise.json")).unwrap()).unwrap();
    assert!(v["accuracy_sd"].as_f64().unwrap() >= 0.0);
    assert_eq!(line_count(&noise.join("noise_reps.csv")), 201);

    let o = reupload(&["noise", "--report", report.to_str().unwrap(), "--counts", "1000000000", "--reps", "100", "--out", noise.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&fs::read(noise.join("noise.json")).unwrap()).unwrap();
    assert!(v["accuracy_sd"].as_f64().unwrap() < 1e-3);

    let o = reupload(&["noise", "--report", report.to_str().unwrap(), "--reps", "1", "--out", noise.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("one repetition"));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(noise.join("noise.json")).unwrap()).unwrap();
    assert_eq!(v["accuracy_sd"].as_f64(), Some(0.0));
    assert_eq!(v["single_repetition"].as_bool(), Some(true));
}

#[test]
fn analyze_vc_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = reupload(&["analyze", "vc", "--layers", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("vc.csv")).unwrap();
    assert_eq!(csv, "layers,vc_dimension,alternating_not_shattered,certified\n1,3,4,true\n2,5,6,true\n3,7,8,true\n");
    assert_eq!(code(&reupload(&["analyze", "vc", "--layers", "9"])), 2);
}

#[test]
fn analyze_sharpness_both() {
    let dir = tempfile::tempdir().unwrap();
    let o = reupload(&["analyze", "sharpness", "--scheme", "both", "--n", "12", "--restarts", "2", "--iters", "300", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sharpness_original.json", "sharpness_compressed.json", "sharpness_comparison.json"] {
        assert!(dir.path().join(f).is_file());
    }
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("sharpness_comparison.json")).unwrap()).unwrap();
    assert!(v["ratio"].as_f64().unwrap() > 1.0);
    assert_eq!(v["compressed"]["hessian_dim"].as_u64(), Some(2));
}

#[test]
fn analyze_fourier_from_params() {
    let dir = tempfile::tempdir().unwrap();
    let o = reupload(&["analyze", "fourier", "--layers", "1", "--params", "0,0", "--orders", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("fourier.csv")).unwrap();
    let abs: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!((abs[0] - 0.5).abs() < 1e-12 && (abs[1] - 0.25).abs() < 1e-12 && abs[2] < 1e-12);
}
