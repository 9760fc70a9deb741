use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use super::config::{DatasetConfig, ExperimentConfig};
use super::{
    AnalyzeCommand, Cli, Command, CountModelArg, DatasetCommand, NoiseArgs, ScalingArg, SchemeChoice, SplitArg,
    UsageError, VariantArg,
};
use crate::analysis::{
    fourier_spectrum, landscape_projection, sharpness_comparison, vc_profile, FourierSpectrum, LandscapeGrid,
};
use crate::data::{load_csv, Dataset, LabelMap, Scaling, Split, WorstCaseVariant};
use crate::error::Error;
use crate::exec::Exec;
use crate::model::{CircuitSpec, Scheme};
use crate::noise::{mc_accuracy, CountModel, NoiseConfig, NoiseReport};
use crate::train::{initial_params, train_restarts, Objective, RestartSummary, TrainReport};

pub(super) fn dispatch(cli: &Cli) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Dataset { source } => cmd_dataset(source, &out, seed),
        Command::Train { config } => cmd_train(config, cli.out.as_deref(), cli.seed, exec),
        Command::Analyze { what } => cmd_analyze(what, &out, seed, exec),
        Command::Noise(args) => cmd_noise(args, &out, seed, exec),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// The rows of one split as a dataset of their own.
fn only(ds: &Dataset, which: Split) -> Result<Dataset> {
    let s = ds.subset(which);
    let n = s.len();
    Ok(Dataset::new(s.rows, s.labels, vec![which; n], ds.meta.clone())?)
}

fn cmd_dataset(source: &DatasetCommand, out: &Path, seed: u64) -> Result<()> {
    let scaling = |s: ScalingArg| match s {
        ScalingArg::MinMax => Scaling::MinMax,
        ScalingArg::Raw => Scaling::Raw,
    };
    let (name, cfg) = match source {
        DatasetCommand::Circles { n, factor, noise, scaling: s } => {
            ("circles", DatasetConfig::Circles { n: *n, factor: *factor, noise: *noise, scaling: scaling(*s) })
        }
        DatasetCommand::Moons { n, noise, scaling: s } => {
            ("moons", DatasetConfig::Moons { n: *n, noise: *noise, scaling: scaling(*s) })
        }
        DatasetCommand::Tetromino { n_train } => ("tetromino", DatasetConfig::Tetromino { n_train: *n_train }),
        DatasetCommand::WorstCase { n, labels, variant } => {
            let labels = labels
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(UsageError(format!("labels must be a 0/1 string, got {labels:?}"))),
                })
                .collect::<std::result::Result<Vec<u8>, _>>()?;
            let variant = match variant {
                VariantArg::PowersOfTwo => WorstCaseVariant::PowersOfTwo,
                VariantArg::InversePowers => WorstCaseVariant::InversePowers,
            };
            ("worst_case", DatasetConfig::WorstCase { n: *n, labels, variant })
        }
        DatasetCommand::Csv { path, label_column, class_names, pca, train_fraction } => {
            if !path.is_file() {
                return Err(UsageError(format!("{} does not exist", path.display())).into());
            }
            let class_names = class_names.as_ref().map(|v| [v[0].clone(), v[1].clone()]);
            (
                "csv",
                DatasetConfig::Csv {
                    path: path.clone(),
                    label_column: label_column.clone(),
                    class_names,
                    pca_k: *pca,
                    train_fraction: *train_fraction,
                },
            )
        }
    };
    let ds = cfg.build(seed)?;
    ds.save(out, name)?;
    let (n_train, n_test) = (ds.count(Split::Train), ds.count(Split::Test));
    if n_train > 0 && n_test > 0 {
        only(&ds, Split::Train)?.write_csv(&out.join(format!("{name}_train.csv")))?;
        only(&ds, Split::Test)?.write_csv(&out.join(format!("{name}_test.csv")))?;
    }
    println!("{name}: {} rows ({n_train} train / {n_test} test) -> {}", ds.n_samples(), out.display());
    Ok(())
}

fn write_restarts_csv(path: &Path, summary: &RestartSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["seed", "final_loss", "train_accuracy", "test_accuracy", "iterations", "converged"])?;
    for (s, r) in summary.seeds.iter().zip(&summary.reports) {
        w.write_record([
            s.to_string(),
            num(r.final_loss),
            num(r.train_accuracy),
            opt(r.test_accuracy),
            r.iterations_run.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fourier(dir: &Path, s: &FourierSpectrum) -> Result<()> {
    write_json(&dir.join("fourier.json"), s)?;
    let mut w = csv_writer(&dir.join("fourier.csv"))?;
    w.write_record(["order", "re", "im", "abs"])?;
    for (k, c) in s.coefficients.iter().enumerate() {
        w.write_record([k.to_string(), num(c.re), num(c.im), num(c.norm())])?;
    }
    w.flush()?;
    Ok(())
}

fn write_landscape(dir: &Path, g: &LandscapeGrid) -> Result<()> {
    g.write_grid_csv(&dir.join("landscape_grid.csv"))?;
    g.write_path_csv(&dir.join("landscape_path.csv"))?;
    #[derive(Serialize)]
    struct Summary<'a> {
        pc_axes: &'a [Vec<f64>; 2],
        singular_values: [f64; 2],
        random_axes: bool,
        alpha_range: [f64; 2],
        beta_range: [f64; 2],
        grid_size: usize,
        final_cell: (usize, usize),
        argmin: (usize, usize),
    }
    write_json(
        &dir.join("landscape.json"),
        &Summary {
            pc_axes: &g.pc_axes,
            singular_values: g.singular_values,
            random_axes: g.random_axes,
            alpha_range: [g.alpha[0], *g.alpha.last().unwrap()],
            beta_range: [g.beta[0], *g.beta.last().unwrap()],
            grid_size: g.alpha.len(),
            final_cell: g.final_cell(),
            argmin: g.argmin(),
        },
    )
}

fn landscape_for(report: &TrainReport, ds: &Dataset, grid: usize, seed: u64, exec: Exec) -> Result<LandscapeGrid> {
    let train = ds.train();
    let obj = Objective::new(&report.spec, &train.rows, &train.labels, report.config.loss, Exec::Sequential)?;
    Ok(landscape_projection(report, |p: &[f64]| obj.value(p), grid, seed, exec)?)
}

fn noise_for(report: &TrainReport, ds: &Dataset, cfg: &NoiseConfig, split: Split, exec: Exec) -> Result<NoiseReport> {
    let subset = ds.subset(split);
    Ok(mc_accuracy(&report.spec, &report.final_params, &report.final_threshold, &subset, cfg, exec)?)
}

fn cmd_train(config: &Path, out_override: Option<&Path>, seed_override: Option<u64>, exec: Exec) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(o) = out_override {
        cfg.out = o.to_path_buf();
    }
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| UsageError(format!("{}: {e}", config.display())))?;
    let ds = cfg.build_dataset()?;
    ds.check_trainable()?;
    let out = &cfg.out;
    fs::create_dir_all(out)?;
    ds.save(out, "dataset")?;
    write_json(&out.join("config.json"), &cfg)?;

    let seeds = cfg.restart_seeds();
    let mut summary = csv_writer(&out.join("summary.csv"))?;
    let mut header = vec![
        "layers",
        "n_params",
        "selected_seed",
        "final_loss",
        "train_accuracy",
        "test_accuracy",
        "best_test_accuracy",
        "mean_test_accuracy",
        "mean_train_accuracy",
    ];
    if cfg.noise.is_some() {
        header.extend(["noise_mean_accuracy", "noise_accuracy_sd"]);
    }
    summary.write_record(&header)?;

    for l in cfg.circuit.layers.to_vec() {
        let spec = CircuitSpec::new(cfg.circuit.scheme, ds.n_features(), l)?.with_encode_scale(cfg.circuit.encode_scale)?;
        let res = train_restarts(&spec, &ds, &cfg.train, &seeds)?;
        let best = &res.reports[res.selected];
        let dir = out.join(format!("L{l}"));
        fs::create_dir_all(&dir)?;
        best.write_json(&dir.join("report.json"))?;
        best.write_loss_csv(&dir.join("loss.csv"))?;
        best.write_params_csv(&dir.join("params.csv"))?;
        write_restarts_csv(&dir.join("restarts.csv"), &res)?;

        let mut row = vec![
            l.to_string(),
            spec.n_params().to_string(),
            res.seeds[res.selected].to_string(),
            num(best.final_loss),
            num(best.train_accuracy),
            opt(best.test_accuracy),
            opt(res.best_test_accuracy),
            opt(res.mean_test_accuracy),
            num(res.mean_train_accuracy),
        ];
        let mut line = format!(
            "L={l}: train {:.4}  test {}  (best {}, mean {})",
            best.train_accuracy,
            best.test_accuracy.map_or("-".into(), |a| format!("{a:.4}")),
            res.best_test_accuracy.map_or("-".into(), |a| format!("{a:.4}")),
            res.mean_test_accuracy.map_or("-".into(), |a| format!("{a:.4}")),
        );
        if let Some(ncfg) = &cfg.noise {
            let split = if ds.count(Split::Test) > 0 { Split::Test } else { Split::Train };
            let nr = noise_for(best, &ds, ncfg, split, exec)?;
            nr.write_json(&dir.join("noise.json"))?;
            nr.write_csv(&dir.join("noise_reps.csv"))?;
            row.extend([num(nr.mean_accuracy), num(nr.accuracy_sd)]);
            line.push_str(&format!("  noisy {:.4} ± {:.4}", nr.mean_accuracy, nr.accuracy_sd));
        }
        if let Some(grid) = cfg.analysis.landscape_grid {
            write_landscape(&dir, &landscape_for(best, &ds, grid, cfg.seed, exec)?)?;
        }
        if let Some(orders) = cfg.analysis.fourier_orders {
            if spec.n_features == 1 {
                write_fourier(&dir, &fourier_spectrum(&spec, &best.final_params, orders)?)?;
            }
        }
        summary.write_record(&row)?;
        println!("{line}");
    }
    summary.flush()?;
    Ok(())
}

fn read_report(path: &Path) -> Result<TrainReport> {
    TrainReport::read_json(path).with_context(|| format!("reading report {}", path.display()))
}

/// Explicit `--data`, else `dataset.csv` next to the report or one level up.
fn locate_data(report: &Path, data: Option<&Path>) -> Result<Dataset> {
    let path = match data {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = report.parent().unwrap_or(Path::new("."));
            let near = dir.join("dataset.csv");
            if near.is_file() {
                near
            } else {
                dir.parent().unwrap_or(Path::new(".")).join("dataset.csv")
            }
        }
    };
    load_csv(&path, "label", &LabelMap::Numeric).with_context(|| format!("loading dataset {}", path.display()))
}

fn cmd_analyze(what: &AnalyzeCommand, out: &Path, seed: u64, exec: Exec) -> Result<()> {
    fs::create_dir_all(out)?;
    match what {
        AnalyzeCommand::Vc { layers } => {
            let rows = vc_profile(*layers, exec)?;
            write_json(&out.join("vc.json"), &rows)?;
            let mut w = csv_writer(&out.join("vc.csv"))?;
            w.write_record(["layers", "vc_dimension", "alternating_not_shattered", "certified"])?;
            println!("layers  shattered  alternating-fails  certified");
            for r in &rows {
                w.write_record([
                    r.layers.to_string(),
                    r.shattered_size.to_string(),
                    r.alternating_size.to_string(),
                    r.certified.to_string(),
                ])?;
                println!("{:>6}  {:>9}  {:>17}  {}", r.layers, r.shattered_size, r.alternating_size, r.certified);
            }
            w.flush()?;
        }
        AnalyzeCommand::Sharpness { scheme, n, restarts, iters } => {
            if *restarts == 0 {
                return Err(UsageError("--restarts must be ≥ 1".into()).into());
            }
            let seeds: Vec<u64> = (0..*restarts).map(|k| seed.wrapping_add(k)).collect();
            let cmp = sharpness_comparison(*n, &seeds, *iters)?;
            if matches!(scheme, SchemeChoice::Original | SchemeChoice::Both) {
                write_json(&out.join("sharpness_original.json"), &cmp.original)?;
                println!("original:   λ_max = {:.6e}", cmp.original.largest_hessian_eigenvalue);
            }
            if matches!(scheme, SchemeChoice::Compressed | SchemeChoice::Both) {
                write_json(&out.join("sharpness_compressed.json"), &cmp.compressed)?;
                println!("compressed: λ_max = {:.6e}", cmp.compressed.largest_hessian_eigenvalue);
            }
            if *scheme == SchemeChoice::Both {
                write_json(&out.join("sharpness_comparison.json"), &cmp)?;
                println!("ratio:      {:.6e}", cmp.ratio);
            }
        }
        AnalyzeCommand::Landscape { report, data, grid } => {
            let r = read_report(report)?;
            let ds = locate_data(report, data.as_deref())?;
            let g = landscape_for(&r, &ds, *grid, seed, exec)?;
            write_landscape(out, &g)?;
            println!("landscape {grid}×{grid} -> {}", out.display());
        }
        AnalyzeCommand::Fourier { report, layers, params, encode_scale, orders } => {
            let (spec, p) = match report {
                Some(path) => {
                    let r = read_report(path)?;
                    (r.spec, r.final_params.0)
                }
                None => {
                    let spec = CircuitSpec::new(Scheme::Original, 1, *layers)?.with_encode_scale(*encode_scale)?;
                    let p = params.clone().unwrap_or_else(|| initial_params(spec.n_params(), seed));
                    (spec, p)
                }
            };
            let s = fourier_spectrum(&spec, &p, *orders)?;
            write_fourier(out, &s)?;
            for (k, c) in s.coefficients.iter().enumerate() {
                println!("{k:>3}  {:.6e}", c.norm());
            }
        }
    }
    Ok(())
}

fn cmd_noise(args: &NoiseArgs, out: &Path, seed: u64, exec: Exec) -> Result<()> {
    let r = read_report(&args.report)?;
    let ds = locate_data(&args.report, args.data.as_deref())?;
    let cfg = NoiseConfig {
        total_counts: args.counts,
        mc_repetitions: args.reps,
        seed,
        model: match args.model {
            CountModelArg::Poisson => CountModel::Poisson,
            CountModelArg::Binomial => CountModel::Binomial,
        },
    };
    let split = match args.split {
        SplitArg::Train => Split::Train,
        SplitArg::Test => Split::Test,
    };
    if ds.count(split) == 0 {
        return Err(Error::DegenerateFit(format!("dataset has no {} rows", split.as_str())).into());
    }
    let nr = noise_for(&r, &ds, &cfg, split, exec)?;
    fs::create_dir_all(out)?;
    nr.write_json(&out.join("noise.json"))?;
    nr.write_csv(&out.join("noise_reps.csv"))?;
    println!("accuracy {:.4} ± {:.4} (noiseless {:.4})", nr.mean_accuracy, nr.accuracy_sd, nr.noiseless_accuracy);
    if nr.single_repetition {
        println!("note: one repetition, spread undefined (sd reported as 0)");
    }
    Ok(())
}
