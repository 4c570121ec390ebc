use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use robfda::data::format_sig12;
use robfda::{
    anova_l2_test, empirical_b, fit_completed, fit_marginal, generate_masks, load_csv_with, resolve_loss,
    run_coverage_study, run_ise_study, step_probe, trend_bootstrap, AnovaConfig, CsvOptions, Dataset, Error,
    FitOptions, Grid, LossChoice, MissingScheme, Probe, ScenarioConfig, Study, VarianceScaling,
};
use serde_json::{json, Value};

use crate::manifest::RunManifest;
use crate::{EstimateArgs, FanovaArgs, MasksArgs, SimulateArgs, TrendArgs};

/// Exit-code class of a failed run.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input; exit code 2.
    Input(String),
    /// The computation itself failed; exit code 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Undefined { .. } | Error::SingularDenominator { .. } | Error::Solver { .. } | Error::Cholesky => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn write_output(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn finish(manifest: RunManifest, explicit: Option<&Path>, out: &Path) -> Outcome {
    let path = explicit.map_or_else(|| RunManifest::default_path(out), Path::to_path_buf);
    manifest
        .finish(&path)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, group_column: &str) -> Result<Dataset, Failure> {
    if !path.exists() {
        return Err(Failure::Input(format!("input file {} does not exist", path.display())));
    }
    let opts = CsvOptions {
        group_column: group_column.to_string(),
    };
    load_csv_with(path, &opts).map_err(|e| match e {
        Error::Io { .. } => Failure::from(e),
        other => Failure::Input(format!("{}: {other}", path.display())),
    })
}

fn parse_loss(s: &str) -> Result<LossChoice, Failure> {
    s.parse().map_err(|e: Error| Failure::Input(format!("--loss: {e}")))
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("results serialize") + "\n"
}

pub fn estimate(args: &EstimateArgs, manifest_path: Option<&Path>) -> Outcome {
    let choice = parse_loss(&args.input.loss)?;
    let mut manifest = RunManifest::start(
        "estimate",
        json!({
            "data": args.input.data,
            "loss": choice.to_string(),
            "interpolate": args.interpolate,
        }),
        None,
    );
    let data = load(&args.input.data, "group")?;
    let opts = FitOptions::default();
    let est = if args.interpolate {
        fit_completed(&data, &choice, &opts)?
    } else {
        fit_marginal(&data, &resolve_loss(&data, &choice)?, &opts)?
    };
    let mut text = String::from("t,theta,n_eff,status\n");
    for j in 0..est.theta.len() {
        writeln!(
            text,
            "{},{},{},{}",
            format_sig12(data.grid().to_source(j)),
            num(est.theta[j]),
            est.n_eff[j],
            est.status[j].as_str()
        )
        .unwrap();
    }
    write_output(&args.out, &text)?;
    manifest.inputs.push(args.input.data.clone());
    manifest.outputs.push(args.out.clone());
    finish(manifest, manifest_path, &args.out)
}

fn parse_scaling(s: &str) -> Result<VarianceScaling, Failure> {
    match s {
        "per-group" => Ok(VarianceScaling::PerGroup),
        "pooled" => Ok(VarianceScaling::Pooled),
        other => Err(Failure::Input(format!(
            "--scaling: unknown value `{other}` (expected per-group | pooled)"
        ))),
    }
}

pub fn fanova(args: &FanovaArgs, manifest_path: Option<&Path>) -> Outcome {
    let choice = parse_loss(&args.input.loss)?;
    let cfg = AnovaConfig {
        b: args.b,
        mixture_draws: args.draws,
        seed: args.seed,
        scaling: parse_scaling(&args.scaling)?,
    };
    let config = json!({
        "data": args.input.data,
        "group_col": args.group_col,
        "loss": choice.to_string(),
        "B": cfg.b,
        "mixture_draws": cfg.mixture_draws,
        "scaling": args.scaling,
        "seed": cfg.seed,
    });
    let mut manifest = RunManifest::start("fanova", config.clone(), Some(args.seed));
    let data = load(&args.input.data, &args.group_col)?;
    let groups: Vec<Dataset> = data.split_by_group().into_iter().map(|(_, d)| d).collect();
    if groups.len() < 2 {
        return Err(Failure::Input(format!(
            "{}: column `{}` holds fewer than two groups",
            args.input.data.display(),
            args.group_col
        )));
    }
    let labels: Vec<String> = data.split_by_group().into_iter().map(|(g, _)| g).collect();
    let result = anova_l2_test(&groups, &choice, &cfg, &FitOptions::default())?;
    let doc = json!({ "config": config, "group_labels": labels, "result": result });
    write_output(&args.out, &to_json(&doc))?;
    manifest.inputs.push(args.input.data.clone());
    manifest.outputs.push(args.out.clone());
    finish(manifest, manifest_path, &args.out)
}

/// Probe values on the (rescaled) grid; a step location is read in source
/// units.
fn probe_values(spec: &str, grid: &Grid) -> Result<Vec<f64>, Failure> {
    let bad = |e: Error| Failure::Input(format!("--probe: {e}"));
    if let Some(x) = spec.trim().strip_prefix("step:") {
        let x0: f64 = x
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("--probe: bad step location `{x}`")))?;
        return step_probe((x0 - grid.offset()) / grid.scale(), grid).map_err(bad);
    }
    let probe: Probe = spec.parse().map_err(bad)?;
    probe.on_grid(grid).map_err(bad)
}

pub fn trend(args: &TrendArgs, manifest_path: Option<&Path>) -> Outcome {
    let choice = parse_loss(&args.input.loss)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Input(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let config = json!({
        "data": args.input.data,
        "loss": choice.to_string(),
        "probe": args.probe,
        "B": args.b,
        "alpha": args.alpha,
        "seed": args.seed,
    });
    let mut manifest = RunManifest::start("trend", config.clone(), Some(args.seed));
    let data = load(&args.input.data, "group")?;
    let probe = probe_values(&args.probe, data.grid())?;
    let boot = trend_bootstrap(&data, &choice, &probe, args.b, args.seed, &FitOptions::default())?;
    let ci = boot.ci(args.probe.trim(), args.alpha);
    write_output(&args.out, &to_json(&json!({ "config": config, "result": ci })))?;
    manifest.inputs.push(args.input.data.clone());
    manifest.outputs.push(args.out.clone());
    finish(manifest, manifest_path, &args.out)
}

pub fn simulate(args: &SimulateArgs, manifest_path: Option<&Path>) -> Outcome {
    let mut text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", args.config.display())))?;
    // later keys win, so overrides are appended
    if let Some(seed) = args.seed {
        text.push_str(&format!("\nseed = {seed}\n"));
    }
    if let Some(b) = args.b {
        text.push_str(&format!("\nB = {b}\n"));
    }
    let cfg = ScenarioConfig::from_kv_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.config.display())))?;
    let config = serde_json::to_value(&cfg).expect("config serializes");
    let mut manifest = RunManifest::start("simulate", config, Some(cfg.seed));
    let opts = FitOptions::default();
    let mut out = String::from("scenario,estimator,metric,value\n");
    let mut row = |est: &str, metric: &str, value: f64| {
        writeln!(out, "{},{est},{metric},{}", cfg.name, num(value)).unwrap();
    };
    match cfg.study {
        Study::Ise => {
            let table = run_ise_study(&cfg, &opts)?;
            for r in &table.rows {
                row(&r.estimator, "median_ise", r.median_ise);
                row(&r.estimator, "mean_ise", r.mean_ise);
                row(&r.estimator, "ratio_to_reference", r.ratio_to_reference);
            }
        }
        Study::Coverage => {
            let table = run_coverage_study(&cfg, &opts)?;
            for r in &table.rows {
                row(&r.estimator, &format!("coverage:{}", r.probe), r.coverage);
                row(&r.estimator, &format!("median_length:{}", r.probe), r.median_length);
                row(&r.estimator, &format!("true_coefficient:{}", r.probe), r.true_coefficient);
            }
        }
    }
    write_output(&args.out, &out)?;
    manifest.inputs.push(args.config.clone());
    manifest.outputs.push(args.out.clone());
    finish(manifest, manifest_path, &args.out)
}

pub fn masks(args: &MasksArgs, manifest_path: Option<&Path>) -> Outcome {
    let mut text = String::new();
    let (mut manifest, summary, inputs): (RunManifest, Value, Vec<PathBuf>) = match (&args.data, &args.scheme) {
        (Some(path), _) => {
            let manifest = RunManifest::start("masks", json!({ "data": path }), None);
            let data = load(path, "group")?;
            let b_hat = empirical_b(&data.masks())?;
            text.push_str("t,b_hat\n");
            for (j, b) in b_hat.iter().enumerate() {
                writeln!(text, "{},{}", format_sig12(data.grid().to_source(j)), num(*b)).unwrap();
            }
            let min = b_hat.iter().copied().fold(f64::INFINITY, f64::min);
            println!("curves = {}, min b_hat = {}", data.n_curves(), num(min));
            (manifest, json!({ "curves": data.n_curves(), "min_b_hat": min }), vec![path.clone()])
        }
        (None, Some(spec)) => {
            let scheme: MissingScheme = spec.parse().map_err(|e: Error| Failure::Input(format!("--scheme: {e}")))?;
            let seed = args.seed.expect("clap requires a seed with --scheme");
            let manifest = RunManifest::start(
                "masks",
                json!({ "scheme": scheme.to_string(), "n": args.n, "grid_size": args.grid_size, "seed": seed }),
                Some(seed),
            );
            let grid = Grid::uniform(args.grid_size)?;
            let set = generate_masks(&scheme, args.n, &grid, seed)?;
            let b_hat = empirical_b(&set.masks)?;
            let b = scheme.observation_probability(&grid);
            text.push_str("t,b_hat,b,deviation\n");
            let mut w_n: f64 = 0.0;
            for j in 0..grid.len() {
                let dev = b_hat[j] - b[j];
                w_n = w_n.max(dev.abs());
                writeln!(text, "{},{},{},{}", format_sig12(grid.points()[j]), num(b_hat[j]), num(b[j]), num(dev)).unwrap();
            }
            let root_n = (args.n as f64).sqrt() * w_n;
            println!("W_n = {w_n}, sqrt(n) W_n = {root_n}, redraws = {}", set.redraws);
            (
                manifest,
                json!({ "w_n": w_n, "sqrt_n_w_n": root_n, "redraws": set.redraws }),
                Vec::new(),
            )
        }
        (None, None) => return Err(Failure::Input("either --data or --scheme is required".into())),
    };
    write_output(&args.out, &text)?;
    manifest.inputs = inputs;
    manifest.outputs.push(args.out.clone());
    manifest.summary = Some(summary);
    finish(manifest, manifest_path, &args.out)
}
