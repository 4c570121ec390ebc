use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use robfda::{fit_marginal, load_csv, FitOptions, LossSpec};
use serde_json::Value;
use tempfile::TempDir;

const TOY: &str = "\
curve_id,group,t,value
a,g1,0,1
a,g1,0.5,2
a,g1,1,
b,g1,0,3
b,g1,0.5,4
b,g1,1,5
c,g1,0,5
c,g1,0.5,
c,g1,1,7
";

fn robfda(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robfda"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn theta_column(path: &Path) -> Vec<Option<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().ok())
        .collect()
}

fn without_timestamps(path: &Path) -> Value {
    let mut v = read_json(path);
    let obj = v.as_object_mut().unwrap();
    obj.remove("started");
    obj.remove("finished");
    v
}

#[test]
fn square_estimate_is_pointwise_mean() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "toy.csv", TOY);
    let out = robfda(&["estimate", "--data", "toy.csv", "--loss", "square", "--out", "theta.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let theta = theta_column(&dir.path().join("theta.csv"));
    assert_eq!(theta, vec![Some(3.0), Some(3.0), Some(6.0)]);
    let text = fs::read_to_string(dir.path().join("theta.csv")).unwrap();
    assert!(text.starts_with("t,theta,n_eff,status\n"));
    assert!(text.contains("0.5,3,2,solved"));
    assert!(dir.path().join("theta.csv.manifest.json").exists());
}

#[test]
fn huber_estimate_matches_library() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "toy.csv", TOY);
    let out = robfda(&["estimate", "--data", "toy.csv", "--loss", "huber:0.8", "--out", "theta.csv"], dir.path());
    assert!(out.status.success());
    let data = load_csv(&dir.path().join("toy.csv")).unwrap();
    let lib = fit_marginal(&data, &LossSpec::huber(0.8).unwrap(), &FitOptions::default()).unwrap();
    let cli = theta_column(&dir.path().join("theta.csv"));
    for (a, b) in cli.iter().zip(&lib.theta) {
        assert_eq!(a.unwrap().to_bits(), b.to_bits());
    }
}

#[test]
fn missing_input_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let out = robfda(&["estimate", "--data", "absent.csv", "--out", "theta.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

#[test]
fn malformed_input_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.csv", "curve_id,group,t,value\na,g,zero,1\n");
    let out = robfda(&["estimate", "--data", "bad.csv", "--out", "theta.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.csv") && msg.contains("line 2"), "{msg}");
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "toy.csv", TOY);
    let out = robfda(&["trend", "--data", "toy.csv", "--probe", "constant", "--out", "ci.json"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn identical_groups_are_not_rejected() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("curve_id,group,t,value\n");
    for (g, prefix) in [("x", "p"), ("y", "q")] {
        for i in 0..6 {
            for j in 0..5 {
                let v = ((i * 7 + j * 3) % 5) as f64 - 2.0 + j as f64;
                text.push_str(&format!("{prefix}{i},{g},{},{v}\n", j as f64 / 4.0));
            }
        }
    }
    write(dir.path(), "two.csv", &text);
    let out = robfda(
        &["fanova", "--data", "two.csv", "--B", "100", "--seed", "7", "--draws", "5000", "--out", "res.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = read_json(&dir.path().join("res.json"));
    assert_eq!(res["result"]["statistic"].as_f64().unwrap(), 0.0);
    assert!(res["result"]["p_value"].as_f64().unwrap() >= 0.999);
    assert_eq!(res["config"]["seed"], 7);
    assert_eq!(res["result"]["group_sizes"], serde_json::json!([6, 6]));
}

#[test]
fn constant_probe_on_flat_data() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("curve_id,group,t,value\n");
    for i in 0..8 {
        for j in 0..11 {
            let observed = (i + j) % 4 != 0;
            let v = if observed { "5" } else { "" };
            text.push_str(&format!("c{i},g,{},{v}\n", j as f64 / 10.0));
        }
    }
    write(dir.path(), "flat.csv", &text);
    let out = robfda(
        &["trend", "--data", "flat.csv", "--probe", "constant", "--B", "200", "--seed", "3", "--out", "ci.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ci = &read_json(&dir.path().join("ci.json"))["result"];
    assert!((ci["coefficient"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((ci["upper"].as_f64().unwrap() - ci["lower"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(ci["significant"], true);
}

#[test]
fn simulate_reproduces_gaussian_efficiency_ratio() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "model1.ini",
        "name = model1\nstudy = ise\nmodel = 1\nscheme = complete\nn = 80\ngrid_size = 100\nestimators = square, huber:0.8\nR = 100\nseed = 11\n",
    );
    let out = robfda(&["simulate", "--config", "model1.ini", "--out", "res.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("res.csv")).unwrap();
    assert!(text.starts_with("scenario,estimator,metric,value\n"));
    let ratio: f64 = text
        .lines()
        .find(|l| l.starts_with("model1,huber:0.8,ratio_to_reference,"))
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.6..=1.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "toy.csv", TOY);
    write(
        dir.path(),
        "cov.ini",
        "name = cov\nstudy = coverage\nmodel = 3\nscheme = random-interval:0.3,0.3\nn = 20\ngrid_size = 20\nestimators = huber-scaled:0.2\nB = 100\nR = 3\nseed = 5\nprobes = linear, step:0.4\n",
    );
    let runs: [(&str, Vec<&str>); 4] = [
        ("ci.json", vec!["trend", "--data", "toy.csv", "--probe", "linear", "--B", "150", "--seed", "9"]),
        ("sim.csv", vec!["simulate", "--config", "cov.ini"]),
        ("masks.csv", vec!["masks", "--scheme", "snippet:0.3", "--n", "50", "--seed", "2"]),
        ("theta.csv", vec!["estimate", "--data", "toy.csv", "--loss", "huber-scaled:0.3", "--interpolate"]),
    ];
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "2", "1"].iter().enumerate() {
            let out_name = format!("{k}-{name}");
            let mut full: Vec<&str> = args.clone();
            full.extend(["--out", &out_name, "--threads", threads]);
            let out = robfda(&full, dir.path());
            assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
            let bytes = fs::read(dir.path().join(&out_name)).unwrap();
            let mut manifest = without_timestamps(&dir.path().join(format!("{out_name}.manifest.json")));
            manifest["outputs"] = Value::Null;
            outputs.push((bytes, manifest));
        }
        assert_eq!(outputs[0], outputs[1], "{name} differs between thread counts");
        assert_eq!(outputs[0], outputs[2], "{name} differs between runs");
    }
}

#[test]
fn manifest_records_config_and_seed() {
    let dir = TempDir::new().unwrap();
    let out = robfda(
        &["masks", "--scheme", "random-interval:0.3,0.3", "--n", "100", "--seed", "4", "--out", "m.csv", "--manifest", "run.json"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("W_n = "));
    let m = read_json(&dir.path().join("run.json"));
    assert_eq!(m["command"], "masks");
    assert_eq!(m["seed"], 4);
    assert_eq!(m["config"]["n"], 100);
    assert_eq!(m["outputs"], serde_json::json!(["m.csv"]));
    assert!(m["summary"]["w_n"].as_f64().unwrap() > 0.0);
    assert!(m["started"].is_string() && m["finished"].is_string());
    assert!(m["version"].is_string());
}

#[test]
fn help_documents_schemas() {
    let dir = TempDir::new().unwrap();
    let expect = [
        ("estimate", "t,theta,n_eff,status"),
        ("fanova", "p_value"),
        ("trend", "boot_median"),
        ("simulate", "scenario,estimator,metric,value"),
        ("masks", "b_hat"),
    ];
    for (cmd, needle) in expect {
        let out = robfda(&[cmd, "--help"], dir.path());
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains(needle), "{cmd} help lacks {needle}");
        assert!(text.contains("curve_id") || cmd == "simulate" || cmd == "masks", "{cmd} help lacks the input schema");
    }
    let top = robfda(&["--help"], dir.path());
    assert!(String::from_utf8_lossy(&top.stdout).contains("curve_id,group,t,value"));
}
