//! Data-generating processes and Monte Carlo study runners.
//!
//! Curves follow `X(t) = mu(t) + sigma(t) eps(t)` on a uniform grid, with
//! `eps` Gaussian, Student or Cauchy, either white or with exponential
//! correlation `exp(-|s - t| / d)`. The heavy-tailed correlated kinds use
//! the elliptical scale mixture `Z / sqrt(chi2_nu / nu)` with one mixing
//! draw per curve.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Cauchy, ChiSquared, Distribution, Normal, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{fit_completed, FitOptions, MEstimate, PointStatus};
use crate::grid::{inner_product, Grid};
use crate::inference::{trend_ci, Probe};
use crate::loss::LossChoice;
use crate::rng::{derive_seed, substream};
use crate::sampling::{generate_masks, MissingScheme};

/// Diagonal jitter added before the Cholesky factorization.
pub const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    /// `5 sin(2 pi t) + 3`.
    Smooth,
    /// `phi_0 + 2 phi_1 + 0.5 phi_2` in the shifted Legendre basis.
    Probe,
}

impl MeanKind {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            MeanKind::Smooth => 5.0 * (2.0 * PI * t).sin() + 3.0,
            MeanKind::Probe => {
                Probe::Constant.eval(t) + 2.0 * Probe::Linear.eval(t) + 0.5 * Probe::Quadratic.eval(t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleKind {
    Constant { sigma: f64 },
    /// `sigma(t_j) ~ N(mean, sd^2)` iid per grid point, shared by all curves
    /// of one draw. Negative draws are kept.
    RandomScale { mean: f64, sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorKind {
    GaussianExp { d: f64 },
    StudentExp { nu: f64, d: f64 },
    CauchyExp { d: f64 },
    WhiteStudent { nu: f64 },
    WhiteCauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContaminationKind {
    CauchyWhite { scale: f64 },
    CauchyExp { scale: f64, d: f64 },
}

/// Replaces `X` on `[a, b]` by `mu + zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub segment: (f64, f64),
    pub kind: ContaminationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    pub mean: MeanKind,
    pub scale: ScaleKind,
    pub error: ErrorKind,
    pub contamination: Option<Contamination>,
}

impl ProcessModel {
    /// Estimation-accuracy scenarios 1 to 6 with the smooth mean.
    pub fn preset(model: u32) -> Result<Self> {
        let gauss = ErrorKind::GaussianExp { d: 0.3 };
        let sigma2 = ScaleKind::Constant { sigma: 2.0 };
        let (scale, error, contamination) = match model {
            1 => (sigma2, gauss, None),
            2 => (sigma2, ErrorKind::StudentExp { nu: 3.0, d: 0.3 }, None),
            3 => (sigma2, ErrorKind::CauchyExp { d: 0.3 }, None),
            4 => (
                ScaleKind::RandomScale { mean: 2.0, sd: 10.0 },
                ErrorKind::WhiteStudent { nu: 3.0 },
                None,
            ),
            5 => (
                sigma2,
                gauss,
                Some(Contamination {
                    segment: (0.2, 0.4),
                    kind: ContaminationKind::CauchyWhite { scale: 1.0 },
                }),
            ),
            6 => (
                sigma2,
                gauss,
                Some(Contamination {
                    segment: (0.2, 0.4),
                    kind: ContaminationKind::CauchyExp { scale: 1.0, d: 0.3 },
                }),
            ),
            _ => return Err(Error::InvalidParameter(format!("unknown model {model} (expected 1-6)"))),
        };
        Ok(Self {
            mean: MeanKind::Smooth,
            scale,
            error,
            contamination,
        })
    }

    /// Gaussian curves contaminated by a correlated Cauchy process on
    /// `segment`, as in the trend-coverage study.
    pub fn contaminated_on(segment: (f64, f64)) -> Self {
        Self {
            mean: MeanKind::Probe,
            scale: ScaleKind::Constant { sigma: 2.0 },
            error: ErrorKind::GaussianExp { d: 0.3 },
            contamination: Some(Contamination {
                segment,
                kind: ContaminationKind::CauchyExp { scale: 1.0, d: 0.3 },
            }),
        }
    }

    pub fn with_mean(mut self, mean: MeanKind) -> Self {
        self.mean = mean;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self.scale {
            ScaleKind::Constant { sigma } if !(sigma.is_finite() && sigma >= 0.0) => return bad("sigma must be nonnegative"),
            ScaleKind::RandomScale { sd, .. } if !(sd.is_finite() && sd >= 0.0) => return bad("scale sd must be nonnegative"),
            _ => {}
        }
        match self.error {
            ErrorKind::GaussianExp { d } | ErrorKind::CauchyExp { d } if d.is_nan() || d <= 0.0 => return bad("range d must be positive"),
            ErrorKind::StudentExp { nu, d } if !(d > 0.0 && nu >= 1.0) => return bad("need d > 0 and nu >= 1"),
            ErrorKind::WhiteStudent { nu } if nu.is_nan() || nu < 1.0 => return bad("nu must be at least 1"),
            _ => {}
        }
        if let Some(c) = self.contamination {
            let (a, b) = c.segment;
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return bad("contamination segment must lie within [0, 1]");
            }
            match c.kind {
                ContaminationKind::CauchyWhite { scale } if scale.is_nan() || scale <= 0.0 => return bad("contamination scale must be positive"),
                ContaminationKind::CauchyExp { scale, d } if !(scale > 0.0 && d > 0.0) => {
                    return bad("contamination scale and d must be positive")
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn mean_on(&self, grid: &Grid) -> Vec<f64> {
        grid.map(|t| self.mean.eval(t))
    }
}

/// Lower Cholesky factor of `exp(-|t_j - t_k| / d) + jitter I`.
pub fn exp_cholesky(grid: &Grid, d: f64) -> Result<DMatrix<f64>> {
    let pts = grid.points();
    let m = pts.len();
    let cov = DMatrix::from_fn(m, m, |j, k| {
        let v = (-(pts[j] - pts[k]).abs() / d).exp();
        if j == k {
            v + CHOLESKY_JITTER
        } else {
            v
        }
    });
    cov.cholesky().map(|c| c.l()).ok_or(Error::Cholesky)
}

fn gaussian_path(l: &DMatrix<f64>, rng: &mut crate::rng::Rng) -> DVector<f64> {
    let z = DVector::from_fn(l.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
    l * z
}

fn mixing_factor(nu: f64, rng: &mut crate::rng::Rng) -> f64 {
    let chi = ChiSquared::new(nu).expect("nu >= 1");
    1.0 / (chi.sample(rng) / nu).sqrt()
}

/// Draws `n` complete curves on `grid`.
///
/// Curve `i` uses substream `(seed, i, 0)`; contamination uses `(seed, i, 1)`
/// so points outside the contaminated segment are identical with and
/// without it.
pub fn generate_curves(model: &ProcessModel, n: usize, grid: &Grid, seed: u64) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    let m = grid.len();
    let mu = model.mean_on(grid);
    let sigma: Vec<f64> = match model.scale {
        ScaleKind::Constant { sigma } => vec![sigma; m],
        ScaleKind::RandomScale { mean, sd } => {
            let mut rng = substream(seed, &[u64::MAX]);
            let normal = Normal::new(mean, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..m).map(|_| normal.sample(&mut rng)).collect()
        }
    };
    let base_chol = match model.error {
        ErrorKind::GaussianExp { d } | ErrorKind::StudentExp { d, .. } | ErrorKind::CauchyExp { d } => {
            Some(exp_cholesky(grid, d)?)
        }
        _ => None,
    };
    let cont_chol = match model.contamination {
        Some(Contamination {
            kind: ContaminationKind::CauchyExp { d, .. },
            ..
        }) => Some(exp_cholesky(grid, d)?),
        _ => None,
    };
    let curves = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[i as u64, 0]);
            let eps: Vec<f64> = match model.error {
                ErrorKind::GaussianExp { .. } => gaussian_path(base_chol.as_ref().unwrap(), &mut rng).iter().copied().collect(),
                ErrorKind::StudentExp { nu, .. } => {
                    let z = gaussian_path(base_chol.as_ref().unwrap(), &mut rng);
                    let w = mixing_factor(nu, &mut rng);
                    z.iter().map(|v| v * w).collect()
                }
                ErrorKind::CauchyExp { .. } => {
                    let z = gaussian_path(base_chol.as_ref().unwrap(), &mut rng);
                    let w = mixing_factor(1.0, &mut rng);
                    z.iter().map(|v| v * w).collect()
                }
                ErrorKind::WhiteStudent { nu } => {
                    let t = StudentT::new(nu).expect("nu >= 1");
                    (0..m).map(|_| t.sample(&mut rng)).collect()
                }
                ErrorKind::WhiteCauchy => {
                    let c = Cauchy::new(0.0, 1.0).expect("unit cauchy");
                    (0..m).map(|_| c.sample(&mut rng)).collect()
                }
            };
            let mut x: Vec<f64> = (0..m).map(|j| mu[j] + sigma[j] * eps[j]).collect();
            if let Some(c) = model.contamination {
                let mut crng = substream(seed, &[i as u64, 1]);
                let zeta: Vec<f64> = match c.kind {
                    ContaminationKind::CauchyWhite { scale } => {
                        let cd = Cauchy::new(0.0, scale).expect("positive scale");
                        (0..m).map(|_| cd.sample(&mut crng)).collect()
                    }
                    ContaminationKind::CauchyExp { scale, .. } => {
                        let z = gaussian_path(cont_chol.as_ref().unwrap(), &mut crng);
                        let w = mixing_factor(1.0, &mut crng);
                        z.iter().map(|v| scale * v * w).collect()
                    }
                };
                let (a, b) = c.segment;
                for (j, &t) in grid.points().iter().enumerate() {
                    if t >= a && t <= b {
                        x[j] = mu[j] + zeta[j];
                    }
                }
            }
            x
        })
        .collect();
    Ok(curves)
}

/// Discrete integrated squared error `(1/m) sum_j (theta_j - mu_j)^2`.
pub fn ise(theta_hat: &MEstimate, mu_true: &[f64]) -> Result<f64> {
    if theta_hat.theta.len() != mu_true.len() {
        return Err(Error::InvalidParameter("estimate and truth differ in length".into()));
    }
    if let Some(j) = theta_hat.status.iter().position(|s| *s == PointStatus::Undefined) {
        return Err(Error::Undefined {
            index: j,
            t: theta_hat.grid.points()[j],
        });
    }
    let m = mu_true.len() as f64;
    Ok(theta_hat
        .theta
        .iter()
        .zip(mu_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / m)
}

/// Which Monte Carlo study a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Ise,
    Coverage,
}

/// A complete, reproducible Monte Carlo scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub study: Study,
    pub model: ProcessModel,
    pub scheme: MissingScheme,
    pub n: usize,
    pub grid_size: usize,
    /// The first entry is the reference for median-ISE ratios.
    pub estimators: Vec<LossChoice>,
    pub bootstrap: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub probes: Vec<Probe>,
    pub alpha: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        self.model.validate()?;
        if self.n == 0 || self.repetitions == 0 || self.grid_size < 2 {
            return bad("n and repetitions must be at least 1, grid_size at least 2".into());
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        if self.study == Study::Coverage {
            if self.bootstrap < 100 {
                return bad(format!("coverage runs need B >= 100, got {}", self.bootstrap));
            }
            if self.probes.is_empty() {
                return bad("coverage runs need at least one probe".into());
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }

    /// Parses a flat `key = value` scenario description.
    ///
    /// Keys: `name, study (ise|coverage), model (1-6|cont1|cont2),
    /// mean (smooth|probe), sigma, d, scheme, n, grid_size, estimators
    /// (comma list of loss strings), B, R, seed, probes (comma list), alpha`.
    /// `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: ln + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str, default: f64| -> Result<f64> {
            take(k).map_or(Ok(default), |v| {
                v.parse()
                    .map_err(|_| Error::InvalidParameter(format!("`{k}` must be a number, got `{v}`")))
            })
        };
        let count = |k: &str, default: usize| -> Result<usize> {
            take(k).map_or(Ok(default), |v| {
                v.parse()
                    .map_err(|_| Error::InvalidParameter(format!("`{k}` must be a count, got `{v}`")))
            })
        };
        for k in kv.keys() {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::InvalidParameter(format!("unknown config key `{k}`")));
            }
        }

        let study = match take("study").unwrap_or("ise") {
            "ise" => Study::Ise,
            "coverage" => Study::Coverage,
            other => return Err(Error::InvalidParameter(format!("unknown study `{other}`"))),
        };
        let default_mean = match study {
            Study::Ise => "smooth",
            Study::Coverage => "probe",
        };
        let mean = match take("mean").unwrap_or(default_mean) {
            "smooth" => MeanKind::Smooth,
            "probe" => MeanKind::Probe,
            other => return Err(Error::InvalidParameter(format!("unknown mean `{other}`"))),
        };
        let model_key = take("model").unwrap_or("1");
        let mut model = match model_key {
            "cont1" => ProcessModel::contaminated_on((0.0, 0.3)),
            "cont2" => ProcessModel::contaminated_on((0.7, 1.0)),
            k => ProcessModel::preset(
                k.parse()
                    .map_err(|_| Error::InvalidParameter(format!("unknown model `{k}`")))?,
            )?,
        }
        .with_mean(mean);
        if let Some(s) = take("sigma") {
            let sigma = s
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`sigma` must be a number, got `{s}`")))?;
            model.scale = ScaleKind::Constant { sigma };
        }
        if take("d").is_some() {
            let d = num("d", 0.3)?;
            model.error = match model.error {
                ErrorKind::GaussianExp { .. } => ErrorKind::GaussianExp { d },
                ErrorKind::StudentExp { nu, .. } => ErrorKind::StudentExp { nu, d },
                ErrorKind::CauchyExp { .. } => ErrorKind::CauchyExp { d },
                other => other,
            };
        }
        let scheme: MissingScheme = take("scheme").unwrap_or("complete").parse()?;
        let estimators = take("estimators")
            .map_or_else(|| vec!["square".into(), "huber:0.8".into()], split_loss_list)
            .iter()
            .map(|s| s.parse::<LossChoice>())
            .collect::<Result<Vec<_>>>()?;
        let probes = take("probes")
            .unwrap_or("quadratic")
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::parse::<Probe>)
            .collect::<Result<Vec<_>>>()?;
        let cfg = Self {
            name: take("name").unwrap_or(model_key).to_string(),
            study,
            model,
            scheme,
            n: count("n", 80)?,
            grid_size: count("grid_size", 100)?,
            estimators,
            bootstrap: count("B", 400)?,
            repetitions: count("R", 100)?,
            seed: take("seed")
                .ok_or_else(|| Error::InvalidParameter("config must set `seed`".into()))?
                .parse()
                .map_err(|_| Error::InvalidParameter("`seed` must be an unsigned integer".into()))?,
            probes,
            alpha: num("alpha", 0.05)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "study",
    "model",
    "mean",
    "sigma",
    "d",
    "scheme",
    "n",
    "grid_size",
    "estimators",
    "B",
    "R",
    "seed",
    "probes",
    "alpha",
];

/// Splits `square, huber:0.8, squantile:0.5,0.1` into loss strings; a
/// purely numeric piece belongs to the previous entry.
fn split_loss_list(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for piece in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if piece.parse::<f64>().is_ok() {
            if let Some(last) = out.last_mut() {
                last.push(',');
                last.push_str(piece);
                continue;
            }
        }
        out.push(piece.to_string());
    }
    out
}

/// One generated repetition: complete curves, masks and the truth.
pub struct Replication {
    pub dataset: Dataset,
    pub mu: Vec<f64>,
}

/// Curves and masks for repetition `r` of `cfg`.
pub fn replicate(cfg: &ScenarioConfig, grid: &Grid, r: usize) -> Result<Replication> {
    let curves = generate_curves(&cfg.model, cfg.n, grid, derive_seed(cfg.seed, &[r as u64, 0]))?;
    let masks = generate_masks(&cfg.scheme, cfg.n, grid, derive_seed(cfg.seed, &[r as u64, 1]))?;
    let dataset = Dataset::from_rows(grid.clone(), curves, masks.masks)?;
    Ok(Replication {
        dataset,
        mu: cfg.model.mean_on(grid),
    })
}

/// Per-estimator summary of an ISE study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IseRow {
    pub estimator: String,
    pub median_ise: f64,
    pub mean_ise: f64,
    /// Median ISE of the reference (first) estimator over this one's.
    pub ratio_to_reference: f64,
    pub ise: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IseTable {
    pub scenario: String,
    pub rows: Vec<IseRow>,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Runs the estimation-accuracy study: for every repetition generate,
/// mask, fit each estimator and record its ISE against the true mean.
pub fn run_ise_study(cfg: &ScenarioConfig, opts: &FitOptions) -> Result<IseTable> {
    cfg.validate()?;
    let grid = Grid::uniform(cfg.grid_size)?;
    let per_rep: Vec<Vec<f64>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let rep = replicate(cfg, &grid, r)?;
            cfg.estimators
                .iter()
                .map(|e| ise(&fit_completed(&rep.dataset, e, opts)?, &rep.mu))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<IseRow> = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let ise: Vec<f64> = per_rep.iter().map(|r| r[k]).collect();
            IseRow {
                estimator: e.to_string(),
                median_ise: median(&ise),
                mean_ise: ise.iter().sum::<f64>() / ise.len() as f64,
                ratio_to_reference: f64::NAN,
                ise,
            }
        })
        .collect();
    let reference = rows[0].median_ise;
    for row in &mut rows {
        row.ratio_to_reference = reference / row.median_ise;
    }
    Ok(IseTable {
        scenario: cfg.name.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub estimator: String,
    pub probe: String,
    pub true_coefficient: f64,
    pub coverage: f64,
    pub median_length: f64,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTable {
    pub scenario: String,
    pub rows: Vec<CoverageRow>,
}

/// Runs the trend-coverage study: per repetition, bootstrap a percentile
/// interval for each (estimator, probe) and check whether it contains the
/// probe coefficient of the true mean.
pub fn run_coverage_study(cfg: &ScenarioConfig, opts: &FitOptions) -> Result<CoverageTable> {
    cfg.validate()?;
    let grid = Grid::uniform(cfg.grid_size)?;
    let mu = cfg.model.mean_on(&grid);
    let probes: Vec<Vec<f64>> = cfg.probes.iter().map(|p| p.on_grid(&grid)).collect::<Result<_>>()?;
    let truth: Vec<f64> = probes.iter().map(|p| inner_product(&mu, p, &grid)).collect::<Result<_>>()?;

    // (covered, length) per repetition, estimator, probe
    let per_rep: Vec<Vec<Vec<(bool, f64)>>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let rep = replicate(cfg, &grid, r)?;
            cfg.estimators
                .iter()
                .enumerate()
                .map(|(e, est)| {
                    probes
                        .iter()
                        .enumerate()
                        .map(|(p, probe)| {
                            let seed = derive_seed(cfg.seed, &[r as u64, 2, e as u64, p as u64]);
                            let ci = trend_ci(&rep.dataset, est, probe, cfg.bootstrap, cfg.alpha, seed, opts)?;
                            Ok((ci.lower <= truth[p] && truth[p] <= ci.upper, ci.upper - ci.lower))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = cfg.repetitions as f64;
    let mut rows = Vec::new();
    for (e, est) in cfg.estimators.iter().enumerate() {
        for (p, probe) in cfg.probes.iter().enumerate() {
            let hits = per_rep.iter().filter(|r| r[e][p].0).count();
            let lengths: Vec<f64> = per_rep.iter().map(|r| r[e][p].1).collect();
            rows.push(CoverageRow {
                estimator: est.to_string(),
                probe: probe.to_string(),
                true_coefficient: truth[p],
                coverage: hits as f64 / reps,
                median_length: median(&lengths),
                lengths,
            });
        }
    }
    Ok(CoverageTable {
        scenario: cfg.name.clone(),
        rows,
    })
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::Ise => "ise",
            Study::Coverage => "coverage",
        })
    }
}

impl FromStr for Study {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ise" => Ok(Study::Ise),
            "coverage" => Ok(Study::Coverage),
            _ => Err(Error::InvalidParameter(format!("unknown study `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{fit_marginal, interpolate_undefined};
    use crate::loss::LossSpec;

    fn noiseless(mean: MeanKind) -> ProcessModel {
        ProcessModel {
            mean,
            scale: ScaleKind::Constant { sigma: 0.0 },
            error: ErrorKind::GaussianExp { d: 0.3 },
            contamination: None,
        }
    }

    #[test]
    fn probe_mean_without_noise() {
        let g = Grid::uniform(11).unwrap();
        let x = generate_curves(&noiseless(MeanKind::Probe), 2, &g, 1).unwrap();
        for (j, &t) in g.points().iter().enumerate() {
            let expected =
                1.0 + 2.0 * 3f64.sqrt() * (2.0 * t - 1.0) + 0.5 * 5f64.sqrt() * (6.0 * t * t - 6.0 * t + 1.0);
            assert!((x[0][j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn contamination_leaves_outside_untouched() {
        let g = Grid::uniform(50).unwrap();
        let clean = ProcessModel::preset(1).unwrap();
        let dirty = ProcessModel::preset(6).unwrap();
        let a = generate_curves(&clean, 5, &g, 17).unwrap();
        let b = generate_curves(&dirty, 5, &g, 17).unwrap();
        for i in 0..5 {
            for (j, &t) in g.points().iter().enumerate() {
                if (0.2..=0.4).contains(&t) {
                    assert_ne!(a[i][j].to_bits(), b[i][j].to_bits());
                } else {
                    assert_eq!(a[i][j].to_bits(), b[i][j].to_bits());
                }
            }
        }
    }

    #[test]
    fn ise_values() {
        let g = Grid::uniform(100).unwrap();
        let mu = g.map(|t| t.sin());
        let est = |theta: Vec<f64>| MEstimate {
            grid: g.clone(),
            n_eff: vec![1; 100],
            status: vec![PointStatus::Solved; 100],
            theta,
        };
        assert_eq!(ise(&est(mu.clone()), &mu).unwrap(), 0.0);
        let plus1: Vec<f64> = mu.iter().map(|m| m + 1.0).collect();
        assert!((ise(&est(plus1), &mu).unwrap() - 1.0).abs() < 1e-12);
        let plus_t: Vec<f64> = mu.iter().zip(g.points()).map(|(m, t)| m + t).collect();
        // sum_j (j/99)^2 / 100 = 99*199/(6*99*100)
        let oracle: f64 = (0..100).map(|j| (j as f64 / 99.0).powi(2)).sum::<f64>() / 100.0;
        let v = ise(&est(plus_t), &mu).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 0.3350).abs() < 1e-4);
        let mut undef = est(mu.clone());
        undef.status[3] = PointStatus::Undefined;
        assert!(ise(&undef, &mu).is_err());
    }

    #[test]
    fn presets_and_validation() {
        for k in 1..=6 {
            ProcessModel::preset(k).unwrap().validate().unwrap();
        }
        assert!(ProcessModel::preset(7).is_err());
        let mut m = ProcessModel::preset(5).unwrap();
        m.contamination.as_mut().unwrap().segment = (0.5, 1.5);
        assert!(m.validate().is_err());
    }

    #[test]
    fn random_scale_is_shared_across_curves() {
        let g = Grid::uniform(30).unwrap();
        let mut model = ProcessModel::preset(4).unwrap();
        model.mean = MeanKind::Smooth;
        let x = generate_curves(&model, 3, &g, 5).unwrap();
        let y = generate_curves(&model, 3, &g, 5).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn config_parsing() {
        let cfg = ScenarioConfig::from_kv_str(
            "# table 1\nname = m3\nstudy = ise\nmodel = 3\nestimators = square, huber:0.8, squantile:0.5,0.1\nR = 4\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.name, "m3");
        assert_eq!(cfg.estimators.len(), 3);
        assert_eq!(cfg.estimators[2].to_string(), "squantile:0.5,0.1");
        assert_eq!(cfg.model.error, ErrorKind::CauchyExp { d: 0.3 });
        assert!(ScenarioConfig::from_kv_str("R = 4\n").is_err());
        assert!(ScenarioConfig::from_kv_str("seed = 1\nbogus = 2\n").is_err());
        assert!(ScenarioConfig::from_kv_str("seed = 1\nstudy = coverage\nB = 10\n").is_err());
        let cov = ScenarioConfig::from_kv_str("seed = 1\nstudy = coverage\nmodel = cont2\n").unwrap();
        assert_eq!(cov.model.mean, MeanKind::Probe);
        assert_eq!(cov.model.contamination.unwrap().segment, (0.7, 1.0));
    }

    #[test]
    fn identical_estimators_have_unit_ratio() {
        let cfg = ScenarioConfig::from_kv_str("seed = 3\nR = 5\nn = 20\ngrid_size = 20\nestimators = huber:0.8, huber:0.8\n").unwrap();
        let t = run_ise_study(&cfg, &FitOptions::default()).unwrap();
        assert_eq!(t.rows[1].ratio_to_reference, 1.0);
        assert_eq!(t, run_ise_study(&cfg, &FitOptions::default()).unwrap());
    }

    #[test]
    fn mean_of_noiseless_curves_is_exact() {
        let g = Grid::uniform(25).unwrap();
        let model = noiseless(MeanKind::Smooth);
        let x = generate_curves(&model, 4, &g, 2).unwrap();
        let d = Dataset::from_rows(g.clone(), x, vec![vec![true; 25]; 4]).unwrap();
        let est = interpolate_undefined(&fit_marginal(&d, &LossSpec::square(), &FitOptions::default()).unwrap()).unwrap();
        assert!(ise(&est, &model.mean_on(&g)).unwrap() < 1e-24);
    }
}
