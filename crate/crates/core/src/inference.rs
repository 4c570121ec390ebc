//! Bootstrap inference for location functions: joint curve resampling,
//! the L2-norm functional ANOVA test, and percentile intervals for probe
//! coefficients.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{fit_completed, FitOptions};
use crate::grid::{integrate, inner_product, Grid};
use crate::loss::LossChoice;
use crate::rng::{substream, Rng};

/// Smallest bootstrap size accepted by the tests and intervals.
pub const MIN_BOOTSTRAP: usize = 100;

/// Default number of draws from the null mixture.
pub const DEFAULT_MIXTURE_DRAWS: usize = 50_000;

/// Share of the covariance trace kept when truncating the eigen-expansion.
pub const TRACE_SHARE: f64 = 0.999;

const MIXTURE_CHUNK: usize = 4096;

/// Fixed functions to project a location estimate on.
///
/// `Constant`, `Linear` and `Quadratic` are the orthonormal shifted
/// Legendre polynomials on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Probe {
    Constant,
    Linear,
    Quadratic,
    /// `1{t >= x0}`.
    Step { x0: f64 },
}

impl Probe {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Probe::Constant => 1.0,
            Probe::Linear => 3f64.sqrt() * (2.0 * t - 1.0),
            Probe::Quadratic => 5f64.sqrt() * (6.0 * t * t - 6.0 * t + 1.0),
            Probe::Step { x0 } => {
                if t >= x0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn on_grid(self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Probe::Step { x0 } => step_probe(x0, grid),
            p => Ok(grid.map(|t| p.eval(t))),
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Constant => f.write_str("constant"),
            Probe::Linear => f.write_str("linear"),
            Probe::Quadratic => f.write_str("quadratic"),
            Probe::Step { x0 } => write!(f, "step:{x0}"),
        }
    }
}

impl FromStr for Probe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "constant" => Ok(Probe::Constant),
            "linear" => Ok(Probe::Linear),
            "quadratic" => Ok(Probe::Quadratic),
            other => match other.strip_prefix("step:") {
                Some(x) => {
                    let x0: f64 = x
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad step location `{x}`")))?;
                    check_step(x0)?;
                    Ok(Probe::Step { x0 })
                }
                None => Err(Error::InvalidParameter(format!(
                    "unknown probe `{other}` (expected constant | linear | quadratic | step:<x0>)"
                ))),
            },
        }
    }
}

fn check_step(x0: f64) -> Result<()> {
    if x0 > 0.0 && x0 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step location must lie in (0, 1), got {x0}")))
    }
}

/// Step function `1{t >= x0}` on the grid.
pub fn step_probe(x0: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_step(x0)?;
    Ok(grid.map(|t| if t >= x0 { 1.0 } else { 0.0 }))
}

fn resample_with(dataset: &Dataset, rng: &mut Rng) -> Dataset {
    let n = dataset.n_curves();
    let curves = (0..n)
        .map(|_| dataset.curves()[rng.random_range(0..n)].clone())
        .collect();
    Dataset::from_resample(dataset.grid().clone(), curves)
}

/// Draws `n` whole curves (values and mask together) with replacement.
/// Replicate `b` uses substream `(seed, b)`.
pub fn resample(dataset: &Dataset, seed: u64, replicate_index: u64) -> Dataset {
    resample_with(dataset, &mut substream(seed, &[replicate_index]))
}

/// Bootstrap estimates per group: `replicates[g][b]` is a grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEnsemble {
    pub replicates: Vec<Vec<Vec<f64>>>,
    pub b: usize,
    pub seed: u64,
}

/// Refits `choice` on `b` joint resamples of each group. Replicate `b` of
/// group `g` uses substream `(seed, g, b)`; undefined points of each refit
/// are interpolated.
pub fn bootstrap_ensemble(
    groups: &[Dataset],
    choice: &LossChoice,
    b: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<BootstrapEnsemble> {
    let jobs: Vec<(usize, usize)> = (0..groups.len()).flat_map(|g| (0..b).map(move |r| (g, r))).collect();
    let fits: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let mut rng = substream(seed, &[g as u64, r as u64]);
            let star = resample_with(&groups[g], &mut rng);
            Ok(fit_completed(&star, choice, opts)?.theta)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut it = fits.into_iter();
    let replicates = (0..groups.len()).map(|_| it.by_ref().take(b).collect()).collect();
    Ok(BootstrapEnsemble { replicates, b, seed })
}

/// Normalization of the pooled bootstrap covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceScaling {
    /// `(1/(kB)) sum_g n_g sum_b dev dev`: each group's bootstrap covariance
    /// is put on the `sqrt(n_g)` scale before averaging.
    PerGroup,
    /// `(n/(kB)) sum_g sum_b dev dev` with `n` the total sample size.
    Pooled,
}

/// Bootstrap covariance of the location estimate on the grid.
pub fn bootstrap_covariance(ensemble: &BootstrapEnsemble, group_sizes: &[usize], scaling: VarianceScaling) -> DMatrix<f64> {
    let k = ensemble.replicates.len();
    let m = ensemble.replicates[0][0].len();
    let b = ensemble.b as f64;
    let n_total: usize = group_sizes.iter().sum();
    let mut xi = DMatrix::<f64>::zeros(m, m);
    for (g, reps) in ensemble.replicates.iter().enumerate() {
        let mean: Vec<f64> = (0..m).map(|j| reps.iter().map(|r| r[j]).sum::<f64>() / b).collect();
        let factor = match scaling {
            VarianceScaling::PerGroup => group_sizes[g] as f64,
            VarianceScaling::Pooled => n_total as f64,
        } / (k as f64 * b);
        let mut dev = DMatrix::<f64>::zeros(m, reps.len());
        for (c, r) in reps.iter().enumerate() {
            for j in 0..m {
                dev[(j, c)] = r[j] - mean[j];
            }
        }
        xi += (&dev * dev.transpose()) * factor;
    }
    xi
}

/// Scaled eigenvalues of a covariance operator and Monte Carlo draws of
/// `sum_r lambda_r chi2_df`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMixture {
    /// Decreasing, nonnegative, summing to about one.
    pub lambdas: Vec<f64>,
    /// `int xi(t, t) dt`.
    pub trace: f64,
    pub df: usize,
    #[serde(skip)]
    draws: Vec<f64>,
}

impl EigenMixture {
    /// Sorted draws from the null mixture.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    /// `(1 + #{draws >= t}) / (M + 1)`.
    pub fn p_value(&self, t: f64) -> f64 {
        let below = self.draws.partition_point(|&d| d < t);
        let above = self.draws.len() - below;
        (1 + above) as f64 / (self.draws.len() + 1) as f64
    }
}

/// Eigen-decomposes the quadrature-weighted covariance
/// `W^{1/2} xi W^{1/2}`, keeps the leading eigenvalues covering 99.9% of
/// the trace, scales them by the trace and simulates the mixture with
/// `m` draws from `seed`.
pub fn eigen_mixture(xi: &DMatrix<f64>, grid: &Grid, k: usize, m: usize, seed: u64) -> Result<EigenMixture> {
    let size = grid.len();
    if xi.nrows() != size || xi.ncols() != size {
        return Err(Error::InvalidParameter(format!(
            "covariance is {}x{}, grid has {size} points",
            xi.nrows(),
            xi.ncols()
        )));
    }
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("covariance has non-finite entries".into()));
    }
    let scale = xi.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let asym = (0..size)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (xi[(i, j)] - xi[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-8 * scale {
        return Err(Error::InvalidParameter(format!("covariance is not symmetric (gap {asym:e})")));
    }

    let root_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(size, size, |i, j| 0.5 * (xi[(i, j)] + xi[(j, i)]) * root_w[i] * root_w[j]);
    let trace: f64 = (0..size).map(|j| a[(j, j)]).sum();

    let mut kappa: Vec<f64> = SymmetricEigen::new(a)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    kappa.sort_by(|x, y| y.total_cmp(x));

    let lambdas = if trace > 0.0 {
        let total: f64 = kappa.iter().sum();
        let mut kept = Vec::new();
        let mut cum = 0.0;
        for &v in &kappa {
            if cum >= TRACE_SHARE * total || v <= 0.0 {
                break;
            }
            cum += v;
            kept.push(v / trace);
        }
        kept
    } else {
        Vec::new()
    };

    let df = k - 1;
    let draws = mixture_draws(&lambdas, df, m, seed);
    Ok(EigenMixture {
        lambdas,
        trace,
        df,
        draws,
    })
}

fn mixture_draws(lambdas: &[f64], df: usize, m: usize, seed: u64) -> Vec<f64> {
    let chunks = m.div_ceil(MIXTURE_CHUNK);
    let mut draws: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = substream(seed, &[c as u64]);
            let len = MIXTURE_CHUNK.min(m - c * MIXTURE_CHUNK);
            (0..len)
                .map(|_| {
                    lambdas
                        .iter()
                        .map(|&l| {
                            let chi: f64 = (0..df)
                                .map(|_| {
                                    let z: f64 = rng.sample(StandardNormal);
                                    z * z
                                })
                                .sum();
                            l * chi
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    draws
}

/// Settings for [`anova_l2_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaConfig {
    pub b: usize,
    pub mixture_draws: usize,
    pub seed: u64,
    pub scaling: VarianceScaling,
}

impl AnovaConfig {
    pub fn new(b: usize, seed: u64) -> Self {
        Self {
            b,
            mixture_draws: DEFAULT_MIXTURE_DRAWS,
            seed,
            scaling: VarianceScaling::PerGroup,
        }
    }
}

/// Outcome of the L2-norm functional ANOVA test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `int SSR(t) dt / int xi*(t, t) dt`.
    pub statistic: f64,
    pub p_value: f64,
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub ssr_integral: f64,
    pub groups: usize,
    pub group_sizes: Vec<usize>,
    pub b: usize,
    pub mixture_draws: usize,
    pub seed: u64,
    pub scaling: VarianceScaling,
}

/// Tests equality of the location functions of `groups`.
///
/// The between-group sum of squares around the size-weighted grand mean is
/// integrated, divided by the integrated bootstrap variance and compared
/// against the mixture of scaled eigenvalues of the bootstrap covariance. Bootstrap draws use substreams
/// `(seed, g, b)` and the mixture uses a seed derived from `seed`.
pub fn anova_l2_test(groups: &[Dataset], choice: &LossChoice, cfg: &AnovaConfig, opts: &FitOptions) -> Result<TestResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least two groups, got {k}")));
    }
    if cfg.b < MIN_BOOTSTRAP {
        return Err(Error::InvalidParameter(format!(
            "B = {} is too small for a stable variance estimate (need >= {MIN_BOOTSTRAP})",
            cfg.b
        )));
    }
    if cfg.mixture_draws == 0 {
        return Err(Error::InvalidParameter("mixture_draws must be positive".into()));
    }
    let grid = groups[0].grid();
    for (g, d) in groups.iter().enumerate() {
        if d.grid() != grid {
            return Err(Error::InvalidDataset(format!("group {g} uses a different grid")));
        }
        if d.n_curves() < 2 {
            return Err(Error::InvalidDataset(format!("group {g} has fewer than 2 curves")));
        }
    }
    let sizes: Vec<usize> = groups.iter().map(Dataset::n_curves).collect();
    let n: usize = sizes.iter().sum();

    let fits: Vec<Vec<f64>> = groups
        .iter()
        .map(|d| fit_completed(d, choice, opts).map(|e| e.theta))
        .collect::<Result<_>>()?;
    let m = grid.len();
    // sum_g n_g (f_g - grand)^2 = sum_{g<h} n_g n_h (f_g - f_h)^2 / n
    let ssr: Vec<f64> = (0..m)
        .map(|j| {
            let mut acc = 0.0;
            for g in 0..k {
                for h in g + 1..k {
                    acc += (sizes[g] * sizes[h]) as f64 * (fits[g][j] - fits[h][j]).powi(2);
                }
            }
            acc / n as f64
        })
        .collect();
    let ssr_integral = integrate(&ssr, grid)?;

    let ensemble = bootstrap_ensemble(groups, choice, cfg.b, cfg.seed, opts)?;
    let xi = bootstrap_covariance(&ensemble, &sizes, cfg.scaling);
    let mixture = eigen_mixture(&xi, grid, k, cfg.mixture_draws, crate::rng::derive_seed(cfg.seed, &[u64::MAX]))?;

    let statistic = if ssr_integral == 0.0 {
        0.0
    } else if mixture.trace > 0.0 {
        ssr_integral / mixture.trace
    } else {
        f64::INFINITY
    };
    Ok(TestResult {
        statistic,
        p_value: mixture.p_value(statistic),
        eigenvalues: mixture.lambdas.clone(),
        trace: mixture.trace,
        ssr_integral,
        groups: k,
        group_sizes: sizes,
        b: cfg.b,
        mixture_draws: cfg.mixture_draws,
        seed: cfg.seed,
        scaling: cfg.scaling,
    })
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Probe coefficient of the full-sample fit and its bootstrap replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendBootstrap {
    pub coefficient: f64,
    /// Sorted replicate coefficients.
    pub replicates: Vec<f64>,
    pub seed: u64,
}

impl TrendBootstrap {
    /// Percentile interval at level `1 - alpha`.
    pub fn interval(&self, alpha: f64) -> (f64, f64) {
        (
            percentile_sorted(&self.replicates, alpha / 2.0),
            percentile_sorted(&self.replicates, 1.0 - alpha / 2.0),
        )
    }

    pub fn median(&self) -> f64 {
        percentile_sorted(&self.replicates, 0.5)
    }

    pub fn ci(&self, probe: &str, alpha: f64) -> TrendCI {
        let (lower, upper) = self.interval(alpha);
        TrendCI {
            probe: probe.to_string(),
            coefficient: self.coefficient,
            lower,
            upper,
            boot_median: self.median(),
            alpha,
            b: self.replicates.len(),
            significant: lower > 0.0 || upper < 0.0,
            seed: self.seed,
        }
    }
}

/// Percentile bootstrap interval for a probe coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCI {
    pub probe: String,
    pub coefficient: f64,
    pub lower: f64,
    pub upper: f64,
    pub boot_median: f64,
    pub alpha: f64,
    pub b: usize,
    /// Interval excludes zero.
    pub significant: bool,
    pub seed: u64,
}

/// Projects the fit and `b` bootstrap refits onto `probe`. Replicate `r`
/// resamples with substream `(seed, r)`, matching [`resample`].
pub fn trend_bootstrap(
    dataset: &Dataset,
    choice: &LossChoice,
    probe: &[f64],
    b: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<TrendBootstrap> {
    let grid = dataset.grid();
    if probe.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "probe has {} entries, grid has {}",
            probe.len(),
            grid.len()
        )));
    }
    if let Some(j) = probe.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFinite {
            index: j,
            t: grid.points()[j],
        });
    }
    if b < MIN_BOOTSTRAP {
        return Err(Error::InvalidParameter(format!("B = {b} is too small (need >= {MIN_BOOTSTRAP})")));
    }
    let fit = fit_completed(dataset, choice, opts)?;
    let coefficient = inner_product(&fit.theta, probe, grid)?;
    let mut replicates: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|r| {
            let star = resample(dataset, seed, r as u64);
            let est = fit_completed(&star, choice, opts)?;
            inner_product(&est.theta, probe, grid)
        })
        .collect::<Result<_>>()?;
    replicates.sort_by(f64::total_cmp);
    Ok(TrendBootstrap {
        coefficient,
        replicates,
        seed,
    })
}

/// Percentile bootstrap interval at level `1 - alpha` for `<theta, probe>`.
pub fn trend_ci(
    dataset: &Dataset,
    choice: &LossChoice,
    probe: &[f64],
    b: usize,
    alpha: f64,
    seed: u64,
    opts: &FitOptions,
) -> Result<TrendCI> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(trend_bootstrap(dataset, choice, probe, b, seed, opts)?.ci("custom", alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossSpec;

    fn toy(n: usize, m: usize) -> Dataset {
        let grid = Grid::uniform(m).unwrap();
        let rows = (0..n).map(|i| (0..m).map(|j| (i * m + j) as f64).collect()).collect();
        let masks = (0..n).map(|i| (0..m).map(|j| (i + j) % 3 != 0).collect()).collect();
        Dataset::from_rows(grid, rows, masks).unwrap()
    }

    #[test]
    fn single_curve_resample_repeats_it() {
        let d = toy(1, 5);
        let r = resample(&d, 3, 0);
        assert_eq!(r.n_curves(), 1);
        assert!(r.curves()[0].same_as(&d.curves()[0]));
    }

    #[test]
    fn resampled_curves_come_from_the_original() {
        let d = toy(12, 7);
        for b in 0..20 {
            let r = resample(&d, 1, b);
            assert_eq!(r.n_curves(), 12);
            for c in r.curves() {
                assert!(d.curves().iter().any(|o| o.same_as(c)));
            }
        }
    }

    #[test]
    fn probes() {
        let g = Grid::uniform(11).unwrap();
        let s = step_probe(0.5, &g).unwrap();
        assert_eq!(s, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(step_probe(0.0, &g).is_err());
        assert!(step_probe(1.0, &g).is_err());
        assert_eq!("step:0.42".parse::<Probe>().unwrap(), Probe::Step { x0: 0.42 });
        assert!("step:1.2".parse::<Probe>().is_err());
        assert!("cubic".parse::<Probe>().is_err());
        for p in ["constant", "linear", "quadratic", "step:0.25"] {
            assert_eq!(p.parse::<Probe>().unwrap().to_string(), p);
        }
    }

    #[test]
    fn step_area() {
        let g = Grid::uniform(1001).unwrap();
        for x0 in [0.1, 0.42, 0.77] {
            let s = step_probe(x0, &g).unwrap();
            let c = inner_product(&vec![1.0; 1001], &s, &g).unwrap();
            assert!((c - (1.0 - x0)).abs() <= 1e-3);
        }
    }

    #[test]
    fn rank_one_covariance_has_unit_eigenvalue() {
        let g = Grid::uniform(40).unwrap();
        let phi = g.map(|t| 1.0 + t);
        let xi = DMatrix::from_fn(40, 40, |i, j| 3.0 * phi[i] * phi[j]);
        let mix = eigen_mixture(&xi, &g, 2, 1000, 1).unwrap();
        assert_eq!(mix.lambdas.len(), 1);
        assert!((mix.lambdas[0] - 1.0).abs() < 1e-10);
        let v: f64 = g.weights().iter().zip(&phi).map(|(w, p)| 3.0 * w * p * p).sum();
        assert!((mix.trace - v).abs() < 1e-10);
    }

    #[test]
    fn p_value_bounds_and_monotonicity() {
        let g = Grid::uniform(10).unwrap();
        let xi = DMatrix::<f64>::identity(10, 10);
        let mix = eigen_mixture(&xi, &g, 3, 2000, 4).unwrap();
        assert_eq!(mix.p_value(0.0), 1.0);
        assert_eq!(mix.p_value(f64::INFINITY), 1.0 / 2001.0);
        let mut prev = 1.0;
        for i in 0..100 {
            let p = mix.p_value(i as f64 * 0.1);
            assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn eigen_mixture_rejects_bad_input() {
        let g = Grid::uniform(3).unwrap();
        let mut xi = DMatrix::<f64>::identity(3, 3);
        xi[(0, 1)] = 0.5;
        assert!(eigen_mixture(&xi, &g, 2, 10, 0).is_err());
        xi[(0, 1)] = f64::NAN;
        assert!(eigen_mixture(&xi, &g, 2, 10, 0).is_err());
        assert!(eigen_mixture(&DMatrix::identity(2, 2), &g, 2, 10, 0).is_err());
    }

    #[test]
    fn anova_argument_checks() {
        let d = toy(5, 6);
        let loss: LossChoice = LossSpec::square().into();
        let opts = FitOptions::default();
        assert!(anova_l2_test(std::slice::from_ref(&d), &loss, &AnovaConfig::new(200, 1), &opts).is_err());
        assert!(anova_l2_test(&[d.clone(), d.clone()], &loss, &AnovaConfig::new(50, 1), &opts).is_err());
        assert!(anova_l2_test(&[d.clone(), toy(1, 6)], &loss, &AnovaConfig::new(200, 1), &opts).is_err());
        assert!(anova_l2_test(&[d.clone(), toy(5, 7)], &loss, &AnovaConfig::new(200, 1), &opts).is_err());
    }

    #[test]
    fn identical_groups_give_zero_statistic() {
        let d = toy(8, 10);
        let r = anova_l2_test(
            &[d.clone(), d],
            &LossSpec::huber(5.0).unwrap().into(),
            &AnovaConfig::new(100, 7),
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_fit_and_probe() {
        let g = Grid::uniform(21).unwrap();
        let d = Dataset::from_rows(g, vec![vec![5.0; 21]; 6], vec![vec![true; 21]; 6]).unwrap();
        let ones = vec![1.0; 21];
        let ci = trend_ci(&d, &LossSpec::huber(0.8).unwrap().into(), &ones, 100, 0.05, 3, &FitOptions::default()).unwrap();
        assert!((ci.coefficient - 5.0).abs() < 1e-12);
        assert!((ci.upper - ci.lower).abs() < 1e-12);
        assert!(ci.significant);
        assert!(trend_ci(&d, &LossSpec::square().into(), &ones, 10, 0.05, 3, &FitOptions::default()).is_err());
        assert!(trend_ci(&d, &LossSpec::square().into(), &ones[..3], 100, 0.05, 3, &FitOptions::default()).is_err());
    }

    #[test]
    fn percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 1.0), 5.0);
        assert_eq!(percentile_sorted(&v, 0.5), 3.0);
        assert_eq!(percentile_sorted(&v, 0.125), 1.5);
    }
}
