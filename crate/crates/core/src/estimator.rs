//! Marginal M-estimation of a location function from partially observed
//! curves.
//!
//! At each grid point `t` the estimate minimizes
//! `sum_i delta_i(t) * rho(X_i(t) - h)` over `h`, using only the curves
//! observed there. Points nobody observes are left undefined and can be
//! filled by [`interpolate_undefined`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PartialCurve};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::loss::{LossChoice, LossKind, LossSpec, PointLoss};

/// Solver settings for [`fit_marginal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Root accepted once `|sum w psi| <= tol_root * sum w * sup|psi|`.
    pub tol_root: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol_root: 1e-10,
            max_iter: 200,
        }
    }
}

/// How a grid point of an [`MEstimate`] got its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Solved,
    Interpolated,
    Undefined,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Solved => "solved",
            PointStatus::Interpolated => "interpolated",
            PointStatus::Undefined => "undefined",
        }
    }
}

/// Pointwise location estimate on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MEstimate {
    pub grid: Grid,
    /// Estimate per grid point; NaN where undefined.
    pub theta: Vec<f64>,
    /// Number of curves observed at each grid point.
    pub n_eff: Vec<usize>,
    pub status: Vec<PointStatus>,
}

impl MEstimate {
    pub fn is_complete(&self) -> bool {
        !self.status.contains(&PointStatus::Undefined)
    }

    /// First undefined point, if any.
    pub fn first_undefined(&self) -> Option<usize> {
        self.status.iter().position(|s| *s == PointStatus::Undefined)
    }
}

/// Per-point Huber tuning `c(t) = max(r * MAD(t), c_floor)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningProfile {
    pub c_of_t: Vec<f64>,
    pub r: f64,
}

/// Default lower bound for scaled tuning constants.
pub const C_FLOOR: f64 = 1e-6;

/// Influence denominators at or below this are treated as singular.
pub const D_FLOOR: f64 = 1e-8;

/// Fits the marginal M-estimator with unit curve weights.
pub fn fit_marginal(dataset: &Dataset, loss: &LossSpec, opts: &FitOptions) -> Result<MEstimate> {
    fit_marginal_weighted(dataset, loss, None, opts)
}

/// Fits the marginal M-estimator with optional nonnegative curve weights.
///
/// Weights enter the criterion as `sum_i w_i delta_i(t) rho(X_i(t) - h)`;
/// `n_eff` still counts observing curves.
pub fn fit_marginal_weighted(
    dataset: &Dataset,
    loss: &LossSpec,
    weights: Option<&[f64]>,
    opts: &FitOptions,
) -> Result<MEstimate> {
    let grid = dataset.grid();
    let n = dataset.n_curves();
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {n} curves",
                w.len()
            )));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter("curve weights must be finite and nonnegative".into()));
        }
    }
    if let Some(p) = &loss.tuning_profile {
        if p.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "tuning profile has {} entries, grid has {}",
                p.len(),
                grid.len()
            )));
        }
    }
    dataset.check_finite()?;

    let curves = dataset.curves();
    let solved: Vec<Result<(f64, usize)>> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let mut xs = Vec::with_capacity(n);
            let mut ws = Vec::with_capacity(n);
            for (i, c) in curves.iter().enumerate() {
                if let Some(x) = c.get(j) {
                    xs.push(x);
                    ws.push(weights.map_or(1.0, |w| w[i]));
                }
            }
            let count = xs.len();
            if ws.iter().sum::<f64>() <= 0.0 {
                return Ok((f64::NAN, count));
            }
            solve_point(&xs, &ws, loss.at(Some(j)), opts)
                .map(|h| (h, count))
                .map_err(|message| Error::Solver { index: j, message })
        })
        .collect();

    let mut theta = Vec::with_capacity(grid.len());
    let mut n_eff = Vec::with_capacity(grid.len());
    let mut status = Vec::with_capacity(grid.len());
    for r in solved {
        let (h, count) = r?;
        theta.push(h);
        n_eff.push(count);
        status.push(if h.is_nan() {
            PointStatus::Undefined
        } else {
            PointStatus::Solved
        });
    }
    if status.iter().all(|s| *s == PointStatus::Undefined) {
        return Err(Error::EmptyData);
    }
    Ok(MEstimate {
        grid: grid.clone(),
        theta,
        n_eff,
        status,
    })
}

/// Resolves data-dependent losses (MAD-scaled tuning) for `dataset`.
pub fn resolve_loss(dataset: &Dataset, choice: &LossChoice) -> Result<LossSpec> {
    match choice {
        LossChoice::Fixed(spec) => Ok(spec.clone()),
        LossChoice::HuberScaled { r } => {
            let profile = mad_profile(dataset, *r, C_FLOOR)?;
            LossSpec::huber(1.0)?.with_profile(profile.c_of_t)
        }
        LossChoice::SmoothedQuantileScaled { tau, factor } => {
            let profile = mad_profile(dataset, *factor, C_FLOOR)?;
            LossSpec::smoothed_quantile(*tau, 1.0)?.with_profile(profile.c_of_t)
        }
    }
}

/// Resolves `choice` on `dataset`, fits, and fills undefined points.
pub fn fit_completed(dataset: &Dataset, choice: &LossChoice, opts: &FitOptions) -> Result<MEstimate> {
    let loss = resolve_loss(dataset, choice)?;
    let est = fit_marginal(dataset, &loss, opts)?;
    interpolate_undefined(&est)
}

/// Solves the weighted location problem for one grid point.
///
/// `values` is nonempty and `weights` has positive sum.
fn solve_point(values: &[f64], weights: &[f64], loss: PointLoss, opts: &FitOptions) -> std::result::Result<f64, String> {
    match loss {
        PointLoss::Square => {
            let total: f64 = weights.iter().sum();
            Ok(values.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total)
        }
        PointLoss::Quantile { tau } => Ok(weighted_quantile(values, weights, tau)),
        PointLoss::Huber { .. } | PointLoss::SmoothedQuantile { .. } => solve_monotone(values, weights, loss, opts),
    }
}

/// Exact weighted `tau`-quantile: the smallest order statistic whose
/// cumulative weight reaches `tau * W`, averaged with the next one when the
/// cumulative weight hits `tau * W` exactly.
pub fn weighted_quantile(values: &[f64], weights: &[f64], tau: f64) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| (*x, *w))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let target = tau * total;
    let tie = 1e-12 * total;
    let mut cum = 0.0;
    for (k, &(x, w)) in pairs.iter().enumerate() {
        cum += w;
        if cum >= target - tie {
            if (cum - target).abs() <= tie && k + 1 < pairs.len() {
                return 0.5 * (x + pairs[k + 1].0);
            }
            return x;
        }
    }
    pairs.last().map_or(f64::NAN, |p| p.0)
}

fn score_sums(values: &[f64], weights: &[f64], loss: PointLoss, h: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    for (&x, &w) in values.iter().zip(weights) {
        s += w * loss.psi(x - h);
        ds += w * loss.psi_dot(x - h);
    }
    (s, ds)
}

/// `sup |psi|`, the unit the score-sum tolerance is measured in.
fn psi_bound(loss: PointLoss) -> f64 {
    match loss {
        PointLoss::Huber { c } => c,
        PointLoss::SmoothedQuantile { tau, .. } | PointLoss::Quantile { tau } => tau.max(1.0 - tau),
        PointLoss::Square => 1.0,
    }
}

fn kink_halfwidth(loss: PointLoss) -> f64 {
    match loss {
        PointLoss::Huber { c } => c,
        PointLoss::SmoothedQuantile { h, .. } => h,
        _ => 0.0,
    }
}

/// Root of the nonincreasing map `h -> sum w psi(x - h)`, bracketed by the
/// data range and widened when an asymmetric loss puts it outside.
///
/// Bisection keeps the bracket; a Newton step replaces the midpoint when
/// it lands strictly inside it. If the root sits on a flat stretch
/// (every residual outside the kink band), the midpoint of that stretch is
/// returned.
fn solve_monotone(values: &[f64], weights: &[f64], loss: PointLoss, opts: &FitOptions) -> std::result::Result<f64, String> {
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = weights.iter().sum();
    let tol = opts.tol_root * total * psi_bound(loss);
    let (mut s_lo, _) = score_sums(values, weights, loss, lo);
    let (mut s_hi, _) = score_sums(values, weights, loss, hi);
    let mut width = if hi > lo {
        hi - lo
    } else {
        kink_halfwidth(loss).max(1e-12 * (1.0 + lo.abs()))
    };
    for _ in 0..opts.max_iter {
        if s_lo >= -tol && s_hi <= tol {
            break;
        }
        if s_lo < -tol {
            hi = lo;
            s_hi = s_lo;
            lo -= width;
            s_lo = score_sums(values, weights, loss, lo).0;
        } else {
            lo = hi;
            s_lo = s_hi;
            hi += width;
            s_hi = score_sums(values, weights, loss, hi).0;
        }
        width *= 2.0;
    }
    if s_lo < -tol || s_hi > tol {
        return Err(format!("score sum has no sign change on [{lo}, {hi}]"));
    }
    if s_lo.abs() <= tol && s_hi.abs() > tol {
        return Ok(flat_midpoint(values, weights, loss, lo, tol));
    }
    if s_hi.abs() <= tol && s_lo.abs() > tol {
        return Ok(flat_midpoint(values, weights, loss, hi, tol));
    }

    let mut h = 0.5 * (lo + hi);
    for _ in 0..opts.max_iter {
        let (s, ds) = score_sums(values, weights, loss, h);
        if s.abs() <= tol {
            return Ok(flat_midpoint(values, weights, loss, h, tol));
        }
        if s > 0.0 {
            lo = h;
        } else {
            hi = h;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // bracket collapsed to adjacent floats
            return Ok(flat_midpoint(values, weights, loss, h, tol));
        }
        h = if ds > 1e-8 {
            let newton = h + s / ds;
            if newton > lo && newton < hi {
                newton
            } else {
                mid
            }
        } else {
            mid
        };
    }
    Err(format!("no convergence after {} iterations", opts.max_iter))
}

/// Midpoint of the flat stretch of the score sum at or next to `h`, or `h`
/// itself when the score is not flat there.
fn flat_midpoint(values: &[f64], weights: &[f64], loss: PointLoss, h: f64, tol: f64) -> f64 {
    let a = kink_halfwidth(loss);
    let mut kinks: Vec<f64> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .flat_map(|(&x, _)| [x - a, x + a])
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    // stretch i spans kinks[i - 1]..kinks[i]
    let i = kinks.partition_point(|&k| k <= h);
    for j in [i, i.wrapping_sub(1), i + 1] {
        if j == 0 || j >= kinks.len() {
            continue;
        }
        let mid = 0.5 * (kinks[j - 1] + kinks[j]);
        let (s, ds) = score_sums(values, weights, loss, mid);
        if ds <= 0.0 && s.abs() <= tol {
            return mid;
        }
    }
    h
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Marginal median absolute deviation at each grid point; `None` where no
/// curve is observed.
pub fn marginal_mad(dataset: &Dataset) -> Vec<Option<f64>> {
    (0..dataset.grid().len())
        .map(|j| {
            let mut xs = dataset.observed_at(j);
            if xs.is_empty() {
                return None;
            }
            xs.sort_by(f64::total_cmp);
            let med = median_sorted(&xs);
            let mut dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
            dev.sort_by(f64::total_cmp);
            Some(median_sorted(&dev))
        })
        .collect()
}

/// Scaled tuning constants `c(t) = max(r * MAD(t), c_floor)`.
///
/// Unobserved points take linearly interpolated values from their
/// neighbours (constant beyond the ends).
pub fn mad_profile(dataset: &Dataset, r: f64, c_floor: f64) -> Result<TuningProfile> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if !(c_floor.is_finite() && c_floor > 0.0) {
        return Err(Error::InvalidParameter(format!("c_floor must be positive, got {c_floor}")));
    }
    dataset.check_finite()?;
    let raw: Vec<Option<f64>> = marginal_mad(dataset)
        .into_iter()
        .map(|m| m.map(|mad| (r * mad).max(c_floor)))
        .collect();
    let c_of_t = fill_linear(dataset.grid().points(), &raw).ok_or(Error::EmptyData)?;
    Ok(TuningProfile { c_of_t, r })
}

/// Fills `None` entries by linear interpolation between known neighbours
/// and constant extrapolation at the ends. `None` if nothing is known.
fn fill_linear(points: &[f64], values: &[Option<f64>]) -> Option<Vec<f64>> {
    let known: Vec<usize> = (0..values.len()).filter(|&j| values[j].is_some()).collect();
    let (&first, &last) = (known.first()?, known.last()?);
    let mut out = Vec::with_capacity(values.len());
    let mut next = 0;
    for j in 0..values.len() {
        if let Some(v) = values[j] {
            out.push(v);
            next += 1;
            continue;
        }
        let v = if j < first {
            values[first].unwrap()
        } else if j > last {
            values[last].unwrap()
        } else {
            let l = known[next - 1];
            let r = known[next];
            let (vl, vr) = (values[l].unwrap(), values[r].unwrap());
            let w = (points[j] - points[l]) / (points[r] - points[l]);
            vl + w * (vr - vl)
        };
        out.push(v);
    }
    Some(out)
}

/// Fills undefined points by linear interpolation between the nearest
/// solved neighbours and by the nearest solved value at the boundaries.
pub fn interpolate_undefined(estimate: &MEstimate) -> Result<MEstimate> {
    let known: Vec<Option<f64>> = estimate
        .theta
        .iter()
        .zip(&estimate.status)
        .map(|(&v, s)| (*s != PointStatus::Undefined).then_some(v))
        .collect();
    let theta = fill_linear(estimate.grid.points(), &known).ok_or(Error::EmptyData)?;
    let status = estimate
        .status
        .iter()
        .map(|s| match s {
            PointStatus::Undefined => PointStatus::Interpolated,
            other => *other,
        })
        .collect();
    Ok(MEstimate {
        grid: estimate.grid.clone(),
        theta,
        n_eff: estimate.n_eff.clone(),
        status,
    })
}

/// Empirical influence-function denominator
/// `D(t) = (1/n) sum_i delta_i(t) psi_dot(X_i(t) - theta(t))`.
pub fn influence_denominator(dataset: &Dataset, loss: &LossSpec, theta_hat: &MEstimate) -> Vec<f64> {
    let n = dataset.n_curves() as f64;
    (0..dataset.grid().len())
        .map(|j| {
            let th = theta_hat.theta[j];
            let pl = loss.at(Some(j));
            dataset
                .curves()
                .iter()
                .filter_map(|c| c.get(j))
                .map(|x| pl.psi_dot(x - th))
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Influence of contaminating `dataset` with the curve `y_star`:
/// `IF(t) = delta*(t) psi(Y*(t) - theta(t)) / D(t)`.
pub fn influence_function(
    dataset: &Dataset,
    loss: &LossSpec,
    theta_hat: &MEstimate,
    y_star: &PartialCurve,
) -> Result<Vec<f64>> {
    let grid = dataset.grid();
    if y_star.len() != grid.len() || theta_hat.theta.len() != grid.len() {
        return Err(Error::InvalidParameter("contaminator or estimate not aligned to grid".into()));
    }
    let denom = influence_denominator(dataset, loss, theta_hat);
    let mut out = vec![0.0; grid.len()];
    for (j, slot) in out.iter_mut().enumerate() {
        let Some(y) = y_star.get(j) else { continue };
        let th = theta_hat.theta[j];
        if !th.is_finite() {
            return Err(Error::Undefined {
                index: j,
                t: grid.points()[j],
            });
        }
        if denom[j].is_nan() || denom[j] <= D_FLOOR {
            return Err(Error::SingularDenominator {
                index: j,
                t: grid.points()[j],
                value: denom[j],
            });
        }
        *slot = loss.psi(y - th, Some(j)) / denom[j];
    }
    Ok(out)
}

/// Describes the loss family for reporting.
pub fn loss_label(loss: &LossSpec) -> String {
    let base = match loss.kind {
        LossKind::Square => "square".to_string(),
        LossKind::Huber { c } => format!("huber(c={c})"),
        LossKind::Quantile { tau } => format!("quantile(tau={tau})"),
        LossKind::SmoothedQuantile { tau, h } => format!("smoothed-quantile(tau={tau}, h={h})"),
    };
    if loss.tuning_profile.is_some() {
        format!("{base} with per-point profile")
    } else {
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_point(values: &[f64]) -> Dataset {
        let grid = Grid::uniform(2).unwrap();
        let rows = values.iter().map(|&v| vec![v, v]).collect();
        let masks = values.iter().map(|_| vec![true, true]).collect();
        Dataset::from_rows(grid, rows, masks).unwrap()
    }

    fn fit(values: &[f64], loss: LossSpec) -> f64 {
        fit_marginal(&one_point(values), &loss, &FitOptions::default()).unwrap().theta[0]
    }

    #[test]
    fn square_loss_is_the_mean() {
        assert!((fit(&[1.0, 2.0, 3.0], LossSpec::square()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_loss_is_the_median() {
        assert_eq!(fit(&[1.0, 2.0, 100.0], LossSpec::quantile(0.5).unwrap()), 2.0);
        assert_eq!(fit(&[4.0, 1.0, 3.0, 2.0], LossSpec::quantile(0.5).unwrap()), 2.5);
        assert_eq!(fit(&[4.0, 1.0, 3.0, 2.0], LossSpec::quantile(0.3).unwrap()), 2.0);
    }

    #[test]
    fn huber_hand_example() {
        // psi(-0.4) + psi(-0.4) + psi(9.6) = -0.4 - 0.4 + 0.8 = 0
        let h = fit(&[0.0, 0.0, 10.0], LossSpec::huber(0.8).unwrap());
        assert!((h - 0.4).abs() < 1e-12, "{h}");
    }

    #[test]
    fn huber_flat_region_returns_midpoint() {
        let h = fit(&[1.0, 2.0, 3.0, 10.0], LossSpec::huber(1e-6).unwrap());
        assert!((h - 2.5).abs() < 1e-9, "{h}");
    }

    #[test]
    fn single_and_constant_values() {
        assert_eq!(fit(&[3.5], LossSpec::huber(0.8).unwrap()), 3.5);
        assert_eq!(fit(&[2.0, 2.0, 2.0], LossSpec::huber(0.8).unwrap()), 2.0);
    }

    #[test]
    fn undefined_points_and_errors() {
        let grid = Grid::uniform(3).unwrap();
        let d = Dataset::from_rows(
            grid,
            vec![vec![1.0, 0.0, 3.0], vec![2.0, 0.0, 5.0]],
            vec![vec![true, false, true], vec![true, false, true]],
        )
        .unwrap();
        let e = fit_marginal(&d, &LossSpec::square(), &FitOptions::default()).unwrap();
        assert_eq!(e.status, vec![PointStatus::Solved, PointStatus::Undefined, PointStatus::Solved]);
        assert_eq!(e.n_eff, vec![2, 0, 2]);
        assert!(e.theta[1].is_nan());
        let f = interpolate_undefined(&e).unwrap();
        assert_eq!(f.theta, vec![1.5, 2.75, 4.0]);
        assert_eq!(f.status[1], PointStatus::Interpolated);

        let bad = d.map_values(|j, v| if j == 2 { f64::INFINITY } else { v });
        assert!(matches!(
            fit_marginal(&bad, &LossSpec::square(), &FitOptions::default()),
            Err(Error::NonFinite { index: 2, .. })
        ));
    }

    #[test]
    fn interpolation_cases() {
        let grid = Grid::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let base = MEstimate {
            grid,
            theta: vec![f64::NAN, 3.0, f64::NAN, 5.0],
            n_eff: vec![0, 1, 0, 1],
            status: vec![
                PointStatus::Undefined,
                PointStatus::Solved,
                PointStatus::Undefined,
                PointStatus::Solved,
            ],
        };
        let f = interpolate_undefined(&base).unwrap();
        assert_eq!(f.theta[0], 3.0);
        assert!((f.theta[2] - (3.0 + 2.0 * 0.25 / 0.75)).abs() < 1e-15);
        assert_eq!(interpolate_undefined(&f).unwrap(), f);

        let g = Grid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let mid = MEstimate {
            grid: g,
            theta: vec![0.0, f64::NAN, 2.0],
            n_eff: vec![1, 0, 1],
            status: vec![PointStatus::Solved, PointStatus::Undefined, PointStatus::Solved],
        };
        assert_eq!(interpolate_undefined(&mid).unwrap().theta[1], 1.0);

        let mut none = mid.clone();
        none.status = vec![PointStatus::Undefined; 3];
        assert!(interpolate_undefined(&none).is_err());
    }

    #[test]
    fn mad_profile_cases() {
        let p = mad_profile(&one_point(&[1.0, 2.0, 3.0]), 1.0, C_FLOOR).unwrap();
        assert_eq!(p.c_of_t, vec![1.0, 1.0]);
        let p = mad_profile(&one_point(&[5.0, 5.0, 5.0]), 0.2, C_FLOOR).unwrap();
        assert_eq!(p.c_of_t, vec![C_FLOOR, C_FLOOR]);
        assert!(mad_profile(&one_point(&[1.0]), 0.0, C_FLOOR).is_err());
        assert!(mad_profile(&one_point(&[1.0]), -1.0, C_FLOOR).is_err());
    }

    #[test]
    fn mad_profile_interpolates_unobserved_points() {
        let grid = Grid::uniform(3).unwrap();
        let d = Dataset::from_rows(
            grid,
            vec![vec![1.0, 0.0, 0.0], vec![3.0, 0.0, 4.0], vec![2.0, 0.0, 8.0]],
            vec![vec![true, false, false], vec![true, false, true], vec![true, false, true]],
        )
        .unwrap();
        let p = mad_profile(&d, 1.0, C_FLOOR).unwrap();
        assert_eq!(p.c_of_t, vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn influence_of_square_loss_on_complete_data() {
        let grid = Grid::uniform(3).unwrap();
        let d = Dataset::from_rows(
            grid,
            vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]],
            vec![vec![true; 3], vec![true; 3]],
        )
        .unwrap();
        let loss = LossSpec::square();
        let est = fit_marginal(&d, &loss, &FitOptions::default()).unwrap();
        let y = PartialCurve::new("y", "0", vec![10.0, -1.0, 0.0], vec![true, true, false]).unwrap();
        let inf = influence_function(&d, &loss, &est, &y).unwrap();
        assert_eq!(inf, vec![8.0, -3.0, 0.0]);
    }

    #[test]
    fn influence_rejects_singular_denominator() {
        let d = one_point(&[0.0, 10.0]);
        let loss = LossSpec::huber(0.1).unwrap();
        let est = fit_marginal(&d, &loss, &FitOptions::default()).unwrap();
        let y = PartialCurve::complete("y", "0", vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            influence_function(&d, &loss, &est, &y),
            Err(Error::SingularDenominator { index: 0, .. })
        ));
    }
}
