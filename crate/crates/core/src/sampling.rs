//! Observation-indicator generators and diagnostics.
//!
//! A mask is the indicator process `delta_i(t)` realized on the grid. The
//! schemes here cover complete curves, a random interval with Beta
//! endpoints, one of several fixed intervals, fixed-length snippets, and a
//! sparse Bernoulli thinning of the random interval.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta as BetaDist, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::substream;

/// Default endpoint trim for interval schemes.
pub const DEFAULT_TRIM: f64 = 0.01;

/// Redraws allowed per curve before giving up on an empty mask.
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    Complete,
    /// Observed on `[min(v1, v2), max(v1, v2)]` with `v1, v2 ~ Beta(a, b)`
    /// rescaled into `[eps, 1 - eps]`.
    RandomInterval { beta_a: f64, beta_b: f64 },
    /// Observed on one of the intervals cut by `breakpoints`, chosen
    /// uniformly.
    FixedIntervals { breakpoints: Vec<f64> },
    /// Observed on `[l, l + d]` with `l ~ Uniform(0, 1 - d)`.
    Snippet { d: f64 },
    /// Random-interval envelope thinned by iid Bernoulli(p) per grid point.
    BernoulliSparse { p: f64, beta_a: f64, beta_b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingScheme {
    pub kind: SchemeKind,
    pub epsilon_trim: f64,
}

/// Generated masks plus the number of all-zero draws that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub masks: Vec<Vec<bool>>,
    pub redraws: usize,
}

impl MissingScheme {
    pub fn new(kind: SchemeKind, epsilon_trim: f64) -> Result<Self> {
        let s = Self { kind, epsilon_trim };
        s.validate()?;
        Ok(s)
    }

    pub fn complete() -> Self {
        Self {
            kind: SchemeKind::Complete,
            epsilon_trim: 0.0,
        }
    }

    pub fn random_interval(beta_a: f64, beta_b: f64) -> Result<Self> {
        Self::new(SchemeKind::RandomInterval { beta_a, beta_b }, DEFAULT_TRIM)
    }

    pub fn fixed_intervals(breakpoints: Vec<f64>) -> Result<Self> {
        Self::new(SchemeKind::FixedIntervals { breakpoints }, 0.0)
    }

    pub fn snippet(d: f64) -> Result<Self> {
        Self::new(SchemeKind::Snippet { d }, 0.0)
    }

    pub fn sparse(p: f64) -> Result<Self> {
        Self::new(
            SchemeKind::BernoulliSparse {
                p,
                beta_a: 0.3,
                beta_b: 0.3,
            },
            DEFAULT_TRIM,
        )
    }

    pub fn with_trim(mut self, epsilon_trim: f64) -> Result<Self> {
        self.epsilon_trim = epsilon_trim;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon_trim >= 0.0 && self.epsilon_trim < 0.5) {
            return bad(format!("trim must lie in [0, 0.5), got {}", self.epsilon_trim));
        }
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match &self.kind {
            SchemeKind::Complete => Ok(()),
            SchemeKind::RandomInterval { beta_a, beta_b } | SchemeKind::BernoulliSparse { beta_a, beta_b, .. }
                if !(pos(*beta_a) && pos(*beta_b)) =>
            {
                bad(format!("beta parameters must be positive, got ({beta_a}, {beta_b})"))
            }
            SchemeKind::BernoulliSparse { p, .. } if !(*p > 0.0 && *p < 1.0) => {
                bad(format!("p must lie in (0, 1), got {p}"))
            }
            SchemeKind::RandomInterval { .. } | SchemeKind::BernoulliSparse { .. } => Ok(()),
            SchemeKind::FixedIntervals { breakpoints } => {
                if breakpoints.is_empty() {
                    return bad("fixed intervals need at least one breakpoint".into());
                }
                if breakpoints.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
                    return bad("breakpoints must lie in (0, 1)".into());
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("breakpoints must be strictly increasing".into());
                }
                Ok(())
            }
            SchemeKind::Snippet { d } if !(*d > 0.0 && *d < 1.0) => bad(format!("snippet length must lie in (0, 1), got {d}")),
            SchemeKind::Snippet { .. } => Ok(()),
        }
    }

    /// Interval boundaries `[0, b_1, ..., b_m, 1]` for the fixed scheme.
    fn cuts(breakpoints: &[f64]) -> Vec<f64> {
        let mut cuts = Vec::with_capacity(breakpoints.len() + 2);
        cuts.push(0.0);
        cuts.extend_from_slice(breakpoints);
        cuts.push(1.0);
        cuts
    }

    fn draw(&self, grid: &Grid, rng: &mut crate::rng::Rng) -> Vec<bool> {
        let pts = grid.points();
        let eps = self.epsilon_trim;
        let interval = |lo: f64, hi: f64| pts.iter().map(|&t| t >= lo && t <= hi).collect::<Vec<_>>();
        let beta_interval = |a: f64, b: f64, rng: &mut crate::rng::Rng| {
            let beta = Beta::new(a, b).expect("validated beta parameters");
            let v1 = eps + (1.0 - 2.0 * eps) * beta.sample(rng);
            let v2 = eps + (1.0 - 2.0 * eps) * beta.sample(rng);
            (v1.min(v2), v1.max(v2))
        };
        match &self.kind {
            SchemeKind::Complete => vec![true; pts.len()],
            SchemeKind::RandomInterval { beta_a, beta_b } => {
                let (lo, hi) = beta_interval(*beta_a, *beta_b, rng);
                interval(lo, hi)
            }
            SchemeKind::FixedIntervals { breakpoints } => {
                let cuts = Self::cuts(breakpoints);
                let m = cuts.len() - 1;
                let k = rng.random_range(0..m);
                let (lo, hi) = (cuts[k], cuts[k + 1]);
                pts.iter()
                    .map(|&t| t >= lo && (t < hi || (k == m - 1 && t <= hi)))
                    .collect()
            }
            SchemeKind::Snippet { d } => {
                let l = rng.random_range(0.0..1.0 - d);
                interval(l, l + d)
            }
            SchemeKind::BernoulliSparse { p, beta_a, beta_b } => {
                let (lo, hi) = beta_interval(*beta_a, *beta_b, rng);
                pts.iter()
                    .map(|&t| {
                        let keep = rng.random_bool(*p);
                        keep && t >= lo && t <= hi
                    })
                    .collect()
            }
        }
    }

    /// Analytic observation probability `b(t) = P(delta(t) = 1)` at each grid
    /// point, ignoring the (rare) rejection of empty masks.
    pub fn observation_probability(&self, grid: &Grid) -> Vec<f64> {
        let eps = self.epsilon_trim;
        let beta_b = |a: f64, b: f64, t: f64| {
            let u = (t - eps) / (1.0 - 2.0 * eps);
            if !(0.0..=1.0).contains(&u) {
                return 0.0;
            }
            let f = BetaDist::new(a, b).expect("validated beta parameters").cdf(u);
            1.0 - f * f - (1.0 - f) * (1.0 - f)
        };
        grid.map(|t| match &self.kind {
            SchemeKind::Complete => 1.0,
            SchemeKind::RandomInterval { beta_a, beta_b: b } => beta_b(*beta_a, *b, t),
            SchemeKind::FixedIntervals { breakpoints } => {
                let cuts = Self::cuts(breakpoints);
                1.0 / (cuts.len() - 1) as f64
            }
            SchemeKind::Snippet { d } => {
                let lo = (t - d).max(0.0);
                let hi = t.min(1.0 - d);
                ((hi - lo).max(0.0) / (1.0 - d)).min(1.0)
            }
            SchemeKind::BernoulliSparse { p, beta_a, beta_b: b } => p * beta_b(*beta_a, *b, t),
        })
    }
}

/// Draws `n` masks; curve `i` uses its own substream of `seed`, so the
/// result does not depend on how the work is split.
pub fn generate_masks(scheme: &MissingScheme, n: usize, grid: &Grid, seed: u64) -> Result<MaskSet> {
    scheme.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one mask".into()));
    }
    let mut masks = Vec::with_capacity(n);
    let mut redraws = 0;
    for i in 0..n {
        let mut rng = substream(seed, &[i as u64]);
        let mut tries = 0;
        loop {
            let m = scheme.draw(grid, &mut rng);
            if m.iter().any(|&b| b) {
                masks.push(m);
                break;
            }
            redraws += 1;
            tries += 1;
            if tries >= MAX_REDRAWS {
                return Err(Error::InvalidParameter(format!(
                    "scheme {scheme} produced {MAX_REDRAWS} empty masks in a row on this grid"
                )));
            }
        }
    }
    Ok(MaskSet { masks, redraws })
}

/// Pointwise observed fraction `(1/n) sum_i delta_i(t)`.
pub fn empirical_b(masks: &[Vec<bool>]) -> Result<Vec<f64>> {
    let first = masks
        .first()
        .ok_or_else(|| Error::InvalidParameter("no masks".into()))?;
    let n = masks.len() as f64;
    let mut counts = vec![0usize; first.len()];
    for m in masks {
        if m.len() != counts.len() {
            return Err(Error::InvalidParameter("masks differ in length".into()));
        }
        for (c, &b) in counts.iter_mut().zip(m) {
            *c += usize::from(b);
        }
    }
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// `W_n = max_t |b_hat(t) - b(t)|`.
pub fn sup_deviation(masks: &[Vec<bool>], b_true: &[f64]) -> Result<f64> {
    let b_hat = empirical_b(masks)?;
    if b_hat.len() != b_true.len() {
        return Err(Error::InvalidParameter("b_true not aligned to masks".into()));
    }
    Ok(b_hat
        .iter()
        .zip(b_true)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

impl FromStr for MissingScheme {
    type Err = Error;

    /// Parses `complete | random-interval:a,b | fixed-intervals:b1,b2,.. |
    /// snippet:d | sparse:p[,a,b]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (s, ""),
        };
        let nums = || -> Result<Vec<f64>> {
            if arg.trim().is_empty() {
                return Ok(Vec::new());
            }
            arg.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad number `{x}` in scheme `{s}`")))
                })
                .collect()
        };
        let v = nums()?;
        match (name, v.as_slice()) {
            ("complete", []) => Ok(Self::complete()),
            ("random-interval", []) => Self::random_interval(0.3, 0.3),
            ("random-interval", [a, b]) => Self::random_interval(*a, *b),
            ("fixed-intervals", bps) if !bps.is_empty() => Self::fixed_intervals(bps.to_vec()),
            ("snippet", [d]) => Self::snippet(*d),
            ("sparse", [p]) => Self::sparse(*p),
            ("sparse", [p, a, b]) => Self::new(
                SchemeKind::BernoulliSparse {
                    p: *p,
                    beta_a: *a,
                    beta_b: *b,
                },
                DEFAULT_TRIM,
            ),
            _ => Err(Error::InvalidParameter(format!(
                "unknown scheme `{s}` (expected complete | random-interval:a,b | fixed-intervals:b1,.. | snippet:d | sparse:p)"
            ))),
        }
    }
}

impl fmt::Display for MissingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SchemeKind::Complete => write!(f, "complete"),
            SchemeKind::RandomInterval { beta_a, beta_b } => write!(f, "random-interval:{beta_a},{beta_b}"),
            SchemeKind::FixedIntervals { breakpoints } => {
                let b: Vec<String> = breakpoints.iter().map(|x| x.to_string()).collect();
                write!(f, "fixed-intervals:{}", b.join(","))
            }
            SchemeKind::Snippet { d } => write!(f, "snippet:{d}"),
            SchemeKind::BernoulliSparse { p, beta_a, beta_b } => write!(f, "sparse:{p},{beta_a},{beta_b}"),
        }
    }
}
