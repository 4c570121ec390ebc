//! Loss families for marginal M-estimation.
//!
//! Each loss supplies `rho`, its score `psi = rho'` and `psi_dot = psi'`.
//! All scores are nondecreasing, which the estimator relies on for
//! bracketed root finding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// `x^2`.
    Square,
    /// `x^2 / 2` inside `[-c, c]`, `c|x| - c^2/2` outside.
    Huber { c: f64 },
    /// Check loss `x (tau - 1{x < 0})`.
    Quantile { tau: f64 },
    /// Check loss with the kink replaced on `[-h, h]` by a quadratic.
    SmoothedQuantile { tau: f64, h: f64 },
}

/// A loss together with an optional per-grid-point tuning profile.
///
/// When present, the profile replaces `c` (Huber) or `h` (smoothed
/// quantile) at the grid point passed to the evaluation functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub tuning_profile: Option<Vec<f64>>,
}

impl LossSpec {
    pub fn square() -> Self {
        Self::from_kind(LossKind::Square)
    }

    pub fn huber(c: f64) -> Result<Self> {
        Self::new(LossKind::Huber { c })
    }

    pub fn quantile(tau: f64) -> Result<Self> {
        Self::new(LossKind::Quantile { tau })
    }

    pub fn smoothed_quantile(tau: f64, h: f64) -> Result<Self> {
        Self::new(LossKind::SmoothedQuantile { tau, h })
    }

    pub fn new(kind: LossKind) -> Result<Self> {
        validate_kind(&kind)?;
        Ok(Self::from_kind(kind))
    }

    fn from_kind(kind: LossKind) -> Self {
        Self {
            kind,
            tuning_profile: None,
        }
    }

    /// Attaches a per-point tuning profile (Huber or smoothed quantile only).
    pub fn with_profile(mut self, profile: Vec<f64>) -> Result<Self> {
        match self.kind {
            LossKind::Huber { .. } | LossKind::SmoothedQuantile { .. } => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "a tuning profile applies only to huber or smoothed quantile".into(),
                ))
            }
        }
        if let Some(j) = profile.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "tuning profile must be strictly positive (index {j})"
            )));
        }
        self.tuning_profile = Some(profile);
        Ok(self)
    }

    /// Loss with the scalar tuning constant fixed for one grid point.
    pub fn at(&self, point: Option<usize>) -> PointLoss {
        let scale = match (point, &self.tuning_profile) {
            (Some(j), Some(p)) => Some(p[j]),
            _ => None,
        };
        match self.kind {
            LossKind::Square => PointLoss::Square,
            LossKind::Huber { c } => PointLoss::Huber { c: scale.unwrap_or(c) },
            LossKind::Quantile { tau } => PointLoss::Quantile { tau },
            LossKind::SmoothedQuantile { tau, h } => PointLoss::SmoothedQuantile {
                tau,
                h: scale.unwrap_or(h),
            },
        }
    }

    pub fn rho(&self, x: f64, point: Option<usize>) -> f64 {
        self.at(point).rho(x)
    }

    pub fn psi(&self, x: f64, point: Option<usize>) -> f64 {
        self.at(point).psi(x)
    }

    pub fn psi_dot(&self, x: f64, point: Option<usize>) -> f64 {
        self.at(point).psi_dot(x)
    }

    /// Whether `psi_dot` is meaningful (false for the plain check loss).
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, LossKind::Quantile { .. })
    }
}

fn validate_kind(kind: &LossKind) -> Result<()> {
    let ok_tau = |tau: f64| tau > 0.0 && tau < 1.0;
    match *kind {
        LossKind::Square => Ok(()),
        LossKind::Huber { c } if c.is_finite() && c > 0.0 => Ok(()),
        LossKind::Huber { c } => Err(Error::InvalidParameter(format!("huber c must be positive, got {c}"))),
        LossKind::Quantile { tau } if ok_tau(tau) => Ok(()),
        LossKind::SmoothedQuantile { tau, h } if ok_tau(tau) && h.is_finite() && h > 0.0 => Ok(()),
        LossKind::Quantile { tau } | LossKind::SmoothedQuantile { tau, .. } if !ok_tau(tau) => {
            Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {tau}")))
        }
        LossKind::SmoothedQuantile { h, .. } => Err(Error::InvalidParameter(format!(
            "smoothing half-width must be positive, got {h}"
        ))),
        LossKind::Quantile { .. } => unreachable!(),
    }
}

/// A loss with its tuning constant resolved for a single grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointLoss {
    Square,
    Huber { c: f64 },
    Quantile { tau: f64 },
    SmoothedQuantile { tau: f64, h: f64 },
}

impl PointLoss {
    #[inline]
    pub fn rho(self, x: f64) -> f64 {
        match self {
            PointLoss::Square => x * x,
            PointLoss::Huber { c } => {
                let a = x.abs();
                if a <= c {
                    0.5 * x * x
                } else {
                    c * a - 0.5 * c * c
                }
            }
            PointLoss::Quantile { tau } => check(x, tau),
            // shifted by h/4 so that rho(0) = 0
            PointLoss::SmoothedQuantile { tau, h } => {
                if x.abs() < h {
                    x * x / (4.0 * h) + (tau - 0.5) * x
                } else {
                    check(x, tau) - 0.25 * h
                }
            }
        }
    }

    #[inline]
    pub fn psi(self, x: f64) -> f64 {
        match self {
            PointLoss::Square => 2.0 * x,
            PointLoss::Huber { c } => x.clamp(-c, c),
            PointLoss::Quantile { tau } => {
                if x > 0.0 {
                    tau
                } else if x < 0.0 {
                    tau - 1.0
                } else {
                    tau - 0.5
                }
            }
            PointLoss::SmoothedQuantile { tau, h } => {
                if x >= h {
                    tau
                } else if x <= -h {
                    tau - 1.0
                } else {
                    x / (2.0 * h) + tau - 0.5
                }
            }
        }
    }

    #[inline]
    pub fn psi_dot(self, x: f64) -> f64 {
        match self {
            PointLoss::Square => 2.0,
            PointLoss::Huber { c } => {
                if x.abs() <= c {
                    1.0
                } else {
                    0.0
                }
            }
            PointLoss::Quantile { .. } => 0.0,
            PointLoss::SmoothedQuantile { h, .. } => {
                if x.abs() < h {
                    0.5 / h
                } else {
                    0.0
                }
            }
        }
    }
}

#[inline]
fn check(x: f64, tau: f64) -> f64 {
    if x < 0.0 {
        x * (tau - 1.0)
    } else {
        x * tau
    }
}

/// A loss as requested by the user; scaled variants need data to resolve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "loss", rename_all = "snake_case")]
pub enum LossChoice {
    Fixed(LossSpec),
    /// Huber with `c(t) = r * MAD(t)`.
    HuberScaled { r: f64 },
    /// Smoothed quantile with `h(t) = factor * MAD(t)`.
    SmoothedQuantileScaled { tau: f64, factor: f64 },
}

/// Default smoothing half-width relative to the marginal MAD.
pub const SMOOTHING_MAD_FACTOR: f64 = 0.1;

impl LossChoice {
    /// Whether resolution depends on the data.
    pub fn is_data_dependent(&self) -> bool {
        !matches!(self, LossChoice::Fixed(_))
    }
}

impl From<LossSpec> for LossChoice {
    fn from(spec: LossSpec) -> Self {
        LossChoice::Fixed(spec)
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse {what} from `{s}`")))
}

impl FromStr for LossChoice {
    type Err = Error;

    /// Parses `square | huber:<c> | quantile:<tau> | squantile:<tau>[,<h>] | huber-scaled:<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let need = |what: &str| {
            arg.ok_or_else(|| Error::InvalidParameter(format!("loss `{name}` needs a {what} argument")))
        };
        match name {
            "square" | "mean" if arg.is_none() => Ok(LossSpec::square().into()),
            "huber" => Ok(LossSpec::huber(parse_num(need("c")?, "c")?)?.into()),
            "quantile" => Ok(LossSpec::quantile(parse_num(need("tau")?, "tau")?)?.into()),
            "squantile" => {
                let a = need("tau")?;
                match a.split_once(',') {
                    Some((tau, h)) => {
                        Ok(LossSpec::smoothed_quantile(parse_num(tau, "tau")?, parse_num(h, "h")?)?.into())
                    }
                    None => {
                        let tau = parse_num(a, "tau")?;
                        LossSpec::smoothed_quantile(tau, 1.0)?;
                        Ok(LossChoice::SmoothedQuantileScaled {
                            tau,
                            factor: SMOOTHING_MAD_FACTOR,
                        })
                    }
                }
            }
            "huber-scaled" => {
                let r = parse_num(need("r")?, "r")?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
                }
                Ok(LossChoice::HuberScaled { r })
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown loss `{s}` (expected square | huber:<c> | quantile:<tau> | squantile:<tau>,<h> | huber-scaled:<r>)"
            ))),
        }
    }
}

impl fmt::Display for LossChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossChoice::Fixed(spec) => match spec.kind {
                LossKind::Square => write!(f, "square"),
                LossKind::Huber { c } => write!(f, "huber:{c}"),
                LossKind::Quantile { tau } => write!(f, "quantile:{tau}"),
                LossKind::SmoothedQuantile { tau, h } => write!(f, "squantile:{tau},{h}"),
            },
            LossChoice::HuberScaled { r } => write!(f, "huber-scaled:{r}"),
            LossChoice::SmoothedQuantileScaled { tau, .. } => write!(f, "squantile:{tau}"),
        }
    }
}
