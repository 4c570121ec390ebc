//! Robust marginal M-estimation and bootstrap inference for functional data
//! observed on curve-specific subsets of the domain.
//!
//! The crate covers the full pipeline: ingesting partially observed curves
//! ([`data`]), choosing a loss ([`loss`]), fitting the pointwise location
//! estimator ([`estimator`]), generating observation masks ([`sampling`]),
//! testing and probing location functions with a joint curve bootstrap
//! ([`inference`]), and Monte Carlo studies ([`simulation`]).

pub mod data;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod inference;
pub mod loss;
pub mod rng;
pub mod sampling;
pub mod simulation;

pub use nalgebra::DMatrix;

pub use data::{load_csv, load_csv_with, save_csv, CsvOptions, Dataset, PartialCurve};
pub use error::{Error, Result};
pub use estimator::{
    fit_completed, fit_marginal, fit_marginal_weighted, influence_function, interpolate_undefined, mad_profile,
    resolve_loss, FitOptions, MEstimate, PointStatus, TuningProfile,
};
pub use grid::{integrate, inner_product, Grid};
pub use inference::{
    anova_l2_test, eigen_mixture, resample, step_probe, trend_bootstrap, trend_ci, AnovaConfig, BootstrapEnsemble,
    EigenMixture, Probe, TestResult, TrendBootstrap, TrendCI, VarianceScaling,
};
pub use loss::{LossChoice, LossKind, LossSpec};
pub use sampling::{empirical_b, generate_masks, sup_deviation, MaskSet, MissingScheme, SchemeKind};
pub use simulation::{
    generate_curves, ise, run_coverage_study, run_ise_study, CoverageTable, IseTable, ProcessModel, ScenarioConfig,
    Study,
};
