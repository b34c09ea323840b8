//! Estimation of component curves from aggregated functional data.
//!
//! Observed curves are linear mixtures `A = α·y + e` of unknown component
//! curves `α` with known weights `y`. The estimator transforms every sample
//! to the wavelet domain, denoises each empirical coefficient with a
//! Bayesian posterior-mean rule (point mass at zero plus logistic prior),
//! unmixes by least squares, and transforms back.
//!
//! Alongside the estimator the crate ships a B-spline least-squares
//! baseline, the standard test functions, and a seeded Monte Carlo harness
//! comparing the two.

pub mod bspline;
pub mod dwt;
pub mod error;
pub mod shrinkage;
pub mod sim;
pub mod testfuncs;
pub mod unmix;

pub use bspline::{fit_components_bspline, BSplineBasis, SplineConfig};
pub use dwt::{
    dwt_periodic, idwt_periodic, make_daubechies_filter, Band, LevelLayout,
    WaveletDecomposition, WaveletFilter,
};
pub use error::{Error, Result};
pub use shrinkage::{
    elicit_p, estimate_sigma, logistic_density, shrink, shrink_vector, ParamSource,
    PriorPolicy, QuadratureSpec, ShrinkageParams,
};
pub use sim::{run_study, Method, StudyConfig, StudyResult};
pub use testfuncs::TestFunction;
pub use unmix::{
    estimate_components, solve_gamma, transform_samples, AggregatedData, ComponentEstimate,
    EstimationConfig, MixingMatrix,
};

/// Re-exported so downstream crates use the same matrix type.
pub use nalgebra::DMatrix;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
