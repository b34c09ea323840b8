//! Wavelet-domain unmixing: transform every aggregated sample, shrink the
//! empirical coefficients, solve for the component coefficients by least
//! squares and transform back.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dwt::{dwt_periodic, idwt_periodic, LevelLayout, WaveletDecomposition, WaveletFilter};
use crate::error::{shape, Error, Result};
use crate::shrinkage::{
    estimate_sigma, shrink_vector, ParamSource, PriorPolicy, QuadratureSpec, ShrinkageParams,
    DEFAULT_NODES,
};

/// Smallest accepted reciprocal condition number of `y·yᵗ`.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Observed curves, one column per sample, on a shared increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedData {
    values: DMatrix<f64>,
    grid: Vec<f64>,
}

impl AggregatedData {
    pub fn new(values: DMatrix<f64>, grid: Vec<f64>) -> Result<Self> {
        let (m, i) = values.shape();
        if m < 2 || !m.is_power_of_two() {
            return Err(shape(format!(
                "number of grid points M={m} is not a power of two >= 2"
            )));
        }
        if i == 0 {
            return Err(shape("no samples"));
        }
        if grid.len() != m {
            return Err(shape(format!("grid has {} points, data has {m} rows", grid.len())));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("data contain NaN".into()));
        }
        Ok(Self { values, grid })
    }

    /// Data on the grid `t_m = m/M`.
    pub fn on_unit_grid(values: DMatrix<f64>) -> Result<Self> {
        let m = values.nrows();
        let grid = (1..=m).map(|k| k as f64 / m as f64).collect();
        Self::new(values, grid)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `M`.
    pub fn points(&self) -> usize {
        self.values.nrows()
    }

    /// `I`.
    pub fn samples(&self) -> usize {
        self.values.ncols()
    }
}

/// Known `L × I` mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    weights: DMatrix<f64>,
}

impl MixingMatrix {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let (l, i) = weights.shape();
        if l == 0 || i == 0 {
            return Err(shape("mixing matrix is empty"));
        }
        if l > i {
            return Err(shape(format!(
                "{l} components cannot be identified from {i} samples"
            )));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("mixing weights must be finite".into()));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// `L`.
    pub fn components(&self) -> usize {
        self.weights.nrows()
    }

    /// `I`.
    pub fn samples(&self) -> usize {
        self.weights.ncols()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        &self.weights * self.weights.transpose()
    }

    /// `λ_min / λ_max` of `y·yᵗ`.
    pub fn reciprocal_condition(&self) -> f64 {
        reciprocal_condition(&self.gram())
    }
}

pub(crate) fn reciprocal_condition(spd: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(spd.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if max <= 0.0 || !max.is_finite() {
        return 0.0;
    }
    (min / max).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Vanishing moments of the Daubechies filter.
    pub filter_n: usize,
    /// `J0`; scaling coefficients below it are not shrunk.
    pub primary_level: usize,
    pub policy: PriorPolicy,
    pub quadrature_nodes: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            filter_n: 10,
            primary_level: crate::dwt::DEFAULT_PRIMARY_LEVEL,
            policy: PriorPolicy::default(),
            quadrature_nodes: DEFAULT_NODES,
        }
    }
}

/// Output of [`estimate_components`].
#[derive(Debug, Clone)]
pub struct ComponentEstimate {
    /// `M × L` estimated component curves.
    pub curves: DMatrix<f64>,
    /// `M × L` estimated component wavelet coefficients.
    pub gamma: DMatrix<f64>,
    /// `M × I` shrunk empirical coefficients of the aggregated samples.
    pub shrunk: DMatrix<f64>,
    pub sigma_hat: f64,
    pub layout: LevelLayout,
    pub config: EstimationConfig,
    /// Parameters applied at levels `J0..J`; `None` when shrinkage was skipped.
    pub level_params: Option<Vec<ShrinkageParams>>,
}

/// Column-wise DWT of the samples: the `M × I` empirical coefficient matrix.
pub fn transform_samples(
    data: &AggregatedData,
    filter: &WaveletFilter,
    primary_level: usize,
) -> Result<DMatrix<f64>> {
    let (m, i) = data.values.shape();
    let mut out = DMatrix::zeros(m, i);
    for (col, mut dst) in data.values.column_iter().zip(out.column_iter_mut()) {
        let signal: Vec<f64> = col.iter().copied().collect();
        let dec = dwt_periodic(&signal, filter, primary_level)?;
        dst.copy_from_slice(dec.coefficients());
    }
    Ok(out)
}

/// Least-squares component coefficients `δ(D)·yᵗ·(y·yᵗ)⁻¹`.
pub fn solve_gamma(shrunk: &DMatrix<f64>, y: &MixingMatrix) -> Result<DMatrix<f64>> {
    if shrunk.ncols() != y.samples() {
        return Err(shape(format!(
            "coefficient matrix has {} columns but the mixing matrix has {} samples",
            shrunk.ncols(),
            y.samples()
        )));
    }
    let gram = y.gram();
    let rcond = reciprocal_condition(&gram);
    if !(rcond > RCOND_THRESHOLD) {
        return Err(Error::RankDeficient {
            what: "y·yᵗ",
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        what: "y·yᵗ",
        rcond,
        threshold: RCOND_THRESHOLD,
    })?;
    let rhs = y.weights() * shrunk.transpose();
    Ok(chol.solve(&rhs).transpose())
}

/// Runs the full estimator: transform, MAD noise estimate pooled over all
/// samples' finest details, per-level shrinkage, least-squares unmixing and
/// inverse transform.
pub fn estimate_components(
    data: &AggregatedData,
    y: &MixingMatrix,
    config: &EstimationConfig,
) -> Result<ComponentEstimate> {
    if y.samples() != data.samples() {
        return Err(shape(format!(
            "data have {} samples but the mixing matrix has {}",
            data.samples(),
            y.samples()
        )));
    }
    if y.components() > data.samples() {
        return Err(shape(format!(
            "{} components need at least as many samples, got {}",
            y.components(),
            data.samples()
        )));
    }
    config.policy.validate()?;
    let filter = WaveletFilter::daubechies(config.filter_n)?;
    let layout = LevelLayout::for_length(data.points(), config.primary_level)?;
    let quad = if config.quadrature_nodes == DEFAULT_NODES {
        QuadratureSpec::standard().clone()
    } else {
        QuadratureSpec::new(config.quadrature_nodes)?
    };

    let coeffs = transform_samples(data, &filter, config.primary_level)?;

    let finest = layout.finest_range();
    let pooled: Vec<f64> = coeffs
        .column_iter()
        .flat_map(|c| c.rows(finest.start, finest.len()).iter().copied().collect::<Vec<_>>())
        .collect();
    let sigma_hat = estimate_sigma(&pooled)?;
    if !sigma_hat.is_finite() {
        return Err(Error::Domain(format!("noise estimate is not finite: {sigma_hat}")));
    }

    let level_params = config.policy.level_params(&layout, sigma_hat)?;
    let shrunk = match &level_params {
        None => coeffs,
        Some(params) => {
            let mut out = DMatrix::zeros(coeffs.nrows(), coeffs.ncols());
            for (src, mut dst) in coeffs.column_iter().zip(out.column_iter_mut()) {
                let d: Vec<f64> = src.iter().copied().collect();
                let s = shrink_vector(&d, &layout, ParamSource::PerLevel(params), &quad)?;
                dst.copy_from_slice(&s);
            }
            out
        }
    };

    let gamma = solve_gamma(&shrunk, y)?;
    let curves = inverse_columns(&gamma, &filter, layout)?;

    Ok(ComponentEstimate {
        curves,
        gamma,
        shrunk,
        sigma_hat,
        layout,
        config: *config,
        level_params,
    })
}

/// Applies the inverse DWT to every column of a coefficient matrix.
pub fn inverse_columns(
    coeffs: &DMatrix<f64>,
    filter: &WaveletFilter,
    layout: LevelLayout,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(coeffs.nrows(), coeffs.ncols());
    for (src, mut dst) in coeffs.column_iter().zip(out.column_iter_mut()) {
        let dec = WaveletDecomposition::new(src.iter().copied().collect(), layout)?;
        dst.copy_from_slice(&idwt_periodic(&dec, filter));
    }
    Ok(out)
}
