//! Seeded Monte Carlo harness comparing the wavelet estimator with the
//! B-spline baseline on mixtures of test functions.
//!
//! Every replicate draws its weights and noise from its own ChaCha stream
//! (study seed, stream = replicate index), so replicates can run in any
//! order or in parallel and still produce identical results.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bspline::{fit_components_bspline, SplineConfig};
use crate::error::{shape, Error, Result};
use crate::testfuncs::{grid, TestFunction};
use crate::unmix::{estimate_components, AggregatedData, EstimationConfig, MixingMatrix};

/// Weights are redrawn until `y·yᵗ` has at least this reciprocal condition.
pub const WEIGHT_RCOND_FLOOR: f64 = 1e-6;

const MAX_WEIGHT_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPolicy {
    /// Independent Uniform(0, 1) entries.
    #[default]
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wavelets,
    Splines,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Wavelets => "wavelets",
            Method::Splines => "splines",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub components: Vec<TestFunction>,
    /// `M`, points per curve.
    pub grid_size: usize,
    /// `I`, aggregated samples per dataset.
    pub samples: usize,
    /// `None` generates noiseless data.
    pub snr: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub estimation: EstimationConfig,
    pub spline: SplineConfig,
    pub weights: WeightPolicy,
    /// Target sample standard deviation of every component; `None` keeps raw
    /// amplitudes.
    pub rescale: Option<f64>,
}

impl StudyConfig {
    /// One of the three standard designs at full scale
    /// (`M = 512`, `I = 50`, `SNR = 3`, 100 replicates).
    pub fn study(id: u32) -> Result<Self> {
        use TestFunction::*;
        let components = match id {
            1 => vec![Bumps, Blocks],
            2 => vec![Bumps, Blocks, Doppler, Heavisine],
            3 => vec![Logit, SpaHet],
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown study id {id} (expected 1, 2 or 3)"
                )))
            }
        };
        Ok(Self {
            components,
            grid_size: 512,
            samples: 50,
            snr: Some(3.0),
            replicates: 100,
            seed: 1,
            estimation: EstimationConfig::default(),
            spline: SplineConfig::default(),
            weights: WeightPolicy::Uniform,
            rescale: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Parameter("study needs at least one component".into()));
        }
        if self.grid_size < 2 || !self.grid_size.is_power_of_two() {
            return Err(shape(format!("M = {} is not a power of two", self.grid_size)));
        }
        if self.samples < self.components.len() {
            return Err(shape(format!(
                "I = {} samples cannot identify L = {} components",
                self.samples,
                self.components.len()
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Parameter("at least one replicate is required".into()));
        }
        if let Some(sd) = self.rescale {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::Parameter(format!("rescale target {sd} must be positive")));
            }
        }
        if let Some(snr) = self.snr {
            if !(snr > 0.0 && snr.is_finite()) {
                return Err(Error::Parameter(format!("SNR = {snr} must be positive")));
            }
        }
        if self.estimation.primary_level >= self.grid_size.trailing_zeros() as usize {
            return Err(Error::Level(format!(
                "J0 = {} must be below log2(M) = {}",
                self.estimation.primary_level,
                self.grid_size.trailing_zeros()
            )));
        }
        self.estimation.policy.validate()
    }
}

/// Deterministic RNG for replicate `index` of a study seeded with `seed`.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Uniform(0, 1) weights, redrawn until well conditioned.
pub fn gen_weights(samples: usize, components: usize, seed: u64) -> Result<MixingMatrix> {
    gen_weights_with(samples, components, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_weights_with<R: Rng>(
    samples: usize,
    components: usize,
    rng: &mut R,
) -> Result<MixingMatrix> {
    if components == 0 || samples < components {
        return Err(shape(format!(
            "cannot draw {components} × {samples} weights (need 1 <= L <= I)"
        )));
    }
    for _ in 0..MAX_WEIGHT_DRAWS {
        // Open interval (0, 1).
        let w = DMatrix::from_fn(components, samples, |_, _| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        });
        let y = MixingMatrix::new(w)?;
        if y.reciprocal_condition() > WEIGHT_RCOND_FLOOR {
            return Ok(y);
        }
    }
    Err(Error::RankDeficient {
        what: "generated y·yᵗ",
        rcond: 0.0,
        threshold: WEIGHT_RCOND_FLOOR,
    })
}

/// `σ = sd(noiseless) / SNR`, with the sample standard deviation over all
/// entries (denominator `n - 1`).
pub fn noise_sigma_for_snr(noiseless: &DMatrix<f64>, snr: f64) -> Result<f64> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::Parameter(format!("SNR = {snr} must be positive")));
    }
    let n = noiseless.len();
    if n < 2 {
        return Err(Error::DegenerateSignal("need at least two values".into()));
    }
    let sd = sample_sd(noiseless.as_slice());
    if !(sd > 0.0) {
        return Err(Error::DegenerateSignal(
            "noiseless signal is constant; SNR is undefined".into(),
        ));
    }
    Ok(sd / snr)
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// One generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub data: AggregatedData,
    pub weights: MixingMatrix,
    /// `M × L` true component curves.
    pub truth: DMatrix<f64>,
    pub noiseless: DMatrix<f64>,
    pub sigma: f64,
}

/// `M × L` matrix of the study's component curves on the grid, each column
/// optionally scaled to sample standard deviation `rescale`.
pub fn component_matrix(
    components: &[TestFunction],
    m: usize,
    rescale: Option<f64>,
) -> Result<DMatrix<f64>> {
    let mut alpha = DMatrix::zeros(m, components.len());
    for (l, f) in components.iter().enumerate() {
        let mut col = f.sample_grid(m)?;
        if let Some(target) = rescale {
            let sd = sample_sd(&col);
            if sd > 0.0 {
                col.iter_mut().for_each(|v| *v *= target / sd);
            }
        }
        alpha.column_mut(l).copy_from_slice(&col);
    }
    Ok(alpha)
}

pub fn gen_dataset(config: &StudyConfig, replicate: usize) -> Result<Dataset> {
    config.validate()?;
    let m = config.grid_size;
    let truth = component_matrix(&config.components, m, config.rescale)?;
    let mut rng = replicate_rng(config.seed, replicate);
    let weights = match config.weights {
        WeightPolicy::Uniform => {
            gen_weights_with(config.samples, config.components.len(), &mut rng)?
        }
    };
    let noiseless = &truth * weights.weights();
    let (values, sigma) = match config.snr {
        None => (noiseless.clone(), 0.0),
        Some(snr) => {
            let sigma = noise_sigma_for_snr(&noiseless, snr)?;
            let mut values = noiseless.clone();
            for v in values.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
            (values, sigma)
        }
    };
    Ok(Dataset {
        data: AggregatedData::new(values, grid(m)?)?,
        weights,
        truth,
        noiseless,
        sigma,
    })
}

/// `(1/M) Σ (estimate - truth)²`.
pub fn mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(shape(format!(
            "estimate has {} points, truth has {}",
            estimate.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(shape("empty curves"));
    }
    let ss: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / truth.len() as f64)
}

/// Per-component MSEs of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub index: usize,
    pub sigma: f64,
    pub wavelet_mse: Vec<f64>,
    pub spline_mse: Vec<f64>,
}

pub fn run_replicate(config: &StudyConfig, index: usize) -> Result<ReplicateOutcome> {
    let ds = gen_dataset(config, index)?;
    let wav = estimate_components(&ds.data, &ds.weights, &config.estimation)?;
    let spl = fit_components_bspline(&ds.data, &ds.weights, &config.spline)?;
    let column_mse = |est: &DMatrix<f64>| -> Result<Vec<f64>> {
        (0..ds.truth.ncols())
            .map(|l| mse(est.column(l).as_slice(), ds.truth.column(l).as_slice()))
            .collect()
    };
    Ok(ReplicateOutcome {
        index,
        sigma: ds.sigma,
        wavelet_mse: column_mse(&wav.curves)?,
        spline_mse: column_mse(&spl)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub amse: f64,
    /// Sample standard deviation of the per-replicate MSEs (0 for one replicate).
    pub sd: f64,
    /// Per-replicate MSEs in replicate-index order.
    pub mse: Vec<f64>,
}

impl MethodSummary {
    pub fn from_mse(mse: Vec<f64>) -> Self {
        let n = mse.len() as f64;
        let amse = mse.iter().sum::<f64>() / n;
        let sd = if mse.len() > 1 { sample_sd(&mse) } else { 0.0 };
        Self { amse, sd, mse }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub function: TestFunction,
    pub wavelets: MethodSummary,
    pub splines: MethodSummary,
}

impl ComponentResult {
    pub fn method(&self, method: Method) -> &MethodSummary {
        match method {
            Method::Wavelets => &self.wavelets,
            Method::Splines => &self.splines,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub components: Vec<ComponentResult>,
    pub elapsed_secs: f64,
}

impl StudyResult {
    /// Aggregates replicate outcomes; the order of `outcomes` does not matter.
    pub fn from_outcomes(config: StudyConfig, mut outcomes: Vec<ReplicateOutcome>, elapsed_secs: f64) -> Self {
        outcomes.sort_by_key(|o| o.index);
        let components = config
            .components
            .iter()
            .enumerate()
            .map(|(l, f)| ComponentResult {
                function: *f,
                wavelets: MethodSummary::from_mse(outcomes.iter().map(|o| o.wavelet_mse[l]).collect()),
                splines: MethodSummary::from_mse(outcomes.iter().map(|o| o.spline_mse[l]).collect()),
            })
            .collect();
        Self {
            config,
            components,
            elapsed_secs,
        }
    }

    pub fn component(&self, f: TestFunction) -> Option<&ComponentResult> {
        self.components.iter().find(|c| c.function == f)
    }

    /// Same statistics, runtime metadata ignored.
    pub fn same_statistics(&self, other: &StudyResult) -> bool {
        self.config == other.config && self.components == other.components
    }
}

/// Runs every replicate (in parallel) and aggregates AMSE per component and
/// method.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let start = Instant::now();
    let outcomes = (0..config.replicates)
        .into_par_iter()
        .map(|index| {
            run_replicate(config, index).map_err(|e| Error::Replicate {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyResult::from_outcomes(
        config.clone(),
        outcomes,
        start.elapsed().as_secs_f64(),
    ))
}

/// CSV table with rows `n × function × method` and one AMSE/sd column
/// pair per SNR scenario present in `results`.
pub fn results_table_csv(results: &[StudyResult]) -> String {
    let mut snrs: Vec<Option<f64>> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut functions: Vec<TestFunction> = Vec::new();
    for r in results {
        if !snrs.contains(&r.config.snr) {
            snrs.push(r.config.snr);
        }
        if !sizes.contains(&r.config.grid_size) {
            sizes.push(r.config.grid_size);
        }
        for c in &r.components {
            if !functions.contains(&c.function) {
                functions.push(c.function);
            }
        }
    }
    let label = |s: Option<f64>| s.map_or_else(|| "inf".to_string(), |v| format!("{v}"));

    let mut out = String::from("n,function,method");
    for s in &snrs {
        let s = label(*s);
        let _ = write!(out, ",amse_snr{s},sd_snr{s}");
    }
    out.push('\n');
    for n in &sizes {
        for f in &functions {
            for method in [Method::Wavelets, Method::Splines] {
                let _ = write!(out, "{n},{f},{}", method.name());
                for s in &snrs {
                    let cell = results
                        .iter()
                        .find(|r| r.config.grid_size == *n && r.config.snr == *s)
                        .and_then(|r| r.component(*f))
                        .map(|c| c.method(method));
                    match cell {
                        Some(m) => {
                            let _ = write!(out, ",{:.16e},{:.16e}", m.amse, m.sd);
                        }
                        None => out.push_str(",,"),
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}
