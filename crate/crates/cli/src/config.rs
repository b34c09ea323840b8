//! Flat `key = value` configuration files and resolution of the settings
//! each subcommand runs with. Precedence: flags, then file, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use wavemix::{EstimationConfig, PriorPolicy, StudyConfig, TestFunction};

use crate::args::{EstimateArgs, RulecurveArgs, SimulateArgs, TestfuncsArgs, WaveletArgs, WeightsScale};
use crate::{io_error, CliError, CliResult};

/// Parsed `key = value` pairs. Keys are case-insensitive and `-` is read as
/// `_`; `#` starts a comment.
#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
    source: PathBuf,
}

impl KeyValues {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, source: &Path) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key = value", source.display(), n + 1))
            })?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "{}:{}: duplicate key '{key}'",
                    source.display(),
                    n + 1
                )));
            }
        }
        Ok(Self {
            entries,
            source: source.to_path_buf(),
        })
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .remove(key)
            .map(|v| {
                v.parse().map_err(|e| {
                    CliError::Usage(format!("{}: bad value for '{key}': {e}", self.source.display()))
                })
            })
            .transpose()
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> CliResult<()> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Usage(format!(
                "{}: unknown key '{k}'",
                self.source.display()
            ))),
        }
    }
}

fn load(path: Option<&PathBuf>) -> CliResult<KeyValues> {
    path.map_or_else(|| Ok(KeyValues::default()), |p| KeyValues::read(p))
}

/// Resolves filter, J0 and prior from flags over file over `base`.
fn resolve_estimation(
    base: EstimationConfig,
    flags: &WaveletArgs,
    kv: &mut KeyValues,
) -> CliResult<EstimationConfig> {
    let filter_n = flags.filter_n.or(kv.take("filter_n")?).unwrap_or(base.filter_n);
    let primary_level = flags.j0.or(kv.take("j0")?).unwrap_or(base.primary_level);
    let base_tau = match base.policy {
        PriorPolicy::Fixed { tau, .. } | PriorPolicy::LevelDependent { tau } => tau,
        PriorPolicy::Identity => wavemix::shrinkage::DEFAULT_TAU,
    };
    let tau = flags.tau.or(kv.take("tau")?).unwrap_or(base_tau);
    let file_p = kv.take_str("p");
    let policy = if let Some(p) = flags.p {
        PriorPolicy::Fixed { p, tau }
    } else if flags.p_level_dependent {
        PriorPolicy::LevelDependent { tau }
    } else {
        match file_p.as_deref().map(str::trim) {
            None => match base.policy {
                PriorPolicy::Fixed { p, .. } => PriorPolicy::Fixed { p, tau },
                _ => PriorPolicy::LevelDependent { tau },
            },
            Some("level-dependent" | "level_dependent") => PriorPolicy::LevelDependent { tau },
            Some(v) => PriorPolicy::Fixed {
                p: v.parse().map_err(|_| {
                    CliError::Usage(format!("bad value for 'p': '{v}' (number or level-dependent)"))
                })?,
                tau,
            },
        }
    };
    let cfg = EstimationConfig {
        filter_n,
        primary_level,
        policy,
        ..base
    };
    cfg.policy.validate()?;
    wavemix::WaveletFilter::daubechies(cfg.filter_n)?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestfuncsConfig {
    pub tags: Vec<TestFunction>,
    pub grid_size: usize,
}

pub fn resolve_testfuncs(a: &TestfuncsArgs) -> CliResult<TestfuncsConfig> {
    let tags = if a.tags.is_empty() {
        TestFunction::ALL.to_vec()
    } else {
        a.tags.clone()
    };
    wavemix::testfuncs::grid(a.grid_size)?;
    Ok(TestfuncsConfig {
        tags,
        grid_size: a.grid_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub study: u32,
    /// One study per SNR scenario, sharing every other setting.
    pub snrs: Vec<f64>,
    pub base: StudyConfig,
}

impl SimulateConfig {
    pub fn studies(&self) -> Vec<StudyConfig> {
        self.snrs
            .iter()
            .map(|s| StudyConfig {
                snr: Some(*s),
                ..self.base.clone()
            })
            .collect()
    }
}

pub fn resolve_simulate(a: &SimulateArgs) -> CliResult<SimulateConfig> {
    let mut kv = load(a.config.as_ref())?;
    let study = a
        .study
        .or(kv.take("study")?)
        .ok_or_else(|| CliError::Usage("no study given (--study 1|2|3)".into()))?;
    let mut base = StudyConfig::study(study)?;
    let snrs = if !a.snr.is_empty() {
        a.snr.clone()
    } else if let Some(v) = kv.take_str("snr") {
        v.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("bad value for 'snr': {e}")))?
    } else {
        vec![3.0, 9.0]
    };
    base.grid_size = a.grid_size.or(kv.take("grid_size")?).unwrap_or(base.grid_size);
    base.samples = a.samples.or(kv.take("samples")?).unwrap_or(base.samples);
    base.replicates = a.replicates.or(kv.take("replicates")?).unwrap_or(base.replicates);
    base.seed = a.seed.or(kv.take("seed")?).unwrap_or(base.seed);
    base.spline.interior_knots = a.knots.or(kv.take("knots")?).unwrap_or(base.spline.interior_knots);
    base.spline.order = a.spline_order.or(kv.take("spline_order")?).unwrap_or(base.spline.order);
    base.rescale = a.rescale.or(kv.take("rescale")?).or(base.rescale);
    base.estimation = resolve_estimation(base.estimation, &a.wavelet, &mut kv)?;
    kv.finish()?;

    let cfg = SimulateConfig { study, snrs, base };
    if cfg.snrs.is_empty() {
        return Err(CliError::Usage("at least one SNR is required".into()));
    }
    for s in cfg.studies() {
        s.validate()?;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub data: PathBuf,
    pub weights: PathBuf,
    pub weights_scale: WeightsScale,
    /// Inclusive grid endpoints; `None` means `t_m = m/M`.
    pub grid: Option<(f64, f64)>,
    pub estimation: EstimationConfig,
}

pub fn resolve_estimate(a: &EstimateArgs) -> CliResult<EstimateConfig> {
    let mut kv = load(a.config.as_ref())?;
    let data: PathBuf = a
        .data
        .clone()
        .or(kv.take("data")?)
        .ok_or_else(|| CliError::Usage("no data file given (--data)".into()))?;
    let weights: PathBuf = a
        .weights
        .clone()
        .or(kv.take("weights")?)
        .ok_or_else(|| CliError::Usage("no weights file given (--weights)".into()))?;
    let weights_scale = match a.weights_scale {
        Some(s) => s,
        None => match kv.take_str("weights_scale").as_deref() {
            None => WeightsScale::default(),
            Some(v) => WeightsScale::from_str(v, true)
                .map_err(|_| CliError::Usage(format!("bad value for 'weights_scale': '{v}'")))?,
        },
    };
    let start = a.grid_start.or(kv.take("grid_start")?);
    let end = a.grid_end.or(kv.take("grid_end")?);
    let grid = match (start, end) {
        (None, None) => None,
        (Some(s), Some(e)) if e > s => Some((s, e)),
        (Some(s), Some(e)) => {
            return Err(CliError::Usage(format!("grid end {e} must exceed grid start {s}")))
        }
        _ => return Err(CliError::Usage("grid_start and grid_end go together".into())),
    };
    let estimation = resolve_estimation(EstimationConfig::default(), &a.wavelet, &mut kv)?;
    kv.finish()?;
    Ok(EstimateConfig {
        data: absolute(&data)?,
        weights: absolute(&weights)?,
        weights_scale,
        grid,
        estimation,
    })
}

fn absolute(p: &Path) -> CliResult<PathBuf> {
    std::fs::canonicalize(p).map_err(|e| io_error(p, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulecurveConfig {
    pub p: f64,
    pub tau: f64,
    pub sigma: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub steps: usize,
}

pub fn resolve_rulecurve(a: &RulecurveArgs) -> CliResult<RulecurveConfig> {
    wavemix::ShrinkageParams::new(a.p, a.tau, a.sigma)?;
    if a.steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if !(a.d_min.is_finite() && a.d_max.is_finite() && a.d_min <= a.d_max) {
        return Err(CliError::Usage(format!(
            "need finite d_min <= d_max, got [{}, {}]",
            a.d_min, a.d_max
        )));
    }
    Ok(RulecurveConfig {
        p: a.p,
        tau: a.tau,
        sigma: a.sigma,
        d_min: a.d_min,
        d_max: a.d_max,
        steps: a.steps,
    })
}
