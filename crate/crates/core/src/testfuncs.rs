//! Component test functions on `[0, 1]`: the four Donoho–Johnstone signals
//! plus the smooth Logit and spatially heterogeneous curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Jump/bump locations shared by Bumps and Blocks.
pub const LOCATIONS: [f64; 11] = [
    0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];
pub const BUMPS_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
pub const BUMPS_WIDTHS: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];
pub const BLOCKS_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    Bumps,
    Blocks,
    Doppler,
    Heavisine,
    Logit,
    SpaHet,
}

impl TestFunction {
    pub const ALL: [TestFunction; 6] = [
        TestFunction::Bumps,
        TestFunction::Blocks,
        TestFunction::Doppler,
        TestFunction::Heavisine,
        TestFunction::Logit,
        TestFunction::SpaHet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Bumps => "bumps",
            TestFunction::Blocks => "blocks",
            TestFunction::Doppler => "doppler",
            TestFunction::Heavisine => "heavisine",
            TestFunction::Logit => "logit",
            TestFunction::SpaHet => "spahet",
        }
    }

    /// Evaluates the function at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            TestFunction::Bumps => LOCATIONS
                .iter()
                .zip(BUMPS_HEIGHTS.iter().zip(&BUMPS_WIDTHS))
                .map(|(xl, (h, w))| h * (1.0 + ((x - xl) / w).abs()).powi(-4))
                .sum(),
            TestFunction::Blocks => LOCATIONS
                .iter()
                .zip(&BLOCKS_HEIGHTS)
                .map(|(xl, h)| h * (1.0 + sgn(x - xl)) / 2.0)
                .sum(),
            TestFunction::Doppler => {
                (x * (1.0 - x)).sqrt() * (2.1 * std::f64::consts::PI / (x + 0.05)).sin()
            }
            TestFunction::Heavisine => {
                4.0 * (4.0 * std::f64::consts::PI * x).sin() - sgn(x - 0.3) - sgn(0.72 - x)
            }
            TestFunction::Logit => 1.0 / (1.0 + (-20.0 * (x - 0.5)).exp()),
            TestFunction::SpaHet => {
                let c = 2f64.powf(-0.6);
                (x * (1.0 - x)).sqrt() * (2.0 * std::f64::consts::PI * (1.0 + c) / (x + c)).sin()
            }
        }
    }

    /// Samples the function at `t_m = m/M`, `m = 1..=M`.
    pub fn sample_grid(&self, m: usize) -> Result<Vec<f64>> {
        Ok(grid(m)?.into_iter().map(|t| self.eval_unchecked(t)).collect())
    }
}

/// The right-closed equispaced grid `t_m = m/M`, `m = 1..=M`.
pub fn grid(m: usize) -> Result<Vec<f64>> {
    if m < 2 || !m.is_power_of_two() {
        return Err(shape(format!("grid size {m} is not a power of two >= 2")));
    }
    Ok((1..=m).map(|i| i as f64 / m as f64).collect())
}

/// Sign with `sgn(0) = 0`.
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        TestFunction::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown test function '{s}' (expected one of bumps, blocks, doppler, heavisine, logit, spahet)"
                ))
            })
    }
}
