//! Orthonormal periodized discrete wavelet transform.
//!
//! Coefficients are stored coarsest-first in one contiguous vector:
//! the `2^J0` scaling coefficients, then detail blocks for levels
//! `J0, J0+1, ..., J-1` of sizes `2^J0, 2^(J0+1), ..., 2^(J-1)`.

mod filter;

pub use filter::{make_daubechies_filter, WaveletFilter};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Primary resolution level used when none is given.
pub const DEFAULT_PRIMARY_LEVEL: usize = 3;

/// Which block a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    /// Scaling coefficient `k` at the primary level.
    Scaling { k: usize },
    /// Detail coefficient at level `j`, shift `k`.
    Detail { j: usize, k: usize },
}

/// Block structure of a decomposition of a length `2^depth` signal down to
/// the primary level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLayout {
    depth: usize,
    primary_level: usize,
}

impl LevelLayout {
    pub fn new(depth: usize, primary_level: usize) -> Result<Self> {
        if primary_level >= depth {
            return Err(Error::Level(format!(
                "primary level J0={primary_level} must be below the depth J={depth}"
            )));
        }
        if depth >= usize::BITS as usize - 1 {
            return Err(shape(format!("depth {depth} is too large")));
        }
        Ok(Self {
            depth,
            primary_level,
        })
    }

    /// Layout for a signal of length `len`, which must be a power of two.
    pub fn for_length(len: usize, primary_level: usize) -> Result<Self> {
        let depth = dyadic_depth(len)?;
        Self::new(depth, primary_level)
    }

    /// `J`, with `M = 2^J`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `J0`.
    pub fn primary_level(&self) -> usize {
        self.primary_level
    }

    /// Signal length `M`.
    pub fn len(&self) -> usize {
        1 << self.depth
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scaling_range(&self) -> Range<usize> {
        0..(1 << self.primary_level)
    }

    /// Positions of the detail block at level `j`, if `J0 <= j < J`.
    pub fn detail_range(&self, j: usize) -> Option<Range<usize>> {
        if j < self.primary_level || j >= self.depth {
            return None;
        }
        let start = 1 << j;
        Some(start..2 * start)
    }

    pub fn finest_range(&self) -> Range<usize> {
        self.detail_range(self.depth - 1).expect("J0 < J")
    }

    pub fn detail_levels(&self) -> Range<usize> {
        self.primary_level..self.depth
    }

    /// Level/shift of the coefficient at `pos`.
    pub fn band(&self, pos: usize) -> Option<Band> {
        if pos >= self.len() {
            return None;
        }
        let scaling = 1usize << self.primary_level;
        if pos < scaling {
            return Some(Band::Scaling { k: pos });
        }
        let j = (usize::BITS - 1 - pos.leading_zeros()) as usize;
        Some(Band::Detail { j, k: pos - (1 << j) })
    }
}

/// Returns `J` such that `len == 2^J`, or a shape error.
pub fn dyadic_depth(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(shape(format!(
            "signal length {len} is not a power of two >= 2"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Wavelet coefficients of one signal together with their level bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    coefficients: Vec<f64>,
    layout: LevelLayout,
}

impl WaveletDecomposition {
    pub fn new(coefficients: Vec<f64>, layout: LevelLayout) -> Result<Self> {
        if coefficients.len() != layout.len() {
            return Err(shape(format!(
                "{} coefficients do not fill a layout of length {} (J={}, J0={})",
                coefficients.len(),
                layout.len(),
                layout.depth(),
                layout.primary_level()
            )));
        }
        Ok(Self {
            coefficients,
            layout,
        })
    }

    pub fn zeros(layout: LevelLayout) -> Self {
        Self {
            coefficients: vec![0.0; layout.len()],
            layout,
        }
    }

    pub fn layout(&self) -> LevelLayout {
        self.layout
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn scaling(&self) -> &[f64] {
        &self.coefficients[self.layout.scaling_range()]
    }

    pub fn detail(&self, j: usize) -> Option<&[f64]> {
        self.layout.detail_range(j).map(|r| &self.coefficients[r])
    }

    /// Detail coefficients at level `J-1`.
    pub fn finest_details(&self) -> &[f64] {
        &self.coefficients[self.layout.finest_range()]
    }
}

/// Forward periodized DWT of `signal` down to primary level `primary_level`.
pub fn dwt_periodic(
    signal: &[f64],
    filter: &WaveletFilter,
    primary_level: usize,
) -> Result<WaveletDecomposition> {
    let layout = LevelLayout::for_length(signal.len(), primary_level)?;
    let mut coefficients = vec![0.0; signal.len()];
    let mut approx = signal.to_vec();
    let mut next = vec![0.0; signal.len() / 2];

    for j in layout.detail_levels().rev() {
        let half = 1 << j;
        let detail = &mut coefficients[half..2 * half];
        analysis_step(&approx, filter, &mut next[..half], detail);
        approx.truncate(half);
        approx.copy_from_slice(&next[..half]);
    }
    coefficients[layout.scaling_range()].copy_from_slice(&approx);

    Ok(WaveletDecomposition {
        coefficients,
        layout,
    })
}

/// Inverse of [`dwt_periodic`].
pub fn idwt_periodic(decomp: &WaveletDecomposition, filter: &WaveletFilter) -> Vec<f64> {
    let layout = decomp.layout();
    let coefficients = decomp.coefficients();
    let mut approx = coefficients[layout.scaling_range()].to_vec();
    approx.reserve(layout.len() - approx.len());
    let mut next = vec![0.0; layout.len()];

    for j in layout.detail_levels() {
        let half = 1 << j;
        let detail = &coefficients[half..2 * half];
        synthesis_step(&approx, detail, filter, &mut next[..2 * half]);
        approx.clear();
        approx.extend_from_slice(&next[..2 * half]);
    }
    approx
}

/// Inverse transform from a raw coefficient slice in coarsest-first order.
pub fn idwt_from_slice(
    coefficients: &[f64],
    filter: &WaveletFilter,
    primary_level: usize,
) -> Result<Vec<f64>> {
    let layout = LevelLayout::for_length(coefficients.len(), primary_level)?;
    let decomp = WaveletDecomposition::new(coefficients.to_vec(), layout)?;
    Ok(idwt_periodic(&decomp, filter))
}

fn analysis_step(input: &[f64], filter: &WaveletFilter, approx: &mut [f64], detail: &mut [f64]) {
    let n = input.len();
    let (h, g) = (filter.lowpass(), filter.highpass());
    for k in 0..n / 2 {
        let mut s = 0.0;
        let mut d = 0.0;
        for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
            let x = input[(2 * k + i) % n];
            s += hi * x;
            d += gi * x;
        }
        approx[k] = s;
        detail[k] = d;
    }
}

fn synthesis_step(approx: &[f64], detail: &[f64], filter: &WaveletFilter, out: &mut [f64]) {
    let n = out.len();
    out.fill(0.0);
    let (h, g) = (filter.lowpass(), filter.highpass());
    for (k, (s, d)) in approx.iter().zip(detail).enumerate() {
        for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
            out[(2 * k + i) % n] += hi * s + gi * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn random_signal(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn layout_blocks() {
        let layout = LevelLayout::new(5, 2).unwrap();
        assert_eq!(layout.scaling_range(), 0..4);
        assert_eq!(layout.detail_range(2), Some(4..8));
        assert_eq!(layout.detail_range(4), Some(16..32));
        assert_eq!(layout.detail_range(5), None);
        assert_eq!(layout.detail_range(1), None);
        assert_eq!(layout.band(3), Some(Band::Scaling { k: 3 }));
        assert_eq!(layout.band(5), Some(Band::Detail { j: 2, k: 1 }));
        assert_eq!(layout.band(31), Some(Band::Detail { j: 4, k: 15 }));
        assert_eq!(layout.band(32), None);

        let sizes: usize = layout.scaling_range().len()
            + layout
                .detail_levels()
                .map(|j| layout.detail_range(j).unwrap().len())
                .sum::<usize>();
        assert_eq!(sizes, 32);
    }

    #[test]
    fn constant_signal_lives_in_scaling_space() {
        let c = 1.7;
        for n in 1..=10 {
            let f = make_daubechies_filter(n).unwrap();
            let dec = dwt_periodic(&[c; 8], &f, 0).unwrap();
            assert!((dec.scaling()[0] - c * 8f64.sqrt()).abs() < 1e-12);
            for d in &dec.coefficients()[1..] {
                assert!(d.abs() < 1e-12, "N={n}: {d}");
            }
        }
    }

    #[test]
    fn haar_impulse_by_hand() {
        // Stage 1: s = [1/√2, 0], d = [1/√2, 0]; stage 2: s = d = 1/2.
        let f = make_daubechies_filter(1).unwrap();
        let dec = dwt_periodic(&[1.0, 0.0, 0.0, 0.0], &f, 0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [0.5, 0.5, r, 0.0];
        for (a, b) in dec.coefficients().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((norm(dec.coefficients()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_and_level_errors() {
        let f = make_daubechies_filter(2).unwrap();
        assert!(matches!(dwt_periodic(&[0.0; 12], &f, 0), Err(Error::Shape(_))));
        assert!(matches!(dwt_periodic(&[0.0; 1], &f, 0), Err(Error::Shape(_))));
        assert!(matches!(dwt_periodic(&[0.0; 8], &f, 3), Err(Error::Level(_))));
        assert!(WaveletDecomposition::new(vec![0.0; 7], LevelLayout::new(3, 0).unwrap()).is_err());
        assert!(matches!(idwt_from_slice(&[0.0; 6], &f, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn round_trip_db10_length_1024() {
        let f = make_daubechies_filter(10).unwrap();
        let x = random_signal(1024, 11);
        let dec = dwt_periodic(&x, &f, 3).unwrap();
        let back = idwt_periodic(&dec, &f);
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn zero_and_scaling_only_inverses() {
        let f = make_daubechies_filter(4).unwrap();
        let layout = LevelLayout::new(3, 0).unwrap();
        let zero = idwt_periodic(&WaveletDecomposition::zeros(layout), &f);
        assert!(zero.iter().all(|v| *v == 0.0));

        let c = -2.5;
        let mut dec = WaveletDecomposition::zeros(layout);
        dec.coefficients_mut()[0] = c * 8f64.sqrt();
        for v in idwt_periodic(&dec, &f) {
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_annihilation_at_finest_level() {
        let m = 256;
        for n in 1..=10 {
            let f = make_daubechies_filter(n).unwrap();
            let coeffs = random_signal(n, 100 + n as u64);
            let signal: Vec<f64> = (0..m)
                .map(|i| {
                    let t = i as f64 / m as f64;
                    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
                })
                .collect();
            let dec = dwt_periodic(&signal, &f, 0).unwrap();
            let finest = dec.finest_details();
            // Entries whose filter support wraps past the end of the signal.
            let wrapped = (f.len() - 1).div_ceil(2);
            for (k, d) in finest.iter().enumerate().take(finest.len() - wrapped) {
                assert!(d.abs() < 1e-6, "N={n} k={k} d={d}");
            }
        }
    }

    #[test]
    fn linearity() {
        let f = make_daubechies_filter(6).unwrap();
        let x = random_signal(128, 1);
        let y = random_signal(128, 2);
        let (a, b) = (1.5, -0.25);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let dx = dwt_periodic(&x, &f, 2).unwrap();
        let dy = dwt_periodic(&y, &f, 2).unwrap();
        let dc = dwt_periodic(&combo, &f, 2).unwrap();
        for ((c, p), q) in dc.coefficients().iter().zip(dx.coefficients()).zip(dy.coefficients()) {
            assert!((c - (a * p + b * q)).abs() < 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn reconstruction_and_parseval(
                n in 1usize..=10,
                depth in 3usize..=12,
                j0_frac in 0.0f64..1.0,
                seed in any::<u64>(),
            ) {
                let j0 = ((depth as f64) * j0_frac) as usize;
                let f = make_daubechies_filter(n).unwrap();
                let x = random_signal(1 << depth, seed);
                let dec = dwt_periodic(&x, &f, j0).unwrap();
                let rel = (norm(dec.coefficients()) - norm(&x)).abs() / norm(&x);
                prop_assert!(rel < 1e-12, "parseval {}", rel);
                let back = idwt_periodic(&dec, &f);
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                prop_assert!(err < 1e-8, "reconstruction {}", err);
            }
        }
    }
}
