//! B-spline basis (Cox–de Boor recursion) and the least-squares spline
//! baseline for component estimation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::unmix::{reciprocal_condition, AggregatedData, MixingMatrix, RCOND_THRESHOLD};

/// B-spline basis of order `m` (degree `m - 1`) over a nondecreasing knot
/// vector. Basis function `i` is supported on `[t_i, t_{i+m}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    order: usize,
    knots: Vec<f64>,
}

impl BSplineBasis {
    pub fn new(order: usize, knots: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parameter("B-spline order must be at least 1".into()));
        }
        if knots.len() < order + 1 {
            return Err(shape(format!(
                "{} knots cannot carry a basis of order {order}",
                knots.len()
            )));
        }
        if knots.iter().any(|t| !t.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("knots must be finite and nondecreasing".into()));
        }
        if knots[0] == knots[knots.len() - 1] {
            return Err(Error::Domain("knot vector spans an empty interval".into()));
        }
        Ok(Self { order, knots })
    }

    /// Clamped basis on `[a, b]` with `interior` equally spaced interior
    /// knots and each boundary knot repeated `order` times.
    pub fn clamped_uniform(order: usize, interior: usize, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
        }
        let mut knots = Vec::with_capacity(interior + 2 * order);
        knots.extend(std::iter::repeat_n(a, order));
        let step = (b - a) / (interior + 1) as f64;
        knots.extend((1..=interior).map(|k| a + step * k as f64));
        knots.extend(std::iter::repeat_n(b, order));
        Self::new(order, knots)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.knots.len() - self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Index of the last interval of positive length; it is closed on the
    /// right so the end of the domain is covered.
    fn last_interval(&self) -> usize {
        let n = self.knots.len();
        (0..n - 1)
            .rev()
            .find(|&i| self.knots[i] < self.knots[i + 1])
            .expect("knot span is nonempty")
    }

    fn indicator(&self, i: usize, x: f64) -> f64 {
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        if (lo <= x && x < hi) || (x == hi && i == self.last_interval()) {
            1.0
        } else {
            0.0
        }
    }

    /// `B_{i,m}(x)` by direct recursion, with `0/0` terms taken as zero.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.len() {
            return Err(shape(format!(
                "basis index {i} out of range (basis has {} functions)",
                self.len()
            )));
        }
        Ok(self.recurse(i, self.order, x))
    }

    fn recurse(&self, i: usize, order: usize, x: f64) -> f64 {
        if order == 1 {
            return self.indicator(i, x);
        }
        let t = &self.knots;
        let mut value = 0.0;
        let left = t[i + order - 1] - t[i];
        if left > 0.0 {
            value += (x - t[i]) / left * self.recurse(i, order - 1, x);
        }
        let right = t[i + order] - t[i + 1];
        if right > 0.0 {
            value += (t[i + order] - x) / right * self.recurse(i + 1, order - 1, x);
        }
        value
    }

    /// All basis functions at `x`, built bottom-up over the orders.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let t = &self.knots;
        let n = t.len();
        let mut b: Vec<f64> = (0..n - 1).map(|i| self.indicator(i, x)).collect();
        for k in 2..=self.order {
            for i in 0..n - k {
                let mut v = 0.0;
                let left = t[i + k - 1] - t[i];
                if left > 0.0 {
                    v += (x - t[i]) / left * b[i];
                }
                let right = t[i + k] - t[i + 1];
                if right > 0.0 {
                    v += (t[i + k] - x) / right * b[i + 1];
                }
                b[i] = v;
            }
        }
        b.truncate(self.len());
        b
    }

    /// `M × P` matrix of basis values at the grid points.
    pub fn design(&self, grid: &[f64]) -> DMatrix<f64> {
        let p = self.len();
        let mut out = DMatrix::zeros(grid.len(), p);
        for (r, x) in grid.iter().enumerate() {
            for (c, v) in self.eval_all(*x).into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplineConfig {
    pub order: usize,
    pub interior_knots: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self {
            order: 4,
            interior_knots: 35,
        }
    }
}

/// Joint least-squares fit of every component in a clamped B-spline basis.
///
/// With `A ≈ B·C·y` (`B` the `M × P` basis matrix, `C` the `P × L` spline
/// coefficients) the stacked normal equations factor as
/// `(y·yᵗ ⊗ BᵗB) vec(C) = vec(Bᵗ·A·yᵗ)`, so `C = B⁺·A·yᵗ·(y·yᵗ)⁻¹`.
/// Returns the `M × L` fitted curves `B·C`.
pub fn fit_components_bspline(
    data: &AggregatedData,
    y: &MixingMatrix,
    config: &SplineConfig,
) -> Result<DMatrix<f64>> {
    Ok(fit_coefficients(data, y, config)?.2)
}

/// Like [`fit_components_bspline`], also returning the basis and the
/// `P × L` coefficient matrix.
pub fn fit_coefficients(
    data: &AggregatedData,
    y: &MixingMatrix,
    config: &SplineConfig,
) -> Result<(BSplineBasis, DMatrix<f64>, DMatrix<f64>)> {
    if y.samples() != data.samples() {
        return Err(shape(format!(
            "data have {} samples but the mixing matrix has {}",
            data.samples(),
            y.samples()
        )));
    }
    let grid = data.grid();
    let basis = BSplineBasis::clamped_uniform(
        config.order,
        config.interior_knots,
        grid[0],
        grid[grid.len() - 1],
    )?;
    let design = basis.design(grid);
    if design.ncols() > design.nrows() {
        return Err(Error::RankDeficient {
            what: "B-spline design matrix",
            rcond: 0.0,
            threshold: RCOND_THRESHOLD,
        });
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rcond > RCOND_THRESHOLD) {
        return Err(Error::RankDeficient {
            what: "B-spline design matrix",
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }

    let gram = y.gram();
    let grcond = reciprocal_condition(&gram);
    if !(grcond > RCOND_THRESHOLD) {
        return Err(Error::RankDeficient {
            what: "y·yᵗ",
            rcond: grcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        what: "y·yᵗ",
        rcond: grcond,
        threshold: RCOND_THRESHOLD,
    })?;
    // A·yᵗ·(y·yᵗ)⁻¹, one column per component.
    let target = chol.solve(&(y.weights() * data.values().transpose())).transpose();
    let coeffs = svd
        .solve(&target, 0.0)
        .map_err(|e| Error::Domain(format!("spline least squares failed: {e}")))?;
    let curves = &design * &coeffs;
    Ok((basis, coeffs, curves))
}
