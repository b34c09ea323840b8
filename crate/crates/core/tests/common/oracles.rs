//! Independent reference computations shared by the integration and
//! acceptance tests. Nothing here calls into the code under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Stratified standard normal draws: `Φ⁻¹((i + U_i)/n)`, shuffled.
pub fn stratified_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut z: Vec<f64> = (0..n)
        .map(|i| {
            let u = (i as f64 + rng.random::<f64>()) / n as f64;
            std.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16))
        })
        .collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        z.swap(i, j);
    }
    z
}

fn logistic_pdf(theta: f64, tau: f64) -> f64 {
    let e = (-theta.abs() / tau).exp();
    e / (tau * (1.0 + e) * (1.0 + e))
}

fn normal_pdf(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Mode of `φ_σ(d − θ)·g_τ(θ)`, where the log-derivative
/// `(d − θ)/σ² − tanh(θ/2τ)/τ` is strictly decreasing.
fn slab_posterior_mode(d: f64, tau: f64, sigma: f64) -> f64 {
    let f = |t: f64| (d - t) / (sigma * sigma) - (t / (2.0 * tau)).tanh() / tau;
    let (mut lo, mut hi) = (d.min(0.0) - 1.0, d.max(0.0) + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monte Carlo posterior mean of `θ` under `p·δ₀ + (1 − p)·Logistic(0, τ)`
/// and `d | θ ~ N(θ, σ²)`.
///
/// The slab integrals are estimated by importance sampling from
/// `N(mode, (1.2σ)²)`, which dominates the log-concave slab posterior; the
/// point-mass term is exact.
pub fn mc_posterior_mean(d: f64, p: f64, tau: f64, sigma: f64, z: &[f64]) -> f64 {
    let mode = slab_posterior_mode(d, tau, sigma);
    let s = 1.2 * sigma;
    let (mut num, mut den) = (0.0, 0.0);
    for &zi in z {
        let theta = mode + s * zi;
        let w = normal_pdf(d - theta, sigma) * logistic_pdf(theta, tau) / normal_pdf(zi * s, s);
        num += theta * w;
        den += w;
    }
    let n = z.len() as f64;
    let (num, den) = (num / n, den / n);
    (1.0 - p) * num / (p * normal_pdf(d, sigma) + (1.0 - p) * den)
}

/// Sample standard deviation by the two-pass formula.
pub fn two_pass_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Dense Gaussian elimination with partial pivoting on a row-major system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Joint spline coefficients from the full `P·L`-dimensional normal
/// equations of `min ‖A − B·C·y‖_F`. `basis` is `M × P` row-major, `data`
/// is `M × I`, `y` is `L × I`; returns `C` as `P × L`.
pub fn dense_spline_coefficients(
    basis: &[Vec<f64>],
    data: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let m = basis.len();
    let p = basis[0].len();
    let l = y.len();
    let i_count = y[0].len();
    // Unknown index (a, l) ↦ a + p·l; residual r_{m,i} = A_{m,i} − Σ B_{m,a} C_{a,l} y_{l,i}.
    let n = p * l;
    let mut lhs = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for mi in 0..m {
        for ii in 0..i_count {
            let row: Vec<f64> = (0..n)
                .map(|k| basis[mi][k % p] * y[k / p][ii])
                .collect();
            for r in 0..n {
                rhs[r] += row[r] * data[mi][ii];
                for c in 0..n {
                    lhs[r][c] += row[r] * row[c];
                }
            }
        }
    }
    let x = gauss_solve(lhs, rhs);
    (0..p).map(|a| (0..l).map(|c| x[a + p * c]).collect()).collect()
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
