mod common;

use common::oracles::dense_spline_coefficients;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemix::bspline::fit_coefficients;
use wavemix::{AggregatedData, BSplineBasis, DMatrix, MixingMatrix, SplineConfig};

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[test]
fn small_instance_matches_dense_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = DMatrix::from_fn(16, 3, |_, _| rng.random::<f64>() * 4.0 - 2.0);
    let y = DMatrix::from_fn(2, 3, |_, _| rng.random::<f64>());
    let data = AggregatedData::on_unit_grid(a.clone()).unwrap();
    let cfg = SplineConfig { order: 4, interior_knots: 2 };
    let (basis, coeffs, curves) =
        fit_coefficients(&data, &MixingMatrix::new(y.clone()).unwrap(), &cfg).unwrap();
    assert_eq!(coeffs.shape(), (6, 2));
    assert_eq!(curves.shape(), (16, 2));

    let design = basis.design(data.grid());
    let oracle = dense_spline_coefficients(&rows(&design), &rows(&a), &rows(&y));
    for (r, row) in oracle.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert!((coeffs[(r, c)] - v).abs() < 1e-8, "C[{r},{c}] {} vs {v}", coeffs[(r, c)]);
        }
    }
}

#[test]
fn residual_is_orthogonal_to_the_model_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = DMatrix::from_fn(64, 5, |_, _| rng.random::<f64>());
    let y = DMatrix::from_fn(3, 5, |_, _| rng.random::<f64>());
    let data = AggregatedData::on_unit_grid(a.clone()).unwrap();
    let cfg = SplineConfig { order: 3, interior_knots: 6 };
    let (basis, _, curves) =
        fit_coefficients(&data, &MixingMatrix::new(y.clone()).unwrap(), &cfg).unwrap();
    let b = basis.design(data.grid());
    let resid = &a - &curves * &y;
    // Gradient of ‖A − B·C·y‖² in C: Bᵗ·R·yᵗ.
    let grad = b.transpose() * resid * y.transpose();
    assert!(grad.abs().max() < 1e-10, "{}", grad.abs().max());
}

#[test]
fn in_span_components_are_reproduced() {
    let m = 128;
    let basis = BSplineBasis::clamped_uniform(4, 9, 1.0 / m as f64, 1.0).unwrap();
    let grid: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
    let b = basis.design(&grid);
    let c = DMatrix::from_fn(basis.len(), 2, |r, col| ((r * 7 + col * 3) % 5) as f64 - 2.0);
    let alpha = &b * &c;
    let y = DMatrix::from_row_slice(2, 4, &[0.2, 0.9, 0.4, 0.6, 0.7, 0.1, 0.5, 0.3]);
    let data = AggregatedData::new(&alpha * &y, grid).unwrap();
    let cfg = SplineConfig { order: 4, interior_knots: 9 };
    let (_, _, curves) = fit_coefficients(&data, &MixingMatrix::new(y).unwrap(), &cfg).unwrap();
    assert!((&curves - &alpha).abs().max() < 1e-8);
}
