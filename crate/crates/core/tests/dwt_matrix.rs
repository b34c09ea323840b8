use wavemix::dwt::idwt_from_slice;
use wavemix::{dwt_periodic, WaveletFilter};

/// Dense analysis matrix built column by column from unit impulses.
fn analysis_matrix(m: usize, filter: &WaveletFilter, j0: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            dwt_periodic(&e, filter, j0).unwrap().into_coefficients()
        })
        .collect()
}

#[test]
fn transform_matrix_is_orthogonal() {
    let m = 64;
    for n in 1..=10 {
        let f = WaveletFilter::daubechies(n).unwrap();
        // Full depth: coarse levels wrap the filter around several times.
        let cols = analysis_matrix(m, &f, 0);
        for a in 0..m {
            for b in 0..m {
                let dot: f64 = (0..m).map(|r| cols[a][r] * cols[b][r]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "N={n} ({a},{b}) {dot}");
            }
        }
    }
}

#[test]
fn haar_matrix_by_hand() {
    let f = WaveletFilter::daubechies(1).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = [4.0, 2.0, 5.0, 5.0];
    let got = dwt_periodic(&x, &f, 0).unwrap();
    // Level 1: pairs (4,2),(5,5) → smooth (6s,10s), detail (2s,0).
    // Level 0: smooth (6s,10s) → 8, detail −2.
    let want = [8.0, -2.0, 2.0 * s, 0.0];
    for (g, w) in got.coefficients().iter().zip(want) {
        assert!((g - w).abs() < 1e-14, "{g} vs {w}");
    }
}

#[test]
fn inverse_of_each_basis_vector_is_the_matching_row() {
    let m = 32;
    let f = WaveletFilter::daubechies(4).unwrap();
    let cols = analysis_matrix(m, &f, 2);
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let row = idwt_from_slice(&e, &f, 2).unwrap();
        for (r, v) in row.iter().enumerate() {
            assert!((v - cols[r][k]).abs() < 1e-13);
        }
    }
}
