//! Reservoir construction checked against a dense eigenvalue solver.

use condbench::repr::{esn_init, EsnConfig};
use nalgebra::DMatrix;

pub fn dense_spectral_radius(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn check(hidden: usize, rho: f64, density: f64, seed: u64) {
    let cfg = EsnConfig {
        hidden,
        spectral_radius: rho,
        input_scaling: 0.5,
        density,
    };
    let esn = esn_init(12, &cfg, seed);
    let measured = dense_spectral_radius(&esn.w_h().to_dense());
    assert!(
        (measured - rho).abs() <= 1e-3,
        "hidden={hidden} rho={rho}: measured {measured}"
    );
    let cells = (hidden * hidden) as f64;
    let frac = esn.w_h().nnz() as f64 / cells;
    let se = (density * (1.0 - density) / cells).sqrt();
    assert!((frac - density).abs() <= 3.0 * se, "density {frac} vs {density}");
}

#[test]
fn small_reservoirs_hit_target_radius() {
    for (i, &rho) in [0.9, 0.99, 0.999].iter().enumerate() {
        for &density in &[0.05, 0.1] {
            check(100, rho, density, 10 + i as u64);
        }
    }
}

#[test]
fn large_reservoir_hits_target_radius() {
    check(1000, 0.9, 0.05, 3);
}
