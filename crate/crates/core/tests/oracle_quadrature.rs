mod common;

use common::rel_err;
use num_complex::Complex64;
use qmt_core::landau::{default_grid, landau_state};
use qmt_core::oracle::{exact_state, gaussian_moment, MomentSpec};
use qmt_core::{expectation, inner_product, RealField};

/// Moments of `|ψ_{0,m}|²` from the closed form agree with brute-force
/// quadrature on a fine lattice.
#[test]
fn moments_match_high_resolution_quadrature() {
    for m in 0..=2u32 {
        for b in [0.5, 1.0, 2.0] {
            let grid = default_grid(b, 1024, 10.0).unwrap();
            let psi = landau_state(b, m, &grid).unwrap();
            for p in 0..=6u32 {
                for q in 0..=(6 - p) {
                    let w = RealField::from_fn(grid, |x, y| x.powi(p as i32) * y.powi(q as i32)).unwrap();
                    let numeric = expectation(&psi, &w).unwrap();
                    let exact = gaussian_moment(MomentSpec { p, q, m, b }).unwrap();
                    if exact == 0.0 {
                        let scale = gaussian_moment(MomentSpec { p: p + p % 2, q: q + q % 2, m, b }).unwrap();
                        assert!(numeric.abs() < 1e-9 * scale, "m={m} B={b} p={p} q={q}: {numeric}");
                    } else {
                        assert!(rel_err(numeric, exact) < 1e-9, "m={m} B={b} p={p} q={q}: {numeric} vs {exact}");
                    }
                }
            }
        }
    }
}

#[test]
fn oracle_state_agrees_with_model_state() {
    let grid = default_grid(1.3, 64, 8.0).unwrap();
    for m in 0..4 {
        let a = exact_state(1.3, 0.0, m, &grid).unwrap();
        let b = landau_state(1.3, m, &grid).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }
}

#[test]
fn overlap_between_gauges() {
    // ∫ (1/2π) e^{-r²/2} e^{igxy} d²x = 1/sqrt(1 + g²)
    let grid = default_grid(1.0, 256, 8.0).unwrap();
    let sym = exact_state(1.0, 0.0, 0, &grid).unwrap();
    let gauged = exact_state(1.0, 0.5, 0, &grid).unwrap();
    let overlap = inner_product(&sym, &gauged).unwrap().norm();
    assert!((overlap - 1.25f64.powf(-0.5)).abs() < 1e-6, "{overlap}");
    assert!((overlap - 0.894427).abs() < 1e-6);
    let _ = Complex64::new(0.0, 0.0);
}

#[test]
fn tail_mass_outside_default_domain() {
    // P(|x| > L or |y| > L) <= 2·P(|x| > L) = 2·erfc(n_sigma/√2) < 4 e^{-n_sigma²/2}
    for b in [0.125, 1.0, 4.0] {
        let grid = default_grid(b, 512, 8.0).unwrap();
        let psi = landau_state(b, 0, &grid).unwrap();
        let inside = inner_product(&psi, &psi).unwrap().re;
        assert!((1.0 - inside).abs() < 1e-12, "B={b}: {inside}");
    }
    assert!(4.0 * (-32.0f64).exp() < 1e-12);
}
