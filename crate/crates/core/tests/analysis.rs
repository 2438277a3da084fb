use proptest::prelude::*;
use thinfree::analysis::{
    annulus_region, comparability_check, estimate_exponent_field, free_boundary_of_field, least_squares, window_slope,
    ExponentOptions,
};
use thinfree::fdsolver::Grid2D;
use thinfree::profiles::{build_profile, eval_profile};
use thinfree::Error;

fn sampled_profile(n: usize, omega: f64, z: f64) -> (Grid2D, Vec<f64>, f64) {
    let grid = Grid2D::new(n).unwrap();
    let p = build_profile(omega).unwrap();
    let mut u = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            u[grid.index(i, j)] = eval_profile(&p, grid.coord(i) - z, grid.coord(j));
        }
    }
    (grid, u, p.homogeneity())
}

#[test]
fn estimator_recovers_profile_exponents() {
    for omega in [1.0, 2.0] {
        let (grid, u, beta) = sampled_profile(257, omega, 0.0);
        let fit = estimate_exponent_field(grid, &u, 0.0, 0.4, 4.0 * grid.h(), ExponentOptions::default()).unwrap();
        assert!((fit.global_slope - beta).abs() <= 0.01, "omega = {omega}: {} vs {beta}", fit.global_slope);
    }
}

#[test]
fn free_boundary_of_a_translated_profile() {
    let z = 0.1234;
    let (grid, u, _) = sampled_profile(257, 2.0, z);
    let found = free_boundary_of_field(grid, &u).unwrap();
    assert!((found - z).abs() < grid.h(), "{found} vs {z}");
}

#[test]
fn free_boundary_errors() {
    let grid = Grid2D::new(33).unwrap();
    let zero = vec![0.0; grid.len()];
    assert!(matches!(free_boundary_of_field(grid, &zero), Err(Error::NoFreeBoundary(_))));
    let mut bump = zero.clone();
    let j = grid.thin_row();
    bump[grid.index(10, j)] = 1.0;
    assert!(matches!(free_boundary_of_field(grid, &bump), Err(Error::MonotonicityViolated { .. })));
}

#[test]
fn window_slope_of_a_power() {
    let (grid, u, beta) = sampled_profile(257, 1.0, 0.0);
    let options = ExponentOptions { radii_per_octave: 4, subtract_plane: false };
    let fit = estimate_exponent_field(grid, &u, 0.0, 0.4, 4.0 * grid.h(), options).unwrap();
    let s = window_slope(&fit, 0.04, 0.4).unwrap();
    assert!((s - beta).abs() < 0.01);
    assert!(window_slope(&fit, 0.5, 0.6).is_err());
}

#[test]
fn annulus_excludes_the_inner_disk_and_strip() {
    let grid = Grid2D::new(65).unwrap();
    let region = annulus_region(grid, 0.0, 0.1, 0.3, 0.05);
    assert!(!region.is_empty());
    for k in region {
        let (x1, x2) = (grid.coord(k % 65), grid.coord(k / 65));
        let r = x1.hypot(x2);
        assert!((0.1..=0.3 + 1e-12).contains(&r) && x2.abs() >= 0.05);
    }
}

#[test]
fn ratio_check_needs_a_usable_denominator() {
    let a = vec![1.0; 4];
    let b = vec![0.0; 4];
    assert_eq!(comparability_check(&a, &b, &[0, 1, 2, 3]), Err(Error::DegenerateRegion));
    assert!(comparability_check(&a, &b[..3], &[0]).is_err());
    assert!(comparability_check(&a, &a, &[7]).is_err());
}

proptest! {
    #[test]
    fn least_squares_recovers_lines(m in -5.0f64..5.0, c in -5.0f64..5.0, k in 3usize..30) {
        let pts: Vec<(f64, f64)> = (0..k).map(|i| (i as f64 * 0.3, m * i as f64 * 0.3 + c)).collect();
        let fit = least_squares(&pts);
        prop_assert!((fit.slope - m).abs() < 1e-9 && (fit.intercept - c).abs() < 1e-9);
    }

    #[test]
    fn ratios_scale_with_the_numerator(b in prop::collection::vec(0.1f64..10.0, 1..50), s in 0.01f64..100.0) {
        let a: Vec<f64> = b.iter().map(|v| s * v).collect();
        let region: Vec<usize> = (0..b.len()).collect();
        let (lo, hi) = comparability_check(&a, &b, &region).unwrap();
        prop_assert!((lo - s).abs() <= 1e-12 * s && (hi - s).abs() <= 1e-12 * s);
    }

    #[test]
    fn ratio_bracket_is_ordered(a in prop::collection::vec(-10.0f64..10.0, 20), b in prop::collection::vec(0.1f64..10.0, 20)) {
        let region: Vec<usize> = (0..20).collect();
        let (lo, hi) = comparability_check(&a, &b, &region).unwrap();
        prop_assert!(lo <= hi);
        for k in 0..20 {
            let q = a[k] / b[k];
            prop_assert!(q >= lo && q <= hi);
        }
    }
}
