use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use thinfree::exponents::{alpha_pucci, g, h, Sign};
use thinfree::profiles::{
    build_profile, eval_profile, profile_gradient, shoot_sector, slit_angle, verify_profile, BlowupProfile,
};

fn omega_two() -> &'static BlowupProfile {
    static P: OnceLock<BlowupProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(2.0).unwrap())
}

#[test]
fn laplacian_sectors_are_thirds() {
    for sign in [Sign::Negative, Sign::Positive] {
        let a = shoot_sector(1.5, 1.0, sign).unwrap();
        assert!((a - 2.0 * PI / 3.0).abs() < 1e-5, "{a}");
    }
}

#[test]
fn interfaces_sit_at_the_closed_form_angles() {
    for w in [1.0, 3.0] {
        let p = build_profile(w).unwrap();
        let a = alpha_pucci(w).unwrap().alpha;
        assert!((p.theta1 - 2.0 * g(a, w)).abs() < 1e-12);
        assert!((p.theta2 - p.theta1 - 2.0 * h(a, w)).abs() < 1e-12);
    }
}

#[test]
fn profile_vanishes_on_the_slit_and_is_positive_ahead() {
    let p = omega_two();
    for k in 1..20 {
        let x = k as f64 / 20.0;
        assert!(eval_profile(p, -x, 0.0).abs() < 1e-10);
        assert!(eval_profile(p, x, 0.0) > 0.0);
    }
}

#[test]
fn sector_signs_alternate() {
    let p = omega_two();
    let mid = |a: f64, b: f64| p.angular(0.5 * (a + b)).0;
    assert!(mid(0.0, p.theta1) < 0.0);
    assert!(mid(p.theta1, p.theta2) > 0.0);
    assert!(mid(p.theta2, 2.0 * PI) < 0.0);
}

#[test]
fn profile_is_even_in_x2() {
    let p = &build_profile(5.0).unwrap();
    for k in 0..50 {
        let t = 2.0 * PI * k as f64 / 50.0;
        let (x1, x2) = (0.7 * t.cos(), 0.7 * t.sin());
        assert!((eval_profile(p, x1, x2) - eval_profile(p, x1, -x2)).abs() < 1e-6);
    }
}

#[test]
fn self_check_passes_for_several_ratios() {
    for w in [1.0, 1.5, 4.0] {
        let r = verify_profile(&build_profile(w).unwrap(), 1e-3, 1e-3);
        assert!(r.passed, "omega = {w}: {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_is_homogeneous(t in 0.05f64..4.0, theta in 0.01f64..6.27, r in 0.1f64..1.0) {
        let p = omega_two();
        let (x1, x2) = (-r * theta.cos(), r * theta.sin());
        let lhs = eval_profile(p, t * x1, t * x2);
        let rhs = t.powf(p.homogeneity()) * eval_profile(p, x1, x2);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gradient_matches_differences(theta in 0.05f64..6.23, r in 0.2f64..1.0) {
        let p = omega_two();
        let (x1, x2) = (-r * theta.cos(), r * theta.sin());
        let d = 1e-6;
        let fd1 = (eval_profile(p, x1 + d, x2) - eval_profile(p, x1 - d, x2)) / (2.0 * d);
        let fd2 = (eval_profile(p, x1, x2 + d) - eval_profile(p, x1, x2 - d)) / (2.0 * d);
        let gr = profile_gradient(p, x1, x2);
        prop_assert!((gr[0] - fd1).abs() < 1e-4 && (gr[1] - fd2).abs() < 1e-4);
    }

    #[test]
    fn slit_angle_is_in_range(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let t = slit_angle(x1, x2);
        prop_assert!((0.0..2.0 * PI).contains(&t));
    }
}
