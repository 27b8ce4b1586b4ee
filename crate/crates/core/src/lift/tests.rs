use super::*;
use crate::cli::presets;
use crate::spectral::{WaveVector, TorusSpec};

fn t2pi() -> TorusSpec {
    TorusSpec::two_pi(16).unwrap()
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(1e-300)
}

#[test]
fn zero_data_gives_zero_lift() {
    let z = SpectralField::zero(t2pi());
    let lift = build_lift(&z, &ForcingSpec::zero(), 3, 0.5, &LiftOptions::default()).unwrap();
    assert!(lift.derivs().iter().all(|d| d.l2_norm() == 0.0));
    assert_eq!(lift.beta(0.7).l2_norm(), 0.0);
    assert_eq!(theta_eval(&lift, 0.3).unwrap().l2_norm(), 0.0);
    let rep = check_theta_orthogonal(&lift, 2).unwrap();
    assert!(rep.is_degenerate());
    assert_eq!(rep.max_ratio(), 0.0);
}

#[test]
fn shear_mode_decays_like_heat_equation() {
    let u0 = presets::single_mode(&t2pi());
    let nu = 0.3;
    let lift = build_lift(&u0, &ForcingSpec::zero(), 4, nu, &LiftOptions::default()).unwrap();
    for (j, d) in lift.derivs().iter().enumerate() {
        assert!(rel(d, &u0.scale((-nu).powi(j as i32))) < 1e-15, "j={j}");
        assert!(d.divergence_ratio() <= 1e-12);
    }
}

#[test]
fn taylor_green_first_derivative() {
    let u0 = presets::taylor_green(&t2pi());
    let nu = 0.1;
    let pre = advect(&u0, &u0, None).unwrap();
    assert!(pre.l2_norm() > 0.1);
    assert!(leray_project(&pre).l2_norm() <= 1e-14 * pre.l2_norm());
    let lift = build_lift(&u0, &ForcingSpec::zero(), 2, nu, &LiftOptions::default()).unwrap();
    assert!(rel(&lift.derivs()[1], &u0.scale(-2.0 * nu)) < 1e-14);
}

#[test]
fn beta_is_the_taylor_polynomial() {
    let u0 = presets::single_mode(&t2pi());
    let lift = build_lift(&u0, &ForcingSpec::zero(), 2, 1.0, &LiftOptions::default()).unwrap();
    assert_eq!(lift.beta(0.0), u0);
    let want = u0.scale(1.0 - 0.1 + 0.005);
    assert!(rel(&lift.beta(0.1), &want) < 1e-15);
    assert_eq!(lift.beta_derivative(3, 0.4).l2_norm(), 0.0);
    for j in 0..=2 {
        assert!(rel(&lift.beta_derivative(j, 0.0), &lift.derivs()[j]) < 1e-15);
    }
}

#[test]
fn theta_closed_form_for_shear_mode() {
    let u0 = presets::single_mode(&t2pi());
    let nu = 0.7;
    for order in 1..=4usize {
        let lift = build_lift(&u0, &ForcingSpec::zero(), order, nu, &LiftOptions::default()).unwrap();
        assert_eq!(theta_eval(&lift, 0.0).unwrap().l2_norm(), 0.0);
        let poly = lift.theta_polynomial().unwrap();
        for j in 0..order {
            assert_eq!(poly.derivative_at_zero(j).l2_norm(), 0.0, "J={order} j={j}");
        }
        for t in [0.05f64, 0.5, 1.3] {
            let sign = if order % 2 == 0 { -1.0 } else { 1.0 };
            let want = u0.scale(sign * nu.powi(order as i32 + 1) * t.powi(order as i32) / factorial(order));
            // θ is a cancellation of O(ν‖u₀‖) terms, so compare against that scale.
            let scale = nu * u0.l2_norm();
            assert!(theta_eval(&lift, t).unwrap().sub(&want).unwrap().l2_norm() < 1e-14 * scale);
            assert!(poly.eval(t).sub(&want).unwrap().l2_norm() < 1e-14 * scale);
        }
    }
}

#[test]
fn theta_is_orthogonal_to_solenoidal_fields_at_zero() {
    let torus = t2pi();
    let u0 = presets::random_solenoidal(&torus, 6, 2, 21);
    let lift = build_lift(&u0, &ForcingSpec::zero(), 3, 0.2, &LiftOptions::default()).unwrap();
    let rep = check_theta_orthogonal(&lift, 2).unwrap();
    assert!(!rep.is_degenerate());
    assert!(rep.max_ratio() <= 1e-8, "{rep:?}");
    assert!(check_theta_orthogonal(&lift, 3).is_err());
}

#[test]
fn two_theta_routes_agree_with_forcing() {
    let torus = TorusSpec::new(3.0, 16).unwrap();
    let u0 = presets::random_solenoidal(&torus, 4, 2, 3);
    let f = ForcingSpec {
        modes: vec![ForcingMode {
            k: [1, -1, 0],
            amplitude: [0.0, 0.3, 0.2, 0.0, 1.0, -0.4],
            poly: vec![1.0, -0.5, 0.25],
        }],
    };
    let lift = build_lift(&u0, &f, 3, 0.15, &LiftOptions::default()).unwrap();
    for d in lift.derivs() {
        assert!(d.divergence_ratio() <= 1e-12);
    }
    let poly = lift.theta_polynomial().unwrap();
    assert_eq!(poly.degree(), 6);
    for t in [0.0, 0.2, 0.9] {
        let a = theta_eval(&lift, t).unwrap();
        assert!(rel(&poly.eval(t), &a) < 1e-12, "t={t}");
    }
    let rep = check_theta_orthogonal(&lift, 2).unwrap();
    assert!(rep.max_ratio() <= 1e-8, "{rep:?}");
}

#[test]
fn truncated_lift_stays_in_the_basis() {
    let torus = t2pi();
    let basis = BasisSpec::first_pairs(torus, 8).unwrap();
    let u0 = presets::random_in_basis(&basis, 11);
    let opts = LiftOptions {
        truncate_to: Some(basis.clone()),
        ..LiftOptions::default()
    };
    let lift = build_lift(&u0, &ForcingSpec::zero(), 3, 0.1, &opts).unwrap();
    let modes = basis.mode_set();
    for d in lift.derivs() {
        assert!(d.modes().all(|k| modes.contains(&k)));
    }
}

#[test]
fn input_validation() {
    let torus = t2pi();
    let u0 = presets::single_mode(&torus);
    let f = ForcingSpec::zero();
    let o = LiftOptions::default();
    assert!(build_lift(&u0, &f, 0, 1.0, &o).is_err());
    assert!(build_lift(&u0, &f, 9, 1.0, &o).is_err());
    assert!(build_lift(&u0, &f, 2, 0.0, &o).is_err());
    let mut g = u0.clone();
    g.insert_pair(WaveVector::new(2, 0, 0), [num_complex::Complex64::new(1.0, 0.0); 3]);
    assert!(matches!(build_lift(&g, &f, 2, 1.0, &o), Err(Error::NotSolenoidal(_))));
    let small = LiftOptions {
        mode_cap: 3,
        ..LiftOptions::default()
    };
    let r = presets::random_solenoidal(&torus, 6, 2, 1);
    assert!(matches!(build_lift(&r, &f, 2, 1.0, &small), Err(Error::ModeCap { .. })));
}
