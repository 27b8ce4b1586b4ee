use super::*;
use crate::cli::presets;
use crate::lift::{build_lift, LiftOptions};
use crate::spectral::{enstrophy, TorusSpec};

fn t2pi() -> TorusSpec {
    TorusSpec::two_pi(16).unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn lifted(u0: &SpectralField, basis: &BasisSpec, order: usize, nu: f64, path: PathChoice) -> GalerkinSystem {
    let lift = build_lift(u0, &ForcingSpec::zero(), order, nu, &LiftOptions::default()).unwrap();
    let opts = SystemOptions {
        path,
        ..SystemOptions::default()
    };
    GalerkinSystem::lifted(basis, &lift, &opts).unwrap()
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    // Small LCG; these tests only need reproducible spread.
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

#[test]
fn zero_data_has_zero_rhs() {
    let basis = BasisSpec::ball(t2pi(), 2.0).unwrap();
    let z = SpectralField::zero(t2pi());
    let sys = lifted(&z, &basis, 2, 0.3, PathChoice::Tensor);
    let g = vec![0.0; sys.dim()];
    assert!(sys.rhs(0.4, &g).unwrap().iter().all(|&x| x == 0.0));
    let d = GalerkinSystem::direct(&basis, &z, &ForcingSpec::zero(), 0.3, &SystemOptions::default()).unwrap();
    assert!(d.rhs(0.0, &g).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn lifted_rhs_vanishes_at_the_start() {
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 3.0).unwrap();
    let u0 = presets::random_solenoidal(&torus, 6, 2, 5);
    let sys = lifted(&u0, &basis, 3, 0.2, PathChoice::Tensor);
    let f0 = sys.rhs(0.0, &vec![0.0; sys.dim()]).unwrap();
    let scale = 0.2 * enstrophy(&u0).sqrt();
    assert!(norm(&f0) <= 1e-10 * scale, "{}", norm(&f0));
}

#[test]
fn single_mode_rhs_matches_the_closed_form() {
    // v(t) = (e^{-νλt} − Σ_{j≤J} (−νλt)^j/j!) u₀ solves the lifted system.
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 2.0).unwrap();
    let u0 = presets::single_mode(&torus);
    let (nu, order) = (0.6, 2usize);
    let sys = lifted(&u0, &basis, order, nu, PathChoice::Tensor);
    let p0 = basis.project(&u0).unwrap();
    for t in [0.1, 0.7, 1.5] {
        let x = -nu * t;
        let taylor: f64 = (0..=order).map(|j| x.powi(j as i32) / factorial(j)).sum();
        let dtaylor: f64 = (1..=order).map(|j| -nu * x.powi(j as i32 - 1) / factorial(j - 1)).sum();
        let g: Vec<f64> = p0.iter().map(|c| c * (x.exp() - taylor)).collect();
        let want: Vec<f64> = p0.iter().map(|c| c * (-nu * x.exp() - dtaylor)).collect();
        let got = sys.rhs(t, &g).unwrap();
        let err: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(norm(&err) <= 1e-13 * norm(&p0), "t={t}: {}", norm(&err));
    }
}

#[test]
fn taylor_green_is_a_linear_decay_in_the_direct_system() {
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 3.0).unwrap();
    let u0 = presets::taylor_green(&torus);
    let sys = GalerkinSystem::direct(&basis, &u0, &ForcingSpec::zero(), 0.1, &SystemOptions::default()).unwrap();
    let g = sys.initial_state().g;
    let f = sys.rhs(0.0, &g).unwrap();
    let err: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + 0.2 * b).collect();
    assert!(norm(&err) <= 1e-14 * norm(&g));
}

#[test]
fn energy_balance_holds_pointwise() {
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 2.5).unwrap();
    let u0 = presets::random_solenoidal(&torus, 5, 2, 9);
    let sys = lifted(&u0, &basis, 2, 0.15, PathChoice::Tensor);
    for seed in 0..10 {
        let g = pseudo_random(sys.dim(), seed);
        let t = 0.1 * seed as f64;
        let f = sys.rhs(t, &g).unwrap();
        let (d, scale) = sys.energy_balance(t, &g, &f);
        assert!(d <= 1e-12 * scale, "seed {seed}: {d} vs {scale}");
        let b = sys.beta_matrices().unwrap();
        assert!(b.b_form(t, &g).abs() <= 1e-12 * norm(&g).powi(2) * u0.l2_norm());
    }
    let (d, big) = sys.beta_matrices().unwrap().b_skew_defect();
    assert!(d <= 1e-13 * big);
}

#[test]
fn nested_systems_agree_on_the_prefix() {
    let torus = t2pi();
    let small = BasisSpec::ball(torus, 2.0).unwrap();
    let big = BasisSpec::ball(torus, 3.0).unwrap();
    let u0 = presets::random_solenoidal(&torus, 4, 2, 3);
    let s = lifted(&u0, &small, 2, 0.2, PathChoice::Tensor);
    let b = lifted(&u0, &big, 2, 0.2, PathChoice::Tensor);
    let m = s.dim();
    let gs = pseudo_random(m, 17);
    let mut gb = vec![0.0; b.dim()];
    gb[..m].copy_from_slice(&gs);
    let ps = s.rhs_parts(0.3, &gs).unwrap();
    let pb = b.rhs_parts(0.3, &gb).unwrap();
    for k in 0..m {
        assert!((ps.nonlinear[k] - pb.nonlinear[k]).abs() <= 1e-14);
        assert!((ps.lift_linear[k] - pb.lift_linear[k]).abs() <= 1e-14);
        assert_eq!(ps.viscous[k], pb.viscous[k]);
    }
}

#[test]
fn grid_path_matches_tensor_path() {
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 2.0).unwrap();
    let u0 = presets::random_solenoidal(&torus, 4, 2, 11);
    let a = lifted(&u0, &basis, 2, 0.25, PathChoice::Tensor);
    let p = lifted(&u0, &basis, 2, 0.25, PathChoice::Pseudo);
    assert!(p.tensor().is_none());
    let g = pseudo_random(a.dim(), 2);
    let fa = a.rhs(0.6, &g).unwrap();
    let fp = p.rhs(0.6, &g).unwrap();
    let err: Vec<f64> = fa.iter().zip(&fp).map(|(x, y)| x - y).collect();
    assert!(norm(&err) <= 1e-11 * norm(&fa), "{}", norm(&err));
}

#[test]
fn reconstruction_and_parseval() {
    let torus = t2pi();
    let basis = BasisSpec::ball(torus, 2.0).unwrap();
    let mut e1 = vec![0.0; basis.len()];
    e1[0] = 1.0;
    let w1 = reconstruct_v(&GalerkinState { g: e1.clone(), t: 0.0 }, &basis).unwrap();
    let back = basis.project(&w1).unwrap();
    assert!(back.iter().zip(&e1).all(|(a, b)| (a - b).abs() <= 1e-15));
    let g = pseudo_random(basis.len(), 4);
    let v = reconstruct_v(&GalerkinState { g: g.clone(), t: 0.0 }, &basis).unwrap();
    let lam = basis.eigenvalues();
    let want: f64 = g.iter().zip(&lam).map(|(x, l)| l * x * x).sum();
    assert!((enstrophy(&v) - want).abs() <= 1e-13 * want);

    let u0 = presets::taylor_green(&torus);
    let sys = lifted(&u0, &basis, 2, 0.1, PathChoice::Tensor);
    let u = reconstruct_u(&sys.initial_state(), &basis, sys.lift()).unwrap();
    assert!(u.sub(&u0).unwrap().l2_norm() <= 1e-15 * u0.l2_norm());
}

#[test]
fn wrong_dimension_is_rejected() {
    let basis = BasisSpec::ball(t2pi(), 1.0).unwrap();
    let z = SpectralField::zero(t2pi());
    let sys = GalerkinSystem::direct(&basis, &z, &ForcingSpec::zero(), 1.0, &SystemOptions::default()).unwrap();
    assert!(matches!(sys.rhs(0.0, &[0.0]), Err(Error::DimensionMismatch { .. })));
    assert!(GalerkinSystem::direct(&basis, &z, &ForcingSpec::zero(), 0.0, &SystemOptions::default()).is_err());
}
