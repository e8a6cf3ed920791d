mod common;

use std::sync::OnceLock;

use common::{eigen, simpson_breaks, slope};
use couette_core::bifurcate::{
    b0_l2_norm, certificate, eigen_integral, kernel_sweep, solve_eigen, solve_lambda1, CorrectionContext,
    EigenSolution, SolverConfig, NEAR_ZERO_REL,
};
use couette_core::linop::GridFn;
use couette_core::profile::{Profile, ProfileParams};
use couette_core::Error;
use proptest::prelude::*;
use std::sync::Arc;

fn closed_form(m: usize) -> f64 {
    2.0 / ((4.0 * m as f64).exp() - 1.0)
}

/// `m = 1`, `κ = 0` at `ε = 1e-2, 1e-3, 1e-4`.
fn ladder() -> &'static [Arc<EigenSolution>] {
    static L: OnceLock<Vec<Arc<EigenSolution>>> = OnceLock::new();
    L.get_or_init(|| [1e-2, 1e-3, 1e-4].iter().map(|&e| eigen(e, 0.0, 1)).collect())
}

#[test]
fn lambda1_closed_form_at_kappa_zero() {
    let p = Profile::from_eps_kappa(0.01, 0.0).unwrap();
    for m in 1..=5 {
        let l = solve_lambda1(m, &p, 1e-13).unwrap();
        let want = closed_form(m);
        assert!((l - want).abs() <= 1e-10 * want.max(1e-3), "m={m}: {l} vs {want}");
    }
    // independently evaluated decimals
    let l1 = solve_lambda1(1, &p, 1e-13).unwrap();
    assert!((l1 - 0.037_314_720_727_548_1).abs() < 1e-12);
    let l2 = solve_lambda1(2, &p, 1e-13).unwrap();
    assert!((l2 - 6.711_504_016_824_899e-4).abs() < 1e-14);
}

#[test]
fn eigen_integral_matches_simpson() {
    for (k, lambda) in [(0.0, 0.05), (0.01, 0.0287), (0.1, 0.2)] {
        let p = Profile::from_eps_kappa(0.01, k).unwrap();
        let mut br = vec![-1.0, 1.0];
        if k > 0.0 {
            br.extend([-1.0 + 2.0 * k, 1.0 - 2.0 * k]);
        }
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for m in [1usize, 2] {
            let want = simpson_breaks(|z| -p.phi_prime(z) / (1.0 + lambda - z), &br, 4000) / (2.0 * m as f64);
            let got = eigen_integral(m, &p, lambda).unwrap();
            assert!((got - want).abs() < 1e-10, "k={k} m={m}: {got} vs {want}");
        }
    }
}

#[test]
fn lambda1_shift_is_linear_in_kappa() {
    let p0 = Profile::from_eps_kappa(0.01, 0.0).unwrap();
    let l0 = solve_lambda1(1, &p0, 1e-13).unwrap();
    let c: Vec<f64> = [0.0025, 0.005, 0.01, 0.02]
        .iter()
        .map(|&k| {
            let p = Profile::from_eps_kappa(0.01, k).unwrap();
            (solve_lambda1(1, &p, 1e-13).unwrap() - l0).abs() / k
        })
        .collect();
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 1.1, "{c:?}");
    assert!(hi < 1.0);
}

#[test]
fn no_root_for_wide_ramps() {
    let p = Profile::from_eps_kappa(0.01, 0.1).unwrap();
    for m in 1..=3 {
        assert!(matches!(solve_lambda1(m, &p, 1e-12), Err(Error::BracketFailure { .. })));
    }
    let r = solve_eigen(1, ProfileParams::new(0.01, 0.1).unwrap(), &SolverConfig::default());
    assert!(matches!(r, Err(Error::BracketFailure { m: 1, .. })));
}

#[test]
fn b0_norm_closed_form() {
    for l in [0.0373f64, 6.7e-4, 0.5] {
        let want = (2.0 / ((2.0 + l) * l)).sqrt();
        assert!((b0_l2_norm(l).unwrap() - want).abs() < 1e-10 * want);
    }
}

#[test]
fn leading_order_terms() {
    let eig = &ladder()[0];
    let m = eig.m;
    assert!((eig.a1 - 0.5 * (-2.0 * m as f64).exp()).abs() < 1e-16);
    // eigenvalue equation for b₀ on the rule, and against Simpson at the continuous root
    let d = &eig.disc;
    let s = d.phi_moment(eig.b0.values()) / (2.0 * m as f64);
    for (z, b) in d.nodes().iter().zip(eig.b0.values()) {
        assert!(((1.0 + eig.lambda1 - z) * b + s).abs() < 1e-9);
    }
    let l = eig.lambda1_exact;
    let p = d.profile();
    let integral = simpson_breaks(|t| p.phi_prime(t) / (1.0 + l - t), &[-1.0, 0.0, 0.9, 1.0], 20000);
    assert!((1.0 + integral / (2.0 * m as f64)).abs() < 1e-9);
    assert!((eig.lambda1 - l).abs() < 1e-9);
}

#[test]
fn leading_right_hand_sides_match_simpson() {
    let eig = &ladder()[0];
    let (e, m, l1) = (eig.epsilon(), eig.m as f64, eig.lambda1);
    let ctx = CorrectionContext::new(eig.m, l1, eig.disc.clone()).unwrap();
    let zero = GridFn::zeros(eig.disc.rule().clone());
    let rhs = ctx.rhs_operators(&zero, &zero, 0.0).unwrap();
    let p = eig.disc.profile().clone();
    let b0 = |t: f64| 1.0 / (1.0 + l1 - t);
    let a1 = 0.5 * (-2.0 * m).exp();
    let (c, em) = (1.0 / (2.0 * m), (-2.0 * m).exp());
    for (j, &z) in eig.disc.nodes().iter().enumerate().step_by(5) {
        let br = [-1.0, z, 1.0];
        let q = |g: &dyn Fn(f64) -> f64| simpson_breaks(|t| p.phi_prime(t) * g(t), &br, 4000);
        let s_a = q(&|t| a1 * (-m * e * (z - t).abs()).exp());
        let xd_b = q(&|t| (-m * e * (z + t)).exp_m1() / e * b0(t));
        let d_b = q(&|t| (-m * e * (z - t).abs()).exp_m1() / e * b0(t));
        let xp_a = q(&|t| a1 * (-m * e * (z + t)).exp());
        let big_phi = p.big_phi(z);
        let a0 = c * s_a - em * c * xd_b + e * big_phi * a1 - (z - 1.0 + l1) * a1;
        let bb = -big_phi * b0(z) - c * d_b + em * c * xp_a;
        assert!((rhs.a0.values()[j] - a0).abs() < 1e-9, "A0 at {z}");
        assert!((rhs.b0.values()[j] - bb).abs() < 1e-8 * (1.0 + bb.abs()), "B0 at {z}");
    }
}

#[test]
fn projection_quotient_is_a_projection() {
    let eig = &ladder()[0];
    let ctx = CorrectionContext::new(1, eig.lambda1, eig.disc.clone()).unwrap();
    assert!((ctx.projection_quotient(ctx.b0()) - 1.0).abs() < 1e-14);
    let w = |f: &[f64]| -eig.disc.phi_moment(&f.iter().map(|x| x * x).collect::<Vec<_>>());
    for k in 0..4 {
        let g: Vec<f64> = eig.disc.nodes().iter().map(|z| (k as f64 * z + 0.3).cos()).collect();
        let q = ctx.projection_quotient(&g);
        // Cauchy–Schwarz in the −φ' weight
        assert!(q.abs() <= (w(&g) / w(ctx.b0())).sqrt() * (1.0 + 1e-12));
        let r: Vec<f64> = g.iter().zip(ctx.b0()).map(|(a, b)| a - q * b).collect();
        let orth = eig.disc.phi_moment(&r.iter().zip(ctx.b0()).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert!(orth.abs() < 1e-12 * w(&g).sqrt() * w(ctx.b0()).sqrt());
    }
}

#[test]
fn corrections_converge_and_stay_bounded() {
    let l = ladder();
    for eig in l {
        assert!(eig.iterations <= 200);
        assert!(eig.residual_report.relative <= 1e-6);
        assert!(eig.lambda2_eps.abs() < 1.0, "λ₂ = {}", eig.lambda2_eps);
        assert!((eig.mu - (eig.lambda1 * eig.epsilon() + eig.lambda2_eps * eig.epsilon().powi(2))).abs() < 1e-17);
    }
    let eps: Vec<f64> = l.iter().map(|e| e.epsilon()).collect();
    let cf: Vec<f64> = l.iter().map(|e| e.contraction_factor).collect();
    let s = slope(&eps[..2], &cf[..2]);
    assert!((s - 1.0).abs() < 0.1, "contraction slope {s}, factors {cf:?}");
    let ratio: Vec<f64> = l.iter().map(|e| e.a.l2_norm() / e.b.l2_norm()).collect();
    let s = slope(&eps, &ratio);
    assert!((s - 1.0).abs() < 0.1, "‖a‖/‖b‖ slope {s}");
}

#[test]
fn certificate_and_negative_control() {
    let eig = &ladder()[0];
    let r = certificate(eig, 16).unwrap();
    assert!(r.pass(), "{r:?}");
    assert_eq!(r.near_zero_total, 1);
    assert!(r.transversality > 0.0);
    let e = eig.epsilon();
    let mu = 1.1 * eig.lambda1 * e + eig.lambda2_eps * e * e;
    let blocks = kernel_sweep(&eig.disc, mu, 16).unwrap();
    assert_eq!(blocks.iter().map(|b| b.near_zero).sum::<usize>(), 0);
    let global_max = blocks.iter().fold(0.0f64, |m, b| m.max(b.max_singular));
    assert!(blocks[0].min_singular > NEAR_ZERO_REL * global_max);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigen_integral_decreases(l in 1e-6f64..5.0, f in 1.01f64..3.0, k in 0.0f64..0.2, m in 1usize..4) {
        let p = Profile::from_eps_kappa(0.01, k).unwrap();
        let a = eigen_integral(m, &p, l).unwrap();
        let b = eigen_integral(m, &p, l * f).unwrap();
        prop_assert!(b < a);
        prop_assert!(a > 0.0);
    }
}
