mod common;

use common::{bump, simpson};
use couette_core::profile::{psi_prime, slope_defect_l1, MollifierSpec, PhiKappa, Profile, ProfileParams};
use couette_core::Error;
use proptest::prelude::*;

fn bump_mass() -> f64 {
    simpson(bump, -1.0, 1.0, 4000)
}

/// `∫_{-1}^s Θ` by Simpson.
fn cdf_oracle(s: f64, mass: f64) -> f64 {
    let s = s.clamp(-1.0, 1.0);
    simpson(bump, -1.0, s, 2000) / mass
}

fn psi_prime_oracle(z: f64, k: f64, mass: f64) -> f64 {
    cdf_oracle((z + 1.0 - k) / k, mass) - cdf_oracle((z - 1.0 + k) / k, mass)
}

#[test]
fn mollifier_mass() {
    let m = MollifierSpec::standard_bump();
    assert!((m.normalization_constant - bump_mass()).abs() < 1e-12);
}

#[test]
fn psi_prime_matches_convolution() {
    let mass = bump_mass();
    let m = MollifierSpec::standard_bump();
    for (z, k) in [(0.95, 0.1), (0.85, 0.1), (0.0, 0.1), (-0.97, 0.05), (0.99, 0.02)] {
        let got = psi_prime(z, k, &m);
        let want = psi_prime_oracle(z, k, mass);
        assert!((got - want).abs() < 1e-10, "z={z} k={k}: {got} vs {want}");
    }
    // half the bump mass lies beyond s = 0
    assert!((psi_prime(0.9, 0.1, &m) - 0.5).abs() < 1e-14);
}

#[test]
fn psi_prime_support() {
    let m = MollifierSpec::standard_bump();
    assert_eq!(psi_prime(1.0, 0.1, &m), 0.0);
    assert_eq!(psi_prime(-1.0, 0.1, &m), 0.0);
    assert_eq!(psi_prime(0.8, 0.1, &m), 1.0);
    assert_eq!(psi_prime(0.3, 0.0, &m), 1.0);
    assert_eq!(psi_prime(1.2, 0.0, &m), 0.0);
}

#[test]
fn phi_and_big_phi_match_cumulative_oracles() {
    let mass = bump_mass();
    let k = 0.1;
    let p = PhiKappa::new(k, MollifierSpec::standard_bump());
    let psi = |z: f64| psi_prime_oracle(z, k, mass);
    let kinks = |z: f64| {
        let mut b = vec![-1.0];
        b.extend([-1.0 + 2.0 * k, 1.0 - 2.0 * k].into_iter().filter(|&t| t < z));
        b.push(z);
        b
    };
    let total = common::simpson_breaks(psi, &kinks(1.0), 400);
    assert!((total - 2.0 * (1.0 - k)).abs() < 1e-8);
    let phi = |z: f64| 1.0 - common::simpson_breaks(psi, &kinks(z), 200) / total;
    for z in [-0.9, -0.5, 0.0, 0.7, 0.93] {
        assert!((p.phi(z) - phi(z)).abs() < 1e-8, "phi at {z}");
        assert!((p.phi(z) - p.phi_direct(z)).abs() < 1e-11, "phi_direct at {z}");
    }
    for z in [-0.6, 0.2, 1.0] {
        let want = -1.0 + simpson(phi, -1.0, z, 200);
        assert!((p.big_phi(z) - want).abs() < 1e-7, "big_phi at {z}");
    }
}

#[test]
fn derivatives_agree_with_finite_differences() {
    let p = Profile::from_eps_kappa(0.05, 0.2).unwrap();
    let h = 1e-5;
    for z in [-0.95, -0.7, -0.1, 0.65, 0.9] {
        let d1 = (p.phi(z + h) - p.phi(z - h)) / (2.0 * h);
        let d2 = (p.phi_prime(z + h) - p.phi_prime(z - h)) / (2.0 * h);
        let d0 = (p.big_phi(z + h) - p.big_phi(z - h)) / (2.0 * h);
        assert!((d1 - p.phi_prime(z)).abs() < 1e-8);
        assert!((d2 - p.phi_second(z)).abs() < 1e-6 * (1.0 + p.phi_second(z).abs()));
        assert!((d0 - p.phi(z)).abs() < 1e-9);
    }
}

#[test]
fn kappa_zero_ramp() {
    let p = Profile::from_eps_kappa(0.1, 0.0).unwrap();
    assert_eq!(p.phi(0.5), 0.25);
    assert_eq!(p.big_phi(1.0), 0.0);
    assert_eq!(p.big_phi(-1.0), -1.0);
    assert_eq!(p.varpi(0.5), 0.1);
    assert_eq!(p.varpi(2.0), 0.0);
    assert!((p.varpi(1.05) - 0.025).abs() < 1e-15);
    assert_eq!(p.varpi_prime(1.05), -0.5);
    assert_eq!(p.varpi_prime(-1.05), 0.5);
}

#[test]
fn omega_primitive_matches_simpson() {
    for (e, k) in [(0.1, 0.1), (0.2, 0.0), (0.05, 0.3)] {
        let p = Profile::from_eps_kappa(e, k).unwrap();
        for y in [0.3f64, 0.95, 1.0, 1.04, 1.5, -1.08] {
            let a = y.abs();
            let mut br = vec![0.0];
            for b in [1.0 - e, 1.0, 1.0 + e] {
                if b < a {
                    br.push(b);
                }
            }
            br.push(a);
            let want = y.signum() * common::simpson_breaks(|t| p.varpi(t), &br, 400);
            assert!((p.omega_primitive(y) - want).abs() < 1e-10, "e={e} k={k} y={y}");
        }
        assert!((p.omega_band(0.3) - p.omega_primitive(1.0 + 0.3 * e)).abs() < 1e-15);
    }
}

#[test]
fn slope_defect_scales_with_kappa() {
    let m = MollifierSpec::standard_bump();
    let r: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&k| slope_defect_l1(&PhiKappa::new(k, m.clone())) / k)
        .collect();
    for w in r.windows(2) {
        assert!((w[0] / w[1] - 1.0).abs() < 0.1, "{r:?}");
    }
    assert_eq!(slope_defect_l1(&PhiKappa::new(0.0, m)), 0.0);
}

#[test]
fn invalid_parameters() {
    assert_eq!(ProfileParams::new(0.0, 0.1).unwrap_err(), Error::EpsilonOutOfRange(0.0));
    assert_eq!(ProfileParams::new(1.0, 0.1).unwrap_err(), Error::EpsilonOutOfRange(1.0));
    assert!(matches!(ProfileParams::new(0.1, -0.1), Err(Error::KappaOutOfRange(_))));
    assert!(ProfileParams::new(f64::NAN, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_monotone_and_centred(z in -1.0f64..1.0, k in 0.0f64..0.45) {
        let p = PhiKappa::new(k, MollifierSpec::standard_bump());
        prop_assert!(p.phi_prime(z) <= 0.0);
        prop_assert!((p.phi(z) + p.phi(-z) - 1.0).abs() < 1e-12);
        prop_assert!((p.phi_prime(z) - p.phi_prime(-z)).abs() < 1e-12);
        prop_assert!((p.phi_second(z) + p.phi_second(-z)).abs() < 1e-8 * (1.0 + p.phi_second(z).abs()));
        prop_assert!((0.0..=1.0).contains(&p.phi(z)));
    }

    #[test]
    fn psi_prime_is_a_smoothed_indicator(z in -1.5f64..1.5, k in 0.01f64..0.45) {
        let m = MollifierSpec::standard_bump();
        let v = psi_prime(z, k, &m);
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        if z.abs() >= 1.0 {
            prop_assert_eq!(v, 0.0);
        }
        if z.abs() <= 1.0 - 2.0 * k {
            prop_assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn varpi_is_even_and_omega_odd(y in -2.0f64..2.0, e in 0.01f64..0.5, k in 0.0f64..0.4) {
        let p = Profile::from_eps_kappa(e, k).unwrap();
        prop_assert!((p.varpi(y) - p.varpi(-y)).abs() < 1e-15);
        prop_assert!((p.varpi_prime(y) + p.varpi_prime(-y)).abs() < 1e-15);
        prop_assert!((p.omega_primitive(y) + p.omega_primitive(-y)).abs() < 1e-15);
        prop_assert!(p.varpi(y) >= 0.0 && p.varpi(y) <= e);
    }
}
