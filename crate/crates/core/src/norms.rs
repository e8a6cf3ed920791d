//! Distances of the wave vorticity to the Couette vorticity.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linop::band_breaks;
use crate::profile::{Profile, ProfileParams};
use crate::quadrature::integrate_adaptive_breaks;
use crate::wave::{Band, BandField, WaveField};

/// `∫_ℝ |ϖ'|² dy = 2ε ∫ φ'² dz` over both bands.
pub fn profile_prime_sq(profile: &Profile) -> Result<f64> {
    let e = profile.epsilon();
    let br = band_breaks(profile.kappa());
    let i = integrate_adaptive_breaks(&|z| profile.phi_prime(z).powi(2), &br, 1e-15, 1e-13)?;
    Ok(2.0 * e * i)
}

/// `∫_ℝ |ϖ''|² dy = (2/ε) ∫ φ''² dz` over both bands; distributional at `κ = 0`.
pub fn profile_second_sq(profile: &Profile) -> Result<f64> {
    if profile.kappa() == 0.0 {
        return Err(Error::Distributional("the second derivative of the profile"));
    }
    let e = profile.epsilon();
    let br = band_breaks(profile.kappa());
    let i = integrate_adaptive_breaks(&|z| profile.phi_second(z).powi(2), &br, 1e-15, 1e-12)?;
    Ok(2.0 * i / e)
}

/// `(∫|ϖ'|², ∫|ϖ''|²)`.
pub fn profile_norm_squares(params: ProfileParams) -> Result<(f64, f64)> {
    let p = Profile::new(params);
    Ok((profile_prime_sq(&p)?, profile_second_sq(&p)?))
}

/// `∫_ℝ ϖ² dy`: the flat part `2ε²(1 − ε)` plus both bands.
pub fn profile_sq(profile: &Profile) -> Result<f64> {
    let e = profile.epsilon();
    let br = band_breaks(profile.kappa());
    let i = integrate_adaptive_breaks(&|z| profile.phi(z).powi(2), &br, 1e-15, 1e-13)?;
    Ok(2.0 * e * e * (1.0 - e) + 2.0 * e * e * e * i)
}

/// Derivatives of `f` needed by the chain rule, per band.
struct Jets {
    fx: BandField,
    fy: BandField,
    fxx: BandField,
    fxy: BandField,
    fyy: BandField,
}

impl Jets {
    fn new(f: &BandField) -> Self {
        let fx = f.dx();
        let fy = f.dy();
        Self {
            fxx: fx.dx(),
            fxy: fx.dy(),
            fyy: fy.dy(),
            fx,
            fy,
        }
    }
}

/// Sums `g(x-index, band, z-index, jets)·(2π/nx)·ε·w` over both bands.
fn band_integral(wave: &WaveField, g: impl Fn(Band, usize, usize, &Jets) -> f64) -> f64 {
    let grid = wave.grid();
    let jets = Jets::new(&wave.f);
    let w = grid.discretization().weights();
    let scale = 2.0 * PI / grid.nx() as f64 * grid.epsilon();
    let mut s = 0.0;
    for band in [Band::Upper, Band::Lower] {
        for i in 0..grid.nx() {
            for (j, wj) in w.iter().enumerate() {
                s += wj * g(band, i, j, &jets);
            }
        }
    }
    s * scale
}

/// `ϖ`, `ϖ'`, `ϖ''` at band node `j`.
fn profile_jet(wave: &WaveField, band: Band, j: usize) -> (f64, f64, f64) {
    let p = wave.eig.disc.profile();
    let z = wave.grid().discretization().nodes()[j];
    let e = p.epsilon();
    (e * p.phi(z), band.orientation() * p.phi_prime(z), p.phi_second(z) / e)
}

/// `‖ω‖_{L²}` (order 0), `‖ω‖_{Ḣ¹}` (order 1) or `‖ω‖_{Ḣ²}` (order 2) over
/// `T × ℝ`, by the change of variables `x₂ = y + f(x, y)` with Jacobian
/// `1 + f_y`.
pub fn omega_sobolev(wave: &WaveField, order: u8) -> Result<f64> {
    let mono = wave.min_jacobian();
    if mono <= 0.0 {
        return Err(Error::NonMonotone(mono));
    }
    let p = wave.eig.disc.profile();
    let sq = match order {
        0 => {
            // the strip between the curves has area 2π·2(1 − ε): f has zero x-mean
            let e = p.epsilon();
            let flat = 2.0 * PI * e * e * 2.0 * (1.0 - e);
            flat + band_integral(wave, |band, i, j, jt| {
                let (w, _, _) = profile_jet(wave, band, j);
                w * w * (1.0 + jt.fy.get(band, i, j))
            })
        }
        1 => band_integral(wave, |band, i, j, jt| {
            let (_, w1, _) = profile_jet(wave, band, j);
            let fx = jt.fx.get(band, i, j);
            w1 * w1 * (1.0 + fx * fx) / (1.0 + jt.fy.get(band, i, j))
        }),
        2 => {
            if p.kappa() == 0.0 {
                return Err(Error::Distributional("the second derivative of the vorticity"));
            }
            band_integral(wave, |band, i, j, jt| {
                let (_, w1, w2) = profile_jet(wave, band, j);
                let fx = jt.fx.get(band, i, j);
                let pp = 1.0 + jt.fy.get(band, i, j);
                let fxx = jt.fxx.get(band, i, j);
                let fxy = jt.fxy.get(band, i, j);
                let fyy = jt.fyy.get(band, i, j);
                let ey = 1.0 / pp;
                let ex = -fx / pp;
                let eyy = -fyy / pp.powi(3);
                let exy = (-fxy * pp + fx * fyy) / pp.powi(3);
                let gx = (-fxx * pp + fx * fxy) / (pp * pp);
                let gy = (-fxy * pp + fx * fyy) / (pp * pp);
                let exx = gx + gy * ex;
                let wxx = w2 * ex * ex + w1 * exx;
                let wxy = w2 * ex * ey + w1 * exy;
                let wyy = w2 * ey * ey + w1 * eyy;
                (wxx * wxx + 2.0 * wxy * wxy + wyy * wyy) * pp
            })
        }
        _ => return Err(Error::InvalidArgument("order must be 0, 1 or 2".into())),
    };
    Ok(sq.max(0.0).sqrt())
}

/// `‖ω‖_{Ḣ¹}^{(1+γ)/2} ‖ω‖_{Ḣ²}^{(1−γ)/2}`, the interpolation bound for
/// `‖ω‖_{Ḣ^{(3−γ)/2}}`.
pub fn interpolated_distance(wave: &WaveField, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument("gamma must lie in (0,1)".into()));
    }
    let h1 = omega_sobolev(wave, 1)?;
    let h2 = omega_sobolev(wave, 2)?;
    Ok(interpolate(h1, h2, gamma))
}

pub fn interpolate(h1: f64, h2: f64, gamma: f64) -> f64 {
    h1.powf(0.5 * (1.0 + gamma)) * h2.powf(0.5 * (1.0 - gamma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub params: ProfileParams,
    pub sigma: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub l2: f64,
    pub h1dot: f64,
    /// `None` at `κ = 0`.
    pub h2dot: Option<f64>,
    pub interpolated_bound: Option<f64>,
    pub profile_prime_sq: f64,
    pub profile_second_sq: Option<f64>,
    /// `‖ω‖_{Ḣ²} / (2π)^{1/2}(‖ϖ'‖ + ‖ϖ''‖)`.
    pub h2dot_profile_ratio: Option<f64>,
}

impl NormReport {
    /// `l2 + interpolated_bound`.
    pub fn distance(&self) -> Option<f64> {
        self.interpolated_bound.map(|b| b + self.l2)
    }
}

pub fn norm_report(wave: &WaveField, gamma: f64) -> Result<NormReport> {
    let p = wave.eig.disc.profile();
    let l2 = omega_sobolev(wave, 0)?;
    let h1dot = omega_sobolev(wave, 1)?;
    let pp = profile_prime_sq(p)?;
    let (h2dot, ps) = if p.kappa() > 0.0 {
        (Some(omega_sobolev(wave, 2)?), Some(profile_second_sq(p)?))
    } else {
        (None, None)
    };
    let interpolated_bound = match h2dot {
        Some(h2) if gamma > 0.0 && gamma < 1.0 => Some(interpolate(h1dot, h2, gamma)),
        Some(_) => return Err(Error::InvalidArgument("gamma must lie in (0,1)".into())),
        None => None,
    };
    let ratio = h2dot
        .zip(ps)
        .map(|(h2, s)| h2 / ((2.0 * PI).sqrt() * (pp.sqrt() + s.sqrt())));
    Ok(NormReport {
        params: p.params().clone(),
        sigma: wave.sigma,
        gamma,
        lambda: 1.0 + wave.eig.mu,
        l2,
        h1dot,
        h2dot,
        interpolated_bound,
        profile_prime_sq: pp,
        profile_second_sq: ps,
        h2dot_profile_ratio: ratio,
    })
}
