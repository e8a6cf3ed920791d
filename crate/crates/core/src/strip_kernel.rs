//! Green's function of the Laplacian on `T × ℝ`,
//! `K(dx, dy) = (1/4π) log[cosh dy − cos dx]`, and its Fourier reductions.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::{LN_2, PI};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quadrature::integrate_adaptive_breaks;

/// Offset between two points of the strip; `dx` is wrapped into `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub dx: f64,
    pub dy: f64,
}

impl KernelPoint {
    pub fn new(dx: f64, dy: f64) -> Self {
        Self {
            dx: wrap_angle(dx),
            dy,
        }
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x - two_pi * (x / two_pi).round();
    if r <= -PI {
        r += two_pi;
    }
    r
}

/// `cosh dy − cos dx`, computed as `2 sinh²(dy/2) + 2 sin²(dx/2)`.
pub fn cosh_minus_cos(dx: f64, dy: f64) -> f64 {
    let a = (0.5 * dy).sinh();
    let b = (0.5 * dx).sin();
    2.0 * (a * a + b * b)
}

pub fn kernel(p: KernelPoint) -> Result<f64> {
    if p.dx == 0.0 && p.dy == 0.0 {
        return Err(Error::SingularKernel);
    }
    Ok(cosh_minus_cos(p.dx, p.dy).ln() / (4.0 * PI))
}

/// `(1/4π) ∫_T log[cosh dy − cos x] dx = ½(|dy| − log 2)`.
pub fn mean_over_x(dy: f64) -> f64 {
    0.5 * (dy.abs() - LN_2)
}

/// `(1/4π) ∫_T log[cosh dy − cos x] cos(nx) dx = −e^{−n|dy|}/(2n)`.
pub fn fourier_coefficient(n: usize, dy: f64) -> f64 {
    assert!(n >= 1, "Fourier mode must be positive");
    let nf = n as f64;
    -(-nf * dy.abs()).exp() / (2.0 * nf)
}

/// Splits `log[cosh a − cos b]` into `log[(cosh a − cos b)/((a²+b²)/2)]`,
/// smooth near the origin, and `log((a²+b²)/2)`.
pub fn log_kernel_split(b: f64, a: f64) -> (f64, f64) {
    let r2 = 0.5 * (a * a + b * b);
    if r2 == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    ((cosh_minus_cos(b, a) / r2).ln(), r2.ln())
}

/// `∫_{-π}^{π} log((x² + d²)/2) dx` in closed form.
fn log_radius_integral(d: f64) -> f64 {
    let d = d.abs();
    let atan_term = if d == 0.0 { 0.0 } else { 2.0 * d * (PI / d).atan() };
    2.0 * (PI * (PI * PI + d * d).ln() - 2.0 * PI + atan_term) - 2.0 * PI * LN_2
}

/// `∫_{-π}^{π} log[cosh dy − cos x] w(x) dx` for a smooth weight `w`.
///
/// The logarithmic part is handled by subtracting `w(0)` and integrating the
/// remaining `log((x²+dy²)/2) w(0)` in closed form.
pub fn x_integral(dy: f64, w: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let w0 = w(0.0);
    let smooth = |x: f64| {
        let (s, l) = log_kernel_split(x, dy);
        let l = if l.is_finite() { l } else { 0.0 };
        s * w(x) + l * (w(x) - w0)
    };
    let br = [-PI, 0.0, PI];
    let part = integrate_adaptive_breaks(&smooth, &br, tol, tol)?;
    Ok(part + w0 * log_radius_integral(dy))
}

/// `|(1/4π)∫∫ ϖ'(ȳ) log[cosh(y−ȳ) − cos(x−x̄)] dx̄ dȳ − Ω(y)|`, reducing the
/// `x̄` integral through [`mean_over_x`].
pub fn primitive_identity_check(profile: &Profile, y: f64) -> Result<f64> {
    let e = profile.epsilon();
    let k = profile.kappa();
    let mut breaks: Vec<f64> = Vec::new();
    for s in [-1.0, 1.0] {
        breaks.push(s * (1.0 - e));
        breaks.push(s * (1.0 + e));
        breaks.push(s);
        if k > 0.0 {
            breaks.push(s * (1.0 - e + 2.0 * e * k));
            breaks.push(s * (1.0 + e - 2.0 * e * k));
        }
    }
    if y.abs() < 1.0 + e && y.abs() > 1.0 - e {
        breaks.push(y);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let lower: Vec<f64> = breaks.iter().copied().filter(|b| *b < 0.0).collect();
    let upper: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0).collect();
    let f = |yb: f64| profile.varpi_prime(yb) * mean_over_x(y - yb);
    let v = integrate_adaptive_breaks(&f, &lower, 1e-15, 1e-13)? + integrate_adaptive_breaks(&f, &upper, 1e-15, 1e-13)?;
    Ok((v - profile.omega_primitive(y)).abs())
}

/// Reconstructs `K(dx, dy)` from the mean and the first `modes` cosine
/// coefficients.
pub fn kernel_from_series(dx: f64, dy: f64, modes: usize) -> f64 {
    let mut v = mean_over_x(dy) / (2.0 * PI);
    for n in 1..=modes {
        v += fourier_coefficient(n, dy) * (n as f64 * dx).cos() / PI;
    }
    v
}

/// One line of the identity report.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub identity: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(identity: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

/// Runs the kernel identities against quadrature and reports residuals.
pub fn identity_suite() -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let ds = [0.25, 0.5, 1.0, 2.0];

    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        for &d in &ds {
            let nf = n as f64;
            let q = x_integral(d, &|x| (nf * x).cos(), 1e-14)? / (4.0 * PI);
            worst = worst.max((q - fourier_coefficient(n, d)).abs());
        }
    }
    out.push(IdentityCheck::new("fourier_coefficient", worst, 1e-8));

    let mut worst: f64 = 0.0;
    for d in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let q = x_integral(d, &|_| 1.0, 1e-14)? / (4.0 * PI);
        worst = worst.max((q - mean_over_x(d)).abs());
    }
    out.push(IdentityCheck::new("mean_over_x", worst, 1e-10));

    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        for &d in &ds {
            let v = fourier_coefficient(n, d) * (-2.0 * n as f64) * (n as f64 * d).exp();
            worst = worst.max((v - 1.0).abs());
        }
    }
    out.push(IdentityCheck::new("residue_identity", worst, 1e-8));

    let mut worst: f64 = 0.0;
    for &d in &ds {
        for dx in [-3.0, -1.0, 0.0, 0.5, 2.0, PI] {
            let exact = kernel(KernelPoint::new(dx, d))?;
            worst = worst.max((kernel_from_series(dx, d, 64) - exact).abs());
        }
    }
    out.push(IdentityCheck::new("cosine_series_reconstruction", worst, 1e-6));

    let mut worst: f64 = 0.0;
    for (e, k) in [(0.1, 0.1), (0.1, 0.0), (0.05, 0.02)] {
        let p = Profile::from_eps_kappa(e, k)?;
        for y in [0.0, 0.5, 1.0, 1.0 - 0.5 * e, 1.0 + 0.3 * e, -1.02, 3.0] {
            worst = worst.max(primitive_identity_check(&p, y)?);
        }
    }
    out.push(IdentityCheck::new("primitive_identity", worst, 1e-8));

    Ok(out)
}

/// Human-readable one-line summary per check.
pub fn format_report(checks: &[IdentityCheck]) -> Vec<String> {
    let mut v = vec![];
    for c in checks {
        v.push(format!(
            "{} residual={:e} tol={:e} pass={}",
            c.identity, c.max_residual, c.tolerance, c.pass
        ));
    }
    v
}
