//! The mollified trapezoid vorticity profile and the functions derived from it.
//!
//! On the upper band `y = 1 + ε z`, `z ∈ [-1, 1]`, the profile is
//! `ϖ(y) = ε φ_κ(z)`, where `φ_κ` falls from 1 to 0 with slope
//! `φ'_κ = -ψ'_κ / ∫ψ'_κ` and `ψ'_κ` is the indicator of `[-1+κ, 1-κ]`
//! convolved with the rescaled bump `Θ_κ`. The profile is even in `y`.

use alloc::{sync::Arc, vec::Vec};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_adaptive, integrate_adaptive_breaks};

const TABLE_INTERVALS: usize = 4096;

/// Shape of the mollifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MollifierShape {
    /// `exp(-1/(1-s²))` on `(-1, 1)`.
    #[default]
    StandardBump,
}

/// Normalized mollifier `Θ` together with tabulated primitives.
///
/// The tables hold, at `4097` equispaced points of `[-1, 1]`, the first three
/// iterated primitives of `Θ`; between table points they are completed with
/// an 8-point Gauss–Legendre rule, so evaluation is accurate to rounding.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    pub shape: MollifierShape,
    pub normalization_constant: f64,
    tables: Arc<Primitives>,
}

#[derive(Debug)]
struct Primitives {
    step: f64,
    cdf: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    gl_x: [f64; 8],
    gl_w: [f64; 8],
}

impl PartialEq for MollifierSpec {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.normalization_constant == other.normalization_constant
    }
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self::standard_bump()
    }
}

fn raw_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl MollifierSpec {
    pub fn standard_bump() -> Self {
        let c = integrate_adaptive(&raw_bump, -1.0, 1.0, 1e-16, 1e-15).expect("bump normalization converges");
        let (x, w) = gauss_legendre(8);
        let mut gl_x = [0.0; 8];
        let mut gl_w = [0.0; 8];
        gl_x.copy_from_slice(&x);
        gl_w.copy_from_slice(&w);
        let mut p = Primitives {
            step: 2.0 / TABLE_INTERVALS as f64,
            cdf: Vec::with_capacity(TABLE_INTERVALS + 1),
            g: Vec::with_capacity(TABLE_INTERVALS + 1),
            h: Vec::with_capacity(TABLE_INTERVALS + 1),
            gl_x,
            gl_w,
        };
        p.cdf.push(0.0);
        p.g.push(0.0);
        p.h.push(0.0);
        let theta = |s: f64| raw_bump(s) / c;
        for k in 0..TABLE_INTERVALS {
            let s1 = -1.0 + (k + 1) as f64 * p.step;
            let (c1, g1, h1) = p.local(&theta, k, s1);
            p.cdf.push(c1);
            p.g.push(g1);
            p.h.push(h1);
        }
        Self {
            shape: MollifierShape::StandardBump,
            normalization_constant: c,
            tables: Arc::new(p),
        }
    }

    /// `Θ(s)`, unit mass on `[-1, 1]`.
    pub fn theta(&self, s: f64) -> f64 {
        raw_bump(s) / self.normalization_constant
    }

    /// `Θ'(s)`.
    pub fn theta_prime(&self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s * s;
        -2.0 * s / (d * d) * self.theta(s)
    }

    /// `∫_{-1}^s Θ`.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= -1.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            let k = self.tables.index(s);
            self.tables.local(&|t| self.theta(t), k, s).0
        }
    }

    /// `∫_{-1}^s cdf`; equals `s` for `s ≥ 1`.
    pub fn cdf_primitive(&self, s: f64) -> f64 {
        if s <= -1.0 {
            0.0
        } else if s >= 1.0 {
            s
        } else {
            let k = self.tables.index(s);
            self.tables.local(&|t| self.theta(t), k, s).1
        }
    }

    /// `∫_{-1}^s cdf_primitive`.
    pub fn cdf_second_primitive(&self, s: f64) -> f64 {
        if s <= -1.0 {
            0.0
        } else if s >= 1.0 {
            self.tables.h[TABLE_INTERVALS] + 0.5 * (s * s - 1.0)
        } else {
            let k = self.tables.index(s);
            self.tables.local(&|t| self.theta(t), k, s).2
        }
    }
}

impl Primitives {
    fn index(&self, s: f64) -> usize {
        (((s + 1.0) / self.step) as usize).min(TABLE_INTERVALS - 1)
    }

    /// The three primitives at `s` inside table interval `k`, via the
    /// repeated-integration formula `∫_a^s (s-u)^j/j! Θ(u) du`.
    fn local(&self, theta: &dyn Fn(f64) -> f64, k: usize, s: f64) -> (f64, f64, f64) {
        let a = -1.0 + k as f64 * self.step;
        let d = s - a;
        let half = 0.5 * d;
        let mid = a + half;
        let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
        for (x, w) in self.gl_x.iter().zip(&self.gl_w) {
            let u = mid + half * x;
            let t = w * theta(u);
            let r = s - u;
            i0 += t;
            i1 += t * r;
            i2 += t * r * r;
        }
        i0 *= half;
        i1 *= half;
        i2 *= 0.5 * half;
        let c = self.cdf[k];
        let g = self.g[k];
        (c + i0, g + d * c + i1, self.h[k] + d * g + 0.5 * d * d * c + i2)
    }
}

/// `ψ'_κ(z)`: the indicator of `[-1+κ, 1-κ]` convolved with `Θ_κ`
/// (`κ = 0` gives the indicator of `[-1, 1]`).
pub fn psi_prime(z: f64, kappa: f64, mollifier: &MollifierSpec) -> f64 {
    if kappa == 0.0 {
        return if z.abs() <= 1.0 { 1.0 } else { 0.0 };
    }
    mollifier.cdf((z + 1.0 - kappa) / kappa) - mollifier.cdf((z - 1.0 + kappa) / kappa)
}

/// `ψ'_κ(z)` by adaptive quadrature of the defining convolution. Slow; for
/// cross-checks.
pub fn psi_prime_direct(z: f64, kappa: f64, mollifier: &MollifierSpec) -> f64 {
    if kappa == 0.0 {
        return psi_prime(z, kappa, mollifier);
    }
    let lo = (-1.0 + kappa).max(z - kappa);
    let hi = (1.0 - kappa).min(z + kappa);
    if hi <= lo {
        return 0.0;
    }
    let f = |zb: f64| mollifier.theta((z - zb) / kappa) / kappa;
    integrate_adaptive(&f, lo, hi, 1e-15, 1e-14).unwrap_or(f64::NAN)
}

/// Validated `(ε, κ)` together with the mollifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub mollifier: MollifierSpec,
}

impl ProfileParams {
    pub fn new(epsilon: f64, kappa: f64) -> Result<Self> {
        Self::with_mollifier(epsilon, kappa, MollifierSpec::standard_bump())
    }

    pub fn with_mollifier(epsilon: f64, kappa: f64, mollifier: MollifierSpec) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::KappaOutOfRange(kappa));
        }
        Ok(Self {
            epsilon,
            kappa,
            mollifier,
        })
    }
}

/// `φ_κ` and its relatives on `[-1, 1]`; depends on `κ` only.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiKappa {
    kappa: f64,
    mollifier: MollifierSpec,
    norm: f64,
}

impl PhiKappa {
    pub fn new(kappa: f64, mollifier: MollifierSpec) -> Self {
        let mut p = Self {
            kappa,
            mollifier,
            norm: 2.0,
        };
        if kappa > 0.0 {
            p.norm = p.psi(1.0);
        }
        p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mollifier(&self) -> &MollifierSpec {
        &self.mollifier
    }

    /// `∫_{-1}^1 ψ'_κ`, equal to `2(1-κ)`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    fn args(&self, z: f64) -> (f64, f64) {
        let k = self.kappa;
        ((z + 1.0 - k) / k, (z - 1.0 + k) / k)
    }

    pub fn psi_prime(&self, z: f64) -> f64 {
        psi_prime(z, self.kappa, &self.mollifier)
    }

    /// `∫_{-1}^z ψ'_κ`.
    fn psi(&self, z: f64) -> f64 {
        let z = z.clamp(-1.0, 1.0);
        if self.kappa == 0.0 {
            return z + 1.0;
        }
        let (s1, s2) = self.args(z);
        self.kappa * (self.mollifier.cdf_primitive(s1) - self.mollifier.cdf_primitive(s2))
    }

    /// `∫_{-1}^z ∫_{-1}^t ψ'_κ`.
    fn psi_twice(&self, z: f64) -> f64 {
        let z = z.clamp(-1.0, 1.0);
        if self.kappa == 0.0 {
            return 0.5 * (z + 1.0) * (z + 1.0);
        }
        let (s1, s2) = self.args(z);
        let m = &self.mollifier;
        self.kappa * self.kappa * (m.cdf_second_primitive(s1) - m.cdf_second_primitive(s2))
    }

    pub fn phi(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return 0.5 * (1.0 - z.clamp(-1.0, 1.0));
        }
        1.0 - self.psi(z) / self.norm
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return if z.abs() <= 1.0 { -0.5 } else { 0.0 };
        }
        -self.psi_prime(z) / self.norm
    }

    /// `φ''_κ`; identically zero in the interior for `κ = 0`, where the true
    /// second derivative is a pair of point masses.
    pub fn phi_second(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return 0.0;
        }
        let (s1, s2) = self.args(z);
        let m = &self.mollifier;
        -(m.theta(s1) - m.theta(s2)) / (self.kappa * self.norm)
    }

    /// `Φ_κ(z) = -1 + ∫_{-1}^z φ_κ`.
    pub fn big_phi(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            let t = 1.0 - z.clamp(-1.0, 1.0);
            return -0.25 * t * t;
        }
        let z = z.clamp(-1.0, 1.0);
        z - self.psi_twice(z) / self.norm
    }

    /// `φ_κ(z)` from adaptive quadrature of [`psi_prime_direct`]. Slow.
    pub fn phi_direct(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return self.phi(z);
        }
        let f = |t: f64| psi_prime_direct(t, self.kappa, &self.mollifier);
        let brk = |hi: f64| {
            let mut b = alloc::vec![-1.0];
            for p in [-1.0 + 2.0 * self.kappa, 1.0 - 2.0 * self.kappa] {
                if p > -1.0 && p < hi {
                    b.push(p);
                }
            }
            b.push(hi);
            b.sort_by(|a, b| a.partial_cmp(b).unwrap());
            b
        };
        let part = integrate_adaptive_breaks(&f, &brk(z.clamp(-1.0, 1.0)), 1e-14, 1e-13).unwrap_or(f64::NAN);
        let total = integrate_adaptive_breaks(&f, &brk(1.0), 1e-14, 1e-13).unwrap_or(f64::NAN);
        1.0 - part / total
    }
}

/// `ϖ_{ε,κ}` and its primitive `Ω_{ε,κ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    params: ProfileParams,
    phi: PhiKappa,
}

impl Profile {
    pub fn new(params: ProfileParams) -> Self {
        let phi = PhiKappa::new(params.kappa, params.mollifier.clone());
        Self { params, phi }
    }

    pub fn from_eps_kappa(epsilon: f64, kappa: f64) -> Result<Self> {
        Ok(Self::new(ProfileParams::new(epsilon, kappa)?))
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn phi_kappa(&self) -> &PhiKappa {
        &self.phi
    }

    pub fn phi(&self, z: f64) -> f64 {
        self.phi.phi(z)
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        self.phi.phi_prime(z)
    }

    pub fn phi_second(&self, z: f64) -> f64 {
        self.phi.phi_second(z)
    }

    pub fn big_phi(&self, z: f64) -> f64 {
        self.phi.big_phi(z)
    }

    pub fn psi_prime(&self, z: f64) -> f64 {
        self.phi.psi_prime(z)
    }

    /// Band coordinate `z = (|y| - 1)/ε`, or `None` off the bands.
    fn band_z(&self, y: f64) -> Option<f64> {
        let e = self.params.epsilon;
        let d = y.abs() - 1.0;
        if d.abs() <= e {
            Some((d / e).clamp(-1.0, 1.0))
        } else {
            None
        }
    }

    pub fn varpi(&self, y: f64) -> f64 {
        let e = self.params.epsilon;
        match self.band_z(y) {
            Some(z) => e * self.phi.phi(z),
            None if y.abs() < 1.0 => e,
            None => 0.0,
        }
    }

    pub fn varpi_prime(&self, y: f64) -> f64 {
        match self.band_z(y) {
            Some(z) => y.signum() * self.phi.phi_prime(z),
            None => 0.0,
        }
    }

    pub fn varpi_second(&self, y: f64) -> f64 {
        match self.band_z(y) {
            Some(z) => self.phi.phi_second(z) / self.params.epsilon,
            None => 0.0,
        }
    }

    /// `Ω(y) = ∫_0^y ϖ`, odd; `ε + ε²Φ_κ(z)` at `y = 1 + εz`.
    pub fn omega_primitive(&self, y: f64) -> f64 {
        let e = self.params.epsilon;
        let a = y.abs();
        let v = if a <= 1.0 - e {
            e * a
        } else if a >= 1.0 + e {
            e + e * e * self.phi.big_phi(1.0)
        } else {
            e + e * e * self.phi.big_phi((a - 1.0) / e)
        };
        v * y.signum()
    }

    /// Band value `Ω(1 + εz) = ε + ε²Φ_κ(z)`.
    pub fn omega_band(&self, z: f64) -> f64 {
        let e = self.params.epsilon;
        e + e * e * self.phi.big_phi(z)
    }
}

/// `‖φ'_κ + 1/2‖_{L¹([-1,1])}`.
pub fn slope_defect_l1(phi: &PhiKappa) -> f64 {
    let k = phi.kappa();
    if k == 0.0 {
        return 0.0;
    }
    let f = |z: f64| (phi.phi_prime(z) + 0.5).abs();
    let b = [-1.0, -1.0 + 2.0 * k, 1.0 - 2.0 * k, 1.0];
    integrate_adaptive_breaks(&f, &b, 1e-14, 1e-12).unwrap_or(f64::NAN)
}
