//! Mode operators `T_n^±` on the rescaled band coordinate `z ∈ [-1, 1]`.
//!
//! A band point is `y = 1 + εz` (upper) or `y = −(1 + εz)` (lower). For a
//! mode `cos(nx)` with band components `(u, v)`,
//!
//! ```text
//! T⁺[u,v] = Λ⁺u − (ε/2n) S_n u + (ε/2n) X_n v
//! T⁻[u,v] = Λ⁻v + (ε/2n) S_n v − (ε/2n) X_n u
//! ```
//!
//! with `S_n u = ∫φ'(z̄)u(z̄)e^{−nε|z−z̄|}dz̄` and
//! `X_n v = ∫φ'(z̄)v(z̄)e^{−n(2+ε(z+z̄))}dz̄`.

use alloc::{sync::Arc, vec, vec::Vec};

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// Values of a function of `z` at the nodes of a shared rule.
#[derive(Debug, Clone)]
pub struct GridFn {
    rule: Arc<QuadratureRule>,
    values: Vec<f64>,
}

impl PartialEq for GridFn {
    fn eq(&self, other: &Self) -> bool {
        same_rule(&self.rule, &other.rule) && self.values == other.values
    }
}

pub(crate) fn same_rule(a: &Arc<QuadratureRule>, b: &Arc<QuadratureRule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GridFn {
    pub fn new(rule: Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid function has {} values for {} nodes",
                values.len(),
                rule.len()
            )));
        }
        Ok(Self { rule, values })
    }

    pub fn zeros(rule: Arc<QuadratureRule>) -> Self {
        let values = vec![0.0; rule.len()];
        Self { rule, values }
    }

    pub fn from_fn(rule: Arc<QuadratureRule>, f: impl Fn(f64) -> f64) -> Self {
        let values = rule.nodes().iter().map(|z| f(*z)).collect();
        Self { rule, values }
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_rule(&self, other: &GridFn) -> Result<()> {
        if same_rule(&self.rule, &other.rule) {
            Ok(())
        } else {
            Err(Error::RuleMismatch)
        }
    }

    /// Same rule, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            rule: self.rule.clone(),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn zip_map(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_rule(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect()))
    }

    pub fn integral(&self) -> f64 {
        self.rule.integrate(&self.values)
    }

    /// `(∫ f²)^{1/2}` over `[-1, 1]`.
    pub fn l2_norm(&self) -> f64 {
        self.rule.weights().iter().zip(&self.values).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-polynomial interpolant at an arbitrary `z`.
    pub fn eval(&self, z: f64) -> f64 {
        self.rule.interpolate(&self.values, z)
    }
}

/// Band rule together with the profile samples every operator needs.
#[derive(Debug, Clone)]
pub struct BandDiscretization {
    profile: Profile,
    rule: Arc<QuadratureRule>,
    phi_prime: Vec<f64>,
    big_phi: Vec<f64>,
}

/// Initial panel breaks: the ramp edges `±(1 − 2κ)` when `κ > 0`.
pub fn band_breaks(kappa: f64) -> Vec<f64> {
    if kappa > 0.0 && kappa < 0.5 {
        vec![-1.0, -1.0 + 2.0 * kappa, 0.0, 1.0 - 2.0 * kappa, 1.0]
    } else {
        vec![-1.0, 0.0, 1.0]
    }
}

/// Adaptive composite rule resolving `φ'`, `φ'/(1+λ₁−z)` and
/// `φ'/(1+λ₁−z)²` to relative accuracy `tol`.
pub fn band_rule(profile: &Profile, lambda1: f64, order: usize, tol: f64) -> QuadratureRule {
    let f0 = |z: f64| profile.phi_prime(z);
    let f1 = |z: f64| profile.phi_prime(z) / ((1.0 - z) + lambda1);
    let f2 = |z: f64| {
        let d = (1.0 - z) + lambda1;
        profile.phi_prime(z) / (d * d)
    };
    QuadratureRule::adaptive(order, tol, &band_breaks(profile.kappa()), &[&f0, &f1, &f2])
}

impl BandDiscretization {
    pub fn new(profile: Profile, rule: Arc<QuadratureRule>) -> Self {
        let phi_prime = rule.nodes().iter().map(|z| profile.phi_prime(*z)).collect();
        let big_phi = rule.nodes().iter().map(|z| profile.big_phi(*z)).collect();
        Self {
            profile,
            rule,
            phi_prime,
            big_phi,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn epsilon(&self) -> f64 {
        self.profile.epsilon()
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    /// `φ'_κ` at the nodes.
    pub fn phi_prime(&self) -> &[f64] {
        &self.phi_prime
    }

    /// `Φ_κ` at the nodes.
    pub fn big_phi(&self) -> &[f64] {
        &self.big_phi
    }

    pub fn grid_fn(&self, values: Vec<f64>) -> Result<GridFn> {
        GridFn::new(self.rule.clone(), values)
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn::from_fn(self.rule.clone(), f)
    }

    /// `∫ φ' f`.
    pub fn phi_moment(&self, f: &[f64]) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(&self.phi_prime)
            .zip(f)
            .map(|((w, p), v)| w * p * v)
            .sum()
    }

    /// `(f, g)` with weight `−φ'`.
    pub fn weighted_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        -self
            .rule
            .weights()
            .iter()
            .zip(&self.phi_prime)
            .zip(f.iter().zip(g))
            .map(|((w, p), (a, b))| w * p * a * b)
            .sum::<f64>()
    }

    /// Matrix of `f ↦ ∫φ'(z̄)k(z − z̄)f(z̄)dz̄` for a kernel with a kink at
    /// `z = z̄`, divided into weights `E_ij` (before the `φ'_j` factor).
    ///
    /// Rows integrate the in-panel part against the panel's Lagrange basis on
    /// the two sub-intervals split at `z_i`. The result is symmetrized in the
    /// `w_i E_ij` sense so the discrete operator stays self-adjoint.
    fn kink_weights(&self, k: &dyn Fn(f64) -> f64) -> DMatrix<f64> {
        let rule = &*self.rule;
        let n = rule.len();
        let z = rule.nodes();
        let w = rule.weights();
        let q = rule.order();
        let (sx, sw) = gauss_legendre(q);
        let mut e = DMatrix::<f64>::zeros(n, n);
        let mut row = vec![0.0; q];
        for i in 0..n {
            let pi = rule.panel_of_node(i);
            let panel = rule.panels()[pi];
            for j in 0..n {
                if rule.panel_of_node(j) != pi {
                    e[(i, j)] = w[j] * k(z[i] - z[j]);
                }
            }
            for (a, b) in [(panel.a, z[i]), (z[i], panel.b)] {
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (x, ws) in sx.iter().zip(&sw) {
                    let s = mid + half * x;
                    let kv = half * ws * k(z[i] - s);
                    rule.lagrange_row(pi, s, &mut row);
                    for (l, r) in row.iter().enumerate() {
                        e[(i, panel.start + l)] += kv * r;
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (w[i] * e[(i, j)] + w[j] * e[(j, i)]);
                e[(i, j)] = s / w[i];
                e[(j, i)] = s / w[j];
            }
        }
        e
    }
}

/// `(Λ⁺, Λ⁻)` at the nodes for `λ = 1 + μ`:
/// `Λ⁺ = 2 + μ + ε(z − 1) − ε²Φ`, `Λ⁻ = μ + ε(1 − z) + ε²Φ`.
///
/// Taking `μ` rather than `λ` keeps full precision when `λ − 1` is tiny.
pub fn lambda_multipliers(mu: f64, disc: &BandDiscretization) -> (GridFn, GridFn) {
    let e = disc.epsilon();
    let z = disc.nodes();
    let phi = disc.big_phi();
    let plus = z.iter().zip(phi).map(|(z, p)| 2.0 + mu + e * (z - 1.0) - e * e * p).collect();
    let minus = z.iter().zip(phi).map(|(z, p)| mu + e * (1.0 - z) + e * e * p).collect();
    (
        GridFn {
            rule: disc.rule.clone(),
            values: plus,
        },
        GridFn {
            rule: disc.rule.clone(),
            values: minus,
        },
    )
}

/// Discretized `T_n^±` at a fixed speed.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    n: usize,
    mu: f64,
    disc: Arc<BandDiscretization>,
    lambda_plus: GridFn,
    lambda_minus: GridFn,
    /// `(S_n u)_i = Σ_j self_op[i,j] u_j`.
    self_op: DMatrix<f64>,
    /// `(D_n u)_i`, kernel `(e^{−nε|z−z̄|} − 1)/ε`; `S_n = S_0 + ε D_n`.
    div_op: DMatrix<f64>,
    /// `(X_n v)_i`, kernel `e^{−n(2+ε(z+z̄))}`.
    cross_op: DMatrix<f64>,
}

/// Assembles the mode-`n` operator at `λ = 1 + mu`.
pub fn assemble_mode(n: usize, mu: f64, disc: &Arc<BandDiscretization>) -> Result<ModeOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode index must be at least 1".into()));
    }
    let e = disc.epsilon();
    let nf = n as f64;
    let c = nf * e;
    let size = disc.len();
    let z = disc.nodes();
    let w = disc.weights();
    let pp = disc.phi_prime();
    let ediv = disc.kink_weights(&|d: f64| (-c * d.abs()).exp_m1() / e);
    let mut self_op = DMatrix::<f64>::zeros(size, size);
    let mut div_op = DMatrix::<f64>::zeros(size, size);
    let mut cross_op = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            let ed = ediv[(i, j)];
            div_op[(i, j)] = ed * pp[j];
            self_op[(i, j)] = (w[j] + e * ed) * pp[j];
            cross_op[(i, j)] = w[j] * pp[j] * (-nf * (2.0 + e * (z[i] + z[j]))).exp();
        }
    }
    let (lambda_plus, lambda_minus) = lambda_multipliers(mu, disc);
    Ok(ModeOperator {
        n,
        mu,
        disc: disc.clone(),
        lambda_plus,
        lambda_minus,
        self_op,
        div_op,
        cross_op,
    })
}

fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    for (j, xj) in x.iter().enumerate() {
        if *xj == 0.0 {
            continue;
        }
        let col = m.column(j);
        for (o, c) in out.iter_mut().zip(col.iter()) {
            *o += c * xj;
        }
    }
    out
}

impl ModeOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `λ − 1`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        1.0 + self.mu
    }

    pub fn epsilon(&self) -> f64 {
        self.disc.epsilon()
    }

    pub fn discretization(&self) -> &Arc<BandDiscretization> {
        &self.disc
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        self.disc.rule()
    }

    pub fn lambda_plus(&self) -> &GridFn {
        &self.lambda_plus
    }

    pub fn lambda_minus(&self) -> &GridFn {
        &self.lambda_minus
    }

    /// Matrix of `S_n` (quadrature weights and `φ'` folded in).
    pub fn self_matrix(&self) -> &DMatrix<f64> {
        &self.self_op
    }

    /// Matrix of the divided difference `D_n`.
    pub fn div_matrix(&self) -> &DMatrix<f64> {
        &self.div_op
    }

    /// Matrix of `X_n`.
    pub fn cross_matrix(&self) -> &DMatrix<f64> {
        &self.cross_op
    }

    /// Raw self kernel `e^{−nε|z_i − z_j|}`.
    pub fn self_kernel(&self, i: usize, j: usize) -> f64 {
        let z = self.disc.nodes();
        (-(self.n as f64) * self.epsilon() * (z[i] - z[j]).abs()).exp()
    }

    /// Raw cross kernel `e^{−n(2 + ε(z_i + z_j))}`.
    pub fn cross_kernel(&self, i: usize, j: usize) -> f64 {
        let z = self.disc.nodes();
        (-(self.n as f64) * (2.0 + self.epsilon() * (z[i] + z[j]))).exp()
    }

    pub fn apply_s(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.self_op, u)
    }

    pub fn apply_d(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.div_op, u)
    }

    pub fn apply_x(&self, v: &[f64]) -> Vec<f64> {
        matvec(&self.cross_op, v)
    }

    fn check(&self, f: &GridFn) -> Result<()> {
        if same_rule(f.rule(), self.disc.rule()) {
            Ok(())
        } else {
            Err(Error::RuleMismatch)
        }
    }

    /// `(T⁺[u,v], T⁻[u,v])` on raw nodal slices.
    pub fn apply_raw(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.epsilon() / (2.0 * self.n as f64);
        let su = self.apply_s(u);
        let sv = self.apply_s(v);
        let xu = self.apply_x(u);
        let xv = self.apply_x(v);
        let lp = self.lambda_plus.values();
        let lm = self.lambda_minus.values();
        let tp = (0..u.len()).map(|i| lp[i] * u[i] - c * su[i] + c * xv[i]).collect();
        let tm = (0..u.len()).map(|i| lm[i] * v[i] + c * sv[i] - c * xu[i]).collect();
        (tp, tm)
    }

    pub fn apply_t(&self, u: &GridFn, v: &GridFn) -> Result<(GridFn, GridFn)> {
        self.check(u)?;
        self.check(v)?;
        let (tp, tm) = self.apply_raw(u.values(), v.values());
        Ok((u.with_values(tp), v.with_values(tm)))
    }

    /// Dense `2N × 2N` matrix of `(u, v) ↦ (T⁺, T⁻)`.
    pub fn as_matrix(&self) -> DMatrix<f64> {
        let n = self.disc.len();
        let c = self.epsilon() / (2.0 * self.n as f64);
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        let lp = self.lambda_plus.values();
        let lm = self.lambda_minus.values();
        for i in 0..n {
            for j in 0..n {
                let s = self.self_op[(i, j)];
                let x = self.cross_op[(i, j)];
                m[(i, j)] = -c * s;
                m[(i, n + j)] = c * x;
                m[(n + i, j)] = -c * x;
                m[(n + i, n + j)] = c * s;
            }
            m[(i, i)] += lp[i];
            m[(n + i, n + i)] += lm[i];
        }
        m
    }

    /// `diag(W^{1/2}) · diag(1, 1/ε) · T · diag(W^{−1/2})`: the operator in
    /// the `L²` geometry with the lower-band equation divided by `ε`, so both
    /// diagonal blocks are `O(1)`.
    pub fn balanced_matrix(&self) -> DMatrix<f64> {
        let n = self.disc.len();
        let e = self.epsilon();
        let w = self.disc.weights();
        let mut m = self.as_matrix();
        for i in 0..2 * n {
            let wi = w[i % n].sqrt();
            let row_scale = if i >= n { wi / e } else { wi };
            for j in 0..2 * n {
                m[(i, j)] *= row_scale / w[j % n].sqrt();
            }
        }
        m
    }

    /// Singular values of [`balanced_matrix`](Self::balanced_matrix),
    /// descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.balanced_matrix().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }
}

/// Singular values of the mode blocks `1..=n_modes` at `λ = 1 + mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub n: usize,
    pub singular_values: Vec<f64>,
}

impl ModeSpectrum {
    pub fn min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Count of singular values below `rel · max`.
    pub fn near_zero(&self, rel: f64) -> usize {
        let t = rel * self.max();
        self.singular_values.iter().filter(|s| **s < t).count()
    }
}

pub fn svd_spectrum(disc: &Arc<BandDiscretization>, mu: f64, n_modes: usize) -> Result<Vec<ModeSpectrum>> {
    (1..=n_modes)
        .map(|n| {
            let op = assemble_mode(n, mu, disc)?;
            Ok(ModeSpectrum {
                n,
                singular_values: op.singular_values(),
            })
        })
        .collect()
}

/// Applies the linearization at `f = 0` to a band field:
/// `𝓛h = Σ_n [−n sin(nx) T_n(ĥ_n^c) + n cos(nx) T_n(ĥ_n^s)]`, where
/// `ĥ_n^c`, `ĥ_n^s` are the cosine and sine coefficients of `h`.
///
/// Only modes `1..=n_modes` are kept; the discarded share of `h`'s energy
/// is returned alongside the result.
pub fn physical_apply(
    mu: f64,
    h: &crate::wave::BandField,
    n_modes: usize,
) -> Result<(crate::wave::BandField, f64)> {
    let grid = h.grid().clone();
    let coeffs = h.fourier();
    let nx = grid.nx();
    let nz = grid.nz();
    let mut out = crate::wave::BandField::zeros(grid.clone());
    let mut kept = 0.0;
    let mut total = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let e: f64 = c.energy();
        total += e;
        if k == 0 || k > n_modes {
            continue;
        }
        kept += e;
        let op = assemble_mode(k, mu, grid.discretization())?;
        let kf = k as f64;
        let (cp, cm) = op.apply_raw(&c.cos_upper, &c.cos_lower);
        let (sp, sm) = op.apply_raw(&c.sin_upper, &c.sin_lower);
        for i in 0..nx {
            let x = grid.x(i);
            let (s, co) = (kf * x).sin_cos();
            for j in 0..nz {
                out.upper_mut()[i * nz + j] += -kf * s * cp[j] + kf * co * sp[j];
                out.lower_mut()[i * nz + j] += -kf * s * cm[j] + kf * co * sm[j];
            }
        }
    }
    let tail = if total > 0.0 { (total - kept).max(0.0) / total } else { 0.0 };
    Ok((out, tail))
}
