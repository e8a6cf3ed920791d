//! Band fields on `T × I_ε`, the level-curve functional `F[λ, f]`, its
//! Gâteaux derivative, the induced velocity and the deformed vorticity.
//!
//! A band field stores values on `nx` equispaced points `x_i = 2πi/nx`
//! times the band rule in `z`, for the upper band `y = 1 + εz` and the
//! lower band `y = −(1 + εz)`.

use alloc::{sync::Arc, vec, vec::Vec};
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::bifurcate::EigenSolution;
use crate::error::{Error, Result};
use crate::linop::{assemble_mode, lambda_multipliers, BandDiscretization, ModeOperator};
use crate::quadrature::integrate_adaptive_breaks;
use crate::strip_kernel::{fourier_coefficient, mean_over_x};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Upper,
    Lower,
}

impl Band {
    /// `dy/dz` on this band.
    pub fn orientation(self) -> f64 {
        match self {
            Band::Upper => 1.0,
            Band::Lower => -1.0,
        }
    }
}

/// Tensor grid over both bands.
#[derive(Debug, Clone)]
pub struct BandGrid {
    disc: Arc<BandDiscretization>,
    nx: usize,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl BandGrid {
    pub fn new(disc: Arc<BandDiscretization>, nx: usize) -> Result<Arc<Self>> {
        if nx < 4 {
            return Err(Error::InvalidArgument("nx must be at least 4".into()));
        }
        let mut cos_table = vec![0.0; nx * nx];
        let mut sin_table = vec![0.0; nx * nx];
        for k in 0..nx {
            for i in 0..nx {
                // exact periodic index keeps the tables symmetric
                let a = 2.0 * PI * ((k * i) % nx) as f64 / nx as f64;
                cos_table[k * nx + i] = a.cos();
                sin_table[k * nx + i] = a.sin();
            }
        }
        Ok(Arc::new(Self {
            disc,
            nx,
            cos_table,
            sin_table,
        }))
    }

    pub fn discretization(&self) -> &Arc<BandDiscretization> {
        &self.disc
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.disc.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.disc.epsilon()
    }

    pub fn x(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.nx as f64
    }

    pub fn y(&self, band: Band, j: usize) -> f64 {
        band.orientation() * (1.0 + self.epsilon() * self.disc.nodes()[j])
    }

    /// Highest resolved mode `(nx − 1)/2`.
    pub fn max_mode(&self) -> usize {
        (self.nx - 1) / 2
    }

    fn cos_k(&self, k: usize, i: usize) -> f64 {
        self.cos_table[(k % self.nx) * self.nx + i]
    }

    fn sin_k(&self, k: usize, i: usize) -> f64 {
        self.sin_table[(k % self.nx) * self.nx + i]
    }
}

/// Fourier coefficients of one mode on both bands: `f = Σ c cos(kx) + s sin(kx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoeffs {
    pub k: usize,
    pub cos_upper: Vec<f64>,
    pub cos_lower: Vec<f64>,
    pub sin_upper: Vec<f64>,
    pub sin_lower: Vec<f64>,
    weights: Vec<f64>,
}

impl ModeCoeffs {
    /// `Σ_j w_j (c² + s²)` over both bands.
    pub fn energy(&self) -> f64 {
        let mut e = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            e += w
                * (self.cos_upper[j].powi(2)
                    + self.cos_lower[j].powi(2)
                    + self.sin_upper[j].powi(2)
                    + self.sin_lower[j].powi(2));
        }
        e
    }
}

/// Values on both bands; index `i * nz + j`.
#[derive(Debug, Clone)]
pub struct BandField {
    grid: Arc<BandGrid>,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl BandField {
    pub fn zeros(grid: Arc<BandGrid>) -> Self {
        let n = grid.nx() * grid.nz();
        Self {
            grid,
            upper: vec![0.0; n],
            lower: vec![0.0; n],
        }
    }

    /// Samples `f(x, z, band)`.
    pub fn from_fn(grid: Arc<BandGrid>, f: impl Fn(f64, f64, Band) -> f64) -> Self {
        let nz = grid.nz();
        let mut out = Self::zeros(grid.clone());
        for i in 0..grid.nx() {
            let x = grid.x(i);
            for (j, z) in grid.discretization().nodes().iter().enumerate() {
                out.upper[i * nz + j] = f(x, *z, Band::Upper);
                out.lower[i * nz + j] = f(x, *z, Band::Lower);
            }
        }
        out
    }

    pub fn grid(&self) -> &Arc<BandGrid> {
        &self.grid
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_mut(&mut self) -> &mut [f64] {
        &mut self.upper
    }

    pub fn lower_mut(&mut self) -> &mut [f64] {
        &mut self.lower
    }

    pub fn band(&self, band: Band) -> &[f64] {
        match band {
            Band::Upper => &self.upper,
            Band::Lower => &self.lower,
        }
    }

    pub fn get(&self, band: Band, i: usize, j: usize) -> f64 {
        self.band(band)[i * self.grid.nz() + j]
    }

    fn check(&self, other: &BandField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.nx == other.grid.nx
                && crate::linop::same_rule(self.grid.disc.rule(), other.grid.disc.rule()))
        {
            Ok(())
        } else {
            Err(Error::RuleMismatch)
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            upper: self.upper.iter().map(|v| v * s).collect(),
            lower: self.lower.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &BandField) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + s * b).collect(),
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a + s * b).collect(),
        })
    }

    /// `L²(T × I_ε)` norm, `dy = ε dz`.
    pub fn l2_norm(&self) -> f64 {
        let g = &self.grid;
        let nz = g.nz();
        let w = g.disc.weights();
        let dx = 2.0 * PI / g.nx() as f64;
        let mut s = 0.0;
        for i in 0..g.nx() {
            for (j, wj) in w.iter().enumerate() {
                s += wj * (self.upper[i * nz + j].powi(2) + self.lower[i * nz + j].powi(2));
            }
        }
        (s * dx * g.epsilon()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.upper.iter().chain(&self.lower).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete Fourier coefficients for `k = 0..=nx/2`.
    pub fn fourier(&self) -> Vec<ModeCoeffs> {
        let g = &self.grid;
        let nx = g.nx();
        let nz = g.nz();
        let mut out = Vec::with_capacity(nx / 2 + 1);
        for k in 0..=nx / 2 {
            let edge = k == 0 || 2 * k == nx;
            let scale = if edge { 1.0 / nx as f64 } else { 2.0 / nx as f64 };
            let mut c = ModeCoeffs {
                k,
                cos_upper: vec![0.0; nz],
                cos_lower: vec![0.0; nz],
                sin_upper: vec![0.0; nz],
                sin_lower: vec![0.0; nz],
                weights: g.disc.weights().to_vec(),
            };
            for i in 0..nx {
                let co = g.cos_k(k, i) * scale;
                let si = if edge { 0.0 } else { g.sin_k(k, i) * scale };
                for j in 0..nz {
                    let u = self.upper[i * nz + j];
                    let l = self.lower[i * nz + j];
                    c.cos_upper[j] += co * u;
                    c.cos_lower[j] += co * l;
                    c.sin_upper[j] += si * u;
                    c.sin_lower[j] += si * l;
                }
            }
            out.push(c);
        }
        out
    }

    /// Spectral `∂_x`; the Nyquist mode is dropped.
    pub fn dx(&self) -> Self {
        let g = self.grid.clone();
        let nz = g.nz();
        let mut out = Self::zeros(g.clone());
        for c in self.fourier() {
            let k = c.k;
            if k == 0 || 2 * k == g.nx() {
                continue;
            }
            let kf = k as f64;
            for i in 0..g.nx() {
                let co = g.cos_k(k, i);
                let si = g.sin_k(k, i);
                for j in 0..nz {
                    out.upper[i * nz + j] += kf * (-c.cos_upper[j] * si + c.sin_upper[j] * co);
                    out.lower[i * nz + j] += kf * (-c.cos_lower[j] * si + c.sin_lower[j] * co);
                }
            }
        }
        out
    }

    /// Panelwise `∂_z` of each column.
    pub fn dz(&self) -> Self {
        let g = self.grid.clone();
        let nz = g.nz();
        let rule = g.disc.rule().clone();
        let mut out = Self::zeros(g.clone());
        for i in 0..g.nx() {
            let r = i * nz..(i + 1) * nz;
            out.upper[r.clone()].copy_from_slice(&rule.differentiate(&self.upper[r.clone()]));
            out.lower[r.clone()].copy_from_slice(&rule.differentiate(&self.lower[r]));
        }
        out
    }

    /// Physical `∂_y = ±(1/ε)∂_z`.
    pub fn dy(&self) -> Self {
        let d = self.dz();
        let e = self.grid.epsilon();
        Self {
            grid: d.grid.clone(),
            upper: d.upper.iter().map(|v| v / e).collect(),
            lower: d.lower.iter().map(|v| -v / e).collect(),
        }
    }

    /// Trigonometric interpolation in `x`, piecewise-polynomial in `z`.
    pub fn eval(&self, band: Band, x: f64, z: f64) -> f64 {
        let col = self.column_at(band, x);
        self.grid.disc.rule().interpolate(&col, z)
    }

    /// Values at `x` (trigonometric interpolant) on every `z` node.
    pub fn column_at(&self, band: Band, x: f64) -> Vec<f64> {
        let g = &self.grid;
        let nz = g.nz();
        let vals = self.band(band);
        let nx = g.nx();
        let mut col = vec![0.0; nz];
        // Dirichlet-kernel weights of the trigonometric interpolant
        let mut wts = vec![0.0; nx];
        let kmax = nx / 2;
        for (i, wt) in wts.iter_mut().enumerate() {
            let d = x - g.x(i);
            let mut s = 1.0;
            for k in 1..=kmax {
                let c = (k as f64 * d).cos();
                s += if 2 * k == nx { c } else { 2.0 * c };
            }
            *wt = s / nx as f64;
        }
        for (i, wt) in wts.iter().enumerate() {
            for j in 0..nz {
                col[j] += wt * vals[i * nz + j];
            }
        }
        col
    }

    /// `max_i |f(x_i, ·) − f(x_i + 2π/m, ·)|` for `m | nx`.
    pub fn periodicity_defect(&self, m: usize) -> f64 {
        let g = &self.grid;
        let nx = g.nx();
        let nz = g.nz();
        if m == 0 || !nx.is_multiple_of(m) {
            return f64::NAN;
        }
        let shift = nx / m;
        let mut d: f64 = 0.0;
        for i in 0..nx {
            let ii = (i + shift) % nx;
            for j in 0..nz {
                d = d.max((self.upper[i * nz + j] - self.upper[ii * nz + j]).abs());
                d = d.max((self.lower[i * nz + j] - self.lower[ii * nz + j]).abs());
            }
        }
        d
    }

    /// `max |f(x) − f(−x)|`.
    pub fn evenness_defect(&self) -> f64 {
        let g = &self.grid;
        let nx = g.nx();
        let nz = g.nz();
        let mut d: f64 = 0.0;
        for i in 0..nx {
            let ii = (nx - i) % nx;
            for j in 0..nz {
                d = d.max((self.upper[i * nz + j] - self.upper[ii * nz + j]).abs());
                d = d.max((self.lower[i * nz + j] - self.lower[ii * nz + j]).abs());
            }
        }
        d
    }

    /// `max |f(x) + f(−x)|`.
    pub fn oddness_defect(&self) -> f64 {
        let g = &self.grid;
        let nx = g.nx();
        let nz = g.nz();
        let mut d: f64 = 0.0;
        for i in 0..nx {
            let ii = (nx - i) % nx;
            for j in 0..nz {
                d = d.max((self.upper[i * nz + j] + self.upper[ii * nz + j]).abs());
                d = d.max((self.lower[i * nz + j] + self.lower[ii * nz + j]).abs());
            }
        }
        d
    }
}

/// `h = a(z)cos(mx)` upper, `b(z)cos(mx)` lower, rescaled to
/// `max|∂_y h| = 1`. Returns the field and the applied factor.
pub fn h_field(eig: &EigenSolution, grid: &Arc<BandGrid>) -> Result<(BandField, f64)> {
    if !crate::linop::same_rule(grid.discretization().rule(), eig.disc.rule()) {
        return Err(Error::RuleMismatch);
    }
    let m = eig.m as f64;
    let nz = grid.nz();
    let mut h = BandField::zeros(grid.clone());
    let a = eig.a.values();
    let b = eig.b.values();
    for i in 0..grid.nx() {
        let c = (m * grid.x(i)).cos();
        for j in 0..nz {
            h.upper[i * nz + j] = a[j] * c;
            h.lower[i * nz + j] = b[j] * c;
        }
    }
    let rule = grid.discretization().rule();
    let da = rule.differentiate(a);
    let db = rule.differentiate(b);
    let s = da.iter().chain(&db).fold(0.0f64, |m, v| m.max(v.abs())) / grid.epsilon();
    if s == 0.0 {
        return Err(Error::SingularSystem("eigenfunction has zero y-derivative"));
    }
    Ok((h.scaled(1.0 / s), 1.0 / s))
}

/// `Ψ₁ = sinh a/(cosh a − cos b)` and `Ψ₂ = cosh a/(cosh a − cos b)` with
/// `a = ȳ + Δ[g]`, `Δ[g] = g(x, y) − g(x − x̄, y − ȳ)`, `b = x̄`.
pub struct PsiKernels<G: Fn(f64, f64) -> f64> {
    g: G,
}

impl<G: Fn(f64, f64) -> f64> PsiKernels<G> {
    pub fn new(g: G) -> Self {
        Self { g }
    }

    pub fn delta(&self, x: f64, y: f64, xb: f64, yb: f64) -> f64 {
        (self.g)(x, y) - (self.g)(x - xb, y - yb)
    }

    fn parts(&self, x: f64, y: f64, xb: f64, yb: f64) -> (f64, f64, f64) {
        let a = yb + self.delta(x, y, xb, yb);
        let den = crate::strip_kernel::cosh_minus_cos(xb, a);
        (a.sinh(), a.cosh(), den)
    }

    pub fn psi1(&self, x: f64, y: f64, xb: f64, yb: f64) -> f64 {
        let (s, _, d) = self.parts(x, y, xb, yb);
        s / d
    }

    pub fn psi2(&self, x: f64, y: f64, xb: f64, yb: f64) -> f64 {
        let (_, c, d) = self.parts(x, y, xb, yb);
        c / d
    }

    /// `(Ψ₂ − Ψ₁²)Δ[g_x]`, the `x`-derivative of `Ψ₁`.
    pub fn d_psi1(&self, gx: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, xb: f64, yb: f64) -> f64 {
        let p1 = self.psi1(x, y, xb, yb);
        let p2 = self.psi2(x, y, xb, yb);
        (p2 - p1 * p1) * (gx(x, y) - gx(x - xb, y - yb))
    }

    /// `Ψ₁(1 − Ψ₂)Δ[g_x]`, the `x`-derivative of `Ψ₂`.
    pub fn d_psi2(&self, gx: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, xb: f64, yb: f64) -> f64 {
        let p1 = self.psi1(x, y, xb, yb);
        let p2 = self.psi2(x, y, xb, yb);
        p1 * (1.0 - p2) * (gx(x, y) - gx(x - xb, y - yb))
    }
}

/// Precomputed mode operators and pair tables for `F` on a grid.
pub struct Functional {
    grid: Arc<BandGrid>,
    ops: Vec<ModeOperator>,
    /// `sin²(X/2)` per index offset.
    sin2: Vec<f64>,
    /// Per source point (global band-z index): `(2π/nx)·ε·w·ϖ'`.
    source: Vec<f64>,
    ys: Vec<f64>,
}

/// Nodes `0..nz` are the upper band, `nz..2nz` the lower band.
fn global_y(grid: &BandGrid) -> Vec<f64> {
    let nz = grid.nz();
    let mut y = Vec::with_capacity(2 * nz);
    for j in 0..nz {
        y.push(grid.y(Band::Upper, j));
    }
    for j in 0..nz {
        y.push(grid.y(Band::Lower, j));
    }
    y
}

#[inline]
fn sinh_small(d: f64) -> (f64, f64) {
    if d.abs() < 1e-3 {
        let d2 = d * d;
        (d * (1.0 + d2 / 6.0 * (1.0 + d2 / 20.0)), 1.0 + 0.5 * d2 * (1.0 + d2 / 12.0))
    } else {
        (d.sinh(), d.cosh())
    }
}

impl Functional {
    pub fn new(grid: Arc<BandGrid>) -> Result<Self> {
        let disc = grid.discretization().clone();
        let ops = (1..=grid.max_mode())
            .map(|k| assemble_mode(k, 0.0, &disc))
            .collect::<Result<Vec<_>>>()?;
        let nx = grid.nx();
        let sin2 = (0..nx)
            .map(|d| {
                let s = (PI * d as f64 / nx as f64).sin();
                s * s
            })
            .collect();
        let nz = grid.nz();
        let dx = 2.0 * PI / nx as f64;
        let e = grid.epsilon();
        let mut source = vec![0.0; 2 * nz];
        for j in 0..nz {
            let base = dx * e * disc.weights()[j] * disc.phi_prime()[j];
            source[j] = base;
            source[nz + j] = -base;
        }
        let ys = global_y(&grid);
        Ok(Self {
            grid,
            ops,
            sin2,
            source,
            ys,
        })
    }

    pub fn grid(&self) -> &Arc<BandGrid> {
        &self.grid
    }

    /// `Y = y − ȳ` for global indices, computed without cancellation.
    fn offset(&self, g: usize, gb: usize) -> f64 {
        let nz = self.grid.nz();
        let e = self.grid.epsilon();
        let z = self.grid.discretization().nodes();
        let (bu, ju) = (g < nz, g % nz);
        let (bv, jv) = (gb < nz, gb % nz);
        match (bu, bv) {
            (true, true) => e * (z[ju] - z[jv]),
            (false, false) => -e * (z[ju] - z[jv]),
            (true, false) => 2.0 + e * (z[ju] + z[jv]),
            (false, true) => -(2.0 + e * (z[ju] + z[jv])),
        }
    }

    fn flatten(f: &BandField) -> Vec<f64> {
        // layout [g * nx + i]
        let g = f.grid();
        let nx = g.nx();
        let nz = g.nz();
        let mut out = vec![0.0; 2 * nz * nx];
        for i in 0..nx {
            for j in 0..nz {
                out[j * nx + i] = f.upper[i * nz + j];
                out[(nz + j) * nx + i] = f.lower[i * nz + j];
            }
        }
        out
    }

    fn unflatten(&self, v: &[f64]) -> BandField {
        let nx = self.grid.nx();
        let nz = self.grid.nz();
        let mut out = BandField::zeros(self.grid.clone());
        for i in 0..nx {
            for j in 0..nz {
                out.upper[i * nz + j] = v[j * nx + i];
                out.lower[i * nz + j] = v[(nz + j) * nx + i];
            }
        }
        out
    }

    /// `−Σ_k (1/2k)[cos(kx)A_k + sin(kx)B_k]` for the modes of `g`, where
    /// `A_k, B_k` are the `ȳ`-integrals against `ϖ'e^{−k|y−ȳ|}`.
    fn mode_term(&self, g: &BandField) -> BandField {
        let grid = &self.grid;
        let nz = grid.nz();
        let e = grid.epsilon();
        let mut out = BandField::zeros(grid.clone());
        for c in g.fourier() {
            let k = c.k;
            if k == 0 || k > self.ops.len() {
                continue;
            }
            let op = &self.ops[k - 1];
            let f = 1.0 / (2.0 * k as f64);
            let su = |v: &[f64]| op.apply_s(v);
            let xu = |v: &[f64]| op.apply_x(v);
            let (sca, xca) = (su(&c.cos_upper), xu(&c.cos_upper));
            let (scl, xcl) = (su(&c.cos_lower), xu(&c.cos_lower));
            let (ssa, xsa) = (su(&c.sin_upper), xu(&c.sin_upper));
            let (ssl, xsl) = (su(&c.sin_lower), xu(&c.sin_lower));
            for i in 0..grid.nx() {
                let co = grid.cos_k(k, i);
                let si = grid.sin_k(k, i);
                for j in 0..nz {
                    let au = e * (sca[j] - xcl[j]);
                    let bu = e * (ssa[j] - xsl[j]);
                    let al = e * (xca[j] - scl[j]);
                    let bl = e * (xsa[j] - ssl[j]);
                    out.upper[i * nz + j] -= f * (co * au + si * bu);
                    out.lower[i * nz + j] -= f * (co * al + si * bl);
                }
            }
        }
        out
    }

    /// Pairwise remainder of the log kernel. With `R = log[(cosh(Y+δ) − cos X)/(cosh Y − cos X)]`
    /// and `Ψ₁ = ∂_δ R`, accumulates
    /// `−(1/4π) Σ ϖ'w [R (p − p̄) + Ψ₁ (q − q̄)(r − r̄)]` with `(p, q, r)` given.
    fn pair_sum(&self, f: &[f64], p: &[f64], qr: Option<(&[f64], &[f64])>) -> Vec<f64> {
        let nx = self.grid.nx();
        let ng = self.ys.len();
        let mut out = vec![0.0; ng * nx];
        let c = -1.0 / (4.0 * PI);
        for g in 0..ng {
            for gb in g..ng {
                let y = self.offset(g, gb);
                let (shy, chy) = (y.sinh(), y.cosh());
                let sh2 = {
                    let s = (0.5 * y).sinh();
                    s * s
                };
                let wg = self.source[g] * c;
                let wgb = self.source[gb] * c;
                for i in 0..nx {
                    let pi = g * nx + i;
                    let start = if g == gb { i + 1 } else { 0 };
                    let mut acc = 0.0;
                    for ib in start..nx {
                        let qi = gb * nx + ib;
                        let d = ib.abs_diff(i);
                        let d0 = 2.0 * (sh2 + self.sin2[d]);
                        if d0 == 0.0 {
                            continue;
                        }
                        let delta = f[pi] - f[qi];
                        let (sh, ch) = sinh_small(0.5 * delta);
                        let shyd = shy * ch + chy * sh;
                        let num = 2.0 * shyd * sh;
                        let r = (num / d0).ln_1p();
                        let mut t = r * (p[pi] - p[qi]);
                        if let Some((q, rr)) = qr {
                            let (shd, chd) = sinh_small(delta);
                            let psi1 = (shy * chd + chy * shd) / (d0 + num);
                            t += psi1 * (q[pi] - q[qi]) * (rr[pi] - rr[qi]);
                        }
                        acc += wgb * t;
                        out[qi] -= wg * t;
                    }
                    out[pi] += acc;
                }
            }
        }
        out
    }

    /// `F[1 + mu, f]`.
    pub fn evaluate(&self, mu: f64, f: &BandField) -> Result<BandField> {
        let fx = f.dx();
        self.evaluate_with(mu, f, &fx)
    }

    fn evaluate_with(&self, mu: f64, f: &BandField, fx: &BandField) -> Result<BandField> {
        let grid = &self.grid;
        let nz = grid.nz();
        let (lp, lm) = lambda_multipliers(mu, grid.discretization());
        let mut out = self.mode_term(fx);
        for i in 0..grid.nx() {
            for j in 0..nz {
                let k = i * nz + j;
                out.upper[k] += (lp.values()[j] + f.upper[k]) * fx.upper[k];
                out.lower[k] += (lm.values()[j] + f.lower[k]) * fx.lower[k];
            }
        }
        if f.sup_norm() > 0.0 {
            let ff = Self::flatten(f);
            let pf = Self::flatten(fx);
            let rem = self.unflatten(&self.pair_sum(&ff, &pf, None));
            out = out.axpy(1.0, &rem)?;
        }
        Ok(out)
    }

    /// `D_f F[1 + mu, f] h`.
    pub fn gateaux(&self, mu: f64, f: &BandField, h: &BandField) -> Result<BandField> {
        f.check(h)?;
        let grid = &self.grid;
        let nz = grid.nz();
        let fx = f.dx();
        let hx = h.dx();
        let (lp, lm) = lambda_multipliers(mu, grid.discretization());
        let mut out = self.mode_term(&hx);
        for i in 0..grid.nx() {
            for j in 0..nz {
                let k = i * nz + j;
                out.upper[k] += (lp.values()[j] + f.upper[k]) * hx.upper[k] + h.upper[k] * fx.upper[k];
                out.lower[k] += (lm.values()[j] + f.lower[k]) * hx.lower[k] + h.lower[k] * fx.lower[k];
            }
        }
        if f.sup_norm() > 0.0 {
            let ff = Self::flatten(f);
            let ph = Self::flatten(&hx);
            let q = Self::flatten(h);
            let r = Self::flatten(&fx);
            let rem = self.unflatten(&self.pair_sum(&ff, &ph, Some((&q, &r))));
            out = out.axpy(1.0, &rem)?;
        }
        Ok(out)
    }
}

/// Checks the level-curve map before building a wave.
fn monotonicity(f: &BandField) -> f64 {
    let fy = f.dy();
    fy.upper.iter().chain(&fy.lower).fold(f64::INFINITY, |m, v| m.min(1.0 + v))
}

/// `f^σ = σh` together with the eigenpair it comes from.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub eig: EigenSolution,
    pub sigma: f64,
    /// Factor applied to `(a, b)` so that `max|∂_y h| = 1`.
    pub h_scale: f64,
    pub h: BandField,
    pub f: BandField,
}

impl WaveField {
    pub fn new(eig: EigenSolution, sigma: f64, nx: usize) -> Result<Self> {
        let grid = BandGrid::new(eig.disc.clone(), nx)?;
        let (h, h_scale) = h_field(&eig, &grid)?;
        let hy = h.dy().sup_norm();
        if sigma.abs() * hy >= 0.5 {
            return Err(Error::SigmaTooLarge(sigma.abs() * hy));
        }
        let f = h.scaled(sigma);
        let mono = monotonicity(&f);
        if mono <= 0.0 {
            return Err(Error::NonMonotone(mono));
        }
        Ok(Self {
            eig,
            sigma,
            h_scale,
            h,
            f,
        })
    }

    pub fn grid(&self) -> &Arc<BandGrid> {
        self.f.grid()
    }

    pub fn epsilon(&self) -> f64 {
        self.eig.epsilon()
    }

    /// `min(1 + f_y)` over the grid.
    pub fn min_jacobian(&self) -> f64 {
        monotonicity(&self.f)
    }

    /// Variance of `f` in `x` averaged over nodes.
    pub fn x_variance(&self) -> f64 {
        let g = self.grid();
        let nz = g.nz();
        let nx = g.nx();
        let mut tot = 0.0;
        for band in [Band::Upper, Band::Lower] {
            let v = self.f.band(band);
            for j in 0..nz {
                let mean = (0..nx).map(|i| v[i * nz + j]).sum::<f64>() / nx as f64;
                tot += (0..nx).map(|i| (v[i * nz + j] - mean).powi(2)).sum::<f64>() / nx as f64;
            }
        }
        tot / (2 * nz) as f64
    }

    /// Largest `|x`-mean of `f|` over nodes.
    pub fn max_x_mean(&self) -> f64 {
        let g = self.grid();
        let nz = g.nz();
        let nx = g.nx();
        let mut m: f64 = 0.0;
        for band in [Band::Upper, Band::Lower] {
            let v = self.f.band(band);
            for j in 0..nz {
                m = m.max(((0..nx).map(|i| v[i * nz + j]).sum::<f64>() / nx as f64).abs());
            }
        }
        m
    }
}

/// Vorticity at `(x1, x2)`: `ε` between the deformed curves, `0` outside,
/// `ϖ(y)` with `x2 = y + f(x1, y)` on the bands.
pub fn omega_sampler(wave: &WaveField, x1: f64, x2: f64) -> Result<f64> {
    let mono = wave.min_jacobian();
    if mono <= 0.0 {
        return Err(Error::NonMonotone(mono));
    }
    let g = wave.grid();
    let e = g.epsilon();
    let profile = g.discretization().profile();
    let rule = g.discretization().rule();
    for band in [Band::Upper, Band::Lower] {
        let col = wave.f.column_at(band, x1);
        let s = band.orientation();
        let pos = |z: f64| s * (1.0 + e * z) + rule.interpolate(&col, z);
        let (lo, hi) = (pos(-1.0), pos(1.0));
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if x2 >= a && x2 <= b {
            let (mut za, mut zb) = (-1.0, 1.0);
            let inc = hi >= lo;
            for _ in 0..200 {
                let zm = 0.5 * (za + zb);
                if (pos(zm) < x2) == inc {
                    za = zm;
                } else {
                    zb = zm;
                }
                if zb - za < 1e-15 {
                    break;
                }
            }
            let z = 0.5 * (za + zb);
            return Ok(e * profile.phi(z));
        }
    }
    let top_inner = 1.0 - e + wave.f.eval(Band::Upper, x1, -1.0);
    let bot_inner = -(1.0 - e) + wave.f.eval(Band::Lower, x1, -1.0);
    if x2 < top_inner && x2 > bot_inner {
        Ok(e)
    } else {
        Ok(0.0)
    }
}

/// Velocity `(u₁, u₂)` induced by the deformed profile,
/// `u = −(1/4π)∫∫ log[cosh(y − ỹ − f̃) − cos(x − x̃)] (1, ∂_x f̃) ϖ'(ỹ) dx̃ dỹ`,
/// at points `(x, y)` in physical coordinates.
///
/// The `x̃` integral is split into the kernel at the frozen height
/// `A₀ = y − ỹ − f(x, ỹ)`, done in closed form, plus a bounded log-ratio
/// summed by the trapezoid rule; the `ỹ` integral is adaptive with a break
/// where `A₀` vanishes.
pub fn velocity_field(f: &BandField, points: &[(f64, f64)], tol: f64) -> Result<Vec<(f64, f64)>> {
    let g = f.grid().clone();
    let nx = g.nx();
    let e = g.epsilon();
    let disc = g.discretization().clone();
    let profile = disc.profile().clone();
    let rule = disc.rule().clone();
    let fx = f.dx();
    let coeffs = fx.fourier();
    let kmax = g.max_mode();
    let mut out = Vec::with_capacity(points.len());
    for &(x, y) in points {
        let mut u1 = 0.0;
        let mut u2 = 0.0;
        for band in [Band::Upper, Band::Lower] {
            let s = band.orientation();
            let col_x = f.column_at(band, x);
            let f_at = |z: f64| rule.interpolate(&col_x, z);
            let ytil = |z: f64| s * (1.0 + e * z);
            let a0 = |z: f64| y - ytil(z) - f_at(z);
            // integrand pieces at band coordinate z̃
            let piece = |z: f64, comp: usize| -> f64 {
                let a = a0(z);
                let cu = |v: &[f64]| rule.interpolate(v, z);
                let mut j = 0.0;
                if comp == 0 {
                    j += mean_over_x(a);
                } else {
                    for c in coeffs.iter().take(kmax + 1).skip(1) {
                        let k = c.k;
                        let (al, be) = match band {
                            Band::Upper => (cu(&c.cos_upper), cu(&c.sin_upper)),
                            Band::Lower => (cu(&c.cos_lower), cu(&c.sin_lower)),
                        };
                        let (si, co) = (k as f64 * x).sin_cos();
                        j += fourier_coefficient(k, a) * (al * co + be * si);
                    }
                }
                let dxw = 2.0 * PI / nx as f64;
                let mut corr = 0.0;
                for i in 0..nx {
                    let xt = g.x(i);
                    let ft = f.eval(band, xt, z);
                    let at = y - ytil(z) - ft;
                    let den = crate::strip_kernel::cosh_minus_cos(x - xt, a);
                    let diff = 2.0 * (0.5 * (at + a)).sinh() * (0.5 * (at - a)).sinh();
                    if den == 0.0 {
                        continue;
                    }
                    let ratio = (diff / den).ln_1p();
                    let w = if comp == 0 { 1.0 } else { fx.eval(band, xt, z) };
                    corr += dxw * ratio * w;
                }
                j += corr / (4.0 * PI);
                // ϖ'(ỹ) dỹ = ε φ'(z̃) dz̃ on the upper band, −ε φ'(z̃) dz̃ below
                -s * e * profile.phi_prime(z) * j
            };
            let mut breaks = rule.breaks();
            let (l, h) = (a0(-1.0), a0(1.0));
            if l * h < 0.0 {
                let (mut za, mut zb) = (-1.0, 1.0);
                for _ in 0..100 {
                    let zm = 0.5 * (za + zb);
                    if (a0(zm) > 0.0) == (l > 0.0) {
                        za = zm;
                    } else {
                        zb = zm;
                    }
                }
                breaks.push(0.5 * (za + zb));
                breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
            }
            u1 += integrate_adaptive_breaks(&|z| piece(z, 0), &breaks, tol, tol)?;
            if fx.sup_norm() > 0.0 {
                u2 += integrate_adaptive_breaks(&|z| piece(z, 1), &breaks, tol, tol)?;
            }
        }
        out.push((u1, u2));
    }
    Ok(out)
}

/// `F[λ, f]` for `λ = 1 + mu` on `f`'s grid.
pub fn evaluate_f(mu: f64, f: &BandField) -> Result<BandField> {
    Functional::new(f.grid().clone())?.evaluate(mu, f)
}

/// `D_f F[1 + mu, f]h`.
pub fn gateaux_derivative(mu: f64, f: &BandField, h: &BandField) -> Result<BandField> {
    Functional::new(f.grid().clone())?.gateaux(mu, f, h)
}
