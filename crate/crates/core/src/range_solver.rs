//! Range of the mode operators: adjointness, the solvability condition,
//! the off-mode resolvent and the mode-`m` solve on the complement of the
//! kernel, plus coercivity probes of the associated bilinear forms.

use alloc::{sync::Arc, vec, vec::Vec};

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifurcate::EigenSolution;
use crate::error::{Error, Result};
use crate::linop::{assemble_mode, BandDiscretization, GridFn, ModeOperator};
use crate::quadrature::QuadratureRule;

/// `(f, g) = ∫(−φ') f g` on the band rule.
#[derive(Debug, Clone)]
pub struct WeightedInnerProduct {
    rule: Arc<QuadratureRule>,
    weight: GridFn,
}

impl WeightedInnerProduct {
    pub fn new(disc: &BandDiscretization) -> Self {
        let weight = disc.sample(|z| -disc.profile().phi_prime(z));
        Self {
            rule: disc.rule().clone(),
            weight,
        }
    }

    pub fn weight(&self) -> &GridFn {
        &self.weight
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(self.weight.values())
            .zip(f.iter().zip(g))
            .map(|((w, p), (a, b))| w * p * a * b)
            .sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }
}

fn dot_phi(disc: &BandDiscretization, f: &[f64], g: &[f64]) -> f64 {
    disc.phi_moment(&f.iter().zip(g).map(|(a, b)| a * b).collect::<Vec<_>>())
}

/// `|LHS − RHS|` of
/// `−(T⁺[u,v], φ'f) + (T⁻[u,v], φ'g) = −(φ'u, T⁺[f,g]) + (φ'v, T⁻[f,g])`.
pub fn adjointness_residual(u: &GridFn, v: &GridFn, f: &GridFn, g: &GridFn, op: &ModeOperator) -> Result<f64> {
    let (tp, tm) = op.apply_t(u, v)?;
    let (sp, sm) = op.apply_t(f, g)?;
    let d = op.discretization();
    let lhs = -dot_phi(d, tp.values(), f.values()) + dot_phi(d, tm.values(), g.values());
    let rhs = -dot_phi(d, u.values(), sp.values()) + dot_phi(d, v.values(), sm.values());
    Ok((lhs - rhs).abs())
}

/// Magnitude scale for the adjointness residual of `(u, v, f, g)`.
pub fn adjointness_scale(u: &GridFn, v: &GridFn, f: &GridFn, g: &GridFn, op: &ModeOperator) -> Result<f64> {
    let (tp, tm) = op.apply_t(u, v)?;
    let (sp, sm) = op.apply_t(f, g)?;
    let n = |x: &GridFn| x.l2_norm();
    Ok(n(&tp) * n(f) + n(&tm) * n(g) + n(u) * n(&sp) + n(v) * n(&sm))
}

/// The solvability scalar `−(W⁺, φ'a) + (W⁻, φ'b)`.
pub fn solvability(wp: &GridFn, wm: &GridFn, eig: &EigenSolution) -> Result<f64> {
    wp.check_rule(&eig.a)?;
    wm.check_rule(&eig.b)?;
    let d = &eig.disc;
    Ok(-dot_phi(d, wp.values(), eig.a.values()) + dot_phi(d, wm.values(), eig.b.values()))
}

/// Scale of the solvability scalar, `‖φ'W⁺‖‖a‖ + ‖φ'W⁻‖‖b‖`.
pub fn solvability_scale(wp: &GridFn, wm: &GridFn, eig: &EigenSolution) -> f64 {
    let d = &eig.disc;
    let abs_dot = |f: &[f64], g: &[f64]| {
        d.weights()
            .iter()
            .zip(d.phi_prime())
            .zip(f.iter().zip(g))
            .map(|((w, p), (a, b))| (w * p * a * b).abs())
            .sum::<f64>()
    };
    abs_dot(wp.values(), eig.a.values()) + abs_dot(wm.values(), eig.b.values())
}

/// Solves `(1 + λ₁ − z)f + (1/2n)∫φ'f = F` for `n ≠ m`:
/// `f = b₀(F + (1/(2(m−n)))∫φ'F b₀)` with `b₀ = 1/(1 + λ₁ − z)`.
///
/// Exact on the rule when `λ₁` solves the discrete eigenvalue equation.
pub fn invert_resolvent_1d(f: &GridFn, n: usize, m: usize, lambda1: f64, disc: &BandDiscretization) -> Result<GridFn> {
    if n == m {
        return Err(Error::ModeCollision(n));
    }
    if !crate::linop::same_rule(f.rule(), disc.rule()) {
        return Err(Error::RuleMismatch);
    }
    let b0: Vec<f64> = disc.nodes().iter().map(|z| 1.0 / ((1.0 - z) + lambda1)).collect();
    let c = dot_phi(disc, f.values(), &b0) / (2.0 * (m as f64 - n as f64));
    Ok(f.with_values(f.values().iter().zip(&b0).map(|(v, b)| b * (v + c)).collect()))
}

/// `(1 + λ₁ − z)f + (1/2n)∫φ'f`.
pub fn resolvent_forward(f: &GridFn, n: usize, lambda1: f64, disc: &BandDiscretization) -> GridFn {
    let c = disc.phi_moment(f.values()) / (2.0 * n as f64);
    let vals = disc
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(z, v)| ((1.0 - z) + lambda1) * v + c)
        .collect();
    f.with_values(vals)
}

/// Outcome of an off-mode solve.
#[derive(Debug, Clone, PartialEq)]
pub struct OffModeSolution {
    pub u: GridFn,
    pub v: GridFn,
    pub iterations: usize,
    /// `‖T_n[u,v] + W/n‖ / ‖W/n‖`.
    pub residual: f64,
    /// `(‖u‖ + ‖v‖) / (‖W⁺‖ + ‖W⁻‖)`.
    pub gain: f64,
}

/// Solves `T_n[u, v] = −(W⁺, W⁻)/n` for `n ≠ m` by the linear contraction
/// `u = −W⁺/(nΛ⁺) + εU`, `v = I[W + εV]`.
pub fn solve_offmode(
    n: usize,
    wp: &GridFn,
    wm: &GridFn,
    eig: &EigenSolution,
    tol: f64,
    max_iter: usize,
) -> Result<OffModeSolution> {
    let m = eig.m;
    if n == m {
        return Err(Error::ModeCollision(n));
    }
    wp.check_rule(&eig.a)?;
    wm.check_rule(&eig.a)?;
    let disc = &eig.disc;
    let op = assemble_mode(n, eig.mu, disc)?;
    let e = eig.epsilon();
    let nf = n as f64;
    let c = 1.0 / (2.0 * nf);
    let lp = op.lambda_plus().values().to_vec();
    let phi = disc.big_phi();
    let size = disc.len();
    let l2 = eig.lambda2_eps;
    let u0: Vec<f64> = (0..size).map(|i| -wp.values()[i] / (nf * lp[i])).collect();
    let xu0 = op.apply_x(&u0);
    let w: Vec<f64> = (0..size).map(|i| -wm.values()[i] / (nf * e) + c * xu0[i]).collect();
    let mut u = vec![0.0; size];
    let mut v = vec![0.0; size];
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let su = op.apply_s(&u);
        let xv = op.apply_x(&v);
        let big_u: Vec<f64> = (0..size).map(|i| (c * su[i] - c * xv[i]) / lp[i]).collect();
        let xbu = op.apply_x(&big_u);
        let dv = op.apply_d(&v);
        let big_v: Vec<f64> = (0..size)
            .map(|i| -(l2 + phi[i]) * v[i] + c * xbu[i] - c * dv[i])
            .collect();
        let un: Vec<f64> = (0..size).map(|i| u0[i] + e * big_u[i]).collect();
        let rhs = wp.with_values((0..size).map(|i| w[i] + e * big_v[i]).collect());
        let vn = invert_resolvent_1d(&rhs, n, m, eig.lambda1, disc)?.into_values();
        let scale = un.iter().chain(&vn).fold(0.0f64, |s, x| s.max(x.abs()));
        let diff = un
            .iter()
            .zip(&u)
            .chain(vn.iter().zip(&v))
            .fold(0.0f64, |s, (a, b)| s.max((a - b).abs()));
        change = if scale > 0.0 { diff / scale } else { diff };
        u = un;
        v = vn;
        if !change.is_finite() || change > 1e8 {
            return Err(Error::NonContraction { iterations, change });
        }
        if change <= tol {
            break;
        }
    }
    if change > tol {
        return Err(Error::NonContraction { iterations, change });
    }
    let (tp, tm) = op.apply_raw(&u, &v);
    let res = tp
        .iter()
        .zip(wp.values())
        .chain(tm.iter().zip(wm.values()))
        .map(|(t, w)| (t + w / nf).powi(2))
        .sum::<f64>()
        .sqrt();
    let wn = wp.values().iter().chain(wm.values()).map(|w| (w / nf).powi(2)).sum::<f64>().sqrt();
    let u = wp.with_values(u);
    let v = wp.with_values(v);
    let wsum = wp.l2_norm() + wm.l2_norm();
    let gain = if wsum > 0.0 { (u.l2_norm() + v.l2_norm()) / wsum } else { 0.0 };
    Ok(OffModeSolution {
        u,
        v,
        iterations,
        residual: if wn > 0.0 { res / wn } else { res },
        gain,
    })
}

/// Solves `T_m[u, v] = −(W⁺, W⁻)/m` with `−(u, a)_w + (v, b)_w = 0`.
///
/// The Galerkin conditions on the complement of `(−a, b)` are equivalent to
/// the bordered system `T x − γ(−a, b) = −W/m`, `(−a, b)ᵀ Ŵ x = 0`, solved by
/// dense LU; the multiplier `γ` vanishes when `W` satisfies the
/// solvability condition.
pub fn solve_mode_m(wp: &GridFn, wm: &GridFn, eig: &EigenSolution, tol: f64) -> Result<(GridFn, GridFn)> {
    let s = solvability(wp, wm, eig)?;
    let scale = solvability_scale(wp, wm, eig);
    let obstruction = if scale > 0.0 { s.abs() / scale } else { 0.0 };
    if obstruction > tol {
        return Err(Error::Obstruction {
            obstruction,
            tolerance: tol,
        });
    }
    let n = eig.disc.len();
    if wp.values().iter().chain(wm.values()).all(|v| *v == 0.0) {
        return Ok((GridFn::zeros(eig.disc.rule().clone()), GridFn::zeros(eig.disc.rule().clone())));
    }
    let op = eig.mode_operator()?;
    let t = op.as_matrix();
    let mf = eig.m as f64;
    let w = eig.disc.weights();
    let pp = eig.disc.phi_prime();
    let a = eig.a.values();
    let b = eig.b.values();
    let mut k = DMatrix::<f64>::zeros(2 * n + 1, 2 * n + 1);
    k.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&t);
    let cscale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        let ww = w[i] * (-pp[i]);
        k[(i, 2 * n)] = a[i] / cscale;
        k[(n + i, 2 * n)] = -b[i] / cscale;
        k[(2 * n, i)] = -ww * a[i] / cscale;
        k[(2 * n, n + i)] = ww * b[i] / cscale;
    }
    let mut rhs = DVector::<f64>::zeros(2 * n + 1);
    for i in 0..n {
        rhs[i] = -wp.values()[i] / mf;
        rhs[n + i] = -wm.values()[i] / mf;
    }
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem("bordered mode-m system"))?;
    let u = wp.with_values(x.rows(0, n).iter().copied().collect());
    let v = wp.with_values(x.rows(n, n).iter().copied().collect());
    Ok((u, v))
}

/// The forms `B`, `𝓑`, `B₁`, `B₂` at the mode-`m` eigenpair.
#[derive(Debug, Clone)]
pub struct BilinearForms {
    op: ModeOperator,
    ip: WeightedInnerProduct,
    lambda1: f64,
    lambda2: f64,
    m: usize,
}

impl BilinearForms {
    pub fn new(eig: &EigenSolution) -> Result<Self> {
        Ok(Self {
            op: eig.mode_operator()?,
            ip: WeightedInnerProduct::new(&eig.disc),
            lambda1: eig.lambda1,
            lambda2: eig.lambda2_eps,
            m: eig.m,
        })
    }

    pub fn inner(&self) -> &WeightedInnerProduct {
        &self.ip
    }

    /// `(T⁺[u₁,v₁], u₂)_w + (T⁻[u₁,v₁], v₂)_w`.
    pub fn big_b(&self, u1: &[f64], v1: &[f64], u2: &[f64], v2: &[f64]) -> f64 {
        let (tp, tm) = self.op.apply_raw(u1, v1);
        self.ip.inner(&tp, u2) + self.ip.inner(&tm, v2)
    }

    /// As [`big_b`](Self::big_b) with the cross kernel removed.
    pub fn big_b_without_cross(&self, u: &[f64], v: &[f64]) -> f64 {
        let c = self.op.epsilon() / (2.0 * self.op.n() as f64);
        let su = self.op.apply_s(u);
        let sv = self.op.apply_s(v);
        let lp = self.op.lambda_plus().values();
        let lm = self.op.lambda_minus().values();
        let tp: Vec<f64> = (0..u.len()).map(|i| lp[i] * u[i] - c * su[i]).collect();
        let tm: Vec<f64> = (0..u.len()).map(|i| lm[i] * v[i] + c * sv[i]).collect();
        self.ip.inner(&tp, u) + self.ip.inner(&tm, v)
    }

    /// `𝓑[v₁,v₂] = ∫(−φ')(1+λ₁−z)v₁v₂ − (1/2m)(∫−φ'v₁)(∫−φ'v₂)`.
    pub fn script_b(&self, v1: &[f64], v2: &[f64]) -> f64 {
        let d = self.op.discretization();
        let z = d.nodes();
        let sh: Vec<f64> = v1.iter().zip(z).map(|(v, z)| v * ((1.0 - z) + self.lambda1)).collect();
        let ones = vec![1.0; v1.len()];
        let m1 = self.ip.inner(v1, &ones);
        let m2 = self.ip.inner(v2, &ones);
        self.ip.inner(&sh, v2) - m1 * m2 / (2.0 * self.m as f64)
    }

    /// `B₁[u,u] = ∫(−φ')[(−1+λ₁+z) + ε(λ₂−Φ)]u² + (1/2m)∫∫φ'φ'uu e^{−mε|z−z̄|}`.
    pub fn b1(&self, u: &[f64]) -> f64 {
        let d = self.op.discretization();
        let e = self.op.epsilon();
        let z = d.nodes();
        let phi = d.big_phi();
        let coef: Vec<f64> = (0..u.len())
            .map(|i| ((z[i] - 1.0) + self.lambda1 + e * (self.lambda2 - phi[i])) * u[i])
            .collect();
        let su = self.op.apply_s(u);
        self.ip.inner(&coef, u) + dot_phi(d, u, &su) / (2.0 * self.m as f64)
    }

    /// `B₂[v,v] = ∫(−φ')(λ₂+Φ)v² − (1/2m)∫∫φ'φ'vv(e^{−mε|z−z̄|} − 1)/ε`.
    pub fn b2(&self, v: &[f64]) -> f64 {
        let d = self.op.discretization();
        let phi = d.big_phi();
        let coef: Vec<f64> = (0..v.len()).map(|i| (self.lambda2 + phi[i]) * v[i]).collect();
        let dv = self.op.apply_d(v);
        self.ip.inner(&coef, v) - dot_phi(d, v, &dv) / (2.0 * self.m as f64)
    }

    /// `B[(u,v),(u,v)] − 2‖u‖² − ε𝓑[v,v] − εB₁[u,u] − ε²B₂[v,v]` and the
    /// magnitude of the largest term.
    pub fn decomposition_defect(&self, u: &[f64], v: &[f64]) -> (f64, f64) {
        let e = self.op.epsilon();
        let terms = [
            self.big_b(u, v, u, v),
            -2.0 * self.ip.inner(u, u),
            -e * self.script_b(v, v),
            -e * self.b1(u),
            -e * e * self.b2(v),
        ];
        let s: f64 = terms.iter().sum();
        let mag = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        (s, mag)
    }
}

/// Minimum ratios seen by [`coercivity_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityStats {
    pub samples: usize,
    /// `min B[(u,v),(u,v)] / (‖u‖² + ε‖v‖²)` over `(u, v) ⊥ (−a, b)`.
    pub min_b_ratio: f64,
    /// `min 𝓑[v,v] / ‖v‖²` over `v ⊥ b₀`.
    pub min_script_b_ratio: f64,
    /// `|𝓑[b₀, b₀]| / ‖b₀‖²`.
    pub script_b_at_b0: f64,
    /// Largest relative defect of the `B` decomposition.
    pub max_decomposition_defect: f64,
}

/// Smooth random function: a random Chebyshev series of degree < 8.
pub fn random_smooth<R: Rng + ?Sized>(rng: &mut R, z: &[f64]) -> Vec<f64> {
    let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    z.iter()
        .map(|z| {
            let (mut t0, mut t1) = (1.0, *z);
            let mut s = c[0] + c[1] * z;
            for ck in &c[2..] {
                let t2 = 2.0 * z * t1 - t0;
                s += ck * t2;
                t0 = t1;
                t1 = t2;
            }
            s
        })
        .collect()
}

pub fn coercivity_probe(samples: usize, eig: &EigenSolution, seed: u64) -> Result<CoercivityStats> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let forms = BilinearForms::new(eig)?;
    let ip = forms.inner().clone();
    let z = eig.disc.nodes().to_vec();
    let e = eig.epsilon();
    let a = eig.a.values();
    let b = eig.b.values();
    let b0 = eig.b0.values();
    let kk = ip.inner(a, a) + ip.inner(b, b);
    let b0n = ip.inner(b0, b0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_b = f64::INFINITY;
    let mut min_sb = f64::INFINITY;
    let mut max_def: f64 = 0.0;
    for _ in 0..samples {
        let mut u = random_smooth(&mut rng, &z);
        let mut v = random_smooth(&mut rng, &z);
        // project onto the complement of (−a, b) in the product space
        let c = (-ip.inner(&u, a) + ip.inner(&v, b)) / kk;
        for i in 0..z.len() {
            u[i] += c * a[i];
            v[i] -= c * b[i];
        }
        let nu = ip.inner(&u, &u);
        let nv = ip.inner(&v, &v);
        min_b = min_b.min(forms.big_b(&u, &v, &u, &v) / (nu + e * nv));
        let (d, mag) = forms.decomposition_defect(&u, &v);
        max_def = max_def.max(d.abs() / mag);

        let mut w = random_smooth(&mut rng, &z);
        let c = ip.inner(&w, b0) / b0n;
        for i in 0..z.len() {
            w[i] -= c * b0[i];
        }
        min_sb = min_sb.min(forms.script_b(&w, &w) / ip.inner(&w, &w));
    }
    Ok(CoercivityStats {
        samples,
        min_b_ratio: min_b,
        min_script_b_ratio: min_sb,
        script_b_at_b0: forms.script_b(b0, b0).abs() / b0n,
        max_decomposition_defect: max_def,
    })
}
