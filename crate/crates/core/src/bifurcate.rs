//! The bifurcation speed `λ = 1 + λ₁ε + λ₂ε²` and the kernel element
//! `(a, b) = (a₁ε + a₂ε², b₀ + b₁ε)` of the mode-`m` operator.

use alloc::{format, sync::Arc, vec, vec::Vec};

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linop::{assemble_mode, band_breaks, band_rule, svd_spectrum, BandDiscretization, GridFn, ModeOperator};
use crate::profile::{Profile, ProfileParams};
use crate::quadrature::integrate_adaptive_breaks;

/// Lower end of the root bracket for `λ₁`.
pub const LAMBDA1_LO: f64 = 1e-12;
/// Upper end of the root bracket for `λ₁`.
pub const LAMBDA1_HI: f64 = 10.0;

/// `I(λ) = (1/2m) ∫ −φ'(z)/(1 + λ − z) dz` by adaptive quadrature in
/// `u = ln(1 + λ − z)`, where the integrand becomes `−φ'(1 + λ − eᵘ)`.
pub fn eigen_integral(m: usize, profile: &Profile, lambda: f64) -> Result<f64> {
    let f = |u: f64| -profile.phi_prime(((1.0 + lambda) - u.exp()).clamp(-1.0, 1.0));
    let mut br: Vec<f64> = band_breaks(profile.kappa())
        .into_iter()
        .map(|z| ((1.0 - z) + lambda).ln())
        .collect();
    br.sort_by(|a, b| a.partial_cmp(b).unwrap());
    br.dedup();
    let v = integrate_adaptive_breaks(&f, &br, 1e-15, 1e-14)?;
    Ok(v / (2.0 * m as f64))
}

/// Root of `I(λ₁) = 1` on `[LAMBDA1_LO, LAMBDA1_HI]`: Illinois regula falsi
/// in `t = log λ`, where `I` is smooth and decreasing.
pub fn solve_lambda1(m: usize, profile: &Profile, tol: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("mode m must be at least 1".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let g = |t: f64| eigen_integral(m, profile, t.exp()).map(|v| v - 1.0);
    let (mut a, mut b) = (LAMBDA1_LO.ln(), LAMBDA1_HI.ln());
    let mut ga = g(a)?;
    if ga < 0.0 {
        return Err(Error::BracketFailure {
            m,
            kappa: profile.kappa(),
            lo: LAMBDA1_LO,
            value: ga + 1.0,
        });
    }
    let mut gb = g(b)?;
    if gb > 0.0 {
        return Err(Error::InvalidArgument(format!("I({LAMBDA1_HI}) > 1; no root below the bracket top")));
    }
    let target = 0.01 * tol;
    let (mut t, mut gt) = if ga.abs() < gb.abs() { (a, ga) } else { (b, gb) };
    let mut side = 0i8;
    for _ in 0..200 {
        if gt.abs() <= target || b - a < 1e-15 * a.abs().max(1.0) {
            break;
        }
        t = (a * gb - b * ga) / (gb - ga);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        gt = g(t)?;
        if gt > 0.0 {
            a = t;
            ga = gt;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = t;
            gb = gt;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    if gt.abs() > tol.max(1e-13) {
        return Err(Error::QuadratureFailure(gt.abs()));
    }
    Ok(t.exp())
}

/// Root of the discrete eigenvalue equation `Σ w(−φ')/(1+λ−z) = 2m` by
/// safeguarded Newton from `guess`, so the leading-order relation holds
/// exactly on the rule.
pub fn discrete_lambda1(m: usize, disc: &BandDiscretization, guess: f64) -> Result<f64> {
    let target = 2.0 * m as f64;
    let g = |l: f64| {
        let mut s = 0.0;
        let mut ds = 0.0;
        for ((z, w), p) in disc.nodes().iter().zip(disc.weights()).zip(disc.phi_prime()) {
            let d = (1.0 - z) + l;
            s += -w * p / d;
            ds += w * p / (d * d);
        }
        (s - target, ds)
    };
    let mut lo = guess * 0.5;
    let mut hi = guess * 2.0;
    while g(lo).0 < 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::SingularSystem("discrete eigenvalue equation has no root"));
        }
    }
    while g(hi).0 > 0.0 {
        hi *= 2.0;
    }
    let mut l = guess.clamp(lo, hi);
    for _ in 0..200 {
        let (v, dv) = g(l);
        if v > 0.0 {
            lo = l;
        } else {
            hi = l;
        }
        let mut next = l - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - l).abs() <= 1e-16 * l {
            return Ok(next);
        }
        l = next;
    }
    Ok(l)
}

/// `b₀ = 1/(1 + λ₁ − z)` at the nodes and `a₁ = ½e^{−2m}`.
pub fn b0_and_a1(m: usize, lambda1: f64, disc: &BandDiscretization) -> (GridFn, f64) {
    let b0 = disc.sample(|z| 1.0 / ((1.0 - z) + lambda1));
    (b0, 0.5 * (-2.0 * m as f64).exp())
}

/// `‖b₀‖_{L²}` by adaptive quadrature of `(1 + λ₁ − z)^{−2}`, written in
/// `u = ln(1 + λ₁ − z)` as `∫ e^{−u} du`.
pub fn b0_l2_norm(lambda1: f64) -> Result<f64> {
    let f = |u: f64| (-u).exp();
    let (lo, hi) = (lambda1.ln(), (2.0 + lambda1).ln());
    let n = ((hi - lo).ceil() as usize).max(1);
    let br: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    Ok(integrate_adaptive_breaks(&f, &br, 1e-300, 1e-15)?.sqrt())
}

/// Discretization knobs for an eigen solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Nodes per panel of the band rule.
    pub grid_order: usize,
    /// Panel refinement tolerance of the band rule.
    pub quad_tol: f64,
    /// Stopping threshold on the relative sup change of the iterates.
    pub fixed_point_tol: f64,
    pub max_iter: usize,
    /// Tolerance on `|I(λ₁) − 1|`.
    pub lambda1_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_order: 16,
            quad_tol: 1e-10,
            fixed_point_tol: 1e-12,
            max_iter: 200,
            lambda1_tol: 1e-12,
        }
    }
}

/// Fixed data of the correction system at mode `m`.
#[derive(Debug, Clone)]
pub struct CorrectionContext {
    m: usize,
    epsilon: f64,
    lambda1: f64,
    a1: f64,
    disc: Arc<BandDiscretization>,
    op: ModeOperator,
    b0: Vec<f64>,
    /// Kernel `e^{−mε(z+z̄)}`.
    xp: DMatrix<f64>,
    /// Kernel `(e^{−mε(z+z̄)} − 1)/ε`.
    xd: DMatrix<f64>,
}

/// Values of `A₀, A₁, B₀, B₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsTerms {
    pub a0: GridFn,
    pub a1: GridFn,
    pub b0: GridFn,
    pub b1: GridFn,
}

impl CorrectionContext {
    pub fn new(m: usize, lambda1: f64, disc: Arc<BandDiscretization>) -> Result<Self> {
        let e = disc.epsilon();
        let mf = m as f64;
        let op = assemble_mode(m, 0.0, &disc)?;
        let (b0, a1) = b0_and_a1(m, lambda1, &disc);
        let n = disc.len();
        let z = disc.nodes();
        let w = disc.weights();
        let pp = disc.phi_prime();
        let mut xp = DMatrix::zeros(n, n);
        let mut xd = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let s = -mf * e * (z[i] + z[j]);
                xp[(i, j)] = w[j] * pp[j] * s.exp();
                xd[(i, j)] = w[j] * pp[j] * s.exp_m1() / e;
            }
        }
        Ok(Self {
            m,
            epsilon: e,
            lambda1,
            a1,
            disc,
            op,
            b0: b0.into_values(),
            xp,
            xd,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn b0(&self) -> &[f64] {
        &self.b0
    }

    pub fn discretization(&self) -> &Arc<BandDiscretization> {
        &self.disc
    }

    fn mv(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m.nrows()];
        for (j, xj) in x.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(m.column(j).iter()) {
                *o += c * xj;
            }
        }
        out
    }

    /// `∫φ'v e^{−mε(z+z̄)}`.
    pub fn apply_xp(&self, v: &[f64]) -> Vec<f64> {
        Self::mv(&self.xp, v)
    }

    /// `∫φ'v (e^{−mε(z+z̄)} − 1)/ε`.
    pub fn apply_xd(&self, v: &[f64]) -> Vec<f64> {
        Self::mv(&self.xd, v)
    }

    /// `A₀` and `B₀` (independent of the unknowns).
    fn leading_terms(&self) -> (Vec<f64>, Vec<f64>) {
        let e = self.epsilon;
        let c = 1.0 / (2.0 * self.m as f64);
        let em = (-2.0 * self.m as f64).exp();
        let z = self.disc.nodes();
        let phi = self.disc.big_phi();
        let n = z.len();
        let sa = self.op.apply_s(&vec![self.a1; n]);
        let xdb = self.apply_xd(&self.b0);
        let db = self.op.apply_d(&self.b0);
        let xpa = self.apply_xp(&vec![self.a1; n]);
        let a0 = (0..n)
            .map(|i| c * sa[i] - em * c * xdb[i] + e * phi[i] * self.a1 - ((z[i] - 1.0) + self.lambda1) * self.a1)
            .collect();
        let b0 = (0..n).map(|i| -phi[i] * self.b0[i] - c * db[i] + em * c * xpa[i]).collect();
        (a0, b0)
    }

    /// `A₁` and `B₁` at `(a₂, b₁, λ₂)`.
    fn correction_terms(&self, a2: &[f64], b1: &[f64], lambda2: f64) -> (Vec<f64>, Vec<f64>) {
        let e = self.epsilon;
        let c = 1.0 / (2.0 * self.m as f64);
        let em = (-2.0 * self.m as f64).exp();
        let z = self.disc.nodes();
        let phi = self.disc.big_phi();
        let n = z.len();
        let sa = self.op.apply_s(a2);
        let xpa = self.apply_xp(a2);
        let db = self.op.apply_d(b1);
        let a1t = (0..n)
            .map(|i| {
                -((z[i] - 1.0) + self.lambda1) * a2[i] - self.a1 * lambda2 - e * (lambda2 - phi[i]) * a2[i] + c * sa[i]
            })
            .collect();
        let b1t = (0..n).map(|i| -(phi[i] + lambda2) * b1[i] + em * c * xpa[i] - c * db[i]).collect();
        (a1t, b1t)
    }

    pub fn rhs_operators(&self, a2: &GridFn, b1: &GridFn, lambda2: f64) -> Result<RhsTerms> {
        a2.check_rule(b1)?;
        if !crate::linop::same_rule(a2.rule(), self.disc.rule()) {
            return Err(Error::RuleMismatch);
        }
        let (a0, b0) = self.leading_terms();
        let (a1, b1v) = self.correction_terms(a2.values(), b1.values(), lambda2);
        Ok(RhsTerms {
            a0: a2.with_values(a0),
            a1: a2.with_values(a1),
            b0: a2.with_values(b0),
            b1: a2.with_values(b1v),
        })
    }

    /// `∫Gb₀φ' / ∫b₀²φ'`.
    pub fn projection_quotient(&self, g: &[f64]) -> f64 {
        let num = self.disc.phi_moment(&g.iter().zip(&self.b0).map(|(a, b)| a * b).collect::<Vec<_>>());
        let den = self.disc.phi_moment(&self.b0.iter().map(|b| b * b).collect::<Vec<_>>());
        num / den
    }

    /// One sweep: `(a₂, b₁, λ₂) ↦ (a₂', b₁', λ₂')`.
    fn step(&self, a0: &[f64], b0t: &[f64], a2: &[f64], b1: &[f64], lambda2: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let e = self.epsilon;
        let c = 1.0 / (2.0 * self.m as f64);
        let em = (-2.0 * self.m as f64).exp();
        let n = a2.len();
        let (_, b1t) = self.correction_terms(a2, b1, lambda2);
        let g: Vec<f64> = (0..n).map(|i| b0t[i] + e * b1t[i]).collect();
        let l2 = self.projection_quotient(&g);
        let b1n: Vec<f64> = (0..n).map(|i| self.b0[i] * (g[i] - l2 * self.b0[i])).collect();
        let (a1t, _) = self.correction_terms(a2, b1, l2);
        let xb = self.apply_xp(&b1n);
        let a2n = (0..n).map(|i| 0.5 * (a0[i] + e * a1t[i] - em * c * xb[i])).collect();
        (a2n, b1n, l2)
    }
}

/// Fixed point of the correction system.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionResult {
    pub a2_eps: GridFn,
    pub b1_eps: GridFn,
    pub lambda2_eps: f64,
    pub iterations: usize,
    /// Relative sup change after each sweep.
    pub changes: Vec<f64>,
    /// Geometric mean of successive change ratios above round-off.
    pub contraction_factor: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let d = new.iter().zip(old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let s = sup(new);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Estimate of the per-sweep contraction factor from the change history.
pub fn contraction_factor(changes: &[f64]) -> f64 {
    let floor = 1e-13;
    let mut logs = 0.0;
    let mut count = 0;
    for w in changes.windows(2) {
        if w[1] > floor && w[0] > 0.0 {
            logs += (w[1] / w[0]).ln();
            count += 1;
        }
    }
    if count == 0 {
        if changes.len() >= 2 && changes[0] > 0.0 {
            return changes[1] / changes[0];
        }
        return 0.0;
    }
    (logs / count as f64).exp()
}

/// Picard iteration on `(2a₂, b₁, λ₂)` started from the `ε⁰` truncation.
pub fn contraction_solve(ctx: &CorrectionContext, tol: f64, max_iter: usize) -> Result<ContractionResult> {
    let n = ctx.b0.len();
    let c = 1.0 / (2.0 * ctx.m as f64);
    let em = (-2.0 * ctx.m as f64).exp();
    let (a0, b0t) = ctx.leading_terms();
    // ε⁰ truncation: b₁ from B₀ alone, a₂ from A₀ and that b₁
    let mut l2 = ctx.projection_quotient(&b0t);
    let mut b1: Vec<f64> = (0..n).map(|i| ctx.b0[i] * (b0t[i] - l2 * ctx.b0[i])).collect();
    let xb = ctx.apply_xp(&b1);
    let mut a2: Vec<f64> = (0..n).map(|i| 0.5 * (a0[i] - em * c * xb[i])).collect();
    let mut changes = Vec::new();
    for it in 1..=max_iter {
        let (a2n, b1n, l2n) = ctx.step(&a0, &b0t, &a2, &b1, l2);
        let two_a: Vec<f64> = a2n.iter().map(|v| 2.0 * v).collect();
        let two_a_old: Vec<f64> = a2.iter().map(|v| 2.0 * v).collect();
        let dl = (l2n - l2).abs() / l2n.abs().max(f64::MIN_POSITIVE);
        let change = rel_change(&two_a, &two_a_old).max(rel_change(&b1n, &b1)).max(dl);
        changes.push(change);
        a2 = a2n;
        b1 = b1n;
        l2 = l2n;
        if !change.is_finite() || change > 1e8 {
            return Err(Error::NonContraction { iterations: it, change });
        }
        if change <= tol {
            let rule = ctx.disc.rule().clone();
            return Ok(ContractionResult {
                a2_eps: GridFn::new(rule.clone(), a2)?,
                b1_eps: GridFn::new(rule, b1)?,
                lambda2_eps: l2,
                iterations: it,
                contraction_factor: contraction_factor(&changes),
                changes,
            });
        }
    }
    Err(Error::NonContraction {
        iterations: max_iter,
        change: changes.last().copied().unwrap_or(f64::NAN),
    })
}

/// Residual norms of `T_m^±[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub t_plus_l2: f64,
    pub t_minus_l2: f64,
    /// `‖(a, b)‖_{L²}`.
    pub solution_scale: f64,
    /// `‖T[a,b]‖ / ‖(a,b)‖`.
    pub relative: f64,
}

/// Assembled eigenpair at mode `m`.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub m: usize,
    pub params: ProfileParams,
    pub disc: Arc<BandDiscretization>,
    /// Root of the discrete eigenvalue equation; `lambda` is built from it.
    pub lambda1: f64,
    /// Root of the continuous equation `I(λ₁) = 1`.
    pub lambda1_exact: f64,
    pub lambda2_eps: f64,
    /// `λ − 1 = λ₁ε + λ₂ε²`.
    pub mu: f64,
    pub lambda: f64,
    pub a1: f64,
    pub b0: GridFn,
    pub a2_eps: GridFn,
    pub b1_eps: GridFn,
    pub a: GridFn,
    pub b: GridFn,
    pub residual_report: ResidualReport,
    pub iterations: usize,
    pub contraction_factor: f64,
    pub changes: Vec<f64>,
}

impl EigenSolution {
    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn mode_operator(&self) -> Result<ModeOperator> {
        assemble_mode(self.m, self.mu, &self.disc)
    }

    /// `−‖a‖²_w + ‖b‖²_w` with weight `−φ'`.
    pub fn transversality(&self) -> f64 {
        let a = self.a.values();
        let b = self.b.values();
        -self.disc.weighted_inner(a, a) + self.disc.weighted_inner(b, b)
    }

    pub fn a_weighted_norm(&self) -> f64 {
        self.disc.weighted_inner(self.a.values(), self.a.values()).sqrt()
    }

    pub fn b_weighted_norm(&self) -> f64 {
        self.disc.weighted_inner(self.b.values(), self.b.values()).sqrt()
    }
}

pub fn residual_report(op: &ModeOperator, a: &GridFn, b: &GridFn) -> Result<ResidualReport> {
    let (tp, tm) = op.apply_t(a, b)?;
    let t_plus_l2 = tp.l2_norm();
    let t_minus_l2 = tm.l2_norm();
    let solution_scale = (a.l2_norm().powi(2) + b.l2_norm().powi(2)).sqrt();
    Ok(ResidualReport {
        t_plus_l2,
        t_minus_l2,
        solution_scale,
        relative: (t_plus_l2 * t_plus_l2 + t_minus_l2 * t_minus_l2).sqrt() / solution_scale,
    })
}

/// Full solve: `λ₁`, band rule, leading order, corrections, residuals.
pub fn solve_eigen(m: usize, params: ProfileParams, cfg: &SolverConfig) -> Result<EigenSolution> {
    let profile = Profile::new(params.clone());
    let lambda1_exact = solve_lambda1(m, &profile, cfg.lambda1_tol)?;
    let rule = Arc::new(band_rule(&profile, lambda1_exact, cfg.grid_order, cfg.quad_tol));
    let disc = Arc::new(BandDiscretization::new(profile, rule));
    let lambda1 = discrete_lambda1(m, &disc, lambda1_exact)?;
    let ctx = CorrectionContext::new(m, lambda1, disc.clone())?;
    let cr = contraction_solve(&ctx, cfg.fixed_point_tol, cfg.max_iter)?;
    let e = params.epsilon;
    let mu = lambda1 * e + cr.lambda2_eps * e * e;
    let a1 = ctx.a1;
    let b0 = disc.grid_fn(ctx.b0.clone())?;
    let a = cr.a2_eps.map(|v| a1 * e + v * e * e);
    let b = b0.zip_map(&cr.b1_eps, |p, q| p + q * e)?;
    let op = assemble_mode(m, mu, &disc)?;
    let residual_report = residual_report(&op, &a, &b)?;
    Ok(EigenSolution {
        m,
        params,
        disc,
        lambda1,
        lambda1_exact,
        lambda2_eps: cr.lambda2_eps,
        mu,
        lambda: 1.0 + mu,
        a1,
        b0,
        a2_eps: cr.a2_eps,
        b1_eps: cr.b1_eps,
        a,
        b,
        residual_report,
        iterations: cr.iterations,
        contraction_factor: cr.contraction_factor,
        changes: cr.changes,
    })
}

/// Relative threshold for a near-zero singular value.
pub const NEAR_ZERO_REL: f64 = 1e-6;

/// Smallest and largest singular value of one mode block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSummary {
    pub n: usize,
    pub min_singular: f64,
    pub max_singular: f64,
    pub near_zero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub blocks: Vec<BlockSummary>,
    pub near_zero_total: usize,
    /// `true` iff exactly one near-zero singular value exists and it sits in
    /// block `m`.
    pub kernel_ok: bool,
    pub transversality: f64,
    pub transversality_ok: bool,
    pub a_weighted_norm: f64,
    pub b_weighted_norm: f64,
    pub residual: ResidualReport,
    pub residual_ok: bool,
}

impl CertificateReport {
    pub fn pass(&self) -> bool {
        self.kernel_ok && self.transversality_ok && self.residual_ok
    }
}

/// Kernel-dimension sweep over blocks `1..=n_modes` at speed `1 + mu`.
pub fn kernel_sweep(disc: &Arc<BandDiscretization>, mu: f64, n_modes: usize) -> Result<Vec<BlockSummary>> {
    Ok(svd_spectrum(disc, mu, n_modes)?
        .into_iter()
        .map(|s| BlockSummary {
            n: s.n,
            min_singular: s.min(),
            max_singular: s.max(),
            near_zero: s.near_zero(NEAR_ZERO_REL),
        })
        .collect())
}

/// Computes all certificate quantities without failing on a check.
pub fn certificate(eig: &EigenSolution, n_modes: usize) -> Result<CertificateReport> {
    let blocks = kernel_sweep(&eig.disc, eig.mu, n_modes)?;
    let near_zero_total = blocks.iter().map(|b| b.near_zero).sum();
    let kernel_ok = near_zero_total == 1 && blocks.iter().any(|b| b.n == eig.m && b.near_zero == 1);
    let transversality = eig.transversality();
    Ok(CertificateReport {
        blocks,
        near_zero_total,
        kernel_ok,
        transversality,
        transversality_ok: transversality > 0.0,
        a_weighted_norm: eig.a_weighted_norm(),
        b_weighted_norm: eig.b_weighted_norm(),
        residual: eig.residual_report,
        residual_ok: eig.residual_report.relative <= 1e-6,
    })
}

/// As [`certificate`], failing with the name of the first failed check.
pub fn certify(eig: &EigenSolution, n_modes: usize) -> Result<CertificateReport> {
    let r = certificate(eig, n_modes)?;
    if !r.residual_ok {
        return Err(Error::Certification(format!("eigen residual {:e}", r.residual.relative)));
    }
    if !r.kernel_ok {
        return Err(Error::Certification(format!(
            "kernel dimension: {} near-zero singular values",
            r.near_zero_total
        )));
    }
    if !r.transversality_ok {
        return Err(Error::Certification(format!("transversality {:e}", r.transversality)));
    }
    Ok(r)
}
