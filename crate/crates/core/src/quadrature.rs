//! Gauss–Legendre rules, composite panel rules on `[-1, 1]` and an adaptive
//! Gauss–Kronrod integrator.

use alloc::{vec, vec::Vec};
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// One panel `[a, b]` of a composite rule and the slice of nodes it owns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub start: usize,
    pub len: usize,
}

impl Panel {
    pub fn contains(&self, z: f64) -> bool {
        z >= self.a && z <= self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Composite Gauss–Legendre rule on `[-1, 1]`; every panel carries the same
/// number of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
    panels: Vec<Panel>,
    node_panel: Vec<usize>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    bary: Vec<f64>,
}

impl QuadratureRule {
    /// Single-panel `n`-point Gauss–Legendre rule.
    pub fn gauss_legendre(n: usize) -> Self {
        Self::composite(&[-1.0, 1.0], n)
    }

    /// Composite rule with panel boundaries `breaks` (ascending, first -1,
    /// last 1) and `order` nodes per panel.
    pub fn composite(breaks: &[f64], order: usize) -> Self {
        assert!(breaks.len() >= 2, "need at least one panel");
        assert!(order >= 1, "panel order must be positive");
        let (rx, rw) = gauss_legendre(order);
        let bary = barycentric_weights(&rx);
        let n_panels = breaks.len() - 1;
        let mut nodes = Vec::with_capacity(n_panels * order);
        let mut weights = Vec::with_capacity(n_panels * order);
        let mut panels = Vec::with_capacity(n_panels);
        let mut node_panel = Vec::with_capacity(n_panels * order);
        for (p, pair) in breaks.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            assert!(b > a, "panel breaks must be strictly increasing");
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            panels.push(Panel {
                a,
                b,
                start: nodes.len(),
                len: order,
            });
            for (x, w) in rx.iter().zip(&rw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
                node_panel.push(p);
            }
        }
        Self {
            nodes,
            weights,
            order,
            panels,
            node_panel,
            ref_nodes: rx,
            ref_weights: rw,
            bary,
        }
    }

    /// Composite rule refined by bisection until, on every panel, the panel
    /// rule and the rule on its two halves agree on each integrand to within
    /// `tol` times that integrand's absolute integral over `[-1, 1]`.
    pub fn adaptive(order: usize, tol: f64, initial_breaks: &[f64], integrands: &[&dyn Fn(f64) -> f64]) -> Self {
        let (rx, rw) = gauss_legendre(order);
        let panel_sum = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            rx.iter().zip(&rw).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
        };
        let mut scale: Vec<f64> = integrands
            .iter()
            .map(|f| {
                initial_breaks
                    .windows(2)
                    .map(|p| {
                        let half = 0.5 * (p[1] - p[0]);
                        let mid = 0.5 * (p[0] + p[1]);
                        rx.iter().zip(&rw).map(|(x, w)| w * f(mid + half * x).abs()).sum::<f64>() * half
                    })
                    .sum::<f64>()
            })
            .collect();
        for s in scale.iter_mut() {
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        let mut done: Vec<(f64, f64)> = Vec::new();
        let mut stack: Vec<(f64, f64)> = initial_breaks.windows(2).map(|p| (p[0], p[1])).rev().collect();
        while let Some((a, b)) = stack.pop() {
            let c = 0.5 * (a + b);
            let converged = (b - a) < 1e-12
                || integrands.iter().zip(&scale).all(|(f, s)| {
                    let whole = panel_sum(*f, a, b);
                    let halves = panel_sum(*f, a, c) + panel_sum(*f, c, b);
                    (whole - halves).abs() <= tol * s
                });
            if converged {
                done.push((a, b));
            } else {
                stack.push((c, b));
                stack.push((a, c));
            }
        }
        done.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut breaks: Vec<f64> = done.iter().map(|p| p.0).collect();
        breaks.push(done.last().map(|p| p.1).unwrap_or(1.0));
        Self::composite(&breaks, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes per panel.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    /// Panel breakpoints, `panels().len() + 1` values.
    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        b.push(self.panels.last().map(|p| p.b).unwrap_or(1.0));
        b
    }

    pub fn panel_of_node(&self, i: usize) -> usize {
        self.node_panel[i]
    }

    /// Index of the panel containing `z` (clamped to `[-1, 1]`).
    pub fn panel_of_point(&self, z: f64) -> usize {
        let idx = self.panels.partition_point(|p| p.b < z);
        idx.min(self.panels.len() - 1)
    }

    /// Reference Gauss–Legendre nodes and weights of one panel on `[-1, 1]`.
    pub fn reference_rule(&self) -> (&[f64], &[f64]) {
        (&self.ref_nodes, &self.ref_weights)
    }

    /// Quadrature sum of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Quadrature of a function sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }

    /// Lagrange basis of panel `p` evaluated at `s`, written into `out`
    /// (length `order`).
    pub fn lagrange_row(&self, p: usize, s: f64, out: &mut [f64]) {
        let panel = &self.panels[p];
        let t = (2.0 * s - panel.a - panel.b) / (panel.b - panel.a);
        for (j, x) in self.ref_nodes.iter().enumerate() {
            if t == *x {
                out.fill(0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut denom = 0.0;
        for (j, (x, b)) in self.ref_nodes.iter().zip(&self.bary).enumerate() {
            let c = b / (t - x);
            out[j] = c;
            denom += c;
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
    }

    /// Piecewise-polynomial interpolant of nodal `values` evaluated at `s`.
    pub fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        let p = self.panel_of_point(s);
        let panel = self.panels[p];
        let mut row = vec![0.0; self.order];
        self.lagrange_row(p, s, &mut row);
        row.iter().zip(&values[panel.start..panel.start + panel.len]).map(|(l, v)| l * v).sum()
    }

    /// Derivative of the panelwise interpolant at the nodes.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let d = self.reference_differentiation();
        let q = self.order;
        let mut out = vec![0.0; values.len()];
        for panel in &self.panels {
            let scale = 2.0 / panel.width();
            let v = &values[panel.start..panel.start + q];
            for i in 0..q {
                out[panel.start + i] = scale * (0..q).map(|j| d[i * q + j] * v[j]).sum::<f64>();
            }
        }
        out
    }

    /// Row-major differentiation matrix on the reference panel.
    fn reference_differentiation(&self) -> Vec<f64> {
        let q = self.order;
        let x = &self.ref_nodes;
        let b = &self.bary;
        let mut d = vec![0.0; q * q];
        for i in 0..q {
            let mut diag = 0.0;
            for j in 0..q {
                if i != j {
                    let v = (b[j] / b[i]) / (x[i] - x[j]);
                    d[i * q + j] = v;
                    diag -= v;
                }
            }
            d[i * q + i] = diag;
        }
        d
    }
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut b = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                b[j] /= x[j] - x[k];
            }
        }
    }
    // rescale for range safety; barycentric formula is invariant
    let m = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    b.iter().map(|v| v / m).collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its error estimate on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv = [(0.0, 0.0); 7];
    for (j, x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        fv[j] = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = res_k * h;
    res_asc *= h.abs();
    res_abs *= h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate_adaptive_breaks(f, &[a, b], abs_tol, rel_tol)
}

/// As [`integrate_adaptive`], starting from the subintervals given by
/// `breaks` (ascending).
pub fn integrate_adaptive_breaks(f: &dyn Fn(f64) -> f64, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let mut parts: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|p| p[1] > p[0])
        .map(|p| {
            let (r, e) = gk15(f, p[0], p[1]);
            (p[0], p[1], r, e)
        })
        .collect();
    if parts.is_empty() {
        return Ok(0.0);
    }
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(total);
        }
        let (idx, worst) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(i, p)| (i, *p))
            .unwrap();
        let (a, b) = (worst.0, worst.1);
        let c = 0.5 * (a + b);
        if parts.len() >= MAX_INTERVALS || c <= a || c >= b {
            if err <= 1e3 * target {
                return Ok(total);
            }
            return Err(Error::QuadratureFailure(err));
        }
        let (r1, e1) = gk15(f, a, c);
        let (r2, e2) = gk15(f, c, b);
        parts[idx] = (a, c, r1, e1);
        parts.push((c, b, r2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k} q={q}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn composite_rule_weights_sum_to_two() {
        let rule = QuadratureRule::composite(&[-1.0, -0.2, 0.5, 0.9, 1.0], 12);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-13);
        assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
        assert_eq!(rule.len(), 48);
        assert_eq!(rule.panel_of_point(0.95), 3);
        assert_eq!(rule.panel_of_point(-1.0), 0);
    }

    #[test]
    fn adaptive_rule_grades_toward_pole() {
        let lam = 1e-3;
        let f = move |z: f64| 1.0 / (1.0 + lam - z);
        let rule = QuadratureRule::adaptive(12, 1e-13, &[-1.0, 0.0, 1.0], &[&f]);
        let exact = ((2.0 + lam) / lam).ln();
        assert!((rule.integrate_fn(f) - exact).abs() < 1e-11 * exact);
        let last = rule.panels().last().unwrap();
        assert!(last.width() < 0.01);
    }

    #[test]
    fn interpolation_and_differentiation_are_exact_on_panel_polynomials() {
        let rule = QuadratureRule::composite(&[-1.0, 0.0, 1.0], 8);
        let f = |z: f64| 3.0 * z.powi(5) - z * z + 0.5;
        let df = |z: f64| 15.0 * z.powi(4) - 2.0 * z;
        let vals: Vec<f64> = rule.nodes().iter().map(|z| f(*z)).collect();
        for s in [-0.93, -0.2, 0.0, 0.31, 0.999] {
            assert!((rule.interpolate(&vals, s) - f(s)).abs() < 1e-13);
        }
        let d = rule.differentiate(&vals);
        for (z, v) in rule.nodes().iter().zip(d) {
            assert!((v - df(*z)).abs() < 1e-11);
        }
    }

    #[test]
    fn gauss_kronrod_handles_log_endpoint() {
        let v = integrate_adaptive(&|x: f64| x.ln(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        let v = integrate_adaptive_breaks(&|x: f64| (x.abs()).sqrt(), &[-1.0, 0.0, 1.0], 1e-13, 1e-13).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-12);
    }
}
