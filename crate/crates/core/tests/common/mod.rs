#![allow(dead_code)]

use std::sync::Arc;

use couette_core::bifurcate::{solve_eigen, EigenSolution, SolverConfig};
use couette_core::profile::ProfileParams;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Simpson over consecutive break points.
pub fn simpson_breaks(f: impl Fn(f64) -> f64, breaks: &[f64], n: usize) -> f64 {
    breaks.windows(2).map(|w| simpson(&f, w[0], w[1], n)).sum()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

pub fn eigen(epsilon: f64, kappa: f64, m: usize) -> Arc<EigenSolution> {
    let p = ProfileParams::new(epsilon, kappa).unwrap();
    Arc::new(solve_eigen(m, p, &SolverConfig::default()).unwrap())
}

/// Standard bump `exp(−1/(1 − t²))` on `(−1, 1)`, unnormalized.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
