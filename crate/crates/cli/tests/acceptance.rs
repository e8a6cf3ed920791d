//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use couette_core::bifurcate::{
    b0_l2_norm, certificate, kernel_sweep, solve_eigen, solve_lambda1, EigenSolution, SolverConfig,
};
use couette_core::fit::loglog_slope;
use couette_core::linop::{assemble_mode, physical_apply, ModeOperator};
use couette_core::norms::{norm_report, omega_sobolev, profile_norm_squares, profile_prime_sq};
use couette_core::profile::{Profile, ProfileParams};
use couette_core::range_solver::{
    adjointness_residual, adjointness_scale, coercivity_probe, invert_resolvent_1d, random_smooth,
    resolvent_forward,
};
use couette_core::strip_kernel::identity_suite;
use couette_core::wave::{BandField, BandGrid, Functional, WaveField};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Key = (u64, u64, usize);

/// Eigen solves shared between criteria.
#[derive(Default)]
struct Cache {
    solved: BTreeMap<Key, Result<Arc<EigenSolution>, String>>,
}

impl Cache {
    fn get(&mut self, eps: f64, kappa: f64, m: usize) -> Result<Arc<EigenSolution>, String> {
        let key = (eps.to_bits(), kappa.to_bits(), m);
        self.solved
            .entry(key)
            .or_insert_with(|| {
                ProfileParams::new(eps, kappa)
                    .and_then(|p| solve_eigen(m, p, &SolverConfig::default()))
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .clone()
    }
}

struct Verdict {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            info: Vec::new(),
        }
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    loglog_slope(xs, ys).unwrap_or(f64::NAN)
}

const EPS_PAIR: [f64; 2] = [1e-2, 1e-3];
const CELLS_KAPPA: [f64; 2] = [0.0, 0.1];
const MODES: [usize; 3] = [1, 2, 3];

fn criterion1() -> Verdict {
    let t = Instant::now();
    let checks = match identity_suite() {
        Ok(c) => c,
        Err(e) => return Verdict::new(false, format!("identity suite failed: {e}")),
    };
    let secs = t.elapsed().as_secs_f64();
    let get = |name: &str| checks.iter().find(|c| c.identity == name).map(|c| c.max_residual).unwrap_or(f64::NAN);
    let fc = get("fourier_coefficient");
    let mean = get("mean_over_x");
    let pass = fc <= 1e-8 && mean <= 1e-10 && secs < 5.0;
    Verdict::new(
        pass,
        format!("Fourier residual {fc:.1e} (tol 1e-8), mean residual {mean:.1e} (tol 1e-10), {secs:.2} s (limit 5 s)"),
    )
}

fn criterion2() -> Verdict {
    let t = Instant::now();
    let p0 = Profile::from_eps_kappa(0.01, 0.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut info = vec![];
    for m in 1..=5usize {
        let exact = 2.0 / ((4.0 * m as f64).exp() - 1.0);
        match solve_lambda1(m, &p0, 1e-13) {
            Ok(l) => {
                worst = worst.max((l - exact).abs());
                info.push(format!("m={m}: lambda1 = {l:.12e}, closed form {exact:.12e}"));
            }
            Err(e) => return Verdict::new(false, format!("m={m}: {e}")),
        }
    }
    let l0 = solve_lambda1(1, &p0, 1e-13).unwrap();
    let mut cs = vec![];
    for k in [0.0025, 0.005, 0.01, 0.02] {
        match Profile::from_eps_kappa(0.01, k).map_err(|e| e.to_string()).and_then(|p| {
            solve_lambda1(1, &p, 1e-13).map_err(|e| e.to_string())
        }) {
            Ok(l) => cs.push((l - l0).abs() / k),
            Err(e) => return Verdict::new(false, format!("kappa sweep at {k}: {e}")),
        }
    }
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    let spread = hi / lo - 1.0;
    info.push(format!("kappa sweep m=1: C = {cs:.4?}"));
    let secs = t.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && spread <= 0.1 && secs < 5.0;
    let mut v = Verdict::new(
        pass,
        format!(
            "max |lambda1 - 2/(e^(4m)-1)| = {worst:.1e} over m=1..5 (tol 1e-10); fitted C in [{lo:.4}, {hi:.4}], spread {:.1}% (limit 10%); {secs:.2} s",
            100.0 * spread
        ),
    );
    v.info = info;
    v
}

fn criterion3(cache: &mut Cache) -> Verdict {
    let mut worst_eqb: f64 = 0.0;
    let mut worst_a1: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut worst_rule_norm: f64 = 0.0;
    for (k, m) in [(0.0, 1), (0.0, 2), (0.0, 3), (0.01, 1)] {
        let eig = match cache.get(1e-2, k, m) {
            Ok(e) => e,
            Err(e) => return Verdict::new(false, format!("(kappa={k}, m={m}): {e}")),
        };
        let d = &eig.disc;
        let l = eig.lambda1_exact;
        let b0: Vec<f64> = d.nodes().iter().map(|z| 1.0 / (1.0 + l - z)).collect();
        let s = d.phi_moment(&b0) / (2.0 * m as f64);
        for (z, b) in d.nodes().iter().zip(&b0) {
            worst_eqb = worst_eqb.max(((1.0 + l - z) * b + s).abs());
        }
        worst_a1 = worst_a1.max((eig.a1 - 0.5 * (-2.0 * m as f64).exp()).abs());
        let closed = |lam: f64| (2.0 / ((2.0 + lam) * lam)).sqrt();
        worst_norm = worst_norm.max((b0_l2_norm(l).unwrap_or(f64::NAN) / closed(l) - 1.0).abs());
        worst_rule_norm = worst_rule_norm.max((eig.b0.l2_norm() / closed(eig.lambda1) - 1.0).abs());
    }
    let pass = worst_eqb <= 1e-9 && worst_a1 <= 1e-15 && worst_norm <= 1e-10 && worst_rule_norm <= 1e-10;
    Verdict::new(
        pass,
        format!(
            "eqb residual {worst_eqb:.1e} (tol 1e-9), a1 error {worst_a1:.1e}, ||b0|| relative error {worst_norm:.1e} adaptive / {worst_rule_norm:.1e} on the rule (tol 1e-10); cells (kappa, m) = (0,1..3), (0.01,1) at eps=1e-2"
        ),
    )
}

fn criterion4(cache: &mut Cache) -> Verdict {
    let t = Instant::now();
    let mut failures = vec![];
    let mut info = vec![];
    for k in CELLS_KAPPA {
        for m in MODES {
            let mut factors = vec![];
            for e in EPS_PAIR {
                match cache.get(e, k, m) {
                    Ok(s) => {
                        info.push(format!(
                            "(eps={e:e}, kappa={k}, m={m}): {} iterations, residual {:.1e}, factor {:.3e}",
                            s.iterations, s.residual_report.relative, s.contraction_factor
                        ));
                        if s.iterations > 200 || s.residual_report.relative > 1e-6 {
                            failures.push(format!("(eps={e:e}, kappa={k}, m={m}) not certified"));
                        }
                        factors.push(s.contraction_factor);
                    }
                    Err(err) => failures.push(format!("(eps={e:e}, kappa={k}, m={m}): {err}")),
                }
            }
            if factors.len() == 2 {
                let s = slope(&EPS_PAIR, &factors);
                info.push(format!("(kappa={k}, m={m}): contraction factor slope vs eps {s:.3}"));
                if (s - 1.0).abs() > 0.1 {
                    failures.push(format!("(kappa={k}, m={m}) factor slope {s:.3}"));
                }
            }
        }
    }
    // κ = 0.01 has a root for m = 1 only
    for e in EPS_PAIR {
        if let Ok(s) = cache.get(e, 0.01, 1) {
            info.push(format!(
                "extra (eps={e:e}, kappa=0.01, m=1): {} iterations, residual {:.1e}, factor {:.3e}",
                s.iterations, s.residual_report.relative, s.contraction_factor
            ));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    let mut v = if failures.is_empty() {
        Verdict::new(true, format!("12 cells certified, factor slopes within 1 +- 0.1, {secs:.1} s"))
    } else {
        Verdict::new(false, format!("{} problems: {}; {secs:.1} s", failures.len(), failures.join("; ")))
    };
    v.info = info;
    v
}

fn criterion5(cache: &mut Cache) -> Verdict {
    let mut failures = vec![];
    let mut info = vec![];
    for k in CELLS_KAPPA {
        for m in MODES {
            let mut ratios = vec![];
            for e in EPS_PAIR {
                let eig = match cache.get(e, k, m) {
                    Ok(s) => s,
                    Err(err) => {
                        failures.push(format!("(eps={e:e}, kappa={k}, m={m}): {err}"));
                        continue;
                    }
                };
                let r = match certificate(&eig, 16) {
                    Ok(r) => r,
                    Err(err) => {
                        failures.push(format!("(eps={e:e}, kappa={k}, m={m}): {err}"));
                        continue;
                    }
                };
                if !r.kernel_ok || !r.transversality_ok {
                    failures.push(format!(
                        "(eps={e:e}, kappa={k}, m={m}): near-zero {} kernel_ok {} transversality {:.2e}",
                        r.near_zero_total, r.kernel_ok, r.transversality
                    ));
                }
                ratios.push(r.a_weighted_norm / r.b_weighted_norm);
                let mu = 1.1 * eig.lambda1 * e + eig.lambda2_eps * e * e;
                match kernel_sweep(&eig.disc, mu, 16) {
                    Ok(blocks) => {
                        let nz: usize = blocks.iter().map(|b| b.near_zero).sum();
                        let gmax = blocks.iter().fold(0.0f64, |a, b| a.max(b.max_singular));
                        let gmin = blocks.iter().fold(f64::INFINITY, |a, b| a.min(b.min_singular));
                        info.push(format!(
                            "(eps={e:e}, kappa={k}, m={m}): transversality {:.3e}, perturbed min/max singular {:.2e}",
                            r.transversality,
                            gmin / gmax
                        ));
                        if nz != 0 {
                            failures.push(format!(
                                "(eps={e:e}, kappa={k}, m={m}) negative control: {nz} near-zero (min/max {:.2e})",
                                gmin / gmax
                            ));
                        }
                    }
                    Err(err) => failures.push(format!("negative control: {err}")),
                }
            }
            if ratios.len() == 2 {
                let s = slope(&EPS_PAIR, &ratios);
                info.push(format!("(kappa={k}, m={m}): ||a||/||b|| slope vs eps {s:.3}"));
                if (s - 1.0).abs() > 0.1 {
                    failures.push(format!("(kappa={k}, m={m}) ||a||/||b|| slope {s:.3}"));
                }
            }
        }
    }
    let mut v = if failures.is_empty() {
        Verdict::new(true, "one near-zero singular value in block m, transversality > 0, slopes 1 +- 0.1, controls clean".into())
    } else {
        Verdict::new(false, format!("{} problems: {}", failures.len(), failures.join("; ")))
    };
    v.info = info;
    v
}

fn certified(cache: &mut Cache) -> Vec<Arc<EigenSolution>> {
    let mut out = vec![];
    for k in CELLS_KAPPA {
        for m in MODES {
            for e in EPS_PAIR {
                if let Ok(s) = cache.get(e, k, m) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn label(e: &EigenSolution) -> String {
    format!("(eps={:e}, kappa={}, m={})", e.epsilon(), e.kappa(), e.m)
}

fn criterion6(cache: &mut Cache) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_adj: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let cells = certified(cache);
    if cells.is_empty() {
        return Verdict::new(false, "no certified cell".into());
    }
    for eig in &cells {
        let z = eig.disc.nodes().to_vec();
        let ops: Vec<ModeOperator> = (1..=16).map(|n| assemble_mode(n, eig.mu, &eig.disc).unwrap()).collect();
        let gf = |rng: &mut ChaCha8Rng| eig.disc.grid_fn(random_smooth(rng, &z)).unwrap();
        for _ in 0..1000 {
            let n = 1 + (rng.next_u32() % 16) as usize;
            let (u, v, f, g) = (gf(&mut rng), gf(&mut rng), gf(&mut rng), gf(&mut rng));
            let op = &ops[n - 1];
            let r = adjointness_residual(&u, &v, &f, &g, op).unwrap();
            let s = adjointness_scale(&u, &v, &f, &g, op).unwrap();
            worst_adj = worst_adj.max(r / s);
        }
        for _ in 0..100 {
            let n = loop {
                let n = 1 + (rng.next_u32() % 16) as usize;
                if n != eig.m {
                    break n;
                }
            };
            let f = gf(&mut rng);
            let inv = invert_resolvent_1d(&f, n, eig.m, eig.lambda1, &eig.disc).unwrap();
            let back = resolvent_forward(&inv, n, eig.lambda1, &eig.disc);
            let d = back.values().iter().zip(f.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            worst_inv = worst_inv.max(d / f.sup_norm());
        }
    }
    let pass = worst_adj <= 1e-9 && worst_inv <= 1e-10;
    Verdict::new(
        pass,
        format!(
            "adjointness {worst_adj:.1e} x scale (tol 1e-9, 1000 quadruples per cell), inversion round trip {worst_inv:.1e} (tol 1e-10, 100 per cell), {} cells",
            cells.len()
        ),
    )
}

fn criterion7(cache: &mut Cache) -> Verdict {
    let cells = certified(cache);
    if cells.is_empty() {
        return Verdict::new(false, "no certified cell".into());
    }
    let tol = SolverConfig::default().quad_tol;
    let mut failures = vec![];
    let mut info = vec![];
    let (mut min_b, mut min_sb, mut max_b0, mut max_def) = (f64::INFINITY, f64::INFINITY, 0.0f64, 0.0f64);
    for eig in &cells {
        match coercivity_probe(100, eig, 7) {
            Ok(st) => {
                info.push(format!(
                    "{}: min B ratio {:.3e}, min script-B ratio {:.3e}, script-B[b0,b0] {:.1e}, defect {:.1e}",
                    label(eig),
                    st.min_b_ratio,
                    st.min_script_b_ratio,
                    st.script_b_at_b0,
                    st.max_decomposition_defect
                ));
                min_b = min_b.min(st.min_b_ratio);
                min_sb = min_sb.min(st.min_script_b_ratio);
                max_b0 = max_b0.max(st.script_b_at_b0);
                max_def = max_def.max(st.max_decomposition_defect);
            }
            Err(e) => failures.push(format!("{}: {e}", label(eig))),
        }
    }
    let pass = failures.is_empty() && min_b > 0.0 && min_sb > 0.0 && max_b0 <= 1e-9 && max_def <= tol;
    let mut v = Verdict::new(
        pass,
        format!(
            "script-B[b0,b0] {max_b0:.1e} (tol 1e-9), min B ratio {min_b:.3e}, min script-B ratio {min_sb:.3e}, decomposition defect {max_def:.1e} (tol {tol:e}); {} cells{}",
            cells.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    );
    v.info = info;
    v
}

const SIGMAS: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

/// `(slope, ‖F[λ, 0]‖_sup)` of the branch residual.
fn branch(eig: &EigenSolution) -> Result<(f64, f64), String> {
    let grid = BandGrid::new(eig.disc.clone(), 16).map_err(|e| e.to_string())?;
    let fun = Functional::new(grid.clone()).map_err(|e| e.to_string())?;
    let mut res = vec![];
    for s in SIGMAS {
        let w = WaveField::new(eig.clone(), s, 16).map_err(|e| e.to_string())?;
        res.push(fun.evaluate(eig.mu, &w.f).map_err(|e| e.to_string())?.l2_norm());
    }
    let zero = fun.evaluate(eig.mu, &BandField::zeros(grid)).map_err(|e| e.to_string())?.sup_norm();
    Ok((slope(&SIGMAS, &res), zero))
}

fn criterion8(cache: &mut Cache) -> Verdict {
    let t = Instant::now();
    let mut v = match cache.get(1e-2, 0.1, 1).and_then(|e| branch(&e)) {
        Ok((s, z)) => {
            let secs = t.elapsed().as_secs_f64();
            Verdict::new(
                (s - 2.0).abs() <= 0.1 && z <= 1e-12 && secs < 120.0,
                format!("(1e-2, 0.1, 1): slope {s:.4} (2 +- 0.1), F[lambda,0] {z:.1e}, {secs:.1} s"),
            )
        }
        Err(e) => Verdict::new(false, format!("(eps=1e-2, kappa=0.1, m=1): {e}")),
    };
    for k in [0.0, 0.01] {
        match cache.get(1e-2, k, 1).and_then(|e| branch(&e)) {
            Ok((s, z)) => v.info.push(format!("extra (eps=1e-2, kappa={k}, m=1): slope {s:.4}, F[lambda,0] {z:.1e}")),
            Err(e) => v.info.push(format!("extra (eps=1e-2, kappa={k}, m=1): {e}")),
        }
    }
    v
}

fn criterion9(cache: &mut Cache) -> Verdict {
    let mut worst_lin: f64 = 0.0;
    let mut slopes = vec![];
    for k in [0.0, 0.01] {
        let eig = match cache.get(1e-2, k, 1) {
            Ok(e) => e,
            Err(e) => return Verdict::new(false, e),
        };
        let grid = BandGrid::new(eig.disc.clone(), 16).unwrap();
        let fun = Functional::new(grid.clone()).unwrap();
        let zero = BandField::zeros(grid.clone());
        let w = WaveField::new((*eig).clone(), 1e-2, 16).unwrap();
        let generic = BandField::from_fn(grid.clone(), |x, z, b| {
            1e-3 * ((2.0 * x).cos() * (1.0 + z * z) + (3.0 * x).sin() * z * b.orientation())
        });
        for h in [&w.h, &generic] {
            let g = fun.gateaux(eig.mu, &zero, h).unwrap();
            let l = physical_apply(eig.mu, h, 7).unwrap().0;
            let scale = l.sup_norm().max(h.sup_norm());
            worst_lin = worst_lin.max(g.axpy(-1.0, &l).unwrap().sup_norm() / scale);
        }
        let base = fun.evaluate(eig.mu, &w.f).unwrap();
        let d = fun.gateaux(eig.mu, &w.f, &generic).unwrap();
        let taus = [0.4, 0.2, 0.1, 0.05];
        let dev: Vec<f64> = taus
            .iter()
            .map(|&t| {
                let q = fun.evaluate(eig.mu, &w.f.axpy(t, &generic).unwrap()).unwrap();
                q.axpy(-1.0, &base).unwrap().scaled(1.0 / t).axpy(-1.0, &d).unwrap().l2_norm()
            })
            .collect();
        slopes.push(slope(&taus, &dev));
    }
    let tol = SolverConfig::default().quad_tol;
    let pass = worst_lin <= tol && slopes.iter().all(|s| (s - 1.0).abs() <= 0.1);
    Verdict::new(
        pass,
        format!(
            "Gateaux at f=0 vs assembled operator {worst_lin:.1e} relative (tol {tol:e}); finite-difference slopes {slopes:.3?} (1 +- 0.1); (eps=1e-2, kappa in {{0, 0.01}}, m=1)"
        ),
    )
}

fn criterion10(cache: &mut Cache) -> Verdict {
    let mut failures = vec![];
    let mut info = vec![];
    let eps = [1e-2, 1e-3, 1e-4];
    let kappa = 0.01;
    let prime: Vec<f64> = eps
        .iter()
        .map(|&e| profile_prime_sq(&Profile::from_eps_kappa(e, kappa).unwrap()).unwrap())
        .collect();
    let s1 = slope(&eps, &prime);
    if (s1 - 1.0).abs() > 0.05 {
        failures.push(format!("int |w'|^2 slope {s1:.3}"));
    }
    let (mut ek, mut second) = (vec![], vec![]);
    for e in eps {
        for k in [0.04, 0.02, 0.01] {
            let (_, s) = profile_norm_squares(ProfileParams::new(e, k).unwrap()).unwrap();
            ek.push(e * k);
            second.push(s);
        }
    }
    let s2 = slope(&ek, &second);
    if (s2 + 1.0).abs() > 0.1 {
        failures.push(format!("int |w''|^2 slope {s2:.3}"));
    }
    let gamma = 0.5;
    let sigma = 0.3;
    let (mut interp, mut l2) = (vec![], vec![]);
    for e in eps {
        let r = cache
            .get(e, kappa, 1)
            .and_then(|eig| WaveField::new((*eig).clone(), sigma, 16).map_err(|x| x.to_string()))
            .and_then(|w| norm_report(&w, gamma).map_err(|x| x.to_string()));
        match r {
            Ok(r) => {
                info.push(format!(
                    "eps={e:e}: L2 {:.4e}, H1 {:.4e}, H2 {:.4e}, interpolated {:.4e}",
                    r.l2,
                    r.h1dot,
                    r.h2dot.unwrap_or(f64::NAN),
                    r.interpolated_bound.unwrap_or(f64::NAN)
                ));
                interp.push(r.interpolated_bound.unwrap_or(f64::NAN));
                l2.push(r.l2);
            }
            Err(x) => failures.push(format!("eps={e:e}: {x}")),
        }
    }
    let (s3, s4) = if interp.len() == 3 {
        (slope(&eps, &interp), slope(&eps, &l2))
    } else {
        (f64::NAN, f64::NAN)
    };
    if !((s3 - gamma / 2.0).abs() <= 0.05) {
        failures.push(format!("interpolated distance slope {s3:.3}"));
    }
    if !((s4 - 1.0).abs() <= 0.05) {
        failures.push(format!("L2 slope {s4:.3}"));
    }
    let small = cache
        .get(1e-12, kappa, 1)
        .and_then(|eig| WaveField::new((*eig).clone(), sigma, 16).map_err(|x| x.to_string()))
        .and_then(|w| {
            // the L2 part alone, as a cross-check of the report
            omega_sobolev(&w, 0).map_err(|x| x.to_string())?;
            norm_report(&w, gamma).map_err(|x| x.to_string())
        });
    let (dist, lambda) = match small {
        Ok(r) => (r.distance().unwrap_or(f64::NAN), r.lambda),
        Err(x) => {
            failures.push(format!("eps=1e-12: {x}"));
            (f64::NAN, f64::NAN)
        }
    };
    if !(dist < 1e-2 && (1.0..=1.1).contains(&lambda)) {
        failures.push(format!("distance {dist:.2e} at lambda {lambda}"));
    }
    let detail = format!(
        "slopes: |w'|^2 {s1:.3} (1 +- 0.05), |w''|^2 vs eps*kappa {s2:.3} (-1 +- 0.1), interpolated {s3:.3} ({} +- 0.05), L2 {s4:.3} (1 +- 0.05); distance {dist:.2e} < 1e-2 at eps=1e-12 with lambda-1 = {:.1e}",
        gamma / 2.0,
        lambda - 1.0
    );
    let mut v = if failures.is_empty() {
        Verdict::new(true, detail)
    } else {
        Verdict::new(false, format!("{detail}; problems: {}", failures.join("; ")))
    };
    v.info = info;
    v
}

fn main() -> ExitCode {
    let mut cache = Cache::default();
    let start = Instant::now();
    let verdicts = [
        criterion1(),
        criterion2(),
        criterion3(&mut cache),
        criterion4(&mut cache),
        criterion5(&mut cache),
        criterion6(&mut cache),
        criterion7(&mut cache),
        criterion8(&mut cache),
        criterion9(&mut cache),
        criterion10(&mut cache),
    ];
    let mut passed = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {}", i + 1, v.detail);
        for line in &v.info {
            println!("    {line}");
        }
        passed += v.pass as usize;
    }
    println!(
        "acceptance: {passed}/{} criteria pass ({:.1} s)",
        verdicts.len(),
        start.elapsed().as_secs_f64()
    );
    if passed == verdicts.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
