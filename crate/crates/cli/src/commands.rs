use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use couette_core::bifurcate::{certificate, solve_eigen, solve_lambda1, CertificateReport, EigenSolution, NEAR_ZERO_REL};
use couette_core::fit::loglog_slope;
use couette_core::linop::{assemble_mode, svd_spectrum, GridFn};
use couette_core::norms::{norm_report, profile_prime_sq, profile_second_sq, NormReport};
use couette_core::profile::{Profile, ProfileParams};
use couette_core::range_solver::{
    adjointness_residual, adjointness_scale, coercivity_probe, invert_resolvent_1d, random_smooth, resolvent_forward,
    solvability, solvability_scale, solve_mode_m, solve_offmode, WeightedInnerProduct,
};
use couette_core::strip_kernel::identity_suite;
use couette_core::wave::{Band, Functional, WaveField};
use couette_core::Error as CoreError;

use crate::config::{worker_count, RunConfig};
use crate::output::{json_f64, Cell, Report, Table};

fn tolerances(cfg: &RunConfig) -> Value {
    json!({
        "fixed_point": cfg.tol_fixedpoint,
        "quadrature": cfg.tol_quad,
        "lambda1": cfg.tol_lambda1,
        "near_zero_rel": NEAR_ZERO_REL,
    })
}

fn params_json(p: &ProfileParams) -> Value {
    json!({ "epsilon": p.epsilon, "kappa": p.kappa })
}

fn finish(mut doc: Map<String, Value>, cfg: &RunConfig, table: Option<Table>) -> Report {
    doc.insert("tolerances".into(), tolerances(cfg));
    Report {
        json: Value::Object(doc),
        table,
    }
}

fn eigen(cfg: &RunConfig) -> Result<EigenSolution> {
    solve_eigen(cfg.m, cfg.params()?, &cfg.solver())
        .with_context(|| format!("eigen solve at epsilon = {}, kappa = {}, m = {}", cfg.epsilon, cfg.kappa, cfg.m))
}

pub fn profile_table(cfg: &RunConfig) -> Result<Report> {
    let p = Profile::new(cfg.params()?);
    let e = p.epsilon();
    let mut t = Table::new(&[
        "z", "y_upper", "psi_prime", "phi", "phi_prime", "phi_second", "big_phi", "varpi", "varpi_prime", "omega",
    ]);
    let n = cfg.points;
    for k in 0..n {
        let z = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
        let y = 1.0 + e * z;
        t.push(vec![
            z.into(),
            y.into(),
            p.psi_prime(z).into(),
            p.phi(z).into(),
            p.phi_prime(z).into(),
            p.phi_second(z).into(),
            p.big_phi(z).into(),
            p.varpi(y).into(),
            p.varpi_prime(y).into(),
            p.omega_primitive(y).into(),
        ]);
    }
    let mut doc = Report::document("profile-table");
    doc.insert("params".into(), params_json(p.params()));
    doc.insert("profile_prime_sq".into(), json_f64(profile_prime_sq(&p)?));
    let second = match profile_second_sq(&p) {
        Ok(v) => json_f64(v),
        Err(CoreError::Distributional(_)) => Value::from("distributional"),
        Err(e) => return Err(e.into()),
    };
    doc.insert("profile_second_sq".into(), second);
    doc.insert("rows".into(), t.to_json());
    Ok(finish(doc, cfg, Some(t)))
}

pub fn lambda1(cfg: &RunConfig) -> Result<Report> {
    let p = Profile::new(cfg.params()?);
    let l = solve_lambda1(cfg.m, &p, cfg.tol_lambda1)?;
    let mut doc = Report::document("lambda1");
    doc.insert("m".into(), cfg.m.into());
    doc.insert("kappa".into(), cfg.kappa.into());
    doc.insert("lambda1".into(), json_f64(l));
    if cfg.kappa == 0.0 {
        let exact = 2.0 / ((4.0 * cfg.m as f64).exp() - 1.0);
        doc.insert("closed_form".into(), json_f64(exact));
        doc.insert("closed_form_error".into(), json_f64((l - exact).abs()));
    }
    Ok(finish(doc, cfg, None))
}

fn certificate_json(c: &CertificateReport) -> Value {
    json!({
        "pass": c.pass(),
        "kernel_ok": c.kernel_ok,
        "near_zero_total": c.near_zero_total,
        "transversality": json_f64(c.transversality),
        "transversality_ok": c.transversality_ok,
        "a_weighted_norm": json_f64(c.a_weighted_norm),
        "b_weighted_norm": json_f64(c.b_weighted_norm),
        "residual_ok": c.residual_ok,
        "blocks": c.blocks.iter().map(|b| json!({
            "n": b.n,
            "min_singular": json_f64(b.min_singular),
            "max_singular": json_f64(b.max_singular),
            "near_zero": b.near_zero,
        })).collect::<Vec<_>>(),
    })
}

/// Runs the solve and certificate; fails after writing when a check fails.
pub fn bifurcate(cfg: &RunConfig) -> Result<(Report, Option<String>)> {
    let eig = eigen(cfg)?;
    let cert = certificate(&eig, cfg.modes)?;
    let block = cert.blocks.iter().find(|b| b.n == eig.m).expect("block m is swept");
    let mut t = Table::new(&["z", "weight", "a", "b", "b0", "a2_eps", "b1_eps"]);
    let d = &eig.disc;
    for i in 0..d.len() {
        t.push(vec![
            d.nodes()[i].into(),
            d.weights()[i].into(),
            eig.a.values()[i].into(),
            eig.b.values()[i].into(),
            eig.b0.values()[i].into(),
            eig.a2_eps.values()[i].into(),
            eig.b1_eps.values()[i].into(),
        ]);
    }
    let r = eig.residual_report;
    let mut doc = Report::document("bifurcate");
    doc.insert("params".into(), params_json(&eig.params));
    doc.insert("m".into(), eig.m.into());
    doc.insert("lambda".into(), json_f64(eig.lambda));
    doc.insert("lambda_minus_one".into(), json_f64(eig.mu));
    doc.insert("lambda1".into(), json_f64(eig.lambda1));
    doc.insert("lambda1_exact".into(), json_f64(eig.lambda1_exact));
    doc.insert("lambda2_eps".into(), json_f64(eig.lambda2_eps));
    doc.insert("a1".into(), json_f64(eig.a1));
    doc.insert(
        "residuals".into(),
        json!({
            "t_plus_l2": json_f64(r.t_plus_l2),
            "t_minus_l2": json_f64(r.t_minus_l2),
            "solution_scale": json_f64(r.solution_scale),
            "relative": json_f64(r.relative),
        }),
    );
    doc.insert("iterations".into(), eig.iterations.into());
    doc.insert("contraction_factor".into(), json_f64(eig.contraction_factor));
    doc.insert("transversality".into(), json_f64(cert.transversality));
    doc.insert("kernel_svd_min".into(), json_f64(block.min_singular / block.max_singular));
    doc.insert("certificate".into(), certificate_json(&cert));
    doc.insert("nodes".into(), t.to_json());
    let failure = (!cert.pass()).then(|| {
        format!(
            "certification failed: kernel_ok = {}, transversality_ok = {}, residual_ok = {}",
            cert.kernel_ok, cert.transversality_ok, cert.residual_ok
        )
    });
    Ok((finish(doc, cfg, Some(t)), failure))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn range_check(cfg: &RunConfig) -> Result<(Report, Option<String>)> {
    let eig = eigen(cfg)?;
    let d = eig.disc.clone();
    let z = d.nodes().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gen = |rng: &mut ChaCha8Rng| GridFn::new(d.rule().clone(), random_smooth(rng, &z)).expect("node count");
    let ops = (1..=8).map(|n| assemble_mode(n, eig.mu, &d)).collect::<Result<Vec<_>, _>>()?;

    let mut adj: f64 = 0.0;
    for k in 0..cfg.samples {
        let op = &ops[k % 8];
        let (u, v, f, g) = (gen(&mut rng), gen(&mut rng), gen(&mut rng), gen(&mut rng));
        let r = adjointness_residual(&u, &v, &f, &g, op)?;
        adj = adj.max(r / adjointness_scale(&u, &v, &f, &g, op)?);
    }

    let mut inv: f64 = 0.0;
    for k in 0..cfg.samples {
        let n = (1..=9).filter(|n| *n != eig.m).nth(k % 8).expect("eight modes");
        let f = gen(&mut rng);
        let g = invert_resolvent_1d(&f, n, eig.m, eig.lambda1, &d)?;
        let back = resolvent_forward(&g, n, eig.lambda1, &d);
        inv = inv.max(max_abs_diff(back.values(), f.values()) / sup(f.values()));
    }

    let op = eig.mode_operator()?;
    let (u, v) = (gen(&mut rng), gen(&mut rng));
    let (tp, tm) = op.apply_t(&u, &v)?;
    let range_solv = solvability(&tp, &tm, &eig)?.abs() / solvability_scale(&tp, &tm, &eig);

    // kernel co-direction violates the condition
    let obstruction_raised = matches!(
        solve_mode_m(&eig.a.map(|x| -x), &eig.b, &eig, 1e-8),
        Err(CoreError::Obstruction { .. })
    );

    let mut offmode = Vec::new();
    let (us, vs) = (gen(&mut rng), gen(&mut rng));
    for n in (1..=4).filter(|n| *n != eig.m) {
        let op = &ops[n - 1];
        let (tp, tm) = op.apply_t(&us, &vs)?;
        let nf = -(n as f64);
        let s = solve_offmode(n, &tp.map(|x| nf * x), &tm.map(|x| nf * x), &eig, 1e-14, 500)?;
        let err = max_abs_diff(s.u.values(), us.values()).max(max_abs_diff(s.v.values(), vs.values()))
            / sup(us.values()).max(sup(vs.values()));
        offmode.push(json!({
            "n": n,
            "iterations": s.iterations,
            "recovery_error": json_f64(err),
            "residual": json_f64(s.residual),
            "gain": json_f64(s.gain),
        }));
    }

    // planted element of the complement of (−a, b)
    let ip = WeightedInnerProduct::new(&d);
    let (a, b) = (eig.a.values(), eig.b.values());
    let c = (-ip.inner(us.values(), a) + ip.inner(vs.values(), b)) / (ip.inner(a, a) + ip.inner(b, b));
    let up = us.zip_map(&eig.a, |x, y| x + c * y)?;
    let vp = vs.zip_map(&eig.b, |x, y| x - c * y)?;
    let (tp, tm) = op.apply_t(&up, &vp)?;
    let mf = -(eig.m as f64);
    let (su, sv) = solve_mode_m(&tp.map(|x| mf * x), &tm.map(|x| mf * x), &eig, 1e-8)?;
    let mode_m_err = max_abs_diff(su.values(), up.values()).max(max_abs_diff(sv.values(), vp.values()))
        / sup(up.values()).max(sup(vp.values()));

    let co = coercivity_probe(cfg.samples, &eig, cfg.seed)?;
    let checks = [
        ("adjointness", adj <= 1e-9),
        ("inversion", inv <= 1e-10),
        ("range_solvability", range_solv <= 1e-8),
        ("obstruction", obstruction_raised),
        ("mode_m_recovery", mode_m_err <= 1e-7),
        ("coercive_b", co.min_b_ratio > 0.0),
        ("coercive_script_b", co.min_script_b_ratio > 0.0),
        ("script_b_at_b0", co.script_b_at_b0 <= 1e-9),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let mut doc = Report::document("range-check");
    doc.insert("params".into(), params_json(&eig.params));
    doc.insert("m".into(), eig.m.into());
    doc.insert("seed".into(), cfg.seed.into());
    doc.insert("samples".into(), cfg.samples.into());
    doc.insert("adjointness_max_relative".into(), json_f64(adj));
    doc.insert("inversion_max_relative".into(), json_f64(inv));
    doc.insert("range_solvability_relative".into(), json_f64(range_solv));
    doc.insert("obstruction_raised".into(), obstruction_raised.into());
    doc.insert("offmode".into(), Value::Array(offmode));
    doc.insert("mode_m_recovery_error".into(), json_f64(mode_m_err));
    doc.insert(
        "coercivity".into(),
        json!({
            "min_b_ratio": json_f64(co.min_b_ratio),
            "min_script_b_ratio": json_f64(co.min_script_b_ratio),
            "script_b_at_b0": json_f64(co.script_b_at_b0),
            "max_decomposition_defect": json_f64(co.max_decomposition_defect),
        }),
    );
    doc.insert(
        "checks".into(),
        Value::Object(checks.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect()),
    );
    let failure = (!failed.is_empty()).then(|| format!("range checks failed: {}", failed.join(", ")));
    Ok((finish(doc, cfg, None), failure))
}

pub fn svd(cfg: &RunConfig) -> Result<Report> {
    let eig = eigen(cfg)?;
    let spec = svd_spectrum(&eig.disc, eig.mu, cfg.modes)?;
    let mut t = Table::new(&["n", "index", "singular_value"]);
    let mut modes = Vec::new();
    for s in &spec {
        for (i, v) in s.singular_values.iter().enumerate() {
            t.push(vec![s.n.into(), i.into(), (*v).into()]);
        }
        modes.push(json!({
            "n": s.n,
            "near_zero": s.near_zero(NEAR_ZERO_REL),
            "singular_values": s.singular_values.iter().map(|v| json_f64(*v)).collect::<Vec<_>>(),
        }));
    }
    let mut doc = Report::document("svd-spectrum");
    doc.insert("params".into(), params_json(&eig.params));
    doc.insert("m".into(), eig.m.into());
    doc.insert("lambda".into(), json_f64(eig.lambda));
    doc.insert("modes".into(), Value::Array(modes));
    Ok(finish(doc, cfg, Some(t)))
}

/// Band-grid samples; the JSON form adds level-curve polylines.
pub fn wave_export(cfg: &RunConfig) -> Result<Report> {
    let eig = eigen(cfg)?;
    let wave = WaveField::new(eig, cfg.sigma, cfg.nx)?;
    let g = wave.grid().clone();
    let p = wave.eig.disc.profile().clone();
    let mut t = Table::new(&["band", "x", "y", "x2", "f_sigma", "omega"]);
    for band in [Band::Upper, Band::Lower] {
        let name = if band == Band::Upper { "upper" } else { "lower" };
        for i in 0..g.nx() {
            for j in 0..g.nz() {
                let y = g.y(band, j);
                let f = wave.f.get(band, i, j);
                t.push(vec![name.into(), g.x(i).into(), y.into(), (y + f).into(), f.into(), p.varpi(y).into()]);
            }
        }
    }
    let samples = 4 * g.nx() + 1;
    let mut curves = Vec::new();
    for band in [Band::Upper, Band::Lower] {
        for z in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let y = band.orientation() * (1.0 + g.epsilon() * z);
            let pts: Vec<Value> = (0..samples)
                .map(|k| {
                    let x = 2.0 * std::f64::consts::PI * k as f64 / (samples - 1) as f64;
                    json!([json_f64(x), json_f64(y + wave.f.eval(band, x, z))])
                })
                .collect();
            curves.push(json!({ "y": json_f64(y), "omega": json_f64(p.varpi(y)), "points": pts }));
        }
    }
    let mut doc = Report::document("wave-export");
    doc.insert("params".into(), params_json(p.params()));
    doc.insert("m".into(), wave.eig.m.into());
    doc.insert("sigma".into(), cfg.sigma.into());
    doc.insert("lambda".into(), json_f64(wave.eig.lambda));
    doc.insert("h_scale".into(), json_f64(wave.h_scale));
    doc.insert("min_jacobian".into(), json_f64(wave.min_jacobian()));
    doc.insert("level_curves".into(), Value::Array(curves));
    doc.insert("samples".into(), t.to_json());
    Ok(finish(doc, cfg, Some(t)))
}

pub fn residual(cfg: &RunConfig) -> Result<Report> {
    let eig = eigen(cfg)?;
    let base = WaveField::new(eig.clone(), 0.0, cfg.nx)?;
    let fun = Functional::new(base.grid().clone())?;
    let f0 = fun.evaluate(eig.mu, &base.f)?.sup_norm();
    let mut t = Table::new(&["sigma", "residual_l2", "residual_sup"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &s in &cfg.sigmas {
        let w = WaveField::new(eig.clone(), s, cfg.nx)?;
        let r = fun.evaluate(eig.mu, &w.f)?;
        t.push(vec![s.into(), r.l2_norm().into(), r.sup_norm().into()]);
        xs.push(s);
        ys.push(r.l2_norm());
    }
    let mut doc = Report::document("residual");
    doc.insert("params".into(), params_json(&eig.params));
    doc.insert("m".into(), eig.m.into());
    doc.insert("nx".into(), cfg.nx.into());
    doc.insert("lambda".into(), json_f64(eig.lambda));
    doc.insert("trivial_residual_sup".into(), json_f64(f0));
    doc.insert("slope".into(), loglog_slope(&xs, &ys).map(json_f64).unwrap_or(Value::Null));
    doc.insert("rows".into(), t.to_json());
    Ok(finish(doc, cfg, Some(t)))
}

fn norm_json(r: &NormReport) -> Value {
    let opt = |v: Option<f64>| v.map(json_f64).unwrap_or(Value::from("distributional"));
    json!({
        "params": params_json(&r.params),
        "sigma": r.sigma,
        "gamma": r.gamma,
        "lambda": json_f64(r.lambda),
        "l2": json_f64(r.l2),
        "h1dot": json_f64(r.h1dot),
        "h2dot": opt(r.h2dot),
        "interpolated_bound": opt(r.interpolated_bound),
        "distance": opt(r.distance()),
        "profile_prime_sq": json_f64(r.profile_prime_sq),
        "profile_second_sq": opt(r.profile_second_sq),
        "h2dot_profile_ratio": opt(r.h2dot_profile_ratio),
    })
}

pub fn norms(cfg: &RunConfig) -> Result<Report> {
    let eig = eigen(cfg)?;
    let m = eig.m;
    let wave = WaveField::new(eig, cfg.sigma, cfg.nx)?;
    let r = norm_report(&wave, cfg.gamma)?;
    let mut doc = Report::document("norms");
    doc.insert("m".into(), m.into());
    doc.insert("report".into(), norm_json(&r));
    Ok(finish(doc, cfg, None))
}

const SWEEP_HEADER: [&str; 14] = [
    "epsilon",
    "kappa",
    "m",
    "sigma",
    "gamma",
    "lambda",
    "l2",
    "h1dot",
    "h2dot",
    "interpolated_bound",
    "profile_prime_sq",
    "profile_second_sq",
    "iterations",
    "status",
];

fn sweep_rows(cfg: &RunConfig, epsilon: f64, kappa: f64) -> Vec<Vec<Cell>> {
    let nan = f64::NAN;
    let fail = |s: f64, msg: String| {
        let mut r: Vec<Cell> = vec![epsilon.into(), kappa.into(), cfg.m.into(), s.into(), cfg.gamma.into()];
        r.extend((0..7).map(|_| Cell::F(nan)));
        r.push(0usize.into());
        r.push(msg.into());
        r
    };
    let eig = match ProfileParams::new(epsilon, kappa)
        .and_then(|p| solve_eigen(cfg.m, p, &cfg.solver()))
    {
        Ok(e) => e,
        Err(e) => return cfg.sigmas.iter().map(|s| fail(*s, e.to_string())).collect(),
    };
    cfg.sigmas
        .iter()
        .map(|&s| {
            let r = WaveField::new(eig.clone(), s, cfg.nx).and_then(|w| norm_report(&w, cfg.gamma));
            match r {
                Ok(r) => vec![
                    epsilon.into(),
                    kappa.into(),
                    cfg.m.into(),
                    s.into(),
                    cfg.gamma.into(),
                    r.lambda.into(),
                    r.l2.into(),
                    r.h1dot.into(),
                    r.h2dot.unwrap_or(nan).into(),
                    r.interpolated_bound.unwrap_or(nan).into(),
                    r.profile_prime_sq.into(),
                    r.profile_second_sq.unwrap_or(nan).into(),
                    eig.iterations.into(),
                    "ok".into(),
                ],
                Err(e) => fail(s, e.to_string()),
            }
        })
        .collect()
}

/// Fans `(ε, κ)` pairs out to a worker pool; rows keep the input order.
pub fn sweep(cfg: &RunConfig) -> Result<Report> {
    let pairs: Vec<(f64, f64)> = cfg
        .epsilons
        .iter()
        .flat_map(|e| cfg.kappas.iter().map(move |k| (*e, *k)))
        .collect();
    if pairs.is_empty() || cfg.sigmas.is_empty() {
        bail!("sweep needs at least one epsilon, kappa and sigma");
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<usize, Vec<Vec<Cell>>>> = Mutex::new(BTreeMap::new());
    let workers = worker_count().min(pairs.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(e, kap)) = pairs.get(k) else { break };
                let rows = sweep_rows(cfg, e, kap);
                results.lock().expect("no poisoned workers").insert(k, rows);
            });
        }
    });
    let mut t = Table::new(&SWEEP_HEADER);
    for rows in results.into_inner().expect("no poisoned workers").into_values() {
        for r in rows {
            t.push(r);
        }
    }
    let mut doc = Report::document("sweep");
    doc.insert("m".into(), cfg.m.into());
    doc.insert("rows".into(), t.to_json());
    Ok(finish(doc, cfg, Some(t)))
}

pub fn validate_identities(cfg: &RunConfig) -> Result<(Report, Option<String>)> {
    let checks = identity_suite()?;
    let mut t = Table::new(&["identity", "max_residual", "tolerance", "pass"]);
    for c in &checks {
        t.push(vec![
            c.identity.clone().into(),
            c.max_residual.into(),
            c.tolerance.into(),
            (if c.pass { "true" } else { "false" }).into(),
        ]);
    }
    let all = checks.iter().all(|c| c.pass);
    let mut doc = Report::document("validate-identities");
    doc.insert(
        "checks".into(),
        Value::Array(
            checks
                .iter()
                .map(|c| {
                    json!({
                        "identity": c.identity,
                        "max_residual": json_f64(c.max_residual),
                        "tolerance": json_f64(c.tolerance),
                        "pass": c.pass,
                    })
                })
                .collect(),
        ),
    );
    doc.insert("all_pass".into(), all.into());
    let failure = (!all).then(|| "identity checks failed".to_string());
    Ok((finish(doc, cfg, Some(t)), failure))
}
