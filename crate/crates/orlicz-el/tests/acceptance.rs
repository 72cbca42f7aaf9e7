//! Acceptance suite: one test per shipped guarantee, each printing a
//! pass/fail line with the measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orlicz_el::construct::{
    adaptive_simpson, build_psi_star, find_violation_sequence, integrate_psi_star,
    phi_star_from_indices,
};
use orlicz_el::hypotheses::{
    check_a5, check_a6, check_lower_bound, A6Options, StructureProbe,
};
use orlicz_el::nfunction::{
    builtin, conjugate, mo_indices, Family, IndexProbeConfig, NFunction, ScalarFn,
};
use orlicz_el::orlicz::{coercivity_sweep, GridFunction};
use orlicz_el::probe::{log_spaced, slope_fit, ProbeConfig};
use orlicz_el::problem::SolverOptions;
use orlicz_el::registry::{self, Instance};
use orlicz_el::solver::{action_gradient, action_value, minimize, Init};
use orlicz_el::sweeps::{amemiya_sweep, holder_sweep, sobolev_sweep, young_sweep, SweepOptions};

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} ({detail})");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Index recovery on the exponential family and its conjugate.
#[test]
fn criterion_1_index_recovery() {
    let start = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for n in [2u32, 3] {
        let t0 = Instant::now();
        let phi = builtin(Family::ExpFamily(n)).unwrap();
        let est = mo_indices(&phi, &IndexProbeConfig::default()).unwrap();
        let alpha_ok = (est.alpha - n as f64).abs() <= 0.1;
        let psi = conjugate(&phi, 40.0, 1e-12).unwrap();
        let est_c = mo_indices(&psi, &IndexProbeConfig::default()).unwrap();
        let beta_expect = n as f64 / (n as f64 - 1.0);
        let beta_ok = (est_c.beta - beta_expect).abs() <= 0.1;
        let fast = t0.elapsed().as_secs_f64() < 5.0;
        detail.push_str(&format!(
            "n={n}: alpha={:.4}, beta_conj={:.4} (want {beta_expect:.4}), {:.2}s; ",
            est.alpha,
            est_c.beta,
            t0.elapsed().as_secs_f64()
        ));
        pass = pass && alpha_ok && beta_ok && fast;
    }
    let _ = start;
    report(1, pass, detail.trim_end());
}

/// Index complementarity `1/alpha_Phi + 1/beta_Psi = 1` across families.
#[test]
fn criterion_2_index_complementarity() {
    let mut detail = String::new();
    let mut pass = true;
    let cases: Vec<(String, NFunction)> = vec![
        ("power(1.5)".into(), builtin(Family::Power(1.5)).unwrap()),
        ("power(2)".into(), builtin(Family::Power(2.0)).unwrap()),
        ("power(3)".into(), builtin(Family::Power(3.0)).unwrap()),
        ("exp_family(2)".into(), builtin(Family::ExpFamily(2)).unwrap()),
    ];
    for (name, phi) in cases {
        let alpha = mo_indices(&phi, &IndexProbeConfig::default()).unwrap().alpha;
        let psi = conjugate(&phi, 40.0, 1e-12).unwrap();
        let beta = mo_indices(&psi, &IndexProbeConfig::default()).unwrap().beta;
        let defect = (1.0 / alpha + 1.0 / beta - 1.0).abs();
        detail.push_str(&format!("{name}: defect={defect:.4}; "));
        pass = pass && defect <= 0.05;
    }
    report(2, pass, detail.trim_end());
}

/// Inequality sweeps: no violations over 1e4 seeded samples each.
#[test]
fn criterion_3_inequality_sweeps() {
    let start = Instant::now();
    let phi = builtin(Family::ExpFamily(2)).unwrap();
    let opts = SweepOptions { samples: 10_000, seed: 0, ..Default::default() };
    let young = young_sweep(&phi, &opts).unwrap();
    let holder = holder_sweep(&phi, &opts).unwrap();
    let (sob, wir) = sobolev_sweep(&phi, &opts, &[0.5, 1.0, 2.0]).unwrap();
    let amemiya = amemiya_sweep(&phi, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let total =
        young.violations + holder.violations + sob.violations + wir.violations + amemiya.violations;
    let pass = total == 0 && elapsed < 60.0;
    report(
        3,
        pass,
        &format!(
            "violations: young={} holder={} sobolev={} wirtinger={} amemiya={}; {:.1}s",
            young.violations, holder.violations, sob.violations, wir.violations,
            amemiya.violations, elapsed
        ),
    );
}

/// The doubling regularization on the crafted derivative exp(-1/x).
#[test]
fn criterion_4_regularization_construction() {
    let psi: ScalarFn = Arc::new(|x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 });
    let seq = find_violation_sequence(&*psi, 5, 1.0).unwrap();
    let pw = build_psi_star(Arc::clone(&psi), &seq).unwrap();

    // (1) exact halving at every violation point
    let mut halving_exact = true;
    for &x_n in &seq {
        let lhs = 2.0 * pw.eval(x_n);
        let rhs = pw.eval(2.0 * x_n);
        if (lhs - rhs).abs() > 1e-12 * rhs {
            halving_exact = false;
        }
    }

    // domination on 1e3 probes per constructed segment
    let mut dominated = true;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut segment_edges: Vec<f64> = pw.breakpoints().to_vec();
    segment_edges.push(pw.truncation_point());
    segment_edges.insert(0, 4.0 * seq[0]);
    for w in segment_edges.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        for _ in 0..1000 {
            let x = lo + (hi - lo) * rng.random::<f64>();
            if pw.eval(x) < psi(x) {
                dominated = false;
            }
        }
    }

    // doubling ratio of the regularized derivative
    let mut ratio_ok = true;
    let mut worst_ratio = 0.0f64;
    for x in log_spaced(1e-8, seq[0], 4000) {
        let ratio = pw.eval(2.0 * x) / pw.eval(x);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 4.0 + 1e-9 {
            ratio_ok = false;
        }
    }

    // the primitives differ by the fixed excess mass above 2 x1
    let star = integrate_psi_star(&pw);
    let oracle = |x: f64| adaptive_simpson(&|t| psi(t), 0.0, x, 1e-12, 48);
    let delta = adaptive_simpson(&|t| pw.eval(t) - psi(t), 0.0, 2.0 * seq[0], 1e-11, 48);
    let mut offset_ok = true;
    for &x in &[2.0 * seq[0], 2.0, 5.0, 9.0] {
        let diff = star.eval(x) - oracle(x);
        if (diff - delta).abs() > 1e-6 * delta.max(1e-12) {
            offset_ok = false;
        }
    }

    let pass = seq.len() == 5 && halving_exact && dominated && ratio_ok && offset_ok;
    report(
        4,
        pass,
        &format!(
            "depth={} halving_exact={halving_exact} dominated={dominated} worst_ratio={worst_ratio:.6} offset_ok={offset_ok}",
            seq.len()
        ),
    );
}

/// The power minorant and the modular-coercivity sweeps.
#[test]
fn criterion_5_minorant_and_coercivity() {
    // minorant on the order-3 exponential family, checked on fresh probes
    let phi = builtin(Family::ExpFamily(3)).unwrap();
    let (k, star) = phi_star_from_indices(&phi, 2.0, &ProbeConfig::default()).unwrap();
    let mut minorant_ok = k > 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10_000 {
        let r = 10f64.powf(rng.random_range(0.0..8.0));
        let s = 10f64.powf(rng.random_range(-8.0..8.0));
        let lhs = phi.log_eval_or(r * s).unwrap();
        let rhs = star.log_eval_or(r).unwrap() + phi.log_eval_or(s).unwrap();
        if lhs < rhs - 1e-9 {
            minorant_ok = false;
        }
    }

    let threshold = (1e3f64).ln();
    let u0 = GridFunction::constant(1.0, 32, &[1.0]);
    let mut detail = format!("K={k:.4e} minorant_ok={minorant_ok}; ");
    let mut sweeps_ok = true;

    // exponential modular against a power gauge
    let phi_a = builtin(Family::ExpFamily(2)).unwrap();
    let gauge_a = builtin(Family::Power(1.5)).unwrap();
    let scales_a: Vec<f64> = (0..=15).map(|j| (2f64).powi(j)).collect();
    for k_mult in [0.5, 1.0, 2.0] {
        let sweep = coercivity_sweep(&phi_a, &gauge_a, &u0, k_mult, &scales_a).unwrap();
        let monotone = sweep.eventually_monotone_from().is_some();
        let top = sweep.final_log_ratio();
        sweeps_ok = sweeps_ok && monotone && top > threshold;
        detail.push_str(&format!("exp2/pow1.5 k={k_mult}: top_log={top:.1}; "));
    }

    // quadratic modular against the log-perturbed gauge (slow divergence:
    // the scaling family must reach 2^250 before the ratio clears 1e3)
    let phi_b = builtin(Family::Power(2.0)).unwrap();
    let gauge_b = builtin(Family::LogPerturbed(2)).unwrap();
    let scales_b: Vec<f64> = (0..=25).map(|j| (2f64).powi(10 * j)).collect();
    for k_mult in [0.5, 1.0, 2.0] {
        let sweep = coercivity_sweep(&phi_b, &gauge_b, &u0, k_mult, &scales_b).unwrap();
        let monotone = sweep.eventually_monotone_from().is_some();
        let top = sweep.final_log_ratio();
        sweeps_ok = sweeps_ok && monotone && top > threshold;
        detail.push_str(&format!("pow2/logp2 k={k_mult}: top_log={top:.1}; "));
    }

    report(5, minorant_ok && sweeps_ok, detail.trim_end());
}

/// Quadratic tracking instance: analytic minimizer and mesh convergence.
#[test]
fn criterion_6_quadratic_solver() {
    let start = Instant::now();
    let om = 2.0 * std::f64::consts::PI;
    let amp = registry::tracking_amplitude(1.0);
    let solve_at = |n: usize| -> f64 {
        let problem = registry::build_problem(
            Instance::QuadraticTracking,
            1.0,
            1,
            n,
            SolverOptions { gradient_tolerance: 1e-9, ..Default::default() },
            None,
        );
        let result = minimize(&problem, Init::MeanSearch { radius: 1.0 }).unwrap();
        let mut sup = 0.0f64;
        for j in 0..n {
            let t = j as f64 / n as f64;
            sup = sup.max((result.minimizer.values()[j] - amp * (om * t).sin()).abs());
        }
        sup
    };
    let meshes = [64usize, 128, 256, 512];
    let errors: Vec<f64> = meshes.iter().map(|&n| solve_at(n)).collect();
    let sup_256 = errors[2];
    let xs: Vec<f64> = meshes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (slope, _) = slope_fit(&xs, &ys);
    let order = -slope;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = sup_256 <= 1e-4 && order >= 1.8 && elapsed < 30.0;
    report(
        6,
        pass,
        &format!("sup_err(256)={sup_256:.3e} order={order:.2} errors={errors:?} {elapsed:.1}s"),
    );
}

/// Exponential-growth instance: hypothesis chain and convergence to zero.
#[test]
fn criterion_7_exponential_instance() {
    let start = Instant::now();
    let sigma = 1.5;
    let (p0, p1) = (1.6, 1.8);
    // the sublinearity/coercivity rule: p0 - 1 < sigma < p0 and
    // p1 > sigma / (sigma - p0 + 1)
    assert!(p0 - 1.0 < sigma && sigma < p0 && p1 > sigma / (sigma - p0 + 1.0));

    let instance = Instance::ExpCoshSublinear { sigma };
    let lag = registry::lagrangian(instance, 1.0);
    let pot = registry::potential(instance, 1.0).unwrap();
    let phi = registry::default_phi(instance);
    let chain = registry::chain_from_exponents(p0, p1);
    let grid = GridFunction::zeros(1.0, 64, 1);
    let probe = StructureProbe::default();

    let a4 = check_lower_bound(&lag, &phi, &pot, &grid, &probe).unwrap();
    let b1 = GridFunction::from_scalar_fn(1.0, 64, |t| {
        sigma * (1.0 + (2.0 * std::f64::consts::PI * t).sin())
    });
    let a5 = check_a5(&pot, &b1, &b1, &chain.phi0, &probe).unwrap();
    let radii = log_spaced(1.0, 1e15, 16);
    let a6 = check_a6(&pot, &chain.phi0, &chain.psi1, 1.0, &radii, &A6Options::default()).unwrap();

    // The gradient tolerance respects the f64 decrease-visibility floor of
    // this action scale; the acceptance thresholds below stay at 1e-3 (sup)
    // and 1e-6 (residual) regardless.
    let problem = registry::build_problem(
        instance,
        1.0,
        1,
        256,
        SolverOptions { gradient_tolerance: 2e-7, ..Default::default() },
        Some(chain),
    );
    let mut solves_ok = true;
    let mut detail = format!(
        "A4={} A5={} A6={} (final ratio {:.1}); ",
        a4.pass,
        a5.pass,
        a6.pass,
        a6.min_ratio.last().unwrap()
    );
    for (name, init) in [
        ("u=0", Init::Constant(vec![0.0])),
        ("u=10", Init::Constant(vec![10.0])),
    ] {
        match minimize(&problem, init) {
            Ok(result) => {
                let sup = result.minimizer.sup_norm();
                let ok = result.converged && sup <= 1e-3 && result.el_residual_max <= 1e-6;
                detail.push_str(&format!(
                    "{name}: sup={sup:.2e} resid={:.2e} iters={}; ",
                    result.el_residual_max, result.iterations
                ));
                solves_ok = solves_ok && ok;
            }
            Err(e) => {
                detail.push_str(&format!("{name}: {e}; "));
                solves_ok = false;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    detail.push_str(&format!("{elapsed:.1}s"));
    let pass = a4.pass && a5.pass && a6.pass && solves_ok && elapsed < 60.0;
    report(7, pass, &detail);
}

/// Exact gradients against central finite differences, per shipped family.
#[test]
fn criterion_8_gradient_consistency() {
    let mut pass = true;
    let mut worst_overall = 0.0f64;
    for instance in [Instance::QuadraticTracking, Instance::ExpCoshSublinear { sigma: 1.5 }] {
        let problem = registry::build_problem(
            instance,
            1.0,
            1,
            32,
            SolverOptions::default(),
            None,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let mean = rng.random::<f64>() - 0.5;
            let a = 0.4 * (rng.random::<f64>() - 0.5);
            let b = 0.4 * (rng.random::<f64>() - 0.5);
            let u = GridFunction::from_scalar_fn(1.0, 32, |t| {
                let w = 2.0 * std::f64::consts::PI * t;
                mean + a * w.sin() + b * (2.0 * w).cos()
            });
            let g = action_gradient(&problem, &u).unwrap();
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for idx in 0..32 {
                let h = 1e-6 * (1.0 + u.values()[idx].abs());
                let mut vp = u.values().to_vec();
                vp[idx] += h;
                let mut vm = u.values().to_vec();
                vm[idx] -= h;
                let up = GridFunction::new(1.0, 32, 1, vp).unwrap();
                let um = GridFunction::new(1.0, 32, 1, vm).unwrap();
                let fd = (action_value(&problem, &up) - action_value(&problem, &um)) / (2.0 * h);
                let diff = fd - g.values()[idx];
                num += diff * diff;
                den += fd * fd;
            }
            let rel = (num / den.max(1e-300)).sqrt();
            worst_overall = worst_overall.max(rel);
            if rel > 1e-5 {
                pass = false;
            }
        }
    }
    report(8, pass, &format!("worst relative gradient mismatch {worst_overall:.2e}"));
}

/// The coercivity verdict matches the sign of the ratio exponent
/// `sigma - (p0 - 1) q1` across a 5x5 exponent grid.
#[test]
fn criterion_9_coercivity_sign_grid() {
    let sigma = 1.5;
    let pot = orlicz_el::problem::Potential::new(
        "sigma",
        move |_t, x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(sigma),
        move |_t, x: &[f64]| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|&v| sigma * r.powf(sigma - 2.0) * v).collect()
            }
        },
    );
    let radii = log_spaced(1e2, 1e40, 20);
    let opts = A6Options::default();
    let mut pass = true;
    let mut mismatches = String::new();
    for &p0 in &[1.2, 1.4, 1.8, 2.2, 2.6] {
        let phi0 = builtin(Family::Power(p0)).unwrap();
        for &p1 in &[1.5, 2.0, 3.0, 4.0, 8.0] {
            let q1 = p1 / (p1 - 1.0);
            let exponent = sigma - (p0 - 1.0) * q1;
            let psi1 = conjugate(&builtin(Family::Power(p1)).unwrap(), 1e8, 1e-10).unwrap();
            let rep = check_a6(&pot, &phi0, &psi1, 1.0, &radii, &opts).unwrap();
            if rep.pass != (exponent > 0.0) {
                pass = false;
                mismatches.push_str(&format!(
                    "(p0={p0}, p1={p1}): exponent {exponent:.3} but verdict {}; ",
                    rep.pass
                ));
            }
        }
    }
    report(
        9,
        pass,
        if mismatches.is_empty() { "all 25 verdicts match the exponent sign" } else { &mismatches },
    );
}
