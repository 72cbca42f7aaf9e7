//! Probe-based checkers for the assumptions a problem instance must satisfy:
//! the Caratheodory and growth requirements on the potential, the structure
//! conditions bounding the lagrangian and its partial gradients through an
//! envelope, the pointwise lower bound by a gauge-plus-potential lagrangian,
//! the sublinearity bound on the potential gradient, and the coercivity of
//! the averaged potential. All verdicts are heuristic scans over finite probe
//! sets; reports carry the probe counts and worst points so runs are
//! auditable.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::nfunction::{self, NFunction, ScalarFn};
use crate::orlicz::{self, decompose, derivative, modular, orlicz_norm, GridFunction};
use crate::probe::{log_spaced, pairwise_sum};
use crate::problem::{Potential, ProblemSpec};
use crate::solver;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluator failed at t = {t}: {detail}")]
    EvaluatorFailure { t: f64, detail: String },
    #[error("coercivity denominator overflowed before the potential integral at radius {radius}")]
    OverflowInRatio { radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Orlicz(#[from] orlicz::Error),
    #[error(transparent)]
    NFunction(#[from] nfunction::Error),
    #[error(transparent)]
    Solver(#[from] solver::Error),
}

/// The checked conditions, named as in the structure/coercivity hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    C,
    A,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::C => "C",
            Condition::A => "A",
            Condition::A1 => "A1",
            Condition::A2 => "A2",
            Condition::A3 => "A3",
            Condition::A4 => "A4",
            Condition::A5 => "A5",
            Condition::A6 => "A6",
        };
        write!(f, "{s}")
    }
}

/// The growth envelope `(a, b, c, lambda, f, Phi)` bounding a lagrangian
/// class: `a` continuous nondecreasing, `b` an integrable weight, `c` a
/// conjugate-space weight, `f` a shift, all sampled on the instance grid.
#[derive(Clone)]
pub struct GrowthEnvelope {
    pub a: ScalarFn,
    pub b: GridFunction,
    pub c: GridFunction,
    pub lambda: f64,
    pub f: GridFunction,
    pub phi: NFunction,
}

impl GrowthEnvelope {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParam(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        for (name, g) in [("b", &self.b), ("c", &self.c), ("f", &self.f)] {
            if g.dim() != 1 {
                return Err(Error::InvalidParam(format!("weight {name} must be scalar")));
            }
            if g.values().iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidParam(format!("weight {name} must be nonnegative")));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for GrowthEnvelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrowthEnvelope(lambda={}, phi={})", self.lambda, self.phi.name())
    }
}

/// Outcome of one condition scan.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub condition: Condition,
    /// Heuristic verdict over the probe set.
    pub pass: bool,
    pub worst_point: (f64, Vec<f64>, Vec<f64>),
    /// `rhs - lhs` at the worst probe; negative beyond tolerance fails.
    pub worst_slack: f64,
    pub probes: usize,
}

impl HypothesisReport {
    /// Key-value block for the structured text report.
    pub fn kv_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "condition = {}", self.condition);
        let _ = writeln!(s, "pass = {}", self.pass);
        let _ = writeln!(s, "worst_slack = {}", self.worst_slack);
        let _ = writeln!(s, "worst_t = {}", self.worst_point.0);
        let _ = writeln!(s, "worst_x = {:?}", self.worst_point.1);
        let _ = writeln!(s, "worst_y = {:?}", self.worst_point.2);
        let _ = writeln!(s, "probes = {}", self.probes);
        s
    }

    /// Machine-readable row: `condition,pass,worst_slack,probes`.
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.condition, self.pass, self.worst_slack, self.probes)
    }
}

/// Probe layout for the pointwise condition scans.
#[derive(Debug, Clone, Copy)]
pub struct StructureProbe {
    /// Trajectory dimension the probes are drawn in.
    pub dim: usize,
    /// Largest probed `|x|`.
    pub x_max: f64,
    /// Largest probed `|y|` (kept below the overflow ridge of exponential
    /// envelopes).
    pub y_max: f64,
    /// Log-spaced magnitudes per axis, plus zero.
    pub magnitudes: usize,
    /// Extra random `(t, x, y)` draws.
    pub random_draws: usize,
    pub seed: u64,
    /// Stride over the grid's time nodes.
    pub t_stride: usize,
}

impl Default for StructureProbe {
    fn default() -> Self {
        Self {
            dim: 1,
            x_max: 20.0,
            y_max: 40.0,
            magnitudes: 9,
            random_draws: 200,
            seed: 0,
            t_stride: 16,
        }
    }
}

/// Tracks the most negative relative slack over a probe sweep.
struct WorstTracker {
    worst_rel: f64,
    worst_slack: f64,
    worst_point: (f64, Vec<f64>, Vec<f64>),
    probes: usize,
}

impl WorstTracker {
    fn new() -> Self {
        Self {
            worst_rel: f64::INFINITY,
            worst_slack: f64::INFINITY,
            worst_point: (0.0, Vec::new(), Vec::new()),
            probes: 0,
        }
    }

    fn observe(&mut self, t: f64, x: &[f64], y: &[f64], lhs: f64, rhs: f64) {
        // Unrepresentable right sides carry no information; skip them.
        if rhs.is_nan() || rhs == f64::INFINITY {
            return;
        }
        self.probes += 1;
        let (slack, rel) = if lhs.is_finite() {
            let slack = rhs - lhs;
            (slack, slack / (1.0 + rhs.abs()))
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        if rel < self.worst_rel {
            self.worst_rel = rel;
            self.worst_slack = slack;
            self.worst_point = (t, x.to_vec(), y.to_vec());
        }
    }

    fn report(self, condition: Condition) -> HypothesisReport {
        HypothesisReport {
            condition,
            pass: self.worst_rel >= -1e-9,
            worst_point: self.worst_point,
            worst_slack: self.worst_slack,
            probes: self.probes,
        }
    }
}

/// Axis directions (both signs) in dimension `d`.
fn axis_directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * d);
    for c in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[c] = sign;
            dirs.push(e);
        }
    }
    dirs
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        // Box-Muller pairs give an isotropic gaussian to normalize.
        let mut v = Vec::with_capacity(d);
        while v.len() < d {
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (2.0 * std::f64::consts::PI * u2).cos());
            if v.len() < d {
                v.push(r * (2.0 * std::f64::consts::PI * u2).sin());
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// `(t_index, x, y)` probe set: a product of time nodes, signed magnitude
/// grids along the axes, plus seeded random draws.
fn probe_points(grid: &GridFunction, probe: &StructureProbe) -> Vec<(usize, Vec<f64>, Vec<f64>)> {
    let dim = probe.dim;
    let mut mags_x = vec![0.0];
    mags_x.extend(log_spaced(probe.x_max * 1e-4, probe.x_max, probe.magnitudes));
    let mut mags_y = vec![0.0];
    mags_y.extend(log_spaced(probe.y_max * 1e-4, probe.y_max, probe.magnitudes));
    let dirs = axis_directions(dim);
    let n = grid.nodes();
    let stride = probe.t_stride.max(1);
    let mut pts = Vec::new();
    for j in (0..n).step_by(stride) {
        for mx in &mags_x {
            for dx in &dirs {
                let x: Vec<f64> = dx.iter().map(|e| e * mx).collect();
                for my in &mags_y {
                    for dy in &dirs {
                        let y: Vec<f64> = dy.iter().map(|e| e * my).collect();
                        pts.push((j, x.clone(), y));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    for _ in 0..probe.random_draws {
        let j = rng.random_range(0..n);
        let mx = probe.x_max * rng.random::<f64>().powi(2);
        let my = probe.y_max * rng.random::<f64>().powi(2);
        let x: Vec<f64> = random_unit(&mut rng, dim).iter().map(|e| e * mx).collect();
        let y: Vec<f64> = random_unit(&mut rng, dim).iter().map(|e| e * my).collect();
        pts.push((j, x, y));
    }
    pts
}

fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scans the three structure conditions: the lagrangian and `D_x L` bounded
/// by `a(|x|)(b(t) + Phi(|y|/lambda + f(t)))`, and `D_y L` by
/// `a(|x|)(c(t) + phi(|y|/lambda + f(t)))`.
pub fn check_structure(
    lagrangian: &crate::problem::Lagrangian,
    env: &GrowthEnvelope,
    probe: &StructureProbe,
) -> Result<Vec<HypothesisReport>, Error> {
    env.validate()?;
    let pts = probe_points(&env.b, probe);
    let mut t1 = WorstTracker::new();
    let mut t2 = WorstTracker::new();
    let mut t3 = WorstTracker::new();
    for (j, x, y) in &pts {
        let t = env.b.time(*j);
        let ax = (env.a)(norm_of(x));
        let arg = norm_of(y) / env.lambda + env.f.values()[*j];
        let big = env.phi.eval(arg);
        let small = env.phi.deriv(arg);
        let rhs_value = ax * (env.b.values()[*j] + big);
        let rhs_deriv = ax * (env.c.values()[*j] + small);

        let l = lagrangian.eval(t, x, y);
        if l.is_nan() {
            return Err(Error::EvaluatorFailure { t, detail: "lagrangian returned NaN".into() });
        }
        t1.observe(t, x, y, l.abs(), rhs_value);
        let dx = lagrangian.grad_x(t, x, y);
        let dy = lagrangian.grad_y(t, x, y);
        if dx.iter().chain(&dy).any(|v| v.is_nan()) {
            return Err(Error::EvaluatorFailure { t, detail: "gradient returned NaN".into() });
        }
        t2.observe(t, x, y, norm_of(&dx), rhs_value);
        t3.observe(t, x, y, norm_of(&dy), rhs_deriv);
    }
    Ok(vec![t1.report(Condition::A1), t2.report(Condition::A2), t3.report(Condition::A3)])
}

/// Caratheodory spot check: the potential and its gradient evaluate finitely
/// and are continuous in `x` at the probes (finite differences). Measurability
/// in `t` is not observable from samples; this check is deliberately partial.
pub fn check_condition_c(
    potential: &Potential,
    grid: &GridFunction,
    probe: &StructureProbe,
) -> Result<HypothesisReport, Error> {
    let pts = probe_points(grid, probe);
    let mut tracker = WorstTracker::new();
    for (j, x, _) in &pts {
        let t = grid.time(*j);
        let f0 = potential.eval(t, x);
        let g0 = potential.grad(t, x);
        if f0.is_nan() || g0.iter().any(|v| v.is_nan()) {
            return Err(Error::EvaluatorFailure { t, detail: "potential returned NaN".into() });
        }
        let h = 1e-7 * (1.0 + norm_of(x));
        for dir in axis_directions(probe.dim) {
            let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, e)| a + h * e).collect();
            let fp = potential.eval(t, &xp);
            let gp = potential.grad(t, &xp);
            let bound = h * (norm_of(&g0) + norm_of(&gp) + 1.0);
            tracker.observe(t, x, &dir, (fp - f0).abs(), bound);
        }
    }
    Ok(tracker.report(Condition::C))
}

/// Growth condition on the potential: `|F| + |grad F| <= a(|x|) b(t)`.
pub fn check_condition_a(
    potential: &Potential,
    a: &ScalarFn,
    b: &GridFunction,
    probe: &StructureProbe,
) -> Result<HypothesisReport, Error> {
    let pts = probe_points(b, probe);
    let mut tracker = WorstTracker::new();
    for (j, x, _) in &pts {
        let t = b.time(*j);
        let f = potential.eval(t, x);
        let g = potential.grad(t, x);
        if f.is_nan() || g.iter().any(|v| v.is_nan()) {
            return Err(Error::EvaluatorFailure { t, detail: "potential returned NaN".into() });
        }
        tracker.observe(t, x, &[], f.abs() + norm_of(&g), a(norm_of(x)) * b.values()[*j]);
    }
    Ok(tracker.report(Condition::A))
}

/// Pointwise lower bound: `L(t, x, y) >= Phi(|y|) + F(t, x)` at the probes.
pub fn check_lower_bound(
    lagrangian: &crate::problem::Lagrangian,
    phi: &NFunction,
    potential: &Potential,
    grid: &GridFunction,
    probe: &StructureProbe,
) -> Result<HypothesisReport, Error> {
    let pts = probe_points(grid, probe);
    let mut tracker = WorstTracker::new();
    for (j, x, y) in &pts {
        let t = grid.time(*j);
        let l = lagrangian.eval(t, x, y);
        if l.is_nan() {
            return Err(Error::EvaluatorFailure { t, detail: "lagrangian returned NaN".into() });
        }
        let bound = phi.eval(norm_of(y)) + potential.eval(t, x);
        // reversed roles: the lagrangian must dominate the bound
        tracker.observe(t, x, y, bound, l);
    }
    Ok(tracker.report(Condition::A4))
}

/// Sublinearity of the potential gradient:
/// `|grad F(t, x)| <= b1(t) phi0'(|x|) + b2(t)`.
pub fn check_a5(
    potential: &Potential,
    b1: &GridFunction,
    b2: &GridFunction,
    phi0: &NFunction,
    probe: &StructureProbe,
) -> Result<HypothesisReport, Error> {
    if b1.values().iter().chain(b2.values()).any(|&v| v < 0.0) {
        return Err(Error::InvalidParam("b1, b2 must be nonnegative".into()));
    }
    let pts = probe_points(b1, probe);
    let mut tracker = WorstTracker::new();
    for (j, x, _) in &pts {
        let t = b1.time(*j);
        let g = potential.grad(t, x);
        if g.iter().any(|v| v.is_nan()) {
            return Err(Error::EvaluatorFailure { t, detail: "gradient returned NaN".into() });
        }
        let rhs = b1.values()[*j] * phi0.deriv(norm_of(x)) + b2.values()[*j];
        tracker.observe(t, x, &[], norm_of(&g), rhs);
    }
    Ok(tracker.report(Condition::A5))
}

/// Options for the averaged-potential coercivity scan.
#[derive(Debug, Clone, Copy)]
pub struct A6Options {
    pub dim: usize,
    pub quad_nodes: usize,
    pub random_directions: usize,
    /// The final ratio must exceed this for a pass verdict.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for A6Options {
    fn default() -> Self {
        Self { dim: 1, quad_nodes: 256, random_directions: 32, threshold: 1e2, seed: 0 }
    }
}

/// Coercivity scan result: the minimum-over-directions ratio
/// `integral F(t, r e) dt / Psi1(phi0'(2 r))` per radius.
#[derive(Debug, Clone)]
pub struct CoercivityReport {
    pub radii: Vec<f64>,
    pub min_ratio: Vec<f64>,
    pub pass: bool,
    pub threshold: f64,
    pub directions: usize,
}

impl CoercivityReport {
    pub fn kv_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "condition = A6");
        let _ = writeln!(s, "pass = {}", self.pass);
        let _ = writeln!(s, "threshold = {}", self.threshold);
        let _ = writeln!(s, "directions = {}", self.directions);
        let _ = writeln!(s, "radii = {:?}", self.radii);
        let _ = writeln!(s, "min_ratio = {:?}", self.min_ratio);
        s
    }

    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for (r, q) in self.radii.iter().zip(&self.min_ratio) {
            let _ = writeln!(s, "A6,{},{},{}", self.pass, r, q);
        }
        s
    }
}

/// Checks the coercivity condition on increasing radii: pass when the
/// min-over-directions ratio increases over the last three radii and the
/// final value clears the threshold.
pub fn check_a6(
    potential: &Potential,
    phi0: &NFunction,
    psi1: &NFunction,
    period: f64,
    radii: &[f64],
    opts: &A6Options,
) -> Result<CoercivityReport, Error> {
    if radii.len() < 3 {
        return Err(Error::InvalidParam("need at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParam("radii must increase".into()));
    }
    if radii[radii.len() - 1] / radii[0] < 1e3 {
        return Err(Error::InvalidParam("radii must span at least 3 decades".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut directions = axis_directions(opts.dim);
    for _ in 0..opts.random_directions {
        directions.push(random_unit(&mut rng, opts.dim));
    }
    let n = opts.quad_nodes;
    let mut min_ratio = Vec::with_capacity(radii.len());
    for &r in radii {
        let denom = psi1.eval(phi0.deriv(2.0 * r));
        let mut worst = f64::INFINITY;
        for e in &directions {
            let x: Vec<f64> = e.iter().map(|v| v * r).collect();
            let terms: Vec<f64> =
                (0..n).map(|j| potential.eval(period * j as f64 / n as f64, &x)).collect();
            if terms.iter().any(|v| v.is_nan()) {
                return Err(Error::EvaluatorFailure {
                    t: 0.0,
                    detail: "potential returned NaN on the sphere design".into(),
                });
            }
            let integral = pairwise_sum(&terms) * period / n as f64;
            if !denom.is_finite() {
                if integral.is_finite() {
                    return Err(Error::OverflowInRatio { radius: r });
                }
                worst = f64::NAN;
                break;
            }
            worst = worst.min(integral / denom);
        }
        min_ratio.push(worst);
    }
    let k = min_ratio.len();
    let increasing_tail =
        min_ratio[k - 1] > min_ratio[k - 2] && min_ratio[k - 2] > min_ratio[k - 3];
    let pass = increasing_tail && min_ratio[k - 1] > opts.threshold;
    Ok(CoercivityReport {
        radii: radii.to_vec(),
        min_ratio,
        pass,
        threshold: opts.threshold,
        directions: directions.len(),
    })
}

/// `J_{C,phi_fun}(u) = rho_Phi(u) - C phi_fun(|u|_{L^Phi})`.
pub fn j_functional(
    c: f64,
    phi_fun: &NFunction,
    phi: &NFunction,
    u: &GridFunction,
) -> Result<f64, Error> {
    if !(c > 0.0) {
        return Err(Error::InvalidParam(format!("the constant must be positive, got {c}")));
    }
    let rho = modular(phi, u)?;
    let norm = orlicz_norm(phi, u, 1e-10)?.amemiya;
    Ok(rho - c * phi_fun.eval(norm))
}

/// `H_{C,g}(x) = integral F(t, x) dt - C g(2 |x|)`, with `g` typically the
/// composition `Psi1 . phi0'`.
pub fn h_functional(
    c: f64,
    g: &dyn Fn(f64) -> f64,
    potential: &Potential,
    period: f64,
    quad_nodes: usize,
    x: &[f64],
) -> Result<f64, Error> {
    if !(c > 0.0) {
        return Err(Error::InvalidParam(format!("the constant must be positive, got {c}")));
    }
    let n = quad_nodes.max(4);
    let terms: Vec<f64> = (0..n).map(|j| potential.eval(period * j as f64 / n as f64, x)).collect();
    let integral = pairwise_sum(&terms) * period / n as f64;
    Ok(integral - c * g(2.0 * norm_of(x)))
}

/// The lower-bound audit: the action against
/// `J_{C,Phi1}(u') + H_{C,Psi1.phi0'}(mean u) - C`.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub action: f64,
    pub j_term: f64,
    pub h_term: f64,
    pub bound: f64,
    /// `action - bound`; a diagnostic, not a gate (the constant is
    /// existential in the underlying estimate).
    pub gap: f64,
    pub c: f64,
}

/// Evaluates the action and its coercivity lower bound at `u`.
pub fn lower_bound_audit(
    problem: &ProblemSpec,
    u: &GridFunction,
    c: f64,
) -> Result<AuditReport, Error> {
    let chain = problem
        .chain
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("problem carries no gauge chain".into()))?;
    let potential = problem
        .potential
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("problem carries no split potential".into()))?;
    let action = solver::action(problem, u)?;
    let du = derivative(u);
    let j_term = j_functional(c, &chain.phi1, &problem.phi, &du)?;
    let (mean, _) = decompose(u);
    let phi0 = chain.phi0.clone();
    let psi1 = chain.psi1.clone();
    let h_term = h_functional(
        c,
        &|r| psi1.eval(phi0.deriv(r)),
        potential,
        problem.period,
        problem.grid_nodes,
        &mean,
    )?;
    let bound = j_term + h_term - c;
    Ok(AuditReport { action, j_term, h_term, bound, gap: action - bound, c })
}
