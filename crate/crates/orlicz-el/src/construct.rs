//! Explicit constructions feeding the coercivity machinery.
//!
//! Two pieces live here. The first takes a nondecreasing, right-continuous
//! derivative `psi` that violates the doubling condition near zero and
//! rebuilds it as `psi*`: identical above `2 x1`, spliced from affine and
//! constant pieces below so that `psi*(x_n) = psi*(2 x_n) / 2` exactly,
//! `psi <= psi*`, and `psi*(2x) <= 4 psi*(x)` on the constructed range. Its
//! primitive is then doubling near zero while staying equivalent to the
//! original primitive at infinity.
//!
//! The second fits the largest constant `K` with `Phi(r s) >= K r^nu Phi(s)`
//! over a probe grid, valid for any `1 < nu < alpha_Phi`; `K r^nu` is the
//! power minorant used by the modular coercivity bound.

use std::sync::Arc;

use thiserror::Error;

use crate::nfunction::{self, mo_indices, IndexProbeConfig, NFunction, ScalarFn};
use crate::probe::{log_spaced, ProbeConfig};

#[derive(Debug, Error)]
pub enum Error {
    #[error("psi(2x) <= 2 psi(x) everywhere below {x_start}: no doubling violation on the probed range")]
    NoViolationFound { x_start: f64 },
    #[error("malformed violation sequence: {0}")]
    MalformedSequence(String),
    #[error("nu = {nu} is not below the lower index estimate alpha = {alpha}")]
    IndexViolated { nu: f64, alpha: f64 },
    #[error(transparent)]
    NFunction(#[from] nfunction::Error),
}

/// Scans geometrically downward from `x_start` for points with
/// `psi(2 x_n) > 2 psi(x_n)`, spaced so that `2 x_{n+1} < x_n`.
///
/// Returns at most `depth` points in decreasing order; the list is shorter
/// when the scan reaches machine precision (the next `psi(2x)` underflows to
/// zero). `NoViolationFound` signals that `psi` is doubling at zero on the
/// probed range, in which case the identity regularization applies.
pub fn find_violation_sequence(
    psi: &dyn Fn(f64) -> f64,
    depth: usize,
    x_start: f64,
) -> Result<Vec<f64>, Error> {
    assert!(x_start > 0.0, "x_start must be positive");
    if depth == 0 {
        return Ok(Vec::new());
    }
    const SHRINK: f64 = 0.97;
    const FLOOR: f64 = 1e-280;
    let mut seq: Vec<f64> = Vec::with_capacity(depth);
    let mut x = x_start;
    while seq.len() < depth && x > FLOOR {
        let two = psi(2.0 * x);
        if two == 0.0 {
            break; // below representable range; stop early
        }
        if two > 2.0 * psi(x) {
            seq.push(x);
            // next candidate must satisfy 2 x_{n+1} < x_n
            x = 0.5 * x * (1.0 - 1e-9);
        }
        x *= SHRINK;
    }
    if seq.is_empty() {
        return Err(Error::NoViolationFound { x_start });
    }
    Ok(seq)
}

/// One interval of the regularized derivative, keyed by its lower bound.
#[derive(Debug, Clone, Copy)]
enum Segment {
    /// The original derivative (above `2 x1`).
    Original,
    /// `max(psi(x), v_n (x - x_n) / (2 x_n) + v_n / 2)` on `[x_n, 2 x_n)`.
    MaxAffine { x_n: f64, v_n: f64 },
    Constant(f64),
    /// Affine through the origin on `[0, cut)` below the truncation point.
    Ramp { slope: f64 },
}

/// The regularized derivative `psi*`: a descending list of breakpoints with
/// per-interval closed forms, plus the original derivative it dominates.
#[derive(Clone)]
pub struct PiecewiseDerivative {
    /// The `2 x_n` and `x_n` nodes, strictly decreasing.
    breakpoints: Vec<f64>,
    /// `(lower_bound, segment)`, descending by lower bound; the first entry
    /// covers `[lower, +inf)`.
    segments: Vec<(f64, Segment)>,
    original: ScalarFn,
    seq: Vec<f64>,
    /// `v_n = psi*(2 x_n)`; exact halvings of `psi(2 x_1)`.
    plateau: Vec<f64>,
    /// Below this point the construction is truncated and `psi <= psi*` is
    /// no longer guaranteed.
    truncation: f64,
}

impl std::fmt::Debug for PiecewiseDerivative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PiecewiseDerivative")
            .field("breakpoints", &self.breakpoints)
            .field("segments", &self.segments.len())
            .field("truncation", &self.truncation)
            .finish()
    }
}

impl PiecewiseDerivative {
    /// `psi*(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let idx = self
            .segments
            .iter()
            .position(|&(lo, _)| x >= lo)
            .expect("segments end with a lower bound of 0");
        match self.segments[idx].1 {
            Segment::Original => (self.original)(x),
            Segment::MaxAffine { x_n, v_n } => {
                let affine = v_n / (2.0 * x_n) * (x - x_n) + v_n / 2.0;
                (self.original)(x).max(affine)
            }
            Segment::Constant(c) => c,
            Segment::Ramp { slope } => slope * x,
        }
    }

    /// The `2 x_n`, `x_n` nodes in decreasing order.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The violation sequence the construction was built from.
    pub fn sequence(&self) -> &[f64] {
        &self.seq
    }

    /// `psi*(2 x_n)` per violation point.
    pub fn plateau_values(&self) -> &[f64] {
        &self.plateau
    }

    /// Below this point `psi <= psi*` may fail (finite truncation of an
    /// infinite induction).
    pub fn truncation_point(&self) -> f64 {
        self.truncation
    }

    pub fn original(&self) -> &ScalarFn {
        &self.original
    }

    fn identity(psi: ScalarFn) -> Self {
        Self {
            breakpoints: Vec::new(),
            segments: vec![(0.0, Segment::Original)],
            original: psi,
            seq: Vec::new(),
            plateau: Vec::new(),
            truncation: 0.0,
        }
    }
}

/// Builds `psi*` from a violation sequence by the inductive splice: identity
/// above `2 x_1`; on `[x_n, 2 x_n)` the max of `psi` and the affine segment
/// through `(x_n, v_n/2)` and `(2 x_n, v_n)`; constant `v_n / 2` on
/// `[2 x_{n+1}, x_n)`. The infinite induction is truncated after the last
/// sequence entry: the final constant extends down to `2 x_d * 1e-3` and then
/// ramps affinely to 0 at 0.
pub fn build_psi_star(psi: ScalarFn, seq: &[f64]) -> Result<PiecewiseDerivative, Error> {
    if seq.is_empty() {
        return Ok(PiecewiseDerivative::identity(psi));
    }
    for (i, &x) in seq.iter().enumerate() {
        if !(x > 0.0) {
            return Err(Error::MalformedSequence(format!("entry {i} = {x} is not positive")));
        }
        if i + 1 < seq.len() && !(2.0 * seq[i + 1] < x) {
            return Err(Error::MalformedSequence(format!(
                "2 x_{} = {} is not below x_{} = {x}",
                i + 2,
                2.0 * seq[i + 1],
                i + 1,
            )));
        }
        if !(psi(2.0 * x) > 2.0 * psi(x)) {
            return Err(Error::MalformedSequence(format!(
                "psi(2 x_{}) = {} does not exceed 2 psi(x_{}) = {}",
                i + 1,
                psi(2.0 * x),
                i + 1,
                2.0 * psi(x),
            )));
        }
    }

    let v1 = psi(2.0 * seq[0]);
    let mut plateau = Vec::with_capacity(seq.len());
    let mut v = v1;
    for _ in seq {
        plateau.push(v);
        v /= 2.0;
    }

    let mut segments = Vec::with_capacity(2 * seq.len() + 3);
    let mut breakpoints = Vec::with_capacity(2 * seq.len());
    segments.push((2.0 * seq[0], Segment::Original));
    for (n, (&x_n, &v_n)) in seq.iter().zip(&plateau).enumerate() {
        breakpoints.push(2.0 * x_n);
        breakpoints.push(x_n);
        segments.push((x_n, Segment::MaxAffine { x_n, v_n }));
        let lower = if n + 1 < seq.len() { 2.0 * seq[n + 1] } else { 2.0 * x_n * 1e-3 };
        segments.push((lower, Segment::Constant(v_n / 2.0)));
    }
    let last = seq[seq.len() - 1];
    let v_last = plateau[plateau.len() - 1];
    let cut = 2.0 * last * 1e-3;
    segments.push((0.0, Segment::Ramp { slope: (v_last / 2.0) / cut }));

    Ok(PiecewiseDerivative {
        breakpoints,
        segments,
        original: psi,
        seq: seq.to_vec(),
        plateau,
        truncation: cut,
    })
}

/// Integrates `psi*` into its primitive. Affine, constant and ramp segments
/// integrate in closed form; segments that involve the original derivative
/// go through adaptive quadrature.
pub fn integrate_psi_star(pw: &PiecewiseDerivative) -> NFunction {
    let pw = Arc::new(pw.clone());
    // Cumulative integrals at segment lower bounds, ascending in x.
    let mut bounds: Vec<f64> = pw.segments.iter().map(|&(lo, _)| lo).collect();
    bounds.reverse(); // ascending
    let mut cum = Vec::with_capacity(bounds.len());
    let mut acc = 0.0f64;
    for i in 0..bounds.len() {
        cum.push(acc);
        if i + 1 < bounds.len() {
            acc += segment_integral(&pw, bounds[i], bounds[i + 1]);
        }
    }
    let pw_eval = Arc::clone(&pw);
    let pw_deriv = Arc::clone(&pw);
    let eval = move |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = match bounds.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        cum[i] + segment_integral(&pw_eval, bounds[i], x)
    };
    NFunction::from_parts("integral(psi*)", eval, move |x: f64| pw_deriv.eval(x))
}

/// Integral of `psi*` over `[a, b]` assuming the interval stays inside one
/// segment (callers split at segment bounds).
fn segment_integral(pw: &PiecewiseDerivative, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let probe = 0.5 * (a + b);
    let idx = pw.segments.iter().position(|&(lo, _)| probe >= lo).unwrap();
    match pw.segments[idx].1 {
        Segment::Constant(c) => c * (b - a),
        Segment::Ramp { slope } => 0.5 * slope * (b * b - a * a),
        Segment::Original | Segment::MaxAffine { .. } => {
            adaptive_simpson(&|x| pw.eval(x), a, b, 1e-11, 40)
        }
    }
}

/// Adaptive Simpson quadrature with relative tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    let eps = rel_tol * whole.abs().max(1e-300);
    rec(f, a, fa, b, fb, m, fm, whole, eps, depth)
}

/// Fits the submultiplicative power minorant: the largest `K` with
/// `Phi(r s) >= K r^nu Phi(s)` on a probe grid of `r >= 1`, `s > 0`.
/// Requires `1 < nu < alpha_Phi`; returns the minorant `K r^nu` as an
/// N-function alongside the constant.
pub fn phi_star_from_indices(
    phi: &NFunction,
    nu: f64,
    probe: &ProbeConfig,
) -> Result<(f64, NFunction), Error> {
    assert!(nu > 1.0, "the minorant exponent must exceed 1");
    let idx = mo_indices(
        phi,
        &IndexProbeConfig {
            t_min: probe.x_min.min(1e-8),
            t_max: probe.x_max.max(1e8),
            ..IndexProbeConfig::default()
        },
    )?;
    if nu >= idx.alpha {
        return Err(Error::IndexViolated { nu, alpha: idx.alpha });
    }

    let mut r_grid = log_spaced(1.0, probe.x_max, 65);
    r_grid[0] = 1.0;
    let s_grid = log_spaced(probe.x_min, probe.x_max, 65);
    let mut log_k = f64::INFINITY;
    for &r in &r_grid {
        let penalty = nu * r.ln();
        for &s in &s_grid {
            let ls = phi.log_eval_or(s)?;
            let lrs = phi.log_eval_or(r * s)?;
            if ls.is_finite() && lrs.is_finite() {
                log_k = log_k.min(lrs - ls - penalty);
            }
        }
    }
    let k = log_k.exp();
    if !(k > 1e-12) {
        return Err(Error::IndexViolated { nu, alpha: idx.alpha });
    }
    let minorant = NFunction::from_parts(
        format!("phi_star(nu={nu})"),
        move |r: f64| k * r.powf(nu),
        move |r: f64| k * nu * r.powf(nu - 1.0),
    )
    .with_param("nu", nu)
    .with_param("K", k)
    .with_log_eval(move |r: f64| k.ln() + nu * r.ln());
    Ok((k, minorant))
}
