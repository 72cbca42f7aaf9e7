//! Young conjugation and inverses by monotone bisection.
//!
//! The conjugate `Psi` of `Phi` is the primitive of `psi = phi^{-1}` with
//! `Psi(0) = 0`. Numerically we use the equivalent stationary form
//! `Psi(y) = y * psi(y) - Phi(psi(y))`, which is second-order insensitive to
//! errors in `psi` (the integrand is evaluated at the critical point of
//! `t -> t*y - Phi(t)`). The inverse `psi` is materialized lazily as a
//! 2048-node table of bisection inverses on a log grid, with monotone linear
//! interpolation between nodes; queries outside the table fall back to a
//! direct bisection.

use std::sync::{Arc, OnceLock};

use super::{Error, NFunction, ScalarFn};
use crate::probe::log_spaced;

const CACHE_NODES: usize = 2048;

/// Inverse of the N-function itself: the `x >= 0` with `Phi(x) = y`, found by
/// bisection on a bracket grown geometrically. The result satisfies
/// `|Phi(x) - y| <= tol * max(1, y)`.
pub fn inverse(phi: &NFunction, y: f64, tol: f64) -> Result<f64, Error> {
    assert!(y >= 0.0, "inverse needs y >= 0");
    assert!(tol > 0.0, "inverse needs tol > 0");
    bisect_monotone(&|x| phi.eval(x), y, 1.0, tol)
}

/// Bisection solve of `f(x) = y` for nondecreasing `f` with `f(0) = 0`.
///
/// Overflowing evaluations (`+inf`) are treated as "above `y`", so brackets
/// remain valid for exponential families. Ties break toward the lower
/// endpoint.
fn bisect_monotone(
    f: &dyn Fn(f64) -> f64,
    y: f64,
    hi_start: f64,
    tol: f64,
) -> Result<f64, Error> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = hi_start;
    let mut f_hi = f(hi);
    while f_hi < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::DomainOverflow { arg: hi });
        }
        f_hi = f(hi);
        if f_hi.is_nan() {
            return Err(Error::DomainOverflow { arg: hi });
        }
    }
    let target = tol * y.max(1.0);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.is_finite() && (v - y).abs() <= target {
            return Ok(mid);
        }
        if v >= y {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs() {
            break;
        }
    }
    Ok(mid)
}

struct ConjugateBackend {
    phi_eval: ScalarFn,
    phi_deriv: ScalarFn,
    domain_max: f64,
    tol: f64,
    /// (y, psi(y)) nodes, ascending in y.
    cache: OnceLock<Vec<(f64, f64)>>,
}

impl ConjugateBackend {
    fn cache(&self) -> &Vec<(f64, f64)> {
        self.cache.get_or_init(|| {
            let x_lo = self.domain_max * 1e-14;
            let y_lo = (self.phi_deriv)(x_lo).max(f64::MIN_POSITIVE);
            let y_hi = (self.phi_deriv)(self.domain_max);
            let ys = log_spaced(y_lo, y_hi, CACHE_NODES);
            let mut nodes = Vec::with_capacity(ys.len());
            let mut lo = 0.0f64;
            for y in ys {
                // phi is nondecreasing, so previous inverses are lower bounds;
                // shrinking brackets keep the build cheap.
                let x = bisect_in(&*self.phi_deriv, y, lo, self.domain_max, self.tol);
                nodes.push((y, x));
                lo = x;
            }
            nodes
        })
    }

    /// psi(y) = phi^{-1}(y).
    fn psi(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let cache = self.cache();
        let (y_lo, _) = cache[0];
        let (y_hi, x_hi) = cache[cache.len() - 1];
        if y < y_lo {
            return bisect_in(&*self.phi_deriv, y, 0.0, cache[0].1.max(1e-300), self.tol);
        }
        if y > y_hi {
            // Outside the tabulated range: grow the bracket beyond domain_max.
            let mut lo = x_hi;
            let mut hi = x_hi * 2.0;
            while (self.phi_deriv)(hi) < y {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return f64::INFINITY;
                }
            }
            return bisect_in(&*self.phi_deriv, y, lo, hi, self.tol);
        }
        let idx = match cache.binary_search_by(|&(yk, _)| yk.partial_cmp(&y).unwrap()) {
            Ok(i) => return cache[i].1,
            Err(i) => i,
        };
        let (ya, xa) = cache[idx - 1];
        let (yb, xb) = cache[idx];
        let w = (y - ya) / (yb - ya);
        let mut t = xa + w * (xb - xa);
        // two secant refinements against the forward derivative cut the
        // interpolation error by several orders; the clamp keeps the
        // result inside the bracketing interval, hence monotone
        let slope = (yb - ya) / (xb - xa);
        if slope > 0.0 {
            for _ in 0..2 {
                let ft = (self.phi_deriv)(t);
                t = (t + (y - ft) / slope).clamp(xa, xb);
            }
        }
        t
    }

    /// Psi(y) through the stationary form of the Legendre transform.
    fn eval(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let t = self.psi(y);
        if !t.is_finite() {
            return f64::INFINITY;
        }
        (y * t - (self.phi_eval)(t)).max(0.0)
    }
}

/// Bisection of a nondecreasing `f` on a known bracket `[lo, hi]`.
fn bisect_in(f: &(dyn Fn(f64) -> f64 + Send + Sync), y: f64, lo0: f64, hi0: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (lo0, hi0);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v >= y {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= tol * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    mid
}

/// The Young conjugate of `phi`.
///
/// If a closed-form conjugate is attached it is returned directly. Otherwise
/// the derivative is inverted by bisection (relative tolerance `tol`) behind
/// a lazily filled, fill-once node table, and the returned N-function
/// evaluates `Psi(y) = y psi(y) - Phi(psi(y))`. The returned object carries
/// `phi` itself as its closed-form conjugate, which makes conjugation an
/// exact involution on the result.
pub fn conjugate(phi: &NFunction, domain_max: f64, tol: f64) -> Result<NFunction, Error> {
    assert!(domain_max > 0.0 && tol > 0.0);
    if let Some(c) = phi.closed_conjugate() {
        return Ok(c.clone());
    }
    // Reject derivatives that decrease on the probe grid.
    let grid = log_spaced(domain_max * 1e-12, domain_max, 256);
    let mut prev = 0.0f64;
    let mut prev_x = 0.0f64;
    for &x in &grid {
        let d = phi.deriv(x);
        if d.is_nan() {
            return Err(Error::DomainOverflow { arg: x });
        }
        if d < prev * (1.0 - 1e-12) {
            return Err(Error::NonMonotoneDerivative { at: x, left: prev, right: d });
        }
        if d > prev {
            prev = d;
            prev_x = x;
        }
    }
    let _ = prev_x;
    let y_hi = phi.deriv(domain_max);
    if !y_hi.is_finite() {
        return Err(Error::DomainOverflow { arg: domain_max });
    }

    let backend = Arc::new(ConjugateBackend {
        phi_eval: Arc::clone(&phi.eval),
        phi_deriv: Arc::clone(&phi.deriv),
        domain_max,
        tol,
        cache: OnceLock::new(),
    });
    let b_eval = Arc::clone(&backend);
    let b_deriv = Arc::clone(&backend);
    let conj = NFunction::from_parts(
        format!("conj({})", phi.name()),
        move |y: f64| b_eval.eval(y),
        move |y: f64| b_deriv.psi(y),
    )
    .with_closed_conjugate(phi.clone());
    let mut conj = conj;
    for (k, v) in phi.params() {
        conj = conj.with_param(k, *v);
    }
    Ok(conj)
}
