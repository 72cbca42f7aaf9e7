//! N-functions as computable objects.
//!
//! An N-function is a convex `Phi: R+ -> R+` with `Phi(t)/t -> 0` at zero and
//! `-> infinity` at infinity. This module represents them as `(eval, deriv)`
//! closure pairs with optional log-space evaluation (mandatory in practice for
//! exponential families, which overflow `f64` near `t = 700`) and an optional
//! closed-form conjugate.
//!
//! The calculus on top (Young conjugate, Matuszewska-Orlicz indices, doubling
//! scans, domination orders) lives in the submodules and is re-exported here.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::probe::{log_spaced, ProbeConfig};

mod conjugate;
mod delta2;
mod families;
mod indices;
mod ordering;

pub use conjugate::{conjugate, inverse};
pub use delta2::{check_delta2, Delta2Report, Delta2Variant};
pub use families::Family;
pub use indices::{mo_indices, power_bounds, IndexEstimate, IndexProbeConfig};
pub use ordering::{check_ordering, OrderingProbe, OrderingRelation, OrderingReport};

/// Shared scalar closure type for evaluation and derivative callbacks.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative is not nondecreasing near t = {at} ({left} > {right})")]
    NonMonotoneDerivative { at: f64, left: f64, right: f64 },
    #[error("evaluation overflowed f64 at t = {arg} and no log-space evaluation is available")]
    DomainOverflow { arg: f64 },
    #[error("probe overflowed at t = {arg} and no log-space evaluation is available")]
    ProbeOverflow { arg: f64 },
    #[error("no finite doubling constant fits the probes; the function is not Delta2 on this range")]
    Delta2Violated,
    #[error("bad family parameter: {0}")]
    BadParam(String),
    #[error("invariant violated: {0}")]
    InvalidNFunction(String),
}

/// An evaluable convex growth function with derivative access and metadata.
///
/// Values are immutable after construction and cheap to clone (all callbacks
/// are behind `Arc`), so they can be shared and sent between threads freely.
#[derive(Clone)]
pub struct NFunction {
    name: String,
    params: BTreeMap<String, f64>,
    eval: ScalarFn,
    deriv: ScalarFn,
    log_eval: Option<ScalarFn>,
    closed_conjugate: Option<Arc<NFunction>>,
}

impl std::fmt::Debug for NFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("log_eval", &self.log_eval.is_some())
            .field("closed_conjugate", &self.closed_conjugate.as_ref().map(|c| c.name.clone()))
            .finish()
    }
}

impl NFunction {
    /// Builds an N-function from raw closures. The invariants are not checked
    /// here; call [`NFunction::validate`] to probe them.
    pub fn from_parts(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            log_eval: None,
            closed_conjugate: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_log_eval(mut self, log_eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.log_eval = Some(Arc::new(log_eval));
        self
    }

    pub fn with_closed_conjugate(mut self, conj: NFunction) -> Self {
        self.closed_conjugate = Some(Arc::new(conj));
        self
    }

    /// Drops the closed-form conjugate backlink. Useful to force the numeric
    /// conjugation path.
    pub fn without_closed_conjugate(mut self) -> Self {
        self.closed_conjugate = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// `Phi(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// The (right-continuous) derivative `phi(t)`.
    pub fn deriv(&self, t: f64) -> f64 {
        (self.deriv)(t)
    }

    pub fn has_log_eval(&self) -> bool {
        self.log_eval.is_some()
    }

    /// `log Phi(t)` through the dedicated closure when present.
    pub fn log_eval(&self, t: f64) -> Option<f64> {
        self.log_eval.as_ref().map(|f| f(t))
    }

    /// `log Phi(t)`, falling back to `ln(eval)`; errors with `ProbeOverflow`
    /// when the direct evaluation is not representable and no log-space
    /// closure exists.
    pub fn log_eval_or(&self, t: f64) -> Result<f64, Error> {
        if let Some(f) = &self.log_eval {
            return Ok(f(t));
        }
        let v = (self.eval)(t);
        if v.is_finite() {
            Ok(v.ln())
        } else {
            Err(Error::ProbeOverflow { arg: t })
        }
    }

    pub fn closed_conjugate(&self) -> Option<&NFunction> {
        self.closed_conjugate.as_deref()
    }

    /// Probes the N-function invariants on log grids: `Phi(0) = 0`,
    /// monotonicity, midpoint convexity (1e-12 relative), the limit behavior
    /// of `Phi(t)/t` at both ends, monotone derivative, and consistency of
    /// the derivative with the evaluation through quadrature.
    pub fn validate(&self, probe: &ProbeConfig) -> Result<(), Error> {
        let at_zero = self.eval(0.0);
        if at_zero.abs() > 1e-300 {
            return Err(Error::InvalidNFunction(format!("eval(0) = {at_zero}, expected 0")));
        }
        let grid = probe.grid();
        let mut prev = 0.0f64;
        let mut prev_x = 0.0f64;
        for &x in &grid {
            let v = self.eval(x);
            if v.is_nan() {
                return Err(Error::InvalidNFunction(format!("eval({x}) is NaN")));
            }
            if v < prev {
                return Err(Error::InvalidNFunction(format!(
                    "eval decreases: eval({prev_x}) = {prev} > eval({x}) = {v}"
                )));
            }
            prev = v;
            prev_x = x;
        }
        // Midpoint convexity on consecutive grid triples.
        for w in grid.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            // b is not the midpoint of a log-spaced triple; test the chord at b.
            let theta = (b - a) / (c - a);
            let chord = (1.0 - theta) * self.eval(a) + theta * self.eval(c);
            let v = self.eval(b);
            if !chord.is_finite() {
                continue;
            }
            if v > chord * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InvalidNFunction(format!(
                    "midpoint convexity fails at t = {b}: value {v} above chord {chord}"
                )));
            }
        }
        // N-function limits of Phi(t)/t, probed heuristically.
        let ratio = |x: f64| self.eval(x) / x;
        let mid = (probe.x_min * probe.x_max).sqrt();
        if !(ratio(probe.x_min) <= 0.5 * ratio(mid) || ratio(probe.x_min) < 1e-6) {
            return Err(Error::InvalidNFunction(
                "Phi(t)/t does not decay toward 0 on the probe grid".into(),
            ));
        }
        let top = ratio(probe.x_max);
        if !(top >= 2.0 * ratio(mid) || top > 1e6) && top.is_finite() {
            return Err(Error::InvalidNFunction(
                "Phi(t)/t does not grow toward the top of the probe grid".into(),
            ));
        }
        // Derivative monotone on sampled pairs.
        let mut prev_d = 0.0f64;
        for &x in &grid {
            let d = self.deriv(x);
            if d.is_nan() {
                return Err(Error::InvalidNFunction(format!("deriv({x}) is NaN")));
            }
            if d < prev_d * (1.0 - 1e-12) {
                return Err(Error::NonMonotoneDerivative { at: x, left: prev_d, right: d });
            }
            prev_d = prev_d.max(d);
        }
        // integral of deriv reproduces eval at a few spots spanning the range.
        for &x in &[mid, probe.x_max.min(10.0 * mid)] {
            let v = self.eval(x);
            if !v.is_finite() || v == 0.0 {
                continue;
            }
            let q = integrate_deriv(self, x);
            if (q - v).abs() > 1e-6 * v.max(1e-300) {
                return Err(Error::InvalidNFunction(format!(
                    "integral of deriv over [0, {x}] is {q}, eval gives {v}"
                )));
            }
        }
        Ok(())
    }

    /// Value table on a log-spaced grid, used by reports.
    pub fn table(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        log_spaced(lo, hi, n).into_iter().map(|x| (x, self.eval(x))).collect()
    }
}

/// Composite-Simpson integral of the derivative over `[0, x]`.
fn integrate_deriv(f: &NFunction, x: f64) -> f64 {
    let n = 4096;
    let h = x / n as f64;
    let mut s = f.deriv(0.0) + f.deriv(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f.deriv(h * i as f64);
    }
    s * h / 3.0
}

/// Constructs one of the named built-in families.
pub fn builtin(family: Family) -> Result<NFunction, Error> {
    families::build(family)
}
