//! Matuszewska-Orlicz index estimation and the two-sided power envelope.
//!
//! The indices are double limits: `M(t) = sup_u eta(tu)/eta(u)`, then
//! `alpha = lim_{t->0} log M(t)/log t` and `beta` the analogous limit at
//! infinity. The estimate below fixes a finite recipe so results are
//! reproducible: the sup runs over a 64-point log grid in `u`, and the limit
//! is read off as the least-squares slope of `log M` against `log t`
//! restricted to the extreme decade of the probe range.

use super::{check_delta2, Delta2Variant, Error, NFunction};
use crate::probe::{log_spaced, slope_fit, ProbeConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexProbeConfig {
    pub t_min: f64,
    pub t_max: f64,
    /// Points of the slope fit inside the extreme decade.
    pub fit_points: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub u_points: usize,
}

impl Default for IndexProbeConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-8,
            t_max: 1e8,
            fit_points: 16,
            u_min: 1e-10,
            u_max: 1e10,
            u_points: 64,
        }
    }
}

/// Estimated Matuszewska-Orlicz indices with fit residuals.
#[derive(Debug, Clone, Copy)]
pub struct IndexEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_stderr: f64,
    pub beta_stderr: f64,
    pub probe_range: (f64, f64),
}

/// Estimates the Matuszewska-Orlicz indices of `eta`.
///
/// `eta` must be increasing and unbounded with `eta(0) = 0`. Exponential
/// growth makes `beta` diverge; the estimate then comes out as a very large
/// finite number, which downstream checks treat as "not Delta2".
pub fn mo_indices(eta: &NFunction, probe: &IndexProbeConfig) -> Result<IndexEstimate, Error> {
    let u_grid = log_spaced(probe.u_min, probe.u_max, probe.u_points);
    let log_u: Vec<f64> = u_grid
        .iter()
        .map(|&u| eta.log_eval_or(u))
        .collect::<Result<_, _>>()?;

    let sup_log_ratio = |t: f64| -> Result<f64, Error> {
        let mut best = f64::NEG_INFINITY;
        for (&u, &lu) in u_grid.iter().zip(&log_u) {
            if !lu.is_finite() {
                continue;
            }
            let ltu = eta.log_eval_or(t * u)?;
            if ltu.is_finite() {
                best = best.max(ltu - lu);
            }
        }
        Ok(best)
    };

    let fit_decade = |lo: f64| -> Result<(f64, f64), Error> {
        let ts = log_spaced(lo, 10.0 * lo, probe.fit_points);
        let mut xs = Vec::with_capacity(ts.len());
        let mut ys = Vec::with_capacity(ts.len());
        for t in ts {
            let m = sup_log_ratio(t)?;
            if m.is_finite() {
                xs.push(t.ln());
                ys.push(m);
            }
        }
        if xs.len() < 2 {
            return Err(Error::ProbeOverflow { arg: lo });
        }
        Ok(slope_fit(&xs, &ys))
    };

    let (alpha, alpha_stderr) = fit_decade(probe.t_min)?;
    let (beta, beta_stderr) = fit_decade(probe.t_max / 10.0)?;
    Ok(IndexEstimate {
        alpha,
        beta,
        alpha_stderr,
        beta_stderr,
        probe_range: (probe.t_min, probe.t_max),
    })
}

/// Smallest constant `K` on the probe grid with
/// `K^{-1} min(t^{beta+eps}, t^{alpha-eps}) eta(u) <= eta(tu)
///  <= K max(t^{beta+eps}, t^{alpha-eps}) eta(u)`
/// for all probed `(t, u)`.
///
/// Errors with `Delta2Violated` when the global doubling scan fails or no
/// finite `K` fits the probes.
pub fn power_bounds(eta: &NFunction, epsilon: f64, probe: &ProbeConfig) -> Result<f64, Error> {
    assert!(epsilon > 0.0, "power_bounds needs epsilon > 0");
    let d2 = check_delta2(eta, Delta2Variant::Global, probe)?;
    if !d2.holds {
        return Err(Error::Delta2Violated);
    }
    let idx = mo_indices(
        eta,
        &IndexProbeConfig {
            t_min: probe.x_min,
            t_max: probe.x_max,
            u_min: probe.x_min,
            u_max: probe.x_max,
            ..IndexProbeConfig::default()
        },
    )?;
    let hi_exp = idx.beta + epsilon;
    let lo_exp = (idx.alpha - epsilon).max(0.0);

    let mut t_grid = log_spaced(probe.x_min, probe.x_max, 65);
    t_grid.push(1.0);
    let u_grid = log_spaced(probe.x_min, probe.x_max, 65);
    let log_u: Vec<f64> = u_grid
        .iter()
        .map(|&u| eta.log_eval_or(u))
        .collect::<Result<_, _>>()?;

    let mut log_k = 0.0f64;
    for &t in &t_grid {
        let lt = t.ln();
        let env_hi = (hi_exp * lt).max(lo_exp * lt);
        let env_lo = (hi_exp * lt).min(lo_exp * lt);
        for (&u, &lu) in u_grid.iter().zip(&log_u) {
            if !lu.is_finite() {
                continue;
            }
            let ltu = eta.log_eval_or(t * u)?;
            if !ltu.is_finite() {
                continue;
            }
            let up = ltu - lu - env_hi;
            let dn = env_lo + lu - ltu;
            log_k = log_k.max(up).max(dn);
        }
    }
    let k = log_k.exp();
    if !k.is_finite() || k > 1e10 {
        return Err(Error::Delta2Violated);
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunction::{builtin, conjugate, Family};

    /// Pure powers have alpha = beta = p, exactly up to fit rounding.
    #[test]
    fn indices_exact_on_powers() {
        for p in [1.5, 2.0, 3.0] {
            let f = builtin(Family::Power(p)).unwrap();
            let e = mo_indices(&f, &IndexProbeConfig::default()).unwrap();
            assert!((e.alpha - p).abs() < 1e-6, "alpha({p}) = {}", e.alpha);
            assert!((e.beta - p).abs() < 1e-6, "beta({p}) = {}", e.beta);
            assert!(e.alpha_stderr < 1e-6 && e.beta_stderr < 1e-6);
        }
    }

    #[test]
    fn exp_family_alpha_is_the_order() {
        let f = builtin(Family::ExpFamily(2)).unwrap();
        let e = mo_indices(&f, &IndexProbeConfig::default()).unwrap();
        assert!((e.alpha - 2.0).abs() < 0.1, "alpha = {}", e.alpha);
        // beta diverges for exponential growth
        assert!(e.beta > 100.0, "beta = {}", e.beta);
        assert!(e.alpha <= e.beta);
    }

    #[test]
    fn conjugate_beta_is_dual_exponent() {
        let phi = builtin(Family::ExpFamily(2)).unwrap();
        let psi = conjugate(&phi, 50.0, 1e-12).unwrap();
        let e = mo_indices(&psi, &IndexProbeConfig::default()).unwrap();
        assert!((e.beta - 2.0).abs() < 0.1, "beta = {}", e.beta);
    }

    #[test]
    fn power_bounds_on_exact_power() {
        let f = builtin(Family::Power(2.0)).unwrap();
        let k = power_bounds(&f, 0.1, &ProbeConfig::default()).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "K = {k}");
    }

    #[test]
    fn power_bounds_on_mixed_power() {
        let f = NFunction::from_parts("t2+t3", |t| t * t + t * t * t, |t| 2.0 * t + 3.0 * t * t);
        let k = power_bounds(&f, 0.5, &ProbeConfig::new(1e-3, 1e3, 121)).unwrap();
        assert!(k.is_finite() && k >= 1.0, "K = {k}");
        assert!(k < 1e3, "K = {k} should be a modest constant");
    }

    #[test]
    fn probe_overflow_without_log_eval() {
        // same growth as exp_family(2) but without a log-space evaluator:
        // the large probes overflow and the estimate must say so
        let raw = NFunction::from_parts(
            "raw-exp",
            |t: f64| t.exp() - 1.0 - t,
            |t: f64| t.exp() - 1.0,
        );
        assert!(matches!(
            mo_indices(&raw, &IndexProbeConfig::default()),
            Err(Error::ProbeOverflow { .. })
        ));
    }

    #[test]
    fn power_bounds_rejects_exponential() {
        let f = builtin(Family::ExpFamily(2)).unwrap();
        assert!(matches!(
            power_bounds(&f, 0.5, &ProbeConfig::default()),
            Err(Error::Delta2Violated)
        ));
    }
}
