//! Built-in N-function families.
//!
//! - `power(p)`: `t^p / p`, with the closed-form conjugate `t^q / q`,
//!   `1/p + 1/q = 1`.
//! - `exp_family(n)`: `e^t - sum_{i<n} t^i/i!`. Carries a log-space
//!   evaluator; small arguments are computed by the series tail to avoid
//!   catastrophic cancellation.
//! - `log_perturbed(k)`: equal to `u^2 / (log u)^k` for `u >= e^{2k}` and
//!   convexified below the threshold so that the value and the derivative
//!   are continuous and the derivative is nondecreasing.

use super::{Error, NFunction};

/// Selector for [`super::builtin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Power(f64),
    ExpFamily(u32),
    LogPerturbed(u32),
}

pub(super) fn build(family: Family) -> Result<NFunction, Error> {
    match family {
        Family::Power(p) => {
            if !(p > 1.0) || !p.is_finite() {
                return Err(Error::BadParam(format!("power family needs p > 1, got {p}")));
            }
            Ok(power_linked(p, 2))
        }
        Family::ExpFamily(n) => {
            if n < 1 {
                return Err(Error::BadParam(format!("exp family needs n >= 1, got {n}")));
            }
            Ok(exp_family(n))
        }
        Family::LogPerturbed(k) => {
            if !(1..=2).contains(&k) {
                return Err(Error::BadParam(format!("log_perturbed needs k in {{1, 2}}, got {k}")));
            }
            Ok(log_perturbed(k))
        }
    }
}

/// `t^p / p` with the conjugate backlink chained `depth` levels deep.
fn power_linked(p: f64, depth: usize) -> NFunction {
    let q = p / (p - 1.0);
    let mut f = NFunction::from_parts(
        format!("power({p})"),
        move |t: f64| t.powf(p) / p,
        move |t: f64| t.powf(p - 1.0),
    )
    .with_param("p", p)
    .with_log_eval(move |t: f64| p * t.ln() - p.ln());
    if depth > 0 {
        f = f.with_closed_conjugate(power_linked(q, depth - 1));
    }
    f
}

/// Tail of the exponential series: `e^t - sum_{i<n} t^i/i!`.
///
/// For small `t` the direct expression cancels catastrophically (at
/// `t = 1e-9`, `e^t - 1 - t` is below the ulp of 1), so the series
/// `sum_{i>=n} t^i/i!` is used there instead.
fn exp_tail(n: u32, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if n == 0 {
        return t.exp();
    }
    if t <= 1.0 {
        // term_i = t^i / i!, starting at i = n.
        let mut term = 1.0f64;
        for i in 1..=n {
            term *= t / i as f64;
        }
        let mut sum = term;
        let mut i = n;
        while term > sum * 1e-18 && i < 200 {
            i += 1;
            term *= t / i as f64;
            sum += term;
        }
        sum
    } else {
        let mut head = 0.0f64;
        let mut term = 1.0f64;
        for i in 0..n {
            if i > 0 {
                term *= t / i as f64;
            }
            head += term;
        }
        t.exp() - head
    }
}

/// `log(exp_tail(n, t))`, finite for all non-negative `t`.
fn exp_tail_log(n: u32, t: f64) -> f64 {
    if n == 0 {
        return t;
    }
    if t <= 1.0 {
        return exp_tail(n, t).ln();
    }
    if t < 700.0 {
        return exp_tail(n, t).ln();
    }
    // log(e^t - head) = t + log1p(-head * e^{-t}); each head term
    // t^i * e^{-t} / i! is computed in log space to dodge the overflow.
    let mut correction = 0.0f64;
    for i in 0..n {
        let log_term = i as f64 * t.ln() - t - ln_factorial(i);
        correction += log_term.exp();
    }
    t + (-correction).ln_1p()
}

fn ln_factorial(i: u32) -> f64 {
    (1..=i).map(|j| (j as f64).ln()).sum()
}

fn exp_family(n: u32) -> NFunction {
    NFunction::from_parts(
        format!("exp_family({n})"),
        move |t: f64| exp_tail(n, t),
        move |t: f64| exp_tail(n - 1, t),
    )
    .with_param("n", n as f64)
    .with_log_eval(move |t: f64| exp_tail_log(n, t))
}

/// Parameters of the convex completion of `u^2 / (log u)^k` below `e^{2k}`.
///
/// The derivative is linear on `[0, 2u1/3]`, constant on `[2u1/3, u1]` and
/// equal to the principal part's derivative beyond `u1 = e^{2k}`; the value
/// and the derivative are then continuous and the derivative nondecreasing.
struct LogPerturbedSplice {
    u1: f64,
    um: f64,
    /// Derivative value on the constant segment (= principal derivative at u1).
    d: f64,
    /// Slope of the linear derivative segment.
    c: f64,
}

fn log_perturbed_splice(k: u32) -> LogPerturbedSplice {
    let kk = k as f64;
    let u1 = (2.0 * kk).exp();
    let d = 3.0 * kk * u1 / (2.0 * kk).powi(k as i32 + 1);
    let um = 2.0 / 3.0 * u1;
    let c = d / um;
    LogPerturbedSplice { u1, um, d, c }
}

fn log_perturbed(k: u32) -> NFunction {
    let s = log_perturbed_splice(k);
    let kk = k as f64;
    let (u1, um, d, c) = (s.u1, s.um, s.d, s.c);
    // Value at um and u1, used by the piecewise evaluation.
    let v_um = c * um * um / 2.0;
    let eval = move |u: f64| -> f64 {
        if u >= u1 {
            let l = u.ln();
            u * u / l.powi(k as i32)
        } else if u >= um {
            v_um + d * (u - um)
        } else {
            c * u * u / 2.0
        }
    };
    let deriv = move |u: f64| -> f64 {
        if u >= u1 {
            let l = u.ln();
            u * (2.0 * l - kk) / l.powi(k as i32 + 1)
        } else if u >= um {
            d
        } else {
            c * u
        }
    };
    let log_eval = move |u: f64| -> f64 {
        if u >= u1 {
            2.0 * u.ln() - kk * u.ln().ln()
        } else {
            eval(u).ln()
        }
    };
    NFunction::from_parts(format!("log_perturbed({k})"), eval, deriv)
        .with_param("k", kk)
        .with_log_eval(log_eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunction::builtin;

    #[test]
    fn power_normalization() {
        let f = builtin(Family::Power(2.0)).unwrap();
        assert_eq!(f.eval(3.0), 4.5);
        assert_eq!(f.deriv(3.0), 3.0);
        let f = builtin(Family::Power(3.0)).unwrap();
        assert!((f.eval(2.0) - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn power_conjugate_is_dual_power() {
        let f = builtin(Family::Power(3.0)).unwrap();
        let c = f.closed_conjugate().unwrap();
        assert!((c.param("p").unwrap() - 1.5).abs() < 1e-15);
        // conjugate of t^3/3 is t^{3/2}/(3/2) = (2/3) t^{3/2}
        assert!((c.eval(4.0) - 2.0 / 3.0 * 8.0).abs() < 1e-12);
    }

    #[test]
    fn exp_family_values() {
        let f = builtin(Family::ExpFamily(2)).unwrap();
        // e - 2
        assert!((f.eval(1.0) - (1.0f64.exp() - 2.0)).abs() < 1e-15);
        assert_eq!(builtin(Family::ExpFamily(3)).unwrap().eval(0.0), 0.0);
        // series region: e^t - 1 - t ~ t^2/2 at tiny t
        let t = 1e-9;
        let v = f.eval(t);
        assert!((v - t * t / 2.0).abs() < 1e-24, "series evaluation, got {v}");
    }

    #[test]
    fn exp_family_log_eval_matches_direct_and_survives_overflow() {
        let f = builtin(Family::ExpFamily(2)).unwrap();
        for &t in &[0.5, 5.0, 100.0, 650.0] {
            let diff = (f.log_eval(t).unwrap() - f.eval(t).ln()).abs();
            assert!(diff < 1e-12 * (1.0 + t), "t={t} diff={diff}");
        }
        let big = f.log_eval(5000.0).unwrap();
        assert!((big - 5000.0).abs() < 1e-9);
        assert!(!f.eval(5000.0).is_finite());
    }

    #[test]
    fn exp_family_deriv_is_lower_order_tail() {
        let f = builtin(Family::ExpFamily(3)).unwrap();
        let t = 2.0f64;
        let expect = t.exp() - 1.0 - t;
        assert!((f.deriv(t) - expect).abs() < 1e-12);
    }

    #[test]
    fn log_perturbed_continuity_at_breakpoints() {
        for k in [1u32, 2] {
            let s = log_perturbed_splice(k);
            let f = builtin(Family::LogPerturbed(k)).unwrap();
            for &u in &[s.um, s.u1] {
                let below = f.eval(u * (1.0 - 1e-9));
                let above = f.eval(u * (1.0 + 1e-9));
                assert!((below - above).abs() < 1e-6 * above, "value jump at {u} (k={k})");
                let db = f.deriv(u * (1.0 - 1e-9));
                let da = f.deriv(u * (1.0 + 1e-9));
                assert!((db - da).abs() < 1e-6 * da, "derivative jump at {u} (k={k})");
            }
            // principal part beyond the threshold
            let u = 2.0 * s.u1;
            assert!((f.eval(u) - u * u / u.ln().powi(k as i32)).abs() < 1e-12 * f.eval(u));
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        assert!(matches!(build(Family::Power(1.0)), Err(Error::BadParam(_))));
        assert!(matches!(build(Family::Power(f64::NAN)), Err(Error::BadParam(_))));
        assert!(matches!(build(Family::ExpFamily(0)), Err(Error::BadParam(_))));
        assert!(matches!(build(Family::LogPerturbed(3)), Err(Error::BadParam(_))));
    }
}
