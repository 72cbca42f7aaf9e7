//! Named problem instances shared by the CLI and the test suites.
//!
//! Two families ship:
//!
//! - `quadratic_tracking`: `L = |y|^2/2 + |x - sin(2 pi t / T) e1|^2`, the
//!   reference instance with a closed-form continuum minimizer
//!   `A sin(2 pi t / T)`, `A = 2 / (2 + (2 pi / T)^2)`.
//! - `exp_cosh_sublinear(sigma)`: `L = 2 cosh(2|y|) + (1 + sin(2 pi t / T)) |x|^sigma`,
//!   exponential growth in the velocity with a sublinear potential; the
//!   minimizer is identically zero.

use std::sync::Arc;

use crate::hypotheses::GrowthEnvelope;
use crate::nfunction::{builtin, conjugate, Family, NFunction};
use crate::orlicz::GridFunction;
use crate::problem::{HypothesisChain, Lagrangian, Potential, ProblemSpec, SolverOptions};

/// Instance selector, parsed from CLI names.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instance {
    QuadraticTracking,
    ExpCoshSublinear { sigma: f64 },
}

impl Instance {
    /// Resolves a registry name; `sigma` feeds the exponential family.
    pub fn parse(name: &str, sigma: Option<f64>) -> Result<Self, String> {
        match name {
            "quadratic_tracking" => Ok(Instance::QuadraticTracking),
            "exp_cosh_sublinear" => {
                let sigma = sigma.ok_or("exp_cosh_sublinear needs a sigma parameter")?;
                if !(sigma > 1.0) {
                    return Err(format!("sigma must exceed 1, got {sigma}"));
                }
                Ok(Instance::ExpCoshSublinear { sigma })
            }
            other => Err(format!("unknown lagrangian '{other}' (expected quadratic_tracking or exp_cosh_sublinear)")),
        }
    }
}

fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The tracked reference signal of the quadratic instance.
pub fn tracking_signal(period: f64, t: f64) -> f64 {
    (2.0 * std::f64::consts::PI * t / period).sin()
}

/// Amplitude of the analytic minimizer of the quadratic instance.
pub fn tracking_amplitude(period: f64) -> f64 {
    let om = 2.0 * std::f64::consts::PI / period;
    2.0 / (2.0 + om * om)
}

pub fn lagrangian(instance: Instance, period: f64) -> Lagrangian {
    match instance {
        Instance::QuadraticTracking => Lagrangian::new(
            "quadratic_tracking",
            move |t, x: &[f64], y: &[f64]| {
                let mut e = 0.0;
                for (c, &xc) in x.iter().enumerate() {
                    let target = if c == 0 { tracking_signal(period, t) } else { 0.0 };
                    e += (xc - target) * (xc - target);
                }
                0.5 * y.iter().map(|v| v * v).sum::<f64>() + e
            },
            move |t, x: &[f64], _y: &[f64]| {
                x.iter()
                    .enumerate()
                    .map(|(c, &xc)| {
                        let target = if c == 0 { tracking_signal(period, t) } else { 0.0 };
                        2.0 * (xc - target)
                    })
                    .collect()
            },
            |_t, _x: &[f64], y: &[f64]| y.to_vec(),
        ),
        Instance::ExpCoshSublinear { sigma } => {
            let pot = potential(instance, period).expect("instance has a potential");
            let pot_grad = pot.clone();
            Lagrangian::new(
                format!("exp_cosh_sublinear({sigma})"),
                move |t, x: &[f64], y: &[f64]| {
                    2.0 * (2.0 * norm_of(y)).cosh() + pot.eval(t, x)
                },
                move |t, x: &[f64], _y: &[f64]| pot_grad.grad(t, x),
                |_t, _x: &[f64], y: &[f64]| {
                    let r = norm_of(y);
                    if r == 0.0 {
                        vec![0.0; y.len()]
                    } else {
                        let s = 4.0 * (2.0 * r).sinh() / r;
                        y.iter().map(|&v| s * v).collect()
                    }
                },
            )
        }
    }
}

/// The split potential of the instance, when the lagrangian splits.
pub fn potential(instance: Instance, period: f64) -> Option<Potential> {
    match instance {
        Instance::QuadraticTracking => Some(Potential::new(
            "tracking",
            move |t, x: &[f64]| {
                let mut e = 0.0;
                for (c, &xc) in x.iter().enumerate() {
                    let target = if c == 0 { tracking_signal(period, t) } else { 0.0 };
                    e += (xc - target) * (xc - target);
                }
                e
            },
            move |t, x: &[f64]| {
                x.iter()
                    .enumerate()
                    .map(|(c, &xc)| {
                        let target = if c == 0 { tracking_signal(period, t) } else { 0.0 };
                        2.0 * (xc - target)
                    })
                    .collect()
            },
        )),
        Instance::ExpCoshSublinear { sigma } => Some(Potential::new(
            format!("sublinear({sigma})"),
            move |t, x: &[f64]| {
                let weight = 1.0 + (2.0 * std::f64::consts::PI * t / period).sin();
                weight * norm_of(x).powf(sigma)
            },
            move |t, x: &[f64]| {
                let r = norm_of(x);
                // the a.e.-derivative selection at the origin is zero
                if r == 0.0 {
                    return vec![0.0; x.len()];
                }
                let weight = 1.0 + (2.0 * std::f64::consts::PI * t / period).sin();
                let s = weight * sigma * r.powf(sigma - 2.0);
                x.iter().map(|&v| s * v).collect()
            },
        )),
    }
}

/// The honest growth envelope of the instance (class membership for the
/// structure conditions). The exponential instance needs the exponential
/// gauge of order 2 and `lambda = 1/2`.
pub fn envelope(instance: Instance, period: f64, nodes: usize) -> GrowthEnvelope {
    match instance {
        Instance::QuadraticTracking => GrowthEnvelope {
            a: Arc::new(|r: f64| 2.0 + 2.0 * r * r),
            b: GridFunction::constant(period, nodes, &[2.0]),
            c: GridFunction::zeros(period, nodes, 1),
            lambda: 1.0,
            f: GridFunction::zeros(period, nodes, 1),
            phi: builtin(Family::Power(2.0)).expect("power(2)"),
        },
        Instance::ExpCoshSublinear { .. } => GrowthEnvelope {
            a: Arc::new(|r: f64| 3.0 + 2.0 * r * r),
            b: GridFunction::constant(period, nodes, &[8.0]),
            c: GridFunction::constant(period, nodes, &[2.0]),
            lambda: 0.5,
            f: GridFunction::zeros(period, nodes, 1),
            phi: builtin(Family::ExpFamily(2)).expect("exp_family(2)"),
        },
    }
}

/// The solver's growth gauge for the lower bound. Both shipped instances are
/// dominated from below by the quadratic gauge, which keeps the doubling
/// gate satisfied.
pub fn default_phi(_instance: Instance) -> NFunction {
    builtin(Family::Power(2.0)).expect("power(2)")
}

/// Weights `b1, b2` witnessing the sublinearity bound
/// `|grad F| <= b1 phi0' + b2` of the instance, when one exists. The
/// tracking potential grows linearly in `x` and is genuinely not sublinear
/// against any gauge weaker than its own growth.
pub fn sublinear_weights(
    instance: Instance,
    period: f64,
    nodes: usize,
) -> Option<(GridFunction, GridFunction)> {
    match instance {
        Instance::QuadraticTracking => None,
        Instance::ExpCoshSublinear { sigma } => {
            let b = GridFunction::from_scalar_fn(period, nodes, move |t| {
                sigma * (1.0 + (2.0 * std::f64::consts::PI * t / period).sin())
            });
            Some((b.clone(), b))
        }
    }
}

/// Default gauge chain `phi0 << phi1 << K r^nu` for the coercivity
/// conditions with the quadratic growth gauge. For the sublinear instance
/// the exponents follow the rule `p0 - 1 < sigma < p0`,
/// `p1 > sigma / (sigma - p0 + 1)`.
pub fn default_chain(instance: Instance) -> HypothesisChain {
    let (p0, p1) = match instance {
        Instance::QuadraticTracking => (1.3, 1.6),
        Instance::ExpCoshSublinear { .. } => (1.6, 1.8),
    };
    chain_from_exponents(p0, p1)
}

/// Builds a power chain `(phi0, phi1, conj(phi1))`.
pub fn chain_from_exponents(p0: f64, p1: f64) -> HypothesisChain {
    let phi0 = builtin(Family::Power(p0)).expect("power p0");
    let phi1 = builtin(Family::Power(p1)).expect("power p1");
    let psi1 = conjugate(&phi1, 1e8, 1e-10).expect("power conjugate is closed-form");
    HypothesisChain { phi0, phi1, psi1 }
}

/// Assembles a full problem spec for a registry instance.
pub fn build_problem(
    instance: Instance,
    period: f64,
    dim: usize,
    nodes: usize,
    options: SolverOptions,
    chain: Option<HypothesisChain>,
) -> ProblemSpec {
    ProblemSpec {
        lagrangian: lagrangian(instance, period),
        potential: potential(instance, period),
        phi: default_phi(instance),
        period,
        dim,
        grid_nodes: nodes,
        options,
        chain: chain.or_else(|| Some(default_chain(instance))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::{check_lower_bound, check_structure, StructureProbe};

    #[test]
    fn parse_names() {
        assert_eq!(Instance::parse("quadratic_tracking", None).unwrap(), Instance::QuadraticTracking);
        assert!(matches!(
            Instance::parse("exp_cosh_sublinear", Some(1.5)).unwrap(),
            Instance::ExpCoshSublinear { .. }
        ));
        assert!(Instance::parse("exp_cosh_sublinear", None).is_err());
        assert!(Instance::parse("exp_cosh_sublinear", Some(0.5)).is_err());
        assert!(Instance::parse("nope", None).is_err());
    }

    #[test]
    fn shipped_instances_satisfy_their_envelopes() {
        for instance in [Instance::QuadraticTracking, Instance::ExpCoshSublinear { sigma: 1.5 }] {
            let lag = lagrangian(instance, 1.0);
            let env = envelope(instance, 1.0, 64);
            let reports = check_structure(&lag, &env, &StructureProbe::default()).unwrap();
            for r in &reports {
                assert!(
                    r.pass,
                    "{:?}: condition {} fails with slack {}",
                    instance, r.condition, r.worst_slack
                );
            }
        }
    }

    #[test]
    fn shipped_instances_dominate_the_quadratic_gauge() {
        let grid = GridFunction::zeros(1.0, 64, 1);
        for instance in [Instance::QuadraticTracking, Instance::ExpCoshSublinear { sigma: 1.5 }] {
            let lag = lagrangian(instance, 1.0);
            let pot = potential(instance, 1.0).unwrap();
            let phi = default_phi(instance);
            let rep =
                check_lower_bound(&lag, &phi, &pot, &grid, &StructureProbe::default()).unwrap();
            assert!(rep.pass, "{instance:?}: slack {}", rep.worst_slack);
        }
    }

    #[test]
    fn gradient_of_exp_cosh_matches_finite_differences() {
        let lag = lagrangian(Instance::ExpCoshSublinear { sigma: 1.5 }, 1.0);
        let (t, x, y) = (0.3, vec![0.7, -0.2], vec![0.4, 0.9]);
        let gx = lag.grad_x(t, &x, &y);
        let gy = lag.grad_y(t, &x, &y);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            let fd = (lag.eval(t, &xp, &y) - lag.eval(t, &xm, &y)) / (2.0 * h);
            assert!((fd - gx[c]).abs() < 1e-6 * (1.0 + fd.abs()), "x[{c}]");
            let mut yp = y.clone();
            yp[c] += h;
            let mut ym = y.clone();
            ym[c] -= h;
            let fd = (lag.eval(t, &x, &yp) - lag.eval(t, &x, &ym)) / (2.0 * h);
            assert!((fd - gy[c]).abs() < 1e-6 * (1.0 + fd.abs()), "y[{c}]");
        }
    }
}
