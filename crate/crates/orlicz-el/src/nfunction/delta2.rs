//! Doubling-condition scans.
//!
//! `eta` satisfies the doubling condition on a range when `eta(2x) <= K eta(x)`
//! there for some finite `K`. From finitely many samples this is undecidable;
//! the verdict below is a heuristic: the ratio scan must stay finite and must
//! not keep growing at the extreme end of the range that matters for the
//! variant. The report carries the grid actually used.

use super::{Error, NFunction};
use crate::probe::ProbeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta2Variant {
    /// `eta(2x) <= K eta(x)` for all `x >= 0`.
    Global,
    /// ... for all `x >= x0` (some `x0`).
    AtInfinity,
    /// ... for all `x <= x0` (some `x0 > 0`).
    AtZero,
}

impl std::fmt::Display for Delta2Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Delta2Variant::Global => write!(f, "global"),
            Delta2Variant::AtInfinity => write!(f, "at_infinity"),
            Delta2Variant::AtZero => write!(f, "at_zero"),
        }
    }
}

/// Outcome of a doubling scan. `holds` is a heuristic verdict.
#[derive(Debug, Clone)]
pub struct Delta2Report {
    pub variant: Delta2Variant,
    /// Heuristic verdict: bounded ratio on the scan implies the condition is
    /// deemed to hold.
    pub holds: bool,
    /// `sup eta(2x)/eta(x)` over the scan (`inf` if it left f64 range).
    pub sup_ratio: f64,
    /// Same in log space; always finite when log evaluation exists.
    pub log_sup_ratio: f64,
    pub worst_x: f64,
    pub grid: Vec<f64>,
    /// Always true: the verdict comes from a finite probe, not a certificate.
    pub heuristic: bool,
}

/// Scans `eta(2x)/eta(x)` on a log grid appropriate to the variant.
pub fn check_delta2(
    eta: &NFunction,
    variant: Delta2Variant,
    probe: &ProbeConfig,
) -> Result<Delta2Report, Error> {
    let (lo, hi) = match variant {
        Delta2Variant::Global => (probe.x_min, probe.x_max),
        Delta2Variant::AtInfinity => (probe.x_min.max(1.0), probe.x_max),
        Delta2Variant::AtZero => (probe.x_min, probe.x_max.min(1.0)),
    };
    if !(lo < hi) {
        return Err(Error::BadParam(format!(
            "probe range [{}, {}] leaves no room for the {variant} scan",
            probe.x_min, probe.x_max
        )));
    }
    let grid = ProbeConfig::new(lo, hi, probe.points).grid();
    let mut log_ratios = Vec::with_capacity(grid.len());
    for &x in &grid {
        let lx = eta.log_eval_or(x)?;
        let l2x = eta.log_eval_or(2.0 * x)?;
        if lx.is_finite() && l2x.is_finite() {
            log_ratios.push((x, l2x - lx));
        }
    }
    if log_ratios.len() < 8 {
        return Err(Error::ProbeOverflow { arg: lo });
    }

    let (mut worst_x, mut log_sup) = (log_ratios[0].0, f64::NEG_INFINITY);
    for &(x, r) in &log_ratios {
        if r > log_sup {
            log_sup = r;
            worst_x = x;
        }
    }

    // Trend test at the binding end(s): the condition fails if the log-ratio
    // is still climbing across the extreme decade.
    let growing_at_top = decade_growth(&log_ratios, true) > GROWTH_TOL;
    let growing_at_bottom = decade_growth(&log_ratios, false) > GROWTH_TOL;
    let holds = match variant {
        Delta2Variant::Global => !growing_at_top && !growing_at_bottom,
        Delta2Variant::AtInfinity => !growing_at_top,
        Delta2Variant::AtZero => !growing_at_bottom,
    };

    Ok(Delta2Report {
        variant,
        holds,
        sup_ratio: log_sup.exp(),
        log_sup_ratio: log_sup,
        worst_x,
        grid,
        heuristic: true,
    })
}

const GROWTH_TOL: f64 = 0.05;

/// Mean log-ratio in the extreme decade minus the mean in the adjacent
/// decade; positive growth signals an unbounded ratio.
fn decade_growth(log_ratios: &[(f64, f64)], top: bool) -> f64 {
    let (end, factor) = if top {
        (log_ratios.last().unwrap().0, 0.1)
    } else {
        (log_ratios.first().unwrap().0, 10.0)
    };
    let edge1 = end * factor;
    let edge2 = edge1 * factor;
    let mean_of = |pred: &dyn Fn(f64) -> bool| -> Option<f64> {
        let vals: Vec<f64> =
            log_ratios.iter().filter(|(x, _)| pred(*x)).map(|&(_, r)| r).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let (extreme, adjacent) = if top {
        (mean_of(&|x| x >= edge1), mean_of(&|x| x >= edge2 && x < edge1))
    } else {
        (mean_of(&|x| x <= edge1), mean_of(&|x| x <= edge2 && x > edge1))
    };
    match (extreme, adjacent) {
        (Some(e), Some(a)) => e - a,
        _ => 0.0,
    }
}
