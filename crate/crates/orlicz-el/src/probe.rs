//! Probe-grid configuration shared by the heuristic condition checkers.
//!
//! Every "condition holds" verdict in this crate is obtained by scanning
//! log-spaced grids. The defaults span `[1e-8, 1e8]`; checks against
//! functions that stay representable much further (pure powers, log-space
//! evaluation) may widen the range per call.

/// A log-spaced scan range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { x_min: 1e-8, x_max: 1e8, points: 241 }
    }
}

impl ProbeConfig {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Self {
        Self { x_min, x_max, points }
    }

    /// The log-spaced grid described by this config.
    pub fn grid(&self) -> Vec<f64> {
        log_spaced(self.x_min, self.x_max, self.points)
    }
}

/// `n` points spaced geometrically from `lo` to `hi` (inclusive on both ends).
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo, "log grid needs 0 < lo < hi");
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (llo + step * i as f64).exp()
            }
        })
        .collect()
}

/// `n` points spaced linearly from `lo` to `hi` (inclusive).
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

/// Least-squares slope of `y` against `x` together with its standard error.
///
/// Returns `(slope, stderr)`. With fewer than three points the stderr is 0.
pub fn slope_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(x.len() >= 2, "slope fit needs at least two points");
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    if x.len() < 3 {
        return (slope, 0.0);
    }
    let intercept = ym - slope * xm;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0)).sqrt() / sxx.sqrt();
    (slope, stderr)
}

/// Pairwise (cascade) summation; deterministic and more accurate than naive
/// left-to-right accumulation on long alternating sums.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// log(sum(exp(v))) evaluated stably; `-inf` entries are skipped.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = v.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
