//! Discretized Orlicz-space calculus on a uniform periodic grid over `[0, T]`.
//!
//! Functions are piecewise-linear periodic trajectories sampled at
//! `t_j = j T / N`; node `N` coincides with node `0`, so periodicity is
//! structural. All modulars and pairings use the rectangle rule on this grid,
//! which is exact per interval for the piecewise-constant derivatives the
//! solver produces and keeps the modular, the norms and the discrete action
//! mutually consistent.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::nfunction::{self, conjugate, inverse, NFunction};
use crate::probe::{log_sum_exp, pairwise_sum};

#[derive(Debug, Error)]
pub enum Error {
    #[error("golden-section bracket failed to enclose a minimum after {expansions} expansions")]
    BracketExpansionFailed { expansions: usize },
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    NFunction(#[from] nfunction::Error),
}

/// A periodic, vector-valued function sampled on a uniform grid over `[0, T]`.
///
/// `values` holds `N x d` reals, node-major: component `c` of node `j` sits at
/// `j * d + c`. Values are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    period: f64,
    nodes: usize,
    dim: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(period: f64, nodes: usize, dim: usize, values: Vec<f64>) -> Result<Self, Error> {
        if !(period > 0.0) {
            return Err(Error::Grid(format!("period must be positive, got {period}")));
        }
        if nodes < 4 {
            return Err(Error::Grid(format!("need at least 4 nodes, got {nodes}")));
        }
        if dim == 0 {
            return Err(Error::Grid("dimension must be at least 1".into()));
        }
        if values.len() != nodes * dim {
            return Err(Error::Grid(format!(
                "expected {} values ({nodes} nodes x {dim}), got {}",
                nodes * dim,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite sample {bad}")));
        }
        Ok(Self { period, nodes, dim, values })
    }

    pub fn zeros(period: f64, nodes: usize, dim: usize) -> Self {
        Self::new(period, nodes, dim, vec![0.0; nodes * dim]).expect("valid zero grid")
    }

    pub fn constant(period: f64, nodes: usize, value: &[f64]) -> Self {
        let mut values = Vec::with_capacity(nodes * value.len());
        for _ in 0..nodes {
            values.extend_from_slice(value);
        }
        Self::new(period, nodes, value.len(), values).expect("valid constant grid")
    }

    /// Samples `f(t_j)` on the grid; `f` returns the `d` components.
    pub fn from_fn(period: f64, nodes: usize, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(nodes * dim);
        for j in 0..nodes {
            let t = period * j as f64 / nodes as f64;
            let v = f(t);
            assert_eq!(v.len(), dim, "sampler returned wrong dimension");
            values.extend_from_slice(&v);
        }
        Self::new(period, nodes, dim, values).expect("valid sampled grid")
    }

    /// Scalar (`d = 1`) convenience sampler.
    pub fn from_scalar_fn(period: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(period, nodes, 1, |t| vec![f(t)])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> &[f64] {
        let j = j % self.nodes;
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Euclidean norm of the node-`j` sample.
    pub fn node_norm(&self, j: usize) -> f64 {
        self.node(j).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.period * (j % self.nodes) as f64 / self.nodes as f64
    }

    /// Largest node Euclidean norm (the discrete sup norm).
    pub fn sup_norm(&self) -> f64 {
        (0..self.nodes).map(|j| self.node_norm(j)).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        let values = self.values.iter().map(|&v| a * v).collect();
        GridFunction { values, ..self.clone() }
    }

    /// `self + a * other`, elementwise on a shared grid.
    pub fn add_scaled(&self, a: f64, other: &GridFunction) -> GridFunction {
        assert!(self.same_grid(other), "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x + a * y).collect();
        GridFunction { values, ..self.clone() }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.nodes == other.nodes && self.dim == other.dim && self.period == other.period
    }

    /// Serializes as CSV: header `t,x1,...,xd`, one row per node, `.` decimal,
    /// `,` delimiter, LF line endings.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        write!(w, "t")?;
        for c in 1..=self.dim {
            write!(w, ",x{c}")?;
        }
        writeln!(w)?;
        for j in 0..self.nodes {
            write!(w, "{}", self.time(j))?;
            for c in 0..self.dim {
                write!(w, ",{}", self.values[j * self.dim + c])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the CSV form back, verifying the grid spacing is uniform to
    /// 1e-9 relative.
    pub fn read_csv(r: impl BufRead) -> Result<GridFunction, Error> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty input".into()))?
            .map_err(|e| Error::Csv(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(Error::Csv(format!("expected header t,x1,...: got '{header}'")));
        }
        let dim = cols.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Csv(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::Csv(format!(
                    "row {}: expected {} fields, got {}",
                    lineno + 2,
                    dim + 1,
                    fields.len()
                )));
            }
            let mut parsed = fields.iter().map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: bad number '{f}': {e}", lineno + 2)))
            });
            times.push(parsed.next().unwrap()?);
            for v in parsed {
                values.push(v?);
            }
        }
        let n = times.len();
        if n < 4 {
            return Err(Error::Csv(format!("need at least 4 rows, got {n}")));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Csv("time column must increase".into()));
        }
        for (j, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-9 * dt.abs() {
                return Err(Error::Csv(format!(
                    "non-uniform spacing at row {}: {step} vs {dt}",
                    j + 2
                )));
            }
        }
        if times[0] != 0.0 {
            return Err(Error::Csv(format!("grid must start at t = 0, got {}", times[0])));
        }
        GridFunction::new(dt * n as f64, n, dim, values)
    }
}

/// The modular `rho_Phi(u) = integral of Phi(|u|)` by the rectangle rule.
///
/// Errors with `DomainOverflow` when an evaluation leaves f64 range; use
/// [`log_modular`] for overflow-safe diagnostics.
pub fn modular(phi: &NFunction, u: &GridFunction) -> Result<f64, Error> {
    let v = modular_value(phi, u);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(nfunction::Error::DomainOverflow { arg: u.sup_norm() }.into())
    }
}

/// Rectangle-rule modular with overflow mapped to `+inf`.
pub(crate) fn modular_value(phi: &NFunction, u: &GridFunction) -> f64 {
    let n = u.nodes();
    let terms: Vec<f64> = (0..n)
        .map(|j| {
            let v = phi.eval(u.node_norm(j));
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();
    let sum = pairwise_sum(&terms);
    sum * u.period() / n as f64
}

/// `log rho_Phi(u)`, computed by log-sum-exp through `Phi`'s log-space
/// evaluation when present. Returns `-inf` for `u = 0`.
pub fn log_modular(phi: &NFunction, u: &GridFunction) -> Result<f64, Error> {
    let n = u.nodes();
    let mut logs = Vec::with_capacity(n);
    for j in 0..n {
        let r = u.node_norm(j);
        if r == 0.0 {
            continue;
        }
        logs.push(phi.log_eval_or(r)?);
    }
    Ok(log_sum_exp(&logs) + (u.period() / n as f64).ln())
}

/// The Luxemburg gauge: the `lambda` with `rho_Phi(u / lambda) = 1`, located
/// by bisection (the map `lambda -> rho` is nonincreasing). Returns 0 for the
/// zero function.
pub fn luxemburg_norm(phi: &NFunction, u: &GridFunction, tol: f64) -> f64 {
    assert!(tol > 0.0);
    if u.is_zero() {
        return 0.0;
    }
    let rho = |lambda: f64| modular_value(phi, &u.scale(1.0 / lambda));
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    if rho(1.0) > 1.0 {
        // modular too big: grow lambda until it drops below 1
        while rho(hi) > 1.0 {
            hi *= 2.0;
        }
        lo = hi / 2.0;
    } else {
        while rho(lo) <= 1.0 && lo > f64::MIN_POSITIVE {
            lo /= 2.0;
        }
        hi = lo * 2.0;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let r = rho(mid);
        if (r - 1.0).abs() <= tol {
            return mid;
        }
        if r > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * mid {
            break;
        }
    }
    mid
}

/// Both norms of a grid function plus the minimizing Amemiya parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub luxemburg: f64,
    pub amemiya: f64,
    /// The `k` attaining `inf_k (1 + rho(k u)) / k`.
    pub k_star: f64,
    /// `rho_Phi(u / luxemburg)`, which sits at 1 for nonzero `u`.
    pub modular_at_unit: f64,
}

impl NormReport {
    fn zero() -> Self {
        Self { luxemburg: 0.0, amemiya: 0.0, k_star: 0.0, modular_at_unit: 0.0 }
    }
}

/// The Orlicz norm through the Amemiya formula: minimizes
/// `g(k) = (1 + rho_Phi(k u)) / k` by golden-section search on `log k`.
///
/// The initial bracket comes from the Luxemburg norm (the minimizer lives in
/// `[1/(2 lux), 2/lux]`) and is expanded when the minimum hugs an endpoint.
pub fn orlicz_norm(phi: &NFunction, u: &GridFunction, tol: f64) -> Result<NormReport, Error> {
    if u.is_zero() {
        return Ok(NormReport::zero());
    }
    let lux = luxemburg_norm(phi, u, tol);
    let g = |log_k: f64| -> f64 {
        let k = log_k.exp();
        let rho = modular_value(phi, &u.scale(k));
        if rho.is_finite() {
            (1.0 + rho) / k
        } else {
            f64::INFINITY
        }
    };
    let mut lo = (1.0 / (2.0 * lux)).ln();
    let mut hi = (2.0 / lux).ln();
    let mut expansions = 0;
    let (log_k_star, value) = loop {
        let (m, v) = golden_min(&g, lo, hi, 1e-10);
        let width = hi - lo;
        if m - lo < 0.02 * width {
            lo -= width;
        } else if hi - m < 0.02 * width {
            hi += width;
        } else {
            break (m, v);
        }
        expansions += 1;
        if expansions > 60 {
            return Err(Error::BracketExpansionFailed { expansions });
        }
    };
    let modular_at_unit = modular_value(phi, &u.scale(1.0 / lux));
    Ok(NormReport { luxemburg: lux, amemiya: value, k_star: log_k_star.exp(), modular_at_unit })
}

/// Golden-section minimizer on `[a, b]`; returns `(argmin, min)`.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Splits `u` into its mean and the oscillation around it.
/// The mean of the returned oscillation is zero up to round-off.
pub fn decompose(u: &GridFunction) -> (Vec<f64>, GridFunction) {
    let (n, d) = (u.nodes(), u.dim());
    let mut mean = vec![0.0f64; d];
    for (c, m) in mean.iter_mut().enumerate() {
        let comp: Vec<f64> = (0..n).map(|j| u.values()[j * d + c]).collect();
        *m = pairwise_sum(&comp) / n as f64;
    }
    let mut values = u.values().to_vec();
    for j in 0..n {
        for c in 0..d {
            values[j * d + c] -= mean[c];
        }
    }
    let tilde = GridFunction::new(u.period(), n, d, values).expect("valid oscillation grid");
    (mean, tilde)
}

/// Piecewise-constant forward-difference derivative on the periodic grid;
/// the samples sum to zero by telescoping.
pub fn derivative(u: &GridFunction) -> GridFunction {
    let (n, d) = (u.nodes(), u.dim());
    let scale = n as f64 / u.period();
    let mut values = Vec::with_capacity(n * d);
    for j in 0..n {
        let here = u.node(j);
        let next = u.node(j + 1);
        for c in 0..d {
            values.push((next[c] - here[c]) * scale);
        }
    }
    GridFunction::new(u.period(), n, d, values).expect("valid derivative grid")
}

/// One verified inequality: `lhs <= rhs` with slack `rhs - lhs`.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub(crate) fn verdict(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name: name.to_string(), lhs, rhs, slack, pass: slack >= -1e-7 * rhs.abs() }
    }
}

/// Default numeric conjugation used by the inequality suite. The inversion
/// domain is sized so the derivative stays within ~18 decades, which keeps
/// the node table dense enough for 1e-8-level conjugate values; queries
/// beyond the table fall back to direct bisection.
pub fn default_conjugate(phi: &NFunction) -> Result<NFunction, Error> {
    if let Some(c) = phi.closed_conjugate() {
        return Ok(c.clone());
    }
    let mut domain_max = 1e6;
    while domain_max > 1.0 {
        let d = phi.deriv(domain_max);
        if d.is_finite() && d <= 1e18 {
            break;
        }
        domain_max /= 2.0;
    }
    Ok(conjugate(phi, domain_max, 1e-12)?)
}

/// Hoelder pairing check: `integral(u . v) <= |u|_Phi |v|_Psi` with the
/// conjugate gauge on the second factor.
pub fn holder_check(
    u: &GridFunction,
    v: &GridFunction,
    phi: &NFunction,
) -> Result<InequalityReport, Error> {
    assert!(u.same_grid(v), "pairing needs a shared grid");
    let psi = default_conjugate(phi)?;
    let n = u.nodes();
    let terms: Vec<f64> = (0..n)
        .map(|j| u.node(j).iter().zip(v.node(j)).map(|(&a, &b)| a * b).sum::<f64>())
        .collect();
    let lhs = pairwise_sum(&terms) * u.period() / n as f64;
    let rhs = orlicz_norm(phi, u, 1e-10)?.amemiya * orlicz_norm(&psi, v, 1e-10)?.amemiya;
    Ok(InequalityReport::verdict("holder", lhs, rhs))
}

/// The two embedding inequalities of the periodic Sobolev-Orlicz space.
#[derive(Debug, Clone)]
pub struct SobolevReport {
    pub sobolev: InequalityReport,
    pub wirtinger: InequalityReport,
}

/// Checks `|u|_inf <= Phi^{-1}(1/T) max(1,T) |u|_{W1 LPhi}` and
/// `|u~|_inf <= T Phi^{-1}(1/T) |u'|_{LPhi}` on the grid.
pub fn sobolev_check(u: &GridFunction, phi: &NFunction) -> Result<SobolevReport, Error> {
    let t = u.period();
    let c = inverse(phi, 1.0 / t, 1e-12)?;
    let du = derivative(u);
    let norm_u = orlicz_norm(phi, u, 1e-10)?.amemiya;
    let norm_du = orlicz_norm(phi, &du, 1e-10)?.amemiya;
    let sobolev =
        InequalityReport::verdict("sobolev", u.sup_norm(), c * t.max(1.0) * (norm_u + norm_du));
    let (_, tilde) = decompose(u);
    let wirtinger =
        InequalityReport::verdict("sobolev-wirtinger", tilde.sup_norm(), t * c * norm_du);
    Ok(SobolevReport { sobolev, wirtinger })
}

/// Discrete constants for the norm-equivalence chain
/// `|u|_{W1 LPhi} <= C3 (|mean| + |u'|)` and `|mean| + |u'| <= C4 |u|_{W1 LPhi}`,
/// assembled from the Wirtinger constant and the norms of the constant 1.
pub fn equivalence_constants(phi: &NFunction, t: f64, nodes: usize) -> Result<(f64, f64), Error> {
    let one = GridFunction::constant(t, nodes, &[1.0]);
    let norm_one_phi = orlicz_norm(phi, &one, 1e-10)?.amemiya;
    let psi = default_conjugate(phi)?;
    let norm_one_psi = orlicz_norm(&psi, &one, 1e-10)?.amemiya;
    let c_inv = inverse(phi, 1.0 / t, 1e-12)?;
    let c3 = norm_one_phi.max(norm_one_phi * t * c_inv + 1.0);
    let c4 = (norm_one_psi / t).max(1.0);
    Ok((c3, c4))
}

/// One modular-coercivity scaling sweep: for `u_s = s u0`,
/// `log [ rho_Phi(u_s) / Phi0(k |u_s|_Phi) ]` per scale, computed in log
/// space so exponential modulars do not overflow. The norm of `u_s` is
/// `s |u0|_Phi` by homogeneity.
#[derive(Debug, Clone)]
pub struct CoercivitySweep {
    pub scales: Vec<f64>,
    pub log_ratio: Vec<f64>,
}

impl CoercivitySweep {
    /// Index after which the log-ratio increases monotonically, if any.
    pub fn eventually_monotone_from(&self) -> Option<usize> {
        let r = &self.log_ratio;
        if r.len() < 2 {
            return None;
        }
        let mut from = r.len() - 1;
        while from > 0 && r[from - 1] < r[from] {
            from -= 1;
        }
        if from == r.len() - 1 {
            None
        } else {
            Some(from)
        }
    }

    pub fn final_log_ratio(&self) -> f64 {
        *self.log_ratio.last().expect("nonempty sweep")
    }
}

pub fn coercivity_sweep(
    phi: &NFunction,
    phi0: &NFunction,
    u0: &GridFunction,
    k: f64,
    scales: &[f64],
) -> Result<CoercivitySweep, Error> {
    assert!(k > 0.0, "the norm multiplier must be positive");
    assert!(!u0.is_zero(), "the scaling family needs a nonzero base");
    let base_norm = orlicz_norm(phi, u0, 1e-10)?.amemiya;
    let mut log_ratio = Vec::with_capacity(scales.len());
    for &s in scales {
        let num = log_modular(phi, &u0.scale(s))?;
        let den = phi0.log_eval_or(k * s * base_norm)?;
        log_ratio.push(num - den);
    }
    Ok(CoercivitySweep { scales: scales.to_vec(), log_ratio })
}

/// Test-friendly access to the modular with `+inf` overflow semantics.
pub fn modular_or_inf(phi: &NFunction, u: &GridFunction) -> f64 {
    modular_value(phi, u)
}
