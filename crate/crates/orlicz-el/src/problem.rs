//! Problem instances: lagrangians, potentials and the full periodic
//! minimization spec consumed by the hypothesis checkers and the solver.

use std::sync::Arc;

use crate::nfunction::NFunction;

/// `L(t, x, y)` evaluator.
pub type LagrangianEval = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;
/// Partial-gradient evaluator (in `x` or in `y`).
pub type LagrangianGrad = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `F(t, x)` evaluator.
pub type PotentialEval = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// `grad_x F(t, x)` evaluator.
pub type PotentialGrad = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Evaluators for a Lagrange function and its partial gradients.
#[derive(Clone)]
pub struct Lagrangian {
    name: String,
    eval: LagrangianEval,
    grad_x: LagrangianGrad,
    grad_y: LagrangianGrad,
}

impl Lagrangian {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        grad_y: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad_x: Arc::new(grad_x),
            grad_y: Arc::new(grad_y),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        (self.eval)(t, x, y)
    }

    pub fn grad_x(&self, t: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.grad_x)(t, x, y)
    }

    pub fn grad_y(&self, t: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.grad_y)(t, x, y)
    }
}

impl std::fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lagrangian({})", self.name)
    }
}

/// A potential term `F(t, x)` with its spatial gradient.
#[derive(Clone)]
pub struct Potential {
    name: String,
    eval: PotentialEval,
    grad: PotentialGrad,
}

impl Potential {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), grad: Arc::new(grad) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.eval)(t, x)
    }

    pub fn grad(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.grad)(t, x)
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Potential({})", self.name)
    }
}

/// Descent/line-search knobs. The defaults are the fixed reproducible ones.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stopping threshold on the root-mean-square gradient norm.
    pub gradient_tolerance: f64,
    pub armijo_c1: f64,
    pub backtrack_factor: f64,
    /// Base radius of the constant-trajectory initialization scan.
    pub mean_search_radius: f64,
    /// Shift in the `(eps I + Laplacian)` preconditioner.
    pub precond_epsilon: f64,
    /// Bypass the heuristic doubling gate on the growth gauge.
    pub force: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            gradient_tolerance: 1e-8,
            armijo_c1: 1e-4,
            backtrack_factor: 0.5,
            mean_search_radius: 1.0,
            precond_epsilon: 1e-3,
            force: false,
        }
    }
}

/// The gauge chain used by the coercivity conditions: the sublinearity gauge,
/// the intermediate gauge, and the conjugate of the latter.
#[derive(Debug, Clone)]
pub struct HypothesisChain {
    pub phi0: NFunction,
    pub phi1: NFunction,
    pub psi1: NFunction,
}

/// A full periodic minimization instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub lagrangian: Lagrangian,
    /// Present when the lagrangian splits off a potential term.
    pub potential: Option<Potential>,
    /// The growth gauge of the lower bound `L >= Phi(|y|) + F`.
    pub phi: NFunction,
    pub period: f64,
    pub dim: usize,
    pub grid_nodes: usize,
    pub options: SolverOptions,
    /// Gauges for the coercivity diagnostics, when configured.
    pub chain: Option<HypothesisChain>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.grid_nodes < 8 {
            return Err(format!("grid needs at least 8 nodes, got {}", self.grid_nodes));
        }
        if !(self.period > 0.0) {
            return Err(format!("period must be positive, got {}", self.period));
        }
        if self.dim == 0 {
            return Err("dimension must be at least 1".into());
        }
        if !(self.options.gradient_tolerance > 0.0) {
            return Err("gradient tolerance must be positive".into());
        }
        Ok(())
    }
}
