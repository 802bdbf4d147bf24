//! Backward Euler in time, P1 in space: each step minimises the strictly
//! convex step energy
//!
//! ```text
//!   J_m(w) = 1/(2κ) ‖w − u^{m−1}‖₂² + ∫ φ(|Dw|) + ε/2 |Dw|² − (f(t_m), w)
//! ```
//!
//! over `V_h` by Newton's method with backtracking on `J_m`. The
//! Euler–Lagrange equation of `J_m` is the discrete equation
//! `(d_t u^m, v) + (S^ε(Du^m), Dv) = (f(t_m), v)` for all `v ∈ V_h`.

mod problem;

use alloc::vec::Vec;

pub use problem::{Boundary, NewtonSystem, Problem};

use crate::fe::{FeError, FeFunction};
use crate::linalg::LinalgError;

/// Perturbation weight switched on for degenerate (`δ = 0`, `p < 2`) runs.
pub const DEGENERATE_EPSILON: f64 = 1e-10;

/// Uniform partition `t_m = m·T/M` of `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self, StepperError> {
        if !(t_final > 0.0 && t_final.is_finite()) || steps == 0 {
            return Err(StepperError::InvalidGrid { t_final, steps });
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `κ = T/M`.
    pub fn kappa(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// `t_m`, with `t_M = T` exactly.
    pub fn node(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_final
        } else {
            m as f64 * self.t_final / self.steps as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NewtonOptions {
    /// Absolute Euclidean norm of the free-dof residual.
    pub tol: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease parameter of the backtracking.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Use [`DEGENERATE_EPSILON`] when `δ = 0`, `p < 2` and `ε = 0`.
    pub auto_regularize: bool,
    /// Retries with a larger `ε` after an indefinite tangent.
    pub regularization_retries: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 500,
            armijo: 1e-4,
            max_backtracks: 50,
            auto_regularize: true,
            regularization_retries: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepReport {
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub line_search_backtracks: usize,
    /// Iterations that took the secant (Kačanov) step instead of Newton's.
    pub secant_steps: usize,
    /// `J_m(initial guess) − J_m(u^m)`.
    pub step_energy_decrease: f64,
    /// `½ d_t‖u^m‖₂² + (S(Du^m), Du^m) − (f(t_m), u^m)`; only recorded for
    /// homogeneous boundary data, where it is bounded above by the solver
    /// tolerance.
    pub energy_inequality_residual: Option<f64>,
    /// `J_m` at the initial guess and after every Newton update.
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    /// `ε` actually used in this step.
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StepFailure {
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        residual_history: Vec<f64>,
    },
    #[error("line search failed at Newton iteration {iteration} (residual {residual:e})")]
    LineSearch { iteration: usize, residual: f64 },
    #[error("tangent not positive definite after {retries} regularization retries")]
    Indefinite { retries: usize, source: LinalgError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StepperError {
    #[error("time grid needs T > 0 and M >= 1 (got T = {t_final}, M = {steps})")]
    InvalidGrid { t_final: f64, steps: usize },
    #[error("step {step}: {source}")]
    Step { step: usize, source: StepFailure },
    #[error("initial projection failed: {0}")]
    Projection(#[from] FeError),
}

/// `u_h^0, …, u_h^M` with per-step reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<FeFunction>,
    pub reports: Vec<StepReport>,
    /// `‖u_h^m‖₂²` for `m = 0..=M`.
    pub l2_sq: Vec<f64>,
    /// `‖F(Du_h^m)‖₂²` for `m = 0..=M`.
    pub f_sq: Vec<f64>,
}

impl Trajectory {
    /// `max_m ‖u_h^m‖₂² + κ Σ_{m≥1} ‖F(Du_h^m)‖₂²`.
    pub fn energy_bound(&self) -> f64 {
        let max = self.l2_sq.iter().copied().fold(0.0, f64::max);
        max + self.grid.kappa() * self.f_sq.iter().skip(1).sum::<f64>()
    }

    pub fn newton_total(&self) -> usize {
        self.reports.iter().map(|r| r.newton_iterations).sum()
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            grid: self.grid,
            iterations: self.reports.iter().map(|r| r.newton_iterations).collect(),
            residuals: self.reports.iter().map(|r| r.final_residual_norm).collect(),
            l2_sq: self.l2_sq.clone(),
            f_sq: self.f_sq.clone(),
            energy_bound: self.energy_bound(),
        }
    }
}

/// Per-step numbers of a [`Trajectory`], without the states.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectorySummary {
    pub grid: TimeGrid,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub l2_sq: Vec<f64>,
    pub f_sq: Vec<f64>,
    pub energy_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(1.0, 3).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(3), 1.0);
        assert!((g.kappa() - 1.0 / 3.0).abs() < 1e-16);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }
}
