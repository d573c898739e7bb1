//! Projected SOR and its adaptive variants.
//!
//! Every solver here shares one sweep kernel: a Gauss-Seidel ordered pass in
//! which each component is relaxed and then immediately clamped onto its box.
//! The adaptive variants treat the relaxation parameter `omega` as a step size
//! `h = 2 omega / (2 - omega)` and grow or shrink it between sweeps from
//! Armijo/curvature tests on quantities the sweep already produces.

mod adaptive;
mod driver;
mod kernel;
mod normal;
mod psor;

use serde::{Deserialize, Serialize};

use crate::diagnostics::IterationTrace;
use crate::error::{Error, Result};

pub use adaptive::{
    apsor_freeze_solve, apsor_freeze_solve_from, apsor_shift_solve, apsor_shift_solve_from, apsor_wolfe_solve,
    apsor_wolfe_solve_from, wolfe_update,
};
pub use kernel::{itoh_abe_step, psor_sweep, sor_sweep};
pub use normal::{normal_psor_solve, normal_psor_solve_from, normal_psor_solve_observed, NormalMode};
pub use psor::{naive_psor_solve, naive_psor_solve_from, naive_sweep, psor_solve, psor_solve_from};

/// `omega = 2h / (2 + h)`
pub fn h_to_omega(h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    Ok(2.0 * h / (2.0 + h))
}

/// `h = 2 omega / (2 - omega)`
pub fn omega_to_h(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidParameter(format!("relaxation parameter must lie in (0, 2), got {omega}")));
    }
    Ok(2.0 * omega / (2.0 - omega))
}

/// A step size `h > 0` together with its relaxation parameter.
///
/// `h` is stored; `omega` is derived on demand so the two never drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize {
    h: f64,
}

impl StepSize {
    /// `h = 2`, `omega = 1` (Gauss-Seidel).
    pub const GAUSS_SEIDEL: StepSize = StepSize { h: 2.0 };

    pub fn from_h(h: f64) -> Result<Self> {
        h_to_omega(h)?;
        Ok(Self { h })
    }

    pub fn from_omega(omega: f64) -> Result<Self> {
        Ok(Self { h: omega_to_h(omega)? })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn omega(&self) -> f64 {
        2.0 * self.h / (2.0 + self.h)
    }
}

/// Parameters of the Wolfe-type step-size controller and its safeguard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
    pub eps_omega: f64,
    pub max_omega: f64,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self { c1: 0.89, c2: 0.95, lambda1: 1.15, lambda2: 1.4, rho: 0.85, eps_omega: 0.05, max_omega: 1.99 }
    }
}

impl WolfeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("Wolfe parameters: {what}")));
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            return bad("c1 must lie in (0, 1)");
        }
        if !(self.c2 > self.c1 && self.c2 < 1.0) {
            return bad("c2 must lie in (c1, 1)");
        }
        if !(self.lambda1 > 1.0) {
            return bad("lambda1 must exceed 1");
        }
        if !(self.lambda2 > self.lambda1) {
            return bad("lambda2 must exceed lambda1");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.eps_omega > 0.0 && self.eps_omega < 2.0) {
            return bad("eps_omega must lie in (0, 2)");
        }
        if !(self.max_omega > self.eps_omega && self.max_omega < 2.0) {
            return bad("max_omega must lie in (eps_omega, 2)");
        }
        Ok(())
    }
}

/// Shift used to build the starting point of [`apsor_shift_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShiftSigma {
    /// `sigma = min(diag(A))`
    #[default]
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Stop once `||x^(k+1) - x^(k)||_2 <= tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub wolfe: WolfeParams,
    /// Window length of the decrement statistics used by the freezing solver.
    pub freeze_m: usize,
    /// Adaptive iterations continue unconditionally while the last decrement
    /// `log10 ||dx||` is above this value.
    pub freeze_threshold: f64,
    pub shift_sigma: ShiftSigma,
    pub record_trace: bool,
    /// Sample the KKT residual every this many iterations; 0 disables.
    pub kkt_every: usize,
    /// Re-evaluate the objective independently every iteration and count
    /// violations of the dissipation bound. Costs one extra matvec per sweep.
    pub verify_dissipation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            wolfe: WolfeParams::default(),
            freeze_m: 10,
            freeze_threshold: -2.0,
            shift_sigma: ShiftSigma::Auto,
            record_trace: true,
            kkt_every: 10,
            verify_dissipation: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.freeze_m == 0 {
            return Err(Error::InvalidParameter("freeze_m must be at least 1".into()));
        }
        if let ShiftSigma::Value(s) = self.shift_sigma {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter("shift sigma must be positive".into()));
            }
        }
        self.wolfe.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: Option<IterationTrace>,
    /// Set by the freezing solver once the relaxation parameter is fixed.
    pub frozen_omega: Option<f64>,
    /// Iterations spent on the shifted problem (shift-started solver only).
    pub shift_iterations: Option<usize>,
    /// KKT residual (`h = 2`) at the returned point.
    pub final_kkt: f64,
    /// Iterations whose independently evaluated objective broke the
    /// dissipation bound; only counted when `verify_dissipation` is set.
    pub dissipation_violations: usize,
    /// Single-component updates that broke the componentwise bound; only
    /// counted when `verify_dissipation` is set.
    pub componentwise_violations: usize,
    /// The naive projected iteration ended in a 2-cycle.
    pub cycle_detected: bool,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}
