use super::driver::{run_freeze, run_wolfe};
use super::kernel::NqpKernel;
use super::{ShiftSigma, SolveResult, SolverConfig, WolfeParams};
use crate::diagnostics::TraceEvent;
use crate::error::{Error, Result};
use crate::model::NqpProblem;

/// Next step size from the Armijo and curvature tests on the step just taken.
///
/// Armijo holds and curvature holds: `lambda1 * h`; Armijo holds but the
/// curvature test fails (step too short): `lambda2 * h`; Armijo fails:
/// `rho * h`. The tests only steer the next step; the current iterate is
/// always kept.
pub fn wolfe_update(h: f64, v_new: f64, v_old: f64, g_old_dx: f64, g_new_dx: f64, wp: &WolfeParams) -> f64 {
    if v_new <= v_old + wp.c1 * g_old_dx {
        if wp.c2 * g_old_dx <= g_new_dx {
            wp.lambda1 * h
        } else {
            wp.lambda2 * h
        }
    } else {
        wp.rho * h
    }
}

pub(crate) fn start_point(p: &NqpProblem, x0: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match x0 {
        None => Ok(p.default_start()),
        Some(x) if p.is_feasible(&x) => Ok(x),
        Some(x) if x.len() != p.dim() => Err(Error::DimensionMismatch { expected: p.dim(), got: x.len() }),
        Some(_) => Err(Error::InvalidParameter("initial guess lies outside the box".into())),
    }
}

/// Adaptive projected SOR: starts at `(h, omega) = (2, 1)` and updates the
/// step size after every sweep with [`wolfe_update`], resetting to `(2, 1)`
/// whenever `omega` leaves `(eps_omega, max_omega)`.
pub fn apsor_wolfe_solve(p: &NqpProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    apsor_wolfe_solve_from(p, cfg, None)
}

pub fn apsor_wolfe_solve_from(p: &NqpProblem, cfg: &SolverConfig, x0: Option<Vec<f64>>) -> Result<SolveResult> {
    let x = start_point(p, x0)?;
    run_wolfe(&mut NqpKernel::new(p), x, cfg, &mut |_| {})
}

/// Adaptive projected SOR that fixes the relaxation parameter once the mean
/// slope of `log10 ||dx||` over a window of `freeze_m` iterations stops
/// improving. The fixed value is the mean of the last `freeze_m + 1`
/// parameters and is reported in [`SolveResult::frozen_omega`].
pub fn apsor_freeze_solve(p: &NqpProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    apsor_freeze_solve_from(p, cfg, None)
}

pub fn apsor_freeze_solve_from(p: &NqpProblem, cfg: &SolverConfig, x0: Option<Vec<f64>>) -> Result<SolveResult> {
    let x = start_point(p, x0)?;
    run_freeze(&mut NqpKernel::new(p), x, cfg, &mut |_| {})
}

/// Two-stage adaptive solve: the problem shifted by `sigma I` is solved first
/// and its solution seeds the solve of the original problem. The iteration
/// count covers both stages.
pub fn apsor_shift_solve(p: &NqpProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    apsor_shift_solve_from(p, cfg, None)
}

pub fn apsor_shift_solve_from(p: &NqpProblem, cfg: &SolverConfig, x0: Option<Vec<f64>>) -> Result<SolveResult> {
    cfg.validate()?;
    let shifted = p.shift(resolve_sigma(p, cfg))?;
    let stage1 = apsor_wolfe_solve_from(&shifted, cfg, x0)?;
    let mut stage2 = apsor_wolfe_solve_from(p, cfg, Some(stage1.x))?;

    if let (Some(mut joined), Some(t2)) = (stage1.trace, stage2.trace.take()) {
        let offset = joined.len();
        joined.extend(t2);
        joined.mark_at(offset, TraceEvent::Stage2);
        stage2.trace = Some(joined);
    }
    stage2.shift_iterations = Some(stage1.iterations);
    stage2.iterations += stage1.iterations;
    stage2.dissipation_violations += stage1.dissipation_violations;
    stage2.componentwise_violations += stage1.componentwise_violations;
    Ok(stage2)
}

/// The shift actually used for a given configuration.
pub(crate) fn resolve_sigma(p: &NqpProblem, cfg: &SolverConfig) -> f64 {
    match cfg.shift_sigma {
        ShiftSigma::Auto => p.matrix().min_diag(),
        ShiftSigma::Value(s) => s,
    }
}
