//! Iteration loops shared by the matrix and the column-action kernels.

use super::kernel::{Kernel, SweepOutcome};
use super::{h_to_omega, omega_to_h, wolfe_update, SolveResult, SolveStatus, SolverConfig};
use crate::diagnostics::{check_dissipation, decrement_stats, IterationTrace, TraceEvent};
use crate::error::{Error, Result};

pub(crate) type Observer<'o> = &'o mut dyn FnMut(&[f64]);

/// Bookkeeping common to every loop: trace rows, sampled KKT residuals and
/// the optional independent dissipation check.
pub(crate) struct Recorder<'c> {
    cfg: &'c SolverConfig,
    pub trace: IterationTrace,
    keep_trace: bool,
    v_exact: Option<f64>,
    min_diag: f64,
    pub dissipation_violations: usize,
    pub componentwise_violations: usize,
    pub iterations: usize,
}

impl<'c> Recorder<'c> {
    pub fn new<K: Kernel>(kernel: &K, x0: &[f64], cfg: &'c SolverConfig, keep_trace: bool) -> Self {
        let v_exact = cfg.verify_dissipation.then(|| kernel.objective(x0));
        Self {
            cfg,
            trace: IterationTrace::new(),
            keep_trace,
            v_exact,
            min_diag: kernel.min_diag(),
            dissipation_violations: 0,
            componentwise_violations: 0,
            iterations: 0,
        }
    }

    pub fn check_h(&self, h: f64) -> Option<f64> {
        self.cfg.verify_dissipation.then_some(h)
    }

    pub fn needs_stats(&self) -> bool {
        self.keep_trace
    }

    /// Records the sweep just performed with `(omega, h)` and returns an error
    /// if the new iterate is not finite.
    pub fn record<K: Kernel>(&mut self, kernel: &K, x: &[f64], out: &SweepOutcome, omega: f64, h: f64) -> Result<()> {
        self.iterations += 1;
        if !out.delta_norm.is_finite() {
            return Err(Error::NonFinite { iteration: self.iterations });
        }
        self.componentwise_violations += out.componentwise_violations;
        if let Some(v_old) = self.v_exact {
            let v_new = kernel.objective(x);
            if !check_dissipation(v_new, v_old, out.delta_norm, h, self.min_diag) {
                self.dissipation_violations += 1;
            }
            self.v_exact = Some(v_new);
        }
        if self.keep_trace {
            let every = self.cfg.kkt_every;
            let kkt = (every > 0 && self.iterations.is_multiple_of(every)).then(|| kernel.kkt(x));
            self.trace.push(out.delta_norm, out.v_new, omega, h, kkt);
        }
        Ok(())
    }

    pub fn mark(&mut self, event: TraceEvent) {
        self.trace.mark(event);
    }

    pub fn finish<K: Kernel>(self, kernel: &K, x: Vec<f64>, status: SolveStatus) -> SolveResult {
        let final_kkt = kernel.kkt(&x);
        SolveResult {
            x,
            status,
            iterations: self.iterations,
            trace: self.cfg.record_trace.then_some(self.trace),
            frozen_omega: None,
            shift_iterations: None,
            final_kkt,
            dissipation_violations: self.dissipation_violations,
            componentwise_violations: self.componentwise_violations,
            cycle_detected: false,
        }
    }
}

pub(crate) fn run_fixed<K: Kernel>(
    kernel: &mut K,
    mut x: Vec<f64>,
    omega: f64,
    cfg: &SolverConfig,
    observe: Observer<'_>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let h = omega_to_h(omega)?;
    let mut rec = Recorder::new(kernel, &x, cfg, cfg.record_trace);
    let mut status = SolveStatus::MaxIterations;
    while rec.iterations < cfg.max_iterations {
        let out = kernel.sweep(&mut x, omega, rec.needs_stats(), rec.check_h(h));
        rec.record(kernel, &x, &out, omega, h)?;
        observe(&x);
        if out.delta_norm <= cfg.tolerance {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(rec.finish(kernel, x, status))
}

/// Step-size state of the Wolfe controller.
struct Controller {
    h: f64,
    omega: f64,
}

impl Controller {
    fn start() -> Self {
        Self { h: 2.0, omega: 1.0 }
    }

    /// Chooses the next step from the sweep just taken; returns `true` when
    /// the safeguard reset `(h, omega)` to `(2, 1)`.
    fn update(&mut self, out: &SweepOutcome, cfg: &SolverConfig) -> bool {
        let wp = &cfg.wolfe;
        let h_next = wolfe_update(self.h, out.v_new, out.v_old, out.g_old_dx, out.g_new_dx, wp);
        match h_to_omega(h_next) {
            Ok(w) if w > wp.eps_omega && w < wp.max_omega => {
                self.h = h_next;
                self.omega = w;
                false
            }
            _ => {
                *self = Self::start();
                true
            }
        }
    }
}

pub(crate) fn run_wolfe<K: Kernel>(
    kernel: &mut K,
    mut x: Vec<f64>,
    cfg: &SolverConfig,
    observe: Observer<'_>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let mut rec = Recorder::new(kernel, &x, cfg, cfg.record_trace);
    let mut ctl = Controller::start();
    let mut status = SolveStatus::MaxIterations;
    while rec.iterations < cfg.max_iterations {
        let out = kernel.sweep(&mut x, ctl.omega, true, rec.check_h(ctl.h));
        rec.record(kernel, &x, &out, ctl.omega, ctl.h)?;
        observe(&x);
        if out.delta_norm <= cfg.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        if ctl.update(&out, cfg) {
            rec.mark(TraceEvent::Reset);
        }
    }
    Ok(rec.finish(kernel, x, status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FreezePhase {
    /// Adapt until the decrement drops to the threshold.
    Warmup,
    /// Fill the statistics window.
    Fill(usize),
    /// Adapt while the mean slope keeps improving.
    Watch,
    /// Relaxation parameter fixed.
    Frozen,
}

pub(crate) fn run_freeze<K: Kernel>(
    kernel: &mut K,
    mut x: Vec<f64>,
    cfg: &SolverConfig,
    observe: Observer<'_>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let m = cfg.freeze_m;
    let mut rec = Recorder::new(kernel, &x, cfg, true);
    let mut ctl = Controller::start();
    let mut phase = FreezePhase::Warmup;
    let mut frozen = None;
    let mut status = SolveStatus::MaxIterations;

    while rec.iterations < cfg.max_iterations {
        let out = kernel.sweep(&mut x, ctl.omega, true, rec.check_h(ctl.h));
        rec.record(kernel, &x, &out, ctl.omega, ctl.h)?;
        observe(&x);
        if out.delta_norm <= cfg.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        if phase == FreezePhase::Frozen {
            continue;
        }
        if ctl.update(&out, cfg) {
            rec.mark(TraceEvent::Reset);
        }
        let last = rec.trace.len() - 1;
        phase = match phase {
            FreezePhase::Warmup if rec.trace.records()[last].decrement <= cfg.freeze_threshold => {
                rec.mark(TraceEvent::Phase(2));
                FreezePhase::Fill(m + 1)
            }
            FreezePhase::Fill(left) if left > 1 => FreezePhase::Fill(left - 1),
            FreezePhase::Fill(_) => {
                rec.mark(TraceEvent::Phase(3));
                FreezePhase::Watch
            }
            other => other,
        };
        if phase == FreezePhase::Watch {
            let (s_now, omega_bar) = decrement_stats(&rec.trace, last, m)?;
            let (s_before, _) = decrement_stats(&rec.trace, last - 1, m)?;
            if s_now > s_before {
                ctl = Controller { h: omega_to_h(omega_bar)?, omega: omega_bar };
                frozen = Some(omega_bar);
                rec.mark(TraceEvent::Freeze);
                phase = FreezePhase::Frozen;
            }
        }
    }
    let mut result = rec.finish(kernel, x, status);
    result.frozen_omega = frozen;
    Ok(result)
}
