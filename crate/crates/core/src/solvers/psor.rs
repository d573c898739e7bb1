use super::adaptive::start_point;
use super::driver::run_fixed;
use super::kernel::{sor_sweep, NqpKernel};
use super::{omega_to_h, SolveResult, SolveStatus, SolverConfig};
use crate::diagnostics::{kkt_residual, IterationTrace, TraceEvent};
use crate::error::{check_len, Result};
use crate::linalg::diff_norm2;
use crate::model::NqpProblem;

/// Projected SOR with a fixed relaxation parameter `omega in (0, 2)`, started
/// from the projection of the origin onto the box.
pub fn psor_solve(p: &NqpProblem, omega: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    psor_solve_from(p, omega, cfg, None)
}

pub fn psor_solve_from(p: &NqpProblem, omega: f64, cfg: &SolverConfig, x0: Option<Vec<f64>>) -> Result<SolveResult> {
    let x = start_point(p, x0)?;
    run_fixed(&mut NqpKernel::new(p), x, omega, cfg, &mut |_| {})
}

/// One sweep of the naive variant: a full unprojected SOR sweep followed by a
/// single projection of the whole vector.
pub fn naive_sweep(p: &NqpProblem, x: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_len(p.dim(), x.len())?;
    let mut next = sor_sweep(p.matrix(), p.rhs(), x, omega)?;
    p.project(&mut next);
    Ok(next)
}

/// Iterates [`naive_sweep`]. Unlike projected SOR this map need not decrease
/// the objective and its fixed points need not be optimal.
///
/// A 2-cycle (`x^(k+1) == x^(k-1)` to `1e-14` while the step is still above
/// the tolerance) stops the run with `MaxIterations`, `cycle_detected` set and
/// a `cycle` event in the trace.
pub fn naive_psor_solve(p: &NqpProblem, omega: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    naive_psor_solve_from(p, omega, cfg, None)
}

pub fn naive_psor_solve_from(
    p: &NqpProblem,
    omega: f64,
    cfg: &SolverConfig,
    x0: Option<Vec<f64>>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let h = omega_to_h(omega)?;
    let mut x = start_point(p, x0)?;
    let mut before: Option<Vec<f64>> = None;
    let mut trace = IterationTrace::new();
    let mut status = SolveStatus::MaxIterations;
    let mut cycle = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let next = naive_sweep(p, &x, omega)?;
        iterations += 1;
        let delta = diff_norm2(&next, &x);
        if !delta.is_finite() {
            return Err(crate::Error::NonFinite { iteration: iterations });
        }
        if cfg.record_trace {
            let kkt = (cfg.kkt_every > 0 && iterations % cfg.kkt_every == 0)
                .then(|| kkt_residual(p, &next, 2.0).map(|r| r.residual_norm))
                .transpose()?;
            trace.push(delta, p.objective(&next)?, omega, h, kkt);
        }
        if delta <= cfg.tolerance {
            x = next;
            status = SolveStatus::Converged;
            break;
        }
        let returned = before.as_ref().is_some_and(|b| b.iter().zip(&next).all(|(u, v)| (u - v).abs() <= 1e-14));
        before = Some(std::mem::replace(&mut x, next));
        if returned {
            cycle = true;
            trace.mark(TraceEvent::Cycle);
            break;
        }
    }
    let final_kkt = kkt_residual(p, &x, 2.0)?.residual_norm;
    Ok(SolveResult {
        x,
        status,
        iterations,
        trace: cfg.record_trace.then_some(trace),
        frozen_omega: None,
        shift_iterations: None,
        final_kkt,
        dissipation_violations: 0,
        componentwise_violations: 0,
        cycle_detected: cycle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseSymMatrix;

    fn cycle3() -> NqpProblem {
        let a =
            SparseSymMatrix::from_dense(&[vec![2.0, -1.0, 0.5], vec![-1.0, 2.0, -1.0], vec![0.5, -1.0, 2.0]]).unwrap();
        NqpProblem::new(a, vec![2.0, -2.0, 2.0]).unwrap()
    }

    #[test]
    fn converges_on_three_by_three() {
        let p = cycle3();
        let cfg = SolverConfig::default();
        for omega in [0.5, 1.0, 1.5, 1.9] {
            let r = psor_solve(&p, omega, &cfg).unwrap();
            assert!(r.converged(), "omega {omega}");
            let err = r.x.iter().zip([0.8, 0.0, 0.8]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "omega {omega}: err {err}");
            assert!(r.iterations < 500);
        }
    }

    #[test]
    fn origin_optimal_converges_in_one_sweep() {
        let a = SparseSymMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let p = NqpProblem::new(a, vec![-1.0, 0.0]).unwrap();
        let r = psor_solve(&p, 1.3, &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.x, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_omega_outside_interval() {
        let p = cycle3();
        assert!(psor_solve(&p, 2.2, &SolverConfig::default()).is_err());
        assert!(psor_solve(&p, 0.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn naive_stagnates_on_three_by_three() {
        let p = cycle3();
        let x1 = naive_sweep(&p, &[0.0; 3], 1.9).unwrap();
        assert!((x1[0] - 1.9).abs() < 1e-12);
        assert_eq!(x1[1], 0.0);
        assert!((x1[2] - 0.90725).abs() < 1e-12);
        assert_eq!(naive_sweep(&p, &x1, 1.9).unwrap(), vec![0.0; 3]);

        let r = naive_psor_solve(&p, 1.9, &SolverConfig::default()).unwrap();
        assert!(r.cycle_detected);
        assert_eq!(r.status, SolveStatus::MaxIterations);
        let trace = r.trace.unwrap();
        assert_eq!(trace.events().last().map(|(_, e)| e), Some(TraceEvent::Cycle));
    }

    #[test]
    fn first_naive_iterate_follows_closed_form() {
        let p = cycle3();
        for omega in [0.4, 1.0, 1.6, 1.9] {
            let x1 = naive_sweep(&p, &[0.0; 3], omega).unwrap();
            let third = 0.5 * omega * (2.0 - 1.5 * omega + 0.5 * omega * omega);
            assert!((x1[0] - omega).abs() < 1e-14);
            assert!((x1[2] - third).abs() < 1e-14);
        }
    }
}
