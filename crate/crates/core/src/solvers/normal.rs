//! SOR on the normal equations `C^T C x = C^T d` through column actions.
//!
//! The sweep keeps the residual `r = d - C x` current: component `i` reads
//! `c_i . r`, moves, and subtracts its change times `c_i` from `r`. The
//! iterates are those of projected SOR on `A = C^T C`, `b = C^T d`, but `C^T C`
//! is never formed.

use super::driver::{run_fixed, run_freeze, run_wolfe, Observer};
use super::kernel::{componentwise_ok, Kernel, SweepOutcome};
use super::{SolveResult, SolverConfig};
use crate::diagnostics::nnls_kkt_residual;
use crate::error::{Error, Result};
use crate::linalg::{diff_norm2, dot, ColumnAction};
use crate::model::{clamp, NnlsProblem};

/// How the relaxation parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalMode {
    Fixed(f64),
    /// Wolfe-type step-size control.
    Wolfe,
    /// Wolfe control, then frozen at the windowed mean.
    Freeze,
}

struct NnlsKernel<'a, Op> {
    q: &'a NnlsProblem<Op>,
    residual: Vec<f64>,
    residual_old: Vec<f64>,
    prev: Vec<f64>,
    d_sq: f64,
}

impl<'a, Op: ColumnAction> NnlsKernel<'a, Op> {
    fn new(q: &'a NnlsProblem<Op>, x: &[f64]) -> Result<Self> {
        let residual = q.residual(x)?;
        Ok(Self {
            q,
            residual_old: vec![0.0; residual.len()],
            residual,
            prev: vec![0.0; x.len()],
            d_sq: dot(q.data(), q.data()),
        })
    }
}

impl<Op: ColumnAction> Kernel for NnlsKernel<'_, Op> {
    fn min_diag(&self) -> f64 {
        let op = self.q.operator();
        (0..op.cols()).map(|j| op.col_sq_norm(j)).fold(f64::INFINITY, f64::min)
    }

    fn sweep(&mut self, x: &mut [f64], omega: f64, stats: bool, check_h: Option<f64>) -> SweepOutcome {
        let op = self.q.operator();
        let (lower, upper) = (self.q.lower(), self.q.upper());
        self.prev.copy_from_slice(x);
        if stats {
            self.residual_old.copy_from_slice(&self.residual);
        }
        let mut out = SweepOutcome::default();
        for i in 0..x.len() {
            let norm_sq = op.col_sq_norm(i);
            let corr = op.col_dot(i, &self.residual);
            let xi = x[i];
            let relaxed = (1.0 - omega) * xi + omega * (xi + corr / norm_sq);
            let new = clamp(relaxed, lower[i], upper[i]);
            let dx = new - xi;
            if let Some(h) = check_h {
                if !componentwise_ok(dx, -corr, norm_sq, h, xi.abs() + (xi + corr / norm_sq).abs()) {
                    out.componentwise_violations += 1;
                }
            }
            if dx != 0.0 {
                op.col_axpy(i, -dx, &mut self.residual);
                x[i] = new;
            }
        }
        out.delta_norm = diff_norm2(x, &self.prev);
        if stats {
            // C dx = r_old - r_new
            let (mut r_sq, mut g_old_dx, mut quad) = (0.0, 0.0, 0.0);
            for (&ro, &rn) in self.residual_old.iter().zip(&self.residual) {
                let cdx = ro - rn;
                r_sq += ro * ro;
                g_old_dx -= ro * cdx;
                quad += cdx * cdx;
            }
            out.v_old = 0.5 * (r_sq - self.d_sq);
            out.g_old_dx = g_old_dx;
            out.v_new = out.v_old + g_old_dx + 0.5 * quad;
            out.g_new_dx = g_old_dx + quad;
        }
        out
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.q.objective(x).expect("dimension checked at entry")
    }

    fn kkt(&self, x: &[f64]) -> f64 {
        nnls_kkt_residual(self.q, x, 2.0).expect("dimension checked at entry").residual_norm
    }
}

/// Projected normal SOR from the projection of the origin onto the box.
pub fn normal_psor_solve<Op: ColumnAction>(
    q: &NnlsProblem<Op>,
    mode: NormalMode,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    normal_psor_solve_from(q, mode, cfg, None)
}

pub fn normal_psor_solve_from<Op: ColumnAction>(
    q: &NnlsProblem<Op>,
    mode: NormalMode,
    cfg: &SolverConfig,
    x0: Option<Vec<f64>>,
) -> Result<SolveResult> {
    normal_psor_solve_observed(q, mode, cfg, x0, &mut |_| {})
}

/// As [`normal_psor_solve_from`], calling `observe` with every new iterate.
pub fn normal_psor_solve_observed<Op: ColumnAction>(
    q: &NnlsProblem<Op>,
    mode: NormalMode,
    cfg: &SolverConfig,
    x0: Option<Vec<f64>>,
    observe: Observer<'_>,
) -> Result<SolveResult> {
    let x = match x0 {
        None => {
            let mut x = vec![0.0; q.dim()];
            q.project(&mut x);
            x
        }
        Some(x) => {
            crate::error::check_len(q.dim(), x.len())?;
            let mut p = x.clone();
            q.project(&mut p);
            if p != x {
                return Err(Error::InvalidParameter("initial guess lies outside the box".into()));
            }
            x
        }
    };
    let mut kernel = NnlsKernel::new(q, &x)?;
    match mode {
        NormalMode::Fixed(omega) => run_fixed(&mut kernel, x, omega, cfg, observe),
        NormalMode::Wolfe => run_wolfe(&mut kernel, x, cfg, observe),
        NormalMode::Freeze => run_freeze(&mut kernel, x, cfg, observe),
    }
}
