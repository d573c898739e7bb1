use crate::diagnostics::kkt_residual;
use crate::error::{check_len, Result};
use crate::linalg::{diff_norm2, SparseSymMatrix};
use crate::model::{clamp, NqpProblem};

/// Quantities gathered during one sweep `x_old -> x_new`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SweepOutcome {
    pub delta_norm: f64,
    /// `V(x_old)`; only filled when statistics were requested.
    pub v_old: f64,
    /// `V(x_new)`
    pub v_new: f64,
    /// `grad V(x_old) . dx`
    pub g_old_dx: f64,
    /// `grad V(x_new) . dx`
    pub g_new_dx: f64,
    /// Single-component updates that broke `dV_i <= -(a_ii/h) dx_i^2`.
    pub componentwise_violations: usize,
}

/// What the solver drivers need from a problem: an in-place projected sweep
/// plus independent evaluations for diagnostics.
pub(crate) trait Kernel {
    fn min_diag(&self) -> f64;

    /// One projected sweep with relaxation `omega`. With `stats`, the outcome
    /// also carries the objective and directional derivatives used by the
    /// step-size controller. `check_h` enables the componentwise dissipation
    /// count against step size `h`.
    fn sweep(&mut self, x: &mut [f64], omega: f64, stats: bool, check_h: Option<f64>) -> SweepOutcome;

    /// Objective evaluated from scratch.
    fn objective(&self, x: &[f64]) -> f64;

    /// KKT residual at `h = 2`.
    fn kkt(&self, x: &[f64]) -> f64;
}

pub(crate) struct NqpKernel<'a> {
    p: &'a NqpProblem,
    prev: Vec<f64>,
}

impl<'a> NqpKernel<'a> {
    pub fn new(p: &'a NqpProblem) -> Self {
        Self { p, prev: vec![0.0; p.dim()] }
    }
}

/// Checks the single-component decrease `dV <= -(a_ii / h) dx^2`. With no
/// clamping this holds with equality, so the slack covers the rounding of
/// the update on values of magnitude `mag` (old value plus relaxation target).
#[inline]
pub(crate) fn componentwise_ok(dx: f64, grad_i: f64, diag: f64, h: f64, mag: f64) -> bool {
    let dv = dx * grad_i + 0.5 * diag * dx * dx;
    let bound = -(diag / h) * dx * dx;
    let inv_omega = 0.5 + 1.0 / h;
    let rounding = 4.0 * f64::EPSILON * inv_omega * diag * dx.abs() * (2.0 * mag + dx.abs());
    let scale = (dx * grad_i).abs() + diag * dx * dx;
    dv <= bound + rounding + 1e-12 * scale + f64::MIN_POSITIVE
}

impl Kernel for NqpKernel<'_> {
    fn min_diag(&self) -> f64 {
        self.p.matrix().min_diag()
    }

    fn sweep(&mut self, x: &mut [f64], omega: f64, stats: bool, check_h: Option<f64>) -> SweepOutcome {
        let a = self.p.matrix();
        let b = self.p.rhs();
        let (lower, upper) = (self.p.lower(), self.p.upper());
        let diag = a.diag();
        self.prev.copy_from_slice(x);
        let prev = &self.prev;

        let mut out = SweepOutcome::default();
        let (mut v_old, mut g_old_dx, mut quad) = (0.0, 0.0, 0.0);
        for i in 0..x.len() {
            let (cols, vals) = a.row_slices(i);
            let xi = x[i];
            let mut off = 0.0;
            let (mut off_old, mut lower_dx) = (0.0, 0.0);
            for (&j, &aij) in cols.iter().zip(vals) {
                if j == i {
                    continue;
                }
                off += aij * x[j];
                if stats {
                    off_old += aij * prev[j];
                    if j < i {
                        lower_dx += aij * (x[j] - prev[j]);
                    }
                }
            }
            let aii = diag[i];
            let relaxed = (1.0 - omega) * xi + (omega / aii) * (b[i] - off);
            let new = clamp(relaxed, lower[i], upper[i]);
            x[i] = new;
            let dx = new - xi;
            if let Some(h) = check_h {
                let target = (b[i] - off) / aii;
                if !componentwise_ok(dx, aii * (xi - target), aii, h, xi.abs() + target.abs()) {
                    out.componentwise_violations += 1;
                }
            }
            if stats {
                let ax_old = off_old + aii * xi;
                v_old += xi * (0.5 * ax_old - b[i]);
                g_old_dx += (ax_old - b[i]) * dx;
                quad += dx * (aii * dx + 2.0 * lower_dx);
            }
        }
        out.delta_norm = diff_norm2(x, prev);
        if stats {
            out.v_old = v_old;
            out.g_old_dx = g_old_dx;
            out.v_new = v_old + g_old_dx + 0.5 * quad;
            out.g_new_dx = g_old_dx + quad;
        }
        out
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.p.objective(x).expect("dimension checked at entry")
    }

    fn kkt(&self, x: &[f64]) -> f64 {
        kkt_residual(self.p, x, 2.0).expect("dimension checked at entry").residual_norm
    }
}

/// One projected SOR sweep: each component is relaxed in Gauss-Seidel order
/// and clamped onto `[lower_i, upper_i]` before the next component is touched.
///
/// Returns the new iterate and `||x_new - x||_2`. `omega` is not validated.
pub fn psor_sweep(p: &NqpProblem, x: &[f64], omega: f64) -> Result<(Vec<f64>, f64)> {
    check_len(p.dim(), x.len())?;
    let mut next = x.to_vec();
    let out = NqpKernel::new(p).sweep(&mut next, omega, false, None);
    Ok((next, out.delta_norm))
}

/// One unconstrained SOR sweep for `A x = b`.
pub fn sor_sweep(a: &SparseSymMatrix, b: &[f64], x: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_len(a.dim(), x.len())?;
    check_len(a.dim(), b.len())?;
    let mut next = x.to_vec();
    let diag = a.diag();
    for i in 0..next.len() {
        let mut off = 0.0;
        for (j, aij) in a.row(i) {
            if j != i {
                off += aij * next[j];
            }
        }
        next[i] = (1.0 - omega) * next[i] + (omega / diag[i]) * (b[i] - off);
    }
    Ok(next)
}

/// One step of the Itoh-Abe discrete gradient scheme for
/// `V(x) = 1/2 x^T A x - x^T b` with preconditioner `D^{-1}`:
///
/// `x_i' = -[h sum_{j<i} a_ij x_j' - (1 - h/2) a_ii x_i + h sum_{j>i} a_ij x_j - h b_i] / (a_ii (1 + h/2))`
///
/// No projection is applied.
pub fn itoh_abe_step(a: &SparseSymMatrix, b: &[f64], x: &[f64], h: f64) -> Result<Vec<f64>> {
    check_len(a.dim(), x.len())?;
    check_len(a.dim(), b.len())?;
    if !(h > 0.0) {
        return Err(crate::Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let mut next = x.to_vec();
    let diag = a.diag();
    for i in 0..next.len() {
        let (mut before, mut after) = (0.0, 0.0);
        for (j, aij) in a.row(i) {
            if j < i {
                before += aij * next[j];
            } else if j > i {
                after += aij * next[j];
            }
        }
        let bracket = h * before - (1.0 - 0.5 * h) * diag[i] * x[i] + h * after - h * b[i];
        next[i] = -bracket / (diag[i] * (1.0 + 0.5 * h));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> NqpProblem {
        let a =
            SparseSymMatrix::from_dense(&[vec![2.0, -1.0, 0.5], vec![-1.0, 2.0, -1.0], vec![0.5, -1.0, 2.0]]).unwrap();
        NqpProblem::new(a, vec![2.0, -2.0, 2.0]).unwrap()
    }

    #[test]
    fn sweep_from_origin() {
        let (x, dn) = psor_sweep(&cycle3(), &[0.0; 3], 1.0).unwrap();
        // x2 relaxes to -0.5 and is clamped; x3 = (2 - 0.5 * 1) / 2
        assert_eq!(x, vec![1.0, 0.0, 0.75]);
        assert!((dn - (1.0f64 + 0.5625).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_two_by_two() {
        let a = SparseSymMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let p = NqpProblem::new(a, vec![1.0, 1.0]).unwrap();
        let (x, _) = psor_sweep(&p, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(x, vec![0.5, 0.75]);
    }

    #[test]
    fn solution_is_fixed_point() {
        let p = cycle3();
        for omega in [0.3, 1.0, 1.7, 1.99] {
            let (x, dn) = psor_sweep(&p, &[0.8, 0.0, 0.8], omega).unwrap();
            assert!(dn < 1e-15, "omega {omega}: moved {dn}");
            assert!((x[0] - 0.8).abs() < 1e-15 && x[1] == 0.0);
        }
    }

    #[test]
    fn stats_match_direct_evaluation() {
        let p = cycle3();
        let mut k = NqpKernel::new(&p);
        let x0 = vec![0.3, 0.1, 0.2];
        let mut x = x0.clone();
        let out = k.sweep(&mut x, 1.4, true, Some(omega_h(1.4)));
        let dx: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let g0 = p.gradient(&x0).unwrap();
        let g1 = p.gradient(&x).unwrap();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        assert!((out.v_old - p.objective(&x0).unwrap()).abs() < 1e-14);
        assert!((out.v_new - p.objective(&x).unwrap()).abs() < 1e-14);
        assert!((out.g_old_dx - dot(&g0, &dx)).abs() < 1e-14);
        assert!((out.g_new_dx - dot(&g1, &dx)).abs() < 1e-14);
        assert_eq!(out.componentwise_violations, 0);
    }

    fn omega_h(omega: f64) -> f64 {
        2.0 * omega / (2.0 - omega)
    }

    #[test]
    fn itoh_abe_at_h2_is_gauss_seidel() {
        let p = cycle3();
        let x = [0.4, -0.3, 1.2];
        let ia = itoh_abe_step(p.matrix(), p.rhs(), &x, 2.0).unwrap();
        let gs = sor_sweep(p.matrix(), p.rhs(), &x, 1.0).unwrap();
        for (u, v) in ia.iter().zip(&gs) {
            assert!((u - v).abs() <= 1e-13 * v.abs().max(1.0));
        }
    }

    #[test]
    fn itoh_abe_dissipates() {
        let p = cycle3();
        let mut x = vec![3.0, -2.0, 1.0];
        for h in [0.1, 2.0, 50.0] {
            let next = itoh_abe_step(p.matrix(), p.rhs(), &x, h).unwrap();
            assert!(p.objective(&next).unwrap() <= p.objective(&x).unwrap());
            x = next;
        }
        assert!(itoh_abe_step(p.matrix(), p.rhs(), &x, 0.0).is_err());
    }
}
