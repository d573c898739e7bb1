//! Optimality and dissipation diagnostics, plus the per-iteration trace shared
//! by every solver.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, ColumnAction};
use crate::model::{clamp, NnlsProblem, NqpProblem};

/// Marker attached to a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// The step size left `(eps_omega, max_omega)` and was reset to `h = 2`.
    Reset,
    /// The relaxation parameter was fixed after this iteration.
    Freeze,
    /// Last row of the preceding phase of the freezing schedule.
    Phase(u8),
    /// A 2-cycle of the naive projected iteration was detected.
    Cycle,
    /// First iteration of the second stage of the shifted start.
    Stage2,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Reset => f.write_str("reset"),
            TraceEvent::Freeze => f.write_str("freeze"),
            TraceEvent::Phase(p) => write!(f, "phase{p}"),
            TraceEvent::Cycle => f.write_str("cycle"),
            TraceEvent::Stage2 => f.write_str("stage2"),
        }
    }
}

impl std::str::FromStr for TraceEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reset" => Ok(TraceEvent::Reset),
            "freeze" => Ok(TraceEvent::Freeze),
            "cycle" => Ok(TraceEvent::Cycle),
            "stage2" => Ok(TraceEvent::Stage2),
            _ => s
                .strip_prefix("phase")
                .and_then(|p| p.parse().ok())
                .map(TraceEvent::Phase)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown trace event `{s}`"))),
        }
    }
}

/// One completed iteration `x^(k) -> x^(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `||x^(k+1) - x^(k)||_2`
    pub delta_norm: f64,
    /// `V(x^(k+1))`
    pub objective: f64,
    /// Relaxation parameter used for this sweep.
    pub omega: f64,
    /// Step size paired with `omega`.
    pub h: f64,
    pub kkt_residual: Option<f64>,
    /// `log10(delta_norm)`, `-inf` when the step is exactly zero.
    pub decrement: f64,
    /// Difference to the previous decrement; absent on the first row.
    pub slope: Option<f64>,
    pub event: Option<TraceEvent>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row; the decrement and slope are derived from `delta_norm`.
    pub fn push(&mut self, delta_norm: f64, objective: f64, omega: f64, h: f64, kkt_residual: Option<f64>) {
        let decrement = if delta_norm > 0.0 { delta_norm.log10() } else { f64::NEG_INFINITY };
        let slope = self.records.last().map(|r| decrement - r.decrement).filter(|s| s.is_finite());
        self.records.push(IterationRecord {
            delta_norm,
            objective,
            omega,
            h,
            kkt_residual,
            decrement,
            slope,
            event: None,
        });
    }

    /// Tags the most recent row. Later tags on the same row win.
    pub fn mark(&mut self, event: TraceEvent) {
        if let Some(last) = self.records.last_mut() {
            last.event = Some(event);
        }
    }

    /// Tags row `k`; out-of-range indices are ignored.
    pub fn mark_at(&mut self, k: usize, event: TraceEvent) {
        if let Some(r) = self.records.get_mut(k) {
            r.event = Some(event);
        }
    }

    pub fn push_record(&mut self, record: IterationRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: IterationTrace) {
        self.records.extend(other.records);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.omega)
    }

    pub fn delta_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.delta_norm)
    }

    pub fn events(&self) -> impl Iterator<Item = (usize, TraceEvent)> + '_ {
        self.records.iter().enumerate().filter_map(|(k, r)| r.event.map(|e| (k, e)))
    }
}

/// Windowed decrement statistics at trace row `k`:
/// the mean slope `(d_k - d_{k-m}) / m` and the mean of the `m + 1`
/// relaxation parameters that produced rows `k - m ..= k`.
pub fn decrement_stats(trace: &IterationTrace, k: usize, m: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    let recs = trace.records();
    if k >= recs.len() || k < m {
        return Err(Error::InsufficientHistory { needed: m + 1, have: recs.len().min(k + 1) });
    }
    let (d_new, d_old) = (recs[k].decrement, recs[k - m].decrement);
    if !d_new.is_finite() || !d_old.is_finite() {
        return Err(Error::InvalidParameter("decrement undefined inside window".into()));
    }
    let s_bar = (d_new - d_old) / m as f64;
    let omega_bar = recs[k - m..=k].iter().map(|r| r.omega).sum::<f64>() / (m + 1) as f64;
    Ok((s_bar, omega_bar))
}

/// Lemma-style dissipation bound:
/// `V_new - V_old <= -(min_diag / h) * delta^2 + 1e-10 (1 + |V_old|)`.
pub fn check_dissipation(v_new: f64, v_old: f64, delta_norm: f64, h: f64, min_diag: f64) -> bool {
    let gamma = min_diag / h;
    let slack = 1e-10 * (1.0 + v_old.abs());
    v_new - v_old <= -gamma * delta_norm * delta_norm + slack
}

/// Projected-step optimality measures at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `|| clamp(x - alpha D^{-1} (A x - b)) - x ||_2` with `alpha = h / (1 + h/2)`.
    pub residual_norm: f64,
    /// `A x - b`
    pub slack: Vec<f64>,
    /// `x^T (A x - b)`
    pub complementarity: f64,
    pub min_slack: f64,
    pub min_x: f64,
}

/// `alpha = h / (1 + h/2)`; `h = 2` gives `alpha = 1`.
pub fn kkt_alpha(h: f64) -> f64 {
    h / (1.0 + 0.5 * h)
}

pub fn kkt_residual(p: &NqpProblem, x: &[f64], h: f64) -> Result<KktReport> {
    check_len(p.dim(), x.len())?;
    let slack = p.gradient(x)?;
    kkt_from_gradient(x, slack, p.matrix().diag(), p.lower(), p.upper(), h)
}

/// Same measure for a least-squares problem: the gradient is `C^T (C x - d)`
/// and the diagonal is the squared column norms.
pub fn nnls_kkt_residual<Op: ColumnAction>(q: &NnlsProblem<Op>, x: &[f64], h: f64) -> Result<KktReport> {
    check_len(q.dim(), x.len())?;
    let op = q.operator();
    let r = q.residual(x)?;
    let mut slack = op.apply_transpose(&r)?;
    slack.iter_mut().for_each(|g| *g = -*g);
    let diag: Vec<f64> = (0..op.cols()).map(|j| op.col_sq_norm(j)).collect();
    kkt_from_gradient(x, slack, &diag, q.lower(), q.upper(), h)
}

fn kkt_from_gradient(
    x: &[f64],
    slack: Vec<f64>,
    diag: &[f64],
    lower: &[f64],
    upper: &[f64],
    h: f64,
) -> Result<KktReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let alpha = kkt_alpha(h);
    let mut sq = 0.0;
    for i in 0..x.len() {
        let step = clamp(x[i] - alpha * slack[i] / diag[i], lower[i], upper[i]) - x[i];
        sq += step * step;
    }
    let complementarity = dot(x, &slack);
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(KktReport { residual_norm: sq.sqrt(), slack, complementarity, min_slack, min_x })
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
    fn kkt_zero_at_known_solution_for_any_h() {
        let p = cycle3();
        for h in [0.5, 2.0, 18.0] {
            let rep = kkt_residual(&p, &[0.8, 0.0, 0.8], h).unwrap();
            assert!(rep.residual_norm < 1e-15, "h = {h}: {}", rep.residual_norm);
            assert!(rep.complementarity.abs() < 1e-15);
            assert!((rep.slack[1] - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn kkt_zero_at_origin_when_rhs_nonpositive() {
        let a = SparseSymMatrix::from_dense(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let p = NqpProblem::new(a, vec![-1.0, 0.0]).unwrap();
        assert_eq!(kkt_residual(&p, &[0.0, 0.0], 2.0).unwrap().residual_norm, 0.0);
    }

    #[test]
    fn kkt_positive_away_from_solution() {
        let p = cycle3();
        let rep = kkt_residual(&p, &[0.1, 0.5, 0.3], 2.0).unwrap();
        assert!(rep.residual_norm > 0.1);
        assert!(kkt_residual(&p, &[0.1], 2.0).is_err());
        assert!(kkt_residual(&p, &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn alpha_matches_step_size() {
        assert_eq!(kkt_alpha(2.0), 1.0);
        assert!((kkt_alpha(18.0) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn dissipation_examples() {
        assert!(check_dissipation(1.0, 1.0, 0.0, 2.0, 1.0));
        // gamma = 1: h = 1, min_diag = 1
        assert!(!check_dissipation(2.0, 1.0, 1.0, 1.0, 1.0));
        assert!(check_dissipation(-1.0, 0.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn decrement_stats_examples() {
        let mut t = IterationTrace::new();
        for d in [-1.0f64, -2.0, -3.0, -4.0] {
            t.push(10f64.powf(d), 0.0, 1.5, 6.0, None);
        }
        let (s_bar, omega_bar) = decrement_stats(&t, 3, 2).unwrap();
        assert!((s_bar + 1.0).abs() < 1e-12);
        assert_eq!(omega_bar, 1.5);
        assert!(matches!(decrement_stats(&t, 1, 2), Err(Error::InsufficientHistory { .. })));
        assert!(decrement_stats(&t, 3, 0).is_err());
    }

    #[test]
    fn trace_derives_decrement_and_slope() {
        let mut t = IterationTrace::new();
        t.push(0.1, 0.0, 1.0, 2.0, None);
        t.push(0.01, 0.0, 1.0, 2.0, Some(3.0));
        t.push(0.0, 0.0, 1.0, 2.0, None);
        t.mark(TraceEvent::Reset);
        let r = t.records();
        assert_eq!(r[0].slope, None);
        assert!((r[1].slope.unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(r[2].decrement, f64::NEG_INFINITY);
        assert_eq!(r[2].slope, None);
        assert_eq!(t.events().collect::<Vec<_>>(), vec![(2, TraceEvent::Reset)]);
    }

    #[test]
    fn event_names_roundtrip() {
        for e in [TraceEvent::Reset, TraceEvent::Freeze, TraceEvent::Phase(3), TraceEvent::Cycle, TraceEvent::Stage2] {
            assert_eq!(e.to_string().parse::<TraceEvent>().unwrap(), e);
        }
    }
}
