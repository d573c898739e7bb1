use std::fmt::Write as _;
use std::time::Duration;

use nqp_sor::solvers::SolveResult;

/// Counts printed as the final `SUMMARY` line.
#[derive(Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub runs: usize,
    pub converged: usize,
    pub extra: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(command: &'static str) -> Self {
        Self { command, runs: 0, converged: 0, extra: Vec::new() }
    }

    pub fn count(&mut self, ok: bool) {
        self.runs += 1;
        self.converged += usize::from(ok);
    }

    pub fn all_converged(&self) -> bool {
        self.converged == self.runs
    }

    pub fn summary_line(&self) -> String {
        let status = if self.all_converged() { "ok" } else { "not_converged" };
        let mut s = format!(
            "SUMMARY command={} status={status} runs={} converged={} failed={}",
            self.command,
            self.runs,
            self.converged,
            self.runs - self.converged
        );
        for (k, v) in &self.extra {
            write!(s, " {k}={v}").expect("write to string");
        }
        s
    }
}

pub fn status_name(r: &SolveResult) -> &'static str {
    if r.cycle_detected {
        "cycle"
    } else if r.converged() {
        "converged"
    } else {
        "max_iterations"
    }
}

/// One finished run, as a summary row.
pub struct Row {
    pub label: String,
    pub method: String,
    /// `None` for adaptive methods.
    pub omega: Option<f64>,
    pub result: SolveResult,
    pub wall: Duration,
}

pub const SUMMARY_HEADER: &str = "label,method,omega,iterations,status,final_kkt,wall_seconds,frozen_omega";

impl Row {
    pub fn csv(&self) -> String {
        let omega = self.omega.map_or_else(|| "adaptive".to_string(), |w| format!("{w}"));
        let frozen = self.result.frozen_omega.map_or_else(String::new, |w| format!("{w:.16e}"));
        format!(
            "{},{},{omega},{},{},{:.6e},{:.6},{frozen}",
            self.label,
            self.method,
            self.result.iterations,
            status_name(&self.result),
            self.result.final_kkt,
            self.wall.as_secs_f64()
        )
    }
}

pub fn summary_csv(rows: &[Row]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}
