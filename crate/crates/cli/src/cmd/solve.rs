use std::time::Instant;

use anyhow::{bail, Result};
use nqp_sor::io::{trace_csv_string, vector_string};
use nqp_sor::solvers::*;

use crate::args::{SolveArgs, Solver};
use crate::output::OutDir;
use crate::report::{status_name, summary_csv, Outcome, Row};
use crate::source::{self, Problem};

pub fn check_omega(solver: Solver, omega: Option<f64>) -> Result<()> {
    match (solver.needs_omega(), omega) {
        (true, None) => bail!("--omega is required for --solver {}", solver.name()),
        (false, Some(_)) => bail!("--omega does not apply to --solver {}", solver.name()),
        (true, Some(w)) if !(w > 0.0 && w < 2.0) => bail!("--omega must lie in (0, 2), got {w}"),
        _ => Ok(()),
    }
}

pub fn solve(problem: &Problem, solver: Solver, omega: Option<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    let w = || omega.expect("checked by check_omega");
    let r = match (problem, solver) {
        (Problem::Nqp(p), Solver::Psor) => psor_solve(p, w(), cfg)?,
        (Problem::Nqp(p), Solver::Naive) => naive_psor_solve(p, w(), cfg)?,
        (Problem::Nqp(p), Solver::Apsor) => apsor_wolfe_solve(p, cfg)?,
        (Problem::Nqp(p), Solver::ApsorFreeze) => apsor_freeze_solve(p, cfg)?,
        (Problem::Nqp(p), Solver::ApsorShift) => apsor_shift_solve(p, cfg)?,
        (Problem::Nnls(q), Solver::Normal) => normal_psor_solve(q, NormalMode::Wolfe, cfg)?,
        (Problem::Nnls(q), Solver::NormalFixed) => normal_psor_solve(q, NormalMode::Fixed(w()), cfg)?,
        (Problem::Nnls(q), Solver::NormalFreeze) => normal_psor_solve(q, NormalMode::Freeze, cfg)?,
        (Problem::Nqp(_), s) => bail!("--solver {} needs --operator and --rhs", s.name()),
        (Problem::Nnls(_), s) => bail!("--solver {} needs --matrix or --preset", s.name()),
    };
    Ok(r)
}

pub fn run(args: &SolveArgs) -> Result<Outcome> {
    check_omega(args.solver, args.omega)?;
    let cfg = source::config(&args.config)?;
    let problems = source::load(&args.problem)?;
    let out = OutDir::new(&args.out);
    let mut planned = vec!["summary.csv".to_string()];
    for p in &problems {
        planned.push(format!("{}/x.txt", p.label));
        planned.push(format!("{}/trace.csv", p.label));
    }
    out.claim(&planned)?;

    let mut outcome = Outcome::new("solve");
    let mut rows = Vec::new();
    for p in problems {
        let start = Instant::now();
        let result = solve(&p.problem, args.solver, args.omega, &cfg)?;
        let wall = start.elapsed();
        out.write(format!("{}/x.txt", p.label), vector_string(&result.x))?;
        out.write(format!("{}/trace.csv", p.label), trace_csv_string(&result.trace.clone().unwrap_or_default()))?;
        let mut line = format!(
            "{}: {} after {} iterations, kkt {:.3e}",
            p.label,
            status_name(&result),
            result.iterations,
            result.final_kkt
        );
        if let Problem::Nnls(q) = &p.problem {
            let r = q.residual(&result.x)?;
            line += &format!(", |Cx-d| {:.6e}", r.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        if let Some(w) = result.frozen_omega {
            line += &format!(", frozen omega {w:.6}");
        }
        println!("{line}");
        outcome.count(result.converged());
        rows.push(Row { label: p.label, method: args.solver.name().into(), omega: args.omega, result, wall });
    }
    out.write("summary.csv", summary_csv(&rows))?;
    Ok(outcome)
}
