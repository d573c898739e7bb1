use std::time::Instant;

use anyhow::{bail, Context, Result};
use nqp_sor::io::trace_csv_string;
use rayon::prelude::*;

use crate::args::{CompareArgs, Solver};
use crate::cmd::solve::solve;
use crate::output::OutDir;
use crate::report::{summary_csv, Outcome, Row};
use crate::source::{self, Problem};

/// `step, 2 step, ...` strictly below 2, rounded to drop float noise.
pub fn omega_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        bail!("--step must lie in (0, 1), got {step}");
    }
    let grid = (1..).map(|k| (k as f64 * step * 1e9).round() / 1e9).take_while(|&w| w < 2.0 - 1e-9).collect();
    Ok(grid)
}

struct Job {
    problem: usize,
    solver: Solver,
    omega: Option<f64>,
}

impl Job {
    fn trace_name(&self) -> String {
        match self.omega {
            Some(w) => format!("omega_{w:.2}.csv"),
            None => format!("{}.csv", self.solver.name()),
        }
    }
}

/// Best fixed omega: fewest iterations among converged runs, then smaller KKT.
fn best_fixed<'a>(rows: impl Iterator<Item = &'a Row>) -> Option<&'a Row> {
    rows.filter(|r| r.omega.is_some() && r.result.converged()).min_by(|a, b| {
        a.result.iterations.cmp(&b.result.iterations).then(a.result.final_kkt.total_cmp(&b.result.final_kkt))
    })
}

pub fn run(args: &CompareArgs) -> Result<Outcome> {
    let grid = omega_grid(args.step)?;
    let cfg = source::config(&args.config)?;
    let problems = source::load(&args.problem)?;
    if problems.iter().any(|p| matches!(p.problem, Problem::Nnls(_))) {
        bail!("compare works on --preset or --matrix problems");
    }

    let mut adaptive = vec![Solver::Apsor, Solver::ApsorFreeze];
    if args.with_shift {
        adaptive.push(Solver::ApsorShift);
    }
    let jobs: Vec<Job> = (0..problems.len())
        .flat_map(|i| {
            let fixed = grid.iter().map(move |&w| Job { problem: i, solver: Solver::Psor, omega: Some(w) });
            let adapt = adaptive.clone().into_iter().map(move |s| Job { problem: i, solver: s, omega: None });
            fixed.chain(adapt)
        })
        .collect();

    let out = OutDir::new(&args.out);
    let mut planned = vec!["summary.csv".to_string(), "best.csv".to_string()];
    planned.extend(jobs.iter().map(|j| format!("{}/{}", problems[j.problem].label, j.trace_name())));
    out.claim(&planned)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        pool = pool.num_threads(t.max(1));
    }
    let pool = pool.build().context("building thread pool")?;
    let results: Vec<Result<Row>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let p = &problems[j.problem];
                let start = Instant::now();
                let result = solve(&p.problem, j.solver, j.omega, &cfg)?;
                let wall = start.elapsed();
                Ok(Row { label: p.label.clone(), method: j.solver.name().into(), omega: j.omega, result, wall })
            })
            .collect()
    });

    let mut outcome = Outcome::new("compare");
    let mut rows = Vec::with_capacity(results.len());
    for (job, r) in jobs.iter().zip(results) {
        let row = r?;
        let trace = row.result.trace.clone().unwrap_or_default();
        out.write(format!("{}/{}", row.label, job.trace_name()), trace_csv_string(&trace))?;
        outcome.count(row.result.converged());
        rows.push(row);
    }
    out.write("summary.csv", summary_csv(&rows))?;

    let mut best_csv = String::from("label,best_omega,best_iterations,best_final_kkt,method,iterations,ratio\n");
    for p in &problems {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.label == p.label).collect();
        let best = best_fixed(mine.iter().copied());
        match best {
            Some(b) => println!(
                "{}: best fixed omega {} ({} iterations, kkt {:.3e})",
                p.label,
                b.omega.expect("fixed run"),
                b.result.iterations,
                b.result.final_kkt
            ),
            None => println!("{}: no fixed omega converged", p.label),
        }
        for r in mine.iter().filter(|r| r.omega.is_none()) {
            let ratio = best.map(|b| r.result.iterations as f64 / b.result.iterations.max(1) as f64);
            let frozen = r.result.frozen_omega.map_or_else(String::new, |w| format!(", frozen omega {w:.6}"));
            println!("{}: {} {} iterations{frozen}", p.label, r.method, r.result.iterations);
            best_csv += &format!(
                "{},{},{},{},{},{},{}\n",
                p.label,
                best.map_or_else(String::new, |b| format!("{}", b.omega.expect("fixed run"))),
                best.map_or_else(String::new, |b| b.result.iterations.to_string()),
                best.map_or_else(String::new, |b| format!("{:.6e}", b.result.final_kkt)),
                r.method,
                r.result.iterations,
                ratio.map_or_else(String::new, |x| format!("{x:.4}")),
            );
        }
    }
    out.write("best.csv", best_csv)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = omega_grid(0.1).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[2], 0.3);
        assert_eq!(*g.last().unwrap(), 1.9);
        assert_eq!(omega_grid(0.05).unwrap().len(), 39);
        assert!(omega_grid(0.0).is_err());
    }
}
