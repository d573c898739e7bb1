use std::path::Path;

use anyhow::{bail, Context, Result};
use nqp_sor::generators::gen_suite;
use nqp_sor::io::{read_config, read_matrix_market, read_operator_market, read_vector};
use nqp_sor::linalg::ColumnOperator;
use nqp_sor::model::{NnlsProblem, NqpProblem};
use nqp_sor::solvers::SolverConfig;

use crate::args::{ConfigArgs, ProblemArgs};

pub enum Problem {
    Nqp(NqpProblem),
    Nnls(NnlsProblem<ColumnOperator>),
}

pub struct Labelled {
    pub label: String,
    pub problem: Problem,
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "problem".into(), |s| s.to_string_lossy().into_owned())
}

pub fn load(args: &ProblemArgs) -> Result<Vec<Labelled>> {
    if let Some(preset) = &args.preset {
        let suite = gen_suite(preset, args.n, args.seed)?;
        return Ok(suite.into_iter().map(|g| Labelled { label: g.label, problem: Problem::Nqp(g.problem) }).collect());
    }
    let Some(rhs) = &args.rhs else { bail!("give --preset, or --matrix/--operator with --rhs") };
    let b = read_vector(rhs).with_context(|| format!("reading {}", rhs.display()))?;
    if let Some(m) = &args.matrix {
        let a = read_matrix_market(m).with_context(|| format!("reading {}", m.display()))?;
        return Ok(vec![Labelled { label: stem(m), problem: Problem::Nqp(NqpProblem::new(a, b)?) }]);
    }
    if let Some(c) = &args.operator {
        let op = read_operator_market(c).with_context(|| format!("reading {}", c.display()))?;
        return Ok(vec![Labelled { label: stem(c), problem: Problem::Nnls(NnlsProblem::new(op, b)?) }]);
    }
    bail!("give --preset, or --matrix/--operator with --rhs")
}

pub fn config(args: &ConfigArgs) -> Result<SolverConfig> {
    let mut cfg = match &args.config {
        Some(p) => read_config(p).with_context(|| format!("reading {}", p.display()))?,
        None => SolverConfig::default(),
    };
    if let Some(t) = args.tol {
        cfg.tolerance = t;
    }
    if let Some(m) = args.max_iter {
        cfg.max_iterations = m;
    }
    if let Some(k) = args.kkt_every {
        cfg.kkt_every = k;
    }
    cfg.verify_dissipation |= args.verify;
    cfg.record_trace = true;
    cfg.validate()?;
    Ok(cfg)
}
