use anyhow::Result;
use nqp_sor::generators::gen_suite;
use nqp_sor::io::{matrix_market_string, vector_string};

use crate::args::GenArgs;
use crate::output::OutDir;
use crate::report::Outcome;

pub const FILES: [&str; 4] = ["A.mtx", "b.txt", "x_true.txt", "y_true.txt"];

pub fn run(args: &GenArgs) -> Result<Outcome> {
    let suite = gen_suite(&args.preset, args.n, args.seed)?;
    let out = OutDir::new(&args.out);
    let planned: Vec<String> = suite.iter().flat_map(|g| FILES.map(|f| format!("{}/{f}", g.label))).collect();
    out.claim(&planned)?;
    for g in &suite {
        let dir = &g.label;
        out.write(format!("{dir}/A.mtx"), matrix_market_string(g.problem.matrix()))?;
        out.write(format!("{dir}/b.txt"), vector_string(g.problem.rhs()))?;
        out.write(format!("{dir}/x_true.txt"), vector_string(&g.x_true))?;
        out.write(format!("{dir}/y_true.txt"), vector_string(&g.y_true))?;
        println!("{dir}: n={} nnz={}", g.problem.dim(), g.problem.matrix().nnz());
    }
    let mut o = Outcome::new("gen");
    o.extra.push(("problems".into(), suite.len().to_string()));
    Ok(o)
}
