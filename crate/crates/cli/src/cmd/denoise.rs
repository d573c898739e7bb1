use anyhow::{bail, Context, Result};
use nqp_sor::imaging::*;
use nqp_sor::io::trace_csv_string;
use nqp_sor::solvers::{NormalMode, SolverConfig};

use crate::args::{DenoiseArgs, DenoiseMode};
use crate::output::OutDir;
use crate::report::Outcome;

fn mode(args: &DenoiseArgs) -> Result<NormalMode> {
    match (args.mode, args.omega) {
        (DenoiseMode::Fixed, Some(w)) if w > 0.0 && w < 2.0 => Ok(NormalMode::Fixed(w)),
        (DenoiseMode::Fixed, Some(w)) => bail!("--omega must lie in (0, 2), got {w}"),
        (DenoiseMode::Fixed, None) => bail!("--omega is required for --mode fixed"),
        (_, Some(_)) => bail!("--omega only applies to --mode fixed"),
        (DenoiseMode::Apsor, None) => Ok(NormalMode::Wolfe),
        (DenoiseMode::ApsorFreeze, None) => Ok(NormalMode::Freeze),
    }
}

pub fn run(args: &DenoiseArgs) -> Result<Outcome> {
    let mode = mode(args)?;
    let format = if args.ascii { PgmFormat::Ascii } else { PgmFormat::Binary };
    let (truth, observed) = match (&args.input, args.synthetic) {
        (Some(p), _) => {
            let img = read_pgm(p).with_context(|| format!("reading {}", p.display()))?;
            if args.observed {
                (None, Some(img))
            } else {
                (Some(img), None)
            }
        }
        (None, Some(n)) => (Some(test_pattern(n)?), None),
        (None, None) => bail!("give --input or --synthetic"),
    };

    let out = OutDir::new(&args.out);
    let mut planned = vec!["degraded.pgm", "restored.pgm", "trace.csv"];
    if truth.is_some() {
        planned.extend(["truth.pgm", "error.csv"]);
    }
    out.claim(&planned)?;

    let shape = truth.as_ref().or(observed.as_ref()).expect("one image is set");
    let op = BlurOperator::gaussian(shape.width(), shape.height(), args.blur_sigma)?;
    let degraded = match (&truth, observed) {
        (_, Some(d)) => d,
        (Some(t), None) => add_noise(&op.blur_apply(t)?, args.noise, args.seed)?,
        (None, None) => unreachable!(),
    };

    let cfg = SolverConfig { tolerance: args.tol, max_iterations: args.iters, kkt_every: 0, ..Default::default() };
    let mut errors = Vec::new();
    let (restored, result) = deblur_observed(&degraded, &op, &cfg, mode, &mut |x| {
        if let Some(t) = &truth {
            errors.push((relative_error(x, t.pixels()), psnr(x, t.pixels())));
        }
    })?;

    write_pgm(&degraded, out.path("degraded.pgm")?, format)?;
    write_pgm(&restored, out.path("restored.pgm")?, format)?;
    out.write("trace.csv", trace_csv_string(&result.trace.clone().unwrap_or_default()))?;

    let mut outcome = Outcome::new("denoise");
    // an exhausted iteration budget is the expected way to stop
    outcome.count(true);
    outcome.extra.push(("iterations".into(), result.iterations.to_string()));
    if let Some(t) = &truth {
        write_pgm(t, out.path("truth.pgm")?, format)?;
        let mut csv = String::from("iter,relative_error,psnr\n");
        let e0 = relative_error(degraded.pixels(), t.pixels());
        csv += &format!("0,{e0:.16e},{:.16e}\n", psnr(degraded.pixels(), t.pixels()));
        for (k, (e, q)) in errors.iter().enumerate() {
            csv += &format!("{},{e:.16e},{q:.16e}\n", k + 1);
        }
        out.write("error.csv", csv)?;
        let e1 = relative_error(restored.pixels(), t.pixels());
        println!("relative error: degraded {e0:.6}, restored {e1:.6}");
        outcome.extra.push(("input_error".into(), format!("{e0:.6e}")));
        outcome.extra.push(("restored_error".into(), format!("{e1:.6e}")));
    }
    if let Some(w) = result.frozen_omega {
        println!("frozen omega {w:.6}");
    }
    Ok(outcome)
}
