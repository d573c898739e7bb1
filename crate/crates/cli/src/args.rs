use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nqp-sor", version, about = "Projected SOR for nonnegative quadratic programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a preset's matrices, right-hand sides and constructed solutions.
    Gen(GenArgs),
    /// Run one solver on a preset or on files.
    Solve(SolveArgs),
    /// Scan a grid of fixed relaxation parameters against the adaptive solvers.
    Compare(CompareArgs),
    /// Blur and corrupt an image, then restore it by box-constrained SOR.
    Denoise(DenoiseArgs),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct ProblemArgs {
    /// Named problem family, e.g. toy-spd or naive-cycle-3x3.
    #[arg(long, conflicts_with_all = ["matrix", "operator"])]
    pub preset: Option<String>,
    /// Problem size for presets that take one.
    #[arg(long, requires = "preset")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Symmetric matrix A in Matrix Market format.
    #[arg(long, requires = "rhs", conflicts_with = "operator")]
    pub matrix: Option<PathBuf>,
    /// Right-hand side b (or data d with --operator), one value per line.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// General matrix C in Matrix Market format, for the normal-equation solvers.
    #[arg(long, requires = "rhs")]
    pub operator: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// TOML solver configuration; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Sample the KKT residual every this many iterations (0 disables).
    #[arg(long)]
    pub kkt_every: Option<usize>,
    /// Check the dissipation bound independently at every iteration.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Psor,
    Naive,
    Apsor,
    ApsorFreeze,
    ApsorShift,
    /// Normal-equation SOR with Wolfe step-size control.
    Normal,
    NormalFixed,
    NormalFreeze,
}

impl Solver {
    pub fn needs_omega(self) -> bool {
        matches!(self, Solver::Psor | Solver::Naive | Solver::NormalFixed)
    }

    pub fn name(self) -> &'static str {
        match self {
            Solver::Psor => "psor",
            Solver::Naive => "naive",
            Solver::Apsor => "apsor",
            Solver::ApsorFreeze => "apsor-freeze",
            Solver::ApsorShift => "apsor-shift",
            Solver::Normal => "normal",
            Solver::NormalFixed => "normal-fixed",
            Solver::NormalFreeze => "normal-freeze",
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum)]
    pub solver: Solver,
    /// Fixed relaxation parameter in (0, 2); psor, naive and normal-fixed only.
    #[arg(long)]
    pub omega: Option<f64>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Spacing of the fixed-omega grid.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Also run the shift-started adaptive solver.
    #[arg(long)]
    pub with_shift: bool,
    /// Worker threads for independent runs.
    #[arg(long, env = "NQP_SOR_THREADS")]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DenoiseMode {
    Fixed,
    Apsor,
    ApsorFreeze,
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    /// Clean PGM image; blurred and corrupted before restoration.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Treat --input as already degraded (no ground truth).
    #[arg(long, requires = "input")]
    pub observed: bool,
    /// Use a synthetic test pattern of this size instead of --input.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub blur_sigma: f64,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Iteration budget.
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = DenoiseMode::Apsor)]
    pub mode: DenoiseMode,
    /// Relaxation parameter for --mode fixed.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write plain-text (P2) images.
    #[arg(long)]
    pub ascii: bool,
    #[command(flatten)]
    pub out: OutArgs,
}
