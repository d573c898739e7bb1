//! Random test problems with a prescribed spectrum and a known solution.
//!
//! Matrices are built by applying seeded random plane rotations to
//! `diag(spectrum)` until the requested fill is reached. Rotations are
//! orthogonal similarities, so the eigenvalues are exactly the requested
//! ones up to rounding; only the density is approximate.
//!
//! Randomness comes from `ChaCha8Rng` (seeded with `seed_from_u64`) and normal
//! variates from the ziggurat sampler of `rand_distr::StandardNormal`, which
//! makes every problem reproducible across platforms from its seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::model::NqpProblem;

/// Requested eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// `linspace(1, kappa, n)`: positive definite with condition number `kappa`.
    Definite { kappa: f64 },
    /// `linspace(0, kappa, n)`: semidefinite with a single zero eigenvalue.
    Semidefinite { kappa: f64 },
    /// `zeros(n - rank - 1) ++ linspace(0, kappa, rank + 1)`.
    Rank { kappa: f64, rank: usize },
}

impl Spectrum {
    pub fn kappa(&self) -> f64 {
        match *self {
            Spectrum::Definite { kappa } | Spectrum::Semidefinite { kappa } | Spectrum::Rank { kappa, .. } => kappa,
        }
    }

    /// The eigenvalues for dimension `n`, ascending.
    pub fn values(&self, n: usize) -> Vec<f64> {
        match *self {
            Spectrum::Definite { kappa } => linspace(1.0, kappa, n),
            Spectrum::Semidefinite { kappa } => linspace(0.0, kappa, n),
            Spectrum::Rank { kappa, rank } => {
                let mut v = vec![0.0; n - rank - 1];
                v.extend(linspace(0.0, kappa, rank + 1));
                v
            }
        }
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![b],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
            v[n - 1] = b;
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    /// Target fraction of nonzero entries, both triangles counted.
    pub density: f64,
    pub spectrum: Spectrum,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("dimension must be positive".into());
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0, 1], got {}", self.density));
        }
        if self.density * (self.n * self.n) as f64 + 1e-9 < self.n as f64 {
            return bad("density leaves no room for the diagonal".into());
        }
        if !(self.spectrum.kappa() >= 1.0) {
            return bad("condition number must be at least 1".into());
        }
        if let Spectrum::Rank { rank, .. } = self.spectrum {
            if rank >= self.n {
                return bad(format!("rank {rank} must be below n = {}", self.n));
            }
        }
        Ok(())
    }
}

/// A problem together with the solution and slack it was built from.
#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub label: String,
    pub problem: NqpProblem,
    pub x_true: Vec<f64>,
    pub y_true: Vec<f64>,
}

/// Symmetric matrix with spectrum `spec.spectrum` and roughly
/// `spec.density * n^2` stored entries.
pub fn gen_matrix(spec: &GenSpec) -> Result<SparseSymMatrix> {
    spec.validate()?;
    let n = spec.n;
    let eig = spec.spectrum.values(n);
    let scale = eig.iter().copied().fold(0.0, f64::max);
    let mut rows: Vec<BTreeMap<usize, f64>> = eig.iter().enumerate().map(|(i, &l)| BTreeMap::from([(i, l)])).collect();
    let mut nnz = n;
    let target = ((spec.density * (n * n) as f64).round() as usize).min(n * n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut rotations = 0usize;
    let budget = 20 * target.max(n) + 1000;
    while nnz < target && n > 1 {
        if rotations >= budget {
            return Err(Error::Generation(format!("fill stalled at {nnz} of {target} entries")));
        }
        let (p, q) = random_pair(&mut rng, n);
        nnz = rotate(&mut rows, p, q, &mut rng, nnz);
        rotations += 1;
    }

    // The diagonal is a convex combination of the eigenvalues; with zeros in
    // the spectrum an untouched row can keep a (near-)zero diagonal.
    let floor = 1e-12 * scale.max(1.0);
    for _ in 0..100 {
        let weak: Vec<usize> = (0..n).filter(|&i| rows[i][&i] <= floor).collect();
        if weak.is_empty() {
            return assemble(n, rows);
        }
        if n == 1 {
            break;
        }
        for i in weak {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            nnz = rotate(&mut rows, i, j, &mut rng, nnz);
        }
    }
    Err(Error::Generation("could not make every diagonal entry positive".into()))
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let p = rng.random_range(0..n);
    let mut q = rng.random_range(0..n - 1);
    if q >= p {
        q += 1;
    }
    (p, q)
}

/// `A <- G A G^T` for a random rotation in the `(p, q)` plane. Returns the
/// new number of stored entries.
fn rotate(rows: &mut [BTreeMap<usize, f64>], p: usize, q: usize, rng: &mut ChaCha8Rng, mut nnz: usize) -> usize {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = theta.sin_cos();
    let get = |rows: &[BTreeMap<usize, f64>], i: usize, j: usize| rows[i].get(&j).copied().unwrap_or(0.0);

    let (app, aqq, apq) = (get(rows, p, p), get(rows, q, q), get(rows, p, q));
    let mut others: Vec<usize> = rows[p].keys().chain(rows[q].keys()).copied().filter(|&j| j != p && j != q).collect();
    others.sort_unstable();
    others.dedup();

    for j in others {
        let (apj, aqj) = (get(rows, p, j), get(rows, q, j));
        let new_p = c * apj - s * aqj;
        let new_q = s * apj + c * aqj;
        for (i, v) in [(p, new_p), (q, new_q)] {
            if rows[i].insert(j, v).is_none() {
                nnz += 2;
            }
            rows[j].insert(i, v);
        }
    }
    // 2x2 block: [c -s; s c] [app apq; apq aqq] [c s; -s c]
    let new_pp = c * c * app - 2.0 * c * s * apq + s * s * aqq;
    let new_qq = s * s * app + 2.0 * c * s * apq + c * c * aqq;
    let new_pq = c * s * (app - aqq) + (c * c - s * s) * apq;
    rows[p].insert(p, new_pp);
    rows[q].insert(q, new_qq);
    if rows[p].insert(q, new_pq).is_none() {
        nnz += 2;
    }
    rows[q].insert(p, new_pq);
    nnz
}

fn assemble(n: usize, rows: Vec<BTreeMap<usize, f64>>) -> Result<SparseSymMatrix> {
    let mut row_starts = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_starts.push(0);
    for row in rows {
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_starts.push(cols.len());
    }
    SparseSymMatrix::from_csr(n, row_starts, cols, vals)
}

/// Right-hand side with a known solution: `x = max(g, 0)` for standard
/// normal `g`, slack `y_i = |g'_i|` where `x_i = 0` (zero elsewhere), and
/// `b = A x - y`. The pair satisfies the KKT conditions by construction.
pub fn gen_rhs(a: &SparseSymMatrix, seed: u64) -> Result<GeneratedProblem> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).max(0.0)).collect();
    let mut y = vec![0.0; n];
    for i in (0..n).filter(|&i| x[i] == 0.0) {
        y[i] = rng.sample::<f64, _>(StandardNormal).abs();
    }
    let mut b = a.matvec(&x)?;
    for (bi, yi) in b.iter_mut().zip(&y) {
        *bi -= yi;
    }
    Ok(GeneratedProblem {
        label: format!("n{n}-seed{seed}"),
        problem: NqpProblem::new(a.clone(), b)?,
        x_true: x,
        y_true: y,
    })
}

/// Matrix and right-hand side from one spec; the right-hand side uses the
/// same seed.
pub fn generate(spec: &GenSpec) -> Result<GeneratedProblem> {
    let a = gen_matrix(spec)?;
    gen_rhs(&a, spec.seed)
}

/// Names accepted by [`gen_suite`].
pub const PRESETS: &[&str] =
    &["toy-spd", "toy-spd-k4", "toy-spsd-large", "toy-spsd-small", "naive-cycle-3x3", "naive-2x2", "naive-2x2-limit"];

/// Density giving about ten stored entries per row, capped at a full matrix.
fn ten_per_row(n: usize) -> f64 {
    (10.0 / n as f64).min(1.0)
}

/// Deterministic problem families.
///
/// * `toy-spd`: four definite problems with `kappa = 10^(2i-1)`, `i = 1..4`
///   (default `n = 1000`, about ten entries per row).
/// * `toy-spd-k4`: one definite problem, `kappa = 1e4` (default `n = 1000`,
///   density 1%).
/// * `toy-spsd-large`: rank `n - 5`, `kappa = 1e10`, density 0.005
///   (default `n = 1000`).
/// * `toy-spsd-small`: `n = 100`, density 0.1, `kappa = 1e5`, rank 99.
/// * `naive-cycle-3x3`, `naive-2x2`, `naive-2x2-limit`: small fixed
///   instances for comparing projected and naive post-sweep projection.
pub fn gen_suite(preset: &str, n: Option<usize>, seed: u64) -> Result<Vec<GeneratedProblem>> {
    let labelled = |label: String, spec: GenSpec| -> Result<GeneratedProblem> {
        let mut g = generate(&spec)?;
        g.label = label;
        Ok(g)
    };
    match preset {
        "toy-spd" => {
            let n = n.unwrap_or(1000);
            (1..=4)
                .map(|i| {
                    let kappa = 10f64.powi(2 * i - 1);
                    let spec = GenSpec {
                        n,
                        density: ten_per_row(n),
                        spectrum: Spectrum::Definite { kappa },
                        seed: seed.wrapping_add(i as u64 - 1),
                    };
                    labelled(format!("toy-spd-k{}", 2 * i - 1), spec)
                })
                .collect()
        }
        "toy-spd-k4" => {
            let n = n.unwrap_or(1000);
            let spec = GenSpec {
                n,
                density: (0.01f64).max(1.0 / n as f64).min(1.0),
                spectrum: Spectrum::Definite { kappa: 1e4 },
                seed,
            };
            Ok(vec![labelled("toy-spd-k4".into(), spec)?])
        }
        "toy-spsd-large" => {
            let n = n.unwrap_or(1000);
            let spec = GenSpec {
                n,
                density: (0.005f64).max(1.0 / n as f64).min(1.0),
                spectrum: Spectrum::Rank { kappa: 1e10, rank: n.saturating_sub(5) },
                seed,
            };
            Ok(vec![labelled("toy-spsd-large".into(), spec)?])
        }
        "toy-spsd-small" => {
            let n = n.unwrap_or(100);
            let spec = GenSpec {
                n,
                density: (0.1f64).max(1.0 / n as f64).min(1.0),
                spectrum: Spectrum::Semidefinite { kappa: 1e5 },
                seed,
            };
            Ok(vec![labelled("toy-spsd-small".into(), spec)?])
        }
        "naive-cycle-3x3" => Ok(vec![naive_cycle_3x3()]),
        "naive-2x2" => Ok(vec![naive_2x2()]),
        "naive-2x2-limit" => Ok(vec![naive_2x2_limit()]),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// `A = [[2, -1, 0.5], [-1, 2, -1], [0.5, -1, 2]]`, `b = [2, -2, 2]`, solved
/// by `x = [0.8, 0, 0.8]` with slack `[0, 0.4, 0]`.
pub fn naive_cycle_3x3() -> GeneratedProblem {
    let a = SparseSymMatrix::from_dense(&[vec![2.0, -1.0, 0.5], vec![-1.0, 2.0, -1.0], vec![0.5, -1.0, 2.0]])
        .expect("valid fixed matrix");
    GeneratedProblem {
        label: "naive-cycle-3x3".into(),
        problem: NqpProblem::new(a, vec![2.0, -2.0, 2.0]).expect("valid fixed problem"),
        x_true: vec![0.8, 0.0, 0.8],
        y_true: vec![0.0, 0.4, 0.0],
    }
}

/// `A = [[2, -1], [-1, 2]]`, `b = [1, 1]`; the unconstrained minimizer
/// `[1, 1]` is feasible, so it is also the constrained one.
pub fn naive_2x2() -> GeneratedProblem {
    let a = SparseSymMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).expect("valid fixed matrix");
    GeneratedProblem {
        label: "naive-2x2".into(),
        problem: NqpProblem::new(a, vec![1.0, 1.0]).expect("valid fixed problem"),
        x_true: vec![1.0, 1.0],
        y_true: vec![0.0, 0.0],
    }
}

/// `A = [[2, -1], [-1, 2]]`, `b = [-3, 3]`, solved by `[0, 1.5]`. The naive
/// iteration instead settles at `[0, 3 (2 - omega) / (4 - omega)]`.
pub fn naive_2x2_limit() -> GeneratedProblem {
    let a = SparseSymMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).expect("valid fixed matrix");
    GeneratedProblem {
        label: "naive-2x2-limit".into(),
        problem: NqpProblem::new(a, vec![-3.0, 3.0]).expect("valid fixed problem"),
        x_true: vec![0.0, 1.5],
        y_true: vec![1.5, 0.0],
    }
}
