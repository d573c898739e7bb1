//! Browser demo: projected versus naive SOR on a 3x3 problem, convergence of
//! fixed and adaptive relaxation on a generated problem, and image deblurring.
//!
//! Each export is a thin wrapper around a plain function that is tested
//! natively.

use nqp_sor::generators::{gen_suite, generate, GenSpec, Spectrum};
use nqp_sor::imaging::{add_noise, deblur_observed, relative_error, test_pattern, BlurOperator, GrayImage};
use nqp_sor::solvers::{
    apsor_freeze_solve, apsor_wolfe_solve, naive_sweep, psor_solve, psor_sweep, NormalMode, SolveResult, SolverConfig,
};
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Iterates of projected and naive SOR on the 3x3 example, starting at zero.
/// Row `k` holds `x^(k)`: three projected values, then three naive ones.
pub fn cycle_paths(omega: f64, steps: usize) -> Result<Vec<f64>, String> {
    let g = gen_suite("naive-cycle-3x3", None, 0).map_err(|e| e.to_string())?.remove(0);
    let (mut x, mut y) = (vec![0.0; 3], vec![0.0; 3]);
    let mut out = Vec::with_capacity(6 * (steps + 1));
    for k in 0..=steps {
        if k > 0 {
            x = psor_sweep(&g.problem, &x, omega).map_err(|e| e.to_string())?.0;
            y = naive_sweep(&g.problem, &y, omega).map_err(|e| e.to_string())?;
        }
        out.extend(&x);
        out.extend(&y);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = cyclePaths)]
pub fn cycle_paths_js(omega: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    cycle_paths(omega, steps).map_err(js)
}

/// Decrement histories of one generated problem under three solvers.
#[wasm_bindgen]
pub struct Curves {
    fixed: SolveResult,
    wolfe: SolveResult,
    freeze: SolveResult,
}

fn deltas(r: &SolveResult) -> Vec<f64> {
    r.trace.as_ref().map_or_else(Vec::new, |t| t.delta_norms().collect())
}

fn omegas(r: &SolveResult) -> Vec<f64> {
    r.trace.as_ref().map_or_else(Vec::new, |t| t.omegas().collect())
}

impl Curves {
    pub fn run(n: usize, log_kappa: f64, seed: u64, omega: f64, max_iter: usize) -> Result<Self, String> {
        let spec = GenSpec {
            n,
            density: (10.0 / n as f64).min(1.0),
            spectrum: Spectrum::Definite { kappa: 10f64.powf(log_kappa) },
            seed,
        };
        let p = generate(&spec).map_err(|e| e.to_string())?.problem;
        let cfg = SolverConfig { max_iterations: max_iter, kkt_every: 0, ..Default::default() };
        let e = |r: nqp_sor::Result<SolveResult>| r.map_err(|e| e.to_string());
        Ok(Self {
            fixed: e(psor_solve(&p, omega, &cfg))?,
            wolfe: e(apsor_wolfe_solve(&p, &cfg))?,
            freeze: e(apsor_freeze_solve(&p, &cfg))?,
        })
    }
}

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, log_kappa: f64, seed: u64, omega: f64, max_iter: usize) -> Result<Curves, JsError> {
        Self::run(n, log_kappa, seed, omega, max_iter).map_err(js)
    }

    pub fn fixed(&self) -> Vec<f64> {
        deltas(&self.fixed)
    }

    pub fn wolfe(&self) -> Vec<f64> {
        deltas(&self.wolfe)
    }

    pub fn freeze(&self) -> Vec<f64> {
        deltas(&self.freeze)
    }

    #[wasm_bindgen(js_name = wolfeOmegas)]
    pub fn wolfe_omegas(&self) -> Vec<f64> {
        omegas(&self.wolfe)
    }

    #[wasm_bindgen(js_name = freezeOmegas)]
    pub fn freeze_omegas(&self) -> Vec<f64> {
        omegas(&self.freeze)
    }

    /// NaN until the freezing solver fixes omega.
    #[wasm_bindgen(js_name = frozenOmega)]
    pub fn frozen_omega(&self) -> f64 {
        self.freeze.frozen_omega.unwrap_or(f64::NAN)
    }
}

/// A synthetic image, its blurred and noisy copy, and the latest restoration.
#[wasm_bindgen]
pub struct Deblur {
    truth: GrayImage,
    degraded: GrayImage,
    op: BlurOperator,
    restored: Vec<f64>,
    errors: Vec<f64>,
}

impl Deblur {
    pub fn build(size: usize, blur_sigma: f64, noise: f64, seed: u64) -> Result<Self, String> {
        let s = |e: nqp_sor::Error| e.to_string();
        let truth = test_pattern(size).map_err(s)?;
        let op = BlurOperator::gaussian(size, size, blur_sigma).map_err(s)?;
        let degraded = add_noise(&op.blur_apply(&truth).map_err(s)?, noise, seed).map_err(s)?;
        let restored = degraded.pixels().to_vec();
        Ok(Self { truth, degraded, op, restored, errors: Vec::new() })
    }

    /// `mode`: 0 fixed `omega`, 1 Wolfe control, 2 Wolfe then frozen.
    pub fn restore_with(&mut self, iters: usize, mode: u8, omega: f64) -> Result<(), String> {
        let mode = match mode {
            0 => NormalMode::Fixed(omega),
            1 => NormalMode::Wolfe,
            2 => NormalMode::Freeze,
            m => return Err(format!("unknown mode {m}")),
        };
        let cfg = SolverConfig { max_iterations: iters, kkt_every: 0, ..Default::default() };
        let truth = self.truth.pixels();
        let mut errors = vec![relative_error(self.degraded.pixels(), truth)];
        let (img, _) = deblur_observed(&self.degraded, &self.op, &cfg, mode, &mut |x| {
            errors.push(relative_error(x, truth));
        })
        .map_err(|e| e.to_string())?;
        self.restored = img.into_pixels();
        self.errors = errors;
        Ok(())
    }
}

#[wasm_bindgen]
impl Deblur {
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, blur_sigma: f64, noise: f64, seed: u64) -> Result<Deblur, JsError> {
        Self::build(size, blur_sigma, noise, seed).map_err(js)
    }

    pub fn restore(&mut self, iters: usize, mode: u8, omega: f64) -> Result<(), JsError> {
        self.restore_with(iters, mode, omega).map_err(js)
    }

    pub fn size(&self) -> usize {
        self.truth.width()
    }

    pub fn truth(&self) -> Vec<f64> {
        self.truth.pixels().to_vec()
    }

    pub fn degraded(&self) -> Vec<f64> {
        self.degraded.pixels().to_vec()
    }

    pub fn restored(&self) -> Vec<f64> {
        self.restored.clone()
    }

    /// Relative error against the truth, starting with the degraded image.
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }
}
