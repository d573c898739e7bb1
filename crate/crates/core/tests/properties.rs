use proptest::prelude::*;

use nqp_sor::diagnostics::kkt_residual;
use nqp_sor::generators::{gen_matrix, gen_rhs, GenSpec, Spectrum};
use nqp_sor::imaging::{gaussian_kernel, BlurOperator, GrayImage};
use nqp_sor::linalg::{ColumnAction, ColumnOperator, SparseSymMatrix};
use nqp_sor::model::NqpProblem;
use nqp_sor::solvers::{h_to_omega, omega_to_h, psor_solve, psor_sweep, SolverConfig};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matrix(n: usize, seed: u64) -> SparseSymMatrix {
    let spec = GenSpec { n, density: 0.3, spectrum: Spectrum::Definite { kappa: 50.0 }, seed };
    gen_matrix(&spec).unwrap()
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matvec_is_symmetric(seed in 0u64..1000, xy in (4usize..20).prop_flat_map(|n| (vec_of(n), vec_of(n)))) {
        let (x, y) = xy;
        let a = matrix(x.len(), seed);
        let lhs = dot(&a.matvec(&x).unwrap(), &y);
        let rhs = dot(&x, &a.matvec(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn normal_matvec_matches_explicit(
        cols in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 6), 1..6),
        x in vec_of(6),
    ) {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| cols.iter().map(|c| c[i] + if i % cols.len() == 0 { 3.0 } else { 0.0 }).collect()).collect();
        let Ok(c) = ColumnOperator::from_dense(&rows) else { return Ok(()) };
        let x = &x[..c.cols()];
        let explicit = c.build_explicit_normal().unwrap().matvec(x).unwrap();
        let free = c.normal_matvec(x).unwrap();
        for (a, b) in explicit.iter().zip(&free) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn shift_adds_half_sigma_norm(seed in 0u64..1000, sigma in 0.01..10.0f64, x in vec_of(12)) {
        let a = matrix(12, seed);
        let p = NqpProblem::new(a, vec![1.0; 12]).unwrap();
        let q = p.shift(sigma).unwrap();
        let want = p.objective(&x).unwrap() + 0.5 * sigma * dot(&x, &x);
        let got = q.objective(&x).unwrap();
        prop_assert!((want - got).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn psor_sweep_never_increases_objective(seed in 0u64..1000, omega in 0.05..1.95f64, x in vec_of(15)) {
        let a = matrix(15, seed);
        let g = gen_rhs(&a, seed).unwrap();
        let p = g.problem;
        let mut x0 = x.clone();
        p.project(&mut x0);
        let (x1, delta) = psor_sweep(&p, &x0, omega).unwrap();
        let (v0, v1) = (p.objective(&x0).unwrap(), p.objective(&x1).unwrap());
        let gamma = p.matrix().min_diag() / omega_to_h(omega).unwrap();
        prop_assert!(v1 - v0 <= -gamma * delta * delta + 1e-10 * (1.0 + v0.abs()));
        prop_assert!(p.is_feasible(&x1));
    }

    #[test]
    fn objective_changes_telescope(seed in 0u64..500, omega in 0.3..1.9f64) {
        let a = matrix(10, seed);
        let p = gen_rhs(&a, seed).unwrap().problem;
        let cfg = SolverConfig { max_iterations: 30, kkt_every: 0, ..Default::default() };
        let r = psor_solve(&p, omega, &cfg).unwrap();
        let objs: Vec<f64> = r.trace.unwrap().records().iter().map(|x| x.objective).collect();
        let v0 = p.objective(&p.default_start()).unwrap();
        let total: f64 = std::iter::once(v0).chain(objs.iter().copied()).collect::<Vec<_>>().windows(2).map(|w| w[1] - w[0]).sum();
        let last = *objs.last().unwrap();
        prop_assert!((total - (last - v0)).abs() <= 1e-9 * (1.0 + v0.abs()));
        prop_assert!((last - p.objective(&r.x).unwrap()).abs() <= 1e-9 * (1.0 + v0.abs()));
    }

    #[test]
    fn step_size_round_trip(omega in 1e-3..1.999f64) {
        let back = h_to_omega(omega_to_h(omega).unwrap()).unwrap();
        prop_assert!((back - omega).abs() <= 1e-15);
    }

    #[test]
    fn kernel_is_a_partition_of_unity(sigma in 0.05..6.0f64) {
        let k = gaussian_kernel(sigma).unwrap();
        prop_assert_eq!(k.len() % 2, 1);
        prop_assert!((k.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let c = k.len() / 2;
        for j in 0..=c {
            prop_assert_eq!(k[c - j], k[c + j]);
        }
    }

    #[test]
    fn blur_adjoint_identity(
        w in 8usize..40, h in 8usize..40, sigma in 0.3..3.0f64, seed in 0u64..1000,
    ) {
        let op = BlurOperator::gaussian(w, h, sigma).unwrap();
        let n = w * h;
        let u: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 1009) as f64 / 1009.0 - 0.5).collect();
        let v: Vec<f64> = (0..n).map(|i| ((i as u64 * 104729 + 3 * seed) % 997) as f64 / 997.0 - 0.5).collect();
        let cu = op.blur_apply(&GrayImage::new(w, h, u.clone()).unwrap()).unwrap();
        let ctv = op.transpose_apply(&GrayImage::new(w, h, v.clone()).unwrap()).unwrap();
        let lhs = dot(cu.pixels(), &v);
        let rhs = dot(&u, ctv.pixels());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs().max(rhs.abs()).max(1e-3)));
    }

    #[test]
    fn blur_preserves_constants(w in 8usize..64, h in 8usize..64, sigma in 0.2..4.0f64, c in 0.0..1.0f64) {
        let op = BlurOperator::gaussian(w, h, sigma).unwrap();
        let out = op.blur_apply(&GrayImage::filled(w, h, c).unwrap()).unwrap();
        for p in out.pixels() {
            prop_assert!((p - c).abs() <= 1e-14);
        }
    }

    #[test]
    fn constructed_solution_is_a_fixed_point(seed in 0u64..300, omega in 0.1..1.9f64) {
        let a = matrix(20, seed);
        let g = gen_rhs(&a, seed + 1).unwrap();
        prop_assert!(kkt_residual(&g.problem, &g.x_true, 2.0).unwrap().residual_norm <= 1e-12);
        let (x1, delta) = psor_sweep(&g.problem, &g.x_true, omega).unwrap();
        prop_assert!(delta <= 1e-12 * (1.0 + g.x_true.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        prop_assert_eq!(x1.len(), 20);
    }
}
