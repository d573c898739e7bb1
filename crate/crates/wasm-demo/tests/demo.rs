use nqp_sor_wasm::{cycle_paths, Curves, Deblur};

#[test]
fn naive_path_cycles_while_projected_converges() {
    let steps = 250;
    let v = cycle_paths(1.9, steps).unwrap();
    assert_eq!(v.len(), 6 * (steps + 1));
    let row = |k: usize| &v[6 * k..6 * k + 6];
    assert_eq!(row(0), &[0.0; 6]);
    assert!((row(1)[3] - 1.9).abs() < 1e-12 && (row(1)[5] - 0.90725).abs() < 1e-12);
    assert_eq!(&row(2)[3..], &[0.0; 3]);
    assert_eq!(row(3)[3..], row(1)[3..]);
    let last = row(steps);
    assert!((last[0] - 0.8).abs() < 1e-8 && last[1] == 0.0 && (last[2] - 0.8).abs() < 1e-8);
}

#[test]
fn curves_reach_tolerance() {
    let c = Curves::run(200, 3.0, 1, 1.5, 5000).unwrap();
    for d in [c.fixed(), c.wolfe(), c.freeze()] {
        assert!(*d.last().unwrap() <= 1e-10);
    }
    assert_eq!(c.wolfe_omegas().len(), c.wolfe().len());
    let w = c.frozen_omega();
    assert!(w > 0.0 && w < 2.0);
    assert!(c.freeze_omegas().iter().rev().take(3).all(|&o| o == w));
}

#[test]
fn deblur_lowers_error() {
    let mut d = Deblur::build(32, 2.0, 0.1, 1).unwrap();
    assert_eq!(d.size(), 32);
    assert_eq!(d.restored(), d.degraded());
    d.restore_with(50, 1, 0.0).unwrap();
    let e = d.errors();
    assert_eq!(e.len(), 51);
    assert!(e[50] < e[0]);
    assert!(d.restored().iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(d.restore_with(5, 7, 0.0).is_err());
    d.restore_with(5, 0, 1.2).unwrap();
    assert_eq!(d.errors().len(), 6);
}
