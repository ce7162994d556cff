use coexsim::engine::load::{load_fixed_point, CellLoad};

#[path = "../../validation/src/toy.rs"]
mod toy;

use toy::{capacity, loads};

#[test]
fn two_cell_toy_matches_bisection() {
    let demand = [15e6, 12e6];
    let want = loads(demand);
    assert!(want[0] < 1.0 && want[1] < 1.0, "toy should stay below saturation: {want:?}");

    let (got, fp) = load_fixed_point(&demand, capacity, 500, 1e-9);
    assert!(fp.converged);
    for c in 0..2 {
        assert!((got[c].utilization - want[c]).abs() < 1e-3, "{} vs {}", got[c].utilization, want[c]);
        assert_eq!(got[c].served_fraction, 1.0);
    }
}

#[test]
fn coupled_cells_saturate_together() {
    let demand = [60e6, 50e6];
    let (got, fp) = load_fixed_point(&demand, capacity, 500, 1e-9);
    assert!(fp.converged);
    for (c, l) in got.iter().enumerate() {
        assert_eq!(l.utilization, 1.0);
        let full = capacity(c, &[1.0, 1.0]);
        assert!((l.served_fraction - full / demand[c]).abs() < 1e-9);
    }
}

#[test]
fn isolated_cell_cases_are_exact() {
    let flat = |_: usize, _: &[f64]| 100e6;
    for d in [0.0, 10e6, 37e6, 99e6] {
        let (got, _) = load_fixed_point(&[d], flat, 200, 1e-12);
        assert!((got[0].utilization - d / 100e6).abs() < 1e-9);
        assert_eq!(got[0].served_fraction, 1.0);
    }
    let (got, _) = load_fixed_point(&[250e6], flat, 200, 1e-12);
    assert_eq!(got[0], CellLoad { utilization: 1.0, served_fraction: 0.4 });
    assert_eq!(CellLoad::from_demand(1.0), CellLoad { utilization: 1.0, served_fraction: 1.0 });
}
