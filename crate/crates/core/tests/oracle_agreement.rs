use cekit_core::bounds::{optimize_pwin, SeesawConfig};
use cekit_core::game::ResourceKind;
use cekit_core::oracle::{classical_best, grid_exact_state, grid_fixed_state, grid_symmetric, pure};

#[test]
fn symmetric_grid_never_beats_the_seesaw() {
    let cfg = SeesawConfig::default();
    for d in [0.0, 0.25, 0.6] {
        let seesaw = optimize_pwin(ResourceKind::EntangledCoherent, d, &cfg).unwrap().value;
        let grid = grid_symmetric(d, 0.03).unwrap();
        assert!(grid.value <= seesaw + 1e-3, "d={d}: grid {} seesaw {seesaw}", grid.value);
        // A coarse grid still lands close to the optimum.
        assert!(grid.value >= seesaw - 5e-3, "d={d}: grid {} seesaw {seesaw}", grid.value);
    }
}

#[test]
fn exact_state_grid_at_zero() {
    let g = grid_exact_state(0.0, 0.02).unwrap();
    assert!((g.value - 0.625).abs() < 1e-3, "{}", g.value);
    assert!(g.value <= 0.625 + 1e-9);
}

#[test]
fn separable_and_mixed_families() {
    let cfg = SeesawConfig::default();
    for d in [0.0, 0.2, 0.7] {
        let sep = optimize_pwin(ResourceKind::SeparableCoherent, d, &cfg).unwrap().value;
        let (a, b) = ((1.0 - d).sqrt(), d.sqrt());
        let grid = grid_fixed_state(&pure(&[0.0, a, 0.0, b]), 0.01).unwrap().value;
        assert!(grid <= sep + 1e-3 && grid >= sep - 1e-3, "d={d}: {grid} vs {sep}");
        assert!((sep - (1.0 + d.sqrt()) / 2.0).abs() < 1e-6);

        let mixed = optimize_pwin(ResourceKind::MixedNonCoherent, d, &cfg).unwrap().value;
        let classical = classical_best([0.0, 0.0, 1.0 - d, d]);
        assert!((mixed - classical).abs() < 1e-6, "d={d}: {mixed} vs {classical}");
        assert!((classical - (1.0 + d) / 2.0).abs() < 1e-12);
    }
}
