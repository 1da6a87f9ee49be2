use cekit_core::bounds::surface::{surface_column, HminSurface};
use cekit_core::bounds::SeesawConfig;
use cekit_core::finitekey::{azuma_empirical_check, key_length, SecurityParams};
use cekit_core::protocol::{abort_check, estimate, run_protocol, DeviceModel, Verdict};

fn surface(cfg: &SeesawConfig) -> HminSurface {
    let mut nodes = Vec::new();
    for d in [0.0, 0.01, 0.02, 0.03, 0.04, 0.05] {
        nodes.extend(surface_column(d, 6, cfg).unwrap());
    }
    HminSurface::from_nodes(nodes).unwrap()
}

#[test]
fn ideal_run_yields_key_and_weak_run_does_not() {
    let cfg = SeesawConfig { starts: 12, ..SeesawConfig::default() };
    let s = surface(&cfg);
    let model = DeviceModel::honest_optimal(0.0, &cfg).unwrap();
    let t = run_protocol(&model, 1_000_000, 0.05, 7).unwrap();
    let mut e = estimate(&t).unwrap();
    assert_eq!(abort_check(&mut e, 0.01), Verdict::Pass);
    assert_eq!(e.deps_hat, 0.0);
    let p = SecurityParams::with_default_slacks(e.m, 0.05, 0.01, 1e-6, 0.625);
    let r = key_length(&e, &p, &s).unwrap();
    assert!(r.key_length > 0, "{r:?}");
    assert!(r.kappa > 0.0);

    // Winning rate pushed below the separable bound at the adjusted d.
    let mut weak = e;
    weak.pwin_hat = 0.55;
    let r = key_length(&weak, &p, &s).unwrap();
    assert!(r.pwin_tilde <= 0.5 * (1.0 + r.deps_tilde.sqrt()));
    assert_eq!((r.kappa, r.key_length, r.feasible), (0.0, 0, false));
}

#[test]
fn concentration_bound_holds_empirically() {
    let cfg = SeesawConfig { starts: 8, ..SeesawConfig::default() };
    let model = DeviceModel::honest_optimal(0.0, &cfg).unwrap();
    let lines = azuma_empirical_check(&model, 2_000, 1_000, &[0.005, 0.01, 0.02, 0.05], 0.625, 3).unwrap();
    for l in lines {
        assert!(l.passed, "{l:?}");
    }
}
