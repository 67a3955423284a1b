use ctrlgauge::oracle::exhaustive_min_time;
use ctrlgauge::{min_time, recover_region, simulate, LdtSystem, RegionKind};

fn planar_pair() -> LdtSystem {
    LdtSystem::from_rows(
        "planar-pair",
        &[vec![1.1616, -0.5051], vec![-0.0505, 1.6162]],
        &[vec![1.8182], vec![-0.8182]],
    )
    .unwrap()
}

#[test]
fn vertices_new_at_six_steps_need_six_steps() {
    let sys = planar_pair();
    let fam = recover_region(&sys, 6).unwrap();
    let outer = fam.stage(6);
    let inner = fam.stage(5);
    let fresh: Vec<_> = outer
        .vertices()
        .into_iter()
        .filter(|v| !inner.contains(v).unwrap())
        .collect();
    assert!(!fresh.is_empty());
    for v in &fresh {
        let sol = min_time(&sys, v.as_slice(), RegionKind::Recover, 20).unwrap();
        assert_eq!(sol.min_steps, 6, "{v}");
        assert_eq!(exhaustive_min_time(&sys, v.as_slice(), RegionKind::Recover, 20).unwrap(), 6);
        assert!(sol.terminal_error <= 1e-6);
        let replay = simulate(&sys, v.as_slice(), &sol.inputs, RegionKind::Recover).unwrap();
        assert!(replay.terminal_error <= 1e-6, "{}", replay.terminal_error);
        assert!(replay.bound_violation <= 1e-9);
    }
}

#[test]
fn reach_witnesses_land_on_the_state() {
    let sys = planar_pair();
    for x0 in [[3.0, 1.0], [-2.0, 0.5], [0.1, -0.1], [10.0, -6.0]] {
        let sol = min_time(&sys, &x0, RegionKind::Reach, 30).unwrap();
        let replay = simulate(&sys, &x0, &sol.inputs, RegionKind::Reach).unwrap();
        assert!(replay.terminal_error <= 1e-6, "{x0:?}: {}", replay.terminal_error);
        assert_eq!(sol.min_steps, exhaustive_min_time(&sys, &x0, RegionKind::Reach, 30).unwrap(), "{x0:?}");
    }
}
