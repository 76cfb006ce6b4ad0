use byzstab_core::analysis::{count_disruptions, is_area_legitimate, unanchored_processes, AreaKind, AreaSpec};
use byzstab_core::library::random_system;
use byzstab_core::metric::MetricSpec;
use byzstab_core::protocol::{Configuration, ProcessState, Variant};
use byzstab_core::scheduler::{random_configuration, run, DaemonConfig, DaemonMode};
use byzstab_core::system::WeightedSystem;

fn legitimate_start(sys: &WeightedSystem) -> Configuration {
    let mut init = random_configuration(sys, 1, 20);
    for &b in sys.byzantine() {
        init[b] = ProcessState { prnt: None, level: sys.metric().mr(), dist: 0 };
    }
    let d = DaemonConfig { mode: DaemonMode::Central, k: 1, seed: 1, max_steps: 200_000, quiescence_window: 2 };
    run(sys, Variant::Ssmax, &d, &[], init, None).unwrap().last().clone()
}

/// Under a bottleneck metric an E_B process whose best root path runs
/// through a Byzantine process follows that process's writes, so the
/// per-process bound does not apply to it.
#[test]
fn unanchored_boundary_process_exceeds_the_bound() {
    let sc = random_system(10, 2, MetricSpec::flow(8), 4, 25);
    let sys = sc.build_system().unwrap();
    let loose = unanchored_processes(&sys);
    assert_eq!(loose.iter().map(|&p| sys.name(p)).collect::<Vec<_>>(), ["p5"]);
    let area = AreaSpec::resolve(&sys, AreaKind::SBStar);
    let start = legitimate_start(&sys);
    assert!(is_area_legitimate(&sys, &start, &area, Variant::Ssmax));
    let strategies = sc.strategies(&sys).unwrap();
    let d = DaemonConfig { mode: DaemonMode::Distributed, k: 1, seed: 7, max_steps: 5000, quiescence_window: 5000 };
    let t = run(&sys, Variant::Ssmax, &d, &strategies, start, None).unwrap();
    let r = count_disruptions(&sys, &t, &area, Variant::Ssmax, 1);
    let p5 = sys.id("p5").unwrap();
    assert!(r.changes[p5.0] > r.bound.per_process, "{}", r.render(&sys));
    // Every other boundary process stays within the bound.
    let a = sys.containment_areas();
    for p in a.e_b_processes().into_iter().filter(|p| !loose.contains(p)) {
        assert!(r.changes[p.0] <= r.bound.per_process, "{}", sys.name(p));
    }
}
