//! Engine-level invariants on small drops.

mod common;

use common::{fd, fdd, isolated_drop, small};
use fdsim::csi::{feedback_overhead, FeedbackConfig};
use fdsim::engine::{compare_modes, make_drop, make_drops, run_drop, Drop, GainMetric, Variant};
use fdsim::propagation::{NullingConfig, PropagationConfig};
use fdsim::radio::{
    bs_rb_power, compute_sinr_all, olpc_power, DuplexMode, LinearGains, PowerConfig, RadioEnv, TxPlan,
};
use fdsim::report::RunReport;
use fdsim::scheduling::SchedulerKind;
use fdsim::topology::{wrapped_distance, Direction, Point, ScenarioKind, WrapConfig};
use fdsim::traffic::TrafficModel;
use proptest::prelude::*;

#[test]
fn interference_free_fd_doubles_fdd() {
    let mut cfg = small(ScenarioKind::IndoorHotzone, 2000);
    cfg.self_interference.sic_db = 250.0;
    let drop = isolated_drop(&cfg);
    let cmp = compare_modes(&cfg, &[drop], &[fd(), fdd()]).unwrap();
    for dir in [Direction::Dl, Direction::Ul] {
        let g = cmp.gain("fd_basic", dir, GainMetric::Mean).unwrap();
        assert!((g - 2.0).abs() <= 0.05, "{dir:?} gain {g}");
    }
}

#[test]
fn mode_against_itself_is_exactly_one() {
    let cfg = small(ScenarioKind::IndoorHotzone, 200);
    let drops = make_drops(&cfg).unwrap();
    let cmp = compare_modes(&cfg, &drops, &[fdd()]).unwrap();
    assert!(cmp.gains.iter().all(|g| g.gain == Some(1.0)));
}

#[test]
fn fdd_ignores_cross_links_nulling_and_sic() {
    let cfg = small(ScenarioKind::OutdoorCluster, 300);
    let drop = make_drop(&cfg, 0).unwrap();
    let base = run_drop(&cfg, &drop, fdd()).unwrap();

    let mut cleared = drop.clone();
    cleared.gains.clear_cross_links();
    assert_eq!(run_drop(&cfg, &cleared, fdd()).unwrap(), base);

    let mut other = cfg.clone();
    other.self_interference.sic_db = 60.0;
    let renulled = Drop {
        gains: drop.gains.with_nulling(NullingConfig::symmetric(5.0)),
        ..drop.clone()
    };
    assert_eq!(run_drop(&other, &renulled, fdd()).unwrap(), base);
}

#[test]
fn bursty_queues_conserve_bits() {
    let mut cfg = small(ScenarioKind::IndoorHotzone, 1500);
    cfg.traffic.model = TrafficModel::Ftp3;
    cfg.traffic.ftp = cfg.traffic.ftp.with_dl_load(900e6);
    let drop = make_drop(&cfg, 0).unwrap();
    for v in [fd(), fdd(), Variant::new(DuplexMode::FlexibleDuplex, SchedulerKind::Flexible)] {
        let r = run_drop(&cfg, &drop, v).unwrap();
        let acked: u64 = r.served_bits.iter().sum();
        assert!(r.arrived_bits > 0);
        assert_eq!(r.arrived_bits, acked + r.dropped_bits + r.in_flight_bits + r.queued_bits);
        let burst_bits: u64 = r.bursts.iter().map(|b| b.size_bits).sum();
        assert_eq!(burst_bits, r.arrived_bits);
    }
}

#[test]
fn reports_are_deterministic_and_worker_independent() {
    let mut cfg = small(ScenarioKind::IndoorHotzone, 200);
    cfg.run.n_drops = 2;
    let variants = [fd(), fdd()];
    let run = |workers: usize| {
        let mut c = cfg.clone();
        c.run.workers = workers;
        let drops = make_drops(&c).unwrap();
        compare_modes(&c, &drops, &variants).unwrap()
    };
    let a = run(1);
    let b = run(2);
    assert_eq!(a, b);

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (d, cmp) in dirs.iter().zip([a, b]) {
        RunReport {
            config: cfg.clone(),
            points: vec![(None, cmp)],
        }
        .write(d.path())
        .unwrap();
    }
    for name in ["summary.txt", "gains.csv", "throughput_cdf_dl.csv", "throughput_cdf_ul.csv", "perceived_tput_dl.csv", "perceived_tput_ul.csv"] {
        let x = std::fs::read(dirs[0].path().join(name)).unwrap();
        let y = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn pair_feedback_overhead_below_two_percent() {
    let cfg = FeedbackConfig::default();
    let o = feedback_overhead(10, 10, 4, 50, 100, &cfg);
    assert!(o < 0.02, "overhead {o}");
    assert!(feedback_overhead(10, 10, 4, 200, 100, &cfg) < o);
}

#[test]
fn boost_never_raises_dl_sinr() {
    let cfg = small(ScenarioKind::OutdoorUniform, 1);
    let drop = make_drop(&cfg, 0).unwrap();
    let n_cells = drop.layout.n_cells();
    let mut plan = TxPlan::empty(n_cells, 1);
    for c in 0..n_cells {
        plan.dl[c] = drop.layout.dl_ues(c).first().copied();
        plan.ul[c] = drop.layout.ul_ues(c).first().copied();
        plan.ul_power_dbm[c] = -20.0;
    }
    let g = LinearGains::new(&drop.gains);
    let env = RadioEnv::new(bs_rb_power(24.0, 100), &cfg.self_interference, &drop.gains);
    let before = compute_sinr_all(&plan, &g, &env);
    plan.ul_power_dbm.iter_mut().for_each(|p| *p += 10.0);
    let after = compute_sinr_all(&plan, &g, &env);
    for (a, b) in after.dl_db.iter().zip(&before.dl_db) {
        assert!(a <= b);
    }
}

proptest! {
    #[test]
    fn olpc_is_clipped_and_monotone(pl in 40.0f64..160.0, extra in 0.0f64..30.0, boost in 0.0f64..40.0, alpha in 0.0f64..=1.0) {
        let cfg = PowerConfig { alpha, boost_db: boost, ..PowerConfig::default() };
        let p = olpc_power(pl, &cfg);
        prop_assert!(p <= cfg.p_max_dbm);
        prop_assert!(olpc_power(pl + extra, &cfg) >= p);
        let more = PowerConfig { boost_db: boost + extra, ..cfg.clone() };
        prop_assert!(olpc_power(pl, &more) >= p);
    }

    #[test]
    fn wrapped_distance_is_symmetric_and_minimal(ax in -700.0f64..700.0, ay in -700.0f64..700.0, bx in -700.0f64..700.0, by in -700.0f64..700.0) {
        let wrap = WrapConfig::tier1(500.0);
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        let d = wrapped_distance(a, b, &wrap);
        prop_assert!((d - wrapped_distance(b, a, &wrap)).abs() < 1e-9);
        prop_assert!(d <= a.distance(b) + 1e-9);
        let images = wrap.image_offsets().iter().map(|o| a.distance(b.add(*o))).fold(f64::INFINITY, f64::min);
        prop_assert!((d - images).abs() < 1e-9);
    }
}

#[test]
fn propagation_defaults_validate() {
    PropagationConfig::indoor().validate().unwrap();
    PropagationConfig::outdoor().validate().unwrap();
}
