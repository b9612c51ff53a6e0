//! Schedulers, MCS selection and percentiles against independent brute-force oracles.

mod common;

use common::{linear_scan_mcs, near_mcs_boundary, oracle, random_tti, request, sorted_oracle, tables, Oracle};
use fdsim::link::select_mcs;
use fdsim::radio::DuplexMode;
use fdsim::scheduling::{schedule_basic, schedule_flexible, schedule_joint, Reservation};
use fdsim::stats::{percentile, Cdf};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn basic_scheduler_matches_brute_force() {
    let (cqi, mcs) = tables();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mode in [DuplexMode::FullDuplex, DuplexMode::Fdd] {
        for _ in 0..100 {
            let t = random_tti(&mut rng, mode);
            assert_eq!(schedule_basic(&request(&t, &cqi, &mcs)), oracle(&t, Oracle::Basic, &cqi, &mcs));
        }
    }
}

#[test]
fn joint_scheduler_matches_brute_force() {
    let (cqi, mcs) = tables();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let t = random_tti(&mut rng, DuplexMode::FullDuplex);
        assert_eq!(schedule_joint(&request(&t, &cqi, &mcs)), oracle(&t, Oracle::Joint, &cqi, &mcs));
    }
}

#[test]
fn flexible_scheduler_matches_brute_force() {
    let (cqi, mcs) = tables();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let t = random_tti(&mut rng, DuplexMode::FlexibleDuplex);
        let got = schedule_flexible(&request(&t, &cqi, &mcs));
        assert!(got.iter().all(|c| c.dl.is_none() || c.ul.is_none()));
        assert_eq!(got, oracle(&t, Oracle::Flexible, &cqi, &mcs));
    }
}

#[test]
fn joint_equals_basic_without_degradation() {
    let (cqi, mcs) = tables();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let mut t = random_tti(&mut rng, DuplexMode::FullDuplex);
        t.pair.iter_mut().for_each(|p| *p = Some(0));
        t.reserved.iter_mut().for_each(|r| *r = Reservation::default());
        t.dl_backlog.iter_mut().for_each(|b| *b = u64::MAX);
        t.ul_backlog.iter_mut().for_each(|b| *b = u64::MAX);
        let req = request(&t, &cqi, &mcs);
        let basic = schedule_basic(&req);
        let joint = schedule_joint(&req);
        // Same utility; the chosen UEs only differ where a side is idle.
        for (b, j) in basic.iter().zip(&joint) {
            if b.dl.is_some() && b.ul.is_some() {
                assert_eq!(b, j);
            }
        }
    }
}

#[test]
fn select_mcs_matches_linear_scan() {
    let (_, mcs) = tables();
    let mut x = -25.0;
    while x < 35.0 {
        if !near_mcs_boundary(x, &mcs) {
            assert_eq!(select_mcs(x, &mcs), linear_scan_mcs(x, &mcs), "sinr {x}");
        }
        x += 0.01;
    }
    for m in 0..mcs.len() as u8 {
        let at = mcs.sinr_10pct_db(m);
        assert_eq!(select_mcs(at, &mcs), m);
    }
}

proptest! {
    #[test]
    fn percentile_matches_sorted_oracle(values in prop::collection::vec(-1e6f64..1e6, 1..200), p in 0.0f64..=100.0) {
        let cdf = Cdf::from_values(values.clone());
        let got = cdf.percentile(p).unwrap();
        let want = sorted_oracle(&values, p);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(percentile(&sorted, p), Some(got));
    }

    #[test]
    fn select_mcs_matches_scan_everywhere(sinr in -30.0f64..40.0) {
        let (_, mcs) = tables();
        prop_assume!(!near_mcs_boundary(sinr, &mcs));
        prop_assert_eq!(select_mcs(sinr, &mcs), linear_scan_mcs(sinr, &mcs));
    }
}
