//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use fdsim::config::RunConfig;
use fdsim::csi::CqiTable;
use fdsim::engine::{Drop, Variant};
use fdsim::link::{bler, LinkConfig, McsTable};
use fdsim::propagation::LinkGainMatrix;
use fdsim::radio::{DuplexMode, GridConfig, ResourceGrid, SubbandUse};
use fdsim::scheduling::{CellRequest, Reservation, SchedulerKind, SubbandChoice};
use fdsim::topology::{Direction, NetworkLayout, Point, ScenarioKind, SmallCell, Ue};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const RB_BW: f64 = 180e3;

pub struct Tti {
    pub grid: ResourceGrid,
    pub dl_ues: Vec<usize>,
    pub ul_ues: Vec<usize>,
    pub dl_cqi: Vec<u8>,
    pub ul_cqi: Vec<u8>,
    pub dl_avg: Vec<f64>,
    pub ul_avg: Vec<f64>,
    pub dl_backlog: Vec<u64>,
    pub ul_backlog: Vec<u64>,
    pub pair: Vec<Option<u8>>,
    pub reserved: Vec<Reservation>,
}

pub fn random_tti(rng: &mut ChaCha8Rng, mode: DuplexMode) -> Tti {
    let grid = ResourceGrid::new(mode, &GridConfig::default());
    let n_sb = grid.n_subbands();
    let (nd, nu) = (10, 10);
    // Cell 3 of a network: ids are not zero based.
    let dl_ues: Vec<usize> = (60..60 + nd).collect();
    let ul_ues: Vec<usize> = (70..70 + nu).collect();
    // Coarse values make ties common.
    let avg = |rng: &mut ChaCha8Rng| [1e5, 2e5, 5e5, 1e6][rng.random_range(0..4)];
    let backlog = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
        0 => 0,
        1 => u64::MAX,
        _ => rng.random_range(1..20_000),
    };
    let dl_cqi = (0..nd * n_sb).map(|_| rng.random_range(0..=15)).collect();
    let ul_cqi = (0..nu * n_sb).map(|_| rng.random_range(0..=15)).collect();
    let dl_avg = (0..nd).map(|_| avg(rng)).collect();
    let ul_avg = (0..nu).map(|_| avg(rng)).collect();
    let dl_backlog = (0..nd).map(|_| backlog(rng)).collect();
    let ul_backlog = (0..nu).map(|_| backlog(rng)).collect();
    let pair = (0..nd * nu)
        .map(|_| if rng.random_bool(0.15) { None } else { Some(rng.random_range(0..=15)) })
        .collect();
    let reserved = grid
        .subbands
        .iter()
        .map(|sb| {
            let mut r = Reservation::default();
            if rng.random_bool(0.1) {
                match sb.usage {
                    SubbandUse::Both => {
                        r.dl = rng.random_bool(0.5).then(|| 60 + rng.random_range(0..nd));
                        r.ul = rng.random_bool(0.5).then(|| 70 + rng.random_range(0..nu));
                    }
                    SubbandUse::DlOnly => r.dl = Some(60 + rng.random_range(0..nd)),
                    SubbandUse::UlOnly => r.ul = Some(70 + rng.random_range(0..nu)),
                    SubbandUse::Either => {
                        if rng.random_bool(0.5) {
                            r.dl = Some(60 + rng.random_range(0..nd));
                        } else {
                            r.ul = Some(70 + rng.random_range(0..nu));
                        }
                    }
                }
            }
            r
        })
        .collect();
    Tti {
        grid,
        dl_ues,
        ul_ues,
        dl_cqi,
        ul_cqi,
        dl_avg,
        ul_avg,
        dl_backlog,
        ul_backlog,
        pair,
        reserved,
    }
}

pub fn request<'a>(t: &'a Tti, cqi: &'a CqiTable, mcs: &'a McsTable) -> CellRequest<'a> {
    CellRequest {
        subbands: &t.grid.subbands,
        dl_ues: &t.dl_ues,
        ul_ues: &t.ul_ues,
        dl_cqi: &t.dl_cqi,
        ul_cqi: &t.ul_cqi,
        dl_avg_bps: &t.dl_avg,
        ul_avg_bps: &t.ul_avg,
        dl_backlog: &t.dl_backlog,
        ul_backlog: &t.ul_backlog,
        pair_degradation: Some(&t.pair),
        reserved: &t.reserved,
        cqi_table: cqi,
        mcs_table: mcs,
        rb_bandwidth_hz: RB_BW,
    }
}

#[derive(Clone, Copy, PartialEq)]
pub enum Oracle {
    Basic,
    Joint,
    Flexible,
}

/// Straight enumeration of every option of every subband, in subband order,
/// with backlog bookkeeping done the same way the schedulers document it.
pub fn oracle(t: &Tti, kind: Oracle, cqi: &CqiTable, mcs: &McsTable) -> Vec<SubbandChoice> {
    let n_sb = t.grid.n_subbands();
    let (nd, nu) = (t.dl_ues.len(), t.ul_ues.len());
    let mut dl_left = t.dl_backlog.clone();
    let mut ul_left = t.ul_backlog.clone();
    let rate = |c: u8, n_rb: usize| cqi.efficiency(c) * n_rb as f64 * RB_BW;
    let tb = |c: u8, n_rb: usize| {
        let m = mcs.mcs_for_cqi(c) as usize;
        let bits = mcs.entries[m].spectral_efficiency * RB_BW * mcs.tti_s * n_rb as f64 * (1.0 - mcs.overhead_fraction);
        (bits.floor() as u64).max(1)
    };
    let mut out = Vec::new();
    for (s, sb) in t.grid.subbands.iter().enumerate() {
        let n_rb = sb.n_rb;
        let res = t.reserved[s];
        let dl_m = |d: usize, loss: u8| rate(t.dl_cqi[d * n_sb + s].saturating_sub(loss), n_rb) / t.dl_avg[d];
        let ul_m = |u: usize| rate(t.ul_cqi[u * n_sb + s], n_rb) / t.ul_avg[u];
        let dl_cands: Vec<usize> = match res.dl {
            Some(ue) => vec![ue - 60],
            None => (0..nd).filter(|&d| dl_left[d] > 0).collect(),
        };
        let ul_cands: Vec<usize> = match res.ul {
            Some(ue) => vec![ue - 70],
            None => (0..nu).filter(|&u| ul_left[u] > 0).collect(),
        };
        let best_of = |cands: &[usize], f: &dyn Fn(usize) -> f64| -> Option<(usize, f64)> {
            let max = cands.iter().map(|&i| f(i)).fold(f64::NEG_INFINITY, f64::max);
            cands.iter().copied().find(|&i| f(i) == max).map(|i| (i, max))
        };
        let dl_allowed = sb.usage != SubbandUse::UlOnly;
        let ul_allowed = sb.usage != SubbandUse::DlOnly;
        let use_rule = match sb.usage {
            SubbandUse::DlOnly | SubbandUse::UlOnly => Oracle::Basic,
            SubbandUse::Either => Oracle::Flexible,
            SubbandUse::Both => kind,
        };
        let (d, u): (Option<usize>, Option<usize>) = match use_rule {
            Oracle::Basic => (
                if dl_allowed { best_of(&dl_cands, &|d| dl_m(d, 0)).map(|x| x.0) } else { None },
                if ul_allowed { best_of(&ul_cands, &ul_m).map(|x| x.0) } else { None },
            ),
            Oracle::Flexible => {
                if res.dl.is_some() {
                    (Some(dl_cands[0]), None)
                } else if res.ul.is_some() {
                    (None, Some(ul_cands[0]))
                } else {
                    match (best_of(&dl_cands, &|d| dl_m(d, 0)), best_of(&ul_cands, &ul_m)) {
                        (Some((d, a)), Some((_, b))) if a >= b => (Some(d), None),
                        (_, Some((u, _))) => (None, Some(u)),
                        (Some((d, _)), None) => (Some(d), None),
                        (None, None) => (None, None),
                    }
                }
            }
            Oracle::Joint => {
                let mut dls: Vec<Option<usize>> = dl_cands.iter().map(|&d| Some(d)).collect();
                let mut uls: Vec<Option<usize>> = ul_cands.iter().map(|&u| Some(u)).collect();
                if res.dl.is_none() {
                    dls.push(None);
                }
                if res.ul.is_none() {
                    uls.push(None);
                }
                let mut options = Vec::new();
                for &d in &dls {
                    for &u in &uls {
                        let v = match (d, u) {
                            (None, None) => Some(0.0),
                            (None, Some(u)) => Some(0.0 + ul_m(u)),
                            (Some(d), None) => Some(dl_m(d, 0) + 0.0),
                            (Some(d), Some(u)) => t.pair[u * nd + d].map(|loss| dl_m(d, loss) + ul_m(u)),
                        };
                        if let Some(v) = v {
                            options.push(((d, u), v));
                        }
                    }
                }
                let max = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
                options
                    .iter()
                    .find(|o| o.1 == max)
                    .map(|o| o.0)
                    .unwrap_or((dls[0], uls[0]))
            }
        };
        if let (Some(d), None) = (d, res.dl) {
            dl_left[d] = dl_left[d].saturating_sub(tb(t.dl_cqi[d * n_sb + s], n_rb));
        }
        if let (Some(u), None) = (u, res.ul) {
            ul_left[u] = ul_left[u].saturating_sub(tb(t.ul_cqi[u * n_sb + s], n_rb));
        }
        out.push(SubbandChoice {
            dl: d.map(|d| t.dl_ues[d]),
            ul: u.map(|u| t.ul_ues[u]),
        });
    }
    out
}

pub fn tables() -> (CqiTable, McsTable) {
    let cqi = CqiTable::lte();
    let mcs = McsTable::from_cqi(&cqi, &LinkConfig::default(), RB_BW, 1.0);
    (cqi, mcs)
}

pub fn linear_scan_mcs(sinr: f64, table: &McsTable) -> u8 {
    let mut best = 0;
    for m in 0..table.len() as u8 {
        if bler(m, sinr, table) <= 0.1 {
            best = m;
        }
    }
    best
}

/// True when some MCS has a BLER within rounding of the 10% target at `sinr`,
/// where the closed-form threshold and the scan may disagree by one ulp.
pub fn near_mcs_boundary(sinr: f64, table: &McsTable) -> bool {
    (0..table.len() as u8).any(|m| (bler(m, sinr, table) - 0.1).abs() < 1e-12)
}

pub fn sorted_oracle(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

pub fn small(kind: ScenarioKind, ttis: u64) -> RunConfig {
    let mut cfg = RunConfig::defaults(kind);
    cfg.run.n_drops = 1;
    cfg.run.ttis_per_drop = ttis;
    cfg.run.bursty_ttis_per_drop = ttis;
    cfg.run.workers = 1;
    cfg
}

/// Two isolated cells with one DL and one UL UE each; every cross link absent.
pub fn isolated_drop(cfg: &RunConfig) -> Drop {
    let cells: Vec<SmallCell> = (0..2)
        .map(|i| SmallCell {
            id: i,
            pos: Point::new(1000.0 * i as f64, 0.0),
            height_m: 10.0,
            site: 0,
            sector: 0,
            group: i,
            key: i as u64,
            building: None,
        })
        .collect();
    let ues: Vec<Ue> = (0..4)
        .map(|i| Ue {
            id: i,
            pos: Point::new(1000.0 * (i / 2) as f64 + 20.0, 0.0),
            height_m: 1.5,
            cell: i / 2,
            direction: if i % 2 == 0 { Direction::Dl } else { Direction::Ul },
            key: 100 + i as u64,
            building: None,
        })
        .collect();
    let layout = NetworkLayout::custom(cells, ues, None).unwrap();
    let mut gains = LinkGainMatrix::blank(
        2,
        4,
        cfg.propagation.ue_noise_dbm_per_rb(),
        cfg.propagation.bs_noise_dbm_per_rb(),
    );
    for u in 0..4 {
        gains.set_bs_ue(u / 2, u, -60.0);
    }
    Drop {
        index: 0,
        seed: 5,
        layout,
        gains,
    }
}

pub fn fd() -> Variant {
    Variant::new(DuplexMode::FullDuplex, SchedulerKind::Basic)
}

pub fn fdd() -> Variant {
    Variant::new(DuplexMode::Fdd, SchedulerKind::Fdd)
}

