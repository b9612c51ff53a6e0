//! Drop generation, the per-TTI loop and mode comparisons.
//!
//! One TTI runs in a fixed order: traffic arrivals, feedback ageing (and
//! pair-report refresh), scheduling of every cell, power and MCS
//! assignment, network-wide SINR, HARQ decoding, PF/traffic updates, and
//! finally the measurements that later feed back into CQI reports.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::csi::{
    measure_pair_interference, quantize_pair_feedback, sinr_to_cqi, DelayLine, PairFeedback, PairMeasurement,
    WidebandBaseline,
};
use crate::error::{Result, SimError};
use crate::link::{harq_step, select_mcs, tb_size, HarqOutcome, HarqProcess, McsTable};
use crate::propagation::{build_gain_matrix, interference_ratio_cdfs, InterferenceCdfs, LinkGainMatrix, NullingConfig};
use crate::radio::{
    bs_rb_power, compute_sinr_all, olpc_powers, select_boost, ue_rb_power, DuplexMode, LinearGains, RadioEnv,
    ResourceGrid, SubbandActivity, TxPlan,
};
use crate::rng::{derive_seed, drop_seed, stream, stream_rng};
use crate::scheduling::{schedule, CellRequest, PfState, Reservation, SchedulerKind};
use crate::stats::{mean, Cdf};
use crate::topology::{generate_layout, Direction, NetworkLayout};
use crate::traffic::{generate_arrivals, perceived_throughput, BurstRecord, TrafficModel, TrafficState};
use crate::units::mw_to_dbm;

/// Layout and channel shared by every mode simulated on it.
#[derive(Clone, Debug)]
pub struct Drop {
    pub index: usize,
    pub seed: u64,
    pub layout: NetworkLayout,
    pub gains: LinkGainMatrix,
}

/// Generates drop `index` of the configuration.
pub fn make_drop(cfg: &RunConfig, index: usize) -> Result<Drop> {
    let seed = drop_seed(cfg.run.seed, index as u64);
    let layout = generate_layout(cfg.scenario.kind, seed, &cfg.scenario, &cfg.propagation)?;
    let gains = build_gain_matrix(&layout, cfg.nulling, &cfg.propagation, seed);
    Ok(Drop {
        index,
        seed,
        layout,
        gains,
    })
}

/// A duplex mode with the scheduler it runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variant {
    pub mode: DuplexMode,
    pub scheduler: SchedulerKind,
}

impl Variant {
    pub fn new(mode: DuplexMode, scheduler: SchedulerKind) -> Self {
        Variant { mode, scheduler }
    }

    pub fn label(&self) -> String {
        match self.mode {
            DuplexMode::FullDuplex => format!("fd_{}", self.scheduler.name()),
            m => m.name().to_string(),
        }
    }
}

/// Outcome of one mode on one drop.
#[derive(Clone, Debug, PartialEq)]
pub struct DropResult {
    pub variant: Variant,
    pub drop_index: usize,
    pub ttis: u64,
    pub tti_s: f64,
    pub boost_db: f64,
    /// Acknowledged bits per UE.
    pub served_bits: Vec<u64>,
    pub directions: Vec<Direction>,
    pub bursts: Vec<BurstRecord>,
    pub arrived_bits: u64,
    pub dropped_bits: u64,
    pub in_flight_bits: u64,
    pub queued_bits: u64,
    pub transmissions: u64,
    pub first_tx_failures: u64,
    pub warnings: Vec<String>,
}

impl DropResult {
    /// Throughput of every UE of `dir`, bits/s.
    pub fn throughput(&self, dir: Direction) -> Vec<f64> {
        let dur = self.ttis as f64 * self.tti_s;
        self.served_bits
            .iter()
            .zip(&self.directions)
            .filter(|(_, d)| **d == dir)
            .map(|(&b, _)| if dur > 0.0 { b as f64 / dur } else { 0.0 })
            .collect()
    }
}

/// Sub-band CQI reports of one measurement TTI.
#[derive(Clone, Debug)]
struct DlReport {
    /// With every UL transmitter of the TTI, `[ue * n_sb + s]`.
    aggregate: Vec<u8>,
    /// Without UL transmitters of the serving cell.
    baseline: Vec<u8>,
    wideband: Vec<Option<WidebandBaseline>>,
}

/// Simulates one variant on one drop.
pub fn run_drop(cfg: &RunConfig, drop: &Drop, variant: Variant) -> Result<DropResult> {
    let Variant { mode, scheduler } = variant;
    let layout = &drop.layout;
    let gains = &drop.gains;
    let grid = ResourceGrid::new(mode, &cfg.grid);
    let n_sb = grid.n_subbands();
    let n_cells = layout.n_cells();
    let n_ue = layout.n_ues();
    let ttis = cfg.ttis();
    let tti_s = cfg.grid.tti_ms * 1e-3;
    let bs_dbm = bs_rb_power(cfg.power.bs_power_dbm, grid.rbs_for(Direction::Dl));
    let mut warnings = Vec::new();

    let mut power = cfg.power.clone();
    power.boost_db = if mode == DuplexMode::Fdd {
        0.0
    } else if power.auto_boost {
        let sel = select_boost(layout, gains, &power, bs_dbm, &cfg.self_interference);
        if !sel.target_met {
            warnings.push(format!(
                "drop {}: UL SINR target {} dB not met; boost capped at {} dB (median UL SINR {:.1} dB)",
                drop.index, power.target_ul_sinr_db, sel.boost_db, sel.median_ul_sinr_db
            ));
        }
        sel.boost_db
    } else {
        power.boost_db
    };
    let olpc = olpc_powers(layout, gains, &power);
    let lin = LinearGains::new(gains);
    let env = RadioEnv::new(bs_dbm, &cfg.self_interference, gains);
    let cqi_table = &cfg.feedback.cqi_table;
    let mcs_table = McsTable::from_cqi(cqi_table, &cfg.link, cfg.grid.rb_bandwidth_hz, cfg.grid.tti_ms);
    let default_cqi = cfg.feedback.default_cqi;
    let quantizer = cfg.feedback.quantizer();
    let joint = scheduler == SchedulerKind::Joint;
    // The joint scheduler knows its own UL choice; flexible cells never
    // receive their own UL on a DL subband. Both read the baseline CQI.
    let use_baseline = joint || mode == DuplexMode::FlexibleDuplex;

    let mut traffic = match cfg.traffic.model {
        TrafficModel::FullBuffer => TrafficState::full_buffer(n_ue),
        TrafficModel::Ftp3 => {
            let ues: Vec<(usize, Direction)> = layout.ues.iter().map(|u| (u.id, u.direction)).collect();
            let arrivals = generate_arrivals(&cfg.traffic.ftp, &ues, ttis, tti_s, derive_seed(drop.seed, stream::TRAFFIC));
            TrafficState::bursty(n_ue, arrivals)
        }
    };
    let harq_seed = derive_seed(drop.seed, stream::HARQ);
    let mut harq_rng: Vec<ChaCha8Rng> = (0..n_cells).map(|c| stream_rng(harq_seed, c as u64)).collect();
    let mut pf = PfState::new(n_ue, cfg.pf);
    let mut dl_line: DelayLine<DlReport> = DelayLine::new(cfg.feedback.delay_tti);
    let mut ul_line: DelayLine<Vec<f64>> = DelayLine::new(cfg.feedback.delay_tti);
    let pair_meas: Vec<PairMeasurement> = (0..n_cells)
        .map(|c| measure_pair_interference(layout.ul_ues(c), layout.dl_ues(c), &olpc, |u, d| gains.ue_ue(u, d)))
        .collect();
    let mut pair_fb: Vec<PairFeedback> = (0..n_cells)
        .map(|c| PairFeedback::neutral(quantizer, layout.ul_ues(c).len(), layout.dl_ues(c).len()))
        .collect();
    let mut pair_ready = false;

    let mut pending: Vec<HarqProcess> = Vec::new();
    let mut served = vec![0u64; n_ue];
    let mut served_tti = vec![0u64; n_ue];
    let mut transmissions = 0u64;
    let mut first_tx_failures = 0u64;
    let dl_ue_ids: Vec<usize> = layout.ues.iter().filter(|u| u.direction == Direction::Dl).map(|u| u.id).collect();
    let serving: Vec<usize> = layout.ues.iter().map(|u| u.cell).collect();

    for tti in 0..ttis {
        traffic.admit(tti);

        let dl_rep = dl_line.report(tti);
        let ul_rep = ul_line.report(tti);

        if joint {
            let period = cfg.feedback.pair_update_period_tti;
            if let Some(rep) = dl_rep {
                if !pair_ready || tti % period == 0 {
                    for c in 0..n_cells {
                        let base: Vec<Option<WidebandBaseline>> =
                            layout.dl_ues(c).iter().map(|&d| rep.wideband[d]).collect();
                        pair_fb[c] = quantize_pair_feedback(&pair_meas[c], &base, quantizer, cqi_table, tti);
                    }
                    pair_ready = true;
                }
            }
        }

        // Retransmissions due now hold their slots.
        let (due, later): (Vec<HarqProcess>, Vec<HarqProcess>) = pending.drain(..).partition(|p| p.next_tx_tti == tti);
        pending = later;
        let mut reserved = vec![Reservation::default(); n_cells * n_sb];
        for p in &due {
            let r = &mut reserved[p.cell * n_sb + p.subband];
            let slot = match p.direction {
                Direction::Dl => &mut r.dl,
                Direction::Ul => &mut r.ul,
            };
            if slot.is_some() {
                return Err(SimError::invariant(format!(
                    "two retransmissions on cell {} subband {} at TTI {tti}",
                    p.cell, p.subband
                )));
            }
            *slot = Some(p.ue);
        }

        // Scheduling, cell by cell.
        let mut plan = TxPlan::empty(n_cells, n_sb);
        let mut dl_cqi_used = vec![0u8; n_cells * n_sb];
        for c in 0..n_cells {
            let dl_ues = layout.dl_ues(c);
            let ul_ues = layout.ul_ues(c);
            let mut dl_cqi = Vec::with_capacity(dl_ues.len() * n_sb);
            for &d in dl_ues {
                match dl_rep {
                    Some(rep) => {
                        let src = if use_baseline { &rep.baseline } else { &rep.aggregate };
                        dl_cqi.extend_from_slice(&src[d * n_sb..(d + 1) * n_sb]);
                    }
                    None => dl_cqi.extend(std::iter::repeat_n(default_cqi, n_sb)),
                }
            }
            let mut ul_cqi = Vec::with_capacity(ul_ues.len() * n_sb);
            for &u in ul_ues {
                for s in 0..n_sb {
                    ul_cqi.push(match ul_rep {
                        Some(rep) => sinr_to_cqi(olpc[u] + gains.bs_ue(c, u) - rep[c * n_sb + s], cqi_table),
                        None => default_cqi,
                    });
                }
            }
            let dl_avg: Vec<f64> = dl_ues.iter().map(|&u| pf.avg(u)).collect();
            let ul_avg: Vec<f64> = ul_ues.iter().map(|&u| pf.avg(u)).collect();
            let dl_backlog: Vec<u64> = dl_ues.iter().map(|&u| traffic.backlog(u)).collect();
            let ul_backlog: Vec<u64> = ul_ues.iter().map(|&u| traffic.backlog(u)).collect();
            let pair: Option<Vec<Option<u8>>> = joint.then(|| {
                let fb = &pair_fb[c];
                (0..ul_ues.len())
                    .flat_map(|u| (0..dl_ues.len()).map(move |d| fb.degradation(u, d)))
                    .collect()
            });
            let req = CellRequest {
                subbands: &grid.subbands,
                dl_ues,
                ul_ues,
                dl_cqi: &dl_cqi,
                ul_cqi: &ul_cqi,
                dl_avg_bps: &dl_avg,
                ul_avg_bps: &ul_avg,
                dl_backlog: &dl_backlog,
                ul_backlog: &ul_backlog,
                pair_degradation: pair.as_deref(),
                reserved: &reserved[c * n_sb..(c + 1) * n_sb],
                cqi_table,
                mcs_table: &mcs_table,
                rb_bandwidth_hz: cfg.grid.rb_bandwidth_hz,
            };
            debug_assert!(req.validate().is_ok());
            for (s, choice) in schedule(scheduler, &req).into_iter().enumerate() {
                let i = plan.slot(c, s);
                plan.dl[i] = choice.dl;
                plan.ul[i] = choice.ul;
                if let Some(d) = choice.dl {
                    let li = dl_ues.binary_search(&d).expect("DL UE of this cell");
                    let mut cqi = dl_cqi[li * n_sb + s];
                    if let (true, Some(u)) = (joint, choice.ul) {
                        let lu = ul_ues.binary_search(&u).expect("UL UE of this cell");
                        cqi = cqi.saturating_sub(pair_fb[c].degradation(lu, li).unwrap_or(0));
                    }
                    dl_cqi_used[i] = cqi;
                }
            }
        }
        plan.check(&grid)?;

        // UL power from the number of RBs each UE got.
        let mut ul_rbs = vec![0usize; n_ue];
        for c in 0..n_cells {
            for (s, sb) in grid.subbands.iter().enumerate() {
                if let Some(u) = plan.ul[plan.slot(c, s)] {
                    ul_rbs[u] += sb.n_rb;
                }
            }
        }
        for i in 0..n_cells * n_sb {
            if let Some(u) = plan.ul[i] {
                plan.ul_power_dbm[i] = ue_rb_power(olpc[u], ul_rbs[u], power.p_max_dbm);
            }
        }

        // Transport blocks: retransmissions keep theirs, new ones take from the queues.
        let mut active: Vec<HarqProcess> = Vec::with_capacity(2 * n_cells * n_sb);
        for p in due {
            active.push(p);
        }
        for c in 0..n_cells {
            for (s, sb) in grid.subbands.iter().enumerate() {
                let i = plan.slot(c, s);
                let res = reserved[i];
                if let (Some(d), None) = (plan.dl[i], res.dl) {
                    let mcs = mcs_table.mcs_for_cqi(dl_cqi_used[i]);
                    match new_process(&mut traffic, d, c, Direction::Dl, s, mcs, sb.n_rb, tti, &mcs_table) {
                        Some(p) => active.push(p),
                        None => plan.dl[i] = None,
                    }
                }
                if let (Some(u), None) = (plan.ul[i], res.ul) {
                    let mcs = match ul_rep {
                        Some(rep) => select_mcs(plan.ul_power_dbm[i] + gains.bs_ue(c, u) - rep[i], &mcs_table),
                        None => mcs_table.mcs_for_cqi(default_cqi),
                    };
                    match new_process(&mut traffic, u, c, Direction::Ul, s, mcs, sb.n_rb, tti, &mcs_table) {
                        Some(p) => active.push(p),
                        None => plan.ul[i] = None,
                    }
                }
            }
        }

        let sinr = compute_sinr_all(&plan, &lin, &env);

        active.sort_by_key(|p| (p.cell, p.subband, p.direction == Direction::Ul));
        for p in active {
            let i = plan.slot(p.cell, p.subband);
            let s = match p.direction {
                Direction::Dl => sinr.dl_db[i],
                Direction::Ul => sinr.ul_db[i],
            };
            if s.is_nan() {
                return Err(SimError::invariant(format!(
                    "no SINR for UE {} on cell {} subband {} at TTI {tti}",
                    p.ue, p.cell, p.subband
                )));
            }
            transmissions += 1;
            let first = p.attempts == 1;
            let cell = p.cell;
            match harq_step(p, s, tti, &mcs_table, &cfg.link, &mut harq_rng[cell]) {
                HarqOutcome::Ack(p) => {
                    traffic.ack(&p.segments, tti);
                    served_tti[p.ue] += p.payload_bits;
                }
                HarqOutcome::Retransmit(p) => {
                    if first {
                        first_tx_failures += 1;
                    }
                    pending.push(p);
                }
                HarqOutcome::Dropped(p) => traffic.drop_segments(&p.segments),
            }
        }
        if !traffic.conserved() {
            return Err(SimError::invariant(format!("queue conservation broken at TTI {tti}")));
        }

        pf.update(&served_tti, tti_s);
        for (tot, s) in served.iter_mut().zip(served_tti.iter_mut()) {
            *tot += *s;
            *s = 0;
        }

        // Measurements of this TTI, visible to the schedulers after the delay.
        let mut rep = DlReport {
            aggregate: vec![0; n_ue * n_sb],
            baseline: vec![0; n_ue * n_sb],
            wideband: vec![None; n_ue],
        };
        let mut wb_sinr = vec![0.0; n_ue];
        let mut wb_int = vec![0.0; n_ue];
        let mut wb_n = 0usize;
        let mut ul_int = vec![f64::INFINITY; n_cells * n_sb];
        for (s, sb) in grid.subbands.iter().enumerate() {
            let act = SubbandActivity::from_plan(&plan, s);
            if sb.usage.allows(Direction::Dl) {
                wb_n += 1;
                for &d in &dl_ue_ids {
                    let t = act.dl_terms(d, serving[d], &lin, &env);
                    let base = t.sinr_without_own_ue_db();
                    rep.aggregate[d * n_sb + s] = sinr_to_cqi(t.sinr_db(), cqi_table);
                    rep.baseline[d * n_sb + s] = sinr_to_cqi(base, cqi_table);
                    wb_sinr[d] += base;
                    wb_int[d] += mw_to_dbm(t.bs + t.ue_other + t.noise);
                }
            }
            if sb.usage.allows(Direction::Ul) {
                for c in 0..n_cells {
                    let t = act.ul_terms(c, &lin, &env);
                    let echo = if mode == DuplexMode::FullDuplex { t.self_echo } else { 0.0 };
                    ul_int[c * n_sb + s] = mw_to_dbm(t.ue + t.bs + echo + t.noise);
                }
            }
        }
        if wb_n > 0 {
            for &d in &dl_ue_ids {
                rep.wideband[d] = Some(WidebandBaseline {
                    sinr_db: wb_sinr[d] / wb_n as f64,
                    interference_dbm: wb_int[d] / wb_n as f64,
                });
            }
        }
        dl_line.push(tti, rep);
        ul_line.push(tti, ul_int);
    }

    let in_flight: u64 = pending.iter().map(|p| p.payload_bits).sum();
    debug_assert!(traffic.is_full_buffer() || in_flight == traffic.in_flight_bits);
    let admitted: Vec<BurstRecord> = traffic.bursts.iter().filter(|b| b.arrival_tti < ttis).cloned().collect();
    Ok(DropResult {
        variant,
        drop_index: drop.index,
        ttis,
        tti_s,
        boost_db: power.boost_db,
        served_bits: served,
        directions: layout.ues.iter().map(|u| u.direction).collect(),
        bursts: admitted,
        arrived_bits: traffic.arrived_bits,
        dropped_bits: traffic.dropped_bits,
        in_flight_bits: traffic.in_flight_bits,
        queued_bits: if traffic.is_full_buffer() { 0 } else { traffic.queued_total() },
        transmissions,
        first_tx_failures,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn new_process(
    traffic: &mut TrafficState,
    ue: usize,
    cell: usize,
    direction: Direction,
    subband: usize,
    mcs: u8,
    n_rb: usize,
    tti: u64,
    table: &McsTable,
) -> Option<HarqProcess> {
    let tb = tb_size(mcs, n_rb, table);
    let payload = tb.min(traffic.backlog(ue));
    if payload == 0 {
        return None;
    }
    let segments = traffic.take(ue, payload);
    Some(HarqProcess {
        ue,
        cell,
        direction,
        subband,
        mcs,
        tb_bits: tb,
        payload_bits: payload,
        segments,
        attempts: 1,
        next_tx_tti: tti,
    })
}

/// All drops of one variant.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeResult {
    pub variant: Variant,
    pub drops: Vec<DropResult>,
}

impl ModeResult {
    pub fn label(&self) -> String {
        self.variant.label()
    }

    /// Per-UE throughput over every drop.
    pub fn throughput(&self, dir: Direction) -> Cdf {
        Cdf::from_values(self.drops.iter().flat_map(|d| d.throughput(dir)))
    }

    /// Per-UE mean perceived throughput over every drop, and the count of
    /// unfinished bursts.
    pub fn perceived(&self, dir: Direction) -> (Cdf, usize) {
        let mut values = Vec::new();
        let mut unfinished = 0;
        for d in &self.drops {
            let p = perceived_throughput(d.bursts.iter().filter(|b| b.direction == dir), d.tti_s);
            values.extend_from_slice(p.per_ue.values());
            unfinished += p.unfinished;
        }
        (Cdf::from_values(values), unfinished)
    }

    pub fn mean_boost_db(&self) -> f64 {
        mean(&self.drops.iter().map(|d| d.boost_db).collect::<Vec<_>>()).unwrap_or(0.0)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.drops.iter().flat_map(|d| d.warnings.iter().cloned()).collect()
    }
}

/// Statistics a gain is computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainMetric {
    Mean,
    P5,
    P50,
    P95,
}

impl GainMetric {
    pub const ALL: [GainMetric; 4] = [GainMetric::Mean, GainMetric::P5, GainMetric::P50, GainMetric::P95];

    pub fn name(self) -> &'static str {
        match self {
            GainMetric::Mean => "mean",
            GainMetric::P5 => "p5",
            GainMetric::P50 => "p50",
            GainMetric::P95 => "p95",
        }
    }

    pub fn of(self, cdf: &Cdf) -> Option<f64> {
        match self {
            GainMetric::Mean => cdf.mean(),
            GainMetric::P5 => cdf.percentile(5.0),
            GainMetric::P50 => cdf.percentile(50.0),
            GainMetric::P95 => cdf.percentile(95.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainRow {
    pub label: String,
    pub direction: Direction,
    pub metric: GainMetric,
    /// `None` when the reference value is zero or missing.
    pub gain: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub traffic: TrafficModel,
    pub results: Vec<ModeResult>,
    /// Label of the reference variant.
    pub reference: String,
    pub gains: Vec<GainRow>,
}

impl Comparison {
    pub fn result(&self, label: &str) -> Option<&ModeResult> {
        self.results.iter().find(|r| r.label() == label)
    }

    pub fn gain(&self, label: &str, dir: Direction, metric: GainMetric) -> Option<f64> {
        self.gains
            .iter()
            .find(|g| g.label == label && g.direction == dir && g.metric == metric)
            .and_then(|g| g.gain)
    }
}

/// Metric distribution a gain is taken on: throughput for full buffer,
/// per-UE perceived throughput for bursty traffic.
pub fn gain_basis(r: &ModeResult, traffic: TrafficModel, dir: Direction) -> Cdf {
    match traffic {
        TrafficModel::FullBuffer => r.throughput(dir),
        TrafficModel::Ftp3 => r.perceived(dir).0,
    }
}

/// `metric(variant) / metric(reference)` for every variant, direction and metric.
pub fn gains_against(results: &[ModeResult], reference: &ModeResult, traffic: TrafficModel) -> Vec<GainRow> {
    let mut rows = Vec::new();
    for dir in [Direction::Dl, Direction::Ul] {
        let base = gain_basis(reference, traffic, dir);
        for r in results {
            let cdf = gain_basis(r, traffic, dir);
            for metric in GainMetric::ALL {
                let gain = match (metric.of(&cdf), metric.of(&base)) {
                    (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                    _ => None,
                };
                rows.push(GainRow {
                    label: r.label(),
                    direction: dir,
                    metric,
                    gain,
                });
            }
        }
    }
    rows
}

/// Builds a pool with `workers` threads (0: all processors).
fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::config("run.workers", e.to_string()))
}

/// Runs every variant on every drop. Drops run in parallel; results keep
/// drop order, so the outcome does not depend on the worker count.
pub fn run_variants(cfg: &RunConfig, drops: &[Drop], variants: &[Variant]) -> Result<Vec<ModeResult>> {
    let per_drop: Vec<Result<Vec<DropResult>>> = pool(cfg.run.workers)?.install(|| {
        drops
            .par_iter()
            .map(|d| variants.iter().map(|&v| run_drop(cfg, d, v)).collect())
            .collect()
    });
    let mut results: Vec<ModeResult> = variants
        .iter()
        .map(|&v| ModeResult {
            variant: v,
            drops: Vec::new(),
        })
        .collect();
    for d in per_drop {
        for (slot, r) in results.iter_mut().zip(d?) {
            slot.drops.push(r);
        }
    }
    Ok(results)
}

/// Generates the configured number of drops.
pub fn make_drops(cfg: &RunConfig) -> Result<Vec<Drop>> {
    let idx: Vec<usize> = (0..cfg.run.n_drops).collect();
    let drops: Vec<Result<Drop>> = pool(cfg.run.workers)?.install(|| idx.par_iter().map(|&i| make_drop(cfg, i)).collect());
    drops.into_iter().collect()
}

/// Runs `variants` on shared drops and reports gains against the FDD variant
/// (or the first one if FDD is absent).
pub fn compare_modes(cfg: &RunConfig, drops: &[Drop], variants: &[Variant]) -> Result<Comparison> {
    if variants.is_empty() {
        return Err(SimError::config("run.modes", "nothing to compare"));
    }
    let results = run_variants(cfg, drops, variants)?;
    let ref_idx = results
        .iter()
        .position(|r| r.variant.mode == DuplexMode::Fdd)
        .unwrap_or(0);
    let gains = gains_against(&results, &results[ref_idx], cfg.traffic.model);
    for g in gains.iter().filter(|g| g.gain.is_none()) {
        log::warn!("gain of {} {} {} undefined", g.label, g.direction.name(), g.metric.name());
    }
    Ok(Comparison {
        traffic: cfg.traffic.model,
        reference: results[ref_idx].label(),
        results,
        gains,
    })
}

/// Variants of `cfg.run.modes`, full duplex with the configured scheduler.
pub fn configured_variants(cfg: &RunConfig) -> Vec<Variant> {
    cfg.run
        .modes
        .iter()
        .map(|&m| Variant::new(m, cfg.scheduler_for(m)))
        .collect()
}

/// One comparison per DL offered load (UL follows the configured ratio).
pub fn load_sweep(cfg: &RunConfig, drops: &[Drop], variants: &[Variant], dl_loads_bps: &[f64]) -> Result<Vec<(f64, Comparison)>> {
    let mut out = Vec::new();
    for &load in dl_loads_bps {
        let mut c = cfg.clone();
        c.traffic.model = TrafficModel::Ftp3;
        c.traffic.ftp = cfg.traffic.ftp.with_dl_load(load);
        out.push((load, compare_modes(&c, drops, variants)?));
    }
    Ok(out)
}

/// Interference-ratio CDFs pooled over the configured drops, with the
/// given nulling applied to BS-BS links and OLPC powers without boost.
pub fn interference_ratios(cfg: &RunConfig, nulling: NullingConfig) -> Result<InterferenceCdfs> {
    let mut c = cfg.clone();
    c.nulling = nulling;
    c.power.boost_db = 0.0;
    let grid = ResourceGrid::new(DuplexMode::FullDuplex, &c.grid);
    let bs_dbm = bs_rb_power(c.power.bs_power_dbm, grid.rbs_for(Direction::Dl));
    let mut bsbs = Vec::new();
    let mut ueue = Vec::new();
    let mut skipped = 0;
    for d in make_drops(&c)? {
        let olpc = olpc_powers(&d.layout, &d.gains, &c.power);
        let r = interference_ratio_cdfs(&d.layout, &d.gains, &olpc, bs_dbm);
        bsbs.extend_from_slice(r.bsbs_over_ul.values());
        ueue.extend_from_slice(r.ueue_over_dl.values());
        skipped += r.skipped;
    }
    Ok(InterferenceCdfs {
        bsbs_over_ul: Cdf::from_values(bsbs),
        ueue_over_dl: Cdf::from_values(ueue),
        skipped,
    })
}
