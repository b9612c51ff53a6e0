//! Full-buffer and FTP model 3 traffic, per-UE FIFO queues and burst
//! bookkeeping for perceived throughput.

use std::collections::VecDeque;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::link::Segment;
use crate::rng::stream_rng;
use crate::stats::Cdf;
use crate::topology::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficModel {
    FullBuffer,
    #[serde(alias = "ftp3")]
    Ftp3,
}

impl TrafficModel {
    pub fn name(self) -> &'static str {
        match self {
            TrafficModel::FullBuffer => "full_buffer",
            TrafficModel::Ftp3 => "ftp3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full_buffer" | "fullbuffer" | "full" => Some(TrafficModel::FullBuffer),
            "ftp3" | "ftp_3" | "ftp" | "bursty" => Some(TrafficModel::Ftp3),
            _ => None,
        }
    }
}

/// FTP model 3 parameters. Loads are network-wide and split equally over
/// the UEs of each direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtpConfig {
    pub file_size_bits: u64,
    pub dl_offered_load_bps: f64,
    pub ul_offered_load_bps: f64,
}

impl Default for FtpConfig {
    fn default() -> Self {
        FtpConfig {
            file_size_bits: 800_000,
            dl_offered_load_bps: 24e6,
            ul_offered_load_bps: 12e6,
        }
    }
}

impl FtpConfig {
    /// Files per second per UE.
    pub fn lambda(&self, dir: Direction, n_ues_dir: usize) -> f64 {
        let load = match dir {
            Direction::Dl => self.dl_offered_load_bps,
            Direction::Ul => self.ul_offered_load_bps,
        };
        if n_ues_dir == 0 {
            return 0.0;
        }
        load / (self.file_size_bits as f64 * n_ues_dir as f64)
    }

    /// Same configuration with the DL load set and the UL load following the 2:1 ratio.
    pub fn with_dl_load(&self, dl_bps: f64) -> Self {
        let ratio = if self.dl_offered_load_bps > 0.0 {
            self.ul_offered_load_bps / self.dl_offered_load_bps
        } else {
            0.5
        };
        FtpConfig {
            dl_offered_load_bps: dl_bps,
            ul_offered_load_bps: dl_bps * ratio,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    pub model: TrafficModel,
    pub ftp: FtpConfig,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            model: TrafficModel::FullBuffer,
            ftp: FtpConfig::default(),
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ftp.file_size_bits == 0 {
            return Err(SimError::config("traffic.ftp.file_size_bits", "must be positive"));
        }
        for (k, v) in [
            ("traffic.ftp.dl_offered_load_bps", self.ftp.dl_offered_load_bps),
            ("traffic.ftp.ul_offered_load_bps", self.ftp.ul_offered_load_bps),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::config(k, "must be a non-negative number"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BurstRecord {
    pub ue: usize,
    pub direction: Direction,
    pub arrival_tti: u64,
    pub size_bits: u64,
    /// First TTI after the one in which the last bit was acknowledged.
    pub completion_tti: Option<u64>,
    /// Some bits were dropped by HARQ; the burst can never complete.
    pub lost: bool,
}

/// Poisson file arrivals for each `(ue, direction)` over `horizon_tti`,
/// sorted by arrival TTI then UE. Each UE draws from its own sub-stream of
/// `traffic_seed`.
pub fn generate_arrivals(cfg: &FtpConfig, ues: &[(usize, Direction)], horizon_tti: u64, tti_s: f64, traffic_seed: u64) -> Vec<BurstRecord> {
    let n_dl = ues.iter().filter(|(_, d)| *d == Direction::Dl).count();
    let n_ul = ues.len() - n_dl;
    let horizon_s = horizon_tti as f64 * tti_s;
    let mut out = Vec::new();
    for &(ue, dir) in ues {
        let n_dir = if dir == Direction::Dl { n_dl } else { n_ul };
        let lambda = cfg.lambda(dir, n_dir);
        if !(lambda > 0.0) {
            continue;
        }
        let exp = Exp::new(lambda).expect("positive rate");
        let mut rng = stream_rng(traffic_seed, ue as u64);
        let mut t = exp.sample(&mut rng);
        while t < horizon_s {
            out.push(BurstRecord {
                ue,
                direction: dir,
                arrival_tti: (t / tti_s) as u64,
                size_bits: cfg.file_size_bits,
                completion_tti: None,
                lost: false,
            });
            t += exp.sample(&mut rng);
        }
    }
    out.sort_by_key(|b| (b.arrival_tti, b.ue));
    out
}

/// Per-UE queues and bit accounting for one run.
#[derive(Clone, Debug)]
pub struct TrafficState {
    full_buffer: bool,
    pub bursts: Vec<BurstRecord>,
    next: usize,
    unsent: Vec<u64>,
    unacked: Vec<u64>,
    queues: Vec<VecDeque<usize>>,
    queued_bits: Vec<u64>,
    pub arrived_bits: u64,
    pub acked_bits: u64,
    pub dropped_bits: u64,
    pub in_flight_bits: u64,
}

impl TrafficState {
    /// Every UE is always backlogged.
    pub fn full_buffer(n_ue: usize) -> Self {
        TrafficState {
            full_buffer: true,
            bursts: Vec::new(),
            next: 0,
            unsent: Vec::new(),
            unacked: Vec::new(),
            queues: vec![VecDeque::new(); n_ue],
            queued_bits: vec![0; n_ue],
            arrived_bits: 0,
            acked_bits: 0,
            dropped_bits: 0,
            in_flight_bits: 0,
        }
    }

    /// Queues fed by `arrivals` (sorted by arrival TTI).
    pub fn bursty(n_ue: usize, arrivals: Vec<BurstRecord>) -> Self {
        let n = arrivals.len();
        let unsent = arrivals.iter().map(|b| b.size_bits).collect();
        TrafficState {
            full_buffer: false,
            bursts: arrivals,
            next: 0,
            unsent,
            unacked: vec![0; n],
            queues: vec![VecDeque::new(); n_ue],
            queued_bits: vec![0; n_ue],
            arrived_bits: 0,
            acked_bits: 0,
            dropped_bits: 0,
            in_flight_bits: 0,
        }
    }

    pub fn is_full_buffer(&self) -> bool {
        self.full_buffer
    }

    /// Moves bursts arriving at or before `tti` into their queues.
    pub fn admit(&mut self, tti: u64) {
        while self.next < self.bursts.len() && self.bursts[self.next].arrival_tti <= tti {
            let i = self.next;
            let b = &self.bursts[i];
            self.queues[b.ue].push_back(i);
            self.queued_bits[b.ue] += b.size_bits;
            self.unacked[i] = b.size_bits;
            self.arrived_bits += b.size_bits;
            self.next += 1;
        }
    }

    /// Bits waiting for a first transmission.
    pub fn backlog(&self, ue: usize) -> u64 {
        if self.full_buffer {
            u64::MAX
        } else {
            self.queued_bits[ue]
        }
    }

    /// Removes up to `bits` from the head of the queue, FIFO across bursts.
    pub fn take(&mut self, ue: usize, bits: u64) -> Vec<Segment> {
        if self.full_buffer {
            self.in_flight_bits += bits;
            return vec![Segment {
                burst: usize::MAX,
                bits,
            }];
        }
        let mut left = bits;
        let mut segs = Vec::new();
        while left > 0 {
            let Some(&i) = self.queues[ue].front() else {
                break;
            };
            let n = self.unsent[i].min(left);
            self.unsent[i] -= n;
            left -= n;
            segs.push(Segment { burst: i, bits: n });
            if self.unsent[i] == 0 {
                self.queues[ue].pop_front();
            }
        }
        let taken = bits - left;
        self.queued_bits[ue] -= taken;
        self.in_flight_bits += taken;
        segs
    }

    /// Acknowledges delivered segments at `tti`.
    pub fn ack(&mut self, segments: &[Segment], tti: u64) {
        for s in segments {
            self.in_flight_bits -= s.bits;
            self.acked_bits += s.bits;
            if s.burst == usize::MAX {
                continue;
            }
            self.unacked[s.burst] -= s.bits;
            let b = &mut self.bursts[s.burst];
            if self.unacked[s.burst] == 0 && !b.lost {
                b.completion_tti = Some(tti + 1);
            }
        }
    }

    /// Discards segments HARQ gave up on.
    pub fn drop_segments(&mut self, segments: &[Segment]) {
        for s in segments {
            self.in_flight_bits -= s.bits;
            self.dropped_bits += s.bits;
            if s.burst == usize::MAX {
                continue;
            }
            self.unacked[s.burst] -= s.bits;
            self.bursts[s.burst].lost = true;
        }
    }

    /// Bits still waiting for a first transmission, all UEs.
    pub fn queued_total(&self) -> u64 {
        self.queued_bits.iter().sum()
    }

    /// `arrived = acked + queued + in flight + dropped`.
    pub fn conserved(&self) -> bool {
        self.full_buffer
            || self.arrived_bits == self.acked_bits + self.queued_total() + self.in_flight_bits + self.dropped_bits
    }

    /// Bursts that arrived within the run but never completed.
    pub fn unfinished(&self) -> usize {
        self.bursts[..self.next]
            .iter()
            .filter(|b| b.completion_tti.is_none())
            .count()
    }
}

/// `size / ((completion - arrival) * tti)` of a completed burst, bits/s.
pub fn burst_throughput(b: &BurstRecord, tti_s: f64) -> Option<f64> {
    let done = b.completion_tti?;
    debug_assert!(done > b.arrival_tti);
    Some(b.size_bits as f64 / ((done - b.arrival_tti) as f64 * tti_s))
}

/// Perceived throughput of completed bursts.
#[derive(Clone, Debug, Default)]
pub struct PerceivedThroughput {
    /// One value per completed burst.
    pub per_burst: Cdf,
    /// Mean over each UE's completed bursts, one value per UE with any.
    pub per_ue: Cdf,
    pub unfinished: usize,
}

pub fn perceived_throughput<'a, I>(records: I, tti_s: f64) -> PerceivedThroughput
where
    I: IntoIterator<Item = &'a BurstRecord>,
{
    let mut per_burst = Vec::new();
    let mut by_ue: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    let mut unfinished = 0;
    for b in records {
        match burst_throughput(b, tti_s) {
            Some(t) => {
                per_burst.push(t);
                let e = by_ue.entry(b.ue).or_default();
                e.0 += t;
                e.1 += 1;
            }
            None => unfinished += 1,
        }
    }
    PerceivedThroughput {
        per_burst: Cdf::from_values(per_burst),
        per_ue: Cdf::from_values(by_ue.values().map(|(s, n)| s / *n as f64)),
        unfinished,
    }
}
