//! Link adaptation, BLER, transport-block sizes and HARQ.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::csi::CqiTable;
use crate::error::{Result, SimError};
use crate::topology::Direction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McsEntry {
    pub index: u8,
    pub spectral_efficiency: f64,
    pub sinr_50pct_bler_db: f64,
    pub bler_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// Logistic slope of every BLER curve, 1/dB.
    pub bler_slope: f64,
    /// Fraction of resources lost to control and reference signals.
    pub overhead_fraction: f64,
    pub harq_rtt_tti: u64,
    pub harq_max_tx: u8,
    pub harq_combining_gain_db: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            bler_slope: 2.0,
            overhead_fraction: 0.25,
            harq_rtt_tti: 8,
            harq_max_tx: 4,
            harq_combining_gain_db: 3.0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bler_slope > 0.0) {
            return Err(SimError::config("link.bler_slope", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.overhead_fraction) {
            return Err(SimError::config("link.overhead_fraction", "must be within [0, 1]"));
        }
        if self.harq_rtt_tti == 0 || self.harq_max_tx == 0 {
            return Err(SimError::config("link.harq_max_tx", "HARQ RTT and attempts must be positive"));
        }
        if !(self.harq_combining_gain_db >= 0.0) {
            return Err(SimError::config("link.harq_combining_gain_db", "must be non-negative"));
        }
        Ok(())
    }
}

/// MCS `m` uses the efficiency of CQI `m + 1`; its BLER is 10% at that
/// CQI's threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct McsTable {
    pub entries: Vec<McsEntry>,
    pub rb_bandwidth_hz: f64,
    pub tti_s: f64,
    pub overhead_fraction: f64,
}

impl McsTable {
    pub fn from_cqi(table: &CqiTable, cfg: &LinkConfig, rb_bandwidth_hz: f64, tti_ms: f64) -> Self {
        let shift = 9f64.ln() / cfg.bler_slope;
        let entries = table
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| McsEntry {
                index: i as u8,
                spectral_efficiency: e.spectral_efficiency,
                sinr_50pct_bler_db: e.min_sinr_db - shift,
                bler_slope: cfg.bler_slope,
            })
            .collect();
        McsTable {
            entries,
            rb_bandwidth_hz,
            tti_s: tti_ms * 1e-3,
            overhead_fraction: cfg.overhead_fraction,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SINR at which `mcs` has 10% BLER.
    pub fn sinr_10pct_db(&self, mcs: u8) -> f64 {
        let e = &self.entries[mcs as usize];
        e.sinr_50pct_bler_db + 9f64.ln() / e.bler_slope
    }

    /// MCS matching a reported CQI (CQI 0 falls back to MCS 0).
    pub fn mcs_for_cqi(&self, cqi: u8) -> u8 {
        cqi.saturating_sub(1).min(self.entries.len() as u8 - 1)
    }
}

/// `1 / (1 + exp(slope (sinr - sinr_50)))`.
pub fn bler(mcs: u8, sinr_db: f64, table: &McsTable) -> f64 {
    let e = &table.entries[mcs as usize];
    1.0 / (1.0 + (e.bler_slope * (sinr_db - e.sinr_50pct_bler_db)).exp())
}

/// Highest MCS whose BLER at `sinr_db` is at most 10%; 0 if none.
pub fn select_mcs(sinr_db: f64, table: &McsTable) -> u8 {
    let n = table.entries.partition_point(|e| e.sinr_50pct_bler_db + 9f64.ln() / e.bler_slope <= sinr_db);
    n.saturating_sub(1) as u8
}

/// `floor(SE * RB bandwidth * TTI * n_rb * (1 - overhead))`.
pub fn tb_size(mcs: u8, n_rb: usize, table: &McsTable) -> u64 {
    let e = &table.entries[mcs as usize];
    let bits = e.spectral_efficiency * table.rb_bandwidth_hz * table.tti_s * n_rb as f64 * (1.0 - table.overhead_fraction);
    bits.floor().max(0.0) as u64
}

/// Bits of one burst carried by a transport block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub burst: usize,
    pub bits: u64,
}

/// One transport block in flight.
#[derive(Clone, Debug, PartialEq)]
pub struct HarqProcess {
    pub ue: usize,
    pub cell: usize,
    pub direction: Direction,
    pub subband: usize,
    pub mcs: u8,
    pub tb_bits: u64,
    /// Payload actually carried (may be below `tb_bits` when the queue ran short).
    pub payload_bits: u64,
    pub segments: Vec<Segment>,
    /// Transmissions so far, including the pending one.
    pub attempts: u8,
    pub next_tx_tti: u64,
}

impl HarqProcess {
    /// Soft-combining gain for the current attempt.
    pub fn combining_gain_db(&self, cfg: &LinkConfig) -> f64 {
        cfg.harq_combining_gain_db * (self.attempts.saturating_sub(1)) as f64
    }
}

/// Result of decoding one transmission.
#[derive(Clone, Debug, PartialEq)]
pub enum HarqOutcome {
    Ack(HarqProcess),
    /// Failed; to be sent again at `next_tx_tti`.
    Retransmit(HarqProcess),
    /// Failed on the last allowed attempt.
    Dropped(HarqProcess),
}

/// Decodes one transmission of `process` at `sinr_db` and returns what happens next.
pub fn harq_step<R: Rng>(mut process: HarqProcess, sinr_db: f64, tti: u64, table: &McsTable, cfg: &LinkConfig, rng: &mut R) -> HarqOutcome {
    let p_err = bler(process.mcs, sinr_db + process.combining_gain_db(cfg), table);
    let u: f64 = rng.random();
    if u >= p_err {
        HarqOutcome::Ack(process)
    } else if process.attempts >= cfg.harq_max_tx {
        HarqOutcome::Dropped(process)
    } else {
        process.attempts += 1;
        process.next_tx_tti = tti + cfg.harq_rtt_tti;
        HarqOutcome::Retransmit(process)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table() -> McsTable {
        McsTable::from_cqi(&CqiTable::lte(), &LinkConfig::default(), 180e3, 1.0)
    }

    #[test]
    fn bler_midpoint_and_limits() {
        let t = table();
        for m in 0..15u8 {
            let e = t.entries[m as usize];
            assert!((bler(m, e.sinr_50pct_bler_db, &t) - 0.5).abs() < 1e-12);
            assert!((bler(m, t.sinr_10pct_db(m), &t) - 0.1).abs() < 1e-12);
            assert!(bler(m, 1e3, &t) < 1e-12);
        }
    }

    #[test]
    fn mcs_boundaries() {
        let t = table();
        assert_eq!(select_mcs(-20.0, &t), 0);
        let s = t.sinr_10pct_db(6);
        assert_eq!(select_mcs(s, &t), 6);
        assert_eq!(select_mcs(s - 1e-9, &t), 5);
    }

    #[test]
    fn tb_sizes() {
        let t = table();
        // 0.1523 * 180e3 * 1e-3 * 0.75 = 20.56 bits.
        assert_eq!(tb_size(0, 1, &t), 20);
        let none = McsTable {
            overhead_fraction: 1.0,
            ..t.clone()
        };
        assert_eq!(tb_size(14, 100, &none), 0);
        // 5.5547 * 180 * 0.75 * 12 = 8998.6
        assert_eq!(tb_size(14, 12, &t), 8998);
    }

    #[test]
    fn harq_drops_after_max_attempts() {
        let t = table();
        let cfg = LinkConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = HarqProcess {
            ue: 0,
            cell: 0,
            direction: Direction::Dl,
            subband: 0,
            mcs: 14,
            tb_bits: 100,
            payload_bits: 100,
            segments: vec![],
            attempts: 1,
            next_tx_tti: 0,
        };
        let mut tti = 0;
        loop {
            match harq_step(p, -100.0, tti, &t, &cfg, &mut rng) {
                HarqOutcome::Retransmit(q) => {
                    assert_eq!(q.next_tx_tti, tti + 8);
                    tti = q.next_tx_tti;
                    p = q;
                }
                HarqOutcome::Dropped(q) => {
                    assert_eq!(q.attempts, 4);
                    break;
                }
                HarqOutcome::Ack(_) => panic!("cannot decode at -100 dB"),
            }
        }
    }
}
