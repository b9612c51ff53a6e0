//! Channel quality feedback: SINR to CQI mapping, delayed sub-band reports
//! and pair-wise UE-UE degradation reports.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::units::{db_to_linear, linear_to_db};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqiEntry {
    pub min_sinr_db: f64,
    pub spectral_efficiency: f64,
    pub modulation_order: u8,
}

/// CQI indices 1..=15; index 0 means out of range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqiTable {
    pub entries: Vec<CqiEntry>,
}

const LTE_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234,
    5.1152, 5.5547,
];
const LTE_THRESHOLD_DB: [f64; 15] = [
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
];

impl CqiTable {
    /// The 15-entry LTE table (QPSK, 16QAM, 64QAM) with 10%-BLER SINR thresholds.
    pub fn lte() -> Self {
        let entries = (0..15)
            .map(|i| CqiEntry {
                min_sinr_db: LTE_THRESHOLD_DB[i],
                spectral_efficiency: LTE_EFFICIENCY[i],
                modulation_order: match i {
                    0..=5 => 2,
                    6..=8 => 4,
                    _ => 6,
                },
            })
            .collect();
        CqiTable { entries }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() || self.entries.len() > 255 {
            return Err(SimError::config("csi.cqi_table.entries", "needs 1..=255 entries"));
        }
        for w in self.entries.windows(2) {
            if !(w[1].min_sinr_db > w[0].min_sinr_db) {
                return Err(SimError::config(
                    "csi.cqi_table.entries",
                    "SINR thresholds must be strictly increasing",
                ));
            }
            if !(w[1].spectral_efficiency > w[0].spectral_efficiency) {
                return Err(SimError::config(
                    "csi.cqi_table.entries",
                    "spectral efficiencies must be strictly increasing",
                ));
            }
        }
        if !(self.entries[0].spectral_efficiency > 0.0) {
            return Err(SimError::config("csi.cqi_table.entries", "efficiencies must be positive"));
        }
        Ok(())
    }

    /// Highest CQI index.
    pub fn max_cqi(&self) -> u8 {
        self.entries.len() as u8
    }

    /// Bits/s/Hz of `cqi`; zero for index 0.
    #[inline]
    pub fn efficiency(&self, cqi: u8) -> f64 {
        if cqi == 0 {
            0.0
        } else {
            self.entries[cqi as usize - 1].spectral_efficiency
        }
    }

    /// Lowest SINR that reports `cqi` (`-inf` for 0).
    pub fn threshold_db(&self, cqi: u8) -> f64 {
        if cqi == 0 {
            f64::NEG_INFINITY
        } else {
            self.entries[cqi as usize - 1].min_sinr_db
        }
    }
}

/// Largest CQI whose threshold is at or below `sinr_db`; 0 below all of them.
pub fn sinr_to_cqi(sinr_db: f64, table: &CqiTable) -> u8 {
    // Thresholds are increasing: count how many are <= sinr.
    table.entries.partition_point(|e| e.min_sinr_db <= sinr_db) as u8
}

/// SINR representing a reported CQI (its threshold).
pub fn cqi_to_sinr(cqi: u8, table: &CqiTable) -> f64 {
    table.threshold_db(cqi)
}

/// Values pushed at TTI `t` become visible at `t + delay`.
#[derive(Clone, Debug)]
pub struct DelayLine<T> {
    delay: u64,
    queue: VecDeque<(u64, T)>,
    current: Option<(u64, T)>,
}

impl<T> DelayLine<T> {
    pub fn new(delay_tti: u64) -> Self {
        DelayLine {
            delay: delay_tti,
            queue: VecDeque::new(),
            current: None,
        }
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    /// Records the measurement taken at `tti`. Stamps must increase.
    pub fn push(&mut self, tti: u64, value: T) {
        debug_assert!(self.queue.back().is_none_or(|(t, _)| *t < tti));
        self.queue.push_back((tti, value));
    }

    /// Latest measurement taken at or before `tti - delay`.
    pub fn report(&mut self, tti: u64) -> Option<&T> {
        while let Some((t, _)) = self.queue.front() {
            if *t + self.delay <= tti {
                self.current = self.queue.pop_front();
            } else {
                break;
            }
        }
        self.current.as_ref().map(|(_, v)| v)
    }

    /// Stamp of the value [`report`](Self::report) last returned.
    pub fn reported_stamp(&self) -> Option<u64> {
        self.current.as_ref().map(|(t, _)| *t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// One bit per pair: may the two share a subband.
    OneBit,
    /// `pair_bits`-bit CQI degradation per pair.
    MultiBit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    pub delay_tti: u64,
    /// CQI assumed before the first report arrives.
    pub default_cqi: u8,
    pub pair_mode: PairMode,
    pub pair_bits: u8,
    /// One-bit mode: a pair is allowed iff its degradation is at most this many CQI steps.
    pub one_bit_threshold: u8,
    pub pair_update_period_tti: u64,
    /// CQI sub-band size used by the baseline overhead budget.
    pub cqi_subband_rbs: usize,
    pub cqi_bits: u32,
    pub cqi_table: CqiTable,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            delay_tti: 6,
            default_cqi: 1,
            pair_mode: PairMode::MultiBit,
            pair_bits: 4,
            one_bit_threshold: 1,
            pair_update_period_tti: 50,
            cqi_subband_rbs: 8,
            cqi_bits: 4,
            cqi_table: CqiTable::lte(),
        }
    }
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<()> {
        self.cqi_table.validate()?;
        if self.default_cqi > self.cqi_table.max_cqi() {
            return Err(SimError::config("feedback.default_cqi", "exceeds the CQI table"));
        }
        if !(1..=8).contains(&self.pair_bits) {
            return Err(SimError::config("feedback.pair_bits", "must be within 1..=8"));
        }
        if self.pair_update_period_tti == 0 {
            return Err(SimError::config("feedback.pair_update_period_tti", "must be positive"));
        }
        if self.cqi_subband_rbs == 0 || self.cqi_bits == 0 {
            return Err(SimError::config("feedback.cqi_subband_rbs", "CQI budget must be positive"));
        }
        Ok(())
    }

    /// Effective quantizer; a one-bit multi-bit report uses threshold semantics.
    pub fn quantizer(&self) -> PairQuantizer {
        match (self.pair_mode, self.pair_bits) {
            (PairMode::OneBit, _) | (PairMode::MultiBit, 1) => PairQuantizer::OneBit {
                threshold: self.one_bit_threshold,
            },
            (PairMode::MultiBit, k) => PairQuantizer::MultiBit { bits: k },
        }
    }

    pub fn report_bits(&self) -> u32 {
        match self.quantizer() {
            PairQuantizer::OneBit { .. } => 1,
            PairQuantizer::MultiBit { bits } => bits as u32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairQuantizer {
    OneBit { threshold: u8 },
    MultiBit { bits: u8 },
}

impl PairQuantizer {
    /// Stored report for a degradation of `steps` CQI steps. One-bit reports
    /// are 1 (schedulable) or 0; multi-bit reports are the clamped degradation.
    pub fn quantize(self, steps: u8) -> u8 {
        match self {
            PairQuantizer::OneBit { threshold } => u8::from(steps <= threshold),
            PairQuantizer::MultiBit { bits } => steps.min(((1u16 << bits) - 1) as u8),
        }
    }

    /// Degradation in CQI steps represented by a report, `None` if the pair is forbidden.
    pub fn dequantize(self, report: u8) -> Option<u8> {
        match self {
            PairQuantizer::OneBit { .. } => (report == 1).then_some(0),
            PairQuantizer::MultiBit { .. } => Some(report),
        }
    }
}

/// Wide-band DL reception of a UE without UE-UE interference from its own cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WidebandBaseline {
    pub sinr_db: f64,
    /// Interference plus noise, dBm per RB.
    pub interference_dbm: f64,
}

/// Intra-cell pair measurements of one cell: entry `[u][d]` is the power
/// (dBm per RB) of UL UE `ul[u]` received at DL UE `dl[d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMeasurement {
    pub ul: Vec<usize>,
    pub dl: Vec<usize>,
    pub dbm: Vec<f64>,
}

impl PairMeasurement {
    pub fn get(&self, u: usize, d: usize) -> f64 {
        self.dbm[u * self.dl.len() + d]
    }
}

/// Floor for pair measurements of silent UEs.
pub const PAIR_FLOOR_DBM: f64 = -200.0;

/// `(u, d) -> P_olpc(u) + gain(u -> d)`, for every UL/DL UE pair of the cell.
///
/// `ue_ue_gain(u, d)` is the UE-UE gain in dB; `ul_power_dbm[u]` indexes by global UE id.
pub fn measure_pair_interference<F>(ul: &[usize], dl: &[usize], ul_power_dbm: &[f64], ue_ue_gain: F) -> PairMeasurement
where
    F: Fn(usize, usize) -> f64,
{
    let mut dbm = Vec::with_capacity(ul.len() * dl.len());
    for &u in ul {
        for &d in dl {
            let v = ul_power_dbm[u] + ue_ue_gain(u, d);
            dbm.push(if v.is_finite() { v.max(PAIR_FLOOR_DBM) } else { PAIR_FLOOR_DBM });
        }
    }
    PairMeasurement {
        ul: ul.to_vec(),
        dl: dl.to_vec(),
        dbm,
    }
}

/// CQI steps lost when `pair_dbm` adds to the baseline interference.
pub fn pair_degradation(baseline: &WidebandBaseline, pair_dbm: f64, table: &CqiTable) -> u8 {
    let rise = linear_to_db(1.0 + db_to_linear(pair_dbm - baseline.interference_dbm));
    let before = sinr_to_cqi(baseline.sinr_db, table);
    let after = sinr_to_cqi(baseline.sinr_db - rise, table);
    before - after
}

/// Quantized pair reports of one cell: `[u][d]` as in [`PairMeasurement`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairFeedback {
    pub quantizer: PairQuantizer,
    pub n_ul: usize,
    pub n_dl: usize,
    pub reports: Vec<u8>,
    /// TTI of the measurement the reports were built from.
    pub updated_tti: u64,
}

impl PairFeedback {
    /// Reports assuming no degradation (before any measurement).
    pub fn neutral(quantizer: PairQuantizer, n_ul: usize, n_dl: usize) -> Self {
        PairFeedback {
            quantizer,
            n_ul,
            n_dl,
            reports: vec![quantizer.quantize(0); n_ul * n_dl],
            updated_tti: 0,
        }
    }

    #[inline]
    pub fn report(&self, u: usize, d: usize) -> u8 {
        self.reports[u * self.n_dl + d]
    }

    /// Degradation (CQI steps) of DL UE `d` when paired with UL UE `u`; `None` if forbidden.
    #[inline]
    pub fn degradation(&self, u: usize, d: usize) -> Option<u8> {
        self.quantizer.dequantize(self.report(u, d))
    }
}

/// Builds pair reports from measurements and the wide-band baselines of the
/// cell's DL UEs (`baselines[d]` matches `measurements.dl[d]`; `None` means
/// no report yet, treated as no degradation).
pub fn quantize_pair_feedback(
    measurements: &PairMeasurement,
    baselines: &[Option<WidebandBaseline>],
    quantizer: PairQuantizer,
    table: &CqiTable,
    tti: u64,
) -> PairFeedback {
    let n_ul = measurements.ul.len();
    let n_dl = measurements.dl.len();
    let mut reports = Vec::with_capacity(n_ul * n_dl);
    for u in 0..n_ul {
        for d in 0..n_dl {
            let steps = match &baselines[d] {
                Some(b) => pair_degradation(b, measurements.get(u, d), table),
                None => 0,
            };
            reports.push(quantizer.quantize(steps));
        }
    }
    PairFeedback {
        quantizer,
        n_ul,
        n_dl,
        reports,
        updated_tti: tti,
    }
}

/// Extra pair-feedback bits relative to the sub-band CQI budget.
///
/// Pair bits per TTI: `n_ul * n_dl * bits / period`. Baseline per TTI: every
/// DL UE reports one `cqi_bits` CQI per CQI sub-band of the carrier.
pub fn feedback_overhead(n_ul: usize, n_dl: usize, bits: u32, period_tti: u64, total_rbs: usize, cfg: &FeedbackConfig) -> f64 {
    let pair = (n_ul * n_dl) as f64 * bits as f64 / period_tti as f64;
    let cqi_subbands = total_rbs.div_ceil(cfg.cqi_subband_rbs);
    let baseline = (n_dl * cqi_subbands) as f64 * cfg.cqi_bits as f64;
    pair / baseline
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cqi_boundaries() {
        let t = CqiTable::lte();
        assert!(t.validate().is_ok());
        assert_eq!(sinr_to_cqi(-30.0, &t), 0);
        assert_eq!(sinr_to_cqi(t.threshold_db(7), &t), 7);
        assert_eq!(sinr_to_cqi(t.threshold_db(7) - 1e-9, &t), 6);
        assert_eq!(sinr_to_cqi(40.0, &t), 15);
    }

    #[test]
    fn quantization_is_idempotent() {
        let t = CqiTable::lte();
        for c in 0..=15u8 {
            assert_eq!(sinr_to_cqi(cqi_to_sinr(c, &t), &t), c);
        }
        let q = PairQuantizer::MultiBit { bits: 4 };
        for s in 0..=20u8 {
            let r = q.quantize(s);
            assert!(r <= 15);
            assert_eq!(q.quantize(q.dequantize(r).unwrap()), r);
        }
    }

    #[test]
    fn delay_line_lags() {
        let mut d = DelayLine::new(6);
        for t in 0..20u64 {
            d.push(t, t);
            let seen = d.report(t).copied();
            if t >= 6 {
                assert_eq!(seen, Some(t - 6));
            } else {
                assert_eq!(seen, None);
            }
        }
        let mut z = DelayLine::new(0);
        z.push(3, 'a');
        assert_eq!(z.report(3), Some(&'a'));
    }

    #[test]
    fn zero_interference_means_no_degradation() {
        let t = CqiTable::lte();
        let b = WidebandBaseline {
            sinr_db: 12.0,
            interference_dbm: -90.0,
        };
        assert_eq!(pair_degradation(&b, PAIR_FLOOR_DBM, &t), 0);
        assert_eq!(PairQuantizer::OneBit { threshold: 1 }.quantize(0), 1);
        // Equal-power interferer: 3 dB rise, 12 -> 9 dB, CQI 10 -> 8.
        assert_eq!(pair_degradation(&b, -90.0, &t), 2);
    }

    #[test]
    fn multibit_one_matches_onebit() {
        let a = FeedbackConfig {
            pair_mode: PairMode::OneBit,
            ..Default::default()
        };
        let b = FeedbackConfig {
            pair_mode: PairMode::MultiBit,
            pair_bits: 1,
            ..Default::default()
        };
        assert_eq!(a.quantizer(), b.quantizer());
    }

    #[test]
    fn overhead_below_two_percent() {
        let cfg = FeedbackConfig::default();
        let o = feedback_overhead(10, 10, 4, 50, 100, &cfg);
        // 400 / 50 = 8 bits per TTI against 10 UEs x 13 sub-bands x 4 bits = 520.
        assert!((o - 8.0 / 520.0).abs() < 1e-12);
        assert!(o < 0.02);
    }
}
