//! Per-cell proportional-fair schedulers.
//!
//! Each cell decides alone from its own feedback. Subbands are assigned one
//! after another; a UE can win several subbands until its backlog is covered.
//! Ties go to the lowest UE id, and to DL over UL.

use serde::{Deserialize, Serialize};

use crate::csi::CqiTable;
use crate::error::{Result, SimError};
use crate::link::{tb_size, McsTable};
use crate::radio::{Subband, SubbandUse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    /// Independent DL and UL PF.
    Basic,
    /// DL/UL pair maximizing the summed PF metric with pair feedback.
    Joint,
    /// One direction per subband, whichever has the larger PF metric.
    Flexible,
    /// Basic PF on fixed-direction subbands.
    Fdd,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Basic => "basic",
            SchedulerKind::Joint => "joint",
            SchedulerKind::Flexible => "flexible",
            SchedulerKind::Fdd => "fdd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "basic" => Some(SchedulerKind::Basic),
            "joint" => Some(SchedulerKind::Joint),
            "flexible" => Some(SchedulerKind::Flexible),
            "fdd" => Some(SchedulerKind::Fdd),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfConfig {
    pub time_constant_tti: f64,
    pub floor_bps: f64,
}

impl Default for PfConfig {
    fn default() -> Self {
        PfConfig {
            time_constant_tti: 100.0,
            floor_bps: 1000.0,
        }
    }
}

impl PfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_constant_tti >= 1.0) {
            return Err(SimError::config("pf.time_constant_tti", "must be at least 1"));
        }
        if !(self.floor_bps > 0.0) {
            return Err(SimError::config("pf.floor_bps", "must be positive"));
        }
        Ok(())
    }
}

/// Exponentially averaged served rate per UE.
#[derive(Clone, Debug, PartialEq)]
pub struct PfState {
    pub cfg: PfConfig,
    avg_bps: Vec<f64>,
}

impl PfState {
    pub fn new(n_ue: usize, cfg: PfConfig) -> Self {
        PfState {
            cfg,
            avg_bps: vec![cfg.floor_bps; n_ue],
        }
    }

    #[inline]
    pub fn avg(&self, ue: usize) -> f64 {
        self.avg_bps[ue]
    }

    pub fn averages(&self) -> &[f64] {
        &self.avg_bps
    }

    /// One TTI of averaging: `R <- (1 - 1/T) R + (1/T) served_rate`, floored.
    pub fn update(&mut self, served_bits: &[u64], tti_s: f64) {
        update_pf(self, served_bits, tti_s);
    }
}

/// See [`PfState::update`]; UEs not served decay with rate 0.
pub fn update_pf(state: &mut PfState, served_bits: &[u64], tti_s: f64) {
    let k = 1.0 / state.cfg.time_constant_tti;
    let floor = state.cfg.floor_bps;
    for (r, &bits) in state.avg_bps.iter_mut().zip(served_bits) {
        let rate = bits as f64 / tti_s;
        *r = ((1.0 - k) * *r + k * rate).max(floor);
    }
}

/// Estimated rate over `n_rb` RBs at `cqi`, bits/s.
#[inline]
pub fn estimated_rate(cqi: u8, n_rb: usize, table: &CqiTable, rb_bandwidth_hz: f64) -> f64 {
    table.efficiency(cqi) * n_rb as f64 * rb_bandwidth_hz
}

#[inline]
pub fn pf_metric(rate_bps: f64, avg_bps: f64) -> f64 {
    rate_bps / avg_bps
}

/// UEs bound to a subband by pending HARQ retransmissions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Reservation {
    pub dl: Option<usize>,
    pub ul: Option<usize>,
}

/// Chosen UEs of one subband (global UE ids).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubbandChoice {
    pub dl: Option<usize>,
    pub ul: Option<usize>,
}

/// One cell's view for one TTI. Candidate arrays list every UE of the
/// cell in ascending id order; per-subband arrays are `[i * n_subbands + s]`.
#[derive(Clone, Debug)]
pub struct CellRequest<'a> {
    pub subbands: &'a [Subband],
    pub dl_ues: &'a [usize],
    pub ul_ues: &'a [usize],
    /// DL CQI per candidate and subband. Joint scheduling expects the
    /// baseline (no intra-cell UE-UE) CQI; the others the aggregate CQI.
    pub dl_cqi: &'a [u8],
    pub ul_cqi: &'a [u8],
    pub dl_avg_bps: &'a [f64],
    pub ul_avg_bps: &'a [f64],
    /// Untransmitted bits; `u64::MAX` for full buffer.
    pub dl_backlog: &'a [u64],
    pub ul_backlog: &'a [u64],
    /// `[u * n_dl + d]`: CQI steps lost by DL candidate `d` next to UL
    /// candidate `u`; `None` forbids the pair. Only read by the joint scheduler.
    pub pair_degradation: Option<&'a [Option<u8>]>,
    pub reserved: &'a [Reservation],
    pub cqi_table: &'a CqiTable,
    pub mcs_table: &'a McsTable,
    pub rb_bandwidth_hz: f64,
}

impl CellRequest<'_> {
    pub fn n_subbands(&self) -> usize {
        self.subbands.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_subbands();
        let (nd, nu) = (self.dl_ues.len(), self.ul_ues.len());
        let ok = self.dl_cqi.len() == nd * n
            && self.ul_cqi.len() == nu * n
            && self.dl_avg_bps.len() == nd
            && self.ul_avg_bps.len() == nu
            && self.dl_backlog.len() == nd
            && self.ul_backlog.len() == nu
            && self.reserved.len() == n
            && self.pair_degradation.is_none_or(|p| p.len() == nd * nu);
        if ok {
            Ok(())
        } else {
            Err(SimError::invariant("cell request arrays have inconsistent lengths"))
        }
    }

    fn dl_metric(&self, d: usize, s: usize, cqi_loss: u8) -> f64 {
        let cqi = self.dl_cqi[d * self.n_subbands() + s].saturating_sub(cqi_loss);
        pf_metric(
            estimated_rate(cqi, self.subbands[s].n_rb, self.cqi_table, self.rb_bandwidth_hz),
            self.dl_avg_bps[d],
        )
    }

    fn ul_metric(&self, u: usize, s: usize) -> f64 {
        let cqi = self.ul_cqi[u * self.n_subbands() + s];
        pf_metric(
            estimated_rate(cqi, self.subbands[s].n_rb, self.cqi_table, self.rb_bandwidth_hz),
            self.ul_avg_bps[u],
        )
    }

    fn pair(&self, u: usize, d: usize) -> Option<u8> {
        match self.pair_degradation {
            Some(p) => p[u * self.dl_ues.len() + d],
            None => Some(0),
        }
    }

    fn tb_estimate(&self, cqi: u8, s: usize) -> u64 {
        tb_size(self.mcs_table.mcs_for_cqi(cqi), self.subbands[s].n_rb, self.mcs_table).max(1)
    }
}

/// Best eligible candidate of one direction: `(index, metric)`, lowest index on ties.
fn argmax<F: Fn(usize) -> f64>(eligible: &[bool], metric: F) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &ok) in eligible.iter().enumerate() {
        if !ok {
            continue;
        }
        let m = metric(i);
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    best
}

fn local(ues: &[usize], ue: usize) -> usize {
    ues.binary_search(&ue)
        .unwrap_or_else(|_| panic!("reserved UE {ue} is not served by this cell"))
}

#[derive(Clone, Copy)]
enum Rule {
    Basic,
    Joint,
    Flexible,
}

/// Local-index choice of one subband.
type Local = (Option<usize>, Option<usize>);

fn choose_basic(req: &CellRequest, s: usize, usage: SubbandUse, res: Reservation, dl_ok: &[bool], ul_ok: &[bool]) -> Local {
    let dl = if !usage.allows(crate::topology::Direction::Dl) {
        None
    } else if let Some(ue) = res.dl {
        Some(local(req.dl_ues, ue))
    } else {
        argmax(dl_ok, |d| req.dl_metric(d, s, 0)).map(|(d, _)| d)
    };
    let ul = if !usage.allows(crate::topology::Direction::Ul) {
        None
    } else if let Some(ue) = res.ul {
        Some(local(req.ul_ues, ue))
    } else {
        argmax(ul_ok, |u| req.ul_metric(u, s)).map(|(u, _)| u)
    };
    (dl, ul)
}

fn choose_flexible(req: &CellRequest, s: usize, res: Reservation, dl_ok: &[bool], ul_ok: &[bool]) -> Local {
    if let Some(ue) = res.dl {
        return (Some(local(req.dl_ues, ue)), None);
    }
    if let Some(ue) = res.ul {
        return (None, Some(local(req.ul_ues, ue)));
    }
    let dl = argmax(dl_ok, |d| req.dl_metric(d, s, 0));
    let ul = argmax(ul_ok, |u| req.ul_metric(u, s));
    match (dl, ul) {
        (Some((d, md)), Some((u, mu))) => {
            if md >= mu {
                (Some(d), None)
            } else {
                (None, Some(u))
            }
        }
        (Some((d, _)), None) => (Some(d), None),
        (None, Some((u, _))) => (None, Some(u)),
        (None, None) => (None, None),
    }
}

/// Exhaustive search over `(DL or none) x (UL or none)`.
fn choose_joint(req: &CellRequest, s: usize, res: Reservation, dl_ok: &[bool], ul_ok: &[bool]) -> Local {
    let dl_opts: Vec<Option<usize>> = match res.dl {
        Some(ue) => vec![Some(local(req.dl_ues, ue))],
        None => (0..req.dl_ues.len()).filter(|&d| dl_ok[d]).map(Some).chain([None]).collect(),
    };
    let ul_opts: Vec<Option<usize>> = match res.ul {
        Some(ue) => vec![Some(local(req.ul_ues, ue))],
        None => (0..req.ul_ues.len()).filter(|&u| ul_ok[u]).map(Some).chain([None]).collect(),
    };
    let ul_metric: Vec<f64> = ul_opts
        .iter()
        .map(|o| o.map_or(0.0, |u| req.ul_metric(u, s)))
        .collect();
    let mut best: Option<(Local, f64)> = None;
    for &d in &dl_opts {
        for (k, &u) in ul_opts.iter().enumerate() {
            let dl_term = match (d, u) {
                (None, _) => 0.0,
                (Some(d), None) => req.dl_metric(d, s, 0),
                (Some(d), Some(u)) => match req.pair(u, d) {
                    Some(loss) => req.dl_metric(d, s, loss),
                    None => continue,
                },
            };
            let v = dl_term + ul_metric[k];
            if best.is_none_or(|(_, b)| v > b) {
                best = Some(((d, u), v));
            }
        }
    }
    // Reservations on both sides of a forbidden pair still have to be honoured.
    best.map_or((dl_opts[0], ul_opts[0]), |(c, _)| c)
}

fn run(req: &CellRequest, rule: Rule) -> Vec<SubbandChoice> {
    let n = req.n_subbands();
    let mut dl_left: Vec<u64> = req.dl_backlog.to_vec();
    let mut ul_left: Vec<u64> = req.ul_backlog.to_vec();
    let mut out = Vec::with_capacity(n);
    for (s, sb) in req.subbands.iter().enumerate() {
        let dl_ok: Vec<bool> = dl_left.iter().map(|&b| b > 0).collect();
        let ul_ok: Vec<bool> = ul_left.iter().map(|&b| b > 0).collect();
        let res = req.reserved[s];
        let (d, u) = match (sb.usage, rule) {
            (SubbandUse::DlOnly | SubbandUse::UlOnly, _) | (SubbandUse::Both, Rule::Basic) => {
                choose_basic(req, s, sb.usage, res, &dl_ok, &ul_ok)
            }
            (SubbandUse::Both, Rule::Joint) => choose_joint(req, s, res, &dl_ok, &ul_ok),
            (SubbandUse::Either, _) | (SubbandUse::Both, Rule::Flexible) => {
                choose_flexible(req, s, res, &dl_ok, &ul_ok)
            }
        };
        // Retransmissions carry old data; only new transmissions consume backlog.
        if let (Some(d), None) = (d, res.dl) {
            let cqi = req.dl_cqi[d * n + s];
            dl_left[d] = dl_left[d].saturating_sub(req.tb_estimate(cqi, s));
        }
        if let (Some(u), None) = (u, res.ul) {
            let cqi = req.ul_cqi[u * n + s];
            ul_left[u] = ul_left[u].saturating_sub(req.tb_estimate(cqi, s));
        }
        out.push(SubbandChoice {
            dl: d.map(|i| req.dl_ues[i]),
            ul: u.map(|i| req.ul_ues[i]),
        });
    }
    out
}

/// Independent DL and UL PF on every subband the grid allows.
pub fn schedule_basic(req: &CellRequest) -> Vec<SubbandChoice> {
    run(req, Rule::Basic)
}

/// Pair-aware PF on full-duplex subbands; basic elsewhere.
pub fn schedule_joint(req: &CellRequest) -> Vec<SubbandChoice> {
    run(req, Rule::Joint)
}

/// One direction per subband.
pub fn schedule_flexible(req: &CellRequest) -> Vec<SubbandChoice> {
    run(req, Rule::Flexible)
}

pub fn schedule(kind: SchedulerKind, req: &CellRequest) -> Vec<SubbandChoice> {
    match kind {
        SchedulerKind::Basic | SchedulerKind::Fdd => schedule_basic(req),
        SchedulerKind::Joint => schedule_joint(req),
        SchedulerKind::Flexible => schedule_flexible(req),
    }
}
