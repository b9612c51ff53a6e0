//! Transmit powers, resource grids and per-subband SINR.
//!
//! UE power follows fractional open-loop power control with an optional
//! boost on the base level. BS power is a fixed spectral density spread over
//! the downlink resource blocks of the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::propagation::{LinkGainMatrix, SelfInterferenceConfig};
use crate::stats::median;
use crate::topology::{Direction, NetworkLayout};
use crate::units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplexMode {
    /// 20 MHz shared by both directions.
    #[serde(alias = "fd")]
    FullDuplex,
    /// 10 MHz DL plus 10 MHz UL.
    Fdd,
    /// 20 MHz, each subband carries one direction per cell.
    #[serde(alias = "flexible")]
    FlexibleDuplex,
}

impl DuplexMode {
    pub const ALL: [DuplexMode; 3] = [DuplexMode::FullDuplex, DuplexMode::Fdd, DuplexMode::FlexibleDuplex];

    pub fn name(self) -> &'static str {
        match self {
            DuplexMode::FullDuplex => "fd",
            DuplexMode::Fdd => "fdd",
            DuplexMode::FlexibleDuplex => "flexible",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fd" | "full_duplex" => Some(DuplexMode::FullDuplex),
            "fdd" => Some(DuplexMode::Fdd),
            "flexible" | "flexible_duplex" | "flex" => Some(DuplexMode::FlexibleDuplex),
            _ => None,
        }
    }
}

impl std::fmt::Display for DuplexMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which directions a subband may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubbandUse {
    /// Both at once (full duplex).
    Both,
    DlOnly,
    UlOnly,
    /// One of the two, chosen per cell and TTI.
    Either,
}

impl SubbandUse {
    pub fn allows(self, dir: Direction) -> bool {
        match self {
            SubbandUse::Both | SubbandUse::Either => true,
            SubbandUse::DlOnly => dir == Direction::Dl,
            SubbandUse::UlOnly => dir == Direction::Ul,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Subband {
    pub first_rb: usize,
    pub n_rb: usize,
    pub usage: SubbandUse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Resource blocks in the full (20 MHz) carrier.
    pub total_rbs: usize,
    pub rbs_per_subband: usize,
    pub rb_bandwidth_hz: f64,
    pub tti_ms: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            total_rbs: 100,
            rbs_per_subband: 12,
            rb_bandwidth_hz: 180e3,
            tti_ms: 1.0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_rbs < 2 || self.total_rbs % 2 != 0 {
            return Err(SimError::config("grid.total_rbs", "must be even and at least 2"));
        }
        if self.rbs_per_subband == 0 || self.rbs_per_subband > self.total_rbs / 2 {
            return Err(SimError::config(
                "grid.rbs_per_subband",
                "must be positive and fit in half the carrier",
            ));
        }
        if !(self.rb_bandwidth_hz > 0.0 && self.tti_ms > 0.0) {
            return Err(SimError::config("grid.rb_bandwidth_hz", "bandwidth and TTI must be positive"));
        }
        Ok(())
    }
}

/// Splits `n_rb` into subbands of `per` RBs; the remainder joins the last one.
pub fn split_rbs(n_rb: usize, per: usize) -> Vec<usize> {
    let n = (n_rb / per).max(1);
    let mut sizes = vec![per.min(n_rb); n];
    let used: usize = sizes.iter().sum();
    *sizes.last_mut().unwrap() += n_rb - used;
    sizes
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceGrid {
    pub mode: DuplexMode,
    pub subbands: Vec<Subband>,
    pub rb_bandwidth_hz: f64,
    pub tti_ms: f64,
}

impl ResourceGrid {
    pub fn new(mode: DuplexMode, cfg: &GridConfig) -> Self {
        let mut subbands = Vec::new();
        let push = |sizes: Vec<usize>, usage: SubbandUse, subbands: &mut Vec<Subband>| {
            for n_rb in sizes {
                let first_rb = subbands.last().map_or(0, |s: &Subband| s.first_rb + s.n_rb);
                subbands.push(Subband { first_rb, n_rb, usage });
            }
        };
        match mode {
            DuplexMode::FullDuplex => push(split_rbs(cfg.total_rbs, cfg.rbs_per_subband), SubbandUse::Both, &mut subbands),
            DuplexMode::FlexibleDuplex => {
                push(split_rbs(cfg.total_rbs, cfg.rbs_per_subband), SubbandUse::Either, &mut subbands)
            }
            DuplexMode::Fdd => {
                let half = cfg.total_rbs / 2;
                push(split_rbs(half, cfg.rbs_per_subband), SubbandUse::DlOnly, &mut subbands);
                push(split_rbs(half, cfg.rbs_per_subband), SubbandUse::UlOnly, &mut subbands);
            }
        }
        ResourceGrid {
            mode,
            subbands,
            rb_bandwidth_hz: cfg.rb_bandwidth_hz,
            tti_ms: cfg.tti_ms,
        }
    }

    pub fn n_subbands(&self) -> usize {
        self.subbands.len()
    }

    /// RBs that may carry traffic in `dir`.
    pub fn rbs_for(&self, dir: Direction) -> usize {
        self.subbands.iter().filter(|s| s.usage.allows(dir)).map(|s| s.n_rb).sum()
    }

    /// Subbands usable in `dir`, in grid order.
    pub fn subbands_for(&self, dir: Direction) -> Vec<usize> {
        (0..self.subbands.len()).filter(|&s| self.subbands[s].usage.allows(dir)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub p_max_dbm: f64,
    pub p0_dbm: f64,
    pub alpha: f64,
    /// Added to `p0_dbm` for every UE.
    pub boost_db: f64,
    /// Replace `boost_db` by [`select_boost`] before a full-duplex or flexible run.
    pub auto_boost: bool,
    pub bs_power_dbm: f64,
    pub target_ul_sinr_db: f64,
    pub max_dl_degradation_db: f64,
    pub max_boost_db: f64,
    pub boost_step_db: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_max_dbm: 23.0,
            p0_dbm: -80.0,
            alpha: 0.8,
            boost_db: 0.0,
            auto_boost: false,
            bs_power_dbm: 24.0,
            target_ul_sinr_db: 5.0,
            max_dl_degradation_db: 3.0,
            max_boost_db: 40.0,
            boost_step_db: 0.5,
        }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SimError::config("power.alpha", format!("must be within [0, 1], got {}", self.alpha)));
        }
        for (key, v) in [
            ("power.p_max_dbm", self.p_max_dbm),
            ("power.p0_dbm", self.p0_dbm),
            ("power.boost_db", self.boost_db),
            ("power.bs_power_dbm", self.bs_power_dbm),
            ("power.target_ul_sinr_db", self.target_ul_sinr_db),
        ] {
            if !v.is_finite() {
                return Err(SimError::config(key, "must be finite"));
            }
        }
        if !(self.max_dl_degradation_db >= 0.0) {
            return Err(SimError::config("power.max_dl_degradation_db", "must be non-negative"));
        }
        if !(self.max_boost_db >= 0.0) {
            return Err(SimError::config("power.max_boost_db", "must be non-negative"));
        }
        if !(self.boost_step_db > 0.0) {
            return Err(SimError::config("power.boost_step_db", "must be positive"));
        }
        Ok(())
    }
}

/// Open-loop per-RB UE power: `min(p_max, p0 + boost + alpha * PL)`.
pub fn olpc_power(path_loss_db: f64, cfg: &PowerConfig) -> f64 {
    cfg.p_max_dbm.min(cfg.p0_dbm + cfg.boost_db + cfg.alpha * path_loss_db)
}

/// Per-RB power once `n_rb` RBs are scheduled: total power stays within `p_max`.
pub fn ue_rb_power(olpc_dbm: f64, n_rb: usize, p_max_dbm: f64) -> f64 {
    if n_rb == 0 {
        return olpc_dbm;
    }
    olpc_dbm.min(p_max_dbm - linear_to_db(n_rb as f64))
}

/// Per-RB OLPC power of every UE towards its serving cell.
pub fn olpc_powers(layout: &NetworkLayout, gains: &LinkGainMatrix, cfg: &PowerConfig) -> Vec<f64> {
    gains
        .serving_path_loss(layout)
        .into_iter()
        .map(|pl| olpc_power(pl, cfg))
        .collect()
}

/// BS per-RB power when the total power is spread over `dl_rbs`.
pub fn bs_rb_power(bs_power_dbm: f64, dl_rbs: usize) -> f64 {
    bs_power_dbm - linear_to_db(dl_rbs.max(1) as f64)
}

/// Link gains converted to linear scale once per drop.
#[derive(Clone, Debug)]
pub struct LinearGains {
    pub n_bs: usize,
    pub n_ue: usize,
    bs_ue: Vec<f64>,
    ue_ue: Vec<f64>,
    bs_bs: Vec<f64>,
}

impl LinearGains {
    pub fn new(g: &LinkGainMatrix) -> Self {
        let (n_bs, n_ue) = (g.n_bs(), g.n_ue());
        let mut bs_ue = Vec::with_capacity(n_bs * n_ue);
        for b in 0..n_bs {
            bs_ue.extend(g.bs_row(b).iter().map(|&x| db_to_linear(x)));
        }
        let mut ue_ue = Vec::with_capacity(n_ue * n_ue);
        for a in 0..n_ue {
            ue_ue.extend(g.ue_row(a).iter().map(|&x| db_to_linear(x)));
        }
        let mut bs_bs = Vec::with_capacity(n_bs * n_bs);
        for a in 0..n_bs {
            for b in 0..n_bs {
                bs_bs.push(db_to_linear(g.bs_bs(a, b)));
            }
        }
        LinearGains { n_bs, n_ue, bs_ue, ue_ue, bs_bs }
    }

    #[inline]
    pub fn bs_ue(&self, bs: usize, ue: usize) -> f64 {
        self.bs_ue[bs * self.n_ue + ue]
    }

    #[inline]
    pub fn ue_ue(&self, a: usize, b: usize) -> f64 {
        self.ue_ue[a * self.n_ue + b]
    }

    #[inline]
    pub fn bs_bs(&self, a: usize, b: usize) -> f64 {
        self.bs_bs[a * self.n_bs + b]
    }
}

/// What every cell transmits in one TTI.
///
/// Slots are indexed `cell * n_subbands + subband`. UL powers are per RB.
#[derive(Clone, Debug, PartialEq)]
pub struct TxPlan {
    pub n_cells: usize,
    pub n_subbands: usize,
    pub dl: Vec<Option<usize>>,
    pub ul: Vec<Option<usize>>,
    pub ul_power_dbm: Vec<f64>,
}

impl TxPlan {
    pub fn empty(n_cells: usize, n_subbands: usize) -> Self {
        let n = n_cells * n_subbands;
        TxPlan {
            n_cells,
            n_subbands,
            dl: vec![None; n],
            ul: vec![None; n],
            ul_power_dbm: vec![f64::NEG_INFINITY; n],
        }
    }

    #[inline]
    pub fn slot(&self, cell: usize, subband: usize) -> usize {
        cell * self.n_subbands + subband
    }

    /// Checks the plan against the grid's direction rules.
    pub fn check(&self, grid: &ResourceGrid) -> Result<()> {
        for c in 0..self.n_cells {
            for (s, sb) in grid.subbands.iter().enumerate() {
                let i = self.slot(c, s);
                let (dl, ul) = (self.dl[i].is_some(), self.ul[i].is_some());
                let ok = match sb.usage {
                    SubbandUse::Both => true,
                    SubbandUse::DlOnly => !ul,
                    SubbandUse::UlOnly => !dl,
                    SubbandUse::Either => !(dl && ul),
                };
                if !ok {
                    return Err(SimError::invariant(format!(
                        "cell {c} subband {s}: directions {dl}/{ul} violate {:?}",
                        sb.usage
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Received power terms at a DL UE on one subband, in mW per RB.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DlTerms {
    pub signal: f64,
    /// Other cells' DL transmissions.
    pub bs: f64,
    /// UL UEs of the serving cell.
    pub ue_own: f64,
    /// UL UEs of other cells.
    pub ue_other: f64,
    pub noise: f64,
}

impl DlTerms {
    pub fn sinr_db(&self) -> f64 {
        linear_to_db(self.signal / (self.bs + self.ue_own + self.ue_other + self.noise))
    }

    /// SINR without UE-UE interference from the serving cell.
    pub fn sinr_without_own_ue_db(&self) -> f64 {
        linear_to_db(self.signal / (self.bs + self.ue_other + self.noise))
    }
}

/// Interference terms at a BS receiver on one subband, in mW per RB.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UlTerms {
    /// UL UEs of other cells.
    pub ue: f64,
    /// Other cells' DL transmissions through nulled BS-BS gains.
    pub bs: f64,
    /// Residual echo of the BS's own DL transmission.
    pub self_echo: f64,
    pub noise: f64,
}

impl UlTerms {
    pub fn total(&self) -> f64 {
        self.ue + self.bs + self.self_echo + self.noise
    }
}

/// SINR of the scheduled transmissions of one TTI (`NaN` for empty slots).
#[derive(Clone, Debug, PartialEq)]
pub struct SinrResult {
    pub dl_db: Vec<f64>,
    pub ul_db: Vec<f64>,
}

/// Fixed radio parameters of a run, in linear units.
#[derive(Clone, Debug)]
pub struct RadioEnv {
    pub bs_power_dbm_per_rb: f64,
    bs_power_mw: f64,
    sic_lin: f64,
    ue_noise_mw: f64,
    bs_noise_mw: f64,
}

impl RadioEnv {
    pub fn new(bs_power_dbm_per_rb: f64, si: &SelfInterferenceConfig, gains: &LinkGainMatrix) -> Self {
        RadioEnv {
            bs_power_dbm_per_rb,
            bs_power_mw: dbm_to_mw(bs_power_dbm_per_rb),
            sic_lin: db_to_linear(-si.sic_db),
            ue_noise_mw: dbm_to_mw(gains.ue_noise_dbm_per_rb),
            bs_noise_mw: dbm_to_mw(gains.bs_noise_dbm_per_rb),
        }
    }

    pub fn bs_power_mw(&self) -> f64 {
        self.bs_power_mw
    }
}

/// Transmitters active on one subband.
#[derive(Clone, Debug, Default)]
pub struct SubbandActivity {
    /// Cells transmitting DL.
    pub dl_cells: Vec<usize>,
    /// `(ue, cell, power mW per RB)` of UL transmitters.
    pub ul_tx: Vec<(usize, usize, f64)>,
    dl_on: Vec<bool>,
}

impl SubbandActivity {
    pub fn from_plan(plan: &TxPlan, s: usize) -> Self {
        let mut a = SubbandActivity {
            dl_on: vec![false; plan.n_cells],
            ..Default::default()
        };
        for c in 0..plan.n_cells {
            let i = plan.slot(c, s);
            if plan.dl[i].is_some() {
                a.dl_cells.push(c);
                a.dl_on[c] = true;
            }
            if let Some(u) = plan.ul[i] {
                a.ul_tx.push((u, c, dbm_to_mw(plan.ul_power_dbm[i])));
            }
        }
        a
    }

    pub fn cell_has_dl(&self, cell: usize) -> bool {
        self.dl_on[cell]
    }

    /// Terms seen by UE `ue` of `cell` if its serving BS transmitted to it.
    pub fn dl_terms(&self, ue: usize, cell: usize, g: &LinearGains, env: &RadioEnv) -> DlTerms {
        let mut t = DlTerms {
            signal: env.bs_power_mw * g.bs_ue(cell, ue),
            noise: env.ue_noise_mw,
            ..Default::default()
        };
        let mut bs = 0.0;
        for &c in &self.dl_cells {
            if c != cell {
                bs += g.bs_ue(c, ue);
            }
        }
        t.bs = bs * env.bs_power_mw;
        for &(u, c, p) in &self.ul_tx {
            if u == ue {
                continue;
            }
            let x = p * g.ue_ue(u, ue);
            if c == cell {
                t.ue_own += x;
            } else {
                t.ue_other += x;
            }
        }
        t
    }

    /// Interference at the BS of `cell`, excluding UL UEs of that cell.
    pub fn ul_terms(&self, cell: usize, g: &LinearGains, env: &RadioEnv) -> UlTerms {
        let mut t = UlTerms {
            noise: env.bs_noise_mw,
            ..Default::default()
        };
        for &(u, c, p) in &self.ul_tx {
            if c != cell {
                t.ue += p * g.bs_ue(cell, u);
            }
        }
        let mut bs = 0.0;
        for &c in &self.dl_cells {
            if c != cell {
                bs += g.bs_bs(c, cell);
            }
        }
        t.bs = bs * env.bs_power_mw;
        if self.dl_on[cell] {
            t.self_echo = env.bs_power_mw * env.sic_lin;
        }
        t
    }
}

/// SINR of every scheduled transmission of the plan.
pub fn compute_sinr_all(plan: &TxPlan, g: &LinearGains, env: &RadioEnv) -> SinrResult {
    let n = plan.n_cells * plan.n_subbands;
    let mut out = SinrResult {
        dl_db: vec![f64::NAN; n],
        ul_db: vec![f64::NAN; n],
    };
    for s in 0..plan.n_subbands {
        let act = SubbandActivity::from_plan(plan, s);
        for c in 0..plan.n_cells {
            let i = plan.slot(c, s);
            if let Some(d) = plan.dl[i] {
                out.dl_db[i] = act.dl_terms(d, c, g, env).sinr_db();
            }
            if let Some(u) = plan.ul[i] {
                let t = act.ul_terms(c, g, env);
                let sig = dbm_to_mw(plan.ul_power_dbm[i]) * g.bs_ue(c, u);
                out.ul_db[i] = linear_to_db(sig / t.total());
            }
        }
    }
    out
}

/// SINR of the transmissions of one cell on one subband, evaluated
/// directly from dB gains. Slow; used to cross-check [`compute_sinr_all`].
///
/// Returns `(dl_sinr_db, ul_sinr_db)`.
pub fn compute_sinr(
    cell: usize,
    subband: usize,
    plan: &TxPlan,
    gains: &LinkGainMatrix,
    bs_power_dbm_per_rb: f64,
    si: &SelfInterferenceConfig,
) -> (Option<f64>, Option<f64>) {
    let i = plan.slot(cell, subband);
    let mut dl_sinr = None;
    let mut ul_sinr = None;
    if let Some(d) = plan.dl[i] {
        let mut interf = vec![gains.ue_noise_dbm_per_rb];
        for c in 0..plan.n_cells {
            let j = plan.slot(c, subband);
            if c != cell && plan.dl[j].is_some() {
                interf.push(bs_power_dbm_per_rb + gains.bs_ue(c, d));
            }
            if let Some(u) = plan.ul[j] {
                interf.push(plan.ul_power_dbm[j] + gains.ue_ue(u, d));
            }
        }
        let total: f64 = interf.iter().map(|&x| dbm_to_mw(x)).sum();
        dl_sinr = Some(bs_power_dbm_per_rb + gains.bs_ue(cell, d) - mw_to_dbm(total));
    }
    if let Some(u) = plan.ul[i] {
        let mut interf = vec![gains.bs_noise_dbm_per_rb];
        for c in 0..plan.n_cells {
            let j = plan.slot(c, subband);
            if c == cell {
                if plan.dl[j].is_some() {
                    interf.push(bs_power_dbm_per_rb - si.sic_db);
                }
                continue;
            }
            if plan.dl[j].is_some() {
                interf.push(bs_power_dbm_per_rb + gains.bs_bs(c, cell));
            }
            if let Some(v) = plan.ul[j] {
                interf.push(plan.ul_power_dbm[j] + gains.bs_ue(cell, v));
            }
        }
        let total: f64 = interf.iter().map(|&x| dbm_to_mw(x)).sum();
        ul_sinr = Some(plan.ul_power_dbm[i] + gains.bs_ue(cell, u) - mw_to_dbm(total));
    }
    (dl_sinr, ul_sinr)
}

/// Outcome of the boost search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostSelection {
    pub boost_db: f64,
    /// Largest boost allowed by the DL degradation limit.
    pub cap_db: f64,
    /// Whether the UL target is met at the returned boost.
    pub target_met: bool,
    pub median_ul_sinr_db: f64,
    pub median_dl_rise_db: f64,
}

/// Long-term statistics for one candidate boost.
fn boost_stats(
    layout: &NetworkLayout,
    g: &LinearGains,
    path_loss: &[f64],
    cfg: &PowerConfig,
    boost: f64,
    bs_power_mw: f64,
    self_echo_mw: f64,
    ue_noise_mw: f64,
    bs_noise_mw: f64,
) -> (f64, f64) {
    let trial = PowerConfig {
        boost_db: boost,
        ..cfg.clone()
    };
    let p: Vec<f64> = path_loss.iter().map(|&pl| dbm_to_mw(olpc_power(pl, &trial))).collect();
    let n_cells = layout.n_cells();

    let mut ul_sinr = Vec::new();
    for c in 0..n_cells {
        let mut interf = bs_noise_mw + self_echo_mw;
        for o in (0..n_cells).filter(|&o| o != c) {
            interf += bs_power_mw * g.bs_bs(o, c);
            let members = layout.ul_ues(o);
            if !members.is_empty() {
                let s: f64 = members.iter().map(|&u| p[u] * g.bs_ue(c, u)).sum();
                interf += s / members.len() as f64;
            }
        }
        for &u in layout.ul_ues(c) {
            ul_sinr.push(linear_to_db(p[u] * g.bs_ue(c, u) / interf));
        }
    }

    let mut rise = Vec::new();
    for ue in layout.ues.iter().filter(|u| u.direction == Direction::Dl) {
        let d = ue.id;
        let mut base = ue_noise_mw;
        let mut ueue = 0.0;
        for c in 0..n_cells {
            if c != ue.cell {
                base += bs_power_mw * g.bs_ue(c, d);
            }
            let members = layout.ul_ues(c);
            if !members.is_empty() {
                let s: f64 = members.iter().map(|&u| p[u] * g.ue_ue(u, d)).sum();
                ueue += s / members.len() as f64;
            }
        }
        rise.push(linear_to_db((base + ueue) / base));
    }
    (
        median(&ul_sinr).unwrap_or(f64::INFINITY),
        median(&rise).unwrap_or(0.0),
    )
}

/// Chooses the UL power boost from long-term statistics.
///
/// Every cell is assumed to transmit DL and one average UL UE on every RB.
/// The boost is the smallest multiple of the step whose median UL SINR
/// reaches the target, capped by the largest boost whose median DL
/// interference rise (UE-UE on top of DL interference plus noise) stays
/// within the limit. Returns 0 if even zero boost breaks the DL limit.
pub fn select_boost(
    layout: &NetworkLayout,
    gains: &LinkGainMatrix,
    cfg: &PowerConfig,
    bs_power_dbm_per_rb: f64,
    si: &SelfInterferenceConfig,
) -> BoostSelection {
    let g = LinearGains::new(gains);
    let pl = gains.serving_path_loss(layout);
    let bs_mw = dbm_to_mw(bs_power_dbm_per_rb);
    let echo = bs_mw * db_to_linear(-si.sic_db);
    let ue_n = dbm_to_mw(gains.ue_noise_dbm_per_rb);
    let bs_n = dbm_to_mw(gains.bs_noise_dbm_per_rb);
    let eval = |b: f64| boost_stats(layout, &g, &pl, cfg, b, bs_mw, echo, ue_n, bs_n);

    let steps = (cfg.max_boost_db / cfg.boost_step_db).floor() as usize;
    let boosts: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.boost_step_db).collect();

    let (ul0, rise0) = eval(0.0);
    if rise0 > cfg.max_dl_degradation_db {
        return BoostSelection {
            boost_db: 0.0,
            cap_db: 0.0,
            target_met: ul0 >= cfg.target_ul_sinr_db,
            median_ul_sinr_db: ul0,
            median_dl_rise_db: rise0,
        };
    }
    let mut last = BoostSelection {
        boost_db: 0.0,
        cap_db: 0.0,
        target_met: false,
        median_ul_sinr_db: ul0,
        median_dl_rise_db: rise0,
    };
    for &b in &boosts {
        let (ul, rise) = if b == 0.0 { (ul0, rise0) } else { eval(b) };
        if rise > cfg.max_dl_degradation_db {
            break;
        }
        last = BoostSelection {
            boost_db: b,
            cap_db: b,
            target_met: ul >= cfg.target_ul_sinr_db,
            median_ul_sinr_db: ul,
            median_dl_rise_db: rise,
        };
        if last.target_met {
            return last;
        }
    }
    log::warn!(
        "UL SINR target {} dB not reachable within the DL degradation limit; using boost {} dB",
        cfg.target_ul_sinr_db,
        last.boost_db
    );
    last
}
