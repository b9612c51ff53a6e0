//! Static link gains: path loss with LoS/NLoS branches, log-normal
//! shadowing, antenna gains, wall penetration and BS elevation nulling.
//!
//! Each link class (BS-UE, UE-UE, BS-BS) has its own log-distance model.
//! The LoS state and the shadowing of a link are drawn from a generator
//! keyed on the unordered pair of endpoint keys, so a link's gain does not
//! depend on node indices or evaluation order, and UE-UE / BS-BS gains are
//! reciprocal by construction.

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::{derive_seed, link_rng, stream};
use crate::stats::Cdf;
use crate::topology::{planar_distance, Direction, NetworkLayout, Node, WrapConfig};
use crate::units::{dbm_to_mw, linear_to_db, noise_power_dbm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosProbability {
    AlwaysLos,
    NeverLos,
    /// Indoor hotspot: LoS up to 18 m, exponential decay to a 0.5 floor at 37 m.
    IndoorHotspot,
    /// Urban micro: `min(18/d, 1) (1 - exp(-d/36)) + exp(-d/36)`.
    UrbanMicro,
}

impl LosProbability {
    pub fn probability(self, d2d_m: f64) -> f64 {
        match self {
            LosProbability::AlwaysLos => 1.0,
            LosProbability::NeverLos => 0.0,
            LosProbability::IndoorHotspot => {
                if d2d_m <= 18.0 {
                    1.0
                } else if d2d_m < 37.0 {
                    (-(d2d_m - 18.0) / 27.0).exp()
                } else {
                    0.5
                }
            }
            LosProbability::UrbanMicro => {
                let e = (-d2d_m / 36.0).exp();
                (18.0 / d2d_m).min(1.0) * (1.0 - e) + e
            }
        }
    }
}

/// `intercept_db + 10 * exponent * log10(d)` with log-normal shadowing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogDistance {
    pub intercept_db: f64,
    pub exponent: f64,
    pub shadowing_sigma_db: f64,
}

impl LogDistance {
    pub fn loss_db(&self, distance_m: f64) -> f64 {
        self.intercept_db + 10.0 * self.exponent * distance_m.log10()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    pub los: LogDistance,
    pub nlos: LogDistance,
    pub los_probability: LosProbability,
    /// 3-D distances below this are clamped.
    pub min_distance_m: f64,
}

impl PathLossModel {
    // 3.5 GHz carrier: 20 log10(3.5) = 10.88 dB, 26 log10(3.5) = 14.15 dB.

    /// Indoor hotspot (InH) model at 3.5 GHz.
    pub fn indoor_hotspot() -> Self {
        PathLossModel {
            los: LogDistance {
                intercept_db: 43.68,
                exponent: 1.69,
                shadowing_sigma_db: 3.0,
            },
            nlos: LogDistance {
                intercept_db: 22.38,
                exponent: 4.33,
                shadowing_sigma_db: 4.0,
            },
            los_probability: LosProbability::IndoorHotspot,
            min_distance_m: 3.0,
        }
    }

    /// Urban micro (UMi) model at 3.5 GHz.
    pub fn urban_micro() -> Self {
        PathLossModel {
            los: LogDistance {
                intercept_db: 37.88,
                exponent: 2.27,
                shadowing_sigma_db: 3.0,
            },
            nlos: LogDistance {
                intercept_db: 36.85,
                exponent: 3.67,
                shadowing_sigma_db: 4.0,
            },
            los_probability: LosProbability::UrbanMicro,
            min_distance_m: 10.0,
        }
    }

    /// Free-space-like LoS link between elevated small cells at 3.5 GHz.
    pub fn bs_to_bs_los() -> Self {
        let fs = LogDistance {
            intercept_db: 43.33,
            exponent: 2.0,
            shadowing_sigma_db: 3.0,
        };
        PathLossModel {
            los: fs,
            nlos: fs,
            los_probability: LosProbability::AlwaysLos,
            min_distance_m: 1.0,
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        for (branch, m) in [("los", &self.los), ("nlos", &self.nlos)] {
            if !(m.intercept_db.is_finite() && m.exponent.is_finite() && m.exponent > 0.0) {
                return Err(SimError::config(
                    format!("{key}.{branch}"),
                    "intercept must be finite and exponent positive",
                ));
            }
            if !(m.shadowing_sigma_db >= 0.0 && m.shadowing_sigma_db.is_finite()) {
                return Err(SimError::config(
                    format!("{key}.{branch}.shadowing_sigma_db"),
                    "must be a non-negative number",
                ));
            }
        }
        if !(self.min_distance_m > 0.0) {
            return Err(SimError::config(format!("{key}.min_distance_m"), "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkClass {
    BsUe,
    UeUe,
    BsBs,
}

impl LinkClass {
    fn tag(self) -> u64 {
        match self {
            LinkClass::BsUe => 11,
            LinkClass::UeUe => 12,
            LinkClass::BsBs => 13,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    pub bs_ue: PathLossModel,
    pub ue_ue: PathLossModel,
    pub bs_bs: PathLossModel,
    pub bs_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    /// Extra loss for links whose endpoints are in different buildings.
    pub wall_loss_db: f64,
    pub bs_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    pub rb_bandwidth_hz: f64,
}

impl PropagationConfig {
    pub fn indoor() -> Self {
        PropagationConfig {
            bs_ue: PathLossModel::indoor_hotspot(),
            ue_ue: PathLossModel {
                min_distance_m: 1.0,
                ..PathLossModel::indoor_hotspot()
            },
            bs_bs: PathLossModel {
                nlos: PathLossModel::indoor_hotspot().los,
                los_probability: LosProbability::AlwaysLos,
                min_distance_m: 1.0,
                ..PathLossModel::indoor_hotspot()
            },
            bs_antenna_gain_dbi: 5.0,
            ue_antenna_gain_dbi: 0.0,
            wall_loss_db: 40.0,
            bs_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
            rb_bandwidth_hz: 180e3,
        }
    }

    pub fn outdoor() -> Self {
        PropagationConfig {
            bs_ue: PathLossModel::urban_micro(),
            ue_ue: PathLossModel {
                min_distance_m: 1.0,
                ..PathLossModel::urban_micro()
            },
            bs_bs: PathLossModel::bs_to_bs_los(),
            bs_antenna_gain_dbi: 5.0,
            ue_antenna_gain_dbi: 0.0,
            wall_loss_db: 0.0,
            bs_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
            rb_bandwidth_hz: 180e3,
        }
    }

    pub fn model(&self, class: LinkClass) -> &PathLossModel {
        match class {
            LinkClass::BsUe => &self.bs_ue,
            LinkClass::UeUe => &self.ue_ue,
            LinkClass::BsBs => &self.bs_bs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bs_ue.validate("propagation.bs_ue")?;
        self.ue_ue.validate("propagation.ue_ue")?;
        self.bs_bs.validate("propagation.bs_bs")?;
        if !(self.wall_loss_db >= 0.0) {
            return Err(SimError::config("propagation.wall_loss_db", "must be non-negative"));
        }
        if !(self.rb_bandwidth_hz > 0.0) {
            return Err(SimError::config("propagation.rb_bandwidth_hz", "must be positive"));
        }
        Ok(())
    }

    /// Noise power per resource block at a UE receiver.
    pub fn ue_noise_dbm_per_rb(&self) -> f64 {
        noise_power_dbm(self.rb_bandwidth_hz, self.ue_noise_figure_db)
    }

    /// Noise power per resource block at a BS receiver.
    pub fn bs_noise_dbm_per_rb(&self) -> f64 {
        noise_power_dbm(self.rb_bandwidth_hz, self.bs_noise_figure_db)
    }
}

/// Elevation-null attenuation applied to BS-BS links.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullingConfig {
    pub tx_null_db: f64,
    pub rx_null_db: f64,
}

impl NullingConfig {
    pub const MAX_PER_SIDE_DB: f64 = 35.0;

    pub const NONE: NullingConfig = NullingConfig {
        tx_null_db: 0.0,
        rx_null_db: 0.0,
    };

    pub fn symmetric(per_side_db: f64) -> Self {
        NullingConfig {
            tx_null_db: per_side_db,
            rx_null_db: per_side_db,
        }
    }

    pub fn total_db(&self) -> f64 {
        self.tx_null_db + self.rx_null_db
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("nulling.tx_null_db", self.tx_null_db), ("nulling.rx_null_db", self.rx_null_db)] {
            if !(0.0..=Self::MAX_PER_SIDE_DB).contains(&v) {
                return Err(SimError::config(
                    key,
                    format!("must be within [0, {}] dB, got {v}", Self::MAX_PER_SIDE_DB),
                ));
            }
        }
        Ok(())
    }
}

impl Default for NullingConfig {
    fn default() -> Self {
        NullingConfig::symmetric(20.0)
    }
}

/// Residual self-echo attenuation at a full-duplex BS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfInterferenceConfig {
    pub sic_db: f64,
}

impl Default for SelfInterferenceConfig {
    fn default() -> Self {
        SelfInterferenceConfig { sic_db: 110.0 }
    }
}

impl SelfInterferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sic_db >= 0.0) {
            return Err(SimError::config("self_interference.sic_db", "must be non-negative"));
        }
        Ok(())
    }
}

/// Deterministic loss of one link, split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLoss {
    /// Distance-dependent loss without shadowing.
    pub loss_db: f64,
    pub los: bool,
    pub shadowing_db: f64,
}

impl PathLoss {
    pub fn total_db(&self) -> f64 {
        self.loss_db + self.shadowing_db
    }
}

static CLAMP_LOGGED: AtomicBool = AtomicBool::new(false);

/// Path loss between two nodes under the model of `class`.
///
/// LoS state and shadowing come from a generator keyed on `shadow_seed`, the
/// link class and the two node keys.
pub fn path_loss(
    tx: &Node,
    rx: &Node,
    class: LinkClass,
    cfg: &PropagationConfig,
    wrap: Option<&WrapConfig>,
    shadow_seed: u64,
) -> PathLoss {
    let model = cfg.model(class);
    let d2 = planar_distance(tx.pos, rx.pos, wrap);
    let dh = tx.height_m - rx.height_m;
    let mut d3 = d2.hypot(dh);
    if d3 < model.min_distance_m {
        if !CLAMP_LOGGED.swap(true, Ordering::Relaxed) {
            log::warn!(
                "link distance {d3:.2} m below model minimum {} m; clamping (reported once)",
                model.min_distance_m
            );
        }
        d3 = model.min_distance_m;
    }
    let mut rng = link_rng(shadow_seed, tx.key, rx.key, class.tag());
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    let los = u < model.los_probability.probability(d2.max(model.min_distance_m));
    let branch = if los { &model.los } else { &model.nlos };
    PathLoss {
        loss_db: branch.loss_db(d3),
        los,
        shadowing_db: z * branch.shadowing_sigma_db,
    }
}

/// Gain in dB (non-positive) of the link `tx -> rx`, before any nulling.
pub fn link_gain_db(
    tx: &Node,
    rx: &Node,
    class: LinkClass,
    cfg: &PropagationConfig,
    wrap: Option<&WrapConfig>,
    shadow_seed: u64,
) -> f64 {
    let pl = path_loss(tx, rx, class, cfg, wrap, shadow_seed);
    let antennas = match class {
        LinkClass::BsUe => cfg.bs_antenna_gain_dbi + cfg.ue_antenna_gain_dbi,
        LinkClass::UeUe => 2.0 * cfg.ue_antenna_gain_dbi,
        LinkClass::BsBs => 2.0 * cfg.bs_antenna_gain_dbi,
    };
    let wall = if tx.building != rx.building {
        cfg.wall_loss_db
    } else {
        0.0
    };
    (antennas - pl.total_db() - wall).min(0.0)
}

/// Static channel of one drop, in dB.
///
/// Diagonals of the square matrices are `-inf` (no self link). The BS-BS
/// entries already include the elevation nulling of `nulling`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkGainMatrix {
    n_bs: usize,
    n_ue: usize,
    bs_to_ue: Vec<f64>,
    ue_to_ue: Vec<f64>,
    bs_to_bs: Vec<f64>,
    nulling: NullingConfig,
    pub ue_noise_dbm_per_rb: f64,
    pub bs_noise_dbm_per_rb: f64,
}

impl LinkGainMatrix {
    /// All-blocked matrix (every gain `-inf`) to be filled by hand.
    pub fn blank(n_bs: usize, n_ue: usize, ue_noise_dbm_per_rb: f64, bs_noise_dbm_per_rb: f64) -> Self {
        LinkGainMatrix {
            n_bs,
            n_ue,
            bs_to_ue: vec![f64::NEG_INFINITY; n_bs * n_ue],
            ue_to_ue: vec![f64::NEG_INFINITY; n_ue * n_ue],
            bs_to_bs: vec![f64::NEG_INFINITY; n_bs * n_bs],
            nulling: NullingConfig::NONE,
            ue_noise_dbm_per_rb,
            bs_noise_dbm_per_rb,
        }
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }

    pub fn nulling(&self) -> NullingConfig {
        self.nulling
    }

    #[inline]
    pub fn bs_ue(&self, bs: usize, ue: usize) -> f64 {
        self.bs_to_ue[bs * self.n_ue + ue]
    }

    #[inline]
    pub fn ue_ue(&self, a: usize, b: usize) -> f64 {
        self.ue_to_ue[a * self.n_ue + b]
    }

    /// Nulled gain of the BS-BS link.
    #[inline]
    pub fn bs_bs(&self, a: usize, b: usize) -> f64 {
        self.bs_to_bs[a * self.n_bs + b]
    }

    pub fn set_bs_ue(&mut self, bs: usize, ue: usize, db: f64) {
        self.bs_to_ue[bs * self.n_ue + ue] = db;
    }

    /// Sets both directions of a UE-UE link.
    pub fn set_ue_ue(&mut self, a: usize, b: usize, db: f64) {
        self.ue_to_ue[a * self.n_ue + b] = db;
        self.ue_to_ue[b * self.n_ue + a] = db;
    }

    /// Sets both directions of a BS-BS link (nulled value).
    pub fn set_bs_bs(&mut self, a: usize, b: usize, db: f64) {
        self.bs_to_bs[a * self.n_bs + b] = db;
        self.bs_to_bs[b * self.n_bs + a] = db;
    }

    /// Row of gains from `bs` to every UE.
    pub fn bs_row(&self, bs: usize) -> &[f64] {
        &self.bs_to_ue[bs * self.n_ue..(bs + 1) * self.n_ue]
    }

    /// Row of gains from UE `a` to every UE.
    pub fn ue_row(&self, a: usize) -> &[f64] {
        &self.ue_to_ue[a * self.n_ue..(a + 1) * self.n_ue]
    }

    /// Same channel with a different nulling configuration.
    pub fn with_nulling(&self, nulling: NullingConfig) -> Self {
        let delta = self.nulling.total_db() - nulling.total_db();
        let mut out = self.clone();
        for g in &mut out.bs_to_bs {
            *g += delta;
        }
        out.nulling = nulling;
        out
    }

    /// Disconnects all UE-UE and BS-BS couplings.
    pub fn clear_cross_links(&mut self) {
        self.ue_to_ue.iter_mut().for_each(|g| *g = f64::NEG_INFINITY);
        self.bs_to_bs.iter_mut().for_each(|g| *g = f64::NEG_INFINITY);
    }

    /// Serving-link coupling loss of every UE (`-gain` towards its cell).
    pub fn serving_path_loss(&self, layout: &NetworkLayout) -> Vec<f64> {
        layout.ues.iter().map(|u| -self.bs_ue(u.cell, u.id)).collect()
    }

    /// `tx_id,rx_id,gain_db` for every finite entry, BS ids prefixed `bs`, UE ids `ue`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tx_id", "rx_id", "gain_db"])?;
        for b in 0..self.n_bs {
            for u in 0..self.n_ue {
                let g = self.bs_ue(b, u);
                if g.is_finite() {
                    w.write_record([format!("bs{b}"), format!("ue{u}"), format!("{g:.3}")])?;
                }
            }
        }
        for a in 0..self.n_ue {
            for b in 0..self.n_ue {
                let g = self.ue_ue(a, b);
                if g.is_finite() {
                    w.write_record([format!("ue{a}"), format!("ue{b}"), format!("{g:.3}")])?;
                }
            }
        }
        for a in 0..self.n_bs {
            for b in 0..self.n_bs {
                let g = self.bs_bs(a, b);
                if g.is_finite() {
                    w.write_record([format!("bs{a}"), format!("bs{b}"), format!("{g:.3}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds every link of the layout. Shadowing is drawn from the drop's
/// shadowing stream so it agrees with the draws used for UE association.
pub fn build_gain_matrix(
    layout: &NetworkLayout,
    nulling: NullingConfig,
    cfg: &PropagationConfig,
    drop_seed: u64,
) -> LinkGainMatrix {
    let shadow_seed = derive_seed(drop_seed, stream::SHADOWING);
    let wrap = layout.wrap.as_ref();
    let bs: Vec<Node> = layout.small_cells.iter().map(|c| c.node()).collect();
    let ues: Vec<Node> = layout.ues.iter().map(|u| u.node()).collect();
    let mut m = LinkGainMatrix::blank(
        bs.len(),
        ues.len(),
        cfg.ue_noise_dbm_per_rb(),
        cfg.bs_noise_dbm_per_rb(),
    );
    for (b, bn) in bs.iter().enumerate() {
        for (u, un) in ues.iter().enumerate() {
            m.set_bs_ue(b, u, link_gain_db(bn, un, LinkClass::BsUe, cfg, wrap, shadow_seed));
        }
    }
    for a in 0..ues.len() {
        for b in a + 1..ues.len() {
            let g = link_gain_db(&ues[a], &ues[b], LinkClass::UeUe, cfg, wrap, shadow_seed);
            m.set_ue_ue(a, b, g);
        }
    }
    let null = nulling.total_db();
    for a in 0..bs.len() {
        for b in a + 1..bs.len() {
            let g = link_gain_db(&bs[a], &bs[b], LinkClass::BsBs, cfg, wrap, shadow_seed);
            m.set_bs_bs(a, b, g - null);
        }
    }
    m.nulling = nulling;
    m
}

/// Empirical distributions behind the interference comparison.
#[derive(Clone, Debug, Default)]
pub struct InterferenceCdfs {
    /// Per BS: BS-BS interference over conventional UL interference, dB.
    pub bsbs_over_ul: Cdf,
    /// Per DL UE: UE-UE interference over conventional DL interference, dB.
    pub ueue_over_dl: Cdf,
    /// Nodes skipped because they had no interferer of one kind.
    pub skipped: usize,
}

/// Mean interference per resource block when every other cell has one
/// active transmitter of each direction on it.
///
/// For a BS, the BS-BS term sums every other BS at full DL power through the
/// nulled gains; the conventional UL term sums, over every other cell, the
/// average over that cell's UL UEs at their OLPC powers. For a DL UE, the
/// UE-UE term sums the per-cell average over UL UEs of all cells (its own
/// included) and the conventional DL term sums every other BS.
pub fn interference_ratio_cdfs(
    layout: &NetworkLayout,
    gains: &LinkGainMatrix,
    ue_power_dbm_per_rb: &[f64],
    bs_power_dbm_per_rb: f64,
) -> InterferenceCdfs {
    let n_cells = layout.n_cells();
    let p_bs = dbm_to_mw(bs_power_dbm_per_rb);
    let mut bsbs_over_ul = Vec::new();
    let mut ueue_over_dl = Vec::new();
    let mut skipped = 0;

    for b in 0..n_cells {
        let mut bsbs = 0.0;
        let mut ul = 0.0;
        for c in (0..n_cells).filter(|&c| c != b) {
            bsbs += p_bs * dbm_to_mw(gains.bs_bs(c, b));
            let members = layout.ul_ues(c);
            if !members.is_empty() {
                let s: f64 = members
                    .iter()
                    .map(|&u| dbm_to_mw(ue_power_dbm_per_rb[u] + gains.bs_ue(b, u)))
                    .sum();
                ul += s / members.len() as f64;
            }
        }
        if bsbs > 0.0 && ul > 0.0 {
            bsbs_over_ul.push(linear_to_db(bsbs / ul));
        } else {
            skipped += 1;
        }
    }

    for ue in layout.ues.iter().filter(|u| u.direction == Direction::Dl) {
        let d = ue.id;
        let mut ueue = 0.0;
        let mut dl = 0.0;
        for c in 0..n_cells {
            if c != ue.cell {
                dl += p_bs * dbm_to_mw(gains.bs_ue(c, d));
            }
            let members = layout.ul_ues(c);
            if !members.is_empty() {
                let s: f64 = members
                    .iter()
                    .map(|&u| dbm_to_mw(ue_power_dbm_per_rb[u] + gains.ue_ue(u, d)))
                    .sum();
                ueue += s / members.len() as f64;
            }
        }
        if ueue > 0.0 && dl > 0.0 {
            ueue_over_dl.push(linear_to_db(ueue / dl));
        } else {
            skipped += 1;
        }
    }
    if skipped > 0 {
        log::warn!("interference ratio: {skipped} node(s) without interferers skipped");
    }
    InterferenceCdfs {
        bsbs_over_ul: Cdf::from_values(bsbs_over_ul),
        ueue_over_dl: Cdf::from_values(ueue_over_dl),
        skipped,
    }
}

/// Two-column CDF dump: `value_db,cum_prob`.
pub fn write_cdf_csv<W: Write>(cdf: &Cdf, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value_db", "cum_prob"])?;
    for (v, p) in cdf.points() {
        w.write_record([format!("{v:.4}"), format!("{p:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;

    fn node(x: f64, y: f64, h: f64, key: u64) -> Node {
        Node {
            pos: Point::new(x, y),
            height_m: h,
            key,
            building: None,
        }
    }

    fn no_shadow(mut m: PathLossModel) -> PathLossModel {
        m.los.shadowing_sigma_db = 0.0;
        m.nlos.shadowing_sigma_db = 0.0;
        m
    }

    #[test]
    fn doubling_distance_adds_ten_n_log2() {
        let mut cfg = PropagationConfig::outdoor();
        cfg.bs_bs = no_shadow(cfg.bs_bs);
        let a = node(0.0, 0.0, 10.0, 1);
        let b1 = node(40.0, 0.0, 10.0, 2);
        let b2 = node(80.0, 0.0, 10.0, 2);
        let l1 = path_loss(&a, &b1, LinkClass::BsBs, &cfg, None, 9);
        let l2 = path_loss(&a, &b2, LinkClass::BsBs, &cfg, None, 9);
        let expected = 10.0 * 2.0 * 2f64.log10();
        assert!((l2.loss_db - l1.loss_db - expected).abs() < 1e-9);
        assert_eq!(l1.shadowing_db, 0.0);
    }

    #[test]
    fn indoor_bs_pair_at_30m_matches_closed_form() {
        // Hand evaluation: 43.68 + 16.9 * log10(30) = 43.68 + 16.9 * 1.4771 = 68.643 dB.
        let cfg = PropagationConfig::indoor();
        let a = node(0.0, 0.0, 6.0, 1);
        let b = node(30.0, 0.0, 6.0, 2);
        let pl = path_loss(&a, &b, LinkClass::BsBs, &cfg, None, 4);
        assert!(pl.los);
        assert!((pl.loss_db - 68.643).abs() < 1e-3, "{}", pl.loss_db);
        // Gain: 2 x 5 dBi antenna gain minus loss and shadowing.
        let g = link_gain_db(&a, &b, LinkClass::BsBs, &cfg, None, 4);
        assert!((g - (10.0 - pl.total_db())).abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_reciprocal() {
        let cfg = PropagationConfig::outdoor();
        let a = node(0.0, 0.0, 1.5, 77);
        let b = node(25.0, 13.0, 1.5, 78);
        let x = path_loss(&a, &b, LinkClass::UeUe, &cfg, None, 5);
        let y = path_loss(&a, &b, LinkClass::UeUe, &cfg, None, 5);
        let z = path_loss(&b, &a, LinkClass::UeUe, &cfg, None, 5);
        assert_eq!(x, y);
        assert_eq!(x, z);
    }

    #[test]
    fn distance_is_clamped() {
        let cfg = PropagationConfig::outdoor();
        let a = node(0.0, 0.0, 1.5, 1);
        let b = node(0.2, 0.0, 1.5, 2);
        let c = node(1.0, 0.0, 1.5, 2);
        let l1 = path_loss(&a, &b, LinkClass::UeUe, &cfg, None, 3);
        let l2 = path_loss(&a, &c, LinkClass::UeUe, &cfg, None, 3);
        assert_eq!(l1.loss_db, l2.loss_db);
    }

    #[test]
    fn los_probability_shapes() {
        assert_eq!(LosProbability::IndoorHotspot.probability(10.0), 1.0);
        assert_eq!(LosProbability::IndoorHotspot.probability(50.0), 0.5);
        assert!((LosProbability::UrbanMicro.probability(18.0) - 1.0).abs() < 1e-12);
        let mut prev = 1.0;
        for d in [20.0, 40.0, 80.0, 160.0] {
            let p = LosProbability::UrbanMicro.probability(d);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn nulling_bounds() {
        assert!(NullingConfig::symmetric(20.0).validate().is_ok());
        assert!(NullingConfig::symmetric(36.0).validate().is_err());
        assert!(NullingConfig { tx_null_db: -1.0, rx_null_db: 0.0 }.validate().is_err());
    }
}
