//! Run configuration: scenario defaults, TOML files and `key=value` overrides.
//!
//! Layers, lowest first: built-in defaults for the scenario kind, the
//! config file, then dotted overrides. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::csi::FeedbackConfig;
use crate::error::{Result, SimError};
use crate::link::LinkConfig;
use crate::propagation::{NullingConfig, PropagationConfig, SelfInterferenceConfig};
use crate::radio::{DuplexMode, GridConfig, PowerConfig};
use crate::scheduling::{PfConfig, SchedulerKind};
use crate::topology::{ScenarioKind, ScenarioParams};
use crate::traffic::{TrafficConfig, TrafficModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub seed: u64,
    pub n_drops: usize,
    /// Drop length for full-buffer traffic.
    pub ttis_per_drop: u64,
    /// Drop length for bursty traffic.
    pub bursty_ttis_per_drop: u64,
    pub duplex: DuplexMode,
    /// Scheduler of full-duplex runs; FDD and flexible runs use their own.
    pub scheduler: SchedulerKind,
    /// Modes of `compare` and `sweep`.
    pub modes: Vec<DuplexMode>,
    /// Worker threads for drops; 0 uses every processor.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Network-wide DL offered loads; UL follows the configured ratio.
    pub dl_loads_bps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunParams,
    pub scenario: ScenarioParams,
    pub propagation: PropagationConfig,
    pub nulling: NullingConfig,
    pub self_interference: SelfInterferenceConfig,
    pub power: PowerConfig,
    pub grid: GridConfig,
    pub feedback: FeedbackConfig,
    pub link: LinkConfig,
    pub pf: PfConfig,
    pub traffic: TrafficConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let propagation = match kind {
            ScenarioKind::IndoorHotzone => PropagationConfig::indoor(),
            _ => PropagationConfig::outdoor(),
        };
        RunConfig {
            run: RunParams {
                seed: 1,
                n_drops: 2,
                ttis_per_drop: 5000,
                bursty_ttis_per_drop: 20000,
                duplex: DuplexMode::FullDuplex,
                scheduler: SchedulerKind::Basic,
                modes: vec![DuplexMode::FullDuplex, DuplexMode::Fdd, DuplexMode::FlexibleDuplex],
                workers: 0,
            },
            scenario: ScenarioParams::defaults_for(kind),
            propagation,
            nulling: NullingConfig::default(),
            self_interference: SelfInterferenceConfig::default(),
            power: PowerConfig::default(),
            grid: GridConfig::default(),
            feedback: FeedbackConfig::default(),
            link: LinkConfig::default(),
            pf: PfConfig::default(),
            traffic: TrafficConfig::default(),
            sweep: SweepConfig {
                dl_loads_bps: vec![24e6, 600e6, 800e6],
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.n_drops == 0 {
            return Err(SimError::config("run.n_drops", "must be at least 1"));
        }
        if self.run.ttis_per_drop == 0 || self.run.bursty_ttis_per_drop == 0 {
            return Err(SimError::config("run.ttis_per_drop", "drops need at least one TTI"));
        }
        if self.run.modes.is_empty() {
            return Err(SimError::config("run.modes", "needs at least one mode"));
        }
        if matches!(self.run.scheduler, SchedulerKind::Fdd | SchedulerKind::Flexible) {
            return Err(SimError::config(
                "run.scheduler",
                "full-duplex runs use `basic` or `joint`; FDD and flexible runs pick their own scheduler",
            ));
        }
        if self.sweep.dl_loads_bps.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(SimError::config("sweep.dl_loads_bps", "loads must be non-negative numbers"));
        }
        self.scenario.validate()?;
        self.propagation.validate()?;
        self.nulling.validate()?;
        self.self_interference.validate()?;
        self.power.validate()?;
        self.grid.validate()?;
        self.feedback.validate()?;
        self.link.validate()?;
        self.pf.validate()?;
        self.traffic.validate()?;
        Ok(())
    }

    /// Drop length for the configured traffic model.
    pub fn ttis(&self) -> u64 {
        match self.traffic.model {
            TrafficModel::FullBuffer => self.run.ttis_per_drop,
            TrafficModel::Ftp3 => self.run.bursty_ttis_per_drop,
        }
    }

    /// Scheduler used for `mode`.
    pub fn scheduler_for(&self, mode: DuplexMode) -> SchedulerKind {
        match mode {
            DuplexMode::FullDuplex => self.run.scheduler,
            DuplexMode::Fdd => SchedulerKind::Fdd,
            DuplexMode::FlexibleDuplex => SchedulerKind::Flexible,
        }
    }

    /// Configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Builds a configuration from optional file text and overrides.
    ///
    /// The scenario kind comes from an override, then the file, then `kind_hint`,
    /// and selects the default layer.
    pub fn load(kind_hint: Option<ScenarioKind>, file_text: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let file: Table = match file_text {
            Some(text) => text
                .parse::<Table>()
                .map_err(|e| SimError::config("<config file>", e.to_string()))?,
            None => Table::new(),
        };
        let kind = scenario_kind(&file, overrides)?
            .or(kind_hint)
            .unwrap_or(ScenarioKind::IndoorHotzone);
        let mut merged = Value::try_from(RunConfig::defaults(kind))
            .map_err(|e| SimError::config("<defaults>", e.to_string()))?;
        merge_into(&mut merged, Value::Table(file), "")?;
        for (key, raw) in overrides {
            set_path(&mut merged, key, parse_literal(raw))?;
        }
        let cfg: RunConfig = merged
            .try_into()
            .map_err(|e: toml::de::Error| SimError::config("<config>", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Bundled configuration text for a scenario.
pub fn bundled_config(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::IndoorHotzone => include_str!("../../../configs/indoor.toml"),
        ScenarioKind::OutdoorCluster => include_str!("../../../configs/cluster.toml"),
        ScenarioKind::OutdoorUniform => include_str!("../../../configs/uniform.toml"),
    }
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(SimError::config(s, "override must look like key=value")),
    }
}

fn scenario_kind(file: &Table, overrides: &[(String, String)]) -> Result<Option<ScenarioKind>> {
    let from_override = overrides.iter().rev().find(|(k, _)| k == "scenario.kind").map(|(_, v)| v.trim_matches('"').to_string());
    let from_file = file
        .get("scenario")
        .and_then(|s| s.get("kind"))
        .and_then(|k| k.as_str())
        .map(str::to_string);
    match from_override.or(from_file) {
        Some(name) => ScenarioKind::parse(&name)
            .map(Some)
            .ok_or_else(|| SimError::config("scenario.kind", format!("unknown scenario `{name}`"))),
        None => Ok(None),
    }
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn merge_into(base: &mut Value, layer: Value, path: &str) -> Result<()> {
    match (base, layer) {
        (Value::Table(b), Value::Table(l)) => {
            for (k, v) in l {
                let child = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge_into(slot, v, &child)?,
                    None => return Err(SimError::config(child, "unknown key")),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Table(t) = cur else {
            return Err(SimError::config(key, "does not name a section"));
        };
        let Some(next) = t.get_mut(*part) else {
            return Err(SimError::config(key, "unknown key"));
        };
        if i + 1 == parts.len() {
            *next = coerce(next, value);
            return Ok(());
        }
        cur = next;
    }
    unreachable!("split yields at least one part")
}

/// Integers given for float fields become floats, bare words stay strings.
fn coerce(existing: &Value, value: Value) -> Value {
    match (existing, value) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (_, v) => v,
    }
}
