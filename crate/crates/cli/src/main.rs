use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdsim::config::{bundled_config, parse_override, RunConfig};
use fdsim::engine::{compare_modes, configured_variants, interference_ratios, load_sweep, make_drops, Variant};
use fdsim::propagation::NullingConfig;
use fdsim::radio::DuplexMode;
use fdsim::report::{Fig1Report, RunReport};
use fdsim::scheduling::SchedulerKind;
use fdsim::topology::ScenarioKind;
use fdsim::traffic::TrafficModel;
use fdsim::{Result, SimError};

#[derive(Parser, Debug)]
#[command(name = "fdsim", version, about = "System-level simulator for full-duplex small cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the configured duplex mode.
    Run(Common),
    /// Simulate several modes on shared drops and report gains against FDD.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated modes: fd, fdd, flexible.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
    },
    /// Compare modes under bursty traffic at several offered loads.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
        /// Comma-separated network-wide DL offered loads in bit/s.
        #[arg(long, value_delimiter = ',')]
        loads: Option<Vec<f64>>,
    },
    /// Interference-ratio CDFs (BS-BS over UL, UE-UE over DL).
    Fig1 {
        #[command(flatten)]
        common: Common,
        /// Apply the configured nulling instead of none.
        #[arg(long)]
        with_nulling: bool,
    },
    /// Check a configuration and print it.
    Validate(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled scenario when no config file is given: indoor, cluster, uniform.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Configuration override, e.g. `--set power.boost_db=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for drops (0: every processor).
    #[arg(long)]
    workers: Option<usize>,
    /// full_buffer or ftp3.
    #[arg(long)]
    traffic: Option<String>,
    /// Full-duplex scheduler: basic or joint.
    #[arg(long)]
    scheduler: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let kind = match &self.scenario {
            Some(s) => Some(
                ScenarioKind::parse(s).ok_or_else(|| SimError::config("--scenario", format!("unknown scenario `{s}`")))?,
            ),
            None => None,
        };
        let text = match (&self.config, kind) {
            (Some(path), _) => Some(
                std::fs::read_to_string(path)
                    .map_err(|e| SimError::config("--config", format!("{}: {e}", path.display())))?,
            ),
            (None, Some(k)) => Some(bundled_config(k).to_string()),
            (None, None) => None,
        };
        let mut overrides = Vec::new();
        if let (Some(_), Some(k)) = (&self.config, kind) {
            overrides.push(("scenario.kind".to_string(), format!("\"{}\"", k.name())));
        }
        if let Some(seed) = self.seed {
            overrides.push(("run.seed".to_string(), seed.to_string()));
        }
        if let Some(w) = self.workers {
            overrides.push(("run.workers".to_string(), w.to_string()));
        }
        if let Some(t) = &self.traffic {
            let m = TrafficModel::parse(t).ok_or_else(|| SimError::config("--traffic", format!("unknown traffic `{t}`")))?;
            overrides.push(("traffic.model".to_string(), format!("\"{}\"", m.name())));
        }
        if let Some(s) = &self.scheduler {
            let k = SchedulerKind::parse(s).ok_or_else(|| SimError::config("--scheduler", format!("unknown scheduler `{s}`")))?;
            overrides.push(("run.scheduler".to_string(), format!("\"{}\"", k.name())));
        }
        for s in &self.set {
            overrides.push(parse_override(s)?);
        }
        RunConfig::load(kind, text.as_deref(), &overrides)
    }
}

fn variants(cfg: &RunConfig, modes: &Option<Vec<String>>) -> Result<Vec<Variant>> {
    match modes {
        None => Ok(configured_variants(cfg)),
        Some(list) => list
            .iter()
            .map(|m| {
                let mode = DuplexMode::parse(m).ok_or_else(|| SimError::config("--modes", format!("unknown mode `{m}`")))?;
                Ok(Variant::new(mode, cfg.scheduler_for(mode)))
            })
            .collect(),
    }
}

fn finish(report: &RunReport, out: &Path) -> Result<()> {
    report.write(out)?;
    print!("{}", report.summary());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let drops = make_drops(&cfg)?;
            let v = Variant::new(cfg.run.duplex, cfg.scheduler_for(cfg.run.duplex));
            let cmp = compare_modes(&cfg, &drops, &[v])?;
            finish(&RunReport { config: cfg, points: vec![(None, cmp)] }, &common.out)
        }
        Command::Compare { common, modes } => {
            let cfg = common.load()?;
            let vs = variants(&cfg, &modes)?;
            let drops = make_drops(&cfg)?;
            let cmp = compare_modes(&cfg, &drops, &vs)?;
            finish(&RunReport { config: cfg, points: vec![(None, cmp)] }, &common.out)
        }
        Command::Sweep { common, modes, loads } => {
            let mut cfg = common.load()?;
            cfg.traffic.model = TrafficModel::Ftp3;
            if let Some(l) = loads {
                cfg.sweep.dl_loads_bps = l;
            }
            cfg.validate()?;
            let vs = variants(&cfg, &modes)?;
            let drops = make_drops(&cfg)?;
            let points = load_sweep(&cfg, &drops, &vs, &cfg.sweep.dl_loads_bps)?
                .into_iter()
                .map(|(l, c)| (Some(l), c))
                .collect();
            finish(&RunReport { config: cfg, points }, &common.out)
        }
        Command::Fig1 { common, with_nulling } => {
            let cfg = common.load()?;
            let nulling = if with_nulling { cfg.nulling } else { NullingConfig::NONE };
            let cdfs = interference_ratios(&cfg, nulling)?;
            let report = Fig1Report { config: cfg, nulling, cdfs };
            report.write(&common.out)?;
            print!("{}", report.summary());
            Ok(())
        }
        Command::Validate(common) => {
            let cfg = common.load()?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
