//! CSV outputs and the text summary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::RunConfig;
use crate::engine::{Comparison, GainMetric};
use crate::error::Result;
use crate::propagation::{InterferenceCdfs, NullingConfig};
use crate::stats::Cdf;
use crate::topology::Direction;

/// Results of a `run`, `compare` or `sweep` invocation. Plain runs and
/// comparisons have a single point with no load.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub config: RunConfig,
    pub points: Vec<(Option<f64>, Comparison)>,
}

fn load_field(load: Option<f64>) -> String {
    load.map(|l| format!("{l}")).unwrap_or_default()
}

fn fmt_gain(g: Option<f64>) -> String {
    g.map(|g| format!("{g:.4}")).unwrap_or_else(|| "nan".to_string())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_cdfs<W: Write>(out: W, rows: Vec<(Option<f64>, String, Cdf)>, value_col: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["load_bps", "mode", value_col, "cum_prob"])?;
    for (load, label, cdf) in rows {
        for (v, p) in cdf.points() {
            w.write_record([load_field(load), label.clone(), format!("{v:.3}"), format!("{p:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

impl RunReport {
    /// Writes every CSV and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for dir_ in [Direction::Dl, Direction::Ul] {
            let name = dir_.name().to_lowercase();
            let mut tput = Vec::new();
            let mut perceived = Vec::new();
            for (load, cmp) in &self.points {
                for r in &cmp.results {
                    tput.push((*load, r.label(), r.throughput(dir_)));
                    perceived.push((*load, r.label(), r.perceived(dir_).0));
                }
            }
            write_cdfs(create(dir, &format!("throughput_cdf_{name}.csv"))?, tput, "value_bps")?;
            write_cdfs(create(dir, &format!("perceived_tput_{name}.csv"))?, perceived, "value_bps")?;
        }
        self.write_gains(create(dir, "gains.csv")?)?;
        let mut f = create(dir, "summary.txt")?;
        f.write_all(self.summary().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn write_gains<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["load_bps", "mode", "reference", "direction", "metric", "gain"])?;
        for (load, cmp) in &self.points {
            for g in &cmp.gains {
                w.write_record([
                    load_field(*load),
                    g.label.clone(),
                    cmp.reference.clone(),
                    g.direction.name().to_lowercase(),
                    g.metric.name().to_string(),
                    fmt_gain(g.gain),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Gain table and per-mode statistics followed by the echoed configuration.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "scenario {}  drops {}  ttis/drop {}  seed {}",
            self.config.scenario.kind.name(),
            self.config.run.n_drops,
            self.config.ttis(),
            self.config.run.seed
        );
        for (load, cmp) in &self.points {
            let _ = writeln!(s);
            match load {
                Some(l) => {
                    let _ = writeln!(s, "traffic {}  DL offered load {:.1} Mbps", cmp.traffic.name(), l / 1e6);
                }
                None => {
                    let _ = writeln!(s, "traffic {}", cmp.traffic.name());
                }
            }
            let _ = writeln!(
                s,
                "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}",
                "mode", "DL mean", "DL p5", "DL p50", "DL p95", "UL mean", "UL p5", "UL p50", "UL p95", "boost"
            );
            for r in &cmp.results {
                let mut line = format!("{:<14}", r.label());
                for dir in [Direction::Dl, Direction::Ul] {
                    for m in GainMetric::ALL {
                        line.push_str(&format!(" {:>9}", fmt_gain(cmp.gain(&r.label(), dir, m))));
                    }
                }
                let _ = writeln!(s, "{line} {:>7.1}", r.mean_boost_db());
            }
            let _ = writeln!(s, "(gains against {})", cmp.reference);
            for r in &cmp.results {
                let dl = r.throughput(Direction::Dl).mean().unwrap_or(0.0);
                let ul = r.throughput(Direction::Ul).mean().unwrap_or(0.0);
                let (_, open_dl) = r.perceived(Direction::Dl);
                let (_, open_ul) = r.perceived(Direction::Ul);
                let _ = writeln!(
                    s,
                    "{:<14} mean UE throughput DL {:.3} Mbps UL {:.3} Mbps; unfinished bursts {}",
                    r.label(),
                    dl / 1e6,
                    ul / 1e6,
                    open_dl + open_ul
                );
                for w in r.warnings() {
                    let _ = writeln!(s, "  warning: {w}");
                }
            }
        }
        let _ = writeln!(s, "\n# configuration\n{}", self.config.to_toml());
        s
    }
}

/// Interference-ratio CDFs of one or more drops.
#[derive(Clone, Debug)]
pub struct Fig1Report {
    pub config: RunConfig,
    /// Nulling the CDFs were computed with.
    pub nulling: NullingConfig,
    pub cdfs: InterferenceCdfs,
}

impl Fig1Report {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_csv(create(dir, "fig1_cdf.csv")?)?;
        let mut f = create(dir, "summary.txt")?;
        f.write_all(self.summary().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value_db", "cum_prob"])?;
        for (name, cdf) in [("bsbs_over_ul", &self.cdfs.bsbs_over_ul), ("ueue_over_dl", &self.cdfs.ueue_over_dl)] {
            for (v, p) in cdf.points() {
                w.write_record([name.to_string(), format!("{v:.4}"), format!("{p:.6}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "scenario {}  drops {}  nulling {} dB",
            self.config.scenario.kind.name(),
            self.config.run.n_drops,
            self.nulling.total_db()
        );
        for (name, cdf) in [("bsbs_over_ul", &self.cdfs.bsbs_over_ul), ("ueue_over_dl", &self.cdfs.ueue_over_dl)] {
            let p = |q: f64| cdf.percentile(q).map(|v| format!("{v:.1}")).unwrap_or_else(|| "nan".into());
            let _ = writeln!(s, "{name:<13} n {:>5}  p5 {:>7}  p50 {:>7}  p95 {:>7} dB", cdf.len(), p(5.0), p(50.0), p(95.0));
        }
        if self.cdfs.skipped > 0 {
            let _ = writeln!(s, "{} nodes skipped (no finite interference)", self.cdfs.skipped);
        }
        let _ = writeln!(s, "\n# configuration\n{}", self.config.to_toml());
        s
    }
}
