use std::path::Path;
use std::process::{Command, Output};

fn fdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdsim")).args(args).output().unwrap()
}

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn validate_accepts_bundled_configs() {
    for name in ["indoor", "cluster", "uniform"] {
        let path = configs_dir().join(format!("{name}.toml"));
        let out = fdsim(&["validate", "--config", path.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("[run]"));
    }
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let out = fdsim(&["validate", "--scenario", "indoor", "--set", "power.bogus=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power.bogus"));
}

#[test]
fn unknown_scenario_is_rejected() {
    let out = fdsim(&["validate", "--scenario", "rural"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rural"));
}

#[test]
fn fig1_writes_interference_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdsim(&["fig1", "--scenario", "indoor", "--set", "run.n_drops=1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut bsbs: Vec<(f64, f64)> = rows(&dir.path().join("fig1_cdf.csv"))
        .into_iter()
        .filter(|r| r[0] == "bsbs_over_ul")
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert!(!bsbs.is_empty());
    bsbs.sort_by(|a, b| a.1.total_cmp(&b.1));
    let median = bsbs.iter().find(|(_, p)| *p >= 0.5).unwrap().0;
    assert!((30.0..=60.0).contains(&median), "median {median}");
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn compare_writes_gains_and_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdsim(&[
        "compare",
        "--scenario",
        "indoor",
        "--modes",
        "fd,fdd",
        "--traffic",
        "full_buffer",
        "--scheduler",
        "joint",
        "--set",
        "run.n_drops=1",
        "--set",
        "run.ttis_per_drop=200",
        "--set",
        "power.boost_db=7.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gains = rows(&dir.path().join("gains.csv"));
    for dir_ in ["dl", "ul"] {
        let row = gains
            .iter()
            .find(|r| r[1] == "fd_joint" && r[2] == "fdd" && r[3] == dir_ && r[4] == "mean")
            .unwrap_or_else(|| panic!("no {dir_} row"));
        assert!(row[5].parse::<f64>().unwrap() > 0.0);
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("boost_db = 7.5"), "{summary}");
    for name in ["throughput_cdf_dl.csv", "throughput_cdf_ul.csv", "perceived_tput_dl.csv", "perceived_tput_ul.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn sweep_reports_every_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdsim(&[
        "sweep",
        "--scenario",
        "indoor",
        "--modes",
        "fd,fdd",
        "--loads",
        "24e6,600e6",
        "--set",
        "run.n_drops=1",
        "--set",
        "run.bursty_ttis_per_drop=300",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gains = rows(&dir.path().join("gains.csv"));
    for load in ["24000000", "600000000"] {
        assert!(gains.iter().any(|r| r[0] == load && r[1] == "fd_basic"), "load {load}");
    }
}
