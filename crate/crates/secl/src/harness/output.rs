use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::eval::{Metrics, MetricsReport};
use crate::harness::config::TrainConfig;
use crate::harness::train::RunRecord;

pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const LOSS_LOG_CSV: &str = "loss_log.csv";
pub const TIMING_JSON: &str = "timing.json";
pub const CONFIG_TOML: &str = "config.toml";

pub fn embeddings_file(run: usize) -> String {
    format!("embeddings_run{run}.bin")
}

pub fn labels_file(run: usize) -> String {
    format!("labels_run{run}.txt")
}

/// Creates `<root>/<dataset>-<ablation>-<hash12>-<UTC timestamp>`, adding a
/// numeric suffix if that directory already exists.
pub fn create_experiment_dir(root: &Path, config: &TrainConfig) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!(
        "{}-{}-{}-{stamp}",
        config.dataset.name,
        config.loss.ablation,
        &config.hash()[..12]
    );
    let mut dir = root.join(&base);
    let mut k = 1;
    while dir.exists() {
        k += 1;
        dir = root.join(format!("{base}-{k}"));
    }
    fs::create_dir(&dir)?;
    Ok(dir)
}

const METRIC_HEADER: [&str; 10] = [
    "dataset",
    "ablation",
    "seed",
    "acc",
    "nmi",
    "ari",
    "f1",
    "q",
    "wall_time_s",
    "f1_weighted",
];

fn metric_row(dataset: &str, ablation: &str, seed: &str, m: &Metrics, wall: Option<f64>) -> Vec<String> {
    let f = |v: f64| v.to_string();
    vec![
        dataset.to_string(),
        ablation.to_string(),
        seed.to_string(),
        f(m.acc),
        f(m.nmi),
        f(m.ari),
        f(m.f1),
        f(m.modularity_q),
        wall.map(f).unwrap_or_default(),
        f(m.f1_weighted),
    ]
}

/// One row per run plus `mean` and `std` rows. Wall time is left blank when
/// `deterministic` so the file is reproducible byte for byte.
pub fn write_metrics_csv(
    path: &Path,
    config: &TrainConfig,
    records: &[RunRecord],
    report: Option<&MetricsReport>,
) -> Result<()> {
    let deterministic = config.run.deterministic;
    let dataset = &config.dataset.name;
    let ablation = config.loss.ablation.as_str();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRIC_HEADER)?;
    for r in records {
        if let Some(m) = &r.metrics {
            let wall = (!deterministic).then_some(r.wall_time_s);
            w.write_record(metric_row(dataset, ablation, &r.seed.to_string(), m, wall))?;
        }
    }
    if let Some(report) = report {
        w.write_record(metric_row(dataset, ablation, "mean", &report.mean, None))?;
        w.write_record(metric_row(dataset, ablation, "std", &report.std, None))?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (run, epoch).
pub fn write_loss_log(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "seed", "epoch", "l_sl", "l_cl", "l_m", "total", "lambda1", "lambda2"])?;
    for (k, r) in records.iter().enumerate() {
        for (e, l) in r.losses.iter().enumerate() {
            w.write_record([
                k.to_string(),
                r.seed.to_string(),
                (e + 1).to_string(),
                l.l_sl.to_string(),
                l.l_cl.to_string(),
                l.l_m.to_string(),
                l.total.to_string(),
                l.lambda1.to_string(),
                l.lambda2.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub epochs: usize,
    pub final_total_loss: Option<f64>,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Serialize)]
pub struct FailureSummary {
    pub run: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Serialize)]
struct MetricsDocument<'a> {
    version: &'a str,
    dataset: &'a str,
    ablation: &'a str,
    config_hash: String,
    config: &'a TrainConfig,
    runs: Vec<RunSummary>,
    report: Option<&'a MetricsReport>,
    failed: Option<&'a FailureSummary>,
}

pub fn write_metrics_json(
    path: &Path,
    config: &TrainConfig,
    records: &[RunRecord],
    report: Option<&MetricsReport>,
    failed: Option<&FailureSummary>,
) -> Result<()> {
    let mut config_copy = config.clone();
    // keep absolute paths out of a file that must compare equal across checkouts
    config_copy.dataset.dir = PathBuf::new();
    let doc = MetricsDocument {
        version: crate::harness::train::VERSION,
        dataset: &config.dataset.name,
        ablation: config.loss.ablation.as_str(),
        config_hash: config.hash(),
        config: &config_copy,
        runs: records
            .iter()
            .enumerate()
            .map(|(k, r)| RunSummary {
                run: k,
                seed: r.seed,
                epochs: r.losses.len(),
                final_total_loss: r.losses.last().map(|l| l.total),
                metrics: r.metrics,
            })
            .collect(),
        report,
        failed,
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Wall-clock seconds per run, kept apart from the reproducible artifacts.
pub fn write_timing(path: &Path, records: &[RunRecord]) -> Result<()> {
    let times: Vec<f64> = records.iter().map(|r| r.wall_time_s).collect();
    fs::write(
        path,
        serde_json::to_string_pretty(&serde_json::json!({ "wall_time_s": times }))?,
    )?;
    Ok(())
}
