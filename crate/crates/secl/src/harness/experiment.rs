use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::eval::MetricsReport;
use crate::graph::{write_dense_bin, write_labels};
use crate::harness::config::TrainConfig;
use crate::harness::output::{
    embeddings_file, labels_file, write_loss_log, write_metrics_csv, write_metrics_json, write_timing,
    FailureSummary, CONFIG_TOML, LOSS_LOG_CSV, METRICS_CSV, METRICS_JSON, TIMING_JSON,
};
use crate::harness::train::{train, Prepared, RunRecord};

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub report: MetricsReport,
    pub records: Vec<RunRecord>,
    pub dir: Option<PathBuf>,
}

fn persist(
    dir: &Path,
    config: &TrainConfig,
    records: &[RunRecord],
    report: Option<&MetricsReport>,
    failed: Option<&FailureSummary>,
) -> Result<()> {
    write_metrics_csv(&dir.join(METRICS_CSV), config, records, report)?;
    write_metrics_json(&dir.join(METRICS_JSON), config, records, report, failed)?;
    write_loss_log(&dir.join(LOSS_LOG_CSV), records)?;
    write_timing(&dir.join(TIMING_JSON), records)?;
    Ok(())
}

/// Trains `config.run.runs` times with seeds `seed, seed+1, …` and aggregates
/// the metrics. With `out`, every artifact is written there; if a run fails
/// the finished runs are still persisted before the error is returned.
pub fn run_experiment(config: &TrainConfig, prepared: &Prepared, out: Option<&Path>) -> Result<ExperimentResult> {
    config.validate()?;
    if let Some(dir) = out {
        std::fs::write(dir.join(CONFIG_TOML), config.to_toml()?)?;
    }
    let mut records = Vec::with_capacity(config.run.runs);
    let mut per_run = Vec::with_capacity(config.run.runs);
    for k in 0..config.run.runs {
        let seed = config.run_seed(k);
        let output = match train(config, prepared, seed) {
            Ok(o) => o,
            Err(e) => {
                log::error!("run {k} (seed {seed}) failed: {e}");
                if let Some(dir) = out {
                    let failed = FailureSummary {
                        run: k,
                        seed,
                        error: e.to_string(),
                    };
                    persist(dir, config, &records, None, Some(&failed))?;
                }
                return Err(e);
            }
        };
        if let Some(dir) = out {
            write_dense_bin(&dir.join(embeddings_file(k)), &output.h2)?;
            if let Some(c) = &output.clustering {
                write_labels(&dir.join(labels_file(k)), &c.labels)?;
            }
        }
        let metrics = output.record.metrics.expect("training clusters by default");
        log::info!(
            "{} run {k} seed {seed}: acc {:.4} nmi {:.4} ari {:.4} f1 {:.4} q {:.4} ({:.1}s)",
            config.dataset.name,
            metrics.acc,
            metrics.nmi,
            metrics.ari,
            metrics.f1,
            metrics.modularity_q,
            output.record.wall_time_s
        );
        per_run.push(metrics);
        records.push(output.record);
    }
    let report = MetricsReport::aggregate(per_run, config.run.nmi_norm)?;
    if let Some(dir) = out {
        persist(dir, config, &records, Some(&report), None)?;
    }
    Ok(ExperimentResult {
        report,
        records,
        dir: out.map(Path::to_path_buf),
    })
}
