use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{Metrics, MetricsReport};
use crate::graph::Graph;
use crate::harness::config::TrainConfig;
use crate::harness::experiment::run_experiment;
use crate::harness::train::Prepared;
use crate::losses::Ablation;

/// Loss-weight values of the sensitivity grid.
pub const LAMBDA_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    /// Cartesian product λ1 × λ2.
    Lambda { lambda1: Vec<f64>, lambda2: Vec<f64> },
    FilterDepth(Vec<usize>),
    Temperature(Vec<f64>),
}

impl SweepGrid {
    pub fn cells(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        let with = |f: &dyn Fn(&mut TrainConfig)| {
            let mut c = base.clone();
            f(&mut c);
            c
        };
        match self {
            SweepGrid::Lambda { lambda1, lambda2 } => lambda1
                .iter()
                .flat_map(|&l1| {
                    lambda2.iter().map(move |&l2| {
                        with(&|c: &mut TrainConfig| {
                            c.loss.lambda1 = l1;
                            c.loss.lambda2 = l2;
                        })
                    })
                })
                .collect(),
            SweepGrid::FilterDepth(rs) => rs.iter().map(|&r| with(&|c| c.model.r = r)).collect(),
            SweepGrid::Temperature(ts) => ts.iter().map(|&t| with(&|c| c.loss.tau = t)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r: usize,
    pub tau: f64,
    pub mean: Metrics,
    pub std: Metrics,
}

/// One experiment per grid cell. Cells go to numbered subdirectories of `out`
/// and the table to `out/sweep.csv`.
pub fn sweep(base: &TrainConfig, graph: &Graph, grid: &SweepGrid, out: Option<&Path>) -> Result<Vec<SweepRow>> {
    let cells = grid.cells(base);
    if cells.is_empty() {
        return Err(Error::config("empty sweep grid"));
    }
    for c in &cells {
        c.validate()?;
    }
    let mut prepared: Option<(usize, Prepared)> = None;
    let mut rows = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        // X̂ depends only on r, so consecutive cells with the same r share it
        if prepared.as_ref().is_none_or(|(r, _)| *r != cell.model.r) {
            prepared = Some((cell.model.r, Prepared::new(cell, graph.clone())?));
        }
        let (_, p) = prepared.as_ref().expect("just set");
        let dir = match out {
            Some(root) => {
                let d = root.join(format!("cell{i:03}"));
                fs::create_dir_all(&d)?;
                Some(d)
            }
            None => None,
        };
        let result = run_experiment(cell, p, dir.as_deref())?;
        rows.push(SweepRow {
            lambda1: cell.loss.lambda1,
            lambda2: cell.loss.lambda2,
            r: cell.model.r,
            tau: cell.loss.tau,
            mean: result.report.mean,
            std: result.report.std,
        });
    }
    if let Some(root) = out {
        write_sweep_csv(&root.join("sweep.csv"), &rows)?;
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["lambda1".to_string(), "lambda2".into(), "r".into(), "tau".into()];
    for f in Metrics::FIELDS {
        header.push(format!("{f}_mean"));
        header.push(format!("{f}_std"));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.lambda1.to_string(),
            row.lambda2.to_string(),
            row.r.to_string(),
            row.tau.to_string(),
        ];
        for (m, s) in row.mean.values().iter().zip(row.std.values()) {
            rec.push(m.to_string());
            rec.push(s.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the full objective and each single-term ablation on the same graph.
pub fn ablate(base: &TrainConfig, prepared: &Prepared, out: Option<&Path>) -> Result<Vec<(Ablation, MetricsReport)>> {
    let mut results = Vec::with_capacity(Ablation::ALL.len());
    for ablation in Ablation::ALL {
        let mut config = base.clone();
        config.loss.ablation = ablation;
        let dir = match out {
            Some(root) => {
                let d = root.join(ablation.as_str());
                fs::create_dir_all(&d)?;
                Some(d)
            }
            None => None,
        };
        let result = run_experiment(&config, prepared, dir.as_deref())?;
        results.push((ablation, result.report));
    }
    if let Some(root) = out {
        let mut w = csv::Writer::from_path(root.join("ablation.csv"))?;
        w.write_record(["ablation", "acc_mean", "acc_std", "nmi_mean", "nmi_std", "ari_mean", "f1_mean", "q_mean"])?;
        for (a, r) in &results {
            w.write_record([
                a.as_str().to_string(),
                r.mean.acc.to_string(),
                r.std.acc.to_string(),
                r.mean.nmi.to_string(),
                r.std.nmi.to_string(),
                r.mean.ari.to_string(),
                r.mean.f1.to_string(),
                r.mean.modularity_q.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> TrainConfig {
        TrainConfig::from_toml(
            r#"
[dataset]
name = "toy"
edges = "e"
attributes = "a"
clusters = 2
[model]
r = 1
structure_widths = [4]
attribute_widths = [4]
[loss]
tau = 0.5
lambda1 = 0.1
lambda2 = 1.0
[optim]
learning_rate = 0.01
"#,
        )
        .unwrap()
    }

    #[test]
    fn grid_sizes() {
        let lambda = SweepGrid::Lambda {
            lambda1: LAMBDA_GRID.to_vec(),
            lambda2: LAMBDA_GRID.to_vec(),
        };
        let cells = lambda.cells(&base());
        assert_eq!(cells.len(), 25);
        assert_eq!((cells[7].loss.lambda1, cells[7].loss.lambda2), (0.1, 1.0));
        assert_eq!(SweepGrid::FilterDepth((0..=6).collect()).cells(&base()).len(), 7);
        assert_eq!(SweepGrid::Temperature(vec![0.1, 1.0]).cells(&base())[1].loss.tau, 1.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let g = Graph::new(2, vec![(0, 1)], crate::linalg::DenseMatrix::identity(2), None).unwrap();
        let grid = SweepGrid::FilterDepth(Vec::new());
        assert!(matches!(sweep(&base(), &g, &grid, None), Err(Error::Config(_))));
        let grid = SweepGrid::Lambda {
            lambda1: vec![1.0],
            lambda2: Vec::new(),
        };
        assert!(matches!(sweep(&base(), &g, &grid, None), Err(Error::Config(_))));
    }
}
