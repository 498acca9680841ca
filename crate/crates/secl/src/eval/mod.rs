//! Post-training clustering and evaluation metrics.

mod hungarian;
mod kmeans;
mod metrics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ModularityOperator};
use crate::linalg::DenseMatrix;

pub use hungarian::max_weight_assignment;
pub use kmeans::{kmeans, ClusterResult, KMeansConfig};
pub use metrics::{accuracy, ari, f1_macro, f1_weighted, nmi, nmi_with, Contingency, NmiNorm};

/// One-hot N×k indicator of `labels` after compacting ids to `0..k`.
pub fn one_hot(labels: &[usize]) -> DenseMatrix {
    let mut ids = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut u = DenseMatrix::zeros(labels.len(), ids.len().max(1));
    for (i, l) in labels.iter().enumerate() {
        u.set(i, ids.binary_search(l).expect("id present"), 1.0);
    }
    u
}

/// Newman modularity Q of a hard partition, computed as Tr(UᵀBU)/2m with the
/// matrix-free modularity operator.
pub fn modularity_score(labels: &[usize], g: &Graph) -> Result<f64> {
    if labels.len() != g.n() {
        return Err(Error::shape("modularity_score", (labels.len(), 1), (g.n(), 1)));
    }
    let b = ModularityOperator::factored(g)?;
    Ok(b.quadratic_trace(&one_hot(labels))? / b.two_m())
}

/// Metrics of one clustering against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub nmi: f64,
    pub ari: f64,
    /// Macro F1, the headline F1 number.
    pub f1: f64,
    pub f1_weighted: f64,
    pub modularity_q: f64,
}

impl Metrics {
    pub const FIELDS: [&'static str; 6] = ["acc", "nmi", "ari", "f1", "f1_weighted", "modularity_q"];

    /// All metrics; `truth = None` leaves the supervised ones at NaN.
    pub fn compute(pred: &[usize], truth: Option<&[usize]>, g: &Graph, norm: NmiNorm) -> Result<Self> {
        let modularity_q = if g.m() > 0 { modularity_score(pred, g)? } else { f64::NAN };
        let Some(truth) = truth else {
            return Ok(Self {
                acc: f64::NAN,
                nmi: f64::NAN,
                ari: f64::NAN,
                f1: f64::NAN,
                f1_weighted: f64::NAN,
                modularity_q,
            });
        };
        Ok(Self {
            acc: accuracy(pred, truth)?,
            nmi: nmi_with(pred, truth, norm)?,
            ari: ari(pred, truth)?,
            f1: f1_macro(pred, truth)?,
            f1_weighted: f1_weighted(pred, truth)?,
            modularity_q,
        })
    }

    pub fn values(&self) -> [f64; 6] {
        [self.acc, self.nmi, self.ari, self.f1, self.f1_weighted, self.modularity_q]
    }

    fn from_values(v: [f64; 6]) -> Self {
        Self {
            acc: v[0],
            nmi: v[1],
            ari: v[2],
            f1: v[3],
            f1_weighted: v[4],
            modularity_q: v[5],
        }
    }
}

/// Per-run metrics with their mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_run: Vec<Metrics>,
    pub mean: Metrics,
    pub std: Metrics,
    pub nmi_norm: NmiNorm,
    pub f1_average: String,
}

impl MetricsReport {
    pub fn aggregate(per_run: Vec<Metrics>, nmi_norm: NmiNorm) -> Result<Self> {
        if per_run.is_empty() {
            return Err(Error::config("cannot aggregate zero runs"));
        }
        let (mean, std) = mean_std(&per_run);
        Ok(Self {
            per_run,
            mean,
            std,
            nmi_norm,
            f1_average: "macro".into(),
        })
    }

    /// Whether stored aggregates match a recomputation from `per_run`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let (mean, std) = mean_std(&self.per_run);
        let close = |a: &Metrics, b: &Metrics| {
            a.values()
                .iter()
                .zip(b.values())
                .all(|(x, y)| (x.is_nan() && y.is_nan()) || (x - y).abs() <= tol)
        };
        close(&mean, &self.mean) && close(&std, &self.std)
    }
}

fn mean_std(runs: &[Metrics]) -> (Metrics, Metrics) {
    let n = runs.len() as f64;
    let mut mean = [0.0; 6];
    for r in runs {
        for (m, v) in mean.iter_mut().zip(r.values()) {
            *m += v / n;
        }
    }
    let mut var = [0.0; 6];
    for r in runs {
        for ((s, v), m) in var.iter_mut().zip(r.values()).zip(mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (Metrics::from_values(mean), Metrics::from_values(var.map(f64::sqrt)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangles() -> Graph {
        let edges = vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
        Graph::new(6, edges, DenseMatrix::zeros(6, 1), None).unwrap()
    }

    #[test]
    fn modularity_cases() {
        let g = triangles();
        assert!((modularity_score(&[0, 0, 0, 1, 1, 1], &g).unwrap() - 0.5).abs() < 1e-15);
        assert!(modularity_score(&[2; 6], &g).unwrap().abs() < 1e-15);
        let k3 = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)], DenseMatrix::zeros(3, 1), None).unwrap();
        assert!((modularity_score(&[0, 1, 2], &k3).unwrap() + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn modularity_needs_edges() {
        let g = Graph::new(3, Vec::new(), DenseMatrix::zeros(3, 1), None).unwrap();
        assert!(matches!(modularity_score(&[0, 0, 1], &g), Err(Error::Degenerate(_))));
    }

    #[test]
    fn aggregate_single_run_has_zero_std() {
        let m = Metrics {
            acc: 0.7,
            nmi: 0.5,
            ari: 0.4,
            f1: 0.6,
            f1_weighted: 0.65,
            modularity_q: 0.3,
        };
        let r = MetricsReport::aggregate(vec![m], NmiNorm::Geometric).unwrap();
        assert_eq!(r.std, Metrics::default());
        assert_eq!(r.mean, m);
        assert!(r.is_consistent(1e-12));
    }

    #[test]
    fn aggregate_two_runs() {
        let a = Metrics { acc: 0.6, ..Default::default() };
        let b = Metrics { acc: 0.8, ..Default::default() };
        let r = MetricsReport::aggregate(vec![a, b], NmiNorm::Geometric).unwrap();
        assert!((r.mean.acc - 0.7).abs() < 1e-15);
        assert!((r.std.acc - 0.1).abs() < 1e-15);
        assert!(MetricsReport::aggregate(Vec::new(), NmiNorm::Geometric).is_err());
    }
}
