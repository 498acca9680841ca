use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub clusters: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(clusters: usize, seed: u64) -> Self {
        Self {
            clusters,
            restarts: 10,
            max_iter: 300,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    pub inertia: f64,
    pub iterations_run: usize,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding.
fn seed_centroids(points: &DenseMatrix, c: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = points.rows();
    let mut centroids = DenseMatrix::zeros(c, points.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), centroids.row(0))).collect();
    for k in 1..c {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            // every point coincides with a centroid already
            rng.random_range(0..n)
        };
        centroids.row_mut(k).copy_from_slice(points.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), centroids.row(k)));
        }
    }
    centroids
}

/// Nearest centroid per point, ties going to the lowest index.
fn assign(points: &DenseMatrix, centroids: &DenseMatrix) -> Vec<(usize, f64)> {
    par::map_range(points.rows(), centroids.rows() * points.cols(), |i| {
        let p = points.row(i);
        let mut best = (0, f64::INFINITY);
        for k in 0..centroids.rows() {
            let d = sq_dist(p, centroids.row(k));
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    })
}

fn lloyd(points: &DenseMatrix, c: usize, max_iter: usize, rng: &mut ChaCha8Rng) -> ClusterResult {
    let (n, dim) = points.shape();
    let mut centroids = seed_centroids(points, c, rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let assigned = assign(points, &centroids);
        let changed = assigned.iter().zip(&labels).any(|((k, _), &old)| *k != old);
        labels = assigned.iter().map(|(k, _)| *k).collect();
        trace.push(assigned.iter().map(|(_, d)| d).sum());
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = DenseMatrix::zeros(c, dim);
        let mut counts = vec![0usize; c];
        for (i, &k) in labels.iter().enumerate() {
            counts[k] += 1;
            for (s, &v) in sums.row_mut(k).iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        let mut dist: Vec<f64> = assigned.iter().map(|(_, d)| *d).collect();
        for k in 0..c {
            if counts[k] > 0 {
                let inv = 1.0 / counts[k] as f64;
                for (dst, &s) in centroids.row_mut(k).iter_mut().zip(sums.row(k)) {
                    *dst = s * inv;
                }
            } else {
                // empty cluster: move it onto the point farthest from its centroid
                let far = dist
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best })
                    .0;
                centroids.row_mut(k).copy_from_slice(points.row(far));
                dist[far] = 0.0;
            }
        }
    }
    let inertia = *trace.last().unwrap_or(&0.0);
    ClusterResult {
        labels,
        centroids,
        inertia,
        iterations_run: iterations,
        inertia_trace: trace,
    }
}

/// Best-inertia Lloyd run over `restarts` k-means++ initializations. Restart
/// `r` uses a generator seeded from `(seed, r)`, so the result does not depend
/// on whether restarts run in parallel.
pub fn kmeans(points: &DenseMatrix, config: &KMeansConfig) -> Result<ClusterResult> {
    let c = config.clusters;
    if c == 0 || c > points.rows() {
        return Err(Error::config(format!(
            "cluster count {c} must be in 1..={}",
            points.rows()
        )));
    }
    if config.restarts == 0 {
        return Err(Error::config("k-means needs at least one restart"));
    }
    points.check_finite("k-means input")?;
    let runs = par::map_jobs((0..config.restarts as u64).collect(), |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r);
        lloyd(points, c, config.max_iter, &mut rng)
    });
    Ok(runs
        .into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("restarts >= 1"))
}
