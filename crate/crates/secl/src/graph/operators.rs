use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Largest N for which the modularity matrix is materialized densely.
pub const DEFAULT_DENSE_CAP: usize = 10_000;

/// Degree k_i of every node in A (self-loops excluded).
pub fn degree_vector(g: &Graph) -> Vec<f64> {
    let mut k = vec![0.0; g.n()];
    for &(i, j) in g.edges() {
        k[i] += 1.0;
        k[j] += 1.0;
    }
    k
}

/// Â = D̃^{-1/2} (A + I) D̃^{-1/2}.
pub fn normalized_adjacency(g: &Graph) -> CsrMatrix {
    let a_tilde = g.adjacency_with_self_loops();
    // every d̃_i ≥ 1 because of the self-loop; one sqrt per entry keeps
    // equal-degree weights exact
    let d: Vec<f64> = degree_vector(g).iter().map(|&k| k + 1.0).collect();
    let triplets: Vec<(usize, usize, f64)> = a_tilde
        .iter()
        .map(|(i, j, v)| (i, j, v / (d[i] * d[j]).sqrt()))
        .collect();
    CsrMatrix::from_triplets(g.n(), g.n(), &triplets).expect("indices come from a valid matrix")
}

/// Dense B with B_ij = A_ij − k_i k_j / 2m.
pub fn modularity_matrix(g: &Graph) -> Result<DenseMatrix> {
    if g.m() == 0 {
        return Err(Error::Degenerate("modularity is undefined without edges".into()));
    }
    let k = degree_vector(g);
    let two_m = 2.0 * g.m() as f64;
    let mut b = DenseMatrix::from_fn(g.n(), g.n(), |i, j| -k[i] * k[j] / two_m);
    for &(i, j) in g.edges() {
        b.set(i, j, b.get(i, j) + 1.0);
        b.set(j, i, b.get(j, i) + 1.0);
    }
    Ok(b)
}

/// The modularity matrix either held densely or as the factors (A, k, 2m).
#[derive(Debug, Clone)]
pub enum ModularityOperator {
    Dense { b: DenseMatrix, two_m: f64 },
    Factored {
        adjacency: Arc<CsrMatrix>,
        degrees: Vec<f64>,
        two_m: f64,
    },
}

impl ModularityOperator {
    pub fn dense(g: &Graph) -> Result<Self> {
        Ok(Self::Dense {
            b: modularity_matrix(g)?,
            two_m: 2.0 * g.m() as f64,
        })
    }

    pub fn factored(g: &Graph) -> Result<Self> {
        if g.m() == 0 {
            return Err(Error::Degenerate("modularity is undefined without edges".into()));
        }
        Ok(Self::Factored {
            adjacency: Arc::new(g.adjacency()),
            degrees: degree_vector(g),
            two_m: 2.0 * g.m() as f64,
        })
    }

    /// Dense when `N <= dense_cap`, factored otherwise.
    pub fn for_graph(g: &Graph, dense_cap: usize) -> Result<Self> {
        if g.n() <= dense_cap {
            Self::dense(g)
        } else {
            Self::factored(g)
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Dense { b, .. } => b.rows(),
            Self::Factored { degrees, .. } => degrees.len(),
        }
    }

    pub fn two_m(&self) -> f64 {
        match self {
            Self::Dense { two_m, .. } | Self::Factored { two_m, .. } => *two_m,
        }
    }

    pub fn is_factored(&self) -> bool {
        matches!(self, Self::Factored { .. })
    }

    /// B · U. The factored path costs O(m·C + N·C).
    pub fn apply(&self, u: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Self::Dense { b, .. } => b.matmul(u),
            Self::Factored {
                adjacency,
                degrees,
                two_m,
            } => {
                if u.rows() != degrees.len() {
                    return Err(Error::shape("modularity apply", (degrees.len(), degrees.len()), u.shape()));
                }
                let mut out = adjacency.matmul(u)?;
                // kᵀU, accumulated in row order
                let mut ktu = vec![0.0; u.cols()];
                for (i, &k) in degrees.iter().enumerate() {
                    for (acc, &v) in ktu.iter_mut().zip(u.row(i)) {
                        *acc += k * v;
                    }
                }
                for (i, &k) in degrees.iter().enumerate() {
                    let c = k / two_m;
                    for (o, &t) in out.row_mut(i).iter_mut().zip(&ktu) {
                        *o -= c * t;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Tr(Uᵀ B U).
    pub fn quadratic_trace(&self, u: &DenseMatrix) -> Result<f64> {
        let bu = self.apply(u)?;
        Ok(u.as_slice().iter().zip(bu.as_slice()).map(|(a, b)| a * b).sum())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Self::Dense { b, .. } => b.clone(),
            Self::Factored {
                adjacency,
                degrees,
                two_m,
            } => {
                let n = degrees.len();
                let mut b = DenseMatrix::from_fn(n, n, |i, j| -degrees[i] * degrees[j] / two_m);
                for (i, j, v) in adjacency.iter() {
                    b.set(i, j, b.get(i, j) + v);
                }
                b
            }
        }
    }
}

/// Every graph-derived constant a training run needs. Built once per graph and
/// shared read-only across runs.
#[derive(Debug, Clone)]
pub struct GraphOperators {
    pub adjacency: Arc<CsrMatrix>,
    pub a_tilde: Arc<CsrMatrix>,
    pub a_hat: Arc<CsrMatrix>,
    pub degrees: Vec<f64>,
    pub m: usize,
    modularity: Option<Arc<ModularityOperator>>,
}

impl GraphOperators {
    pub fn new(g: &Graph, dense_cap: usize) -> Result<Self> {
        let modularity = if g.m() == 0 {
            None
        } else {
            Some(Arc::new(ModularityOperator::for_graph(g, dense_cap)?))
        };
        Ok(Self {
            adjacency: Arc::new(g.adjacency()),
            a_tilde: Arc::new(g.adjacency_with_self_loops()),
            a_hat: Arc::new(normalized_adjacency(g)),
            degrees: degree_vector(g),
            m: g.m(),
            modularity,
        })
    }

    /// The modularity operator, or a degenerate-graph error when m = 0.
    pub fn modularity(&self) -> Result<&Arc<ModularityOperator>> {
        self.modularity
            .as_ref()
            .ok_or_else(|| Error::Degenerate("modularity is undefined without edges".into()))
    }
}
