#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secl::harness::TrainConfig;
use secl::{DenseMatrix, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with uniform attributes in [-1, 1], always with at least
/// one edge.
pub fn random_graph(n: usize, p: f64, d: usize, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1));
    }
    let x = DenseMatrix::from_fn(n, d, |_, _| r.random_range(-1.0..1.0));
    Graph::new(n, edges, x, None).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_labels(n: usize, c: usize, seed: u64) -> Vec<usize> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(0..c)).collect()
}

/// Small config for synthetic graphs; dataset paths are placeholders.
pub fn small_config(clusters: usize, widths: &[usize], epochs: usize) -> TrainConfig {
    let w = format!("{widths:?}");
    TrainConfig::from_toml(&format!(
        r#"
[dataset]
name = "synthetic"
edges = "edges.txt"
attributes = "features.txt"
labels = "labels.txt"
clusters = {clusters}
[model]
r = 2
structure_widths = {w}
attribute_widths = {w}
[loss]
tau = 0.5
lambda1 = 0.1
lambda2 = 1.0
[optim]
learning_rate = 0.01
epochs = {epochs}
[run]
runs = 2
kmeans_restarts = 3
"#
    ))
    .unwrap()
}

/// Dense Â built entry by entry.
pub fn dense_a_hat(g: &Graph) -> DenseMatrix {
    let n = g.n();
    let mut a = DenseMatrix::identity(n);
    for &(i, j) in g.edges() {
        a.set(i, j, 1.0);
        a.set(j, i, 1.0);
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    DenseMatrix::from_fn(n, n, |i, j| a.get(i, j) / (d[i] * d[j]).sqrt())
}

/// Q by summing (A_ij − k_i k_j / 2m)·δ(c_i, c_j) over all ordered pairs.
pub fn pair_counting_modularity(g: &Graph, labels: &[usize]) -> f64 {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j) in g.edges() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Q in the Σ_c [e_c/m − (deg_c/2m)²] form.
pub fn community_form_modularity(g: &Graph, labels: &[usize]) -> f64 {
    let c = labels.iter().max().map_or(0, |&x| x + 1);
    let m = g.m() as f64;
    let mut inside = vec![0.0; c];
    let mut degree = vec![0.0; c];
    for &(i, j) in g.edges() {
        degree[labels[i]] += 1.0;
        degree[labels[j]] += 1.0;
        if labels[i] == labels[j] {
            inside[labels[i]] += 1.0;
        }
    }
    (0..c)
        .map(|k| inside[k] / m - (degree[k] / (2.0 * m)).powi(2))
        .sum()
}

/// Best cluster→class accuracy over every injective mapping, by enumeration.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let kp = pred.iter().max().map_or(0, |&x| x + 1);
    let kt = truth.iter().max().map_or(0, |&x| x + 1);
    let k = kp.max(kt);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits = pred.iter().zip(truth).filter(|(a, b)| p[**a] == **b).count();
        best = best.max(hits);
    });
    best as f64 / pred.len() as f64
}

pub fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

pub mod grad {
    use std::sync::Arc;

    use secl::autodiff::{finite_difference_grad, Tape};
    use secl::encoders::{assignment_logits, encode, init_params, smooth_with, EncoderDims, EncoderParams};
    use secl::graph::GraphOperators;
    use secl::losses::{
        cross_view_contrastive_loss, modularity_loss, objective, structural_blockwise, LossWeights,
        SimilarityRoute,
    };
    use secl::{DenseMatrix, Graph, Result};

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Which {
        Contrastive,
        StructuralDense,
        StructuralBlockwise,
        Modularity,
        Total,
    }

    pub const ALL: [Which; 5] = [
        Which::Contrastive,
        Which::StructuralDense,
        Which::StructuralBlockwise,
        Which::Modularity,
        Which::Total,
    ];

    pub struct Problem {
        pub ops: GraphOperators,
        pub x_hat: DenseMatrix,
        pub params: EncoderParams,
        pub tau: f64,
        pub weights: LossWeights,
    }

    impl Problem {
        pub fn new(g: &Graph, widths: &[usize], clusters: usize, tau: f64, weights: LossWeights, seed: u64) -> Self {
            let ops = GraphOperators::new(g, usize::MAX).unwrap();
            let x_hat = smooth_with(&ops.a_hat, g.attributes(), 2).unwrap();
            let dims = EncoderDims {
                structure_in: g.n(),
                attribute_in: g.attribute_dim(),
                structure_widths: widths.to_vec(),
                attribute_widths: widths.to_vec(),
                clusters,
            };
            let mut params = init_params(&dims, Default::default(), seed).unwrap();
            // zero biases leave an isolated node's embedding row at exactly 0,
            // where the normalization is too curved for finite differences
            let mut r = super::rng(seed ^ 0xB1A5);
            for layer in params.structure_layers.iter_mut().chain(params.attribute_layers.iter_mut()) {
                for b in layer.bias.as_mut_slice() {
                    *b = rand::Rng::random_range(&mut r, -0.5..0.5);
                }
            }
            Self {
                ops,
                x_hat,
                params,
                tau,
                weights,
            }
        }

        /// Loss value and, when `grads`, its tape gradient per parameter.
        pub fn eval(&self, which: Which, values: &[DenseMatrix], grads: bool) -> Result<(f64, Vec<DenseMatrix>)> {
            let mut params = self.params.clone();
            params.assign(values)?;
            let mut tape = Tape::new();
            let nodes = encode(&mut tape, &params, &self.ops.adjacency, &self.x_hat)?;
            let logits = assignment_logits(&mut tape, nodes.h2, nodes.head())?;
            let b = self.ops.modularity()?.clone();
            let a_tilde: &Arc<_> = &self.ops.a_tilde;
            let loss = match which {
                Which::Contrastive => cross_view_contrastive_loss(&mut tape, nodes.h1, nodes.h2, self.tau)?,
                Which::StructuralDense => {
                    let s = tape.matmul_nt(nodes.h1, nodes.h2)?;
                    secl::losses::structural_from_similarity(&mut tape, s, a_tilde)?
                }
                Which::StructuralBlockwise => structural_blockwise(&mut tape, nodes.h1, nodes.h2, a_tilde)?,
                Which::Modularity => modularity_loss(&mut tape, logits, &b)?,
                Which::Total => {
                    objective(
                        &mut tape,
                        nodes.h1,
                        nodes.h2,
                        logits,
                        a_tilde,
                        &b,
                        self.tau,
                        &self.weights,
                        SimilarityRoute::Dense,
                    )?
                    .total
                }
            };
            let value = tape.scalar(loss)?;
            if !grads {
                return Ok((value, Vec::new()));
            }
            let g = tape.backward(loss)?;
            let out = nodes.params.iter().map(|&id| g.get(id).unwrap().clone()).collect();
            Ok((value, out))
        }
    }

    /// Outcome of comparing tape and finite-difference gradients.
    #[derive(Debug, Default, Clone, Copy)]
    pub struct Check {
        pub compared: usize,
        pub worst_rel: f64,
    }

    impl Check {
        pub fn merge(self, o: Check) -> Check {
            Check {
                compared: self.compared + o.compared,
                worst_rel: self.worst_rel.max(o.worst_rel),
            }
        }
    }

    /// Central differences with step `h`; entries with |analytic| ≤ floor are skipped.
    pub fn check(problem: &Problem, which: Which, h: f64, floor: f64) -> Check {
        let values = problem.params.to_vec();
        let (_, analytic) = problem.eval(which, &values, true).unwrap();
        let numeric = finite_difference_grad(|p| Ok(problem.eval(which, p, false)?.0), &values, h).unwrap();
        let mut c = Check::default();
        for (a, f) in analytic.iter().zip(&numeric) {
            for (&x, &y) in a.as_slice().iter().zip(f.as_slice()) {
                if x.abs() > floor {
                    let rel = (x - y).abs() / x.abs().max(y.abs());
                    c.compared += 1;
                    c.worst_rel = c.worst_rel.max(rel);
                }
            }
        }
        c
    }
}
