use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adam::{AdamConfig, AdamState};
use crate::autodiff::Tape;
use crate::encoders::{assignment_logits, embed, encode, init_params, smooth_with, EncoderParams};
use crate::error::{Error, Result};
use crate::eval::{kmeans, ClusterResult, KMeansConfig, Metrics};
use crate::graph::{Graph, GraphOperators};
use crate::harness::config::TrainConfig;
use crate::linalg::DenseMatrix;
use crate::losses::{objective, LossBreakdown, SimilarityRoute};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Seed-independent inputs: the graph, its operators and X̂. Built once and
/// shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Arc<Graph>,
    pub ops: GraphOperators,
    pub x_hat: DenseMatrix,
    pub route: SimilarityRoute,
}

impl Prepared {
    pub fn new(config: &TrainConfig, graph: Graph) -> Result<Self> {
        config.validate()?;
        if config.dataset.clusters > graph.n() {
            return Err(Error::config(format!(
                "{} clusters for {} nodes",
                config.dataset.clusters,
                graph.n()
            )));
        }
        let ops = GraphOperators::new(&graph, config.run.dense_cap)?;
        // fail early rather than at the first epoch
        ops.modularity()?;
        let x_hat = smooth_with(&ops.a_hat, graph.attributes(), config.model.r)?;
        let route = if graph.n() <= config.run.similarity_dense_cap {
            SimilarityRoute::Dense
        } else {
            SimilarityRoute::Blockwise
        };
        Ok(Self {
            graph: Arc::new(graph),
            ops,
            x_hat,
            route,
        })
    }
}

/// Derives the K-means seed from a run seed so the two generators never share
/// a stream.
pub fn kmeans_seed(run_seed: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = run_seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reproducibility record of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    pub seed: u64,
    pub losses: Vec<LossBreakdown>,
    pub metrics: Option<Metrics>,
    pub wall_time_s: f64,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: EncoderParams,
    pub h1: DenseMatrix,
    pub h2: DenseMatrix,
    pub clustering: Option<ClusterResult>,
    pub record: RunRecord,
}

/// What the per-epoch hook sees: the epoch (1-based), the losses before the
/// update, and the gradients in [`EncoderParams::tensors`] order.
pub struct EpochView<'a> {
    pub epoch: usize,
    pub losses: &'a LossBreakdown,
    pub gradients: &'a [DenseMatrix],
}

/// Training options that are not part of the experiment definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    /// Run K-means and compute metrics after training.
    pub cluster: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { cluster: true }
    }
}

pub fn train(config: &TrainConfig, prepared: &Prepared, seed: u64) -> Result<TrainOutput> {
    train_with(config, prepared, seed, TrainOptions::default(), |_| Ok(()))
}

/// Full-batch training: one Adam step on every parameter per epoch, then
/// K-means on the final attribute-view embedding.
pub fn train_with(
    config: &TrainConfig,
    prepared: &Prepared,
    seed: u64,
    options: TrainOptions,
    mut hook: impl FnMut(EpochView<'_>) -> Result<()>,
) -> Result<TrainOutput> {
    let started = Instant::now();
    let g = &prepared.graph;
    let ops = &prepared.ops;
    let b = ops.modularity()?.clone();
    let weights = config.weights();
    let dims = config.encoder_dims(g.n(), g.attribute_dim());
    let mut params = init_params(&dims, config.model.activation, seed)?;
    let mut adam = AdamState::new(AdamConfig::new(config.optim.learning_rate), &params.to_vec());
    let mut losses: Vec<LossBreakdown> = Vec::with_capacity(config.optim.epochs);

    let abort = |epoch: usize, what: String, last: Option<&LossBreakdown>| {
        let reason = match last {
            Some(l) => format!("{what}; last finite losses {l:?}"),
            None => what,
        };
        Error::TrainingAborted { epoch, reason }
    };

    for epoch in 1..=config.optim.epochs {
        let mut tape = Tape::new();
        let nodes = encode(&mut tape, &params, &ops.adjacency, &prepared.x_hat)?;
        let logits = assignment_logits(&mut tape, nodes.h2, nodes.head())?;
        let loss = match objective(
            &mut tape,
            nodes.h1,
            nodes.h2,
            logits,
            &ops.a_tilde,
            &b,
            config.loss.tau,
            &weights,
            prepared.route,
        ) {
            Ok(l) => l,
            Err(e @ Error::NonFinite(_)) => return Err(abort(epoch, e.to_string(), losses.last())),
            Err(e) => return Err(e),
        };
        let breakdown = loss.breakdown(&tape, &weights)?;
        if !breakdown.is_finite() {
            return Err(abort(epoch, format!("non-finite losses {breakdown:?}"), losses.last()));
        }
        let grads_by_node = tape.backward(loss.total)?;
        let grads: Vec<DenseMatrix> = nodes
            .params
            .iter()
            .map(|&id| grads_by_node.get(id).cloned().expect("every parameter is a leaf"))
            .collect();
        hook(EpochView {
            epoch,
            losses: &breakdown,
            gradients: &grads,
        })?;

        let mut values = params.to_vec();
        if let Err(e) = adam.step(&mut values, &grads) {
            return Err(match e {
                Error::NonFinite(msg) => abort(epoch, msg, Some(&breakdown)),
                other => other,
            });
        }
        params.assign(&values)?;
        losses.push(breakdown);
        log::debug!(
            "epoch {epoch}: total {:.6} (sl {:.6}, cl {:.6}, m {:.6})",
            breakdown.total,
            breakdown.l_sl,
            breakdown.l_cl,
            breakdown.l_m
        );
    }

    let (h1, h2) = embed(&params, &ops.adjacency, &prepared.x_hat)?;
    let (clustering, metrics) = if options.cluster {
        let km = KMeansConfig {
            clusters: config.dataset.clusters,
            restarts: config.run.kmeans_restarts,
            max_iter: config.run.kmeans_max_iter,
            seed: kmeans_seed(seed),
        };
        let result = kmeans(&h2, &km)?;
        let metrics = Metrics::compute(&result.labels, g.labels(), g, config.run.nmi_norm)?;
        (Some(result), Some(metrics))
    } else {
        (None, None)
    };

    Ok(TrainOutput {
        params,
        h1,
        h2,
        clustering,
        record: RunRecord {
            config: config.clone(),
            seed,
            losses,
            metrics,
            wall_time_s: started.elapsed().as_secs_f64(),
            version: VERSION.into(),
        },
    })
}

/// Seconds for one training run without clustering.
pub fn time_report(config: &TrainConfig, prepared: &Prepared) -> Result<f64> {
    let started = Instant::now();
    train_with(
        config,
        prepared,
        config.run.seed,
        TrainOptions { cluster: false },
        |_| Ok(()),
    )?;
    Ok(started.elapsed().as_secs_f64())
}
