//! Laplacian attribute smoothing, the structure and attribute MLPs, and the
//! modularity assignment head.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{NodeId, Tape};
use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, Graph};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// X̂ = Âʳ X by `r` sparse products. `r = 0` returns `x` unchanged.
pub fn smooth_with(a_hat: &CsrMatrix, x: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let mut out = x.clone();
    for _ in 0..r {
        out = a_hat.matmul(&out)?;
    }
    Ok(out)
}

pub fn smooth_attributes(g: &Graph, r: usize) -> Result<DenseMatrix> {
    smooth_with(&normalized_adjacency(g), g.attributes(), r)
}

/// Nonlinearity between hidden layers. The last layer of each MLP is affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// d_in × d_out
    pub weight: DenseMatrix,
    /// 1 × d_out
    pub bias: DenseMatrix,
}

/// Layer widths for both encoders and the number of clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderDims {
    /// Structure encoder input width (node count N).
    pub structure_in: usize,
    /// Attribute encoder input width d.
    pub attribute_in: usize,
    /// Output widths of each structure layer; the last one is d′.
    pub structure_widths: Vec<usize>,
    /// Output widths of each attribute layer; the last one is d′.
    pub attribute_widths: Vec<usize>,
    pub clusters: usize,
}

impl EncoderDims {
    pub fn embedding_dim(&self) -> usize {
        *self.attribute_widths.last().unwrap_or(&0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.structure_in, self.attribute_in, self.clusters]
            .into_iter()
            .chain(self.structure_widths.iter().copied())
            .chain(self.attribute_widths.iter().copied());
        if self.structure_widths.is_empty() || self.attribute_widths.is_empty() {
            return Err(Error::config("each encoder needs at least one layer"));
        }
        if all.into_iter().any(|w| w == 0) {
            return Err(Error::config("layer widths and cluster count must be positive"));
        }
        if self.structure_widths.last() != self.attribute_widths.last() {
            return Err(Error::config(format!(
                "both encoders must end at the same width, got {:?} and {:?}",
                self.structure_widths.last(),
                self.attribute_widths.last()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub structure_layers: Vec<Linear>,
    pub attribute_layers: Vec<Linear>,
    /// d′ × C, no bias.
    pub modularity_head: DenseMatrix,
    pub activation: Activation,
}

fn uniform_layer(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> DenseMatrix {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    DenseMatrix::from_vec(fan_in, fan_out, data).expect("uniform draws are finite")
}

/// Weights uniform in ±1/√fan_in, biases zero. Deterministic in `seed`.
pub fn init_params(dims: &EncoderDims, activation: Activation, seed: u64) -> Result<EncoderParams> {
    dims.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mlp = |input: usize, widths: &[usize]| {
        let mut fan_in = input;
        widths
            .iter()
            .map(|&w| {
                let layer = Linear {
                    weight: uniform_layer(&mut rng, fan_in, w),
                    bias: DenseMatrix::zeros(1, w),
                };
                fan_in = w;
                layer
            })
            .collect::<Vec<_>>()
    };
    let structure_layers = mlp(dims.structure_in, &dims.structure_widths);
    let attribute_layers = mlp(dims.attribute_in, &dims.attribute_widths);
    let modularity_head = uniform_layer(&mut rng, dims.embedding_dim(), dims.clusters);
    Ok(EncoderParams {
        structure_layers,
        attribute_layers,
        modularity_head,
        activation,
    })
}

impl EncoderParams {
    /// Every trainable matrix in a fixed order: structure (w, b)…, attribute
    /// (w, b)…, head.
    pub fn tensors(&self) -> Vec<&DenseMatrix> {
        let mut out = Vec::new();
        for l in self.structure_layers.iter().chain(&self.attribute_layers) {
            out.push(&l.weight);
            out.push(&l.bias);
        }
        out.push(&self.modularity_head);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut out = Vec::new();
        for l in self.structure_layers.iter_mut().chain(self.attribute_layers.iter_mut()) {
            out.push(&mut l.weight);
            out.push(&mut l.bias);
        }
        out.push(&mut self.modularity_head);
        out
    }

    pub fn to_vec(&self) -> Vec<DenseMatrix> {
        self.tensors().into_iter().cloned().collect()
    }

    /// Overwrites every tensor from `values`, which must follow [`Self::tensors`] order.
    pub fn assign(&mut self, values: &[DenseMatrix]) -> Result<()> {
        let mut slots = self.tensors_mut();
        if slots.len() != values.len() {
            return Err(Error::shape("assign params", (slots.len(), 1), (values.len(), 1)));
        }
        for (slot, v) in slots.iter_mut().zip(values) {
            if slot.shape() != v.shape() {
                return Err(Error::shape("assign params", slot.shape(), v.shape()));
            }
            **slot = v.clone();
        }
        Ok(())
    }

    pub fn head_index(&self) -> usize {
        2 * (self.structure_layers.len() + self.attribute_layers.len())
    }

    pub fn embedding_dim(&self) -> usize {
        self.modularity_head.rows()
    }

    pub fn clusters(&self) -> usize {
        self.modularity_head.cols()
    }
}

/// Tape handles produced by [`encode`].
#[derive(Debug, Clone)]
pub struct EncodedNodes {
    /// Parameter leaves in [`EncoderParams::tensors`] order.
    pub params: Vec<NodeId>,
    pub h1: NodeId,
    pub h2: NodeId,
}

impl EncodedNodes {
    pub fn head(&self) -> NodeId {
        *self.params.last().expect("head is always recorded")
    }
}

enum MlpInput {
    Sparse(Arc<CsrMatrix>),
    Dense(NodeId),
}

fn mlp_on_tape(
    tape: &mut Tape,
    input: MlpInput,
    layers: &[(NodeId, NodeId)],
    activation: Activation,
) -> Result<NodeId> {
    let mut h = None;
    for (idx, &(w, b)) in layers.iter().enumerate() {
        let z = match (h, &input) {
            (Some(prev), _) => tape.matmul(prev, w)?,
            (None, MlpInput::Sparse(a)) => tape.sparse_matmul(a.clone(), w)?,
            (None, MlpInput::Dense(x)) => tape.matmul(*x, w)?,
        };
        let mut out = tape.add(z, b)?;
        if idx + 1 < layers.len() && activation == Activation::Tanh {
            out = tape.tanh(out)?;
        }
        h = Some(out);
    }
    h.ok_or_else(|| Error::config("encoder without layers"))
}

/// Records both encoders on `tape` and returns row-normalized H⁽¹⁾ and H⁽²⁾.
/// The structure encoder reads the rows of `adjacency` (A, no self-loops).
pub fn encode(
    tape: &mut Tape,
    params: &EncoderParams,
    adjacency: &Arc<CsrMatrix>,
    x_hat: &DenseMatrix,
) -> Result<EncodedNodes> {
    let first = |layers: &[Linear]| layers.first().map(|l| l.weight.rows()).unwrap_or(0);
    if adjacency.cols() != first(&params.structure_layers) {
        return Err(Error::shape(
            "encode structure input",
            adjacency.shape(),
            params.structure_layers[0].weight.shape(),
        ));
    }
    if x_hat.cols() != first(&params.attribute_layers) || x_hat.rows() != adjacency.rows() {
        return Err(Error::shape(
            "encode attribute input",
            x_hat.shape(),
            params.attribute_layers[0].weight.shape(),
        ));
    }

    let mut ids = Vec::new();
    let mut record = |tape: &mut Tape, layers: &[Linear]| {
        layers
            .iter()
            .map(|l| {
                let w = tape.param(l.weight.clone());
                let b = tape.param(l.bias.clone());
                ids.push(w);
                ids.push(b);
                (w, b)
            })
            .collect::<Vec<_>>()
    };
    let s_layers = record(tape, &params.structure_layers);
    let a_layers = record(tape, &params.attribute_layers);
    ids.push(tape.param(params.modularity_head.clone()));

    // A is never densified: the first structure layer is a sparse-left product
    let h1 = mlp_on_tape(tape, MlpInput::Sparse(adjacency.clone()), &s_layers, params.activation)?;
    let x = tape.constant(x_hat.clone());
    let h2 = mlp_on_tape(tape, MlpInput::Dense(x), &a_layers, params.activation)?;
    Ok(EncodedNodes {
        params: ids,
        h1: tape.row_l2_normalize(h1)?,
        h2: tape.row_l2_normalize(h2)?,
    })
}

/// Logits H⁽²⁾W; the softmax is applied by the modularity loss.
pub fn assignment_logits(tape: &mut Tape, h2: NodeId, head: NodeId) -> Result<NodeId> {
    tape.matmul(h2, head)
}

/// Forward pass only, returning (H⁽¹⁾, H⁽²⁾).
pub fn embed(
    params: &EncoderParams,
    adjacency: &Arc<CsrMatrix>,
    x_hat: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let mut tape = Tape::new();
    let nodes = encode(&mut tape, params, adjacency, x_hat)?;
    Ok((tape.value(nodes.h1).clone(), tape.value(nodes.h2).clone()))
}
