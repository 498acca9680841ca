//! Training objectives: cross-view InfoNCE, structural MSE against Ã, and the
//! softmax-relaxed modularity, combined as `L_SL + λ1·L_CL − λ2·L_M`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::{NodeId, Tape};
use crate::error::{Error, Result};
use crate::graph::ModularityOperator;
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Largest N for which the structural loss materializes the N×N similarity.
pub const DEFAULT_SIMILARITY_DENSE_CAP: usize = 4096;

/// Which loss terms take part in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, Hash)]
pub enum Ablation {
    #[default]
    #[serde(rename = "full")]
    Full,
    /// Drops the modularity term.
    #[serde(rename = "no-M")]
    NoModularity,
    /// Drops the cross-view contrastive term.
    #[serde(rename = "no-CL")]
    NoContrastive,
    /// Drops the structural term.
    #[serde(rename = "no-SL")]
    NoStructural,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::NoModularity,
        Ablation::NoContrastive,
        Ablation::NoStructural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoModularity => "no-M",
            Ablation::NoContrastive => "no-CL",
            Ablation::NoStructural => "no-SL",
        }
    }

    /// (structural, contrastive, modularity) term switches.
    fn switches(self) -> (bool, bool, bool) {
        match self {
            Ablation::Full => (true, true, true),
            Ablation::NoModularity => (true, true, false),
            Ablation::NoContrastive => (true, false, true),
            Ablation::NoStructural => (false, true, true),
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown ablation {s:?} (full, no-M, no-CL, no-SL)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub ablation: Ablation,
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::config(format!(
                "loss weights must be non-negative, got λ1={} λ2={}",
                self.lambda1, self.lambda2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_cl: f64,
    pub l_sl: f64,
    pub l_m: f64,
    pub total: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        [self.l_cl, self.l_sl, self.l_m, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Tape handles for one evaluation of the objective.
#[derive(Debug, Clone, Copy)]
pub struct LossNodes {
    pub l_cl: NodeId,
    pub l_sl: NodeId,
    pub l_m: NodeId,
    pub total: NodeId,
}

impl LossNodes {
    pub fn breakdown(&self, tape: &Tape, weights: &LossWeights) -> Result<LossBreakdown> {
        Ok(LossBreakdown {
            l_cl: tape.scalar(self.l_cl)?,
            l_sl: tape.scalar(self.l_sl)?,
            l_m: tape.scalar(self.l_m)?,
            total: tape.scalar(self.total)?,
            lambda1: weights.lambda1,
            lambda2: weights.lambda2,
        })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::config(format!("temperature must be > 0, got {tau}")));
    }
    Ok(())
}

/// Cross-view InfoNCE from the untempered similarity S = H⁽¹⁾H⁽²⁾ᵀ.
///
/// Row i of S/τ scores view-1 node i against every view-2 node; row i of its
/// transpose scores view-2 node i against view 1. Negatives come only from the
/// opposite view and the positive pair stays in the denominator.
pub fn contrastive_from_similarity(tape: &mut Tape, s: NodeId, tau: f64) -> Result<NodeId> {
    check_tau(tau)?;
    let n = tape.value(s).rows();
    let tempered = tape.scale(s, 1.0 / tau)?;
    let lse_12 = tape.row_logsumexp(tempered)?;
    let flipped = tape.transpose(tempered)?;
    let lse_21 = tape.row_logsumexp(flipped)?;
    let positives = tape.diagonal(tempered)?;
    let both = tape.add(lse_12, lse_21)?;
    let twice_pos = tape.scale(positives, 2.0)?;
    let per_node = tape.sub(both, twice_pos)?;
    let total = tape.sum(per_node)?;
    tape.scale(total, 1.0 / (2.0 * n as f64))
}

pub fn cross_view_contrastive_loss(tape: &mut Tape, h1: NodeId, h2: NodeId, tau: f64) -> Result<NodeId> {
    check_tau(tau)?;
    let s = tape.matmul_nt(h1, h2)?;
    contrastive_from_similarity(tape, s, tau)
}

/// `(1/N²) Σ_ij (S_ij − Ã_ij)²` from a materialized S.
pub fn structural_from_similarity(tape: &mut Tape, s: NodeId, a_tilde: &CsrMatrix) -> Result<NodeId> {
    if tape.value(s).shape() != a_tilde.shape() {
        return Err(Error::shape("structural loss", tape.value(s).shape(), a_tilde.shape()));
    }
    let target = tape.constant(a_tilde.to_dense());
    let diff = tape.sub(s, target)?;
    let sq = tape.square(diff)?;
    tape.mean(sq)
}

/// The same loss without an N×N intermediate:
/// `(1/N²)[⟨H⁽¹⁾ᵀH⁽¹⁾, H⁽²⁾ᵀH⁽²⁾⟩_F − 2 Σ_{(i,j)∈Ã} S_ij + Σ Ã_ij²]`.
pub fn structural_blockwise(
    tape: &mut Tape,
    h1: NodeId,
    h2: NodeId,
    a_tilde: &Arc<CsrMatrix>,
) -> Result<NodeId> {
    let n = tape.value(h1).rows();
    let h1t = tape.transpose(h1)?;
    let h2t = tape.transpose(h2)?;
    let gram1 = tape.matmul(h1t, h1)?;
    let gram2 = tape.matmul(h2t, h2)?;
    let grams = tape.mul(gram1, gram2)?;
    let s_sq = tape.sum(grams)?;
    let a_h2 = tape.sparse_matmul(a_tilde.clone(), h2)?;
    let prod = tape.mul(h1, a_h2)?;
    let on_edges = tape.sum(prod)?;
    let twice = tape.scale(on_edges, 2.0)?;
    let a_sq: f64 = a_tilde.iter().map(|(_, _, v)| v * v).sum();
    let a_sq = tape.constant(DenseMatrix::scalar(a_sq));
    let partial = tape.sub(s_sq, twice)?;
    let raw = tape.add(partial, a_sq)?;
    tape.scale(raw, 1.0 / (n as f64 * n as f64))
}

/// Structural loss, dense when `N <= dense_cap`.
pub fn structural_contrastive_loss(
    tape: &mut Tape,
    h1: NodeId,
    h2: NodeId,
    a_tilde: &Arc<CsrMatrix>,
    dense_cap: usize,
) -> Result<NodeId> {
    if tape.value(h1).rows() <= dense_cap {
        let s = tape.matmul_nt(h1, h2)?;
        structural_from_similarity(tape, s, a_tilde)
    } else {
        structural_blockwise(tape, h1, h2, a_tilde)
    }
}

/// `(1/2m) Tr(Ũᵀ B Ũ)` with `Ũ = softmax_rows(logits)`.
pub fn modularity_loss(tape: &mut Tape, logits: NodeId, b: &Arc<ModularityOperator>) -> Result<NodeId> {
    tape.value(logits).check_finite("assignment logits")?;
    if tape.value(logits).rows() != b.n() {
        return Err(Error::shape(
            "modularity loss",
            tape.value(logits).shape(),
            (b.n(), b.n()),
        ));
    }
    let u = tape.softmax_rows(logits)?;
    let tr = tape.trace_quadratic(u, b.clone())?;
    tape.scale(tr, 1.0 / b.two_m())
}

/// `L_SL + λ1·L_CL − λ2·L_M` with ablated terms removed.
pub fn total_loss(
    tape: &mut Tape,
    l_cl: NodeId,
    l_sl: NodeId,
    l_m: NodeId,
    weights: &LossWeights,
) -> Result<NodeId> {
    weights.validate()?;
    let (use_sl, use_cl, use_m) = weights.ablation.switches();
    let mut terms = Vec::new();
    if use_sl {
        terms.push(l_sl);
    }
    if use_cl {
        terms.push(tape.scale(l_cl, weights.lambda1)?);
    }
    if use_m {
        terms.push(tape.scale(l_m, -weights.lambda2)?);
    }
    let mut acc = terms[0];
    for &t in &terms[1..] {
        acc = tape.add(acc, t)?;
    }
    Ok(acc)
}

/// Structural-loss evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityRoute {
    Dense,
    Blockwise,
}

/// Records the full objective for normalized embeddings `h1`, `h2` and logits.
/// When dense, one S = H⁽¹⁾H⁽²⁾ᵀ product feeds both the structural loss and,
/// scaled by 1/τ, the contrastive loss.
#[allow(clippy::too_many_arguments)]
pub fn objective(
    tape: &mut Tape,
    h1: NodeId,
    h2: NodeId,
    logits: NodeId,
    a_tilde: &Arc<CsrMatrix>,
    b: &Arc<ModularityOperator>,
    tau: f64,
    weights: &LossWeights,
    route: SimilarityRoute,
) -> Result<LossNodes> {
    let s = tape.matmul_nt(h1, h2)?;
    let l_cl = contrastive_from_similarity(tape, s, tau)?;
    let l_sl = match route {
        SimilarityRoute::Dense => structural_from_similarity(tape, s, a_tilde)?,
        SimilarityRoute::Blockwise => structural_blockwise(tape, h1, h2, a_tilde)?,
    };
    let l_m = modularity_loss(tape, logits, b)?;
    let total = total_loss(tape, l_cl, l_sl, l_m, weights)?;
    Ok(LossNodes {
        l_cl,
        l_sl,
        l_m,
        total,
    })
}
