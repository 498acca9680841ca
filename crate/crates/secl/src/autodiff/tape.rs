//! Append-only tape of dense matrix operations with reverse-mode gradients.
//!
//! Every value on the tape is a [`DenseMatrix`]; scalars are 1×1. Nodes are
//! recorded in evaluation order, so each node's inputs always precede it and a
//! single reverse sweep visits every node after all of its consumers.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::ModularityOperator;
use crate::linalg::{gemm, CsrMatrix, DenseMatrix};
use crate::par;

/// Added under the square root of row norms so that zero rows stay finite.
pub const ROW_NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Operation kinds the tape understands. Variants carry any constant operand.
#[derive(Clone)]
pub enum OpKind {
    MatMul,
    /// `a · bᵀ`
    MatMulNt,
    /// Constant sparse matrix times a dense input.
    SparseMatMul(Arc<CsrMatrix>),
    /// Elementwise sum; a 1×k right operand is broadcast over rows.
    Add,
    Sub,
    Scale(f64),
    Transpose,
    RowL2Normalize,
    SoftmaxRows,
    Exp,
    Log,
    Mul,
    Square,
    Sum,
    Mean,
    /// `Tr(Uᵀ B U)` with a constant symmetric B.
    TraceQuadratic(Arc<ModularityOperator>),
    /// Diagonal of a square matrix as an N×1 column.
    Diagonal,
    RowLogSumExp,
    Tanh,
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::MatMul => "matmul",
            OpKind::MatMulNt => "matmul_nt",
            OpKind::SparseMatMul(_) => "sparse_matmul",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Scale(_) => "scale",
            OpKind::Transpose => "transpose",
            OpKind::RowL2Normalize => "row_l2_normalize",
            OpKind::SoftmaxRows => "softmax_rows",
            OpKind::Exp => "exp",
            OpKind::Log => "log",
            OpKind::Mul => "mul",
            OpKind::Square => "square",
            OpKind::Sum => "sum",
            OpKind::Mean => "mean",
            OpKind::TraceQuadratic(_) => "trace_quadratic",
            OpKind::Diagonal => "diagonal",
            OpKind::RowLogSumExp => "row_logsumexp",
            OpKind::Tanh => "tanh",
        }
    }

    fn arity(&self) -> usize {
        match self {
            OpKind::MatMul | OpKind::MatMulNt | OpKind::Add | OpKind::Sub | OpKind::Mul => 2,
            _ => 1,
        }
    }
}

impl fmt::Debug for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpKind::Scale(c) => write!(f, "scale({c})"),
            other => f.write_str(other.name()),
        }
    }
}

enum Op {
    Leaf { trainable: bool },
    Apply { kind: OpKind, inputs: Vec<NodeId> },
}

struct Node {
    op: Op,
    value: DenseMatrix,
    /// Forward-pass intermediates needed by the backward rule.
    cache: Option<DenseMatrix>,
    /// Whether any trainable leaf feeds this node.
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    adjoints: Vec<Option<DenseMatrix>>,
    consumed: bool,
}

/// Gradients of a scalar with respect to every trainable leaf.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    grads: Vec<(NodeId, DenseMatrix)>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&DenseMatrix> {
        self.grads.iter().find(|(n, _)| *n == id).map(|(_, g)| g)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &DenseMatrix)> {
        self.grads.iter().map(|(n, g)| (*n, g))
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A leaf whose gradient `backward` reports.
    pub fn param(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Leaf { trainable: true }, value, None)
    }

    /// A leaf treated as a constant.
    pub fn constant(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Leaf { trainable: false }, value, None)
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> Result<f64> {
        self.value(id).item().ok_or_else(|| {
            Error::Contract(format!("node {} is {:?}, not a scalar", id.0, self.value(id).shape()))
        })
    }

    /// Adjoint accumulated for `id` by the last `backward`, if it was reached.
    pub fn adjoint(&self, id: NodeId) -> Option<&DenseMatrix> {
        self.adjoints.get(id.0).and_then(Option::as_ref)
    }

    fn push(&mut self, op: Op, value: DenseMatrix, cache: Option<DenseMatrix>) -> NodeId {
        let needs_grad = match &op {
            Op::Leaf { trainable } => *trainable,
            Op::Apply { inputs, .. } => inputs.iter().any(|i| self.nodes[i.0].needs_grad),
        };
        self.nodes.push(Node {
            op,
            value,
            cache,
            needs_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Records `kind` applied to `inputs`, computing its value immediately.
    pub fn record(&mut self, kind: OpKind, inputs: &[NodeId]) -> Result<NodeId> {
        if self.consumed {
            return Err(Error::Contract("tape already differentiated".into()));
        }
        if inputs.len() != kind.arity() {
            return Err(Error::Contract(format!(
                "{} takes {} inputs, got {}",
                kind.name(),
                kind.arity(),
                inputs.len()
            )));
        }
        if let Some(bad) = inputs.iter().find(|id| id.0 >= self.nodes.len()) {
            return Err(Error::Contract(format!("unknown node {}", bad.0)));
        }
        let (value, cache) = self.forward(&kind, inputs)?;
        Ok(self.push(
            Op::Apply {
                kind,
                inputs: inputs.to_vec(),
            },
            value,
            cache,
        ))
    }

    fn forward(&self, kind: &OpKind, inputs: &[NodeId]) -> Result<(DenseMatrix, Option<DenseMatrix>)> {
        let x = self.value(inputs[0]);
        let y = inputs.get(1).map(|&i| self.value(i));
        let name = kind.name();
        let same_shape = |a: &DenseMatrix, b: &DenseMatrix| {
            if a.shape() == b.shape() {
                Ok(())
            } else {
                Err(Error::shape(name, a.shape(), b.shape()))
            }
        };
        let out = match kind {
            OpKind::MatMul => x.matmul(y.unwrap()).map_err(|_| Error::shape(name, x.shape(), y.unwrap().shape()))?,
            OpKind::MatMulNt => x.matmul_nt(y.unwrap()).map_err(|_| Error::shape(name, x.shape(), y.unwrap().shape()))?,
            OpKind::SparseMatMul(s) => s.matmul(x).map_err(|_| Error::shape(name, s.shape(), x.shape()))?,
            OpKind::Add | OpKind::Sub => {
                let y = y.unwrap();
                let sign = if matches!(kind, OpKind::Add) { 1.0 } else { -1.0 };
                if y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols() {
                    let mut out = x.clone();
                    par::rows_mut(out.as_mut_slice(), x.cols(), |_, row| {
                        for (o, &b) in row.iter_mut().zip(y.as_slice()) {
                            *o += sign * b;
                        }
                    });
                    out
                } else {
                    same_shape(x, y)?;
                    x.zip_map(y, |a, b| a + sign * b)
                }
            }
            OpKind::Scale(c) => x.scale(*c),
            OpKind::Transpose => x.transpose(),
            OpKind::RowL2Normalize => {
                let norms: Vec<f64> = (0..x.rows())
                    .map(|i| (x.row(i).iter().map(|v| v * v).sum::<f64>() + ROW_NORM_EPS).sqrt())
                    .collect();
                let mut out = x.clone();
                par::rows_mut(out.as_mut_slice(), x.cols(), |i, row| {
                    row.iter_mut().for_each(|v| *v /= norms[i]);
                });
                let cache = DenseMatrix::from_raw(norms.len(), 1, norms);
                return Ok((out, Some(cache)));
            }
            OpKind::SoftmaxRows => {
                let mut out = x.clone();
                par::rows_mut(out.as_mut_slice(), x.cols(), |_, row| softmax_in_place(row));
                out
            }
            OpKind::Exp => x.map(f64::exp),
            OpKind::Log => {
                if let Some(p) = x.as_slice().iter().position(|&v| v <= 0.0) {
                    return Err(Error::NonFinite(format!("log of non-positive entry {}", x.as_slice()[p])));
                }
                x.map(f64::ln)
            }
            OpKind::Mul => {
                let y = y.unwrap();
                same_shape(x, y)?;
                x.zip_map(y, |a, b| a * b)
            }
            OpKind::Square => x.map(|v| v * v),
            OpKind::Sum => DenseMatrix::scalar(x.sum()),
            OpKind::Mean => {
                if x.is_empty() {
                    return Err(Error::shape(name, x.shape(), (1, 1)));
                }
                DenseMatrix::scalar(x.sum() / x.len() as f64)
            }
            OpKind::TraceQuadratic(b) => {
                let bu = b.apply(x).map_err(|_| Error::shape(name, (b.n(), b.n()), x.shape()))?;
                let tr = x.as_slice().iter().zip(bu.as_slice()).map(|(u, v)| u * v).sum();
                return Ok((DenseMatrix::scalar(tr), Some(bu)));
            }
            OpKind::Diagonal => {
                if x.rows() != x.cols() {
                    return Err(Error::shape(name, x.shape(), (x.rows(), x.rows())));
                }
                DenseMatrix::from_raw(x.rows(), 1, (0..x.rows()).map(|i| x.get(i, i)).collect())
            }
            OpKind::RowLogSumExp => {
                if x.cols() == 0 {
                    return Err(Error::shape(name, x.shape(), (x.rows(), 1)));
                }
                let lse = par::map_range(x.rows(), x.cols(), |i| logsumexp(x.row(i)));
                DenseMatrix::from_raw(x.rows(), 1, lse)
            }
            OpKind::Tanh => x.map(f64::tanh),
        };
        Ok((out, None))
    }

    /// Reverse sweep from a scalar `loss`. A tape can be differentiated once.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients> {
        if self.consumed {
            return Err(Error::Contract("backward already run on this tape".into()));
        }
        if loss.0 >= self.nodes.len() {
            return Err(Error::Contract(format!("unknown node {}", loss.0)));
        }
        if self.value(loss).shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "loss must be 1x1, got {:?}",
                self.value(loss).shape()
            )));
        }
        self.consumed = true;
        let mut adj: Vec<Option<DenseMatrix>> = vec![None; self.nodes.len()];
        adj[loss.0] = Some(DenseMatrix::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = adj[idx].take() else { continue };
            if let Op::Apply { kind, inputs } = &node.op {
                for (input, contrib) in self.pullback(kind, inputs, node, &g)? {
                    accumulate(&mut adj[input.0], contrib);
                }
            }
            adj[idx] = Some(g);
        }

        let mut grads = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Leaf { trainable: true } = node.op {
                let g = adj[i]
                    .clone()
                    .unwrap_or_else(|| DenseMatrix::zeros(node.value.rows(), node.value.cols()));
                grads.push((NodeId(i), g));
            }
        }
        self.adjoints = adj;
        Ok(Gradients { grads })
    }

    /// Input adjoint contributions of one node given its output adjoint `g`.
    fn pullback(
        &self,
        kind: &OpKind,
        inputs: &[NodeId],
        node: &Node,
        g: &DenseMatrix,
    ) -> Result<Vec<(NodeId, DenseMatrix)>> {
        let x_id = inputs[0];
        let x = self.value(x_id);
        let y = &node.value;
        let want = |id: NodeId| self.nodes[id.0].needs_grad;
        let out = match kind {
            OpKind::MatMul => {
                let b = self.value(inputs[1]);
                let mut out = Vec::with_capacity(2);
                if want(x_id) {
                    out.push((x_id, gemm(g, false, b, true)));
                }
                if want(inputs[1]) {
                    out.push((inputs[1], gemm(x, true, g, false)));
                }
                out
            }
            OpKind::MatMulNt => {
                let b = self.value(inputs[1]);
                let mut out = Vec::with_capacity(2);
                if want(x_id) {
                    out.push((x_id, gemm(g, false, b, false)));
                }
                if want(inputs[1]) {
                    out.push((inputs[1], gemm(g, true, x, false)));
                }
                out
            }
            OpKind::SparseMatMul(s) => vec![(x_id, s.transpose().matmul(g)?)],
            OpKind::Add | OpKind::Sub => {
                let sign = if matches!(kind, OpKind::Add) { 1.0 } else { -1.0 };
                let rhs = self.value(inputs[1]);
                let mut out = Vec::with_capacity(2);
                if want(x_id) {
                    out.push((x_id, g.clone()));
                }
                if !want(inputs[1]) {
                    return Ok(out);
                }
                let g_rhs = if rhs.shape() != g.shape() {
                    // broadcast row: adjoint is the column sums
                    let mut sums = vec![0.0; g.cols()];
                    for i in 0..g.rows() {
                        for (s, &v) in sums.iter_mut().zip(g.row(i)) {
                            *s += v;
                        }
                    }
                    DenseMatrix::from_raw(1, g.cols(), sums).scale(sign)
                } else {
                    g.scale(sign)
                };
                out.push((inputs[1], g_rhs));
                out
            }
            OpKind::Scale(c) => vec![(x_id, g.scale(*c))],
            OpKind::Transpose => vec![(x_id, g.transpose())],
            OpKind::RowL2Normalize => {
                let norms = node.cache.as_ref().expect("norms cached in forward");
                let mut dx = g.clone();
                par::rows_mut(dx.as_mut_slice(), g.cols(), |i, row| {
                    let yi = y.row(i);
                    let dot: f64 = row.iter().zip(yi).map(|(a, b)| a * b).sum();
                    let n = norms.as_slice()[i];
                    for (d, &yv) in row.iter_mut().zip(yi) {
                        *d = (*d - yv * dot) / n;
                    }
                });
                vec![(x_id, dx)]
            }
            OpKind::SoftmaxRows => {
                let mut dx = g.clone();
                par::rows_mut(dx.as_mut_slice(), g.cols(), |i, row| {
                    let yi = y.row(i);
                    let dot: f64 = row.iter().zip(yi).map(|(a, b)| a * b).sum();
                    for (d, &yv) in row.iter_mut().zip(yi) {
                        *d = yv * (*d - dot);
                    }
                });
                vec![(x_id, dx)]
            }
            OpKind::Exp => vec![(x_id, g.zip_map(y, |a, b| a * b))],
            OpKind::Log => vec![(x_id, g.zip_map(x, |a, b| a / b))],
            OpKind::Mul => {
                let b = self.value(inputs[1]);
                let mut out = Vec::with_capacity(2);
                if want(x_id) {
                    out.push((x_id, g.zip_map(b, |a, c| a * c)));
                }
                if want(inputs[1]) {
                    out.push((inputs[1], g.zip_map(x, |a, c| a * c)));
                }
                out
            }
            OpKind::Square => vec![(x_id, g.zip_map(x, |a, v| 2.0 * a * v))],
            OpKind::Sum => {
                let s = g.as_slice()[0];
                vec![(x_id, DenseMatrix::filled(x.rows(), x.cols(), s))]
            }
            OpKind::Mean => {
                let s = g.as_slice()[0] / x.len() as f64;
                vec![(x_id, DenseMatrix::filled(x.rows(), x.cols(), s))]
            }
            OpKind::TraceQuadratic(_) => {
                // d Tr(UᵀBU)/dU = (B + Bᵀ)U = 2BU for symmetric B
                let bu = node.cache.as_ref().expect("BU cached in forward");
                vec![(x_id, bu.scale(2.0 * g.as_slice()[0]))]
            }
            OpKind::Diagonal => {
                let mut dx = DenseMatrix::zeros(x.rows(), x.cols());
                for i in 0..x.rows() {
                    dx.set(i, i, g.as_slice()[i]);
                }
                vec![(x_id, dx)]
            }
            OpKind::RowLogSumExp => {
                let mut dx = x.clone();
                par::rows_mut(dx.as_mut_slice(), x.cols(), |i, row| {
                    softmax_in_place(row);
                    let gi = g.as_slice()[i];
                    row.iter_mut().for_each(|v| *v *= gi);
                });
                vec![(x_id, dx)]
            }
            OpKind::Tanh => vec![(x_id, g.zip_map(y, |a, t| a * (1.0 - t * t)))],
        };
        Ok(out)
    }

    // Convenience wrappers over `record`.

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.record(OpKind::MatMul, &[a, b])
    }

    pub fn matmul_nt(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.record(OpKind::MatMulNt, &[a, b])
    }

    pub fn sparse_matmul(&mut self, s: Arc<CsrMatrix>, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::SparseMatMul(s), &[x])
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.record(OpKind::Add, &[a, b])
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.record(OpKind::Sub, &[a, b])
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> Result<NodeId> {
        self.record(OpKind::Scale(c), &[x])
    }

    pub fn transpose(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Transpose, &[x])
    }

    pub fn row_l2_normalize(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::RowL2Normalize, &[x])
    }

    pub fn softmax_rows(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::SoftmaxRows, &[x])
    }

    pub fn exp(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Exp, &[x])
    }

    pub fn log(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Log, &[x])
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.record(OpKind::Mul, &[a, b])
    }

    pub fn square(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Square, &[x])
    }

    pub fn sum(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Sum, &[x])
    }

    pub fn mean(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Mean, &[x])
    }

    pub fn trace_quadratic(&mut self, u: NodeId, b: Arc<ModularityOperator>) -> Result<NodeId> {
        self.record(OpKind::TraceQuadratic(b), &[u])
    }

    pub fn diagonal(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Diagonal, &[x])
    }

    pub fn row_logsumexp(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::RowLogSumExp, &[x])
    }

    pub fn tanh(&mut self, x: NodeId) -> Result<NodeId> {
        self.record(OpKind::Tanh, &[x])
    }
}

fn accumulate(slot: &mut Option<DenseMatrix>, contrib: DenseMatrix) {
    match slot {
        Some(acc) => acc.axpy(1.0, &contrib),
        None => *slot = Some(contrib),
    }
}

pub(crate) fn logsumexp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    row.iter_mut().for_each(|v| *v /= total);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_shape_and_error() {
        let mut t = Tape::new();
        let a = t.constant(DenseMatrix::zeros(2, 3));
        let b = t.constant(DenseMatrix::zeros(3, 4));
        let c = t.matmul(a, b).unwrap();
        assert_eq!(t.value(c).shape(), (2, 4));
        let err = t.matmul(b, a).unwrap_err();
        assert!(matches!(err, Error::Shape { op: "matmul", lhs: (3, 4), rhs: (2, 3) }));
    }

    #[test]
    fn row_normalize_and_softmax_values() {
        let mut t = Tape::new();
        let x = t.constant(m(&[vec![3.0, 4.0]]));
        let y = t.row_l2_normalize(x).unwrap();
        assert!(t.value(y).max_abs_diff(&m(&[vec![0.6, 0.8]])) < 1e-12);
        let z = t.constant(m(&[vec![0.0, 0.0]]));
        let s = t.softmax_rows(z).unwrap();
        assert_eq!(t.value(s), &m(&[vec![0.5, 0.5]]));
    }

    #[test]
    fn zero_row_normalizes_to_zero() {
        let mut t = Tape::new();
        let x = t.param(DenseMatrix::zeros(1, 3));
        let y = t.row_l2_normalize(x).unwrap();
        let s = t.sum(y).unwrap();
        assert_eq!(t.value(y), &DenseMatrix::zeros(1, 3));
        let g = t.backward(s).unwrap();
        assert!(g.get(x).unwrap().check_finite("grad").is_ok());
    }

    #[test]
    fn sum_of_squares_gradient() {
        let p = m(&[vec![1.0, -2.0], vec![0.5, 3.0]]);
        let mut t = Tape::new();
        let x = t.param(p.clone());
        let sq = t.square(x).unwrap();
        let loss = t.sum(sq).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &p.scale(2.0));
    }

    #[test]
    fn unused_param_gets_zero_gradient() {
        let mut t = Tape::new();
        let x = t.param(DenseMatrix::filled(2, 2, 1.0));
        let unused = t.param(DenseMatrix::filled(3, 1, 5.0));
        let loss = t.sum(x).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(unused).unwrap(), &DenseMatrix::zeros(3, 1));
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn backward_contracts() {
        let mut t = Tape::new();
        let x = t.param(DenseMatrix::filled(2, 2, 1.0));
        assert!(matches!(t.backward(x), Err(Error::Contract(_))));
        let s = t.sum(x).unwrap();
        t.backward(s).unwrap();
        assert!(matches!(t.backward(s), Err(Error::Contract(_))));
        assert!(t.sum(x).is_err());
    }

    #[test]
    fn broadcast_add_gradient_is_column_sum() {
        let mut t = Tape::new();
        let x = t.constant(DenseMatrix::filled(3, 2, 1.0));
        let b = t.param(DenseMatrix::zeros(1, 2));
        let y = t.add(x, b).unwrap();
        let w = t.constant(m(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]));
        let z = t.mul(y, w).unwrap();
        let loss = t.sum(z).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(b).unwrap(), &m(&[vec![9.0, 12.0]]));
    }

    #[test]
    fn logsumexp_is_stable() {
        assert!((logsumexp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-9);
        assert!((logsumexp(&[-1000.0, 0.0]) - 0.0).abs() < 1e-12);
    }
}
