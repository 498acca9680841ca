//! Attributed undirected graphs and the operators derived from them.

mod io;
mod operators;
mod synthetic;

pub use io::{
    load_graph, read_attributes, read_dense_bin, read_edges, read_labels, write_attributes_text,
    write_dense_bin, write_edges, write_labels, EdgeList,
};
pub use operators::{
    degree_vector, modularity_matrix, normalized_adjacency, GraphOperators, ModularityOperator,
    DEFAULT_DENSE_CAP,
};
pub use synthetic::PlantedPartition;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Unweighted undirected graph with node attributes and optional class labels.
///
/// Edges are stored once per undirected pair as `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    attributes: DenseMatrix,
    labels: Option<Vec<usize>>,
    raw_edge_lines: usize,
}

impl Graph {
    /// Validates and canonicalizes. Each pair is symmetrized and duplicates are
    /// collapsed; self-loops and out-of-range endpoints are errors.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: DenseMatrix,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut canon = Vec::new();
        let mut raw = 0;
        for (line, (i, j)) in edges.into_iter().enumerate() {
            raw += 1;
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::Index {
                        index: idx,
                        n,
                        line: line + 1,
                    });
                }
            }
            if i == j {
                return Err(Error::SelfLoop {
                    node: i,
                    line: line + 1,
                });
            }
            canon.push((i.min(j), i.max(j)));
        }
        canon.sort_unstable();
        canon.dedup();
        if attributes.rows() != n {
            return Err(Error::shape("graph attributes", (n, attributes.cols()), attributes.shape()));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::shape("graph labels", (n, 1), (l.len(), 1)));
            }
        }
        Ok(Self {
            n,
            edges: canon,
            attributes,
            labels,
            raw_edge_lines: raw,
        })
    }

    /// Node count N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Undirected edge count m after deduplication.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Number of edge records seen before symmetrization and deduplication.
    pub fn raw_edge_count(&self) -> usize {
        self.raw_edge_lines
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn attributes(&self) -> &DenseMatrix {
        &self.attributes
    }

    pub fn attribute_dim(&self) -> usize {
        self.attributes.cols()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut seen: Vec<usize> = l.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len()
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::shape("graph labels", (self.n, 1), (labels.len(), 1)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Symmetric 0/1 adjacency A without self-loops.
    pub fn adjacency(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.edges.len());
        for &(i, j) in &self.edges {
            t.push((i, j, 1.0));
            t.push((j, i, 1.0));
        }
        CsrMatrix::from_triplets(self.n, self.n, &t).expect("edges validated on construction")
    }

    /// Ã = A + I.
    pub fn adjacency_with_self_loops(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.edges.len() + self.n);
        for &(i, j) in &self.edges {
            t.push((i, j, 1.0));
            t.push((j, i, 1.0));
        }
        t.extend((0..self.n).map(|i| (i, i, 1.0)));
        CsrMatrix::from_triplets(self.n, self.n, &t).expect("edges validated on construction")
    }

    /// Relabels nodes: new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::shape("permutation", (self.n, 1), (perm.len(), 1)));
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= self.n || inverse[old] != usize::MAX {
                return Err(Error::config("not a permutation"));
            }
            inverse[old] = new;
        }
        let edges = self.edges.iter().map(|&(i, j)| (inverse[i], inverse[j]));
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p]).collect());
        Graph::new(self.n, edges, self.attributes.select_rows(perm), labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_and_dedups() {
        let g = Graph::new(3, [(0, 1), (1, 0), (2, 1), (0, 1)], DenseMatrix::zeros(3, 1), None).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.raw_edge_count(), 4);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        let a = g.adjacency();
        assert!(a.is_symmetric(0.0));
        assert_eq!(a.diagonal(), vec![0.0; 3]);
    }

    #[test]
    fn rejects_self_loop_and_bad_index() {
        let x = DenseMatrix::zeros(2, 1);
        assert!(matches!(
            Graph::new(2, [(0, 0)], x.clone(), None),
            Err(Error::SelfLoop { node: 0, line: 1 })
        ));
        assert!(matches!(
            Graph::new(2, [(0, 1), (1, 2)], x.clone(), None),
            Err(Error::Index { index: 2, line: 2, .. })
        ));
        assert!(Graph::new(3, [(0, 1)], x.clone(), None).is_err());
        assert!(Graph::new(2, [(0, 1)], x, Some(vec![0])).is_err());
    }

    #[test]
    fn self_looped_adjacency_adds_identity() {
        let g = Graph::new(3, [(0, 1)], DenseMatrix::zeros(3, 1), None).unwrap();
        let a = g.adjacency().to_dense();
        let at = g.adjacency_with_self_loops().to_dense();
        let diff = at.zip_map(&a, |x, y| x - y);
        assert_eq!(diff, DenseMatrix::identity(3));
    }
}
