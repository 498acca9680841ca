use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::hungarian::max_weight_assignment;

/// Counts of (predicted cluster, true class) pairs over compacted ids.
#[derive(Debug, Clone)]
pub struct Contingency {
    /// `counts[p][t]`
    pub counts: Vec<Vec<usize>>,
    pub pred_ids: Vec<usize>,
    pub truth_ids: Vec<usize>,
    pub n: usize,
}

fn compact(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut ids = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let idx = labels
        .iter()
        .map(|l| ids.binary_search(l).expect("id present"))
        .collect();
    (ids, idx)
}

impl Contingency {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::shape("label vectors", (pred.len(), 1), (truth.len(), 1)));
        }
        let (pred_ids, p) = compact(pred);
        let (truth_ids, t) = compact(truth);
        let mut counts = vec![vec![0; truth_ids.len()]; pred_ids.len()];
        for (&a, &b) in p.iter().zip(&t) {
            counts[a][b] += 1;
        }
        Ok(Self {
            counts,
            pred_ids,
            truth_ids,
            n: pred.len(),
        })
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let mut out = vec![0; self.truth_ids.len()];
        for r in &self.counts {
            for (o, &c) in out.iter_mut().zip(r) {
                *o += c;
            }
        }
        out
    }

    /// Optimal one-to-one cluster→class matching. Entry `p` is the compact
    /// class index for compact cluster `p`, or `None` when the cluster has no
    /// class partner (more clusters than classes).
    pub fn matching(&self) -> Vec<Option<usize>> {
        let k = self.pred_ids.len().max(self.truth_ids.len());
        let weights: Vec<Vec<f64>> = (0..k)
            .map(|p| {
                (0..k)
                    .map(|t| {
                        self.counts
                            .get(p)
                            .and_then(|r| r.get(t))
                            .map_or(0.0, |&c| c as f64)
                    })
                    .collect()
            })
            .collect();
        let assignment = max_weight_assignment(&weights);
        (0..self.pred_ids.len())
            .map(|p| Some(assignment[p]).filter(|&t| t < self.truth_ids.len()))
            .collect()
    }
}

/// Hungarian-matched clustering accuracy.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    if c.n == 0 {
        return Ok(1.0);
    }
    let matched: usize = c
        .matching()
        .iter()
        .enumerate()
        .filter_map(|(p, t)| t.map(|t| c.counts[p][t]))
        .sum();
    Ok(matched as f64 / c.n as f64)
}

/// Denominator of normalized mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNorm {
    /// sqrt(H(pred)·H(truth))
    #[default]
    Geometric,
    /// (H(pred) + H(truth)) / 2
    Arithmetic,
}

fn entropy(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI with natural logarithms. Two single-cluster labelings score 1; if only
/// one side has zero entropy the score is 0.
pub fn nmi_with(pred: &[usize], truth: &[usize], norm: NmiNorm) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    if c.n == 0 {
        return Ok(1.0);
    }
    let hp = entropy(&c.row_sums(), c.n);
    let ht = entropy(&c.col_sums(), c.n);
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    let n = c.n as f64;
    let rows = c.row_sums();
    let cols = c.col_sums();
    let mut mi = 0.0;
    for (p, r) in c.counts.iter().enumerate() {
        for (t, &nij) in r.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[p] as f64 * cols[t] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNorm::Geometric => (hp * ht).sqrt(),
        NmiNorm::Arithmetic => 0.5 * (hp + ht),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    nmi_with(pred, truth, NmiNorm::Geometric)
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index by pair counting. When the expected and maximum index
/// coincide (e.g. both labelings are a single cluster) the score is 1.
pub fn ari(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    let sum_ij: f64 = c.counts.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_a: f64 = c.row_sums().into_iter().map(choose2).sum();
    let sum_b: f64 = c.col_sums().into_iter().map(choose2).sum();
    let total = choose2(c.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    // scaled by `total` so every term is an integer and small cases round once
    let expected = sum_a * sum_b;
    let max = 0.5 * (sum_a + sum_b) * total;
    if max == expected {
        return Ok(1.0);
    }
    Ok((sum_ij * total - expected) / (max - expected))
}

/// `(numerator, denominator)`.
type Fraction = (u128, u128);

/// Per-class F1 after mapping clusters to classes with the accuracy matching,
/// as `(2·tp, predicted + support)` fractions, plus the class supports.
fn per_class_f1(pred: &[usize], truth: &[usize]) -> Result<(Vec<Fraction>, Vec<usize>)> {
    let c = Contingency::new(pred, truth)?;
    let matching = c.matching();
    let k = c.truth_ids.len();
    let mut tp = vec![0usize; k];
    let mut predicted = vec![0usize; k];
    for (p, t) in matching.iter().enumerate() {
        if let Some(t) = *t {
            tp[t] += c.counts[p][t];
            predicted[t] += c.counts[p].iter().sum::<usize>();
        }
    }
    let support = c.col_sums();
    let f1 = (0..k)
        .map(|t| (2 * tp[t] as u128, (predicted[t] + support[t]) as u128))
        .collect();
    Ok((f1, support))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Σ w_k · n_k/d_k / Σ w_k`, summed as an exact fraction while it fits in
/// u128 so the result is correctly rounded. A zero denominator counts as 0.
fn weighted_mean(fractions: &[Fraction], weights: &[u128]) -> f64 {
    let exact = || -> Option<f64> {
        let (mut num, mut den) = (0u128, 1u128);
        for (&(n, d), &w) in fractions.iter().zip(weights) {
            if d == 0 {
                continue;
            }
            let g = gcd(den, d);
            let lhs = num.checked_mul(d / g)?;
            let rhs = n.checked_mul(w)?.checked_mul(den / g)?;
            num = lhs.checked_add(rhs)?;
            den = den.checked_mul(d / g)?;
            let r = gcd(num, den).max(1);
            (num, den) = (num / r, den / r);
        }
        let total: u128 = weights.iter().sum();
        let den = den.checked_mul(total)?;
        let r = gcd(num, den).max(1);
        let (num, den) = (num / r, den / r);
        // both exact in f64, so the quotient rounds once
        (num < 1 << 53 && den < 1 << 53).then(|| num as f64 / den as f64)
    };
    exact().unwrap_or_else(|| {
        let total: u128 = weights.iter().sum();
        fractions
            .iter()
            .zip(weights)
            .filter(|((_, d), _)| *d != 0)
            .map(|(&(n, d), &w)| w as f64 * n as f64 / d as f64)
            .sum::<f64>()
            / total as f64
    })
}

/// Unweighted mean of per-class F1 over the true classes.
pub fn f1_macro(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let (f1, _) = per_class_f1(pred, truth)?;
    if f1.is_empty() {
        return Ok(1.0);
    }
    Ok(weighted_mean(&f1, &vec![1; f1.len()]))
}

/// Support-weighted mean of per-class F1.
pub fn f1_weighted(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let (f1, support) = per_class_f1(pred, truth)?;
    if support.iter().sum::<usize>() == 0 {
        return Ok(1.0);
    }
    let weights: Vec<u128> = support.iter().map(|&s| s as u128).collect();
    Ok(weighted_mean(&f1, &weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRUTH: [usize; 4] = [0, 0, 1, 1];
    const CROSS: [usize; 4] = [0, 1, 0, 1];

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&TRUTH, &TRUTH).unwrap(), 1.0);
        assert_eq!(accuracy(&[5, 5, 2, 2], &TRUTH).unwrap(), 1.0);
        assert_eq!(accuracy(&CROSS, &TRUTH).unwrap(), 0.5);
        assert!(matches!(accuracy(&[0], &TRUTH), Err(Error::Shape { .. })));
    }

    #[test]
    fn nmi_cases() {
        assert!((nmi(&TRUTH, &TRUTH).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&[3, 3, 3, 3], &TRUTH).unwrap(), 0.0);
        assert!(nmi(&CROSS, &TRUTH).unwrap().abs() < 1e-15);
        assert!(nmi(&[0], &[0, 1]).is_err());
        let a = nmi_with(&[0, 0, 1, 2], &TRUTH, NmiNorm::Arithmetic).unwrap();
        let g = nmi_with(&[0, 0, 1, 2], &TRUTH, NmiNorm::Geometric).unwrap();
        assert!(a <= g + 1e-15);
    }

    #[test]
    fn ari_cases() {
        assert_eq!(ari(&TRUTH, &TRUTH).unwrap(), 1.0);
        assert_eq!(ari(&CROSS, &TRUTH).unwrap(), -0.5);
        assert_eq!(ari(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn f1_cases() {
        assert_eq!(f1_macro(&TRUTH, &TRUTH).unwrap(), 1.0);
        assert_eq!(f1_macro(&[0, 0, 1, 0], &TRUTH).unwrap(), 11.0 / 15.0);
        // constant prediction: one class never predicted, its F1 is 0
        let constant = f1_macro(&[0, 0, 0, 0], &TRUTH).unwrap();
        assert!((constant - (2.0 / 3.0) / 2.0).abs() < 1e-15);
        let w = f1_weighted(&[0, 0, 1, 0], &TRUTH).unwrap();
        assert_eq!(w, 11.0 / 15.0);
    }

    #[test]
    fn fraction_mean_rounds_once() {
        assert_eq!(weighted_mean(&[(1, 3), (1, 3), (1, 3)], &[1, 1, 1]), 1.0 / 3.0);
        assert_eq!(weighted_mean(&[(1, 2), (0, 0)], &[3, 1]), 3.0 / 8.0);
        let huge = u128::MAX / 2;
        let got = weighted_mean(&[(1, huge), (1, huge - 1)], &[1, 1]);
        assert!(got > 0.0 && got < 1e-37);
    }

    #[test]
    fn extra_clusters_are_unmatched() {
        let pred = [0, 1, 2, 3];
        let acc = accuracy(&pred, &TRUTH).unwrap();
        assert_eq!(acc, 0.5);
    }
}
