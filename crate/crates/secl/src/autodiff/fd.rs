use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` with respect to every entry of every
/// matrix in `params`: `(f(θ + h·e_k) − f(θ − h·e_k)) / 2h`.
///
/// Costs two evaluations of `f` per scalar parameter.
pub fn finite_difference_grad<F>(f: F, params: &[DenseMatrix], h: f64) -> Result<Vec<DenseMatrix>>
where
    F: Fn(&[DenseMatrix]) -> Result<f64>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::config(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut work: Vec<DenseMatrix> = params.to_vec();
    let mut grads = Vec::with_capacity(params.len());
    for p in 0..params.len() {
        let mut g = DenseMatrix::zeros(params[p].rows(), params[p].cols());
        for k in 0..params[p].len() {
            let orig = work[p].as_slice()[k];
            work[p].as_mut_slice()[k] = orig + h;
            let plus = f(&work)?;
            work[p].as_mut_slice()[k] = orig - h;
            let minus = f(&work)?;
            work[p].as_mut_slice()[k] = orig;
            g.as_mut_slice()[k] = (plus - minus) / (2.0 * h);
        }
        grads.push(g);
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let g = finite_difference_grad(
            |p| Ok(p[0].as_slice()[0].powi(2)),
            &[DenseMatrix::scalar(3.0)],
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!((g[0].as_slice()[0] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let params = [DenseMatrix::filled(2, 3, 0.7), DenseMatrix::scalar(-1.0)];
        let g = finite_difference_grad(|_| Ok(4.2), &params, DEFAULT_FD_STEP).unwrap();
        assert!(g.iter().flat_map(|m| m.as_slice()).all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(finite_difference_grad(|_| Ok(0.0), &[], 0.0).is_err());
    }
}
