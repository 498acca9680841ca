//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates, one pair per parameter matrix.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
}

impl AdamState {
    /// Zero moments shaped like `params`.
    pub fn new(config: AdamConfig, params: &[DenseMatrix]) -> Self {
        let zeros = |p: &DenseMatrix| DenseMatrix::zeros(p.rows(), p.cols());
        Self {
            config,
            step: 0,
            first: params.iter().map(zeros).collect(),
            second: params.iter().map(zeros).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[DenseMatrix] {
        &self.first
    }

    pub fn second_moments(&self) -> &[DenseMatrix] {
        &self.second
    }

    /// One update of every parameter in place.
    ///
    /// Nothing is modified when a shape disagrees or a gradient entry is not
    /// finite.
    pub fn step(&mut self, params: &mut [DenseMatrix], grads: &[DenseMatrix]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(Error::shape(
                "adam_step",
                (params.len(), self.first.len()),
                (grads.len(), 1),
            ));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || p.shape() != self.first[i].shape() {
                return Err(Error::shape("adam_step", p.shape(), g.shape()));
            }
            g.check_finite(&format!("gradient of parameter {i}"))?;
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for (((w, &gk), mk), vk) in p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *mk = beta1 * *mk + (1.0 - beta1) * gk;
                *vk = beta2 * *vk + (1.0 - beta2) * gk * gk;
                let m_hat = *mk / bc1;
                let v_hat = *vk / bc2;
                *w -= learning_rate * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut params = vec![DenseMatrix::filled(2, 2, 0.3)];
        let before = params.clone();
        let mut state = AdamState::new(AdamConfig::new(0.01), &params);
        for _ in 0..5 {
            state.step(&mut params, &[DenseMatrix::zeros(2, 2)]).unwrap();
        }
        assert_eq!(params, before);
        assert_eq!(state.first_moments()[0], DenseMatrix::zeros(2, 2));
        assert_eq!(state.second_moments()[0], DenseMatrix::zeros(2, 2));
        assert_eq!(state.step_count(), 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate_times_sign() {
        let mut params = vec![DenseMatrix::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap()];
        let grads = [DenseMatrix::from_vec(1, 3, vec![0.5, -3.0, 1e-3]).unwrap()];
        let mut state = AdamState::new(AdamConfig::new(0.001), &params);
        state.step(&mut params, &grads).unwrap();
        for (w, g) in params[0].as_slice().iter().zip(grads[0].as_slice()) {
            let delta = w - 1.0;
            // |g| / (|g| + eps) differs from 1 by at most eps/|g|
            assert!((delta + 0.001 * g.signum()).abs() < 0.001 * 1e-5, "delta {delta}");
        }
    }

    #[test]
    fn minimizes_parabola() {
        let mut params = vec![DenseMatrix::scalar(1.0)];
        let mut state = AdamState::new(AdamConfig::new(0.1), &params);
        for _ in 0..200 {
            let g = params[0].scale(2.0);
            state.step(&mut params, &[g]).unwrap();
        }
        assert!(params[0].as_slice()[0].abs() < 0.01, "{:?}", params[0]);
    }

    #[test]
    fn non_finite_gradient_aborts_without_update() {
        let mut params = vec![DenseMatrix::scalar(1.0)];
        let mut state = AdamState::new(AdamConfig::new(0.1), &params);
        let bad = DenseMatrix::from_raw(1, 1, vec![f64::NAN]);
        assert!(matches!(state.step(&mut params, &[bad]), Err(Error::NonFinite(_))));
        assert_eq!(state.step_count(), 0);
        assert_eq!(params[0].as_slice()[0], 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let mut params = vec![DenseMatrix::zeros(2, 2)];
        let mut state = AdamState::new(AdamConfig::new(0.1), &params);
        assert!(state.step(&mut params, &[DenseMatrix::zeros(2, 1)]).is_err());
    }
}
