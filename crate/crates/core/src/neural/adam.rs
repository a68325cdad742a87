//! Adaptive moment estimation over a fixed, ordered collection of parameter
//! tensors.

use super::tensor::Scalar;
use super::NeuralError;

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> AdamParams {
        AdamParams {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment buffers per parameter tensor plus the shared step
/// counter.
#[derive(Debug, Clone)]
pub struct AdamState<S: Scalar> {
    pub params: AdamParams,
    pub t: u64,
    moments: Vec<(Vec<S>, Vec<S>)>,
}

impl<S: Scalar> AdamState<S> {
    /// `sizes` fixes the tensor layout; every `step` call must present the
    /// same slices in the same order.
    pub fn new(params: AdamParams, sizes: &[usize]) -> AdamState<S> {
        AdamState {
            params,
            t: 0,
            moments: sizes
                .iter()
                .map(|&n| (vec![S::ZERO; n], vec![S::ZERO; n]))
                .collect(),
        }
    }

    /// One update: m and v track the gradient and its square, bias-corrected
    /// estimates drive theta <- theta - alpha * m_hat / (sqrt(v_hat) + eps).
    pub fn step(
        &mut self,
        tensors: &mut [(&mut [S], &[S])],
    ) -> Result<(), NeuralError> {
        if tensors.len() != self.moments.len() {
            return Err(NeuralError::Shape(format!(
                "optimizer tracks {} tensors, got {}",
                self.moments.len(),
                tensors.len()
            )));
        }
        self.t += 1;
        let b1 = S::from_f64(self.params.beta1);
        let b2 = S::from_f64(self.params.beta2);
        let one = S::ONE;
        let bias1 = S::from_f64(1.0 - self.params.beta1.powi(self.t as i32));
        let bias2 = S::from_f64(1.0 - self.params.beta2.powi(self.t as i32));
        let alpha = S::from_f64(self.params.alpha);
        let eps = S::from_f64(self.params.eps);

        for ((theta, grad), (m, v)) in tensors.iter_mut().zip(self.moments.iter_mut()) {
            if theta.len() != grad.len() || theta.len() != m.len() {
                return Err(NeuralError::Shape(
                    "parameter/gradient/moment sizes disagree".into(),
                ));
            }
            for i in 0..theta.len() {
                let g = grad[i];
                m[i] = b1 * m[i] + (one - b1) * g;
                v[i] = b2 * v[i] + (one - b2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                theta[i] = theta[i] - alpha * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut state = AdamState::<f64>::new(AdamParams::default(), &[3]);
        let mut theta = vec![1.0, -2.0, 0.5];
        let grad = vec![0.0; 3];
        state.step(&mut [(&mut theta, &grad)]).unwrap();
        assert_eq!(theta, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_closed_form() {
        // Fresh state, scalar gradient 1: update = -alpha / (1 + eps).
        let mut state = AdamState::<f64>::new(AdamParams::default(), &[1]);
        let mut theta = vec![0.0];
        let grad = vec![1.0];
        state.step(&mut [(&mut theta, &grad)]).unwrap();
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((theta[0] - expected).abs() < 1e-15, "theta {}", theta[0]);
    }

    #[test]
    fn constant_gradient_keeps_mhat_at_g() {
        let mut state = AdamState::<f64>::new(AdamParams::default(), &[1]);
        let mut theta = vec![0.0];
        let grad = vec![2.0];
        state.step(&mut [(&mut theta, &grad)]).unwrap();
        assert_eq!(state.t, 1);
        let after_one = theta[0];
        state.step(&mut [(&mut theta, &grad)]).unwrap();
        assert_eq!(state.t, 2);
        // With constant g, each bias-corrected m_hat equals g, so both steps
        // move by nearly alpha.
        let step1 = -after_one;
        let step2 = after_one - theta[0];
        assert!((step1 - 1e-3).abs() < 1e-9);
        assert!((step2 - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn rejects_layout_mismatch() {
        let mut state = AdamState::<f64>::new(AdamParams::default(), &[2]);
        let mut theta = vec![0.0; 3];
        let grad = vec![0.0; 3];
        assert!(state.step(&mut [(&mut theta, &grad)]).is_err());
    }
}
