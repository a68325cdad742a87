//! Fully-connected layer over rank-1 feature vectors.

use rayon::prelude::*;

use super::tensor::{Scalar, Tensor};
use super::NeuralError;

/// Affine map y = x W + b with W stored [in, out] row-major.
#[derive(Debug, Clone)]
pub struct Dense<S: Scalar> {
    pub in_features: usize,
    pub out_features: usize,
    pub weights: Tensor<S>,
    pub bias: Tensor<S>,
    pub grad_weights: Tensor<S>,
    pub grad_bias: Tensor<S>,
    cached_inputs: Vec<Tensor<S>>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(in_features: usize, out_features: usize) -> Dense<S> {
        Dense {
            in_features,
            out_features,
            weights: Tensor::zeros(&[in_features, out_features]),
            bias: Tensor::zeros(&[out_features]),
            grad_weights: Tensor::zeros(&[in_features, out_features]),
            grad_bias: Tensor::zeros(&[out_features]),
            cached_inputs: Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.numel() + self.bias.numel()
    }

    fn check(&self, x: &Tensor<S>) -> Result<(), NeuralError> {
        if x.shape.len() != 1 || x.shape[0] != self.in_features {
            return Err(NeuralError::Shape(format!(
                "dense expects a [{}] vector, got {:?}",
                self.in_features, x.shape
            )));
        }
        Ok(())
    }

    pub fn forward_one(&self, x: &Tensor<S>) -> Result<Tensor<S>, NeuralError> {
        self.check(x)?;
        let mut y = Tensor::zeros(&[self.out_features]);
        y.data.copy_from_slice(&self.bias.data);
        for (i, &xi) in x.data.iter().enumerate() {
            let row = &self.weights.data[i * self.out_features..(i + 1) * self.out_features];
            for (yo, &w) in y.data.iter_mut().zip(row) {
                *yo += xi * w;
            }
        }
        Ok(y)
    }

    pub fn forward_batch(&mut self, xs: &[Tensor<S>]) -> Result<Vec<Tensor<S>>, NeuralError> {
        let ys: Result<Vec<_>, _> = xs.par_iter().map(|x| self.forward_one(x)).collect();
        self.cached_inputs = xs.to_vec();
        ys
    }

    pub fn backward_batch(&mut self, gys: &[Tensor<S>]) -> Result<Vec<Tensor<S>>, NeuralError> {
        let xs = std::mem::take(&mut self.cached_inputs);
        assert_eq!(xs.len(), gys.len(), "backward batch size mismatch");
        for (x, gy) in xs.iter().zip(gys) {
            for (i, &xi) in x.data.iter().enumerate() {
                let row =
                    &mut self.grad_weights.data[i * self.out_features..(i + 1) * self.out_features];
                for (dw, &g) in row.iter_mut().zip(&gy.data) {
                    *dw += xi * g;
                }
            }
            for (db, &g) in self.grad_bias.data.iter_mut().zip(&gy.data) {
                *db += g;
            }
        }
        let dxs = xs
            .par_iter()
            .zip(gys.par_iter())
            .map(|(x, gy)| {
                let mut dx = Tensor::zeros(&x.shape);
                for (i, dxi) in dx.data.iter_mut().enumerate() {
                    let row =
                        &self.weights.data[i * self.out_features..(i + 1) * self.out_features];
                    *dxi = row.iter().zip(&gy.data).map(|(&w, &g)| w * g).sum();
                }
                dx
            })
            .collect();
        Ok(dxs)
    }

    pub fn zero_grad(&mut self) {
        self.grad_weights.data.iter_mut().for_each(|v| *v = S::ZERO);
        self.grad_bias.data.iter_mut().for_each(|v| *v = S::ZERO);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_dense_param_count() {
        let d = Dense::<f32>::new(2688, 5);
        assert_eq!(d.param_count(), 13_445);
    }

    #[test]
    fn identity_weights_pass_input_through() {
        let mut d = Dense::<f64>::new(5, 5);
        for i in 0..5 {
            d.weights.data[i * 5 + i] = 1.0;
        }
        let x = Tensor::from_vec(&[5], vec![1.0, -2.0, 3.0, 0.5, 0.0]);
        assert_eq!(d.forward_one(&x).unwrap().data, x.data);
    }

    #[test]
    fn zero_weights_yield_bias() {
        let mut d = Dense::<f64>::new(3, 2);
        d.bias.data = vec![0.25, -1.5];
        let x = Tensor::from_vec(&[3], vec![9.0, 9.0, 9.0]);
        assert_eq!(d.forward_one(&x).unwrap().data, vec![0.25, -1.5]);
    }

    #[test]
    fn rejects_wrong_input_length() {
        let d = Dense::<f64>::new(3, 2);
        let x = Tensor::from_vec(&[4], vec![0.0; 4]);
        assert!(d.forward_one(&x).is_err());
    }
}
