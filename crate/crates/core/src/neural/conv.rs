//! Stride-1 2-D convolution over [H, W, C] feature maps, lowered to GEMM via
//! im2col. Same-padding zero-pads symmetrically so the spatial size is
//! preserved; valid convolution yields (H-k+1) x (W-k+1).

use rayon::prelude::*;

use super::tensor::{Scalar, Tensor};
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Same,
    Valid,
}

/// Convolution layer with kernels stored as a [k*k*Cin, Cout] matrix
/// (kernel row, kernel col, input channel varying fastest to slowest along
/// the first axis) and one bias per output channel.
#[derive(Debug, Clone)]
pub struct Conv2d<S: Scalar> {
    pub kernel: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub padding: Padding,
    pub weights: Tensor<S>,
    pub bias: Tensor<S>,
    pub grad_weights: Tensor<S>,
    pub grad_bias: Tensor<S>,
    cached_inputs: Vec<Tensor<S>>,
}

impl<S: Scalar> Conv2d<S> {
    pub fn new(kernel: usize, in_channels: usize, out_channels: usize, padding: Padding) -> Conv2d<S> {
        let fan = kernel * kernel * in_channels;
        Conv2d {
            kernel,
            in_channels,
            out_channels,
            padding,
            weights: Tensor::zeros(&[fan, out_channels]),
            bias: Tensor::zeros(&[out_channels]),
            grad_weights: Tensor::zeros(&[fan, out_channels]),
            grad_bias: Tensor::zeros(&[out_channels]),
            cached_inputs: Vec::new(),
        }
    }

    /// Trainable parameter count: kernels plus biases.
    pub fn param_count(&self) -> usize {
        self.weights.numel() + self.bias.numel()
    }

    fn out_dims(&self, h: usize, w: usize) -> Result<(usize, usize), NeuralError> {
        match self.padding {
            Padding::Same => Ok((h, w)),
            Padding::Valid => {
                if self.kernel > h || self.kernel > w {
                    return Err(NeuralError::Shape(format!(
                        "kernel {} exceeds input {}x{} for valid convolution",
                        self.kernel, h, w
                    )));
                }
                Ok((h - self.kernel + 1, w - self.kernel + 1))
            }
        }
    }

    fn pad_before(&self) -> isize {
        match self.padding {
            Padding::Same => ((self.kernel - 1) / 2) as isize,
            Padding::Valid => 0,
        }
    }

    fn check_input(&self, x: &Tensor<S>) -> Result<(usize, usize), NeuralError> {
        let (h, w, c) = x.dims3();
        if c != self.in_channels {
            return Err(NeuralError::Shape(format!(
                "expected {} input channels, got {}",
                self.in_channels, c
            )));
        }
        self.out_dims(h, w)
    }

    /// Lower one input into the [oh*ow, k*k*cin] patch matrix.
    fn im2col(&self, x: &Tensor<S>, oh: usize, ow: usize, col: &mut [S]) {
        let (h, w, cin) = x.dims3();
        let k = self.kernel;
        let pad = self.pad_before();
        let patch = k * k * cin;
        debug_assert_eq!(col.len(), oh * ow * patch);
        col.iter_mut().for_each(|v| *v = S::ZERO);
        for oy in 0..oh {
            for ky in 0..k {
                let iy = oy as isize + ky as isize - pad;
                if iy < 0 || iy >= h as isize {
                    continue;
                }
                let iy = iy as usize;
                for ox in 0..ow {
                    let row = (oy * ow + ox) * patch;
                    for kx in 0..k {
                        let ix = ox as isize + kx as isize - pad;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let src = (iy * w + ix as usize) * cin;
                        let dst = row + (ky * k + kx) * cin;
                        col[dst..dst + cin].copy_from_slice(&x.data[src..src + cin]);
                    }
                }
            }
        }
    }

    /// Scatter-add a [oh*ow, k*k*cin] gradient back onto the input layout.
    fn col2im(&self, dcol: &[S], h: usize, w: usize, oh: usize, ow: usize, dx: &mut [S]) {
        let k = self.kernel;
        let cin = self.in_channels;
        let pad = self.pad_before();
        let patch = k * k * cin;
        for oy in 0..oh {
            for ky in 0..k {
                let iy = oy as isize + ky as isize - pad;
                if iy < 0 || iy >= h as isize {
                    continue;
                }
                let iy = iy as usize;
                for ox in 0..ow {
                    let row = (oy * ow + ox) * patch;
                    for kx in 0..k {
                        let ix = ox as isize + kx as isize - pad;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let dst = (iy * w + ix as usize) * cin;
                        let src = row + (ky * k + kx) * cin;
                        for c in 0..cin {
                            dx[dst + c] += dcol[src + c];
                        }
                    }
                }
            }
        }
    }

    /// Forward one sample without caching (inference path, shareable).
    pub fn forward_one(&self, x: &Tensor<S>) -> Result<Tensor<S>, NeuralError> {
        let (h, w, _) = x.dims3();
        let (oh, ow) = self.check_input(x)?;
        let patch = self.kernel * self.kernel * self.in_channels;
        let mut col = vec![S::ZERO; oh * ow * patch];
        self.im2col(x, oh, ow, &mut col);
        let mut out = Tensor::zeros(&[oh, ow, self.out_channels]);
        S::gemm(
            oh * ow,
            patch,
            self.out_channels,
            &col,
            patch as isize,
            1,
            &self.weights.data,
            self.out_channels as isize,
            1,
            S::ZERO,
            &mut out.data,
        );
        let z = self.out_channels;
        for row in out.data.chunks_exact_mut(z) {
            for (o, b) in row.iter_mut().zip(&self.bias.data) {
                *o += *b;
            }
        }
        let _ = (h, w);
        Ok(out)
    }

    /// Forward a batch, caching inputs for the backward pass.
    pub fn forward_batch(&mut self, xs: &[Tensor<S>]) -> Result<Vec<Tensor<S>>, NeuralError> {
        let ys: Result<Vec<_>, _> = xs.par_iter().map(|x| self.forward_one(x)).collect();
        self.cached_inputs = xs.to_vec();
        ys
    }

    /// Backward a batch: accumulates weight/bias gradients (averaged over the
    /// batch upstream is the caller's concern; this sums raw contributions)
    /// and returns input gradients unless `need_input_grad` is false.
    pub fn backward_batch(
        &mut self,
        gys: &[Tensor<S>],
        need_input_grad: bool,
    ) -> Result<Vec<Tensor<S>>, NeuralError> {
        let xs = std::mem::take(&mut self.cached_inputs);
        assert_eq!(xs.len(), gys.len(), "backward batch size mismatch");
        let patch = self.kernel * self.kernel * self.in_channels;
        let z = self.out_channels;

        struct PerSample<S: Scalar> {
            dw: Vec<S>,
            db: Vec<S>,
            dx: Option<Tensor<S>>,
        }

        let parts: Vec<PerSample<S>> = xs
            .par_iter()
            .zip(gys.par_iter())
            .map(|(x, gy)| {
                let (h, w, _) = x.dims3();
                let (oh, ow, gz) = gy.dims3();
                debug_assert_eq!(gz, z);
                let mut col = vec![S::ZERO; oh * ow * patch];
                self.im2col(x, oh, ow, &mut col);

                // dW = col^T (patch x rows) * gy (rows x z)
                let mut dw = vec![S::ZERO; patch * z];
                S::gemm(
                    patch,
                    oh * ow,
                    z,
                    &col,
                    1,
                    patch as isize,
                    &gy.data,
                    z as isize,
                    1,
                    S::ZERO,
                    &mut dw,
                );

                let mut db = vec![S::ZERO; z];
                for row in gy.data.chunks_exact(z) {
                    for (d, g) in db.iter_mut().zip(row) {
                        *d += *g;
                    }
                }

                let dx = if need_input_grad {
                    // dcol = gy (rows x z) * W^T (z x patch)
                    let mut dcol = vec![S::ZERO; oh * ow * patch];
                    S::gemm(
                        oh * ow,
                        z,
                        patch,
                        &gy.data,
                        z as isize,
                        1,
                        &self.weights.data,
                        1,
                        z as isize,
                        S::ZERO,
                        &mut dcol,
                    );
                    let mut dx = Tensor::zeros(&x.shape);
                    self.col2im(&dcol, h, w, oh, ow, &mut dx.data);
                    Some(dx)
                } else {
                    None
                };
                PerSample { dw, db, dx }
            })
            .collect();

        // Deterministic accumulation in sample order.
        let mut dxs = Vec::with_capacity(if need_input_grad { parts.len() } else { 0 });
        for part in parts {
            for (acc, d) in self.grad_weights.data.iter_mut().zip(&part.dw) {
                *acc += *d;
            }
            for (acc, d) in self.grad_bias.data.iter_mut().zip(&part.db) {
                *acc += *d;
            }
            if let Some(dx) = part.dx {
                dxs.push(dx);
            }
        }
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
    fn hand_convolution_valid() {
        // 3x3 input, 2x2 kernel [[1,0],[0,1]], valid, bias 0.
        let x = Tensor::from_vec(&[3, 3, 1], (1..=9).map(|v| v as f64).collect());
        let mut conv = Conv2d::<f64>::new(2, 1, 1, Padding::Valid);
        conv.weights.data = vec![1.0, 0.0, 0.0, 1.0];
        let y = conv.forward_one(&x).unwrap();
        assert_eq!(y.shape, vec![2, 2, 1]);
        assert_eq!(y.data, vec![6.0, 8.0, 12.0, 14.0]);
    }

    #[test]
    fn delta_kernel_same_padding_is_identity() {
        let x = Tensor::from_vec(&[4, 5, 1], (0..20).map(|v| v as f64 * 0.3 - 2.0).collect());
        let mut conv = Conv2d::<f64>::new(3, 1, 1, Padding::Same);
        // 3x3 delta kernel: center tap 1.
        conv.weights.data[(1 * 3 + 1) * 1] = 1.0;
        let y = conv.forward_one(&x).unwrap();
        assert_eq!(y.data, x.data);
    }

    #[test]
    fn table_layer_one_shape_and_params() {
        let conv = Conv2d::<f32>::new(3, 2, 32, Padding::Same);
        assert_eq!(conv.param_count(), 608);
        let x = Tensor::zeros(&[120, 120, 2]);
        let y = conv.forward_one(&x).unwrap();
        assert_eq!(y.shape, vec![120, 120, 32]);
    }

    #[test]
    fn valid_shape_law() {
        for (h, w, k) in [(8usize, 8usize, 3usize), (10, 7, 4), (5, 5, 5)] {
            let conv = Conv2d::<f64>::new(k, 2, 3, Padding::Valid);
            let x = Tensor::zeros(&[h, w, 2]);
            let y = conv.forward_one(&x).unwrap();
            assert_eq!(y.shape, vec![h - k + 1, w - k + 1, 3]);
        }
    }

    #[test]
    fn rejects_kernel_larger_than_valid_input() {
        let conv = Conv2d::<f64>::new(4, 1, 1, Padding::Valid);
        let x = Tensor::zeros(&[3, 3, 1]);
        assert!(conv.forward_one(&x).is_err());
    }

    #[test]
    fn rejects_channel_mismatch() {
        let conv = Conv2d::<f64>::new(3, 2, 4, Padding::Same);
        let x = Tensor::zeros(&[6, 6, 3]);
        assert!(conv.forward_one(&x).is_err());
    }
}
