//! Elementwise and normalization layers: ReLU, batch normalization (train
//! statistics over the mini-batch, running statistics at inference), 2x2 max
//! pooling, and inverted dropout.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tensor::{Scalar, Tensor};
use super::{Mode, NeuralError};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

/// max(0, x). The gradient passes only where the input was strictly positive.
#[derive(Debug, Clone, Default)]
pub struct Relu {
    cached_outputs_positive: Vec<Vec<bool>>,
}

impl Relu {
    pub fn new() -> Relu {
        Relu::default()
    }

    pub fn forward_one<S: Scalar>(&self, x: &Tensor<S>) -> Tensor<S> {
        Tensor {
            shape: x.shape.clone(),
            data: x.data.iter().map(|&v| v.max(S::ZERO)).collect(),
        }
    }

    pub fn forward_batch<S: Scalar>(&mut self, xs: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let ys: Vec<Tensor<S>> = xs.par_iter().map(|x| self.forward_one(x)).collect();
        self.cached_outputs_positive = xs
            .iter()
            .map(|x| x.data.iter().map(|&v| v > S::ZERO).collect())
            .collect();
        ys
    }

    pub fn backward_batch<S: Scalar>(&mut self, gys: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let masks = std::mem::take(&mut self.cached_outputs_positive);
        gys.par_iter()
            .zip(masks.par_iter())
            .map(|(gy, mask)| Tensor {
                shape: gy.shape.clone(),
                data: gy
                    .data
                    .iter()
                    .zip(mask)
                    .map(|(&g, &m)| if m { g } else { S::ZERO })
                    .collect(),
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Batch normalization
// ---------------------------------------------------------------------------

/// Per-channel standardization over (batch, H, W) with learned scale/shift.
/// Running statistics are tracked with momentum 0.9 and used at inference,
/// which is what lets single samples of any spatial size pass through.
#[derive(Debug, Clone)]
pub struct BatchNorm<S: Scalar> {
    pub channels: usize,
    pub eps: f64,
    pub momentum: f64,
    pub gamma: Tensor<S>,
    pub beta: Tensor<S>,
    pub grad_gamma: Tensor<S>,
    pub grad_beta: Tensor<S>,
    pub running_mean: Tensor<S>,
    pub running_var: Tensor<S>,
    cached_xhat: Vec<Tensor<S>>,
    cached_inv_std: Vec<S>,
    cached_m: usize,
}

impl<S: Scalar> BatchNorm<S> {
    pub fn new(channels: usize, eps: f64, momentum: f64) -> BatchNorm<S> {
        let mut gamma = Tensor::zeros(&[channels]);
        gamma.data.iter_mut().for_each(|v| *v = S::ONE);
        let mut running_var = Tensor::zeros(&[channels]);
        running_var.data.iter_mut().for_each(|v| *v = S::ONE);
        BatchNorm {
            channels,
            eps,
            momentum,
            gamma,
            beta: Tensor::zeros(&[channels]),
            grad_gamma: Tensor::zeros(&[channels]),
            grad_beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var,
            cached_xhat: Vec::new(),
            cached_inv_std: Vec::new(),
            cached_m: 0,
        }
    }

    /// Reported complexity matches the conventional 4-per-channel count
    /// (scale, shift, running mean, running variance).
    pub fn param_count(&self) -> usize {
        4 * self.channels
    }

    fn check_channels(&self, x: &Tensor<S>) -> Result<(), NeuralError> {
        let c = *x.shape.last().expect("non-scalar tensor");
        if c != self.channels {
            return Err(NeuralError::Shape(format!(
                "batch norm over {} channels got {c}",
                self.channels
            )));
        }
        Ok(())
    }

    pub fn forward_batch(
        &mut self,
        xs: &[Tensor<S>],
        mode: Mode,
    ) -> Result<Vec<Tensor<S>>, NeuralError> {
        match mode {
            Mode::Infer => {
                for x in xs {
                    self.check_channels(x)?;
                }
                Ok(xs.par_iter().map(|x| self.forward_infer_one(x)).collect())
            }
            Mode::Train => self.forward_train(xs),
        }
    }

    fn forward_infer_one(&self, x: &Tensor<S>) -> Tensor<S> {
        let c = self.channels;
        let mut y = Tensor::zeros(&x.shape);
        let scale: Vec<S> = (0..c)
            .map(|i| {
                self.gamma.data[i]
                    * (S::ONE / (self.running_var.data[i] + S::from_f64(self.eps)).sqrt())
            })
            .collect();
        for (yrow, xrow) in y.data.chunks_exact_mut(c).zip(x.data.chunks_exact(c)) {
            for i in 0..c {
                yrow[i] = scale[i] * (xrow[i] - self.running_mean.data[i]) + self.beta.data[i];
            }
        }
        y
    }

    /// Inference on a single sample (read-only, shareable across threads).
    pub fn forward_one(&self, x: &Tensor<S>) -> Result<Tensor<S>, NeuralError> {
        self.check_channels(x)?;
        Ok(self.forward_infer_one(x))
    }

    fn forward_train(&mut self, xs: &[Tensor<S>]) -> Result<Vec<Tensor<S>>, NeuralError> {
        if xs.len() < 2 {
            return Err(NeuralError::InvalidBatch);
        }
        let c = self.channels;
        for x in xs {
            self.check_channels(x)?;
            if x.shape != xs[0].shape {
                return Err(NeuralError::Shape(
                    "batch norm training requires uniform shapes".into(),
                ));
            }
        }
        let per_sample = xs[0].numel() / c;
        let m = xs.len() * per_sample;
        let m_s = S::from_f64(m as f64);

        // Per-sample channel sums, reduced in sample order.
        let partials: Vec<(Vec<S>, Vec<S>)> = xs
            .par_iter()
            .map(|x| {
                let mut sum = vec![S::ZERO; c];
                let mut sumsq = vec![S::ZERO; c];
                for row in x.data.chunks_exact(c) {
                    for i in 0..c {
                        sum[i] += row[i];
                        sumsq[i] += row[i] * row[i];
                    }
                }
                (sum, sumsq)
            })
            .collect();
        let mut sum = vec![S::ZERO; c];
        let mut sumsq = vec![S::ZERO; c];
        for (ps, pq) in partials {
            for i in 0..c {
                sum[i] += ps[i];
                sumsq[i] += pq[i];
            }
        }

        let mean: Vec<S> = sum.iter().map(|&s| s / m_s).collect();
        let var: Vec<S> = sumsq
            .iter()
            .zip(&mean)
            .map(|(&sq, &mu)| {
                let v = sq / m_s - mu * mu;
                v.max(S::ZERO) // guard the tiny negatives of cancellation
            })
            .collect();
        let inv_std: Vec<S> = var
            .iter()
            .map(|&v| S::ONE / (v + S::from_f64(self.eps)).sqrt())
            .collect();

        let mom = S::from_f64(self.momentum);
        let one_minus = S::ONE - mom;
        for i in 0..c {
            self.running_mean.data[i] = mom * self.running_mean.data[i] + one_minus * mean[i];
            self.running_var.data[i] = mom * self.running_var.data[i] + one_minus * var[i];
        }

        let xhats: Vec<Tensor<S>> = xs
            .par_iter()
            .map(|x| {
                let mut xh = Tensor::zeros(&x.shape);
                for (hrow, xrow) in xh.data.chunks_exact_mut(c).zip(x.data.chunks_exact(c)) {
                    for i in 0..c {
                        hrow[i] = (xrow[i] - mean[i]) * inv_std[i];
                    }
                }
                xh
            })
            .collect();
        let ys: Vec<Tensor<S>> = xhats
            .par_iter()
            .map(|xh| {
                let mut y = Tensor::zeros(&xh.shape);
                for (yrow, hrow) in y.data.chunks_exact_mut(c).zip(xh.data.chunks_exact(c)) {
                    for i in 0..c {
                        yrow[i] = self.gamma.data[i] * hrow[i] + self.beta.data[i];
                    }
                }
                y
            })
            .collect();

        self.cached_xhat = xhats;
        self.cached_inv_std = inv_std;
        self.cached_m = m;
        Ok(ys)
    }

    pub fn backward_batch(&mut self, gys: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let xhats = std::mem::take(&mut self.cached_xhat);
        assert_eq!(xhats.len(), gys.len(), "backward batch size mismatch");
        let c = self.channels;
        let m = self.cached_m;
        let m_s = S::from_f64(m as f64);

        let partials: Vec<(Vec<S>, Vec<S>)> = gys
            .par_iter()
            .zip(xhats.par_iter())
            .map(|(gy, xh)| {
                let mut dbeta = vec![S::ZERO; c];
                let mut dgamma = vec![S::ZERO; c];
                for (grow, hrow) in gy.data.chunks_exact(c).zip(xh.data.chunks_exact(c)) {
                    for i in 0..c {
                        dbeta[i] += grow[i];
                        dgamma[i] += grow[i] * hrow[i];
                    }
                }
                (dbeta, dgamma)
            })
            .collect();
        let mut dbeta = vec![S::ZERO; c];
        let mut dgamma = vec![S::ZERO; c];
        for (pb, pg) in partials {
            for i in 0..c {
                dbeta[i] += pb[i];
                dgamma[i] += pg[i];
            }
        }
        for i in 0..c {
            self.grad_beta.data[i] += dbeta[i];
            self.grad_gamma.data[i] += dgamma[i];
        }

        // dx = gamma * inv_std / M * (M*gy - dbeta - xhat * dgamma)
        let coeff: Vec<S> = (0..c)
            .map(|i| self.gamma.data[i] * self.cached_inv_std[i] / m_s)
            .collect();
        gys.par_iter()
            .zip(xhats.par_iter())
            .map(|(gy, xh)| {
                let mut dx = Tensor::zeros(&gy.shape);
                for ((drow, grow), hrow) in dx
                    .data
                    .chunks_exact_mut(c)
                    .zip(gy.data.chunks_exact(c))
                    .zip(xh.data.chunks_exact(c))
                {
                    for i in 0..c {
                        dx_row_write(drow, i, coeff[i], m_s, grow[i], dbeta[i], hrow[i], dgamma[i]);
                    }
                }
                dx
            })
            .collect()
    }

    pub fn zero_grad(&mut self) {
        self.grad_gamma.data.iter_mut().for_each(|v| *v = S::ZERO);
        self.grad_beta.data.iter_mut().for_each(|v| *v = S::ZERO);
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn dx_row_write<S: Scalar>(
    drow: &mut [S],
    i: usize,
    coeff: S,
    m: S,
    gy: S,
    dbeta: S,
    xhat: S,
    dgamma: S,
) {
    drow[i] = coeff * (m * gy - dbeta - xhat * dgamma);
}

// ---------------------------------------------------------------------------
// 2x2 max pooling
// ---------------------------------------------------------------------------

/// 2x2/stride-2 max pooling. Odd spatial sizes are handled as if padded with
/// negative infinity on the right/bottom, so the output is ceil(H/2) x
/// ceil(W/2). The backward pass routes each upstream gradient to the
/// first-encountered argmax of its window (row-major order).
#[derive(Debug, Clone, Default)]
pub struct MaxPool2x2 {
    cached_argmax: Vec<Vec<u32>>,
    cached_in_shapes: Vec<Vec<usize>>,
}

impl MaxPool2x2 {
    pub fn new() -> MaxPool2x2 {
        MaxPool2x2::default()
    }

    pub fn out_spatial(n: usize) -> usize {
        n.div_ceil(2)
    }

    fn pool_one<S: Scalar>(x: &Tensor<S>) -> (Tensor<S>, Vec<u32>) {
        let (h, w, c) = x.dims3();
        let (oh, ow) = (Self::out_spatial(h), Self::out_spatial(w));
        let mut y = Tensor::zeros(&[oh, ow, c]);
        let mut argmax = vec![0u32; oh * ow * c];
        for oy in 0..oh {
            for ox in 0..ow {
                for ch in 0..c {
                    let mut best: Option<(S, usize)> = None;
                    for dy in 0..2usize {
                        let iy = oy * 2 + dy;
                        if iy >= h {
                            continue;
                        }
                        for dx in 0..2usize {
                            let ix = ox * 2 + dx;
                            if ix >= w {
                                continue;
                            }
                            let idx = (iy * w + ix) * c + ch;
                            let v = x.data[idx];
                            // Strict > keeps the first (row-major) maximum.
                            if best.map_or(true, |(bv, _)| v > bv) {
                                best = Some((v, idx));
                            }
                        }
                    }
                    let (v, idx) = best.expect("window has at least one cell");
                    let out_idx = (oy * ow + ox) * c + ch;
                    y.data[out_idx] = v;
                    argmax[out_idx] = idx as u32;
                }
            }
        }
        (y, argmax)
    }

    pub fn forward_one<S: Scalar>(&self, x: &Tensor<S>) -> Tensor<S> {
        Self::pool_one(x).0
    }

    pub fn forward_batch<S: Scalar>(&mut self, xs: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let pooled: Vec<(Tensor<S>, Vec<u32>)> = xs.par_iter().map(|x| Self::pool_one(x)).collect();
        self.cached_in_shapes = xs.iter().map(|x| x.shape.clone()).collect();
        let mut ys = Vec::with_capacity(pooled.len());
        self.cached_argmax.clear();
        for (y, a) in pooled {
            ys.push(y);
            self.cached_argmax.push(a);
        }
        ys
    }

    pub fn backward_batch<S: Scalar>(&mut self, gys: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let argmax = std::mem::take(&mut self.cached_argmax);
        let shapes = std::mem::take(&mut self.cached_in_shapes);
        gys.par_iter()
            .zip(argmax.par_iter())
            .zip(shapes.par_iter())
            .map(|((gy, am), shape)| {
                let mut dx = Tensor::zeros(shape);
                for (g, &idx) in gy.data.iter().zip(am) {
                    dx.data[idx as usize] += *g;
                }
                dx
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

/// Inverted dropout: units are zeroed with probability `rate` during
/// training and survivors are scaled by 1/(1-rate); inference is the
/// identity. Masks are derived from (seed, step, sample index), so results
/// do not depend on thread scheduling.
#[derive(Debug, Clone)]
pub struct Dropout {
    pub rate: f64,
    seed: u64,
    step: u64,
    cached_masks: Vec<Vec<bool>>,
}

impl Dropout {
    pub fn new(rate: f64, seed: u64) -> Result<Dropout, NeuralError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(NeuralError::InvalidParameter(format!(
                "dropout rate must be in [0, 1), got {rate}"
            )));
        }
        Ok(Dropout {
            rate,
            seed,
            step: 0,
            cached_masks: Vec::new(),
        })
    }

    fn mask_seed(&self, sample: usize) -> u64 {
        self.seed
            ^ self.step.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (sample as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
    }

    pub fn forward_batch<S: Scalar>(&mut self, xs: &[Tensor<S>], mode: Mode) -> Vec<Tensor<S>> {
        if mode == Mode::Infer || self.rate == 0.0 {
            self.cached_masks = Vec::new();
            return xs.to_vec();
        }
        self.step += 1;
        let scale = S::from_f64(1.0 / (1.0 - self.rate));
        let masked: Vec<(Tensor<S>, Vec<bool>)> = xs
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.mask_seed(i));
                let mask: Vec<bool> = (0..x.numel()).map(|_| rng.gen::<f64>() >= self.rate).collect();
                let data: Vec<S> = x
                    .data
                    .iter()
                    .zip(&mask)
                    .map(|(&v, &keep)| if keep { v * scale } else { S::ZERO })
                    .collect();
                (
                    Tensor {
                        shape: x.shape.clone(),
                        data,
                    },
                    mask,
                )
            })
            .collect();
        let mut ys = Vec::with_capacity(masked.len());
        self.cached_masks.clear();
        for (y, m) in masked {
            ys.push(y);
            self.cached_masks.push(m);
        }
        ys
    }

    pub fn backward_batch<S: Scalar>(&mut self, gys: &[Tensor<S>]) -> Vec<Tensor<S>> {
        if self.cached_masks.is_empty() {
            return gys.to_vec();
        }
        let masks = std::mem::take(&mut self.cached_masks);
        let scale = S::from_f64(1.0 / (1.0 - self.rate));
        gys.par_iter()
            .zip(masks.par_iter())
            .map(|(gy, mask)| Tensor {
                shape: gy.shape.clone(),
                data: gy
                    .data
                    .iter()
                    .zip(mask)
                    .map(|(&g, &keep)| if keep { g * scale } else { S::ZERO })
                    .collect(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_definition() {
        let relu = Relu::new();
        let x = Tensor::from_vec(&[3], vec![-1.0, 0.0, 2.0]);
        assert_eq!(relu.forward_one(&x).data, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn relu_dead_region_blocks_gradient() {
        let mut relu = Relu::new();
        let x = Tensor::from_vec(&[2, 1, 1], vec![-3.0, -0.5]);
        let _ = relu.forward_batch(std::slice::from_ref(&x));
        let gy = Tensor::from_vec(&[2, 1, 1], vec![1.0, 1.0]);
        let dx = relu.backward_batch(std::slice::from_ref(&gy));
        assert_eq!(dx[0].data, vec![0.0, 0.0]);
    }

    #[test]
    fn relu_linear_region_passes_gradient() {
        let mut relu = Relu::new();
        let x = Tensor::from_vec(&[1], vec![3.0]);
        let _ = relu.forward_batch(std::slice::from_ref(&x));
        let gy = Tensor::from_vec(&[1], vec![1.0]);
        assert_eq!(relu.backward_batch(std::slice::from_ref(&gy))[0].data, vec![1.0]);
    }

    #[test]
    fn batchnorm_standardizes_in_train_mode() {
        let mut bn = BatchNorm::<f64>::new(2, 1e-5, 0.9);
        let xs: Vec<Tensor<f64>> = (0..4)
            .map(|i| {
                Tensor::from_vec(
                    &[2, 2, 2],
                    (0..8).map(|j| ((i * 13 + j * 7) % 11) as f64 - 3.0).collect(),
                )
            })
            .collect();
        let ys = bn.forward_batch(&xs, Mode::Train).unwrap();
        for ch in 0..2usize {
            let vals: Vec<f64> = ys
                .iter()
                .flat_map(|y| y.data.iter().skip(ch).step_by(2).copied().collect::<Vec<_>>())
                .collect();
            let n = vals.len() as f64;
            let mean: f64 = vals.iter().sum::<f64>() / n;
            let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-6, "mean {mean}");
            assert!((var - 1.0).abs() < 1e-3, "var {var}");
        }
    }

    #[test]
    fn batchnorm_constant_channel_maps_to_zero() {
        let mut bn = BatchNorm::<f64>::new(1, 1e-5, 0.9);
        let xs: Vec<Tensor<f64>> = (0..3).map(|_| Tensor::from_vec(&[2, 1, 1], vec![5.0, 5.0])).collect();
        let ys = bn.forward_batch(&xs, Mode::Train).unwrap();
        for y in ys {
            assert!(y.data.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn batchnorm_infer_reads_running_stats() {
        let mut bn = BatchNorm::<f64>::new(1, 0.0, 0.9);
        bn.gamma.data[0] = 2.0;
        bn.beta.data[0] = 1.0;
        bn.running_mean.data[0] = 0.0;
        bn.running_var.data[0] = 1.0;
        let x = Tensor::from_vec(&[1, 1, 1], vec![3.0]);
        let y = bn.forward_one(&x).unwrap();
        assert!((y.data[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn batchnorm_rejects_batch_of_one_in_train() {
        let mut bn = BatchNorm::<f64>::new(1, 1e-5, 0.9);
        let x = Tensor::from_vec(&[1, 1, 1], vec![3.0]);
        assert!(matches!(
            bn.forward_batch(std::slice::from_ref(&x), Mode::Train),
            Err(NeuralError::InvalidBatch)
        ));
    }

    #[test]
    fn maxpool_single_region() {
        let pool = MaxPool2x2::new();
        let x = Tensor::from_vec(&[2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]);
        let y = pool.forward_one(&x);
        assert_eq!(y.shape, vec![1, 1, 1]);
        assert_eq!(y.data, vec![4.0]);
    }

    #[test]
    fn maxpool_halves_even_sizes() {
        let pool = MaxPool2x2::new();
        let x = Tensor::<f32>::zeros(&[120, 120, 3]);
        assert_eq!(pool.forward_one(&x).shape, vec![60, 60, 3]);
    }

    #[test]
    fn maxpool_tie_routes_to_one_cell_and_conserves_mass() {
        let mut pool = MaxPool2x2::new();
        let x = Tensor::from_vec(&[2, 2, 1], vec![7.0; 4]);
        let _ = pool.forward_batch(std::slice::from_ref(&x));
        let gy = Tensor::from_vec(&[1, 1, 1], vec![1.0]);
        let dx = pool.backward_batch(std::slice::from_ref(&gy));
        let nonzero: Vec<f64> = dx[0].data.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nonzero, vec![1.0]);
        assert_eq!(dx[0].data[0], 1.0); // first in row-major order
    }

    #[test]
    fn maxpool_odd_input_ceil_output() {
        let pool = MaxPool2x2::new();
        let x = Tensor::from_vec(&[3, 3, 1], (1..=9).map(|v| v as f64).collect());
        let y = pool.forward_one(&x);
        assert_eq!(y.shape, vec![2, 2, 1]);
        assert_eq!(y.data, vec![5.0, 6.0, 8.0, 9.0]);
    }

    #[test]
    fn dropout_identity_cases() {
        let mut d0 = Dropout::new(0.0, 1).unwrap();
        let x = Tensor::from_vec(&[4], vec![1.0, 2.0, 3.0, 4.0]);
        let y = d0.forward_batch(std::slice::from_ref(&x), Mode::Train);
        assert_eq!(y[0].data, x.data);

        let mut d = Dropout::new(0.5, 1).unwrap();
        let y = d.forward_batch(std::slice::from_ref(&x), Mode::Infer);
        assert_eq!(y[0].data, x.data);
    }

    #[test]
    fn dropout_rejects_rate_one() {
        assert!(Dropout::new(1.0, 0).is_err());
    }

    #[test]
    fn dropout_preserves_mean_statistically() {
        let n = 100_000usize;
        let mut d = Dropout::new(0.5, 42).unwrap();
        let x = Tensor::from_vec(&[n], vec![1.0f64; n]);
        let y = d.forward_batch(std::slice::from_ref(&x), Mode::Train);
        let mean: f64 = y[0].data.iter().sum::<f64>() / n as f64;
        // Survivors scaled by 2, so the mean stays near 1 (sigma ~ 1/sqrt(n)).
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn dropout_deterministic_per_step() {
        let x = Tensor::from_vec(&[64], (0..64).map(|v| v as f64).collect());
        let mut a = Dropout::new(0.25, 7).unwrap();
        let mut b = Dropout::new(0.25, 7).unwrap();
        let ya = a.forward_batch(std::slice::from_ref(&x), Mode::Train);
        let yb = b.forward_batch(std::slice::from_ref(&x), Mode::Train);
        assert_eq!(ya[0].data, yb[0].data);
    }
}
