//! Central finite-difference verification of the analytic backward passes.
//!
//! Each check builds a small f64 layer with seeded random parameters and
//! input, takes the scalar loss `sum(upstream * output)` for fixed random
//! upstream weights, and compares the analytic gradient of every input and
//! parameter coordinate against (f(x+h) - f(x-h)) / 2h with h = 1e-5.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::conv::{Conv2d, Padding};
use super::dense::Dense;
use super::layers::{BatchNorm, MaxPool2x2, Relu};
use super::loss::softmax_cross_entropy;
use super::spp::Spp;
use super::tensor::Tensor;
use super::Mode;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;

/// max over coordinates of |a - n| / max(|a|, |n|, 1e-8).
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Central differences of a scalar function over every coordinate of `x`.
pub fn central_diff_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let fp = f(&probe);
            probe[i] = orig - h;
            let fm = f(&probe);
            probe[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn randoms(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient check for conv2d over input, kernels, and bias.
pub fn check_conv(
    h: usize,
    w: usize,
    cin: usize,
    cout: usize,
    k: usize,
    padding: Padding,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_w = k * k * cin * cout;
    let n_x = h * w * cin;
    let w0 = randoms(&mut rng, n_w);
    let b0 = randoms(&mut rng, cout);
    let x0 = randoms(&mut rng, n_x);

    let forward = |theta: &[f64]| -> Tensor<f64> {
        let mut conv = Conv2d::<f64>::new(k, cin, cout, padding);
        conv.weights.data.copy_from_slice(&theta[n_x..n_x + n_w]);
        conv.bias.data.copy_from_slice(&theta[n_x + n_w..]);
        let x = Tensor::from_vec(&[h, w, cin], theta[..n_x].to_vec());
        conv.forward_one(&x).expect("valid conv configuration")
    };

    let mut theta = x0;
    theta.extend(w0);
    theta.extend(b0);
    let y = forward(&theta);
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0xffff);
    let upstream = randoms(&mut rng2, y.numel());

    // Analytic pass.
    let mut conv = Conv2d::<f64>::new(k, cin, cout, padding);
    conv.weights.data.copy_from_slice(&theta[n_x..n_x + n_w]);
    conv.bias.data.copy_from_slice(&theta[n_x + n_w..]);
    let x = Tensor::from_vec(&[h, w, cin], theta[..n_x].to_vec());
    conv.forward_batch(std::slice::from_ref(&x)).unwrap();
    let gy = Tensor::from_vec(&y.shape, upstream.clone());
    let dxs = conv.backward_batch(std::slice::from_ref(&gy), true).unwrap();
    let mut analytic = dxs[0].data.clone();
    analytic.extend(conv.grad_weights.data.iter());
    analytic.extend(conv.grad_bias.data.iter());

    let numeric = central_diff_gradient(|t| dot(&forward(t).data, &upstream), &theta, FD_STEP);
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for ReLU (away from the kink at zero).
pub fn check_relu(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = randoms(&mut rng, n)
        .into_iter()
        .map(|v| if v.abs() < 0.05 { v + 0.1 } else { v })
        .collect();
    let upstream = randoms(&mut rng, n);

    let mut relu = Relu::new();
    let x = Tensor::from_vec(&[n], x0.clone());
    relu.forward_batch(std::slice::from_ref(&x));
    let gy = Tensor::from_vec(&[n], upstream.clone());
    let analytic = relu.backward_batch(std::slice::from_ref(&gy))[0].data.clone();

    let numeric = central_diff_gradient(
        |t| {
            let r = Relu::new();
            dot(&r.forward_one(&Tensor::from_vec(&[n], t.to_vec())).data, &upstream)
        },
        &x0,
        FD_STEP,
    );
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for batch normalization in train mode over the batch
/// inputs, gamma, and beta.
pub fn check_batchnorm(batch: usize, h: usize, w: usize, c: usize, seed: u64) -> f64 {
    assert!(batch >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = h * w * c;
    let n_x = batch * per;
    let mut theta = randoms(&mut rng, n_x);
    theta.extend(randoms(&mut rng, c).iter().map(|v| v + 1.5)); // gamma away from 0
    theta.extend(randoms(&mut rng, c)); // beta
    let upstream: Vec<f64> = randoms(&mut rng, n_x);

    let run = |t: &[f64]| -> Vec<Tensor<f64>> {
        let mut bn = BatchNorm::<f64>::new(c, 1e-5, 0.9);
        bn.gamma.data.copy_from_slice(&t[n_x..n_x + c]);
        bn.beta.data.copy_from_slice(&t[n_x + c..]);
        let xs: Vec<Tensor<f64>> = (0..batch)
            .map(|b| Tensor::from_vec(&[h, w, c], t[b * per..(b + 1) * per].to_vec()))
            .collect();
        bn.forward_batch(&xs, Mode::Train).unwrap()
    };

    // Analytic pass.
    let mut bn = BatchNorm::<f64>::new(c, 1e-5, 0.9);
    bn.gamma.data.copy_from_slice(&theta[n_x..n_x + c]);
    bn.beta.data.copy_from_slice(&theta[n_x + c..]);
    let xs: Vec<Tensor<f64>> = (0..batch)
        .map(|b| Tensor::from_vec(&[h, w, c], theta[b * per..(b + 1) * per].to_vec()))
        .collect();
    bn.forward_batch(&xs, Mode::Train).unwrap();
    let gys: Vec<Tensor<f64>> = (0..batch)
        .map(|b| Tensor::from_vec(&[h, w, c], upstream[b * per..(b + 1) * per].to_vec()))
        .collect();
    let dxs = bn.backward_batch(&gys);
    let mut analytic: Vec<f64> = dxs.iter().flat_map(|t| t.data.iter().copied()).collect();
    analytic.extend(bn.grad_gamma.data.iter());
    analytic.extend(bn.grad_beta.data.iter());

    let numeric = central_diff_gradient(
        |t| {
            let ys = run(t);
            ys.iter()
                .enumerate()
                .map(|(b, y)| dot(&y.data, &upstream[b * per..(b + 1) * per]))
                .sum()
        },
        &theta,
        FD_STEP,
    );
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for 2x2 max pooling (random input, ties measure-zero).
pub fn check_maxpool(h: usize, w: usize, c: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = randoms(&mut rng, h * w * c);

    let mut pool = MaxPool2x2::new();
    let x = Tensor::from_vec(&[h, w, c], x0.clone());
    let ys = pool.forward_batch(std::slice::from_ref(&x));
    let upstream = randoms(&mut rng, ys[0].numel());
    let gy = Tensor::from_vec(&ys[0].shape, upstream.clone());
    let analytic = pool.backward_batch(std::slice::from_ref(&gy))[0].data.clone();

    let numeric = central_diff_gradient(
        |t| {
            let p = MaxPool2x2::new();
            dot(
                &p.forward_one(&Tensor::from_vec(&[h, w, c], t.to_vec())).data,
                &upstream,
            )
        },
        &x0,
        FD_STEP,
    );
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for spatial pyramid pooling.
pub fn check_spp(h: usize, w: usize, c: usize, levels: &[usize], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = randoms(&mut rng, h * w * c);

    let mut spp = Spp::new(levels).unwrap();
    let x = Tensor::from_vec(&[h, w, c], x0.clone());
    let ys = spp.forward_batch(std::slice::from_ref(&x)).unwrap();
    let upstream = randoms(&mut rng, ys[0].numel());
    let gy = Tensor::from_vec(&ys[0].shape, upstream.clone());
    let analytic = spp.backward_batch(std::slice::from_ref(&gy))[0].data.clone();

    let numeric = central_diff_gradient(
        |t| {
            let s = Spp::new(levels).unwrap();
            dot(
                &s.forward_one(&Tensor::from_vec(&[h, w, c], t.to_vec())).unwrap().data,
                &upstream,
            )
        },
        &x0,
        FD_STEP,
    );
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for the dense layer over input, weights, and bias.
pub fn check_dense(inputs: usize, outputs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_w = inputs * outputs;
    let mut theta = randoms(&mut rng, inputs);
    theta.extend(randoms(&mut rng, n_w));
    theta.extend(randoms(&mut rng, outputs));
    let upstream = randoms(&mut rng, outputs);

    let forward = |t: &[f64]| -> Tensor<f64> {
        let mut d = Dense::<f64>::new(inputs, outputs);
        d.weights.data.copy_from_slice(&t[inputs..inputs + n_w]);
        d.bias.data.copy_from_slice(&t[inputs + n_w..]);
        d.forward_one(&Tensor::from_vec(&[inputs], t[..inputs].to_vec())).unwrap()
    };

    let mut dense = Dense::<f64>::new(inputs, outputs);
    dense.weights.data.copy_from_slice(&theta[inputs..inputs + n_w]);
    dense.bias.data.copy_from_slice(&theta[inputs + n_w..]);
    let x = Tensor::from_vec(&[inputs], theta[..inputs].to_vec());
    dense.forward_batch(std::slice::from_ref(&x)).unwrap();
    let gy = Tensor::from_vec(&[outputs], upstream.clone());
    let dxs = dense.backward_batch(std::slice::from_ref(&gy)).unwrap();
    let mut analytic = dxs[0].data.clone();
    analytic.extend(dense.grad_weights.data.iter());
    analytic.extend(dense.grad_bias.data.iter());

    let numeric = central_diff_gradient(|t| dot(&forward(t).data, &upstream), &theta, FD_STEP);
    max_relative_error(&analytic, &numeric)
}

/// Gradient check for softmax cross-entropy over the logits.
pub fn check_softmax_ce(classes: usize, label: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits = randoms(&mut rng, classes);
    let (_, analytic) = softmax_cross_entropy(&logits, label).unwrap();
    let numeric = central_diff_gradient(
        |t| softmax_cross_entropy(t, label).unwrap().0,
        &logits,
        FD_STEP,
    );
    max_relative_error(&analytic, &numeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-4;

    #[test]
    fn conv_same_and_valid_pass() {
        assert!(check_conv(6, 6, 2, 3, 3, Padding::Same, 11) < TOL);
        assert!(check_conv(6, 5, 2, 2, 3, Padding::Valid, 12) < TOL);
        assert!(check_conv(5, 5, 1, 4, 2, Padding::Same, 13) < TOL);
    }

    #[test]
    fn relu_passes() {
        assert!(check_relu(40, 21) < TOL);
    }

    #[test]
    fn batchnorm_passes() {
        assert!(check_batchnorm(4, 3, 3, 2, 31) < TOL);
        assert!(check_batchnorm(2, 4, 2, 3, 32) < TOL);
    }

    #[test]
    fn maxpool_passes() {
        assert!(check_maxpool(6, 6, 2, 41) < TOL);
        assert!(check_maxpool(5, 7, 3, 42) < TOL); // odd sizes
    }

    #[test]
    fn spp_passes() {
        assert!(check_spp(5, 5, 3, &[1, 2, 4], 51) < TOL);
        assert!(check_spp(8, 6, 2, &[1, 2], 52) < TOL);
    }

    #[test]
    fn dense_passes() {
        assert!(check_dense(7, 5, 61) < TOL);
    }

    #[test]
    fn softmax_ce_passes() {
        assert!(check_softmax_ce(5, 2, 71) < TOL);
        assert!(check_softmax_ce(2, 1, 72) < TOL);
    }
}
