//! Spatial pyramid pooling: max-pools a feature map over fixed grids of bins
//! at several scales and concatenates the results, producing a vector whose
//! length depends only on the channel count and the level list — never on
//! the spatial size. This is what lets the classifier accept shortened
//! windows after missing samples are dropped.

use rayon::prelude::*;

use super::tensor::{Scalar, Tensor};
use super::NeuralError;

/// Pyramid pooling over `levels` grids (an L-level divides the map into
/// L x L bins). Bin (i, j) of level L covers rows
/// [floor(i*H/L), ceil((i+1)*H/L)) and columns likewise, so every cell is
/// covered and neighboring bins may overlap by one row/column when the size
/// is not divisible.
#[derive(Debug, Clone)]
pub struct Spp {
    pub levels: Vec<usize>,
    cached_argmax: Vec<Vec<u32>>,
    cached_in_shapes: Vec<Vec<usize>>,
}

impl Spp {
    pub fn new(levels: &[usize]) -> Result<Spp, NeuralError> {
        if levels.is_empty() || levels.iter().any(|&l| l == 0) {
            return Err(NeuralError::InvalidParameter(
                "SPP levels must be positive".into(),
            ));
        }
        Ok(Spp {
            levels: levels.to_vec(),
            cached_argmax: Vec::new(),
            cached_in_shapes: Vec::new(),
        })
    }

    /// Total number of spatial bins across levels.
    pub fn total_bins(&self) -> usize {
        self.levels.iter().map(|&l| l * l).sum()
    }

    /// Output vector length for `channels` feature maps.
    pub fn output_len(&self, channels: usize) -> usize {
        channels * self.total_bins()
    }

    pub fn max_level(&self) -> usize {
        *self.levels.iter().max().expect("non-empty levels")
    }

    fn pool_one<S: Scalar>(&self, x: &Tensor<S>) -> Result<(Tensor<S>, Vec<u32>), NeuralError> {
        let (h, w, c) = x.dims3();
        let need = self.max_level();
        if h < need || w < need {
            return Err(NeuralError::InputTooSmall {
                got: h.min(w),
                min: need,
            });
        }
        let out_len = self.output_len(c);
        let mut y = Tensor::zeros(&[out_len]);
        let mut argmax = vec![0u32; out_len];
        let mut cursor = 0usize;
        for &level in &self.levels {
            for bi in 0..level {
                let r0 = bi * h / level;
                let r1 = ((bi + 1) * h).div_ceil(level);
                for bj in 0..level {
                    let c0 = bj * w / level;
                    let c1 = ((bj + 1) * w).div_ceil(level);
                    for ch in 0..c {
                        let mut best: Option<(S, usize)> = None;
                        for row in r0..r1 {
                            for col in c0..c1 {
                                let idx = (row * w + col) * c + ch;
                                let v = x.data[idx];
                                if best.map_or(true, |(bv, _)| v > bv) {
                                    best = Some((v, idx));
                                }
                            }
                        }
                        let (v, idx) = best.expect("bins are non-empty");
                        y.data[cursor] = v;
                        argmax[cursor] = idx as u32;
                        cursor += 1;
                    }
                }
            }
        }
        debug_assert_eq!(cursor, out_len);
        Ok((y, argmax))
    }

    pub fn forward_one<S: Scalar>(&self, x: &Tensor<S>) -> Result<Tensor<S>, NeuralError> {
        Ok(self.pool_one(x)?.0)
    }

    pub fn forward_batch<S: Scalar>(
        &mut self,
        xs: &[Tensor<S>],
    ) -> Result<Vec<Tensor<S>>, NeuralError> {
        let pooled: Result<Vec<(Tensor<S>, Vec<u32>)>, NeuralError> =
            xs.par_iter().map(|x| self.pool_one(x)).collect();
        let pooled = pooled?;
        self.cached_in_shapes = xs.iter().map(|x| x.shape.clone()).collect();
        self.cached_argmax.clear();
        let mut ys = Vec::with_capacity(pooled.len());
        for (y, a) in pooled {
            ys.push(y);
            self.cached_argmax.push(a);
        }
        Ok(ys)
    }

    pub fn backward_batch<S: Scalar>(&mut self, gys: &[Tensor<S>]) -> Vec<Tensor<S>> {
        let argmax = std::mem::take(&mut self.cached_argmax);
        let shapes = std::mem::take(&mut self.cached_in_shapes);
        gys.par_iter()
            .zip(argmax.par_iter())
            .zip(shapes.par_iter())
            .map(|((gy, am), shape)| {
                let mut dx = Tensor::zeros(shape);
                // Overlapping bins may route to the same cell; contributions add.
                for (g, &idx) in gy.data.iter().zip(am) {
                    dx.data[idx as usize] += *g;
                }
                dx
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_output_length() {
        let spp = Spp::new(&[1, 2, 4]).unwrap();
        assert_eq!(spp.output_len(128), 2688);
        let x = Tensor::<f32>::zeros(&[15, 15, 128]);
        assert_eq!(spp.forward_one(&x).unwrap().shape, vec![2688]);
    }

    #[test]
    fn constant_map_pools_to_constant() {
        let spp = Spp::new(&[1, 2, 4]).unwrap();
        let mut x = Tensor::<f64>::zeros(&[9, 9, 3]);
        x.data.iter_mut().for_each(|v| *v = 2.5);
        let y = spp.forward_one(&x).unwrap();
        assert!(y.data.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn hand_pooled_quadrants() {
        // 4x4, values 1..16 row-major, levels {1,2} -> [16, 6, 8, 14, 16].
        let spp = Spp::new(&[1, 2]).unwrap();
        let x = Tensor::from_vec(&[4, 4, 1], (1..=16).map(|v| v as f64).collect());
        let y = spp.forward_one(&x).unwrap();
        assert_eq!(y.data, vec![16.0, 6.0, 8.0, 14.0, 16.0]);
    }

    #[test]
    fn length_independent_of_spatial_size() {
        let spp = Spp::new(&[1, 2, 4]).unwrap();
        let mut lens = std::collections::BTreeSet::new();
        for n in 4..=40usize {
            let x = Tensor::<f32>::zeros(&[n, n, 5]);
            lens.insert(spp.forward_one(&x).unwrap().numel());
        }
        assert_eq!(lens.len(), 1);
        assert!(lens.contains(&(5 * 21)));
    }

    #[test]
    fn rejects_input_below_max_level() {
        let spp = Spp::new(&[1, 2, 4]).unwrap();
        let x = Tensor::<f32>::zeros(&[3, 8, 2]);
        assert!(matches!(
            spp.forward_one(&x),
            Err(NeuralError::InputTooSmall { got: 3, min: 4 })
        ));
    }

    #[test]
    fn overlapping_bins_cover_indivisible_sizes() {
        // H = 5, L = 2: bins cover rows [0,3) and [2,5); row 2 is shared.
        let spp = Spp::new(&[2]).unwrap();
        let mut x = Tensor::<f64>::zeros(&[5, 5, 1]);
        x.data[(2 * 5 + 2) * 1] = 9.0; // center cell
        let y = spp.forward_one(&x).unwrap();
        assert_eq!(y.data, vec![9.0, 9.0, 9.0, 9.0]);
    }
}
