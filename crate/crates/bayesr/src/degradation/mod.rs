//! The linear observation model and its synthetic counterparts.
//!
//! A low-resolution observation is produced by correlating the latent image
//! with a blur kernel under reflect padding and keeping every `scale`-th
//! pixel. [`DegradationOperator`] exposes that map together with its exact
//! adjoint and the row-wise squared forms the variational updates need.
//! Submodules cover kernel construction, noise synthesis and harvesting,
//! kernel estimation from image pairs, and cubic upsampling.

pub mod fit;
pub mod kernel;
pub mod noise;
pub mod upsample;

pub use fit::fit_kernel;
pub use kernel::{BlurKernel, KernelSpec};
pub use noise::{add_awgn, add_signal_noise, extract_noise_patches, NoisePool, PatchStats};
pub use upsample::bicubic_upsample;

use crate::error::{Error, Result};
use crate::plane::ImagePlane;

/// Reflects an index into `0..n` without repeating the border sample.
///
/// The signal is treated as period `2n` with the second half mirrored, so
/// index `-1` maps to `0`, `n` maps to `n - 1`, and so on.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let period = 2 * n as isize;
    let mut idx = ((i % period) + period) % period;
    if idx >= n as isize {
        idx = period - 1 - idx;
    }
    idx as usize
}

/// Blur-then-decimate observation operator.
///
/// Applying the operator correlates with the kernel about its center tap
/// under reflect padding, then keeps pixels at multiples of `scale` starting
/// from the top-left corner. A `height x width` input maps to
/// `ceil(height / scale) x ceil(width / scale)`.
#[derive(Debug, Clone)]
pub struct DegradationOperator {
    kernel: BlurKernel,
    scale: usize,
}

impl DegradationOperator {
    pub fn new(kernel: BlurKernel, scale: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidInput("scale must be at least 1".into()));
        }
        Ok(DegradationOperator { kernel, scale })
    }

    pub fn kernel(&self) -> &BlurKernel {
        &self.kernel
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Output shape for a given input shape.
    pub fn lr_shape(&self, hr_shape: (usize, usize)) -> (usize, usize) {
        (
            hr_shape.0.div_ceil(self.scale),
            hr_shape.1.div_ceil(self.scale),
        )
    }

    /// Blurs and decimates `hr`.
    pub fn apply(&self, hr: &ImagePlane) -> ImagePlane {
        let (hh, hw) = hr.shape();
        let (lh, lw) = self.lr_shape((hh, hw));
        let (kh, kw) = self.kernel.shape();
        let (ch, cw) = (kh as isize / 2, kw as isize / 2);
        let mut out = ImagePlane::zeros(lh, lw);
        let mut rows = vec![0usize; kh];
        let mut cols = vec![0usize; kw];
        for lr_r in 0..lh {
            let base_r = (lr_r * self.scale) as isize - ch;
            for (p, row) in rows.iter_mut().enumerate() {
                *row = reflect(base_r + p as isize, hh);
            }
            for lr_c in 0..lw {
                let base_c = (lr_c * self.scale) as isize - cw;
                for (q, col) in cols.iter_mut().enumerate() {
                    *col = reflect(base_c + q as isize, hw);
                }
                let mut acc = 0.0;
                for (p, &row) in rows.iter().enumerate() {
                    for (q, &col) in cols.iter().enumerate() {
                        acc += self.kernel.at(p, q) * hr[(row, col)];
                    }
                }
                out[(lr_r, lr_c)] = acc;
            }
        }
        out
    }

    /// Exact transpose of [`apply`](Self::apply): scatters each observation
    /// back through the kernel taps, folding reflected reads into additions.
    pub fn apply_adjoint(&self, lr: &ImagePlane, hr_shape: (usize, usize)) -> Result<ImagePlane> {
        self.check_lr_shape(lr.shape(), hr_shape)?;
        let (hh, hw) = hr_shape;
        let (kh, kw) = self.kernel.shape();
        let (ch, cw) = (kh as isize / 2, kw as isize / 2);
        let mut out = ImagePlane::zeros(hh, hw);
        let mut rows = vec![0usize; kh];
        let mut cols = vec![0usize; kw];
        for lr_r in 0..lr.height() {
            let base_r = (lr_r * self.scale) as isize - ch;
            for (p, row) in rows.iter_mut().enumerate() {
                *row = reflect(base_r + p as isize, hh);
            }
            for lr_c in 0..lr.width() {
                let base_c = (lr_c * self.scale) as isize - cw;
                for (q, col) in cols.iter_mut().enumerate() {
                    *col = reflect(base_c + q as isize, hw);
                }
                let v = lr[(lr_r, lr_c)];
                for (p, &row) in rows.iter().enumerate() {
                    for (q, &col) in cols.iter().enumerate() {
                        out[(row, col)] += self.kernel.at(p, q) * v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies the entrywise square of the operator matrix to `hr`, i.e. for
    /// each observation the sum of squared matrix entries times the input.
    ///
    /// Reflection can land several kernel taps on one source pixel; those
    /// taps share a matrix entry, so they are folded into a single weight
    /// before squaring.
    pub fn apply_sq(&self, hr: &ImagePlane) -> ImagePlane {
        let (lh, lw) = self.lr_shape(hr.shape());
        let mut out = ImagePlane::zeros(lh, lw);
        self.for_each_folded(hr.shape(), |lr_r, lr_c, r, c, w| {
            out[(lr_r, lr_c)] += w * w * hr[(r, c)];
        });
        out
    }

    /// Applies the transpose of the entrywise-squared operator matrix to a
    /// plane of per-observation weights. Weights must be nonnegative.
    pub fn apply_sq_adjoint(
        &self,
        lr_weights: &ImagePlane,
        hr_shape: (usize, usize),
    ) -> Result<ImagePlane> {
        self.check_lr_shape(lr_weights.shape(), hr_shape)?;
        if lr_weights.data().iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidInput(
                "squared-adjoint weights must be nonnegative".into(),
            ));
        }
        let mut out = ImagePlane::zeros(hr_shape.0, hr_shape.1);
        self.for_each_folded(hr_shape, |lr_r, lr_c, r, c, w| {
            out[(r, c)] += w * w * lr_weights[(lr_r, lr_c)];
        });
        Ok(out)
    }

    /// Visits every folded matrix entry: observation `(lr_r, lr_c)`, source
    /// `(r, c)`, and the summed tap weight at that source.
    fn for_each_folded<F>(&self, hr_shape: (usize, usize), mut visit: F)
    where
        F: FnMut(usize, usize, usize, usize, f64),
    {
        let (hh, hw) = hr_shape;
        let (lh, lw) = self.lr_shape(hr_shape);
        let (kh, kw) = self.kernel.shape();
        let (ch, cw) = (kh as isize / 2, kw as isize / 2);
        let mut rows = vec![0usize; kh];
        let mut cols = vec![0usize; kw];
        // Folded indices along one axis span at most the kernel extent, so a
        // kernel-sized buffer indexed from the axis minima holds the sums.
        let mut folded = vec![0.0f64; kh * kw];
        for lr_r in 0..lh {
            let base_r = (lr_r * self.scale) as isize - ch;
            for (p, row) in rows.iter_mut().enumerate() {
                *row = reflect(base_r + p as isize, hh);
            }
            let r0 = *rows.iter().min().unwrap();
            for lr_c in 0..lw {
                let base_c = (lr_c * self.scale) as isize - cw;
                for (q, col) in cols.iter_mut().enumerate() {
                    *col = reflect(base_c + q as isize, hw);
                }
                let c0 = *cols.iter().min().unwrap();
                folded.fill(0.0);
                for (p, &row) in rows.iter().enumerate() {
                    for (q, &col) in cols.iter().enumerate() {
                        folded[(row - r0) * kw + (col - c0)] += self.kernel.at(p, q);
                    }
                }
                for (slot, &w) in folded.iter().enumerate() {
                    if w != 0.0 {
                        visit(lr_r, lr_c, r0 + slot / kw, c0 + slot % kw, w);
                    }
                }
            }
        }
    }

    fn check_lr_shape(&self, lr_shape: (usize, usize), hr_shape: (usize, usize)) -> Result<()> {
        let expected = self.lr_shape(hr_shape);
        if lr_shape != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: lr_shape,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::Lcg;

    /// Reflects by stepping, with no modular arithmetic; reference only.
    fn reflect_naive(mut i: isize, n: usize) -> usize {
        let n = n as isize;
        loop {
            if i < 0 {
                i = -1 - i;
            } else if i >= n {
                i = 2 * n - 1 - i;
            } else {
                return i as usize;
            }
        }
    }

    /// Row-major dense matrix of the operator, built independently by
    /// scattering kernel taps with the stepping reflection.
    fn dense_matrix(op: &DegradationOperator, hh: usize, hw: usize) -> Vec<Vec<f64>> {
        let (lh, lw) = op.lr_shape((hh, hw));
        let (kh, kw) = op.kernel().shape();
        let mut rows = vec![vec![0.0; hh * hw]; lh * lw];
        for lr_r in 0..lh {
            for lr_c in 0..lw {
                let row = &mut rows[lr_r * lw + lr_c];
                for p in 0..kh {
                    for q in 0..kw {
                        let r = reflect_naive(
                            (lr_r * op.scale()) as isize + p as isize - (kh / 2) as isize,
                            hh,
                        );
                        let c = reflect_naive(
                            (lr_c * op.scale()) as isize + q as isize - (kw / 2) as isize,
                            hw,
                        );
                        row[r * hw + c] += op.kernel().at(p, q);
                    }
                }
            }
        }
        rows
    }

    fn random_kernel(rng: &mut Lcg, kh: usize, kw: usize) -> BlurKernel {
        let weights: Vec<f64> = (0..kh * kw).map(|_| rng.next_f64() + 0.05).collect();
        BlurKernel::normalized(kh, kw, weights).unwrap()
    }

    #[test]
    fn reflect_matches_naive_stepping() {
        for n in 1..6 {
            for i in -25..25 {
                assert_eq!(reflect(i, n), reflect_naive(i, n));
            }
        }
        assert_eq!(reflect(-1, 8), 0);
        assert_eq!(reflect(-2, 8), 1);
        assert_eq!(reflect(8, 8), 7);
        assert_eq!(reflect(9, 8), 6);
    }

    #[test]
    fn lr_shape_rounds_up() {
        let op = DegradationOperator::new(BlurKernel::delta(), 2).unwrap();
        assert_eq!(op.lr_shape((5, 7)), (3, 4));
        assert_eq!(op.lr_shape((4, 8)), (2, 4));
    }

    #[test]
    fn rejects_zero_scale() {
        assert!(DegradationOperator::new(BlurKernel::delta(), 0).is_err());
    }

    #[test]
    fn delta_without_decimation_is_identity() {
        let mut rng = Lcg::new(11);
        let x = rng.unit_plane(6, 9);
        let op = DegradationOperator::new(BlurKernel::delta(), 1).unwrap();
        assert_eq!(op.apply(&x).data(), x.data());
    }

    #[test]
    fn delta_with_decimation_subsamples() {
        let x = ImagePlane::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let op = DegradationOperator::new(BlurKernel::delta(), 2).unwrap();
        let y = op.apply(&x);
        assert_eq!(y.shape(), (2, 2));
        assert_eq!(y.data(), &[0.0, 2.0, 8.0, 10.0]);
    }

    #[test]
    fn constant_input_stays_constant() {
        let x = ImagePlane::filled(9, 9, 0.37);
        for scale in 1..=3 {
            let op =
                DegradationOperator::new(BlurKernel::gaussian(5, 1.0, 2.0, 0.3).unwrap(), scale)
                    .unwrap();
            for &v in op.apply(&x).data() {
                assert!((v - 0.37).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_matches_dense_matrix() {
        let mut rng = Lcg::new(5);
        for &(hh, hw, kh, kw, s) in &[(6, 7, 3, 3, 1), (6, 7, 5, 3, 2), (5, 5, 7, 7, 3)] {
            let op = DegradationOperator::new(random_kernel(&mut rng, kh, kw), s).unwrap();
            let x = rng.unit_plane(hh, hw);
            let y = op.apply(&x);
            let rows = dense_matrix(&op, hh, hw);
            for (j, row) in rows.iter().enumerate() {
                let want: f64 = row.iter().zip(x.data()).map(|(a, b)| a * b).sum();
                assert!((y.data()[j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_satisfies_inner_product_identity() {
        let mut rng = Lcg::new(77);
        for &(hh, hw, kh, kw, s) in &[(8, 8, 3, 3, 1), (8, 6, 5, 5, 2), (6, 9, 7, 3, 3)] {
            let op = DegradationOperator::new(random_kernel(&mut rng, kh, kw), s).unwrap();
            for _ in 0..20 {
                let x = rng.unit_plane(hh, hw);
                let (lh, lw) = op.lr_shape((hh, hw));
                let y = rng.unit_plane(lh, lw);
                let lhs = op.apply(&x).dot(&y);
                let rhs = op.apply_adjoint(&y, (hh, hw)).unwrap().dot(&x);
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_rejects_mismatched_shapes() {
        let op = DegradationOperator::new(BlurKernel::delta(), 2).unwrap();
        let bad = ImagePlane::zeros(3, 3);
        assert!(op.apply_adjoint(&bad, (4, 4)).is_err());
    }

    #[test]
    fn squared_forms_match_dense_squared_matrix() {
        let mut rng = Lcg::new(42);
        for &(hh, hw, kh, kw, s) in &[(8, 8, 3, 3, 2), (6, 7, 5, 5, 2), (5, 6, 5, 3, 3)] {
            let op = DegradationOperator::new(random_kernel(&mut rng, kh, kw), s).unwrap();
            let rows = dense_matrix(&op, hh, hw);
            let x = rng.unit_plane(hh, hw);
            let (lh, lw) = op.lr_shape((hh, hw));
            let w = rng.unit_plane(lh, lw);

            let got = op.apply_sq(&x);
            for (j, row) in rows.iter().enumerate() {
                let want: f64 = row.iter().zip(x.data()).map(|(a, b)| a * a * b).sum();
                assert!((got.data()[j] - want).abs() < 1e-12);
            }

            let got = op.apply_sq_adjoint(&w, (hh, hw)).unwrap();
            for i in 0..hh * hw {
                let want: f64 = rows
                    .iter()
                    .zip(w.data())
                    .map(|(row, wv)| row[i] * row[i] * wv)
                    .sum();
                assert!((got.data()[i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn squared_adjoint_of_delta_is_identity_on_weights() {
        let op = DegradationOperator::new(BlurKernel::delta(), 1).unwrap();
        let w = ImagePlane::from_fn(4, 4, |r, c| (r + c) as f64);
        let got = op.apply_sq_adjoint(&w, (4, 4)).unwrap();
        assert_eq!(got.data(), w.data());
    }

    #[test]
    fn squared_adjoint_rejects_negative_weights() {
        let op = DegradationOperator::new(BlurKernel::delta(), 1).unwrap();
        let w = ImagePlane::from_vec(2, 2, vec![0.5, -0.1, 0.2, 0.3]).unwrap();
        assert!(op.apply_sq_adjoint(&w, (2, 2)).is_err());
    }
}
