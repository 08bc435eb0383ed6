//! Least-squares blur-kernel estimation from image pairs.
//!
//! Each low-resolution pixel is a linear function of the kernel weights once
//! the high-resolution image and the sampling grid are fixed. Stacking those
//! rows over all pairs gives an overdetermined system; the normal equations
//! are assembled directly and solved with a Cholesky factorization.

use crate::error::{Error, Result};
use crate::plane::ImagePlane;

use super::kernel::BlurKernel;
use super::reflect;

/// Estimates the `kernel_size x kernel_size` blur that, followed by
/// decimation by `scale`, best maps each high-resolution image onto its
/// low-resolution partner. The result is rescaled to unit weight sum.
///
/// Fails with [`Error::RankDeficient`] when the pairs do not constrain every
/// kernel weight, e.g. on constant images.
pub fn fit_kernel(
    hr_images: &[ImagePlane],
    lr_images: &[ImagePlane],
    scale: usize,
    kernel_size: usize,
) -> Result<BlurKernel> {
    if hr_images.is_empty() || hr_images.len() != lr_images.len() {
        return Err(Error::InvalidInput(format!(
            "need matching nonempty image lists, got {} and {}",
            hr_images.len(),
            lr_images.len()
        )));
    }
    if kernel_size % 2 == 0 || kernel_size == 0 {
        return Err(Error::InvalidInput(format!(
            "kernel size must be odd, got {kernel_size}"
        )));
    }
    if scale == 0 {
        return Err(Error::InvalidInput("scale must be at least 1".into()));
    }

    let k = kernel_size;
    let n = k * k;
    let center = (k / 2) as isize;
    let mut gram = vec![0.0f64; n * n];
    let mut rhs = vec![0.0f64; n];
    let mut row = vec![0.0f64; n];

    for (hr, lr) in hr_images.iter().zip(lr_images) {
        let (hh, hw) = hr.shape();
        let expected = (hh.div_ceil(scale), hw.div_ceil(scale));
        if lr.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: lr.shape(),
            });
        }
        for lr_r in 0..lr.height() {
            for lr_c in 0..lr.width() {
                // Regression row: the high-resolution samples each kernel
                // weight would multiply at this observation.
                for (t, slot) in row.iter_mut().enumerate() {
                    let p = (t / k) as isize;
                    let q = (t % k) as isize;
                    let r = reflect((lr_r * scale) as isize + p - center, hh);
                    let c = reflect((lr_c * scale) as isize + q - center, hw);
                    *slot = hr[(r, c)];
                }
                let y = lr[(lr_r, lr_c)];
                for i in 0..n {
                    rhs[i] += row[i] * y;
                    let gi = &mut gram[i * n..(i + 1) * n];
                    for j in i..n {
                        gi[j] += row[i] * row[j];
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            gram[i * n + j] = gram[j * n + i];
        }
    }

    let weights = cholesky_solve(&mut gram, &rhs, n)?;
    BlurKernel::normalized(k, k, weights)
}

/// Solves the symmetric positive-definite system in place and returns the
/// solution. A nonpositive pivot means the system is singular.
fn cholesky_solve(a: &mut [f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max);
    let tol = 1e-12 * max_diag.max(1e-300);
    for j in 0..n {
        let mut d = a[j * n + j];
        for t in 0..j {
            d -= a[j * n + t] * a[j * n + t];
        }
        if d <= tol {
            return Err(Error::RankDeficient(format!(
                "normal equations singular at pivot {j} of {n}"
            )));
        }
        let l = d.sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for t in 0..j {
                s -= a[i * n + t] * a[j * n + t];
            }
            a[i * n + j] = s / l;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for t in 0..i {
            x[i] -= a[i * n + t] * x[t];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for t in i + 1..n {
            x[i] -= a[t * n + i] * x[t];
        }
        x[i] /= a[i * n + i];
    }
    Ok(x)
}
