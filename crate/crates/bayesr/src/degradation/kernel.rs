//! Blur kernels for the degradation operator.
//!
//! Three generated families cover the usual degradations: the separable
//! cubic-convolution anti-aliasing kernel for a given integer scale, rotated
//! anisotropic Gaussians, and the identity (delta) kernel. Arbitrary kernels
//! can be wrapped from raw weights, e.g. after loading from a file.

use crate::error::{Error, Result};

/// Free parameter of the cubic-convolution interpolation profile.
const CUBIC_A: f64 = -0.5;

/// Cubic-convolution profile: 1 at the origin, zero at nonzero integers,
/// supported on `|t| < 2`, and summing to one over any unit-spaced grid.
pub(crate) fn cubic_weight(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((CUBIC_A + 2.0) * t - (CUBIC_A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        (((t - 5.0) * t + 8.0) * t - 4.0) * CUBIC_A
    } else {
        0.0
    }
}

/// A 2-D blur kernel with odd extents and unit weight sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl BlurKernel {
    /// The identity kernel: a single unit weight.
    pub fn delta() -> Self {
        BlurKernel {
            height: 1,
            width: 1,
            weights: vec![1.0],
        }
    }

    /// Rotated anisotropic Gaussian with principal standard deviations
    /// `sigma1`, `sigma2` and rotation `theta` (radians).
    pub fn gaussian(size: usize, sigma1: f64, sigma2: f64, theta: f64) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::InvalidInput(format!(
                "kernel size must be odd, got {size}"
            )));
        }
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gaussian sigmas must be positive, got {sigma1}, {sigma2}"
            )));
        }
        let (sin, cos) = theta.sin_cos();
        let (i1, i2) = (1.0 / (sigma1 * sigma1), 1.0 / (sigma2 * sigma2));
        // Inverse covariance of the rotated Gaussian.
        let p11 = cos * cos * i1 + sin * sin * i2;
        let p22 = sin * sin * i1 + cos * cos * i2;
        let p12 = sin * cos * (i1 - i2);
        let center = (size / 2) as f64;
        let mut weights = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                let dy = r as f64 - center;
                let dx = c as f64 - center;
                let q = p11 * dx * dx + 2.0 * p12 * dx * dy + p22 * dy * dy;
                weights.push((-0.5 * q).exp());
            }
        }
        Self::normalized(size, size, weights)
    }

    /// The separable cubic-convolution anti-aliasing kernel for integer
    /// downscaling by `scale`; extent `4 * scale - 1` per axis.
    pub fn bicubic(scale: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidInput("scale must be at least 1".into()));
        }
        let half = 2 * scale as isize - 1;
        let profile: Vec<f64> = (-half..=half)
            .map(|i| cubic_weight(i as f64 / scale as f64))
            .collect();
        let size = profile.len();
        let mut weights = Vec::with_capacity(size * size);
        for &wr in &profile {
            for &wc in &profile {
                weights.push(wr * wc);
            }
        }
        Self::normalized(size, size, weights)
    }

    /// Wraps raw weights after rescaling them to unit sum.
    ///
    /// Extents must be odd and the weight sum must not be degenerate.
    pub fn normalized(height: usize, width: usize, mut weights: Vec<f64>) -> Result<Self> {
        if height % 2 == 0 || width % 2 == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "kernel extents must be odd, got {height}x{width}"
            )));
        }
        if weights.len() != height * width {
            return Err(Error::InvalidInput(format!(
                "kernel weight count {} does not match {height}x{width}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("kernel contains non-finite weights".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum.abs() < 1e-6 {
            return Err(Error::Numerical(format!(
                "kernel weight sum {sum} is too close to zero to normalize"
            )));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(BlurKernel {
            height,
            width,
            weights,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Row-major weights, summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at kernel row `r`, column `c`.
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.width + c]
    }
}

/// Generated kernel families, as selected on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Cubic-convolution anti-aliasing kernel for the given scale.
    Bicubic { scale: usize },
    /// Rotated anisotropic Gaussian.
    Gaussian {
        size: usize,
        sigma1: f64,
        sigma2: f64,
        theta: f64,
    },
    /// Identity kernel.
    Delta,
}

impl KernelSpec {
    pub fn build(&self) -> Result<BlurKernel> {
        match *self {
            KernelSpec::Bicubic { scale } => BlurKernel::bicubic(scale),
            KernelSpec::Gaussian {
                size,
                sigma1,
                sigma2,
                theta,
            } => BlurKernel::gaussian(size, sigma1, sigma2, theta),
            KernelSpec::Delta => Ok(BlurKernel::delta()),
        }
    }
}
