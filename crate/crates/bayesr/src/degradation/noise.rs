//! Noise synthesis and noise harvesting.
//!
//! Synthesis covers white Gaussian noise and a signal-dependent model whose
//! per-pixel variance has a read component and a shot component, both
//! parameterized on the 0..255 display scale. Harvesting scans smooth
//! regions of real images for windows that look like pure noise and stores
//! them, mean-removed, in a [`NoisePool`].

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::plane::ImagePlane;

/// Adds white Gaussian noise with standard deviation `sigma` on the unit
/// intensity scale. Draws are row-major, so equal seeds give equal noise.
pub fn add_awgn(img: &ImagePlane, sigma: f64, seed: u64) -> Result<ImagePlane> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be nonnegative, got {sigma}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok(img.map(|v| {
        let e: f64 = StandardNormal.sample(&mut rng);
        v + sigma * e
    }))
}

/// Adds signal-dependent noise with per-pixel variance
/// `(sigma_r / 255)^2 + (sigma_s / 255) * y`, where `y` is the clean
/// intensity clamped to `[0, 1]` and both parameters live on the 0..255
/// display scale.
pub fn add_signal_noise(
    img: &ImagePlane,
    sigma_r: f64,
    sigma_s: f64,
    seed: u64,
) -> Result<ImagePlane> {
    if !(sigma_r >= 0.0 && sigma_s >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise parameters must be nonnegative, got {sigma_r}, {sigma_s}"
        )));
    }
    let read_var = (sigma_r / 255.0) * (sigma_r / 255.0);
    let shot_gain = sigma_s / 255.0;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok(img.map(|v| {
        let y = v.clamp(0.0, 1.0);
        let e: f64 = StandardNormal.sample(&mut rng);
        y + (read_var + shot_gain * y).sqrt() * e
    }))
}

/// First and second moments of an accepted window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchStats {
    /// Mean of the window before mean removal.
    pub mean: f64,
    /// Population variance of the window.
    pub variance: f64,
}

/// Mean-removed noise windows harvested from real images.
#[derive(Debug, Clone, Default)]
pub struct NoisePool {
    patches: Vec<ImagePlane>,
    stats: Vec<PatchStats>,
}

impl NoisePool {
    pub fn patches(&self) -> &[ImagePlane] {
        &self.patches
    }

    pub fn stats(&self) -> &[PatchStats] {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

/// Scans each image with a square window of side `patch` advanced by
/// `stride`, keeping windows whose four half-size quadrants match the whole
/// window in mean (within 5%, relative to the window mean) and variance
/// (within 10%). Windows with nonpositive mean are discarded; accepted
/// windows are stored mean-removed.
pub fn extract_noise_patches(
    images: &[ImagePlane],
    patch: usize,
    stride: usize,
) -> Result<NoisePool> {
    if images.is_empty() {
        return Err(Error::InvalidInput("no images to scan for noise".into()));
    }
    if patch < 2 || patch % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "patch side must be even and at least 2, got {patch}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    let mut pool = NoisePool::default();
    let half = patch / 2;
    for img in images {
        let (h, w) = img.shape();
        if h < patch || w < patch {
            return Err(Error::InvalidInput(format!(
                "image {h}x{w} is smaller than the {patch}x{patch} window"
            )));
        }
        for r0 in (0..=h - patch).step_by(stride) {
            for c0 in (0..=w - patch).step_by(stride) {
                let (mean, var) = region_moments(img, r0, c0, patch, patch);
                if mean <= 0.0 {
                    continue;
                }
                let quadrants = [
                    (r0, c0),
                    (r0, c0 + half),
                    (r0 + half, c0),
                    (r0 + half, c0 + half),
                ];
                let uniform = quadrants.iter().all(|&(qr, qc)| {
                    let (qm, qv) = region_moments(img, qr, qc, half, half);
                    (qm - mean).abs() <= 0.05 * mean && (qv - var).abs() <= 0.1 * var
                });
                if !uniform {
                    continue;
                }
                pool.patches
                    .push(ImagePlane::from_fn(patch, patch, |r, c| {
                        img[(r0 + r, c0 + c)] - mean
                    }));
                pool.stats.push(PatchStats {
                    mean,
                    variance: var,
                });
            }
        }
    }
    Ok(pool)
}

/// Mean and population variance over a rectangular region.
fn region_moments(img: &ImagePlane, r0: usize, c0: usize, h: usize, w: usize) -> (f64, f64) {
    let n = (h * w) as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for r in r0..r0 + h {
        for c in c0..c0 + w {
            let v = img[(r, c)];
            sum += v;
            sum_sq += v * v;
        }
    }
    let mean = sum / n;
    (mean, (sum_sq / n - mean * mean).max(0.0))
}
