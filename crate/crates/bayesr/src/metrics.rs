//! Image-quality metrics under fixed evaluation conventions.
//!
//! PSNR can run on the luma channel with a border crop, as is customary for
//! super-resolution comparisons, or on all channels of the full image. SSIM
//! is the standard single-scale index with an 11x11 Gaussian window. The
//! shifted variant searches integer translations to score image pairs whose
//! alignment is unknown.

use crate::degradation::DegradationOperator;
use crate::error::{Error, Result};
use crate::plane::{ImagePlane, ImageStack};

/// Full-range BT.601 luma weights for the RGB to Y conversion.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Cap applied when printing an infinite PSNR in tabular output.
pub const PSNR_DISPLAY_CAP: f64 = 99.99;

/// Evaluation conventions for [`psnr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricConfig {
    /// Pixels ignored on every side before comparison.
    pub border_crop: usize,
    /// Compare luma planes instead of raw channels.
    pub use_y_channel: bool,
    /// Downscaling factor the evaluation belongs to.
    pub scale: usize,
}

impl MetricConfig {
    /// Luma comparison ignoring `scale + 4` pixels per side.
    pub fn luma_cropped(scale: usize) -> Self {
        Self {
            border_crop: scale + 4,
            use_y_channel: true,
            scale,
        }
    }

    /// All channels, full image.
    pub fn full_image() -> Self {
        Self {
            border_crop: 0,
            use_y_channel: false,
            scale: 1,
        }
    }
}

/// Peak signal-to-noise ratio and the shift that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPsnr {
    /// Best PSNR over the searched shifts.
    pub db: f64,
    /// Row offset of the best window into the second image.
    pub dy: isize,
    /// Column offset of the best window into the second image.
    pub dx: isize,
}

/// Luma plane of a stack: the single channel as-is, or the BT.601 weighted
/// sum of three channels.
pub fn luma(stack: &ImageStack) -> Result<ImagePlane> {
    match stack.channels() {
        [one] => Ok(one.clone()),
        [r, g, b] => Ok(ImagePlane::from_fn(r.height(), r.width(), |i, j| {
            LUMA_WEIGHTS[0] * r[(i, j)] + LUMA_WEIGHTS[1] * g[(i, j)] + LUMA_WEIGHTS[2] * b[(i, j)]
        })),
        other => Err(Error::InvalidInput(format!(
            "luma needs 1 or 3 channels, got {}",
            other.len()
        ))),
    }
}

/// PSNR in decibels on unit-range images; identical inputs give positive
/// infinity.
pub fn psnr(a: &ImageStack, b: &ImageStack, cfg: &MetricConfig) -> Result<f64> {
    check_stack_pair(a, b)?;
    let pairs: Vec<(ImagePlane, ImagePlane)> = if cfg.use_y_channel {
        vec![(luma(a)?, luma(b)?)]
    } else {
        a.channels()
            .iter()
            .zip(b.channels())
            .map(|(pa, pb)| (pa.clone(), pb.clone()))
            .collect()
    };
    let mut sq_sum = 0.0;
    let mut count = 0usize;
    for (pa, pb) in &pairs {
        let ca = crop_border(pa, cfg.border_crop)?;
        let cb = crop_border(pb, cfg.border_crop)?;
        for (x, y) in ca.data().iter().zip(cb.data()) {
            let d = x - y;
            sq_sum += d * d;
        }
        count += ca.len();
    }
    Ok(psnr_from_mse(sq_sum / count as f64))
}

/// Structural similarity with the standard 11x11 Gaussian window
/// (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1), averaged over window
/// positions fully inside both images.
pub fn ssim(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    const WINDOW: usize = 11;
    const C1: f64 = 1e-4;
    const C2: f64 = 9e-4;
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    let (h, w) = a.shape();
    if h < WINDOW || w < WINDOW {
        return Err(Error::InvalidInput(format!(
            "ssim needs at least {WINDOW}x{WINDOW} pixels, got {h}x{w}"
        )));
    }
    let kernel = gaussian_window(WINDOW, 1.5);
    let mut total = 0.0;
    let mut positions = 0usize;
    for top in 0..=h - WINDOW {
        for left in 0..=w - WINDOW {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut ab = 0.0;
            for i in 0..WINDOW {
                for j in 0..WINDOW {
                    let wij = kernel[i * WINDOW + j];
                    let va = a[(top + i, left + j)];
                    let vb = b[(top + i, left + j)];
                    mu_a += wij * va;
                    mu_b += wij * vb;
                    aa += wij * va * va;
                    bb += wij * vb * vb;
                    ab += wij * va * vb;
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2);
            let den = (mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2);
            total += num / den;
            positions += 1;
        }
    }
    Ok(total / positions as f64)
}

/// PSNR between the degradation of a restoration and the observation it
/// came from, on all channels of the full image.
pub fn lrpsnr(
    restored_hr: &ImageStack,
    y: &ImageStack,
    op: &DegradationOperator,
) -> Result<f64> {
    if restored_hr.channel_count() != y.channel_count() {
        return Err(Error::InvalidInput(format!(
            "channel counts differ: {} vs {}",
            restored_hr.channel_count(),
            y.channel_count()
        )));
    }
    let expected = op.lr_shape(restored_hr.shape());
    if expected != y.shape() {
        return Err(Error::ShapeMismatch {
            expected,
            found: y.shape(),
        });
    }
    let degraded = restored_hr.map_channels(|p| op.apply(p));
    psnr(&degraded, y, &MetricConfig::full_image())
}

/// Maximum luma PSNR between a centered `crop x crop` patch of `a` and
/// every integer-shifted window of `b` with offsets up to `max_shift`.
///
/// Only windows fully inside `b` are searched; the unshifted window always
/// qualifies. Ties keep the first maximum in row-major shift order.
pub fn shifted_max_psnr(
    a: &ImageStack,
    b: &ImageStack,
    crop: usize,
    max_shift: isize,
) -> Result<ShiftedPsnr> {
    check_stack_pair(a, b)?;
    if crop == 0 || max_shift < 0 {
        return Err(Error::InvalidInput(
            "crop must be positive and max shift nonnegative".into(),
        ));
    }
    let pa = luma(a)?;
    let pb = luma(b)?;
    let (h, w) = pa.shape();
    if h < crop || w < crop {
        return Err(Error::InvalidInput(format!(
            "images must cover the {crop}x{crop} evaluation patch, got {h}x{w}"
        )));
    }
    let top = (h - crop) / 2;
    let left = (w - crop) / 2;
    let mut best: Option<ShiftedPsnr> = None;
    for dy in -max_shift..=max_shift {
        for dx in -max_shift..=max_shift {
            let by = top as isize + dy;
            let bx = left as isize + dx;
            if by < 0 || bx < 0 || by as usize + crop > h || bx as usize + crop > w {
                continue;
            }
            let mut sq_sum = 0.0;
            for i in 0..crop {
                for j in 0..crop {
                    let d = pa[(top + i, left + j)] - pb[(by as usize + i, bx as usize + j)];
                    sq_sum += d * d;
                }
            }
            let db = psnr_from_mse(sq_sum / (crop * crop) as f64);
            if best.as_ref().is_none_or(|cur| db > cur.db) {
                best = Some(ShiftedPsnr { db, dy, dx });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no shift candidate fits the images".into()))
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

fn check_stack_pair(a: &ImageStack, b: &ImageStack) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    if a.channel_count() != b.channel_count() {
        return Err(Error::InvalidInput(format!(
            "channel counts differ: {} vs {}",
            a.channel_count(),
            b.channel_count()
        )));
    }
    Ok(())
}

fn crop_border(p: &ImagePlane, crop: usize) -> Result<ImagePlane> {
    if crop == 0 {
        return Ok(p.clone());
    }
    let (h, w) = p.shape();
    if h <= 2 * crop || w <= 2 * crop {
        return Err(Error::InvalidInput(format!(
            "border crop {crop} leaves no pixels of a {h}x{w} image"
        )));
    }
    Ok(ImagePlane::from_fn(h - 2 * crop, w - 2 * crop, |r, c| {
        p[(r + crop, c + crop)]
    }))
}

fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut weights = vec![0.0; size * size];
    let mut sum = 0.0;
    for i in 0..size {
        for j in 0..size {
            let di = i as f64 - half;
            let dj = j as f64 - half;
            let v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            weights[i * size + j] = v;
            sum += v;
        }
    }
    for v in &mut weights {
        *v /= sum;
    }
    weights
}
