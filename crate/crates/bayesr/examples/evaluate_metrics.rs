//! The evaluation conventions in one place.
//!
//! Shows full-image versus luma-cropped PSNR, SSIM, the low-resolution
//! consistency check, and the shift-searching PSNR that tolerates global
//! translations between restoration and reference.

use bayesr::degradation::{add_awgn, BlurKernel, DegradationOperator};
use bayesr::metrics::{lrpsnr, psnr, shifted_max_psnr, ssim, MetricConfig, PSNR_DISPLAY_CAP};
use bayesr::plane::{ImagePlane, ImageStack};

fn scene(h: usize, w: usize) -> ImagePlane {
    ImagePlane::from_fn(h, w, |r, c| {
        0.3 + 0.35 * ((r as f64 * 0.21).sin() * (c as f64 * 0.13).cos() + 1.0) / 2.0
    })
}

fn main() -> bayesr::Result<()> {
    let reference = scene(80, 80);
    let degraded = add_awgn(&reference, 12.0 / 255.0, 3)?;

    let full = psnr(
        &ImageStack::gray(degraded.clone()),
        &ImageStack::gray(reference.clone()),
        &MetricConfig::full_image(),
    )?;
    let cropped = psnr(
        &ImageStack::gray(degraded.clone()),
        &ImageStack::gray(reference.clone()),
        &MetricConfig::luma_cropped(2),
    )?;
    println!("PSNR full image        {full:.2} dB");
    println!("PSNR luma, crop s+4=6  {cropped:.2} dB");
    println!(
        "PSNR of an exact copy  {:.2} dB (display cap)",
        f64::INFINITY.min(PSNR_DISPLAY_CAP)
    );
    println!("SSIM vs noisy          {:.4}", ssim(&reference, &degraded)?);

    let op = DegradationOperator::new(BlurKernel::bicubic(2)?, 2)?;
    let y = op.apply(&reference);
    let consistency = lrpsnr(&ImageStack::gray(reference.clone()), &ImageStack::gray(y), &op)?;
    println!(
        "LRPSNR of the truth    {:.2} dB (re-degraded restoration vs observation)",
        consistency.min(PSNR_DISPLAY_CAP)
    );

    let translated = ImagePlane::from_fn(80, 80, |r, c| {
        reference[((r + 2).min(79), c.saturating_sub(3))]
    });
    let shifted = shifted_max_psnr(
        &ImageStack::gray(reference),
        &ImageStack::gray(translated),
        48,
        5,
    )?;
    println!(
        "shift search           best {:.2} dB at (dy, dx) = ({}, {})",
        shifted.db.min(PSNR_DISPLAY_CAP),
        shifted.dy,
        shifted.dx
    );
    Ok(())
}
