//! Stochastic restorations from the variational posterior.
//!
//! After solving a denoising problem, draws several reparameterized
//! restorations, reports their spread around the posterior mean, and saves
//! mean and samples to `target/example-output/posterior_samples/`.

use std::path::Path;

use bayesr::degradation::{add_awgn, BlurKernel, DegradationOperator};
use bayesr::io::write_png;
use bayesr::plane::{ImagePlane, ImageStack};
use bayesr::priors::HyperParams;
use bayesr::restore::{diversity_score, sample_restorations};
use bayesr::solver::{solve, SolveSchedule};

fn gradient_card(h: usize, w: usize) -> ImagePlane {
    ImagePlane::from_fn(h, w, |r, c| {
        if r.abs_diff(h / 2) < h / 8 && c.abs_diff(w / 2) < w / 4 {
            0.8
        } else {
            0.15 + 0.4 * r as f64 / h as f64
        }
    })
}

fn main() -> bayesr::Result<()> {
    let truth = gradient_card(64, 64);
    let y = add_awgn(&truth, 15.0 / 255.0, 5)?;
    let op = DegradationOperator::new(BlurKernel::delta(), 1)?;
    let (state, _) = solve(&y, &op, &HyperParams::supervised(), &SolveSchedule::default())?;

    let set = sample_restorations(&state, 6, 42)?;
    println!("drew {} samples", set.samples.len());
    println!("diversity score {:.4}", diversity_score(&set)?);

    let out = Path::new("target/example-output/posterior_samples");
    std::fs::create_dir_all(out)?;
    write_png(
        &out.join("mean.png"),
        &ImageStack::gray(set.deterministic.clone()),
    )?;
    for (i, sample) in set.samples.iter().enumerate() {
        write_png(
            &out.join(format!("sample_{i:02}.png")),
            &ImageStack::gray(sample.clone()),
        )?;
    }
    println!("images written to {}", out.display());
    Ok(())
}
