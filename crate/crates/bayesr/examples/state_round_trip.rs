//! Persisting a solved posterior and restoring from disk.
//!
//! Solves a small problem, dumps the twelve parameter planes as PFM files
//! with a manifest, loads them back, and verifies that the reloaded state
//! reproduces the restoration within float32 storage precision.

use std::path::Path;

use bayesr::degradation::{add_awgn, BlurKernel, DegradationOperator};
use bayesr::io::{dump_state, load_state, MANIFEST_NAME};
use bayesr::plane::ImagePlane;
use bayesr::priors::HyperParams;
use bayesr::restore::deterministic_restore;
use bayesr::solver::{solve, SolveSchedule};

fn main() -> bayesr::Result<()> {
    let truth = ImagePlane::from_fn(32, 32, |r, _| if r < 16 { 0.3 } else { 0.7 });
    let op = DegradationOperator::new(BlurKernel::gaussian(3, 0.8, 0.8, 0.0)?, 2)?;
    let y = add_awgn(&op.apply(&truth), 8.0 / 255.0, 4)?;
    let schedule = SolveSchedule {
        max_sweeps: 80,
        ..SolveSchedule::default()
    };
    let (state, _) = solve(&y, &op, &HyperParams::supervised(), &schedule)?;

    let dir = Path::new("target/example-output/state_round_trip");
    dump_state(dir, &state)?;
    let files = std::fs::read_dir(dir)?.count();
    println!("dumped {} files to {} (incl. {MANIFEST_NAME})", files, dir.display());

    let reloaded = load_state(dir)?;
    let a = deterministic_restore(&state);
    let b = deterministic_restore(&reloaded);
    let worst = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    println!("restoration difference after reload: {worst:.3e} (float32 storage)");
    Ok(())
}
