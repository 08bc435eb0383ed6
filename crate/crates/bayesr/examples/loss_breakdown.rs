//! The training-facing losses evaluated on a converged posterior.
//!
//! Recovers Gaussian moments from a solved state, evaluates the seven-term
//! variational loss at a reparameterized draw, adds the self-supervised
//! restoration loss, and combines both with the default scalar weights.
//! The same seed always reproduces the same draw and the same numbers.

use bayesr::degradation::{add_awgn, BlurKernel, DegradationOperator};
use bayesr::losses::{self_loss, variational_loss, PosteriorMoments, TrainWeights};
use bayesr::plane::ImagePlane;
use bayesr::priors::HyperParams;
use bayesr::restore::deterministic_restore;
use bayesr::solver::{solve, SolveSchedule};

fn main() -> bayesr::Result<()> {
    let truth = ImagePlane::from_fn(48, 48, |r, c| {
        if r.abs_diff(24) + c.abs_diff(24) < 14 {
            0.75
        } else {
            0.2
        }
    });
    let hyper = HyperParams::supervised();
    let op = DegradationOperator::new(BlurKernel::delta(), 1)?;
    let y = add_awgn(&truth, 12.0 / 255.0, 9)?;
    let (state, _) = solve(&y, &op, &hyper, &SolveSchedule::default())?;

    let moments = PosteriorMoments::from_state(&state);
    let breakdown = variational_loss(&y, &op, &hyper, &moments, 1234)?;
    for (name, value) in breakdown.terms() {
        println!("{name:>9}  {value:>14.6e}");
    }
    println!("{:>9}  {:>14.6e}", "total", breakdown.total);

    let restoration = deterministic_restore(&state);
    let self_term = self_loss(&restoration, &truth, 1)?;
    let weights = TrainWeights::default();
    println!("self-supervised loss {self_term:.6e}");
    println!(
        "combined objective   {:.6e} (tau {}, lambda {})",
        weights.total(breakdown.total, self_term, 0.0),
        weights.tau,
        weights.lambda
    );
    Ok(())
}
