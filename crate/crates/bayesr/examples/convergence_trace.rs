//! Watching the evidence bound during coordinate ascent.
//!
//! Solves a small super-resolution problem with tracing enabled and prints
//! the per-sweep objective. Every exact coordinate update can only lower
//! the bound, so the trace decreases monotonically until the relative
//! change undercuts the tolerance.

use bayesr::degradation::{add_awgn, BlurKernel, DegradationOperator};
use bayesr::plane::ImagePlane;
use bayesr::priors::HyperParams;
use bayesr::solver::{solve, SolveSchedule};

fn main() -> bayesr::Result<()> {
    let truth = ImagePlane::from_fn(48, 48, |r, c| {
        if (r / 12 + c / 12) % 2 == 0 {
            0.25
        } else {
            0.7
        }
    });
    let op = DegradationOperator::new(BlurKernel::gaussian(5, 1.2, 1.2, 0.0)?, 2)?;
    let y = add_awgn(&op.apply(&truth), 10.0 / 255.0, 2)?;

    let schedule = SolveSchedule {
        max_sweeps: 60,
        rel_tol: 1e-7,
        trace: true,
    };
    let (_, trace) = solve(&y, &op, &HyperParams::supervised(), &schedule)?;

    println!("{:>5}  {:>16}  {:>12}", "sweep", "bound", "drop");
    for (i, pair) in trace.windows(2).enumerate() {
        let drop = pair[0] - pair[1];
        if i < 10 || i % 5 == 0 || i + 2 == trace.len() {
            println!("{:>5}  {:>16.6e}  {:>12.3e}", i + 1, pair[1], drop);
        }
    }
    let monotone = trace.windows(2).all(|p| p[1] <= p[0] + 1e-8 * p[0].abs());
    println!("sweeps {}, monotone: {monotone}", trace.len() - 1);
    Ok(())
}
