//! The `sample` subcommand: stochastic restorations and diversity.

use std::path::PathBuf;

use clap::Args;

use crate::cli::flags::KernelFlag;
use crate::cli::support::{
    check_image_paths, lane_seed, load_channel_states, load_image, save_image,
    solve_channels,
};
use crate::cli::{usage, CmdError};
use crate::degradation::DegradationOperator;
use crate::plane::ImageStack;
use crate::priors::HyperParams;
use crate::restore::{diversity_score, sample_restorations, DEFAULT_SAMPLE_COUNT};
use crate::solver::SolveSchedule;

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Degraded observation (PNG or PFM)
    #[arg(long, required_unless_present = "state", conflicts_with = "state")]
    input: Option<PathBuf>,
    /// Draw from a dumped state directory instead of solving
    #[arg(long)]
    state: Option<PathBuf>,
    /// Upsampling factor
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Blur kernel: bicubic | delta | gauss:SIZE,S1,S2,THETA | file:PATH
    #[arg(long, default_value = "bicubic")]
    kernel: KernelFlag,
    /// Tighter noise prior for known moderate noise
    #[arg(long)]
    supervised: bool,
    /// Sweep budget
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    /// Relative objective tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Number of stochastic restorations
    #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
    samples: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; writes {stem}_mean.png and {stem}_s00.png ...
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn execute(args: SampleArgs) -> Result<(), CmdError> {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let (states, stem) = match (&args.input, &args.state) {
        (Some(path), None) => {
            check_image_paths([path])?;
            let y = load_image(path)?;
            let kernel = args.kernel.resolve(args.scale)?;
            let op = DegradationOperator::new(kernel, args.scale)?;
            let hyper = if args.supervised {
                HyperParams::supervised()
            } else {
                HyperParams::default()
            };
            let schedule = SolveSchedule {
                max_sweeps: args.max_sweeps,
                rel_tol: args.tol,
                trace: true,
            };
            let label = path.display().to_string();
            let states = solve_channels(&y, &op, &hyper, &schedule, &label)?;
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("image")
                .to_string();
            (states, stem)
        }
        (None, Some(dir)) => (load_channel_states(dir)?, "state".to_string()),
        _ => unreachable!("clap enforces exactly one source"),
    };

    let sets = states
        .iter()
        .enumerate()
        .map(|(c, state)| {
            sample_restorations(state, args.samples, lane_seed(args.seed, c as u64))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;

    std::fs::create_dir_all(&args.out_dir).map_err(crate::error::Error::from)?;
    let mean = ImageStack::new(sets.iter().map(|s| s.deterministic.clone()).collect())?;
    save_image(&args.out_dir.join(format!("{stem}_mean.png")), &mean)?;
    for i in 0..args.samples {
        let sample =
            ImageStack::new(sets.iter().map(|s| s.samples[i].clone()).collect())?;
        save_image(&args.out_dir.join(format!("{stem}_s{i:02}.png")), &sample)?;
    }

    if args.samples >= 2 {
        let mut score = 0.0;
        for set in &sets {
            score += diversity_score(set)?;
        }
        println!("diversity\t{:.4}", score / sets.len() as f64);
    }
    Ok(())
}
