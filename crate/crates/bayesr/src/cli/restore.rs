//! The `restore` subcommand: posterior inference and deterministic output.

use std::path::PathBuf;

use clap::Args;

use crate::cli::flags::KernelFlag;
use crate::cli::support::{
    check_image_paths, dump_channel_states, for_each_indexed, load_channel_states,
    load_image, save_image, solve_channels, tagged_output,
};
use crate::cli::{usage, CmdError};
use crate::degradation::DegradationOperator;
use crate::plane::ImageStack;
use crate::priors::HyperParams;
use crate::restore::deterministic_restore;
use crate::solver::{SolveSchedule, VariationalState};

#[derive(Debug, Args)]
pub struct RestoreArgs {
    /// Degraded observations (PNG or PFM)
    #[arg(long, num_args = 1.., required_unless_present = "state", conflicts_with = "state")]
    input: Vec<PathBuf>,
    /// Resume from a dumped state directory instead of solving
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
    /// Output file (single source only)
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Output directory; writes {stem}_sr.{ext} per input
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Directory for the converged state (single input only)
    #[arg(long)]
    dump_state: Option<PathBuf>,
    /// Worker threads across input files
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

pub fn execute(args: RestoreArgs) -> Result<(), CmdError> {
    if let Some(state_dir) = &args.state {
        let out = args
            .out
            .as_ref()
            .ok_or_else(|| usage("--state needs --out"))?;
        check_image_paths([out])?;
        let states = load_channel_states(state_dir)?;
        save_image(out, &restoration(&states)?)?;
        return Ok(());
    }

    check_image_paths(&args.input)?;
    let outputs: Vec<PathBuf> = match (&args.out, &args.out_dir) {
        (Some(out), None) if args.input.len() == 1 => vec![out.clone()],
        (Some(_), None) => {
            return Err(usage("--out needs exactly one input; use --out-dir"))
        }
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(crate::error::Error::from)?;
            args.input
                .iter()
                .map(|p| tagged_output(dir, p, "sr"))
                .collect()
        }
        (None, None) => return Err(usage("one of --out or --out-dir is required")),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    check_image_paths(&outputs)?;
    if args.dump_state.is_some() && args.input.len() != 1 {
        return Err(usage("--dump-state needs exactly one input"));
    }

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

    for_each_indexed(args.jobs, &args.input, |i, path| {
        let y = load_image(path)?;
        let label = path.display().to_string();
        let mut states = solve_channels(&y, &op, &hyper, &schedule, &label)?;
        if let Some(state_dir) = &args.dump_state {
            dump_channel_states(state_dir, &states)?;
            states = load_channel_states(state_dir)?;
        }
        save_image(&outputs[i], &restoration(&states)?)?;
        Ok(())
    })?;
    Ok(())
}

fn restoration(states: &[VariationalState]) -> crate::error::Result<ImageStack> {
    ImageStack::new(states.iter().map(deterministic_restore).collect())
}
