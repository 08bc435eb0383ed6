//! The `degrade` subcommand: forward model synthesis.

use std::path::PathBuf;

use clap::Args;

use crate::cli::flags::{KernelFlag, NoiseFlag};
use crate::cli::support::{
    check_image_paths, for_each_indexed, lane_seed, load_image, save_image,
    tagged_output,
};
use crate::cli::{usage, CmdError};
use crate::degradation::DegradationOperator;
use crate::plane::ImageStack;

#[derive(Debug, Args)]
pub struct DegradeArgs {
    /// Clean input images (PNG or PFM)
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Downsampling factor
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Blur kernel: bicubic | delta | gauss:SIZE,S1,S2,THETA | file:PATH
    #[arg(long, default_value = "bicubic")]
    kernel: KernelFlag,
    /// Noise model: awgn:SIGMA | shot:SIGMA_R,SIGMA_S (0..255 scale)
    #[arg(long)]
    noise: Option<NoiseFlag>,
    /// Base RNG seed; file i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (single input only)
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Output directory; writes {stem}_lr.{ext} per input
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads across input files
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

pub fn execute(args: DegradeArgs) -> Result<(), CmdError> {
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
                .map(|p| tagged_output(dir, p, "lr"))
                .collect()
        }
        (None, None) => return Err(usage("one of --out or --out-dir is required")),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    check_image_paths(&outputs)?;

    let kernel = args.kernel.resolve(args.scale)?;
    let op = DegradationOperator::new(kernel, args.scale)?;
    for_each_indexed(args.jobs, &args.input, |i, path| {
        let clean = load_image(path)?;
        let file_seed = args.seed.wrapping_add(i as u64);
        let mut channels = Vec::with_capacity(clean.channel_count());
        for (c, plane) in clean.channels().iter().enumerate() {
            let low = op.apply(plane);
            channels.push(match &args.noise {
                Some(noise) => noise.apply(&low, lane_seed(file_seed, c as u64))?,
                None => low,
            });
        }
        save_image(&outputs[i], &ImageStack::new(channels)?)?;
        eprintln!("{} -> {}", path.display(), outputs[i].display());
        Ok(())
    })?;
    Ok(())
}
