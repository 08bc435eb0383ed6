//! The `extract-noise` subcommand: flat-region noise harvesting.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::cli::support::{check_image_paths, load_image};
use crate::cli::CmdError;
use crate::degradation::extract_noise_patches;
use crate::io::write_pfm;
use crate::plane::ImageStack;

#[derive(Debug, Args)]
pub struct ExtractNoiseArgs {
    /// Observations to scan (PNG or PFM)
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Window side in pixels; quadrants are half size
    #[arg(long, default_value_t = 64)]
    patch: usize,
    /// Window step in pixels
    #[arg(long, default_value_t = 32)]
    stride: usize,
    /// Output directory for patch_NNNN.pfm files and pool.txt
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn execute(args: ExtractNoiseArgs) -> Result<(), CmdError> {
    check_image_paths(&args.input)?;
    let mut planes = Vec::new();
    for path in &args.input {
        planes.extend(load_image(path)?.channels().iter().cloned());
    }
    let pool = extract_noise_patches(&planes, args.patch, args.stride)?;

    std::fs::create_dir_all(&args.out_dir).map_err(crate::error::Error::from)?;
    let mut index = String::new();
    for (i, (patch, stats)) in pool.patches().iter().zip(pool.stats()).enumerate() {
        let name = format!("patch_{i:04}.pfm");
        write_pfm(&args.out_dir.join(&name), &ImageStack::gray(patch.clone()))?;
        let _ = writeln!(index, "{name}\t{:.16e}\t{:.16e}", stats.mean, stats.variance);
    }
    std::fs::write(args.out_dir.join("pool.txt"), index)
        .map_err(crate::error::Error::from)?;
    println!("patches\t{}", pool.len());
    Ok(())
}
