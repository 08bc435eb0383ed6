//! The `fit-kernel` subcommand: least-squares kernel estimation.

use std::path::PathBuf;

use clap::Args;

use crate::cli::support::{check_image_paths, load_image};
use crate::cli::{usage, CmdError};
use crate::degradation::fit_kernel;
use crate::io::write_kernel_file;

#[derive(Debug, Args)]
pub struct FitKernelArgs {
    /// High-resolution images, paired with --lr by position
    #[arg(long, num_args = 1.., required = true)]
    hr: Vec<PathBuf>,
    /// Low-resolution partners
    #[arg(long, num_args = 1.., required = true)]
    lr: Vec<PathBuf>,
    /// Downsampling factor between the pairs
    #[arg(long, default_value_t = 2)]
    scale: usize,
    /// Kernel side (odd)
    #[arg(long, default_value_t = 13)]
    size: usize,
    /// Output kernel file
    #[arg(long)]
    out: PathBuf,
}

pub fn execute(args: FitKernelArgs) -> Result<(), CmdError> {
    if args.hr.len() != args.lr.len() {
        return Err(usage(format!(
            "--hr and --lr must pair up, got {} and {}",
            args.hr.len(),
            args.lr.len()
        )));
    }
    check_image_paths(args.hr.iter().chain(&args.lr))?;

    let mut hr_planes = Vec::new();
    let mut lr_planes = Vec::new();
    for (hr_path, lr_path) in args.hr.iter().zip(&args.lr) {
        let hr = load_image(hr_path)?;
        let lr = load_image(lr_path)?;
        if hr.channel_count() != lr.channel_count() {
            return Err(usage(format!(
                "{} and {} differ in channel count",
                hr_path.display(),
                lr_path.display()
            )));
        }
        hr_planes.extend(hr.channels().iter().cloned());
        lr_planes.extend(lr.channels().iter().cloned());
    }
    let kernel = fit_kernel(&hr_planes, &lr_planes, args.scale, args.size)?;
    write_kernel_file(&args.out, &kernel)?;
    eprintln!(
        "fitted {}x{} kernel from {} plane pairs -> {}",
        args.size,
        args.size,
        hr_planes.len(),
        args.out.display()
    );
    Ok(())
}
