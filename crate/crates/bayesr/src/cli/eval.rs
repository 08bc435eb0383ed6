//! The `eval` subcommand: metric tables for scripting.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use crate::cli::flags::KernelFlag;
use crate::cli::support::{check_image_paths, load_image};
use crate::cli::CmdError;
use crate::degradation::DegradationOperator;
use crate::metrics::{
    lrpsnr, luma, psnr, shifted_max_psnr, ssim, MetricConfig, PSNR_DISPLAY_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricName {
    Psnr,
    Ssim,
    /// PSNR between the re-degraded test image and the reference
    Lrpsnr,
    /// Best PSNR of a centered crop over integer shifts
    ShiftedPsnr,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Reference image: ground truth, or the observation for lrpsnr
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Image under test
    #[arg(long)]
    test: PathBuf,
    /// Metrics to print (default: psnr ssim)
    #[arg(long, value_enum, num_args = 1..)]
    metric: Vec<MetricName>,
    /// Upsampling factor; sets the border crop and the lrpsnr operator
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Full-image RGB PSNR instead of the cropped Y channel
    #[arg(long)]
    full: bool,
    /// Blur kernel for lrpsnr
    #[arg(long, default_value = "bicubic")]
    kernel: KernelFlag,
    /// Centered patch side for shifted-psnr
    #[arg(long, default_value_t = 60)]
    crop: usize,
    /// Largest tested shift for shifted-psnr
    #[arg(long, default_value_t = 40)]
    max_shift: isize,
}

pub fn execute(args: EvalArgs) -> Result<(), CmdError> {
    check_image_paths([&args.reference, &args.test])?;
    let reference = load_image(&args.reference)?;
    let test = load_image(&args.test)?;
    let metrics = if args.metric.is_empty() {
        vec![MetricName::Psnr, MetricName::Ssim]
    } else {
        args.metric.clone()
    };
    for metric in metrics {
        match metric {
            MetricName::Psnr => {
                let cfg = if args.full {
                    MetricConfig::full_image()
                } else {
                    MetricConfig::luma_cropped(args.scale)
                };
                println!("psnr\t{}", format_db(psnr(&reference, &test, &cfg)?));
            }
            MetricName::Ssim => {
                let score = ssim(&luma(&reference)?, &luma(&test)?)?;
                println!("ssim\t{score:.4}");
            }
            MetricName::Lrpsnr => {
                let kernel = args.kernel.resolve(args.scale)?;
                let op = DegradationOperator::new(kernel, args.scale)?;
                println!("lrpsnr\t{}", format_db(lrpsnr(&test, &reference, &op)?));
            }
            MetricName::ShiftedPsnr => {
                let best =
                    shifted_max_psnr(&reference, &test, args.crop, args.max_shift)?;
                println!("shifted_psnr\t{}", format_db(best.db));
                println!("shift_dy\t{}", best.dy);
                println!("shift_dx\t{}", best.dx);
            }
        }
    }
    Ok(())
}

fn format_db(db: f64) -> String {
    format!("{:.2}", db.min(PSNR_DISPLAY_CAP))
}
