//! Plumbing shared by the subcommands: image files keyed by extension,
//! derived seeds, the per-file job runner, and state directories that hold
//! one solver state per color channel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cli::{usage, CmdError};
use crate::degradation::DegradationOperator;
use crate::error::{Error, Result};
use crate::io::{dump_state, load_state, read_pfm, read_png, write_pfm, write_png};
use crate::plane::ImageStack;
use crate::priors::HyperParams;
use crate::solver::{solve, SolveSchedule, VariationalState};

/// Reads a PNG or PFM image, chosen by file extension.
pub fn load_image(path: &Path) -> Result<ImageStack> {
    match extension(path)?.as_str() {
        "png" => read_png(path),
        _ => read_pfm(path),
    }
}

/// Writes a PNG or PFM image, chosen by file extension.
pub fn save_image(path: &Path, stack: &ImageStack) -> Result<()> {
    match extension(path)?.as_str() {
        "png" => write_png(path, stack),
        _ => write_pfm(path, stack),
    }
}

/// Rejects paths whose extension names no supported image format.
pub fn check_image_paths<'a>(
    paths: impl IntoIterator<Item = &'a PathBuf>,
) -> std::result::Result<(), CmdError> {
    for path in paths {
        extension(path).map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn extension(path: &Path) -> Result<String> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") | Some("pfm") => Ok(ext.unwrap()),
        _ => Err(Error::InvalidInput(format!(
            "{} is neither .png nor .pfm",
            path.display()
        ))),
    }
}

/// Output path `{dir}/{stem}_{tag}.{ext}` for an input file.
pub fn tagged_output(dir: &Path, input: &Path, tag: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    let ext = input
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("png");
    dir.join(format!("{stem}_{tag}.{ext}"))
}

/// Independent seed for a lane (channel, sample block) under a base seed.
/// Lane strides are far apart so per-sample offsets never collide.
pub fn lane_seed(seed: u64, lane: u64) -> u64 {
    seed.wrapping_add(lane.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs `work` over the inputs, in order, on up to `jobs` worker threads.
/// Each call receives the input index so per-file seeds stay stable under
/// any thread count.
pub fn for_each_indexed<T, R, F>(jobs: usize, items: &[T], work: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R> + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| work(i, t)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.min(items.len()))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, t)| work(i, t))
            .collect()
    })
}

/// Solves one variational problem per color channel.
pub fn solve_channels(
    y: &ImageStack,
    op: &DegradationOperator,
    hyper: &HyperParams,
    schedule: &SolveSchedule,
    label: &str,
) -> Result<Vec<VariationalState>> {
    let mut states = Vec::with_capacity(y.channel_count());
    for (c, plane) in y.channels().iter().enumerate() {
        let (state, trace) = solve(plane, op, hyper, schedule)?;
        eprintln!(
            "{label}: channel {c} converged in {} sweeps, bound {:.6e}",
            trace.len().saturating_sub(1),
            trace.last().copied().unwrap_or(f64::NAN),
        );
        states.push(state);
    }
    Ok(states)
}

/// Writes one state per channel: a single-channel state occupies `dir`
/// itself, color states the subdirectories `c0`, `c1`, `c2`.
pub fn dump_channel_states(dir: &Path, states: &[VariationalState]) -> Result<()> {
    match states {
        [state] => dump_state(dir, state),
        _ => {
            for (c, state) in states.iter().enumerate() {
                dump_state(&dir.join(format!("c{c}")), state)?;
            }
            Ok(())
        }
    }
}

/// Reads back the layout written by [`dump_channel_states`].
pub fn load_channel_states(dir: &Path) -> Result<Vec<VariationalState>> {
    if dir.join(crate::io::MANIFEST_NAME).is_file() {
        return Ok(vec![load_state(dir)?]);
    }
    let mut states = Vec::new();
    for c in 0..3 {
        let sub = dir.join(format!("c{c}"));
        if !sub.join(crate::io::MANIFEST_NAME).is_file() {
            break;
        }
        states.push(load_state(&sub)?);
    }
    match states.len() {
        1 | 3 => Ok(states),
        n => Err(Error::Malformed {
            what: "state directory",
            path: dir.display().to_string(),
            reason: format!("expected 1 or 3 channel states, found {n}"),
        }),
    }
}
