//! Cubic-convolution upsampling, used to seed the solver.

use crate::error::{Error, Result};
use crate::plane::ImagePlane;

use super::kernel::cubic_weight;
use super::reflect;

/// Per-axis source indices and interpolation weights for one output line.
struct AxisTaps {
    idx: Vec<[usize; 4]>,
    wgt: Vec<[f64; 4]>,
}

fn axis_taps(out_len: usize, src_len: usize, scale: usize) -> AxisTaps {
    let mut idx = Vec::with_capacity(out_len);
    let mut wgt = Vec::with_capacity(out_len);
    for o in 0..out_len {
        let src = o as f64 / scale as f64;
        let i0 = src.floor() as isize - 1;
        let mut ids = [0usize; 4];
        let mut ws = [0f64; 4];
        for j in 0..4 {
            let i = i0 + j as isize;
            ids[j] = reflect(i, src_len);
            ws[j] = cubic_weight(src - i as f64);
        }
        idx.push(ids);
        wgt.push(ws);
    }
    AxisTaps { idx, wgt }
}

/// Upsamples by an integer factor with separable cubic convolution under
/// reflect padding. Output pixel `r` reads source coordinate `r / scale`,
/// so `scale == 1` reproduces the input exactly.
pub fn bicubic_upsample(lr: &ImagePlane, scale: usize) -> Result<ImagePlane> {
    if scale == 0 {
        return Err(Error::InvalidInput("scale must be at least 1".into()));
    }
    if lr.is_empty() {
        return Err(Error::InvalidInput("cannot upsample an empty plane".into()));
    }
    if scale == 1 {
        return Ok(lr.clone());
    }
    let (lh, lw) = lr.shape();
    let (hh, hw) = (lh * scale, lw * scale);
    let rows = axis_taps(hh, lh, scale);
    let cols = axis_taps(hw, lw, scale);
    Ok(ImagePlane::from_fn(hh, hw, |r, c| {
        let mut acc = 0.0;
        for jr in 0..4 {
            let wr = rows.wgt[r][jr];
            if wr == 0.0 {
                continue;
            }
            let src_r = rows.idx[r][jr];
            for jc in 0..4 {
                acc += wr * cols.wgt[c][jc] * lr[(src_r, cols.idx[c][jc])];
            }
        }
        acc
    }))
}
