//! Plain-text kernel files.
//!
//! Line 1 holds the kernel height and width; each following line holds one
//! row of weights. The reader tolerates small quantization drift by
//! renormalizing to unit sum, but rejects files whose sum is off by more
//! than 0.05 before normalization.

use std::fs;
use std::path::Path;

use crate::degradation::BlurKernel;
use crate::error::{Error, Result};

/// Largest tolerated deviation of the raw weight sum from one.
pub const KERNEL_SUM_TOLERANCE: f64 = 0.05;

/// Reads and renormalizes a kernel file.
pub fn read_kernel_file(path: &Path) -> Result<BlurKernel> {
    let text = fs::read_to_string(path)?;
    let mut tokens = text.split_whitespace();
    let h: usize = parse(tokens.next(), path, "height")?;
    let w: usize = parse(tokens.next(), path, "width")?;
    let mut weights = Vec::with_capacity(h * w);
    for token in tokens {
        let v: f64 = parse(Some(token), path, "weight")?;
        weights.push(v);
    }
    if weights.len() != h * w {
        return Err(malformed(
            path,
            format!("expected {} weights, found {}", h * w, weights.len()),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > KERNEL_SUM_TOLERANCE {
        return Err(malformed(
            path,
            format!("weights sum to {sum}, outside 1 +/- {KERNEL_SUM_TOLERANCE}"),
        ));
    }
    BlurKernel::normalized(h, w, weights)
        .map_err(|e| malformed(path, e.to_string()))
}

/// Writes a kernel with enough digits for an exact float round trip.
pub fn write_kernel_file(path: &Path, kernel: &BlurKernel) -> Result<()> {
    let (h, w) = kernel.shape();
    let mut text = format!("{h} {w}\n");
    for r in 0..h {
        let row: Vec<String> = (0..w).map(|c| format!("{:.16e}", kernel.at(r, c))).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse<T: std::str::FromStr>(token: Option<&str>, path: &Path, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| malformed(path, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| malformed(path, format!("unparseable {what} {token:?}")))
}

fn malformed(path: &Path, reason: String) -> Error {
    Error::Malformed {
        what: "kernel file",
        path: path.display().to_string(),
        reason,
    }
}
