//! Dense image planes and the finite-difference machinery.
//!
//! An [`ImagePlane`] stores one channel of an image in row-major `f64`,
//! nominally in `[0, 1]` but intentionally unclamped: the solver's Gaussian
//! fields are unbounded and clamping happens only at image export and metric
//! input. [`ImageStack`] groups one or three planes of equal shape.
//!
//! The module also provides the forward-difference operators `D_h`/`D_v`
//! with their exact adjoints, and the weighted quadratic forms built from
//! them that the solver needs: the diagonal of
//! `D_h' diag(w) D_h + D_v' diag(w) D_v` and the per-gradient row squares.

use crate::error::{Error, Result};

/// Differencing direction for [`finite_difference`] and its adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Differences along rows: `out[r, c] = in[r, c+1] - in[r, c]`.
    Horizontal,
    /// Differences along columns: `out[r, c] = in[r+1, c] - in[r, c]`.
    Vertical,
}

/// A single image channel with row-major `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    /// Creates an all-zero plane.
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Creates a plane with every sample set to `value`.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        ImagePlane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Builds a plane from row-major data, checking length and finiteness.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidInput(format!(
                "plane data length {} does not match {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("plane contains non-finite samples".into()));
        }
        Ok(ImagePlane {
            height,
            width,
            data,
        })
    }

    /// Builds a plane by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        ImagePlane {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major sample slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable row-major sample slice.
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Returns a new plane with `f` applied to every sample.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        ImagePlane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combines two planes elementwise. Panics if the shapes differ.
    pub fn zip_map(&self, other: &ImagePlane, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        ImagePlane {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Elementwise sum. Panics if the shapes differ.
    pub fn add(&self, other: &ImagePlane) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    /// Elementwise difference. Panics if the shapes differ.
    pub fn sub(&self, other: &ImagePlane) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Elementwise product. Panics if the shapes differ.
    pub fn mul(&self, other: &ImagePlane) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Multiplies every sample by `s`.
    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Euclidean inner product. Panics if the shapes differ.
    pub fn dot(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dot shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// Sum of all samples.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Arithmetic mean of all samples.
    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    /// Population variance of all samples.
    pub fn variance(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        self.data.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64
    }

    /// Largest absolute sample value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Returns a copy clamped to `[lo, hi]`.
    pub fn clamped(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    /// True when every sample is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for ImagePlane {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.width + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ImagePlane {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.width + c]
    }
}

/// One or three equally shaped channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStack {
    channels: Vec<ImagePlane>,
}

impl ImageStack {
    /// Wraps channels, enforcing a count of 1 or 3 and equal shapes.
    pub fn new(channels: Vec<ImagePlane>) -> Result<Self> {
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "an image stack holds 1 or 3 channels, got {}",
                channels.len()
            )));
        }
        let shape = channels[0].shape();
        for ch in &channels[1..] {
            if ch.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    found: ch.shape(),
                });
            }
        }
        Ok(ImageStack { channels })
    }

    /// Wraps a single plane as a grayscale stack.
    pub fn gray(plane: ImagePlane) -> Self {
        ImageStack {
            channels: vec![plane],
        }
    }

    pub fn channels(&self) -> &[ImagePlane] {
        &self.channels
    }

    pub fn shape(&self) -> (usize, usize) {
        self.channels[0].shape()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Applies `f` to every channel, rebuilding the stack.
    pub fn map_channels(&self, f: impl Fn(&ImagePlane) -> ImagePlane) -> Self {
        ImageStack {
            channels: self.channels.iter().map(f).collect(),
        }
    }

    /// Applies a fallible `f` to every channel.
    pub fn try_map_channels(
        &self,
        f: impl Fn(&ImagePlane) -> Result<ImagePlane>,
    ) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        ImageStack::new(channels)
    }
}

fn require_non_empty(plane: &ImagePlane) -> Result<()> {
    if plane.is_empty() {
        Err(Error::InvalidInput("empty plane".into()))
    } else {
        Ok(())
    }
}

/// Forward difference along `axis` with the trailing row or column of the
/// gradient set to zero, so the output shape equals the input shape.
pub fn finite_difference(plane: &ImagePlane, axis: Axis) -> Result<ImagePlane> {
    require_non_empty(plane)?;
    let (h, w) = plane.shape();
    let mut out = ImagePlane::zeros(h, w);
    match axis {
        Axis::Horizontal => {
            for r in 0..h {
                for c in 0..w.saturating_sub(1) {
                    out[(r, c)] = plane[(r, c + 1)] - plane[(r, c)];
                }
            }
        }
        Axis::Vertical => {
            for r in 0..h.saturating_sub(1) {
                for c in 0..w {
                    out[(r, c)] = plane[(r + 1, c)] - plane[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Exact adjoint of [`finite_difference`] under the Euclidean inner product.
pub fn finite_difference_adjoint(plane: &ImagePlane, axis: Axis) -> Result<ImagePlane> {
    require_non_empty(plane)?;
    let (h, w) = plane.shape();
    let mut out = ImagePlane::zeros(h, w);
    match axis {
        Axis::Horizontal => {
            for r in 0..h {
                for c in 0..w.saturating_sub(1) {
                    let g = plane[(r, c)];
                    out[(r, c + 1)] += g;
                    out[(r, c)] -= g;
                }
            }
        }
        Axis::Vertical => {
            for r in 0..h.saturating_sub(1) {
                for c in 0..w {
                    let g = plane[(r, c)];
                    out[(r + 1, c)] += g;
                    out[(r, c)] -= g;
                }
            }
        }
    }
    Ok(out)
}

/// Weighted squared norm `sum_i w_i v_i^2`.
pub fn weighted_sq_norm(v: &ImagePlane, w: &ImagePlane) -> Result<f64> {
    if v.shape() != w.shape() {
        return Err(Error::ShapeMismatch {
            expected: v.shape(),
            found: w.shape(),
        });
    }
    if w.data().iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidInput("negative weight in squared norm".into()));
    }
    Ok(v
        .data()
        .iter()
        .zip(w.data())
        .map(|(&vi, &wi)| wi * vi * vi)
        .sum())
}

/// Applies `D_h' diag(w) D_h + D_v' diag(w) D_v` to `v`.
pub fn weighted_laplacian_apply(w: &ImagePlane, v: &ImagePlane) -> ImagePlane {
    assert_eq!(w.shape(), v.shape(), "laplacian shape mismatch");
    let gh = finite_difference(v, Axis::Horizontal).expect("non-empty");
    let gv = finite_difference(v, Axis::Vertical).expect("non-empty");
    let th = finite_difference_adjoint(&gh.mul(w), Axis::Horizontal).expect("non-empty");
    let tv = finite_difference_adjoint(&gv.mul(w), Axis::Vertical).expect("non-empty");
    th.add(&tv)
}

/// Diagonal of `D_h' diag(w) D_h + D_v' diag(w) D_v`.
///
/// With unit weights this is 4 at interior pixels and smaller on the
/// boundary, which is what makes the common `4 sigma^2` shorthand for the
/// smoothness trace term exact away from the image edges.
pub fn weighted_laplacian_diag(w: &ImagePlane) -> ImagePlane {
    let (h, wd) = w.shape();
    ImagePlane::from_fn(h, wd, |r, c| {
        let mut d = 0.0;
        if c + 1 < wd {
            d += w[(r, c)];
        }
        if c >= 1 {
            d += w[(r, c - 1)];
        }
        if r + 1 < h {
            d += w[(r, c)];
        }
        if r >= 1 {
            d += w[(r - 1, c)];
        }
        d
    })
}

/// Per-gradient-index row squares of the stacked difference operator:
/// entry `i` is `sum_l (D_h[i, l]^2 + D_v[i, l]^2) v_l`.
///
/// For the forward-difference rows this is `v[r, c] + v[r, c+1]` on the
/// horizontal axis (zero in the last column) plus the vertical analogue.
pub fn difference_row_sq(v: &ImagePlane) -> ImagePlane {
    let (h, w) = v.shape();
    ImagePlane::from_fn(h, w, |r, c| {
        let mut s = 0.0;
        if c + 1 < w {
            s += v[(r, c)] + v[(r, c + 1)];
        }
        if r + 1 < h {
            s += v[(r, c)] + v[(r + 1, c)];
        }
        s
    })
}
