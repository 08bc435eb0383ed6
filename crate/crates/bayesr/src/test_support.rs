//! Deterministic random data for unit tests.

use crate::plane::ImagePlane;

/// Minimal linear-congruential generator; reproducible and dependency-free.
pub(crate) struct Lcg(u64);

impl Lcg {
    pub(crate) fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    /// Uniform draw in `[0, 1)`.
    pub(crate) fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Plane with entries uniform in `[-1, 1)`.
    pub(crate) fn plane(&mut self, h: usize, w: usize) -> ImagePlane {
        ImagePlane::from_fn(h, w, |_, _| self.next_f64() * 2.0 - 1.0)
    }

    /// Plane with entries uniform in `[0, 1)`.
    pub(crate) fn unit_plane(&mut self, h: usize, w: usize) -> ImagePlane {
        ImagePlane::from_fn(h, w, |_, _| self.next_f64())
    }
}
