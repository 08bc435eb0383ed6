//! Deterministic and stochastic restoration from a converged solver state.
//!
//! The deterministic restoration is the posterior mean of the latent image.
//! Stochastic restorations draw the smoothness and sparsity factors from
//! their variational posteriors instead, which makes the reconstruction
//! uncertainty visible as variation across samples.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::plane::ImagePlane;
use crate::solver::VariationalState;

/// Sample count used when the caller does not pick one.
pub const DEFAULT_SAMPLE_COUNT: usize = 10;

/// A deterministic restoration together with stochastic samples around it.
///
/// Samples are kept at their drawn values; clamping to the displayable range
/// happens at image export.
#[derive(Debug, Clone)]
pub struct RestorationSet {
    /// Posterior-mean restoration.
    pub deterministic: ImagePlane,
    /// Stochastic restorations, one per derived seed.
    pub samples: Vec<ImagePlane>,
    /// Base seed the samples were drawn from.
    pub seed: u64,
}

/// Returns the posterior-mean restoration `mu_x + mu_z`, unclamped.
pub fn deterministic_restore(state: &VariationalState) -> ImagePlane {
    state.mu_x().add(state.mu_z())
}

/// Draws `n` stochastic restorations `x + z` with both factors sampled from
/// their posteriors.
///
/// Sample `i` uses the derived seed `seed + i` and draws the smoothness
/// factor row-major before the sparsity factor, so any prefix of a larger
/// sample set is reproducible on its own.
pub fn sample_restorations(
    state: &VariationalState,
    n: usize,
    seed: u64,
) -> Result<RestorationSet> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    let sigma_x = state.sigma_x2().map(f64::sqrt);
    let sigma_z = state.sigma_z2().map(f64::sqrt);
    let samples = (0..n)
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let x = state.mu_x().zip_map(&sigma_x, |m, s| {
                let e: f64 = StandardNormal.sample(&mut rng);
                m + s * e
            });
            let z = state.mu_z().zip_map(&sigma_z, |m, s| {
                let e: f64 = StandardNormal.sample(&mut rng);
                m + s * e
            });
            x.add(&z)
        })
        .collect();
    Ok(RestorationSet {
        deterministic: deterministic_restore(state),
        samples,
        seed,
    })
}

/// Mean per-pixel standard deviation across the samples, on the 0..255
/// display scale.
///
/// The per-pixel statistic is the population standard deviation, so two
/// samples a constant 0.1 apart score exactly 12.75.
pub fn diversity_score(set: &RestorationSet) -> Result<f64> {
    let n = set.samples.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "diversity needs at least 2 samples, got {n}"
        )));
    }
    let shape = set.samples[0].shape();
    for sample in &set.samples {
        if sample.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: sample.shape(),
            });
        }
    }
    let pixels = set.samples[0].len();
    let mut acc = 0.0;
    for p in 0..pixels {
        let mean = set.samples.iter().map(|s| s.data()[p]).sum::<f64>() / n as f64;
        let var = set
            .samples
            .iter()
            .map(|s| {
                let d = s.data()[p] - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        acc += var.sqrt();
    }
    Ok(255.0 * acc / pixels as f64)
}
