//! Mean-field coordinate ascent for the restoration posterior.
//!
//! The posterior over the latent fields is approximated by a fully
//! factorized family: Gaussians for the smoothness component `x`, the
//! sparsity residual `z`, and the noise mean `m`, and Gamma factors for the
//! precision fields `upsilon`, `omega`, and `rho`. [`solve`] cycles through
//! the six closed-form coordinate updates and monitors the evidence bound,
//! which each exact update can only decrease.

pub mod bound;
pub mod updates;

pub use bound::evidence_bound;
#[cfg(test)]
pub(crate) use bound::bound_terms;
pub use updates::{
    update_noise_mean, update_omega, update_rho, update_smooth, update_sparse, update_upsilon,
};

use crate::degradation::upsample::bicubic_upsample;
use crate::degradation::DegradationOperator;
use crate::error::{Error, Result};
use crate::plane::ImagePlane;
use crate::priors::HyperParams;

/// Variational parameters of the factorized posterior.
///
/// Gaussian factors are stored as mean and variance planes; Gamma factors
/// as shape and rate planes. Fields over observation space share the
/// low-resolution shape, fields over the latent image share the
/// high-resolution shape.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    /// Noise-mean posterior mean (LR shape).
    pub(crate) mu_m: ImagePlane,
    /// Noise-mean posterior variance (LR shape).
    pub(crate) sigma_m2: ImagePlane,
    /// Noise-precision Gamma shape (LR shape).
    pub(crate) alpha_rho: ImagePlane,
    /// Noise-precision Gamma rate (LR shape).
    pub(crate) beta_rho: ImagePlane,
    /// Smoothness posterior mean (HR shape).
    pub(crate) mu_x: ImagePlane,
    /// Smoothness posterior variance (HR shape).
    pub(crate) sigma_x2: ImagePlane,
    /// Spatial-correlation Gamma shape (HR shape).
    pub(crate) alpha_ups: ImagePlane,
    /// Spatial-correlation Gamma rate (HR shape).
    pub(crate) beta_ups: ImagePlane,
    /// Sparsity posterior mean (HR shape).
    pub(crate) mu_z: ImagePlane,
    /// Sparsity posterior variance (HR shape).
    pub(crate) sigma_z2: ImagePlane,
    /// Sparsity-precision Gamma shape (HR shape).
    pub(crate) alpha_om: ImagePlane,
    /// Sparsity-precision Gamma rate (HR shape).
    pub(crate) beta_om: ImagePlane,
}

impl VariationalState {
    /// Field names and roles, in the canonical dump order.
    pub const FIELDS: [(&'static str, &'static str); 12] = [
        ("mu_m", "noise-mean posterior mean"),
        ("sigma_m2", "noise-mean posterior variance"),
        ("alpha_rho", "noise-precision Gamma shape"),
        ("beta_rho", "noise-precision Gamma rate"),
        ("mu_x", "smoothness posterior mean"),
        ("sigma_x2", "smoothness posterior variance"),
        ("alpha_ups", "spatial-correlation Gamma shape"),
        ("beta_ups", "spatial-correlation Gamma rate"),
        ("mu_z", "sparsity posterior mean"),
        ("sigma_z2", "sparsity posterior variance"),
        ("alpha_om", "sparsity-precision Gamma shape"),
        ("beta_om", "sparsity-precision Gamma rate"),
    ];

    /// Builds a state from its twelve parameter planes, in the order of
    /// [`FIELDS`](Self::FIELDS), checking shapes and positivity.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fields(
        mu_m: ImagePlane,
        sigma_m2: ImagePlane,
        alpha_rho: ImagePlane,
        beta_rho: ImagePlane,
        mu_x: ImagePlane,
        sigma_x2: ImagePlane,
        alpha_ups: ImagePlane,
        beta_ups: ImagePlane,
        mu_z: ImagePlane,
        sigma_z2: ImagePlane,
        alpha_om: ImagePlane,
        beta_om: ImagePlane,
    ) -> Result<Self> {
        let state = VariationalState {
            mu_m,
            sigma_m2,
            alpha_rho,
            beta_rho,
            mu_x,
            sigma_x2,
            alpha_ups,
            beta_ups,
            mu_z,
            sigma_z2,
            alpha_om,
            beta_om,
        };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        let lr = self.mu_m.shape();
        let hr = self.mu_x.shape();
        if self.mu_m.is_empty() || self.mu_x.is_empty() {
            return Err(Error::InvalidInput("state planes must be nonempty".into()));
        }
        for (name, plane) in self.fields() {
            let want = if is_lr_field(name) { lr } else { hr };
            if plane.shape() != want {
                return Err(Error::ShapeMismatch {
                    expected: want,
                    found: plane.shape(),
                });
            }
        }
        for (name, plane) in self.fields() {
            let must_be_positive = name.starts_with("sigma") || name.starts_with("alpha")
                || name.starts_with("beta");
            if must_be_positive && !plane.data().iter().all(|&v| v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "state field {name} must be strictly positive"
                )));
            }
        }
        Ok(())
    }

    /// `(name, plane)` pairs in the canonical dump order.
    pub fn fields(&self) -> [(&'static str, &ImagePlane); 12] {
        [
            ("mu_m", &self.mu_m),
            ("sigma_m2", &self.sigma_m2),
            ("alpha_rho", &self.alpha_rho),
            ("beta_rho", &self.beta_rho),
            ("mu_x", &self.mu_x),
            ("sigma_x2", &self.sigma_x2),
            ("alpha_ups", &self.alpha_ups),
            ("beta_ups", &self.beta_ups),
            ("mu_z", &self.mu_z),
            ("sigma_z2", &self.sigma_z2),
            ("alpha_om", &self.alpha_om),
            ("beta_om", &self.beta_om),
        ]
    }

    /// Low-resolution (observation) shape.
    pub fn lr_shape(&self) -> (usize, usize) {
        self.mu_m.shape()
    }

    /// High-resolution (latent image) shape.
    pub fn hr_shape(&self) -> (usize, usize) {
        self.mu_x.shape()
    }

    pub fn mu_m(&self) -> &ImagePlane {
        &self.mu_m
    }

    pub fn sigma_m2(&self) -> &ImagePlane {
        &self.sigma_m2
    }

    pub fn alpha_rho(&self) -> &ImagePlane {
        &self.alpha_rho
    }

    pub fn beta_rho(&self) -> &ImagePlane {
        &self.beta_rho
    }

    pub fn mu_x(&self) -> &ImagePlane {
        &self.mu_x
    }

    pub fn sigma_x2(&self) -> &ImagePlane {
        &self.sigma_x2
    }

    pub fn alpha_ups(&self) -> &ImagePlane {
        &self.alpha_ups
    }

    pub fn beta_ups(&self) -> &ImagePlane {
        &self.beta_ups
    }

    pub fn mu_z(&self) -> &ImagePlane {
        &self.mu_z
    }

    pub fn sigma_z2(&self) -> &ImagePlane {
        &self.sigma_z2
    }

    pub fn alpha_om(&self) -> &ImagePlane {
        &self.alpha_om
    }

    pub fn beta_om(&self) -> &ImagePlane {
        &self.beta_om
    }

    /// Posterior mean of the noise precision, `alpha_rho / beta_rho`.
    pub fn mu_rho(&self) -> ImagePlane {
        self.alpha_rho.zip_map(&self.beta_rho, |a, b| a / b)
    }

    /// Posterior mean of the spatial correlation, `alpha_ups / beta_ups`.
    pub fn mu_upsilon(&self) -> ImagePlane {
        self.alpha_ups.zip_map(&self.beta_ups, |a, b| a / b)
    }

    /// Posterior mean of the sparsity precision, `alpha_om / beta_om`.
    pub fn mu_omega(&self) -> ImagePlane {
        self.alpha_om.zip_map(&self.beta_om, |a, b| a / b)
    }

    /// Largest relative change of any field against `reference`, measured
    /// per field as the sup norm of the difference over the sup norm of the
    /// reference.
    pub fn max_rel_change(&self, reference: &VariationalState) -> f64 {
        self.fields()
            .iter()
            .zip(reference.fields().iter())
            .map(|((_, new), (_, old))| new.sub(old).max_abs() / (old.max_abs() + 1e-30))
            .fold(0.0, f64::max)
    }
}

fn is_lr_field(name: &str) -> bool {
    matches!(name, "mu_m" | "sigma_m2" | "alpha_rho" | "beta_rho")
}

/// Sweep budget and stopping rule for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSchedule {
    /// Upper bound on full coordinate sweeps.
    pub max_sweeps: usize,
    /// Relative objective-change threshold for convergence.
    pub rel_tol: f64,
    /// Whether to return the per-sweep objective trace.
    pub trace: bool,
}

impl Default for SolveSchedule {
    fn default() -> Self {
        SolveSchedule {
            max_sweeps: 500,
            rel_tol: 1e-6,
            trace: true,
        }
    }
}

impl SolveSchedule {
    fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidInput("max_sweeps must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must be positive and finite, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Selects which coordinate updates a sweep runs; disabled coordinates keep
/// their current values, which pins externally forced fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateMask {
    pub noise_mean: bool,
    pub sparse: bool,
    pub smooth: bool,
    pub upsilon: bool,
    pub omega: bool,
    pub rho: bool,
}

impl Default for UpdateMask {
    fn default() -> Self {
        UpdateMask {
            noise_mean: true,
            sparse: true,
            smooth: true,
            upsilon: true,
            omega: true,
            rho: true,
        }
    }
}

/// Deterministic starting point: the smoothness mean is the cubic upsample
/// of the observation, the other means are zero, Gaussian variances are
/// `1e-4`, and the Gamma factors sit at their priors.
pub fn init_state(
    y: &ImagePlane,
    op: &DegradationOperator,
    hyper: &HyperParams,
) -> Result<VariationalState> {
    hyper.validate()?;
    if y.is_empty() {
        return Err(Error::InvalidInput("observation must be nonempty".into()));
    }
    let (lh, lw) = y.shape();
    let s = op.scale();
    let (hh, hw) = (lh * s, lw * s);
    let mu_x = bicubic_upsample(y, s)?;
    Ok(VariationalState {
        mu_m: ImagePlane::zeros(lh, lw),
        sigma_m2: ImagePlane::filled(lh, lw, 1e-4),
        alpha_rho: ImagePlane::filled(lh, lw, hyper.gamma_rho),
        beta_rho: ImagePlane::filled(lh, lw, hyper.phi_rho),
        mu_x,
        sigma_x2: ImagePlane::filled(hh, hw, 1e-4),
        alpha_ups: ImagePlane::filled(hh, hw, hyper.gamma_upsilon),
        beta_ups: ImagePlane::filled(hh, hw, hyper.phi_upsilon),
        mu_z: ImagePlane::zeros(hh, hw),
        sigma_z2: ImagePlane::filled(hh, hw, 1e-4),
        alpha_om: ImagePlane::filled(hh, hw, hyper.gamma_omega),
        beta_om: ImagePlane::filled(hh, hw, hyper.phi_omega),
    })
}

/// Runs coordinate ascent from [`init_state`] until the evidence bound
/// stalls or the sweep budget is exhausted. Returns the final state and the
/// objective trace (initial value, then one entry per sweep; empty when the
/// schedule disables tracing).
pub fn solve(
    y: &ImagePlane,
    op: &DegradationOperator,
    hyper: &HyperParams,
    schedule: &SolveSchedule,
) -> Result<(VariationalState, Vec<f64>)> {
    let state = init_state(y, op, hyper)?;
    solve_from(state, y, op, hyper, schedule, &UpdateMask::default())
}

/// [`solve`] from a caller-provided state with a custom update mask.
///
/// A sweep applies the enabled updates in the order noise mean, sparse,
/// smooth, upsilon, omega, rho. Convergence requires both the relative
/// objective change (against `max(|previous|, 1)`) to drop below `rel_tol`
/// and the per-field relative parameter change to drop below
/// `10 * rel_tol`. Five consecutive objective rises beyond `1e-8` relative
/// abort with [`Error::Diverged`].
pub fn solve_from(
    mut state: VariationalState,
    y: &ImagePlane,
    op: &DegradationOperator,
    hyper: &HyperParams,
    schedule: &SolveSchedule,
    mask: &UpdateMask,
) -> Result<(VariationalState, Vec<f64>)> {
    schedule.validate()?;
    hyper.validate()?;
    state.validate()?;
    if state.lr_shape() != y.shape() || op.lr_shape(state.hr_shape()) != y.shape() {
        return Err(Error::ShapeMismatch {
            expected: y.shape(),
            found: state.lr_shape(),
        });
    }

    let mut trace = Vec::with_capacity(schedule.max_sweeps + 1);
    let mut prev = evidence_bound(&state, y, op, hyper)?;
    trace.push(prev);
    let mut rises = 0usize;
    for _ in 0..schedule.max_sweeps {
        let before = state.clone();
        if mask.noise_mean {
            update_noise_mean(&mut state, y, op, hyper);
        }
        if mask.sparse {
            update_sparse(&mut state, y, op, hyper);
        }
        if mask.smooth {
            update_smooth(&mut state, y, op, hyper);
        }
        if mask.upsilon {
            update_upsilon(&mut state, hyper);
        }
        if mask.omega {
            update_omega(&mut state, hyper);
        }
        if mask.rho {
            update_rho(&mut state, y, op, hyper);
        }
        let obj = evidence_bound(&state, y, op, hyper)?;
        trace.push(obj);

        if obj > prev + 1e-8 * prev.abs() {
            rises += 1;
            if rises >= 5 {
                return Err(Error::Diverged { rising: rises, trace });
            }
        } else {
            rises = 0;
        }

        let rel_obj = (prev - obj).abs() / prev.abs().max(1.0);
        let rel_param = state.max_rel_change(&before);
        prev = obj;
        if rel_obj < schedule.rel_tol && rel_param < 10.0 * schedule.rel_tol {
            break;
        }
    }
    if !schedule.trace {
        trace.clear();
    }
    Ok((state, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradation::kernel::BlurKernel;
    use crate::degradation::noise::add_awgn;

    fn delta_op(scale: usize) -> DegradationOperator {
        DegradationOperator::new(BlurKernel::delta(), scale).unwrap()
    }

    #[test]
    fn init_at_unit_scale_copies_observation() {
        let y = ImagePlane::from_fn(5, 7, |r, c| (r + 2 * c) as f64 * 0.01);
        let state = init_state(&y, &delta_op(1), &HyperParams::default()).unwrap();
        assert_eq!(state.mu_x().data(), y.data());
        assert_eq!(state.mu_z().max_abs(), 0.0);
        assert_eq!(state.mu_m().max_abs(), 0.0);
    }

    #[test]
    fn init_is_deterministic_and_valid() {
        let y = ImagePlane::from_fn(6, 6, |r, c| (r * c) as f64 * 0.02);
        let hyper = HyperParams::default();
        let op = delta_op(2);
        let a = init_state(&y, &op, &hyper).unwrap();
        let b = init_state(&y, &op, &hyper).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
        assert_eq!(a.hr_shape(), (12, 12));
        assert_eq!(a.alpha_rho().data()[0], hyper.gamma_rho);
        assert_eq!(a.beta_rho().data()[0], hyper.phi_rho);
        assert_eq!(a.sigma_x2().data()[0], 1e-4);
    }

    #[test]
    fn from_fields_rejects_nonpositive_variances() {
        let y = ImagePlane::filled(4, 4, 0.5);
        let good = init_state(&y, &delta_op(1), &HyperParams::default()).unwrap();
        let mut bad_sigma = good.sigma_x2().clone();
        bad_sigma.data_mut()[0] = 0.0;
        let err = VariationalState::from_fields(
            good.mu_m().clone(),
            good.sigma_m2().clone(),
            good.alpha_rho().clone(),
            good.beta_rho().clone(),
            good.mu_x().clone(),
            bad_sigma,
            good.alpha_ups().clone(),
            good.beta_ups().clone(),
            good.mu_z().clone(),
            good.sigma_z2().clone(),
            good.alpha_om().clone(),
            good.beta_om().clone(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn schedule_validation() {
        let y = ImagePlane::filled(4, 4, 0.5);
        let op = delta_op(1);
        let hyper = HyperParams::default();
        let bad = SolveSchedule {
            max_sweeps: 0,
            ..SolveSchedule::default()
        };
        assert!(solve(&y, &op, &hyper, &bad).is_err());
        let bad = SolveSchedule {
            rel_tol: 0.0,
            ..SolveSchedule::default()
        };
        assert!(solve(&y, &op, &hyper, &bad).is_err());
    }

    #[test]
    fn solve_produces_monotone_trace_and_near_fixed_point() {
        let clean = ImagePlane::filled(8, 8, 0.4);
        let y = add_awgn(&clean, 20.0 / 255.0, 11).unwrap();
        let op = delta_op(1);
        let hyper = HyperParams::supervised();
        let schedule = SolveSchedule {
            max_sweeps: 200,
            rel_tol: 1e-8,
            trace: true,
        };
        let (state, trace) = solve(&y, &op, &hyper, &schedule).unwrap();
        assert!(trace.len() >= 2);
        for pair in trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-8 * pair[0].abs(),
                "objective rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
        // One extra sweep barely moves a converged state.
        let mut extra = state.clone();
        update_noise_mean(&mut extra, &y, &op, &hyper);
        update_sparse(&mut extra, &y, &op, &hyper);
        update_smooth(&mut extra, &y, &op, &hyper);
        update_upsilon(&mut extra, &hyper);
        update_omega(&mut extra, &hyper);
        update_rho(&mut extra, &y, &op, &hyper);
        assert!(extra.max_rel_change(&state) < 1e-6);
    }

    #[test]
    fn masked_sweep_touches_only_enabled_fields() {
        let y = ImagePlane::from_fn(6, 6, |r, c| 0.3 + 0.01 * (r as f64) - 0.005 * (c as f64));
        let op = delta_op(1);
        let hyper = HyperParams::default();
        let init = init_state(&y, &op, &hyper).unwrap();
        let mask = UpdateMask {
            noise_mean: true,
            sparse: false,
            smooth: false,
            upsilon: false,
            omega: false,
            rho: false,
        };
        let schedule = SolveSchedule {
            max_sweeps: 1,
            rel_tol: 1e-12,
            trace: false,
        };
        let (state, _) = solve_from(init.clone(), &y, &op, &hyper, &schedule, &mask).unwrap();
        assert_ne!(state.sigma_m2().data(), init.sigma_m2().data());
        assert_eq!(state.mu_x().data(), init.mu_x().data());
        assert_eq!(state.beta_rho().data(), init.beta_rho().data());
    }

    #[test]
    fn solve_rejects_inconsistent_state_shapes() {
        let y = ImagePlane::filled(4, 4, 0.5);
        let op = delta_op(2);
        let hyper = HyperParams::default();
        let state = init_state(&y, &op, &hyper).unwrap();
        let other_y = ImagePlane::filled(5, 5, 0.5);
        let schedule = SolveSchedule::default();
        assert!(solve_from(
            state,
            &other_y,
            &op,
            &hyper,
            &schedule,
            &UpdateMask::default()
        )
        .is_err());
    }
}
