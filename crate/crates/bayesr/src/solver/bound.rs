//! The evidence bound monitored by the solver.
//!
//! The objective is `E[log q(psi)] - E[log p(psi, y)]` under the factorized
//! posterior: the negative entropies of the six factors plus the expected
//! negative log-likelihood and the expected negative log-priors. The
//! determinant of the smoothness prior is handled with the standard
//! per-pixel surrogate, which is what makes the upsilon update below the
//! exact minimizer of this expression. Coordinate updates can only lower
//! the value; [`solve`](super::solve) treats sustained rises as divergence.

use crate::degradation::DegradationOperator;
use crate::error::{Error, Result};
use crate::plane::{
    finite_difference, weighted_laplacian_diag, Axis, ImagePlane,
};
use crate::priors::{digamma_raw, lgamma_raw, HyperParams, LN_2PI};

use super::VariationalState;

/// Evaluates the bound. Fails with a term-identifying numerical error if
/// any contribution is non-finite.
pub fn evidence_bound(
    state: &VariationalState,
    y: &ImagePlane,
    op: &DegradationOperator,
    hyper: &HyperParams,
) -> Result<f64> {
    let mut total = 0.0;
    for (name, value) in bound_terms(state, y, op, hyper) {
        if !value.is_finite() {
            return Err(Error::Numerical(format!(
                "evidence bound term {name} is not finite ({value})"
            )));
        }
        total += value;
    }
    Ok(total)
}

/// The thirteen named contributions, in a fixed order. Their sum is the
/// bound; the split exists for diagnostics and for the tests.
pub(crate) fn bound_terms(
    state: &VariationalState,
    y: &ImagePlane,
    op: &DegradationOperator,
    hyper: &HyperParams,
) -> [(&'static str, f64); 13] {
    let d_y = y.len() as f64;
    let d_x = state.mu_x().len() as f64;
    let mu_rho = state.mu_rho();
    let mu_ups = state.mu_upsilon();
    let mu_om = state.mu_omega();

    let entropy_m = gaussian_neg_entropy(state.sigma_m2());
    let entropy_rho = gamma_neg_entropy(state.alpha_rho(), state.beta_rho());
    let entropy_x = gaussian_neg_entropy(state.sigma_x2());
    let entropy_ups = gamma_neg_entropy(state.alpha_ups(), state.beta_ups());
    let entropy_z = gaussian_neg_entropy(state.sigma_z2());
    let entropy_om = gamma_neg_entropy(state.alpha_om(), state.beta_om());

    // Expected negative log-likelihood of the observation.
    let resid = y
        .sub(&op.apply(&state.mu_x().add(state.mu_z())))
        .sub(state.mu_m());
    let var_flow = op.apply_sq(&state.sigma_x2().add(state.sigma_z2()));
    let mut quad = 0.0;
    for i in 0..y.len() {
        let e = resid.data()[i];
        quad += mu_rho.data()[i] * (e * e + var_flow.data()[i] + state.sigma_m2().data()[i]);
    }
    let likelihood_y =
        0.5 * d_y * LN_2PI - 0.5 * expected_log_sum(state.alpha_rho(), state.beta_rho())
            + 0.5 * quad;

    // Expected negative log-priors.
    let m_quad: f64 = state
        .mu_m()
        .data()
        .iter()
        .zip(state.sigma_m2().data())
        .map(|(&m, &s2)| (m - hyper.mu0) * (m - hyper.mu0) + s2)
        .sum();
    let prior_m = 0.5 * d_y * LN_2PI - 0.5 * d_y * hyper.sigma0.ln() + 0.5 * hyper.sigma0 * m_quad;
    let prior_rho = gamma_cross(
        state.alpha_rho(),
        state.beta_rho(),
        hyper.gamma_rho,
        hyper.phi_rho,
    );

    let dh = finite_difference(state.mu_x(), Axis::Horizontal).expect("nonempty state");
    let dv = finite_difference(state.mu_x(), Axis::Vertical).expect("nonempty state");
    let grad_quad = mu_ups.dot(&dh.mul(&dh)) + mu_ups.dot(&dv.mul(&dv));
    let trace_quad = weighted_laplacian_diag(&mu_ups).dot(state.sigma_x2());
    let prior_x = 0.5 * d_x * LN_2PI - 0.5 * expected_log_sum(state.alpha_ups(), state.beta_ups())
        + 0.5 * (grad_quad + trace_quad);
    let prior_ups = gamma_cross(
        state.alpha_ups(),
        state.beta_ups(),
        hyper.gamma_upsilon,
        hyper.phi_upsilon,
    );

    let z_quad: f64 = state
        .mu_z()
        .data()
        .iter()
        .zip(state.sigma_z2().data())
        .zip(mu_om.data())
        .map(|((&m, &s2), &w)| w * (m * m + s2))
        .sum();
    let prior_z = 0.5 * d_x * LN_2PI - 0.5 * expected_log_sum(state.alpha_om(), state.beta_om())
        + 0.5 * z_quad;
    let prior_om = gamma_cross(
        state.alpha_om(),
        state.beta_om(),
        hyper.gamma_omega,
        hyper.phi_omega,
    );

    [
        ("entropy_m", entropy_m),
        ("entropy_rho", entropy_rho),
        ("entropy_x", entropy_x),
        ("entropy_ups", entropy_ups),
        ("entropy_z", entropy_z),
        ("entropy_om", entropy_om),
        ("likelihood_y", likelihood_y),
        ("prior_m", prior_m),
        ("prior_rho", prior_rho),
        ("prior_x", prior_x),
        ("prior_ups", prior_ups),
        ("prior_z", prior_z),
        ("prior_om", prior_om),
    ]
}

/// Negative entropy of a diagonal Gaussian with the given variances.
fn gaussian_neg_entropy(sigma2: &ImagePlane) -> f64 {
    let d = sigma2.len() as f64;
    let log_sum: f64 = sigma2.data().iter().map(|&v| v.ln()).sum();
    -0.5 * d * (LN_2PI + 1.0) - 0.5 * log_sum
}

/// Negative entropy of independent Gamma factors, summed over pixels.
fn gamma_neg_entropy(alpha: &ImagePlane, beta: &ImagePlane) -> f64 {
    alpha
        .data()
        .iter()
        .zip(beta.data())
        .map(|(&a, &b)| -a + b.ln() - lgamma_raw(a) + (a - 1.0) * digamma_raw(a))
        .sum()
}

/// `sum_i E[log g_i]` for Gamma factors: `digamma(alpha) - log(beta)`.
fn expected_log_sum(alpha: &ImagePlane, beta: &ImagePlane) -> f64 {
    alpha
        .data()
        .iter()
        .zip(beta.data())
        .map(|(&a, &b)| digamma_raw(a) - b.ln())
        .sum()
}

/// `-sum_i E[log p(g_i)]` for a Gamma prior with the given shape and rate.
fn gamma_cross(alpha: &ImagePlane, beta: &ImagePlane, shape: f64, rate: f64) -> f64 {
    alpha
        .data()
        .iter()
        .zip(beta.data())
        .map(|(&a, &b)| {
            -shape * rate.ln() + lgamma_raw(shape) - (shape - 1.0) * (digamma_raw(a) - b.ln())
                + rate * (a / b)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradation::kernel::BlurKernel;
    use crate::solver::updates::{
        update_noise_mean, update_omega, update_rho, update_smooth, update_sparse, update_upsilon,
    };
    use crate::solver::init_state;
    use crate::test_support::Lcg;

    fn random_instance(
        rng: &mut Lcg,
        lr: (usize, usize),
        scale: usize,
        kernel: BlurKernel,
    ) -> (ImagePlane, DegradationOperator, VariationalState) {
        let op = DegradationOperator::new(kernel, scale).unwrap();
        let y = rng.unit_plane(lr.0, lr.1);
        let hr = (lr.0 * scale, lr.1 * scale);
        let state = VariationalState::from_fields(
            rng.plane(lr.0, lr.1),
            rng.unit_plane(lr.0, lr.1).map(|v| 0.5 + v),
            rng.unit_plane(lr.0, lr.1).map(|v| 1.0 + v),
            rng.unit_plane(lr.0, lr.1).map(|v| 0.5 + v),
            rng.plane(hr.0, hr.1),
            rng.unit_plane(hr.0, hr.1).map(|v| 0.5 + v),
            rng.unit_plane(hr.0, hr.1).map(|v| 1.0 + v),
            rng.unit_plane(hr.0, hr.1).map(|v| 0.5 + v),
            rng.plane(hr.0, hr.1),
            rng.unit_plane(hr.0, hr.1).map(|v| 0.5 + v),
            rng.unit_plane(hr.0, hr.1).map(|v| 1.0 + v),
            rng.unit_plane(hr.0, hr.1).map(|v| 0.5 + v),
        )
        .unwrap();
        (y, op, state)
    }

    #[test]
    fn matched_noise_mean_factor_contributes_nothing() {
        let y = ImagePlane::filled(4, 4, 0.5);
        let hyper = HyperParams {
            sigma0: 25.0,
            mu0: 0.1,
            ..HyperParams::default()
        };
        let op = DegradationOperator::new(BlurKernel::delta(), 1).unwrap();
        let mut state = init_state(&y, &op, &hyper).unwrap();
        state.mu_m = ImagePlane::filled(4, 4, hyper.mu0);
        state.sigma_m2 = ImagePlane::filled(4, 4, 1.0 / hyper.sigma0);
        let terms = bound_terms(&state, &y, &op, &hyper);
        let entropy_m = terms[0].1;
        let prior_m = terms[7].1;
        assert!(
            (entropy_m + prior_m).abs() < 1e-9,
            "m factor KL should vanish, got {}",
            entropy_m + prior_m
        );
    }

    #[test]
    fn bound_is_finite_on_random_states() {
        let mut rng = Lcg::new(55);
        let hyper = HyperParams::default();
        for trial in 0..5 {
            let scale = 1 + trial % 2;
            let (y, op, state) =
                random_instance(&mut rng, (5, 6), scale, BlurKernel::bicubic(scale).unwrap());
            assert!(evidence_bound(&state, &y, &op, &hyper).unwrap().is_finite());
        }
    }

    #[test]
    fn non_finite_term_is_reported_by_name() {
        let y = ImagePlane::filled(3, 3, 0.5);
        let op = DegradationOperator::new(BlurKernel::delta(), 1).unwrap();
        let hyper = HyperParams::default();
        let mut state = init_state(&y, &op, &hyper).unwrap();
        state.beta_ups.data_mut()[0] = f64::INFINITY;
        match evidence_bound(&state, &y, &op, &hyper) {
            Err(Error::Numerical(msg)) => assert!(msg.contains("entropy_ups"), "{msg}"),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn every_update_weakly_decreases_the_bound() {
        let mut rng = Lcg::new(2024);
        let hyper = HyperParams::default();
        type Step = (&'static str, fn(&mut VariationalState, &ImagePlane, &DegradationOperator, &HyperParams));
        let steps: [Step; 6] = [
            ("noise_mean", |s, y, op, h| update_noise_mean(s, y, op, h)),
            ("sparse", |s, y, op, h| update_sparse(s, y, op, h)),
            ("smooth", |s, y, op, h| update_smooth(s, y, op, h)),
            ("upsilon", |s, _, _, h| update_upsilon(s, h)),
            ("omega", |s, _, _, h| update_omega(s, h)),
            ("rho", |s, y, op, h| update_rho(s, y, op, h)),
        ];
        for trial in 0..10 {
            let scale = 1 + trial % 2;
            let kernel = if trial % 3 == 0 {
                BlurKernel::delta()
            } else {
                BlurKernel::gaussian(3, 0.8, 1.1, 0.2).unwrap()
            };
            let (y, op, mut state) = random_instance(&mut rng, (4, 5), scale, kernel);
            let mut prev = evidence_bound(&state, &y, &op, &hyper).unwrap();
            for sweep in 0..3 {
                for (name, step) in &steps {
                    step(&mut state, &y, &op, &hyper);
                    let cur = evidence_bound(&state, &y, &op, &hyper).unwrap();
                    assert!(
                        cur <= prev + 1e-8 * prev.abs(),
                        "trial {trial} sweep {sweep}: {name} raised bound {prev} -> {cur}"
                    );
                    prev = cur;
                }
            }
        }
    }
}
