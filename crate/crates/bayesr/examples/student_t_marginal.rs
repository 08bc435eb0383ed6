//! The sparsity prior's heavy-tailed marginal.
//!
//! Marginalizing the Normal-Gamma pair `N(z | 0, w^-1) G(w | phi, gamma)`
//! over the precision yields a Student's t density with `2 gamma` degrees
//! of freedom and inverse squared scale `gamma / phi`. Tabulates the closed
//! form against brute-force quadrature and against a Gaussian of matched
//! variance to show the fat tails.

use bayesr::priors::{log_normal_pdf, marginalize_normal_gamma, student_t_logpdf};

fn main() -> bayesr::Result<()> {
    let (phi, gamma) = (1e-3, 2.0);
    let lam = gamma / phi;
    let dof = 2.0 * gamma;
    // Matched-variance Gaussian: a t with dof > 2 has variance
    // dof / (lam * (dof - 2)).
    let gauss_precision = lam * (dof - 2.0) / dof;

    println!("phi {phi:.1e}, gamma {gamma}: t(lam {lam:.0}, dof {dof})");
    println!("{:>7}  {:>12}  {:>12}  {:>12}", "z", "closed form", "quadrature", "gaussian");
    let mut worst = 0.0f64;
    for k in 0..9 {
        let z = 0.05 * k as f64;
        let closed = student_t_logpdf(z, 0.0, lam, dof)?.exp();
        let quad = marginalize_normal_gamma(z, 0.0, phi, gamma)?;
        let gauss = log_normal_pdf(z, 0.0, gauss_precision)?.exp();
        worst = worst.max((closed - quad).abs());
        println!("{z:>7.2}  {closed:>12.6e}  {quad:>12.6e}  {gauss:>12.6e}");
    }
    println!("max |closed - quadrature| = {worst:.3e}");
    Ok(())
}
