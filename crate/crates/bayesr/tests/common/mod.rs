//! Shared fixtures and the materialized-matrix oracle used by the
//! integration suites.
//!
//! Everything here recomputes model quantities from first principles with
//! dense matrices, explicit index stepping, and textbook series for the
//! special functions, so agreement with the library exercises the operator
//! algebra rather than repeating it.

#![allow(dead_code)]

use bayesr::degradation::{BlurKernel, DegradationOperator};
use bayesr::plane::ImagePlane;
use bayesr::priors::HyperParams;
use bayesr::solver::VariationalState;

const LN_2PI: f64 = 1.8378770664093453;

// ---------------------------------------------------------------------------
// Deterministic scalar generator.

/// Multiplicative congruential generator, good enough for fixtures and
/// fully reproducible across platforms.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    /// Uniform sample in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn next_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_f64() * (hi - lo + 1) as f64) as usize
    }

    /// Plane with samples in `[-1, 1)`.
    pub fn plane(&mut self, h: usize, w: usize) -> ImagePlane {
        ImagePlane::from_fn(h, w, |_, _| 2.0 * self.next_f64() - 1.0)
    }

    /// Plane with samples in `[0, 1)`.
    pub fn unit_plane(&mut self, h: usize, w: usize) -> ImagePlane {
        ImagePlane::from_fn(h, w, |_, _| self.next_f64())
    }
}

/// Piecewise-constant test image: a mid-gray background with a few
/// axis-aligned rectangles at distinct levels.
pub fn piecewise_constant(h: usize, w: usize, seed: u64) -> ImagePlane {
    let mut rng = Lcg::new(seed);
    let mut img = ImagePlane::filled(h, w, 0.35);
    let levels = [0.1, 0.55, 0.8, 0.25, 0.65];
    for &level in &levels {
        let top = rng.next_in(0, h - 2);
        let left = rng.next_in(0, w - 2);
        let bottom = rng.next_in(top + 1, h - 1);
        let right = rng.next_in(left + 1, w - 1);
        for r in top..=bottom {
            for c in left..=right {
                img[(r, c)] = level;
            }
        }
    }
    img
}

/// Random but valid variational state for an `lr` observation at the given
/// `hr` shape: positive variances, Gamma parameters away from zero.
pub fn random_state(
    rng: &mut Lcg,
    lr: (usize, usize),
    hr: (usize, usize),
) -> VariationalState {
    VariationalState::from_fields(
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
    .expect("constructed fields are valid")
}

// ---------------------------------------------------------------------------
// Dense linear algebra.

/// Row-major dense matrix.
#[derive(Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn t(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let v = self.get(r, k);
                if v == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += v * rhs.get(k, c);
                }
            }
        }
        out
    }

    pub fn mv(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// `diag(w) * self`.
    pub fn scaled_rows(&self, w: &[f64]) -> Mat {
        assert_eq!(self.rows, w.len());
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[r * self.cols + c] *= w[r];
            }
        }
        out
    }

    /// Elementwise squares, for diagonal-of-gram computations.
    pub fn squared(&self) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= *v;
        }
        out
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn add_diag(&mut self, d: &[f64]) {
        assert_eq!(self.rows, d.len());
        for (i, v) in d.iter().enumerate() {
            self.data[i * self.cols + i] += v;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }
}

/// `M' diag(w) M`.
pub fn gram(m: &Mat, w: &[f64]) -> Mat {
    m.t().mul(&m.scaled_rows(w))
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(mut a: Mat, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a.get(i, col)
                    .abs()
                    .partial_cmp(&a.get(j, col).abs())
                    .unwrap()
            })
            .unwrap();
        assert!(a.get(pivot, col).abs() > 1e-300, "singular system");
        if pivot != col {
            for c in 0..n {
                let tmp = a.get(col, c);
                a.set(col, c, a.get(pivot, c));
                a.set(pivot, c, tmp);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a.get(col, col);
        for row in col + 1..n {
            let factor = a.get(row, col) * inv;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                let v = a.get(row, c) - factor * a.get(col, c);
                a.set(row, c, v);
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a.get(row, c) * x[c];
        }
        x[row] = acc / a.get(row, row);
    }
    x
}

// ---------------------------------------------------------------------------
// Materialized model operators.

/// Reflect indexing by explicit stepping, the reference for the operator's
/// modular formula.
pub fn reflect_step(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -1 - i;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Dense matrix of the blur-decimate operator: one row per low-resolution
/// pixel, built by scattering kernel taps under reflect padding.
pub fn dense_operator(kernel: &BlurKernel, scale: usize, hr: (usize, usize)) -> Mat {
    let (hh, hw) = hr;
    let lh = hh.div_ceil(scale);
    let lw = hw.div_ceil(scale);
    let (kh, kw) = kernel.shape();
    let mut a = Mat::zeros(lh * lw, hh * hw);
    for lr_r in 0..lh {
        for lr_c in 0..lw {
            let row = lr_r * lw + lr_c;
            for p in 0..kh {
                for q in 0..kw {
                    let hr_r =
                        reflect_step((lr_r * scale + p) as isize - (kh / 2) as isize, hh);
                    let hr_c =
                        reflect_step((lr_c * scale + q) as isize - (kw / 2) as isize, hw);
                    let col = hr_r * hw + hr_c;
                    a.data[row * a.cols + col] += kernel.at(p, q);
                }
            }
        }
    }
    a
}

/// Dense forward-difference matrices along rows and columns; the trailing
/// column and row of gradients are zero.
pub fn dense_differences(hr: (usize, usize)) -> (Mat, Mat) {
    let (h, w) = hr;
    let n = h * w;
    let mut dh = Mat::zeros(n, n);
    let mut dv = Mat::zeros(n, n);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                dh.set(i, i + 1, 1.0);
                dh.set(i, i, -1.0);
            }
            if r + 1 < h {
                dv.set(i, i + w, 1.0);
                dv.set(i, i, -1.0);
            }
        }
    }
    (dh, dv)
}

// ---------------------------------------------------------------------------
// Independent special functions (Stirling series with argument shift).

/// Reference log-gamma for positive arguments.
pub fn ref_lgamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * LN_2PI + series
}

/// Reference digamma for positive arguments.
pub fn ref_digamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    shift + x.ln() - 0.5 / x - series
}

// ---------------------------------------------------------------------------
// Dense mirror of the coordinate updates and the evidence bound.

/// Plain-vector copy of a variational state.
#[derive(Clone)]
pub struct DenseState {
    pub mu_m: Vec<f64>,
    pub sigma_m2: Vec<f64>,
    pub alpha_rho: Vec<f64>,
    pub beta_rho: Vec<f64>,
    pub mu_x: Vec<f64>,
    pub sigma_x2: Vec<f64>,
    pub alpha_ups: Vec<f64>,
    pub beta_ups: Vec<f64>,
    pub mu_z: Vec<f64>,
    pub sigma_z2: Vec<f64>,
    pub alpha_om: Vec<f64>,
    pub beta_om: Vec<f64>,
}

impl DenseState {
    pub fn from_state(state: &VariationalState) -> Self {
        let grab = |i: usize| state.fields()[i].1.data().to_vec();
        DenseState {
            mu_m: grab(0),
            sigma_m2: grab(1),
            alpha_rho: grab(2),
            beta_rho: grab(3),
            mu_x: grab(4),
            sigma_x2: grab(5),
            alpha_ups: grab(6),
            beta_ups: grab(7),
            mu_z: grab(8),
            sigma_z2: grab(9),
            alpha_om: grab(10),
            beta_om: grab(11),
        }
    }

    pub fn mu_rho(&self) -> Vec<f64> {
        ratio(&self.alpha_rho, &self.beta_rho)
    }

    pub fn mu_ups(&self) -> Vec<f64> {
        ratio(&self.alpha_ups, &self.beta_ups)
    }

    pub fn mu_om(&self) -> Vec<f64> {
        ratio(&self.alpha_om, &self.beta_om)
    }
}

fn ratio(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x / y).collect()
}

fn add_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mul_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// The model matrices for one instance.
pub struct DenseModel {
    pub a: Mat,
    pub dh: Mat,
    pub dv: Mat,
}

impl DenseModel {
    pub fn build(op: &DegradationOperator, hr: (usize, usize)) -> Self {
        let (dh, dv) = dense_differences(hr);
        DenseModel {
            a: dense_operator(op.kernel(), op.scale(), hr),
            dh,
            dv,
        }
    }

    fn residual(&self, s: &DenseState, y: &[f64]) -> Vec<f64> {
        let forward = self.a.mv(&add_vec(&s.mu_x, &s.mu_z));
        sub_vec(&sub_vec(y, &forward), &s.mu_m)
    }

    /// Noise-mean update target.
    pub fn update_noise_mean(
        &self,
        s: &DenseState,
        y: &[f64],
        hyper: &HyperParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let mu_rho = s.mu_rho();
        let resid = sub_vec(y, &self.a.mv(&add_vec(&s.mu_x, &s.mu_z)));
        let sigma: Vec<f64> = mu_rho.iter().map(|r| 1.0 / (r + hyper.sigma0)).collect();
        let mu: Vec<f64> = (0..y.len())
            .map(|i| sigma[i] * (mu_rho[i] * resid[i] + hyper.sigma0 * hyper.mu0))
            .collect();
        (mu, sigma)
    }

    /// Smoothness update target: full-system mean, reciprocal-diagonal
    /// variance.
    pub fn update_smooth(&self, s: &DenseState, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mu_rho = s.mu_rho();
        let mu_ups = s.mu_ups();
        let p = gram(&self.a, &mu_rho)
            .add(&gram(&self.dh, &mu_ups))
            .add(&gram(&self.dv, &mu_ups));
        let resid = sub_vec(&sub_vec(y, &self.a.mv(&s.mu_z)), &s.mu_m);
        let b = self.a.t().mv(&mul_vec(&resid, &mu_rho));
        let sigma: Vec<f64> = p.diag().iter().map(|d| 1.0 / d).collect();
        (lu_solve(p, b), sigma)
    }

    /// Sparsity update target.
    pub fn update_sparse(&self, s: &DenseState, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mu_rho = s.mu_rho();
        let mu_om = s.mu_om();
        let mut p = gram(&self.a, &mu_rho);
        p.add_diag(&mu_om);
        let resid = sub_vec(&sub_vec(y, &self.a.mv(&s.mu_x)), &s.mu_m);
        let b = self.a.t().mv(&mul_vec(&resid, &mu_rho));
        let sigma: Vec<f64> = p.diag().iter().map(|d| 1.0 / d).collect();
        (lu_solve(p, b), sigma)
    }

    /// Spatial-correlation update target.
    pub fn update_upsilon(
        &self,
        s: &DenseState,
        hyper: &HyperParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let gh = self.dh.mv(&s.mu_x);
        let gv = self.dv.mv(&s.mu_x);
        let flow = add_vec(
            &self.dh.squared().mv(&s.sigma_x2),
            &self.dv.squared().mv(&s.sigma_x2),
        );
        let n = s.mu_x.len();
        let alpha = vec![hyper.gamma_upsilon + 0.5; n];
        let beta: Vec<f64> = (0..n)
            .map(|i| 0.5 * (gh[i] * gh[i] + gv[i] * gv[i] + flow[i]) + hyper.phi_upsilon)
            .collect();
        (alpha, beta)
    }

    /// Sparsity-precision update target.
    pub fn update_omega(&self, s: &DenseState, hyper: &HyperParams) -> (Vec<f64>, Vec<f64>) {
        let n = s.mu_z.len();
        let alpha = vec![hyper.gamma_omega + 0.5; n];
        let beta: Vec<f64> = (0..n)
            .map(|i| 0.5 * (s.mu_z[i] * s.mu_z[i] + s.sigma_z2[i]) + hyper.phi_omega)
            .collect();
        (alpha, beta)
    }

    /// Noise-precision update target.
    pub fn update_rho(
        &self,
        s: &DenseState,
        y: &[f64],
        hyper: &HyperParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let resid = self.residual(s, y);
        let flow = self.a.squared().mv(&add_vec(&s.sigma_x2, &s.sigma_z2));
        let alpha = vec![hyper.gamma_rho + 0.5; y.len()];
        let beta: Vec<f64> = (0..y.len())
            .map(|j| {
                0.5 * (resid[j] * resid[j] + flow[j] + s.sigma_m2[j]) + hyper.phi_rho
            })
            .collect();
        (alpha, beta)
    }

    /// The evidence bound from dense quantities and reference special
    /// functions.
    pub fn bound(&self, s: &DenseState, y: &[f64], hyper: &HyperParams) -> f64 {
        let d_y = y.len() as f64;
        let d_x = s.mu_x.len() as f64;
        let mu_rho = s.mu_rho();
        let mu_ups = s.mu_ups();
        let mu_om = s.mu_om();

        let gauss_neg_entropy = |sigma2: &[f64]| -> f64 {
            let log_sum: f64 = sigma2.iter().map(|v| v.ln()).sum();
            -0.5 * sigma2.len() as f64 * (LN_2PI + 1.0) - 0.5 * log_sum
        };
        let gamma_neg_entropy = |alpha: &[f64], beta: &[f64]| -> f64 {
            alpha
                .iter()
                .zip(beta)
                .map(|(&a, &b)| -a + b.ln() - ref_lgamma(a) + (a - 1.0) * ref_digamma(a))
                .sum()
        };
        let e_log_sum = |alpha: &[f64], beta: &[f64]| -> f64 {
            alpha
                .iter()
                .zip(beta)
                .map(|(&a, &b)| ref_digamma(a) - b.ln())
                .sum()
        };
        let gamma_cross = |alpha: &[f64], beta: &[f64], shape: f64, rate: f64| -> f64 {
            alpha
                .iter()
                .zip(beta)
                .map(|(&a, &b)| {
                    -shape * rate.ln() + ref_lgamma(shape)
                        - (shape - 1.0) * (ref_digamma(a) - b.ln())
                        + rate * a / b
                })
                .sum()
        };

        let resid = self.residual(s, y);
        let flow = self.a.squared().mv(&add_vec(&s.sigma_x2, &s.sigma_z2));
        let quad: f64 = (0..y.len())
            .map(|j| mu_rho[j] * (resid[j] * resid[j] + flow[j] + s.sigma_m2[j]))
            .sum();
        let likelihood_y = 0.5 * d_y * LN_2PI
            - 0.5 * e_log_sum(&s.alpha_rho, &s.beta_rho)
            + 0.5 * quad;

        let m_quad: f64 = s
            .mu_m
            .iter()
            .zip(&s.sigma_m2)
            .map(|(&m, &v)| (m - hyper.mu0) * (m - hyper.mu0) + v)
            .sum();
        let prior_m = 0.5 * d_y * LN_2PI - 0.5 * d_y * hyper.sigma0.ln()
            + 0.5 * hyper.sigma0 * m_quad;

        let gh = self.dh.mv(&s.mu_x);
        let gv = self.dv.mv(&s.mu_x);
        let lap_diag = add_vec(
            &gram(&self.dh, &mu_ups).diag(),
            &gram(&self.dv, &mu_ups).diag(),
        );
        let grad_quad: f64 = (0..s.mu_x.len())
            .map(|i| mu_ups[i] * (gh[i] * gh[i] + gv[i] * gv[i]))
            .sum();
        let trace_quad: f64 = (0..s.mu_x.len())
            .map(|i| lap_diag[i] * s.sigma_x2[i])
            .sum();
        let prior_x = 0.5 * d_x * LN_2PI - 0.5 * e_log_sum(&s.alpha_ups, &s.beta_ups)
            + 0.5 * (grad_quad + trace_quad);

        let z_quad: f64 = (0..s.mu_z.len())
            .map(|i| mu_om[i] * (s.mu_z[i] * s.mu_z[i] + s.sigma_z2[i]))
            .sum();
        let prior_z = 0.5 * d_x * LN_2PI - 0.5 * e_log_sum(&s.alpha_om, &s.beta_om)
            + 0.5 * z_quad;

        gauss_neg_entropy(&s.sigma_m2)
            + gamma_neg_entropy(&s.alpha_rho, &s.beta_rho)
            + gauss_neg_entropy(&s.sigma_x2)
            + gamma_neg_entropy(&s.alpha_ups, &s.beta_ups)
            + gauss_neg_entropy(&s.sigma_z2)
            + gamma_neg_entropy(&s.alpha_om, &s.beta_om)
            + likelihood_y
            + prior_m
            + gamma_cross(&s.alpha_rho, &s.beta_rho, hyper.gamma_rho, hyper.phi_rho)
            + prior_x
            + gamma_cross(
                &s.alpha_ups,
                &s.beta_ups,
                hyper.gamma_upsilon,
                hyper.phi_upsilon,
            )
            + prior_z
            + gamma_cross(&s.alpha_om, &s.beta_om, hyper.gamma_omega, hyper.phi_omega)
    }
}

// ---------------------------------------------------------------------------
// Comparison helpers.

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The solver's convergence metric: per-field sup-norm change relative to
/// the old sup norm.
pub fn state_rel_change(new: &VariationalState, old: &VariationalState) -> f64 {
    let mut worst = 0.0f64;
    for ((_, a), (_, b)) in new.fields().iter().zip(old.fields()) {
        let mut diff = 0.0f64;
        let mut norm = 0.0f64;
        for (x, y) in a.data().iter().zip(b.data()) {
            diff = diff.max((x - y).abs());
            norm = norm.max(y.abs());
        }
        worst = worst.max(diff / (norm + 1e-30));
    }
    worst
}
