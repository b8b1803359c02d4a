//! Reconstruction from orthonormal measurements: adjoint (zero-fill)
//! decoding, total-variation minimization, and quality metrics.
//!
//! The TV decoder solves `min TV(x) s.t. ||W x - y||_2 <= epsilon` with a
//! first-order primal-dual scheme that touches the operator only through
//! `apply`/`adjoint`. TV is isotropic, `sum_ij sqrt(dx^2 + dy^2)`, with
//! forward differences and replicate boundaries (zero difference at the last
//! row/column). Noiseless and noisy decoding share the solver: the noise
//! level only widens `epsilon`.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::numeric::{dot, norm2};
use crate::operators::LinearOperator;
use crate::toydemo::Gmm2D;

/// Zero-fill linear decoding `x_hat = W^T y`, exact on the row space of `W`.
pub fn linear_recon(operator: &dyn LinearOperator, y: &[f64]) -> Result<Image> {
    if y.len() != operator.out_dim() {
        return Err(Error::dims(format!(
            "expected {} measurements, got {}",
            operator.out_dim(),
            y.len()
        )));
    }
    let x = operator.adjoint(y);
    let n = int_sqrt(x.len())?;
    Image::new(n, x)
}

/// Settings for [`tv_min_recon`].
#[derive(Debug, Clone, PartialEq)]
pub struct TvSolverConfig {
    pub max_iter: usize,
    /// Dual step size.
    pub sigma_step: f64,
    /// Primal step size.
    pub tau_step: f64,
    /// Radius of the measurement-fidelity ball (0 = equality constraint).
    pub data_epsilon: f64,
    /// Relative convergence tolerance on the iterates.
    pub tol: f64,
}

/// Bound on the squared norm of the stacked operator `[grad; W]`:
/// `||grad||^2 <= 8` for forward differences and `||W|| = 1` for
/// row-orthonormal measurements.
const COMBINED_NORM_SQ: f64 = 9.0;

impl TvSolverConfig {
    pub fn new(
        max_iter: usize,
        sigma_step: f64,
        tau_step: f64,
        data_epsilon: f64,
        tol: f64,
    ) -> Result<Self> {
        if max_iter == 0 || !sigma_step.is_finite() || sigma_step <= 0.0
            || !tau_step.is_finite() || tau_step <= 0.0
        {
            return Err(Error::invalid("solver steps must be positive"));
        }
        if sigma_step * tau_step > 1.0 / COMBINED_NORM_SQ + 1e-12 {
            return Err(Error::invalid(format!(
                "step product {} exceeds 1/L^2 = {}",
                sigma_step * tau_step,
                1.0 / COMBINED_NORM_SQ
            )));
        }
        if data_epsilon < 0.0 || !data_epsilon.is_finite() {
            return Err(Error::invalid("data_epsilon must be >= 0"));
        }
        if tol <= 0.0 {
            return Err(Error::invalid("tol must be > 0"));
        }
        Ok(TvSolverConfig { max_iter, sigma_step, tau_step, data_epsilon, tol })
    }

    /// `max_iter = 2000`, balanced steps at the stability limit, equality
    /// fidelity, `tol = 1e-6`.
    pub fn with_epsilon(data_epsilon: f64) -> Result<Self> {
        let s = 1.0 / COMBINED_NORM_SQ.sqrt();
        TvSolverConfig::new(2000, s, s, data_epsilon, 1e-6)
    }
}

/// Fidelity radius that makes noiseless and noisy decoding uniform:
/// essentially zero without noise, the expected noise norm `sigma sqrt(p)`
/// with it.
pub fn default_tv_epsilon(y: &[f64], sigma: f64) -> f64 {
    (1e-6 * norm2(y)).max(sigma * (y.len() as f64).sqrt())
}

/// Result of a TV reconstruction.
#[derive(Debug, Clone)]
pub struct ReconResult {
    pub image: Image,
    pub iterations: usize,
    /// `||W x_hat - y||_2` at the returned iterate.
    pub residual: f64,
    /// Isotropic TV of the returned iterate.
    pub tv_value: f64,
    pub converged: bool,
    /// Best-feasible TV value at each progress check; non-increasing.
    pub tv_trace: Vec<f64>,
}

fn int_sqrt(d: usize) -> Result<usize> {
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d {
        return Err(Error::dims(format!("dimension {d} is not a square image")));
    }
    Ok(n)
}

fn forward_grad(x: &[f64], n: usize, gx: &mut [f64], gy: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            gx[idx] = if i + 1 < n { x[idx + n] - x[idx] } else { 0.0 };
            gy[idx] = if j + 1 < n { x[idx + 1] - x[idx] } else { 0.0 };
        }
    }
}

/// Adjoint of [`forward_grad`] (negative divergence).
fn grad_adjoint(qx: &[f64], qy: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            let mut v = 0.0;
            if i > 0 {
                v += qx[idx - n];
            }
            if i + 1 < n {
                v -= qx[idx];
            }
            if j > 0 {
                v += qy[idx - 1];
            }
            if j + 1 < n {
                v -= qy[idx];
            }
            out[idx] = v;
        }
    }
}

/// Isotropic total variation of a flat image.
pub fn tv_value(x: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            let dx = if i + 1 < n { x[idx + n] - x[idx] } else { 0.0 };
            let dy = if j + 1 < n { x[idx + 1] - x[idx] } else { 0.0 };
            total += (dx * dx + dy * dy).sqrt();
        }
    }
    total
}

/// TV-minimizing reconstruction, `min TV(x) s.t. ||W x - y|| <= epsilon`.
///
/// On hitting `max_iter` without meeting the tolerance the best feasible
/// iterate found so far is returned with `converged = false`.
pub fn tv_min_recon(
    operator: &dyn LinearOperator,
    y: &[f64],
    config: &TvSolverConfig,
) -> Result<ReconResult> {
    if y.len() != operator.out_dim() {
        return Err(Error::dims(format!(
            "expected {} measurements, got {}",
            operator.out_dim(),
            y.len()
        )));
    }
    let d = operator.in_dim();
    let n = int_sqrt(d)?;
    let (sigma, tau) = (config.sigma_step, config.tau_step);
    let eps = config.data_epsilon;
    let feas_tol = eps + 1e-6 * norm2(y) + 1e-12;

    let mut x = operator.adjoint(y);
    let mut x_bar = x.clone();
    let mut qx = vec![0.0; d];
    let mut qy = vec![0.0; d];
    let mut r = vec![0.0; y.len()];
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let mut div = vec![0.0; d];

    let mut best: Option<(f64, Vec<f64>, f64)> = None; // (tv, x, residual)
    let mut tv_trace = Vec::new();
    let mut x_prev_check = x.clone();
    let mut converged = false;
    let mut iterations = config.max_iter;
    const CHECK_EVERY: usize = 10;

    for iter in 1..=config.max_iter {
        // Dual ascent on the TV term: project shifted duals onto the unit disc.
        forward_grad(&x_bar, n, &mut gx, &mut gy);
        for idx in 0..d {
            let ax = qx[idx] + sigma * gx[idx];
            let ay = qy[idx] + sigma * gy[idx];
            let mag = (ax * ax + ay * ay).sqrt();
            let scale = if mag > 1.0 { 1.0 / mag } else { 1.0 };
            qx[idx] = ax * scale;
            qy[idx] = ay * scale;
        }
        // Dual ascent on the fidelity term: shrink toward the measurements.
        let wx = operator.apply(&x_bar);
        let mut u_norm_sq = 0.0;
        for k in 0..r.len() {
            r[k] += sigma * (wx[k] - y[k]);
            u_norm_sq += r[k] * r[k];
        }
        if eps > 0.0 {
            let u_norm = u_norm_sq.sqrt();
            let factor = if u_norm > 0.0 { (1.0 - sigma * eps / u_norm).max(0.0) } else { 0.0 };
            for v in r.iter_mut() {
                *v *= factor;
            }
        }
        // Primal descent.
        grad_adjoint(&qx, &qy, n, &mut div);
        let wtr = operator.adjoint(&r);
        for idx in 0..d {
            let x_new = x[idx] - tau * (div[idx] + wtr[idx]);
            x_bar[idx] = 2.0 * x_new - x[idx];
            x[idx] = x_new;
        }

        if iter % CHECK_EVERY == 0 || iter == config.max_iter {
            let res = {
                let wx = operator.apply(&x);
                wx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            let tv = tv_value(&x, n);
            if res <= feas_tol && best.as_ref().is_none_or(|(btv, _, _)| tv < *btv) {
                best = Some((tv, x.clone(), res));
            }
            if let Some((btv, _, _)) = &best {
                tv_trace.push(*btv);
            }

            let diff: f64 = x
                .iter()
                .zip(&x_prev_check)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let rel = diff / norm2(&x).max(1e-12);
            x_prev_check.copy_from_slice(&x);
            if rel < config.tol && res <= feas_tol {
                converged = true;
                iterations = iter;
                break;
            }
        }
    }

    let (tv, image_vec, residual) = match best {
        Some(b) => b,
        None => {
            let res = {
                let wx = operator.apply(&x);
                wx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            converged = false;
            (tv_value(&x, n), x, res)
        }
    };
    Ok(ReconResult {
        image: Image::new(n, image_vec)?,
        iterations,
        residual,
        tv_value: tv,
        converged,
        tv_trace,
    })
}

/// Peak signal-to-noise ratio. `exact` marks a bit-identical candidate; the
/// reported value is capped at 99 dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    pub db: f64,
    pub exact: bool,
}

pub fn psnr(reference: &Image, candidate: &Image, peak: f64) -> Result<Psnr> {
    if reference.side() != candidate.side() {
        return Err(Error::dims("image sizes differ"));
    }
    if !peak.is_finite() || peak <= 0.0 {
        return Err(Error::invalid("peak must be > 0"));
    }
    let mse: f64 = reference
        .pixels()
        .iter()
        .zip(candidate.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / (reference.side() * reference.side()) as f64;
    if mse == 0.0 {
        return Ok(Psnr { db: 99.0, exact: true });
    }
    let db = (10.0 * (peak * peak / mse).log10()).min(99.0);
    Ok(Psnr { db, exact: false })
}

/// Bayes least-squares estimate `E[x | w^T x = y]` for a 2-D Gaussian
/// mixture: posterior-weighted conditional means, all in closed form.
pub fn bls_estimate(mixture: &Gmm2D, w: &[f64; 2], y: f64) -> Result<[f64; 2]> {
    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("w must be unit norm, got ||w|| = {norm}")));
    }
    let mut log_resp = Vec::with_capacity(mixture.components().len());
    let mut cond_means = Vec::with_capacity(mixture.components().len());
    for comp in mixture.components() {
        let m = dot(w, &comp.mean);
        let sw = [
            comp.cov[0][0] * w[0] + comp.cov[0][1] * w[1],
            comp.cov[1][0] * w[0] + comp.cov[1][1] * w[1],
        ];
        let v = dot(w, &sw);
        if v <= 1e-300 {
            return Err(Error::Numerical(
                "projected component variance is singular".into(),
            ));
        }
        let z = y - m;
        log_resp.push(comp.weight.ln() - 0.5 * (v.ln() + z * z / v));
        cond_means.push([comp.mean[0] + sw[0] * z / v, comp.mean[1] + sw[1] * z / v]);
    }
    let max = log_resp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut out = [0.0, 0.0];
    for (lr, cm) in log_resp.iter().zip(&cond_means) {
        let wgt = (lr - max).exp();
        total += wgt;
        out[0] += wgt * cm[0];
        out[1] += wgt * cm[1];
    }
    Ok([out[0] / total, out[1] / total])
}
