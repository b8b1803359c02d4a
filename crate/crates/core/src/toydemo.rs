//! Two-dimensional Gaussian-mixture demonstration: among all unit-norm
//! 1-D projections, the one with the highest measurement entropy is also
//! the one the Bayes least-squares decoder reconstructs best — and it is
//! generally neither a random direction nor the principal component.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::dot;
use crate::recon::bls_estimate;

/// One mixture component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// A 2-D Gaussian mixture with positive weights summing to one and
/// symmetric positive-definite covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm2D {
    components: Vec<GmmComponent>,
}

impl Gmm2D {
    pub fn new(components: Vec<GmmComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| c.weight <= 0.0) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(
                "weights must be positive and sum to 1".to_string(),
            ));
        }
        for (i, c) in components.iter().enumerate() {
            let [[a, b], [b2, d]] = c.cov;
            if (b - b2).abs() > 1e-12 {
                return Err(Error::invalid(format!("component {i}: covariance not symmetric")));
            }
            if a <= 0.0 || a * d - b * b <= 0.0 {
                return Err(Error::invalid(format!(
                    "component {i}: covariance not positive definite"
                )));
            }
        }
        Ok(Gmm2D { components })
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    /// The demonstration mixture: four equal clusters strung out along a
    /// dominant axis, with the middle two nearly colliding when projected
    /// onto it. The principal component runs along the string, where the
    /// near-collision blurs decoding; a tilted projection separates all
    /// four clusters cleanly and decodes best.
    pub fn default_demo() -> Self {
        fn elongated(major: f64, minor: f64, angle_deg: f64) -> [[f64; 2]; 2] {
            let t = angle_deg.to_radians();
            let (c, s) = (t.cos(), t.sin());
            let a = major * c * c + minor * s * s;
            let d = major * s * s + minor * c * c;
            let b = (major - minor) * c * s;
            [[a, b], [b, d]]
        }
        Gmm2D::new(vec![
            GmmComponent {
                weight: 0.25,
                mean: [-2.4, 0.08],
                cov: elongated(0.15, 0.09, 25.0),
            },
            GmmComponent {
                weight: 0.25,
                mean: [-0.33, 1.12],
                cov: elongated(0.15, 0.09, 115.0),
            },
            GmmComponent {
                weight: 0.25,
                mean: [0.37, -1.06],
                cov: elongated(0.15, 0.09, 70.0),
            },
            GmmComponent {
                weight: 0.25,
                mean: [2.36, -0.1],
                cov: elongated(0.15, 0.09, 160.0),
            },
        ])
        .expect("demo mixture is valid")
    }

    /// Overall covariance `sum_c w_c (Sigma_c + mu_c mu_c^T) - mu mu^T`.
    pub fn total_covariance(&self) -> [[f64; 2]; 2] {
        let mut mean = [0.0; 2];
        for c in &self.components {
            mean[0] += c.weight * c.mean[0];
            mean[1] += c.weight * c.mean[1];
        }
        let mut m = [[0.0; 2]; 2];
        for c in &self.components {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += c.weight * (c.cov[i][j] + c.mean[i] * c.mean[j]);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] -= mean[i] * mean[j];
            }
        }
        m
    }

    /// Leading principal direction, normalized to the upper half-plane.
    pub fn pca_direction(&self) -> [f64; 2] {
        let [[a, b], [_, d]] = self.total_covariance();
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let theta = if theta < 0.0 { theta + std::f64::consts::PI } else { theta };
        [theta.cos(), theta.sin()]
    }

    /// Draw samples, reproducibly per seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut pick: f64 = rng.random_range(0.0..1.0);
                let mut comp = &self.components[self.components.len() - 1];
                for c in &self.components {
                    if pick < c.weight {
                        comp = c;
                        break;
                    }
                    pick -= c.weight;
                }
                let [[a, b], [_, d]] = comp.cov;
                // 2x2 Cholesky.
                let l11 = a.sqrt();
                let l21 = b / l11;
                let l22 = (d - l21 * l21).sqrt();
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                [comp.mean[0] + l11 * z1, comp.mean[1] + l21 * z1 + l22 * z2]
            })
            .collect()
    }
}

fn check_unit(w: &[f64; 2]) -> Result<()> {
    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("w must be unit norm, got {norm}")));
    }
    Ok(())
}

/// Differential entropy (nats) of the 1-D mixture `w^T x`.
///
/// The projected density is available in closed form, so the entropy comes
/// from grid quadrature of `-p ln p` over ±10 combined standard deviations,
/// with the grid doubled until the value settles below 1e-5 nats.
pub fn projection_entropy(mixture: &Gmm2D, w: &[f64; 2]) -> Result<f64> {
    check_unit(w)?;
    let comps: Vec<(f64, f64, f64)> = mixture
        .components()
        .iter()
        .map(|c| {
            let m = dot(w, &c.mean);
            let sw = [
                c.cov[0][0] * w[0] + c.cov[0][1] * w[1],
                c.cov[1][0] * w[0] + c.cov[1][1] * w[1],
            ];
            (c.weight, m, dot(w, &sw))
        })
        .collect();
    let mean: f64 = comps.iter().map(|(p, m, _)| p * m).sum();
    let var: f64 = comps.iter().map(|(p, m, v)| p * (v + m * m)).sum::<f64>() - mean * mean;
    let half_span = 10.0 * var.sqrt();

    let density = |t: f64| -> f64 {
        comps
            .iter()
            .map(|&(p, m, v)| {
                let z = t - m;
                p * (-0.5 * z * z / v).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            })
            .sum()
    };
    let entropy_on = |points: usize| -> f64 {
        let step = 2.0 * half_span / (points - 1) as f64;
        let mut acc = 0.0;
        for i in 0..points {
            let t = mean - half_span + i as f64 * step;
            let p = density(t);
            let v = if p > 0.0 { -p * p.ln() } else { 0.0 };
            let wgt = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
            acc += wgt * v;
        }
        acc * step
    };

    let mut points = 4096;
    let mut h = entropy_on(points);
    loop {
        points *= 2;
        let refined = entropy_on(points);
        let delta = (refined - h).abs();
        h = refined;
        if delta < 1e-5 {
            return Ok(h);
        }
        if points >= 1 << 18 {
            return Err(Error::Numerical(format!(
                "projection entropy quadrature did not settle (last delta {delta:.2e})"
            )));
        }
    }
}

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// Grid search over `[0, pi)` for the maximum-entropy projection, with one
/// refinement pass around the best coarse angle. Ties keep the lowest angle.
pub fn infomax_projection(mixture: &Gmm2D, n_angles: usize) -> Result<[f64; 2]> {
    if n_angles < 16 {
        return Err(Error::invalid("need at least 16 angles"));
    }
    let mut best_theta = 0.0;
    let mut best_h = f64::NEG_INFINITY;
    for i in 0..n_angles {
        let theta = i as f64 * std::f64::consts::PI / n_angles as f64;
        let h = projection_entropy(mixture, &unit(theta))?;
        if h > best_h {
            best_h = h;
            best_theta = theta;
        }
    }
    let delta = std::f64::consts::PI / n_angles as f64;
    let fine = 2 * n_angles;
    let mut refined_theta = best_theta;
    for i in 0..=fine {
        let theta = best_theta - delta + i as f64 * (2.0 * delta / fine as f64);
        let h = projection_entropy(mixture, &unit(theta))?;
        if h > best_h {
            best_h = h;
            refined_theta = theta;
        }
    }
    Ok(unit(refined_theta))
}

/// Evaluate one projection direction: measurement entropy and the BLS
/// decoding MSE over fresh samples.
pub fn evaluate_scheme(
    mixture: &Gmm2D,
    w: &[f64; 2],
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples < 1000 {
        return Err(Error::invalid("need at least 1000 samples"));
    }
    let entropy = projection_entropy(mixture, w)?;
    let samples = mixture.sample(n_samples, seed);
    let mse = mse_over_samples(mixture, w, &samples)?;
    Ok((entropy, mse))
}

fn mse_over_samples(mixture: &Gmm2D, w: &[f64; 2], samples: &[[f64; 2]]) -> Result<f64> {
    let mut acc = 0.0;
    for x in samples {
        let y = dot(w, x);
        let est = bls_estimate(mixture, w, y)?;
        let e0 = x[0] - est[0];
        let e1 = x[1] - est[1];
        acc += e0 * e0 + e1 * e1;
    }
    Ok(acc / samples.len() as f64)
}

/// One point of an angle sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub theta: f64,
    pub entropy: f64,
    pub mse: f64,
}

/// Sweep `n_angles` directions over `[0, pi)`, scoring each by entropy and
/// by BLS MSE on a common sample set.
pub fn angle_sweep(
    mixture: &Gmm2D,
    n_angles: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if n_angles < 2 {
        return Err(Error::invalid("need at least 2 angles"));
    }
    if n_samples < 1000 {
        return Err(Error::invalid("need at least 1000 samples"));
    }
    let samples = mixture.sample(n_samples, seed);
    (0..n_angles)
        .map(|i| {
            let theta = i as f64 * std::f64::consts::PI / n_angles as f64;
            let w = unit(theta);
            Ok(SweepPoint {
                theta,
                entropy: projection_entropy(mixture, &w)?,
                mse: mse_over_samples(mixture, &w, &samples)?,
            })
        })
        .collect()
}

/// CSV rows `theta,entropy_nats,mse`.
pub fn write_sweep_csv<W: std::io::Write>(points: &[SweepPoint], w: &mut W) -> Result<()> {
    writeln!(w, "theta,entropy_nats,mse")?;
    for p in points {
        writeln!(w, "{:.8},{:.10},{:.10}", p.theta, p.entropy, p.mse)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_gaussian(cov: [[f64; 2]; 2]) -> Gmm2D {
        Gmm2D::new(vec![GmmComponent { weight: 1.0, mean: [0.0, 0.0], cov }]).unwrap()
    }

    #[test]
    fn entropy_of_standard_gaussian_projection() {
        let mix = single_gaussian([[1.0, 0.0], [0.0, 1.0]]);
        for theta in [0.0, 0.7, 2.1] {
            let h = projection_entropy(&mix, &unit(theta)).unwrap();
            assert!((h - 1.4189385).abs() < 1e-4, "theta={theta}: {h}");
        }
    }

    #[test]
    fn entropy_scales_with_log_amplitude() {
        let mix = Gmm2D::default_demo();
        let a = 2.5;
        let scaled = Gmm2D::new(
            mix.components()
                .iter()
                .map(|c| GmmComponent {
                    weight: c.weight,
                    mean: [a * c.mean[0], a * c.mean[1]],
                    cov: [
                        [a * a * c.cov[0][0], a * a * c.cov[0][1]],
                        [a * a * c.cov[1][0], a * a * c.cov[1][1]],
                    ],
                })
                .collect(),
        )
        .unwrap();
        let w = unit(0.4);
        let h0 = projection_entropy(&mix, &w).unwrap();
        let h1 = projection_entropy(&scaled, &w).unwrap();
        assert!((h1 - h0 - a.ln()).abs() < 2e-4);
    }

    #[test]
    fn entropy_of_separated_pair_gains_ln2() {
        let sep = 20.0; // 20 sigma apart
        let mix = Gmm2D::new(vec![
            GmmComponent { weight: 0.5, mean: [-sep / 2.0, 0.0], cov: [[1.0, 0.0], [0.0, 1.0]] },
            GmmComponent { weight: 0.5, mean: [sep / 2.0, 0.0], cov: [[1.0, 0.0], [0.0, 1.0]] },
        ])
        .unwrap();
        let h = projection_entropy(&mix, &[1.0, 0.0]).unwrap();
        let single = 1.4189385332046727;
        assert!((h - single - (2.0f64).ln()).abs() < 1e-3, "{h}");
    }

    #[test]
    fn entropy_rejects_non_unit_direction() {
        let mix = Gmm2D::default_demo();
        assert!(projection_entropy(&mix, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn infomax_tie_break_returns_lowest_angle() {
        let mix = single_gaussian([[1.0, 0.0], [0.0, 1.0]]);
        let w = infomax_projection(&mix, 16).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);
    }

    #[test]
    fn infomax_prefers_high_variance_axis_for_gaussian() {
        let mix = single_gaussian([[4.0, 0.0], [0.0, 1.0]]);
        let w = infomax_projection(&mix, 32).unwrap();
        assert!(w[0].abs() > 0.999, "w = {w:?}");
    }

    #[test]
    fn infomax_beats_pca_on_demo_mixture() {
        let mix = Gmm2D::default_demo();
        let w_star = infomax_projection(&mix, 64).unwrap();
        let h_star = projection_entropy(&mix, &w_star).unwrap();
        let h_pca = projection_entropy(&mix, &mix.pca_direction()).unwrap();
        assert!(h_star >= h_pca - 1e-9);
        // The two directions genuinely differ for this mixture.
        let cosine = dot(&w_star, &mix.pca_direction()).abs();
        assert!(cosine < 0.995, "infomax == pca? cos = {cosine}");
    }

    #[test]
    fn infomax_is_rotation_equivariant() {
        let mix = Gmm2D::default_demo();
        let phi = 30.0f64.to_radians();
        let (c, s) = (phi.cos(), phi.sin());
        let rotated = Gmm2D::new(
            mix.components()
                .iter()
                .map(|comp| {
                    let r = |v: &[f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
                    let m = r(&comp.mean);
                    // R Sigma R^T
                    let s00 = comp.cov[0][0];
                    let s01 = comp.cov[0][1];
                    let s11 = comp.cov[1][1];
                    let a = c * c * s00 - 2.0 * c * s * s01 + s * s * s11;
                    let b = c * s * (s00 - s11) + (c * c - s * s) * s01;
                    let d = s * s * s00 + 2.0 * c * s * s01 + c * c * s11;
                    GmmComponent { weight: comp.weight, mean: m, cov: [[a, b], [b, d]] }
                })
                .collect(),
        )
        .unwrap();
        let w0 = infomax_projection(&mix, 64).unwrap();
        let w1 = infomax_projection(&rotated, 64).unwrap();
        let w0r = [c * w0[0] - s * w0[1], s * w0[0] + c * w0[1]];
        // Same direction up to sign and grid resolution.
        let cosine = dot(&w0r, &w1).abs();
        assert!(cosine > (2.0 * std::f64::consts::PI / 64.0).cos(), "cos = {cosine}");
    }

    #[test]
    fn evaluate_scheme_orderings_on_demo() {
        let mix = Gmm2D::default_demo();
        let n = 10_000;
        let w_star = infomax_projection(&mix, 64).unwrap();
        let w_pca = mix.pca_direction();
        let (h_star, mse_star) = evaluate_scheme(&mix, &w_star, n, 11).unwrap();
        let (h_pca, mse_pca) = evaluate_scheme(&mix, &w_pca, n, 11).unwrap();
        assert!(h_star >= h_pca - 1e-9);
        assert!(mse_star < mse_pca, "mse {mse_star} vs {mse_pca}");
    }

    #[test]
    fn isotropic_gaussian_is_direction_blind() {
        let mix = single_gaussian([[1.0, 0.0], [0.0, 1.0]]);
        let (h0, m0) = evaluate_scheme(&mix, &unit(0.0), 20_000, 3).unwrap();
        let (h1, m1) = evaluate_scheme(&mix, &unit(1.1), 20_000, 3).unwrap();
        assert!((h0 - h1).abs() < 1e-6);
        assert!((m0 - m1).abs() / m0 < 0.05);
        // MSE is bounded by the total variance and nonnegative.
        assert!(m0 > 0.0 && m0 <= 2.0 + 0.05);
    }

    #[test]
    fn bls_is_at_least_as_good_as_best_linear_decoder() {
        let mix = Gmm2D::default_demo();
        let w = mix.pca_direction();
        let samples = mix.sample(20_000, 5);
        let mse_bls = mse_over_samples(&mix, &w, &samples).unwrap();
        // Least-squares linear decoder x ~ a*y + b, fitted on the samples.
        let ys: Vec<f64> = samples.iter().map(|x| dot(&w, x)).collect();
        let my = crate::numeric::mean(&ys);
        let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / ys.len() as f64;
        let mut mse_lin = 0.0;
        for dim in 0..2 {
            let xs: Vec<f64> = samples.iter().map(|x| x[dim]).collect();
            let mx = crate::numeric::mean(&xs);
            let cov: f64 = samples
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x[dim] - mx) * (y - my))
                .sum::<f64>()
                / samples.len() as f64;
            let a = cov / vy;
            mse_lin += samples
                .iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let pred = mx + a * (y - my);
                    (x[dim] - pred) * (x[dim] - pred)
                })
                .sum::<f64>()
                / samples.len() as f64;
        }
        assert!(
            mse_bls <= mse_lin * 1.001,
            "bls {mse_bls} should not lose to linear {mse_lin}"
        );
    }

    #[test]
    fn sweep_is_deterministic_and_csv_well_formed() {
        let mix = Gmm2D::default_demo();
        let a = angle_sweep(&mix, 8, 2000, 1).unwrap();
        let b = angle_sweep(&mix, 8, 2000, 1).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_sweep_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,entropy_nats,mse\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    #[ignore = "diagnostic sweep for tuning the demo mixture"]
    fn demo_mixture_landscape() {
        let mix = Gmm2D::default_demo();
        let sweep = angle_sweep(&mix, 64, 10_000, 11).unwrap();
        for p in &sweep {
            println!("theta={:6.1} h={:.4} mse={:.4}", p.theta.to_degrees(), p.entropy, p.mse);
        }
        let w_star = infomax_projection(&mix, 64).unwrap();
        let w_pca = mix.pca_direction();
        let (h_im, mse_im) = evaluate_scheme(&mix, &w_star, 10_000, 11).unwrap();
        let (h_pca, mse_pca) = evaluate_scheme(&mix, &w_pca, 10_000, 11).unwrap();
        let mean_h: f64 = sweep.iter().map(|p| p.entropy).sum::<f64>() / sweep.len() as f64;
        let mean_mse: f64 = sweep.iter().map(|p| p.mse).sum::<f64>() / sweep.len() as f64;
        println!("infomax theta={:.1} h={h_im:.4} mse={mse_im:.4}", w_star[1].atan2(w_star[0]).to_degrees());
        println!("pca     theta={:.1} h={h_pca:.4} mse={mse_pca:.4}", w_pca[1].atan2(w_pca[0]).to_degrees());
        println!("random  h={mean_h:.4} mse={mean_mse:.4}");
    }

    #[test]
    fn mixture_validation() {
        assert!(Gmm2D::new(vec![]).is_err());
        assert!(Gmm2D::new(vec![GmmComponent {
            weight: 0.5,
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        }])
        .is_err());
        assert!(Gmm2D::new(vec![GmmComponent {
            weight: 1.0,
            mean: [0.0, 0.0],
            cov: [[1.0, 2.0], [2.0, 1.0]],
        }])
        .is_err());
    }
}
