//! Generalized Gaussian (exponential-power) distribution machinery.
//!
//! The family is parameterized by a shape `alpha` (2 = Gaussian, 1 =
//! Laplacian, < 2 heavy-tailed/sparse), a mean and a standard deviation.
//! Everything downstream that reasons about projection entropy is built on
//! the unit-variance entropy ("shape term") of this family, so the closed
//! forms here are the numerical bedrock of the crate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric;

/// Shape term of a Gaussian, `c_2 = 1/2 ln(2 pi e)` in nats. This is the
/// maximum of [`shape_term`] over all shapes.
pub fn gaussian_shape_term() -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()
}

/// Parameters of a generalized Gaussian distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GGParams {
    /// Shape parameter, > 0. Smaller is sparser.
    pub alpha: f64,
    /// Mean.
    pub mu: f64,
    /// Standard deviation, > 0.
    pub sigma: f64,
}

impl GGParams {
    pub fn new(alpha: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
        }
        if !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be finite, got {mu}")));
        }
        let params = GGParams { alpha, mu, sigma };
        if !params.ln_beta().is_finite() {
            return Err(Error::invalid(format!(
                "beta = Gamma(1/alpha)/Gamma(3/alpha) is not finite for alpha = {alpha}"
            )));
        }
        Ok(params)
    }

    /// `ln beta` with `beta = Gamma(1/alpha) / Gamma(3/alpha)`.
    ///
    /// Kept in log form: at small shapes `Gamma(3/alpha)` overflows long
    /// before the ratio does.
    pub fn ln_beta(&self) -> f64 {
        ln_gamma(1.0 / self.alpha) - ln_gamma(3.0 / self.alpha)
    }

    /// The natural scale `sqrt(beta) * sigma` appearing in the exponent.
    pub fn scale(&self) -> f64 {
        (0.5 * self.ln_beta()).exp() * self.sigma
    }
}

/// Density of the generalized Gaussian at `x`.
///
/// `p(x) = alpha / (2 sqrt(beta) sigma Gamma(1/alpha)) * exp(-|x-mu|^alpha / (sqrt(beta) sigma)^alpha)`
pub fn gg_pdf(x: f64, params: &GGParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("x must be finite, got {x}")));
    }
    let alpha = params.alpha;
    let scale = params.scale();
    let z = ((x - params.mu) / scale).abs();
    let ln_norm = alpha.ln()
        - (2.0f64).ln()
        - scale.ln()
        - ln_gamma(1.0 / alpha);
    Ok((ln_norm - z.powf(alpha)).exp())
}

/// Shape term (unit-variance differential entropy) of `GG(alpha)` in nats:
///
/// `c_alpha = 1/2 ln(4/alpha^2 * Gamma^3(1/alpha) / Gamma(3/alpha)) + 1/alpha`
///
/// Equals `1/2 ln(2 pi e)` at `alpha = 2` and is strictly smaller elsewhere.
pub fn shape_term(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    let ln_inner = (4.0f64).ln() - 2.0 * alpha.ln() + 3.0 * ln_gamma(1.0 / alpha)
        - ln_gamma(3.0 / alpha);
    Ok(0.5 * ln_inner + 1.0 / alpha)
}

/// Draw `n` samples from the distribution, reproducibly for a given seed.
///
/// Uses the Gamma-power construction: with `E ~ Gamma(1/alpha, 1)` and a
/// fair sign `s`, `mu + s * sqrt(beta) sigma * E^(1/alpha)` has exactly the
/// target density, with no rejection loop.
pub fn gg_sample(params: &GGParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(1.0 / params.alpha, 1.0)
        .map_err(|e| Error::invalid(format!("gamma sampler: {e}")))?;
    let scale = params.scale();
    let inv_alpha = 1.0 / params.alpha;
    let samples = (0..n)
        .map(|_| {
            let e: f64 = gamma.sample(&mut rng);
            let mag = scale * e.powf(inv_alpha);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            params.mu + sign * mag
        })
        .collect();
    Ok(samples)
}

/// Shape term of a unit-variance GG source contaminated by Gaussian noise at
/// the given signal-to-noise ratio, i.e. the entropy of
/// `sqrt(snr/(1+snr)) * x + sqrt(1/(1+snr)) * eta` with `x ~ GG(alpha, 0, 1)`
/// and `eta ~ G(0, 1)`.
///
/// Monotone non-increasing in `snr`, bounded between `shape_term(alpha)`
/// (no noise) and the Gaussian value (noise only).
pub fn noisy_shape_term(alpha: f64, snr: f64) -> Result<f64> {
    noisy_shape_term_on_grid(alpha, snr, DEFAULT_GRID_POINTS)
}

/// Grid resolution used by [`noisy_shape_term`].
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// Half-width of the convolution grid in combined standard deviations.
const GRID_SPAN: f64 = 12.0;

/// Same as [`noisy_shape_term`] but with an explicit grid resolution, so the
/// default can be validated by grid doubling.
pub fn noisy_shape_term_on_grid(alpha: f64, snr: f64, grid_points: usize) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::invalid(format!("snr must be >= 0, got {snr}")));
    }
    if grid_points < 64 {
        return Err(Error::invalid("grid too coarse"));
    }
    let c2 = gaussian_shape_term();
    if snr == 0.0 {
        // Pure Gaussian limit.
        return Ok(c2);
    }
    let a = (snr / (1.0 + snr)).sqrt(); // std of the GG part
    let b = (1.0 / (1.0 + snr)).sqrt(); // std of the Gaussian part
    let gg = GGParams::new(alpha, 0.0, a)?;

    let n = grid_points;
    let step = 2.0 * GRID_SPAN / (n - 1) as f64;
    let x_at = |i: usize| -GRID_SPAN + i as f64 * step;

    // Convolve the wider density with the narrower one (the kernel); both
    // are symmetric about zero.
    let gg_is_kernel = a < b;
    let wide: Vec<f64> = (0..n)
        .map(|i| {
            if gg_is_kernel {
                gauss_pdf(x_at(i), b)
            } else {
                gg_pdf(x_at(i), &gg).unwrap_or(0.0)
            }
        })
        .collect();
    let kernel_at = |t: f64| -> f64 {
        if gg_is_kernel {
            gg_pdf(t, &gg).unwrap_or(0.0)
        } else {
            gauss_pdf(t, b)
        }
    };
    let kernel_std = a.min(b);
    let kernel_peak = kernel_at(0.0);
    // A Gaussian kernel is negligible past ~10 std; a GG kernel can be
    // heavy-tailed, so keep extending while values matter.
    let mut half = Vec::with_capacity(n);
    half.push(kernel_peak);
    for o in 1..n {
        let t = o as f64 * step;
        let v = kernel_at(t);
        if t > 14.0 * kernel_std && v < kernel_peak * 1e-18 {
            break;
        }
        half.push(v);
    }
    // Normalize the sampled kernel to unit discrete mass. A kernel much
    // narrower than the grid spacing quantizes badly around its peak, but
    // the convolution with the wide density washes that out once the mass
    // is right.
    let kernel_mass =
        step * (half[0] + 2.0 * half[1..].iter().sum::<f64>());
    for v in half.iter_mut() {
        *v /= kernel_mass;
    }

    let mut conv = vec![0.0f64; n];
    for (i, c) in conv.iter_mut().enumerate() {
        let mut acc = wide[i] * half[0];
        for (o, &k) in half.iter().enumerate().skip(1) {
            let lo = if i >= o { wide[i - o] } else { 0.0 };
            let hi = if i + o < n { wide[i + o] } else { 0.0 };
            acc += (lo + hi) * k;
        }
        *c = acc * step;
    }

    // With the kernel normalized, remaining mass deficit is tail
    // truncation of the wide density; anything larger means the grid
    // failed to resolve the problem.
    let mass: f64 = trapezoid(&conv, step);
    if !(0.95..=1.05).contains(&mass) {
        return Err(Error::Numerical(format!(
            "noisy shape term: grid mass {mass:.6} strayed from 1 (alpha={alpha}, snr={snr})"
        )));
    }
    let inv_mass = 1.0 / mass;

    let plogp: Vec<f64> = conv
        .iter()
        .map(|&p| {
            let p = p * inv_mass;
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .collect();
    Ok(trapezoid(&plogp, step))
}

fn gauss_pdf(x: f64, std: f64) -> f64 {
    let z = x / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (0.5 * values[0] + inner + 0.5 * values[n - 1])
}

/// Result of [`estimate_alpha`]. `clamped` is set when the sample moment
/// ratio fell outside the range achievable by any shape in the search
/// bracket, in which case `alpha` is the nearest bracket endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub clamped: bool,
}

const ALPHA_BRACKET: (f64, f64) = (0.05, 10.0);

/// Estimate the GG shape from samples by inverting the first-absolute-moment
/// ratio `E|x| / sqrt(E x^2) = Gamma(2/alpha) / sqrt(Gamma(1/alpha) Gamma(3/alpha))`,
/// which is strictly increasing in `alpha`.
pub fn estimate_alpha(samples: &[f64]) -> Result<AlphaEstimate> {
    if samples.len() < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 samples, got {}",
            samples.len()
        )));
    }
    let m = numeric::mean(samples);
    let m1 = samples.iter().map(|x| (x - m).abs()).sum::<f64>() / samples.len() as f64;
    let m2 = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / samples.len() as f64;
    if m2 <= 0.0 || m1 <= 0.0 {
        return Err(Error::DegenerateSamples(
            "samples are constant; shape is undefined".into(),
        ));
    }
    let ratio = m1 / m2.sqrt();

    let (lo, hi) = ALPHA_BRACKET;
    if ratio <= moment_ratio(lo) {
        return Ok(AlphaEstimate { alpha: lo, clamped: true });
    }
    if ratio >= moment_ratio(hi) {
        return Ok(AlphaEstimate { alpha: hi, clamped: true });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moment_ratio(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(AlphaEstimate { alpha: 0.5 * (lo + hi), clamped: false })
}

/// `E|x| / sqrt(E x^2)` for `GG(alpha)`.
fn moment_ratio(alpha: f64) -> f64 {
    (ln_gamma(2.0 / alpha) - 0.5 * (ln_gamma(1.0 / alpha) + ln_gamma(3.0 / alpha))).exp()
}
