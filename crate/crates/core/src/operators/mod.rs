//! Matrix-free row-orthonormal sensing operators.
//!
//! Every operator here satisfies `W W^T = I`: applying the adjoint to a
//! measurement vector and re-measuring returns the measurements unchanged.
//! That invariant is what lets entropy comparisons across schemes ignore
//! the variance inflation a non-orthonormal frame would introduce, and it
//! makes the adjoint a legitimate zero-fill inverse for linear decoding.

mod mixing;
mod transform;

pub use mixing::{random_mixing_operator, RandomMixing};
pub use transform::{
    dct2_forward, dct2_inverse, haar2_forward, haar2_inverse, haar_detail_subbands,
};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::model::{allocate, apply_threshold_rule, band_partition, capacity_diagram, MultiResModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A linear map with explicit forward and adjoint application.
pub trait LinearOperator: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// `y = W x`; `x.len()` must equal `in_dim`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// `x = W^T y`; `y.len()` must equal `out_dim`.
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
    fn label(&self) -> &str {
        "operator"
    }
}

/// All DCT indices of an `n x n` grid in anti-diagonal zig-zag order,
/// starting at DC.
pub fn zigzag_order(n: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(n * n);
    for s in 0..(2 * n).saturating_sub(1) {
        let hi = s.min(n - 1);
        let lo = s - hi;
        if s % 2 == 1 {
            for row in lo..=hi {
                order.push((row, s - row));
            }
        } else {
            for row in (lo..=hi).rev() {
                order.push((row, s - row));
            }
        }
    }
    order
}

/// Identity of a measurement scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeVariant {
    /// Low-pass zig-zag DCT coefficients, decoded linearly.
    DctLinear,
    /// The same measurements, decoded by TV minimization.
    DctZigzag,
    /// `n_dct` leading zig-zag DCT coefficients, then random mixing over the
    /// remaining coefficients.
    RombergHybrid { n_dct: usize },
    /// Random mixing over the pixel domain.
    PureRandom,
    /// Bandwise projections from the capacity diagram designed at the given
    /// noise level: full capture of saturated bands, one joint random mixing
    /// across the partially used bands.
    BandwiseRandom { design_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub variant: SchemeVariant,
    pub seed: u64,
}

impl SchemeSpec {
    pub fn new(variant: SchemeVariant, seed: u64) -> Self {
        SchemeSpec { variant, seed }
    }

    pub fn name(&self) -> &'static str {
        match self.variant {
            SchemeVariant::DctLinear => "dct-linear",
            SchemeVariant::DctZigzag => "dct-tv",
            SchemeVariant::RombergHybrid { .. } => "romberg",
            SchemeVariant::PureRandom => "random",
            SchemeVariant::BandwiseRandom { .. } => "uca",
        }
    }

    /// Whether reconstruction for this scheme is nonlinear (TV) rather than
    /// the plain adjoint.
    pub fn uses_tv_decoding(&self) -> bool {
        !matches!(self.variant, SchemeVariant::DctLinear)
    }

    /// One-line text form `scheme=<name> p=<p> n_dct=<n> seed=<s> sigma=<v>`.
    pub fn config_line(&self, p: usize, sigma: f64) -> String {
        let n_dct = match self.variant {
            SchemeVariant::RombergHybrid { n_dct } => n_dct,
            _ => 0,
        };
        let design = match self.variant {
            SchemeVariant::BandwiseRandom { design_sigma } => design_sigma,
            _ => sigma,
        };
        format!(
            "scheme={} p={p} n_dct={n_dct} seed={} sigma={design}",
            self.name(),
            self.seed
        )
    }

    /// Parse the format produced by [`SchemeSpec::config_line`]. Returns the
    /// spec together with `p` and `sigma`.
    pub fn from_config_line(line: &str) -> Result<(SchemeSpec, usize, f64)> {
        let mut name = None;
        let mut p = None;
        let mut n_dct = 0usize;
        let mut seed = 0u64;
        let mut sigma = 0.0f64;
        for field in line.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad config field '{field}'")))?;
            match key {
                "scheme" => name = Some(value.to_string()),
                "p" => p = Some(value.parse().map_err(|_| Error::invalid("bad p"))?),
                "n_dct" => n_dct = value.parse().map_err(|_| Error::invalid("bad n_dct"))?,
                "seed" => seed = value.parse().map_err(|_| Error::invalid("bad seed"))?,
                "sigma" => sigma = value.parse().map_err(|_| Error::invalid("bad sigma"))?,
                _ => return Err(Error::invalid(format!("unknown config key '{key}'"))),
            }
        }
        let name = name.ok_or_else(|| Error::invalid("missing scheme name"))?;
        let p = p.ok_or_else(|| Error::invalid("missing p"))?;
        let variant = match name.as_str() {
            "dct-linear" => SchemeVariant::DctLinear,
            "dct-tv" => SchemeVariant::DctZigzag,
            "romberg" => SchemeVariant::RombergHybrid { n_dct },
            "random" => SchemeVariant::PureRandom,
            "uca" => SchemeVariant::BandwiseRandom { design_sigma: sigma },
            other => return Err(Error::invalid(format!("unknown scheme '{other}'"))),
        };
        Ok((SchemeSpec { variant, seed }, p, sigma))
    }
}

/// Selection of individual DCT coefficients (rows of the 2-D DCT).
struct DctSelection {
    n: usize,
    indices: Vec<usize>,
    label: String,
}

impl LinearOperator for DctSelection {
    fn in_dim(&self) -> usize {
        self.n * self.n
    }

    fn out_dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = x.to_vec();
        transform::dct2_forward_slice(&mut buf, self.n);
        self.indices.iter().map(|&i| buf[i]).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.n * self.n];
        for (&i, &v) in self.indices.iter().zip(y) {
            buf[i] = v;
        }
        transform::dct2_inverse_slice(&mut buf, self.n);
        buf
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// DCT-domain scheme with a directly captured index set and an optional
/// random mixing block over a disjoint index set.
struct ComposedDctScheme {
    n: usize,
    direct: Vec<usize>,
    union: Vec<usize>,
    mixing: Option<RandomMixing>,
    label: String,
}

impl LinearOperator for ComposedDctScheme {
    fn in_dim(&self) -> usize {
        self.n * self.n
    }

    fn out_dim(&self) -> usize {
        self.direct.len() + self.mixing.as_ref().map_or(0, |m| m.rows())
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = x.to_vec();
        transform::dct2_forward_slice(&mut buf, self.n);
        let mut y = Vec::with_capacity(self.out_dim());
        y.extend(self.direct.iter().map(|&i| buf[i]));
        if let Some(mixing) = &self.mixing {
            let gathered: Vec<f64> = self.union.iter().map(|&i| buf[i]).collect();
            y.extend(mixing.apply(&gathered));
        }
        y
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.n * self.n];
        for (&i, &v) in self.direct.iter().zip(y) {
            buf[i] = v;
        }
        if let Some(mixing) = &self.mixing {
            let scattered = mixing.adjoint(&y[self.direct.len()..]);
            for (&i, v) in self.union.iter().zip(scattered) {
                buf[i] = v;
            }
        }
        transform::dct2_inverse_slice(&mut buf, self.n);
        buf
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Build the sensing operator for a scheme at sensor budget `p`.
pub fn build_scheme(
    spec: &SchemeSpec,
    model: &MultiResModel,
    p: usize,
) -> Result<Box<dyn LinearOperator>> {
    let d = model.total_dim();
    if p == 0 || p > d {
        return Err(Error::invalid(format!("need 1 <= p <= {d}, got p={p}")));
    }
    let n = model.image_side()?;
    let flat = |pairs: &[(usize, usize)]| -> Vec<usize> {
        pairs.iter().map(|&(u, v)| u * n + v).collect()
    };
    match spec.variant {
        SchemeVariant::DctLinear | SchemeVariant::DctZigzag => {
            let zz = zigzag_order(n);
            Ok(Box::new(DctSelection {
                n,
                indices: flat(&zz[..p]),
                label: spec.name().to_string(),
            }))
        }
        SchemeVariant::PureRandom => {
            let op = random_mixing_operator(d, p, spec.seed)?;
            Ok(Box::new(Labeled { inner: op, label: spec.name().to_string() }))
        }
        SchemeVariant::RombergHybrid { n_dct } => {
            if n_dct > p {
                return Err(Error::invalid(format!(
                    "romberg n_dct={n_dct} exceeds budget p={p}"
                )));
            }
            let zz = flat(&zigzag_order(n));
            let direct = zz[..n_dct].to_vec();
            let union = zz[n_dct..].to_vec();
            let mixing = if p > n_dct {
                Some(random_mixing_operator(union.len(), p - n_dct, spec.seed)?)
            } else {
                None
            };
            Ok(Box::new(ComposedDctScheme {
                n,
                direct,
                union,
                mixing,
                label: spec.name().to_string(),
            }))
        }
        SchemeVariant::BandwiseRandom { design_sigma } => {
            let diagram = capacity_diagram(model, design_sigma)?;
            let allocation = allocate(&diagram, p)?;
            let outcome = apply_threshold_rule(&allocation, model)?;
            let partition = band_partition(n)?;
            let mut direct = Vec::new();
            for &level in &outcome.full_bands {
                direct.extend_from_slice(&partition[level]);
            }
            let mut union = Vec::new();
            for &level in &outcome.partial_bands {
                union.extend_from_slice(&partition[level]);
            }
            let m = outcome.residual_random_count;
            if m > union.len() {
                return Err(Error::invalid(format!(
                    "threshold rule leaves {m} residual sensors but only {} mixable coefficients",
                    union.len()
                )));
            }
            let mixing = if m > 0 {
                Some(random_mixing_operator(union.len(), m, spec.seed)?)
            } else {
                None
            };
            Ok(Box::new(ComposedDctScheme {
                n,
                direct,
                union,
                mixing,
                label: spec.name().to_string(),
            }))
        }
    }
}

/// Wrapper giving an operator a scheme label.
struct Labeled<T: LinearOperator> {
    inner: T,
    label: String,
}

impl<T: LinearOperator> LinearOperator for Labeled<T> {
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }
    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.inner.apply(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.inner.adjoint(y)
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// Measurements `y = W x + eta` with `eta ~ G(0, sigma^2 I)`, plus the
/// metadata needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
    pub scheme: String,
}

pub fn measure(
    operator: &dyn LinearOperator,
    image: &Image,
    sigma: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    if operator.in_dim() != image.side() * image.side() {
        return Err(Error::dims(format!(
            "operator expects dimension {}, image has {}",
            operator.in_dim(),
            image.side() * image.side()
        )));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    let mut y = operator.apply(image.pixels());
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in y.iter_mut() {
            let eta: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * eta;
        }
    }
    Ok(MeasurementSet { y, sigma, seed, scheme: operator.label().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::natural_image_model;
    use crate::numeric::{dot, norm2};
    use rand::Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn assert_row_orthonormal(op: &dyn LinearOperator, trials: u64, tol: f64) {
        for t in 0..trials {
            let y = random_vec(op.out_dim(), 900 + t);
            let round = op.apply(&op.adjoint(&y));
            for (a, b) in y.iter().zip(&round) {
                assert!((a - b).abs() < tol, "W W^T != I for {}", op.label());
            }
        }
    }

    fn assert_adjoint_consistent(op: &dyn LinearOperator, trials: u64, tol: f64) {
        for t in 0..trials {
            let u = random_vec(op.in_dim(), 500 + t);
            let v = random_vec(op.out_dim(), 700 + t);
            let lhs = dot(&op.apply(&u), &v);
            let rhs = dot(&u, &op.adjoint(&v));
            assert!((lhs - rhs).abs() < tol * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn zigzag_small_cases() {
        assert_eq!(zigzag_order(2), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        let z3 = zigzag_order(3);
        assert_eq!(&z3[..5], &[(0, 0), (0, 1), (1, 0), (2, 0), (1, 1)]);
    }

    #[test]
    fn zigzag_is_a_permutation() {
        let n = 8;
        let z = zigzag_order(n);
        assert_eq!(z.len(), n * n);
        let mut seen = vec![false; n * n];
        for (u, v) in z {
            assert!(u < n && v < n);
            assert!(!seen[u * n + v]);
            seen[u * n + v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn every_scheme_is_row_orthonormal() {
        let model = natural_image_model(16, 16, 0.5).unwrap();
        let schemes = [
            SchemeVariant::DctLinear,
            SchemeVariant::DctZigzag,
            SchemeVariant::RombergHybrid { n_dct: 20 },
            SchemeVariant::PureRandom,
            SchemeVariant::BandwiseRandom { design_sigma: 0.0 },
        ];
        for variant in schemes {
            for seed in [1u64, 2] {
                let spec = SchemeSpec::new(variant.clone(), seed);
                let op = build_scheme(&spec, &model, 60).unwrap();
                assert_eq!(op.in_dim(), 256);
                assert_eq!(op.out_dim(), 60);
                assert_row_orthonormal(op.as_ref(), 10, 1e-10);
                assert_adjoint_consistent(op.as_ref(), 5, 1e-10);
            }
        }
    }

    #[test]
    fn romberg_with_zero_random_rows_equals_dct() {
        let model = natural_image_model(16, 16, 0.5).unwrap();
        let p = 40;
        let dct = build_scheme(&SchemeSpec::new(SchemeVariant::DctZigzag, 0), &model, p).unwrap();
        let hybrid = build_scheme(
            &SchemeSpec::new(SchemeVariant::RombergHybrid { n_dct: p }, 3),
            &model,
            p,
        )
        .unwrap();
        let x = random_vec(256, 8);
        let a = dct.apply(&x);
        let b = hybrid.apply(&x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn zigzag_prefix_property_across_budgets() {
        let model = natural_image_model(16, 16, 0.5).unwrap();
        let small = build_scheme(&SchemeSpec::new(SchemeVariant::DctZigzag, 0), &model, 10).unwrap();
        let large = build_scheme(&SchemeSpec::new(SchemeVariant::DctZigzag, 0), &model, 30).unwrap();
        let x = random_vec(256, 4);
        let a = small.apply(&x);
        let b = large.apply(&x);
        assert_eq!(&a[..], &b[..10]);
    }

    #[test]
    fn bandwise_full_budget_is_lossless() {
        let model = natural_image_model(16, 16, 0.4).unwrap();
        let spec = SchemeSpec::new(SchemeVariant::BandwiseRandom { design_sigma: 0.0 }, 5);
        let op = build_scheme(&spec, &model, 256).unwrap();
        let x = random_vec(256, 9);
        let back = op.adjoint(&op.apply(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    /// Dense 2-D DCT row for coefficient (u, v), computed straight from the
    /// separable definition.
    fn naive_dct_row(n: usize, u: usize, v: usize) -> Vec<f64> {
        let s = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        let mut row = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let ci = (std::f64::consts::PI * (2 * i + 1) as f64 * u as f64 / (2 * n) as f64)
                    .cos();
                let cj = (std::f64::consts::PI * (2 * j + 1) as f64 * v as f64 / (2 * n) as f64)
                    .cos();
                row[i * n + j] = s(u) * s(v) * ci * cj;
            }
        }
        row
    }

    #[test]
    fn bandwise_matches_dense_oracle() {
        let n = 16;
        let model = natural_image_model(n, n, 0.32).unwrap();
        let spec = SchemeSpec::new(SchemeVariant::BandwiseRandom { design_sigma: 0.0 }, 21);
        let p = 90;
        let op = build_scheme(&spec, &model, p).unwrap();
        assert_eq!(op.out_dim(), p);

        // Materialize W from the operator and rebuild it independently:
        // direct rows must be exact dense DCT rows; mixing rows must be
        // combinations of dense DCT rows over the partial-band indices.
        let d = n * n;
        let mut dense_w = vec![vec![0.0; d]; p];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = op.apply(&e);
            for (r, &v) in col.iter().enumerate() {
                dense_w[r][j] = v;
            }
        }
        // Recompute the expected selection.
        let diagram = capacity_diagram(&model, 0.0).unwrap();
        let allocation = allocate(&diagram, p).unwrap();
        let outcome = apply_threshold_rule(&allocation, &model).unwrap();
        let partition = band_partition(n).unwrap();
        let mut direct = Vec::new();
        for &level in &outcome.full_bands {
            direct.extend_from_slice(&partition[level]);
        }
        for (r, &idx) in direct.iter().enumerate() {
            let row = naive_dct_row(n, idx / n, idx % n);
            for (a, b) in dense_w[r].iter().zip(&row) {
                assert!((a - b).abs() < 1e-10, "direct row {r}");
            }
        }
        // Mixing rows: supported exactly on the partial-band DCT rows.
        let mut union = Vec::new();
        for &level in &outcome.partial_bands {
            union.extend_from_slice(&partition[level]);
        }
        let union_rows: Vec<Vec<f64>> =
            union.iter().map(|&idx| naive_dct_row(n, idx / n, idx % n)).collect();
        for r in direct.len()..p {
            // Project the row onto the span of the union DCT rows (they are
            // orthonormal): residual must vanish.
            let mut residual = dense_w[r].clone();
            for base in &union_rows {
                let c = dot(&dense_w[r], base);
                for (x, b) in residual.iter_mut().zip(base) {
                    *x -= c * b;
                }
            }
            assert!(norm2(&residual) < 1e-10, "mixing row {r} leaks outside its bands");
        }
        // Dense Gram check.
        for a in 0..p {
            for b in 0..p {
                let want = if a == b { 1.0 } else { 0.0 };
                let got = dot(&dense_w[a], &dense_w[b]);
                assert!((got - want).abs() < 1e-10, "gram({a},{b}) = {got}");
            }
        }
    }

    #[test]
    fn measurement_noise_behaviour() {
        let model = natural_image_model(16, 16, 0.5).unwrap();
        let op = build_scheme(&SchemeSpec::new(SchemeVariant::PureRandom, 1), &model, 64).unwrap();
        let img = Image::from_fn(16, |i, j| ((i * 31 + j * 7) % 255) as f64);

        let clean = measure(op.as_ref(), &img, 0.0, 5).unwrap();
        assert_eq!(clean.y, op.apply(img.pixels()));

        let a = measure(op.as_ref(), &img, 2.0, 5).unwrap();
        let b = measure(op.as_ref(), &img, 2.0, 5).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.scheme, "random");

        let wrong = Image::zeros(8);
        assert!(measure(op.as_ref(), &wrong, 0.0, 1).is_err());
        assert!(measure(op.as_ref(), &img, -1.0, 1).is_err());
    }

    #[test]
    fn measurement_noise_variance_concentrates() {
        // E||y - Wx||^2 / p -> sigma^2; chi-square with 10^4 dof is tight.
        let n = 128;
        let model = natural_image_model(n, n, 0.5).unwrap();
        let p = 10_000;
        let op = build_scheme(&SchemeSpec::new(SchemeVariant::PureRandom, 2), &model, p).unwrap();
        let img = Image::from_fn(n, |i, j| ((i + j) % 251) as f64);
        let sigma = 3.0;
        let clean = op.apply(img.pixels());
        let noisy = measure(op.as_ref(), &img, sigma, 17).unwrap();
        let mse: f64 = clean
            .iter()
            .zip(&noisy.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / p as f64;
        assert!((mse / (sigma * sigma) - 1.0).abs() < 0.05, "mse={mse}");
    }

    #[test]
    fn config_line_round_trip() {
        let spec = SchemeSpec::new(SchemeVariant::RombergHybrid { n_dct: 1000 }, 42);
        let line = spec.config_line(5000, 10.0);
        let (back, p, sigma) = SchemeSpec::from_config_line(&line).unwrap();
        assert_eq!(back, spec);
        assert_eq!(p, 5000);
        assert_eq!(sigma, 10.0);

        let uca = SchemeSpec::new(SchemeVariant::BandwiseRandom { design_sigma: 5.0 }, 7);
        let (back, _, _) = SchemeSpec::from_config_line(&uca.config_line(100, 5.0)).unwrap();
        assert_eq!(back, uca);
        assert!(SchemeSpec::from_config_line("scheme=bogus p=1").is_err());
    }
}
