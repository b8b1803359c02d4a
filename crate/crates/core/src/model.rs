//! Multi-resolution signal models and bandwise sensor allocation.
//!
//! Signals are modeled as independent `GG(alpha)` components grouped into
//! octave bands: band 0 holds the DC component, band `l >= 1` the components
//! with radial frequency index in `[2^(l-1), 2^l)`, and the band variance
//! falls off as `lambda_l = lambda_0 / 4^l` — the power-spectral law of
//! natural images. Within a band the components are iid, so the best
//! orthonormal measurements inside a band are random mixtures, and the only
//! design freedom left is how many sensors each band gets.
//!
//! The capacity diagram assigns each potential projection its incremental
//! entropy `nu` (a per-band linear ramp, noise-flattened when `sigma > 0`),
//! and [`allocate`] simply keeps the `p` largest values.

use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ggdist::{gaussian_shape_term, gg_sample, noisy_shape_term, shape_term, GGParams};
use crate::image::Image;
use crate::operators::{dct2_inverse, haar2_inverse};

/// One octave band: resolution level, component count and per-component
/// variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub level: usize,
    pub size: usize,
    pub variance: f64,
}

/// A multi-resolution source model: octave bands plus a global GG shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResModel {
    bands: Vec<BandSpec>,
    alpha: f64,
    total_dim: usize,
}

impl MultiResModel {
    pub fn new(bands: Vec<BandSpec>, alpha: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::invalid("model needs at least one band"));
        }
        for (l, band) in bands.iter().enumerate() {
            if band.level != l {
                return Err(Error::invalid("band levels must be contiguous from 0"));
            }
            if band.size == 0 {
                return Err(Error::invalid(format!("band {l} is empty")));
            }
            if !band.variance.is_finite() || band.variance <= 0.0 {
                return Err(Error::invalid(format!("band {l} variance must be > 0")));
            }
        }
        for w in bands.windows(2) {
            if w[1].variance > w[0].variance {
                return Err(Error::invalid("band variances must be non-increasing"));
            }
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        let total_dim = bands.iter().map(|b| b.size).sum();
        Ok(MultiResModel { bands, alpha, total_dim })
    }

    pub fn bands(&self) -> &[BandSpec] {
        &self.bands
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Side length of the image this model describes, when the total
    /// dimension is a dyadic square.
    pub fn image_side(&self) -> Result<usize> {
        let d = self.total_dim;
        let n = (d as f64).sqrt().round() as usize;
        if n * n != d || !n.is_power_of_two() {
            return Err(Error::invalid(
                "model dimension is not a dyadic square image size",
            ));
        }
        Ok(n)
    }

    /// Replace per-band variances (e.g. with values calibrated from data).
    /// The new variances must still be non-increasing.
    pub fn with_variances(&self, variances: &[f64]) -> Result<Self> {
        if variances.len() != self.bands.len() {
            return Err(Error::dims("variance count != band count"));
        }
        let bands = self
            .bands
            .iter()
            .zip(variances)
            .map(|(b, &v)| BandSpec { variance: v, ..*b })
            .collect();
        MultiResModel::new(bands, self.alpha)
    }
}

/// Dyadic radial partition of the `n x n` DCT index lattice.
///
/// Returns, per level, the flattened coefficient indices `u * n + v`:
/// level 0 is `{(0,0)}`, level `l` collects indices with
/// `2^(l-1) <= sqrt(u^2 + v^2) < 2^l`, and the top level also absorbs the
/// corner indices beyond `n-1`.
pub fn band_partition(n: usize) -> Result<Vec<Vec<usize>>> {
    if !n.is_power_of_two() || n < 8 {
        return Err(Error::invalid(format!(
            "side must be a power of two >= 8, got {n}"
        )));
    }
    let levels = n.trailing_zeros() as usize + 1;
    let mut bands = vec![Vec::new(); levels];
    for u in 0..n {
        for v in 0..n {
            let r2 = u * u + v * v;
            let level = if r2 == 0 {
                0
            } else {
                let mut l = 1;
                while l + 1 < levels && r2 >= 1usize << (2 * l) {
                    l += 1;
                }
                l
            };
            bands[level].push(u * n + v);
        }
    }
    Ok(bands)
}

/// The octave model for an `n x n` image: band sizes counted exactly from
/// the DCT index lattice, variances `lambda_l = 1/4^l` (so `lambda_0 = 1`;
/// rescale via [`MultiResModel::with_variances`] to match measured power).
pub fn natural_image_model(width: usize, height: usize, alpha: f64) -> Result<MultiResModel> {
    if width != height {
        return Err(Error::invalid(format!(
            "model requires a square image, got {width}x{height}"
        )));
    }
    let partition = band_partition(width)?;
    let bands = partition
        .iter()
        .enumerate()
        .map(|(l, idx)| BandSpec {
            level: l,
            size: idx.len(),
            variance: 0.25f64.powi(l as i32),
        })
        .collect();
    MultiResModel::new(bands, alpha)
}

/// A band with its effective (noise-inflated) variance and shape term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyBand {
    pub level: usize,
    pub size: usize,
    pub variance: f64,
    pub shape_term: f64,
}

/// A model as seen through measurement noise of standard deviation `sigma`:
/// variances shift up by `sigma^2` uniformly and each band's shape term
/// moves toward the Gaussian value according to its own SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyModel {
    pub bands: Vec<NoisyBand>,
    pub alpha: f64,
    pub sigma: f64,
}

pub fn noisy_model(model: &MultiResModel, sigma: f64) -> Result<NoisyModel> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    let alpha = model.alpha();
    let clean_shape = shape_term(alpha)?;
    let bands = model
        .bands()
        .iter()
        .map(|b| {
            let shape = if sigma == 0.0 {
                Ok(clean_shape)
            } else {
                noisy_shape_term(alpha, b.variance / (sigma * sigma))
            }?;
            Ok(NoisyBand {
                level: b.level,
                size: b.size,
                variance: b.variance + sigma * sigma,
                shape_term: shape,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoisyModel { bands, alpha, sigma })
}

/// One potential projection in a capacity diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramEntry {
    pub level: usize,
    /// 1-based position of this projection within its band's ramp.
    pub k: usize,
    /// Incremental entropy of taking this projection, in nats.
    pub nu: f64,
}

/// Individual capacities of every potential bandwise projection, in band
/// order. Within a band the values ramp down linearly from
/// `c_2 + 1/2 ln(lambda + sigma^2)`; singleton bands contribute their raw
/// component entropy (no mixing gain is possible).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityDiagram {
    entries: Vec<DiagramEntry>,
    band_sizes: Vec<usize>,
    sigma: f64,
}

impl CapacityDiagram {
    pub fn entries(&self) -> &[DiagramEntry] {
        &self.entries
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn band_count(&self) -> usize {
        self.band_sizes.len()
    }

    pub fn band_sizes(&self) -> &[usize] {
        &self.band_sizes
    }

    pub fn total_dim(&self) -> usize {
        self.entries.len()
    }

    /// Entries of one band, k ascending.
    pub fn band(&self, level: usize) -> &[DiagramEntry] {
        let start: usize = self.band_sizes[..level].iter().sum();
        &self.entries[start..start + self.band_sizes[level]]
    }

    /// CSV rows `global_index,band,k,nu_nats`, ranked by descending `nu`
    /// (ties toward lower band, then lower k).
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "global_index,band,k,nu_nats")?;
        let mut sorted: Vec<&DiagramEntry> = self.entries.iter().collect();
        sorted.sort_by(|a, b| {
            b.nu
                .total_cmp(&a.nu)
                .then(a.level.cmp(&b.level))
                .then(a.k.cmp(&b.k))
        });
        for (rank, e) in sorted.iter().enumerate() {
            writeln!(w, "{},{},{},{:.12}", rank + 1, e.level, e.k, e.nu)?;
        }
        Ok(())
    }
}

/// Build the capacity diagram for a model under measurement noise `sigma`.
pub fn capacity_diagram(model: &MultiResModel, sigma: f64) -> Result<CapacityDiagram> {
    let noisy = noisy_model(model, sigma)?;
    let c2 = gaussian_shape_term();
    let mut entries = Vec::with_capacity(model.total_dim());
    for band in &noisy.bands {
        let var_term = 0.5 * band.variance.ln();
        if band.size == 1 {
            entries.push(DiagramEntry { level: band.level, k: 1, nu: band.shape_term + var_term });
            continue;
        }
        let slope = 2.0 * (c2 - band.shape_term) / (band.size as f64 - 1.0);
        for k in 1..=band.size {
            entries.push(DiagramEntry {
                level: band.level,
                k,
                nu: c2 + var_term - slope * (k as f64 - 1.0),
            });
        }
    }
    Ok(CapacityDiagram {
        entries,
        band_sizes: noisy.bands.iter().map(|b| b.size).collect(),
        sigma,
    })
}

/// Per-band sensor counts chosen from a diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub per_band: Vec<usize>,
    pub total: usize,
}

impl Allocation {
    /// Sensors assigned to bands `0..=level`.
    pub fn cumulative(&self, level: usize) -> usize {
        self.per_band[..=level].iter().sum()
    }
}

struct HeapItem {
    nu: f64,
    level: usize,
    k: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: larger nu wins; ties prefer lower band, then lower k.
        self.nu
            .total_cmp(&other.nu)
            .then(other.level.cmp(&self.level))
            .then(other.k.cmp(&self.k))
    }
}

/// Keep the `p` projections of largest individual capacity.
///
/// Within each band the ramp is non-increasing, so the selection is a k-way
/// descending merge: the chosen indices in band `l` are exactly `1..=p_l`.
pub fn allocate(diagram: &CapacityDiagram, p: usize) -> Result<Allocation> {
    let d = diagram.total_dim();
    if p == 0 || p > d {
        return Err(Error::invalid(format!("need 1 <= p <= {d}, got {p}")));
    }
    let mut heap = BinaryHeap::with_capacity(diagram.band_count());
    for level in 0..diagram.band_count() {
        let e = diagram.band(level)[0];
        heap.push(HeapItem { nu: e.nu, level, k: 1 });
    }
    let mut per_band = vec![0usize; diagram.band_count()];
    for _ in 0..p {
        let item = heap.pop().expect("heap cannot drain before p items");
        per_band[item.level] += 1;
        let band = diagram.band(item.level);
        if item.k < band.len() {
            let e = band[item.k]; // next entry, k = item.k + 1
            heap.push(HeapItem { nu: e.nu, level: item.level, k: item.k + 1 });
        }
    }
    Ok(Allocation { per_band, total: p })
}

/// Outcome of the capture-or-drop threshold rule applied to an allocation:
/// bands filled past 90% are captured completely, bands under 10% are
/// dropped, and the leftover budget becomes one joint random mixing across
/// all remaining bands.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdOutcome {
    pub full_bands: Vec<usize>,
    pub skipped_bands: Vec<usize>,
    pub partial_bands: Vec<usize>,
    pub residual_random_count: usize,
}

/// Apply the 0.9/0.1 capture-or-drop rule. Bands whose allocation exceeds
/// 90% of their size are captured in full; bands under 10% contribute no
/// dedicated sensors. The leftover budget is served by a single random
/// mixing over the partial bands; if a dropped band freed more sensors than
/// the partial bands can absorb, skipped bands are re-admitted to the
/// mixing pool (largest allocation first) so the budget is always realized.
pub fn apply_threshold_rule(
    allocation: &Allocation,
    model: &MultiResModel,
) -> Result<ThresholdOutcome> {
    if allocation.per_band.len() != model.bands().len() {
        return Err(Error::dims("allocation band count != model band count"));
    }
    let mut out = ThresholdOutcome {
        full_bands: Vec::new(),
        skipped_bands: Vec::new(),
        partial_bands: Vec::new(),
        residual_random_count: 0,
    };
    let mut captured = 0usize;
    for (band, &p_l) in model.bands().iter().zip(&allocation.per_band) {
        if p_l > band.size {
            return Err(Error::invalid(format!(
                "allocation exceeds band {} size",
                band.level
            )));
        }
        let frac = p_l as f64 / band.size as f64;
        if frac > 0.9 {
            out.full_bands.push(band.level);
            captured += band.size;
        } else if frac < 0.1 {
            out.skipped_bands.push(band.level);
        } else {
            out.partial_bands.push(band.level);
        }
    }
    if captured > allocation.total {
        return Err(Error::invalid(format!(
            "threshold promotion needs {captured} sensors but only {} are budgeted",
            allocation.total
        )));
    }
    out.residual_random_count = allocation.total - captured;
    // Dropping a band can free more sensors than the partial bands have
    // coefficients. Re-admit skipped bands (largest allocation first) into
    // the mixing pool until the residual fits.
    let mut partial_capacity: usize = out
        .partial_bands
        .iter()
        .map(|&l| model.bands()[l].size)
        .sum();
    while out.residual_random_count > partial_capacity {
        let readmit = out
            .skipped_bands
            .iter()
            .copied()
            .max_by_key(|&l| (allocation.per_band[l], std::cmp::Reverse(l)))
            .expect("residual cannot exceed non-full capacity");
        out.skipped_bands.retain(|&l| l != readmit);
        out.partial_bands.push(readmit);
        out.partial_bands.sort_unstable();
        partial_capacity += model.bands()[readmit].size;
    }
    Ok(out)
}

/// Sample an image whose DCT coefficients follow the model: iid
/// `GG(alpha, 0, sqrt(lambda_l))` within each band.
pub fn sample_image_dct(model: &MultiResModel, seed: u64) -> Result<Image> {
    let n = model.image_side()?;
    let partition = band_partition(n)?;
    for (band, idx) in model.bands().iter().zip(&partition) {
        if band.size != idx.len() {
            return Err(Error::invalid(
                "model band sizes do not match the image shell partition",
            ));
        }
    }
    let mut coeffs = vec![0.0; n * n];
    let mut rng_seed = seed;
    for (band, idx) in model.bands().iter().zip(&partition) {
        let params = GGParams::new(model.alpha(), 0.0, band.variance.sqrt())?;
        let draws = gg_sample(&params, idx.len(), rng_seed)?;
        rng_seed = rng_seed.wrapping_add(0x9e37_79b9);
        for (&i, v) in idx.iter().zip(draws) {
            coeffs[i] = v;
        }
    }
    let mut img = Image::new(n, coeffs)?;
    dct2_inverse(&mut img)?;
    Ok(img)
}

/// Sample an image whose Haar wavelet coefficients follow the model's
/// per-level law: detail subbands at octave `l` get iid
/// `GG(alpha, 0, sqrt(lambda_l))`, the scaling coefficient gets level 0.
/// This is the synthesis to use when validating wavelet-domain shape
/// estimation, since analysis recovers exactly the sampled coefficients.
pub fn sample_image_haar(model: &MultiResModel, seed: u64) -> Result<Image> {
    let n = model.image_side()?;
    let levels = n.trailing_zeros() as usize; // detail scales 1..=levels
    if model.bands().len() != levels + 1 {
        return Err(Error::invalid(
            "model level count does not match the wavelet depth",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![0.0; n * n];
    // Scale s details occupy the L-shaped region between side n/2^s and
    // n/2^(s-1); octave level is m - s + 1.
    for s in 1..=levels {
        let side = n >> s;
        let level = levels - s + 1;
        let params = GGParams::new(model.alpha(), 0.0, model.bands()[level].variance.sqrt())?;
        let gamma = rand_distr::Gamma::new(1.0 / model.alpha(), 1.0)
            .map_err(|e| Error::invalid(format!("gamma sampler: {e}")))?;
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            use rand::Rng;
            use rand_distr::Distribution;
            let e: f64 = gamma.sample(rng);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * params.scale() * e.powf(1.0 / model.alpha())
        };
        for i in 0..side {
            for j in 0..side {
                coeffs[i * n + (j + side)] = draw(&mut rng);
                coeffs[(i + side) * n + j] = draw(&mut rng);
                coeffs[(i + side) * n + (j + side)] = draw(&mut rng);
            }
        }
    }
    let dc = GGParams::new(model.alpha(), 0.0, model.bands()[0].variance.sqrt())?;
    coeffs[0] = gg_sample(&dc, 1, seed ^ 0x5ca1_ab1e)?[0];
    let mut img = Image::new(n, coeffs)?;
    haar2_inverse(&mut img)?;
    Ok(img)
}
