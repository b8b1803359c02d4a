//! Closed-form and empirical entropy of projection schemes.
//!
//! For a `d`-dimensional white source with iid `GG(alpha)` components, the
//! expected joint entropy of `p` random row-orthonormal projections is
//!
//! `E[h(y_1..y_p)] ~= p c_2 - p(p-1)/(d-1) * (c_2 - c_alpha)`
//!
//! while projecting onto any `p` of the independent axes (the PCA choice for
//! white data) gives exactly `p c_alpha`. The first projection of a sparse
//! source is nearly Gaussian — worth `c_2` — and successive projections lose
//! capacity linearly; the total over all `d` equals the source entropy
//! (`d c_alpha`), so nothing is created or destroyed, only concentrated.
//!
//! For a power-law Gaussian source the comparison flips: PCA keeps the `p`
//! largest variances while a random frame averages over all size-`p` variance
//! subsets (the subvolume expectation of [`subvolume_expectation`]).
//!
//! Note on signs: the white-source formula appears in two places in the
//! underlying analysis with opposite signs on the pairwise term; only the
//! minus sign keeps `p = d` consistent with total capacity (`d c_alpha`) and
//! keeps the entropy of an identity-covariance variable below `p c_2`, so
//! the minus sign is used throughout.

mod knn;
mod subvolume;

pub use knn::{knn_entropy, KnnEntropy};
pub use subvolume::{
    ln_subvolume_expectation, ln_subvolume_expectation_sweep, subvolume_expectation,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ggdist::{gaussian_shape_term, shape_term};

/// A variance spectrum, either given explicitly (non-increasing, positive)
/// or generated as `lambda_k = 1/k^gamma`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumProfile {
    Explicit(Vec<f64>),
    PowerLaw { gamma: f64, dim: usize },
}

impl SpectrumProfile {
    pub fn dim(&self) -> usize {
        match self {
            SpectrumProfile::Explicit(v) => v.len(),
            SpectrumProfile::PowerLaw { dim, .. } => *dim,
        }
    }

    /// Log-variances in spectrum order, after validation.
    pub fn ln_variances(&self) -> Result<Vec<f64>> {
        match self {
            SpectrumProfile::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::invalid("empty spectrum"));
                }
                for w in v.windows(2) {
                    if w[1] > w[0] {
                        return Err(Error::invalid("spectrum variances must be non-increasing"));
                    }
                }
                v.iter()
                    .map(|&x| {
                        if x.is_finite() && x > 0.0 {
                            Ok(x.ln())
                        } else {
                            Err(Error::invalid(format!("variance must be > 0, got {x}")))
                        }
                    })
                    .collect()
            }
            SpectrumProfile::PowerLaw { gamma, dim } => {
                if !gamma.is_finite() || *gamma < 0.0 {
                    return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
                }
                if *dim == 0 {
                    return Err(Error::invalid("spectrum dimension must be >= 1"));
                }
                Ok((1..=*dim).map(|k| -gamma * (k as f64).ln()).collect())
            }
        }
    }
}

/// Entropy of one scheme swept over a grid of projection counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub p_values: Vec<usize>,
    pub entropies: Vec<f64>,
    pub label: String,
}

impl EntropyCurve {
    pub fn new(label: impl Into<String>, p_values: Vec<usize>, entropies: Vec<f64>) -> Result<Self> {
        if p_values.len() != entropies.len() {
            return Err(Error::dims("p grid and entropy lengths differ"));
        }
        if entropies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("entropy values must be finite"));
        }
        Ok(EntropyCurve { p_values, entropies, label: label.into() })
    }

    /// CSV rows `p,scheme,entropy_nats`. Curves for several schemes can be
    /// appended to the same writer after a single header.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, with_header: bool) -> Result<()> {
        if with_header {
            writeln!(w, "p,scheme,entropy_nats")?;
        }
        for (p, h) in self.p_values.iter().zip(&self.entropies) {
            writeln!(w, "{p},{},{h:.12}", self.label)?;
        }
        Ok(())
    }
}

fn check_pd(d: usize, p: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid("dimension must be >= 2"));
    }
    if p == 0 || p > d {
        return Err(Error::invalid(format!("need 1 <= p <= d, got p={p}, d={d}")));
    }
    Ok(())
}

/// Expected joint entropy of `p` random orthonormal projections of a white
/// iid `GG(alpha)` source in `d` dimensions (nats).
pub fn random_entropy_white(alpha: f64, d: usize, p: usize) -> Result<f64> {
    check_pd(d, p)?;
    let c2 = gaussian_shape_term();
    let c_a = shape_term(alpha)?;
    let (p, d) = (p as f64, d as f64);
    Ok(p * c2 - p * (p - 1.0) / (d - 1.0) * (c2 - c_a))
}

/// Joint entropy of the `p` leading PCA (equivalently, independent-axis)
/// projections of the same white source: exactly `p c_alpha`.
pub fn pca_entropy_white(alpha: f64, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::invalid("p must be >= 1"));
    }
    Ok(p as f64 * shape_term(alpha)?)
}

/// Incremental entropy (capacity) contributed by the `k`-th random
/// projection given the first `k-1`:
///
/// `nu(k) = c_2 - 2(k-1)/(d-1) * (c_2 - c_alpha)`
///
/// Non-increasing in `k`; sums to `d c_alpha` over `k = 1..d`.
pub fn individual_capacity(alpha: f64, d: usize, k: usize) -> Result<f64> {
    check_pd(d, k)?;
    let c2 = gaussian_shape_term();
    let c_a = shape_term(alpha)?;
    Ok(c2 - 2.0 * (k as f64 - 1.0) / (d as f64 - 1.0) * (c2 - c_a))
}

/// Expected entropy of `p` random projections of a Gaussian source with
/// power-law variances `lambda_k = 1/k^gamma`:
/// `p c_2 + 1/2 ln E[Vol_p]` with the subvolume expectation over all
/// size-`p` variance subsets.
pub fn random_entropy_gaussian_powerlaw(gamma: f64, d: usize, p: usize) -> Result<f64> {
    check_pd(d, p)?;
    let ln_lambdas = SpectrumProfile::PowerLaw { gamma, dim: d }.ln_variances()?;
    let ln_vol = subvolume::ln_subvolume_expectation_from_ln(&ln_lambdas, p)?;
    Ok(p as f64 * gaussian_shape_term() + 0.5 * ln_vol)
}

/// Entropy of the `p` leading PCA projections of the same power-law
/// Gaussian source: `p c_2 - gamma/2 * sum_{k<=p} ln k`.
pub fn pca_entropy_gaussian_powerlaw(gamma: f64, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::invalid("p must be >= 1"));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
    }
    let log_sum: f64 = (1..=p).map(|k| (k as f64).ln()).sum();
    Ok(p as f64 * gaussian_shape_term() - 0.5 * gamma * log_sum)
}

/// Random-minus-PCA entropy gap for a sparse power-law source, approximated
/// by adding the white-shape gap and the Gaussian power-law gap.
pub fn hybrid_gap(alpha: f64, gamma: f64, d: usize, p: usize) -> Result<f64> {
    let white = random_entropy_white(alpha, d, p)? - pca_entropy_white(alpha, p)?;
    let powerlaw =
        random_entropy_gaussian_powerlaw(gamma, d, p)? - pca_entropy_gaussian_powerlaw(gamma, p)?;
    Ok(white + powerlaw)
}

/// `p` orthonormal rows in `d` dimensions, uniform over the Stiefel manifold
/// (Gram-Schmidt on a standard-normal matrix), reproducible per seed.
pub fn random_orthonormal_rows(p: usize, d: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_pd(d, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for i in 0..p {
        // Two Gram-Schmidt passes keep the frame orthonormal to ~1e-14.
        for _ in 0..2 {
            for j in 0..i {
                let proj = crate::numeric::dot(&rows[i], &rows[j]);
                let (head, tail) = rows.split_at_mut(i);
                tail[0].iter_mut().zip(&head[j]).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = crate::numeric::norm2(&rows[i]);
        if norm < 1e-12 {
            return Err(Error::Numerical("degenerate random frame".into()));
        }
        rows[i].iter_mut().for_each(|x| *x /= norm);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggdist::gaussian_shape_term;

    #[test]
    fn white_random_limits() {
        let c2 = gaussian_shape_term();
        let h1 = random_entropy_white(0.5, 100, 1).unwrap();
        assert!((h1 - c2).abs() < 1e-12);
        // p = d recovers the total source entropy d * c_alpha.
        let hd = random_entropy_white(0.5, 100, 100).unwrap();
        assert!((hd - 100.0 * shape_term(0.5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn white_random_large_case() {
        // alpha = 1, d = 2^16, p = 1000, against the spelled-out expression.
        let c2 = gaussian_shape_term();
        let c1 = shape_term(1.0).unwrap();
        assert!((c2 - c1 - 0.07237).abs() < 1e-5);
        let expect = 1000.0 * c2 - (1000.0 * 999.0 / 65535.0) * (c2 - c1);
        let got = random_entropy_white(1.0, 65536, 1000).unwrap();
        assert!((got - expect).abs() < 1e-9);
    }

    #[test]
    fn white_pca_values() {
        let c2 = gaussian_shape_term();
        assert!((pca_entropy_white(2.0, 5).unwrap() - 5.0 * c2).abs() < 1e-10);
        let h = pca_entropy_white(1.0, 10).unwrap();
        assert!((h - 10.0 * (1.0 + 0.5 * (2.0f64).ln())).abs() < 1e-10);
        assert!((h - 13.465735902799726).abs() < 1e-10);
    }

    #[test]
    fn white_gap_nonnegative_for_sparse_shapes() {
        for alpha in [0.3, 0.5, 1.0] {
            for p in [1, 2, 16, 128] {
                let gap = random_entropy_white(alpha, 4096, p).unwrap()
                    - pca_entropy_white(alpha, p).unwrap();
                assert!(gap >= 0.0, "alpha={alpha}, p={p}: {gap}");
            }
        }
    }

    #[test]
    fn white_random_concave_in_p() {
        // Second difference is -2(c2 - c_alpha)/(d-1) <= 0 for alpha <= 2.
        for alpha in [0.3, 1.0, 2.0] {
            let h: Vec<f64> = (1..=16)
                .map(|p| random_entropy_white(alpha, 64, p).unwrap())
                .collect();
            for w in h.windows(3) {
                let second = w[2] - 2.0 * w[1] + w[0];
                assert!(second <= 1e-12, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn capacity_endpoints_and_conservation() {
        let c2 = gaussian_shape_term();
        for alpha in [0.3, 0.5, 1.0, 2.0] {
            let c_a = shape_term(alpha).unwrap();
            for d in [10usize, 100, 1000] {
                assert!((individual_capacity(alpha, d, 1).unwrap() - c2).abs() < 1e-12);
                let last = individual_capacity(alpha, d, d).unwrap();
                assert!((last - (2.0 * c_a - c2)).abs() < 1e-9);
                let sum: f64 = (1..=d)
                    .map(|k| individual_capacity(alpha, d, k).unwrap())
                    .sum();
                let total = d as f64 * c_a;
                assert!(((sum - total) / total).abs() < 1e-9, "alpha={alpha}, d={d}");
                // Monotone non-increasing in k.
                let mut prev = f64::INFINITY;
                for k in 1..=d {
                    let nu = individual_capacity(alpha, d, k).unwrap();
                    assert!(nu <= prev + 1e-12);
                    prev = nu;
                }
            }
        }
    }

    #[test]
    fn powerlaw_trivial_cases() {
        let c2 = gaussian_shape_term();
        // gamma = 0: white Gaussian, both schemes p*c2 exactly.
        let r = random_entropy_gaussian_powerlaw(0.0, 64, 5).unwrap();
        assert!((r - 5.0 * c2).abs() < 1e-10);
        let q = pca_entropy_gaussian_powerlaw(0.0, 5).unwrap();
        assert!((q - 5.0 * c2).abs() < 1e-12);
        // p = 1: c2 + 1/2 ln(mean variance).
        let d = 32;
        let mean_lambda: f64 =
            (1..=d).map(|k| 1.0 / (k as f64).powi(2)).sum::<f64>() / d as f64;
        let r1 = random_entropy_gaussian_powerlaw(2.0, d, 1).unwrap();
        assert!((r1 - (c2 + 0.5 * mean_lambda.ln())).abs() < 1e-10);
        assert!((pca_entropy_gaussian_powerlaw(3.0, 1).unwrap() - c2).abs() < 1e-12);
    }

    #[test]
    fn pca_beats_random_for_powerlaw_gaussian() {
        for gamma in [1.0, 2.0] {
            for p in [2usize, 8, 32] {
                let gap = random_entropy_gaussian_powerlaw(gamma, 256, p).unwrap()
                    - pca_entropy_gaussian_powerlaw(gamma, p).unwrap();
                assert!(gap < 0.0, "gamma={gamma}, p={p}: {gap}");
            }
        }
    }

    #[test]
    fn hybrid_gap_reduces_to_components() {
        let d = 128;
        for p in [1usize, 3, 17] {
            let white_only = hybrid_gap(0.5, 0.0, d, p).unwrap();
            let expect = random_entropy_white(0.5, d, p).unwrap()
                - pca_entropy_white(0.5, p).unwrap();
            assert!((white_only - expect).abs() < 1e-10);

            let plaw_only = hybrid_gap(2.0, 1.5, d, p).unwrap();
            let expect = random_entropy_gaussian_powerlaw(1.5, d, p).unwrap()
                - pca_entropy_gaussian_powerlaw(1.5, p).unwrap();
            assert!((plaw_only - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn orthonormal_rows_are_orthonormal() {
        let rows = random_orthonormal_rows(6, 40, 3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = crate::numeric::dot(&rows[i], &rows[j]);
                assert!((got - want).abs() < 1e-12, "({i},{j}): {got}");
            }
        }
        // Deterministic per seed.
        let again = random_orthonormal_rows(6, 40, 3).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn spectrum_validation() {
        assert!(SpectrumProfile::Explicit(vec![1.0, 2.0]).ln_variances().is_err());
        assert!(SpectrumProfile::Explicit(vec![1.0, -0.5]).ln_variances().is_err());
        let lv = SpectrumProfile::PowerLaw { gamma: 1.0, dim: 3 }
            .ln_variances()
            .unwrap();
        assert!((lv[2] + (3.0f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn curve_csv_format() {
        let c = EntropyCurve::new("random", vec![1, 2], vec![1.5, 2.5]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf, true).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "p,scheme,entropy_nats");
        assert!(lines.next().unwrap().starts_with("1,random,1.5"));
    }
}
