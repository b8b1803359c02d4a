//! Expected volume of a random variance subset ("subvolume expectation").
//!
//! For variances `lambda_1..lambda_d`, the quantity is
//! `E[Vol_p] = S_p / C(d, p)` where `S_p` is the elementary symmetric
//! polynomial of degree `p` — the sum of all products of `p` distinct
//! variances. `S_p` satisfies the prefix recursion
//! `S_p(1..m) = S_p(1..m-1) + S_{p-1}(1..m-1) * lambda_m`, which is an
//! `O(d p)` dynamic program with `O(p)` state.
//!
//! Everything runs in the log domain with log-sum-exp per cell: power-law
//! spectra at `d = 2^16` underflow plain doubles almost immediately.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::logaddexp;

fn validate(lambdas: &[f64], p: usize) -> Result<()> {
    let d = lambdas.len();
    if p == 0 || p > d {
        return Err(Error::invalid(format!("need 1 <= p <= d, got p={p}, d={d}")));
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l <= 0.0) {
        return Err(Error::invalid(format!("variances must be > 0, got {bad}")));
    }
    Ok(())
}

/// ln C(d, p).
fn ln_binomial(d: usize, p: usize) -> f64 {
    ln_gamma(d as f64 + 1.0) - ln_gamma(p as f64 + 1.0) - ln_gamma((d - p) as f64 + 1.0)
}

/// Log-domain DP over the prefix recursion. Returns `ln S_q` for
/// `q = 1..=p_max` (index `q - 1`).
fn ln_esp_sweep(ln_lambdas: &[f64], p_max: usize) -> Vec<f64> {
    let mut state = vec![f64::NEG_INFINITY; p_max + 1];
    state[0] = 0.0; // ln S_0 = 0
    for (j, &lnl) in ln_lambdas.iter().enumerate() {
        let top = p_max.min(j + 1);
        for q in (1..=top).rev() {
            state[q] = logaddexp(state[q], state[q - 1] + lnl);
        }
    }
    state.remove(0);
    state
}

/// `ln S_p` choosing the cheaper side: for `p` past `d/2`, use the duality
/// `S_p(lambda) = prod(lambda) * S_{d-p}(1/lambda)`.
fn ln_esp(ln_lambdas: &[f64], p: usize) -> f64 {
    let d = ln_lambdas.len();
    if p == d {
        return ln_lambdas.iter().sum();
    }
    let q = d - p;
    if q < p {
        let total: f64 = ln_lambdas.iter().sum();
        let recip: Vec<f64> = ln_lambdas.iter().map(|l| -l).collect();
        total + *ln_esp_sweep(&recip, q).last().unwrap()
    } else {
        *ln_esp_sweep(ln_lambdas, p).last().unwrap()
    }
}

pub(crate) fn ln_subvolume_expectation_from_ln(ln_lambdas: &[f64], p: usize) -> Result<f64> {
    let d = ln_lambdas.len();
    if p == 0 || p > d {
        return Err(Error::invalid(format!("need 1 <= p <= d, got p={p}, d={d}")));
    }
    Ok(ln_esp(ln_lambdas, p) - ln_binomial(d, p))
}

/// `ln E[Vol_p]` — the log of the mean product over all `C(d, p)` subsets of
/// `p` distinct variances.
pub fn ln_subvolume_expectation(lambdas: &[f64], p: usize) -> Result<f64> {
    validate(lambdas, p)?;
    let ln_lambdas: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    ln_subvolume_expectation_from_ln(&ln_lambdas, p)
}

/// `E[Vol_p]` in the plain domain. May underflow to zero for extreme
/// spectra; use [`ln_subvolume_expectation`] when magnitudes are wild.
pub fn subvolume_expectation(lambdas: &[f64], p: usize) -> Result<f64> {
    Ok(ln_subvolume_expectation(lambdas, p)?.exp())
}

/// `ln E[Vol_q]` for every `q = 1..=p_max` from a single DP pass
/// (index `q - 1`). Intended for curve sweeps with `p_max` well below `d`.
pub fn ln_subvolume_expectation_sweep(lambdas: &[f64], p_max: usize) -> Result<Vec<f64>> {
    validate(lambdas, p_max)?;
    let d = lambdas.len();
    let ln_lambdas: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let sums = ln_esp_sweep(&ln_lambdas, p_max);
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| s - ln_binomial(d, i + 1))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive oracle: iterate all size-p subsets directly.
    fn brute_force_mean_product(lambdas: &[f64], p: usize) -> f64 {
        fn rec(lambdas: &[f64], start: usize, left: usize, acc: f64, sum: &mut f64, count: &mut u64) {
            if left == 0 {
                *sum += acc;
                *count += 1;
                return;
            }
            for i in start..=lambdas.len() - left {
                rec(lambdas, i + 1, left - 1, acc * lambdas[i], sum, count);
            }
        }
        let (mut sum, mut count) = (0.0, 0u64);
        rec(lambdas, 0, p, 1.0, &mut sum, &mut count);
        sum / count as f64
    }

    #[test]
    fn single_and_full_subsets() {
        let l = [4.0, 2.0, 1.0, 0.5];
        let mean = subvolume_expectation(&l, 1).unwrap();
        assert!((mean - l.iter().sum::<f64>() / 4.0).abs() < 1e-12);
        let full = subvolume_expectation(&l, 4).unwrap();
        assert!((full - l.iter().product::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_pairs_reference_value() {
        let l = [1.0, 0.5, 1.0 / 3.0, 0.25];
        let v = subvolume_expectation(&l, 2).unwrap();
        assert!((v - 35.0 / 144.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_enumeration() {
        let lambdas: Vec<f64> = (1..=12).map(|k| 1.0 / (k as f64).powf(1.7)).collect();
        for d in 2..=12 {
            for p in 1..=d {
                let dp = subvolume_expectation(&lambdas[..d], p).unwrap();
                let bf = brute_force_mean_product(&lambdas[..d], p);
                assert!(
                    ((dp - bf) / bf).abs() < 1e-10,
                    "d={d}, p={p}: dp={dp}, bf={bf}"
                );
            }
        }
    }

    #[test]
    fn duality_agrees_with_direct_sweep() {
        let ln_lambdas: Vec<f64> = (1..=11).map(|k| -2.0 * (k as f64).ln()).collect();
        for p in 1..=11 {
            let direct = *ln_esp_sweep(&ln_lambdas, p).last().unwrap();
            let chosen = ln_esp(&ln_lambdas, p);
            assert!((direct - chosen).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn log_domain_survives_extreme_spectra() {
        // Plain doubles are hopeless here; the log value must stay finite.
        let lambdas: Vec<f64> = (1..=4096).map(|k| 1.0 / (k as f64).powi(2)).collect();
        let ln_v = ln_subvolume_expectation(&lambdas, 512).unwrap();
        assert!(ln_v.is_finite());
        assert!(ln_v < 0.0);
        // The plain-domain value underflows gracefully rather than erroring.
        assert_eq!(subvolume_expectation(&lambdas, 512).unwrap(), 0.0);
    }

    #[test]
    fn sweep_matches_pointwise() {
        let lambdas: Vec<f64> = (1..=40).map(|k| 1.0 / (k as f64)).collect();
        let sweep = ln_subvolume_expectation_sweep(&lambdas, 10).unwrap();
        for p in 1..=10 {
            let single = ln_subvolume_expectation(&lambdas, p).unwrap();
            assert!((sweep[p - 1] - single).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(subvolume_expectation(&[1.0, 0.5], 3).is_err());
        assert!(subvolume_expectation(&[1.0, 0.0], 1).is_err());
        assert!(subvolume_expectation(&[], 1).is_err());
    }
}
