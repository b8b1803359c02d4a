//! Orthonormal 2-D transforms: type-II DCT and full-depth Haar wavelets.
//!
//! Both are separable and unitary, so the inverse is the transpose and
//! energy is preserved exactly. DCT basis tables are cached per size.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::image::Image;

/// Cached orthonormal DCT-II basis for one transform size.
///
/// `mat[k * n + i] = s_k cos(pi (2i + 1) k / (2n))` with `s_0 = sqrt(1/n)`,
/// `s_k = sqrt(2/n)` otherwise. Rows are orthonormal.
struct DctPlan {
    n: usize,
    mat: Vec<f64>,
}

impl DctPlan {
    fn new(n: usize) -> Self {
        let mut mat = vec![0.0; n * n];
        let norm0 = (1.0 / n as f64).sqrt();
        let norm = (2.0 / n as f64).sqrt();
        for k in 0..n {
            let s = if k == 0 { norm0 } else { norm };
            for i in 0..n {
                mat[k * n + i] =
                    s * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64)
                        .cos();
            }
        }
        DctPlan { n, mat }
    }

    fn forward_1d(&self, input: &[f64], out: &mut [f64]) {
        for k in 0..self.n {
            let row = &self.mat[k * self.n..(k + 1) * self.n];
            out[k] = row.iter().zip(input).map(|(m, x)| m * x).sum();
        }
    }

    fn inverse_1d(&self, input: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for k in 0..self.n {
            let c = input[k];
            if c == 0.0 {
                continue;
            }
            let row = &self.mat[k * self.n..(k + 1) * self.n];
            for (o, m) in out.iter_mut().zip(row) {
                *o += c * m;
            }
        }
    }
}

fn plan(n: usize) -> Arc<DctPlan> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<DctPlan>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().unwrap();
    guard.entry(n).or_insert_with(|| Arc::new(DctPlan::new(n))).clone()
}

fn check_side(n: usize) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::invalid(format!("side must be a power of two, got {n}")));
    }
    Ok(())
}

fn transform_2d(data: &mut [f64], n: usize, forward: bool) {
    let plan = plan(n);
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    // Rows.
    for r in 0..n {
        let row = &mut data[r * n..(r + 1) * n];
        line.copy_from_slice(row);
        if forward {
            plan.forward_1d(&line, &mut out);
        } else {
            plan.inverse_1d(&line, &mut out);
        }
        row.copy_from_slice(&out);
    }
    // Columns.
    for c in 0..n {
        for r in 0..n {
            line[r] = data[r * n + c];
        }
        if forward {
            plan.forward_1d(&line, &mut out);
        } else {
            plan.inverse_1d(&line, &mut out);
        }
        for r in 0..n {
            data[r * n + c] = out[r];
        }
    }
}

/// In-place orthonormal 2-D DCT-II on a flat row-major buffer.
pub(crate) fn dct2_forward_slice(data: &mut [f64], n: usize) {
    transform_2d(data, n, true);
}

pub(crate) fn dct2_inverse_slice(data: &mut [f64], n: usize) {
    transform_2d(data, n, false);
}

/// Orthonormal 2-D DCT-II of a dyadic square image, in place.
pub fn dct2_forward(image: &mut Image) -> Result<()> {
    let n = image.side();
    check_side(n)?;
    dct2_forward_slice(image.pixels_mut(), n);
    Ok(())
}

/// Inverse (type-III) of [`dct2_forward`], in place.
pub fn dct2_inverse(image: &mut Image) -> Result<()> {
    let n = image.side();
    check_side(n)?;
    dct2_inverse_slice(image.pixels_mut(), n);
    Ok(())
}

fn haar_step_rows(data: &mut [f64], n: usize, size: usize, scratch: &mut [f64]) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for r in 0..size {
        let row = &mut data[r * n..r * n + size];
        let half = size / 2;
        for j in 0..half {
            scratch[j] = (row[2 * j] + row[2 * j + 1]) * inv;
            scratch[half + j] = (row[2 * j] - row[2 * j + 1]) * inv;
        }
        row.copy_from_slice(&scratch[..size]);
    }
}

fn haar_step_cols(data: &mut [f64], n: usize, size: usize, scratch: &mut [f64]) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for c in 0..size {
        let half = size / 2;
        for i in 0..half {
            let a = data[2 * i * n + c];
            let b = data[(2 * i + 1) * n + c];
            scratch[i] = (a + b) * inv;
            scratch[half + i] = (a - b) * inv;
        }
        for i in 0..size {
            data[i * n + c] = scratch[i];
        }
    }
}

fn haar_unstep_rows(data: &mut [f64], n: usize, size: usize, scratch: &mut [f64]) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for r in 0..size {
        let row = &mut data[r * n..r * n + size];
        let half = size / 2;
        for j in 0..half {
            scratch[2 * j] = (row[j] + row[half + j]) * inv;
            scratch[2 * j + 1] = (row[j] - row[half + j]) * inv;
        }
        row.copy_from_slice(&scratch[..size]);
    }
}

fn haar_unstep_cols(data: &mut [f64], n: usize, size: usize, scratch: &mut [f64]) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for c in 0..size {
        let half = size / 2;
        for i in 0..half {
            let s = data[i * n + c];
            let d = data[(half + i) * n + c];
            scratch[2 * i] = (s + d) * inv;
            scratch[2 * i + 1] = (s - d) * inv;
        }
        for i in 0..size {
            data[i * n + c] = scratch[i];
        }
    }
}

pub(crate) fn haar2_forward_slice(data: &mut [f64], n: usize) {
    let mut scratch = vec![0.0; n];
    let mut size = n;
    while size > 1 {
        haar_step_rows(data, n, size, &mut scratch);
        haar_step_cols(data, n, size, &mut scratch);
        size /= 2;
    }
}

pub(crate) fn haar2_inverse_slice(data: &mut [f64], n: usize) {
    let mut scratch = vec![0.0; n];
    let mut size = 2;
    while size <= n {
        haar_unstep_cols(data, n, size, &mut scratch);
        haar_unstep_rows(data, n, size, &mut scratch);
        size *= 2;
    }
}

/// Full-depth orthonormal 2-D Haar transform, standard pyramid layout
/// (approximation in the top-left corner, finest details in the outer
/// three quadrants), in place.
pub fn haar2_forward(image: &mut Image) -> Result<()> {
    let n = image.side();
    check_side(n)?;
    haar2_forward_slice(image.pixels_mut(), n);
    Ok(())
}

/// Inverse of [`haar2_forward`], in place.
pub fn haar2_inverse(image: &mut Image) -> Result<()> {
    let n = image.side();
    check_side(n)?;
    haar2_inverse_slice(image.pixels_mut(), n);
    Ok(())
}

/// Detail subbands of the full-depth Haar transform, finest scale first.
/// Each scale contributes its three orientation blocks as separate vectors,
/// so shape statistics can be normalized per subband before pooling.
pub fn haar_detail_subbands(image: &Image) -> Result<Vec<Vec<f64>>> {
    let n = image.side();
    check_side(n)?;
    let mut coeffs = image.clone();
    haar2_forward(&mut coeffs)?;
    let mut subbands = Vec::new();
    let mut side = n / 2;
    while side >= 1 {
        let mut lh = Vec::with_capacity(side * side);
        let mut hl = Vec::with_capacity(side * side);
        let mut hh = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                lh.push(coeffs.get(i, j + side));
                hl.push(coeffs.get(i + side, j));
                hh.push(coeffs.get(i + side, j + side));
            }
        }
        subbands.push(lh);
        subbands.push(hl);
        subbands.push(hh);
        side /= 2;
    }
    Ok(subbands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_image(n: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn energy(img: &Image) -> f64 {
        img.pixels().iter().map(|x| x * x).sum()
    }

    #[test]
    fn dct_constant_image_concentrates_at_dc() {
        let n = 16;
        let c = 3.25;
        let mut img = Image::from_fn(n, |_, _| c);
        dct2_forward(&mut img).unwrap();
        assert!((img.get(0, 0) - c * n as f64).abs() < 1e-10);
        for (i, &v) in img.pixels().iter().enumerate() {
            if i != 0 {
                assert!(v.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dct_round_trip_and_parseval() {
        for n in [8, 32] {
            let img = random_image(n, 5);
            let e0 = energy(&img);
            let mut t = img.clone();
            dct2_forward(&mut t).unwrap();
            assert!((energy(&t) - e0).abs() < 1e-12 * e0.max(1.0));
            dct2_inverse(&mut t).unwrap();
            let max_err = img
                .pixels()
                .iter()
                .zip(t.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err < 1e-12, "n={n}: {max_err}");
        }
    }

    #[test]
    fn dct_matches_direct_definition() {
        // O(n^2) evaluation of the defining sum, independent of the plan.
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let plan = DctPlan::new(n);
        let mut got = vec![0.0; n];
        plan.forward_1d(&x, &mut got);
        for k in 0..n {
            let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            let direct: f64 = (0..n)
                .map(|i| {
                    x[i] * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64
                        / (2 * n) as f64)
                        .cos()
                })
                .sum::<f64>()
                * s;
            assert!((got[k] - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn dct_rejects_non_dyadic() {
        let mut img = Image::zeros(12);
        assert!(dct2_forward(&mut img).is_err());
    }

    #[test]
    fn haar_constant_image_has_zero_details() {
        let mut img = Image::from_fn(8, |_, _| 7.0);
        haar2_forward(&mut img).unwrap();
        assert!((img.get(0, 0) - 7.0 * 8.0).abs() < 1e-12);
        for (i, &v) in img.pixels().iter().enumerate() {
            if i != 0 {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_round_trip_and_parseval() {
        let img = random_image(32, 11);
        let e0 = energy(&img);
        let mut t = img.clone();
        haar2_forward(&mut t).unwrap();
        assert!((energy(&t) - e0).abs() < 1e-12 * e0);
        haar2_inverse(&mut t).unwrap();
        let max_err = img
            .pixels()
            .iter()
            .zip(t.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12);
    }

    #[test]
    fn haar_subband_extraction_layout() {
        let n = 16;
        let img = random_image(n, 2);
        let subbands = haar_detail_subbands(&img).unwrap();
        assert_eq!(subbands.len(), 3 * 4); // 3 orientations x log2(16) scales
        assert_eq!(subbands[0].len(), 64); // finest scale, 8x8 blocks
        assert_eq!(subbands[11].len(), 1); // coarsest
        let total: usize = subbands.iter().map(|s| s.len()).sum();
        assert_eq!(total, n * n - 1); // everything but the scaling coefficient
        let flat = Image::from_fn(n, |_, _| 3.0);
        let subbands = haar_detail_subbands(&flat).unwrap();
        assert!(subbands.iter().flatten().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn haar_impulse_energy_is_preserved() {
        let mut img = Image::zeros(16);
        img.set(5, 9, 1.0);
        haar2_forward(&mut img).unwrap();
        assert!((energy(&img) - 1.0).abs() < 1e-13);
    }
}
