//! Shared plumbing: image loading/synthesis, model calibration, p-grids,
//! shape estimation and CSV provenance headers.

use std::io::Write;
use std::path::Path;

use infosense::error::{Error, Result};
use infosense::ggdist::{estimate_alpha, AlphaEstimate};
use infosense::image::Image;
use infosense::model::{band_partition, natural_image_model, sample_image_dct, MultiResModel};
use infosense::operators::{dct2_forward, haar_detail_subbands};

/// How per-band variances are chosen for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Calibration {
    /// Mean squared DCT coefficient per shell, monotonized.
    Empirical,
    /// Least-squares fit of the 1/4^l octave law to the shell energies.
    Fitted,
    /// The theoretical octave model with unit top-band variance.
    None,
}

/// Load a PGM image or synthesize one from the octave model.
pub fn load_or_synth(
    image: &Option<std::path::PathBuf>,
    size: usize,
    alpha: f64,
    seed: u64,
) -> Result<(Image, String)> {
    match image {
        Some(path) => {
            let img = Image::load_pgm(path)?;
            Ok((img, format!("{}", path.display())))
        }
        None => {
            let model = natural_image_model(size, size, alpha)?;
            let img = sample_image_dct(&model, seed)?;
            Ok((normalize_to_pixels(img), format!("synthetic(alpha={alpha},seed={seed})")))
        }
    }
}

/// Rescale a zero-centered synthesis to the usual 8-bit pixel range
/// (mean 128, std 40) without clamping.
pub fn normalize_to_pixels(img: Image) -> Image {
    let n = img.side();
    let data = img.into_pixels();
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / data.len() as f64;
    let scale = if var > 0.0 { 40.0 / var.sqrt() } else { 1.0 };
    let data = data.into_iter().map(|v| 128.0 + scale * (v - mean)).collect();
    Image::new(n, data).expect("same dimensions")
}

/// Mean squared DCT coefficient per octave shell.
pub fn shell_energies(image: &Image) -> Result<Vec<f64>> {
    let mut coeffs = image.clone();
    dct2_forward(&mut coeffs)?;
    let partition = band_partition(image.side())?;
    Ok(partition
        .iter()
        .map(|idx| {
            idx.iter().map(|&i| coeffs.pixels()[i].powi(2)).sum::<f64>() / idx.len() as f64
        })
        .collect())
}

/// Octave model for an image with variances calibrated from its spectrum.
pub fn calibrated_model(image: &Image, alpha: f64, calib: Calibration) -> Result<MultiResModel> {
    let n = image.side();
    let base = natural_image_model(n, n, alpha)?;
    match calib {
        Calibration::None => Ok(base),
        Calibration::Empirical => {
            let mut energies = shell_energies(image)?;
            // Enforce the non-increasing invariant; empirical shells can
            // wobble.
            for l in 1..energies.len() {
                energies[l] = energies[l].min(energies[l - 1]).max(1e-12);
            }
            base.with_variances(&energies)
        }
        Calibration::Fitted => {
            let energies = shell_energies(image)?;
            // ln lambda_l = ln A - l ln 4, least squares over l >= 1.
            let pts: Vec<(f64, f64)> = energies
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &e)| e > 0.0)
                .map(|(l, &e)| (l as f64, e.ln()))
                .collect();
            if pts.len() < 2 {
                return Err(Error::InvalidParameter("not enough shells to fit".into()));
            }
            let n_pts = pts.len() as f64;
            let mean_l = pts.iter().map(|p| p.0).sum::<f64>() / n_pts;
            let mean_e = pts.iter().map(|p| p.1).sum::<f64>() / n_pts;
            // Slope is pinned to -ln 4 by the octave law; fit the intercept.
            let ln4 = (4.0f64).ln();
            let ln_a = mean_e + ln4 * mean_l;
            let fitted: Vec<f64> = (0..energies.len())
                .map(|l| (ln_a - ln4 * l as f64).exp())
                .collect();
            let mut fitted = fitted;
            // Let a dominant DC shell keep its measured energy.
            fitted[0] = fitted[0].max(energies[0]);
            base.with_variances(&fitted)
        }
    }
}

/// Pool all Haar detail coefficients, normalized to unit variance per
/// subband, and estimate the GG shape from the pooled sample.
pub fn estimate_alpha_from_image(image: &Image) -> Result<AlphaEstimate> {
    let subbands = haar_detail_subbands(image)?;
    let mut pool = Vec::new();
    for band in &subbands {
        if band.len() < 16 {
            continue;
        }
        let var = band.iter().map(|v| v * v).sum::<f64>() / band.len() as f64;
        if var <= 0.0 {
            continue;
        }
        let std = var.sqrt();
        pool.extend(band.iter().map(|v| v / std));
    }
    if pool.is_empty() {
        return Err(Error::DegenerateSamples(
            "image has no varying detail coefficients".into(),
        ));
    }
    estimate_alpha(&pool)
}

/// Parse a sensor-count grid: comma-separated counts (`100,500`), percents
/// of the dimension (`10%,25%`), or `log:<lo>:<hi>:<points>`.
pub fn parse_p_grid(spec: &str, dim: usize) -> Result<Vec<usize>> {
    let bad = |m: &str| Error::InvalidParameter(format!("p-grid '{spec}': {m}"));
    let mut out: Vec<usize> = Vec::new();
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:<lo>:<hi>:<points>"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad("bad lo"))?;
        let hi: f64 = parts[1].parse().map_err(|_| bad("bad hi"))?;
        let k: usize = parts[2].parse().map_err(|_| bad("bad point count"))?;
        if lo < 1.0 || hi < lo || k < 2 {
            return Err(bad("need 1 <= lo <= hi and >= 2 points"));
        }
        for i in 0..k {
            let t = i as f64 / (k - 1) as f64;
            let v = (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize;
            out.push(v.clamp(1, dim));
        }
        out.dedup();
    } else {
        for item in spec.split(',') {
            let item = item.trim();
            let p = if let Some(pct) = item.strip_suffix('%') {
                let f: f64 = pct.parse().map_err(|_| bad("bad percent"))?;
                ((f / 100.0) * dim as f64).round() as usize
            } else {
                item.parse().map_err(|_| bad("bad count"))?
            };
            if p == 0 || p > dim {
                return Err(bad(&format!("p={p} outside 1..={dim}")));
            }
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(out)
}

/// `# <provenance>` comment line followed by the CSV payload.
pub fn write_csv_with_header(path: &Path, provenance: &str, payload: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "# {provenance}")?;
    f.write_all(payload)?;
    Ok(())
}
