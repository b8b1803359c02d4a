//! `infosense capacity` — capacity diagram CSV plus a per-band allocation
//! summary for a chosen sensor budget.

use std::path::PathBuf;

use clap::Args;
use infosense::error::{Error, Result};
use infosense::model::{allocate, apply_threshold_rule, capacity_diagram, natural_image_model};

use crate::common::{self, Calibration};

#[derive(Args)]
pub struct CapacityArgs {
    /// Input image (PGM); used to calibrate band variances and, when
    /// --alpha is absent, to estimate the shape parameter.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Image side when no input image is given.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// GG shape parameter; estimated from the image when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Measurement noise standard deviation (pixel units).
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Sensor budget for the printed per-band allocation.
    #[arg(long)]
    pub p: Option<usize>,
    /// Band-variance calibration mode.
    #[arg(long, value_enum)]
    pub calib: Option<Calibration>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: CapacityArgs) -> Result<()> {
    crate::ensure_out_dir(&args.out_dir)?;
    let (model, origin) = match &args.image {
        Some(path) => {
            let img = infosense::image::Image::load_pgm(path)?;
            let alpha = match args.alpha {
                Some(a) => a,
                None => {
                    let est = common::estimate_alpha_from_image(&img)?;
                    eprintln!("estimated alpha = {:.4}", est.alpha);
                    est.alpha
                }
            };
            let calib = args.calib.unwrap_or(Calibration::Empirical);
            (common::calibrated_model(&img, alpha, calib)?, format!("{}", path.display()))
        }
        None => {
            let alpha = args
                .alpha
                .ok_or_else(|| Error::InvalidParameter("need --alpha or --image".into()))?;
            (natural_image_model(args.size, args.size, alpha)?, "model".into())
        }
    };

    let diagram = capacity_diagram(&model, args.sigma)?;
    let mut payload = Vec::new();
    diagram.write_csv(&mut payload)?;
    let provenance = format!(
        "infosense capacity source={origin} alpha={} sigma={} seed={}",
        model.alpha(),
        args.sigma,
        args.seed
    );
    let path = args.out_dir.join("capacity_diagram.csv");
    common::write_csv_with_header(&path, &provenance, &payload)?;
    println!("wrote {}", path.display());

    if let Some(p) = args.p {
        let allocation = allocate(&diagram, p)?;
        println!("allocation for p = {p}:");
        for (band, &p_l) in model.bands().iter().zip(&allocation.per_band) {
            println!(
                "  band {:>2}: {:>8} / {:<8} ({:>5.1}%)",
                band.level,
                p_l,
                band.size,
                100.0 * p_l as f64 / band.size as f64
            );
        }
        let outcome = apply_threshold_rule(&allocation, &model)?;
        println!(
            "  threshold rule: full {:?}, skipped {:?}, joint random block of {} over bands {:?}",
            outcome.full_bands,
            outcome.skipped_bands,
            outcome.residual_random_count,
            outcome.partial_bands
        );
    }
    Ok(())
}
