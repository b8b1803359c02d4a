//! `infosense estimate-alpha` — GG shape estimation from an image's Haar
//! wavelet detail coefficients.

use std::path::PathBuf;

use clap::Args;
use infosense::error::Result;
use infosense::image::Image;

use crate::common;

#[derive(Args)]
pub struct EstimateArgs {
    /// Input image (PGM).
    #[arg(long)]
    pub image: PathBuf,
}

pub fn run(args: EstimateArgs) -> Result<()> {
    let img = Image::load_pgm(&args.image)?;
    let est = common::estimate_alpha_from_image(&img)?;
    if est.clamped {
        eprintln!("warning: moment ratio outside the searchable range; estimate clamped");
    }
    println!("alpha_hat = {:.4}", est.alpha);
    Ok(())
}
