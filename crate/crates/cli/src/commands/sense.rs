//! `infosense sense` — end-to-end measure/reconstruct benchmark across
//! schemes and sensor budgets, reporting PSNR per cell.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use infosense::error::{Error, Result};
use infosense::model::MultiResModel;
use infosense::operators::{build_scheme, measure, SchemeSpec, SchemeVariant};
use infosense::recon::{default_tv_epsilon, linear_recon, psnr, tv_min_recon, TvSolverConfig};

use crate::common::{self, Calibration};

#[derive(Args)]
pub struct SenseArgs {
    /// Input image (PGM). Without it, a synthetic image is sampled from the
    /// octave model at --alpha.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Side length of the synthetic image.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// GG shape parameter for the octave model (synthesis and UCA design);
    /// estimated from the image when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated schemes: dct-linear, dct-tv, romberg, random, uca.
    #[arg(long, default_value = "dct-linear,dct-tv,romberg,random,uca")]
    pub scheme: String,
    /// Sensor budgets: counts, percents of d, or log:<lo>:<hi>:<points>.
    #[arg(long, default_value = "10%,25%")]
    pub p_grid: String,
    /// Measurement noise standard deviation (pixel units). The UCA design
    /// also adapts to this level.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Leading zig-zag DCT rows of the romberg hybrid scheme.
    #[arg(long, default_value_t = 1000)]
    pub n_dct: usize,
    /// Band-variance calibration for the UCA model.
    #[arg(long, value_enum)]
    pub calib: Option<Calibration>,
    /// TV solver iteration budget.
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn parse_schemes(spec: &str, n_dct: usize, sigma: f64, seed: u64) -> Result<Vec<SchemeSpec>> {
    spec.split(',')
        .map(|name| {
            let variant = match name.trim() {
                "dct-linear" => SchemeVariant::DctLinear,
                "dct-tv" => SchemeVariant::DctZigzag,
                "romberg" => SchemeVariant::RombergHybrid { n_dct },
                "random" => SchemeVariant::PureRandom,
                "uca" => SchemeVariant::BandwiseRandom { design_sigma: sigma },
                other => {
                    return Err(Error::InvalidParameter(format!("unknown scheme '{other}'")))
                }
            };
            Ok(SchemeSpec::new(variant, seed))
        })
        .collect()
}

pub fn run(args: SenseArgs) -> Result<()> {
    crate::ensure_out_dir(&args.out_dir)?;
    let synth_alpha = args.alpha.unwrap_or(0.32);
    let (image, origin) = common::load_or_synth(&args.image, args.size, synth_alpha, args.seed)?;
    let n = image.side();
    let d = n * n;

    let alpha = match (args.alpha, &args.image) {
        (Some(a), _) => a,
        (None, None) => synth_alpha,
        (None, Some(_)) => {
            let est = common::estimate_alpha_from_image(&image)?;
            eprintln!("estimated alpha = {:.4}", est.alpha);
            est.alpha
        }
    };
    // Synthetic images come straight from the theoretical model; real images
    // get their band power measured.
    let default_calib = if args.image.is_some() { Calibration::Empirical } else { Calibration::None };
    let calib = args.calib.unwrap_or(default_calib);
    let model: MultiResModel = common::calibrated_model(&image, alpha, calib)?;

    let grid = common::parse_p_grid(&args.p_grid, d)?;
    let schemes = parse_schemes(&args.scheme, args.n_dct, args.sigma, args.seed)?;

    image.save_pgm(args.out_dir.join("original.pgm"))?;

    let mut rows = Vec::new();
    for spec in &schemes {
        for &p in &grid {
            if let SchemeVariant::RombergHybrid { n_dct } = spec.variant {
                if n_dct > p {
                    eprintln!("skipping romberg at p={p} < n_dct={n_dct}");
                    continue;
                }
            }
            let operator = build_scheme(spec, &model, p)?;
            let m = measure(operator.as_ref(), &image, args.sigma, args.seed.wrapping_add(1))?;
            let (recon, iterations, converged, residual) = if spec.uses_tv_decoding() {
                let eps = default_tv_epsilon(&m.y, args.sigma);
                let step = 1.0 / 3.0;
                let cfg = TvSolverConfig::new(args.max_iter, step, step, eps, 1e-6)?;
                let r = tv_min_recon(operator.as_ref(), &m.y, &cfg)?;
                (r.image, r.iterations, r.converged, r.residual)
            } else {
                let img = linear_recon(operator.as_ref(), &m.y)?;
                (img, 0, true, 0.0)
            };
            let quality = psnr(&image, &recon, 255.0)?;
            let name = format!("recon_{}_p{p}.pgm", spec.name());
            recon.save_pgm(args.out_dir.join(&name))?;
            println!(
                "{:>10} p={p:<6} psnr={:.2} dB{}{}",
                spec.name(),
                quality.db,
                if quality.exact { " (exact)" } else { "" },
                if converged { String::new() } else { format!(" [not converged, residual {residual:.3e}]") },
            );
            rows.push(format!(
                "{},{},{},{},{:.4},{},{},{}",
                spec.name(),
                p,
                args.sigma,
                args.seed,
                quality.db,
                quality.exact,
                iterations,
                converged
            ));
        }
    }

    let mut payload = Vec::new();
    writeln!(payload, "scheme,p,sigma,seed,psnr_db,exact,iterations,converged")?;
    for row in rows {
        writeln!(payload, "{row}")?;
    }
    let provenance = format!(
        "infosense sense source={origin} alpha={alpha} calib={calib:?} scheme={} p_grid={} sigma={} n_dct={} max_iter={} seed={}",
        args.scheme, args.p_grid, args.sigma, args.n_dct, args.max_iter, args.seed
    );
    let path = args.out_dir.join("psnr.csv");
    common::write_csv_with_header(&path, &provenance, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}
