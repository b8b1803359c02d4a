//! Entropy-guided design and evaluation of linear measurement schemes for
//! compressed sensing.
//!
//! The crate answers one question end to end: given a prior on the signals
//! we want to sense, which `p` orthonormal linear measurements keep the most
//! information, and how well do different choices reconstruct? It provides
//!
//! * [`ggdist`] — generalized Gaussian densities, entropy shape terms,
//!   sampling and shape estimation;
//! * [`entropy`] — closed-form and empirical entropy of projection schemes
//!   (random vs. principal-component), including the subvolume dynamic
//!   program for power-law spectra and a nearest-neighbor entropy estimator;
//! * [`model`] — octave-band multi-resolution signal models, per-projection
//!   capacity diagrams and sensor allocation;
//! * [`operators`] — matrix-free orthonormal sensing operators (DCT, Haar,
//!   randomized binary mixing, bandwise schemes);
//! * [`recon`] — linear and total-variation decoding plus quality metrics;
//! * [`toydemo`] — a 2-D Gaussian-mixture demonstration of why the
//!   highest-entropy projection decodes best.

pub mod entropy;
pub mod error;
pub mod ggdist;
pub mod image;
pub mod model;
pub mod numeric;
pub mod operators;
pub mod recon;
pub mod toydemo;

pub use error::{Error, Result};
