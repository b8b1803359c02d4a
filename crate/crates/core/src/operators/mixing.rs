//! Randomized orthonormal mixing: random signs plus fast Walsh-Hadamard
//! butterflies, with selected output rows.
//!
//! For a dyadic dimension the operator is `S H D` (sign flips, orthonormal
//! Hadamard, row selection) — binary-valued rows, `W W^T = I` exactly, and
//! `O(n log n)` application. A non-dyadic dimension gets three such stages
//! with the Hadamard block alternating between the low and high end of the
//! buffer and a fresh random permutation in between; every stage is an
//! exact `n x n` rotation, so orthonormality never needs repair.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::LinearOperator;

/// In-place orthonormal fast Walsh-Hadamard transform; the length must be a
/// power of two. Self-inverse.
pub(crate) fn fwht(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut stride = 1;
    while stride < n {
        for block in (0..n).step_by(stride * 2) {
            for j in block..block + stride {
                let a = data[j];
                let b = data[j + stride];
                data[j] = a + b;
                data[j + stride] = a - b;
            }
        }
        stride *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in data {
        *v *= scale;
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MixStage {
    /// Input shuffle; `None` for the single-stage dyadic case.
    pub(crate) perm: Option<Vec<u32>>,
    pub(crate) signs: Vec<f64>,
    pub(crate) block_start: usize,
    pub(crate) block_len: usize,
}

impl MixStage {
    fn forward(&self, buf: &mut [f64], scratch: &mut [f64]) {
        if let Some(perm) = &self.perm {
            for (i, &src) in perm.iter().enumerate() {
                scratch[i] = buf[src as usize];
            }
            buf.copy_from_slice(scratch);
        }
        for (v, s) in buf.iter_mut().zip(&self.signs) {
            *v *= s;
        }
        fwht(&mut buf[self.block_start..self.block_start + self.block_len]);
    }

    fn adjoint(&self, buf: &mut [f64], scratch: &mut [f64]) {
        fwht(&mut buf[self.block_start..self.block_start + self.block_len]);
        for (v, s) in buf.iter_mut().zip(&self.signs) {
            *v *= s;
        }
        if let Some(perm) = &self.perm {
            for (i, &src) in perm.iter().enumerate() {
                scratch[src as usize] = buf[i];
            }
            buf.copy_from_slice(scratch);
        }
    }
}

/// Matrix-free random orthonormal measurement map `R^n -> R^m`.
#[derive(Debug, Clone)]
pub struct RandomMixing {
    n: usize,
    pub(crate) rows: Vec<usize>,
    pub(crate) stages: Vec<MixStage>,
    label: String,
}

/// Build a random mixing operator with `m` distinct output rows,
/// reproducible per seed.
pub fn random_mixing_operator(n: usize, m: usize, seed: u64) -> Result<RandomMixing> {
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_signs = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
    };
    let stages = if n.is_power_of_two() {
        vec![MixStage { perm: None, signs: random_signs(&mut rng), block_start: 0, block_len: n }]
    } else {
        // Largest dyadic block; alternating placement covers all coordinates.
        let block = usize::BITS as usize - 1 - n.leading_zeros() as usize;
        let block = 1usize << block;
        let mut make_stage = |start: usize| {
            let mut perm: Vec<u32> = (0..n as u32).collect();
            perm.shuffle(&mut rng);
            MixStage {
                perm: Some(perm),
                signs: random_signs(&mut rng),
                block_start: start,
                block_len: block,
            }
        };
        vec![make_stage(0), make_stage(n - block), make_stage(0)]
    };
    let mut rows = rand::seq::index::sample(&mut rng, n, m).into_vec();
    rows.sort_unstable();
    Ok(RandomMixing { n, rows, stages, label: format!("random-mixing(seed={seed})") })
}

impl RandomMixing {
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Apply the full `n x n` rotation without row selection.
    pub(crate) fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = x.to_vec();
        let mut scratch = vec![0.0; self.n];
        for stage in &self.stages {
            stage.forward(&mut buf, &mut scratch);
        }
        buf
    }

    pub(crate) fn rotate_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut buf = y.to_vec();
        let mut scratch = vec![0.0; self.n];
        for stage in self.stages.iter().rev() {
            stage.adjoint(&mut buf, &mut scratch);
        }
        buf
    }
}

impl LinearOperator for RandomMixing {
    fn in_dim(&self) -> usize {
        self.n
    }

    fn out_dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let buf = self.rotate(x);
        self.rows.iter().map(|&r| buf[r]).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows.len());
        let mut buf = vec![0.0; self.n];
        for (&r, &v) in self.rows.iter().zip(y) {
            buf[r] = v;
        }
        self.rotate_adjoint(&buf)
    }

    fn label(&self) -> &str {
        &self.label
    }
}
