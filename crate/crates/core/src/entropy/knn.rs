//! Nearest-neighbor (Kozachenko–Leonenko) differential entropy estimation.
//!
//! `H ~= psi(n) - psi(k) + ln V_dim + dim/n * sum_i ln r_i(k)` where
//! `r_i(k)` is the distance from sample `i` to its `k`-th nearest neighbor
//! and `V_dim` the unit-ball volume. Neighbors are exact (kd-tree), so the
//! estimate is deterministic for a given sample set.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Entropy estimate plus a flag recording whether duplicate samples forced
/// a deterministic micro-jitter before estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnEntropy {
    pub nats: f64,
    pub jittered: bool,
}

/// Estimate differential entropy (nats) from samples of a continuous
/// distribution. `k_neighbors = 3` is a reasonable default.
pub fn knn_entropy(samples: &[Vec<f64>], k_neighbors: usize) -> Result<KnnEntropy> {
    let n = samples.len();
    if n < 50 {
        return Err(Error::invalid(format!("need at least 50 samples, got {n}")));
    }
    if k_neighbors == 0 {
        return Err(Error::invalid("k_neighbors must be >= 1"));
    }
    if k_neighbors >= n {
        return Err(Error::invalid("k_neighbors must be < sample count"));
    }
    let dim = samples[0].len();
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::dims("samples have inconsistent dimensions"));
    }
    let mut flat = Vec::with_capacity(n * dim);
    for s in samples {
        flat.extend_from_slice(s);
    }

    let mut jittered = false;
    let mut radii = kth_neighbor_distances(&flat, n, dim, k_neighbors);
    if radii.iter().any(|&r| r <= 0.0) {
        // Exact duplicates make ln r blow up; break them with a jitter far
        // below any meaningful scale and note that we did.
        jittered = true;
        let mut spread: f64 = 0.0;
        for d in 0..dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..n {
                lo = lo.min(flat[i * dim + d]);
                hi = hi.max(flat[i * dim + d]);
            }
            spread = spread.max(hi - lo);
        }
        let delta = if spread > 0.0 { spread * 1e-10 } else { 1e-10 };
        let mut rng = ChaCha8Rng::seed_from_u64(0x6b6e_6e00 ^ n as u64);
        for v in flat.iter_mut() {
            *v += rng.random_range(-delta..delta);
        }
        radii = kth_neighbor_distances(&flat, n, dim, k_neighbors);
        if radii.iter().any(|&r| r <= 0.0) {
            return Err(Error::Numerical("duplicate samples survived jitter".into()));
        }
    }

    let ln_unit_ball =
        0.5 * dim as f64 * std::f64::consts::PI.ln() - ln_gamma(0.5 * dim as f64 + 1.0);
    let log_sum: f64 = radii.iter().map(|r| r.ln()).sum();
    let nats = digamma(n as f64) - digamma(k_neighbors as f64)
        + ln_unit_ball
        + dim as f64 / n as f64 * log_sum;
    Ok(KnnEntropy { nats, jittered })
}

fn kth_neighbor_distances(flat: &[f64], n: usize, dim: usize, k: usize) -> Vec<f64> {
    let tree = KdTree::build(flat, n, dim);
    (0..n)
        .map(|i| {
            let q = &flat[i * dim..(i + 1) * dim];
            tree.kth_neighbor_distance(q, k, i)
        })
        .collect()
}

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf { lo: usize, hi: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Exact-k-NN kd-tree over a flat point buffer.
struct KdTree<'a> {
    points: &'a [f64],
    dim: usize,
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

impl<'a> KdTree<'a> {
    fn build(points: &'a [f64], n: usize, dim: usize) -> Self {
        let mut tree = KdTree {
            points,
            dim,
            order: (0..n as u32).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 2),
            root: 0,
        };
        tree.root = tree.build_range(0, n);
        tree
    }

    fn coord(&self, id: u32, axis: usize) -> f64 {
        self.points[id as usize * self.dim + axis]
    }

    fn build_range(&mut self, lo: usize, hi: usize) -> usize {
        if hi - lo <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { lo, hi });
            return self.nodes.len() - 1;
        }
        // Split on the widest axis at the median.
        let mut axis = 0;
        let mut widest = f64::NEG_INFINITY;
        for d in 0..self.dim {
            let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
            for &id in &self.order[lo..hi] {
                let c = self.coord(id, d);
                min = min.min(c);
                max = max.max(c);
            }
            if max - min > widest {
                widest = max - min;
                axis = d;
            }
        }
        let mid = (lo + hi) / 2;
        let points = self.points;
        let dim = self.dim;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            let ca = points[a as usize * dim + axis];
            let cb = points[b as usize * dim + axis];
            ca.partial_cmp(&cb).unwrap()
        });
        let value = self.coord(self.order[mid], axis);
        let left = self.build_range(lo, mid);
        let right = self.build_range(mid, hi);
        self.nodes.push(Node::Split { axis, value, left, right });
        self.nodes.len() - 1
    }

    /// Distance from `q` to its `k`-th nearest neighbor, excluding the point
    /// with index `skip` (the query itself when querying in-sample).
    fn kth_neighbor_distance(&self, q: &[f64], k: usize, skip: usize) -> f64 {
        // `best` holds up to k squared distances, sorted ascending.
        let mut best: Vec<f64> = Vec::with_capacity(k);
        self.search(self.root, q, k, skip, &mut best);
        best[k - 1].sqrt()
    }

    fn search(&self, node: usize, q: &[f64], k: usize, skip: usize, best: &mut Vec<f64>) {
        match &self.nodes[node] {
            Node::Leaf { lo, hi } => {
                for &id in &self.order[*lo..*hi] {
                    if id as usize == skip {
                        continue;
                    }
                    let base = id as usize * self.dim;
                    let mut d2 = 0.0;
                    for (a, b) in q.iter().zip(&self.points[base..base + self.dim]) {
                        let diff = a - b;
                        d2 += diff * diff;
                    }
                    if best.len() < k {
                        let pos = best.partition_point(|&x| x < d2);
                        best.insert(pos, d2);
                    } else if d2 < best[k - 1] {
                        best.pop();
                        let pos = best.partition_point(|&x| x < d2);
                        best.insert(pos, d2);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = q[*axis] - value;
                let (near, far) = if delta < 0.0 { (*left, *right) } else { (*right, *left) };
                self.search(near, q, k, skip, best);
                if best.len() < k || delta * delta < best[k - 1] {
                    self.search(far, q, k, skip, best);
                }
            }
        }
    }
}
