//! Deterministic Lloyd k-means with k-means++ seeding.
//!
//! Given the same points and [`KMeansConfig`] the output is identical bit for
//! bit, with or without the `parallel` feature: distances are computed
//! independently per point and every reduction runs in point-index order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::par;
use crate::prng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub clusters: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once the relative inertia improvement of an iteration drops
    /// below this.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(clusters: usize, seed: u64) -> Self {
        Self {
            clusters,
            seed,
            max_iters: 100,
            tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidConfig("cluster count must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutput {
    pub centroids: Vec<Vec<f64>>,
    /// Final cluster of each point.
    pub assignments: Vec<usize>,
    /// Inertia after the initial assignment and after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansOutput {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the closest centroid; ties go to the lowest
/// index.
pub fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, point);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, f64) {
    let pairs = par::map_ordered(points, |p| nearest(centroids, p));
    let inertia = pairs.iter().map(|p| p.1).sum();
    let (labels, dists) = pairs.into_iter().unzip();
    (labels, dists, inertia)
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.next_below(n as u64) as usize].clone());
    let mut d2: Vec<f64> = par::map_ordered(points, |p| squared_distance(p, &centroids[0]));
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_positive = 0;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                last_positive = i;
                acc += w;
                if acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or(last_positive)
        } else {
            rng.next_below(n as u64) as usize
        };
        let c = points[pick].clone();
        let fresh = par::map_ordered(points, |p| squared_distance(p, &c));
        for (cur, new) in d2.iter_mut().zip(fresh) {
            if new < *cur {
                *cur = new;
            }
        }
        centroids.push(c);
    }
    centroids
}

fn recompute(points: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) -> Vec<usize> {
    let dim = points[0].len();
    let k = centroids.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut empty = Vec::new();
    for (c, ((sum, &count), centroid)) in sums
        .into_iter()
        .zip(&counts)
        .zip(centroids.iter_mut())
        .enumerate()
    {
        if count == 0 {
            empty.push(c);
        } else {
            *centroid = sum.into_iter().map(|s| s / count as f64).collect();
        }
    }
    empty
}

/// Moves each empty cluster onto the point farthest from its own centroid.
fn reseed_empty(
    points: &[Vec<f64>],
    labels: &[usize],
    centroids: &mut [Vec<f64>],
    empty: &[usize],
) {
    if empty.is_empty() {
        return;
    }
    let mut dist: Vec<f64> = points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l]))
        .collect();
    for &c in empty {
        let mut far = 0;
        for (i, &d) in dist.iter().enumerate() {
            if d > dist[far] {
                far = i;
            }
        }
        centroids[c] = points[far].clone();
        dist[far] = f64::NEG_INFINITY;
    }
}

pub fn kmeans(points: &[Vec<f64>], cfg: &KMeansConfig) -> Result<KMeansOutput> {
    cfg.validate()?;
    if points.len() < cfg.clusters {
        return Err(Error::TooFewPoints {
            points: points.len(),
            clusters: cfg.clusters,
        });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }

    let mut rng = SplitMix64::new(cfg.seed);
    let mut centroids = plus_plus_init(points, cfg.clusters, &mut rng);
    let (mut labels, _, mut inertia) = assign(points, &centroids);
    let mut history = vec![inertia];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let empty = recompute(points, &labels, &mut centroids);
        reseed_empty(points, &labels, &mut centroids, &empty);
        iterations += 1;
        let (next_labels, _, next_inertia) = assign(points, &centroids);
        labels = next_labels;
        history.push(next_inertia);
        let done = inertia <= 0.0 || (inertia - next_inertia) / inertia < cfg.tol;
        inertia = next_inertia;
        if done {
            break;
        }
    }

    Ok(KMeansOutput {
        centroids,
        assignments: labels,
        inertia_history: history,
        iterations,
    })
}
