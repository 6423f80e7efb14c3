//! k-means++ seeding and Lloyd iterations.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::dataset::{sq_dist, VectorDataset};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const LLOYD_TOLERANCE: f64 = 1e-7;
pub const LLOYD_MAX_ROUNDS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub rounds: usize,
}

/// Seeds `k` centers from `points` with D²-weighted sampling. When every
/// remaining point coincides with a chosen center, the next center is drawn
/// uniformly from the points not yet chosen.
pub(crate) fn kmeanspp_seeds<R: Rng>(points: &[&[f64]], k: usize, rng: &mut R) -> Vec<usize> {
    let m = points.len();
    let mut chosen = vec![rng.random_range(0..m)];
    let mut best: Vec<f64> = points.iter().map(|p| sq_dist(p, points[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&best) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                let free: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (b, p) in best.iter_mut().zip(points) {
            *b = b.min(sq_dist(p, points[next]));
        }
    }
    chosen
}

/// Index of the nearest center; ties go to the smaller index.
pub(crate) fn nearest(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Lloyd iterations from the given centers. Empty clusters keep their
/// previous center.
pub(crate) fn lloyd(
    points: &[&[f64]],
    mut centers: Vec<Vec<f64>>,
    assign: impl Fn(&[f64], &[Vec<f64>]) -> usize,
) -> KMeansResult {
    let dim = centers.first().map_or(0, |c| c.len());
    let k = centers.len();
    let mut assignment = vec![0; points.len()];
    let mut rounds = 0;
    while rounds < LLOYD_MAX_ROUNDS {
        rounds += 1;
        for (a, p) in assignment.iter_mut().zip(points) {
            *a = assign(p, &centers);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            sums[a].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
        }
        let mut moved: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            moved = moved.max(sq_dist(&new, &centers[c]).sqrt());
            centers[c] = new;
        }
        if moved < LLOYD_TOLERANCE {
            break;
        }
    }
    for (a, p) in assignment.iter_mut().zip(points) {
        *a = assign(p, &centers);
    }
    KMeansResult {
        assignment,
        centers,
        rounds,
    }
}

/// Flat k-means over the whole dataset.
pub fn flat_kmeans(data: &VectorDataset, k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > data.n() {
        return Err(Error::InvalidParams(format!("k must be in 1..={} (got {k})", data.n())));
    }
    let points: Vec<&[f64]> = data.rows().collect();
    let mut rng = rng_from(seed);
    let seeds = kmeanspp_seeds(&points, k, &mut rng);
    let centers = seeds.iter().map(|&i| points[i].to_vec()).collect();
    Ok(lloyd(&points, centers, nearest))
}
