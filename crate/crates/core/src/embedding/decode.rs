//! Nearest-point decoding of linear measurements of atoms.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Grid, MAX_GRID_DIM};
use crate::linalg::{dist, LinearOperator};
use crate::points::AtomicMeasure;
use crate::random::rng_from_seed;

/// Index of the atom whose image is closest to `y`; ties go to the lowest
/// index.
pub fn nearest_point_decode(atoms: &AtomicMeasure, l: &LinearOperator, y: &[f64]) -> Result<usize> {
    if atoms.is_empty() {
        return invalid("no atoms to decode against");
    }
    if l.in_dim() != atoms.dim() || y.len() != l.out_dim() {
        return invalid("dimension mismatch");
    }
    let images: Vec<Vec<f64>> = atoms.support().points().iter().map(|a| l.apply(a)).collect();
    Ok(decode_images(&images, y))
}

fn decode_images(images: &[Vec<f64>], y: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, im) in images.iter().enumerate() {
        let d = dist(im, y);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    /// Total weight of atoms decoded to themselves.
    pub weighted: f64,
    /// Unweighted fraction of atoms decoded to themselves.
    pub fraction: f64,
    pub noise: f64,
}

/// Decodes `L a + ξ` for every atom `a`, with `ξ` Gaussian of standard
/// deviation `noise` per coordinate.
pub fn recovery_fraction(atoms: &AtomicMeasure, l: &LinearOperator, noise: f64, seed: u64) -> Result<Recovery> {
    if atoms.is_empty() {
        return invalid("no atoms to decode against");
    }
    if !(noise >= 0.0) {
        return invalid("noise must be nonnegative");
    }
    let images: Vec<Vec<f64>> = atoms.support().points().iter().map(|a| l.apply(a)).collect();
    let mut rng = rng_from_seed(seed);
    let queries: Vec<Vec<f64>> = images
        .iter()
        .map(|im| {
            im.iter()
                .map(|v| v + noise * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let decoded: Vec<usize> = if l.out_dim() <= MAX_GRID_DIM {
        let cell = (crate::points::diameter(&images) / (images.len() as f64).sqrt()).max(1e-300);
        let grid = Grid::new(&images, cell).expect("low dimension");
        // nearest() breaks ties arbitrarily, so recheck against the scan on ties
        queries
            .par_iter()
            .map(|q| {
                let (i, d) = grid.nearest(q).unwrap();
                let mut best = i;
                grid.within(q, d, |j| {
                    if j < best && dist(&images[j], q) <= d {
                        best = j;
                    }
                });
                best
            })
            .collect()
    } else {
        queries.par_iter().map(|q| decode_images(&images, q)).collect()
    };
    let hits: Vec<bool> = decoded.iter().enumerate().map(|(i, &d)| d == i).collect();
    let weighted = hits
        .iter()
        .zip(atoms.weights())
        .filter(|(h, _)| **h)
        .map(|(_, w)| *w)
        .sum();
    let fraction = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
    Ok(Recovery {
        weighted,
        fraction,
        noise,
    })
}

/// Root mean square of the image coordinates, the scale for relative noise.
pub fn image_rms(atoms: &AtomicMeasure, l: &LinearOperator) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in atoms.support().points() {
        for v in l.apply(a) {
            sum += v * v;
            count += 1;
        }
    }
    (sum / count.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::sparse_atoms;
    use crate::linalg::sample_e;
    use crate::points::PointSet;

    #[test]
    fn decodes_exact_images() {
        let m = AtomicMeasure::uniform(
            PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let l = LinearOperator::new(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(nearest_point_decode(&m, &l, &[2.0]).unwrap(), 2);
        // atoms 1 and 2 share the image 1
        let flat = LinearOperator::new(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(nearest_point_decode(&m, &flat, &[1.0]).unwrap(), 1);
    }

    #[test]
    fn grid_and_scan_agree() {
        let m = sparse_atoms(6, 2, 500, 1).unwrap();
        let l = sample_e(6, 3, 2).unwrap();
        let r = recovery_fraction(&m, &l, 0.0, 0).unwrap();
        assert!((r.weighted - 1.0).abs() < 1e-12);
        assert_eq!(r.fraction, 1.0);
        // a map that identifies coordinates: the tie rule decides
        let flat = LinearOperator::new(vec![vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
        let g = recovery_fraction(&m, &flat, 0.0, 0).unwrap();
        let images: Vec<Vec<f64>> = m.support().points().iter().map(|a| flat.apply(a)).collect();
        let scan = (0..m.len()).filter(|&i| decode_images(&images, &images[i]) == i).count();
        assert_eq!(g.fraction, scan as f64 / m.len() as f64);
        let noisy = recovery_fraction(&m, &l, 0.05, 3).unwrap();
        let images: Vec<Vec<f64>> = m.support().points().iter().map(|a| l.apply(a)).collect();
        let mut rng = rng_from_seed(3);
        let hits = images
            .iter()
            .enumerate()
            .filter(|(i, im)| {
                let q: Vec<f64> = im.iter().map(|v| v + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect();
                decode_images(&images, &q) == *i
            })
            .count();
        assert_eq!(noisy.fraction, hits as f64 / m.len() as f64);
    }
}
