//! Measures on the `s`-sparse vectors and countable dense subsets of the ball.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::linalg::sample_unit_ball;
use crate::points::{AtomicMeasure, PointSet};
use crate::random::rng_from_seed;

/// Uniform atoms on vectors with at most `s` nonzero coordinates: a uniform
/// `s`-subset of coordinates filled with uniform `[−1, 1]` values.
pub fn sparse_atoms(n: usize, s: usize, n_atoms: usize, seed: u64) -> Result<AtomicMeasure> {
    if s >= n {
        return invalid(format!("sparsity s = {s} must be below N = {n}"));
    }
    if n_atoms == 0 {
        return invalid("need at least one atom");
    }
    let mut rng = rng_from_seed(seed);
    let pts: Vec<Vec<f64>> = (0..n_atoms)
        .map(|_| {
            let mut x = vec![0.0; n];
            for c in sample(&mut rng, n, s).into_iter() {
                x[c] = rng.random_range(-1.0..=1.0);
            }
            x
        })
        .collect();
    AtomicMeasure::uniform(PointSet::new(n, pts)?)
}

/// Uniform random atoms in the closed unit ball with weights proportional to
/// `decay^j`.
pub fn dense_ball_atoms(n: usize, n_atoms: usize, decay: f64, seed: u64) -> Result<AtomicMeasure> {
    if n_atoms == 0 {
        return invalid("need at least one atom");
    }
    if !(decay > 0.0 && decay < 1.0) {
        return invalid(format!("decay {decay} outside (0, 1)"));
    }
    let last = decay.powf((n_atoms - 1) as f64);
    if !(last > f64::MIN_POSITIVE * 1e20) {
        return invalid(format!(
            "decay^{} = {last:e} underflows; use a decay closer to 1",
            n_atoms - 1
        ));
    }
    let mut rng = rng_from_seed(seed);
    let pts: Vec<Vec<f64>> = (0..n_atoms).map(|_| sample_unit_ball(n, &mut rng)).collect();
    let weights: Vec<f64> = (0..n_atoms).map(|j| decay.powf(j as f64)).collect();
    AtomicMeasure::normalized(PointSet::new(n, pts)?, weights)
}

/// Largest distance from a point of the closed unit ball to the atoms,
/// maximized over a cubic grid of spacing `step` restricted to the ball.
pub fn ball_covering_radius(ps: &PointSet, step: f64) -> Result<f64> {
    if ps.is_empty() || !(step > 0.0) {
        return invalid("need atoms and a positive step");
    }
    let n = ps.dim();
    let mut cell = step.max(2.0 / (ps.len() as f64).powf(1.0 / n as f64));
    let grid = loop {
        if let Some(g) = Grid::new(ps.points(), cell) {
            break g;
        }
        // only fails above the bucketing dimension
        if n > crate::grid::MAX_GRID_DIM {
            return invalid("covering radius is limited to dimension ≤ 4");
        }
        cell *= 2.0;
    };
    let m = (1.0 / step).ceil() as i64;
    let mut worst = 0.0f64;
    let mut idx = vec![-m; n];
    loop {
        let q: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        if q.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            let (_, d) = grid.nearest(&q).unwrap();
            worst = worst.max(d);
        }
        let mut d = 0;
        loop {
            if d == n {
                return Ok(worst);
            }
            idx[d] += 1;
            if idx[d] > m {
                idx[d] = -m;
                d += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn zero_sparsity_is_the_origin() {
        let m = sparse_atoms(5, 0, 10, 0).unwrap();
        assert!(m.support().points().iter().all(|p| p.iter().all(|v| *v == 0.0)));
        assert!(sparse_atoms(3, 3, 10, 0).is_err());
    }

    #[test]
    fn support_patterns_are_uniform() {
        let n_atoms = 10_000;
        let m = sparse_atoms(6, 2, n_atoms, 7).unwrap();
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for p in m.support().points() {
            let nz: Vec<usize> = (0..6).filter(|&c| p[c] != 0.0).collect();
            assert!(nz.len() <= 2);
            *counts.entry(nz).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        let e = n_atoms as f64 / 15.0;
        let sd = (n_atoms as f64 * (1.0 / 15.0) * (14.0 / 15.0)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - e).abs() < 3.0 * sd, "{c}");
        }
    }

    #[test]
    fn dense_ball_weights() {
        let one = dense_ball_atoms(3, 1, 0.9, 0).unwrap();
        assert_eq!(one.weights(), &[1.0]);
        let m = dense_ball_atoms(3, 50, 0.9, 0).unwrap();
        for w in m.weights().windows(2) {
            assert!(w[1] > 0.0);
            assert!((w[1] / w[0] - 0.9).abs() < 1e-12);
        }
        assert!(m.support().points().iter().all(|p| crate::linalg::norm(p) <= 1.0));
        assert!(dense_ball_atoms(2, 10_000, 0.9, 0).is_err());
    }

    #[test]
    fn dense_ball_covering_radius() {
        let m = dense_ball_atoms(2, 10_000, 0.999, 3).unwrap();
        let r = ball_covering_radius(m.support(), 0.005).unwrap();
        assert!(r <= 0.06, "covering radius {r}");
    }
}
