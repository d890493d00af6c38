//! Near-collisions of a map on a finite set: pairs far apart in the source
//! whose images nearly coincide, the inverse continuity modulus, and the
//! collision probability over random maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{Abscissa, ScalingFit};
use crate::error::{invalid, Result};
use crate::grid::{FastMap, Grid, MAX_GRID_DIM};
use crate::linalg::{dist, sample_e_with, sub, AffinePerturbation};
use crate::points::PointSet;
use crate::random::{derive_seed, rng_from_seed};

/// Largest set scanned pair by pair; bigger sets are bucketed by image.
pub const BRUTE_FORCE_LIMIT: usize = 20_000;

/// Below this many maps a collision-probability report carries a warning.
pub const MIN_MAPS_FOR_POWER: usize = 100;

/// Relative slack on `‖x − y‖ ≥ δ` in the collision probability, so points
/// constructed at radius exactly δ are not lost to rounding.
pub const SEPARATION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionPair {
    pub x: usize,
    pub y: usize,
    pub source_distance: f64,
    pub image_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub pairs: Vec<CollisionPair>,
    pub epsilon: f64,
    pub delta: f64,
    /// Whether `2ε ≤ δ`, the regime the scaling bounds speak about.
    pub in_regime: bool,
    pub map: String,
}

pub fn describe(phi: &AffinePerturbation) -> String {
    let (k, n) = (phi.base.out_dim(), phi.base.in_dim());
    if phi.lipschitz_part.is_empty() {
        format!("linear {k}x{n}")
    } else {
        format!("linear {k}x{n} + tabulated Lipschitz part (H = {})", phi.lip_bound)
    }
}

/// All pairs `x < y` with `‖x − y‖ ≥ δ` and `‖φx − φy‖ ≤ ε`.
pub fn collision_scan(ps: &PointSet, phi: &AffinePerturbation, epsilon: f64, delta: f64) -> Result<CollisionReport> {
    let images = check_scan(ps, phi, epsilon, delta)?;
    let pairs = if ps.len() <= BRUTE_FORCE_LIMIT {
        scan_brute(ps, &images, epsilon, delta)
    } else {
        scan_bucketed(ps, &images, epsilon, delta)
    };
    Ok(report(pairs, epsilon, delta, phi))
}

/// Forces the bucketed path (for cross-checks).
pub fn collision_scan_bucketed(ps: &PointSet, phi: &AffinePerturbation, epsilon: f64, delta: f64) -> Result<CollisionReport> {
    let images = check_scan(ps, phi, epsilon, delta)?;
    Ok(report(scan_bucketed(ps, &images, epsilon, delta), epsilon, delta, phi))
}

/// Forces the pairwise path (for cross-checks).
pub fn collision_scan_brute(ps: &PointSet, phi: &AffinePerturbation, epsilon: f64, delta: f64) -> Result<CollisionReport> {
    let images = check_scan(ps, phi, epsilon, delta)?;
    Ok(report(scan_brute(ps, &images, epsilon, delta), epsilon, delta, phi))
}

fn check_scan(ps: &PointSet, phi: &AffinePerturbation, epsilon: f64, delta: f64) -> Result<Vec<Vec<f64>>> {
    if !(epsilon >= 0.0) || !(delta > 0.0) {
        return invalid("need ε ≥ 0 and δ > 0");
    }
    phi.image(ps)
}

fn report(mut pairs: Vec<CollisionPair>, epsilon: f64, delta: f64, phi: &AffinePerturbation) -> CollisionReport {
    pairs.sort_by_key(|p| (p.x, p.y));
    CollisionReport {
        pairs,
        epsilon,
        delta,
        in_regime: 2.0 * epsilon <= delta,
        map: describe(phi),
    }
}

fn qualifying(ps: &PointSet, images: &[Vec<f64>], i: usize, j: usize, epsilon: f64, delta: f64) -> Option<CollisionPair> {
    let d_img = dist(&images[i], &images[j]);
    if d_img > epsilon {
        return None;
    }
    let d_src = dist(ps.point(i), ps.point(j));
    (d_src >= delta).then_some(CollisionPair {
        x: i,
        y: j,
        source_distance: d_src,
        image_distance: d_img,
    })
}

fn scan_brute(ps: &PointSet, images: &[Vec<f64>], epsilon: f64, delta: f64) -> Vec<CollisionPair> {
    (0..ps.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..ps.len()).filter_map(move |j| qualifying(ps, images, i, j, epsilon, delta))
        })
        .collect()
}

fn scan_bucketed(ps: &PointSet, images: &[Vec<f64>], epsilon: f64, delta: f64) -> Vec<CollisionPair> {
    if epsilon == 0.0 {
        // exact fibers: group by the bit pattern of the image
        let mut fibers: FastMap<Vec<u64>, Vec<usize>> = FastMap::default();
        for (i, im) in images.iter().enumerate() {
            let key = im.iter().map(|v| (v + 0.0).to_bits()).collect();
            fibers.entry(key).or_default().push(i);
        }
        let mut out = Vec::new();
        for members in fibers.values() {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    if let Some(p) = qualifying(ps, images, i.min(j), i.max(j), epsilon, delta) {
                        out.push(p);
                    }
                }
            }
        }
        return out;
    }
    let k = images.first().map_or(0, Vec::len);
    if k > MAX_GRID_DIM {
        return scan_brute(ps, images, epsilon, delta);
    }
    let grid = Grid::new(images, epsilon).expect("positive cell in low dimension");
    (0..ps.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut hits = Vec::new();
            grid.for_candidates(&images[i], epsilon, |j| {
                if j > i {
                    if let Some(p) = qualifying(ps, images, i, j, epsilon, delta) {
                        hits.push(p);
                    }
                }
            });
            hits
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub delta: f64,
    /// `min{‖φx − φy‖ : ‖x − y‖ ≥ δ}`; `None` when no pair is that far apart.
    pub epsilon: Option<f64>,
    pub witness: Option<(usize, usize)>,
}

/// `ε(δ)` for each δ of the grid, by a full pair scan.
pub fn inverse_continuity_modulus(ps: &PointSet, phi: &AffinePerturbation, deltas: &[f64]) -> Result<Vec<ModulusRow>> {
    if ps.len() < 2 {
        return invalid("need at least two points");
    }
    let images = phi.image(ps)?;
    modulus_from_images(ps, &images, deltas)
}

pub fn modulus_from_images(ps: &PointSet, images: &[Vec<f64>], deltas: &[f64]) -> Result<Vec<ModulusRow>> {
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return invalid("δ values must be positive");
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    // bucket b holds pairs whose source distance clears exactly b grid values
    type Best = Vec<Option<(f64, usize, usize)>>;
    // ties go to the lexicographically smallest (ε, x, y) so the witness does
    // not depend on scheduling
    let better = |new: (f64, usize, usize), old: Option<(f64, usize, usize)>| {
        old.is_none_or(|o| (new.0, new.1, new.2).partial_cmp(&(o.0, o.1, o.2)) == Some(std::cmp::Ordering::Less))
    };
    let merge = |mut a: Best, b: Best| {
        for (x, y) in a.iter_mut().zip(b) {
            if let Some(yv) = y {
                if better(yv, *x) {
                    *x = Some(yv);
                }
            }
        }
        a
    };
    let best: Best = (0..ps.len())
        .into_par_iter()
        .fold(
            || vec![None; m + 1],
            |mut acc: Best, i| {
                for j in i + 1..ps.len() {
                    let s = dist(ps.point(i), ps.point(j));
                    let b = sorted.partition_point(|&d| d <= s);
                    if b == 0 {
                        continue;
                    }
                    let d = dist(&images[i], &images[j]);
                    if better((d, i, j), acc[b]) {
                        acc[b] = Some((d, i, j));
                    }
                }
                acc
            },
        )
        .reduce(|| vec![None; m + 1], merge);
    // suffix minimum: ε(δ_m) ranges over buckets b > m
    let mut rows = Vec::with_capacity(m);
    let mut running: Option<(f64, usize, usize)> = None;
    let mut by_index = vec![None; m];
    for b in (1..=m).rev() {
        if let Some(v) = best[b] {
            if better(v, running) {
                running = Some(v);
            }
        }
        by_index[b - 1] = running;
    }
    for (delta, r) in sorted.iter().zip(by_index) {
        rows.push(ModulusRow {
            delta: *delta,
            epsilon: r.map(|v| v.0),
            witness: r.map(|v| (v.1, v.2)),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionProbability {
    pub base: usize,
    pub delta: f64,
    pub n_maps: usize,
    pub epsilons: Vec<f64>,
    pub fractions: Vec<f64>,
    /// Log-log fit of the nonzero fractions against ε, when at least three are
    /// nonzero.
    pub fit: Option<ScalingFit>,
    /// 95% Wilson intervals of the fractions.
    pub intervals: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub sampler: String,
    pub seed: u64,
}

/// Fraction of `L ∈ E(N, k)` for which some `y` with `‖x − y‖ ≥ δ` has
/// `‖Lx − Ly‖ ≤ ε`, for each ε of the grid.
pub fn collision_probability(
    ps: &PointSet,
    x: usize,
    k: usize,
    epsilons: &[f64],
    delta: f64,
    n_maps: usize,
    seed: u64,
) -> Result<CollisionProbability> {
    if x >= ps.len() {
        return invalid("base index out of range");
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e >= 0.0 && 2.0 * e <= delta)) {
        return invalid("every ε must satisfy 0 ≤ 2ε ≤ δ");
    }
    if n_maps == 0 {
        return invalid("need at least one map");
    }
    let base = ps.point(x);
    let diffs: Vec<Vec<f64>> = ps
        .points()
        .iter()
        .filter(|y| dist(y, base) >= delta * (1.0 - SEPARATION_SLACK))
        .map(|y| sub(base, y))
        .collect();
    let n = ps.dim();
    let minima: Vec<f64> = (0..n_maps)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng_from_seed(derive_seed(seed, m as u64));
            let l = sample_e_with(n, k, &mut rng).expect("valid dimensions");
            diffs
                .iter()
                .map(|d| crate::linalg::norm(&l.apply(d)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<_>>();
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let fractions: Vec<f64> = eps
        .iter()
        .map(|&e| minima.iter().filter(|&&m| m <= e).count() as f64 / n_maps as f64)
        .collect();
    let intervals = fractions
        .iter()
        .map(|f| super::wilson_interval((f * n_maps as f64).round() as usize, n_maps))
        .collect();
    let mut warnings = Vec::new();
    if n_maps < MIN_MAPS_FOR_POWER {
        warnings.push(format!("only {n_maps} maps; fractions have little statistical power"));
    }
    let nz: Vec<(f64, f64)> = eps
        .iter()
        .zip(&fractions)
        .filter(|(e, f)| **e > 0.0 && **f > 0.0)
        .map(|(e, f)| (*e, *f))
        .collect();
    let fit = if nz.len() >= 3 {
        let (s, f): (Vec<f64>, Vec<f64>) = nz.into_iter().unzip();
        ScalingFit::from_table(&s, &f, Abscissa::Log2Scale).ok()
    } else {
        warnings.push("fewer than three nonzero fractions; no fit".into());
        None
    };
    Ok(CollisionProbability {
        base: x,
        delta,
        n_maps,
        epsilons: eps,
        fractions,
        fit,
        intervals,
        warnings,
        sampler: format!("E({n},{k}) rows uniform in the unit ball"),
        seed,
    })
}
