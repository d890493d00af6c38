//! Covering numbers and log-log scaling fits: box-counting dimension,
//! localized (Assouad-type) covering probes and local dimension of atomic
//! measures.
//!
//! Covering numbers are greedy nets, not optimal covers. With centers taken in
//! input order, the greedy count `G(δ)` satisfies `N(δ) ≤ G(δ) ≤ N(δ/2)`, which
//! shifts a log-log fit by at most one scale step and leaves slopes unbiased.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::linalg::dist;
use crate::points::{AtomicMeasure, PointSet};
use crate::random::rng_from_seed;

/// Which abscissa a [`ScalingFit`] regresses against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    /// `−log₂ δ`, for counts that grow as the scale shrinks.
    NegLog2Scale,
    /// `log₂ r`, for masses that shrink with the radius.
    Log2Scale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub delta: f64,
    pub log2_delta: f64,
    pub count: f64,
    pub log2_count: f64,
}

/// Ordinary least-squares fit of `log₂ statistic` against a log₂ scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub abscissa: Abscissa,
    pub table: Vec<ScaleRow>,
}

impl ScalingFit {
    /// Fits `stats` against `scales`. Scales must be strictly decreasing and
    /// statistics positive; at least three rows.
    pub fn from_table(scales: &[f64], stats: &[f64], abscissa: Abscissa) -> Result<Self> {
        if scales.len() != stats.len() {
            return invalid("scale and statistic tables differ in length");
        }
        if scales.len() < 3 {
            return Err(Error::DegenerateWindow(format!(
                "{} scales; need at least 3",
                scales.len()
            )));
        }
        if scales.windows(2).any(|w| !(w[1] < w[0])) {
            return invalid("scales must be strictly decreasing");
        }
        if scales.iter().any(|s| !(*s > 0.0)) {
            return invalid("scales must be positive");
        }
        if let Some(bad) = stats.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::EmptyWindow(format!(
                "statistic is zero at scale {}",
                scales[bad]
            )));
        }
        let table: Vec<ScaleRow> = scales
            .iter()
            .zip(stats)
            .map(|(&d, &c)| ScaleRow {
                delta: d,
                log2_delta: d.log2(),
                count: c,
                log2_count: c.log2(),
            })
            .collect();
        let xs: Vec<f64> = table
            .iter()
            .map(|r| match abscissa {
                Abscissa::NegLog2Scale => -r.log2_delta,
                Abscissa::Log2Scale => r.log2_delta,
            })
            .collect();
        let ys: Vec<f64> = table.iter().map(|r| r.log2_count).collect();
        let (slope, intercept, r_squared) = least_squares(&xs, &ys);
        Ok(Self {
            slope,
            intercept,
            r_squared,
            abscissa,
            table,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }

    /// Two-column plotting table.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,count\n");
        for r in &self.table {
            s.push_str(&format!("{:?},{:?}\n", r.delta, r.count));
        }
        s
    }
}

/// Returns `(slope, intercept, r²)`; r² is 1 when the response is constant.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-24 * (1.0 + my * my) {
        1.0
    } else {
        (slope * sxy / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// `n` geometrically spaced scales from `hi` down to `lo`, both included.
pub fn geometric_scales(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let ratio = (lo / hi).powf(1.0 / (n as f64 - 1.0));
    (0..n)
        .map(|i| if i == n - 1 { lo } else { hi * ratio.powi(i as i32) })
        .collect()
}

/// Dyadic scales `2^{-j}` for `j = j_hi..=j_lo`.
pub fn dyadic_scales(j_hi: i32, j_lo: i32) -> Vec<f64> {
    (j_hi..=j_lo).map(|j| (2f64).powi(-j)).collect()
}

/// Size of the greedy δ-net: walk points in input order, open a ball at each
/// point not yet covered and mark everything within closed distance δ.
pub fn covering_number(ps: &PointSet, delta: f64) -> Result<usize> {
    if ps.is_empty() {
        return invalid("covering number of an empty set");
    }
    if !(delta > 0.0) {
        return invalid(format!("scale must be positive, got {delta}"));
    }
    Ok(greedy_cover(ps.points(), delta).len())
}

/// Centers (as indices) of the greedy δ-net.
pub fn greedy_cover(points: &[Vec<f64>], delta: f64) -> Vec<usize> {
    let mut covered = vec![false; points.len()];
    let mut centers = Vec::new();
    match Grid::new(points, delta) {
        Some(grid) => {
            for i in 0..points.len() {
                if covered[i] {
                    continue;
                }
                centers.push(i);
                grid.within(&points[i], delta, |j| covered[j] = true);
            }
        }
        None => {
            for i in 0..points.len() {
                if covered[i] {
                    continue;
                }
                centers.push(i);
                for (j, q) in points.iter().enumerate() {
                    if !covered[j] && dist(&points[i], q) <= delta {
                        covered[j] = true;
                    }
                }
            }
        }
    }
    centers
}

/// Box-counting fit over `n_scales` geometric scales from `delta_max` to
/// `delta_min`: slope of `log₂ count` against `−log₂ δ`.
///
/// The window may not reach below a quarter of the minimum pairwise distance,
/// and must not lie entirely below it.
pub fn box_dimension_fit(
    ps: &PointSet,
    delta_max: f64,
    delta_min: f64,
    n_scales: usize,
) -> Result<ScalingFit> {
    if ps.is_empty() {
        return invalid("box dimension of an empty set");
    }
    if !(delta_min > 0.0 && delta_min < delta_max) {
        return invalid("need 0 < delta_min < delta_max");
    }
    if n_scales < 3 {
        return invalid("need at least 3 scales");
    }
    if let Some(floor) = ps.resolution_floor() {
        if delta_max <= floor {
            return Err(Error::DegenerateWindow(format!(
                "window [{delta_min}, {delta_max}] lies below the resolution floor {floor}"
            )));
        }
        if delta_min < floor / 4.0 {
            return Err(Error::DegenerateWindow(format!(
                "delta_min {delta_min} is below a quarter of the resolution floor {floor}"
            )));
        }
    }
    let scales = geometric_scales(delta_max, delta_min, n_scales);
    let counts: Vec<f64> = scales
        .par_iter()
        .map(|&d| greedy_cover(ps.points(), d).len() as f64)
        .collect();
    ScalingFit::from_table(&scales, &counts, Abscissa::NegLog2Scale)
}

/// Localized covering count at one `(r, ρ)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssouadProbe {
    pub r: f64,
    pub rho: f64,
    pub max_count: usize,
    pub argmax_center: usize,
    /// `log(max_count) / log(r/ρ)`.
    pub exponent: f64,
}

/// Centers are `n_centers` indices evenly strided through the set.
fn probe_centers(len: usize, n_centers: usize) -> Vec<usize> {
    let n = n_centers.clamp(1, len);
    (0..n).map(|i| i * len / n).collect()
}

/// Maximum over sampled centers of the greedy ρ-cover size of `ps ∩ B(x, r)`.
pub fn assouad_probe(ps: &PointSet, n_centers: usize, r: f64, rho: f64) -> Result<AssouadProbe> {
    if ps.is_empty() {
        return invalid("probe of an empty set");
    }
    if !(rho > 0.0 && rho < r) {
        return invalid(format!("need 0 < rho < r, got rho = {rho}, r = {r}"));
    }
    if n_centers > ps.len() {
        return invalid("more centers than points");
    }
    let centers = probe_centers(ps.len(), n_centers);
    let grid = Grid::new(ps.points(), r);
    let counts: Vec<(usize, usize)> = centers
        .par_iter()
        .map(|&c| {
            let x = ps.point(c);
            let mut local: Vec<usize> = Vec::new();
            match &grid {
                Some(g) => g.within(x, r, |j| local.push(j)),
                None => local.extend((0..ps.len()).filter(|&j| dist(ps.point(j), x) <= r)),
            }
            local.sort_unstable();
            let pts: Vec<Vec<f64>> = local.iter().map(|&j| ps.point(j).to_vec()).collect();
            (greedy_cover(&pts, rho).len(), c)
        })
        .collect();
    let (max_count, argmax_center) = counts
        .iter()
        .copied()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .unwrap();
    Ok(AssouadProbe {
        r,
        rho,
        max_count,
        argmax_center,
        exponent: (max_count as f64).ln() / (r / rho).ln(),
    })
}

/// Probes every `(r, ρ)` pair and fits `log₂ max_count` against `log₂(r/ρ)`.
/// Pairs are ordered by decreasing `ρ/r`; the table's scale column is `ρ/r`.
pub fn assouad_probe_grid(
    ps: &PointSet,
    n_centers: usize,
    pairs: &[(f64, f64)],
) -> Result<(Vec<AssouadProbe>, ScalingFit)> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| (b.1 / b.0).total_cmp(&(a.1 / a.0)));
    let probes: Vec<AssouadProbe> = sorted
        .iter()
        .map(|&(r, rho)| assouad_probe(ps, n_centers, r, rho))
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = probes.iter().map(|p| p.rho / p.r).collect();
    let counts: Vec<f64> = probes.iter().map(|p| p.max_count as f64).collect();
    let fit = ScalingFit::from_table(&scales, &counts, Abscissa::NegLog2Scale)?;
    Ok((probes, fit))
}

/// Slope of `log₂ μ(B(x, r))` against `log₂ r` over `radii` (decreasing).
pub fn local_dimension(m: &AtomicMeasure, x: &[f64], radii: &[f64]) -> Result<ScalingFit> {
    if x.len() != m.dim() {
        return invalid("base point dimension differs from the measure");
    }
    let Some(&r_max) = radii.first() else {
        return invalid("no radii");
    };
    if m.ball_mass(x, r_max) <= 0.0 {
        return Err(Error::EmptyWindow(format!(
            "zero mass in the largest ball (r = {r_max})"
        )));
    }
    if let Some(floor) = m.support().resolution_floor() {
        let r_min = *radii.last().unwrap();
        if r_min < floor {
            return Err(Error::DegenerateWindow(format!(
                "radius {r_min} is below the atom separation {floor}; the fit would saturate"
            )));
        }
    }
    let masses: Vec<f64> = radii.iter().map(|&r| m.ball_mass(x, r)).collect();
    ScalingFit::from_table(radii, &masses, Abscissa::Log2Scale)
}

/// Local dimension averaged over atoms drawn from the measure itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalLocalDimension {
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub slopes: Vec<f64>,
}

pub fn typical_local_dimension(
    m: &AtomicMeasure,
    radii: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<TypicalLocalDimension> {
    if n_samples == 0 {
        return invalid("need at least one sample");
    }
    // the floor is checked once here; per-atom fits skip the O(n log n) sweep
    if let Some(floor) = m.support().resolution_floor() {
        let r_min = *radii.last().ok_or_else(|| Error::InvalidArgument("no radii".into()))?;
        if r_min < floor {
            return Err(Error::DegenerateWindow(format!(
                "radius {r_min} is below the atom separation {floor}"
            )));
        }
    }
    let mut rng = rng_from_seed(seed);
    let idx: Vec<usize> = (0..n_samples).map(|_| m.sample_index(&mut rng)).collect();
    let slopes: Vec<f64> = idx
        .par_iter()
        .map(|&i| {
            let x = m.support().point(i);
            let masses: Vec<f64> = radii.iter().map(|&r| m.ball_mass(x, r)).collect();
            ScalingFit::from_table(radii, &masses, Abscissa::Log2Scale).map(|f| f.slope)
        })
        .collect::<Result<_>>()?;
    let n = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / n;
    let var = slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(TypicalLocalDimension {
        mean,
        median,
        std_dev: var.sqrt(),
        slopes,
    })
}
