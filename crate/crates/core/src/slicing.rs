//! Slab approximations of the conditional measures of an atomic measure
//! along the fibers of an orthogonal projection, and how close they are to
//! Dirac masses.
//!
//! Atoms on the slab boundary belong to the slab (closed balls).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{ifs_atoms, IfsSpec};
use crate::dimension::local_dimension;
use crate::error::{invalid, Result};
use crate::linalg::{dist, dot, norm, Plane};
use crate::points::{AtomicMeasure, PointSet};
use crate::random::{derive_seed, rng_from_seed};

/// Tolerance for `⟨V, t⟩ = 0` in the translate-pair test.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SlabSlice {
    /// Center in plane coordinates.
    pub center: Vec<f64>,
    pub half_width: f64,
    /// Mass of the slab before renormalization.
    pub raw_mass: f64,
    /// Indices of the retained atoms in the parent measure.
    pub indices: Vec<usize>,
    /// The renormalized restriction; `None` for an empty slab.
    pub measure: Option<AtomicMeasure>,
}

impl SlabSlice {
    pub fn is_empty(&self) -> bool {
        self.measure.is_none()
    }
}

/// Projections of every atom, in plane coordinates.
pub fn project_atoms(m: &AtomicMeasure, plane: &Plane) -> Result<Vec<Vec<f64>>> {
    if plane.ambient_dim() != m.dim() {
        return invalid("plane and measure live in different dimensions");
    }
    m.support().points().iter().map(|p| plane.project(p)).collect()
}

pub fn slab_conditional(m: &AtomicMeasure, plane: &Plane, a: &[f64], delta: f64) -> Result<SlabSlice> {
    if a.len() != plane.dim() {
        return invalid("slab center has the wrong dimension");
    }
    let proj = project_atoms(m, plane)?;
    slab_from_projections(m, &proj, a, delta)
}

/// As [`slab_conditional`] with precomputed projections.
pub fn slab_from_projections(m: &AtomicMeasure, proj: &[Vec<f64>], a: &[f64], delta: f64) -> Result<SlabSlice> {
    if !(delta > 0.0) {
        return invalid("slab half-width must be positive");
    }
    let indices: Vec<usize> = (0..proj.len()).filter(|&i| dist(&proj[i], a) <= delta).collect();
    let weights: Vec<f64> = indices.iter().map(|&i| m.weights()[i]).collect();
    let raw_mass = crate::points::compensated_sum(&weights);
    let measure = if raw_mass > 0.0 {
        let support = m.support().subset(&indices);
        Some(AtomicMeasure::normalized(support, weights)?)
    } else {
        None
    };
    Ok(SlabSlice {
        center: a.to_vec(),
        half_width: delta,
        raw_mass,
        indices,
        measure,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracScore {
    /// Smallest radius of a ball centered at an atom holding `≥ 1 − τ` of the
    /// slice mass.
    pub rho_star: f64,
    /// Index (into the slice) of the best center.
    pub center: usize,
}

pub fn dirac_score(s: &SlabSlice, tau: f64) -> Result<DiracScore> {
    let Some(m) = &s.measure else {
        return invalid("empty slice");
    };
    dirac_score_measure(m, tau)
}

pub fn dirac_score_measure(m: &AtomicMeasure, tau: f64) -> Result<DiracScore> {
    if !(tau > 0.0 && tau < 1.0) {
        return invalid("mass level τ must lie in (0, 1)");
    }
    let pts = m.support().points();
    let w = m.weights();
    let need = 1.0 - tau;
    // slack for the running sum of renormalized weights
    let slack = 1e-12;
    let mut best = DiracScore {
        rho_star: f64::INFINITY,
        center: 0,
    };
    for c in 0..pts.len() {
        let mut by_dist: Vec<(f64, f64)> = (0..pts.len()).map(|j| (dist(&pts[c], &pts[j]), w[j])).collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for (d, wj) in by_dist {
            if d >= best.rho_star {
                break;
            }
            acc += wj;
            if acc >= need - slack {
                best = DiracScore { rho_star: d, center: c };
                break;
            }
        }
    }
    Ok(best)
}

/// Images closer than this (relative to `max(1, |a|)`) count as the same
/// image: projections that agree in exact arithmetic can differ by rounding.
pub const IMAGE_TIE_TOL: f64 = 1e-14;

/// Distance from `proj[i]` to the nearest distinct image.
pub fn image_spacing(proj: &[Vec<f64>], i: usize) -> Option<f64> {
    let tie = IMAGE_TIE_TOL * norm(&proj[i]).max(1.0);
    proj.iter()
        .map(|q| dist(q, &proj[i]))
        .filter(|d| *d > tie)
        .min_by(f64::total_cmp)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub atom: usize,
    pub a: Vec<f64>,
    pub delta: f64,
    pub raw_mass: f64,
    pub n_atoms: usize,
    pub rho_star: f64,
}

/// Slab half-width rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlabWidth {
    Fixed(f64),
    /// A multiple of the image spacing at the slab's center atom.
    Spacing(f64),
}

impl SlabWidth {
    fn resolve(self, proj: &[Vec<f64>], i: usize, fallback: f64) -> f64 {
        match self {
            SlabWidth::Fixed(d) => d,
            SlabWidth::Spacing(f) => f * image_spacing(proj, i).unwrap_or(fallback),
        }
    }
}

/// Slices at `a = P_V(x)` for atoms `x` sampled from `m`.
pub fn sample_slices(
    m: &AtomicMeasure,
    plane: &Plane,
    n_slices: usize,
    width: SlabWidth,
    tau: f64,
    seed: u64,
) -> Result<Vec<SliceRecord>> {
    let proj = project_atoms(m, plane)?;
    let mut rng = rng_from_seed(seed);
    let atoms: Vec<usize> = (0..n_slices).map(|_| m.sample_index(&mut rng)).collect();
    atoms
        .par_iter()
        .map(|&i| {
            let d = width.resolve(&proj, i, 1.0);
            let s = slab_from_projections(m, &proj, &proj[i], d)?;
            let score = dirac_score(&s, tau)?;
            Ok(SliceRecord {
                atom: i,
                a: proj[i].clone(),
                delta: d,
                raw_mass: s.raw_mass,
                n_atoms: s.indices.len(),
                rho_star: score.rho_star,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub angle: f64,
    pub n_slices: usize,
    /// Fraction of slices with `ρ* ≤ resolution`.
    pub dirac_fraction: f64,
    pub median_rho: f64,
    pub max_rho: f64,
}

/// Sweeps lines `V` in R² at `n_angles` evenly spread angles in `[0, π)`.
pub fn direction_sweep(
    m: &AtomicMeasure,
    n_angles: usize,
    n_slices: usize,
    spacing_factor: f64,
    tau: f64,
    resolution: f64,
    seed: u64,
) -> Result<Vec<DirectionSummary>> {
    if m.dim() != 2 {
        return invalid("direction sweep is for measures in the plane");
    }
    (0..n_angles)
        .map(|j| {
            let angle = std::f64::consts::PI * j as f64 / n_angles as f64;
            let plane = Plane::line_at_angle(angle);
            let recs = sample_slices(m, &plane, n_slices, SlabWidth::Spacing(spacing_factor), tau, derive_seed(seed, j as u64))?;
            let mut rhos: Vec<f64> = recs.iter().map(|r| r.rho_star).collect();
            rhos.sort_by(f64::total_cmp);
            Ok(DirectionSummary {
                angle,
                n_slices,
                dirac_fraction: rhos.iter().filter(|r| **r <= resolution).count() as f64 / n_slices as f64,
                median_rho: rhos[rhos.len() / 2],
                max_rho: *rhos.last().unwrap(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslatePairReport {
    pub t: Vec<f64>,
    pub t_norm: f64,
    pub depth: usize,
    pub n_slices: usize,
    /// Slices where every second-component atom's partner is in the slice at
    /// offset `t` with the expected weight ratio, and vice versa.
    pub shift_matches: usize,
    /// Slices holding mass from both components.
    pub mixed: usize,
    /// Mixed slices with `ρ* ≥ ‖t‖(1 − tolerance)`.
    pub mixed_wide: usize,
    pub tolerance: f64,
    pub records: Vec<SliceRecord>,
}

/// Checks the translate-pair structure `ν₂ = S_t ν₁` slice by slice, for an
/// IFS whose last map equals the first plus `t` and a plane orthogonal to
/// `t`. Atoms are matched by their IFS words.
#[allow(clippy::too_many_arguments)]
pub fn translate_pair_test(
    spec: &IfsSpec,
    depth: usize,
    plane: &Plane,
    width: SlabWidth,
    n_slices: usize,
    tau: f64,
    tolerance: f64,
    seed: u64,
) -> Result<TranslatePairReport> {
    spec.validate()?;
    if spec.maps.len() != 2 || !spec.is_homogeneous() {
        return invalid("translate-pair test needs two maps with a common linear part");
    }
    if depth == 0 {
        return invalid("depth must be at least 1");
    }
    let t: Vec<f64> = spec.maps[1]
        .translation
        .iter()
        .zip(&spec.maps[0].translation)
        .map(|(a, b)| a - b)
        .collect();
    let t_norm = norm(&t);
    if t_norm == 0.0 {
        return invalid("the two maps coincide (t = 0)");
    }
    if plane.basis().iter().any(|b| dot(b, &t).abs() > ORTHOGONALITY_TOL * t_norm) {
        return invalid("plane is not orthogonal to t");
    }
    let nu = ifs_atoms(spec, depth)?;
    let labels = nu.support().labels().expect("IFS atoms are labelled");
    let ratio = spec.probs[1] / spec.probs[0];
    let proj = project_atoms(&nu, plane)?;
    let partner = partner_index(labels);
    let mut rng = rng_from_seed(seed);
    let picks: Vec<usize> = (0..n_slices).map(|_| nu.sample_index(&mut rng)).collect();
    let rows: Vec<(SliceRecord, bool, bool)> = picks
        .par_iter()
        .map(|&i| {
            let d = width.resolve(&proj, i, t_norm);
            let s = slab_from_projections(&nu, &proj, &proj[i], d)?;
            let score = dirac_score(&s, tau)?;
            let members: std::collections::HashSet<usize> = s.indices.iter().copied().collect();
            let mut matched = true;
            let mut comps = [false, false];
            for &a in &s.indices {
                let comp = usize::from(labels[a].starts_with('1'));
                comps[comp] = true;
                let b = partner[a];
                let ok = b.is_some_and(|b| {
                    let (lo, hi) = if comp == 0 { (a, b) } else { (b, a) };
                    let off: Vec<f64> = nu.support().point(hi).iter().zip(nu.support().point(lo)).map(|(x, y)| x - y).collect();
                    members.contains(&b)
                        && dist(&off, &t) <= 1e-9 * t_norm.max(1.0)
                        && (nu.weights()[hi] / nu.weights()[lo] / ratio - 1.0).abs() < 1e-9
                });
                matched &= ok;
            }
            let mixed = comps[0] && comps[1];
            let rec = SliceRecord {
                atom: i,
                a: proj[i].clone(),
                delta: d,
                raw_mass: s.raw_mass,
                n_atoms: s.indices.len(),
                rho_star: score.rho_star,
            };
            Ok((rec, matched, mixed))
        })
        .collect::<Result<_>>()?;
    let shift_matches = rows.iter().filter(|r| r.1).count();
    let mixed = rows.iter().filter(|r| r.2).count();
    let mixed_wide = rows
        .iter()
        .filter(|r| r.2 && r.0.rho_star >= t_norm * (1.0 - tolerance))
        .count();
    Ok(TranslatePairReport {
        t,
        t_norm,
        depth,
        n_slices,
        shift_matches,
        mixed,
        mixed_wide,
        tolerance,
        records: rows.into_iter().map(|r| r.0).collect(),
    })
}

/// Atom labelled `0w` ↔ atom labelled `1w`.
fn partner_index(labels: &[String]) -> Vec<Option<usize>> {
    let index: std::collections::HashMap<&str, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    labels
        .iter()
        .map(|l| {
            let flipped = match l.as_bytes().first() {
                Some(b'0') => format!("1{}", &l[1..]),
                Some(b'1') => format!("0{}", &l[1..]),
                _ => return None,
            };
            index.get(flipped.as_str()).copied()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceDimensionSummary {
    pub slopes: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Slices whose window was empty or below the atom resolution.
    pub skipped: usize,
}

/// Local dimension of slices at base points sampled from `m`, evaluated at
/// the sampled atom.
pub fn slice_local_dimension(
    m: &AtomicMeasure,
    plane: &Plane,
    n_slices: usize,
    delta: f64,
    radii: &[f64],
    seed: u64,
) -> Result<SliceDimensionSummary> {
    let proj = project_atoms(m, plane)?;
    let mut rng = rng_from_seed(seed);
    let picks: Vec<usize> = (0..n_slices).map(|_| m.sample_index(&mut rng)).collect();
    let fits: Vec<Option<f64>> = picks
        .par_iter()
        .map(|&i| {
            let s = slab_from_projections(m, &proj, &proj[i], delta)?;
            let sm = s.measure.as_ref().expect("slab holds the sampled atom");
            if sm.len() == 1 {
                return Ok(Some(0.0));
            }
            Ok(local_dimension(sm, m.support().point(i), radii).ok().map(|f| f.slope))
        })
        .collect::<Result<_>>()?;
    let skipped = fits.iter().filter(|f| f.is_none()).count();
    let slopes: Vec<f64> = fits.into_iter().flatten().collect();
    if slopes.is_empty() {
        return invalid("no slice produced a local-dimension fit");
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    Ok(SliceDimensionSummary {
        slopes,
        mean,
        median,
        skipped,
    })
}

/// Uniformly random unit direction in the plane, as a line.
pub fn random_line(rng: &mut impl Rng) -> Plane {
    Plane::line_at_angle(rng.random_range(0.0..std::f64::consts::PI))
}

/// Product of two measures on the line: atoms `(x, y)` with weight `μ(x)ν(y)`.
pub fn product_measure(a: &AtomicMeasure, b: &AtomicMeasure) -> Result<AtomicMeasure> {
    if a.dim() != 1 || b.dim() != 1 {
        return invalid("product of measures on the line");
    }
    let mut pts = Vec::with_capacity(a.len() * b.len());
    let mut w = Vec::with_capacity(a.len() * b.len());
    for (x, wx) in a.support().points().iter().zip(a.weights()) {
        for (y, wy) in b.support().points().iter().zip(b.weights()) {
            pts.push(vec![x[0], y[0]]);
            w.push(wx * wy);
        }
    }
    AtomicMeasure::normalized(PointSet::new(2, pts)?, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::parabola_lift_measure;

    fn two_atoms(d: f64) -> AtomicMeasure {
        AtomicMeasure::uniform(PointSet::new(2, vec![vec![0.0, 0.0], vec![d, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn dirac_slices() {
        let m = AtomicMeasure::dirac(vec![0.3, 0.4]).unwrap();
        let v = Plane::line_at_angle(0.7);
        let a = v.project(&[0.3, 0.4]).unwrap();
        let s = slab_conditional(&m, &v, &a, 1e-3).unwrap();
        assert_eq!(s.measure.as_ref().unwrap(), &m);
        assert_eq!(dirac_score(&s, 0.5).unwrap().rho_star, 0.0);
        let two = two_atoms(1.0);
        let x_axis = Plane::line_at_angle(0.0);
        let s = slab_conditional(&two, &x_axis, &[0.0], 0.1).unwrap();
        assert_eq!(s.indices, vec![0]);
        assert_eq!(s.raw_mass, 0.5);
        let empty = slab_conditional(&two, &x_axis, &[0.5], 0.1).unwrap();
        assert!(empty.is_empty());
        assert!(dirac_score(&empty, 0.5).is_err());
    }

    #[test]
    fn two_atom_scores() {
        let m = two_atoms(1.0);
        let y_axis = Plane::line_at_angle(std::f64::consts::FRAC_PI_2);
        let s = slab_conditional(&m, &y_axis, &[0.0], 0.1).unwrap();
        assert_eq!(s.indices.len(), 2);
        assert_eq!(dirac_score(&s, 0.4).unwrap().rho_star, 1.0);
        assert_eq!(dirac_score(&s, 0.6).unwrap().rho_star, 0.0);
    }

    #[test]
    fn grid_slab_masses_match_fiber_sums() {
        let mut pts = Vec::new();
        let mut w = Vec::new();
        for i in 0..8 {
            for j in 0..5 {
                pts.push(vec![i as f64, j as f64]);
                w.push(((i + 1) * (j + 2)) as f64);
            }
        }
        let m = AtomicMeasure::normalized(PointSet::new(2, pts).unwrap(), w.clone()).unwrap();
        let x_axis = Plane::line_at_angle(0.0);
        let total: f64 = w.iter().sum();
        let mut sum = 0.0;
        for i in 0..8 {
            let s = slab_conditional(&m, &x_axis, &[i as f64], 0.25).unwrap();
            let fiber: f64 = (0..5).map(|j| ((i + 1) * (j + 2)) as f64).sum::<f64>() / total;
            assert!((s.raw_mass - fiber).abs() < 1e-14);
            sum += s.raw_mass;
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translate_pair_depth_one() {
        let spec = IfsSpec::translate_pair(0.5, 0.0, [1.0, 0.0], 0.5).unwrap();
        let v = Plane::line_at_angle(std::f64::consts::FRAC_PI_2);
        let r = translate_pair_test(&spec, 1, &v, SlabWidth::Fixed(1e-6), 20, 0.3, 1e-9, 0).unwrap();
        assert_eq!(r.shift_matches, 20);
        assert_eq!(r.mixed, 20);
        assert_eq!(r.mixed_wide, 20);
        assert!(r.records.iter().all(|s| s.n_atoms == 2 && (s.rho_star - 1.0).abs() < 1e-12));
        let skew = Plane::line_at_angle(0.3);
        assert!(translate_pair_test(&spec, 1, &skew, SlabWidth::Spacing(2.0), 5, 0.3, 0.1, 0).is_err());
        let zero = IfsSpec::translate_pair(0.5, 0.0, [0.0, 0.0], 0.5).unwrap();
        assert!(translate_pair_test(&zero, 2, &v, SlabWidth::Spacing(2.0), 5, 0.3, 0.1, 0).is_err());
    }

    #[test]
    fn generic_direction_thins_mixed_slices() {
        let spec = IfsSpec::translate_pair(0.6, 0.4, [0.8, 0.3], 0.5).unwrap();
        let nu = ifs_atoms(&spec, 10).unwrap();
        let v = Plane::line_at_angle(1.1);
        let wide = sample_slices(&nu, &v, 200, SlabWidth::Fixed(1e-2), 0.3, 1).unwrap();
        let thin = sample_slices(&nu, &v, 200, SlabWidth::Fixed(1e-5), 0.3, 1).unwrap();
        let frac = |r: &[SliceRecord]| r.iter().filter(|s| s.rho_star > 0.0).count() as f64 / r.len() as f64;
        assert!(frac(&thin) < frac(&wide), "{} vs {}", frac(&thin), frac(&wide));
        assert!(frac(&thin) < 0.2);
    }

    #[test]
    fn shift_equivariance() {
        let m = parabola_lift_measure(0.25, 6).unwrap().measure;
        let t = [0.0, 0.7];
        let shifted = AtomicMeasure::new(
            PointSet::new(2, m.support().points().iter().map(|p| vec![p[0] + t[0], p[1] + t[1]]).collect()).unwrap(),
            m.weights().to_vec(),
        )
        .unwrap();
        let v = Plane::line_at_angle(0.0);
        for a in [0.1, 0.27, 0.5] {
            let s = slab_conditional(&m, &v, &[a], 0.02).unwrap();
            let u = slab_conditional(&shifted, &v, &[a], 0.02).unwrap();
            assert_eq!(s.indices, u.indices);
            assert_eq!(s.raw_mass, u.raw_mass);
        }
    }

    #[test]
    fn product_cantor_slice_dimension() {
        let c = ifs_atoms(&IfsSpec::cantor(), 9).unwrap();
        let prod = product_measure(&c, &c).unwrap();
        let v = Plane::line_at_angle(0.0);
        let radii: Vec<f64> = (1..=6).map(|j| 3f64.powi(-j)).collect();
        let d = slice_local_dimension(&prod, &v, 50, 1e-6, &radii, 3).unwrap();
        let target = 2f64.ln() / 3f64.ln();
        assert!((d.mean - target).abs() < 0.1, "{}", d.mean);
        let dirac = AtomicMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let z = slice_local_dimension(&dirac, &v, 5, 0.1, &radii, 0).unwrap();
        assert!(z.slopes.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn score_monotone_in_tau() {
        let m = parabola_lift_measure(0.3, 5).unwrap().measure;
        let mut last = f64::INFINITY;
        for tau in [0.05, 0.2, 0.4, 0.6, 0.9] {
            let r = dirac_score_measure(&m, tau).unwrap().rho_star;
            assert!(r <= last);
            last = r;
        }
    }
}
