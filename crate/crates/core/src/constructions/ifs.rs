//! Similarity iterated function systems `φ_i(x) = r_i O_i x + t_i` and their
//! stationary measures, by exhaustive composition or by the chaos game.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, solve};
use crate::points::{compensated_sum, AtomicMeasure, PointSet};
use crate::random::rng_from_seed;

pub const MAX_IFS_ATOMS: usize = 1 << 22;
pub const MIN_BURN_IN: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub scale: f64,
    /// Rows of the orthogonal part.
    pub orthogonal: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl SimilarityMap {
    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.orthogonal
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| self.scale * dot(row, x) + t)
            .collect()
    }

    /// The unique fixed point, solving `(I − rO) x = t`.
    pub fn fixed_point(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| f64::from(u8::from(i == j)) - self.scale * self.orthogonal[i][j])
                    .collect()
            })
            .collect();
        solve(&a, &self.translation)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return invalid("map has dimension zero");
        }
        if !(self.scale > 0.0 && self.scale < 1.0) {
            return invalid(format!("scale {} outside (0, 1)", self.scale));
        }
        if self.orthogonal.len() != n || self.orthogonal.iter().any(|r| r.len() != n) {
            return invalid("orthogonal part has the wrong shape");
        }
        for i in 0..n {
            for j in 0..n {
                let g = dot(&self.orthogonal[i], &self.orthogonal[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).abs() > 1e-10 {
                    return invalid("linear part is not orthogonal within 1e-10");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    pub maps: Vec<SimilarityMap>,
    pub probs: Vec<f64>,
}

pub fn rotation(theta: f64) -> Vec<Vec<f64>> {
    vec![
        vec![theta.cos(), -theta.sin()],
        vec![theta.sin(), theta.cos()],
    ]
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect()
}

impl IfsSpec {
    pub fn new(maps: Vec<SimilarityMap>, probs: Vec<f64>) -> Result<Self> {
        let spec = Self { maps, probs };
        spec.validate()?;
        Ok(spec)
    }

    /// Middle-thirds Cantor system on the line with equal weights.
    pub fn cantor() -> Self {
        let map = |t: f64| SimilarityMap {
            scale: 1.0 / 3.0,
            orthogonal: identity(1),
            translation: vec![t],
        };
        Self {
            maps: vec![map(0.0), map(2.0 / 3.0)],
            probs: vec![0.5, 0.5],
        }
    }

    /// Two planar maps `rOx` and `rOx + t` sharing the linear part.
    pub fn translate_pair(scale: f64, angle: f64, t: [f64; 2], p: f64) -> Result<Self> {
        let map = |tr: Vec<f64>| SimilarityMap {
            scale,
            orthogonal: rotation(angle),
            translation: tr,
        };
        Self::new(vec![map(vec![0.0, 0.0]), map(t.to_vec())], vec![p, 1.0 - p])
    }

    pub fn dim(&self) -> usize {
        self.maps.first().map_or(0, SimilarityMap::dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return invalid("system has no maps");
        }
        if self.maps.len() != self.probs.len() {
            return invalid("one probability per map");
        }
        let n = self.dim();
        for m in &self.maps {
            if m.dim() != n {
                return invalid("maps act on different dimensions");
            }
            m.validate()?;
        }
        if self.probs.iter().any(|p| !(*p > 0.0)) {
            return invalid("probabilities must be positive");
        }
        if (compensated_sum(&self.probs) - 1.0).abs() > 1e-12 {
            return invalid("probabilities must sum to 1");
        }
        Ok(())
    }

    /// All maps share `r O`.
    pub fn is_homogeneous(&self) -> bool {
        let first = &self.maps[0];
        self.maps.iter().all(|m| {
            m.orthogonal
                .iter()
                .flatten()
                .zip(first.orthogonal.iter().flatten())
                .all(|(a, b)| (m.scale * a - first.scale * b).abs() < 1e-12)
        })
    }

    /// Applies `Σ p_i φ_i` to a labelled measure: atom `a` with label `w`
    /// becomes `φ_i(a)` with label `i·w` and weight `p_i μ(a)`.
    pub fn push_forward(&self, m: &AtomicMeasure) -> Result<AtomicMeasure> {
        let len = m.len() * self.maps.len();
        if len > MAX_IFS_ATOMS {
            return Err(Error::Size(format!("{len} atoms exceed {MAX_IFS_ATOMS}")));
        }
        let mut pts = Vec::with_capacity(len);
        let mut weights = Vec::with_capacity(len);
        let mut labels = Vec::with_capacity(len);
        let support = m.support();
        for (i, (map, p)) in self.maps.iter().zip(&self.probs).enumerate() {
            for (a, x) in support.points().iter().enumerate() {
                pts.push(map.apply(x));
                weights.push(p * m.weights()[a]);
                labels.push(format!("{i}{}", support.label(a).unwrap_or("")));
            }
        }
        AtomicMeasure::normalized(PointSet::new(self.dim(), pts)?.with_labels(labels)?, weights)
    }
}

/// Atoms `φ_{i₁}∘…∘φ_{i_d}(x₁)` for every word of length `depth`, where `x₁`
/// is the fixed point of the first map; weights are products of the `p_i`,
/// labels the words `i₁…i_d`.
pub fn ifs_atoms(spec: &IfsSpec, depth: usize) -> Result<AtomicMeasure> {
    spec.validate()?;
    let total = (spec.maps.len() as f64).powi(depth as i32);
    if total > MAX_IFS_ATOMS as f64 {
        return Err(Error::Size(format!(
            "{} maps at depth {depth} give {total} atoms (limit {MAX_IFS_ATOMS})",
            spec.maps.len()
        )));
    }
    let x0 = spec.maps[0].fixed_point()?;
    let mut m = AtomicMeasure::new(
        PointSet::new(spec.dim(), vec![x0])?.with_labels(vec![String::new()])?,
        vec![1.0],
    )?;
    for _ in 0..depth {
        m = spec.push_forward(&m)?;
    }
    Ok(m)
}

/// Chaos-game trajectory from the first map's fixed point, after `burn_in`
/// discarded steps.
pub fn ifs_chaos_sample(spec: &IfsSpec, n_points: usize, burn_in: usize, seed: u64) -> Result<PointSet> {
    spec.validate()?;
    if burn_in < MIN_BURN_IN {
        return invalid(format!("burn-in {burn_in} below {MIN_BURN_IN}"));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = spec.maps[0].fixed_point()?;
    let mut cumulative = Vec::with_capacity(spec.probs.len());
    let mut acc = 0.0;
    for p in &spec.probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut out = Vec::with_capacity(n_points);
    for step in 0..burn_in + n_points {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cumulative.iter().position(|&c| u < c).unwrap_or(spec.maps.len() - 1);
        x = spec.maps[i].apply(&x);
        if step >= burn_in {
            out.push(x.clone());
        }
    }
    PointSet::new(spec.dim(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn single_map_gives_its_fixed_point() {
        let spec = IfsSpec::new(
            vec![SimilarityMap {
                scale: 0.5,
                orthogonal: identity(2),
                translation: vec![1.0, 0.5],
            }],
            vec![1.0],
        )
        .unwrap();
        let m = ifs_atoms(&spec, 5).unwrap();
        assert_eq!(m.len(), 1);
        assert!(dist(m.support().point(0), &[2.0, 1.0]) < 1e-12);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn cantor_level_six() {
        let m = ifs_atoms(&IfsSpec::cantor(), 6).unwrap();
        assert_eq!(m.len(), 64);
        // oracle: Σ_{j≤6} 2ε_j 3^{−j}, ε ∈ {0,1}; the fixed point of x/3 is 0
        let mut want: Vec<f64> = (0..64u32)
            .map(|b| (1..=6).map(|j| 2.0 * f64::from((b >> (6 - j)) & 1) / 3f64.powi(j)).sum())
            .collect();
        want.sort_by(f64::total_cmp);
        let mut got: Vec<f64> = m.support().points().iter().map(|p| p[0]).collect();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(m.weights().iter().all(|w| *w == 1.0 / 64.0));
    }

    #[test]
    fn push_forward_matches_next_depth() {
        let spec = IfsSpec::translate_pair(0.6, 0.7, [1.0, 0.3], 0.4).unwrap();
        for d in 0..6 {
            let a = spec.push_forward(&ifs_atoms(&spec, d).unwrap()).unwrap();
            let b = ifs_atoms(&spec, d + 1).unwrap();
            assert_eq!(a.support().labels(), b.support().labels());
            for i in 0..a.len() {
                assert!(dist(a.support().point(i), b.support().point(i)) < 1e-12);
                assert!((a.weights()[i] - b.weights()[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn translate_pairs_are_shifted_by_t() {
        let t = [1.0, 0.3];
        let spec = IfsSpec::translate_pair(0.6, 0.7, t, 0.5).unwrap();
        assert!(spec.is_homogeneous());
        let m = ifs_atoms(&spec, 4).unwrap();
        let half = m.len() / 2;
        for i in 0..half {
            // labels 0w and 1w sit at φ₁(a) and φ₁(a) + t
            assert_eq!(&m.support().label(i).unwrap()[1..], &m.support().label(i + half).unwrap()[1..]);
            let (a, b) = (m.support().point(i), m.support().point(i + half));
            assert!((b[0] - a[0] - t[0]).abs() < 1e-12 && (b[1] - a[1] - t[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_and_limits() {
        assert!(IfsSpec::translate_pair(1.0, 0.0, [1.0, 0.0], 0.5).is_err());
        assert!(IfsSpec::translate_pair(0.5, 0.0, [1.0, 0.0], 1.0).is_err());
        let mut bad = IfsSpec::cantor();
        bad.maps[0].orthogonal = vec![vec![1.1]];
        assert!(bad.validate().is_err());
        assert!(matches!(ifs_atoms(&IfsSpec::cantor(), 23), Err(Error::Size(_))));
        assert!(ifs_chaos_sample(&IfsSpec::cantor(), 10, 10, 0).is_err());
    }

    #[test]
    fn chaos_game_stays_on_the_cantor_set() {
        let ps = ifs_chaos_sample(&IfsSpec::cantor(), 2000, 60, 1).unwrap();
        for p in ps.points() {
            // no point in the removed middle third (1/3, 2/3)
            assert!(p[0] <= 1.0 / 3.0 + 1e-12 || p[0] >= 2.0 / 3.0 - 1e-12);
            assert!((0.0..=1.0).contains(&p[0]));
        }
    }
}
