//! Finite point sets and atomic probability measures, plus their flat-file
//! format.
//!
//! File format (one file per set):
//!
//! ```text
//! # dim=N weighted=0|1
//! x1,x2,...,xN[,weight]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_vector, dist, dot};
use crate::random::LabRng;

/// Finite labeled collection of points in R^N.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return invalid("ambient dimension must be positive");
        }
        for p in &points {
            if p.len() != dim {
                return invalid(format!("point of length {} in R^{dim}", p.len()));
            }
            check_vector(p)?;
        }
        Ok(Self {
            dim,
            points,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return invalid("label count differs from point count");
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }

    /// Points multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|v| v * c).collect())
                .collect(),
            labels: self.labels.clone(),
        }
    }

    /// Subset by indices, keeping labels.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            dim: self.dim,
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    /// Concatenation of two sets in the same ambient space.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return invalid("union of point sets in different dimensions");
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(Self {
            dim: self.dim,
            points,
            labels,
        })
    }

    /// Minimum pairwise distance (the resolution floor of the finite model).
    ///
    /// Points are swept in order of their projection on a fixed generic
    /// direction; `None` for fewer than two points.
    pub fn resolution_floor(&self) -> Option<f64> {
        min_pairwise_distance(&self.points)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }

    /// SHA-256 over the little-endian coordinate bytes.
    pub fn provenance_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for p in &self.points {
            for v in p {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_csv(&self) -> String {
        write_rows(self.dim, &self.points, None)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (dim, weighted, rows) = parse_rows(text)?;
        if weighted {
            return Err(Error::Parse(
                "weighted file read as an unweighted point set".into(),
            ));
        }
        Self::new(dim, rows.into_iter().map(|(p, _)| p).collect())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Weighted point collection with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    points: PointSet,
    weights: Vec<f64>,
}

/// Tolerance on the total mass of an [`AtomicMeasure`].
pub const MASS_TOL: f64 = 1e-12;

/// Neumaier-compensated sum, so large uniform measures still total 1 to
/// within a few ulps.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl AtomicMeasure {
    pub fn new(points: PointSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != points.len() {
            return invalid("weight count differs from point count");
        }
        if points.is_empty() {
            return invalid("measure needs at least one atom");
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return invalid("weights must be finite and nonnegative");
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > MASS_TOL {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { points, weights })
    }

    /// Normalizes nonnegative weights to total mass one.
    pub fn normalized(points: PointSet, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return invalid("total weight must be positive");
        }
        let w = weights.iter().map(|w| w / total).collect();
        Self::new(points, w)
    }

    pub fn uniform(points: PointSet) -> Result<Self> {
        let n = points.len();
        Self::normalized(points, vec![1.0; n])
    }

    pub fn dirac(x: Vec<f64>) -> Result<Self> {
        let dim = x.len();
        Self::new(PointSet::new(dim, vec![x])?, vec![1.0])
    }

    pub fn support(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Mass of the closed ball `B(x, r)`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        self.points
            .points()
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| dist(p, x) <= r)
            .map(|(_, w)| w)
            .sum()
    }

    /// Index of an atom drawn according to the weights.
    pub fn sample_index(&self, rng: &mut LabRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    pub fn to_csv(&self) -> String {
        write_rows(self.dim(), self.points.points(), Some(&self.weights))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (dim, weighted, rows) = parse_rows(text)?;
        if !weighted {
            return Err(Error::Parse("measure file must have weighted=1".into()));
        }
        let (pts, ws): (Vec<_>, Vec<_>) = rows.into_iter().map(|(p, w)| (p, w.unwrap())).unzip();
        Self::new(PointSet::new(dim, pts)?, ws)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn write_rows(dim: usize, points: &[Vec<f64>], weights: Option<&[f64]>) -> String {
    let mut s = format!(
        "# dim={dim} weighted={}\n",
        if weights.is_some() { 1 } else { 0 }
    );
    for (i, p) in points.iter().enumerate() {
        for (j, v) in p.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            // shortest round-trip representation
            write!(s, "{v:?}").unwrap();
        }
        if let Some(w) = weights {
            write!(s, ",{:?}", w[i]).unwrap();
        }
        s.push('\n');
    }
    s
}

type Rows = Vec<(Vec<f64>, Option<f64>)>;

fn parse_rows(text: &str) -> Result<(usize, bool, Rows)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?;
    let mut dim = None;
    let mut weighted = None;
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("dim=") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("dim: {e}")))?,
            );
        } else if let Some(v) = tok.strip_prefix("weighted=") {
            weighted = Some(match v {
                "0" => false,
                "1" => true,
                _ => return Err(Error::Parse(format!("weighted={v}"))),
            });
        }
    }
    let (Some(dim), Some(weighted)) = (dim, weighted) else {
        return Err(Error::Parse(format!("bad header {header:?}")));
    };
    let expect = dim + usize::from(weighted);
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let mut vals = vals.map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        if vals.len() != expect {
            return Err(Error::Parse(format!(
                "line {}: expected {expect} fields, found {}",
                ln + 2,
                vals.len()
            )));
        }
        let w = if weighted { vals.pop() } else { None };
        rows.push((vals, w));
    }
    Ok((dim, weighted, rows))
}

/// Minimum pairwise distance by a projected sweep.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points[0].len();
    // fixed generic direction; avoids ties on axis-aligned lattices
    let dir: Vec<f64> = {
        let raw: Vec<f64> = (0..n).map(|i| 1.0 + 0.6180339887 * (i as f64 + 1.0).sqrt()).collect();
        let nr = dot(&raw, &raw).sqrt();
        raw.iter().map(|v| v / nr).collect()
    };
    let mut keyed: Vec<(f64, usize)> =
        points.iter().enumerate().map(|(i, p)| (dot(p, &dir), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for a in 0..keyed.len() {
        let (ka, ia) = keyed[a];
        for &(kb, ib) in &keyed[a + 1..] {
            if kb - ka > best {
                break;
            }
            let d = dist(&points[ia], &points[ib]);
            if d < best {
                best = d;
            }
        }
    }
    Some(best)
}

/// Exact diameter. One dimension by extremes, two by the convex hull, higher
/// dimensions by a parallel pair scan.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    match points[0].len() {
        1 => {
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[0]), hi.max(p[0]))
                });
            hi - lo
        }
        2 => {
            let hull = convex_hull_2d(points);
            let mut best = 0.0f64;
            for (i, a) in hull.iter().enumerate() {
                for b in &hull[i + 1..] {
                    best = best.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
                }
            }
            best
        }
        _ => (0..points.len())
            .into_par_iter()
            .map(|i| {
                points[i + 1..]
                    .iter()
                    .map(|q| dist(&points[i], q))
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max),
    }
}

fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let ps = PointSet::new(2, vec![vec![0.1, -2.0], vec![1e-300, 3.5]]).unwrap();
        let back = PointSet::from_csv(&ps.to_csv()).unwrap();
        assert_eq!(ps, back);
        let m = AtomicMeasure::new(ps, vec![0.25, 0.75]).unwrap();
        let txt = m.to_csv();
        assert!(txt.starts_with("# dim=2 weighted=1\n"));
        assert_eq!(AtomicMeasure::from_csv(&txt).unwrap(), m);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(PointSet::from_csv("# dim=2 weighted=0\n1,2,3\n").is_err());
        assert!(PointSet::from_csv("dim=2\n").is_err());
        assert!(AtomicMeasure::from_csv("# dim=1 weighted=0\n1\n").is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let ps = PointSet::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(AtomicMeasure::new(ps.clone(), vec![0.5, 0.4]).is_err());
        assert!(AtomicMeasure::new(ps, vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn floor_and_diameter() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.5, 0.0]).collect();
        assert_eq!(min_pairwise_distance(&pts), Some(0.5));
        assert!((diameter(&pts) - 4.5).abs() < 1e-12);
        let cube: Vec<Vec<f64>> = (0..8)
            .map(|m| (0..3).map(|b| ((m >> b) & 1) as f64).collect())
            .collect();
        assert!((diameter(&cube) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hull_diameter_matches_brute_force() {
        let mut rng = crate::random::rng_from_seed(4);
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>() * 2.0])
            .collect();
        let mut brute = 0.0f64;
        for a in &pts {
            for b in &pts {
                brute = brute.max(dist(a, b));
            }
        }
        assert!((diameter(&pts) - brute).abs() < 1e-12);
    }
}
