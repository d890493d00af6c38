//! Uniform grid bucketing for radius queries in low dimension.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// Largest dimension handled by bucketing; callers fall back to direct scans
/// above it.
pub const MAX_GRID_DIM: usize = 4;

pub(crate) type Key = [i64; MAX_GRID_DIM];

#[derive(Default)]
pub(crate) struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x51_7C_C1_B7_27_22_0A_95);
    }

    fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }
}

pub(crate) type FastMap<K, V> = HashMap<K, V, BuildHasherDefault<KeyHasher>>;

/// Buckets of point indices keyed by integer cell coordinates.
pub struct Grid<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    dim: usize,
    buckets: FastMap<Key, Vec<u32>>,
}

impl<'a> Grid<'a> {
    /// Returns `None` when the dimension exceeds [`MAX_GRID_DIM`] or the cell
    /// size is not positive.
    pub fn new(points: &'a [Vec<f64>], cell: f64) -> Option<Self> {
        let dim = points.first().map_or(1, |p| p.len());
        if dim > MAX_GRID_DIM || !(cell > 0.0) || !cell.is_finite() {
            return None;
        }
        let mut buckets: FastMap<Key, Vec<u32>> = FastMap::default();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(cell_key(p, cell)).or_default().push(i as u32);
        }
        Some(Self {
            points,
            cell,
            dim,
            buckets,
        })
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    /// Calls `f(j)` for every indexed point in cells that could hold a point
    /// within `r` of `q` (a superset; callers check distances themselves).
    pub fn for_candidates(&self, q: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let reach = (r / self.cell).ceil().max(1.0) as i64;
        for_cells(cell_key(q, self.cell), self.dim, reach, |k| {
            if let Some(bucket) = self.buckets.get(k) {
                for &j in bucket {
                    f(j as usize);
                }
            }
            true
        });
    }

    /// Nearest indexed point to `q` and its distance.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let center = cell_key(q, self.cell);
        let extent = self
            .buckets
            .keys()
            .map(|k| (0..self.dim).map(|d| (k[d] - center[d]).abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        let mut reach = 1i64;
        loop {
            for_cells(center, self.dim, reach, |k| {
                if let Some(bucket) = self.buckets.get(k) {
                    for &j in bucket {
                        let d = crate::linalg::dist(&self.points[j as usize], q);
                        if best.is_none_or(|(_, b)| d < b) {
                            best = Some((j as usize, d));
                        }
                    }
                }
                true
            });
            match best {
                Some((_, d)) if d <= reach as f64 * self.cell => return best,
                _ if reach > extent => return best,
                _ => reach = (reach * 2).min(extent + 1),
            }
        }
    }

    /// Indices of points within closed distance `r` of `q`.
    pub fn within(&self, q: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let r2 = r * r;
        let pts = self.points;
        self.for_candidates(q, r, |j| {
            let d2: f64 = pts[j].iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                f(j);
            }
        });
    }

    /// Occupied cells, each as its list of point indices.
    pub fn buckets(&self) -> impl Iterator<Item = (&Key, &Vec<u32>)> {
        self.buckets.iter()
    }
}

/// Visits every cell key within `reach` (Chebyshev) of `center`; stops early
/// when `f` returns false.
pub(crate) fn for_cells(center: Key, dim: usize, reach: i64, mut f: impl FnMut(&Key) -> bool) {
    let mut offset = [0i64; MAX_GRID_DIM];
    for o in offset.iter_mut().take(dim) {
        *o = -reach;
    }
    loop {
        let mut k = center;
        for d in 0..dim {
            k[d] += offset[d];
        }
        if !f(&k) {
            return;
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == dim {
                return;
            }
            offset[d] += 1;
            if offset[d] > reach {
                offset[d] = -reach;
                d += 1;
            } else {
                break;
            }
        }
    }
}

/// Point store that accepts insertions, for greedy separated-set builders.
pub struct GrowingGrid {
    cell: f64,
    dim: usize,
    buckets: FastMap<Key, Vec<u32>>,
    points: Vec<Vec<f64>>,
}

impl GrowingGrid {
    pub fn new(dim: usize, cell: f64) -> Option<Self> {
        if dim > MAX_GRID_DIM || !(cell > 0.0) || !cell.is_finite() {
            return None;
        }
        Some(Self {
            cell,
            dim,
            buckets: FastMap::default(),
            points: Vec::new(),
        })
    }

    pub fn insert(&mut self, p: Vec<f64>) -> usize {
        let i = self.points.len();
        self.buckets
            .entry(cell_key(&p, self.cell))
            .or_default()
            .push(i as u32);
        self.points.push(p);
        i
    }

    /// True when some stored point lies at distance strictly below `r`.
    pub fn any_closer_than(&self, q: &[f64], r: f64) -> bool {
        let reach = (r / self.cell).ceil().max(1.0) as i64;
        let r2 = r * r;
        let mut hit = false;
        for_cells(cell_key(q, self.cell), self.dim, reach, |k| {
            if let Some(bucket) = self.buckets.get(k) {
                hit = bucket.iter().any(|&j| {
                    let d2: f64 = self.points[j as usize]
                        .iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    d2 < r2
                });
            }
            !hit
        });
        hit
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }
}

pub(crate) fn cell_key(p: &[f64], cell: f64) -> Key {
    let mut k = [0i64; MAX_GRID_DIM];
    for (d, v) in p.iter().enumerate() {
        k[d] = (v / cell).floor() as i64;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use rand::Rng;

    #[test]
    fn radius_query_matches_scan() {
        let mut rng = crate::random::rng_from_seed(1);
        let pts: Vec<Vec<f64>> = (0..2000)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        for &cell in &[0.05, 0.1, 0.3] {
            let g = Grid::new(&pts, cell).unwrap();
            for q in pts.iter().take(50) {
                for &r in &[0.02, 0.1, 0.25] {
                    let mut got = Vec::new();
                    g.within(q, r, |j| got.push(j));
                    got.sort();
                    let want: Vec<usize> = (0..pts.len()).filter(|&j| dist(&pts[j], q) <= r).collect();
                    assert_eq!(got, want);
                }
            }
        }
    }

    #[test]
    fn nearest_matches_scan() {
        let mut rng = crate::random::rng_from_seed(2);
        let pts: Vec<Vec<f64>> = (0..500)
            .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
            .collect();
        let g = Grid::new(&pts, 0.01).unwrap();
        for _ in 0..200 {
            let q: Vec<f64> = (0..2).map(|_| 3.0 * rng.random::<f64>() - 1.0).collect();
            let (j, d) = g.nearest(&q).unwrap();
            let want = pts.iter().map(|p| dist(p, &q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d, want);
            assert_eq!(dist(&pts[j], &q), want);
        }
    }

    #[test]
    fn growing_grid_strict_separation() {
        let mut g = GrowingGrid::new(2, 0.5).unwrap();
        g.insert(vec![0.0, 0.0]);
        assert!(!g.any_closer_than(&[0.5, 0.0], 0.5));
        assert!(g.any_closer_than(&[0.49, 0.0], 0.5));
        assert!(!g.any_closer_than(&[3.0, 3.0], 0.5));
    }

    #[test]
    fn high_dimension_declined() {
        let pts = vec![vec![0.0; 5]];
        assert!(Grid::new(&pts, 1.0).is_none());
    }
}
