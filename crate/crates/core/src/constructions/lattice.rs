//! Equiangular cube-sphere lattice on the unit sphere `S^k ⊂ R^{k+1}`.
//!
//! Each of the `2(k+1)` cube faces carries an `n^k` grid of cell centers in
//! angle coordinates `u_j ∈ (−π/4, π/4)`; a cell center maps to
//! `g / |g|` with `g_a = ±1` on the face axis and `g_j = tan u_j` elsewhere.
//! The lattice is symmetric under `p ↦ −p`.
//!
//! The net is never stored: points are addressed by `(face, cell)` and
//! enumerated near a direction on demand, so shells with ~10¹² points can be
//! queried.

use std::f64::consts::FRAC_PI_4;

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSphere {
    k: usize,
    n: u64,
}

impl LatticeSphere {
    pub fn new(k: usize, n: u64) -> Result<Self> {
        if k == 0 {
            return invalid("sphere dimension must be at least 1");
        }
        if n == 0 {
            return invalid("need at least one cell per face");
        }
        Ok(Self { k, n })
    }

    /// Coarsest lattice on the sphere of radius `r` whose separation bound is
    /// at least `ell`.
    pub fn for_separation(k: usize, r: f64, ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell < 2.0 * r) {
            return invalid(format!("separation {ell} incompatible with radius {r}"));
        }
        let kf = k as f64;
        // separation_bound(n) = (2/√k) sin(π/(4n)) is decreasing in n
        let x = (ell * kf.sqrt() / (2.0 * r)).min(1.0);
        let mut n = (FRAC_PI_4 / x.asin()).floor().max(1.0) as u64;
        while n > 1 && r * Self::bound_for(k, n) < ell {
            n -= 1;
        }
        while r * Self::bound_for(k, n + 1) >= ell {
            n += 1;
        }
        Self::new(k, n)
    }

    fn bound_for(k: usize, n: u64) -> f64 {
        let delta = 2.0 * FRAC_PI_4 / n as f64;
        2.0 / (k as f64).sqrt() * (delta / 2.0).sin()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cells_per_edge(&self) -> u64 {
        self.n
    }

    /// Angular width of a cell.
    pub fn delta(&self) -> f64 {
        2.0 * FRAC_PI_4 / self.n as f64
    }

    pub fn faces(&self) -> usize {
        2 * (self.k + 1)
    }

    /// Total number of points; saturates at `u128::MAX` never in practice.
    pub fn len(&self) -> u128 {
        self.faces() as u128 * (self.n as u128).pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lower bound on the chord between distinct lattice points on the unit
    /// sphere: the minimal stretch of the face chart is `1/√k`, attained along
    /// cube edges.
    pub fn separation_bound(&self) -> f64 {
        Self::bound_for(self.k, self.n)
    }

    /// Upper bound on the distance from any unit vector to the lattice: a cell
    /// has angular half-diagonal `Δ√k/2` and the chart stretches by at most
    /// `√(2k)`.
    pub fn covering_bound(&self) -> f64 {
        self.k as f64 * self.delta() / std::f64::consts::SQRT_2
    }

    /// Unit vector of the cell `m` on `face` (face = 2·axis + (sign < 0)).
    pub fn point(&self, face: usize, m: &[u64]) -> Vec<f64> {
        let dim = self.k + 1;
        let axis = face / 2;
        let sign = if face.is_multiple_of(2) { 1.0 } else { -1.0 };
        let delta = self.delta();
        let mut g = vec![0.0; dim];
        g[axis] = sign;
        for (j, &mj) in m.iter().enumerate() {
            let u = -FRAC_PI_4 + (mj as f64 + 0.5) * delta;
            g[(axis + 1 + j) % dim] = u.tan();
        }
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        g.iter_mut().for_each(|v| *v /= len);
        g
    }

    /// Visits every lattice point (for small lattices).
    pub fn for_each(&self, mut f: impl FnMut(Vec<f64>)) {
        let full = (0, self.n - 1);
        for face in 0..self.faces() {
            odometer(&vec![full; self.k], |m| f(self.point(face, m)));
        }
    }

    /// Visits a superset of the lattice points within angle `theta` of the
    /// unit vector `w`. Requires `theta < 1/(2√(k+1))`, which keeps every
    /// such point on a face whose axis component of `w` has the face sign.
    pub fn for_near(&self, w: &[f64], theta: f64, mut f: impl FnMut(Vec<f64>)) -> Result<u64> {
        let dim = self.k + 1;
        if w.len() != dim {
            return invalid("direction has the wrong dimension");
        }
        let axis_floor = 1.0 / (dim as f64).sqrt();
        if !(theta >= 0.0 && theta <= Self::max_theta(self.k)) {
            return invalid(format!("search angle {theta} too wide"));
        }
        // |Δu_j| ≤ θ / min p_axis along the geodesic
        let half = theta / (axis_floor - theta);
        let delta = self.delta();
        let mut visited = 0u64;
        for face in 0..self.faces() {
            let axis = face / 2;
            let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
            let wa = sign * w[axis];
            if wa <= 0.0 {
                continue;
            }
            let mut ranges = Vec::with_capacity(self.k);
            let mut empty = false;
            for j in 0..self.k {
                let u = (w[(axis + 1 + j) % dim] / wa).atan();
                let lo = ((u - half + FRAC_PI_4) / delta - 0.5).ceil().max(0.0);
                let hi = ((u + half + FRAC_PI_4) / delta - 0.5)
                    .floor()
                    .min(self.n as f64 - 1.0);
                if lo > hi {
                    empty = true;
                    break;
                }
                ranges.push((lo as u64, hi as u64));
            }
            if empty {
                continue;
            }
            odometer(&ranges, |m| {
                visited += 1;
                f(self.point(face, m))
            });
        }
        Ok(visited)
    }

    pub fn max_theta(k: usize) -> f64 {
        0.5 / ((k + 1) as f64).sqrt()
    }
}

fn odometer(ranges: &[(u64, u64)], mut f: impl FnMut(&[u64])) {
    let mut m: Vec<u64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&m);
        let mut d = 0;
        loop {
            if d == m.len() {
                return;
            }
            if m[d] < ranges[d].1 {
                m[d] += 1;
                break;
            }
            m[d] = ranges[d].0;
            d += 1;
        }
    }
}
