//! Pointwise Hölder exponents of the inverse and the log-Lipschitz defect,
//! computed exactly on finite sets.
//!
//! For a base point `x`, budget `M` and exponent `α ≥ 0`, the condition is
//! `‖x − y‖ ≤ M·d^α` for every `y`, with `d` the (possibly normalized) image
//! distance. Each `y` constrains `α` to an interval:
//!
//! | `d`       | `s = ‖x − y‖ ≤ M`       | `s > M`                      |
//! |-----------|-------------------------|------------------------------|
//! | `0`       | fails (unless `s = 0`)  | fails                        |
//! | `(0, 1)`  | `α ≤ ln(s/M)/ln d`      | fails                        |
//! | `1`       | always                  | fails                        |
//! | `> 1`     | always                  | `α ≥ ln(s/M)/ln d`           |
//!
//! The estimate is the supremum of the intersection, or 0 when it is empty.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::sphere_net::{subsets, ShellLaws};
use crate::constructions::LatticeSphere;
use crate::error::{invalid, Error, Result};
use crate::linalg::{dist, norm, AffinePerturbation, LinearOperator};
use crate::points::PointSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Image distances as they are.
    #[default]
    Raw,
    /// Image distances divided by twice the image diameter, so every `d < 1`.
    TwiceImageDiameter,
}

/// Why the estimate has the value it has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// Limited by the ceiling `ln(s/M)/ln d` of the witness.
    Ceiling,
    /// No exponent works: the witness collides, or sits farther than `M`
    /// with `d ≤ 1`, or its floor exceeds the smallest ceiling.
    Infeasible,
    /// No constraint from above; every large exponent works.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub base: usize,
    pub m: f64,
    /// `None` stands for `+∞`.
    pub alpha_hat: Option<f64>,
    pub binding: Binding,
    pub witness: Option<usize>,
    pub normalization: Normalization,
    /// Divisor applied to image distances (1 for raw).
    pub normalizer: f64,
}

impl HolderEstimate {
    pub fn alpha_or_inf(&self) -> f64 {
        self.alpha_hat.unwrap_or(f64::INFINITY)
    }
}

/// Accumulates constraints on α from pairs `(s, d)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Feasible {
    m: f64,
    ceiling: Option<(f64, usize)>,
    floor: Option<(f64, usize)>,
    infeasible: Option<usize>,
}

impl Feasible {
    pub(crate) fn new(m: f64) -> Self {
        Self {
            m,
            ceiling: None,
            floor: None,
            infeasible: None,
        }
    }

    pub(crate) fn add(&mut self, s: f64, d: f64, id: usize) {
        if s == 0.0 {
            return;
        }
        let m = self.m;
        if d == 0.0 || (s > m && d <= 1.0) {
            self.infeasible.get_or_insert(id);
        } else if d < 1.0 {
            let c = (s / m).ln() / d.ln();
            if self.ceiling.is_none_or(|(v, _)| c < v) {
                self.ceiling = Some((c, id));
            }
        } else if s > m && d > 1.0 {
            let l = (s / m).ln() / d.ln();
            if self.floor.is_none_or(|(v, _)| l > v) {
                self.floor = Some((l, id));
            }
        }
    }

    fn merge(mut self, o: Self) -> Self {
        if let Some(i) = o.infeasible {
            self.infeasible = Some(self.infeasible.map_or(i, |j| j.min(i)));
        }
        if let Some((c, i)) = o.ceiling {
            if self.ceiling.is_none_or(|(v, j)| c < v || (c == v && i < j)) {
                self.ceiling = Some((c, i));
            }
        }
        if let Some((l, i)) = o.floor {
            if self.floor.is_none_or(|(v, j)| l > v || (l == v && i < j)) {
                self.floor = Some((l, i));
            }
        }
        self
    }

    pub(crate) fn resolve(&self) -> (Option<f64>, Binding, Option<usize>) {
        if let Some(i) = self.infeasible {
            return (Some(0.0), Binding::Infeasible, Some(i));
        }
        match (self.ceiling, self.floor) {
            (Some((c, _)), Some((l, j))) if l > c => (Some(0.0), Binding::Infeasible, Some(j)),
            (Some((c, i)), _) => (Some(c), Binding::Ceiling, Some(i)),
            (None, _) => (None, Binding::Unbounded, None),
        }
    }
}

/// Exact pointwise Hölder exponent of the inverse at `x` with budget `M`.
pub fn pointwise_holder(
    ps: &PointSet,
    phi: &AffinePerturbation,
    x: usize,
    m: f64,
    normalization: Normalization,
) -> Result<HolderEstimate> {
    let images = phi.image(ps)?;
    holder_from_images(ps, &images, x, m, normalization)
}

/// As [`pointwise_holder`] for precomputed images.
pub fn holder_from_images(
    ps: &PointSet,
    images: &[Vec<f64>],
    x: usize,
    m: f64,
    normalization: Normalization,
) -> Result<HolderEstimate> {
    Ok(holder_sweep(ps, images, x, &[m], normalization)?.remove(0))
}

/// `alpha_hat(M)` for each budget of `ms`, sharing one pass over the set.
pub fn holder_profile(
    ps: &PointSet,
    phi: &AffinePerturbation,
    x: usize,
    ms: &[f64],
    normalization: Normalization,
) -> Result<Vec<HolderEstimate>> {
    let images = phi.image(ps)?;
    holder_sweep(ps, &images, x, ms, normalization)
}

pub fn holder_sweep(
    ps: &PointSet,
    images: &[Vec<f64>],
    x: usize,
    ms: &[f64],
    normalization: Normalization,
) -> Result<Vec<HolderEstimate>> {
    if x >= ps.len() {
        return invalid("base index out of range");
    }
    if ms.is_empty() || ms.iter().any(|m| !(*m > 0.0)) {
        return invalid("budgets M must be positive");
    }
    let normalizer = match normalization {
        Normalization::Raw => 1.0,
        Normalization::TwiceImageDiameter => {
            let d = crate::points::diameter(images);
            if d > 0.0 {
                2.0 * d
            } else {
                1.0
            }
        }
    };
    let base = ps.point(x);
    let fx = &images[x];
    let pairs: Vec<(f64, f64)> = (0..ps.len())
        .into_par_iter()
        .map(|y| (dist(base, ps.point(y)), dist(fx, &images[y]) / normalizer))
        .collect();
    Ok(ms
        .iter()
        .map(|&m| {
            let acc = pairs
                .par_iter()
                .enumerate()
                .filter(|(y, _)| *y != x)
                .fold(
                    || Feasible::new(m),
                    |mut f, (y, &(s, d))| {
                        f.add(s, d, y);
                        f
                    },
                )
                .reduce(|| Feasible::new(m), Feasible::merge);
            let (alpha_hat, binding, witness) = acc.resolve();
            HolderEstimate {
                base: x,
                m,
                alpha_hat,
                binding,
                witness,
                normalization,
                normalizer,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLipschitzDefect {
    pub base: usize,
    /// `min_y ‖φx − φy‖ / f(‖x − y‖)`; 0 exactly when some `y ≠ x` collides.
    pub c_hat: f64,
    pub witness: Option<usize>,
    pub r: f64,
    pub eta: f64,
    pub theta: f64,
}

/// The modulus `f(u) = u / (log₂(2R/u))^{η/θ}`.
pub fn log_lipschitz_modulus(u: f64, r: f64, eta: f64, theta: f64) -> f64 {
    u / (2.0 * r / u).log2().powf(eta / theta)
}

pub fn log_lipschitz_defect(
    ps: &PointSet,
    phi: &AffinePerturbation,
    x: usize,
    r: f64,
    eta: f64,
    theta: f64,
) -> Result<LogLipschitzDefect> {
    let images = phi.image(ps)?;
    let diam = ps.diameter();
    log_lipschitz_from_images(ps, &images, diam, x, r, eta, theta)
}

/// As [`log_lipschitz_defect`] with precomputed images and diameter (for
/// sweeps over many base points).
pub fn log_lipschitz_from_images(
    ps: &PointSet,
    images: &[Vec<f64>],
    diameter: f64,
    x: usize,
    r: f64,
    eta: f64,
    theta: f64,
) -> Result<LogLipschitzDefect> {
    if x >= ps.len() {
        return invalid("base index out of range");
    }
    if r < diameter * (1.0 - 1e-12) {
        return invalid(format!("R = {r} is below the diameter {diameter}"));
    }
    if !(eta > 1.0 && theta > 0.0) {
        return invalid("need η > 1 and θ > 0");
    }
    let base = ps.point(x);
    let mut best: Option<(f64, usize)> = None;
    for y in 0..ps.len() {
        let u = dist(base, ps.point(y));
        if y == x || u == 0.0 {
            continue;
        }
        let q = dist(&images[x], &images[y]) / log_lipschitz_modulus(u, r, eta, theta);
        if best.is_none_or(|(v, _)| q < v) {
            best = Some((q, y));
        }
    }
    Ok(LogLipschitzDefect {
        base: x,
        c_hat: best.map_or(f64::INFINITY, |b| b.0),
        witness: best.map(|b| b.1),
        r,
        eta,
        theta,
    })
}

/// Per-shell minimum image distance of the implicit lattice net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellMinimum {
    pub j: Vec<usize>,
    pub i: u32,
    pub r: f64,
    pub min_image: f64,
    pub visited: u64,
    pub full_scan: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitHolder {
    pub estimates: Vec<HolderEstimate>,
    pub shells: Vec<ShellMinimum>,
}

/// Exact Hölder exponent at the origin of a lattice sphere-net union under a
/// linear map, without materializing the net.
///
/// On shell `r_i S_J` the image distance from the origin is `r_i ‖L_J p‖` for
/// a lattice point `p`, and only the minimum over the shell matters for every
/// row of the constraint table. Points with small `‖L_J p‖` lie near the
/// kernel line of `L_J`: if some lattice point lies within the covering bound
/// `c` of it, every better point lies within angle `asin(κ c)` of `±w`, where
/// `κ` is the condition number of `L_J`. Raw normalization only; witnesses
/// index the shell table.
pub fn origin_holder_lattice(laws: &ShellLaws, l: &LinearOperator, ms: &[f64], full_scan_limit: u128) -> Result<ImplicitHolder> {
    origin_holder_impl(laws, l, ms, full_scan_limit, false)
}

fn origin_holder_impl(
    laws: &ShellLaws,
    l: &LinearOperator,
    ms: &[f64],
    full_scan_limit: u128,
    force_full: bool,
) -> Result<ImplicitHolder> {
    let (n, k) = (laws.n, laws.k);
    if l.in_dim() != n || l.out_dim() != k {
        return invalid("map dimensions do not match the net");
    }
    if ms.is_empty() || ms.iter().any(|m| !(*m > 0.0)) {
        return invalid("budgets M must be positive");
    }
    let js = subsets(n, k + 1);
    let jobs: Vec<(usize, u32)> = (0..js.len())
        .flat_map(|a| laws.shells().map(move |i| (a, i)))
        .collect();
    let shells: Vec<ShellMinimum> = jobs
        .par_iter()
        .map(|&(a, i)| {
            let j = &js[a];
            let cols: Vec<usize> = j.iter().map(|c| c - 1).collect();
            let lj = LinearOperator::new(l.restrict_columns(&cols))?;
            let (r, ell) = (laws.radius(i), laws.separation(i));
            let lat = LatticeSphere::for_separation(k, r, ell)?;
            let (min_image, visited, full) = shell_minimum(&lj, &lat, full_scan_limit, force_full)?;
            Ok(ShellMinimum {
                j: j.clone(),
                i,
                r,
                min_image: r * min_image,
                visited,
                full_scan: full,
            })
        })
        .collect::<Result<_>>()?;
    let estimates = ms
        .iter()
        .map(|&m| {
            let mut f = Feasible::new(m);
            for (id, s) in shells.iter().enumerate() {
                f.add(s.r, s.min_image, id);
            }
            let (alpha_hat, binding, witness) = f.resolve();
            HolderEstimate {
                base: 0,
                m,
                alpha_hat,
                binding,
                witness,
                normalization: Normalization::Raw,
                normalizer: 1.0,
            }
        })
        .collect();
    Ok(ImplicitHolder { estimates, shells })
}

/// `min_p ‖L p‖` over the unit lattice sphere, with the number of points
/// visited.
fn shell_minimum(
    lj: &LinearOperator,
    lat: &LatticeSphere,
    full_scan_limit: u128,
    force_full: bool,
) -> Result<(f64, u64, bool)> {
    let k = lat.k();
    let mut best = f64::INFINITY;
    let sv = lj.singular_values();
    let (s_min, s_max) = (sv[0], sv[k - 1]);
    let theta = if s_min > 0.0 {
        (s_max / s_min * lat.covering_bound()).min(1.0).asin()
    } else {
        f64::INFINITY
    };
    if !force_full && theta <= LatticeSphere::max_theta(k) {
        let w = &lj.kernel_basis()[0];
        let visited = lat.for_near(w, theta, |p| best = best.min(norm(&lj.apply(&p))))?;
        return Ok((best, visited, false));
    }
    if lat.len() > full_scan_limit {
        return Err(Error::Size(format!(
            "shell needs a full scan of {} lattice points (limit {full_scan_limit})",
            lat.len()
        )));
    }
    let mut visited = 0u64;
    lat.for_each(|p| {
        visited += 1;
        best = best.min(norm(&lj.apply(&p)));
    });
    Ok((best, visited, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::sphere_net::{sphere_net_union, NetMethod, SeparationLaw};
    use crate::linalg::sample_e;

    fn identity(n: usize) -> AffinePerturbation {
        AffinePerturbation::linear(
            LinearOperator::new((0..n).map(|i| crate::linalg::unit_vector(n, i)).collect()).unwrap(),
        )
    }

    #[test]
    fn identity_is_unbounded() {
        let ps = PointSet::new(1, vec![vec![0.0], vec![0.1], vec![0.3]]).unwrap();
        let e = pointwise_holder(&ps, &identity(1), 0, 1.0, Normalization::Raw).unwrap();
        // s = d < 1 = M: ceiling ln(s)/ln(s) = 1
        assert_eq!(e.binding, Binding::Ceiling);
        assert!((e.alpha_hat.unwrap() - 1.0).abs() < 1e-12);
        // with M below every s and image distances above 1, nothing caps α
        let far = PointSet::new(1, vec![vec![0.0], vec![2.0], vec![3.0]]).unwrap();
        let e = pointwise_holder(&far, &identity(1), 0, 1.0, Normalization::Raw).unwrap();
        assert_eq!(e.binding, Binding::Unbounded);
        assert_eq!(e.alpha_hat, None);
    }

    #[test]
    fn collision_forces_zero() {
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.0]]).unwrap();
        let l = AffinePerturbation::linear(LinearOperator::new(vec![vec![1.0, 0.0]]).unwrap());
        for norm in [Normalization::Raw, Normalization::TwiceImageDiameter] {
            let e = pointwise_holder(&ps, &l, 0, 16.0, norm).unwrap();
            assert_eq!(e.alpha_hat, Some(0.0));
            assert_eq!(e.witness, Some(1));
        }
    }

    #[test]
    fn witness_is_tight() {
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![0.3, 0.2], vec![0.1, 0.5], vec![0.7, 0.1]]).unwrap();
        let l = AffinePerturbation::linear(LinearOperator::new(vec![vec![0.9, 0.2]]).unwrap());
        let images = l.image(&ps).unwrap();
        for m in [1.0, 4.0] {
            let e = holder_from_images(&ps, &images, 0, m, Normalization::TwiceImageDiameter).unwrap();
            let a = e.alpha_hat.unwrap();
            let ok = |alpha: f64, y: usize| {
                let d = dist(&images[0], &images[y]) / e.normalizer;
                dist(ps.point(0), ps.point(y)) <= m * d.powf(alpha) * (1.0 + 1e-12)
            };
            assert!((1..4).all(|y| ok(a, y)));
            assert!(!ok(a + 1e-6, e.witness.unwrap()));
        }
    }

    #[test]
    fn floors_and_ceilings_conflict() {
        // y1 binds from above (α ≤ 1), y2 from below: s = 8 > M = 1 with d = 2
        // needs α ≥ 3
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 8.0]]).unwrap();
        let l = AffinePerturbation::linear(LinearOperator::new(vec![vec![1.0, 0.25]]).unwrap());
        let e = pointwise_holder(&ps, &l, 0, 1.0, Normalization::Raw).unwrap();
        assert_eq!(e.binding, Binding::Infeasible);
        assert_eq!(e.witness, Some(2));
    }

    #[test]
    fn log_lipschitz_examples() {
        let mut pts = vec![vec![0.0, 0.0]];
        for i in 1..20 {
            pts.push(vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()]);
        }
        let ps = PointSet::new(2, pts).unwrap();
        let diam = ps.diameter();
        let d = log_lipschitz_defect(&ps, &identity(2), 0, diam, 2.0, 1.0).unwrap();
        assert!(d.c_hat >= 1.0);
        assert!(log_lipschitz_defect(&ps, &identity(2), 0, diam / 2.0, 2.0, 1.0).is_err());
        let pair = PointSet::new(2, vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let l = AffinePerturbation::linear(LinearOperator::new(vec![vec![1.0, 0.0]]).unwrap());
        assert_eq!(log_lipschitz_defect(&pair, &l, 0, 1.0, 2.0, 1.0).unwrap().c_hat, 0.0);
    }

    #[test]
    fn implicit_matches_materialized_lattice() {
        for (t, i_max) in [(2.0, 6), (3.0, 4)] {
            let laws = ShellLaws::new(3, 2, SeparationLaw::Pow2T { t }, i_max).with_method(NetMethod::Lattice);
            let net = sphere_net_union(&laws, 0).unwrap();
            for s in 0..10 {
                let l = sample_e(3, 2, s).unwrap();
                let ms = [1.0, 4.0, 16.0];
                let direct = holder_profile(&net.points, &AffinePerturbation::linear(l.clone()), 0, &ms, Normalization::Raw).unwrap();
                let implicit = origin_holder_lattice(&laws, &l, &ms, 1 << 20).unwrap();
                for (a, b) in direct.iter().zip(&implicit.estimates) {
                    let (x, y) = (a.alpha_hat.unwrap(), b.alpha_hat.unwrap());
                    assert!((x - y).abs() < 1e-9, "t = {t}, seed {s}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn implicit_near_search_matches_full_scan() {
        let laws = ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, 8).with_method(NetMethod::Lattice);
        for s in 0..4 {
            let l = sample_e(3, 2, 100 + s).unwrap();
            let ms = [1.0, 16.0];
            let near = origin_holder_impl(&laws, &l, &ms, u128::MAX, false).unwrap();
            let full = origin_holder_impl(&laws, &l, &ms, u128::MAX, true).unwrap();
            for (a, b) in near.shells.iter().zip(&full.shells) {
                // p and −p round differently
                assert!((a.min_image / b.min_image - 1.0).abs() < 1e-12, "shell {}", a.i);
            }
            assert!(near.shells.iter().filter(|s| s.i >= 6).all(|s| !s.full_scan));
            for (a, b) in near.estimates.iter().zip(&full.estimates) {
                assert!((a.alpha_or_inf() - b.alpha_or_inf()).abs() < 1e-12);
                assert_eq!(a.witness, b.witness);
            }
        }
    }
}

