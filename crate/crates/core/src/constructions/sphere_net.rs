//! Unions of separated nets on shrinking coordinate spheres.
//!
//! For each coordinate set `J ⊂ {1..N}` with `|J| = k+1`, shell `i` is a
//! maximal `ℓ_i`-separated subset of the sphere of radius `r_i` in
//! `span{e_j : j ∈ J}`. The union over shells and the origin is a compact set
//! whose box dimension is `k(t−1)/t` when `ℓ_i = 2^{−it}`, `r_i = 2^{−i}`.
//!
//! Candidate streams, by sphere dimension:
//! - `k = 1`: the regular `m`-gon with `m = ⌊π / asin(ℓ/2r)⌋`, which is
//!   already maximal;
//! - `k = 2`: a Fibonacci spiral of about `64 (r/ℓ)²` points, ordered by
//!   height, greedily thinned;
//! - `k ≥ 3`: uniform random points, fifty times the packing estimate,
//!   greedily thinned.
//!
//! [`NetMethod::Lattice`] replaces the stream with the equiangular lattice of
//! [`super::lattice`], whose covering radius is below its separation so it is
//! maximal as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::LatticeSphere;
use crate::error::{invalid, Error, Result};
use crate::grid::GrowingGrid;
use crate::linalg::{dist, sample_unit_sphere};
use crate::points::PointSet;
use crate::random::{derive_seed, rng_from_seed};

/// Smallest admissible separation.
pub const PRECISION_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

pub const DEFAULT_MAX_POINTS: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusLaw {
    /// `r_i = 2^{−i}`
    Pow2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum SeparationLaw {
    /// `ℓ_i = 2^{−it}`, `t > 1`
    Pow2T { t: f64 },
    /// `ℓ_i = 2^{−i²}`
    Pow2Sq,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetMethod {
    #[default]
    Greedy,
    Lattice,
}

impl RadiusLaw {
    pub fn radius(self, i: u32) -> f64 {
        match self {
            RadiusLaw::Pow2 => (2f64).powi(-(i as i32)),
        }
    }
}

impl SeparationLaw {
    pub fn separation(self, i: u32) -> f64 {
        match self {
            SeparationLaw::Pow2T { t } => (2f64).powf(-(i as f64) * t),
            SeparationLaw::Pow2Sq => (2f64).powi(-((i * i) as i32)),
        }
    }

    /// First shell index with `ℓ_i < r_i` (shell 1 of the square law has
    /// `ℓ₁ = r₁` and is skipped).
    pub fn first_shell(self) -> u32 {
        match self {
            SeparationLaw::Pow2T { .. } => 1,
            SeparationLaw::Pow2Sq => 2,
        }
    }

    /// Box dimension of the resulting union, `k(t−1)/t`; zero for the square
    /// law.
    pub fn box_dimension(self, k: usize) -> f64 {
        match self {
            SeparationLaw::Pow2T { t } => k as f64 * (t - 1.0) / t,
            SeparationLaw::Pow2Sq => 0.0,
        }
    }
}

/// Parameters shared by every coordinate sphere of a union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellLaws {
    pub n: usize,
    pub k: usize,
    pub r_law: RadiusLaw,
    pub l_law: SeparationLaw,
    pub i_max: u32,
    #[serde(default)]
    pub method: NetMethod,
    /// Shells never use a separation finer than this; `None` keeps the law.
    #[serde(default)]
    pub resolution_cap: Option<f64>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

impl ShellLaws {
    pub fn new(n: usize, k: usize, l_law: SeparationLaw, i_max: u32) -> Self {
        Self {
            n,
            k,
            r_law: RadiusLaw::Pow2,
            l_law,
            i_max,
            method: NetMethod::Greedy,
            resolution_cap: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    pub fn with_method(mut self, method: NetMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_resolution_cap(mut self, cap: f64) -> Self {
        self.resolution_cap = Some(cap);
        self
    }

    pub fn with_max_points(mut self, max_points: usize) -> Self {
        self.max_points = max_points;
        self
    }

    pub fn radius(&self, i: u32) -> f64 {
        self.r_law.radius(i)
    }

    /// Separation actually used for shell `i` (the law, coarsened by the cap).
    pub fn separation(&self, i: u32) -> f64 {
        let ell = self.l_law.separation(i);
        self.resolution_cap.map_or(ell, |c| ell.max(c))
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<u32> {
        self.l_law.first_shell()..=self.i_max
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k + 1 > self.n {
            return invalid(format!("need 1 ≤ k < N, got N = {}, k = {}", self.n, self.k));
        }
        if let SeparationLaw::Pow2T { t } = self.l_law {
            if !(t > 1.0) {
                return invalid(format!("separation exponent t = {t} must exceed 1"));
            }
        }
        if self.i_max < self.l_law.first_shell() {
            return invalid(format!("i_max = {} leaves no shells", self.i_max));
        }
        let last = self.l_law.separation(self.i_max);
        if last < PRECISION_FLOOR {
            return Err(Error::Depth(format!(
                "ℓ_{} = {last:e} is below the 2^-40 precision floor",
                self.i_max
            )));
        }
        if let Some(c) = self.resolution_cap {
            if !(c > 0.0) {
                return invalid("resolution cap must be positive");
            }
        }
        for i in self.shells() {
            if !(self.l_law.separation(i) < self.radius(i)) {
                return invalid(format!("shell {i}: separation not below radius"));
            }
        }
        Ok(())
    }
}

/// One coordinate sphere: `J` (1-based coordinate indices) plus the laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereNetSpec {
    pub laws: ShellLaws,
    pub j: Vec<usize>,
}

impl SphereNetSpec {
    pub fn validate(&self) -> Result<()> {
        self.laws.validate()?;
        let n = self.laws.n;
        if self.j.len() != self.laws.k + 1 {
            return invalid(format!(
                "|J| = {} but k + 1 = {}",
                self.j.len(),
                self.laws.k + 1
            ));
        }
        let mut sorted = self.j.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.j.len() || sorted.iter().any(|&c| c == 0 || c > n) {
            return invalid(format!("J = {:?} must be distinct indices in 1..={n}", self.j));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSummary {
    pub j: Vec<usize>,
    pub i: u32,
    pub r: f64,
    pub ell: f64,
    pub count: usize,
    /// `count / (r/ℓ)^k`
    pub normalized_count: f64,
}

#[derive(Clone, Debug)]
pub struct SphereNet {
    pub points: PointSet,
    pub shells: Vec<ShellSummary>,
}

impl SphereNet {
    /// Fitted `(c, C)` with `c (r/ℓ)^k ≤ count ≤ C (r/ℓ)^k` over shells with
    /// `i ≥ i_min`.
    pub fn cardinality_constants(&self, i_min: u32) -> Option<(f64, f64)> {
        let v: Vec<f64> = self
            .shells
            .iter()
            .filter(|s| s.i >= i_min)
            .map(|s| s.normalized_count)
            .collect();
        if v.is_empty() {
            return None;
        }
        Some((
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(0.0, f64::max),
        ))
    }
}

pub fn label(j: &[usize], i: u32) -> String {
    let js: Vec<String> = j.iter().map(|c| c.to_string()).collect();
    format!("{{{}}}:{i}", js.join(","))
}

pub const ORIGIN_LABEL: &str = "origin";

/// Points of one shell, in the `k+1` local coordinates of `span{e_j}`.
pub fn shell_local(k: usize, r: f64, ell: f64, method: NetMethod, seed: u64, max_points: usize) -> Result<Vec<Vec<f64>>> {
    let estimate = packing_estimate(k, r, ell);
    if estimate > max_points as f64 {
        return Err(Error::Size(format!(
            "shell with r = {r:e}, ℓ = {ell:e} needs about {estimate:.3e} points (cap {max_points})"
        )));
    }
    match method {
        NetMethod::Lattice => {
            let lat = LatticeSphere::for_separation(k, r, ell)?;
            if lat.len() > max_points as u128 {
                return Err(Error::Size(format!("lattice shell has {} points", lat.len())));
            }
            let mut out = Vec::with_capacity(lat.len() as usize);
            lat.for_each(|p| out.push(p.iter().map(|v| v * r).collect()));
            Ok(out)
        }
        NetMethod::Greedy if k == 1 => {
            let m = (std::f64::consts::PI / (ell / (2.0 * r)).asin()).floor() as usize;
            let m = m.max(2);
            Ok((0..m)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    vec![r * a.cos(), r * a.sin()]
                })
                .collect())
        }
        NetMethod::Greedy => {
            let candidates = candidate_stream(k, r, ell, seed, max_points)?;
            Ok(greedy_separated(candidates, ell))
        }
    }
}

/// Packing-number estimate `area(S^k) / vol(B^k(1/2)) · (r/ℓ)^k`.
pub fn packing_estimate(k: usize, r: f64, ell: f64) -> f64 {
    let kf = k as f64;
    let area = 2.0 * std::f64::consts::PI.powf((kf + 1.0) / 2.0) / gamma((kf + 1.0) / 2.0);
    let ball = std::f64::consts::PI.powf(kf / 2.0) / gamma(kf / 2.0 + 1.0) * 0.5f64.powf(kf);
    area / ball * (r / ell).powf(kf)
}

fn gamma(x: f64) -> f64 {
    // half-integer arguments only
    let twice = (2.0 * x).round() as i64;
    if twice % 2 == 0 {
        (1..(x as i64)).map(|v| v as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut y = 0.5;
        while y < x - 0.25 {
            g *= y;
            y += 1.0;
        }
        g
    }
}

fn candidate_stream(k: usize, r: f64, ell: f64, seed: u64, max_points: usize) -> Result<Vec<Vec<f64>>> {
    let cap = 64 * max_points;
    if k == 2 {
        let count = (64.0 * (r / ell).powi(2)).ceil();
        if count > cap as f64 {
            return Err(Error::Size(format!("{count:e} candidates exceed the stream cap")));
        }
        let count = count as usize;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        Ok((0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                vec![r * rho * phi.cos(), r * rho * phi.sin(), r * z]
            })
            .collect())
    } else {
        let count = (50.0 * packing_estimate(k, r, ell)).ceil();
        if count > cap as f64 {
            return Err(Error::Size(format!("{count:e} candidates exceed the stream cap")));
        }
        let mut rng = rng_from_seed(seed);
        Ok((0..count as usize)
            .map(|_| {
                sample_unit_sphere(k + 1, &mut rng)
                    .into_iter()
                    .map(|v| v * r)
                    .collect()
            })
            .collect())
    }
}

/// Greedy insertion in stream order: keep a candidate iff it is at distance
/// at least `ell` from everything kept so far.
pub fn greedy_separated(candidates: Vec<Vec<f64>>, ell: f64) -> Vec<Vec<f64>> {
    let dim = candidates.first().map_or(1, |c| c.len());
    match GrowingGrid::new(dim, ell) {
        Some(mut g) => {
            for c in candidates {
                if !g.any_closer_than(&c, ell) {
                    g.insert(c);
                }
            }
            g.into_points()
        }
        None => {
            let mut kept: Vec<Vec<f64>> = Vec::new();
            for c in candidates {
                if kept.iter().all(|p| dist(p, &c) >= ell) {
                    kept.push(c);
                }
            }
            kept
        }
    }
}

fn embed(local: &[f64], j: &[usize], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (v, &c) in local.iter().zip(j) {
        x[c - 1] = *v;
    }
    x
}

fn build(laws: &ShellLaws, js: &[Vec<usize>], seed: u64) -> Result<SphereNet> {
    laws.validate()?;
    let mut total_estimate = 0.0;
    for i in laws.shells() {
        total_estimate +=
            js.len() as f64 * packing_estimate(laws.k, laws.radius(i), laws.separation(i));
    }
    if total_estimate > laws.max_points as f64 {
        return Err(Error::Size(format!(
            "union needs about {total_estimate:.3e} points (cap {})",
            laws.max_points
        )));
    }
    let jobs: Vec<(usize, u32)> = (0..js.len())
        .flat_map(|a| laws.shells().map(move |i| (a, i)))
        .collect();
    let shells: Vec<Vec<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(a, i)| {
            shell_local(
                laws.k,
                laws.radius(i),
                laws.separation(i),
                laws.method,
                derive_seed(seed, (a as u64) << 32 | i as u64),
                laws.max_points,
            )
        })
        .collect::<Result<_>>()?;
    let mut points = vec![vec![0.0; laws.n]];
    let mut labels = vec![ORIGIN_LABEL.to_string()];
    let mut summaries = Vec::new();
    for (&(a, i), shell) in jobs.iter().zip(shells) {
        let j = &js[a];
        let tag = label(j, i);
        let (r, ell) = (laws.radius(i), laws.separation(i));
        summaries.push(ShellSummary {
            j: j.clone(),
            i,
            r,
            ell,
            count: shell.len(),
            normalized_count: shell.len() as f64 / (r / ell).powi(laws.k as i32),
        });
        for p in shell {
            points.push(embed(&p, j, laws.n));
            labels.push(tag.clone());
        }
    }
    let points = PointSet::new(laws.n, points)?.with_labels(labels)?;
    Ok(SphereNet {
        points,
        shells: summaries,
    })
}

/// Net on the single coordinate sphere `J`, plus the origin.
pub fn sphere_net(spec: &SphereNetSpec, seed: u64) -> Result<SphereNet> {
    spec.validate()?;
    build(&spec.laws, std::slice::from_ref(&spec.j), seed)
}

/// Union over every `J` with `|J| = k+1`, sharing the origin.
pub fn sphere_net_union(laws: &ShellLaws, seed: u64) -> Result<SphereNet> {
    laws.validate()?;
    build(laws, &subsets(laws.n, laws.k + 1), seed)
}

/// All `size`-subsets of `{1..n}` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for c in start..=n {
            cur.push(c);
            rec(c + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, size, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::min_pairwise_distance;

    fn laws(n: usize, k: usize, t: f64, i_max: u32) -> ShellLaws {
        ShellLaws::new(n, k, SeparationLaw::Pow2T { t }, i_max)
    }

    #[test]
    fn circle_example_has_twelve_points() {
        let spec = SphereNetSpec {
            laws: laws(2, 1, 2.0, 1),
            j: vec![1, 2],
        };
        let net = sphere_net(&spec, 0).unwrap();
        let m = (std::f64::consts::PI / (0.25f64).asin()).floor() as usize;
        assert_eq!(m, 12);
        assert_eq!(net.shells[0].count, 12);
        assert_eq!(net.points.len(), 13);
        assert_eq!(net.points.label(0), Some(ORIGIN_LABEL));
        assert_eq!(net.points.label(1), Some("{1,2}:1"));
    }

    #[test]
    fn rejects_bad_specs() {
        let bad_j = SphereNetSpec {
            laws: laws(3, 1, 2.0, 3),
            j: vec![1, 2, 3],
        };
        assert!(matches!(sphere_net(&bad_j, 0), Err(Error::InvalidArgument(_))));
        // ℓ = 2r
        assert!(laws(3, 2, 0.0, 3).validate().is_err());
        assert!(laws(3, 2, 1.0, 3).validate().is_err());
        let deep = ShellLaws::new(3, 2, SeparationLaw::Pow2Sq, 7);
        assert!(matches!(deep.validate(), Err(Error::Depth(_))));
        assert!(ShellLaws::new(3, 2, SeparationLaw::Pow2Sq, 6).validate().is_ok());
    }

    #[test]
    fn union_components() {
        assert_eq!(subsets(2, 2), vec![vec![1, 2]]);
        assert_eq!(subsets(3, 2).len(), 3);
        let net = sphere_net_union(&laws(3, 1, 2.0, 3), 0).unwrap();
        let js: std::collections::BTreeSet<Vec<usize>> =
            net.shells.iter().map(|s| s.j.clone()).collect();
        assert_eq!(js.len(), 3);
        let origins = net.points.points().iter().filter(|p| p.iter().all(|v| *v == 0.0)).count();
        assert_eq!(origins, 1);
    }

    #[test]
    fn shells_are_separated_and_maximal() {
        for (k, r, ell) in [(2usize, 0.5, 0.05), (2, 0.25, 0.01), (3, 0.5, 0.2)] {
            let candidates = candidate_stream(k, r, ell, 9, 1 << 20).unwrap();
            let kept = greedy_separated(candidates.clone(), ell);
            let sep = min_pairwise_distance(&kept).unwrap();
            assert!(sep >= ell, "separation {sep} < {ell}");
            for c in &candidates {
                let near = kept.iter().map(|p| dist(p, c)).fold(f64::INFINITY, f64::min);
                assert!(near < ell, "rejected candidate far from net");
            }
        }
    }

    #[test]
    fn lattice_shells_are_separated() {
        let l = laws(3, 2, 2.0, 4).with_method(NetMethod::Lattice);
        let net = sphere_net_union(&l, 0).unwrap();
        for s in &net.shells {
            let tag = label(&s.j, s.i);
            let idx: Vec<usize> = (0..net.points.len())
                .filter(|&p| net.points.label(p) == Some(tag.as_str()))
                .collect();
            let shell = net.points.subset(&idx);
            assert!(min_pairwise_distance(shell.points()).unwrap() >= s.ell * (1.0 - 1e-12));
        }
    }

    #[test]
    fn cardinality_bracket_is_stable() {
        let net = sphere_net_union(&laws(3, 2, 2.0, 7), 1).unwrap();
        let (c, big_c) = net.cardinality_constants(3).unwrap();
        assert!(c > 0.0 && big_c / c < 1.3, "c = {c}, C = {big_c}");
        for s in &net.shells {
            assert!(s.count as f64 <= packing_estimate(2, s.r, s.ell));
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let l = laws(3, 2, 3.0, 8).with_max_points(10_000);
        assert!(matches!(sphere_net_union(&l, 0), Err(Error::Size(_))));
    }
}
