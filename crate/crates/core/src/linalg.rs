//! Small dense linear algebra: random maps from the unit-row ball `E(N, k)`,
//! random planes from the Grassmannian, orthogonal projections and the
//! factorization of a full-rank map through the projection onto its row space.
//!
//! Problem sizes are tiny (N ≤ 20 in every experiment), so everything is plain
//! `Vec<f64>` rows with modified Gram–Schmidt and cyclic Jacobi; no external
//! linear algebra dependency.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::points::PointSet;
use crate::random::{rng_from_seed, LabRng};

/// Smallest singular value below which a map is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance on pairwise inner products of an orthonormal basis.
pub const ORTHO_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

pub fn unit_vector(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Checks the `Vec` domain invariants: nonempty, finite entries.
pub fn check_vector(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return invalid("vector must have length >= 1");
    }
    if x.iter().any(|v| !v.is_finite()) {
        return invalid("vector has non-finite entries");
    }
    Ok(())
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Vectors whose residual norm falls below `tol` (relative to their input
/// norm) are dropped, so the output spans the same space as the input and has
/// length equal to its numerical rank.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale0 = norm(v);
        if scale0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = norm(&w);
        if nw > tol * scale0 {
            for wi in &mut w {
                *wi /= nw;
            }
            basis.push(w);
        }
    }
    basis
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| unit_vector(n, i)).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                // columns of `v` are eigenvectors; store rows as v[vector][coord]
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|r| v[r][i]).collect())
        .collect();
    (values, vectors)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale0 = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= 1e-14 * scale0 {
            return Err(Error::SingularMap(m[piv][col].abs()));
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Ok(x)
}

/// A `k × N` real matrix given by its rows.
///
/// `in_ball` records membership in `E(N, k)`: every row has norm at most one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator {
    rows: Vec<Vec<f64>>,
    in_ball: bool,
}

impl LinearOperator {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("operator needs at least one row");
        };
        let n = first.len();
        if n == 0 {
            return invalid("operator rows must be nonempty");
        }
        for r in &rows {
            if r.len() != n {
                return invalid("operator rows have unequal lengths");
            }
            check_vector(r)?;
        }
        let in_ball = rows.iter().all(|r| norm(r) <= 1.0);
        Ok(Self { rows, in_ball })
    }

    pub fn zero(k: usize, n: usize) -> Self {
        Self {
            rows: vec![vec![0.0; n]; k],
            in_ball: true,
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn in_ball(&self) -> bool {
        self.in_ball
    }

    /// Target dimension k.
    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    /// Ambient dimension N.
    pub fn in_dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim());
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    /// Same map with every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|r| scale(r, c)).collect();
        let in_ball = rows.iter().all(|r| norm(r) <= 1.0);
        Self { rows, in_ball }
    }

    /// Restriction to the coordinate subspace spanned by `coords`.
    pub fn restrict_columns(&self, coords: &[usize]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| coords.iter().map(|&j| r[j]).collect())
            .collect()
    }

    /// Gram matrix `L Lᵀ` (k × k).
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let k = self.out_dim();
        (0..k)
            .map(|i| (0..k).map(|j| dot(&self.rows[i], &self.rows[j])).collect())
            .collect()
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let (vals, _) = symmetric_eigen(&self.gram());
        vals.into_iter().map(|v| v.max(0.0).sqrt()).collect()
    }

    pub fn operator_norm(&self) -> f64 {
        *self.singular_values().last().unwrap()
    }

    /// Orthonormal basis of the kernel (dimension N − rank).
    pub fn kernel_basis(&self) -> Vec<Vec<f64>> {
        let n = self.in_dim();
        let row_basis = orthonormalize(&self.rows, 1e-9);
        let r = row_basis.len();
        let mut all = row_basis;
        all.extend((0..n).map(|i| unit_vector(n, i)));
        orthonormalize(&all, 1e-9).split_off(r)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// A k-dimensional linear subspace of R^N with an orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    basis: Vec<Vec<f64>>,
    ambient_dim: usize,
}

impl Plane {
    /// Wraps an already orthonormal basis; fails if any Gram entry is off by
    /// more than [`ORTHO_TOL`].
    pub fn from_orthonormal(basis: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = basis.first() else {
            return invalid("plane needs at least one basis vector");
        };
        let n = first.len();
        if basis.iter().any(|b| b.len() != n) {
            return invalid("basis vectors have unequal lengths");
        }
        if basis.len() > n {
            return invalid("more basis vectors than ambient dimension");
        }
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(bi, bj) - target).abs() > ORTHO_TOL {
                    return invalid("basis is not orthonormal");
                }
            }
        }
        Ok(Self {
            basis,
            ambient_dim: n,
        })
    }

    /// Orthonormalizes `vectors`; they must be linearly independent.
    pub fn span(vectors: &[Vec<f64>]) -> Result<Self> {
        let basis = orthonormalize(vectors, 1e-9);
        if basis.len() != vectors.len() {
            return invalid("spanning vectors are linearly dependent");
        }
        Self::from_orthonormal(basis)
    }

    /// The line in R² at angle `theta` from the first axis.
    pub fn line_at_angle(theta: f64) -> Self {
        Self {
            basis: vec![vec![theta.cos(), theta.sin()]],
            ambient_dim: 2,
        }
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Coordinates of the orthogonal projection in the plane's basis.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ambient_dim {
            return invalid(format!(
                "vector of length {} projected in R^{}",
                x.len(),
                self.ambient_dim
            ));
        }
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }

    /// Embeds plane coordinates back into R^N.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// The projection as a `k × N` operator.
    pub fn as_operator(&self) -> LinearOperator {
        LinearOperator::new(self.basis.clone()).expect("orthonormal rows are valid")
    }
}

/// Uniform point of the closed unit ball in R^n: Gaussian direction scaled by
/// `U^{1/n}`.
pub fn sample_unit_ball(n: usize, rng: &mut LabRng) -> Vec<f64> {
    let dir = sample_unit_sphere(n, rng);
    let u: f64 = rng.random();
    let r = u.powf(1.0 / n as f64);
    scale(&dir, r)
}

/// Uniform point of the unit sphere S^{n-1}.
pub fn sample_unit_sphere(n: usize, rng: &mut LabRng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let ng = norm(&g);
        if ng > 1e-300 {
            return scale(&g, 1.0 / ng);
        }
    }
}

/// Draws `L ∈ E(N, k)` from the normalized product of Lebesgue measures on
/// the unit ball: each row independently uniform in `B_N(0, 1)`.
pub fn sample_e(n: usize, k: usize, seed: u64) -> Result<LinearOperator> {
    let mut rng = rng_from_seed(seed);
    sample_e_with(n, k, &mut rng)
}

pub fn sample_e_with(n: usize, k: usize, rng: &mut LabRng) -> Result<LinearOperator> {
    if n == 0 || k == 0 {
        return invalid("N and k must be positive");
    }
    if k > n {
        return invalid(format!("k = {k} exceeds N = {n}"));
    }
    let rows: Vec<Vec<f64>> = (0..k).map(|_| sample_unit_ball(n, rng)).collect();
    Ok(LinearOperator {
        rows,
        in_ball: true,
    })
}

/// Draws a plane from the rotation-invariant measure on `Gr(k, N)` as the row
/// space of a `k × N` standard Gaussian matrix.
pub fn sample_grassmannian(n: usize, k: usize, seed: u64) -> Result<Plane> {
    let mut rng = rng_from_seed(seed);
    sample_grassmannian_with(n, k, &mut rng)
}

pub fn sample_grassmannian_with(n: usize, k: usize, rng: &mut LabRng) -> Result<Plane> {
    if n == 0 || k == 0 {
        return invalid("N and k must be positive");
    }
    if k > n {
        return invalid(format!("k = {k} exceeds N = {n}"));
    }
    loop {
        let g: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let basis = orthonormalize(&g, 1e-9);
        if basis.len() == k {
            return Plane::from_orthonormal(basis);
        }
    }
}

/// Factorization `L = Ψ ∘ P_V` with `V = (ker L)^⊥` and `Ψ` an invertible
/// `k × k` matrix.
pub fn decompose_full_rank(l: &LinearOperator) -> Result<(Plane, Vec<Vec<f64>>)> {
    let smin = l.singular_values()[0];
    if smin <= RANK_TOL {
        return Err(Error::SingularMap(smin));
    }
    let basis = orthonormalize(l.rows(), 1e-12);
    if basis.len() != l.out_dim() {
        return Err(Error::SingularMap(smin));
    }
    let plane = Plane::from_orthonormal(basis)?;
    let psi: Vec<Vec<f64>> = l
        .rows()
        .iter()
        .map(|r| plane.basis().iter().map(|b| dot(r, b)).collect())
        .collect();
    Ok((plane, psi))
}

/// Rebuilds `Ψ ∘ P_V` as a `k × N` operator.
pub fn recompose(plane: &Plane, psi: &[Vec<f64>]) -> LinearOperator {
    let n = plane.ambient_dim();
    let rows = psi
        .iter()
        .map(|prow| {
            let mut r = vec![0.0; n];
            for (c, b) in prow.iter().zip(plane.basis()) {
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri += c * bi;
                }
            }
            r
        })
        .collect();
    LinearOperator::new(rows).expect("finite rows")
}

/// `φ_L = L + f` where `f` is Lipschitz and known only on tabulated points.
///
/// Point identifiers are indices into the [`PointSet`] the perturbation was
/// tabulated on. An empty table means `f ≡ 0`.
#[derive(Clone, Debug)]
pub struct AffinePerturbation {
    pub base: LinearOperator,
    pub lipschitz_part: HashMap<usize, Vec<f64>>,
    pub lip_bound: f64,
}

impl AffinePerturbation {
    /// The unperturbed map `f ≡ 0`.
    pub fn linear(base: LinearOperator) -> Self {
        Self {
            base,
            lipschitz_part: HashMap::new(),
            lip_bound: 0.0,
        }
    }

    /// Tabulates `f` on every point of `ps`.
    pub fn tabulate<F>(base: LinearOperator, ps: &PointSet, lip_bound: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        if ps.dim() != base.in_dim() {
            return invalid("point set dimension differs from operator input dimension");
        }
        let k = base.out_dim();
        let mut table = HashMap::with_capacity(ps.len());
        for (i, p) in ps.points().iter().enumerate() {
            let v = f(p);
            if v.len() != k {
                return invalid("perturbation value has wrong length");
            }
            table.insert(i, v);
        }
        Ok(Self {
            base,
            lipschitz_part: table,
            lip_bound,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.base.out_dim()
    }

    pub fn apply(&self, x: &[f64], id: usize) -> Result<Vec<f64>> {
        let mut y = self.base.apply(x);
        if !self.lipschitz_part.is_empty() {
            let f = self.lipschitz_part.get(&id).ok_or(Error::Lookup(id))?;
            for (yi, fi) in y.iter_mut().zip(f) {
                *yi += fi;
            }
        }
        Ok(y)
    }

    /// Applies the map to every point of `ps`.
    pub fn image(&self, ps: &PointSet) -> Result<Vec<Vec<f64>>> {
        ps.points()
            .iter()
            .enumerate()
            .map(|(i, p)| self.apply(p, i))
            .collect()
    }

    /// Largest violation of `‖f(x) − f(y)‖ ≤ H‖x − y‖` over tabulated pairs;
    /// nonpositive means the declared bound holds.
    pub fn lipschitz_violation(&self, ps: &PointSet) -> f64 {
        let ids: Vec<usize> = self.lipschitz_part.keys().copied().collect();
        let mut worst = f64::NEG_INFINITY;
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                let df = dist(&self.lipschitz_part[&i], &self.lipschitz_part[&j]);
                let dx = dist(ps.point(i), ps.point(j));
                worst = worst.max(df - self.lip_bound * dx);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_sample_in_r1() {
        for seed in 0..50 {
            let l = sample_e(1, 1, seed).unwrap();
            let v = l.rows()[0][0];
            assert!((-1.0..=1.0).contains(&v));
            assert!(l.in_ball());
        }
    }

    #[test]
    fn e_rejects_k_above_n() {
        assert!(matches!(sample_e(2, 3, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            sample_grassmannian(2, 3, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cauchy_schwarz_bound_on_e1() {
        for seed in 0..200 {
            let l = sample_e(5, 3, seed).unwrap();
            let x = unit_vector(5, 0);
            assert!(norm(&l.apply(&x)) <= (5f64).sqrt());
        }
    }

    #[test]
    fn mean_row_radius_matches_ball_law() {
        // radius law N r^{N-1} on [0,1] has mean N/(N+1) = 0.75 for N = 3
        let mut rng = rng_from_seed(11);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| norm(&sample_e_with(3, 1, &mut rng).unwrap().rows()[0]))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.75).abs() < 0.01, "mean radius {mean}");
    }

    #[test]
    fn grassmannian_full_is_identity_projection() {
        let p = sample_grassmannian(2, 2, 3).unwrap();
        let x = [0.3, -1.7];
        let y = p.lift(&p.project(&x).unwrap());
        assert!(dist(&x, &y) < 1e-12);
    }

    #[test]
    fn grassmannian_basis_is_orthonormal() {
        for seed in 0..20 {
            let p = sample_grassmannian(7, 4, seed).unwrap();
            for (i, a) in p.basis().iter().enumerate() {
                for (j, b) in p.basis().iter().enumerate() {
                    let t = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(a, b) - t).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn grassmannian_line_second_moment() {
        // E<u, e1>^2 = 1/N for u uniform on the sphere
        let mut rng = rng_from_seed(5);
        let n = 10_000;
        let m: f64 = (0..n)
            .map(|_| {
                let p = sample_grassmannian_with(3, 1, &mut rng).unwrap();
                p.basis()[0][0].powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!((m - 1.0 / 3.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn project_examples() {
        let p = Plane::span(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(p.project(&[3.0, 4.0]).unwrap(), vec![3.0]);
        assert_eq!(p.project(&[0.0, 4.0]).unwrap(), vec![0.0]);
        assert!(p.project(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn projection_contracts() {
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            let p = sample_grassmannian_with(6, 2, &mut rng).unwrap();
            let x = sample_unit_ball(6, &mut rng);
            assert!(norm(&p.project(&x).unwrap()) <= norm(&x) + 1e-12);
            // already in span: norm preserved
            let inside = p.lift(&[0.4, -0.2]);
            let back = p.project(&inside).unwrap();
            assert!((norm(&back) - norm(&inside)).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_examples() {
        let l = LinearOperator::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let (v, psi) = decompose_full_rank(&l).unwrap();
        assert_eq!(v.basis(), &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(psi, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let l = LinearOperator::new(vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let (v, psi) = decompose_full_rank(&l).unwrap();
        assert_eq!(v.dim(), 2);
        assert_eq!(psi, vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn decompose_rejects_rank_deficient() {
        let l = LinearOperator::new(vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0]]).unwrap();
        assert!(matches!(decompose_full_rank(&l), Err(Error::SingularMap(_))));
    }

    #[test]
    fn kernel_is_annihilated() {
        let l = sample_e(5, 2, 1).unwrap();
        let ker = l.kernel_basis();
        assert_eq!(ker.len(), 3);
        for w in &ker {
            assert!(norm(&l.apply(w)) < 1e-12);
        }
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 1.0],
        ];
        let (vals, vecs) = symmetric_eigen(&a);
        for (lam, v) in vals.iter().zip(&vecs) {
            let av: Vec<f64> = a.iter().map(|r| dot(r, v)).collect();
            assert!(dist(&av, &scale(v, *lam)) < 1e-10);
        }
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
    }

    #[test]
    fn perturbation_lookup() {
        let ps = PointSet::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
        let l = LinearOperator::new(vec![vec![0.0]]).unwrap();
        let phi = AffinePerturbation::tabulate(l.clone(), &ps, 0.0, |_| vec![2.5]).unwrap();
        assert_eq!(phi.apply(&[0.0], 0).unwrap(), vec![2.5]);
        assert_eq!(phi.apply(&[1.0], 1).unwrap(), vec![2.5]);
        assert!(matches!(phi.apply(&[3.0], 7), Err(Error::Lookup(7))));
        assert!(phi.lipschitz_violation(&ps) <= 0.0);
        let lin = AffinePerturbation::linear(l);
        assert_eq!(lin.apply(&[3.0], 99).unwrap(), vec![0.0]);
    }
}
