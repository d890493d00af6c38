//! Search for `y ∈ r S_J` with `(L + f)(y) = (L + f)(0)`, where `f` is known
//! only on a mesh of the sphere.

use serde::{Deserialize, Serialize};

use crate::constructions::LatticeSphere;
use crate::error::{invalid, Result};
use crate::grid::{Grid, MAX_GRID_DIM};
use crate::linalg::{dist, dot, norm, orthonormalize, solve, unit_vector, AffinePerturbation};
use crate::points::PointSet;

/// Success threshold relative to the radius.
pub const RELATIVE_TOL: f64 = 1e-4;

const MAX_STEPS: usize = 60;

/// The origin (index 0) followed by a lattice mesh of `r S_J` whose covering
/// radius is at most `resolution`.
pub fn sphere_mesh(n: usize, j: &[usize], r: f64, resolution: f64) -> Result<PointSet> {
    if j.len() < 2 || j.iter().any(|&c| c == 0 || c > n) {
        return invalid("J must hold at least two coordinates in 1..=N");
    }
    if !(r > 0.0 && resolution > 0.0) {
        return invalid("need positive radius and resolution");
    }
    let k = j.len() - 1;
    let mut cells = 1u64;
    let lat = loop {
        let lat = LatticeSphere::new(k, cells)?;
        if r * lat.covering_bound() <= resolution {
            break lat;
        }
        cells += (cells / 8).max(1);
    };
    if lat.len() > crate::constructions::sphere_net::DEFAULT_MAX_POINTS as u128 {
        return Err(crate::Error::Size(format!("mesh would have {} points", lat.len())));
    }
    let mut pts = vec![vec![0.0; n]];
    lat.for_each(|p| {
        let mut x = vec![0.0; n];
        for (v, &c) in p.iter().zip(j) {
            x[c - 1] = r * v;
        }
        pts.push(x);
    });
    PointSet::new(n, pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageSearch {
    /// The point found, when the residual is below `r · RELATIVE_TOL`.
    pub y: Option<Vec<f64>>,
    pub residual: f64,
    pub mesh_index: usize,
    pub mesh_residual: f64,
    pub steps: usize,
}

/// Discrete search over the mesh, then Gauss–Newton on the sphere using the
/// linear part as Jacobian and inverse-distance interpolation of `f` between
/// mesh points. Index 0 of `mesh` must be the origin.
pub fn perturbed_preimage_search(
    phi: &AffinePerturbation,
    mesh: &PointSet,
    j: &[usize],
    r: f64,
) -> Result<PreimageSearch> {
    let n = mesh.dim();
    if mesh.len() < 2 || norm(mesh.point(0)) != 0.0 {
        return invalid("mesh must start with the origin");
    }
    if j.iter().any(|&c| c == 0 || c > n) {
        return invalid("J out of range");
    }
    let target = phi.apply(mesh.point(0), 0)?;
    let residual_at = |i: usize| -> Result<f64> { Ok(dist(&phi.apply(mesh.point(i), i)?, &target)) };
    let mut best = (f64::INFINITY, 1);
    for i in 1..mesh.len() {
        let d = residual_at(i)?;
        if d < best.0 {
            best = (d, i);
        }
    }
    let (mesh_residual, mesh_index) = best;
    let tol = r * RELATIVE_TOL;
    let local = |x: &[f64]| -> Vec<f64> { j.iter().map(|&c| x[c - 1] / r).collect() };
    let mut u = local(mesh.point(mesh_index));
    let mut residual = mesh_residual;
    let mut steps = 0;

    // local charts of the mesh for interpolation
    let locals: Vec<Vec<f64>> = (1..mesh.len()).map(|i| local(mesh.point(i))).collect();
    let grid_cell = nearest_spacing(&locals);
    let grid = (j.len() <= MAX_GRID_DIM).then(|| Grid::new(&locals, grid_cell)).flatten();
    let interp = |u: &[f64]| -> Result<Vec<f64>> {
        if phi.lipschitz_part.is_empty() {
            return Ok(vec![0.0; phi.out_dim()]);
        }
        let mut near: Vec<(f64, usize)> = Vec::new();
        match &grid {
            Some(g) => g.within(u, 2.0 * grid_cell, |i| near.push((dist(&locals[i], u), i))),
            None => near.extend(locals.iter().enumerate().map(|(i, p)| (dist(p, u), i))),
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        near.truncate(2 * j.len());
        if near.is_empty() {
            return invalid("no mesh point near the iterate");
        }
        let mut acc = vec![0.0; phi.out_dim()];
        let mut wsum = 0.0;
        for &(d, i) in &near {
            let f = &phi.lipschitz_part[&(i + 1)];
            if d == 0.0 {
                return Ok(f.clone());
            }
            let w = 1.0 / (d * d);
            wsum += w;
            acc.iter_mut().zip(f).for_each(|(a, v)| *a += w * v);
        }
        Ok(acc.into_iter().map(|a| a / wsum).collect())
    };
    let embed = |u: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (v, &c) in u.iter().zip(j) {
            x[c - 1] = r * v;
        }
        x
    };
    let eval = |u: &[f64]| -> Result<Vec<f64>> {
        let mut y = phi.base.apply(&embed(u));
        for (a, b) in y.iter_mut().zip(interp(u)?) {
            *a += b;
        }
        Ok(y.iter().zip(&target).map(|(a, b)| a - b).collect())
    };
    let cols: Vec<usize> = j.iter().map(|c| c - 1).collect();
    let lj = phi.base.restrict_columns(&cols);
    if residual >= tol {
        let mut fu = eval(&u)?;
        residual = norm(&fu);
        while steps < MAX_STEPS && residual >= tol * 1e-3 {
            steps += 1;
            let tangent = tangent_basis(&u);
            // A = r · L_J · T, columns are images of tangent directions
            let a: Vec<Vec<f64>> = lj
                .iter()
                .map(|row| tangent.iter().map(|t| r * dot(row, t)).collect())
                .collect();
            let Some(delta) = least_squares_step(&a, &fu) else {
                break;
            };
            let mut trial: Vec<f64> = u.clone();
            for (t, d) in tangent.iter().zip(&delta) {
                trial.iter_mut().zip(t).for_each(|(x, v)| *x -= d * v);
            }
            let len = norm(&trial);
            trial.iter_mut().for_each(|x| *x /= len);
            let ft = eval(&trial)?;
            let rt = norm(&ft);
            if rt >= residual {
                break;
            }
            u = trial;
            fu = ft;
            residual = rt;
        }
        if residual > mesh_residual {
            u = local(mesh.point(mesh_index));
            residual = mesh_residual;
        }
    }
    Ok(PreimageSearch {
        y: (residual < tol).then(|| embed(&u)),
        residual,
        mesh_index,
        mesh_residual,
        steps,
    })
}

fn nearest_spacing(points: &[Vec<f64>]) -> f64 {
    // a cheap upper bound on the mesh spacing: the closest of a few samples
    let step = (points.len() / 64).max(1);
    let mut worst: f64 = 0.0;
    for i in (0..points.len()).step_by(step) {
        let d = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| dist(p, &points[i]))
            .fold(f64::INFINITY, f64::min);
        if d.is_finite() {
            worst = worst.max(d);
        }
    }
    worst.max(1e-12)
}

fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let m = u.len();
    let mut vs = vec![u.to_vec()];
    vs.extend((0..m).map(|i| unit_vector(m, i)));
    orthonormalize(&vs, 1e-8).into_iter().skip(1).take(m - 1).collect()
}

/// Minimum-norm-ish step solving `A δ ≈ F` through damped normal equations.
fn least_squares_step(a: &[Vec<f64>], f: &[f64]) -> Option<Vec<f64>> {
    let c = a.first()?.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let lambda = 1e-12 * scale * scale;
    let ata: Vec<Vec<f64>> = (0..c)
        .map(|p| {
            (0..c)
                .map(|q| a.iter().map(|row| row[p] * row[q]).sum::<f64>() + if p == q { lambda } else { 0.0 })
                .collect()
        })
        .collect();
    let atf: Vec<f64> = (0..c).map(|p| a.iter().zip(f).map(|(row, v)| row[p] * v).sum()).collect();
    solve(&ata, &atf).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_e, LinearOperator};

    #[test]
    fn linear_kernel_is_found() {
        let j = [1, 2, 3];
        let r = 0.25;
        let mesh = sphere_mesh(3, &j, r, r / 100.0).unwrap();
        for s in 0..5 {
            let l = sample_e(3, 2, s).unwrap();
            let phi = AffinePerturbation::linear(l.clone());
            let out = perturbed_preimage_search(&phi, &mesh, &j, r).unwrap();
            let y = out.y.expect("kernel point");
            assert!((norm(&y) - r).abs() < 1e-12);
            assert!(norm(&l.apply(&y)) < 1e-8, "{}", out.residual);
            // oracle: ±r times the kernel vector
            let w = &l.kernel_basis()[0];
            let c = dot(&y, w).abs() / r;
            assert!((c - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn killed_span_gives_zero_residual() {
        let mesh = sphere_mesh(4, &[1, 2, 3], 0.5, 0.05).unwrap();
        let l = LinearOperator::new(vec![vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 0.5]]).unwrap();
        let out = perturbed_preimage_search(&AffinePerturbation::linear(l), &mesh, &[1, 2, 3], 0.5).unwrap();
        assert_eq!(out.mesh_residual, 0.0);
        assert!(out.y.is_some());
    }

    #[test]
    fn small_bump_still_found() {
        let j = [1, 2, 3];
        let r = 0.5;
        let mesh = sphere_mesh(3, &j, r, r / 100.0).unwrap();
        let l = sample_e(3, 2, 7).unwrap();
        let amp = 0.01;
        let phi = AffinePerturbation::tabulate(l, &mesh, amp / 0.2, |x| {
            let b = (1.0 - norm(x) / 0.2).max(0.0);
            let c = (x[0] * 3.0).sin();
            vec![amp * b + 0.002 * c, -amp * b]
        })
        .unwrap();
        let out = perturbed_preimage_search(&phi, &mesh, &j, r).unwrap();
        assert!(out.y.is_some(), "residual {}", out.residual);
    }
}
