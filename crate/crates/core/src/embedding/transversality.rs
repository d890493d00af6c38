//! Monte Carlo estimate of `P(‖Lx + z‖ ≤ ε)` for `L` uniform in `E(N, k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{Abscissa, ScalingFit};
use crate::error::{invalid, Result};
use crate::linalg::{norm, sample_e_with};
use crate::random::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub n_maps: usize,
    /// Descending.
    pub epsilons: Vec<f64>,
    pub fractions: Vec<f64>,
    /// `fraction · ‖x‖^k / ε^k` per grid value.
    pub c_hat_per_epsilon: Vec<f64>,
    /// Maximum of the above.
    pub c_hat: f64,
    /// 95% Wilson intervals of the fractions.
    pub intervals: Vec<(f64, f64)>,
    /// Fit over the grid values with a nonzero fraction.
    pub fit: Option<ScalingFit>,
    pub sampler: String,
    pub seed: u64,
}

pub fn transversality_fraction(
    x: &[f64],
    z: &[f64],
    epsilons: &[f64],
    n_maps: usize,
    seed: u64,
) -> Result<TransversalityReport> {
    let n = x.len();
    let k = z.len();
    let xn = norm(x);
    if !(xn > 0.0) {
        return invalid("x must be nonzero");
    }
    if k == 0 || k > n {
        return invalid(format!("target dimension {k} incompatible with N = {n}"));
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return invalid("ε values must be positive");
    }
    if n_maps == 0 {
        return invalid("need at least one map");
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut values: Vec<f64> = (0..n_maps)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng_from_seed(derive_seed(seed, m as u64));
            let l = sample_e_with(n, k, &mut rng).expect("valid dimensions");
            let lx = l.apply(x);
            norm(&lx.iter().zip(z).map(|(a, b)| a + b).collect::<Vec<_>>())
        })
        .collect();
    values.sort_by(f64::total_cmp);
    let fractions: Vec<f64> = eps
        .iter()
        .map(|e| values.partition_point(|v| v <= e) as f64 / n_maps as f64)
        .collect();
    let c_hat_per_epsilon: Vec<f64> = eps
        .iter()
        .zip(&fractions)
        .map(|(e, f)| f * (xn / e).powi(k as i32))
        .collect();
    let intervals = fractions
        .iter()
        .map(|f| super::wilson_interval((f * n_maps as f64).round() as usize, n_maps))
        .collect();
    let c_hat = c_hat_per_epsilon.iter().cloned().fold(0.0, f64::max);
    let (s, f): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(&fractions)
        .filter(|(_, f)| **f > 0.0)
        .map(|(e, f)| (*e, *f))
        .unzip();
    let fit = if s.len() >= 3 {
        ScalingFit::from_table(&s, &f, Abscissa::Log2Scale).ok()
    } else {
        None
    };
    Ok(TransversalityReport {
        n_maps,
        epsilons: eps,
        fractions,
        c_hat_per_epsilon,
        c_hat,
        intervals,
        fit,
        sampler: format!("E({n},{k}) rows uniform in the unit ball"),
        seed,
    })
}
