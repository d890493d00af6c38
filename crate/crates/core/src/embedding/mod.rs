//! Injectivity and inverse regularity of maps on finite models.

pub mod collision;
pub mod decode;
pub mod holder;
pub mod preimage;
pub mod transversality;

pub use collision::{
    collision_probability, collision_scan, inverse_continuity_modulus, CollisionPair,
    CollisionProbability, CollisionReport, ModulusRow,
};
pub use decode::{image_rms, nearest_point_decode, recovery_fraction, Recovery};
pub use holder::{
    holder_profile, log_lipschitz_defect, origin_holder_lattice, pointwise_holder, Binding,
    HolderEstimate, ImplicitHolder, LogLipschitzDefect, Normalization,
};
pub use preimage::{perturbed_preimage_search, sphere_mesh, PreimageSearch};
pub use transversality::{transversality_fraction, TransversalityReport};

/// 95% Wilson score interval for `successes` out of `n` trials.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    // the endpoints are exactly 0 and 1 at the extremes; avoid rounding residue
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    #[test]
    fn wilson_reference_values() {
        // 10 of 100: (0.0552, 0.1744)
        let (lo, hi) = super::wilson_interval(10, 100);
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = super::wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.07135).abs() < 1e-4);
    }
}
