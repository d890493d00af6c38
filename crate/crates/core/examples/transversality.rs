//! P(|Lx| <= ε) for L uniform in E(3, 2) and x = e1, against the small-ball
//! constant 9π/16 (the density of a uniform point of the unit ball's
//! two-coordinate marginal at the origin, times π).

use projlab::embedding::transversality_fraction;

fn main() -> projlab::Result<()> {
    let eps: Vec<f64> = (3..=7).map(|j| (2f64).powi(-j)).collect();
    let r = transversality_fraction(&[1.0, 0.0, 0.0], &[0.0, 0.0], &eps, 100_000, 1)?;
    println!("{:>10} {:>10} {:>8}  95% interval", "eps", "fraction", "C_hat");
    for i in 0..eps.len() {
        let (lo, hi) = r.intervals[i];
        println!("{:>10.6} {:>10.6} {:>8.4}  [{lo:.6}, {hi:.6}]", r.epsilons[i], r.fractions[i], r.c_hat_per_epsilon[i]);
    }
    if let Some(f) = &r.fit {
        println!("slope {:.3}, analytic constant {:.4}", f.slope, 9.0 * std::f64::consts::PI / 16.0);
    }
    Ok(())
}
