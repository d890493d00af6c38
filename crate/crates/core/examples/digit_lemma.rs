//! Exhaustive check of the block-digit rules for sums of two Σ-words, and a
//! broken adder that the checker must reject.

use projlab::constructions::dyadic::{ripple_add, skip_carry_add, verify_digit_lemma_with};
use projlab::constructions::{block_constraints, pi_encode, BitWord};

fn main() -> projlab::Result<()> {
    for depth in 1..=8 {
        let r = verify_digit_lemma_with(depth, ripple_add)?;
        println!("depth {depth}: {} pairs, {} violations", r.pairs_checked, r.violations.len());
    }
    let broken = verify_digit_lemma_with(3, skip_carry_add)?;
    println!("skip-carry adder: {} violations", broken.violations.len());
    if let Some(v) = broken.violations.first() {
        println!("  e.g. {} + {}: {}", v.x, v.y, v.rule);
    }

    let x = BitWord::from_right_bits(&[true, false, true]);
    let y = BitWord::from_right_bits(&[true, true, false]);
    let z = pi_encode(&x).checked_add(&pi_encode(&y))?;
    println!("{x} + {y} = {z}, block tags {:?}", block_constraints(&z, 3));
    Ok(())
}
