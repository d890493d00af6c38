//! Two-bit block words, their exact dyadic values, the random dyadic measure
//! and its lift to the parabola `y = x²`, and the digit arithmetic of sums
//! `x + y` of such values.
//!
//! A word `ω` is read in blocks `B_n = {2n−1, 2n}`; a word lies in `Σ` when
//! every left bit `ω_{2n−1}` is zero. Its value is `Π(ω) = Σ ω_j 2^{−j}`.
//! Sums of two `Σ`-values never carry between blocks, so each block of
//! `z = x + y` is `(0,0)`, `(0,1)` or `(1,0)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::points::{AtomicMeasure, PointSet};
use crate::random::rng_from_seed;

/// Largest block count for exhaustive enumeration (2^20 atoms).
pub const MAX_ENUMERATION_BLOCKS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<u8>,
}

impl BitWord {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return invalid(format!("word length {} is not a whole number of blocks", bits.len()));
        }
        if bits.iter().any(|&b| b > 1) {
            return invalid("bits must be 0 or 1");
        }
        Ok(Self { bits })
    }

    /// The `Σ`-word whose block `n` is `(0, right[n])`.
    pub fn from_right_bits(right: &[bool]) -> Self {
        Self {
            bits: right.iter().flat_map(|&b| [0, b as u8]).collect(),
        }
    }

    /// Parses blocks of two bits separated by whitespace: `"01 00 01"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bits = Vec::new();
        for block in text.split_whitespace() {
            if block.len() != 2 {
                return Err(Error::Parse(format!("block {block:?} is not two bits")));
            }
            for c in block.chars() {
                match c {
                    '0' => bits.push(0),
                    '1' => bits.push(1),
                    _ => return Err(Error::Parse(format!("bad bit {c:?}"))),
                }
            }
        }
        Self::from_bits(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn n_blocks(&self) -> usize {
        self.bits.len() / 2
    }

    /// Block `n` (1-based) as `(left, right)`.
    pub fn block(&self, n: usize) -> (u8, u8) {
        (self.bits[2 * n - 2], self.bits[2 * n - 1])
    }

    pub fn in_sigma(&self) -> bool {
        self.bits.iter().step_by(2).all(|&b| b == 0)
    }

    pub fn right_bits(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().skip(1).step_by(2).copied()
    }

    /// Fraction of blocks whose right bit is 1.
    pub fn right_one_frequency(&self) -> f64 {
        if self.n_blocks() == 0 {
            return 0.0;
        }
        self.right_bits().map(|b| b as f64).sum::<f64>() / self.n_blocks() as f64
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .bits
            .chunks(2)
            .map(|c| format!("{}{}", c[0], c[1]))
            .collect();
        write!(f, "{}", blocks.join(" "))
    }
}

/// `numerator / 2^exponent` in canonical form, with value in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(numerator: BigUint, exponent: u32) -> Result<Self> {
        if numerator.bits() > exponent as u64 {
            return invalid("dyadic value must lie in [0, 1)");
        }
        Ok(Self::canonical(numerator, exponent))
    }

    fn canonical(numerator: BigUint, exponent: u32) -> Self {
        if numerator.is_zero() {
            return Self {
                numerator,
                exponent: 0,
            };
        }
        let tz = numerator.trailing_zeros().unwrap_or(0).min(exponent as u64) as u32;
        Self {
            numerator: numerator >> tz,
            exponent: exponent - tz,
        }
    }

    pub fn zero() -> Self {
        Self::canonical(BigUint::zero(), 0)
    }

    pub fn from_u128(numerator: u128, exponent: u32) -> Result<Self> {
        Self::new(BigUint::from(numerator), exponent)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Bit `j ≥ 1` of the finite binary expansion (ends in zeros).
    pub fn bit(&self, j: u32) -> u8 {
        if j > self.exponent {
            return 0;
        }
        let shifted = &self.numerator >> (self.exponent - j);
        u8::from(shifted.bit(0))
    }

    /// Sum, which may leave `[0, 1)`; returns the raw pair.
    pub fn add_raw(&self, other: &Self) -> (BigUint, u32) {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        (a + b, e)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let (n, e) = self.add_raw(other);
        Self::new(n, e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::canonical(
            &self.numerator * &other.numerator,
            self.exponent + other.exponent,
        )
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Correctly rounded conversion.
    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.numerator, self.exponent)
    }

    /// Truncation to the first `bits` binary digits.
    pub fn truncate(&self, bits: u32) -> Self {
        if bits >= self.exponent {
            return self.clone();
        }
        Self::canonical(&self.numerator >> (self.exponent - bits), bits)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

fn big_ratio_to_f64(num: &BigUint, exponent: u32) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let bits = num.bits();
    // keep 64 significant bits plus a sticky bit so rounding stays correct
    let (mant, shift) = if bits > 64 {
        let s = bits - 64;
        let top = (num >> s).to_u64().unwrap();
        let sticky = num.trailing_zeros().unwrap_or(0) < s;
        (top | u64::from(sticky), s as i64)
    } else {
        (num.to_u64().unwrap(), 0)
    };
    ldexp(mant as f64, shift - exponent as i64)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Exact `(mantissa, exponent)` with `|x| = mantissa · 2^exponent`.
fn f64_parts(x: f64) -> (BigUint, i64) {
    let bits = x.abs().to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        (BigUint::from(frac), -1074)
    } else {
        (BigUint::from(frac | (1u64 << 52)), exp_field - 1075)
    }
}

/// The exact dyadic value of a double in `[0, 1)`.
pub fn dyadic_from_f64(x: f64) -> Result<DyadicRational> {
    if !(0.0..1.0).contains(&x) {
        return invalid(format!("{x} is not in [0, 1)"));
    }
    let (m, e) = f64_parts(x);
    if e >= 0 {
        return Ok(DyadicRational::canonical(m << e as u64, 0));
    }
    DyadicRational::new(m, (-e) as u32)
}

/// Each block independently `(0,1)` with probability `p`, else `(0,0)`.
pub fn dyadic_word_sample(p: f64, n_blocks: usize, seed: u64) -> Result<BitWord> {
    check_p(p)?;
    let mut rng = rng_from_seed(seed);
    Ok(sample_word_with(p, n_blocks, &mut rng))
}

fn sample_word_with(p: f64, n_blocks: usize, rng: &mut crate::random::LabRng) -> BitWord {
    let right: Vec<bool> = (0..n_blocks).map(|_| rng.random::<f64>() < p).collect();
    BitWord::from_right_bits(&right)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return invalid(format!("p = {p} must lie in (0, 1/2)"));
    }
    Ok(())
}

/// `Π(ω) = Σ ω_j 2^{−j}`, exactly.
pub fn pi_encode(w: &BitWord) -> DyadicRational {
    let len = w.bits.len() as u32;
    let mut num = BigUint::zero();
    for &b in &w.bits {
        num <<= 1u32;
        if b == 1 {
            num += 1u32;
        }
    }
    DyadicRational::canonical(num, len)
}

/// One atom of the lifted measure, exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAtom {
    pub x: DyadicRational,
    pub y: DyadicRational,
    pub weight: DyadicRational,
}

/// The lift of the dyadic measure to the parabola.
#[derive(Clone, Debug)]
pub struct ParabolaMeasure {
    pub p: f64,
    pub n_blocks: usize,
    pub measure: AtomicMeasure,
    /// Exact weights `p^j (1−p)^{n−j}` indexed by the number of ones.
    weights_by_ones: Vec<DyadicRational>,
}

impl ParabolaMeasure {
    /// Atom `i` in exact arithmetic; atoms are ordered by increasing x, so the
    /// bits of `i` (most significant first) are the right bits of the word.
    pub fn exact_atom(&self, i: usize) -> ExactAtom {
        let n = self.n_blocks as u32;
        let x = DyadicRational::canonical(BigUint::from(spread_bits(i as u64, n)), 2 * n);
        let y = x.square();
        let weight = self.weights_by_ones[(i as u64).count_ones() as usize].clone();
        ExactAtom { x, y, weight }
    }

    pub fn word(&self, i: usize) -> BitWord {
        let n = self.n_blocks;
        let right: Vec<bool> = (0..n).map(|m| (i >> (n - 1 - m)) & 1 == 1).collect();
        BitWord::from_right_bits(&right)
    }

    /// Exact total mass check: `Σ_i w_i = 1` in rational arithmetic.
    pub fn total_mass_is_exactly_one(&self) -> bool {
        let n = self.n_blocks;
        let e = self
            .weights_by_ones
            .iter()
            .map(|w| w.exponent)
            .max()
            .unwrap_or(0);
        let mut total = BigUint::zero();
        let mut binom = BigUint::one();
        for (j, w) in self.weights_by_ones.iter().enumerate() {
            total += &binom * (&w.numerator << (e - w.exponent));
            binom = binom * BigUint::from(n - j) / BigUint::from(j + 1);
        }
        total == BigUint::one() << e
    }
}

/// Places bit `m` of `index` (from the top of `n` bits) at position `2m+2` of
/// a `2n`-bit fraction, i.e. the value `Σ b_m 4^{−m}` scaled by `4^n`.
fn spread_bits(index: u64, n: u32) -> u128 {
    let mut out = 0u128;
    for m in 0..n {
        if (index >> (n - 1 - m)) & 1 == 1 {
            out |= 1u128 << (2 * (n - 1 - m));
        }
    }
    out
}

/// All `2^{n_blocks}` atoms `(x, x²)` with their product weights.
pub fn parabola_lift_measure(p: f64, n_blocks: usize) -> Result<ParabolaMeasure> {
    check_p(p)?;
    if n_blocks == 0 {
        return invalid("need at least one block");
    }
    if n_blocks > MAX_ENUMERATION_BLOCKS {
        return Err(Error::Size(format!(
            "{n_blocks} blocks exceed the enumeration limit {MAX_ENUMERATION_BLOCKS}; sample instead"
        )));
    }
    let weights_by_ones = exact_weights(p, n_blocks);
    let wf: Vec<f64> = weights_by_ones.iter().map(DyadicRational::to_f64).collect();
    let n = n_blocks as u32;
    let count = 1usize << n_blocks;
    let scale = 2f64.powi(-2 * n as i32);
    let mut pts = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for i in 0..count {
        let num = spread_bits(i as u64, n);
        let x = num as f64 * scale;
        let y = (num * num) as f64 * scale * scale;
        pts.push(vec![x, y]);
        weights.push(wf[(i as u64).count_ones() as usize]);
    }
    let measure = AtomicMeasure::new(PointSet::new(2, pts)?, weights)?;
    Ok(ParabolaMeasure {
        p,
        n_blocks,
        measure,
        weights_by_ones,
    })
}

/// The dyadic measure itself on `[0, 1)` (enumeration mode).
pub fn dyadic_measure(p: f64, n_blocks: usize) -> Result<AtomicMeasure> {
    let lifted = parabola_lift_measure(p, n_blocks)?;
    let xs: Vec<Vec<f64>> = lifted
        .measure
        .support()
        .points()
        .iter()
        .map(|q| vec![q[0]])
        .collect();
    AtomicMeasure::new(PointSet::new(1, xs)?, lifted.measure.weights().to_vec())
}

/// Empirical lifted measure of `n_atoms` sampled words (for depths beyond the
/// enumeration limit).
pub fn parabola_lift_sample(p: f64, n_blocks: usize, n_atoms: usize, seed: u64) -> Result<AtomicMeasure> {
    check_p(p)?;
    if n_atoms == 0 {
        return invalid("need at least one atom");
    }
    let mut rng = rng_from_seed(seed);
    let pts: Vec<Vec<f64>> = (0..n_atoms)
        .map(|_| {
            let x = pi_encode(&sample_word_with(p, n_blocks, &mut rng));
            vec![x.to_f64(), x.square().to_f64()]
        })
        .collect();
    AtomicMeasure::uniform(PointSet::new(2, pts)?)
}

/// `p^j (1−p)^{n−j}` for `j = 0..=n`, computed from the exact dyadic value of
/// the double `p`.
fn exact_weights(p: f64, n: usize) -> Vec<DyadicRational> {
    let (m, e) = f64_parts(p);
    // p = m / 2^s with s = −e > 0 since p < 1/2
    let s = (-e) as u32;
    let q = (BigUint::one() << s) - &m;
    (0..=n)
        .map(|j| {
            let num = m.pow(j as u32) * q.pow((n - j) as u32);
            DyadicRational::canonical(num, s * n as u32)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockTag {
    /// z-block `(0,0)`: both summands have right bit 0.
    BothZero,
    /// z-block `(1,0)`: both summands have right bit 1.
    BothOne,
    /// z-block `(0,1)`: exactly one summand has right bit 1.
    ExactlyOne,
    /// z-block `(1,1)`: not a sum of two `Σ`-values.
    Infeasible,
}

impl BlockTag {
    pub fn from_block(left: u8, right: u8) -> Self {
        match (left, right) {
            (0, 0) => BlockTag::BothZero,
            (1, 0) => BlockTag::BothOne,
            (0, 1) => BlockTag::ExactlyOne,
            _ => BlockTag::Infeasible,
        }
    }

    pub fn forced_right_bit(self) -> Option<u8> {
        match self {
            BlockTag::BothZero => Some(0),
            BlockTag::BothOne => Some(1),
            _ => None,
        }
    }
}

pub fn block_constraints(z: &DyadicRational, n_blocks: usize) -> Vec<BlockTag> {
    (1..=n_blocks as u32)
        .map(|n| BlockTag::from_block(z.bit(2 * n - 1), z.bit(2 * n)))
        .collect()
}

/// Fractional binary adder: returns `(integer carry, bits)` of `x + y` for
/// equal-length bit strings, bit `i` worth `2^{−(i+1)}`.
pub type Adder = fn(&[u8], &[u8]) -> (u8, Vec<u8>);

pub fn ripple_add(x: &[u8], y: &[u8]) -> (u8, Vec<u8>) {
    let mut out = vec![0u8; x.len()];
    let mut carry = 0u8;
    for i in (0..x.len()).rev() {
        let s = x[i] + y[i] + carry;
        out[i] = s & 1;
        carry = s >> 1;
    }
    (carry, out)
}

/// A deliberately broken adder whose carry lands two places up instead of
/// one; used to show the digit-lemma check has teeth.
pub fn skip_carry_add(x: &[u8], y: &[u8]) -> (u8, Vec<u8>) {
    let mut out = vec![0u8; x.len()];
    let mut pending = [0u8; 2];
    for i in (0..x.len()).rev() {
        let s = x[i] + y[i] + pending[0];
        pending = [pending[1], s >> 1];
        out[i] = s & 1;
    }
    (pending[0] + pending[1], out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigitViolation {
    pub x: String,
    pub y: String,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigitLemmaReport {
    pub depth: usize,
    pub pairs_checked: u64,
    pub violations: Vec<DigitViolation>,
}

pub fn verify_digit_lemma(depth: usize) -> Result<DigitLemmaReport> {
    verify_digit_lemma_with(depth, ripple_add)
}

/// Exhaustive over all `4^depth` pairs of `Σ`-words at `depth` blocks, with
/// `z` produced by `adder`. Checks, per pair:
/// - `z` equals the exact rational sum;
/// - every prefix of `m` blocks of `z` is the sum of the `m`-block prefixes;
/// - each z-block's tag holds for the summands' right bits, and no block is
///   infeasible.
pub fn verify_digit_lemma_with(depth: usize, adder: Adder) -> Result<DigitLemmaReport> {
    if depth == 0 || depth > 12 {
        return invalid(format!("depth {depth} outside 1..=12"));
    }
    let count = 1usize << depth;
    let words: Vec<BitWord> = (0..count)
        .map(|i| {
            let right: Vec<bool> = (0..depth).map(|m| (i >> (depth - 1 - m)) & 1 == 1).collect();
            BitWord::from_right_bits(&right)
        })
        .collect();
    let values: Vec<DyadicRational> = words.iter().map(pi_encode).collect();
    let bits_len = 2 * depth as u32;
    let mut violations = Vec::new();
    let mut pairs = 0u64;
    for (wx, vx) in words.iter().zip(&values) {
        for (wy, vy) in words.iter().zip(&values) {
            pairs += 1;
            let mut flag = |rule: &str| {
                violations.push(DigitViolation {
                    x: wx.to_string(),
                    y: wy.to_string(),
                    rule: rule.to_string(),
                })
            };
            let (carry, zbits) = adder(wx.bits(), wy.bits());
            let exact = vx.add_raw(vy);
            let z_num = {
                let mut n = BigUint::from(carry) << bits_len;
                n += bits_to_big(&zbits);
                n
            };
            let z_raw = DyadicRational::canonical(z_num.clone(), bits_len);
            let exact_c = DyadicRational::canonical(exact.0, exact.1);
            if z_raw != exact_c {
                flag("adder disagrees with the exact sum");
                continue;
            }
            let Ok(z) = DyadicRational::new(z_num, bits_len) else {
                flag("sum left [0, 1)");
                continue;
            };
            for m in 1..=depth as u32 {
                let lhs = z.truncate(2 * m);
                let (sn, se) = vx.truncate(2 * m).add_raw(&vy.truncate(2 * m));
                if lhs != DyadicRational::canonical(sn, se) {
                    flag(&format!("prefix identity fails at block {m}"));
                }
            }
            for (n, tag) in block_constraints(&z, depth).into_iter().enumerate() {
                let (a, b) = (wx.block(n + 1).1, wy.block(n + 1).1);
                let ok = match tag {
                    BlockTag::BothZero => a == 0 && b == 0,
                    BlockTag::BothOne => a == 1 && b == 1,
                    BlockTag::ExactlyOne => a + b == 1,
                    BlockTag::Infeasible => false,
                };
                if !ok {
                    flag(&format!("block {} tagged {:?}", n + 1, tag));
                }
            }
        }
    }
    Ok(DigitLemmaReport {
        depth,
        pairs_checked: pairs,
        violations,
    })
}

fn bits_to_big(bits: &[u8]) -> BigUint {
    let mut n = BigUint::zero();
    for &b in bits {
        n <<= 1u32;
        if b == 1 {
            n += 1u32;
        }
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalCase {
    /// Infinitely many z-blocks force both right bits.
    Forced,
    /// Eventually every z-block is `(0,1)`.
    Frequency,
    /// Some z-block is `(1,1)`: no representation `z = x + y`.
    Infeasible,
    /// `z ∉ [0, 1)`.
    OutOfRange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub case: ExceptionalCase,
    /// Whether the case was read off the exact (eventually periodic) digit
    /// expansion rather than the represented blocks alone.
    pub exact: bool,
}

/// Blocks of `z = −α/β` beyond the word's length searched for a repeating
/// remainder before falling back to the represented blocks.
pub const CYCLE_BUDGET_BLOCKS: usize = 4096;

/// Whether `w` lies in the exceptional set of the pair `x + y = −α/β`.
pub fn exceptional_set_membership(alpha: f64, beta: f64, w: &BitWord) -> Result<bool> {
    Ok(exceptional_set_classify(alpha, beta, w)?.member)
}

pub fn exceptional_set_classify(alpha: f64, beta: f64, w: &BitWord) -> Result<Membership> {
    if beta == 0.0 || !beta.is_finite() || !alpha.is_finite() {
        return invalid("β must be nonzero and both coefficients finite");
    }
    let out_of_range = Membership {
        member: false,
        case: ExceptionalCase::OutOfRange,
        exact: true,
    };
    // z = −α/β ≥ 0 needs α and β of opposite sign (or α = 0)
    if alpha != 0.0 && (alpha > 0.0) == (beta > 0.0) {
        return Ok(out_of_range);
    }
    let (ma, ea) = f64_parts(alpha);
    let (mb, eb) = f64_parts(beta);
    let (num, den) = if ea >= eb {
        (ma << (ea - eb) as u64, mb)
    } else {
        (ma, mb << (eb - ea) as u64)
    };
    if num >= den {
        return Ok(out_of_range);
    }
    let n = w.n_blocks();
    let mut rem = num;
    let mut tags = Vec::new();
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    // exact tail: Some(contains forced block) once the expansion's period is known
    let mut tail_forced: Option<bool> = None;
    let mut tail_infeasible = false;
    let mut cycle_start: Option<usize> = None;
    let budget = n + CYCLE_BUDGET_BLOCKS;
    while tags.len() < budget {
        if rem.is_zero() {
            tail_forced = Some(true);
            break;
        }
        if let Some(&start) = seen.get(&rem) {
            cycle_start = Some(start);
            let period = &tags[start..];
            tail_forced = Some(period.iter().any(|t: &BlockTag| t.forced_right_bit().is_some()));
            tail_infeasible = period.contains(&BlockTag::Infeasible);
            break;
        }
        seen.insert(rem.clone(), tags.len());
        let mut block = [0u8; 2];
        for b in &mut block {
            rem <<= 1u32;
            if rem >= den {
                rem -= &den;
                *b = 1;
            }
        }
        tags.push(BlockTag::from_block(block[0], block[1]));
    }
    let exact = tail_forced.is_some();
    let represented = &tags[..n.min(tags.len())];
    let prefix_infeasible = if exact { &tags[..] } else { represented };
    if tail_infeasible || prefix_infeasible.contains(&BlockTag::Infeasible) {
        return Ok(Membership {
            member: false,
            case: ExceptionalCase::Infeasible,
            exact,
        });
    }
    let forced_case = tail_forced
        .unwrap_or_else(|| represented.iter().any(|t| t.forced_right_bit().is_some()));
    if !w.in_sigma() {
        return Ok(Membership {
            member: false,
            case: if forced_case { ExceptionalCase::Forced } else { ExceptionalCase::Frequency },
            exact,
        });
    }
    // past the computed blocks the expansion repeats its period, or is all
    // (0,0) when it terminates
    let tag_at = |i: usize| match (tags.get(i), cycle_start) {
        (Some(t), _) => *t,
        (None, Some(start)) => tags[start + (i - start) % (tags.len() - start)],
        (None, None) => BlockTag::BothZero,
    };
    if forced_case {
        let member = (0..n).all(|i| match tag_at(i).forced_right_bit() {
            Some(bit) => w.block(i + 1).1 == bit,
            None => true,
        });
        Ok(Membership {
            member,
            case: ExceptionalCase::Forced,
            exact,
        })
    } else {
        Ok(Membership {
            member: w.right_one_frequency() >= 0.5,
            case: ExceptionalCase::Frequency,
            exact,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> BitWord {
        BitWord::parse(s).unwrap()
    }

    fn dy(num: u128, exp: u32) -> DyadicRational {
        DyadicRational::from_u128(num, exp).unwrap()
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_encode(&word("00")), DyadicRational::zero());
        assert_eq!(pi_encode(&word("01")), dy(1, 2));
        assert_eq!(pi_encode(&word("01 01")), dy(5, 4));
        assert_eq!(pi_encode(&word("01 01")).to_f64(), 5.0 / 16.0);
    }

    #[test]
    fn word_text_round_trip() {
        let w = word("01 00 01");
        assert_eq!(w.to_string(), "01 00 01");
        assert!(w.in_sigma());
        assert!(!word("10").in_sigma());
        assert!(BitWord::parse("0 1").is_err());
        assert!(BitWord::parse("02").is_err());
    }

    #[test]
    fn pi_is_injective_on_sigma_words() {
        for depth in 1..=8 {
            let mut seen = std::collections::HashSet::new();
            for i in 0..(1usize << depth) {
                let right: Vec<bool> = (0..depth).map(|m| (i >> m) & 1 == 1).collect();
                assert!(seen.insert(pi_encode(&BitWord::from_right_bits(&right))));
            }
        }
    }

    #[test]
    fn sampled_words_live_in_sigma() {
        let w = dyadic_word_sample(0.25, 100_000, 5).unwrap();
        assert!(w.in_sigma());
        let ones: f64 = w.right_bits().map(f64::from).sum();
        let (n, p) = (100_000.0f64, 0.25f64);
        let sd = (n * p * (1.0 - p)).sqrt();
        assert!((ones - n * p).abs() < 3.0 * sd, "{ones}");
        assert!(dyadic_word_sample(0.5, 3, 0).is_err());
        assert!(dyadic_word_sample(0.0, 3, 0).is_err());
    }

    #[test]
    fn parabola_single_block() {
        let m = parabola_lift_measure(0.25, 1).unwrap();
        let pts = m.measure.support().points();
        assert_eq!(pts, &[vec![0.0, 0.0], vec![0.25, 0.0625]]);
        assert_eq!(m.measure.weights(), &[0.75, 0.25]);
        let a = m.exact_atom(1);
        assert_eq!(a.x, dy(1, 2));
        assert_eq!(a.y, dy(1, 4));
        assert_eq!(a.weight, dy(1, 2));
        assert!(m.total_mass_is_exactly_one());
    }

    #[test]
    fn parabola_exact_agrees_with_floats() {
        let m = parabola_lift_measure(0.3, 8).unwrap();
        assert!(m.total_mass_is_exactly_one());
        for i in [0usize, 1, 77, 255] {
            let a = m.exact_atom(i);
            let q = m.measure.support().point(i);
            assert_eq!(a.x.to_f64(), q[0]);
            assert_eq!(a.y.to_f64(), q[1]);
            assert_eq!(a.weight.to_f64(), m.measure.weights()[i]);
            assert_eq!(pi_encode(&m.word(i)), a.x);
        }
        assert!(matches!(parabola_lift_measure(0.25, 21), Err(Error::Size(_))));
    }

    #[test]
    fn block_tags() {
        assert!(block_constraints(&DyadicRational::zero(), 4)
            .iter()
            .all(|t| *t == BlockTag::BothZero));
        // 10 01 11
        let z = pi_encode(&word("10 01 11"));
        assert_eq!(
            block_constraints(&z, 3),
            vec![BlockTag::BothOne, BlockTag::ExactlyOne, BlockTag::Infeasible]
        );
    }

    #[test]
    fn digit_lemma_holds_and_mutation_is_caught() {
        let r1 = verify_digit_lemma(1).unwrap();
        assert_eq!((r1.pairs_checked, r1.violations.len()), (4, 0));
        let r4 = verify_digit_lemma(4).unwrap();
        assert_eq!((r4.pairs_checked, r4.violations.len()), (256, 0));
        assert!(!verify_digit_lemma_with(2, skip_carry_add).unwrap().violations.is_empty());
    }

    #[test]
    fn f64_to_dyadic_is_exact() {
        let d = dyadic_from_f64(0.1).unwrap();
        assert_eq!(d.to_f64(), 0.1);
        assert_eq!(d.exponent(), 55);
        assert!(dyadic_from_f64(1.0).is_err());
        let tiny = dyadic_from_f64(5e-324).unwrap();
        assert_eq!(tiny.exponent(), 1074);
        assert_eq!(tiny.to_f64(), 5e-324);
    }

    #[test]
    fn membership_forced_case_by_hand() {
        // z = 1/4 = 01 00 00 …; pairs with x + y = 1/4 at depth 3 are
        // (0, 1/4) and (1/4, 0)
        let (alpha, beta) = (-1.0, 4.0);
        let mut members = Vec::new();
        for i in 0..8usize {
            let right: Vec<bool> = (0..3).map(|m| (i >> (2 - m)) & 1 == 1).collect();
            let w = BitWord::from_right_bits(&right);
            let c = exceptional_set_classify(alpha, beta, &w).unwrap();
            assert_eq!(c.case, ExceptionalCase::Forced);
            assert!(c.exact);
            if c.member {
                members.push(w.to_string());
            }
        }
        // hand enumeration: x ∈ X_3 with 1/4 − x ∈ X_3
        let z = dy(1, 2);
        let mut oracle = Vec::new();
        for i in 0..8usize {
            for j in 0..8usize {
                let wx = BitWord::from_right_bits(&(0..3).map(|m| (i >> (2 - m)) & 1 == 1).collect::<Vec<_>>());
                let wy = BitWord::from_right_bits(&(0..3).map(|m| (j >> (2 - m)) & 1 == 1).collect::<Vec<_>>());
                if pi_encode(&wx).checked_add(&pi_encode(&wy)).ok() == Some(z.clone()) {
                    oracle.push(wx.to_string());
                }
            }
        }
        oracle.sort();
        members.sort();
        assert_eq!(members, oracle);
        assert_eq!(members, vec!["00 00 00", "01 00 00"]);
    }

    #[test]
    fn membership_frequency_case() {
        // z = 1/3 = 01 01 01 …
        let all_ones = BitWord::from_right_bits(&[true; 12]);
        let c = exceptional_set_classify(-1.0, 3.0, &all_ones).unwrap();
        assert_eq!(c.case, ExceptionalCase::Frequency);
        assert!(c.exact && c.member);
        let mut hits = 0;
        for s in 0..2000 {
            let w = dyadic_word_sample(0.25, 1000, s).unwrap();
            hits += exceptional_set_membership(-1.0, 3.0, &w).unwrap() as u32;
        }
        assert!(hits as f64 / 2000.0 <= 0.01);
    }

    #[test]
    fn membership_edge_cases() {
        let w = word("01 00");
        assert!(exceptional_set_membership(1.0, 0.0, &w).is_err());
        assert_eq!(
            exceptional_set_classify(1.0, 1.0, &w).unwrap().case,
            ExceptionalCase::OutOfRange
        );
        assert_eq!(
            exceptional_set_classify(-1.0, 1.0, &w).unwrap().case,
            ExceptionalCase::OutOfRange
        );
        // z = 0.75 = 11 00 …
        assert_eq!(
            exceptional_set_classify(-3.0, 4.0, &w).unwrap().case,
            ExceptionalCase::Infeasible
        );
        // α = 0: z = 0 forces every right bit to 0
        assert!(exceptional_set_membership(0.0, 2.0, &word("00 00")).unwrap());
        assert!(!exceptional_set_membership(0.0, 2.0, &word("00 01")).unwrap());
    }
}
