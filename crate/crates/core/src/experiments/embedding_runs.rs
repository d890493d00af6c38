//! transversality, collision-scaling, holder-ceiling, log-lip, decode-sparse
//! and dense-ball-discontinuity.
//!
//! Maps are drawn per trial as `sample_e(N, k, derive_seed(seed, m))`, so a
//! run's results do not depend on the thread schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::report::{loglog, num, Check, Table};
use super::{invalid_config, lab, parse, to_value, Output, RunError};
use crate::constructions::sphere_net::{NetMethod, SeparationLaw, ShellLaws};
use crate::constructions::{dense_ball_atoms, sparse_atoms, sphere_net_union};
use crate::embedding::collision::modulus_from_images;
use crate::embedding::holder::{holder_sweep, log_lipschitz_from_images};
use crate::embedding::{
    collision_probability, image_rms, origin_holder_lattice, recovery_fraction, transversality_fraction,
    CollisionProbability, Normalization, TransversalityReport,
};
use crate::linalg::{dot, sample_e, unit_vector, LinearOperator};
use crate::random::derive_seed;

fn map_for(n: usize, k: usize, seed: u64, m: usize) -> Result<LinearOperator, RunError> {
    sample_e(n, k, derive_seed(seed, m as u64)).map_err(lab)
}

/// Fraction of `xs` satisfying `pred`.
fn frac(xs: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().filter(|x| pred(**x)).count() as f64 / xs.len() as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Lower-type empirical quantile of a sorted copy.
fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).floor() as usize]
}

fn pow2_grid(j_hi: i32, j_lo: i32) -> Vec<f64> {
    (j_hi..=j_lo).map(|j| (2f64).powi(-j)).collect()
}

// --------------------------------------------------------- transversality

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransversalityConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    /// Defaults to `e₁`.
    pub x: Option<Vec<f64>>,
    /// Defaults to the origin of `R^k`.
    pub z: Option<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub n_maps: usize,
    pub slope_tol: f64,
    /// Allowed relative spread of each per-ε constant around their median.
    pub c_hat_tol: f64,
}

impl Default for TransversalityConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: 2,
            x: None,
            z: None,
            epsilons: pow2_grid(3, 7),
            n_maps: 100_000,
            slope_tol: 0.15,
            c_hat_tol: 0.2,
        }
    }
}

pub fn transversality_run(cfg: &TransversalityConfig, seed: u64) -> Result<TransversalityReport, RunError> {
    let x = cfg.x.clone().unwrap_or_else(|| unit_vector(cfg.n, 0));
    let z = cfg.z.clone().unwrap_or_else(|| vec![0.0; cfg.k]);
    if x.len() != cfg.n || z.len() != cfg.k {
        return invalid_config("x must have length N and z length k");
    }
    transversality_fraction(&x, &z, &cfg.epsilons, cfg.n_maps, seed).map_err(lab)
}

pub fn transversality(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: TransversalityConfig = parse(v)?;
    let r = transversality_run(&cfg, seed)?;
    let expected = cfg.k as f64;
    let mut checks = Vec::new();
    match &r.fit {
        Some(f) => checks.push(Check::new(
            "epsilon slope",
            (f.slope - expected).abs() <= cfg.slope_tol,
            format!("slope {:.4}, expected {expected} ± {}", f.slope, cfg.slope_tol),
        )),
        None => checks.push(Check::new("epsilon slope", false, "fewer than 3 nonzero fractions")),
    }
    let med = quantile(&r.c_hat_per_epsilon, 0.5);
    let worst = r
        .c_hat_per_epsilon
        .iter()
        .map(|c| (c / med - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "constant stable",
        r.c_hat.is_finite() && med > 0.0 && worst <= cfg.c_hat_tol,
        format!("median C_hat {med:.4}, worst relative deviation {worst:.3} (tol {})", cfg.c_hat_tol),
    ));
    let mut table = Table::new("transversality", &["epsilon", "fraction", "c_hat", "ci_lo", "ci_hi"]);
    for i in 0..r.epsilons.len() {
        table.push(vec![
            num(r.epsilons[i]),
            num(r.fractions[i]),
            num(r.c_hat_per_epsilon[i]),
            num(r.intervals[i].0),
            num(r.intervals[i].1),
        ]);
    }
    let plot = loglog(
        "transversality",
        "P(|Lx + z| <= eps)",
        "eps",
        "fraction",
        vec![("empirical".into(), r.epsilons.clone(), r.fractions.clone())],
    );
    Ok(Output {
        checks,
        results: to_value(&r),
        tables: vec![table],
        plots: vec![plot],
    })
}

// ------------------------------------------------------ collision-scaling

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollisionScalingConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub i_max: u32,
    /// Index of the base point in the net (0 is the origin).
    pub base: usize,
    pub delta: f64,
    pub epsilons: Vec<f64>,
    pub n_maps: usize,
    /// Exponent loss in the bound curve `D δ^{−k} ε^{k−1−θ}`.
    pub theta: f64,
    pub min_slope: f64,
}

impl Default for CollisionScalingConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: 2,
            t: 2.0,
            i_max: 8,
            base: 0,
            delta: 0.25,
            epsilons: pow2_grid(6, 10),
            n_maps: 2000,
            theta: 0.1,
            min_slope: 0.7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionScalingOutcome {
    pub probability: CollisionProbability,
    /// Calibrated so the curve meets the fraction at the largest ε.
    pub d_hat: f64,
    pub bound: Vec<f64>,
    pub n_points: usize,
    pub provenance: String,
}

pub fn collision_scaling_run(cfg: &CollisionScalingConfig, seed: u64) -> Result<CollisionScalingOutcome, RunError> {
    let laws = ShellLaws::new(cfg.n, cfg.k, SeparationLaw::Pow2T { t: cfg.t }, cfg.i_max);
    // the net itself is part of the experiment's fixed geometry
    let net = sphere_net_union(&laws, seed).map_err(lab)?;
    let p = collision_probability(&net.points, cfg.base, cfg.k, &cfg.epsilons, cfg.delta, cfg.n_maps, seed)
        .map_err(lab)?;
    let k = cfg.k as f64;
    let curve = |e: f64| cfg.delta.powf(-k) * e.powf(k - 1.0 - cfg.theta);
    let d_hat = p.fractions[0] / curve(p.epsilons[0]);
    let bound = p.epsilons.iter().map(|&e| d_hat * curve(e)).collect();
    Ok(CollisionScalingOutcome {
        d_hat,
        bound,
        n_points: net.points.len(),
        provenance: net.points.provenance_hash(),
        probability: p,
    })
}

pub fn collision_scaling(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: CollisionScalingConfig = parse(v)?;
    let out = collision_scaling_run(&cfg, seed)?;
    let p = &out.probability;
    // relative slack absorbs rounding at the calibration point itself
    let over: Vec<usize> = (0..p.epsilons.len())
        .filter(|&i| p.fractions[i] > out.bound[i] * (1.0 + 1e-12))
        .collect();
    let mut checks = vec![Check::new(
        "below bound curve",
        over.is_empty() && out.d_hat > 0.0,
        format!("D_hat {:.4e}; {} grid values above the curve", out.d_hat, over.len()),
    )];
    match &p.fit {
        Some(f) => checks.push(Check::new(
            "epsilon slope",
            f.slope >= cfg.min_slope,
            format!("slope {:.4} (min {})", f.slope, cfg.min_slope),
        )),
        None => checks.push(Check::new("epsilon slope", false, "fewer than 3 nonzero fractions")),
    }
    let mut table = Table::new("collision_probability", &["epsilon", "fraction", "bound", "ci_lo", "ci_hi"]);
    for i in 0..p.epsilons.len() {
        table.push(vec![
            num(p.epsilons[i]),
            num(p.fractions[i]),
            num(out.bound[i]),
            num(p.intervals[i].0),
            num(p.intervals[i].1),
        ]);
    }
    let plot = loglog(
        "collision_probability",
        "Collision probability against eps",
        "eps",
        "fraction",
        vec![
            ("empirical".into(), p.epsilons.clone(), p.fractions.clone()),
            ("bound".into(), p.epsilons.clone(), out.bound.clone()),
        ],
    );
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![plot],
    })
}

// --------------------------------------------------------- holder-ceiling

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeilingCase {
    pub law: SeparationLaw,
    pub i_max: u32,
    /// `alpha_hat` must not exceed this ...
    pub threshold: f64,
    /// ... for at least this fraction of maps ...
    pub min_fraction: f64,
    /// ... at each of these budgets (others are reported only).
    pub check_ms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderCeilingConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    pub n_maps: usize,
    pub ms: Vec<f64>,
    pub cases: Vec<CeilingCase>,
    /// Lattice shells with more points than this are only searched near the
    /// kernel line.
    pub full_scan_limit: u64,
    /// Also evaluate a materialized greedy net at this depth (no check).
    pub materialized_i_max: Option<u32>,
}

impl Default for HolderCeilingConfig {
    fn default() -> Self {
        let all = vec![1.0, 4.0, 16.0];
        Self {
            n: 3,
            k: 2,
            n_maps: 200,
            ms: all.clone(),
            cases: vec![
                // the finite-depth ceiling approaches 1/t only slowly in i
                CeilingCase {
                    law: SeparationLaw::Pow2T { t: 2.0 },
                    i_max: 20,
                    threshold: 0.6,
                    min_fraction: 0.9,
                    check_ms: all,
                },
                CeilingCase {
                    law: SeparationLaw::Pow2Sq,
                    i_max: 6,
                    threshold: 0.2,
                    min_fraction: 0.9,
                    check_ms: vec![1.0],
                },
            ],
            full_scan_limit: 4_000_000,
            materialized_i_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetRow {
    pub m: f64,
    pub checked: bool,
    pub fraction_below: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CeilingCaseOutcome {
    pub label: String,
    pub threshold: f64,
    pub min_fraction: f64,
    pub budgets: Vec<BudgetRow>,
    /// `alphas[b][m]`: estimate at budget `b` for map `m` (∞ as `null`).
    #[serde(skip)]
    pub alphas: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderCeilingOutcome {
    pub cases: Vec<CeilingCaseOutcome>,
    pub materialized: Option<CeilingCaseOutcome>,
}

fn law_label(law: SeparationLaw, i_max: u32) -> String {
    match law {
        SeparationLaw::Pow2T { t } => format!("pow2t t={t} i_max={i_max}"),
        SeparationLaw::Pow2Sq => format!("pow2sq i_max={i_max}"),
    }
}

fn budget_rows(ms: &[f64], check_ms: &[f64], alphas: &[Vec<f64>], threshold: f64) -> Vec<BudgetRow> {
    ms.iter()
        .zip(alphas)
        .map(|(&m, a)| BudgetRow {
            m,
            checked: check_ms.contains(&m),
            fraction_below: frac(a, |x| x <= threshold),
            q10: quantile(a, 0.1),
            q50: quantile(a, 0.5),
            q90: quantile(a, 0.9),
        })
        .collect()
}

pub fn holder_ceiling_run(cfg: &HolderCeilingConfig, seed: u64) -> Result<HolderCeilingOutcome, RunError> {
    if cfg.n_maps == 0 {
        return invalid_config("n_maps must be positive");
    }
    let maps: Vec<LinearOperator> = (0..cfg.n_maps).map(|m| map_for(cfg.n, cfg.k, seed, m)).collect::<Result<_, _>>()?;
    let mut cases = Vec::new();
    for c in &cfg.cases {
        let laws = ShellLaws::new(cfg.n, cfg.k, c.law, c.i_max).with_method(NetMethod::Lattice);
        let per_map: Vec<Vec<f64>> = maps
            .par_iter()
            .map(|l| {
                origin_holder_lattice(&laws, l, &cfg.ms, cfg.full_scan_limit as u128)
                    .map(|h| h.estimates.iter().map(|e| e.alpha_or_inf()).collect())
            })
            .collect::<crate::Result<_>>()
            .map_err(lab)?;
        let alphas: Vec<Vec<f64>> = (0..cfg.ms.len()).map(|b| per_map.iter().map(|v| v[b]).collect()).collect();
        cases.push(CeilingCaseOutcome {
            label: law_label(c.law, c.i_max),
            threshold: c.threshold,
            min_fraction: c.min_fraction,
            budgets: budget_rows(&cfg.ms, &c.check_ms, &alphas, c.threshold),
            alphas,
        });
    }
    let materialized = match (cfg.materialized_i_max, cfg.cases.first()) {
        (Some(i_max), Some(c)) => {
            let laws = ShellLaws::new(cfg.n, cfg.k, c.law, i_max);
            let net = sphere_net_union(&laws, seed).map_err(lab)?;
            let per_map: Vec<Vec<f64>> = maps
                .par_iter()
                .map(|l| {
                    let images: Vec<Vec<f64>> = net.points.points().iter().map(|p| l.apply(p)).collect();
                    holder_sweep(&net.points, &images, 0, &cfg.ms, Normalization::Raw)
                        .map(|v| v.iter().map(|e| e.alpha_or_inf()).collect())
                })
                .collect::<crate::Result<_>>()
                .map_err(lab)?;
            let alphas: Vec<Vec<f64>> = (0..cfg.ms.len()).map(|b| per_map.iter().map(|v| v[b]).collect()).collect();
            Some(CeilingCaseOutcome {
                label: format!("materialized greedy {}", law_label(c.law, i_max)),
                threshold: c.threshold,
                min_fraction: c.min_fraction,
                budgets: budget_rows(&cfg.ms, &[], &alphas, c.threshold),
                alphas,
            })
        }
        _ => None,
    };
    Ok(HolderCeilingOutcome { cases, materialized })
}

pub fn holder_ceiling(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: HolderCeilingConfig = parse(v)?;
    let out = holder_ceiling_run(&cfg, seed)?;
    let mut checks = Vec::new();
    let mut table = Table::new("holder_ceiling", &["case", "map", "m", "alpha_hat"]);
    let mut quant = Table::new("holder_quantiles", &["case", "m", "checked", "fraction_below", "q10", "q50", "q90"]);
    let all: Vec<&CeilingCaseOutcome> = out.cases.iter().chain(out.materialized.iter()).collect();
    for c in &all {
        for b in &c.budgets {
            if b.checked {
                checks.push(Check::new(
                    format!("{} M={}", c.label, b.m),
                    b.fraction_below >= c.min_fraction,
                    format!(
                        "{:.3} of maps with alpha_hat <= {} (need {})",
                        b.fraction_below, c.threshold, c.min_fraction
                    ),
                ));
            }
            quant.push(vec![
                c.label.clone(),
                num(b.m),
                b.checked.to_string(),
                num(b.fraction_below),
                num(b.q10),
                num(b.q50),
                num(b.q90),
            ]);
        }
        for (bi, a) in c.alphas.iter().enumerate() {
            for (mi, x) in a.iter().enumerate() {
                table.push(vec![c.label.clone(), mi.to_string(), num(cfg.ms[bi]), num(*x)]);
            }
        }
    }
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table, quant],
        plots: vec![],
    })
}

// ---------------------------------------------------------------- log-lip

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogLipConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub n_atoms: usize,
    pub n_maps: usize,
    pub m: f64,
    pub alpha_min: f64,
    /// Mean over maps of the weighted fraction with `alpha_hat ≥ alpha_min`.
    pub min_weighted_fraction: f64,
    pub eta: f64,
    pub theta: f64,
    /// `R` of the modulus; defaults to the atoms' diameter.
    pub r: Option<f64>,
    pub min_positive_fraction: f64,
}

impl Default for LogLipConfig {
    fn default() -> Self {
        Self {
            n: 8,
            s: 2,
            k: 4,
            n_atoms: 1000,
            n_maps: 100,
            m: 16.0,
            alpha_min: 0.9,
            min_weighted_fraction: 0.95,
            eta: 2.0,
            theta: 1.0,
            r: None,
            min_positive_fraction: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLipMap {
    pub weighted_fraction: f64,
    pub min_alpha: f64,
    pub positive_c_hat: usize,
    pub min_c_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLipOutcome {
    pub maps: Vec<LogLipMap>,
    pub mean_weighted_fraction: f64,
    pub positive_fraction: f64,
    pub r: f64,
}

pub fn log_lip_run(cfg: &LogLipConfig, seed: u64) -> Result<LogLipOutcome, RunError> {
    let atoms = sparse_atoms(cfg.n, cfg.s, cfg.n_atoms, seed).map_err(lab)?;
    let ps = atoms.support();
    let diam = ps.diameter();
    let r = cfg.r.unwrap_or(diam);
    let w = atoms.weights();
    let maps = (0..cfg.n_maps)
        .map(|m| {
            let l = map_for(cfg.n, cfg.k, seed, m)?;
            let images: Vec<Vec<f64>> = ps.points().iter().map(|p| l.apply(p)).collect();
            let rows: Vec<(f64, f64)> = (0..ps.len())
                .into_par_iter()
                .map(|x| {
                    let a = holder_sweep(ps, &images, x, &[cfg.m], Normalization::Raw)?[0].alpha_or_inf();
                    let c = log_lipschitz_from_images(ps, &images, diam, x, r, cfg.eta, cfg.theta)?.c_hat;
                    Ok((a, c))
                })
                .collect::<crate::Result<_>>()
                .map_err(lab)?;
            Ok(LogLipMap {
                weighted_fraction: rows
                    .iter()
                    .zip(w)
                    .filter(|((a, _), _)| *a >= cfg.alpha_min)
                    .map(|(_, w)| w)
                    .sum(),
                min_alpha: rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
                positive_c_hat: rows.iter().filter(|r| r.1 > 0.0).count(),
                min_c_hat: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let wf: Vec<f64> = maps.iter().map(|m| m.weighted_fraction).collect();
    let pos: usize = maps.iter().map(|m| m.positive_c_hat).sum();
    Ok(LogLipOutcome {
        mean_weighted_fraction: mean(&wf),
        positive_fraction: pos as f64 / (cfg.n_maps * ps.len()).max(1) as f64,
        maps,
        r,
    })
}

pub fn log_lip(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: LogLipConfig = parse(v)?;
    let out = log_lip_run(&cfg, seed)?;
    let checks = vec![
        Check::new(
            "holder exponent",
            out.mean_weighted_fraction >= cfg.min_weighted_fraction,
            format!(
                "mean weighted fraction with alpha_hat >= {} at M={}: {:.4} (need {})",
                cfg.alpha_min, cfg.m, out.mean_weighted_fraction, cfg.min_weighted_fraction
            ),
        ),
        Check::new(
            "log-lipschitz constant positive",
            out.positive_fraction >= cfg.min_positive_fraction,
            format!("{:.4} of atoms with C_hat > 0 (need {})", out.positive_fraction, cfg.min_positive_fraction),
        ),
    ];
    let mut table = Table::new("log_lip", &["map", "weighted_fraction", "min_alpha", "positive_c_hat", "min_c_hat"]);
    for (i, m) in out.maps.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(m.weighted_fraction),
            num(m.min_alpha),
            m.positive_c_hat.to_string(),
            num(m.min_c_hat),
        ]);
    }
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![],
    })
}

// ---------------------------------------------------------- decode-sparse

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecodeConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub s: usize,
    pub k: usize,
    /// A second, undersampled target dimension (`k ≤ s`).
    pub k_control: Option<usize>,
    pub n_atoms: usize,
    pub n_maps: usize,
    /// Noise standard deviation as a fraction of the image RMS norm.
    pub relative_noise: f64,
    pub min_recovery: f64,
    pub max_control_recovery: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            n: 10,
            s: 2,
            k: 4,
            k_control: Some(2),
            n_atoms: 1000,
            n_maps: 100,
            relative_noise: 0.02,
            min_recovery: 0.99,
            max_control_recovery: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeArm {
    pub k: usize,
    pub mean_weighted: f64,
    pub min_weighted: f64,
    pub per_map: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub main: DecodeArm,
    pub control: Option<DecodeArm>,
}

fn decode_arm(cfg: &DecodeConfig, k: usize, seed: u64) -> Result<DecodeArm, RunError> {
    let atoms = sparse_atoms(cfg.n, cfg.s, cfg.n_atoms, seed).map_err(lab)?;
    // one seed stream per arm so the control does not reuse the main maps
    let arm_seed = derive_seed(seed, k as u64);
    let per_map: Vec<f64> = (0..cfg.n_maps)
        .map(|m| {
            let l = map_for(cfg.n, k, arm_seed, m)?;
            let noise = cfg.relative_noise * image_rms(&atoms, &l);
            let r = recovery_fraction(&atoms, &l, noise, derive_seed(arm_seed ^ 0xDEC0DE, m as u64)).map_err(lab)?;
            Ok(r.weighted)
        })
        .collect::<Result<_, RunError>>()?;
    Ok(DecodeArm {
        k,
        mean_weighted: mean(&per_map),
        min_weighted: per_map.iter().copied().fold(f64::INFINITY, f64::min),
        per_map,
    })
}

pub fn decode_sparse_run(cfg: &DecodeConfig, seed: u64) -> Result<DecodeOutcome, RunError> {
    Ok(DecodeOutcome {
        main: decode_arm(cfg, cfg.k, seed)?,
        control: cfg.k_control.map(|k| decode_arm(cfg, k, seed)).transpose()?,
    })
}

pub fn decode_sparse(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: DecodeConfig = parse(v)?;
    let out = decode_sparse_run(&cfg, seed)?;
    let mut checks = vec![Check::new(
        format!("recovery k={}", out.main.k),
        out.main.mean_weighted >= cfg.min_recovery,
        format!("mean weighted recovery {:.4} (need {})", out.main.mean_weighted, cfg.min_recovery),
    )];
    if let Some(c) = &out.control {
        checks.push(Check::new(
            format!("degraded k={}", c.k),
            c.mean_weighted < cfg.max_control_recovery,
            format!("mean weighted recovery {:.4} (must be below {})", c.mean_weighted, cfg.max_control_recovery),
        ));
    }
    let mut table = Table::new("recovery", &["k", "map", "weighted"]);
    for arm in std::iter::once(&out.main).chain(out.control.iter()) {
        for (i, w) in arm.per_map.iter().enumerate() {
            table.push(vec![arm.k.to_string(), i.to_string(), num(*w)]);
        }
    }
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![],
    })
}

// ----------------------------------------------- dense-ball-discontinuity

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DenseBallConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    pub n_atoms: usize,
    pub decay: f64,
    pub n_maps: usize,
    pub delta: f64,
    /// Extra δ values reported in the modulus table.
    pub deltas: Vec<f64>,
    pub max_ratio: f64,
    pub min_fraction: f64,
    /// A map straddles when each side of its kernel holds at least this
    /// fraction of the atoms.
    pub straddle_fraction: f64,
}

impl Default for DenseBallConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: 1,
            n_atoms: 2000,
            decay: 0.999,
            n_maps: 100,
            delta: 0.5,
            deltas: vec![0.125, 0.25, 0.5, 1.0, 1.5],
            max_ratio: 1e-2,
            min_fraction: 0.9,
            straddle_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseBallMap {
    pub straddles: bool,
    /// `ε(δ)/δ` at the checked δ; `None` when no pair is that far apart.
    pub ratio: Option<f64>,
    pub modulus: Vec<(f64, Option<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseBallOutcome {
    pub maps: Vec<DenseBallMap>,
    pub n_straddling: usize,
    pub fraction_below: f64,
}

fn straddles(points: &[Vec<f64>], l: &LinearOperator, min_side: f64) -> bool {
    // one side of each kernel hyperplane `⟨ℓ_r, x⟩ = 0` (k = 1 in the usual
    // setup; for k > 1 every row's hyperplane must straddle)
    l.rows().iter().all(|row| {
        let pos = points.iter().filter(|p| dot(row, p) > 0.0).count();
        let neg = points.iter().filter(|p| dot(row, p) < 0.0).count();
        let need = min_side * points.len() as f64;
        pos as f64 >= need && neg as f64 >= need
    })
}

pub fn dense_ball_run(cfg: &DenseBallConfig, seed: u64) -> Result<DenseBallOutcome, RunError> {
    let atoms = dense_ball_atoms(cfg.n, cfg.n_atoms, cfg.decay, seed).map_err(lab)?;
    let ps = atoms.support();
    let mut deltas = cfg.deltas.clone();
    if !deltas.contains(&cfg.delta) {
        deltas.push(cfg.delta);
    }
    deltas.sort_by(f64::total_cmp);
    let maps: Vec<DenseBallMap> = (0..cfg.n_maps)
        .into_par_iter()
        .map(|m| {
            let l = map_for(cfg.n, cfg.k, seed, m)?;
            let images: Vec<Vec<f64>> = ps.points().iter().map(|p| l.apply(p)).collect();
            let rows = modulus_from_images(ps, &images, &deltas).map_err(lab)?;
            let ratio = rows
                .iter()
                .find(|r| r.delta == cfg.delta)
                .and_then(|r| r.epsilon)
                .map(|e| e / cfg.delta);
            Ok(DenseBallMap {
                straddles: straddles(ps.points(), &l, cfg.straddle_fraction),
                ratio,
                modulus: rows.iter().map(|r| (r.delta, r.epsilon)).collect(),
            })
        })
        .collect::<Result<_, RunError>>()?;
    let straddling: Vec<&DenseBallMap> = maps.iter().filter(|m| m.straddles).collect();
    let below = straddling
        .iter()
        .filter(|m| m.ratio.is_some_and(|r| r < cfg.max_ratio))
        .count();
    Ok(DenseBallOutcome {
        n_straddling: straddling.len(),
        fraction_below: below as f64 / straddling.len().max(1) as f64,
        maps,
    })
}

pub fn dense_ball_discontinuity(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: DenseBallConfig = parse(v)?;
    let out = dense_ball_run(&cfg, seed)?;
    let checks = vec![Check::new(
        "modulus collapses",
        out.n_straddling > 0 && out.fraction_below >= cfg.min_fraction,
        format!(
            "{:.3} of {} straddling maps with eps(delta)/delta < {} at delta = {} (need {})",
            out.fraction_below, out.n_straddling, cfg.max_ratio, cfg.delta, cfg.min_fraction
        ),
    )];
    let mut table = Table::new("modulus", &["map", "straddles", "delta", "epsilon"]);
    for (i, m) in out.maps.iter().enumerate() {
        for (d, e) in &m.modulus {
            table.push(vec![i.to_string(), m.straddles.to_string(), num(*d), e.map_or("none".into(), num)]);
        }
    }
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![],
    })
}
