//! all-directions and ifs-translate.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::report::{num, Check, Table};
use super::svg::{Plot, Series};
use super::{invalid_config, lab, parse, to_value, Output, RunError};
use crate::constructions::{parabola_lift_measure, IfsSpec};
use crate::linalg::{norm, Plane};
use crate::random::derive_seed;
use crate::slicing::{direction_sweep, translate_pair_test, DirectionSummary, SlabWidth, TranslatePairReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TranslatePairConfig {
    pub scale: f64,
    /// Rotation angle of the common linear part.
    pub angle: f64,
    pub t: [f64; 2],
    pub p: f64,
    pub depth: usize,
    pub n_slices: usize,
    pub tau: f64,
    /// Relative margin for "ρ* ≈ ‖t‖" on mixed slices.
    pub tolerance: f64,
    /// Half-width multiple of the image spacing. Below 1 a slab holds only
    /// atoms with the same projection, i.e. one translate pair.
    pub spacing_factor: f64,
    pub min_wide_fraction: f64,
}

impl Default for TranslatePairConfig {
    fn default() -> Self {
        Self {
            scale: 0.6,
            angle: 1.0,
            t: [1.0, 0.0],
            p: 0.5,
            depth: 10,
            n_slices: 200,
            tau: 0.3,
            tolerance: 0.05,
            spacing_factor: 0.5,
            min_wide_fraction: 0.9,
        }
    }
}

/// The line orthogonal to `t`.
fn plane_orthogonal_to(t: [f64; 2]) -> Result<Plane, RunError> {
    let n = norm(&t);
    if !(n > 0.0) {
        return invalid_config("t must be nonzero");
    }
    Plane::from_orthonormal(vec![vec![-t[1] / n, t[0] / n]]).map_err(lab)
}

pub fn translate_pair_run(cfg: &TranslatePairConfig, seed: u64) -> Result<TranslatePairReport, RunError> {
    let spec = IfsSpec::translate_pair(cfg.scale, cfg.angle, cfg.t, cfg.p).map_err(lab)?;
    let plane = plane_orthogonal_to(cfg.t)?;
    let width = SlabWidth::Spacing(cfg.spacing_factor);
    translate_pair_test(&spec, cfg.depth, &plane, width, cfg.n_slices, cfg.tau, cfg.tolerance, seed).map_err(lab)
}

fn wide_fraction(r: &TranslatePairReport) -> f64 {
    if r.mixed == 0 {
        0.0
    } else {
        r.mixed_wide as f64 / r.mixed as f64
    }
}

fn dirac_fraction(r: &TranslatePairReport, resolution: f64) -> f64 {
    r.records.iter().filter(|s| s.rho_star <= resolution).count() as f64 / r.records.len().max(1) as f64
}

// --------------------------------------------------------- all-directions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AllDirectionsConfig {
    pub p: f64,
    pub n_blocks: usize,
    pub n_angles: usize,
    pub n_slices: usize,
    pub spacing_factor: f64,
    pub tau: f64,
    /// Defaults to the smallest distance between atoms.
    pub resolution: Option<f64>,
    pub min_dirac_fraction: f64,
    /// Translate-pair measure that must fail the same test.
    pub control: Option<TranslatePairConfig>,
}

impl Default for AllDirectionsConfig {
    fn default() -> Self {
        Self {
            p: 0.25,
            n_blocks: 12,
            n_angles: 64,
            n_slices: 200,
            spacing_factor: 2.0,
            tau: 0.3,
            resolution: None,
            min_dirac_fraction: 0.95,
            control: Some(TranslatePairConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlOutcome {
    /// Slabs holding a single translate pair.
    pub report: TranslatePairReport,
    /// Under the sweep's own slab rule.
    pub dirac_fraction: f64,
    /// Under the sweep's slab rule every slice has `ρ* ≥ ‖t‖/2` (a ball
    /// narrower than `‖t‖` misses one atom of each pair).
    pub half_spread: bool,
    pub wide_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllDirectionsOutcome {
    pub resolution: f64,
    pub n_atoms: usize,
    pub directions: Vec<DirectionSummary>,
    pub worst_fraction: f64,
    pub control: Option<ControlOutcome>,
}

pub fn all_directions_run(cfg: &AllDirectionsConfig, seed: u64) -> Result<AllDirectionsOutcome, RunError> {
    let pm = parabola_lift_measure(cfg.p, cfg.n_blocks).map_err(lab)?;
    let m = &pm.measure;
    let resolution = match cfg.resolution {
        Some(r) => r,
        None => m
            .support()
            .resolution_floor()
            .ok_or_else(|| RunError::InvalidConfig("measure has a single atom".into()))?,
    };
    let directions = direction_sweep(m, cfg.n_angles, cfg.n_slices, cfg.spacing_factor, cfg.tau, resolution, seed)
        .map_err(lab)?;
    let worst_fraction = directions.iter().map(|d| d.dirac_fraction).fold(1.0, f64::min);
    let control = match &cfg.control {
        Some(c) => {
            let c = TranslatePairConfig {
                tau: cfg.tau,
                ..c.clone()
            };
            let s = derive_seed(seed, u64::MAX);
            // the same slab rule as the sweep, then slabs holding a single pair
            let same = TranslatePairConfig {
                spacing_factor: cfg.spacing_factor,
                ..c.clone()
            };
            let same_rule = translate_pair_run(&same, s)?;
            let report = translate_pair_run(&c, s)?;
            Some(ControlOutcome {
                dirac_fraction: dirac_fraction(&same_rule, resolution),
                half_spread: same_rule
                    .records
                    .iter()
                    .all(|r| r.rho_star >= 0.5 * same_rule.t_norm * (1.0 - c.tolerance)),
                wide_fraction: wide_fraction(&report),
                report,
            })
        }
        None => None,
    };
    Ok(AllDirectionsOutcome {
        resolution,
        n_atoms: m.len(),
        directions,
        worst_fraction,
        control,
    })
}

pub fn all_directions(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: AllDirectionsConfig = parse(v)?;
    let out = all_directions_run(&cfg, seed)?;
    let worst = out
        .directions
        .iter()
        .min_by(|a, b| a.dirac_fraction.total_cmp(&b.dirac_fraction))
        .map_or(0.0, |d| d.angle);
    let mut checks = vec![Check::new(
        "dirac in every direction",
        out.worst_fraction >= cfg.min_dirac_fraction,
        format!(
            "worst direction {worst:.4} rad: {:.3} of slices with rho* <= {:.3e} (need {})",
            out.worst_fraction, out.resolution, cfg.min_dirac_fraction
        ),
    )];
    if let Some(c) = &out.control {
        let need = cfg.control.as_ref().map_or(0.9, |c| c.min_wide_fraction);
        checks.push(Check::new(
            "control fails",
            c.dirac_fraction < cfg.min_dirac_fraction,
            format!("translate pair at V orthogonal to t: {:.3} Dirac slices", c.dirac_fraction),
        ));
        checks.push(Check::new(
            "control spread at least |t|/2",
            c.half_spread,
            "every slab of the sweep's width has rho* >= |t|/2",
        ));
        checks.push(Check::new(
            "control spread is |t|",
            c.report.mixed > 0 && c.wide_fraction >= need,
            format!(
                "{} of {} mixed slices with rho* >= |t|(1 - {})",
                c.report.mixed_wide, c.report.mixed, c.report.tolerance
            ),
        ));
    }
    let mut table = Table::new("directions", &["angle", "n_slices", "dirac_fraction", "median_rho", "max_rho"]);
    for d in &out.directions {
        table.push(vec![
            num(d.angle),
            d.n_slices.to_string(),
            num(d.dirac_fraction),
            num(d.median_rho),
            num(d.max_rho),
        ]);
    }
    let plot = Plot {
        name: "dirac_fraction".into(),
        title: "Dirac slices per direction".into(),
        x_label: "angle (rad)".into(),
        y_label: "fraction".into(),
        log_x: false,
        log_y: false,
        series: vec![Series {
            label: "dirac fraction".into(),
            xs: out.directions.iter().map(|d| d.angle).collect(),
            ys: out.directions.iter().map(|d| d.dirac_fraction).collect(),
        }],
    };
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![plot],
    })
}

// ---------------------------------------------------------- ifs-translate

pub fn ifs_translate(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: TranslatePairConfig = parse(v)?;
    let r = translate_pair_run(&cfg, seed)?;
    let wide = wide_fraction(&r);
    let checks = vec![
        Check::new(
            "slices are translates",
            r.shift_matches == r.n_slices,
            format!("{} of {} slices match under the shift by t", r.shift_matches, r.n_slices),
        ),
        Check::new(
            "mixed slices spread by |t|",
            r.mixed > 0 && wide >= cfg.min_wide_fraction,
            format!("{} of {} mixed slices with rho* >= |t|(1 - {})", r.mixed_wide, r.mixed, cfg.tolerance),
        ),
    ];
    let mut table = Table::new("slices", &["atom", "delta", "raw_mass", "n_atoms", "rho_star"]);
    for s in &r.records {
        table.push(vec![
            s.atom.to_string(),
            num(s.delta),
            num(s.raw_mass),
            s.n_atoms.to_string(),
            num(s.rho_star),
        ]);
    }
    Ok(Output {
        checks,
        results: to_value(&r),
        tables: vec![table],
        plots: vec![],
    })
}
