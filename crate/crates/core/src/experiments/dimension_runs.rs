//! box-dim, assouad-probe, local-dim and digit-lemma.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::report::{loglog, num, Check, Table};
use super::{lab, parse, to_value, Output, RunError};
use crate::constructions::dyadic::{skip_carry_add, verify_digit_lemma_with, ripple_add, ParabolaMeasure};
use crate::constructions::sphere_net::{sphere_net_union, NetMethod, SeparationLaw, ShellLaws};
use crate::constructions::{dyadic_measure, parabola_lift_measure};
use crate::dimension::{assouad_probe_grid, box_dimension_fit, dyadic_scales, typical_local_dimension, AssouadProbe, ScalingFit};
use crate::points::PointSet;

// ---------------------------------------------------------------- box-dim

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxCase {
    pub t: f64,
    pub i_max: u32,
    #[serde(default)]
    pub resolution_cap: Option<f64>,
    #[serde(default)]
    pub method: NetMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxDimConfig {
    /// `sphere-net` or `csv`.
    pub preset: String,
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    /// Shorthand for a single sphere-net case (with `i_max`).
    pub t: Option<f64>,
    pub i_max: Option<u32>,
    pub cases: Vec<BoxCase>,
    /// Point set to fit when `preset` is `csv`.
    pub points_csv: Option<String>,
    /// Expected slope for the `csv` preset.
    pub expected: Option<f64>,
    pub delta_max: f64,
    pub delta_min: f64,
    pub n_scales: usize,
    pub slope_tol: f64,
    pub min_r_squared: f64,
}

impl Default for BoxDimConfig {
    fn default() -> Self {
        Self {
            preset: "sphere-net".into(),
            n: 3,
            k: 2,
            t: None,
            i_max: None,
            cases: vec![
                BoxCase {
                    t: 2.0,
                    i_max: 8,
                    resolution_cap: None,
                    method: NetMethod::Greedy,
                },
                // shells finer than a quarter of the window's bottom scale do
                // not change any count in the window
                BoxCase {
                    t: 3.0,
                    i_max: 10,
                    resolution_cap: Some((2f64).powi(-10)),
                    method: NetMethod::Greedy,
                },
            ],
            points_csv: None,
            expected: None,
            delta_max: 0.125,
            delta_min: (2f64).powi(-8),
            n_scales: 6,
            slope_tol: 0.15,
            min_r_squared: 0.98,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCaseOutcome {
    pub label: String,
    pub expected: Option<f64>,
    pub n_points: usize,
    pub provenance: String,
    pub fit: ScalingFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxDimOutcome {
    pub cases: Vec<BoxCaseOutcome>,
}

pub fn box_dim_run(cfg: &BoxDimConfig, seed: u64) -> Result<BoxDimOutcome, RunError> {
    let mut cases = Vec::new();
    match cfg.preset.as_str() {
        "sphere-net" => {
            let list = match cfg.t {
                Some(t) => vec![BoxCase {
                    t,
                    i_max: cfg.i_max.unwrap_or(8),
                    resolution_cap: None,
                    method: NetMethod::Greedy,
                }],
                None => cfg.cases.clone(),
            };
            for c in &list {
                let law = SeparationLaw::Pow2T { t: c.t };
                let mut laws = ShellLaws::new(cfg.n, cfg.k, law, c.i_max).with_method(c.method);
                if let Some(cap) = c.resolution_cap {
                    laws = laws.with_resolution_cap(cap);
                }
                let net = sphere_net_union(&laws, seed).map_err(lab)?;
                let fit = box_dimension_fit(&net.points, cfg.delta_max, cfg.delta_min, cfg.n_scales).map_err(lab)?;
                cases.push(BoxCaseOutcome {
                    label: format!("t={} i_max={}", c.t, c.i_max),
                    expected: Some(law.box_dimension(cfg.k)),
                    n_points: net.points.len(),
                    provenance: net.points.provenance_hash(),
                    fit,
                });
            }
        }
        "csv" => {
            let Some(path) = &cfg.points_csv else {
                return super::invalid_config("preset csv needs points_csv");
            };
            let ps = PointSet::read_csv(path).map_err(lab)?;
            let fit = box_dimension_fit(&ps, cfg.delta_max, cfg.delta_min, cfg.n_scales).map_err(lab)?;
            cases.push(BoxCaseOutcome {
                label: path.clone(),
                expected: cfg.expected,
                n_points: ps.len(),
                provenance: ps.provenance_hash(),
                fit,
            });
        }
        other => return super::invalid_config(format!("unknown box-dim preset '{other}'")),
    }
    Ok(BoxDimOutcome { cases })
}

pub fn box_dim(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: BoxDimConfig = parse(v)?;
    let out = box_dim_run(&cfg, seed)?;
    let mut checks = Vec::new();
    let mut table = Table::new("box_counts", &["case", "delta", "count"]);
    let mut series = Vec::new();
    for c in &out.cases {
        if let Some(e) = c.expected {
            checks.push(Check::new(
                format!("slope {}", c.label),
                (c.fit.slope - e).abs() <= cfg.slope_tol,
                format!("slope {:.4}, expected {:.4} ± {}", c.fit.slope, e, cfg.slope_tol),
            ));
        }
        checks.push(Check::new(
            format!("r2 {}", c.label),
            c.fit.r_squared >= cfg.min_r_squared,
            format!("r² {:.4} (min {})", c.fit.r_squared, cfg.min_r_squared),
        ));
        for r in &c.fit.table {
            table.push(vec![c.label.clone(), num(r.delta), num(r.count)]);
        }
        series.push((
            c.label.clone(),
            c.fit.table.iter().map(|r| r.delta).collect(),
            c.fit.table.iter().map(|r| r.count).collect(),
        ));
    }
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![loglog("box_counts", "Greedy covering numbers", "delta", "N(delta)", series)],
    })
}

// ---------------------------------------------------------- assouad-probe

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssouadConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub i_max: u32,
    pub n_centers: usize,
    pub pairs: Vec<(f64, f64)>,
    /// The probed exponent must not fall below the box dimension by more
    /// than this.
    pub tol: f64,
}

impl Default for AssouadConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: 2,
            t: 2.0,
            i_max: 6,
            n_centers: 64,
            pairs: (1..=5).map(|j| (0.25, 0.25 * (2f64).powi(-j))).collect(),
            tol: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssouadOutcome {
    pub probes: Vec<AssouadProbe>,
    pub fit: ScalingFit,
    pub box_dimension: f64,
    pub provenance: String,
}

pub fn assouad_run(cfg: &AssouadConfig, seed: u64) -> Result<AssouadOutcome, RunError> {
    let law = SeparationLaw::Pow2T { t: cfg.t };
    let laws = ShellLaws::new(cfg.n, cfg.k, law, cfg.i_max);
    let net = sphere_net_union(&laws, seed).map_err(lab)?;
    let (probes, fit) = assouad_probe_grid(&net.points, cfg.n_centers, &cfg.pairs).map_err(lab)?;
    Ok(AssouadOutcome {
        probes,
        fit,
        box_dimension: law.box_dimension(cfg.k),
        provenance: net.points.provenance_hash(),
    })
}

pub fn assouad_probe(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: AssouadConfig = parse(v)?;
    let out = assouad_run(&cfg, seed)?;
    let mut table = Table::new("assouad_probes", &["r", "rho", "max_count", "argmax_center", "exponent"]);
    for p in &out.probes {
        table.push(vec![num(p.r), num(p.rho), p.max_count.to_string(), p.argmax_center.to_string(), num(p.exponent)]);
    }
    let checks = vec![Check::new(
        "exponent at least box dimension",
        out.fit.slope >= out.box_dimension - cfg.tol,
        format!("probe slope {:.4}, box dimension {:.4}", out.fit.slope, out.box_dimension),
    )];
    let series = vec![(
        "max count".to_string(),
        out.probes.iter().map(|p| p.r / p.rho).collect(),
        out.probes.iter().map(|p| p.max_count as f64).collect(),
    )];
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![loglog("assouad_probe", "Localized covering counts", "r/rho", "max count", series)],
    })
}

// -------------------------------------------------------------- local-dim

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalDimConfig {
    pub p: f64,
    pub n_blocks: usize,
    /// `parabola` (the lift to R²) or `dyadic` (the measure on [0, 1)).
    pub measure: String,
    /// Radii `2^{-j}` for `j = j_hi..=j_lo`.
    pub j_hi: i32,
    pub j_lo: i32,
    pub n_samples: usize,
    pub tol: f64,
}

impl Default for LocalDimConfig {
    fn default() -> Self {
        Self {
            p: 0.25,
            n_blocks: 10,
            measure: "dyadic".into(),
            j_hi: 4,
            j_lo: 14,
            n_samples: 256,
            tol: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimOutcome {
    pub expected: f64,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub radii: Vec<f64>,
    pub slopes: Vec<f64>,
}

/// `(−p log p − (1−p) log(1−p)) / log 4`.
pub fn dyadic_entropy_dimension(p: f64) -> f64 {
    (-p * p.ln() - (1.0 - p) * (1.0 - p).ln()) / 4f64.ln()
}

pub fn local_dim_run(cfg: &LocalDimConfig, seed: u64) -> Result<LocalDimOutcome, RunError> {
    let m = match cfg.measure.as_str() {
        "parabola" => {
            let pm: ParabolaMeasure = parabola_lift_measure(cfg.p, cfg.n_blocks).map_err(lab)?;
            pm.measure
        }
        "dyadic" => dyadic_measure(cfg.p, cfg.n_blocks).map_err(lab)?,
        other => return super::invalid_config(format!("unknown measure '{other}'")),
    };
    let radii = dyadic_scales(cfg.j_hi, cfg.j_lo);
    let t = typical_local_dimension(&m, &radii, cfg.n_samples, seed).map_err(lab)?;
    Ok(LocalDimOutcome {
        expected: dyadic_entropy_dimension(cfg.p),
        mean: t.mean,
        median: t.median,
        std_dev: t.std_dev,
        radii,
        slopes: t.slopes,
    })
}

pub fn local_dim(v: Value, seed: u64) -> Result<Output, RunError> {
    let cfg: LocalDimConfig = parse(v)?;
    let out = local_dim_run(&cfg, seed)?;
    let mut table = Table::new("local_slopes", &["sample", "slope"]);
    for (i, s) in out.slopes.iter().enumerate() {
        table.push(vec![i.to_string(), num(*s)]);
    }
    let checks = vec![Check::new(
        "typical local dimension",
        (out.mean - out.expected).abs() <= cfg.tol,
        format!("mean slope {:.4}, expected {:.4} ± {}", out.mean, out.expected, cfg.tol),
    )];
    Ok(Output {
        checks,
        results: to_value(&out),
        tables: vec![table],
        plots: vec![],
    })
}

// ------------------------------------------------------------ digit-lemma

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DigitLemmaConfig {
    pub min_depth: usize,
    #[serde(alias = "depth")]
    pub max_depth: usize,
    pub check_mutation: bool,
    pub mutation_depth: usize,
    pub time_budget_seconds: f64,
}

impl Default for DigitLemmaConfig {
    fn default() -> Self {
        Self {
            min_depth: 1,
            max_depth: 8,
            check_mutation: true,
            mutation_depth: 3,
            time_budget_seconds: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthRow {
    pub depth: usize,
    pub pairs_checked: u64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitLemmaOutcome {
    pub depths: Vec<DepthRow>,
    pub violations: usize,
    /// Violations reported for the broken adder; `None` when not run.
    pub mutation_violations: Option<usize>,
    #[serde(skip)]
    pub seconds: f64,
}

pub fn digit_lemma_run(cfg: &DigitLemmaConfig) -> Result<DigitLemmaOutcome, RunError> {
    if cfg.min_depth == 0 || cfg.min_depth > cfg.max_depth {
        return super::invalid_config("need 1 ≤ min_depth ≤ max_depth");
    }
    let start = Instant::now();
    let mut depths = Vec::new();
    for d in cfg.min_depth..=cfg.max_depth {
        let r = verify_digit_lemma_with(d, ripple_add).map_err(lab)?;
        depths.push(DepthRow {
            depth: d,
            pairs_checked: r.pairs_checked,
            violations: r.violations.len(),
        });
    }
    let mutation_violations = if cfg.check_mutation {
        Some(verify_digit_lemma_with(cfg.mutation_depth, skip_carry_add).map_err(lab)?.violations.len())
    } else {
        None
    };
    Ok(DigitLemmaOutcome {
        violations: depths.iter().map(|d| d.violations).sum(),
        depths,
        mutation_violations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn digit_lemma(v: Value, _seed: u64) -> Result<Output, RunError> {
    let cfg: DigitLemmaConfig = parse(v)?;
    let out = digit_lemma_run(&cfg)?;
    let mut checks = vec![Check::new(
        "no violations",
        out.violations == 0,
        format!("{} violations over depths {}..={}", out.violations, cfg.min_depth, cfg.max_depth),
    )];
    if let Some(m) = out.mutation_violations {
        checks.push(Check::new("mutation caught", m > 0, format!("broken adder: {m} violations")));
    }
    checks.push(Check::new(
        "runtime",
        out.seconds <= cfg.time_budget_seconds,
        format!("budget {} s", cfg.time_budget_seconds),
    ));
    let mut table = Table::new("digit_lemma", &["depth", "pairs_checked", "violations"]);
    for d in &out.depths {
        table.push(vec![d.depth.to_string(), d.pairs_checked.to_string(), d.violations.to_string()]);
    }
    Ok(Output {
        checks,
        results: json!({
            "depths": to_value(&out.depths),
            "violations": out.violations,
            "mutation_violations": out.mutation_violations,
        }),
        tables: vec![table],
        plots: vec![],
    })
}
