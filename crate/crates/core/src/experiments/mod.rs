//! Named experiments: each parses a JSON config, runs against the library
//! and returns a [`Report`] with pass/fail checks, tables and plots.
//!
//! Every experiment also has a typed entry point (`*_run`) taking its config
//! struct, for use from code.

pub mod dimension_runs;
pub mod embedding_runs;
pub mod report;
pub mod slicing_runs;
pub mod svg;

use std::time::Instant;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub use report::{config_hash, Check, Report, Table};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("unknown experiment '{0}' (known: {known})", known = NAMES.join(", "))]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lab(#[from] Error),
}

/// What an experiment hands back before it is wrapped into a report.
#[derive(Debug, Default)]
pub struct Output {
    pub checks: Vec<Check>,
    pub results: Value,
    pub tables: Vec<Table>,
    pub plots: Vec<svg::Plot>,
}

type Runner = fn(Value, u64) -> Result<Output, RunError>;

struct Entry {
    name: &'static str,
    /// Monte Carlo experiments refuse to run without an explicit seed.
    needs_seed: bool,
    run: Runner,
}

const REGISTRY: [Entry; 12] = [
    Entry { name: "box-dim", needs_seed: false, run: dimension_runs::box_dim },
    Entry { name: "assouad-probe", needs_seed: false, run: dimension_runs::assouad_probe },
    Entry { name: "local-dim", needs_seed: true, run: dimension_runs::local_dim },
    Entry { name: "transversality", needs_seed: true, run: embedding_runs::transversality },
    Entry { name: "collision-scaling", needs_seed: true, run: embedding_runs::collision_scaling },
    Entry { name: "holder-ceiling", needs_seed: true, run: embedding_runs::holder_ceiling },
    Entry { name: "log-lip", needs_seed: true, run: embedding_runs::log_lip },
    Entry { name: "decode-sparse", needs_seed: true, run: embedding_runs::decode_sparse },
    Entry { name: "digit-lemma", needs_seed: false, run: dimension_runs::digit_lemma },
    Entry { name: "all-directions", needs_seed: true, run: slicing_runs::all_directions },
    Entry { name: "ifs-translate", needs_seed: true, run: slicing_runs::ifs_translate },
    Entry {
        name: "dense-ball-discontinuity",
        needs_seed: true,
        run: embedding_runs::dense_ball_discontinuity,
    },
];

pub const NAMES: [&str; 12] = [
    "box-dim",
    "assouad-probe",
    "local-dim",
    "transversality",
    "collision-scaling",
    "holder-ceiling",
    "log-lip",
    "decode-sparse",
    "digit-lemma",
    "all-directions",
    "ifs-translate",
    "dense-ball-discontinuity",
];

/// Runs experiment `name` with `config` (a JSON object; may carry `seed` and
/// `experiment` keys). `seed` overrides the config's seed.
pub fn run(name: &str, config: Value, seed: Option<u64>) -> Result<Report, RunError> {
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| RunError::UnknownExperiment(name.to_string()))?;
    let mut obj = match config {
        Value::Object(m) => m,
        Value::Null => Map::new(),
        _ => return Err(RunError::InvalidConfig("config must be a JSON object".into())),
    };
    if let Some(e) = obj.remove("experiment") {
        if e.as_str() != Some(name) {
            return Err(RunError::InvalidConfig(format!("config is for experiment {e}, not '{name}'")));
        }
    }
    let cfg_seed = match obj.remove("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| RunError::InvalidConfig("seed must be a nonnegative integer".into()))?,
        ),
    };
    let seed = match (seed.or(cfg_seed), entry.needs_seed) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => {
            return Err(RunError::InvalidConfig(format!(
                "experiment '{name}' is Monte Carlo and needs an explicit seed (--seed or \"seed\")"
            )))
        }
    };
    let params = Value::Object(obj);
    let start = Instant::now();
    let out = (entry.run)(params.clone(), seed)?;
    let mut effective = match params {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    effective.insert("seed".into(), Value::from(seed));
    let config = Value::Object(effective);
    Ok(Report {
        experiment: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(&config),
        config,
        seed,
        passed: out.checks.iter().all(|c| c.passed),
        checks: out.checks,
        results: out.results,
        tables: out.tables,
        plots: out.plots,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Deserializes an experiment config, rejecting unknown fields.
pub(crate) fn parse<T: DeserializeOwned>(v: Value) -> Result<T, RunError> {
    serde_json::from_value(v).map_err(|e| RunError::InvalidConfig(e.to_string()))
}

pub(crate) fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("outcome serializes")
}

/// Library errors caused by out-of-range parameters are config errors.
pub(crate) fn lab(e: Error) -> RunError {
    match e {
        Error::InvalidArgument(m)
        | Error::DegenerateWindow(m)
        | Error::EmptyWindow(m)
        | Error::Depth(m)
        | Error::Size(m) => RunError::InvalidConfig(m),
        other => RunError::Lab(other),
    }
}

pub(crate) fn invalid_config<T>(msg: impl Into<String>) -> Result<T, RunError> {
    Err(RunError::InvalidConfig(msg.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_match() {
        assert_eq!(REGISTRY.map(|e| e.name), NAMES);
    }

    #[test]
    fn seed_rules() {
        assert!(matches!(run("nope", Value::Null, None), Err(RunError::UnknownExperiment(_))));
        assert!(matches!(run("decode-sparse", Value::Null, None), Err(RunError::InvalidConfig(_))));
        let bad = serde_json::json!({"experiment": "box-dim"});
        assert!(matches!(run("digit-lemma", bad, None), Err(RunError::InvalidConfig(_))));
        let typo = serde_json::json!({"max_depht": 3});
        assert!(matches!(run("digit-lemma", typo, None), Err(RunError::InvalidConfig(_))));
    }
}
