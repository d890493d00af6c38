use projlab::constructions::{ifs_atoms, IfsSpec};
use projlab::dimension::{box_dimension_fit, ScalingFit};
use projlab::experiments::{self, config_hash};
use projlab::{AtomicMeasure, PointSet};
use serde_json::{json, Value};

#[test]
fn point_set_csv_round_trip_is_exact() {
    let ps = PointSet::new(3, vec![vec![0.1, -2.5e-300, 1.0 / 3.0], vec![f64::MIN_POSITIVE, 7.0, -0.0]]).unwrap();
    let back = PointSet::from_csv(&ps.to_csv()).unwrap();
    assert_eq!(back.points(), ps.points());
    assert_eq!(back.provenance_hash(), ps.provenance_hash());
}

#[test]
fn measure_csv_round_trip_is_exact() {
    let m = ifs_atoms(&IfsSpec::cantor(), 6).unwrap();
    let back = AtomicMeasure::from_csv(&m.to_csv()).unwrap();
    assert_eq!(back.weights(), m.weights());
    assert_eq!(back.support().points(), m.support().points());
}

#[test]
fn csv_errors_are_reported() {
    assert!(PointSet::from_csv("").is_err());
    assert!(PointSet::from_csv("dim=2\n1,2\n").is_err());
    assert!(PointSet::from_csv("# dim=2 weighted=0\n1,2,3\n").is_err());
    assert!(PointSet::from_csv("# dim=2 weighted=0\n1,x\n").is_err());
    assert!(PointSet::from_csv("# dim=1 weighted=1\n0.5,1\n").is_err());
}

#[test]
fn scaling_fit_json_round_trip() {
    let ps = ifs_atoms(&IfsSpec::cantor(), 8).unwrap();
    let fit = box_dimension_fit(ps.support(), 1.0 / 9.0, 1.0 / 729.0, 5).unwrap();
    let back: ScalingFit = serde_json::from_str(&fit.to_json()).unwrap();
    assert_eq!(back, fit);
    let csv = fit.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,count");
    assert_eq!(lines.len(), 6);
}

#[test]
fn summary_and_tables_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let r = experiments::run("digit-lemma", json!({"max_depth": 4}), None).unwrap();
    r.write(dir.path()).unwrap();
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["experiment"], "digit-lemma");
    assert_eq!(s["config_hash"], config_hash(&s["config"]));
    assert!(s.get("elapsed_seconds").is_none());
    let csv = std::fs::read_to_string(dir.path().join("tables/digit_lemma.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["depth", "pairs_checked", "violations"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][0], "4");
    assert!(rows[1..].iter().all(|r| r[2] == "0"));
}

#[test]
fn plots_are_svg() {
    let dir = tempfile::tempdir().unwrap();
    let r = experiments::run("transversality", json!({"n_maps": 2000, "epsilons": [0.25, 0.125, 0.0625]}), Some(3)).unwrap();
    r.write(dir.path()).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("plots/transversality.svg")).unwrap();
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<circle").count(), 3);
}

#[test]
fn config_hash_ignores_key_order() {
    let a: Value = serde_json::from_str(r#"{"a": 1, "b": [1, 2]}"#).unwrap();
    let b: Value = serde_json::from_str(r#"{"b": [1, 2], "a": 1}"#).unwrap();
    assert_eq!(config_hash(&a), config_hash(&b));
    assert_ne!(config_hash(&a), config_hash(&json!({"a": 2, "b": [1, 2]})));
}
