use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn projlab(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_projlab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn digit_lemma_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = projlab(dir.path(), &["digit-lemma", "--out", out.to_str().unwrap()], r#"{"depth": 6}"#);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["results"]["violations"], 0);
    assert_eq!(s["passed"], true);
    assert!(out.join("tables/digit_lemma.csv").exists());
}

#[test]
fn box_dim_sphere_net_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = r#"{"experiment": "box-dim", "preset": "sphere-net", "t": 2, "k": 2, "N": 3}"#;
    let o = projlab(dir.path(), &["box-dim", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let slope = summary(&out)["results"]["cases"][0]["fit"]["slope"].as_f64().unwrap();
    assert!((0.85..=1.15).contains(&slope), "{slope}");
    assert!(out.join("plots/box_counts.svg").exists());
}

#[test]
fn unknown_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = projlab(dir.path(), &["unknown"], "{}");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment"));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (args, cfg) in [
        (vec!["digit-lemma"], r#"{"max_depht": 4}"#),
        (vec!["digit-lemma"], r#"{"max_depth": 40}"#),
        (vec!["digit-lemma"], "not json"),
        (vec!["digit-lemma"], r#"{"experiment": "box-dim"}"#),
        // Monte Carlo without a seed
        (vec!["local-dim"], "{}"),
        (vec!["local-dim", "--seed", "1"], r#"{"p": 0.7}"#),
        (vec!["local-dim", "--seed", "1", "--threads", "0"], "{}"),
    ] {
        let out = dir.path().join("out");
        let mut a = args.clone();
        a.extend(["--out", out.to_str().unwrap()]);
        let o = projlab(dir.path(), &a, cfg);
        assert_eq!(o.status.code(), Some(2), "{args:?} {cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn failed_check_exits_1_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // a zero tolerance cannot be met by a Monte Carlo estimate
    let cfg = r#"{"p": 0.25, "tol": 0.0}"#;
    let o = projlab(dir.path(), &["local-dim", "--seed", "3", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("typical local dimension"));
    assert_eq!(summary(&out)["passed"], false);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"n_maps": 300, "epsilons": [0.0625, 0.03125, 0.015625]}"#;
    let mut runs = Vec::new();
    for (i, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = projlab(
            dir.path(),
            &["collision-scaling", "--seed", "9", "--threads", threads, "--out", out.to_str().unwrap()],
            cfg,
        );
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
        runs.push((
            fs::read(out.join("summary.json")).unwrap(),
            fs::read(out.join("tables/collision_probability.csv")).unwrap(),
        ));
        assert!(out.join("timing.json").exists());
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn seed_flag_overrides_config_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    projlab(dir.path(), &["local-dim", "--seed", "5", "--out", a.to_str().unwrap()], r#"{"seed": 4}"#);
    projlab(dir.path(), &["local-dim", "--out", b.to_str().unwrap()], r#"{"seed": 5}"#);
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sa["seed"], 5);
    assert_eq!(sa["config"]["seed"], 5);
    assert_eq!(sa["config_hash"], sb["config_hash"]);
    assert_eq!(sa["results"], sb["results"]);
    assert_eq!(sa["version"], env!("CARGO_PKG_VERSION"));
}
