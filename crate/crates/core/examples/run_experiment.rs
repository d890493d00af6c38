//! Runs a named experiment from code and writes its report, exactly as the
//! `projlab` binary does.
//!
//! cargo run --release --example run_experiment -- digit-lemma /tmp/digit

use projlab::experiments;
use serde_json::json;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "digit-lemma".into());
    let out = args.next().unwrap_or_else(|| "out".into());
    let report = match experiments::run(&name, json!({}), Some(1)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    report.write(std::path::Path::new(&out)).expect("write report");
    println!("config hash {}", report.config_hash);
}
