//! Acceptance battery. Runs every criterion, prints one PASS/FAIL line per
//! criterion followed by its measured values, and exits nonzero if any
//! criterion fails or overruns its time limit.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 2 5`.

use std::process::ExitCode;

use rholab::suite::{Criterion, DEFAULT_SEED};

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: Vec<Criterion> = Criterion::ALL
        .into_iter()
        .filter(|c| selected.is_empty() || selected.contains(&c.id()))
        .collect();

    let mut lines = Vec::new();
    let mut ok = true;
    for c in criteria {
        let result = match c.run(DEFAULT_SEED) {
            Ok(r) => r,
            Err(e) => {
                let line = format!("criterion {} ({}): FAIL with error: {e}", c.id(), c.name());
                println!("{line}");
                lines.push(line);
                ok = false;
                continue;
            }
        };
        let line = result.line();
        println!("{line}");
        println!("{}", serde_json::to_string(&result.measured).unwrap());
        ok &= result.passed && result.within_time();
        lines.push(line);
    }

    println!("\nacceptance summary (seed {DEFAULT_SEED}):");
    for line in &lines {
        println!("  {line}");
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
