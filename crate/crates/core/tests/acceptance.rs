//! Acceptance suite: every criterion at full scale, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout.
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use netkrig::validation::{run_criterion, Scale, ValidationOptions, CRITERIA};

fn main() {
    let only: Option<Vec<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let opts = ValidationOptions {
        seed: 1,
        scale: Scale::Full,
        mutate_gain: false,
    };
    let mut failed = 0;
    for (id, _) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
