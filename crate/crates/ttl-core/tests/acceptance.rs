//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ttl_core::verify::{verify_all, VerifyConfig};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let start = Instant::now();
    let matrix = verify_all(&cfg, &[]);
    for c in &matrix.criteria {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} ({}; {} checks, {} failed)", c.criterion, c.title, c.checks, c.failed);
        for rec in c.records.iter().filter(|r| !r.pass) {
            println!("    {} [{}] expected {} got {}", rec.id, rec.parameters, rec.expected, rec.got);
        }
    }
    println!(
        "acceptance: {} checks, {} failed, seed {}, {:.1}s",
        matrix.checks,
        matrix.failed,
        cfg.seed,
        start.elapsed().as_secs_f64()
    );
    if matrix.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
