//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Runs the full desk-scale settings. Set `RGG_ACCEPTANCE_QUICK=1` for the
//! reduced settings (every `n <= 4096`).

use std::process::ExitCode;

use rgg_core::verify::{run_suite, VerifySettings};

fn main() -> ExitCode {
    let quick = std::env::var("RGG_ACCEPTANCE_QUICK").is_ok_and(|v| v == "1");
    let settings = if quick { VerifySettings::quick() } else { VerifySettings::full() };
    println!(
        "acceptance suite ({} settings, {} worker threads)",
        if quick { "quick" } else { "full" },
        rayon::current_num_threads()
    );
    let reports = run_suite(&settings, |r| println!("{}", r.line()));
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", reports.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
