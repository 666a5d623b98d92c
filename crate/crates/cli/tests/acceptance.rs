//! Prints one line per acceptance criterion and exits non-zero if any failed.

use std::process::ExitCode;

use pistonpipe_cli::all_criteria;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for check in all_criteria() {
        let outcome = check();
        println!("{outcome}");
        if !outcome.passed {
            failed.push(format!("{} ({})", outcome.id, outcome.name));
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
