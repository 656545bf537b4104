use std::panic::catch_unwind;
use std::process::ExitCode;

use acceptance::CRITERIA;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (n, criterion) in CRITERIA {
        let pass = catch_unwind(criterion).unwrap_or_else(|_| {
            println!("criterion {n}: FAIL (panicked)");
            false
        });
        if !pass {
            failed.push(n);
        }
    }
    println!("\n{} of {} criteria passed", CRITERIA.len() - failed.len(), CRITERIA.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
