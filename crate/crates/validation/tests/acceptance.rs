//! Prints one PASS/FAIL line per acceptance criterion and exits with status 1
//! if any criterion fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let criteria = mckean_validation::criteria();
    let mut failed = 0;
    for (name, check) in &criteria {
        let out = check();
        println!("{} {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
