//! One line per acceptance criterion; exits nonzero if any fails.

use calabi_cli::checks::{criteria, run_check, CheckOptions};

fn main() {
    let opts = CheckOptions::default();
    let mut failed = 0;
    for c in criteria() {
        let outcome = run_check(&c, &opts);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
