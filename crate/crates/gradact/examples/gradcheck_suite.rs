//! Finite-difference verification of every analytic gradient in the crate:
//! input gradients, parameter gradients, and an end-to-end check of the toy
//! model's hand-written backward pass.
//!
//! Run: cargo run --release --example gradcheck_suite

use gradact::activations::ActivationKind;
use gradact::cli::gradcheck_suite;

fn main() {
    let reports = gradcheck_suite(&ActivationKind::ALL, 42, 1, true);
    println!(
        "{:<24} {:>8} {:>14} {:>14} {:>10}  result",
        "check", "samples", "max_rel_err", "worst_x", "tol"
    );
    let mut all_pass = true;
    for r in &reports {
        println!(
            "{:<24} {:>8} {:>14.3e} {:>14.6} {:>10.0e}  {}",
            r.label,
            r.samples,
            r.max_rel_err,
            r.worst_x,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
        all_pass &= r.pass;
    }
    println!("\n{}", if all_pass { "all gradients verified" } else { "FAILURES present" });
    std::process::exit(i32::from(!all_pass));
}
