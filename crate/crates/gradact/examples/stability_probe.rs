//! Watch e^x - 1 lose every significant digit near zero when computed the
//! obvious way in reduced precision, while the dedicated evaluation keeps
//! full relative accuracy.
//!
//! Run: cargo run --release --example stability_probe

use gradact::verify::{stability_probe, PrecisionMode};

fn main() {
    for mode in [PrecisionMode::EmulatedSingle, PrecisionMode::EmulatedBf16] {
        println!("emulated {} precision:", mode.name());
        println!(
            "{:>10} {:>14} {:>14} {:>14} {:>12} {:>12}",
            "x", "naive", "stable", "reference", "naive_err", "stable_err"
        );
        for x in [-1.0, -1e-3, -1e-6, -1e-8, -1e-10] {
            let p = stability_probe(x, mode);
            println!(
                "{:>10.0e} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.2e} {:>12.2e}",
                p.x, p.naive, p.stable, p.reference, p.naive_rel_err, p.stable_rel_err
            );
        }
        println!();
    }
    println!("the naive route rounds e^x to 1 once |x| falls under the mode's resolution,");
    println!("so the subtraction returns zero: relative error 1.0, every digit gone.");
}
