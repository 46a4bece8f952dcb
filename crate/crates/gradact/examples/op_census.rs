//! Static operation counts of every activation's scalar inference path,
//! plus a rough relative timing over a large buffer.
//!
//! Run: cargo run --release --example op_census

use gradact::activations::{forward, op_count, ActivationKind, ConstrainedParams, FixedHyper};
use std::time::Instant;

fn main() {
    let hyper = FixedHyper::default();
    let p = ConstrainedParams { alpha_p: 0.8, alpha_n: 0.8 };
    let n = 2_000_000;
    let inputs: Vec<f64> = (0..n).map(|i| -4.0 + 8.0 * i as f64 / n as f64).collect();

    println!(
        "{:<10} {:>5} {:>6} {:>5} {:>5} {:>6} {:>10}",
        "kind", "exps", "mults", "adds", "divs", "conds", "ns/elem"
    );
    for kind in ActivationKind::ALL {
        let c = op_count(kind);
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let t0 = Instant::now();
            let mut acc = 0.0;
            for &x in &inputs {
                acc += forward(kind, x, p, hyper);
            }
            std::hint::black_box(acc);
            best = best.min(t0.elapsed().as_secs_f64() * 1e9 / n as f64);
        }
        println!(
            "{:<10} {:>5} {:>6} {:>5} {:>5} {:>6} {:>10.2}",
            kind.name(),
            c.exps,
            c.mults,
            c.adds,
            c.divs,
            c.conditionals,
            best
        );
    }
    println!("\ntimings are machine-relative; the census columns are the stable contract.");
    println!("xiprelu costs squared-relu plus 3 multiplications and 1 addition.");
}
