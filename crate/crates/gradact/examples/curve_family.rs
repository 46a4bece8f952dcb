//! Export activation/gradient curves as CSV, including the alpha_n family
//! that shows how the trainable negative branch reshapes the gradient.
//!
//! Run: cargo run --release --example curve_family
//! Plot one file: python3 -c "import sys,csv;..." or gnuplot (see README).

use gradact::activations::{ActivationKind, ConstrainedParams, FixedHyper};
use gradact::cli::curve_csv;
use std::fs;

fn main() -> std::io::Result<()> {
    let dir = std::path::Path::new("curve_out");
    fs::create_dir_all(dir)?;
    let hyper = FixedHyper::default();

    // the trainable kinds at their reference setting
    for kind in [ActivationKind::XIelu, ActivationKind::XIPRelu] {
        let p = ConstrainedParams { alpha_p: 0.8, alpha_n: 0.8 };
        let path = dir.join(format!("{}.csv", kind.name()));
        fs::write(&path, curve_csv(kind, p, hyper, -6.0, 6.0, 601))?;
        println!("wrote {}", path.display());
    }

    // family over alpha_n: larger values deepen the negative-gradient well
    for alpha_n in [0.5, 1.0, 2.0] {
        let p = ConstrainedParams { alpha_p: 0.8, alpha_n };
        let path = dir.join(format!("xielu_alpha_n_{alpha_n}.csv"));
        fs::write(&path, curve_csv(ActivationKind::XIelu, p, hyper, -6.0, 6.0, 601))?;
        println!("wrote {}", path.display());
    }

    // baselines for comparison
    for kind in [
        ActivationKind::Elu,
        ActivationKind::Relu2,
        ActivationKind::Silu,
        ActivationKind::GeluTanh,
        ActivationKind::XSilu,
        ActivationKind::Relu,
    ] {
        let p = ConstrainedParams { alpha_p: 0.5, alpha_n: 0.0 };
        let path = dir.join(format!("{}.csv", kind.name()));
        fs::write(&path, curve_csv(kind, p, hyper, -6.0, 6.0, 601))?;
        println!("wrote {}", path.display());
    }

    println!("\ncolumns are x,f,dfdx; every curve passes through the origin except relu2's flat tail");
    Ok(())
}
