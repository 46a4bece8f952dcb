//! Gradient-first activation function workbench.
//!
//! Design an activation by writing down the gradient you want, piecewise
//! over the basis {1, x, x^2, e^x}; apply trainable affine transforms;
//! integrate term-wise and solve the continuity constants. The closed forms
//! that fall out (xIELU, xIPReLU and the baselines around them) live in
//! [`activations`], the machinery that derives them lives in [`derivation`],
//! and everything is cross-checked by finite differences and precision
//! probes in [`verify`]. A small tensor stack ([`tensor`], [`nn`]) and a
//! deterministic trainer ([`train`]) expose per-layer parameter dynamics at
//! desk scale.
//!
//! ## Runnable examples
//!
//! One example per capability, under `examples/`:
//!
//! ```text
//! cargo run --release --example curve_family        # activation/gradient curve CSVs
//! cargo run --release --example derive_from_spec    # integrate a gradient spec
//! cargo run --release --example gradcheck_suite     # finite-difference checks
//! cargo run --release --example stability_probe     # emulated-precision cancellation
//! cargo run --release --example op_census           # per-kind operation counts
//! cargo run --release --example train_char_lm       # desk-scale training run
//! cargo run --release --example alpha_profile       # learned alpha vs depth
//! ```
//!
//! The same capabilities are scriptable through the `gradact` binary; see
//! the README and `docs/formats.md` for the CSV and file-format contracts.

pub mod activations;
pub mod cli;
pub mod derivation;
pub mod nn;
pub mod report;
pub mod tensor;
pub mod train;
pub mod verify;

pub use activations::{ActivationKind, ConstrainedParams, FixedHyper, RawParams};
pub use derivation::{AffineTransform, BasisCoeffs, DerivedActivation, GradientSpec};
