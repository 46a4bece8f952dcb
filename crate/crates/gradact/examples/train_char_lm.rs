//! Train the toy character-level model on the bundled corpus and write the
//! run log plus a checkpoint. This uses a reduced config so the demo
//! finishes in a few seconds; the full desk config lives in
//! `TrainConfig::desk_default` and behind `gradact train`.
//!
//! Run: cargo run --release --example train_char_lm [activation]

use gradact::cli::BUNDLED_CORPUS;
use gradact::nn::save_checkpoint;
use gradact::train::{train, ModelActivation, TrainConfig};
use std::fs;

fn main() {
    let choice = std::env::args().nth(1).unwrap_or_else(|| "xielu".into());
    let activation = ModelActivation::parse(&choice).unwrap_or_else(|| {
        eprintln!("unknown activation `{choice}`");
        std::process::exit(2);
    });
    let cfg = TrainConfig {
        d_model: 32,
        n_layers: 3,
        batch_size: 32,
        steps: 500,
        log_every: 25,
        warmup_steps: 50,
        constant_steps: 350,
        cooldown_steps: 100,
        ..TrainConfig::desk_default(activation)
    };

    println!("training {} for {} steps...", activation.name(), cfg.steps);
    let out = train(&cfg, BUNDLED_CORPUS).expect("training run");
    let baseline = (out.vocab as f64).ln();
    println!(
        "vocab {} (uniform baseline {:.4}), final smoothed loss {:.4}",
        out.vocab, baseline, out.final_smoothed_loss
    );

    fs::create_dir_all("train_out").expect("output dir");
    fs::write("train_out/runlog.csv", out.log.to_csv()).expect("write log");
    let mut ckpt = fs::File::create("train_out/checkpoint.bin").expect("create checkpoint");
    save_checkpoint(&out.model, &mut ckpt).expect("write checkpoint");
    println!("wrote train_out/runlog.csv and train_out/checkpoint.bin");

    println!("\nloss trajectory (every 100 steps):");
    for row in out.log.rows.iter().filter(|r| r.step % 100 == 0) {
        println!("  step {:>4}: loss {:.4}, lr {:.2e}", row.step, row.loss, row.lr);
    }
}
