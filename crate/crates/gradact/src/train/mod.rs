//! Deterministic desk-scale training: sample k-gram windows from a byte or
//! character corpus, step AdamW under a warmup-stable-decay or cosine
//! schedule, and log loss plus the per-layer constrained activation scalars.
//!
//! Everything is driven by the seed: model init, batch sampling, and
//! therefore the entire run log, byte for byte.

mod config;
mod optim;
mod schedule;

pub use config::{ConfigError, ModelActivation, TokenizerKind, TrainConfig};
pub use optim::{AdamHyper, AdamW, OptimError};
pub use schedule::{LrSchedule, ScheduleKind};

use crate::activations::FixedHyper;
use crate::nn::{lm_loss_and_grads, BlockKind, ModelConfig, ModelError, ToyLm};
use crate::report::fmt_real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus too small: {positions} usable positions for batch size {batch}")]
    CorpusTooSmall { positions: usize, batch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("loss diverged to {loss} at step {step}")]
    Diverged { step: u64, loss: f64 },
    #[error("run log parse error: {0}")]
    LogParse(String),
}

// ---------------------------------------------------------------------------
// Tokenization.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Tokenized {
    pub ids: Vec<u32>,
    pub vocab: usize,
}

/// Byte mode uses the full 256-symbol alphabet; char mode builds a sorted
/// vocabulary of the distinct characters that actually occur.
pub fn tokenize(text: &str, kind: TokenizerKind) -> Tokenized {
    match kind {
        TokenizerKind::Byte => {
            Tokenized { ids: text.bytes().map(u32::from).collect(), vocab: 256 }
        }
        TokenizerKind::Char => {
            let mut alphabet: Vec<char> = {
                let mut set: Vec<char> = text.chars().collect();
                set.sort_unstable();
                set.dedup();
                set
            };
            alphabet.shrink_to_fit();
            let ids = text
                .chars()
                .map(|c| alphabet.binary_search(&c).expect("char from alphabet") as u32)
                .collect();
            Tokenized { ids, vocab: alphabet.len() }
        }
    }
}

// ---------------------------------------------------------------------------
// Run log.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    pub alpha_p: Vec<f64>,
    pub alpha_n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub layers: usize,
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn header(&self) -> String {
        let mut h = String::from("step,lr,loss");
        for i in 0..self.layers {
            h.push_str(&format!(",alpha_p_{i}"));
        }
        for i in 0..self.layers {
            h.push_str(&format!(",alpha_n_{i}"));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{},{}", row.step, fmt_real(row.lr), fmt_real(row.loss)));
            for v in row.alpha_p.iter().chain(&row.alpha_n) {
                out.push(',');
                out.push_str(&fmt_real(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<RunLog, TrainError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| TrainError::LogParse("empty log".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "step" || cols[1] != "lr" || cols[2] != "loss" {
            return Err(TrainError::LogParse(format!("unexpected header `{header}`")));
        }
        let alphas = cols.len() - 3;
        if !alphas.is_multiple_of(2) {
            return Err(TrainError::LogParse("odd number of alpha columns".into()));
        }
        let layers = alphas / 2;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(TrainError::LogParse(format!("row {}: wrong column count", i + 2)));
            }
            let parse = |s: &str| -> Result<f64, TrainError> {
                s.parse().map_err(|_| TrainError::LogParse(format!("bad number `{s}`")))
            };
            rows.push(LogRow {
                step: fields[0]
                    .parse()
                    .map_err(|_| TrainError::LogParse(format!("bad step `{}`", fields[0])))?,
                lr: parse(fields[1])?,
                loss: parse(fields[2])?,
                alpha_p: fields[3..3 + layers].iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
                alpha_n: fields[3 + layers..].iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
            });
        }
        if rows.windows(2).any(|w| w[0].step >= w[1].step) {
            return Err(TrainError::LogParse("steps must be strictly increasing".into()));
        }
        Ok(RunLog { layers, rows })
    }
}

// ---------------------------------------------------------------------------
// Training loop.
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct TrainOutput {
    pub model: ToyLm,
    pub log: RunLog,
    pub vocab: usize,
    /// Mean loss over the last 50 steps.
    pub final_smoothed_loss: f64,
}

const SMOOTH_WINDOW: usize = 50;

pub fn model_config(cfg: &TrainConfig, vocab: usize) -> ModelConfig {
    ModelConfig {
        vocab,
        d_model: cfg.d_model,
        context: cfg.context_length,
        n_layers: cfg.n_layers,
        block: match cfg.activation {
            ModelActivation::SwiGlu => BlockKind::Gated,
            ModelActivation::Kind(k) => BlockKind::Standard(k),
        },
        tie_embeddings: cfg.tie_embeddings,
        hyper: FixedHyper { beta: cfg.beta, ..FixedHyper::default() },
        alpha_p_init: cfg.alpha_p_init,
        alpha_n_init: cfg.alpha_n_init,
    }
}

fn gaussian_source(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

pub fn train(cfg: &TrainConfig, corpus: &str) -> Result<TrainOutput, TrainError> {
    let tokens = tokenize(corpus, cfg.tokenizer);
    let usable = tokens.ids.len().saturating_sub(cfg.context_length);
    if usable < cfg.batch_size {
        return Err(TrainError::CorpusTooSmall { positions: usable, batch: cfg.batch_size });
    }

    let mut model = ToyLm::new(&model_config(cfg, tokens.vocab))?;
    let mut init = gaussian_source(cfg.seed);
    model.init_gaussian(cfg.init_std, &mut init);

    // batch sampling runs on its own stream so init and sampling never
    // influence each other
    let mut batch_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);

    let schedule = cfg.schedule();
    let hyper = AdamHyper {
        beta1: cfg.adam_beta1,
        beta2: cfg.adam_beta2,
        eps: cfg.adam_eps,
        weight_decay: cfg.weight_decay,
        grad_clip: cfg.grad_clip,
    };
    let decay: Vec<bool> = model
        .param_spec()
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.decay, e.len))
        .collect();
    let mut opt = AdamW::new(&decay, hyper);

    let mut flat_params = Vec::with_capacity(model.param_count());
    let mut flat_grads = Vec::with_capacity(model.param_count());
    let mut positions = vec![0usize; cfg.batch_size];
    let mut recent = VecDeque::with_capacity(SMOOTH_WINDOW);
    let mut log = RunLog { layers: cfg.n_layers, rows: Vec::new() };

    for step in 0..cfg.steps {
        for slot in positions.iter_mut() {
            *slot = batch_rng.random_range(cfg.context_length..tokens.ids.len());
        }
        let (loss, grads) = lm_loss_and_grads(&model, &tokens.ids, &positions)?;
        if !loss.is_finite() {
            return Err(TrainError::Diverged { step, loss });
        }
        if recent.len() == SMOOTH_WINDOW {
            recent.pop_front();
        }
        recent.push_back(loss);

        let lr = schedule.lr_at(step);
        if step % cfg.log_every == 0 || step + 1 == cfg.steps {
            let alphas = model.layer_alphas();
            log.rows.push(LogRow {
                step,
                lr,
                loss,
                alpha_p: alphas.iter().map(|a| a.0).collect(),
                alpha_n: alphas.iter().map(|a| a.1).collect(),
            });
        }

        model.copy_params(&mut flat_params);
        grads.copy_flat(&mut flat_grads);
        opt.step(&mut flat_params, &mut flat_grads, lr)?;
        model.load_params(&flat_params);
    }

    let final_smoothed_loss = recent.iter().sum::<f64>() / recent.len().max(1) as f64;
    Ok(TrainOutput { model, log, vocab: tokens.vocab, final_smoothed_loss })
}
