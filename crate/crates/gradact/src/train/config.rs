//! Flat key=value training configuration. Every key is required; parsing
//! reports the full list of missing keys at once.

use super::schedule::{LrSchedule, ScheduleKind};
use crate::activations::ActivationKind;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("missing config keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("line {line}: expected `key = value`")]
    BadLine { line: usize },
}

/// Which block the model's layers use: a standard MLP around one activation
/// kind, or the gated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelActivation {
    Kind(ActivationKind),
    SwiGlu,
}

impl ModelActivation {
    pub fn parse(s: &str) -> Option<ModelActivation> {
        if s == "swiglu" {
            return Some(ModelActivation::SwiGlu);
        }
        ActivationKind::parse(s).map(ModelActivation::Kind)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelActivation::Kind(k) => k.name(),
            ModelActivation::SwiGlu => "swiglu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizerKind {
    Char,
    Byte,
}

impl TokenizerKind {
    pub fn parse(s: &str) -> Option<TokenizerKind> {
        match s {
            "char" => Some(TokenizerKind::Char),
            "byte" => Some(TokenizerKind::Byte),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TokenizerKind::Char => "char",
            TokenizerKind::Byte => "byte",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub tokenizer: TokenizerKind,
    pub context_length: usize,
    pub batch_size: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub activation: ModelActivation,
    pub alpha_p_init: f64,
    pub alpha_n_init: f64,
    pub beta: f64,
    pub tie_embeddings: bool,
    pub init_std: f64,
    pub steps: u64,
    pub log_every: u64,
    pub max_lr: f64,
    pub min_lr: f64,
    pub lr_schedule: ScheduleKind,
    pub warmup_steps: u64,
    pub constant_steps: u64,
    pub cooldown_steps: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub grad_clip: f64,
}

const KEYS: &[&str] = &[
    "seed",
    "tokenizer",
    "context_length",
    "batch_size",
    "d_model",
    "n_layers",
    "activation",
    "alpha_p_init",
    "alpha_n_init",
    "beta",
    "tie_embeddings",
    "init_std",
    "steps",
    "log_every",
    "max_lr",
    "min_lr",
    "lr_schedule",
    "warmup_steps",
    "constant_steps",
    "cooldown_steps",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "weight_decay",
    "grad_clip",
];

impl TrainConfig {
    /// The desk-scale defaults: a four-layer, 64-wide model over an
    /// eight-token context, 2000 steps with a 20% WSD cooldown.
    pub fn desk_default(activation: ModelActivation) -> TrainConfig {
        TrainConfig {
            seed: 42,
            tokenizer: TokenizerKind::Char,
            context_length: 8,
            batch_size: 64,
            d_model: 64,
            n_layers: 4,
            activation,
            alpha_p_init: 0.8,
            alpha_n_init: 0.8,
            beta: 0.5,
            tie_embeddings: true,
            init_std: 0.02,
            steps: 2000,
            log_every: 50,
            max_lr: 1e-3,
            min_lr: 0.0,
            lr_schedule: ScheduleKind::Wsd,
            warmup_steps: 100,
            constant_steps: 1500,
            cooldown_steps: 400,
            adam_beta1: 0.9,
            adam_beta2: 0.95,
            adam_eps: 1e-8,
            weight_decay: 0.1,
            grad_clip: 1.0,
        }
    }

    pub fn schedule(&self) -> LrSchedule {
        LrSchedule {
            kind: self.lr_schedule,
            max_lr: self.max_lr,
            min_lr: self.min_lr,
            warmup_steps: self.warmup_steps,
            constant_steps: self.constant_steps,
            cooldown_steps: self.cooldown_steps,
        }
    }

    pub fn parse(text: &str) -> Result<TrainConfig, ConfigError> {
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or(ConfigError::BadLine { line: i + 1 })?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            values.insert(key, value.trim().to_string());
        }
        let missing: Vec<String> =
            KEYS.iter().filter(|k| !values.contains_key(**k)).map(|k| k.to_string()).collect();
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys(missing));
        }

        fn get<T: std::str::FromStr>(
            values: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<T, ConfigError> {
            values[key].parse::<T>().map_err(|_| ConfigError::BadValue {
                key: key.into(),
                msg: format!("could not parse `{}`", values[key]),
            })
        }
        let bad = |key: &str, msg: &str| ConfigError::BadValue { key: key.into(), msg: msg.into() };

        let cfg = TrainConfig {
            seed: get(&values, "seed")?,
            tokenizer: TokenizerKind::parse(&values["tokenizer"])
                .ok_or_else(|| bad("tokenizer", "expected char or byte"))?,
            context_length: get(&values, "context_length")?,
            batch_size: get(&values, "batch_size")?,
            d_model: get(&values, "d_model")?,
            n_layers: get(&values, "n_layers")?,
            activation: ModelActivation::parse(&values["activation"])
                .ok_or_else(|| bad("activation", "unknown activation"))?,
            alpha_p_init: get(&values, "alpha_p_init")?,
            alpha_n_init: get(&values, "alpha_n_init")?,
            beta: get(&values, "beta")?,
            tie_embeddings: get(&values, "tie_embeddings")?,
            init_std: get(&values, "init_std")?,
            steps: get(&values, "steps")?,
            log_every: get(&values, "log_every")?,
            max_lr: get(&values, "max_lr")?,
            min_lr: get(&values, "min_lr")?,
            lr_schedule: ScheduleKind::parse(&values["lr_schedule"])
                .ok_or_else(|| bad("lr_schedule", "expected wsd or cosine"))?,
            warmup_steps: get(&values, "warmup_steps")?,
            constant_steps: get(&values, "constant_steps")?,
            cooldown_steps: get(&values, "cooldown_steps")?,
            adam_beta1: get(&values, "adam_beta1")?,
            adam_beta2: get(&values, "adam_beta2")?,
            adam_eps: get(&values, "adam_eps")?,
            weight_decay: get(&values, "weight_decay")?,
            grad_clip: get(&values, "grad_clip")?,
        };
        if cfg.context_length == 0 || cfg.batch_size == 0 || cfg.d_model == 0 {
            return Err(bad("context_length", "sizes must be positive"));
        }
        if cfg.n_layers == 0 {
            return Err(bad("n_layers", "at least one layer"));
        }
        if cfg.max_lr < cfg.min_lr || cfg.min_lr < 0.0 {
            return Err(bad("max_lr", "need max_lr >= min_lr >= 0"));
        }
        if cfg.log_every == 0 {
            return Err(bad("log_every", "must be positive"));
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("tokenizer = {}\n", self.tokenizer.name()));
        s.push_str(&format!("context_length = {}\n", self.context_length));
        s.push_str(&format!("batch_size = {}\n", self.batch_size));
        s.push_str(&format!("d_model = {}\n", self.d_model));
        s.push_str(&format!("n_layers = {}\n", self.n_layers));
        s.push_str(&format!("activation = {}\n", self.activation.name()));
        s.push_str(&format!("alpha_p_init = {:?}\n", self.alpha_p_init));
        s.push_str(&format!("alpha_n_init = {:?}\n", self.alpha_n_init));
        s.push_str(&format!("beta = {:?}\n", self.beta));
        s.push_str(&format!("tie_embeddings = {}\n", self.tie_embeddings));
        s.push_str(&format!("init_std = {:?}\n", self.init_std));
        s.push_str(&format!("steps = {}\n", self.steps));
        s.push_str(&format!("log_every = {}\n", self.log_every));
        s.push_str(&format!("max_lr = {:?}\n", self.max_lr));
        s.push_str(&format!("min_lr = {:?}\n", self.min_lr));
        s.push_str(&format!("lr_schedule = {}\n", self.lr_schedule.name()));
        s.push_str(&format!("warmup_steps = {}\n", self.warmup_steps));
        s.push_str(&format!("constant_steps = {}\n", self.constant_steps));
        s.push_str(&format!("cooldown_steps = {}\n", self.cooldown_steps));
        s.push_str(&format!("adam_beta1 = {:?}\n", self.adam_beta1));
        s.push_str(&format!("adam_beta2 = {:?}\n", self.adam_beta2));
        s.push_str(&format!("adam_eps = {:?}\n", self.adam_eps));
        s.push_str(&format!("weight_decay = {:?}\n", self.weight_decay));
        s.push_str(&format!("grad_clip = {:?}\n", self.grad_clip));
        s
    }
}
