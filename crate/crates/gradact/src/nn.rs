//! Dense model components with hand-written backward passes: biasless
//! linear maps, RMS normalization, standard and gated MLP blocks, and a
//! k-gram toy language model that strings them together.
//!
//! The toy model is a pre-norm residual stack over concatenated context
//! embeddings. There is no attention: the point is to exercise per-layer
//! trainable activation parameters inside MLP blocks, and a k-gram model
//! does that at a tiny fraction of the cost.

use crate::activations::{self as act, ActivationKind, ConstrainedParams, FixedHyper, RawParams};
use crate::tensor::{matmul, matmul_at_b, matmul_bt, Tensor};
use std::io::{self, Read, Write};
use thiserror::Error;

pub const RMSNORM_EPS: f64 = 1e-6;
/// Hidden ratio of standard MLP blocks.
pub const STANDARD_RATIO: usize = 6;
/// Hidden ratio of gated MLP blocks; 2/3 of the standard ratio keeps the
/// weight counts of the two block types identical.
pub const GATED_RATIO: usize = 4;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token id {id} out of vocabulary (vocab = {vocab})")]
    VocabOverflow { id: u32, vocab: usize },
    #[error("position {pos} needs {context} preceding tokens in a stream of {len}")]
    BadPosition { pos: usize, context: usize, len: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("invalid model config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a model checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

// ---------------------------------------------------------------------------
// RMS normalization.
// ---------------------------------------------------------------------------

/// Row-wise y_i = gain_i * x_i / sqrt(mean(x^2) + eps).
pub fn rmsnorm_fwd(x: &Tensor, gain: &Tensor) -> Tensor {
    let (rows, feat) = (x.rows(), x.cols());
    assert_eq!(gain.len(), feat, "gain length");
    let g = gain.data();
    let mut y = Tensor::zeros(&[rows, feat]);
    for r in 0..rows {
        let xr = x.row(r);
        let ms = xr.iter().map(|v| v * v).sum::<f64>() / feat as f64;
        let inv = 1.0 / (ms + RMSNORM_EPS).sqrt();
        for ((yv, &xv), &gv) in y.row_mut(r).iter_mut().zip(xr).zip(g) {
            *yv = gv * xv * inv;
        }
    }
    y.debug_check_finite("rmsnorm_fwd");
    y
}

/// Backward of [`rmsnorm_fwd`]; returns (dx, dgain).
pub fn rmsnorm_bwd(x: &Tensor, gain: &Tensor, dy: &Tensor) -> (Tensor, Tensor) {
    let (rows, feat) = (x.rows(), x.cols());
    let g = gain.data();
    let mut dx = Tensor::zeros(&[rows, feat]);
    let mut dgain = Tensor::zeros(&[feat]);
    for r in 0..rows {
        let xr = x.row(r);
        let dyr = dy.row(r);
        let ms = xr.iter().map(|v| v * v).sum::<f64>() / feat as f64;
        let inv = 1.0 / (ms + RMSNORM_EPS).sqrt();
        // S = sum_j dy_j g_j x_j feeds the mean-square path
        let mut s = 0.0;
        for ((&dv, &xv), &gv) in dyr.iter().zip(xr).zip(g) {
            s += dv * gv * xv;
        }
        let k = inv * inv * inv * s / feat as f64;
        for (i, (dxv, (&dv, &xv))) in dx.row_mut(r).iter_mut().zip(dyr.iter().zip(xr)).enumerate()
        {
            *dxv = g[i] * dv * inv - xv * k;
            dgain.data_mut()[i] += dv * xv * inv;
        }
    }
    dx.debug_check_finite("rmsnorm_bwd/dx");
    (dx, dgain)
}

// ---------------------------------------------------------------------------
// Standard MLP block: down( act( up(x) ) ) with per-block trainable
// activation scalars, constrained on the fly.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MlpBlock {
    pub w_up: Tensor,   // [d_model, d_hidden]
    pub w_down: Tensor, // [d_hidden, d_model]
    pub act_kind: ActivationKind,
    pub act_raw: RawParams,
}

impl MlpBlock {
    pub fn new(d_model: usize, act_kind: ActivationKind, act_raw: RawParams) -> MlpBlock {
        let d_hidden = STANDARD_RATIO * d_model;
        MlpBlock {
            w_up: Tensor::zeros(&[d_model, d_hidden]),
            w_down: Tensor::zeros(&[d_hidden, d_model]),
            act_kind,
            act_raw,
        }
    }

    pub fn d_hidden(&self) -> usize {
        self.w_up.cols()
    }

    pub fn constrained(&self, hyper: FixedHyper) -> ConstrainedParams {
        act::constrain(self.act_raw, hyper, self.act_kind)
    }
}

pub struct MlpCache {
    pre: Tensor, // x . w_up
    hidden: Tensor, // act(pre)
}

#[derive(Debug)]
pub struct MlpGrads {
    pub dx: Tensor,
    pub d_w_up: Tensor,
    pub d_w_down: Tensor,
    pub d_alpha_p_raw: f64,
    pub d_alpha_n_raw: f64,
}

pub fn mlp_fwd_cached(b: &MlpBlock, x: &Tensor, hyper: FixedHyper) -> (Tensor, MlpCache) {
    let p = b.constrained(hyper);
    let pre = matmul(x, &b.w_up);
    let mut hidden = pre.clone();
    for v in hidden.data_mut() {
        *v = act::forward(b.act_kind, *v, p, hyper);
    }
    hidden.debug_check_finite("mlp activation");
    let y = matmul(&hidden, &b.w_down);
    (y, MlpCache { pre, hidden })
}

pub fn mlp_fwd(b: &MlpBlock, x: &Tensor, hyper: FixedHyper) -> Tensor {
    mlp_fwd_cached(b, x, hyper).0
}

pub fn mlp_bwd_cached(
    b: &MlpBlock,
    x: &Tensor,
    cache: &MlpCache,
    dy: &Tensor,
    hyper: FixedHyper,
) -> MlpGrads {
    let p = b.constrained(hyper);
    let d_w_down = matmul_at_b(&cache.hidden, dy);
    let d_hidden = matmul_bt(dy, &b.w_down);

    // chain through the elementwise activation; alpha gradients accumulate
    // as plain sums over every element
    let mut d_pre = d_hidden;
    let mut d_alpha_p = 0.0;
    let mut d_alpha_n = 0.0;
    for (dv, &pre) in d_pre.data_mut().iter_mut().zip(cache.pre.data()) {
        let (din, dap, dan) = act::backward_scalars(b.act_kind, pre, p, hyper);
        d_alpha_p += *dv * dap;
        d_alpha_n += *dv * dan;
        *dv *= din;
    }
    let (cp, cn) = act::constrain_grad(b.act_raw, b.act_kind);

    let dx = matmul_bt(&d_pre, &b.w_up);
    let d_w_up = matmul_at_b(x, &d_pre);
    MlpGrads {
        dx,
        d_w_up,
        d_w_down,
        d_alpha_p_raw: d_alpha_p * cp,
        d_alpha_n_raw: d_alpha_n * cn,
    }
}

pub fn mlp_bwd(b: &MlpBlock, x: &Tensor, dy: &Tensor, hyper: FixedHyper) -> MlpGrads {
    let (_, cache) = mlp_fwd_cached(b, x, hyper);
    mlp_bwd_cached(b, x, &cache, dy, hyper)
}

// ---------------------------------------------------------------------------
// Gated MLP block: down( silu(gate(x)) * up(x) ).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GatedMlpBlock {
    pub w_gate: Tensor, // [d_model, d_hidden]
    pub w_up: Tensor,   // [d_model, d_hidden]
    pub w_down: Tensor, // [d_hidden, d_model]
}

impl GatedMlpBlock {
    pub fn new(d_model: usize) -> GatedMlpBlock {
        let d_hidden = GATED_RATIO * d_model;
        GatedMlpBlock {
            w_gate: Tensor::zeros(&[d_model, d_hidden]),
            w_up: Tensor::zeros(&[d_model, d_hidden]),
            w_down: Tensor::zeros(&[d_hidden, d_model]),
        }
    }

    pub fn weight_count(&self) -> usize {
        self.w_gate.len() + self.w_up.len() + self.w_down.len()
    }
}

pub struct GatedCache {
    gate: Tensor,
    up: Tensor,
    hidden: Tensor,
}

#[derive(Debug)]
pub struct GatedGrads {
    pub dx: Tensor,
    pub d_w_gate: Tensor,
    pub d_w_up: Tensor,
    pub d_w_down: Tensor,
}

pub fn swiglu_fwd_cached(b: &GatedMlpBlock, x: &Tensor) -> (Tensor, GatedCache) {
    let gate = matmul(x, &b.w_gate);
    let up = matmul(x, &b.w_up);
    let mut hidden = Tensor::zeros(&[gate.rows(), gate.cols()]);
    for ((h, &g), &u) in hidden.data_mut().iter_mut().zip(gate.data()).zip(up.data()) {
        *h = g * act::sigmoid(g) * u;
    }
    hidden.debug_check_finite("swiglu gate");
    let y = matmul(&hidden, &b.w_down);
    (y, GatedCache { gate, up, hidden })
}

pub fn swiglu_fwd(b: &GatedMlpBlock, x: &Tensor) -> Tensor {
    swiglu_fwd_cached(b, x).0
}

pub fn swiglu_bwd_cached(
    b: &GatedMlpBlock,
    x: &Tensor,
    cache: &GatedCache,
    dy: &Tensor,
) -> GatedGrads {
    let d_w_down = matmul_at_b(&cache.hidden, dy);
    let d_hidden = matmul_bt(dy, &b.w_down);

    let n = d_hidden.len();
    let mut d_gate = Tensor::zeros(&[d_hidden.rows(), d_hidden.cols()]);
    let mut d_up = Tensor::zeros(&[d_hidden.rows(), d_hidden.cols()]);
    for i in 0..n {
        let g = cache.gate.data()[i];
        let u = cache.up.data()[i];
        let dh = d_hidden.data()[i];
        let s = act::sigmoid(g);
        let silu = g * s;
        let dsilu = s + g * s * (1.0 - s);
        d_gate.data_mut()[i] = dh * u * dsilu;
        d_up.data_mut()[i] = dh * silu;
    }

    let d_w_gate = matmul_at_b(x, &d_gate);
    let d_w_up = matmul_at_b(x, &d_up);
    let mut dx = matmul_bt(&d_gate, &b.w_gate);
    let dx_up = matmul_bt(&d_up, &b.w_up);
    for (a, &b_) in dx.data_mut().iter_mut().zip(dx_up.data()) {
        *a += b_;
    }
    GatedGrads { dx, d_w_gate, d_w_up, d_w_down }
}

pub fn swiglu_bwd(b: &GatedMlpBlock, x: &Tensor, dy: &Tensor) -> GatedGrads {
    let (_, cache) = swiglu_fwd_cached(b, x);
    swiglu_bwd_cached(b, x, &cache, dy)
}

// ---------------------------------------------------------------------------
// Cross-entropy head.
// ---------------------------------------------------------------------------

/// Stable -log softmax(logits)[target]; returns (loss, dlogits).
pub fn cross_entropy(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    assert!(target < logits.len(), "target out of range");
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for &l in logits {
        z += (l - m).exp();
    }
    let lse = m + z.ln();
    let loss = lse - logits[target];
    let mut dlogits: Vec<f64> = logits.iter().map(|&l| (l - lse).exp()).collect();
    dlogits[target] -= 1.0;
    (loss, dlogits)
}

// ---------------------------------------------------------------------------
// Toy k-gram language model.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Standard(ActivationKind),
    Gated,
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub vocab: usize,
    pub d_model: usize,
    pub context: usize,
    pub n_layers: usize,
    pub block: BlockKind,
    pub tie_embeddings: bool,
    pub hyper: FixedHyper,
    pub alpha_p_init: f64,
    pub alpha_n_init: f64,
}

#[derive(Debug, Clone)]
pub enum Block {
    Standard(MlpBlock),
    Gated(GatedMlpBlock),
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub norm_gain: Tensor,
    pub block: Block,
}

#[derive(Debug, Clone)]
pub struct ToyLm {
    pub vocab: usize,
    pub d_model: usize,
    pub context: usize,
    pub hyper: FixedHyper,
    pub alpha_init: (f64, f64),
    pub embedding: Tensor,     // [vocab, d_model]
    pub w_in: Tensor,          // [context * d_model, d_model]
    pub layers: Vec<Layer>,
    pub final_gain: Tensor,    // [d_model]
    pub w_out: Option<Tensor>, // None: output projection tied to embedding
}

impl ToyLm {
    pub fn new(cfg: &ModelConfig) -> Result<ToyLm, ModelError> {
        if cfg.vocab == 0 || cfg.d_model == 0 || cfg.context == 0 {
            return Err(ModelError::BadConfig("vocab, d_model, context must be positive".into()));
        }
        cfg.hyper.validate().map_err(|e| ModelError::BadConfig(e.to_string()))?;
        let raw = match cfg.block {
            BlockKind::Standard(kind) => RawParams::from_constrained_init(
                cfg.alpha_p_init,
                cfg.alpha_n_init,
                cfg.hyper,
                kind,
            )
            .map_err(|e| ModelError::BadConfig(e.to_string()))?,
            BlockKind::Gated => RawParams::default(),
        };
        let layers = (0..cfg.n_layers)
            .map(|_| Layer {
                norm_gain: Tensor::from_vec(&[cfg.d_model], vec![1.0; cfg.d_model]).unwrap(),
                block: match cfg.block {
                    BlockKind::Standard(kind) => {
                        Block::Standard(MlpBlock::new(cfg.d_model, kind, raw))
                    }
                    BlockKind::Gated => Block::Gated(GatedMlpBlock::new(cfg.d_model)),
                },
            })
            .collect();
        Ok(ToyLm {
            vocab: cfg.vocab,
            d_model: cfg.d_model,
            context: cfg.context,
            hyper: cfg.hyper,
            alpha_init: (cfg.alpha_p_init, cfg.alpha_n_init),
            embedding: Tensor::zeros(&[cfg.vocab, cfg.d_model]),
            w_in: Tensor::zeros(&[cfg.context * cfg.d_model, cfg.d_model]),
            layers,
            final_gain: Tensor::from_vec(&[cfg.d_model], vec![1.0; cfg.d_model]).unwrap(),
            w_out: if cfg.tie_embeddings {
                None
            } else {
                Some(Tensor::zeros(&[cfg.d_model, cfg.vocab]))
            },
        })
    }

    /// Seeded Gaussian init: std on embeddings and projections, with the
    /// usual 1/sqrt(2 n_layers) shrink on the block down-projections.
    pub fn init_gaussian(&mut self, std: f64, rng: &mut impl FnMut() -> f64) {
        let fill = |t: &mut Tensor, s: f64, rng: &mut dyn FnMut() -> f64| {
            for v in t.data_mut() {
                *v = s * rng();
            }
        };
        let down_std = std / (2.0 * self.layers.len().max(1) as f64).sqrt();
        fill(&mut self.embedding, std, rng);
        fill(&mut self.w_in, std, rng);
        for layer in &mut self.layers {
            match &mut layer.block {
                Block::Standard(b) => {
                    fill(&mut b.w_up, std, rng);
                    fill(&mut b.w_down, down_std, rng);
                }
                Block::Gated(b) => {
                    fill(&mut b.w_gate, std, rng);
                    fill(&mut b.w_up, std, rng);
                    fill(&mut b.w_down, down_std, rng);
                }
            }
        }
        if let Some(w) = &mut self.w_out {
            fill(w, std, rng);
        }
    }

    /// Constrained per-layer activation scalars as they appear in run logs.
    /// Gated layers have no trainable activation; they echo the configured
    /// init so the log schema stays uniform across kinds.
    pub fn layer_alphas(&self) -> Vec<(f64, f64)> {
        self.layers
            .iter()
            .map(|l| match &l.block {
                Block::Standard(b) => {
                    let c = b.constrained(self.hyper);
                    (c.alpha_p, c.alpha_n)
                }
                Block::Gated(_) => self.alpha_init,
            })
            .collect()
    }
}

// Canonical flat parameter order. Everything that reads or writes the flat
// vector goes through these, so the order can never drift between the
// optimizer, the checkpoints, and finite differences.

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpecEntry {
    pub name: String,
    pub len: usize,
    pub decay: bool,
}

impl ToyLm {
    pub fn param_spec(&self) -> Vec<ParamSpecEntry> {
        let mut spec = vec![
            ParamSpecEntry { name: "embedding".into(), len: self.embedding.len(), decay: true },
            ParamSpecEntry { name: "w_in".into(), len: self.w_in.len(), decay: true },
        ];
        for (i, layer) in self.layers.iter().enumerate() {
            spec.push(ParamSpecEntry {
                name: format!("layer{i}.norm_gain"),
                len: layer.norm_gain.len(),
                decay: false,
            });
            match &layer.block {
                Block::Standard(b) => {
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.w_up"),
                        len: b.w_up.len(),
                        decay: true,
                    });
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.w_down"),
                        len: b.w_down.len(),
                        decay: true,
                    });
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.act_raw"),
                        len: 2,
                        decay: false,
                    });
                }
                Block::Gated(b) => {
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.w_gate"),
                        len: b.w_gate.len(),
                        decay: true,
                    });
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.w_up"),
                        len: b.w_up.len(),
                        decay: true,
                    });
                    spec.push(ParamSpecEntry {
                        name: format!("layer{i}.w_down"),
                        len: b.w_down.len(),
                        decay: true,
                    });
                }
            }
        }
        spec.push(ParamSpecEntry {
            name: "final_gain".into(),
            len: self.final_gain.len(),
            decay: false,
        });
        if let Some(w) = &self.w_out {
            spec.push(ParamSpecEntry { name: "w_out".into(), len: w.len(), decay: true });
        }
        spec
    }

    pub fn param_count(&self) -> usize {
        self.param_spec().iter().map(|e| e.len).sum()
    }

    pub fn copy_params(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(self.embedding.data());
        out.extend_from_slice(self.w_in.data());
        for layer in &self.layers {
            out.extend_from_slice(layer.norm_gain.data());
            match &layer.block {
                Block::Standard(b) => {
                    out.extend_from_slice(b.w_up.data());
                    out.extend_from_slice(b.w_down.data());
                    out.push(b.act_raw.alpha_p);
                    out.push(b.act_raw.alpha_n);
                }
                Block::Gated(b) => {
                    out.extend_from_slice(b.w_gate.data());
                    out.extend_from_slice(b.w_up.data());
                    out.extend_from_slice(b.w_down.data());
                }
            }
        }
        out.extend_from_slice(self.final_gain.data());
        if let Some(w) = &self.w_out {
            out.extend_from_slice(w.data());
        }
    }

    pub fn load_params(&mut self, src: &[f64]) {
        assert_eq!(src.len(), self.param_count(), "flat parameter length");
        let mut off = 0;
        let take = |t: &mut Tensor, off: &mut usize| {
            let n = t.len();
            t.data_mut().copy_from_slice(&src[*off..*off + n]);
            *off += n;
        };
        take(&mut self.embedding, &mut off);
        take(&mut self.w_in, &mut off);
        for layer in &mut self.layers {
            take(&mut layer.norm_gain, &mut off);
            match &mut layer.block {
                Block::Standard(b) => {
                    take(&mut b.w_up, &mut off);
                    take(&mut b.w_down, &mut off);
                    b.act_raw.alpha_p = src[off];
                    b.act_raw.alpha_n = src[off + 1];
                    off += 2;
                }
                Block::Gated(b) => {
                    take(&mut b.w_gate, &mut off);
                    take(&mut b.w_up, &mut off);
                    take(&mut b.w_down, &mut off);
                }
            }
        }
        take(&mut self.final_gain, &mut off);
        if let Some(w) = &mut self.w_out {
            take(w, &mut off);
        }
        debug_assert_eq!(off, src.len());
    }
}

#[derive(Debug)]
pub enum BlockGrads {
    Standard { w_up: Tensor, w_down: Tensor, alpha_p_raw: f64, alpha_n_raw: f64 },
    Gated { w_gate: Tensor, w_up: Tensor, w_down: Tensor },
}

#[derive(Debug)]
pub struct LayerGrads {
    pub norm_gain: Tensor,
    pub block: BlockGrads,
}

#[derive(Debug)]
pub struct ToyLmGrads {
    pub embedding: Tensor,
    pub w_in: Tensor,
    pub layers: Vec<LayerGrads>,
    pub final_gain: Tensor,
    pub w_out: Option<Tensor>,
}

impl ToyLmGrads {
    /// Flatten in the same canonical order as [`ToyLm::copy_params`].
    pub fn copy_flat(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(self.embedding.data());
        out.extend_from_slice(self.w_in.data());
        for layer in &self.layers {
            out.extend_from_slice(layer.norm_gain.data());
            match &layer.block {
                BlockGrads::Standard { w_up, w_down, alpha_p_raw, alpha_n_raw } => {
                    out.extend_from_slice(w_up.data());
                    out.extend_from_slice(w_down.data());
                    out.push(*alpha_p_raw);
                    out.push(*alpha_n_raw);
                }
                BlockGrads::Gated { w_gate, w_up, w_down } => {
                    out.extend_from_slice(w_gate.data());
                    out.extend_from_slice(w_up.data());
                    out.extend_from_slice(w_down.data());
                }
            }
        }
        out.extend_from_slice(self.final_gain.data());
        if let Some(w) = &self.w_out {
            out.extend_from_slice(w.data());
        }
    }
}

fn gather_windows(model: &ToyLm, tokens: &[u32], positions: &[usize]) -> Result<Tensor, ModelError> {
    if positions.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    let (k, d) = (model.context, model.d_model);
    let mut x0 = Tensor::zeros(&[positions.len(), k * d]);
    for (r, &pos) in positions.iter().enumerate() {
        if pos < k || pos >= tokens.len() {
            return Err(ModelError::BadPosition { pos, context: k, len: tokens.len() });
        }
        for (j, &tok) in tokens[pos - k..pos].iter().enumerate() {
            if tok as usize >= model.vocab {
                return Err(ModelError::VocabOverflow { id: tok, vocab: model.vocab });
            }
            x0.row_mut(r)[j * d..(j + 1) * d].copy_from_slice(model.embedding.row(tok as usize));
        }
        if tokens[pos] as usize >= model.vocab {
            return Err(ModelError::VocabOverflow { id: tokens[pos], vocab: model.vocab });
        }
    }
    Ok(x0)
}

fn logits_of(model: &ToyLm, hf: &Tensor) -> Tensor {
    match &model.w_out {
        Some(w) => matmul(hf, w),
        None => matmul_bt(hf, &model.embedding),
    }
}

/// Mean cross-entropy over the batch, forward only.
pub fn lm_loss(model: &ToyLm, tokens: &[u32], positions: &[usize]) -> Result<f64, ModelError> {
    let x0 = gather_windows(model, tokens, positions)?;
    let mut h = matmul(&x0, &model.w_in);
    for layer in &model.layers {
        let u = rmsnorm_fwd(&h, &layer.norm_gain);
        let m = match &layer.block {
            Block::Standard(b) => mlp_fwd(b, &u, model.hyper),
            Block::Gated(b) => swiglu_fwd(b, &u),
        };
        for (hv, &mv) in h.data_mut().iter_mut().zip(m.data()) {
            *hv += mv;
        }
    }
    let hf = rmsnorm_fwd(&h, &model.final_gain);
    let logits = logits_of(model, &hf);
    let mut total = 0.0;
    for (r, &pos) in positions.iter().enumerate() {
        let (loss, _) = cross_entropy(logits.row(r), tokens[pos] as usize);
        total += loss;
    }
    Ok(total / positions.len() as f64)
}

/// Mean batch loss plus gradients for every trainable parameter, including
/// per-layer raw activation scalars.
pub fn lm_loss_and_grads(
    model: &ToyLm,
    tokens: &[u32],
    positions: &[usize],
) -> Result<(f64, ToyLmGrads), ModelError> {
    let bsz = positions.len();
    let x0 = gather_windows(model, tokens, positions)?;
    let mut h = matmul(&x0, &model.w_in);

    enum Cache {
        Standard(MlpCache),
        Gated(GatedCache),
    }
    let mut layer_inputs = Vec::with_capacity(model.layers.len());
    let mut layer_normed = Vec::with_capacity(model.layers.len());
    let mut layer_caches = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        layer_inputs.push(h.clone());
        let u = rmsnorm_fwd(&h, &layer.norm_gain);
        let (m, cache) = match &layer.block {
            Block::Standard(b) => {
                let (m, c) = mlp_fwd_cached(b, &u, model.hyper);
                (m, Cache::Standard(c))
            }
            Block::Gated(b) => {
                let (m, c) = swiglu_fwd_cached(b, &u);
                (m, Cache::Gated(c))
            }
        };
        layer_normed.push(u);
        layer_caches.push(cache);
        for (hv, &mv) in h.data_mut().iter_mut().zip(m.data()) {
            *hv += mv;
        }
    }

    let hf = rmsnorm_fwd(&h, &model.final_gain);
    let logits = logits_of(model, &hf);

    let mut total = 0.0;
    let mut dlogits = Tensor::zeros(&[bsz, model.vocab]);
    let inv_b = 1.0 / bsz as f64;
    for (r, &pos) in positions.iter().enumerate() {
        let (loss, dl) = cross_entropy(logits.row(r), tokens[pos] as usize);
        total += loss;
        for (dst, &src) in dlogits.row_mut(r).iter_mut().zip(&dl) {
            *dst = src * inv_b;
        }
    }

    let mut d_embedding = Tensor::zeros(&[model.vocab, model.d_model]);
    let (dhf, d_w_out) = match &model.w_out {
        Some(w) => {
            let dhf = matmul_bt(&dlogits, w);
            let dw = matmul_at_b(&hf, &dlogits);
            (dhf, Some(dw))
        }
        None => {
            // tied head: logits = hf . emb^T, so the embedding picks up the
            // head gradient and dhf flows through the embedding matrix
            let dhf = matmul(&dlogits, &model.embedding);
            let demb = matmul_at_b(&dlogits, &hf);
            for (dst, &src) in d_embedding.data_mut().iter_mut().zip(demb.data()) {
                *dst += src;
            }
            (dhf, None)
        }
    };

    let (mut dh, d_final_gain) = rmsnorm_bwd(&h, &model.final_gain, &dhf);

    let mut layer_grads: Vec<Option<LayerGrads>> = (0..model.layers.len()).map(|_| None).collect();
    for (i, layer) in model.layers.iter().enumerate().rev() {
        let u = &layer_normed[i];
        let h_in = &layer_inputs[i];
        // residual: dh feeds both the block path and the skip path
        let (du, block_grads) = match (&layer.block, &layer_caches[i]) {
            (Block::Standard(b), Cache::Standard(c)) => {
                let g = mlp_bwd_cached(b, u, c, &dh, model.hyper);
                (
                    g.dx,
                    BlockGrads::Standard {
                        w_up: g.d_w_up,
                        w_down: g.d_w_down,
                        alpha_p_raw: g.d_alpha_p_raw,
                        alpha_n_raw: g.d_alpha_n_raw,
                    },
                )
            }
            (Block::Gated(b), Cache::Gated(c)) => {
                let g = swiglu_bwd_cached(b, u, c, &dh);
                (g.dx, BlockGrads::Gated { w_gate: g.d_w_gate, w_up: g.d_w_up, w_down: g.d_w_down })
            }
            _ => unreachable!("cache kind matches block kind"),
        };
        let (dh_norm, d_gain) = rmsnorm_bwd(h_in, &layer.norm_gain, &du);
        for (a, &b_) in dh.data_mut().iter_mut().zip(dh_norm.data()) {
            *a += b_;
        }
        layer_grads[i] = Some(LayerGrads { norm_gain: d_gain, block: block_grads });
    }

    let dx0 = matmul_bt(&dh, &model.w_in);
    let d_w_in = matmul_at_b(&x0, &dh);

    // scatter window gradients back into embedding rows
    let d = model.d_model;
    for (r, &pos) in positions.iter().enumerate() {
        for (j, &tok) in tokens[pos - model.context..pos].iter().enumerate() {
            let row = d_embedding.row_mut(tok as usize);
            for (dst, &src) in row.iter_mut().zip(&dx0.row(r)[j * d..(j + 1) * d]) {
                *dst += src;
            }
        }
    }

    Ok((
        total * inv_b,
        ToyLmGrads {
            embedding: d_embedding,
            w_in: d_w_in,
            layers: layer_grads.into_iter().map(|g| g.unwrap()).collect(),
            final_gain: d_final_gain,
            w_out: d_w_out,
        },
    ))
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned flat binary. Layout documented in docs/formats.md.
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 8] = b"GRADACT\x01";
const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(model: &ToyLm, w: &mut impl Write) -> io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for v in [model.vocab, model.d_model, model.context, model.layers.len()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    let (block_tag, act_tag) = match model.layers.first().map(|l| &l.block) {
        Some(Block::Gated(_)) => (1u8, 0u8),
        Some(Block::Standard(b)) => {
            let idx = ActivationKind::ALL.iter().position(|&k| k == b.act_kind).unwrap();
            (0u8, idx as u8)
        }
        None => (0u8, 0u8),
    };
    w.write_all(&[block_tag, act_tag, u8::from(model.w_out.is_none())])?;
    for v in [
        model.hyper.beta,
        model.hyper.eps,
        model.hyper.elu_alpha,
        model.alpha_init.0,
        model.alpha_init.1,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut flat = Vec::new();
    model.copy_params(&mut flat);
    w.write_all(&(flat.len() as u64).to_le_bytes())?;
    for v in flat {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_checkpoint(r: &mut impl Read) -> Result<ToyLm, CheckpointError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let read_u64 = |r: &mut dyn Read| -> Result<u64, CheckpointError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    };
    let vocab = read_u64(r)? as usize;
    let d_model = read_u64(r)? as usize;
    let context = read_u64(r)? as usize;
    let n_layers = read_u64(r)? as usize;
    let mut tags = [0u8; 3];
    r.read_exact(&mut tags)?;
    let read_f64 = |r: &mut dyn Read| -> Result<f64, CheckpointError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let beta = read_f64(r)?;
    let eps = read_f64(r)?;
    let elu_alpha = read_f64(r)?;
    let alpha_p_init = read_f64(r)?;
    let alpha_n_init = read_f64(r)?;
    let block = match tags[0] {
        1 => BlockKind::Gated,
        0 => {
            let kind = ActivationKind::ALL
                .get(tags[1] as usize)
                .copied()
                .ok_or_else(|| CheckpointError::Corrupt(format!("activation tag {}", tags[1])))?;
            BlockKind::Standard(kind)
        }
        t => return Err(CheckpointError::Corrupt(format!("block tag {t}"))),
    };
    let cfg = ModelConfig {
        vocab,
        d_model,
        context,
        n_layers,
        block,
        tie_embeddings: tags[2] == 1,
        hyper: FixedHyper { beta, eps, elu_alpha },
        alpha_p_init,
        alpha_n_init,
    };
    let mut model = ToyLm::new(&cfg).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let n = read_u64(r)? as usize;
    if n != model.param_count() {
        return Err(CheckpointError::Corrupt(format!(
            "parameter count {n} does not match model ({})",
            model.param_count()
        )));
    }
    let mut flat = vec![0.0; n];
    for v in flat.iter_mut() {
        *v = read_f64(r)?;
    }
    model.load_params(&flat);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn rng_fn(seed: u64) -> impl FnMut() -> f64 {
        let mut rng = SmallRng::seed_from_u64(seed);
        move || {
            // Box-Muller
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }
    }

    fn randn_tensor(shape: &[usize], scale: f64, seed: u64) -> Tensor {
        let mut f = rng_fn(seed);
        let mut t = Tensor::zeros(shape);
        for v in t.data_mut() {
            *v = scale * f();
        }
        t
    }

    #[test]
    fn rmsnorm_unit_rows() {
        let x = Tensor::from_vec(&[1, 4], vec![1.0; 4]).unwrap();
        let gain = Tensor::from_vec(&[4], vec![1.0; 4]).unwrap();
        let y = rmsnorm_fwd(&x, &gain);
        for &v in y.data() {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rmsnorm_scale_invariance() {
        // eps only matters for small inputs; at this magnitude homogeneity
        // holds to 1e-9
        let x = randn_tensor(&[3, 8], 100.0, 7);
        let mut x10 = x.clone();
        for v in x10.data_mut() {
            *v *= 10.0;
        }
        let gain = randn_tensor(&[8], 1.0, 8);
        let a = rmsnorm_fwd(&x, &gain);
        let b = rmsnorm_fwd(&x10, &gain);
        for (&u, &v) in a.data().iter().zip(b.data()) {
            assert!((u - v).abs() < 1e-9, "{u} vs {v}");
        }
    }

    fn fd_check(analytic: &[f64], f: &mut dyn FnMut(usize, f64) -> f64, n: usize, tol: f64) {
        let h = 1e-6;
        for (i, &grad) in analytic.iter().enumerate().take(n) {
            let plus = f(i, h);
            let minus = f(i, -h);
            let fd = (plus - minus) / (2.0 * h);
            let denom = grad.abs().max(fd.abs()).max(1e-8);
            let rel = (grad - fd).abs() / denom;
            assert!(rel < tol, "slot {i}: analytic {grad} fd {fd} rel {rel}");
        }
    }

    #[test]
    fn rmsnorm_backward_matches_fd() {
        let x = randn_tensor(&[2, 5], 1.0, 1);
        let gain = randn_tensor(&[5], 0.7, 2);
        let dy = randn_tensor(&[2, 5], 1.0, 3);
        let (dx, dgain) = rmsnorm_bwd(&x, &gain, &dy);
        let loss = |x: &Tensor, g: &Tensor| -> f64 {
            rmsnorm_fwd(x, g).data().iter().zip(dy.data()).map(|(a, b)| a * b).sum()
        };
        fd_check(
            dx.data(),
            &mut |i, h| {
                let mut xp = x.clone();
                xp.data_mut()[i] += h;
                loss(&xp, &gain)
            },
            x.len(),
            1e-5,
        );
        fd_check(
            dgain.data(),
            &mut |i, h| {
                let mut gp = gain.clone();
                gp.data_mut()[i] += h;
                loss(&x, &gp)
            },
            gain.len(),
            1e-5,
        );
    }

    #[test]
    fn block_hidden_sizes_follow_ratios() {
        let b = MlpBlock::new(8, ActivationKind::XIelu, RawParams::default());
        assert_eq!(b.d_hidden(), 48);
        let g = GatedMlpBlock::new(8);
        assert_eq!(g.w_up.cols(), 32);
    }

    #[test]
    fn standard_and_gated_blocks_have_equal_weight_counts() {
        for d in [4, 8, 64] {
            let s = MlpBlock::new(d, ActivationKind::Relu2, RawParams::default());
            let g = GatedMlpBlock::new(d);
            assert_eq!(s.w_up.len() + s.w_down.len(), g.weight_count());
        }
    }

    #[test]
    fn zero_input_zero_output() {
        let h = FixedHyper::default();
        for kind in [ActivationKind::XIelu, ActivationKind::XIPRelu, ActivationKind::Relu2] {
            let raw = RawParams::from_constrained_init(0.8, 0.8, h, kind).unwrap();
            let mut b = MlpBlock::new(4, kind, raw);
            b.w_up = randn_tensor(&[4, 24], 0.5, 10);
            b.w_down = randn_tensor(&[24, 4], 0.5, 11);
            let x = Tensor::zeros(&[2, 4]);
            let y = mlp_fwd(&b, &x, h);
            assert!(y.data().iter().all(|&v| v == 0.0), "{kind:?}");
        }
        let mut g = GatedMlpBlock::new(4);
        g.w_gate = randn_tensor(&[4, 16], 0.5, 12);
        g.w_up = randn_tensor(&[4, 16], 0.5, 13);
        g.w_down = randn_tensor(&[16, 4], 0.5, 14);
        let y = swiglu_fwd(&g, &Tensor::zeros(&[2, 4]));
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mlp_backward_matches_fd_for_every_kind() {
        let h = FixedHyper::default();
        for kind in ActivationKind::ALL {
            let raw = match kind.is_trainable() {
                true => RawParams::from_constrained_init(0.8, 0.8, h, kind).unwrap(),
                false => RawParams::default(),
            };
            let mut b = MlpBlock::new(3, kind, raw);
            b.w_up = randn_tensor(&[3, 18], 0.6, 20);
            b.w_down = randn_tensor(&[18, 3], 0.6, 21);
            let x = randn_tensor(&[2, 3], 1.0, 22);
            let dy = randn_tensor(&[2, 3], 1.0, 23);
            let grads = mlp_bwd(&b, &x, &dy, h);
            let loss = |b: &MlpBlock, x: &Tensor| -> f64 {
                mlp_fwd(b, x, h).data().iter().zip(dy.data()).map(|(a, c)| a * c).sum()
            };
            fd_check(
                grads.dx.data(),
                &mut |i, hh| {
                    let mut xp = x.clone();
                    xp.data_mut()[i] += hh;
                    loss(&b, &xp)
                },
                x.len(),
                2e-5,
            );
            fd_check(
                grads.d_w_up.data(),
                &mut |i, hh| {
                    let mut bp = b.clone();
                    bp.w_up.data_mut()[i] += hh;
                    loss(&bp, &x)
                },
                b.w_up.len(),
                2e-5,
            );
            // raw activation scalars
            if kind.is_trainable() {
                let analytic = [grads.d_alpha_p_raw, grads.d_alpha_n_raw];
                fd_check(
                    &analytic,
                    &mut |i, hh| {
                        let mut bp = b.clone();
                        if i == 0 {
                            bp.act_raw.alpha_p += hh;
                        } else {
                            bp.act_raw.alpha_n += hh;
                        }
                        loss(&bp, &x)
                    },
                    2,
                    2e-5,
                );
            }
        }
    }

    #[test]
    fn alpha_gradients_accumulate_linearly() {
        let h = FixedHyper::default();
        let raw = RawParams::from_constrained_init(0.8, 0.8, h, ActivationKind::XIelu).unwrap();
        let mut b = MlpBlock::new(3, ActivationKind::XIelu, raw);
        b.w_up = randn_tensor(&[3, 18], 0.6, 30);
        b.w_down = randn_tensor(&[18, 3], 0.6, 31);
        let x1 = randn_tensor(&[1, 3], 1.0, 32);
        let dy1 = randn_tensor(&[1, 3], 1.0, 33);
        let g1 = mlp_bwd(&b, &x1, &dy1, h);
        // duplicating a single-row batch doubles the accumulated sums exactly
        let x2 = Tensor::from_vec(&[2, 3], [x1.data(), x1.data()].concat()).unwrap();
        let dy2 = Tensor::from_vec(&[2, 3], [dy1.data(), dy1.data()].concat()).unwrap();
        let g2 = mlp_bwd(&b, &x2, &dy2, h);
        assert_eq!(g2.d_alpha_p_raw, 2.0 * g1.d_alpha_p_raw);
        assert_eq!(g2.d_alpha_n_raw, 2.0 * g1.d_alpha_n_raw);
    }

    #[test]
    fn trainable_blocks_emit_negative_values() {
        let h = FixedHyper::default();
        for kind in [ActivationKind::XIelu, ActivationKind::XIPRelu] {
            let raw = RawParams::from_constrained_init(0.8, 0.8, h, kind).unwrap();
            let p = act::constrain(raw, h, kind);
            let pre = randn_tensor(&[1, 512], 1.0, 40);
            let neg = pre.data().iter().filter(|&&v| act::forward(kind, v, p, h) < 0.0).count();
            assert!(neg > 50, "{kind:?}: {neg} negative outputs");
            let neg2 = pre
                .data()
                .iter()
                .filter(|&&v| act::forward(ActivationKind::Relu2, v, p, h) < 0.0)
                .count();
            assert_eq!(neg2, 0);
        }
    }

    #[test]
    fn swiglu_backward_matches_fd() {
        let mut b = GatedMlpBlock::new(3);
        b.w_gate = randn_tensor(&[3, 12], 0.6, 50);
        b.w_up = randn_tensor(&[3, 12], 0.6, 51);
        b.w_down = randn_tensor(&[12, 3], 0.6, 52);
        let x = randn_tensor(&[2, 3], 1.0, 53);
        let dy = randn_tensor(&[2, 3], 1.0, 54);
        let grads = swiglu_bwd(&b, &x, &dy);
        let loss = |b: &GatedMlpBlock, x: &Tensor| -> f64 {
            swiglu_fwd(b, x).data().iter().zip(dy.data()).map(|(a, c)| a * c).sum()
        };
        fd_check(
            grads.dx.data(),
            &mut |i, hh| {
                let mut xp = x.clone();
                xp.data_mut()[i] += hh;
                loss(&b, &xp)
            },
            x.len(),
            2e-5,
        );
        fd_check(
            grads.d_w_gate.data(),
            &mut |i, hh| {
                let mut bp = b.clone();
                bp.w_gate.data_mut()[i] += hh;
                loss(&bp, &x)
            },
            b.w_gate.len(),
            2e-5,
        );
    }

    #[test]
    fn saturated_gate_is_nearly_linear() {
        // drive the gate strongly positive: silu(g) ~ g, so the block output
        // approaches w_down . ((x w_gate) * (x w_up))
        let mut b = GatedMlpBlock::new(2);
        b.w_gate = Tensor::from_vec(&[2, 8], vec![6.0; 16]).unwrap();
        b.w_up = randn_tensor(&[2, 8], 0.5, 60);
        b.w_down = randn_tensor(&[8, 2], 0.5, 61);
        let x = Tensor::from_vec(&[1, 2], vec![1.0, 1.2]).unwrap();
        let y = swiglu_fwd(&b, &x);
        let gate = matmul(&x, &b.w_gate);
        let up = matmul(&x, &b.w_up);
        let mut lin = Tensor::zeros(&[1, 8]);
        for i in 0..8 {
            lin.data_mut()[i] = gate.data()[i] * up.data()[i];
        }
        let y_lin = matmul(&lin, &b.w_down);
        for (&a, &c) in y.data().iter().zip(y_lin.data()) {
            assert!((a - c).abs() / c.abs().max(1.0) < 1e-4, "{a} vs {c}");
        }
    }

    #[test]
    fn cross_entropy_reference_points() {
        let logits = vec![0.0; 27];
        let (loss, dl) = cross_entropy(&logits, 3);
        assert!((loss - 3.295836866004329).abs() < 1e-12);
        assert!(dl.iter().sum::<f64>().abs() < 1e-12);

        let mut spiked = vec![0.0; 5];
        spiked[2] = 1000.0;
        let (loss, _) = cross_entropy(&spiked, 2);
        assert!(loss.abs() < 1e-12);
    }

    fn tiny_model(kind: BlockKind, n_layers: usize, tie: bool) -> ToyLm {
        let cfg = ModelConfig {
            vocab: 5,
            d_model: 4,
            context: 2,
            n_layers,
            block: kind,
            tie_embeddings: tie,
            hyper: FixedHyper::default(),
            alpha_p_init: 0.8,
            alpha_n_init: 0.8,
        };
        let mut m = ToyLm::new(&cfg).unwrap();
        let mut f = rng_fn(99);
        m.init_gaussian(0.4, &mut f);
        m
    }

    #[test]
    fn toylm_loss_is_finite_and_positive() {
        let m = tiny_model(BlockKind::Standard(ActivationKind::XIelu), 1, true);
        let tokens: Vec<u32> = vec![0, 1, 2, 3, 4, 0, 1, 2];
        let loss = lm_loss(&m, &tokens, &[2, 4, 6]).unwrap();
        assert!(loss.is_finite() && loss > 0.0);
        assert_eq!(m.layer_alphas().len(), 1);
    }

    #[test]
    fn toylm_rejects_bad_inputs() {
        let m = tiny_model(BlockKind::Standard(ActivationKind::Relu2), 1, true);
        let tokens: Vec<u32> = vec![0, 1, 9, 3];
        assert!(matches!(
            lm_loss(&m, &tokens, &[3]),
            Err(ModelError::VocabOverflow { id: 9, .. })
        ));
        let tokens: Vec<u32> = vec![0, 1, 2, 3];
        assert!(matches!(lm_loss(&m, &tokens, &[1]), Err(ModelError::BadPosition { .. })));
        assert!(matches!(lm_loss(&m, &tokens, &[]), Err(ModelError::EmptyBatch)));
    }

    #[test]
    fn flat_round_trip_preserves_model() {
        let m = tiny_model(BlockKind::Standard(ActivationKind::XIelu), 2, false);
        let mut flat = Vec::new();
        m.copy_params(&mut flat);
        assert_eq!(flat.len(), m.param_count());
        let spec_total: usize = m.param_spec().iter().map(|e| e.len).sum();
        assert_eq!(spec_total, flat.len());
        let mut m2 = tiny_model(BlockKind::Standard(ActivationKind::XIelu), 2, false);
        m2.load_params(&flat);
        let tokens: Vec<u32> = vec![0, 1, 2, 3, 4, 0];
        let a = lm_loss(&m, &tokens, &[2, 5]).unwrap();
        let b = lm_loss(&m2, &tokens, &[2, 5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_round_trip() {
        for (kind, tie) in [
            (BlockKind::Standard(ActivationKind::XIelu), true),
            (BlockKind::Gated, false),
        ] {
            let m = tiny_model(kind, 2, tie);
            let mut buf = Vec::new();
            save_checkpoint(&m, &mut buf).unwrap();
            let m2 = load_checkpoint(&mut buf.as_slice()).unwrap();
            let tokens: Vec<u32> = vec![0, 1, 2, 3, 4, 0, 1];
            let a = lm_loss(&m, &tokens, &[3, 6]).unwrap();
            let b = lm_loss(&m2, &tokens, &[3, 6]).unwrap();
            assert_eq!(a, b, "{kind:?}");
        }
        // corrupt magic
        let err = load_checkpoint(&mut &b"NOTMAGIC"[..]);
        assert!(matches!(err, Err(CheckpointError::BadMagic)));
    }
}
