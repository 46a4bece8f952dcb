//! Decoupled-weight-decay Adam with global-norm gradient clipping.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("non-finite gradient at flat index {index} (value {value})")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("length mismatch: params {params}, grads {grads}, state {state}")]
    LengthMismatch { params: usize, grads: usize, state: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub grad_clip: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { beta1: 0.9, beta2: 0.95, eps: 1e-8, weight_decay: 0.1, grad_clip: 1.0 }
    }
}

/// Optimizer state over a flat parameter vector. The decay mask, fixed at
/// construction, keeps weight decay off the activation scalars and norm
/// gains; it is stored as 0/1 multipliers so the update loop stays
/// branch-free.
#[derive(Debug, Clone)]
pub struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    decay_scale: Vec<f64>,
    step: u64,
    pub hyper: AdamHyper,
}

impl AdamW {
    pub fn new(decay_mask: &[bool], hyper: AdamHyper) -> AdamW {
        let n = decay_mask.len();
        AdamW {
            m: vec![0.0; n],
            v: vec![0.0; n],
            decay_scale: decay_mask.iter().map(|&d| if d { 1.0 } else { 0.0 }).collect(),
            step: 0,
            hyper,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update. Clips the gradient to the configured global norm first,
    /// then applies bias-corrected moment updates and decoupled decay.
    /// Returns the pre-clip gradient norm.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grads: &mut [f64],
        lr: f64,
    ) -> Result<f64, OptimError> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(OptimError::LengthMismatch {
                params: params.len(),
                grads: grads.len(),
                state: self.m.len(),
            });
        }
        for (i, &g) in grads.iter().enumerate() {
            if !g.is_finite() {
                return Err(OptimError::NonFiniteGradient { index: i, value: g });
            }
        }
        let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        if self.hyper.grad_clip > 0.0 && norm > self.hyper.grad_clip {
            let scale = self.hyper.grad_clip / norm;
            for g in grads.iter_mut() {
                *g *= scale;
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let inv_bc1 = 1.0 / (1.0 - self.hyper.beta1.powi(t));
        let inv_bc2 = 1.0 / (1.0 - self.hyper.beta2.powi(t));
        let (b1, b2) = (self.hyper.beta1, self.hyper.beta2);
        let (eps, wd) = (self.hyper.eps, self.hyper.weight_decay);
        for ((((p, &g), m), v), &ds) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
            .zip(self.decay_scale.iter())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m * inv_bc1;
            let v_hat = *v * inv_bc2;
            *p -= lr * (m_hat / (v_hat.sqrt() + eps) + wd * ds * *p);
        }
        Ok(norm)
    }
}
