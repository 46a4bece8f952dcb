//! Scalar activation functions with closed-form forward passes, analytic
//! input gradients, and (for the trainable kinds) analytic parameter
//! gradients.
//!
//! The trainable kinds keep two per-layer scalars, `alpha_p` for the
//! positive branch and `alpha_n` for the negative branch. Training happens
//! in an unconstrained raw space ([`RawParams`]); [`constrain`] maps raw
//! values into the valid region ([`ConstrainedParams`]) through softplus so
//! the constraints hold structurally rather than by projection.
//!
//! Everything here is a pure function of its arguments and safe to call
//! concurrently.

use thiserror::Error;

/// Every activation kind the workbench knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Elu,
    Relu2,
    Silu,
    GeluTanh,
    XSilu,
    XIelu,
    XIPRelu,
    Relu,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 8] = [
        ActivationKind::Elu,
        ActivationKind::Relu2,
        ActivationKind::Silu,
        ActivationKind::GeluTanh,
        ActivationKind::XSilu,
        ActivationKind::XIelu,
        ActivationKind::XIPRelu,
        ActivationKind::Relu,
    ];

    /// Stable lowercase name used by the CLI and config files.
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Elu => "elu",
            ActivationKind::Relu2 => "relu2",
            ActivationKind::Silu => "silu",
            ActivationKind::GeluTanh => "gelu_tanh",
            ActivationKind::XSilu => "xsilu",
            ActivationKind::XIelu => "xielu",
            ActivationKind::XIPRelu => "xiprelu",
            ActivationKind::Relu => "relu",
        }
    }

    pub fn parse(s: &str) -> Option<ActivationKind> {
        ActivationKind::ALL.iter().copied().find(|k| k.name() == s)
    }

    /// Kinds with per-layer trainable scalars.
    pub fn is_trainable(self) -> bool {
        matches!(
            self,
            ActivationKind::XSilu | ActivationKind::XIelu | ActivationKind::XIPRelu
        )
    }

    /// Breakpoints of the piecewise definition (empty for smooth kinds).
    pub fn breakpoints(self) -> &'static [f64] {
        match self {
            ActivationKind::Silu | ActivationKind::GeluTanh | ActivationKind::XSilu => &[],
            _ => &[0.0],
        }
    }
}

/// Fixed (non-trainable) scalars shared by all layers.
#[derive(Debug, Clone, Copy)]
pub struct FixedHyper {
    /// Gradient y-intercept at the origin.
    pub beta: f64,
    /// Upper bound used by the clamped compatibility path, e.g. -1e-6.
    pub eps: f64,
    /// ELU negative saturation level.
    pub elu_alpha: f64,
}

impl Default for FixedHyper {
    fn default() -> Self {
        FixedHyper { beta: 0.5, eps: -1e-6, elu_alpha: 1.0 }
    }
}

impl FixedHyper {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.beta.is_finite() {
            return Err(ParamError::NonFinite("beta"));
        }
        if self.eps.is_nan() || self.eps >= 0.0 {
            return Err(ParamError::OutOfRange("eps must be negative"));
        }
        if self.elu_alpha.is_nan() || self.elu_alpha <= 0.0 {
            return Err(ParamError::OutOfRange("elu_alpha must be positive"));
        }
        Ok(())
    }
}

/// Unconstrained per-layer trainables. Any finite value is valid; the
/// optimizer works in this space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawParams {
    pub alpha_p: f64,
    pub alpha_n: f64,
}

/// Constrained per-layer trainables as seen by the activation formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedParams {
    pub alpha_p: f64,
    pub alpha_n: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("{0}")]
    OutOfRange(&'static str),
    #[error("inverse_softplus is only defined for positive inputs, got {0}")]
    SoftplusDomain(f64),
}

// Branch thresholds keep exp() away from overflow even when values are
// later re-rounded to narrower formats.
const SOFTPLUS_BRANCH: f64 = 30.0;

// softplus underflows to 0.0 for very negative raw values; the constraint
// contract promises strictly positive margins, so constrain() floors the
// softplus image at a value that still moves beta's last bits.
const SOFTPLUS_FLOOR: f64 = 1e-15;

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > SOFTPLUS_BRANCH {
        x
    } else if x < -SOFTPLUS_BRANCH {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// ln(e^y - 1), the inverse of [`softplus`] on (0, inf).
pub fn inverse_softplus(y: f64) -> Result<f64, ParamError> {
    if y.is_nan() || y <= 0.0 {
        return Err(ParamError::SoftplusDomain(y));
    }
    if y > SOFTPLUS_BRANCH {
        // ln(e^y - 1) = y + ln(1 - e^-y)
        Ok(y + (-(-y).exp()).ln_1p())
    } else {
        Ok(y.exp_m1().ln())
    }
}

/// Logistic sigmoid, evaluated without overflow for any finite input.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// e^x - 1 without catastrophic cancellation near zero.
///
/// The result is kept strictly above -1: for x below about -37 the
/// correctly rounded value collapses to exactly -1.0, which would let
/// downstream gradients touch their open lower bound. Returning the next
/// float above -1 instead stays within one ulp of the true value.
pub fn expm1_stable(x: f64) -> f64 {
    let v = x.exp_m1();
    if v == -1.0 {
        -1.0 + 0.5 * f64::EPSILON
    } else {
        v
    }
}

/// Map raw trainables into the constrained region for the given kind.
///
/// Policy per kind:
/// - `XIelu`:   alpha_p = softplus(raw), alpha_n = beta + softplus(raw)
/// - `XIPRelu`: both plain softplus
/// - `XSilu`:   alpha_p passes through unconstrained, alpha_n unused
/// - non-trainable kinds: identity (values are ignored by the formulas)
pub fn constrain(raw: RawParams, hyper: FixedHyper, kind: ActivationKind) -> ConstrainedParams {
    let sp = |r: f64| softplus(r).max(SOFTPLUS_FLOOR);
    match kind {
        ActivationKind::XIelu => ConstrainedParams {
            alpha_p: sp(raw.alpha_p),
            alpha_n: hyper.beta + sp(raw.alpha_n),
        },
        ActivationKind::XIPRelu => ConstrainedParams {
            alpha_p: sp(raw.alpha_p),
            alpha_n: sp(raw.alpha_n),
        },
        _ => ConstrainedParams { alpha_p: raw.alpha_p, alpha_n: raw.alpha_n },
    }
}

/// d(constrained)/d(raw) for each trainable slot, used to chain parameter
/// gradients back into raw space.
pub fn constrain_grad(raw: RawParams, kind: ActivationKind) -> (f64, f64) {
    match kind {
        ActivationKind::XIelu | ActivationKind::XIPRelu => {
            (sigmoid(raw.alpha_p), sigmoid(raw.alpha_n))
        }
        _ => (1.0, 1.0),
    }
}

impl RawParams {
    /// Raw values whose constrained image equals the requested inits.
    ///
    /// For xIELU the negative init is given in constrained space, so the
    /// raw value solves beta + softplus(raw) = alpha_n_init.
    pub fn from_constrained_init(
        alpha_p_init: f64,
        alpha_n_init: f64,
        hyper: FixedHyper,
        kind: ActivationKind,
    ) -> Result<RawParams, ParamError> {
        match kind {
            ActivationKind::XIelu => Ok(RawParams {
                alpha_p: inverse_softplus(alpha_p_init)?,
                alpha_n: inverse_softplus(alpha_n_init - hyper.beta)?,
            }),
            ActivationKind::XIPRelu => Ok(RawParams {
                alpha_p: inverse_softplus(alpha_p_init)?,
                alpha_n: inverse_softplus(alpha_n_init)?,
            }),
            _ => Ok(RawParams { alpha_p: alpha_p_init, alpha_n: alpha_n_init }),
        }
    }
}

// ---------------------------------------------------------------------------
// xIELU: quadratic positive branch, exponential negative branch.
// ---------------------------------------------------------------------------

/// Positive branch alpha_p x^2 + beta x, negative branch
/// alpha_n (e^x - 1) - alpha_n x + beta x. Continuous through the origin.
pub fn xielu_fwd(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        p.alpha_p * x * x + h.beta * x
    } else {
        p.alpha_n * expm1_stable(x) - p.alpha_n * x + h.beta * x
    }
}

/// d/dx of [`xielu_fwd`]: 2 alpha_p x + beta above zero, alpha_n (e^x - 1) + beta below.
pub fn xielu_dx(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        2.0 * p.alpha_p * x + h.beta
    } else {
        p.alpha_n * expm1_stable(x) + h.beta
    }
}

/// (d/d alpha_p, d/d alpha_n) of [`xielu_fwd`] at fixed x.
pub fn xielu_dparams(x: f64, _p: ConstrainedParams, _h: FixedHyper) -> (f64, f64) {
    if x > 0.0 {
        (x * x, 0.0)
    } else {
        // e^x - x - 1, nonnegative everywhere
        (0.0, expm1_stable(x) - x)
    }
}

// Compatibility path: imposes min(x, eps) before the exponential, in the
// forward and the gradient alike, so the pair stays a consistent
// function/derivative. Slightly discontinuous at the origin by construction.

pub fn xielu_fwd_clamped(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        p.alpha_p * x * x + h.beta * x
    } else {
        p.alpha_n * expm1_stable(x.min(h.eps)) - p.alpha_n * x + h.beta * x
    }
}

pub fn xielu_dx_clamped(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        2.0 * p.alpha_p * x + h.beta
    } else if x <= h.eps {
        p.alpha_n * expm1_stable(x) + h.beta
    } else {
        // clamp is active: the exponential term is constant here
        h.beta - p.alpha_n
    }
}

pub fn xielu_dparams_clamped(x: f64, _p: ConstrainedParams, h: FixedHyper) -> (f64, f64) {
    if x > 0.0 {
        (x * x, 0.0)
    } else {
        (0.0, expm1_stable(x.min(h.eps)) - x)
    }
}

// ---------------------------------------------------------------------------
// xIPReLU: quadratic on both branches.
// ---------------------------------------------------------------------------

pub fn xiprelu_fwd(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        p.alpha_p * x * x + h.beta * x
    } else {
        p.alpha_n * x * x + h.beta * x
    }
}

pub fn xiprelu_dx(x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    if x > 0.0 {
        2.0 * p.alpha_p * x + h.beta
    } else {
        2.0 * p.alpha_n * x + h.beta
    }
}

pub fn xiprelu_dparams(x: f64, _p: ConstrainedParams, _h: FixedHyper) -> (f64, f64) {
    if x > 0.0 {
        (x * x, 0.0)
    } else {
        (0.0, x * x)
    }
}

// ---------------------------------------------------------------------------
// Baselines.
// ---------------------------------------------------------------------------

const GELU_K: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

fn elu_fwd(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * expm1_stable(x)
    }
}

fn elu_dx(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        alpha * x.exp()
    }
}

// The tanh approximation rewritten through the sigmoid identity
// 1 + tanh(u) = 2 sigma(2u). The direct tanh form loses all relative
// precision in the saturated tail (1 + tanh(u) cancels); the sigmoid form
// keeps it, which the finite-difference checks require.

fn gelu_tanh_fwd(x: f64) -> f64 {
    let w = 2.0 * GELU_K * (x + GELU_A * x * x * x);
    x * sigmoid(w)
}

fn gelu_tanh_dx(x: f64) -> f64 {
    let w = 2.0 * GELU_K * (x + GELU_A * x * x * x);
    let s = sigmoid(w);
    let dw = 2.0 * GELU_K * (1.0 + 3.0 * GELU_A * x * x);
    s + x * s * (1.0 - s) * dw
}

fn xsilu_fwd(x: f64, alpha: f64) -> f64 {
    let s = sigmoid(x);
    x * (s * (1.0 + 2.0 * alpha) - alpha)
}

fn xsilu_dx(x: f64, alpha: f64) -> f64 {
    let s = sigmoid(x);
    let gain = 1.0 + 2.0 * alpha;
    (s * gain - alpha) + x * s * (1.0 - s) * gain
}

/// d/d alpha of xSiLU at fixed x.
fn xsilu_dalpha(x: f64) -> f64 {
    x * (2.0 * sigmoid(x) - 1.0)
}

/// Forward value of any kind. Trainable kinds read their scalars from `p`;
/// ELU reads its saturation level from `h`.
pub fn forward(kind: ActivationKind, x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    match kind {
        ActivationKind::Elu => elu_fwd(x, h.elu_alpha),
        ActivationKind::Relu2 => {
            if x > 0.0 {
                x * x
            } else {
                0.0
            }
        }
        ActivationKind::Silu => x * sigmoid(x),
        ActivationKind::GeluTanh => gelu_tanh_fwd(x),
        ActivationKind::XSilu => xsilu_fwd(x, p.alpha_p),
        ActivationKind::XIelu => xielu_fwd(x, p, h),
        ActivationKind::XIPRelu => xiprelu_fwd(x, p, h),
        ActivationKind::Relu => x.max(0.0),
    }
}

/// Input gradient of any kind.
pub fn dx(kind: ActivationKind, x: f64, p: ConstrainedParams, h: FixedHyper) -> f64 {
    match kind {
        ActivationKind::Elu => elu_dx(x, h.elu_alpha),
        ActivationKind::Relu2 => {
            if x > 0.0 {
                2.0 * x
            } else {
                0.0
            }
        }
        ActivationKind::Silu => {
            let s = sigmoid(x);
            s + x * s * (1.0 - s)
        }
        ActivationKind::GeluTanh => gelu_tanh_dx(x),
        ActivationKind::XSilu => xsilu_dx(x, p.alpha_p),
        ActivationKind::XIelu => xielu_dx(x, p, h),
        ActivationKind::XIPRelu => xiprelu_dx(x, p, h),
        ActivationKind::Relu => {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Parameter gradients (d/d alpha_p, d/d alpha_n) of any kind; zero for
/// kinds without trainables.
pub fn dparams(kind: ActivationKind, x: f64, p: ConstrainedParams, h: FixedHyper) -> (f64, f64) {
    match kind {
        ActivationKind::XIelu => xielu_dparams(x, p, h),
        ActivationKind::XIPRelu => xiprelu_dparams(x, p, h),
        ActivationKind::XSilu => (xsilu_dalpha(x), 0.0),
        _ => (0.0, 0.0),
    }
}

/// Input and parameter gradients in one pass, sharing the transcendental
/// evaluations; this is the training hot path.
pub fn backward_scalars(
    kind: ActivationKind,
    x: f64,
    p: ConstrainedParams,
    h: FixedHyper,
) -> (f64, f64, f64) {
    match kind {
        ActivationKind::XIelu => {
            if x > 0.0 {
                (2.0 * p.alpha_p * x + h.beta, x * x, 0.0)
            } else {
                let em = expm1_stable(x);
                (p.alpha_n * em + h.beta, 0.0, em - x)
            }
        }
        ActivationKind::XIPRelu => {
            if x > 0.0 {
                (2.0 * p.alpha_p * x + h.beta, x * x, 0.0)
            } else {
                (2.0 * p.alpha_n * x + h.beta, 0.0, x * x)
            }
        }
        ActivationKind::XSilu => {
            let s = sigmoid(x);
            let gain = 1.0 + 2.0 * p.alpha_p;
            let d = (s * gain - p.alpha_p) + x * s * (1.0 - s) * gain;
            (d, x * (2.0 * s - 1.0), 0.0)
        }
        _ => (dx(kind, x, p, h), 0.0, 0.0),
    }
}

// ---------------------------------------------------------------------------
// Static operation census of the scalar inference path.
// ---------------------------------------------------------------------------

/// Arithmetic operation counts for one scalar evaluation at inference time
/// (constraint reparameterization folded away).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub exps: u32,
    pub mults: u32,
    pub adds: u32,
    pub divs: u32,
    pub conditionals: u32,
}

pub fn op_count(kind: ActivationKind) -> OpCount {
    match kind {
        ActivationKind::Elu => OpCount { exps: 1, mults: 1, adds: 1, divs: 0, conditionals: 1 },
        ActivationKind::Relu2 => OpCount { exps: 0, mults: 1, adds: 0, divs: 0, conditionals: 1 },
        ActivationKind::Silu => OpCount { exps: 1, mults: 2, adds: 1, divs: 1, conditionals: 0 },
        ActivationKind::GeluTanh => {
            OpCount { exps: 2, mults: 6, adds: 4, divs: 1, conditionals: 0 }
        }
        ActivationKind::XSilu => OpCount { exps: 1, mults: 3, adds: 2, divs: 1, conditionals: 0 },
        ActivationKind::XIelu => OpCount { exps: 1, mults: 4, adds: 4, divs: 0, conditionals: 1 },
        ActivationKind::XIPRelu => {
            OpCount { exps: 0, mults: 4, adds: 1, divs: 0, conditionals: 1 }
        }
        ActivationKind::Relu => OpCount { exps: 0, mults: 0, adds: 0, divs: 0, conditionals: 1 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN_2: f64 = core::f64::consts::LN_2;

    fn defaults() -> (ConstrainedParams, FixedHyper) {
        (ConstrainedParams { alpha_p: 0.8, alpha_n: 0.8 }, FixedHyper::default())
    }

    #[test]
    fn softplus_reference_points() {
        assert!((softplus(0.0) - LN_2).abs() < 1e-15);
        // asymptote: relative error below 1e-12 for large inputs
        assert!(((softplus(100.0) - 100.0) / 100.0).abs() < 1e-12);
        // frozen oracle value: ln(e^0.8 - 1) evaluated at high precision
        assert!((softplus(0.20338232081102455) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn inverse_softplus_reference_points() {
        assert!((inverse_softplus(LN_2).unwrap()).abs() < 1e-15);
        assert!((inverse_softplus(0.8).unwrap() - 0.20338232081102455).abs() < 1e-12);
        assert!((inverse_softplus(0.3).unwrap() - (-1.0502256128148467)).abs() < 1e-12);
        assert_eq!(inverse_softplus(0.0), Err(ParamError::SoftplusDomain(0.0)));
        assert!(inverse_softplus(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn softplus_round_trip(y in 1e-6f64..1e4) {
            let x = inverse_softplus(y).unwrap();
            let back = softplus(x);
            prop_assert!(((back - y) / y).abs() < 1e-12, "y={y} back={back}");
        }

        #[test]
        fn expm1_sign_and_bound(x in -700.0f64..700.0) {
            let v = expm1_stable(x);
            prop_assert!(v > -1.0);
            if x != 0.0 {
                prop_assert_eq!(v.signum(), x.signum());
            } else {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn constrain_is_safe_everywhere(rp in -1e4f64..1e4, rn in -1e4f64..1e4) {
            let h = FixedHyper::default();
            let raw = RawParams { alpha_p: rp, alpha_n: rn };
            let c = constrain(raw, h, ActivationKind::XIelu);
            prop_assert!(c.alpha_p > 0.0);
            prop_assert!(c.alpha_n > h.beta);
            let c = constrain(raw, h, ActivationKind::XIPRelu);
            prop_assert!(c.alpha_p > 0.0);
            prop_assert!(c.alpha_n > 0.0);
        }

        #[test]
        fn xielu_continuity_at_origin(rp in -3.0f64..3.0, rn in -3.0f64..3.0) {
            let h = FixedHyper::default();
            let p = constrain(RawParams { alpha_p: rp, alpha_n: rn }, h, ActivationKind::XIelu);
            prop_assert_eq!(xielu_fwd(0.0, p, h), 0.0);
            // one-sided limits share the same value and slope
            let right = |x: f64| p.alpha_p * x * x + h.beta * x;
            prop_assert!((right(0.0) - xielu_fwd(0.0, p, h)).abs() < 1e-12);
            prop_assert!((xielu_dx(0.0, p, h) - h.beta).abs() < 1e-12);
        }

        #[test]
        fn xiprelu_continuity_at_origin(rp in -3.0f64..3.0, rn in -3.0f64..3.0) {
            let h = FixedHyper::default();
            let p = constrain(RawParams { alpha_p: rp, alpha_n: rn }, h, ActivationKind::XIPRelu);
            prop_assert_eq!(xiprelu_fwd(0.0, p, h), 0.0);
            prop_assert!((xiprelu_dx(0.0, p, h) - h.beta).abs() < 1e-12);
        }

        #[test]
        fn xielu_negative_gradient_range(rn in -3.0f64..3.0, x in -60.0f64..-1e-6) {
            let h = FixedHyper::default();
            let p = constrain(RawParams { alpha_p: 0.0, alpha_n: rn }, h, ActivationKind::XIelu);
            let g = xielu_dx(x, p, h);
            prop_assert!(g > h.beta - p.alpha_n, "x={x} g={g}");
            prop_assert!(g <= h.beta);
            // strictly increasing towards the supremum at the origin
            let g2 = xielu_dx(x / 2.0, p, h);
            prop_assert!(g2 > g);
            // the supremum beta is attained only at the origin itself
            prop_assert_eq!(xielu_dx(0.0, p, h), h.beta);
        }

        #[test]
        fn xielu_negative_gradients_exist(rn in -3.0f64..3.0) {
            let h = FixedHyper::default();
            let p = constrain(RawParams { alpha_p: 0.0, alpha_n: rn }, h, ActivationKind::XIelu);
            // alpha_n > beta guarantees a sign change at ln(1 - beta/alpha_n)
            let x_star = (1.0 - h.beta / p.alpha_n).ln();
            for x in [x_star - 0.5, x_star - 2.0, x_star - 10.0] {
                prop_assert!(xielu_dx(x, p, h) < 0.0, "x={x}");
            }
            prop_assert!(xielu_dx(x_star + 0.1, p, h) > 0.0);
        }

        #[test]
        fn xielu_positive_gradient_is_linear(
            rp in -3.0f64..3.0,
            x1 in 1e-3f64..8.0,
            dx_gap in 1e-3f64..8.0,
        ) {
            let h = FixedHyper::default();
            let p = constrain(RawParams { alpha_p: rp, alpha_n: 0.0 }, h, ActivationKind::XIelu);
            let x2 = x1 + dx_gap;
            let lhs = xielu_dx(x2, p, h) - xielu_dx(x1, p, h);
            let rhs = 2.0 * p.alpha_p * (x2 - x1);
            prop_assert!((lhs - rhs).abs() < 1e-12, "lhs={lhs} rhs={rhs}");
        }

        #[test]
        fn xsilu_degenerates_to_silu(x in -40.0f64..40.0) {
            let (_, h) = defaults();
            let p = ConstrainedParams { alpha_p: 0.0, alpha_n: 0.0 };
            let a = forward(ActivationKind::XSilu, x, p, h);
            let b = forward(ActivationKind::Silu, x, p, h);
            prop_assert!((a - b).abs() < 1e-15);
            let da = dx(ActivationKind::XSilu, x, p, h);
            let db = dx(ActivationKind::Silu, x, p, h);
            prop_assert!((da - db).abs() < 1e-15);
        }
    }

    #[test]
    fn constrain_reference_points() {
        let h = FixedHyper::default();
        let raw = RawParams {
            alpha_p: inverse_softplus(0.8).unwrap(),
            alpha_n: inverse_softplus(0.3).unwrap(),
        };
        let c = constrain(raw, h, ActivationKind::XIelu);
        assert!((c.alpha_p - 0.8).abs() < 1e-12);
        assert!((c.alpha_n - 0.8).abs() < 1e-12);

        let c = constrain(RawParams { alpha_p: -40.0, alpha_n: -40.0 }, h, ActivationKind::XIelu);
        assert!(c.alpha_p > 0.0 && c.alpha_p <= 1e-15);
        assert!(c.alpha_n > 0.5 && c.alpha_n < 0.5 + 1e-14);

        let c = constrain(RawParams { alpha_p: 0.0, alpha_n: 0.0 }, h, ActivationKind::XIelu);
        assert!((c.alpha_p - LN_2).abs() < 1e-15);
        assert!((c.alpha_n - (0.5 + LN_2)).abs() < 1e-15);
    }

    #[test]
    fn from_constrained_init_round_trips() {
        let h = FixedHyper::default();
        for kind in [ActivationKind::XIelu, ActivationKind::XIPRelu] {
            let raw = RawParams::from_constrained_init(0.8, 0.8, h, kind).unwrap();
            let c = constrain(raw, h, kind);
            assert!((c.alpha_p - 0.8).abs() < 1e-12, "{kind:?}");
            assert!((c.alpha_n - 0.8).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn expm1_reference_points() {
        assert_eq!(expm1_stable(0.0), 0.0);
        // near zero the Taylor expansion x + x^2/2 dominates
        let v = expm1_stable(-1e-12);
        assert!((v - (-1e-12 + 0.5e-24)).abs() < 1e-27);
        assert!((expm1_stable(1.0) - 1.718281828459045).abs() < 1e-15);
    }

    #[test]
    fn xielu_forward_reference_points() {
        let (p, h) = defaults();
        assert!((xielu_fwd(1.0, p, h) - 1.3).abs() < 1e-12);
        assert_eq!(xielu_fwd(0.0, p, h), 0.0);
        // frozen oracle: 0.8 (e^-1 - 1) + 0.8 - 0.5
        assert!((xielu_fwd(-1.0, p, h) - (-0.20569644706284614)).abs() < 1e-12);
    }

    #[test]
    fn xielu_gradient_reference_points() {
        let (p, h) = defaults();
        assert!((xielu_dx(1.0, p, h) - 2.1).abs() < 1e-12);
        assert!((xielu_dx(0.0, p, h) - 0.5).abs() < 1e-15);
        // deep negative tail: beta - alpha_n + alpha_n e^x
        assert!((xielu_dx(-20.0, p, h) - (-0.2999999983510771)).abs() < 1e-12);
    }

    #[test]
    fn xielu_param_gradient_reference_points() {
        let (p, h) = defaults();
        assert_eq!(xielu_dparams(2.0, p, h), (4.0, 0.0));
        assert_eq!(xielu_dparams(0.0, p, h), (0.0, 0.0));
        let (dp, dn) = xielu_dparams(-1.0, p, h);
        assert_eq!(dp, 0.0);
        assert!((dn - 0.36787944117144233).abs() < 1e-12);
    }

    #[test]
    fn xiprelu_reference_points() {
        let (p, h) = defaults();
        assert!((xiprelu_fwd(2.0, p, h) - 4.2).abs() < 1e-12);
        assert_eq!(xiprelu_fwd(0.0, p, h), 0.0);
        assert!((xiprelu_fwd(-2.0, p, h) - 2.2).abs() < 1e-12);
        assert!((xiprelu_dx(-2.0, p, h) - (-2.7)).abs() < 1e-12);
        assert!((xiprelu_dx(0.0, p, h) - 0.5).abs() < 1e-15);
        assert!((xiprelu_dx(3.0, p, h) - 5.3).abs() < 1e-12);
        assert_eq!(xiprelu_dparams(3.0, p, h), (9.0, 0.0));
        assert_eq!(xiprelu_dparams(0.0, p, h), (0.0, 0.0));
        assert_eq!(xiprelu_dparams(-3.0, p, h), (0.0, 9.0));
    }

    #[test]
    fn baseline_reference_points() {
        let (p, h) = defaults();
        assert!((forward(ActivationKind::Elu, -1.0, p, h) - (-0.6321205588285577)).abs() < 1e-12);
        assert_eq!(forward(ActivationKind::Relu2, 3.0, p, h), 9.0);
        assert_eq!(dx(ActivationKind::Relu2, 3.0, p, h), 6.0);
        assert_eq!(forward(ActivationKind::Relu2, -5.0, p, h), 0.0);
        assert_eq!(dx(ActivationKind::Relu2, -5.0, p, h), 0.0);
        let xp = ConstrainedParams { alpha_p: 0.5, alpha_n: 0.0 };
        assert_eq!(forward(ActivationKind::XSilu, 0.0, xp, h), 0.0);
        assert!((forward(ActivationKind::XSilu, 1.0, xp, h) - 0.9621171572600098).abs() < 1e-12);
    }

    #[test]
    fn clamped_pair_is_consistent() {
        // the clamped forward and clamped gradient must agree as a
        // function/derivative pair even inside the clamped band
        let (p, h) = defaults();
        let fd = |x: f64| {
            let hh = 1e-9;
            (xielu_fwd_clamped(x + hh, p, h) - xielu_fwd_clamped(x - hh, p, h)) / (2.0 * hh)
        };
        for x in [-2.0, -1e-5, -5e-7, -1e-7, -1e-8] {
            let analytic = xielu_dx_clamped(x, p, h);
            // keep clear of the clamp boundary itself where FD straddles the kink
            if (x - h.eps).abs() < 1e-8 {
                continue;
            }
            assert!((analytic - fd(x)).abs() < 1e-4, "x={x} analytic={analytic} fd={}", fd(x));
        }
        // inside the clamped band the gradient is the constant beta - alpha_n
        assert_eq!(xielu_dx_clamped(-1e-8, p, h), h.beta - p.alpha_n);
    }

    #[test]
    fn op_counts_match_census() {
        assert_eq!(
            op_count(ActivationKind::XIelu),
            OpCount { exps: 1, mults: 4, adds: 4, divs: 0, conditionals: 1 }
        );
        assert_eq!(
            op_count(ActivationKind::GeluTanh),
            OpCount { exps: 2, mults: 6, adds: 4, divs: 1, conditionals: 0 }
        );
        assert_eq!(
            op_count(ActivationKind::Silu),
            OpCount { exps: 1, mults: 2, adds: 1, divs: 1, conditionals: 0 }
        );
        // xIPReLU = ReLU^2 plus 3 multiplications and 1 addition
        let r2 = op_count(ActivationKind::Relu2);
        let xp = op_count(ActivationKind::XIPRelu);
        assert_eq!(xp.mults, r2.mults + 3);
        assert_eq!(xp.adds, r2.adds + 1);
        assert_eq!(xp.exps, r2.exps);
        assert_eq!(xp.divs, r2.divs);
        assert_eq!(xp.conditionals, r2.conditionals);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ActivationKind::ALL {
            assert_eq!(ActivationKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(ActivationKind::parse("nope"), None);
    }
}
