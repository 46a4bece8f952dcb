//! Verification instruments: finite-difference gradient checks, analytic
//! continuity audits at breakpoints, and reduced-precision emulation that
//! makes the catastrophic-cancellation failure of a naive `e^x - 1`
//! observable and measurable.

use crate::activations::{self as act, ActivationKind, ConstrainedParams, FixedHyper, RawParams};
use crate::nn::{lm_loss, lm_loss_and_grads, ModelError, ToyLm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric difference quotient (f(x+h) - f(x-h)) / 2h.
///
/// At a kink the two sides average out; callers that care must keep their
/// samples away from breakpoints.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    assert!(h > 0.0, "step must be positive");
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Relative error with a floor in the denominator to avoid 0/0.
pub fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub label: String,
    pub samples: usize,
    pub max_rel_err: f64,
    pub worst_x: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GradCheckReport {
    pub const CSV_HEADER: &'static str = "check,samples,max_rel_err,worst_x,tolerance,pass";

    fn from_worst(label: String, samples: usize, max_rel_err: f64, worst_x: f64, tol: f64) -> Self {
        GradCheckReport {
            label,
            samples,
            max_rel_err,
            worst_x,
            tolerance: tol,
            pass: max_rel_err < tol,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.label,
            self.samples,
            crate::report::fmt_real(self.max_rel_err),
            crate::report::fmt_real(self.worst_x),
            crate::report::fmt_real(self.tolerance),
            self.pass
        )
    }
}

const FD_STEP_INPUT: f64 = 1e-6;
const FD_STEP_PARAM: f64 = 1e-6;
/// Band around breakpoints excluded for the one kind whose gradient is
/// actually discontinuous there.
const RELU_KINK_BAND: f64 = 1e-4;

fn draw_params(kind: ActivationKind, hyper: FixedHyper, rng: &mut ChaCha8Rng) -> ConstrainedParams {
    let raw = RawParams {
        alpha_p: rng.random_range(-3.0..3.0),
        alpha_n: rng.random_range(-3.0..3.0),
    };
    match kind {
        ActivationKind::XSilu => {
            // unconstrained scalar; keep it in a range where curves stay tame
            ConstrainedParams { alpha_p: rng.random_range(-1.5..1.5), alpha_n: 0.0 }
        }
        _ => act::constrain(raw, hyper, kind),
    }
}

/// Compare the analytic input gradient of a kind against central finite
/// differences over random parameter draws and inputs in [-8, 8].
pub fn gradcheck_activation(
    kind: ActivationKind,
    hyper: FixedHyper,
    samples: usize,
    tol: f64,
    seed: u64,
) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0;
    let mut worst_x = 0.0;
    let mut used = 0;
    while used < samples {
        let p = draw_params(kind, hyper, &mut rng);
        let x: f64 = rng.random_range(-8.0..8.0);
        if kind == ActivationKind::Relu && x.abs() < RELU_KINK_BAND {
            continue;
        }
        let analytic = act::dx(kind, x, p, hyper);
        let fd = central_diff(|t| act::forward(kind, t, p, hyper), x, FD_STEP_INPUT);
        let rel = rel_err(analytic, fd);
        if rel > max_rel {
            max_rel = rel;
            worst_x = x;
        }
        used += 1;
    }
    GradCheckReport::from_worst(format!("input_grad/{}", kind.name()), used, max_rel, worst_x, tol)
}

/// Compare analytic parameter gradients (d/d alpha_p, d/d alpha_n in
/// constrained space) against finite differences over the parameters.
pub fn gradcheck_params(
    kind: ActivationKind,
    hyper: FixedHyper,
    samples: usize,
    tol: f64,
    seed: u64,
) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0;
    let mut worst_x = 0.0;
    for _ in 0..samples {
        let p = draw_params(kind, hyper, &mut rng);
        let x: f64 = rng.random_range(-8.0..8.0);
        let (dap, dan) = act::dparams(kind, x, p, hyper);
        let fd_p = central_diff(
            |a| act::forward(kind, x, ConstrainedParams { alpha_p: a, ..p }, hyper),
            p.alpha_p,
            FD_STEP_PARAM,
        );
        let fd_n = central_diff(
            |a| act::forward(kind, x, ConstrainedParams { alpha_n: a, ..p }, hyper),
            p.alpha_n,
            FD_STEP_PARAM,
        );
        for (analytic, fd) in [(dap, fd_p), (dan, fd_n)] {
            let rel = rel_err(analytic, fd);
            if rel > max_rel {
                max_rel = rel;
                worst_x = x;
            }
        }
    }
    GradCheckReport::from_worst(
        format!("param_grad/{}", kind.name()),
        samples,
        max_rel,
        worst_x,
        tol,
    )
}

// ---------------------------------------------------------------------------
// Continuity audit from closed-form one-sided limits.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointAudit {
    pub breakpoint: f64,
    /// right-limit minus left-limit of the function value
    pub value_jump: f64,
    /// right-limit minus left-limit of the derivative
    pub slope_jump: f64,
}

/// One-sided limits at each breakpoint, from the piece formulas directly.
/// `beta_p` / `beta_n` may differ to audit the mismatched-intercept
/// ablations; the standard configuration passes `hyper.beta` for both.
pub fn continuity_audit_betas(
    kind: ActivationKind,
    p: ConstrainedParams,
    hyper: FixedHyper,
    beta_p: f64,
    beta_n: f64,
) -> Vec<BreakpointAudit> {
    // every piecewise kind here breaks only at the origin, where the value
    // limits of both branches vanish except for ELU's exact zero as well
    match kind {
        ActivationKind::Silu | ActivationKind::GeluTanh | ActivationKind::XSilu => vec![],
        ActivationKind::Relu => {
            vec![BreakpointAudit { breakpoint: 0.0, value_jump: 0.0, slope_jump: 1.0 - 0.0 }]
        }
        ActivationKind::Relu2 => {
            vec![BreakpointAudit { breakpoint: 0.0, value_jump: 0.0, slope_jump: 0.0 }]
        }
        ActivationKind::Elu => vec![BreakpointAudit {
            breakpoint: 0.0,
            value_jump: 0.0 - hyper.elu_alpha * 0.0,
            slope_jump: 1.0 - hyper.elu_alpha,
        }],
        ActivationKind::XIelu => vec![BreakpointAudit {
            breakpoint: 0.0,
            // left: alpha_n (e^0 - 1) - alpha_n 0 + beta_n 0; right: 0
            value_jump: 0.0 - (p.alpha_n * 0.0),
            // left: alpha_n (e^0 - 1) + beta_n = beta_n; right: beta_p
            slope_jump: beta_p - beta_n,
        }],
        ActivationKind::XIPRelu => vec![BreakpointAudit {
            breakpoint: 0.0,
            value_jump: 0.0,
            slope_jump: beta_p - beta_n,
        }],
    }
}

pub fn continuity_audit(
    kind: ActivationKind,
    p: ConstrainedParams,
    hyper: FixedHyper,
) -> Vec<BreakpointAudit> {
    continuity_audit_betas(kind, p, hyper, hyper.beta, hyper.beta)
}

/// Worst jumps over `draws` random valid parameter settings.
pub fn continuity_audit_draws(
    kind: ActivationKind,
    hyper: FixedHyper,
    draws: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_value = 0.0f64;
    let mut worst_slope = 0.0f64;
    for _ in 0..draws {
        let p = draw_params(kind, hyper, &mut rng);
        for audit in continuity_audit(kind, p, hyper) {
            worst_value = worst_value.max(audit.value_jump.abs());
            worst_slope = worst_slope.max(audit.slope_jump.abs());
        }
    }
    (worst_value, worst_slope)
}

// ---------------------------------------------------------------------------
// Reduced-precision emulation.
// ---------------------------------------------------------------------------

/// Precision used for the stability probes. Emulated modes round every
/// intermediate value to the target significand width, round-to-nearest-even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionMode {
    Double,
    EmulatedSingle,
    EmulatedBf16,
}

impl PrecisionMode {
    pub fn parse(s: &str) -> Option<PrecisionMode> {
        match s {
            "double" => Some(PrecisionMode::Double),
            "single" => Some(PrecisionMode::EmulatedSingle),
            "bf16" => Some(PrecisionMode::EmulatedBf16),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrecisionMode::Double => "double",
            PrecisionMode::EmulatedSingle => "single",
            PrecisionMode::EmulatedBf16 => "bf16",
        }
    }

    fn sig_bits(self) -> Option<u32> {
        match self {
            PrecisionMode::Double => None,
            PrecisionMode::EmulatedSingle => Some(24),
            PrecisionMode::EmulatedBf16 => Some(8),
        }
    }
}

/// Round the significand of an f64 to `sig_bits` bits (including the
/// implicit leading bit), round-to-nearest-even. Exponent range is not
/// narrowed; the probes stay far from overflow and subnormals.
fn round_sig(x: f64, sig_bits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let shift = 53 - sig_bits;
    let bits = x.to_bits();
    let keep = bits >> shift;
    let tail = bits & ((1u64 << shift) - 1);
    let half = 1u64 << (shift - 1);
    let round_up = tail > half || (tail == half && (keep & 1) == 1);
    f64::from_bits((keep + u64::from(round_up)) << shift)
}

/// Round a value into the given precision mode.
pub fn round_to_mode(x: f64, mode: PrecisionMode) -> f64 {
    match mode.sig_bits() {
        None => x,
        Some(bits) => round_sig(x, bits),
    }
}

struct Arith(PrecisionMode);

impl Arith {
    fn r(&self, v: f64) -> f64 {
        round_to_mode(v, self.0)
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        self.r(a + b)
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        self.r(a - b)
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        self.r(a * b)
    }
    fn div(&self, a: f64, b: f64) -> f64 {
        self.r(a / b)
    }
    fn exp(&self, a: f64) -> f64 {
        self.r(a.exp())
    }
}

/// e^x - 1 computed the obvious way in the emulated precision: exponentiate,
/// then subtract one. Loses all significant digits as x approaches zero.
pub fn naive_expm1_in(mode: PrecisionMode, x: f64) -> f64 {
    let a = Arith(mode);
    let x = a.r(x);
    a.sub(a.exp(x), 1.0)
}

/// e^x - 1 via a truncated Horner series for small |x|, in the emulated
/// precision. Mirrors what a dedicated expm1 routine achieves.
pub fn stable_expm1_in(mode: PrecisionMode, x: f64) -> f64 {
    let a = Arith(mode);
    let x = a.r(x);
    if x.abs() > 0.5 {
        // no cancellation out here
        return a.sub(a.exp(x), 1.0);
    }
    let mut acc = 1.0;
    for k in (2..=10u32).rev() {
        acc = a.add(1.0, a.mul(a.div(x, f64::from(k)), acc));
    }
    a.mul(x, acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityProbe {
    pub x: f64,
    pub naive: f64,
    pub stable: f64,
    pub reference: f64,
    pub naive_rel_err: f64,
    pub stable_rel_err: f64,
}

/// Measure both evaluation routes for e^x - 1 at a negative input against a
/// double-precision reference.
pub fn stability_probe(x: f64, mode: PrecisionMode) -> StabilityProbe {
    assert!(x < 0.0, "probe is defined for x < 0");
    let reference = x.exp_m1();
    let naive = naive_expm1_in(mode, x);
    let stable = stable_expm1_in(mode, x);
    StabilityProbe {
        x,
        naive,
        stable,
        reference,
        naive_rel_err: ((naive - reference) / reference).abs(),
        stable_rel_err: ((stable - reference) / reference).abs(),
    }
}

// ---------------------------------------------------------------------------
// End-to-end model gradient check.
// ---------------------------------------------------------------------------

/// Finite differences over every trainable scalar of a model on one batch.
pub fn gradcheck_model(
    model: &ToyLm,
    tokens: &[u32],
    positions: &[usize],
    step: f64,
    tol: f64,
) -> Result<GradCheckReport, ModelError> {
    let (_, grads) = lm_loss_and_grads(model, tokens, positions)?;
    let mut flat_grads = Vec::new();
    grads.copy_flat(&mut flat_grads);
    let mut flat = Vec::new();
    model.copy_params(&mut flat);
    assert_eq!(flat.len(), flat_grads.len());

    let mut probe = model.clone();
    let mut max_rel = 0.0;
    let mut worst = 0.0;
    for i in 0..flat.len() {
        let orig = flat[i];
        flat[i] = orig + step;
        probe.load_params(&flat);
        let up = lm_loss(&probe, tokens, positions)?;
        flat[i] = orig - step;
        probe.load_params(&flat);
        let down = lm_loss(&probe, tokens, positions)?;
        flat[i] = orig;
        let fd = (up - down) / (2.0 * step);
        let rel = rel_err(flat_grads[i], fd);
        if rel > max_rel {
            max_rel = rel;
            worst = i as f64;
        }
    }
    Ok(GradCheckReport::from_worst(
        "model_grad".into(),
        flat.len(),
        max_rel,
        worst,
        tol,
    ))
}
