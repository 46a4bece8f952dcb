//! Piecewise gradient specifications and their symbolic integration.
//!
//! A gradient is described piecewise over the basis {1, x, x^2, e^x}. Affine
//! transforms scale a base gradient by a trainable alpha and shift it by a
//! fixed beta; integrating term-wise and solving the per-piece integration
//! constants yields an activation function that is continuous everywhere and
//! passes through a chosen anchor point.
//!
//! The basis deliberately stops at these four terms: every gradient this
//! workbench derives lives in it. Sigmoid-family activations are evaluated
//! in closed form in [`crate::activations`] instead.
//!
//! Specs and derived activations are immutable values; all operations are
//! pure and thread-safe.

use crate::activations::expm1_stable;
use thiserror::Error;

/// Coefficients of one piece over the basis {1, x, x^2, e^x}.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisCoeffs {
    pub constant: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub exponential: f64,
}

impl BasisCoeffs {
    pub const ZERO: BasisCoeffs =
        BasisCoeffs { constant: 0.0, linear: 0.0, quadratic: 0.0, exponential: 0.0 };

    fn is_finite(&self) -> bool {
        self.constant.is_finite()
            && self.linear.is_finite()
            && self.quadratic.is_finite()
            && self.exponential.is_finite()
    }

    fn scaled(&self, s: f64) -> BasisCoeffs {
        BasisCoeffs {
            constant: s * self.constant,
            linear: s * self.linear,
            quadratic: s * self.quadratic,
            exponential: s * self.exponential,
        }
    }

    /// Value of this piece's polynomial-plus-exponential at x. The
    /// exponential term is evaluated through expm1 with its unit offset
    /// folded into the constant, which stays exact where the constant
    /// absorbs the offset.
    fn eval(&self, x: f64) -> f64 {
        let poly = (self.linear + self.quadratic * x) * x;
        if self.exponential == 0.0 {
            self.constant + poly
        } else {
            (self.constant + self.exponential) + poly + self.exponential * expm1_stable(x)
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("spec must contain at least one piece")]
    Empty,
    #[error("expected {expected} pieces for {breakpoints} breakpoints, got {got}")]
    PieceCount { breakpoints: usize, expected: usize, got: usize },
    #[error("breakpoints must be strictly increasing and finite")]
    BadBreakpoints,
    #[error("coefficients must be finite")]
    NonFinite,
    #[error("alpha slot {slot} is not tracked (spec has {pieces} pieces)")]
    UntrackedSlot { slot: usize, pieces: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("need one transform per piece: {pieces} pieces, {transforms} transforms")]
    TransformCount { pieces: usize, transforms: usize },
}

/// A piecewise gradient over the four-term basis.
///
/// Piece `i` owns the interval `(b[i-1], b[i]]`; the value at a breakpoint
/// belongs to the piece on its left, matching the closed forms' `x <= 0`
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSpec {
    breakpoints: Vec<f64>,
    pieces: Vec<BasisCoeffs>,
}

impl GradientSpec {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<BasisCoeffs>) -> Result<GradientSpec, SpecError> {
        if pieces.is_empty() {
            return Err(SpecError::Empty);
        }
        if pieces.len() != breakpoints.len() + 1 {
            return Err(SpecError::PieceCount {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() + 1,
                got: pieces.len(),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SpecError::BadBreakpoints);
        }
        if pieces.iter().any(|p| !p.is_finite()) {
            return Err(SpecError::NonFinite);
        }
        Ok(GradientSpec { breakpoints, pieces })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[BasisCoeffs] {
        &self.pieces
    }

    /// Index of the piece that owns x (left-closed at breakpoints).
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.iter().position(|&b| x <= b).unwrap_or(self.breakpoints.len())
    }

    /// Evaluate the gradient itself at x.
    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Right-minus-left gradient jump at every breakpoint.
    pub fn discontinuities(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, self.pieces[i + 1].eval(b) - self.pieces[i].eval(b)))
            .collect()
    }

    fn piece_entirely_positive(&self, i: usize) -> bool {
        i > 0 && self.breakpoints[i - 1] >= 0.0
    }
}

/// Trainable scale, fixed shift, and the extra scale applied to pieces that
/// live entirely on the positive axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub alpha: f64,
    pub beta: f64,
    pub positive_scale: f64,
}

impl AffineTransform {
    /// The do-nothing transform.
    pub fn identity() -> AffineTransform {
        AffineTransform { alpha: 1.0, beta: 0.0, positive_scale: 1.0 }
    }

    /// Conventional transform with the positive-branch doubling.
    pub fn new(alpha: f64, beta: f64) -> AffineTransform {
        AffineTransform { alpha, beta, positive_scale: 2.0 }
    }
}

/// A gradient spec produced by an affine transform, carrying for each piece
/// the derivative of its coefficients with respect to that piece's alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSpec {
    spec: GradientSpec,
    sensitivities: Vec<BasisCoeffs>,
}

impl TransformedSpec {
    pub fn spec(&self) -> &GradientSpec {
        &self.spec
    }

    pub fn integrate(&self, anchor_x: f64, anchor_value: f64) -> DerivedActivation {
        integrate(&self.spec, anchor_x, anchor_value)
    }

    /// Integrate the alpha-derivative of the spec for one tracked slot.
    ///
    /// Coefficients and solved constants are affine in alpha, so the partial
    /// derivative of the activation with respect to a piece's alpha is the
    /// integral of that piece's coefficient sensitivity, anchored at zero
    /// (the anchor value does not depend on alpha).
    pub fn integrate_dalpha(
        &self,
        slot: usize,
        anchor_x: f64,
    ) -> Result<DerivedActivation, SpecError> {
        if slot >= self.sensitivities.len() {
            return Err(SpecError::UntrackedSlot { slot, pieces: self.sensitivities.len() });
        }
        let pieces = (0..self.spec.pieces.len())
            .map(|i| if i == slot { self.sensitivities[slot] } else { BasisCoeffs::ZERO })
            .collect();
        let dspec = GradientSpec { breakpoints: self.spec.breakpoints.clone(), pieces };
        Ok(integrate(&dspec, anchor_x, 0.0))
    }
}

/// Scale every piece by `t.alpha` (times `t.positive_scale` on pieces whose
/// domain is entirely positive) and shift every piece's constant by `t.beta`.
pub fn apply_affine(spec: &GradientSpec, t: &AffineTransform) -> TransformedSpec {
    let transforms = vec![*t; spec.pieces.len()];
    apply_affine_per_piece(spec, &transforms).expect("transform count matches by construction")
}

/// Piecewise form of [`apply_affine`]: one transform per piece, so each
/// piece gets its own trainable alpha slot.
pub fn apply_affine_per_piece(
    spec: &GradientSpec,
    transforms: &[AffineTransform],
) -> Result<TransformedSpec, SpecError> {
    if transforms.len() != spec.pieces.len() {
        return Err(SpecError::TransformCount {
            pieces: spec.pieces.len(),
            transforms: transforms.len(),
        });
    }
    let mut pieces = Vec::with_capacity(spec.pieces.len());
    let mut sensitivities = Vec::with_capacity(spec.pieces.len());
    for (i, (piece, t)) in spec.pieces.iter().zip(transforms).enumerate() {
        let scale = if spec.piece_entirely_positive(i) { t.positive_scale } else { 1.0 };
        let mut c = piece.scaled(t.alpha * scale);
        c.constant += t.beta;
        pieces.push(c);
        sensitivities.push(piece.scaled(scale));
    }
    Ok(TransformedSpec {
        spec: GradientSpec { breakpoints: spec.breakpoints.clone(), pieces },
        sensitivities,
    })
}

/// One antiderivative piece: coefficients of x, x^2, x^3, e^x plus the
/// solved integration constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiderivativePiece {
    pub coeff_x: f64,
    pub coeff_x2: f64,
    pub coeff_x3: f64,
    pub coeff_exp: f64,
    pub constant: f64,
}

impl AntiderivativePiece {
    fn from_gradient(c: &BasisCoeffs) -> AntiderivativePiece {
        AntiderivativePiece {
            coeff_x: c.constant,
            coeff_x2: c.linear / 2.0,
            coeff_x3: c.quadratic / 3.0,
            coeff_exp: c.exponential,
            constant: 0.0,
        }
    }

    /// Antiderivative value without the constant, used while solving.
    fn primitive(&self, x: f64) -> f64 {
        ((self.coeff_x3 * x + self.coeff_x2) * x + self.coeff_x) * x + self.coeff_exp * x.exp()
    }

    fn eval(&self, x: f64) -> f64 {
        let poly = ((self.coeff_x3 * x + self.coeff_x2) * x + self.coeff_x) * x;
        if self.coeff_exp == 0.0 {
            poly + self.constant
        } else {
            // coeff_exp e^x + C  ==  coeff_exp expm1(x) + (C + coeff_exp),
            // exact where the constant cancels the exponential's offset
            poly + self.coeff_exp * expm1_stable(x) + (self.constant + self.coeff_exp)
        }
    }
}

/// A piecewise antiderivative with solved continuity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedActivation {
    breakpoints: Vec<f64>,
    pieces: Vec<AntiderivativePiece>,
}

impl DerivedActivation {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[AntiderivativePiece] {
        &self.pieces
    }

    /// The solved integration constant of each piece.
    pub fn constants(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.constant).collect()
    }

    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.iter().position(|&b| x <= b).unwrap_or(self.breakpoints.len())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }
}

/// Integrate a gradient spec term-wise and solve the per-piece constants so
/// the result is continuous everywhere and passes through
/// `(anchor_x, anchor_value)`.
pub fn integrate(spec: &GradientSpec, anchor_x: f64, anchor_value: f64) -> DerivedActivation {
    assert!(anchor_x.is_finite() && anchor_value.is_finite(), "anchor must be finite");
    let mut pieces: Vec<AntiderivativePiece> =
        spec.pieces.iter().map(AntiderivativePiece::from_gradient).collect();

    let start = spec.piece_index(anchor_x);
    pieces[start].constant = anchor_value - pieces[start].primitive(anchor_x);

    // march outwards from the anchor piece, matching values at breakpoints
    for i in start..spec.breakpoints.len() {
        let b = spec.breakpoints[i];
        let left_value = pieces[i].primitive(b) + pieces[i].constant;
        pieces[i + 1].constant = left_value - pieces[i + 1].primitive(b);
    }
    for i in (0..start).rev() {
        let b = spec.breakpoints[i];
        let right_value = pieces[i + 1].primitive(b) + pieces[i + 1].constant;
        pieces[i].constant = right_value - pieces[i].primitive(b);
    }

    DerivedActivation { breakpoints: spec.breakpoints.clone(), pieces }
}

// ---------------------------------------------------------------------------
// Prebuilt specs for the activations this workbench studies.
// ---------------------------------------------------------------------------

/// ELU itself, written as a gradient over the basis:
/// `(e^x - 1)` below zero, `x` above.
pub fn elu_gradient() -> GradientSpec {
    GradientSpec::new(
        vec![0.0],
        vec![
            BasisCoeffs { constant: -1.0, exponential: 1.0, ..BasisCoeffs::ZERO },
            BasisCoeffs { linear: 1.0, ..BasisCoeffs::ZERO },
        ],
    )
    .expect("static spec")
}

/// PReLU as a gradient, with the conventional doubling already folded into
/// the negative slope so both branches integrate to plain quadratics.
pub fn prelu_gradient() -> GradientSpec {
    GradientSpec::new(
        vec![0.0],
        vec![
            BasisCoeffs { linear: 2.0, ..BasisCoeffs::ZERO },
            BasisCoeffs { linear: 1.0, ..BasisCoeffs::ZERO },
        ],
    )
    .expect("static spec")
}

/// The squared-ReLU gradient: zero below the origin, `2x` above.
pub fn relu2_gradient() -> GradientSpec {
    GradientSpec::new(
        vec![0.0],
        vec![BasisCoeffs::ZERO, BasisCoeffs { linear: 2.0, ..BasisCoeffs::ZERO }],
    )
    .expect("static spec")
}

/// The step gradient of plain ReLU, useful for demonstrating breakpoint
/// discontinuities.
pub fn relu_gradient() -> GradientSpec {
    GradientSpec::new(
        vec![0.0],
        vec![BasisCoeffs::ZERO, BasisCoeffs { constant: 1.0, ..BasisCoeffs::ZERO }],
    )
    .expect("static spec")
}

/// The full xIELU gradient: exponential negative branch scaled by alpha_n,
/// doubled linear positive branch scaled by alpha_p, beta added to both.
pub fn xielu_spec(alpha_p: f64, alpha_n: f64, beta_p: f64, beta_n: f64) -> TransformedSpec {
    let neg = AffineTransform { alpha: alpha_n, beta: beta_n, positive_scale: 2.0 };
    let pos = AffineTransform { alpha: alpha_p, beta: beta_p, positive_scale: 2.0 };
    apply_affine_per_piece(&elu_gradient(), &[neg, pos]).expect("two pieces, two transforms")
}

/// The xIPReLU gradient: doubled linear branches with independent alphas.
pub fn xiprelu_spec(alpha_p: f64, alpha_n: f64, beta_p: f64, beta_n: f64) -> TransformedSpec {
    let neg = AffineTransform { alpha: alpha_n, beta: beta_n, positive_scale: 2.0 };
    let pos = AffineTransform { alpha: alpha_p, beta: beta_p, positive_scale: 2.0 };
    apply_affine_per_piece(&prelu_gradient(), &[neg, pos]).expect("two pieces, two transforms")
}

/// Ablation variant: cubic positive component (gradient `3 alpha_p x^2`),
/// exponential negative branch as in xIELU.
pub fn cubic_positive_spec(alpha_p: f64, alpha_n: f64, beta: f64) -> TransformedSpec {
    let base = GradientSpec::new(
        vec![0.0],
        vec![
            BasisCoeffs { constant: -1.0, exponential: 1.0, ..BasisCoeffs::ZERO },
            BasisCoeffs { quadratic: 3.0, ..BasisCoeffs::ZERO },
        ],
    )
    .expect("static spec");
    let neg = AffineTransform { alpha: alpha_n, beta, positive_scale: 1.0 };
    let pos = AffineTransform { alpha: alpha_p, beta, positive_scale: 1.0 };
    apply_affine_per_piece(&base, &[neg, pos]).expect("two pieces, two transforms")
}

/// Ablation variant: negative gradient component removed entirely.
pub fn negative_zero_spec(alpha_p: f64, beta_p: f64) -> TransformedSpec {
    let base = GradientSpec::new(
        vec![0.0],
        vec![BasisCoeffs::ZERO, BasisCoeffs { linear: 1.0, ..BasisCoeffs::ZERO }],
    )
    .expect("static spec");
    let neg = AffineTransform { alpha: 0.0, beta: 0.0, positive_scale: 2.0 };
    let pos = AffineTransform { alpha: alpha_p, beta: beta_p, positive_scale: 2.0 };
    apply_affine_per_piece(&base, &[neg, pos]).expect("two pieces, two transforms")
}

// ---------------------------------------------------------------------------
// Plain-text spec format. One piece per line: interval then the four
// coefficients (constant, linear, quadratic, exponential), whitespace
// separated. See docs/formats.md for the exact grammar.
// ---------------------------------------------------------------------------

fn parse_bound(tok: &str, line: usize) -> Result<Option<f64>, SpecError> {
    match tok {
        "-inf" | "inf" | "+inf" => Ok(None),
        _ => tok
            .parse::<f64>()
            .map(Some)
            .map_err(|_| SpecError::Parse { line, msg: format!("bad bound `{tok}`") }),
    }
}

impl GradientSpec {
    /// Parse the plain-text piecewise format.
    pub fn parse(text: &str) -> Result<GradientSpec, SpecError> {
        let mut intervals: Vec<(Option<f64>, Option<f64>)> = Vec::new();
        let mut pieces = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let interval = tokens.next().unwrap();
            let nums: Vec<&str> = tokens.collect();
            if nums.len() != 4 {
                return Err(SpecError::Parse {
                    line: line_no,
                    msg: format!("expected interval and 4 coefficients, got {} values", nums.len()),
                });
            }
            let body = interval
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(']').or_else(|| s.strip_suffix(')')))
                .ok_or_else(|| SpecError::Parse {
                    line: line_no,
                    msg: format!("bad interval `{interval}`"),
                })?;
            let (lo_tok, hi_tok) = body.split_once(',').ok_or_else(|| SpecError::Parse {
                line: line_no,
                msg: format!("bad interval `{interval}`"),
            })?;
            let lo = parse_bound(lo_tok, line_no)?;
            let hi = parse_bound(hi_tok, line_no)?;
            let mut coeff = [0.0f64; 4];
            for (slot, tok) in coeff.iter_mut().zip(&nums) {
                *slot = tok.parse().map_err(|_| SpecError::Parse {
                    line: line_no,
                    msg: format!("bad coefficient `{tok}`"),
                })?;
            }
            intervals.push((lo, hi));
            pieces.push(BasisCoeffs {
                constant: coeff[0],
                linear: coeff[1],
                quadratic: coeff[2],
                exponential: coeff[3],
            });
        }
        if pieces.is_empty() {
            return Err(SpecError::Empty);
        }
        // intervals must chain from -inf to +inf
        if intervals[0].0.is_some() || intervals.last().unwrap().1.is_some() {
            return Err(SpecError::Parse {
                line: 0,
                msg: "pieces must start at -inf and end at inf".into(),
            });
        }
        let mut breakpoints = Vec::new();
        for w in 0..intervals.len() - 1 {
            let hi = intervals[w].1.ok_or_else(|| SpecError::Parse {
                line: 0,
                msg: "only the last piece may extend to inf".into(),
            })?;
            let next_lo = intervals[w + 1].0.ok_or_else(|| SpecError::Parse {
                line: 0,
                msg: "only the first piece may extend from -inf".into(),
            })?;
            if hi != next_lo {
                return Err(SpecError::Parse {
                    line: 0,
                    msg: format!("pieces are not contiguous at {hi} vs {next_lo}"),
                });
            }
            breakpoints.push(hi);
        }
        GradientSpec::new(breakpoints, pieces)
    }

    /// Render in the same plain-text format that [`GradientSpec::parse`]
    /// accepts; numbers use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# interval constant linear quadratic exponential\n");
        for (i, p) in self.pieces.iter().enumerate() {
            let lo = if i == 0 { "-inf".to_string() } else { format!("{:?}", self.breakpoints[i - 1]) };
            let (hi, close) = if i == self.pieces.len() - 1 {
                ("inf".to_string(), ')')
            } else {
                (format!("{:?}", self.breakpoints[i]), ']')
            };
            out.push_str(&format!(
                "({lo},{hi}{close} {:?} {:?} {:?} {:?}\n",
                p.constant, p.linear, p.quadratic, p.exponential
            ));
        }
        out
    }
}

impl DerivedActivation {
    /// Human-readable rendering of the antiderivative pieces.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# interval x x^2 x^3 e^x constant\n");
        for (i, p) in self.pieces.iter().enumerate() {
            let lo = if i == 0 { "-inf".to_string() } else { format!("{:?}", self.breakpoints[i - 1]) };
            let (hi, close) = if i == self.pieces.len() - 1 {
                ("inf".to_string(), ')')
            } else {
                (format!("{:?}", self.breakpoints[i]), ']')
            };
            out.push_str(&format!(
                "({lo},{hi}{close} {:?} {:?} {:?} {:?} {:?}\n",
                p.coeff_x, p.coeff_x2, p.coeff_x3, p.coeff_exp, p.constant
            ));
        }
        out
    }
}
