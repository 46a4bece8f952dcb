//! Implementations behind the `gradact` binary's subcommands. Each command
//! is a plain function over parsed arguments so the thin binary in
//! `main.rs` only does flag parsing and exit-code mapping.
//!
//! Exit-code contract: 0 all checks passed / work done, 1 a check failed or
//! the run failed, 2 bad usage or malformed input files.

use crate::activations::{self as act, op_count, ActivationKind, ConstrainedParams, FixedHyper};
use crate::derivation::GradientSpec;
use crate::nn::{save_checkpoint, BlockKind, ModelConfig, ToyLm};
use crate::report::fmt_real;
use crate::train::{self, RunLog, TrainConfig};
use crate::verify::{
    gradcheck_activation, gradcheck_model, gradcheck_params, stability_probe, GradCheckReport,
    PrecisionMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Bundled public-domain corpus fixture, also committed at
/// `data/corpus.txt`; used when `train` is not given an explicit corpus.
pub const BUNDLED_CORPUS: &str = include_str!("../data/corpus.txt");

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or malformed input files; exit 2.
    Usage(String),
    /// A verification check failed; exit 1.
    CheckFailed(String),
    /// IO or runtime failure; exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::CheckFailed(_) | CliError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::CheckFailed(m) | CliError::Failure(m) => m,
        }
    }
}

fn io_err(what: &str, e: std::io::Error) -> CliError {
    CliError::Failure(format!("{what}: {e}"))
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CurveArgs {
    pub kind: ActivationKind,
    pub alpha_p: f64,
    pub alpha_n: f64,
    pub beta: f64,
    pub elu_alpha: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub samples: usize,
    pub out: PathBuf,
    /// (parameter name, values): one output file per value.
    pub sweep: Option<(String, Vec<f64>)>,
}

pub fn curve_csv(
    kind: ActivationKind,
    p: ConstrainedParams,
    hyper: FixedHyper,
    xmin: f64,
    xmax: f64,
    samples: usize,
) -> String {
    assert!(samples >= 2 && xmin < xmax, "caller validates the grid");
    let mut out = String::from("x,f,dfdx\n");
    for i in 0..samples {
        let x = xmin + (xmax - xmin) * i as f64 / (samples - 1) as f64;
        let f = act::forward(kind, x, p, hyper);
        let d = act::dx(kind, x, p, hyper);
        let _ = writeln!(out, "{},{},{}", fmt_real(x), fmt_real(f), fmt_real(d));
    }
    out
}

fn sweep_path(out: &Path, param: &str, value: f64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_{param}_{value}.{ext}"))
}

pub fn cmd_curve(args: &CurveArgs) -> Result<(), CliError> {
    if args.xmin.is_nan() || args.xmax.is_nan() || args.xmin >= args.xmax {
        return Err(CliError::Usage(format!(
            "--xmin must be below --xmax (got {} and {})",
            args.xmin, args.xmax
        )));
    }
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let hyper = FixedHyper { beta: args.beta, elu_alpha: args.elu_alpha, ..FixedHyper::default() };
    let base = ConstrainedParams { alpha_p: args.alpha_p, alpha_n: args.alpha_n };

    match &args.sweep {
        None => {
            let csv = curve_csv(args.kind, base, hyper, args.xmin, args.xmax, args.samples);
            fs::write(&args.out, csv).map_err(|e| io_err("writing curve", e))?;
            println!("wrote {}", args.out.display());
        }
        Some((param, values)) => {
            for &v in values {
                let (p, h) = match param.as_str() {
                    "alpha_p" => (ConstrainedParams { alpha_p: v, ..base }, hyper),
                    "alpha_n" => (ConstrainedParams { alpha_n: v, ..base }, hyper),
                    "beta" => (base, FixedHyper { beta: v, ..hyper }),
                    other => {
                        return Err(CliError::Usage(format!(
                            "--sweep parameter must be alpha_p, alpha_n or beta, got `{other}`"
                        )))
                    }
                };
                let csv = curve_csv(args.kind, p, h, args.xmin, args.xmax, args.samples);
                let path = sweep_path(&args.out, param, v);
                fs::write(&path, csv).map_err(|e| io_err("writing curve", e))?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

pub fn cmd_derive(
    spec_path: &Path,
    anchor: (f64, f64),
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(spec_path).map_err(|e| io_err("reading spec", e))?;
    let spec = GradientSpec::parse(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let derived = crate::derivation::integrate(&spec, anchor.0, anchor.1);

    println!("gradient pieces: {}", spec.pieces().len());
    for (b, jump) in spec.discontinuities() {
        println!("gradient jump at x = {b}: {}", fmt_real(jump));
    }
    for (i, c) in derived.constants().iter().enumerate() {
        println!("piece {i}: C = {}", fmt_real(*c));
    }
    let rendered = derived.to_text();
    if let Some(path) = out {
        fs::write(path, &rendered).map_err(|e| io_err("writing derived activation", e))?;
        println!("wrote {}", path.display());
    } else {
        print!("{rendered}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

pub const GRADCHECK_INPUT_SAMPLES: usize = 1000;
pub const GRADCHECK_INPUT_TOL: f64 = 1e-5;
pub const GRADCHECK_PARAM_TOL: f64 = 1e-6;
pub const GRADCHECK_MODEL_TOL: f64 = 1e-4;
pub const GRADCHECK_MODEL_STEP: f64 = 1e-5;

/// A small well-conditioned model for end-to-end checks: larger init than a
/// training model so every finite difference has signal.
pub fn gradcheck_model_for(block: BlockKind, seed: u64) -> ToyLm {
    let cfg = ModelConfig {
        vocab: 5,
        d_model: 4,
        context: 2,
        n_layers: 1,
        block,
        tie_embeddings: true,
        hyper: FixedHyper::default(),
        alpha_p_init: 0.8,
        alpha_n_init: 0.8,
    };
    let mut m = ToyLm::new(&cfg).expect("static config");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    m.init_gaussian(0.4, &mut gauss);
    m
}

pub const GRADCHECK_TOKENS: [u32; 9] = [0, 1, 2, 3, 4, 0, 1, 2, 3];
pub const GRADCHECK_POSITIONS: [usize; 3] = [2, 5, 8];

type Cell = Box<dyn FnOnce() -> GradCheckReport + Send>;

/// Run the full gradient-check suite over the requested kinds; returns all
/// reports in a deterministic order. `include_gated` appends the gated
/// model check, which belongs to no single activation kind.
pub fn gradcheck_suite(
    kinds: &[ActivationKind],
    seed: u64,
    jobs: usize,
    include_gated: bool,
) -> Vec<GradCheckReport> {
    let hyper = FixedHyper::default();
    let mut cells: Vec<Cell> = Vec::new();
    for (i, &kind) in kinds.iter().enumerate() {
        let cell_seed = seed.wrapping_add(i as u64);
        cells.push(Box::new(move || {
            gradcheck_activation(kind, hyper, GRADCHECK_INPUT_SAMPLES, GRADCHECK_INPUT_TOL, cell_seed)
        }));
        cells.push(Box::new(move || {
            gradcheck_params(kind, hyper, GRADCHECK_INPUT_SAMPLES, GRADCHECK_PARAM_TOL, cell_seed)
        }));
        cells.push(Box::new(move || {
            let model = gradcheck_model_for(BlockKind::Standard(kind), cell_seed);
            let mut report = gradcheck_model(
                &model,
                &GRADCHECK_TOKENS,
                &GRADCHECK_POSITIONS,
                GRADCHECK_MODEL_STEP,
                GRADCHECK_MODEL_TOL,
            )
            .expect("static batch");
            report.label = format!("model_grad/{}", kind.name());
            report
        }));
    }
    if include_gated {
        let gated_seed = seed.wrapping_add(kinds.len() as u64);
        cells.push(Box::new(move || {
            let model = gradcheck_model_for(BlockKind::Gated, gated_seed);
            let mut report = gradcheck_model(
                &model,
                &GRADCHECK_TOKENS,
                &GRADCHECK_POSITIONS,
                GRADCHECK_MODEL_STEP,
                GRADCHECK_MODEL_TOL,
            )
            .expect("static batch");
            report.label = "model_grad/swiglu".into();
            report
        }));
    }

    run_cells(cells, jobs)
}

/// Execute closures across up to `jobs` threads, results in input order.
fn run_cells(cells: Vec<Cell>, jobs: usize) -> Vec<GradCheckReport> {
    if jobs <= 1 {
        return cells.into_iter().map(|c| c()).collect();
    }
    let n = cells.len();
    let work: std::sync::Mutex<Vec<Option<Cell>>> =
        std::sync::Mutex::new(cells.into_iter().map(Some).collect());
    let results: std::sync::Mutex<Vec<Option<GradCheckReport>>> =
        std::sync::Mutex::new((0..n).map(|_| None).collect());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let cell = work.lock().unwrap()[i].take().expect("each cell runs once");
                let report = cell();
                results.lock().unwrap()[i] = Some(report);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("all cells ran")).collect()
}

pub fn cmd_gradcheck(
    kind: &str,
    seed: u64,
    out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let all = kind == "all";
    let kinds: Vec<ActivationKind> = if all {
        ActivationKind::ALL.to_vec()
    } else {
        vec![ActivationKind::parse(kind)
            .ok_or_else(|| CliError::Usage(format!("unknown activation `{kind}`")))?]
    };
    let reports = gradcheck_suite(&kinds, seed, jobs.max(1), all);
    let mut csv = String::from(GradCheckReport::CSV_HEADER);
    csv.push('\n');
    let mut worst: Option<&GradCheckReport> = None;
    for r in &reports {
        println!(
            "{} {:28} max_rel_err {:.3e} (tol {:.0e}, {} samples)",
            if r.pass { "PASS" } else { "FAIL" },
            r.label,
            r.max_rel_err,
            r.tolerance,
            r.samples
        );
        csv.push_str(&r.csv_row());
        csv.push('\n');
        if !r.pass && worst.is_none_or(|w| r.max_rel_err > w.max_rel_err) {
            worst = Some(r);
        }
    }
    if let Some(path) = out {
        fs::write(path, csv).map_err(|e| io_err("writing report", e))?;
    }
    match worst {
        Some(w) => Err(CliError::CheckFailed(format!(
            "gradcheck failed: {} max_rel_err {} at x = {}",
            w.label, w.max_rel_err, w.worst_x
        ))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

pub const STABILITY_PROBE_POINTS: [f64; 5] = [-1.0, -1e-3, -1e-6, -1e-8, -1e-10];

pub fn stability_csv(mode: PrecisionMode) -> String {
    let mut csv = String::from("x,naive,stable,reference,naive_rel_err,stable_rel_err\n");
    for &x in &STABILITY_PROBE_POINTS {
        let p = stability_probe(x, mode);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_real(p.x),
            fmt_real(p.naive),
            fmt_real(p.stable),
            fmt_real(p.reference),
            fmt_real(p.naive_rel_err),
            fmt_real(p.stable_rel_err)
        );
    }
    csv
}

pub fn cmd_stability(mode: PrecisionMode, out: Option<&Path>) -> Result<(), CliError> {
    let csv = stability_csv(mode);
    print!("{csv}");
    if let Some(path) = out {
        fs::write(path, &csv).map_err(|e| io_err("writing report", e))?;
    }
    // the pass criterion: in lossy modes the stable route must beat the
    // naive route where cancellation bites
    let ok = match mode {
        PrecisionMode::Double => true,
        PrecisionMode::EmulatedSingle => [-1e-6, -1e-8, -1e-10].iter().all(|&x| {
            let p = stability_probe(x, mode);
            p.naive_rel_err > 1e-3 && p.stable_rel_err < 1e-6
        }),
        PrecisionMode::EmulatedBf16 => {
            let p = stability_probe(-1e-3, mode);
            p.naive_rel_err > p.stable_rel_err
        }
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("stability ordering violated in {} mode", mode.name())))
    }
}

// ---------------------------------------------------------------------------
// train / alphas
// ---------------------------------------------------------------------------

pub fn cmd_train(
    config_path: &Path,
    out_dir: &Path,
    corpus_path: Option<&Path>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| io_err("reading config", e))?;
    let cfg = TrainConfig::parse(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let corpus = match corpus_path {
        Some(p) => fs::read_to_string(p).map_err(|e| io_err("reading corpus", e))?,
        None => BUNDLED_CORPUS.to_string(),
    };
    let started = Instant::now();
    let out = train::train(&cfg, &corpus).map_err(|e| CliError::Failure(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| io_err("creating output dir", e))?;
    let log_path = out_dir.join("runlog.csv");
    fs::write(&log_path, out.log.to_csv()).map_err(|e| io_err("writing run log", e))?;
    let ckpt_path = out_dir.join("checkpoint.bin");
    let mut file = fs::File::create(&ckpt_path).map_err(|e| io_err("creating checkpoint", e))?;
    save_checkpoint(&out.model, &mut file).map_err(|e| io_err("writing checkpoint", e))?;
    println!(
        "trained {} for {} steps in {:.1}s: vocab {}, ln(vocab) {:.4}, final smoothed loss {:.4}",
        cfg.activation.name(),
        cfg.steps,
        started.elapsed().as_secs_f64(),
        out.vocab,
        (out.vocab as f64).ln(),
        out.final_smoothed_loss
    );
    println!("wrote {} and {}", log_path.display(), ckpt_path.display());
    Ok(())
}

/// Per-layer table of the learned activation scalars from a run log.
pub fn alphas_table(log: &RunLog) -> String {
    let mut s = String::from("layer  depth  alpha_p             alpha_n\n");
    if let Some(last) = log.rows.last() {
        let denom = (log.layers.max(2) - 1) as f64;
        for i in 0..log.layers {
            let depth = i as f64 / denom;
            let _ = writeln!(
                s,
                "{i:<5}  {depth:<5.2} {:<19.12} {:<19.12}",
                last.alpha_p[i], last.alpha_n[i]
            );
        }
        let _ = writeln!(s, "(step {}, loss {:.4})", last.step, last.loss);
    }
    s
}

pub fn cmd_alphas(log_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(log_path).map_err(|e| io_err("reading run log", e))?;
    let log = RunLog::parse_csv(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    print!("{}", alphas_table(&log));
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// Timing cells run sequentially; `--jobs` is accepted for symmetry with
/// `gradcheck` but concurrent timing cells would not measure anything.
pub fn cmd_bench(kind: &str, n: usize, _jobs: usize) -> Result<(), CliError> {
    let kinds: Vec<ActivationKind> = if kind == "all" {
        ActivationKind::ALL.to_vec()
    } else {
        vec![ActivationKind::parse(kind)
            .ok_or_else(|| CliError::Usage(format!("unknown activation `{kind}`")))?]
    };
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let hyper = FixedHyper::default();
    let p = ConstrainedParams { alpha_p: 0.8, alpha_n: 0.8 };
    let inputs: Vec<f64> = (0..n).map(|i| -4.0 + 8.0 * i as f64 / n as f64).collect();

    println!("kind       exps mults adds divs conds   ns/elem (relative timing only)");
    for k in kinds {
        let c = op_count(k);
        // best of a few reps; wall-clock numbers are machine-relative
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t0 = Instant::now();
            let mut acc = 0.0;
            for &x in &inputs {
                acc += act::forward(k, x, p, hyper);
            }
            std::hint::black_box(acc);
            best = best.min(t0.elapsed().as_secs_f64() * 1e9 / n as f64);
        }
        println!(
            "{:<10} {:>4} {:>5} {:>4} {:>4} {:>5}   {best:.2}",
            k.name(),
            c.exps,
            c.mults,
            c.adds,
            c.divs,
            c.conditionals
        );
    }
    Ok(())
}
