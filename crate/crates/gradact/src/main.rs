use clap::{Parser, Subcommand};
use gradact::activations::ActivationKind;
use gradact::cli::{self, CliError, CurveArgs};
use gradact::verify::PrecisionMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gradact",
    version,
    about = "Gradient-first activation workbench: curves, derivation, verification, benchmarks and desk-scale training"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample an activation and its gradient to CSV
    Curve {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
        alpha_p: f64,
        #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
        alpha_n: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        elu_alpha: f64,
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long, default_value_t = 601)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        /// e.g. --sweep alpha_n=0.5,1,2 writes one file per value
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Integrate a plain-text gradient spec into an activation
    Derive {
        #[arg(long)]
        spec: PathBuf,
        /// anchor point as `x,value`
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        anchor: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference checks for every activation and the toy model
    Gradcheck {
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Catastrophic-cancellation probe in emulated precision
    Stability {
        /// double, single, or bf16
        #[arg(long)]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the toy language model from a config file
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// corpus text file; bundled fixture when omitted
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Print the per-layer activation scalars from a run log
    Alphas {
        #[arg(long)]
        log: PathBuf,
    },
    /// Operation-count census plus rough per-element timings
    Bench {
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn parse_kind(s: &str) -> Result<ActivationKind, CliError> {
    ActivationKind::parse(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown activation `{s}` (expected one of: {})",
            ActivationKind::ALL.map(|k| k.name()).join(", ")
        ))
    })
}

fn parse_sweep(s: &str) -> Result<(String, Vec<f64>), CliError> {
    let (param, values) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--sweep expects `param=v1,v2,...`, got `{s}`")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad sweep value `{v}`")))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("--sweep needs at least one value".into()));
    }
    Ok((param.trim().to_string(), values))
}

fn parse_anchor(s: &str) -> Result<(f64, f64), CliError> {
    let (x, v) = s
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("--anchor expects `x,value`, got `{s}`")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad anchor component `{t}`")))
    };
    Ok((parse(x)?, parse(v)?))
}

fn run(args: Args) -> Result<(), CliError> {
    match args.cmd {
        Cmd::Curve {
            kind,
            alpha_p,
            alpha_n,
            beta,
            elu_alpha,
            xmin,
            xmax,
            samples,
            out,
            sweep,
        } => {
            let sweep = sweep.as_deref().map(parse_sweep).transpose()?;
            cli::cmd_curve(&CurveArgs {
                kind: parse_kind(&kind)?,
                alpha_p,
                alpha_n,
                beta,
                elu_alpha,
                xmin,
                xmax,
                samples,
                out,
                sweep,
            })
        }
        Cmd::Derive { spec, anchor, out } => {
            cli::cmd_derive(&spec, parse_anchor(&anchor)?, out.as_deref())
        }
        Cmd::Gradcheck { kind, seed, out, jobs } => {
            cli::cmd_gradcheck(&kind, seed, out.as_deref(), jobs)
        }
        Cmd::Stability { mode, out } => {
            let mode = PrecisionMode::parse(&mode).ok_or_else(|| {
                CliError::Usage(format!("--mode must be double, single or bf16, got `{mode}`"))
            })?;
            cli::cmd_stability(mode, out.as_deref())
        }
        Cmd::Train { config, out_dir, corpus } => {
            cli::cmd_train(&config, &out_dir, corpus.as_deref())
        }
        Cmd::Alphas { log } => cli::cmd_alphas(&log),
        Cmd::Bench { kind, n, jobs } => cli::cmd_bench(&kind, n, jobs),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
