//! `melaseg`: segment, extract, train, predict and evaluate over directories
//! of dermoscopy images.
//!
//! Exit codes: 0 success, 1 per-item or runtime failure, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use melaseg::color_features::{DEFAULT_GLCM_LEVELS, MAX_GLCM_LEVELS};
use melaseg::segmentation::DEFAULT_SE_RADIUS;
use melaseg::texture_features::{DEFAULT_DELTA, DEFAULT_NGTDM_LEVELS};

#[derive(Parser, Debug)]
#[command(name = "melaseg", version, about = "Dermoscopy lesion segmentation and classification")]
struct Cli {
    /// Worker threads for per-image stages (default: all cores).
    #[arg(long, global = true, env = "MELASEG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SeedModeArg {
    Auto,
    Manual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Seg,
    Cls,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one `<id>_segmentation.png` per input image.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = SeedModeArg::Auto)]
        seed_mode: SeedModeArg,
        /// Lesion sample disk `x,y,r` in pixels (manual mode only).
        #[arg(long, value_parser = parse_seed)]
        lesion_seed: Option<(f64, f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_SE_RADIUS)]
        se_radius: usize,
        /// Downscale so the longest side is at most this many pixels before
        /// segmenting; the mask is upscaled back to native size.
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Compute the 42-value feature vector for each image with a mask.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        masks: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_NGTDM_LEVELS)]
        ngtdm_levels: usize,
        #[arg(long, default_value_t = DEFAULT_GLCM_LEVELS)]
        glcm_levels: usize,
    },
    /// Train the one-vs-rest model. Several comma-separated `--c` values
    /// select one by cross-validated accuracy.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        c: Vec<f64>,
    },
    /// Score a features CSV into a submission CSV.
    Predict {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare predicted masks (seg) or a submission (cls) against truth.
    Evaluate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Predicted mask directory or submission CSV.
        #[arg(long)]
        input: PathBuf,
        /// Ground-truth mask directory (seg).
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Ground-truth labels CSV (cls).
        #[arg(long)]
        labels: Option<PathBuf>,
        /// JSON report path; the CSV table goes next to it.
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_seed(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, r] if [x, y, r].iter().all(|v| v.is_finite()) && r > 0.0 => Ok((x, y, r)),
        _ => Err("expected x,y,r with finite values and r > 0".into()),
    }
}

/// Invalid combination or value of otherwise well-formed flags.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn validate(cli: &Cli) -> anyhow::Result<()> {
    if cli.threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    match &cli.command {
        Command::Segment {
            seed_mode,
            lesion_seed,
            max_dim,
            ..
        } => {
            match (seed_mode, lesion_seed) {
                (SeedModeArg::Manual, None) => return Err(usage("--seed-mode manual needs --lesion-seed")),
                (SeedModeArg::Auto, Some(_)) => {
                    return Err(usage("--lesion-seed is only valid with --seed-mode manual"))
                }
                _ => {}
            }
            if *max_dim == Some(0) {
                return Err(usage("--max-dim must be positive"));
            }
        }
        Command::Extract {
            delta,
            ngtdm_levels,
            glcm_levels,
            ..
        } => {
            if !(delta.is_finite() && *delta > 0.0) {
                return Err(usage("--delta must be positive"));
            }
            if !(2..=256).contains(ngtdm_levels) {
                return Err(usage("--ngtdm-levels must be in 2..=256"));
            }
            if !(2..=MAX_GLCM_LEVELS).contains(glcm_levels) {
                return Err(usage(format!("--glcm-levels must be in 2..={MAX_GLCM_LEVELS}")));
            }
        }
        Command::Train { c, .. } => {
            if c.is_empty() || c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(usage("--c values must be positive"));
            }
        }
        Command::Evaluate {
            kind, masks, labels, ..
        } => match kind {
            Kind::Seg if masks.is_none() => return Err(usage("--kind seg needs --masks")),
            Kind::Cls if labels.is_none() => return Err(usage("--kind cls needs --labels")),
            _ => {}
        },
        Command::Predict { .. } => {}
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    validate(&cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| match cli.command {
        Command::Segment {
            input,
            output,
            lesion_seed,
            se_radius,
            max_dim,
            ..
        } => commands::segment(&input, &output, lesion_seed, se_radius, max_dim),
        Command::Extract {
            input,
            masks,
            output,
            delta,
            ngtdm_levels,
            glcm_levels,
        } => commands::extract(&input, &masks, &output, delta, ngtdm_levels, glcm_levels),
        Command::Train {
            input,
            labels,
            model,
            c,
        } => commands::train(&input, &labels, &model, &c),
        Command::Predict { input, model, output } => commands::predict(&input, &model, &output),
        Command::Evaluate {
            kind,
            input,
            masks,
            labels,
            output,
        } => match kind {
            Kind::Seg => commands::evaluate_seg(&input, &masks.expect("validated"), &output),
            Kind::Cls => commands::evaluate_cls(&input, &labels.expect("validated"), &output),
        },
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
