use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use burstsep::baselines::{fcme_separate, lda_separate, FcmeConfig, LdaConfig};
use burstsep::bench::{run_sweep, time_separators, write_csv, write_timing_csv, Separator, SweepConfig};
use burstsep::edmodel::estimate_parameters;
use burstsep::rss::energy_vector;
use burstsep::siggen::{self, load_iq_trace, TraceFormat};
use burstsep::{separate, ActivityMask, IqFrame, PuTrafficParams, SeparationConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "burstsep", version, about = "Signal/noise sample separation for bursty energy detection")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one ON/OFF frame and write it as an I/Q trace.
    Generate(GenerateArgs),
    /// Separate the samples of a trace; prints the result as JSON.
    Separate(SeparateArgs),
    /// Estimate noise variance, SNR and occupancy of a trace.
    Estimate(EstimateArgs),
    /// Monte-Carlo sweep over SNR and occupancy; writes metrics CSV.
    Sweep(SweepArgs),
    /// Single-threaded timing of every separator; writes timing CSV.
    Bench(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    F32le,
    Csv,
}

impl From<Format> for TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::F32le => TraceFormat::F32le,
            Format::Csv => TraceFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Rss,
    Fcme,
    Lda,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    frame_len: usize,
    /// Mean ON run length in samples (default: 10% of the frame).
    #[arg(long)]
    mean_on: Option<f64>,
    /// Mean OFF run length in samples (default: 90% of the frame).
    #[arg(long)]
    mean_off: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f32le")]
    format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeparatorArgs {
    #[arg(long, value_enum, default_value = "rss")]
    algorithm: Algorithm,
    /// JSON settings for the chosen algorithm.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First moving-average width (rss).
    #[arg(long)]
    m_init: Option<usize>,
    /// Minimal signal width in samples (rss).
    #[arg(long)]
    lambda_msw: Option<usize>,
}

#[derive(Args)]
struct SeparateArgs {
    /// Input trace.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "f32le")]
    format: Format,
    #[command(flatten)]
    separator: SeparatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input trace.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "f32le")]
    format: Format,
    /// Separation result JSON to take the mask from instead of separating.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    separator: SeparatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Separate(args) => separate_cmd(args),
        Command::Estimate(args) => estimate(args),
        Command::Sweep(args) => {
            let cfg = SweepConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
            let records = run_sweep(&cfg)?;
            for r in records.iter().filter(|r| r.failed > 0) {
                eprintln!(
                    "warning: {} at {} dB / {}: {} frames failed and were excluded",
                    r.separator, r.snr_db, r.occupancy, r.failed
                );
            }
            write_csv(&records, output(args.out.as_deref())?)?;
            Ok(())
        }
        Command::Bench(args) => {
            let cfg = SweepConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
            write_timing_csv(&time_separators(&cfg)?, output(args.out.as_deref())?)?;
            Ok(())
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn generate(args: GenerateArgs) -> Result<()> {
    let n = args.frame_len as f64;
    let params = PuTrafficParams {
        mean_on: args.mean_on.unwrap_or(0.1 * n),
        mean_off: args.mean_off.unwrap_or(0.9 * n),
        ..PuTrafficParams::with_occupancy(args.frame_len, 0.1, args.snr_db)
    };
    let (_, frame) = siggen::labelled_frame(&params, args.seed)?;
    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::F32le => siggen::write_f32le(&mut out, &frame)?,
        Format::Csv => siggen::write_csv(&mut out, &frame)?,
    }
    out.flush()?;
    Ok(())
}

fn load(path: &Path, format: Format) -> Result<IqFrame> {
    load_iq_trace(path, format.into()).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn rss_config(args: &SeparatorArgs, frame_len: usize) -> Result<SeparationConfig> {
    let mut cfg = match &args.config {
        Some(p) => read_json(p)?,
        None => SeparationConfig::for_frame_len(frame_len),
    };
    if let Some(m) = args.m_init {
        cfg.m_init = m;
    }
    if let Some(l) = args.lambda_msw {
        cfg.lambda_msw = l;
    }
    Ok(cfg)
}

/// Runs the selected separator and returns its mask and JSON report.
fn run_separator(args: &SeparatorArgs, x: &IqFrame) -> Result<(ActivityMask, String)> {
    if !matches!(args.algorithm, Algorithm::Rss) && (args.m_init.is_some() || args.lambda_msw.is_some()) {
        bail!("--m-init and --lambda-msw apply to --algorithm rss only");
    }
    let (sep, mask) = match args.algorithm {
        Algorithm::Rss => {
            let result = separate(x, &rss_config(args, x.len())?)?;
            let json = result.to_json()?;
            return Ok((result.mask, json));
        }
        Algorithm::Fcme => {
            let cfg: FcmeConfig = args.config.as_deref().map(read_json).transpose()?.unwrap_or_default();
            (Separator::Fcme, fcme_separate(x, &cfg)?)
        }
        Algorithm::Lda => {
            let cfg: LdaConfig = args.config.as_deref().map(read_json).transpose()?.unwrap_or_default();
            let outcome = lda_separate(x, &cfg)?;
            if outcome.is_degenerate() {
                eprintln!("warning: constant energy, no discriminant split exists");
            }
            (Separator::Lda, outcome.mask)
        }
    };
    let json = serde_json::json!({ "algorithm": sep, "mask": mask.to_runs() }).to_string();
    Ok((mask, json))
}

fn separate_cmd(args: SeparateArgs) -> Result<()> {
    let x = load(&args.input, args.format)?;
    let (_, json) = run_separator(&args.separator, &x)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct MaskDoc {
    mask: Vec<(u8, usize)>,
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let x = load(&args.input, args.format)?;
    let mask = match &args.mask {
        Some(p) => ActivityMask::from_runs(&read_json::<MaskDoc>(p)?.mask)?,
        None => run_separator(&args.separator, &x)?.0,
    };
    let params = estimate_parameters(&energy_vector(&x), &mask)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string(&params)?)?;
    out.flush()?;
    Ok(())
}
