use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stroketrace::metrics::DEFAULT_MATCH_THRESHOLD_SCALE;
use stroketrace::tracer::{GeometryRatios, SteeringParams};
use stroketrace::width::WidthMode;
use stroketrace::PipelineConfig;

#[derive(Debug, Parser)]
#[command(
    name = "stroketrace",
    version,
    about = "Recover pen strokes from scanned handwriting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a PGM or PNG scan into an online trace.
    Convert(ConvertArgs),
    /// Render synthetic scripts with known ground truth.
    Synth(SynthArgs),
    /// Score a recovered trace against ground truth.
    Eval(EvalArgs),
    /// Draw a trace as SVG.
    Render(RenderArgs),
    /// Generate a corpus, convert every item and report aggregate scores.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Treat light pixels as ink.
    #[arg(long)]
    pub invert: bool,

    /// Multiplier on the estimated stroke width when sizing the truck.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub truck_scale: f64,

    /// Width statistic: `histogram` (frequency weighted) or `topk`.
    #[arg(long, default_value_t = WidthMode::HistogramEq1)]
    pub width_mode: WidthMode,

    /// Number of width values the width statistic keeps.
    #[arg(short, long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,

    #[command(flatten)]
    pub expert: ExpertArgs,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Expert")]
pub struct ExpertArgs {
    /// Steering gain in radians per unit of wheel imbalance.
    #[arg(long, default_value_t = SteeringParams::default().gain)]
    pub gain: f64,

    /// Largest heading change per tick, in radians.
    #[arg(long, default_value_t = SteeringParams::default().max_turn, value_parser = positive)]
    pub max_turn: f64,

    /// Skip starts whose component is at least this fraction visited.
    #[arg(long, default_value_t = SteeringParams::default().residue_fraction)]
    pub residue_fraction: f64,

    /// Hold heading when both wheels are at least this fraction on ink.
    #[arg(long, default_value_t = SteeringParams::default().junction_fill)]
    pub junction_fill: f64,

    /// Wheel radius as a multiple of the track width.
    #[arg(long, default_value_t = GeometryRatios::default().wheel_radius, value_parser = positive)]
    pub wheel_ratio: f64,

    /// Step length as a multiple of the track width.
    #[arg(long, default_value_t = GeometryRatios::default().step, value_parser = positive)]
    pub step_ratio: f64,

    /// Lookahead corridor length as a multiple of the track width.
    #[arg(long, default_value_t = GeometryRatios::default().lookahead, value_parser = positive)]
    pub lookahead_ratio: f64,

    /// Distance from the truck position to the wheel axle, in track widths.
    #[arg(long, default_value_t = GeometryRatios::default().axle_offset)]
    pub axle_ratio: f64,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        let e = &self.expert;
        PipelineConfig {
            invert: self.invert,
            truck_scale: self.truck_scale,
            width_mode: self.width_mode,
            k: self.k as usize,
            ratios: GeometryRatios {
                wheel_radius: e.wheel_ratio,
                step: e.step_ratio,
                lookahead: e.lookahead_ratio,
                axle_offset: e.axle_ratio,
            },
            steering: SteeringParams {
                gain: e.gain,
                max_turn: e.max_turn,
                residue_fraction: e.residue_fraction,
                junction_fill: e.junction_fill,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Input image (PGM P2/P5 or PNG).
    pub input: PathBuf,

    /// Trace JSON destination; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Also write an SVG rendering here.
    #[arg(long)]
    pub svg: Option<PathBuf>,

    /// Also write a CSV export here.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Write intermediate images into this directory.
    #[arg(long)]
    pub debug_stages: Option<PathBuf>,

    /// Ticks between traversal snapshots in the debug stages; 0 disables.
    #[arg(long, default_value_t = 100)]
    pub snapshot_every: u64,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Script spec JSON to render.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub spec: Option<PathBuf>,

    /// Generate this many random scripts instead.
    #[arg(long)]
    pub corpus: Option<usize>,

    /// Master seed for corpus generation.
    #[arg(long, env = "STROKETRACE_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Directory for the images and truth files.
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth trace JSON, or a directory of `*.truth.json` files.
    pub truth: PathBuf,

    /// Recovered trace JSON, or a directory holding `<name>.json` for each
    /// `<name>.truth.json`.
    pub recovered: PathBuf,

    /// Report destination; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Accept matches up to this multiple of the average stroke width.
    #[arg(long, default_value_t = DEFAULT_MATCH_THRESHOLD_SCALE, value_parser = positive)]
    pub match_threshold_scale: f64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Trace JSON.
    pub trace: PathBuf,

    /// SVG destination.
    #[arg(short, long)]
    pub output: PathBuf,

    /// Image to binarize and draw beneath the strokes.
    #[arg(long)]
    pub underlay: Option<PathBuf>,

    /// Polyline width in pixels.
    #[arg(long)]
    pub stroke_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Corpus size.
    #[arg(short, long, default_value_t = 50)]
    pub n: usize,

    /// Master seed for corpus generation.
    #[arg(long, env = "STROKETRACE_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Full report destination; the summary still goes to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Skip the per-item timing lines and, with `--output`, the summary.
    #[arg(short, long)]
    pub quiet: bool,

    /// Accept matches up to this multiple of the average stroke width.
    #[arg(long, default_value_t = DEFAULT_MATCH_THRESHOLD_SCALE, value_parser = positive)]
    pub match_threshold_scale: f64,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}
