//! Command-line front end: argument parsing, config/flag merging, and the
//! exit-code contract (0 success, 2 parameter errors, 3 I/O failures).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gaboredge::detector::{ChannelSet, Connectivity, DetectorConfig, NmsDirection, NmsInterpolation};
use gaboredge::eval::NoiseSpec;

pub mod commands;
pub mod config;

use config::{load_config, RunConfig};

/// Errors split by exit code: parameters are the caller's fault, I/O is the
/// environment's.
#[derive(Debug)]
pub enum CliError {
    Param(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Param(m) | CliError::Io(m) => m,
        }
    }
}

impl From<gaboredge::Error> for CliError {
    fn from(e: gaboredge::Error) -> Self {
        match e {
            gaboredge::Error::Io(_) | gaboredge::Error::Image(_) => CliError::Io(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gaboredge",
    version,
    about = "Color edge detection with multi-scale Gabor banks, plus evaluation tools"
)]
struct Cli {
    /// JSON run configuration; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parallel jobs for sweep.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

/// Detector knobs shared by `detect` and `esm-dump`.
#[derive(Args, Debug, Default)]
struct DetectorFlags {
    /// Lower hysteresis percentile in (0, 1).
    #[arg(long)]
    beta_low: Option<f64>,
    /// Upper hysteresis percentile in (0, 1).
    #[arg(long)]
    beta_up: Option<f64>,
    /// Number of bank orientations K.
    #[arg(long)]
    orientations: Option<usize>,
    /// Comma-separated center frequencies, one per scale.
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<f64>>,
    /// Envelope sharpness along the rotated x-axis.
    #[arg(long)]
    gamma: Option<f64>,
    /// Envelope sharpness along the rotated y-axis.
    #[arg(long)]
    eta: Option<f64>,
    /// Contrast-equalization window (odd, >= 3).
    #[arg(long)]
    window: Option<usize>,
    /// Hysteresis connectivity: 4 or 8.
    #[arg(long)]
    connectivity: Option<u8>,
    /// NMS neighbor sampling: nearest or linear.
    #[arg(long)]
    nms_interpolation: Option<String>,
    /// NMS stepping direction: carrier or carrier+90.
    #[arg(long)]
    nms_direction: Option<String>,
    /// Channels feeding the bank: all or luminance.
    #[arg(long)]
    channels: Option<String>,
    /// Linearize sRGB (IEC 61966-2-1) before the RGB->XYZ matrix.
    #[arg(long)]
    srgb_gamma: bool,
}

impl DetectorFlags {
    /// Overlay these flags onto a base configuration.
    fn apply(&self, base: &DetectorConfig) -> Result<DetectorConfig, CliError> {
        let mut cfg = base.clone();
        if let Some(v) = self.beta_low {
            cfg.beta_low = v;
        }
        if let Some(v) = self.beta_up {
            cfg.beta_up = v;
        }
        if let Some(v) = self.orientations {
            cfg.gabor.orientations = v;
        }
        if let Some(v) = &self.frequencies {
            cfg.gabor.frequencies = v.clone();
        }
        if let Some(v) = self.gamma {
            cfg.gabor.gamma = v;
        }
        if let Some(v) = self.eta {
            cfg.gabor.eta = v;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.connectivity {
            cfg.connectivity = Connectivity::try_from(v).map_err(CliError::Param)?;
        }
        if let Some(v) = &self.nms_interpolation {
            cfg.nms_interpolation = match v.as_str() {
                "nearest" => NmsInterpolation::Nearest,
                "linear" => NmsInterpolation::Linear,
                other => {
                    return Err(CliError::Param(format!(
                        "--nms-interpolation must be nearest or linear, got {other}"
                    )))
                }
            };
        }
        if let Some(v) = &self.nms_direction {
            cfg.nms_direction = match v.as_str() {
                "carrier" => NmsDirection::Carrier,
                "carrier+90" => NmsDirection::CarrierPlus90,
                other => {
                    return Err(CliError::Param(format!(
                        "--nms-direction must be carrier or carrier+90, got {other}"
                    )))
                }
            };
        }
        if let Some(v) = &self.channels {
            cfg.channels = match v.as_str() {
                "all" => ChannelSet::All,
                "luminance" => ChannelSet::Luminance,
                other => {
                    return Err(CliError::Param(format!(
                        "--channels must be all or luminance, got {other}"
                    )))
                }
            };
        }
        if self.srgb_gamma {
            cfg.srgb_gamma = true;
        }
        let errs = cfg.validate_at("");
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Param(errs.join("; ")))
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Detect edges in a color image and write a binary edge PNG.
    Detect {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        detector: DetectorFlags,
    },
    /// Score a detected edge map against binary ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Matching tolerance in pixels.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sweep percentile pairs over a dataset and report PR metrics.
    Sweep {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        gt_dir: PathBuf,
        /// JSON file holding an array of [beta_low, beta_up] pairs.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// CSV output path; the summary JSON lands next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        detector: DetectorFlags,
    },
    /// Add seeded Gaussian noise to an image.
    Noise {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Noise standard deviation in gray levels.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dump per-channel, per-scale ESMs and the fused map as 16-bit PNGs.
    EsmDump {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        detector: DetectorFlags,
    },
}

fn require_path(
    flag: Option<PathBuf>,
    fallback: Option<PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or(fallback)
        .ok_or_else(|| CliError::Param(format!("missing {what} (flag or config io section)")))
}

fn load_grid_file(path: &PathBuf) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read grid {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Param(format!("malformed grid {}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Detect {
            input,
            output,
            detector,
        } => {
            let cfg = detector.apply(&config.detector)?;
            let input = require_path(input, config.io.input, "--input")?;
            let output = require_path(output, config.io.output, "--output")?;
            commands::detect(&input, &output, &cfg, cli.verbose)
        }
        Command::Eval { pred, gt, tol } => {
            let tol = tol.or(config.eval.tolerance);
            commands::eval(&pred, &gt, tol)
        }
        Command::Sweep {
            dataset,
            gt_dir,
            grid,
            out,
            tol,
            detector,
        } => {
            let cfg = detector.apply(&config.detector)?;
            let grid_points = match grid {
                Some(path) => load_grid_file(&path)?,
                None => config
                    .eval
                    .grid
                    .clone()
                    .ok_or_else(|| CliError::Param("missing --grid (or config eval.grid)".into()))?,
            };
            let tol = tol.or(config.eval.tolerance);
            commands::sweep(
                &dataset,
                &gt_dir,
                &grid_points,
                &out,
                &cfg,
                tol,
                cli.jobs,
                cli.verbose,
            )
        }
        Command::Noise {
            input,
            output,
            sigma,
            seed,
        } => {
            let input = require_path(input, config.io.input, "--input")?;
            let output = require_path(output, config.io.output, "--output")?;
            let base = config.noise.unwrap_or(NoiseSpec { sigma: 0.0, seed: 0 });
            let spec = NoiseSpec {
                sigma: sigma.unwrap_or(base.sigma),
                seed: seed.unwrap_or(base.seed),
            };
            commands::noise(&input, &output, &spec)
        }
        Command::EsmDump {
            input,
            out_dir,
            detector,
        } => {
            let cfg = detector.apply(&config.detector)?;
            let input = require_path(input, config.io.input, "--input")?;
            commands::esm_dump(&input, &out_dir, &cfg, cli.verbose)
        }
    }
}

/// Parse arguments, run the chosen subcommand, and return the process exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
