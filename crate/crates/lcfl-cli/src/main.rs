//! `lcfl` command-line tool: encode/decode images with the lapped-transform
//! codec, run rate-distortion sweeps, and compare sweeps with Bjontegaard
//! deltas.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 decode error.
//! Output files are written to a temporary sibling and renamed on success,
//! so failures never leave partial output. `LCFL_LOG={error|info|debug}`
//! controls diagnostics on standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Parser, Subcommand, ValueEnum};

use lcfl::coder::{ChromaMode, Subsampling};
use lcfl::error::Error as LcflError;
use lcfl::eval::{
    bd_compare, format_bd_report, format_complexity_table, parse_csv, points_to_csv, psnr,
    rd_sweep, ssim, Metric, SweepConfig,
};
use lcfl::pipeline::color::ycbcr_to_rgb;
use lcfl::pipeline::image_io::{read_image, write_pgm, write_ppm, write_y4m, LoadedImage};
use lcfl::pipeline::{decode_frame, encode_frame, EncodeConfig, Frame};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DECODE: u8 = 3;

#[derive(Parser)]
#[command(name = "lcfl", version, about = "Lapped-transform image codec with chroma-from-luma prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    None,
    FdCfl,
    PvqCfl,
}

impl From<ModeArg> for ChromaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => ChromaMode::None,
            ModeArg::FdCfl => ChromaMode::FdCfl,
            ModeArg::PvqCfl => ChromaMode::PvqCfl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsamplingArg {
    #[value(name = "444")]
    S444,
    #[value(name = "420")]
    S420,
}

impl From<SubsamplingArg> for Subsampling {
    fn from(s: SubsamplingArg) -> Self {
        match s {
            SubsamplingArg::S444 => Subsampling::S444,
            SubsamplingArg::S420 => Subsampling::S420,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Psnr,
    Ssim,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PPM/PGM/Y4M image into an LCFL container.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long = "chroma-mode", value_enum, default_value = "pvq-cfl")]
        chroma_mode: ModeArg,
        #[arg(long = "block-size", default_value_t = 8)]
        block_size: usize,
        #[arg(long = "q", default_value_t = 8.0)]
        q: f64,
        #[arg(long = "subsampling", value_enum, default_value = "420")]
        subsampling: SubsamplingArg,
    },
    /// Decode an LCFL container to PPM, PGM or Y4M (by output extension).
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Sweep a corpus directory over a quantizer ladder and write RD points
    /// as CSV.
    RdSweep {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated quantizer steps, e.g. 1,2,4,8.
        #[arg(long = "q-ladder", value_delimiter = ',', required = true)]
        q_ladder: Vec<f64>,
        /// Comma-separated modes from {none, fd-cfl, pvq-cfl}.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<ModeArg>,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long = "block-size", default_value_t = 8)]
        block_size: usize,
        #[arg(long = "subsampling", value_enum, default_value = "420")]
        subsampling: SubsamplingArg,
        /// Worker threads; 0 picks the machine default. Output bytes never
        /// depend on this.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Bjontegaard comparison of two sweep CSVs (B relative to A).
    Bdrate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// PSNR or SSIM between two images, per plane.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "test")]
        test: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
    },
    /// Model-fit complexity counters for one block size.
    Counters {
        #[arg(long = "block-size", default_value_t = 8)]
        block_size: usize,
    },
}

fn log_level() -> u8 {
    static LEVEL: OnceLock<u8> = OnceLock::new();
    *LEVEL.get_or_init(|| match std::env::var("LCFL_LOG").as_deref() {
        Ok("debug") => 2,
        Ok("info") => 1,
        _ => 0,
    })
}

macro_rules! log_info {
    ($($arg:tt)*) => {
        if log_level() >= 1 {
            eprintln!($($arg)*);
        }
    };
}

macro_rules! log_debug {
    ($($arg:tt)*) => {
        if log_level() >= 2 {
            eprintln!($($arg)*);
        }
    };
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<LcflError> for CliError {
    fn from(e: LcflError) -> Self {
        let code = match &e {
            LcflError::Decode { .. } => EXIT_DECODE,
            LcflError::Io(_) | LcflError::Format(_) => EXIT_IO,
            LcflError::Size(_) | LcflError::Argument(_) | LcflError::NeighborsUnavailable => {
                EXIT_USAGE
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Writes through a temporary sibling file and renames into place, so an
/// error never leaves a partial output file behind.
fn write_atomic(path: &Path, data: &[u8]) -> CliResult<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::usage(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, data).map_err(|e| CliError::io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(format!("{}: {e}", path.display()))
    })?;
    Ok(())
}

fn load_frame(path: &Path, subsampling: Subsampling) -> CliResult<Frame> {
    let image = read_image(path)?;
    Ok(image.into_frame(subsampling)?)
}

fn run_encode(
    input: &Path,
    output: &Path,
    chroma_mode: ChromaMode,
    block_size: usize,
    q: f64,
    subsampling: Subsampling,
) -> CliResult<()> {
    let frame = load_frame(input, subsampling)?;
    let cfg = EncodeConfig {
        chroma_mode,
        block_size,
        q_gain: q,
        subsampling,
    };
    let out = encode_frame(&frame, &cfg)?;
    log_info!(
        "encoded {} ({}x{}) with {}: y={} cb={} cr={} bits",
        input.display(),
        frame.y.width(),
        frame.y.height(),
        chroma_mode.label(),
        out.plane_bits[0],
        out.plane_bits[1],
        out.plane_bits[2]
    );
    write_atomic(output, &out.container)
}

fn run_decode(input: &Path, output: &Path) -> CliResult<()> {
    let data = fs::read(input).map_err(|e| CliError::io(format!("{}: {e}", input.display())))?;
    let frame = decode_frame(&data)?;
    let ext = output
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let bytes = match ext.as_str() {
        "y4m" => write_y4m(&frame),
        "pgm" => write_pgm(frame.y.width(), frame.y.height(), &frame.y.to_u8()),
        "ppm" => write_ppm(&ycbcr_to_rgb(&frame)),
        other => {
            return Err(CliError::usage(format!(
                "unsupported output extension '{other}'; use .ppm, .pgm or .y4m"
            )))
        }
    };
    write_atomic(output, &bytes)
}

fn run_sweep(
    corpus: &Path,
    q_ladder: Vec<f64>,
    modes: Vec<ChromaMode>,
    output: &Path,
    block_size: usize,
    subsampling: Subsampling,
    jobs: usize,
) -> CliResult<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus)
        .map_err(|e| CliError::io(format!("{}: {e}", corpus.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("ppm") | Some("pgm") | Some("y4m")
            )
        })
        .collect();
    paths.sort();
    let mut images = Vec::new();
    for path in paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match load_frame(&path, subsampling) {
            Ok(frame) => images.push((name, frame)),
            Err(e) => {
                eprintln!("skipping {}: {}", path.display(), e.message);
            }
        }
    }
    if images.is_empty() {
        return Err(CliError::io(format!(
            "{}: no readable ppm/pgm/y4m images",
            corpus.display()
        )));
    }
    log_info!("sweeping {} images", images.len());
    let sweep_cfg = SweepConfig {
        q_ladder,
        modes,
        block_size,
        subsampling,
    };
    let points = if jobs == 0 {
        rd_sweep(&images, &sweep_cfg)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
        pool.install(|| rd_sweep(&images, &sweep_cfg))?
    };
    log_debug!("sweep produced {} rd points", points.len());
    write_atomic(output, points_to_csv(&points).as_bytes())
}

fn run_bdrate(a: &Path, b: &Path, output: &Path) -> CliResult<()> {
    let read = |p: &Path| -> CliResult<String> {
        fs::read_to_string(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))
    };
    let points_a = parse_csv(&read(a)?)?;
    let points_b = parse_csv(&read(b)?)?;
    let rows = bd_compare(&points_a, &points_b)?;
    let label = |pts: &[lcfl::eval::RdPoint]| {
        pts.first().map(|p| p.mode.label().to_string()).unwrap_or_default()
    };
    let report = format_bd_report(&rows, &label(&points_a), &label(&points_b));
    print!("{report}");
    write_atomic(output, report.as_bytes())
}

fn run_metrics(reference: &Path, test: &Path, metric: MetricArg) -> CliResult<()> {
    let to_planes = |img: LoadedImage| -> Vec<(&'static str, lcfl::PixelPlane)> {
        match img {
            LoadedImage::Gray { width, height, samples } => {
                vec![("y", lcfl::PixelPlane::from_u8(width, height, &samples).unwrap())]
            }
            LoadedImage::Rgb(rgb) => {
                let f = lcfl::pipeline::color::rgb_to_ycbcr(&rgb);
                vec![("y", f.y), ("cb", f.cb), ("cr", f.cr)]
            }
            LoadedImage::Ycbcr(f) => vec![("y", f.y), ("cb", f.cb), ("cr", f.cr)],
        }
    };
    let ref_planes = to_planes(read_image(reference)?);
    let test_planes = to_planes(read_image(test)?);
    if ref_planes.len() != test_planes.len() {
        return Err(CliError::usage("images have different plane counts"));
    }
    for ((name, rp), (_, tp)) in ref_planes.iter().zip(&test_planes) {
        let value = match metric {
            MetricArg::Psnr => psnr(rp, tp)?,
            MetricArg::Ssim => ssim(rp, tp)?,
        };
        let label = match metric {
            MetricArg::Psnr => Metric::Psnr.label(),
            MetricArg::Ssim => Metric::Ssim.label(),
        };
        println!("{name} {label} {value:.6}");
    }
    Ok(())
}

fn run_counters(block_size: usize) -> CliResult<()> {
    let cost = lcfl::cfl::fit_cost_counters(block_size)?;
    println!("model-fit cost for {block_size}x{block_size} blocks");
    println!(
        "spatial domain:   {} mults, {} adds",
        cost.spatial_mults, cost.spatial_adds
    );
    println!(
        "frequency domain: {} mults, {} adds (block-size independent)",
        cost.fd_mults, cost.fd_adds
    );
    print!("{}", format_complexity_table()?);
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            chroma_mode,
            block_size,
            q,
            subsampling,
        } => run_encode(
            &input,
            &output,
            chroma_mode.into(),
            block_size,
            q,
            subsampling.into(),
        ),
        Command::Decode { input, output } => run_decode(&input, &output),
        Command::RdSweep {
            corpus,
            q_ladder,
            modes,
            output,
            block_size,
            subsampling,
            jobs,
        } => run_sweep(
            &corpus,
            q_ladder,
            modes.into_iter().map(ChromaMode::from).collect(),
            &output,
            block_size,
            subsampling.into(),
            jobs,
        ),
        Command::Bdrate { a, b, output } => run_bdrate(&a, &b, &output),
        Command::Metrics {
            reference,
            test,
            metric,
        } => run_metrics(&reference, &test, metric),
        Command::Counters { block_size } => run_counters(block_size),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
