//! Command-line front end: sweeps, attribution grids, edge validation,
//! single-image perturbation, evaluation, and plotting.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
//! failure.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aberrate::harness::{
    emit_plots, load_sweep, run_sweep, shapley_boxplot, CoefficientRange, SamplingMode,
    SweepConfig,
};
use aberrate::imaging::{
    edge_image, net_mtf, perturb_image, slanted_edge_mtf, ConvolutionKernel, KernelOptions, Roi,
};
use aberrate::merit::MeritEngine;
use aberrate::optics::{compute_mtf, Axis, OpticalConfig};
use aberrate::segeval::{evaluate, EvalOptions, EvalReport, PredictionRecord};
use aberrate::shapley::{shapley_distribution, DistributionConfig, DistributionReport};
use aberrate::zernike::ZernikeSpectrum;
use aberrate::{io, Error, Result};

#[derive(Parser)]
#[command(
    name = "aberrate",
    version,
    about = "Wavefront-aberration threat modeling: PSF/MTF simulation, image perturbation, metric sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample aberration spectra, compute optical metrics, blur a dataset
    Sweep(SweepArgs),
    /// Exact per-coefficient attribution of merit changes over a grid
    Shapley(ShapleyArgs),
    /// Round-trip check: recover a model MTF from a blurred slanted edge
    ValidateEdge(ValidateEdgeArgs),
    /// Blur one image through a synthesized aberration
    Perturb(PerturbArgs),
    /// Segmentation metrics from label maps and probability maps
    Eval(EvalArgs),
    /// Re-render figures for an existing run directory
    Plot(PlotArgs),
}

/// Output root when a command has no explicit --out: $ABERRATE_OUT or
/// ./runs.
fn out_root() -> PathBuf {
    std::env::var_os("ABERRATE_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Args)]
struct OpticsArgs {
    /// Wavelength in micrometres
    #[arg(long, default_value_t = 0.55)]
    wavelength: f64,
    /// Pupil radius in millimetres
    #[arg(long, default_value_t = 4.0)]
    pupil_radius: f64,
    /// Propagation distance in millimetres
    #[arg(long, default_value_t = 25.0)]
    distance: f64,
    /// Pupil grid resolution (samples across the diameter)
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Zero-padding factor for the PSF transform
    #[arg(long, default_value_t = 2)]
    pad_factor: usize,
    /// Sensor pixel pitch in micrometres (default: the PSF sample pitch)
    #[arg(long)]
    pixel_pitch: Option<f64>,
}

impl OpticsArgs {
    fn to_config(&self) -> Result<OpticalConfig> {
        let base = OpticalConfig {
            wavelength_um: self.wavelength,
            pupil_radius_mm: self.pupil_radius,
            distance_mm: self.distance,
            grid_resolution: self.resolution,
            pad_factor: self.pad_factor,
            pixel_pitch_um: 0.0,
        };
        let config = OpticalConfig {
            pixel_pitch_um: self.pixel_pitch.unwrap_or_else(|| base.psf_pitch_um()),
            ..base
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct SpectrumArgs {
    /// Oblique astigmatism coefficient in micrometres
    #[arg(long, default_value_t = 0.0)]
    w3: f64,
    /// Defocus coefficient in micrometres
    #[arg(long, default_value_t = 0.0)]
    w4: f64,
    /// Vertical astigmatism coefficient in micrometres
    #[arg(long, default_value_t = 0.0)]
    w5: f64,
    /// Additional coefficients as index=value (repeatable)
    #[arg(long = "coef", value_name = "IDX=VAL")]
    coefs: Vec<String>,
}

impl SpectrumArgs {
    fn to_spectrum(&self, wavelength_um: f64) -> Result<ZernikeSpectrum> {
        let mut map: std::collections::BTreeMap<usize, f64> =
            [(3, self.w3), (4, self.w4), (5, self.w5)]
                .into_iter()
                .filter(|(_, v)| *v != 0.0)
                .collect();
        for spec in &self.coefs {
            let (idx, val) = spec
                .split_once('=')
                .ok_or_else(|| Error::config(format!("expected IDX=VAL, got {spec:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|e| Error::config(format!("bad coefficient index {idx:?}: {e}")))?;
            let val: f64 = val
                .parse()
                .map_err(|e| Error::config(format!("bad coefficient value {val:?}: {e}")))?;
            map.insert(idx, val);
        }
        ZernikeSpectrum::new(map, wavelength_um)
    }
}

#[derive(Args)]
struct KernelArgs {
    /// PSF energy fraction the blur kernel must capture
    #[arg(long, default_value_t = 0.999)]
    kernel_energy: f64,
    /// Hard cap on the kernel window (odd number of taps)
    #[arg(long, default_value_t = 127)]
    kernel_support: usize,
}

impl KernelArgs {
    fn to_options(&self) -> KernelOptions {
        KernelOptions {
            energy_keep: self.kernel_energy,
            max_support: self.kernel_support,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Grid,
}

#[derive(Args)]
struct SweepArgs {
    /// Load the whole configuration from a JSON file (other flags ignored)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory (default: <out root>/<config hash>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Uniform mode: total samples. Grid mode: steps per coefficient
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
    mode: ModeArg,
    /// Coefficient ranges as IDX=LO:HI (default: 3,4,5 over ±wavelength)
    #[arg(long = "range", value_name = "IDX=LO:HI")]
    ranges: Vec<String>,
    /// Directory of dataset images (*.png); omit for an optics-only sweep
    #[arg(long)]
    images: Option<PathBuf>,
    /// Directory of label maps (<stem>.png per image)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Root of probability maps (<id>/<stem>.npy); default <run>/predictions
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Envelope bin count
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    optics: OpticsArgs,
    /// Emit figures after the sweep
    #[arg(long)]
    plot: bool,
}

fn parse_range(spec: &str) -> Result<CoefficientRange> {
    let (idx, rest) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("expected IDX=LO:HI, got {spec:?}")))?;
    let (lo, hi) = rest
        .split_once(':')
        .ok_or_else(|| Error::config(format!("expected IDX=LO:HI, got {spec:?}")))?;
    Ok(CoefficientRange {
        index: idx
            .parse()
            .map_err(|e| Error::config(format!("bad range index {idx:?}: {e}")))?,
        lo: lo
            .parse()
            .map_err(|e| Error::config(format!("bad range bound {lo:?}: {e}")))?,
        hi: hi
            .parse()
            .map_err(|e| Error::config(format!("bad range bound {hi:?}: {e}")))?,
    })
}

fn sweep_command(args: &SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_json(&io::read_to_string(path)?)?,
        None => {
            let optics = args.optics.to_config()?;
            let l = optics.wavelength_um;
            let ranges = if args.ranges.is_empty() {
                [3usize, 4, 5]
                    .iter()
                    .map(|&index| CoefficientRange {
                        index,
                        lo: -l,
                        hi: l,
                    })
                    .collect()
            } else {
                args.ranges
                    .iter()
                    .map(|s| parse_range(s))
                    .collect::<Result<Vec<_>>>()?
            };
            SweepConfig {
                ranges,
                mode: match args.mode {
                    ModeArg::Uniform => SamplingMode::Uniform,
                    ModeArg::Grid => SamplingMode::Grid,
                },
                samples: args.samples,
                seed: args.seed,
                optics,
                kernel: args.kernel.to_options(),
                images_dir: args.images.clone(),
                labels_dir: args.labels.clone(),
                predictions_dir: args.predictions.clone(),
                output_dir: PathBuf::new(),
                envelope_bins: args.bins,
            }
        }
    };
    config.output_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => out_root().join(config.hash()?),
    };
    let result = run_sweep(&config)?;
    let evaluated = result.rows.iter().filter(|r| r.eval.is_some()).count();
    println!("run      {}", result.run_dir.display());
    println!("config   {}", result.config_hash);
    println!("rows     {}", result.rows.len());
    println!("eval     {evaluated}");
    println!("failures {}", result.failures.len());
    if args.plot {
        for path in emit_plots(&result, &[])? {
            println!("plot     {}", path.display());
        }
    }
    Ok(())
}

#[derive(Args)]
struct ShapleyArgs {
    /// Output directory (default: <out root>/shapley)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid steps per coefficient
    #[arg(long, default_value_t = 9)]
    steps: usize,
    /// Lower grid bound in micrometres (default: -wavelength)
    #[arg(long)]
    lo: Option<f64>,
    /// Upper grid bound in micrometres (default: +wavelength)
    #[arg(long)]
    hi: Option<f64>,
    /// Coefficients to attribute
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    features: Vec<usize>,
    #[command(flatten)]
    optics: OpticsArgs,
    /// Emit boxplot figures next to the CSV
    #[arg(long)]
    plot: bool,
}

/// The three merit functions of one optical report, memoized per distinct
/// spectrum so the three attribution sweeps share every evaluation.
struct MeritCache {
    engine: MeritEngine,
    cache: Mutex<HashMap<Vec<(usize, u64)>, (f64, f64, f64)>>,
}

impl MeritCache {
    fn new(engine: MeritEngine) -> Self {
        Self {
            engine,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn triple(&self, spectrum: &ZernikeSpectrum) -> Result<(f64, f64, f64)> {
        let key: Vec<(usize, u64)> = spectrum
            .coefficients()
            .iter()
            .map(|(&i, &v)| (i, v.to_bits()))
            .collect();
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let report = self.engine.report(spectrum)?;
        let triple = (report.sr_mean(), report.oig_mean(), report.mtf_hn_mean());
        self.cache.lock().unwrap().insert(key, triple);
        Ok(triple)
    }
}

fn shapley_command(args: &ShapleyArgs) -> Result<()> {
    let optics = args.optics.to_config()?;
    let wavelength = optics.wavelength_um;
    let lo = args.lo.unwrap_or(-wavelength);
    let hi = args.hi.unwrap_or(wavelength);
    let grid =
        DistributionConfig::equidistant(&args.features, lo, hi, args.steps, wavelength)?;
    let out = args.out.clone().unwrap_or_else(|| out_root().join("shapley"));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let shared = MeritCache::new(MeritEngine::new(optics)?);
    let merits: [(&str, Box<dyn Fn(&ZernikeSpectrum) -> Result<f64> + Sync>); 3] = [
        ("sr", Box::new(|s| shared.triple(s).map(|t| t.0))),
        ("oig", Box::new(|s| shared.triple(s).map(|t| t.1))),
        ("mtf_hn", Box::new(|s| shared.triple(s).map(|t| t.2))),
    ];
    let mut reports = Vec::new();
    let mut csv = format!("{}\n", DistributionReport::CSV_HEADER);
    for (name, eval) in &merits {
        let report = shapley_distribution(name, &grid, eval)?;
        for row in report.csv_rows() {
            csv.push_str(&row);
            csv.push('\n');
        }
        reports.push(report);
    }
    let csv_path = out.join("shapley.csv");
    io::write_string(&csv_path, &csv)?;
    println!("grid     {} points, {} features", grid.point_count(), args.features.len());
    println!("csv      {}", csv_path.display());
    for report in &reports {
        println!("merit {}", report.merit);
        for (i, &f) in report.features.iter().enumerate() {
            let mut abs: Vec<f64> = report.points.iter().map(|p| p.phi[i].abs()).collect();
            abs.sort_by(|a, b| a.total_cmp(b));
            let median = abs[abs.len() / 2];
            println!("  w{f}: median |phi| = {median:.6}");
        }
        if !report.failures.is_empty() {
            println!("  {} grid points failed", report.failures.len());
        }
    }
    if args.plot {
        for report in &reports {
            let path = out.join(format!("shapley_{}.svg", report.merit));
            shapley_boxplot(report, &path)?;
            println!("plot     {}", path.display());
        }
    }
    Ok(())
}

#[derive(Args)]
struct ValidateEdgeArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    /// Edge angle from vertical, degrees (valid analysis range 2..10)
    #[arg(long, default_value_t = 5.0)]
    angle: f64,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 160)]
    width: usize,
    /// Dark side intensity
    #[arg(long, default_value_t = 0.15)]
    dark: f64,
    /// Bright side intensity
    #[arg(long, default_value_t = 0.85)]
    bright: f64,
    /// Compare up to this fraction of the Nyquist frequency
    #[arg(long, default_value_t = 0.8)]
    band: f64,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    optics: OpticsArgs,
}

fn validate_edge_command(args: &ValidateEdgeArgs) -> Result<()> {
    let optics = args.optics.to_config()?;
    let engine = MeritEngine::new(optics.clone())?;
    let spectrum = args.spectrum.to_spectrum(optics.wavelength_um)?;
    let psf = engine.psf(&spectrum)?;
    let kernel = ConvolutionKernel::from_psf(&psf, &args.kernel.to_options())?;
    println!(
        "spectrum rms {:.4} um, kernel {} taps capturing {:.5} of the energy",
        spectrum.aberration_rms_um(),
        kernel.support(),
        kernel.captured_energy()
    );
    for (axis, transpose) in [(Axis::Horizontal, false), (Axis::Vertical, true)] {
        // a vertical edge measures the horizontal MTF; transpose for the other axis
        let (h, w) = if transpose {
            (args.width, args.height)
        } else {
            (args.height, args.width)
        };
        let clean = edge_image(h, w, args.angle, args.dark, args.bright)?;
        let clean = if transpose {
            // rotate the edge to horizontal by transposing the synthetic image
            aberrate::imaging::Image::from_gray(clean.channel_mean().t().to_owned())?
        } else {
            clean
        };
        let blurred = perturb_image(&clean, &kernel)?;
        let clean_edge = slanted_edge_mtf(&clean, &Roi::full(&clean))?;
        let blurred_edge = slanted_edge_mtf(&blurred, &Roi::full(&blurred))?;
        let model = compute_mtf(&psf, axis)?;
        let max_freq = args.band * 0.5;
        let freqs: Vec<f64> = blurred_edge
            .mtf()
            .frequencies_cpp()
            .iter()
            .copied()
            .filter(|&f| f > 0.0 && f <= max_freq)
            .collect();
        let recovered = net_mtf(&blurred_edge, &clean_edge, &freqs)?;
        let mut sum_sq = 0.0;
        let mut max_dev: f64 = 0.0;
        for (&f, &r) in freqs.iter().zip(&recovered) {
            let dev = r - model.interpolate(f);
            sum_sq += dev * dev;
            max_dev = max_dev.max(dev.abs());
        }
        let rms = (sum_sq / freqs.len() as f64).sqrt();
        println!(
            "{}: edge angle {:+.2} deg, {} bins to {:.2} cy/px, rms dev {:.5}, max dev {:.5}",
            axis.label(),
            blurred_edge.angle_deg(),
            freqs.len(),
            max_freq,
            rms,
            max_dev
        );
    }
    Ok(())
}

#[derive(Args)]
struct PerturbArgs {
    /// Input PNG
    #[arg(long)]
    image: PathBuf,
    /// Output PNG
    #[arg(long)]
    output: PathBuf,
    /// Output bit depth (8 or 16)
    #[arg(long, default_value_t = 16)]
    depth: u8,
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    optics: OpticsArgs,
}

fn perturb_command(args: &PerturbArgs) -> Result<()> {
    let depth = match args.depth {
        8 => io::PngDepth::Eight,
        16 => io::PngDepth::Sixteen,
        other => return Err(Error::config(format!("depth must be 8 or 16, got {other}"))),
    };
    let optics = args.optics.to_config()?;
    let engine = MeritEngine::new(optics.clone())?;
    let spectrum = args.spectrum.to_spectrum(optics.wavelength_um)?;
    let image = io::load_image_png(&args.image)?;
    let psf = engine.psf(&spectrum)?;
    let kernel = ConvolutionKernel::from_psf(&psf, &args.kernel.to_options())?;
    let blurred = perturb_image(&image, &kernel)?;
    io::save_image_png(&blurred, &args.output, depth)?;
    println!(
        "wrote {} ({} taps, {:.5} energy captured)",
        args.output.display(),
        kernel.support(),
        kernel.captured_energy()
    );
    Ok(())
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of label maps (*.png)
    #[arg(long)]
    labels: PathBuf,
    /// Directory of probability maps (<stem>.npy per label)
    #[arg(long)]
    predictions: PathBuf,
    /// Reliability bin count
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Label id excluded from scoring
    #[arg(long, default_value_t = 255)]
    ignore: u16,
    /// Batch id written into the CSV row
    #[arg(long, default_value = "batch")]
    batch_id: String,
    /// Spectrum id written into the CSV row
    #[arg(long, default_value_t = 0)]
    spectrum_id: u64,
    /// Append the row to this CSV file (header added when new)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn eval_command(args: &EvalArgs) -> Result<()> {
    let entries = std::fs::read_dir(&args.labels).map_err(|e| Error::io(&args.labels, e))?;
    let mut stems: Vec<String> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&args.labels, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("png") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    if stems.is_empty() {
        return Err(Error::data(format!(
            "no label maps found in {}",
            args.labels.display()
        )));
    }
    let mut records = Vec::with_capacity(stems.len());
    for stem in &stems {
        let labels = io::load_label_png(&args.labels.join(format!("{stem}.png")))?;
        let probs = io::load_probability_npy(&args.predictions.join(format!("{stem}.npy")))?;
        records.push(PredictionRecord::new(labels, probs)?);
    }
    let options = EvalOptions {
        bins: args.bins,
        ignore_id: args.ignore,
    };
    let report = evaluate(&records, &options)?;
    let row = report.csv_row(&args.batch_id, args.spectrum_id);
    println!("{}", EvalReport::CSV_HEADER);
    println!("{row}");
    if let Some(out) = &args.out {
        let mut text = if out.exists() {
            io::read_to_string(out)?
        } else {
            format!("{}\n", EvalReport::CSV_HEADER)
        };
        text.push_str(&row);
        text.push('\n');
        io::write_string(out, &text)?;
    }
    Ok(())
}

#[derive(Args)]
struct PlotArgs {
    /// Run directory produced by `sweep`
    #[arg(long)]
    run: PathBuf,
}

fn plot_command(args: &PlotArgs) -> Result<()> {
    let result = load_sweep(&args.run)?;
    let shapley_csv = args.run.join("shapley.csv");
    let attributions = if shapley_csv.exists() {
        DistributionReport::from_csv(
            &io::read_to_string(&shapley_csv)?,
            result.config.optics.wavelength_um,
        )?
    } else {
        Vec::new()
    };
    for path in emit_plots(&result, &attributions)? {
        println!("plot     {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => sweep_command(&args),
        Command::Shapley(args) => shapley_command(&args),
        Command::ValidateEdge(args) => validate_edge_command(&args),
        Command::Perturb(args) => perturb_command(&args),
        Command::Eval(args) => eval_command(&args),
        Command::Plot(args) => plot_command(&args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
