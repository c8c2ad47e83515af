use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsar::forward::{self, ForwardSettings};
use qsar::harness::{self, ExperimentConfig};
use qsar::io::{binary, pgm};
use qsar::optics::{self, ArrayGeometry, PsfSpec};
use qsar::{metrics, restore, scene, Error, Result};

#[derive(Parser)]
#[command(name = "qsar", version, about = "Squeezed-light RF-photonic SAR imaging simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bar-chart test object as an 8-bit PGM.
    Chart(ChartArgs),
    /// Simulate one noisy quadrature image.
    Simulate(SimulateArgs),
    /// Wiener-deconvolve a simulated quadrature image.
    Reconstruct(ReconstructArgs),
    /// PSNR sweep over object size, gain and loss.
    Sweep(RunArgs),
    /// Minimum resolvable object size per gain and loss.
    Resolution(RunArgs),
    /// Analytic and simulated figures of a discrete antenna array.
    ArrayAnalyze(ArrayArgs),
}

#[derive(Args)]
struct ChartArgs {
    /// Config file or preset supplying the chart parameters.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, default_value = "chart.pgm")]
    out: PathBuf,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: String,
    /// Noise seed; defaults to the first configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Object size; defaults to the first value of the config axis.
    #[arg(long)]
    d_over_w0: Option<f64>,
    #[arg(long)]
    gain_db: Option<f64>,
    #[arg(long)]
    loss_db: Option<f64>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Quadrature image written by `simulate`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Regularisation; defaults to readout variance over mean signal power.
    #[arg(long)]
    nsr: Option<f64>,
    #[arg(long)]
    no_clip: bool,
    /// Config used for the simulation; enables the PSNR report.
    #[arg(long)]
    config: Option<String>,
    /// Gaussian waist, m, for images that do not record one.
    #[arg(long)]
    w0: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Config file, or preset name (`fig3c`, `fig3d`, `fig4`).
    #[arg(long)]
    config: String,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    previews: bool,
}

#[derive(Args)]
struct ArrayArgs {
    /// Antenna density, 1/m.
    #[arg(long)]
    rho: f64,
    /// Array length, m.
    #[arg(long = "L")]
    l_total: f64,
    /// Antenna aperture, m.
    #[arg(long = "D")]
    d_aperture: f64,
    /// Wavelength, m.
    #[arg(long)]
    lambda: f64,
    /// Range, m.
    #[arg(long)]
    z: f64,
    /// Also simulate the compressed point response over this window, m.
    #[arg(long)]
    window: Option<f64>,
    /// Samples across the window; defaults to the minimum that resolves the fringes.
    #[arg(long)]
    samples: Option<usize>,
    /// CSV destination for the simulated profile.
    #[arg(long)]
    profile_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Chart(a) => chart(a),
        Command::Simulate(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Sweep(a) => sweep(a, false),
        Command::Resolution(a) => sweep(a, true),
        Command::ArrayAnalyze(a) => array_analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn chart(a: ChartArgs) -> Result<()> {
    let mut spec = match a.config.as_deref().map(ExperimentConfig::load).transpose()? {
        Some(cfg) => match cfg.object {
            harness::ObjectSource::Chart(spec) => spec,
            harness::ObjectSource::Raster { .. } => {
                return Err(Error::Validation("config describes a raster, not a chart".into()))
            }
        },
        None => scene::ChartSpec::default(),
    };
    if let Some(n) = a.size {
        spec.rows = n;
        spec.cols = n;
    }
    if let Some(g) = a.groups {
        spec.n_groups = g;
    }
    let obj = scene::generate_bar_chart(&spec)?;
    qsar::io::write_file(&a.out, &scene::save_raster(&obj, obj.max_kappa())?)?;
    println!("wrote {}x{} chart to {}", spec.rows, spec.cols, a.out.display());
    Ok(())
}

fn first(axis: &[f64]) -> f64 {
    axis[0]
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let d_over_w0 = a.d_over_w0.unwrap_or_else(|| first(&cfg.d_over_w0));
    let gain_db = a.gain_db.unwrap_or_else(|| first(&cfg.gain_db));
    let loss_db = a.loss_db.unwrap_or_else(|| first(&cfg.loss_db));
    let seed = a.seed.unwrap_or(cfg.seeds[0]);
    if d_over_w0.is_nan() || d_over_w0 <= 0.0 {
        return Err(Error::Validation(format!("d_over_w0 {d_over_w0} must be > 0")));
    }

    let truth = scene::rescale_extent(&cfg.build_object()?, d_over_w0 * cfg.w0)?;
    let p = harness::cell_params(&cfg, truth.mean_kappa(), gain_db, loss_db)?;
    let psf = PsfSpec::covering(cfg.w0, truth.pitch())?;
    let settings = ForwardSettings {
        budget: cfg.photon_budget,
        ..ForwardSettings::default()
    };
    let img = forward::simulate(&truth, &psf, &p, &settings, seed)?;

    qsar::io::write_file(&a.out.join("quadrature.bin"), &binary::encode_quadrature(&img))?;
    qsar::io::write_file(&a.out.join("quadrature.pgm"), &pgm::encode_affine(&img.x_readout))?;
    qsar::io::write_file(
        &a.out.join("truth.pgm"),
        &scene::save_raster(&truth, truth.max_kappa().max(f64::MIN_POSITIVE))?,
    )?;
    println!(
        "simulated d/w0={d_over_w0} G={gain_db} dB loss={loss_db} dB seed={seed}: \
         canvas {:?}, n_P'={:.4}, N_B'={:.4}, snr={:.4} -> {}",
        img.x_readout.dim(),
        p.n_p_prime(),
        p.n_b_prime(),
        qsar::channel::snr(&p).unwrap_or(f64::INFINITY),
        a.out.display()
    );
    Ok(())
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let img = binary::decode_quadrature(&qsar::io::read_file(&a.input)?)?;
    let cfg = a.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let w0 = a
        .w0
        .or(img.w0)
        .or(cfg.as_ref().map(|c| c.w0))
        .ok_or_else(|| Error::Validation("image records no waist; pass --w0".into()))?;
    let kernel = optics::gaussian_psf(&PsfSpec::covering(w0, img.pitch)?)?;
    let budget = cfg.as_ref().map(|c| c.photon_budget).unwrap_or_default();
    let nsr = match a.nsr {
        Some(v) => v,
        None => restore::default_nsr(&img.params, budget, img.roi.rows * img.roi.cols)?,
    };
    let clip = !a.no_clip && cfg.as_ref().is_none_or(|c| c.clip);
    let recon = restore::wiener_deconvolve(&img, &kernel, nsr, clip)?;

    qsar::io::write_file(
        &a.out.join("reconstruction.bin"),
        &binary::encode_reconstruction(&recon, &img),
    )?;
    qsar::io::write_file(
        &a.out.join("reconstruction.pgm"),
        &pgm::encode_range(&recon.f_tilde, 0.0, 1.0),
    )?;
    print!("reconstructed {:?} with nsr={nsr:.6e}", recon.f_tilde.dim());
    if let Some(cfg) = cfg {
        let extent = img.pitch * img.roi.rows as f64;
        let truth = scene::rescale_extent(&cfg.build_object()?, extent)?;
        if truth.dim() != recon.f_tilde.dim() {
            return Err(Error::DimensionMismatch {
                expected: truth.dim(),
                actual: recon.f_tilde.dim(),
            });
        }
        let score = metrics::psnr(&recon, &truth)?;
        print!(", PSNR {:.3} dB", score.db);
    }
    println!(" -> {}", a.out.display());
    Ok(())
}

fn sweep(a: RunArgs, resolution: bool) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = a.out {
        cfg.output_dir = out;
    }
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    cfg.previews |= a.previews;
    if resolution {
        let (summary, rows) = harness::run_resolution_curve(&cfg)?;
        for r in &rows {
            println!(
                "loss {} dB, G {} dB: d_min/w0 = {}",
                r.loss_db,
                r.gain_db,
                r.d_min.csv_field()
            );
        }
        report(&summary.output_dir, summary.records.len(), summary.manifest.wall_time_s);
    } else {
        let summary = harness::run_sweep(&cfg)?;
        report(&summary.output_dir, summary.records.len(), summary.manifest.wall_time_s);
    }
    Ok(())
}

fn report(dir: &Path, cells: usize, secs: f64) {
    println!("{cells} cells in {secs:.2} s -> {}", dir.display());
}

fn array_analyze(a: ArrayArgs) -> Result<()> {
    let geom = ArrayGeometry {
        rho: a.rho,
        l_total: a.l_total,
        d_aperture: a.d_aperture,
        lambda: a.lambda,
        z: a.z,
    };
    geom.validate()
        .map_err(|e| Error::Validation(e.to_string()))?;
    println!("antennas            {}", geom.antenna_count());
    println!("view_angle_rad      {}", optics::view_angle(&geom)?);
    println!("synthetic_aperture  {}", optics::synthetic_aperture(&geom)?);
    println!("aliasing_spacing    {}", optics::aliasing_spacing(&geom)?);
    println!("resolution_limit    {}", optics::resolution_limit(&geom)?);
    if let Some(window) = a.window {
        let fringe = geom.lambda * geom.z / geom.l_total;
        let samples = a
            .samples
            .unwrap_or((8.0 * window / fringe).ceil() as usize + 1);
        let profile = optics::fresnel_compressed_psf(&geom, samples, window)?;
        match profile.aliasing_spacing() {
            Some(s) => println!("measured_aliasing   {s}"),
            None => println!("measured_aliasing   none in window"),
        }
        if let Some(w) = profile.main_lobe_half_width() {
            println!("measured_half_width {w}");
        }
        if let Some(path) = a.profile_out {
            qsar::io::write_file(&path, profile.to_csv().as_bytes())?;
            println!("profile -> {}", path.display());
        }
    }
    Ok(())
}
