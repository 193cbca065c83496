//! The `sphpoly` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sphpoly_core::approx::ApproxConfig;
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::{BuildOptions, Lut};
use sphpoly_core::quantize::{
    choose_quanta, dataset_stats, DatasetStats, IntWidth, Particle, QuantaConfig, DEFAULT_CLUSTER_FACTOR,
};
use sphpoly_core::raycast::{CompositeOptions, TransferFunction};

use crate::config::{OneOrMany, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, CameraSpec};
use crate::report::{self, ErrorReport, RenderReport, StatsReport};
use crate::{parallel, scene, validate};

#[derive(Debug, Parser)]
#[command(name = "sphpoly", version, about = "Quantized piecewise-polynomial ray approximations of SPH fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a look-up table and write it as a .splt file.
    LutBuild,
    /// Print E*, Q_D and the combined error over a (K, D) grid.
    ErrorReport,
    /// Render particles to a PPM image with a JSON report.
    Render,
    /// Cross-check the pipeline against the reference oracle.
    Validate,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "SPHPOLY_THREADS")]
    pub threads: Option<usize>,
    /// Integer width in bits: 32, 64 or 128.
    #[arg(long, global = true)]
    pub int_width: Option<u32>,
    /// Number of pieces; a comma-separated list for error-report.
    #[arg(long = "K", global = true, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Polynomial degree; a comma-separated list for error-report.
    #[arg(long = "D", global = true, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Look-up table size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Optimizer starts per table entry after the seed pass.
    #[arg(long, global = true)]
    pub refine_starts: Option<usize>,
    /// Built-in kernel id or kernel JSON file.
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// Look-up table file (.splt).
    #[arg(long, global = true)]
    pub lut: Option<PathBuf>,
    /// Transfer function CSV.
    #[arg(long, global = true)]
    pub tf: Option<PathBuf>,
    /// Camera JSON.
    #[arg(long, global = true)]
    pub camera: Option<PathBuf>,
    /// Particle file (CSV or binary).
    #[arg(long, global = true)]
    pub particles: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Data variance factor: a_max relative to a representative particle's peak.
    #[arg(long, global = true)]
    pub variance: Option<f64>,
    /// Compositing sample spacing in world units.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Output format of error-report: table or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

impl Flags {
    fn into_config(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::read(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            seed: self.seed,
            threads: self.threads,
            int_width: self.int_width,
            k: self.k.map(OneOrMany::Many),
            d: self.d.map(OneOrMany::Many),
            n: self.n,
            refine_starts: self.refine_starts,
            kernel: self.kernel,
            lut: self.lut,
            tf: self.tf,
            camera: self.camera,
            particles: self.particles,
            out: self.out,
            report: self.report,
            variance: self.variance,
            step: self.step,
            format: self.format,
        };
        Ok(flags.over(file))
    }
}

/// Parses the arguments, runs the command and maps errors to exit codes:
/// 2 for usage errors, 1 for everything else.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Usage(_)) { 2 } else { 1 })
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = cli.flags.into_config()?;
    let command = cli.command;
    parallel::with_threads(cfg.threads, move || match command {
        Command::LutBuild => cmd_lut_build(&cfg),
        Command::ErrorReport => cmd_error_report(&cfg),
        Command::Render => cmd_render(&cfg),
        Command::Validate => cmd_validate(&cfg),
    })?
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Usage(format!("--{flag} is required")))
}

fn build_options(cfg: &RunConfig, default_n: usize) -> Result<BuildOptions> {
    let mut opts =
        BuildOptions { n: cfg.lut_size(default_n)?, refine_starts: cfg.refine_starts()?, ..BuildOptions::default() };
    opts.optimize.seed = cfg.seed();
    Ok(opts)
}

fn build(kernel: &PiecewisePolynomialKernel, k: usize, d: usize, opts: &BuildOptions) -> Result<Lut> {
    let approx = ApproxConfig::new(k, d).map_err(|e| Error::Usage(e.to_string()))?;
    parallel::build_lut(kernel, &approx, opts)
}

/// The table named by `--lut`, or one built on the fly.
fn table(cfg: &RunConfig, kernel: &PiecewisePolynomialKernel, default_n: usize) -> Result<Lut> {
    if let Some(path) = &cfg.lut {
        if !path.exists() {
            return Err(Error::Usage(format!("look-up table {} does not exist", path.display())));
        }
        let lut = io::read_lut(path)?;
        if lut.kernel_id() != kernel.id() || lut.q() != kernel.q() {
            return Err(Error::Usage(format!(
                "table {} was built for kernel '{}', not '{}'",
                path.display(),
                lut.kernel_id(),
                kernel.id()
            )));
        }
        return Ok(lut);
    }
    let (k, d) = cfg.single_kd()?;
    build(kernel, k, d, &build_options(cfg, default_n)?)
}

fn cmd_lut_build(cfg: &RunConfig) -> Result<ExitCode> {
    let kernel = io::load_kernel(cfg.kernel_spec())?;
    let (k, d) = cfg.single_kd()?;
    let out = required(&cfg.out, "out")?;
    let opts = build_options(cfg, sphpoly_core::lut::DEFAULT_LUT_SIZE)?;
    let lut = build(&kernel, k, d, &opts)?;
    io::write_lut(out, &lut)?;
    let c = kernel.constants()?;
    println!("{:>2} {:>2} {:>6} {:>12}", "K", "D", "N", "E*");
    println!("{k:>2} {d:>2} {:>6} {:>12.5e}", lut.len(), lut.e_star(&c));
    Ok(ExitCode::SUCCESS)
}

fn cmd_error_report(cfg: &RunConfig) -> Result<ExitCode> {
    let kernel = io::load_kernel(cfg.kernel_spec())?;
    let c = kernel.constants()?;
    let width = cfg.int_width()?;
    let variance = cfg.variance.unwrap_or(1e5);
    let mut rows = Vec::new();
    if cfg.lut.is_some() {
        rows.push(report::error_row(&kernel, &table(cfg, &kernel, 0)?, width, variance)?);
    } else {
        let opts = build_options(cfg, sphpoly_core::lut::DEFAULT_LUT_SIZE)?;
        for k in cfg.ks()? {
            for d in cfg.ds()? {
                rows.push(report::error_row(&kernel, &build(&kernel, k, d, &opts)?, width, variance)?);
            }
        }
    }
    let rep = ErrorReport {
        kernel_id: kernel.id().to_string(),
        kappa: c.kappa,
        kappa_prime: c.kappa_prime,
        variance,
        trends: report::trends(&rows),
        rows,
    };
    let mut stdout = std::io::stdout().lock();
    match cfg.format.as_deref().unwrap_or("table") {
        "json" => writeln!(stdout, "{}", serde_json::to_string_pretty(&rep)?),
        "table" => {
            let _ = writeln!(
                stdout,
                "kernel {}  κ={:.6}  κ′={:.6}  width {}  variance {:e}",
                rep.kernel_id,
                rep.kappa,
                rep.kappa_prime,
                width.bits(),
                variance
            );
            let _ = writeln!(stdout, "{:>2} {:>2} {:>6} {:>12} {:>12} {:>12}", "K", "D", "N", "E*", "Q_D", "combined");
            for r in &rep.rows {
                let _ = writeln!(
                    stdout,
                    "{:>2} {:>2} {:>6} {:>12.5e} {:>12.5e} {:>12.5e}",
                    r.k, r.d, r.lut_entries, r.e_star, r.q_d, r.combined
                );
            }
            writeln!(
                stdout,
                "trends: E* falls in K: {}, E* falls in D: {}, Q_D rises in D: {}",
                rep.trends.e_star_falls_in_k, rep.trends.e_star_falls_in_d, rep.trends.q_d_rises_in_d
            )
        }
        other => return Err(Error::Usage(format!("unknown format '{other}' (table or json)"))),
    }
    .map_err(Error::io("<stdout>"))?;
    Ok(ExitCode::SUCCESS)
}

/// Statistics and quanta of a particle set, with the optional variance
/// override replacing `a_max`.
pub fn scene_quanta(
    kernel: &PiecewisePolynomialKernel,
    lut: &Lut,
    particles: &[Particle],
    width: IntWidth,
    variance: Option<f64>,
) -> Result<(DatasetStats, QuantaConfig)> {
    let c = kernel.constants()?;
    let d = lut.config().d();
    let mut stats = match particles {
        [] => DatasetStats::from_variance(1.0, 1.0, 1.0, 1.0, 1.0, kernel.eval(0.0))?,
        _ => dataset_stats(particles, lut.peak_amplitude(), DEFAULT_CLUSTER_FACTOR)?,
    };
    if let Some(v) = variance {
        stats = DatasetStats::from_variance(v, stats.mass, stats.density, stats.h, stats.value, kernel.eval(0.0))?;
    }
    let quanta = choose_quanta(d, &c, kernel.q(), &stats, width)?;
    Ok((stats, quanta))
}

fn load_camera(cfg: &RunConfig, fallback: CameraSpec) -> Result<CameraSpec> {
    cfg.camera.as_deref().map_or(Ok(fallback), io::read_camera)
}

fn load_tf(cfg: &RunConfig) -> Result<TransferFunction> {
    cfg.tf.as_deref().map_or_else(|| Ok(scene::desk_transfer_function()), io::read_transfer_function)
}

/// Default compositing step: an eighth of the smallest smoothing radius.
fn default_step(particles: &[Particle]) -> f64 {
    let h = particles.iter().map(|p| p.h).fold(f64::INFINITY, f64::min);
    if h.is_finite() {
        h / 8.0
    } else {
        0.05
    }
}

fn cmd_render(cfg: &RunConfig) -> Result<ExitCode> {
    let kernel = io::load_kernel(cfg.kernel_spec())?;
    let particles = io::read_particles(required(&cfg.particles, "particles")?)?;
    let out = required(&cfg.out, "out")?;
    let camera = load_camera(cfg, scene::desk_camera())?.build()?;
    let tf = load_tf(cfg)?;
    let width = cfg.int_width()?;
    let lut = table(cfg, &kernel, sphpoly_core::lut::DEFAULT_LUT_SIZE)?;
    let (stats, quanta) = scene_quanta(&kernel, &lut, &particles, width, cfg.variance)?;
    let step = cfg.step.unwrap_or_else(|| default_step(&particles));
    if !(step > 0.0) {
        return Err(Error::Usage(format!("--step must be positive, got {step}")));
    }
    let opts = CompositeOptions { step, background: [0.0; 3], near: camera.near(), far: camera.far() };
    let img = parallel::render_width(width, &particles, &camera, &lut, &quanta, &tf, &opts);
    io::write_ppm(out, img.width, img.height, &img.pixels)?;

    let c = kernel.constants()?;
    let e_star = lut.e_star(&c);
    let q_d = report::quantization_estimate(lut.config().d(), &c, kernel.q(), &quanta, &stats);
    let rep = RenderReport {
        kernel_id: kernel.id().to_string(),
        k: lut.config().k(),
        d: lut.config().d(),
        lut_entries: lut.len(),
        width: img.width,
        height: img.height,
        quanta: (&quanta).into(),
        stats: StatsReport::new(&stats, kernel.eval(0.0)),
        e_star,
        q_d,
        combined: report::combined_error(e_star, q_d),
        particles: particles.len(),
        particles_on_screen: img.particles_on_screen,
        knot_count: img.knot_count,
        overflow_count: img.overflow_count,
        first_error: img.first_error.as_ref().map(ToString::to_string),
    };
    let report_path = cfg.report.clone().unwrap_or_else(|| out.with_extension("json"));
    std::fs::write(&report_path, serde_json::to_vec_pretty(&rep)?).map_err(Error::io(&report_path))?;
    if let Some(e) = img.first_error {
        eprintln!("error: {} particles or rays overflowed; first: {e}", img.overflow_count);
        return Ok(ExitCode::FAILURE);
    }
    println!(
        "{}x{} image, {} knots, E*={:.3e}, Q_D={:.3e}, combined={:.3e}",
        img.width, img.height, img.knot_count, e_star, q_d, rep.combined
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(cfg: &RunConfig) -> Result<ExitCode> {
    let kernel = io::load_kernel(cfg.kernel_spec())?;
    let particles = match &cfg.particles {
        Some(p) => io::read_particles(p)?,
        None => scene::desk_scene(),
    };
    let mut reduced = scene::desk_camera();
    reduced.width = 32;
    reduced.height = 32;
    let camera = load_camera(cfg, reduced)?.build()?;
    let lut = table(cfg, &kernel, 256)?;
    let width = cfg.int_width()?;
    let (stats, quanta) = scene_quanta(&kernel, &lut, &particles, width, cfg.variance)?;
    let c = kernel.constants()?;
    let q_d = report::quantization_estimate(lut.config().d(), &c, kernel.q(), &quanta, &stats);
    let combined = report::combined_error(lut.e_star(&c), q_d);
    let scene = validate::Scene { kernel: &kernel, lut: &lut, quanta: &quanta, particles: &particles, camera: &camera };
    let rep = validate::run(&scene, combined, cfg.seed());
    for g in &rep.groups {
        println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    if let Some(path) = &cfg.report {
        std::fs::write(path, serde_json::to_vec_pretty(&rep)?).map_err(Error::io(path))?;
    }
    Ok(if rep.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
