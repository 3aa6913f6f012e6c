use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fatou_lab::extension::{annuli_surrogate, average_field, dyadic_heights, poisson_extend, HalfSpaceField};
use fatou_lab::fractal::{box_dimension, cantor_measure, divergence_set, PointSet};
use fatou_lab::io::{
    load_field, load_graph, load_grid_function, load_grid_function_as, read_point_set, save_field,
    save_grid_function, write_box_counts, write_point_set,
};
use fatou_lab::kernels::KernelSpec;
use fatou_lab::lipschitz::{
    boundary_tangential_max, corkscrew, corkscrew_constant, graph_distance, region_inclusion_check,
    surface_lp_norm, surface_measure, LipschitzGraph, SurrogateParams,
};
use fatou_lab::maximal::{
    composite_max, dilated_mitigated_max, dyadic_radii, fractional_power_max, mitigated_max,
    tangential_max, tangential_max_with_argmax, ApproachRegionSpec, CompositeParams,
};
use fatou_lab::potentials::{bessel_smooth, sharp_maximal, slobodeckij_seminorm};
use fatou_lab::{make_grid, Error, Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use fatou_lab_cli::config::ExperimentConfig;
use fatou_lab_cli::experiments::run_experiment;
use fatou_lab_cli::report::render_text;
use fatou_lab_cli::suite::{run_criterion, CRITERIA};

/// Numerical experiments on boundary convergence of harmonic extensions.
#[derive(Parser)]
#[command(name = "fatou-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a kernel at the radii listed in a CSV file.
    KernelTable(KernelTableArgs),
    /// Extend a grid function to a half-space field.
    Extend(ExtendArgs),
    /// Apply a maximal operator.
    Maxfn(MaxfnArgs),
    /// Bessel smoothing, sharp maximal function or Slobodeckij seminorm.
    Potential(PotentialArgs),
    /// Cantor sets, box counting and divergence sets.
    Fractal(FractalArgs),
    /// Lipschitz-graph geometry checks.
    Lipschitz(LipschitzArgs),
    /// Run one experiment configuration.
    Verify(VerifyArgs),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

/// Grid used to read CSV inputs or to build new samples.
#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// `N = 2^levels` per axis.
    #[arg(long, default_value_t = 10)]
    levels: u32,
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
}

impl GridArgs {
    fn grid(&self) -> fatou_lab::Result<Grid> {
        make_grid(self.dim, self.levels, self.extent)
    }

    /// Binary files carry their grid; CSV files are read onto this one.
    fn load(&self, path: &Path) -> fatou_lab::Result<GridFunction> {
        if path.extension().is_some_and(|e| e == "csv") {
            load_grid_function_as(path, self.grid()?)
        } else {
            load_grid_function(path)
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKindArg {
    Poisson,
    Bessel,
    Riesz,
}

#[derive(Args)]
struct KernelTableArgs {
    #[arg(long, value_enum)]
    kind: KernelKindArg,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Smoothness of Bessel and Riesz kernels.
    #[arg(long)]
    alpha: Option<f64>,
    /// Height of the Poisson kernel.
    #[arg(long)]
    t: Option<f64>,
    /// CSV of radii, one per line (a non-numeric header line is skipped).
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendKind {
    Poisson,
    Surrogate,
    Average,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long, value_enum, default_value = "poisson")]
    kind: ExtendKind,
    /// Heights `t0 2^{-k}`, `k = 0..=K`, given as `t0,K`.
    #[arg(long, value_parser = parse_heights)]
    heights: (f64, u32),
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Averaging exponent of the surrogate and average fields.
    #[arg(long, default_value_t = 1.5)]
    r: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_l: f64,
    #[arg(long, default_value_t = 8)]
    j: u32,
    #[command(flatten)]
    grid: GridArgs,
}

fn parse_heights(s: &str) -> Result<(f64, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected t0,K")?;
    let t0: f64 = a.trim().parse().map_err(|e| format!("t0: {e}"))?;
    let k: u32 = b.trim().parse().map_err(|e| format!("K: {e}"))?;
    Ok((t0, k))
}

#[derive(Clone, Copy, ValueEnum)]
enum MaxOp {
    Tangential,
    Mitigated,
    Dilated,
    Fractional,
    Composite,
}

#[derive(Args)]
struct MaxfnArgs {
    #[arg(long, value_enum)]
    op: MaxOp,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    aperture: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Averaging exponent (`s` of the fractional maximal function).
    #[arg(long, default_value_t = 1.5)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    j: u32,
    /// Fractional order of the fractional maximal function.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_l: f64,
    /// A half-space field for tangential, mitigated and dilated; a grid
    /// function otherwise.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Dump `(x0, t*, x*)` witnesses of the tangential maximum.
    #[arg(long)]
    argmax: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialOp {
    Smooth,
    Sharp,
    Seminorm,
}

#[derive(Args)]
struct PotentialArgs {
    #[arg(value_enum)]
    op: PotentialOp,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Comma-separated ball radii of the sharp maximal function; dyadic by default.
    #[arg(long, value_delimiter = ',')]
    scales: Vec<f64>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FractalOp {
    Cantor,
    Boxdim,
    Divset,
}

#[derive(Args)]
struct FractalArgs {
    #[arg(value_enum)]
    op: FractalOp,
    #[arg(long, default_value_t = 0.6309297535714574)]
    s: f64,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 2f64.powi(-8))]
    tmin: f64,
    #[arg(long, value_parser = parse_window, default_value = "4,10")]
    window: (u32, u32),
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    aperture: f64,
    /// Point set (boxdim) or half-space field (divset).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Reference boundary values for divset; the finest slice by default.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

fn parse_window(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    Ok((
        a.trim().parse().map_err(|e| format!("lo: {e}"))?,
        b.trim().parse().map_err(|e| format!("hi: {e}"))?,
    ))
}

#[derive(Clone, Copy, ValueEnum)]
enum LipschitzOp {
    Corkscrew,
    Inclusion,
    Surface,
    BoundaryMax,
}

#[derive(Args)]
struct LipschitzArgs {
    #[arg(value_enum)]
    op: LipschitzOp,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Profile `φ`, in any grid-function or graph format.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_l: f64,
    #[arg(long, default_value_t = 8)]
    j: u32,
    /// Boundary data for boundary-max.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed list of the file.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Overrides the refinement levels of the file.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Write experiment reports below this directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
}

/// Failure of a command: `Usage` maps to exit code 2, `Criteria` to 1.
enum Failure {
    Usage(String),
    Criteria,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn open(path: &Path) -> io::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn kernel_table(a: KernelTableArgs) -> CmdResult {
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Failure::Usage(format!("--{what} is required")));
    let spec = match a.kind {
        KernelKindArg::Poisson => KernelSpec::poisson(a.n, need(a.t, "t")?)?,
        KernelKindArg::Bessel => KernelSpec::bessel(a.n, need(a.alpha, "alpha")?)?,
        KernelKindArg::Riesz => KernelSpec::riesz(a.n, need(a.alpha, "alpha")?)?,
    };
    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "r,value")?;
    for (ln, line) in open(&a.points)?.lines().enumerate() {
        let line = line?;
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        let r: f64 = match field.parse() {
            Ok(r) => r,
            Err(_) if ln == 0 => continue,
            Err(e) => return Err(Failure::Usage(format!("{}: line {}: {e}", a.points.display(), ln + 1))),
        };
        writeln!(out, "{r},{}", spec.eval(&[r, 0.0])?)?;
    }
    out.flush()?;
    Ok(())
}

fn extend(a: ExtendArgs) -> CmdResult {
    let f = a.grid.load(&a.input)?;
    let hs = dyadic_heights(a.heights.0, a.heights.1);
    let u = match a.kind {
        ExtendKind::Poisson => poisson_extend(&f, &hs)?,
        ExtendKind::Surrogate => annuli_surrogate(&f.abs(), &hs, a.alpha_l, a.r, a.j)?,
        ExtendKind::Average => average_field(&f, &hs, a.r)?,
    };
    save_field(&a.output, &u)?;
    Ok(())
}

fn maxfn(a: MaxfnArgs) -> CmdResult {
    let field = || -> fatou_lab::Result<HalfSpaceField> { load_field(&a.input) };
    let out = match a.op {
        MaxOp::Tangential => {
            let u = field()?;
            let spec = ApproachRegionSpec::new(a.beta, a.aperture, 1.0)?;
            match &a.argmax {
                Some(path) => {
                    let (m, wit) = tangential_max_with_argmax(&u, &spec)?;
                    let g = *u.grid();
                    let mut w = sink(Some(path))?;
                    writeln!(w, "x0,t,x")?;
                    for (i, wt) in wit.iter().enumerate() {
                        writeln!(w, "{},{},{}", g.coords(i)[0], u.heights()[wt.k], g.coords(wt.index)[0])?;
                    }
                    w.flush()?;
                    m
                }
                None => tangential_max(&u, &spec)?,
            }
        }
        MaxOp::Mitigated => mitigated_max(&field()?, a.p, a.beta)?,
        MaxOp::Dilated => dilated_mitigated_max(&field()?, a.p, a.beta, a.j)?,
        MaxOp::Fractional => fractional_power_max(&a.grid.load(&a.input)?, a.r, a.alpha)?,
        MaxOp::Composite => composite_max(
            &a.grid.load(&a.input)?,
            &CompositeParams {
                p: a.p,
                r: a.r,
                beta: a.beta,
                alpha_l: a.alpha_l,
                j_max: a.j,
            },
        )?,
    };
    save_grid_function(&a.output, &out)?;
    Ok(())
}

fn potential(a: PotentialArgs) -> CmdResult {
    let f = a.grid.load(&a.input)?;
    let need_out = || a.output.clone().ok_or_else(|| Failure::Usage("--output is required".into()));
    match a.op {
        PotentialOp::Smooth => save_grid_function(&need_out()?, &bessel_smooth(&f, a.alpha)?)?,
        PotentialOp::Sharp => {
            let scales = if a.scales.is_empty() {
                dyadic_radii(f.grid())
            } else {
                a.scales.clone()
            };
            save_grid_function(&need_out()?, &sharp_maximal(&f, a.alpha, &scales)?)?;
        }
        PotentialOp::Seminorm => {
            let all: Vec<usize> = (0..f.grid().len()).collect();
            let v = slobodeckij_seminorm(&f, a.sigma, a.p, &all)?;
            let mut out = sink(a.output.as_deref())?;
            writeln!(out, "{v}")?;
            out.flush()?;
        }
    }
    Ok(())
}

fn write_points(path: Option<&Path>, set: &PointSet) -> CmdResult {
    let mut out = sink(path)?;
    write_point_set(&mut out, set)?;
    out.flush()?;
    Ok(())
}

fn fractal(a: FractalArgs) -> CmdResult {
    let need_in = || a.input.clone().ok_or_else(|| Failure::Usage("--input is required".into()));
    match a.op {
        FractalOp::Cantor => {
            let grid = a.grid.grid()?;
            let set = cantor_measure(a.s, a.depth)?.support_points(&grid);
            write_points(a.output.as_deref(), &set)
        }
        FractalOp::Boxdim => {
            let grid = a.grid.grid()?;
            let set = read_point_set(open(&need_in()?)?, grid)?;
            let d = box_dimension(&set, a.window)?;
            let mut out = sink(a.output.as_deref())?;
            write_box_counts(&mut out, &grid, &d)?;
            out.flush()?;
            eprintln!("box dimension {:.4} (r² {:.4})", d.slope, d.r2);
            Ok(())
        }
        FractalOp::Divset => {
            let u = load_field(&need_in()?)?;
            let reference = match &a.reference {
                Some(p) => {
                    let ga = GridArgs {
                        dim: u.grid().dim(),
                        levels: u.grid().levels(),
                        extent: u.grid().extent(),
                    };
                    ga.load(p)?
                }
                None => u.slice_function(u.heights().len() - 1),
            };
            let spec = ApproachRegionSpec::new(a.beta, a.aperture, 1.0)?;
            let set = divergence_set(&u, &reference, &spec, a.eps, a.tmin)?;
            write_points(a.output.as_deref(), &set)
        }
    }
}

fn load_profile(a: &LipschitzArgs) -> fatou_lab::Result<LipschitzGraph> {
    match load_graph(&a.profile) {
        Ok(g) => Ok(g),
        Err(Error::Format(_)) => Ok(LipschitzGraph::new(a.grid.load(&a.profile)?, 0)),
        Err(e) => Err(e),
    }
}

fn lipschitz(a: LipschitzArgs) -> CmdResult {
    let lg = load_profile(&a)?;
    let g = *lg.grid();
    match a.op {
        LipschitzOp::Corkscrew => {
            let kappa = corkscrew_constant(lg.lipschitz_constant());
            let mut rng = SplitMix64::seed_from_u64(a.seed);
            let lv = g.levels() as f64;
            let mut bad = 0usize;
            for _ in 0..a.samples {
                let x0 = [rng.random::<f64>() * g.extent(), 0.0];
                let t = 2f64.powf(rng.random_range(-lv..0.0));
                let d = graph_distance(&lg, &corkscrew(&lg, x0, t)?);
                if d < kappa * t - 2.0 * g.spacing() || d > t * (1.0 + 1e-12) {
                    bad += 1;
                }
            }
            println!("M = {}, κ = {kappa}, violations {bad} of {}", lg.lipschitz_constant(), a.samples);
            if bad > 0 {
                return Err(Failure::Criteria);
            }
        }
        LipschitzOp::Inclusion => {
            let r = region_inclusion_check(&lg, a.beta, a.c, a.samples, a.seed)?;
            println!("violations {} of {} samples ({} draws)", r.violations, r.samples, r.draws);
            if r.violations > 0 {
                return Err(Failure::Criteria);
            }
        }
        LipschitzOp::Surface => {
            println!("{}", surface_measure(&lg, |_| true));
        }
        LipschitzOp::BoundaryMax => {
            let input = a.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
            let f = a.grid.load(input)?;
            let params = SurrogateParams::for_exponent(&g, a.p, a.alpha_l, a.j);
            let m = boundary_tangential_max(&lg, &f, a.beta, a.c, &params)?;
            println!("L^p(σ) norm {}", surface_lp_norm(&lg, &m, a.p)?);
            if let Some(out) = &a.output {
                save_grid_function(out, &m)?;
            }
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(l) = a.levels {
        cfg.grid.levels = l;
    }
    if let Some(d) = a.output_dir {
        cfg.output_dir = d;
    }
    let rep = run_experiment(&cfg)?;
    print!("{}", render_text(&rep));
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::Criteria)
    }
}

fn suite(a: SuiteArgs) -> CmdResult {
    let ids: Vec<u32> = match a.only {
        Some(v) => v,
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut all = true;
    for id in ids {
        let o = run_criterion(id, a.output_dir.as_deref())?;
        println!("{}", o.line());
        all &= o.passed();
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Criteria)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("FATOU_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("FATOU_LAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = configure_threads().and_then(|_| match cli.command {
        Command::KernelTable(a) => kernel_table(a),
        Command::Extend(a) => extend(a),
        Command::Maxfn(a) => maxfn(a),
        Command::Potential(a) => potential(a),
        Command::Fractal(a) => fractal(a),
        Command::Lipschitz(a) => lipschitz(a),
        Command::Verify(a) => verify(a),
        Command::Suite(a) => suite(a),
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criteria) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("fatou-lab: {m}");
            ExitCode::from(2)
        }
    }
}
