//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use semicov_core::acftest::{self, AcfPair, CLaw};
use semicov_core::design::{self, Criterion, SearchMethod, SearchOptions};
use semicov_core::kernels::{psi_of, uniform_grid, validate_abc};
use semicov_core::{fisher, forecast, ruin, simulate, Covariance, Design, Error, Interval, Kernel};

use crate::config::load_kernel;
use crate::error::CliResult;
use crate::output::{num, numbered_header, read_series, Output, MISSING};

#[derive(Debug, Parser)]
#[command(name = "semicov", version, about = "Semicontinuous covariance kernels: design, simulation, tests, forecasts and ruin")]
pub struct Cli {
    /// Directory for CSV/JSON outputs and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for replicated work (defaults to all cores). Outputs
    /// do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the abc conditions and tabulate C, γ and ψ.
    ValidateKernel(ValidateArgs),
    /// Fisher information and spectral bounds for one design.
    Fisher(FisherArgs),
    /// Fisher information over a sweep of equispaced distances.
    FisherGrid(FisherGridArgs),
    /// Grid search for an optimal design.
    DesignSearch(DesignSearchArgs),
    /// Simulate correlated increments and their random walks.
    Simulate(SimulateArgs),
    /// Two walks driven by the same noise: nugget kernel vs banded kernel.
    CompareJumps(CompareArgs),
    /// Empirical vs theoretical ACF and the sum-of-residuals statistic.
    AcfTest(AcfArgs),
    /// Mean sum-of-residuals over the jump scenarios.
    Table1(Table1Args),
    /// Conditional Monte-Carlo forecast of an observed walk.
    Forecast(ForecastArgs),
    /// Ruin probabilities of a surplus process.
    Ruin(RuinArgs),
}

#[derive(Debug, Args)]
pub struct KernelArg {
    /// Kernel config file (TOML).
    #[arg(long)]
    pub kernel: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    /// Largest distance checked; defaults to a family-specific D_max.
    #[arg(long)]
    pub dmax: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DesignKind {
    /// `n` points spaced `d` apart from `start`.
    Equispaced,
    /// Explicit `--points`.
    Points,
    /// Geometric progressive design on `--space` with `--ratio`.
    Gpd,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    #[arg(long, value_enum, default_value = "equispaced")]
    pub design: DesignKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub start: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub points: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub space: Vec<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Finite-difference step for M_r on kernels without an analytic
    /// derivative; defaults to 1e-6 times the range parameter.
    #[arg(long)]
    pub dr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FisherGridArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    /// Kernel for the effectiveness denominator, typically the same kernel
    /// without nugget.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d_min: f64,
    #[arg(long)]
    pub d_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long)]
    pub dr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DesignSearchArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, required = true)]
    pub space: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_criterion, default_value = "theta")]
    pub criterion: Criterion,
    /// Grid step h; defaults to (b - a) / 200. Must divide b - a.
    #[arg(long)]
    pub grid: Option<f64>,
    /// Seed for coordinate-descent restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Use coordinate descent even when enumeration is affordable.
    #[arg(long)]
    pub coordinate_descent: bool,
    #[arg(long)]
    pub dr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    #[arg(long)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 100)]
    pub t_max: usize,
    #[arg(long)]
    pub seed: u64,
    /// Replace the default nugget kernel (c = 0.8).
    #[arg(long)]
    pub kernel_a: Option<PathBuf>,
    /// Replace the default four-band kernel.
    #[arg(long)]
    pub kernel_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    /// Kernel under test; not used with --law.
    #[arg(long, required_unless_present = "law", conflicts_with = "law")]
    pub kernel: Option<PathBuf>,
    /// Observed series, one value per line (last CSV column).
    #[arg(long, conflicts_with_all = ["n", "law"])]
    pub input: Option<PathBuf>,
    /// Length of a synthetic series drawn from the kernel.
    #[arg(long, required_unless_present = "input")]
    pub n: Option<usize>,
    /// Monte-Carlo mode: jump-height law, one of fixed:C, uniform,
    /// gamma:SHAPE,RATE, poisson:LAMBDA,SCALE, binomial:TRIALS,P,SCALE,
    /// nested.
    #[arg(long, value_parser = parse_law, requires_all = ["r", "replicates"])]
    pub law: Option<CLaw>,
    /// Decay rate of the Monte-Carlo kernels.
    #[arg(long, requires = "law")]
    pub r: Option<f64>,
    #[arg(long, requires = "law")]
    pub replicates: Option<usize>,
    /// Use lags 0..=MAX_LAG in T (default: every lag).
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long, required_unless_present = "input")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub r: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    /// Observed walk levels.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RuinArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    /// Initial surplus.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub u: Option<f64>,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
    /// Observed surplus history; the first value is the initial surplus.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also run independent increments with the same variance and report
    /// the quotient of the two curves.
    #[arg(long)]
    pub compare_uncorrelated: bool,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    Criterion::from_name(s).ok_or_else(|| format!("expected theta, r or product, got '{s}'"))
}

pub fn parse_law(s: &str) -> Result<CLaw, String> {
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("'{a}': {e}")))
            .collect::<Result<_, _>>()?
    };
    match (name, nums.as_slice()) {
        ("fixed", [c]) => Ok(CLaw::Fixed(*c)),
        ("uniform", []) => Ok(CLaw::Uniform01),
        ("nested", []) => Ok(CLaw::NestedUniform),
        ("gamma", [shape, rate]) => Ok(CLaw::GammaTrunc { shape: *shape, rate: *rate }),
        ("poisson", [lambda, scale]) => Ok(CLaw::PoissonScaled { lambda: *lambda, scale: *scale }),
        ("binomial", [trials, p, scale]) if trials.fract() == 0.0 && *trials >= 0.0 => Ok(CLaw::BinomialScaled {
            trials: *trials as u64,
            p: *p,
            scale: *scale,
        }),
        _ => Err(format!(
            "unrecognized law '{s}'; expected fixed:C, uniform, gamma:SHAPE,RATE, poisson:LAMBDA,SCALE, binomial:TRIALS,P,SCALE or nested"
        )),
    }
}

/// Parses `args` and runs the subcommand. Returns the process exit code:
/// 0 on success, 1 on domain/IO errors, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build()?
            .install(|| dispatch(&cli.command, &cli.out)),
        None => dispatch(&cli.command, &cli.out),
    }
}

fn dispatch(command: &Command, out: &Path) -> CliResult<()> {
    match command {
        Command::ValidateKernel(a) => validate_kernel(a, out),
        Command::Fisher(a) => fisher_cmd(a, out),
        Command::FisherGrid(a) => fisher_grid(a, out),
        Command::DesignSearch(a) => design_search(a, out),
        Command::Simulate(a) => simulate_cmd(a, out),
        Command::CompareJumps(a) => compare_jumps(a, out),
        Command::AcfTest(a) => acf_test(a, out),
        Command::Table1(a) => table1(a, out),
        Command::Forecast(a) => forecast_cmd(a, out),
        Command::Ruin(a) => ruin_cmd(a, out),
    }
}

fn with_kernel(out: &mut Output, path: &Path) -> CliResult<Kernel> {
    let (cfg, kernel) = load_kernel(path)?;
    out.kernel(cfg, kernel.describe());
    Ok(kernel)
}

fn interval(space: &[f64]) -> semicov_core::Result<Interval> {
    match space {
        [a, b] => Interval::new(*a, *b),
        _ => Err(Error::InvalidParameter("--space needs two values".into())),
    }
}

fn validate_kernel(a: &ValidateArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "validate-kernel")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    let dmax = a.dmax.unwrap_or_else(|| kernel.default_dmax());
    out.param("dmax", dmax).param("points", a.points).param("tol", a.tol);
    let grid = uniform_grid(dmax, a.points);
    let report = validate_abc(&kernel, &grid, a.tol);
    let list = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
    let rows = [
        ["normalized_nonnegative".to_string(), report.normalized_nonnegative().to_string(), list(&report.negative)],
        ["monotone_convex".into(), report.monotone_convex().to_string(), {
            let mut s = list(&report.non_monotone);
            if !report.non_convex.is_empty() {
                s = format!("{s}|{}", list(&report.non_convex));
            }
            s
        }],
        ["vanishing".into(), report.vanishing().to_string(), num(report.tail_value)],
    ];
    out.csv("validation.csv", &["condition", "passed", "detail"], rows)?;
    let psi = psi_of(&kernel);
    let curve = grid.iter().map(|&d| {
        let gamma = kernel.eval_variogram(d).map(num).unwrap_or_else(|_| MISSING.into());
        [num(d), num(kernel.eval(d)), gamma, num(psi.psi(d))]
    });
    out.csv("kernel.csv", &["d", "covariance", "variogram", "psi"], curve)?;
    out.finish()?;
    println!("{}: abc {}", kernel.describe(), if report.passed() { "passed" } else { "failed" });
    if let Some(problem) = report.grid_problem {
        return Err(Error::InvalidParameter(problem).into());
    }
    if !report.passed() {
        return Err(Error::InvalidParameter(format!("{} violates the abc conditions", kernel.describe())).into());
    }
    Ok(())
}

fn build_design(a: &FisherArgs) -> semicov_core::Result<Design> {
    let missing = |f: &str| Error::InvalidParameter(format!("--design needs --{f}"));
    match a.design {
        DesignKind::Equispaced => Design::equispaced(a.n.ok_or(missing("n"))?, a.d.ok_or(missing("d"))?, a.start),
        DesignKind::Points => Design::from_points(a.points.clone()),
        DesignKind::Gpd => design::geometric_progressive(
            interval(&a.space)?,
            a.n.ok_or(missing("n"))?,
            a.ratio.ok_or(missing("ratio"))?,
        ),
    }
}

/// `M_r`, or NaN for kernels without a range parameter.
fn m_r_or_nan(kernel: &Kernel, design: &Design, dr: Option<f64>) -> semicov_core::Result<f64> {
    if kernel.range_parameter().is_none() {
        return Ok(f64::NAN);
    }
    fisher::m_r(kernel, design, dr.unwrap_or_else(|| fisher::default_dr(kernel)))
}

#[derive(Serialize)]
struct FisherJson {
    n: usize,
    points: Vec<f64>,
    distances: Vec<f64>,
    m_theta: f64,
    m_r: Option<f64>,
    lb: f64,
    ub: Option<f64>,
}

fn fisher_cmd(a: &FisherArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "fisher")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    let design = build_design(a)?;
    let m_theta = fisher::m_theta(&kernel, &design)?;
    let m_r = m_r_or_nan(&kernel, &design, a.dr)?;
    let (lb, ub) = fisher::bounds(&kernel, &design)?;
    out.param("design", format!("{:?}", a.design).to_lowercase())
        .param("points", design.points().iter().map(|p| num(*p)).collect::<Vec<_>>().join(" "));
    let row = [num(design.len() as f64), num(m_theta), num(m_r), num(lb), num(ub)];
    out.csv("fisher.csv", &["n", "m_theta", "m_r", "lb", "ub"], [row.clone()])?;
    out.json(
        "fisher.json",
        &FisherJson {
            n: design.len(),
            points: design.points().to_vec(),
            distances: design.distances(),
            m_theta,
            m_r: m_r.is_finite().then_some(m_r),
            lb,
            ub: ub.is_finite().then_some(ub),
        },
    )?;
    out.finish()?;
    println!("n,m_theta,m_r,lb,ub\n{}", row.join(","));
    Ok(())
}

fn fisher_grid(a: &FisherGridArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "fisher-grid")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    let reference = a.reference.as_deref().map(load_kernel).transpose()?.map(|(_, k)| k);
    if !(a.d_min > 0.0 && a.d_max >= a.d_min) || a.steps == 0 {
        return Err(Error::InvalidParameter("need 0 < d_min <= d_max and steps >= 1".into()).into());
    }
    out.param("n", a.n).param("d_min", a.d_min).param("d_max", a.d_max).param("steps", a.steps);
    if let Some(r) = &reference {
        out.param("reference", r.describe());
    }
    let mut header = vec!["d", "m_theta", "m_r", "lb", "ub"];
    if reference.is_some() {
        header.extend(["eff_theta", "eff_r"]);
    }
    header.push("status");
    let nan = || num(f64::NAN);
    let mut rows = Vec::with_capacity(a.steps);
    for i in 0..a.steps {
        let d = if a.steps == 1 {
            a.d_min
        } else {
            a.d_min + (a.d_max - a.d_min) * i as f64 / (a.steps - 1) as f64
        };
        let design = Design::equispaced(a.n, d, 0.0)?;
        let values = (|| -> semicov_core::Result<Vec<f64>> {
            let mt = fisher::m_theta(&kernel, &design)?;
            let mr = m_r_or_nan(&kernel, &design, a.dr)?;
            let (lb, ub) = fisher::bounds(&kernel, &design)?;
            let mut v = vec![mt, mr, lb, ub];
            if let Some(k1) = &reference {
                v.push(mt / fisher::m_theta(k1, &design)?);
                v.push(mr / m_r_or_nan(k1, &design, a.dr)?);
            }
            Ok(v)
        })();
        let mut row = vec![num(d)];
        match values {
            Ok(v) => {
                row.extend(v.into_iter().map(num));
                row.push("ok".into());
            }
            Err(e) => {
                row.extend((1..header.len() - 1).map(|_| nan()));
                row.push(e.name().into());
            }
        }
        rows.push(row);
    }
    out.csv("fisher_grid.csv", &header, rows)?;
    out.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct DesignJson {
    criterion: &'static str,
    criterion_value: f64,
    best_points: Vec<f64>,
    best_distances: Vec<f64>,
    ties: Vec<Vec<f64>>,
    collapsed: bool,
    interior_optimum: bool,
    method: &'static str,
    evaluations: u64,
    grid_resolution: f64,
}

fn design_search(a: &DesignSearchArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "design-search")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    let space = interval(&a.space)?;
    let h = a.grid.unwrap_or_else(|| design::default_resolution(space));
    let opts = SearchOptions {
        seed: a.seed,
        restarts: a.restarts,
        force_coordinate_descent: a.coordinate_descent,
        dr: a.dr,
        ..SearchOptions::default()
    };
    out.seed(a.seed)
        .param("space", format!("{} {}", num(space.a), num(space.b)))
        .param("n", a.n)
        .param("criterion", a.criterion.name())
        .param("grid", h)
        .param("restarts", a.restarts);
    let res = design::search_with(&kernel, space, a.n, a.criterion, h, &opts)?;
    let gaps = a.n - 1;
    let trace = res.trace.iter().enumerate().map(|(i, t)| {
        let mut row = vec![i.to_string(), num(t.value)];
        row.extend(t.distances.iter().map(|d| num(*d)));
        row
    });
    out.csv("trace.csv", &numbered_header(&["step", "value"], "d", gaps), trace)?;
    let ties = res.ties.iter().enumerate().map(|(i, d)| {
        let mut row = vec![i.to_string()];
        row.extend(d.points().iter().map(|p| num(*p)));
        row
    });
    out.csv("ties.csv", &numbered_header(&["tie"], "x", a.n), ties)?;
    let summary = DesignJson {
        criterion: res.criterion.name(),
        criterion_value: res.criterion_value,
        best_points: res.best_design.points().to_vec(),
        best_distances: res.best_design.distances(),
        ties: res.ties.iter().map(|d| d.points().to_vec()).collect(),
        collapsed: res.collapsed,
        interior_optimum: res.interior_optimum,
        method: match res.method {
            SearchMethod::Exhaustive => "exhaustive",
            SearchMethod::CoordinateDescent => "coordinate-descent",
        },
        evaluations: res.evaluations,
        grid_resolution: res.grid_resolution,
    };
    out.json("design.json", &summary)?;
    out.finish()?;
    println!(
        "{} = {} at {:?} ({} tie(s))",
        res.criterion.name(),
        num(res.criterion_value),
        res.best_design.points(),
        res.ties.len()
    );
    Ok(())
}

fn replicate_rows(rows: &[Vec<f64>]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().enumerate().map(|(i, r)| {
        let mut row = vec![i.to_string()];
        row.extend(r.iter().map(|v| num(*v)));
        row
    })
}

fn simulate_cmd(a: &SimulateArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "simulate")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    out.seed(a.seed).param("t_max", a.t_max).param("replicates", a.replicates);
    let ens = simulate::sample_increments(&kernel, a.t_max, a.replicates, a.seed)?;
    let header = numbered_header(&["replicate"], "t", a.t_max);
    out.csv("increments.csv", &header, replicate_rows(&ens.increments))?;
    out.csv("walks.csv", &header, replicate_rows(&ens.walks))?;
    out.finish()?;
    Ok(())
}

fn compare_jumps(a: &CompareArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "compare-jumps")?;
    let ka = match &a.kernel_a {
        Some(p) => load_kernel(p)?.1,
        None => Kernel::nugget_ou(1.0, a.r, simulate::NUGGET_HEIGHT)?,
    };
    let kb = match &a.kernel_b {
        Some(p) => load_kernel(p)?.1,
        None => Kernel::several_jumps(a.r)?,
    };
    out.seed(a.seed)
        .param("r", a.r)
        .param("t_max", a.t_max)
        .param("kernel_a", ka.describe())
        .param("kernel_b", kb.describe());
    let cmp = simulate::compare_coupled(&ka, &kb, a.t_max, a.seed)?;
    let rows = (0..a.t_max).map(|t| {
        [
            (t + 1).to_string(),
            num(cmp.walk_a[t]),
            num(cmp.walk_b[t]),
            num(cmp.difference[t]),
        ]
    });
    out.csv("compare.csv", &["t", "walk_a", "walk_b", "difference"], rows)?;
    out.finish()?;
    println!("max |walk_a - walk_b| = {}", num(cmp.max_abs_difference));
    Ok(())
}

fn lags_for(max_lag: Option<usize>, n: usize) -> CliResult<usize> {
    match max_lag {
        None => Ok(n),
        Some(l) if l < n => Ok(l + 1),
        Some(l) => Err(Error::InvalidParameter(format!("--max-lag {l} needs a series longer than {l}")).into()),
    }
}

fn acf_test(a: &AcfArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "acf-test")?;
    if let Some(law) = a.law {
        let (r, reps, seed, n) = (
            a.r.expect("clap requires r"),
            a.replicates.expect("clap requires replicates"),
            a.seed.expect("clap requires seed"),
            a.n.expect("clap requires n"),
        );
        let lags = lags_for(a.max_lag, n)?;
        out.seed(seed)
            .param("law", law.name())
            .param("r", r)
            .param("n", n)
            .param("replicates", reps)
            .param("lags", lags);
        let dist = acftest::t_distribution_mc(law, n, r, reps, seed, Some(lags))?;
        let width = dist.samples.first().map_or(1, |s| s.c.len());
        let rows = dist.samples.iter().enumerate().map(|(i, s)| {
            let mut row = vec![i.to_string()];
            row.extend(s.c.iter().map(|c| num(*c)));
            row.push(num(s.t_value));
            row
        });
        let mut header = numbered_header(&["replicate"], "c", width);
        header.push("t".into());
        out.csv("samples.csv", &header, rows)?;
        out.param("attempts", dist.attempts).param("rejected", dist.rejected);
        out.finish()?;
        if dist.warning() {
            eprintln!(
                "warning: {:.1}% of height draws were rejected",
                100.0 * dist.rejection_rate()
            );
        }
        return Ok(());
    }
    let kernel = with_kernel(&mut out, a.kernel.as_deref().expect("clap requires kernel"))?;
    let x = match (&a.input, a.n) {
        (Some(path), _) => {
            out.param("input", path.display());
            read_series(path)?
        }
        (None, Some(n)) => {
            let seed = a.seed.expect("clap requires seed");
            out.seed(seed).param("n", n);
            let x = simulate::GaussianSampler::new(&kernel, n)?.draw_replicate(seed, 0);
            out.csv("series.csv", &["t", "x"], x.iter().enumerate().map(|(t, v)| [(t + 1).to_string(), num(*v)]))?;
            x
        }
        (None, None) => unreachable!("clap requires --input or --n"),
    };
    let lags = lags_for(a.max_lag, x.len())?;
    out.param("lags", lags);
    let pair = AcfPair::new(&kernel, &x, lags)?;
    let stat = pair.residual_stat();
    let rows = pair.theoretical.iter().zip(&pair.empirical).enumerate().map(|(l, (t, e))| {
        [l.to_string(), num(*t), num(*e), num((t - e).abs())]
    });
    out.csv("acf.csv", &["lag", "theoretical", "empirical", "abs_residual"], rows)?;
    out.csv(
        "statistic.csv",
        &["n", "lags_used", "t"],
        [[x.len().to_string(), stat.lags_used.to_string(), num(stat.t_value)]],
    )?;
    out.finish()?;
    println!("T = {} over {} lags", num(stat.t_value), stat.lags_used);
    Ok(())
}

fn table1(a: &Table1Args, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "table1")?;
    out.seed(a.seed).param("r", a.r).param("n", a.n).param("replicates", a.replicates);
    let rows = acftest::table1_experiment(a.r, a.n, a.replicates, a.seed)?;
    let csv_rows = rows.iter().map(|row| {
        let bands = row
            .bands
            .iter()
            .map(|j| format!("{}:{}", num(j.lag), num(j.height)))
            .collect::<Vec<_>>()
            .join(";");
        let status = match &row.error {
            None => "ok".to_string(),
            Some(_) => "not-positive-definite".to_string(),
        };
        [
            row.jumps.to_string(),
            row.label.clone(),
            bands,
            num(row.mean_t),
            num(row.std_error),
            status,
        ]
    });
    out.csv("table1.csv", &["jumps", "scenario", "bands", "mean_t", "std_error", "status"], csv_rows)?;
    out.finish()?;
    Ok(())
}

fn forecast_cmd(a: &ForecastArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "forecast")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    let walk = read_series(&a.input)?;
    out.seed(a.seed)
        .param("input", a.input.display())
        .param("observed", walk.len())
        .param("horizon", a.horizon)
        .param("replicates", a.replicates)
        .param("alpha", a.alpha);
    let res = forecast::forecast(&kernel, &walk, a.horizon, a.replicates, a.alpha, a.seed)?;
    let rows = (0..res.horizon).map(|t| {
        [
            (t + 1).to_string(),
            num(res.lower_band[t]),
            num(res.point_forecast[t]),
            num(res.mean[t]),
            num(res.upper_band[t]),
        ]
    });
    out.csv("forecast.csv", &["step", "lower", "median", "mean", "upper"], rows)?;
    out.finish()?;
    Ok(())
}

fn ruin_cmd(a: &RuinArgs, dir: &Path) -> CliResult<()> {
    let mut out = Output::new(dir, "ruin")?;
    let kernel = with_kernel(&mut out, &a.kernel.kernel)?;
    out.seed(a.seed).param("horizon", a.horizon).param("replicates", a.replicates);
    let estimate = |k: &Kernel| -> CliResult<ruin::RuinEstimate> {
        Ok(match (&a.input, a.u) {
            (Some(path), _) => ruin::conditional_ruin(k, &read_series(path)?, a.horizon, a.replicates, a.seed)?,
            (None, Some(u)) => ruin::ruin_probability(k, u, a.horizon, a.replicates, a.seed)?,
            (None, None) => unreachable!("clap requires --u or --input"),
        })
    };
    let main = estimate(&kernel)?;
    out.param("u", main.u);
    if let Some(p) = &a.input {
        out.param("input", p.display());
    }
    let other = if a.compare_uncorrelated {
        let ua = ruin::uncorrelated_counterpart(&kernel)?;
        out.param("uncorrelated", ua.describe());
        Some(estimate(&ua)?)
    } else {
        None
    };
    let quotient = other.as_ref().map(|o| ruin::ruin_quotient(&main, o)).transpose()?;
    let mut header = vec!["t", "psi", "std_error"];
    if other.is_some() {
        header.extend(["psi_uncorrelated", "std_error_uncorrelated", "quotient"]);
    }
    let rows = (0..main.horizon).map(|t| {
        let mut row = vec![(t + 1).to_string(), num(main.psi_curve[t]), num(main.std_errors[t])];
        if let (Some(o), Some(q)) = (&other, &quotient) {
            row.push(num(o.psi_curve[t]));
            row.push(num(o.std_errors[t]));
            row.push(q[t].map(num).unwrap_or_else(|| MISSING.into()));
        }
        row
    });
    out.csv("psi_curve.csv", &header, rows)?;
    let mut header = vec!["t", "first_ruins"];
    if other.is_some() {
        header.push("first_ruins_uncorrelated");
    }
    let rows = (0..main.horizon).map(|t| {
        let mut row = vec![(t + 1).to_string(), main.first_ruin_histogram[t].to_string()];
        if let Some(o) = &other {
            row.push(o.first_ruin_histogram[t].to_string());
        }
        row
    });
    out.csv("first_ruin.csv", &header, rows)?;
    out.finish()?;
    Ok(())
}
