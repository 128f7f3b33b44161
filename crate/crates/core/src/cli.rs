//! Command-line front end. Every command writes a self-describing CSV table
//! (to `--out` or stdout); summaries go to stdout, or to stderr when the table
//! itself is on stdout.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::boundary::BoundaryCurve;
use crate::config::ConfigFile;
use crate::error::Error;
use crate::expiry::{asymptote_coefficients, expiry_limit, expiry_limit_sweep, h_star, ExpiryBranch};
use crate::front_fixing::{self, FrontFixingOptions, SolverReport};
use crate::integral::{self, DEFAULT_QUAD_NODES};
use crate::mc::{self, McConfig};
use crate::model::{AveragingSpec, GridSpec, ModelParams, OptionKind};
use crate::output::{format_number, parse_csv, CsvTable};
use crate::psor::{boundary_distance, solve_psor, PsorGrid, PsorOptions};

const ABOUT: &str = "Early exercise boundaries and prices of American floating-strike Asian options.";
const LONG_ABOUT: &str = "Early exercise boundaries and prices of American floating-strike Asian options.\n\n\
All times (T, t, tau) are in years and rates are continuously compounded per year. \
Settings come from flags, then from an optional `--config` file of `key = value` lines, then from defaults.";

#[derive(Debug, Parser)]
#[command(name = "asian-boundary", version, about = ABOUT, long_about = LONG_ABOUT)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Risk-free rate [default: 0.06]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Dividend yield [default: 0.04]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Volatility [default: 0.2]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Maturity in years [default: 50]
    #[arg(long = "T", global = true, allow_negative_numbers = true)]
    pub maturity: Option<f64>,
    /// Averaging: arith, geom or weighted [default: arith]
    #[arg(long, global = true)]
    pub avg: Option<String>,
    /// Decay rate of weighted averaging
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// call or put [default: call]
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Spatial steps of the front-fixing grid [default: 200]
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Time steps [default: 100000]
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Upper end of the transformed spatial domain [default: 2]
    #[arg(long = "L", global = true, allow_negative_numbers = true)]
    pub domain_length: Option<f64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Monte Carlo seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the early exercise boundary; rows t,tau,rho,x_star.
    Boundary,
    /// Dump the synthetic portfolio surface Pi(xi, tau) with profile slices.
    Surface {
        /// Times to expiry of the profile slices (comma separated)
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
    },
    /// Compare the front-fixing and PSOR boundaries.
    Compare {
        /// Log-spaced PSOR intervals on [0.02, 10] [default: 1000]
        #[arg(long)]
        psor_n: Option<usize>,
        /// PSOR time steps [default: m]
        #[arg(long)]
        psor_m: Option<usize>,
        /// Relaxation parameter [default: 1.5]
        #[arg(long)]
        omega: Option<f64>,
        /// PSOR update tolerance [default: 1e-8]
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Boundary position at expiry.
    Expiry,
    /// Universal slope constant h* of the near-expiry expansion.
    Hstar,
    /// Near-expiry expansion G (1 + h* sigma sqrt(T - t)).
    Asymptote {
        /// Number of output points [default: 200]
        #[arg(long)]
        points: Option<usize>,
        /// Add the solved boundary as a column
        #[arg(long)]
        solve: bool,
    },
    /// Expiry limits over a grid of (r, q).
    Sweep {
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        q_min: Option<f64>,
        #[arg(long)]
        q_max: Option<f64>,
        /// Grid points per axis [default: 11]
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Decompose the option value at one state.
    Value {
        /// Calendar time in (0, T]
        #[arg(long)]
        t: Option<f64>,
        /// Ratio x = A/S
        #[arg(long)]
        x: Option<f64>,
        /// Spot price (with --average, gives the value in original units)
        #[arg(long)]
        spot: Option<f64>,
        /// Running average
        #[arg(long)]
        average: Option<f64>,
        /// Boundary CSV written by `boundary`; solved afresh when omitted
        #[arg(long)]
        boundary_file: Option<PathBuf>,
        /// Monte Carlo paths for a European cross-check (0 disables)
        #[arg(long)]
        mc_paths: Option<usize>,
        /// Gauss-Legendre nodes of the premium integral [default: 512]
        #[arg(long)]
        quad_nodes: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Boundary => "boundary",
            Command::Surface { .. } => "surface",
            Command::Compare { .. } => "compare",
            Command::Expiry => "expiry",
            Command::Hstar => "hstar",
            Command::Asymptote { .. } => "asymptote",
            Command::Sweep { .. } => "sweep",
            Command::Value { .. } => "value",
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "r", "q", "sigma", "T", "avg", "lambda", "kind", "n", "m", "L", "out", "seed", "taus", "psor_n", "psor_m",
    "omega", "tol", "points", "solve", "r_min", "r_max", "q_min", "q_max", "steps", "t", "x", "spot", "average",
    "boundary_file", "mc_paths", "quad_nodes",
];

/// Fully resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: ModelParams,
    pub avg: AveragingSpec,
    pub kind: OptionKind,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
    pub seed: u64,
    file: ConfigFile,
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> anyhow::Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    Ok(match flag {
        Some(v) => Some(v),
        None => file.get(key)?,
    })
}

impl RunConfig {
    pub fn resolve(global: &GlobalArgs, command: &'static str) -> anyhow::Result<Self> {
        let file = match &global.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        file.check_keys(KNOWN_KEYS)?;
        let params = ModelParams::new(
            pick(global.r, &file, "r")?.unwrap_or(0.06),
            pick(global.q, &file, "q")?.unwrap_or(0.04),
            pick(global.sigma, &file, "sigma")?.unwrap_or(0.2),
            pick(global.maturity, &file, "T")?.unwrap_or(50.0),
        )?;
        let avg_name = pick(global.avg.clone(), &file, "avg")?.unwrap_or_else(|| "arith".into());
        let avg = AveragingSpec::parse(&avg_name, pick(global.lambda, &file, "lambda")?)?;
        let kind: OptionKind = pick(global.kind.clone(), &file, "kind")?
            .unwrap_or_else(|| "call".into())
            .parse()?;
        let grid = GridSpec::new(
            pick(global.n, &file, "n")?.unwrap_or(200),
            pick(global.m, &file, "m")?.unwrap_or(100_000),
            pick(global.domain_length, &file, "L")?.unwrap_or(GridSpec::DEFAULT_DOMAIN_LENGTH),
        )?;
        Ok(Self {
            command,
            params,
            avg,
            kind,
            grid,
            out: pick(global.out.as_ref().map(|p| p.display().to_string()), &file, "out")?.map(PathBuf::from),
            seed: pick(global.seed, &file, "seed")?.unwrap_or(42),
            file,
        })
    }

    /// Command option: flag value, else config file value.
    pub fn option<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        pick(flag, &self.file, key)
    }

    /// Header comment lines echoing every setting.
    pub fn echo(&self, table: &mut CsvTable) {
        let p = &self.params;
        table
            .echo("asian-boundary", env!("CARGO_PKG_VERSION"))
            .echo("command", self.command)
            .echo("r", format_number(p.r))
            .echo("q", format_number(p.q))
            .echo("sigma", format_number(p.sigma))
            .echo("T", format_number(p.maturity))
            .echo("avg", self.avg.name());
        if let Some(l) = self.avg.lambda() {
            table.echo("lambda", format_number(l));
        }
        table
            .echo("kind", self.kind)
            .echo("n", self.grid.n)
            .echo("m", self.grid.m)
            .echo("L", format_number(self.grid.domain_length))
            .echo("seed", self.seed);
    }

    fn emit(&self, table: &CsvTable) -> anyhow::Result<()> {
        table
            .write_to(self.out.as_deref())
            .with_context(|| format!("writing {}", self.out_label()))
    }

    fn out_label(&self) -> String {
        self.out.as_ref().map_or("stdout".into(), |p| p.display().to_string())
    }

    fn summary(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn require_call(cfg: &RunConfig, what: &str) -> anyhow::Result<()> {
    if cfg.kind != OptionKind::Call {
        return Err(Error::Unsupported(format!("{what} is implemented for calls only")).into());
    }
    Ok(())
}

fn solve_front_fixing(cfg: &RunConfig, snapshot_taus: Vec<f64>) -> anyhow::Result<SolverReport> {
    require_call(cfg, "the front-fixing solver")?;
    let opts = FrontFixingOptions {
        snapshot_taus,
        ..FrontFixingOptions::default()
    };
    front_fixing::solve(&cfg.params, cfg.avg, &cfg.grid, &opts).context("front-fixing solve")
}

fn boundary_table(cfg: &RunConfig, boundary: &BoundaryCurve) -> CsvTable {
    let mut table = CsvTable::new(&["t", "tau", "rho", "x_star"]);
    cfg.echo(&mut table);
    for n in boundary.nodes() {
        table.push(&[n.t, n.tau, n.rho, n.x_star]);
    }
    table
}

fn cmd_boundary(cfg: &RunConfig) -> anyhow::Result<()> {
    let rep = solve_front_fixing(cfg, Vec::new())?;
    let mut table = boundary_table(cfg, &rep.boundary);
    let min = rep.boundary.min_x_star();
    table.echo("min_x_star", format_number(min.x_star)).echo("min_at_t", format_number(min.t));
    cfg.emit(&table)?;
    cfg.summary(&format!(
        "min x* = {} at t = {}; x*_T = {}",
        format_number(min.x_star),
        format_number(min.t),
        format_number(rep.boundary.x_star(cfg.params.maturity)?)
    ));
    Ok(())
}

fn cmd_surface(cfg: &RunConfig, taus: Option<Vec<f64>>) -> anyhow::Result<()> {
    let slices = match taus {
        Some(t) => t,
        None => match cfg.file.raw("taus") {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .context("config key 'taus'")?,
            None => [0.1, 1.0, 5.0, 25.0, 50.0]
                .into_iter()
                .filter(|&t| t <= cfg.params.maturity)
                .collect(),
        },
    };
    let rep = solve_front_fixing(cfg, slices.clone())?;
    let k = cfg.grid.time_step(cfg.params.maturity);
    let mut table = CsvTable::new(&["tau", "rho", "xi", "pi", "slice"]);
    cfg.echo(&mut table);
    table.echo(
        "slices",
        slices.iter().map(|&t| format_number(t)).collect::<Vec<_>>().join(" "),
    );
    let s = &rep.surface;
    for (j, &tau) in s.tau_grid.iter().enumerate() {
        let rho = rep.boundary.rho_at(tau)?;
        let slice = slices.iter().any(|&t| (t - tau).abs() <= 0.5 * k);
        for (i, &xi) in s.xi_grid.iter().enumerate() {
            table.push(&[tau, rho, xi, s.values[j][i], if slice { 1.0 } else { 0.0 }]);
        }
    }
    cfg.emit(&table)?;
    cfg.summary(&format!(
        "{} levels x {} nodes; Pi range [{}, {}]",
        s.tau_grid.len(),
        s.xi_grid.len(),
        format_number(rep.pi_range.0),
        format_number(rep.pi_range.1)
    ));
    Ok(())
}

fn cmd_compare(
    cfg: &RunConfig,
    psor_n: Option<usize>,
    psor_m: Option<usize>,
    omega: Option<f64>,
    tol: Option<f64>,
) -> anyhow::Result<()> {
    require_call(cfg, "the comparison")?;
    let grid = PsorGrid::with_defaults(
        cfg.option(psor_n, "psor_n")?.unwrap_or(1000),
        cfg.option(psor_m, "psor_m")?.unwrap_or(cfg.grid.m),
    )?;
    let opts = PsorOptions {
        omega: cfg.option(omega, "omega")?.unwrap_or(1.5),
        tolerance: cfg.option(tol, "tol")?.unwrap_or(1e-8),
        ..PsorOptions::default()
    };
    let (ff, ps) = rayon::join(
        || solve_front_fixing(cfg, Vec::new()),
        || solve_psor(&cfg.params, cfg.avg, &grid, &opts).context("PSOR solve"),
    );
    let (ff, ps) = (ff?, ps?);
    let dist = boundary_distance(&ff.boundary, &ps.boundary)?;
    let (min_ff, min_ps) = (ff.boundary.min_x_star(), ps.boundary.min_x_star());

    let mut table = CsvTable::new(&["t", "tau", "x_star_trans", "x_star_psor", "abs_diff"]);
    cfg.echo(&mut table);
    table
        .echo("psor_n", grid.n)
        .echo("psor_m", grid.m)
        .echo("psor_x_range", format!("{} {}", grid.x_min, grid.x_max))
        .echo("omega", format_number(opts.omega))
        .echo("tol", format_number(opts.tolerance))
        .echo("norm_inf", format_number(dist.l_inf))
        .echo("norm_1_mean", format_number(dist.l1_mean))
        .echo("min_x_star_trans", format_number(min_ff.x_star))
        .echo("min_x_star_psor", format_number(min_ps.x_star));
    for n in ff.boundary.nodes() {
        let other = ps.boundary.x_star(n.t)?;
        table.push(&[n.t, n.tau, n.x_star, other, (n.x_star - other).abs()]);
    }
    cfg.emit(&table)?;
    cfg.summary(&format!(
        "{:>8} {:>14} {:>14} {:>16} {:>16}",
        "r", "||.||_inf", "||.||_1/T", "min x* trans", "min x* psor"
    ));
    cfg.summary(&format!(
        "{:>8} {:>14} {:>14} {:>16} {:>16}",
        format_number(cfg.params.r),
        format_number(dist.l_inf),
        format_number(dist.l1_mean),
        format_number(min_ff.x_star),
        format_number(min_ps.x_star)
    ));
    Ok(())
}

fn branch_name(b: ExpiryBranch) -> &'static str {
    match b {
        ExpiryBranch::InTheMoney => "in_the_money",
        ExpiryBranch::AtTheMoney => "at_the_money",
    }
}

fn cmd_expiry(cfg: &RunConfig) -> anyhow::Result<()> {
    let lim = expiry_limit(&cfg.params, cfg.avg, cfg.kind)?;
    let mut table = CsvTable::new(&["x_star_T", "branch"]);
    cfg.echo(&mut table);
    table.push_cells(&[format_number(lim.x_star_t), branch_name(lim.branch).to_string()]);
    cfg.emit(&table)?;
    cfg.summary(&format!("x*_T = {}", format_number(lim.x_star_t)));
    Ok(())
}

fn cmd_hstar(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = h_star();
    if cfg.out.is_some() {
        let mut table = CsvTable::new(&["h_star"]);
        table.echo("asian-boundary", env!("CARGO_PKG_VERSION")).echo("command", "hstar");
        table.push(&[h]);
        cfg.emit(&table)?;
    }
    println!("h* = {}", format_number(h));
    Ok(())
}

fn cmd_asymptote(cfg: &RunConfig, points: Option<usize>, solve: bool) -> anyhow::Result<()> {
    let coeffs = asymptote_coefficients(&cfg.params, cfg.avg)?;
    let points = cfg.option(points, "points")?.unwrap_or(200).max(2);
    let solve = solve || cfg.option(None::<bool>, "solve")?.unwrap_or(false);
    let solved = if solve { Some(solve_front_fixing(cfg, Vec::new())?) } else { None };
    let mut cols = vec!["t", "remaining", "x_asymptote"];
    if solved.is_some() {
        cols.push("x_star_solved");
    }
    let mut table = CsvTable::new(&cols);
    cfg.echo(&mut table);
    table
        .echo("G", format_number(coeffs.g))
        .echo("h_star", format_number(coeffs.h_star))
        .echo("sqrt_slope", format_number(coeffs.sqrt_slope()));
    let maturity = cfg.params.maturity;
    for i in 0..points {
        // Points equally spaced in sqrt(T - t) resolve the expiry layer.
        let remaining = maturity * (i as f64 / (points - 1) as f64).powi(2);
        let t = maturity - remaining;
        let mut row = vec![t, remaining, coeffs.at_remaining(remaining)];
        if let Some(rep) = &solved {
            row.push(rep.boundary.x_star(t)?);
        }
        table.push(&row);
    }
    cfg.emit(&table)?;
    cfg.summary(&format!(
        "x* ~ {} (1 + {} sqrt(T - t))",
        format_number(coeffs.g),
        format_number(coeffs.h_star * coeffs.sigma)
    ));
    Ok(())
}

fn cmd_sweep(
    cfg: &RunConfig,
    r_range: (Option<f64>, Option<f64>),
    q_range: (Option<f64>, Option<f64>),
    steps: Option<usize>,
) -> anyhow::Result<()> {
    let r = (
        cfg.option(r_range.0, "r_min")?.unwrap_or(0.01),
        cfg.option(r_range.1, "r_max")?.unwrap_or(0.1),
    );
    let q = (
        cfg.option(q_range.0, "q_min")?.unwrap_or(0.0),
        cfg.option(q_range.1, "q_max")?.unwrap_or(0.1),
    );
    let steps = cfg.option(steps, "steps")?.unwrap_or(11);
    let sweep = expiry_limit_sweep(&cfg.params, r, q, cfg.avg, cfg.kind, steps)?;
    let mut table = CsvTable::new(&["r", "q", "x_star_T", "branch"]);
    cfg.echo(&mut table);
    for (i, &rv) in sweep.r_values.iter().enumerate() {
        for (j, &qv) in sweep.q_values.iter().enumerate() {
            let cell = sweep.cells[i][j];
            table.push_cells(&[
                format_number(rv),
                format_number(qv),
                format_number(cell.x_star_t),
                branch_name(cell.branch).to_string(),
            ]);
        }
    }
    cfg.emit(&table)?;
    cfg.summary(&format!("{} cells", table.len()));
    Ok(())
}

/// Reads a boundary written by the `boundary` command.
pub fn read_boundary_file(path: &Path, maturity: f64) -> anyhow::Result<BoundaryCurve> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (cols, rows) = parse_csv(&text).map_err(anyhow::Error::msg)?;
    let col = |name: &str| {
        cols.iter()
            .position(|c| c == name)
            .with_context(|| format!("{} lacks a '{name}' column", path.display()))
    };
    let (ti, ri) = (col("tau")?, col("rho")?);
    let mut pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[ti], r[ri])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (taus, rhos) = pairs.into_iter().unzip();
    Ok(BoundaryCurve::new(maturity, taus, rhos)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_value(
    cfg: &RunConfig,
    t: Option<f64>,
    x: Option<f64>,
    spot: Option<f64>,
    average: Option<f64>,
    boundary_file: Option<PathBuf>,
    mc_paths: Option<usize>,
    quad_nodes: Option<usize>,
) -> anyhow::Result<()> {
    let Some(t) = cfg.option(t, "t")? else {
        bail!("value needs --t");
    };
    let spot = cfg.option(spot, "spot")?;
    let average = cfg.option(average, "average")?;
    let x = match (cfg.option(x, "x")?, spot, average) {
        (Some(x), _, _) => x,
        (None, Some(s), Some(a)) => a / s,
        _ => bail!("value needs --x or both --spot and --average"),
    };
    let quad = cfg.option(quad_nodes, "quad_nodes")?.unwrap_or(DEFAULT_QUAD_NODES);
    let boundary = match cfg.option(boundary_file.map(|p| p.display().to_string()), "boundary_file")? {
        Some(p) => read_boundary_file(Path::new(&p), cfg.params.maturity)?,
        None if t >= cfg.params.maturity => {
            BoundaryCurve::constant(cfg.params.maturity, expiry_limit(&cfg.params, cfg.avg, cfg.kind)?.x_star_t)?
        }
        None => solve_front_fixing(cfg, Vec::new())?.boundary,
    };
    let p = integral::price(t, x, &boundary, &cfg.params, cfg.avg, cfg.kind, quad).context("pricing")?;
    let mut cols = vec!["t", "x", "european", "premium", "total"];
    let mut row = vec![t, x, p.european, p.premium, p.total];
    if let (Some(s), Some(a)) = (spot, average) {
        cols.push("value_original");
        row.push(integral::option_value_original(
            t,
            s,
            a,
            &boundary,
            &cfg.params,
            cfg.avg,
            cfg.kind,
            quad,
        )?);
    }
    let paths = cfg.option(mc_paths, "mc_paths")?.unwrap_or(0);
    if paths > 0 && t < cfg.params.maturity {
        let est = mc::mc_european_value(&cfg.params, cfg.avg, t, x, cfg.kind, &McConfig::new(paths, cfg.seed))
            .context("Monte Carlo cross-check")?;
        cols.extend(["mc_european", "mc_std_error"]);
        row.extend([est.mean, est.std_error]);
    }
    let mut table = CsvTable::new(&cols);
    cfg.echo(&mut table);
    table.echo("quad_nodes", quad);
    if paths > 0 {
        table.echo("mc_paths", paths).echo("rng", mc::RNG_ALGORITHM);
    }
    table.push(&row);
    cfg.emit(&table)?;
    cfg.summary(&format!(
        "european = {}, premium = {}, total = {}",
        format_number(p.european),
        format_number(p.premium),
        format_number(p.total)
    ));
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&cli.global, cli.command.name()).context("configuration")?;
    match cli.command {
        Command::Boundary => cmd_boundary(&cfg),
        Command::Surface { taus } => cmd_surface(&cfg, taus),
        Command::Compare {
            psor_n,
            psor_m,
            omega,
            tol,
        } => cmd_compare(&cfg, psor_n, psor_m, omega, tol),
        Command::Expiry => cmd_expiry(&cfg),
        Command::Hstar => cmd_hstar(&cfg),
        Command::Asymptote { points, solve } => cmd_asymptote(&cfg, points, solve),
        Command::Sweep {
            r_min,
            r_max,
            q_min,
            q_max,
            steps,
        } => cmd_sweep(&cfg, (r_min, r_max), (q_min, q_max), steps),
        Command::Value {
            t,
            x,
            spot,
            average,
            boundary_file,
            mc_paths,
            quad_nodes,
        } => cmd_value(&cfg, t, x, spot, average, boundary_file, mc_paths, quad_nodes),
    }
    .with_context(|| format!("{} failed", cfg.command))
}
