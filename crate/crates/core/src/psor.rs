//! Projected SOR solver for the reduced variational inequality of the
//! American floating-strike Asian call.
//!
//! The unknown is `U(y, tau) = x W(x, tau)` with `y = ln x`, which satisfies
//! `U_tau = (sigma^2/2) U_yy + d U_y - q U`, `d = f(x, T - tau) - (r - q) - sigma^2/2`,
//! in the continuation region, with obstacle `U >= (1 - x)^+`
//! (equivalently `W >= max(1/x - 1, 0)`).

use crate::boundary::BoundaryCurve;
use crate::error::{invalid, Error, Result};
use crate::expiry::expiry_limit;
use crate::model::{averaging_drift, AveragingSpec, ModelParams, OptionKind};

/// Log-uniform spatial grid on `[x_min, x_max]` with `n` intervals and `m`
/// implicit time steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsorGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub m: usize,
}

impl PsorGrid {
    pub const DEFAULT_X_MIN: f64 = 0.02;
    pub const DEFAULT_X_MAX: f64 = 10.0;

    pub fn new(x_min: f64, x_max: f64, n: usize, m: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n, m };
        g.validate()?;
        Ok(g)
    }

    pub fn with_defaults(n: usize, m: usize) -> Result<Self> {
        Self::new(Self::DEFAULT_X_MIN, Self::DEFAULT_X_MAX, n, m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_min.is_finite()) {
            return Err(invalid("x_min", format!("must be finite and > 0, got {}", self.x_min)));
        }
        if !(self.x_max > self.x_min && self.x_max.is_finite()) {
            return Err(invalid("x_max", format!("must exceed x_min, got {}", self.x_max)));
        }
        if self.x_min >= 1.0 || self.x_max <= 1.0 {
            return Err(invalid("x range", "must contain x = 1"));
        }
        if self.n < 8 {
            return Err(invalid("n", format!("need at least 8 intervals, got {}", self.n)));
        }
        if self.m < 1 {
            return Err(invalid("m", "need at least one time step"));
        }
        Ok(())
    }

    pub fn log_step(&self) -> f64 {
        (self.x_max / self.x_min).ln() / self.n as f64
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        let (y0, dy) = (self.x_min.ln(), self.log_step());
        (0..=self.n).map(|i| (y0 + i as f64 * dy).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsorOptions {
    pub omega: f64,
    /// Sweeps stop once the largest update is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Locate the boundary between nodes from the square root of the gap.
    pub refine_boundary: bool,
    /// Store every `surface_stride`-th level; 0 keeps about 500 levels.
    pub surface_stride: usize,
    pub snapshot_taus: Vec<f64>,
}

impl Default for PsorOptions {
    fn default() -> Self {
        Self {
            omega: 1.5,
            tolerance: 1e-8,
            max_iterations: 10_000,
            refine_boundary: true,
            surface_stride: 0,
            snapshot_taus: Vec::new(),
        }
    }
}

/// `W(x, tau)` on the stored time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub x_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// `values[j][i] = W(x_grid[i], tau_grid[j])`
    pub values: Vec<Vec<f64>>,
}

/// Reduced-variable obstacle `psi(x) = max(1/x - 1, 0)`.
pub fn obstacle(x: f64) -> f64 {
    (1.0 / x - 1.0).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsorReport {
    pub surface: ValueSurface,
    pub boundary: BoundaryCurve,
    pub sweeps_per_step: Vec<usize>,
    /// Largest `|(W - psi) (L W)|` over interior nodes and levels, with `L W`
    /// the residual of the implicit step in `W` scaling.
    pub max_complementarity: f64,
    /// Smallest `W - psi` over all nodes and levels.
    pub min_obstacle_gap: f64,
    /// Whether every contact set was a single interval starting at `x_min`.
    pub lower_contact_intervals: bool,
}

struct Bands {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

fn fill_bands(params: &ModelParams, avg: AveragingSpec, xs: &[f64], dy: f64, k: f64, t: f64, b: &mut Bands) -> Result<()> {
    let diff = params.half_variance();
    let base = diff / (dy * dy);
    for i in 1..xs.len() - 1 {
        let d = averaging_drift(avg, xs[i], t)? - params.carry() - diff;
        let (lo, up, extra) = if d.abs() * dy <= 2.0 * diff {
            (base - d / (2.0 * dy), base + d / (2.0 * dy), 0.0)
        } else if d > 0.0 {
            (base, base + d / dy, d / dy)
        } else {
            (base - d / dy, base, -d / dy)
        };
        b.lower[i] = -k * lo;
        b.upper[i] = -k * up;
        b.diag[i] = 1.0 + k * (2.0 * base + extra + params.q);
    }
    Ok(())
}

/// Largest node index of the contact set connected to `x_min`, or `None`
/// if the lowest interior node is not in contact.
fn contact_edge(u: &[f64], phi: &[f64], xs: &[f64]) -> (usize, bool) {
    let touching = |i: usize| phi[i] > 0.0 && (u[i] - phi[i]) / xs[i] <= 1e-10;
    let mut edge = 0;
    while edge + 1 < u.len() && touching(edge + 1) {
        edge += 1;
    }
    let single = (edge + 1..u.len()).all(|i| !touching(i));
    (edge, single)
}

fn refined_boundary(u: &[f64], phi: &[f64], xs: &[f64], edge: usize) -> f64 {
    if edge + 2 >= u.len() {
        return xs[edge];
    }
    let g1 = ((u[edge + 1] - phi[edge + 1]) / xs[edge + 1]).max(0.0).sqrt();
    let g2 = ((u[edge + 2] - phi[edge + 2]) / xs[edge + 2]).max(0.0).sqrt();
    if !(g2 > g1) {
        return xs[edge];
    }
    let x = (xs[edge + 1] * g2 - xs[edge + 2] * g1) / (g2 - g1);
    x.clamp(xs[edge], xs[edge + 1])
}

pub fn solve_psor(params: &ModelParams, avg: AveragingSpec, grid: &PsorGrid, opts: &PsorOptions) -> Result<PsorReport> {
    params.validate()?;
    avg.validate()?;
    grid.validate()?;
    if !(opts.omega > 0.0 && opts.omega < 2.0) {
        return Err(invalid("omega", format!("must lie in (0, 2), got {}", opts.omega)));
    }
    if !(opts.tolerance > 0.0) || opts.max_iterations == 0 {
        return Err(invalid("tolerance", "tolerance and iteration cap must be positive"));
    }
    let (n, m) = (grid.n, grid.m);
    let k = params.maturity / m as f64;
    let dy = grid.log_step();
    let xs = grid.x_nodes();
    let phi: Vec<f64> = xs.iter().map(|&x| (1.0 - x).max(0.0)).collect();
    let mut u = phi.clone();
    let mut rhs = vec![0.0; n + 1];
    let mut bands = Bands {
        lower: vec![0.0; n + 1],
        diag: vec![1.0; n + 1],
        upper: vec![0.0; n + 1],
    };

    let stride = if opts.surface_stride == 0 {
        m.div_ceil(500).max(1)
    } else {
        opts.surface_stride
    };
    let mut keep = vec![false; m + 1];
    for j in (0..=m).step_by(stride) {
        keep[j] = true;
    }
    keep[m] = true;
    for &tau in &opts.snapshot_taus {
        if tau.is_finite() {
            keep[(tau / k).round().clamp(0.0, m as f64) as usize] = true;
        }
    }
    // W = psi + (U - phi) / x, so contact nodes carry W = psi exactly.
    let to_w = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(&phi)
            .zip(&xs)
            .map(|((v, f), &x)| obstacle(x) + (v - f) / x)
            .collect()
    };
    let mut surface = ValueSurface {
        x_grid: xs.clone(),
        tau_grid: vec![0.0],
        values: vec![to_w(&u)],
    };

    let g = expiry_limit(params, avg, OptionKind::Call)?.x_star_t;
    let mut taus = vec![0.0];
    let mut x_stars = vec![g];
    let mut sweeps_per_step = Vec::with_capacity(m);
    let mut max_complementarity: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    let mut intervals = true;

    for j in 1..=m {
        let tau = j as f64 * k;
        let t = (params.maturity - tau).max(0.5 * k);
        fill_bands(params, avg, &xs, dy, k, t, &mut bands)?;
        rhs.copy_from_slice(&u);
        u[0] = phi[0];
        u[n] = 0.0;

        let mut sweeps = 0;
        let mut update = f64::INFINITY;
        while sweeps < opts.max_iterations {
            sweeps += 1;
            update = 0.0;
            // Alternate sweep direction so strongly one-sided convection
            // propagates across the grid within a sweep.
            for step in 1..n {
                let i = if sweeps % 2 == 1 { n - step } else { step };
                let gs = (rhs[i] - bands.lower[i] * u[i - 1] - bands.upper[i] * u[i + 1]) / bands.diag[i];
                let next = (u[i] + opts.omega * (gs - u[i])).max(phi[i]);
                update = update.max((next - u[i]).abs());
                u[i] = next;
            }
            if update < opts.tolerance {
                break;
            }
        }
        if !(update < opts.tolerance) {
            return Err(Error::PsorDivergence {
                level: j,
                iterations: sweeps,
                update,
            });
        }
        sweeps_per_step.push(sweeps);

        for i in 1..n {
            let residual = bands.lower[i] * u[i - 1] + bands.diag[i] * u[i] + bands.upper[i] * u[i + 1] - rhs[i];
            let gap = u[i] - phi[i];
            // W-scaled gap and residual of the implicit step.
            max_complementarity = max_complementarity.max((gap * residual / (xs[i] * xs[i] * k)).abs());
            min_gap = min_gap.min(gap / xs[i]);
        }

        let (edge, single) = contact_edge(&u, &phi, &xs);
        intervals &= single;
        let x_star = if opts.refine_boundary {
            refined_boundary(&u, &phi, &xs, edge)
        } else {
            xs[edge]
        };
        taus.push(tau);
        x_stars.push(x_star);
        if keep[j] {
            surface.tau_grid.push(tau);
            surface.values.push(to_w(&u));
        }
    }

    let rhos = x_stars.iter().map(|x| 1.0 / x).collect();
    let boundary = BoundaryCurve::new(params.maturity, taus, rhos)?;
    Ok(PsorReport {
        surface,
        boundary,
        sweeps_per_step,
        max_complementarity,
        min_obstacle_gap: min_gap,
        lower_contact_intervals: intervals,
    })
}

/// `W(x, tau)` by bilinear interpolation (linear in `ln x` and `tau`) on the
/// stored levels.
pub fn value_at(surface: &ValueSurface, x: f64, tau: f64) -> Result<f64> {
    let xs = &surface.x_grid;
    let ts = &surface.tau_grid;
    let inside = x >= xs[0] && x <= xs[xs.len() - 1] && tau >= ts[0] && tau <= ts[ts.len() - 1];
    if !inside {
        return Err(Error::Domain(format!("({x}, {tau}) lies outside the PSOR grid")));
    }
    let bracket = |grid: &[f64], v: f64, map: &dyn Fn(f64) -> f64| -> (usize, f64) {
        let i = grid.partition_point(|&g| g <= v).clamp(1, grid.len() - 1);
        let (a, b) = (map(grid[i - 1]), map(grid[i]));
        let w = if b > a { (map(v) - a) / (b - a) } else { 0.0 };
        (i, w.clamp(0.0, 1.0))
    };
    let (i, wx) = bracket(xs, x, &|v: f64| v.ln());
    let (j, wt) = bracket(ts, tau, &|v: f64| v);
    let row = |jj: usize| (1.0 - wx) * surface.values[jj][i - 1] + wx * surface.values[jj][i];
    Ok((1.0 - wt) * row(j - 1) + wt * row(j))
}

/// Discrete distance between two boundaries in `x*`, evaluated on the nodes
/// of `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDistance {
    pub l_inf: f64,
    /// Time-average of `|x*_a - x*_b|`, i.e. the L1 norm over `(0, T)`
    /// divided by `T`.
    pub l1_mean: f64,
    pub worst_t: f64,
}

pub fn boundary_distance(reference: &BoundaryCurve, other: &BoundaryCurve) -> Result<BoundaryDistance> {
    if (reference.maturity() - other.maturity()).abs() > 1e-12 * reference.maturity() {
        return Err(invalid("boundary", "curves have different maturities"));
    }
    let mut diffs = Vec::with_capacity(reference.len());
    for node in reference.nodes() {
        diffs.push((node.tau, (node.x_star - other.x_star(node.t)?).abs()));
    }
    let (mut l_inf, mut worst_t, mut area) = (0.0, reference.maturity(), 0.0);
    for (i, &(tau, d)) in diffs.iter().enumerate() {
        if d > l_inf {
            l_inf = d;
            worst_t = reference.maturity() - tau;
        }
        if i > 0 {
            area += 0.5 * (tau - diffs[i - 1].0) * (d + diffs[i - 1].1);
        }
    }
    let span = diffs[diffs.len() - 1].0 - diffs[0].0;
    Ok(BoundaryDistance {
        l_inf,
        l1_mean: area / span,
        worst_t,
    })
}
