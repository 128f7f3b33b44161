//! Front-fixing operator-splitting scheme for the early exercise boundary of
//! an American floating-strike Asian call.
//!
//! With `xi = ln(rho(tau) x)` the free boundary sits at `xi = 0` and the
//! synthetic portfolio `Pi = W + x W_x` solves a nonlocal parabolic problem on
//! `(0, L)` with `Pi(0) = -1`, `Pi(L) = 0`. Each time level alternates an
//! integral update of `rho`, an exact transport step and an implicit
//! diffusion step, iterated to a fixed point.

use crate::boundary::BoundaryCurve;
use crate::error::{invalid, Error, Result};
use crate::expiry::expiry_limit;
use crate::model::{averaging_drift, reaction_coefficient, AveragingSpec, GridSpec, ModelParams, OptionKind};
use crate::quadrature::trapezoid_uniform;
use crate::tridiag::solve_tridiagonal_into;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontFixingOptions {
    /// Fixed-point tolerance on `|rho^{j,p+1} - rho^{j,p}|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Store every `surface_stride`-th time level; 0 picks a stride that keeps
    /// about 500 levels.
    pub surface_stride: usize,
    /// Extra levels stored regardless of the stride (nearest grid level).
    pub snapshot_taus: Vec<f64>,
    pub method: FixedPointMethod,
}

/// Iteration used to solve the nonlinear system at each time level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixedPointMethod {
    /// `rho^{j,p+1} = F(Pi^{j,p})`. The map has slope `1 - O(k)` in `ln rho`,
    /// so this converges only when the level is already nearly balanced.
    Picard,
    /// Secant iteration on `ln F(Pi(rho)) - ln rho`; same fixed point.
    #[default]
    Secant,
}

impl Default for FrontFixingOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            surface_stride: 0,
            snapshot_taus: Vec::new(),
            method: FixedPointMethod::default(),
        }
    }
}

/// `Pi(xi, tau)` on the stored time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSurface {
    pub xi_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// `values[j][i] = Pi(xi_grid[i], tau_grid[j])`
    pub values: Vec<Vec<f64>>,
}

impl PortfolioSurface {
    /// Stored row closest to `tau`.
    pub fn profile_near(&self, tau: f64) -> (f64, &[f64]) {
        let j = self
            .tau_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().total_cmp(&(b.1 - tau).abs()))
            .map(|(j, _)| j)
            .unwrap_or(0);
        (self.tau_grid[j], &self.values[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub boundary: BoundaryCurve,
    pub surface: PortfolioSurface,
    /// Fixed-point iterations used at levels `1..=m`.
    pub iterations_per_step: Vec<usize>,
    pub max_fixed_point_residual: f64,
    /// Smallest and largest `Pi` over every computed level.
    pub pi_range: (f64, f64),
    /// Residual of the pointwise boundary relation
    /// `q rho - r + f(1/rho, T - tau) = (sigma^2/2) Pi_xi(0, tau)` per level,
    /// with a one-sided second-order derivative.
    pub pointwise_residuals: Vec<f64>,
}

impl SolverReport {
    /// Whether every computed `Pi` lies in `[-1 - eps, eps]`.
    pub fn pi_within(&self, eps: f64) -> bool {
        self.pi_range.0 >= -1.0 - eps && self.pi_range.1 <= eps
    }
}

/// Initial boundary position `rho(0) = 1 / x*_T` for the call.
pub fn initial_rho(params: &ModelParams, avg: AveragingSpec) -> Result<f64> {
    Ok(1.0 / expiry_limit(params, avg, OptionKind::Call)?.x_star_t)
}

/// Time argument of the `1/(T - tau)` coefficients, kept half a step away
/// from the singular final level.
fn clipped_tau(params: &ModelParams, k: f64, tau: f64) -> f64 {
    tau.min(params.maturity - 0.5 * k)
}

/// Transport half-step `Pi^{j-1/2}_i = Pi^{j-1}(eta_i)`,
/// `eta_i = xi_i - ln rho^j + ln rho^{j-1} - (r - q) k`, with `-1` for
/// `eta_i <= 0` and `0` beyond the domain.
pub fn transport_step(prev_row: &[f64], rho_prev: f64, rho_new: f64, params: &ModelParams, k: f64, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; prev_row.len()];
    transport_into(prev_row, rho_prev, rho_new, params, k, h, &mut out);
    out
}

fn transport_into(prev_row: &[f64], rho_prev: f64, rho_new: f64, params: &ModelParams, k: f64, h: f64, out: &mut [f64]) {
    let n = prev_row.len() - 1;
    let shift = rho_prev.ln() - rho_new.ln() - params.carry() * k;
    out[0] = -1.0;
    out[n] = 0.0;
    for i in 1..n {
        let s = i as f64 + shift / h;
        out[i] = if s <= 0.0 {
            -1.0
        } else {
            let idx = s.floor() as usize;
            if idx >= n {
                0.0
            } else {
                let w = s - idx as f64;
                (1.0 - w) * prev_row[idx] + w * prev_row[idx + 1]
            }
        };
    }
}

/// Bands `(alpha, beta, gamma)` of the implicit diffusion system on interior
/// nodes `i = 1..n-1` (index `i - 1` in the returned vectors).
pub fn diffusion_coefficients(
    rho_new: f64,
    params: &ModelParams,
    avg: AveragingSpec,
    grid: &GridSpec,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut bands = (vec![0.0; grid.n - 1], vec![0.0; grid.n - 1], vec![0.0; grid.n - 1]);
    fill_coefficients(rho_new, params, avg, grid, tau, &mut bands.0, &mut bands.1, &mut bands.2)?;
    Ok(bands)
}

#[allow(clippy::too_many_arguments)]
fn fill_coefficients(
    rho_new: f64,
    params: &ModelParams,
    avg: AveragingSpec,
    grid: &GridSpec,
    tau: f64,
    alpha: &mut [f64],
    beta: &mut [f64],
    gamma: &mut [f64],
) -> Result<()> {
    let k = grid.time_step(params.maturity);
    let h = grid.space_step();
    let tau = clipped_tau(params, k, tau);
    let remaining = params.maturity - tau;
    let s2 = params.sigma * params.sigma;
    let diffusive = k * s2 / (2.0 * h * h);
    for i in 1..grid.n {
        let xi = i as f64 * h;
        let drift = 0.5 * s2 + averaging_drift(avg, xi.exp() / rho_new, remaining)?;
        let b = reaction_coefficient(avg, params, xi, tau, rho_new)?;
        // Central differences while the cell Peclet number |drift| h / (sigma^2/2)
        // stays below 2, one-sided upwind differences beyond.
        let (a, g) = if drift.abs() * h <= s2 {
            let convective = k / (2.0 * h) * drift;
            (-diffusive + convective, -diffusive - convective)
        } else if drift > 0.0 {
            (-diffusive, -diffusive - k / h * drift)
        } else {
            (-diffusive + k / h * drift, -diffusive)
        };
        alpha[i - 1] = a;
        gamma[i - 1] = g;
        beta[i - 1] = 1.0 + b * k - (a + g);
    }
    Ok(())
}

/// Implicit diffusion step with Dirichlet values `Pi_0 = -1`, `Pi_n = 0`.
pub fn diffusion_step(
    half_row: &[f64],
    rho_new: f64,
    params: &ModelParams,
    avg: AveragingSpec,
    grid: &GridSpec,
    tau: f64,
) -> Result<Vec<f64>> {
    let mut ws = Workspace::new(grid.n);
    let mut out = vec![0.0; grid.n + 1];
    diffusion_into(half_row, rho_new, params, avg, grid, tau, &mut ws, &mut out)?;
    Ok(out)
}

struct Workspace {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    rhs: Vec<f64>,
    sol: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let m = n - 1;
        Self {
            alpha: vec![0.0; m],
            beta: vec![0.0; m],
            gamma: vec![0.0; m],
            rhs: vec![0.0; m],
            sol: vec![0.0; m],
            scratch: vec![0.0; m],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn diffusion_into(
    half_row: &[f64],
    rho_new: f64,
    params: &ModelParams,
    avg: AveragingSpec,
    grid: &GridSpec,
    tau: f64,
    ws: &mut Workspace,
    out: &mut [f64],
) -> Result<()> {
    let n = grid.n;
    fill_coefficients(rho_new, params, avg, grid, tau, &mut ws.alpha, &mut ws.beta, &mut ws.gamma)?;
    ws.rhs.copy_from_slice(&half_row[1..n]);
    // Known boundary values move to the right-hand side.
    ws.rhs[0] += ws.alpha[0];
    ws.rhs[n - 2] -= ws.gamma[n - 2] * 0.0;
    solve_tridiagonal_into(&ws.alpha, &ws.beta, &ws.gamma, &ws.rhs, &mut ws.sol, &mut ws.scratch).map_err(|e| match e {
        Error::PivotBreakdown { row, pivot, .. } => Error::PivotBreakdown {
            row: row + 1,
            pivot,
            context: format!("diffusion step at tau = {tau}, n = {n}, m = {}, L = {}", grid.m, grid.domain_length),
        },
        other => other,
    })?;
    out[0] = -1.0;
    out[1..n].copy_from_slice(&ws.sol);
    out[n] = 0.0;
    Ok(())
}

/// Integral update of the boundary position:
/// `ln rho^j = ln rho^{j-1} + I0(Pi^{j-1}) - I0(Pi^j)
///  + k (q + sigma^2/2 - q rho^{j-1} - I1(rho^{j-1}, Pi^j))`.
pub fn boundary_update(
    rho_prev: f64,
    prev_row: &[f64],
    new_row: &[f64],
    params: &ModelParams,
    avg: AveragingSpec,
    grid: &GridSpec,
    tau: f64,
) -> Result<f64> {
    let k = grid.time_step(params.maturity);
    let h = grid.space_step();
    let remaining = params.maturity - clipped_tau(params, k, tau);
    let i0_prev = trapezoid_uniform(prev_row, h);
    let i0_new = trapezoid_uniform(new_row, h);
    let mut weighted = Vec::with_capacity(new_row.len());
    for (i, &pi) in new_row.iter().enumerate() {
        let xi = i as f64 * h;
        let f = averaging_drift(avg, xi.exp() / rho_prev, remaining)?;
        weighted.push((params.r - f) * pi);
    }
    let i1 = trapezoid_uniform(&weighted, h);
    let ln_rho = rho_prev.ln() + i0_prev - i0_new
        + k * (params.q + params.half_variance() - params.q * rho_prev - i1);
    let rho = ln_rho.exp();
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::NonFinite(format!(
            "boundary update at tau = {tau} produced ln rho = {ln_rho}"
        )));
    }
    Ok(rho)
}

fn pointwise_residual(row: &[f64], rho: f64, params: &ModelParams, avg: AveragingSpec, h: f64, remaining: f64) -> f64 {
    let slope = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h);
    let f = averaging_drift(avg, 1.0 / rho, remaining).unwrap_or(f64::NAN);
    params.q * rho - params.r + f - params.half_variance() * slope
}

/// One time level viewed as a map of the boundary position.
struct LevelMap<'a> {
    prev: &'a [f64],
    rho_prev: f64,
    params: &'a ModelParams,
    avg: AveragingSpec,
    grid: &'a GridSpec,
    tau: f64,
    half: &'a mut [f64],
    ws: &'a mut Workspace,
}

impl LevelMap<'_> {
    /// `Pi(rho)`: transport then diffusion from the previous level.
    fn portfolio(&mut self, rho: f64, out: &mut [f64]) -> Result<()> {
        let k = self.grid.time_step(self.params.maturity);
        let h = self.grid.space_step();
        transport_into(self.prev, self.rho_prev, rho, self.params, k, h, self.half);
        diffusion_into(self.half, rho, self.params, self.avg, self.grid, self.tau, self.ws, out)
    }

    /// `ln F(Pi(e^ell))`, leaving `Pi(e^ell)` in `out`.
    fn map(&mut self, ell: f64, out: &mut [f64]) -> Result<f64> {
        self.portfolio(ell.exp(), out)?;
        let rho = boundary_update(self.rho_prev, self.prev, out, self.params, self.avg, self.grid, self.tau)?;
        Ok(rho.ln())
    }
}

/// Runs the scheme over all `m` time levels.
pub fn solve(params: &ModelParams, avg: AveragingSpec, grid: &GridSpec, opts: &FrontFixingOptions) -> Result<SolverReport> {
    params.validate()?;
    avg.validate()?;
    grid.validate()?;
    if !(opts.tolerance > 0.0) {
        return Err(invalid("tolerance", "must be > 0"));
    }
    if opts.max_iterations == 0 {
        return Err(invalid("max_iterations", "must be >= 1"));
    }
    let (n, m) = (grid.n, grid.m);
    let h = grid.space_step();
    let k = grid.time_step(params.maturity);
    let rho0 = initial_rho(params, avg)?;

    let xi_grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let ln_rho0 = rho0.ln();
    let mut prev: Vec<f64> = xi_grid.iter().map(|&xi| if xi < ln_rho0 { -1.0 } else { 0.0 }).collect();
    prev[0] = -1.0;
    prev[n] = 0.0;

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
            let j = (tau / k).round().clamp(0.0, m as f64) as usize;
            keep[j] = true;
        }
    }

    let mut surface = PortfolioSurface {
        xi_grid,
        tau_grid: vec![0.0],
        values: vec![prev.clone()],
    };
    let mut taus = Vec::with_capacity(m + 1);
    let mut rhos = Vec::with_capacity(m + 1);
    taus.push(0.0);
    rhos.push(rho0);

    let mut iterations_per_step = Vec::with_capacity(m);
    let mut pointwise_residuals = Vec::with_capacity(m);
    let mut max_residual: f64 = 0.0;
    let mut pi_range = (-1.0_f64, 0.0_f64);
    let mut ws = Workspace::new(n);
    let mut half = vec![0.0; n + 1];
    let mut current = prev.clone();
    let mut rho_prev = rho0;

    for j in 1..=m {
        let tau = j as f64 * k;
        let mut rho_iter = rho_prev;
        let mut converged = None;
        let mut residual = f64::INFINITY;
        let mut level = LevelMap {
            prev: &prev,
            rho_prev,
            params,
            avg,
            grid,
            tau,
            half: &mut half,
            ws: &mut ws,
        };
        match opts.method {
            FixedPointMethod::Picard => {
                current.copy_from_slice(&prev);
                for p in 1..=opts.max_iterations {
                    let rho_next = boundary_update(rho_prev, &prev, &current, params, avg, grid, tau)?;
                    level.portfolio(rho_next, &mut current)?;
                    residual = (rho_next - rho_iter).abs();
                    rho_iter = rho_next;
                    if !residual.is_finite() {
                        break;
                    }
                    if residual < opts.tolerance {
                        converged = Some(p);
                        break;
                    }
                }
            }
            FixedPointMethod::Secant => {
                // Fixed point of ln rho -> ln F(Pi(rho)) by secant steps on the
                // defect, started from the first two Picard iterates. The defect
                // is only piecewise smooth (interpolation kinks, upwind switch),
                // so once a sign change is seen the steps stay inside it and
                // fall back to bisection if the secant stalls.
                let mut ell0 = rho_prev.ln();
                let mut d0 = level.map(ell0, &mut current)? - ell0;
                let mut ell1 = ell0 + d0;
                let mut bracket: Option<((f64, f64), (f64, f64))> = None;
                for p in 1..=opts.max_iterations {
                    let d1 = level.map(ell1, &mut current)? - ell1;
                    residual = (ell1.exp() - ell0.exp()).abs();
                    rho_iter = ell1.exp();
                    if !residual.is_finite() || !d1.is_finite() {
                        residual = f64::INFINITY;
                        break;
                    }
                    if d1 == 0.0 {
                        residual = 0.0;
                    }
                    if residual < opts.tolerance {
                        converged = Some(p);
                        break;
                    }
                    bracket = match bracket {
                        None if d0 * d1 < 0.0 => Some(((ell0, d0), (ell1, d1))),
                        Some((lo, hi)) if lo.1 * d1 > 0.0 => Some(((ell1, d1), hi)),
                        Some((lo, _)) => Some((lo, (ell1, d1))),
                        None => None,
                    };
                    let slope = (d1 - d0) / (ell1 - ell0);
                    let mut next = if slope.is_finite() && slope != 0.0 {
                        ell1 - d1 / slope
                    } else {
                        ell1 + d1
                    };
                    if let Some(((a, _), (b, _))) = bracket {
                        let (lo, hi) = (a.min(b), a.max(b));
                        if p > 8 || !(next > lo && next < hi) {
                            next = 0.5 * (lo + hi);
                        }
                    }
                    (ell0, d0, ell1) = (ell1, d1, next);
                }
            }
        }
        let Some(iterations) = converged else {
            return Err(Error::FixedPointDivergence { level: j, residual });
        };
        max_residual = max_residual.max(residual);
        iterations_per_step.push(iterations);
        for &v in &current {
            pi_range.0 = pi_range.0.min(v);
            pi_range.1 = pi_range.1.max(v);
        }
        let remaining = params.maturity - clipped_tau(params, k, tau);
        pointwise_residuals.push(pointwise_residual(&current, rho_iter, params, avg, h, remaining));

        taus.push(tau);
        rhos.push(rho_iter);
        if keep[j] {
            surface.tau_grid.push(tau);
            surface.values.push(current.clone());
        }
        std::mem::swap(&mut prev, &mut current);
        rho_prev = rho_iter;
    }

    let boundary = BoundaryCurve::new(params.maturity, taus, rhos)?;
    Ok(SolverReport {
        boundary,
        surface,
        iterations_per_step,
        max_fixed_point_residual: max_residual,
        pi_range,
        pointwise_residuals,
    })
}

/// Boundary curve `x*_t = 1 / rho(T - t)` of a finished solve.
pub fn extract_boundary(report: &SolverReport) -> BoundaryCurve {
    report.boundary.clone()
}
