//! Position of the early exercise boundary at expiry and its first-order
//! expansion in `sqrt(T - t)`.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{AveragingSpec, ModelParams, OptionKind};
use crate::normal::{normal_cdf, normal_pdf};
use crate::quadrature::{split_budget, GaussLegendre};
use crate::roots::{bracketed_root, RootOptions};

/// Default number of quadrature nodes for the slope-constant equation.
pub const H_STAR_QUADRATURE_POINTS: usize = 512;

/// Which case of the expiry characterization produced the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpiryBranch {
    /// The bonus root lies strictly inside the in-the-money set.
    InTheMoney,
    /// The limit is clamped to the at-the-money point `x = 1`.
    AtTheMoney,
}

/// Limit `x*_T` of the early exercise boundary at expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpiryLimit {
    pub x_star_t: f64,
    pub branch: ExpiryBranch,
}

/// Expiry limit for the given averaging and option type.
pub fn expiry_limit(params: &ModelParams, avg: AveragingSpec, kind: OptionKind) -> Result<ExpiryLimit> {
    params.validate()?;
    avg.validate()?;
    let t = params.maturity;
    let root = match avg {
        AveragingSpec::Arithmetic => (params.q + 1.0 / t) / (params.r + 1.0 / t),
        AveragingSpec::Geometric => solve_geometric_transcendental(params)?,
        AveragingSpec::WeightedExponential { lambda } => {
            let mass = -(-lambda * t).exp_m1();
            (params.q * mass + lambda) / (params.r * mass + lambda)
        }
    };
    Ok(clamp_to_money(root, kind))
}

fn clamp_to_money(root: f64, kind: OptionKind) -> ExpiryLimit {
    let inside = match kind {
        OptionKind::Call => root < 1.0,
        OptionKind::Put => root > 1.0,
    };
    if inside {
        ExpiryLimit {
            x_star_t: root,
            branch: ExpiryBranch::InTheMoney,
        }
    } else {
        ExpiryLimit {
            x_star_t: 1.0,
            branch: ExpiryBranch::AtTheMoney,
        }
    }
}

/// Root of `ln x = qT / x - rT`, the expiry limit under geometric averaging.
pub fn solve_geometric_transcendental(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (r, q, t) = (params.r, params.q, params.maturity);
    // Solved in y = ln x, where the residual is increasing and the root can sit
    // far below any absolute bracket width in x.
    let residual = |y: f64| y - q * t * (-y).exp() + r * t;
    let hi = ((q / r).max(1.0) + 1.0).ln();
    let mut lo = hi - 1.0;
    let mut step = 1.0;
    while residual(lo) >= 0.0 {
        step *= 2.0;
        lo = hi - step;
        if !lo.is_finite() || step > 1e6 {
            return Err(Error::RootNotBracketed(format!(
                "no lower bracket for ln x = qT/x - rT (r = {r}, q = {q}, T = {t})"
            )));
        }
    }
    let opts = RootOptions {
        bracket_width: 1e-9,
        ..RootOptions::default()
    };
    bracketed_root(residual, lo, hi, opts).map(f64::exp)
}

/// Right-hand side of the slope-constant equation
/// `0 = 1 - int Phi(-h g) dtheta + h int sqrt((1-theta)/theta) Phi'(-h g) dtheta`,
/// `g = (1 - sqrt(1 - theta)) / sqrt(theta)`.
///
/// `theta = s^2` removes the `1/sqrt(theta)` singularity at the origin; taking
/// `s = sin(phi)` also removes the square-root branch point at `theta = 1`,
/// leaving a smooth integrand on `[0, pi/2]` with `g = tan(phi / 2)`.
pub fn h_equation_rhs(h: f64, quadrature_points: usize) -> f64 {
    let (panels, per_panel) = split_budget(quadrature_points);
    let rule = GaussLegendre::new(per_panel);
    let mut cdf_part = 0.0;
    let mut pdf_part = 0.0;
    for (phi, w) in rule.composite_points(0.0, FRAC_PI_2, panels) {
        let z = -h * (0.5 * phi).tan();
        let (s, c) = phi.sin_cos();
        cdf_part += w * normal_cdf(z) * 2.0 * s * c;
        pdf_part += w * 2.0 * c * c * normal_pdf(z);
    }
    1.0 - cdf_part + h * pdf_part
}

/// Universal slope constant `h*` of the near-expiry boundary expansion.
pub fn solve_h_star(quadrature_points: usize) -> Result<f64> {
    if quadrature_points < 64 {
        return Err(invalid(
            "quadrature_points",
            format!("need at least 64 nodes, got {quadrature_points}"),
        ));
    }
    bracketed_root(
        |h| h_equation_rhs(h, quadrature_points),
        -2.0,
        0.0,
        RootOptions::default(),
    )
}

/// `h*` at the default quadrature resolution, computed once.
pub fn h_star() -> f64 {
    static H_STAR: OnceLock<f64> = OnceLock::new();
    *H_STAR.get_or_init(|| {
        solve_h_star(H_STAR_QUADRATURE_POINTS).expect("slope-constant equation is bracketed on [-2, 0]")
    })
}

/// Coefficients of `x*_t = G (1 + h* sigma sqrt(T - t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteCoefficients {
    /// Expiry limit `G = x*_T`.
    pub g: f64,
    pub h_star: f64,
    pub sigma: f64,
}

impl AsymptoteCoefficients {
    /// Evaluates the expansion at remaining time `T - t`.
    pub fn at_remaining(&self, remaining: f64) -> f64 {
        self.g * (1.0 + self.h_star * self.sigma * remaining.max(0.0).sqrt())
    }

    /// Slope of the boundary against `sqrt(T - t)`.
    pub fn sqrt_slope(&self) -> f64 {
        self.g * self.h_star * self.sigma
    }
}

/// Near-expiry expansion coefficients for a call with `r > q >= 0`.
pub fn asymptote_coefficients(params: &ModelParams, avg: AveragingSpec) -> Result<AsymptoteCoefficients> {
    params.validate()?;
    if !(params.r > params.q) {
        return Err(Error::Domain(format!(
            "the near-expiry expansion requires r > q (r = {}, q = {})",
            params.r, params.q
        )));
    }
    if let AveragingSpec::WeightedExponential { .. } = avg {
        return Err(Error::Unsupported(
            "near-expiry expansion for weighted averaging".into(),
        ));
    }
    let g = expiry_limit(params, avg, OptionKind::Call)?.x_star_t;
    Ok(AsymptoteCoefficients {
        g,
        h_star: h_star(),
        sigma: params.sigma,
    })
}

/// First-order near-expiry approximation of the call boundary at time `t`.
pub fn boundary_asymptote(params: &ModelParams, avg: AveragingSpec, t: f64) -> Result<f64> {
    if !(0.0..=params.maturity).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, T = {}]",
            params.maturity
        )));
    }
    Ok(asymptote_coefficients(params, avg)?.at_remaining(params.maturity - t))
}

/// Rectangular grid of expiry limits over `(r, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpirySweep {
    pub r_values: Vec<f64>,
    pub q_values: Vec<f64>,
    /// `cells[i][j]` holds the limit at `(r_values[i], q_values[j])`.
    pub cells: Vec<Vec<ExpiryLimit>>,
}

fn linspace(range: (f64, f64), steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![range.0];
    }
    let span = range.1 - range.0;
    (0..steps)
        .map(|i| range.0 + span * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Evaluates [`expiry_limit`] on a `steps x steps` grid of `(r, q)`; the
/// maturity comes from `base`.
pub fn expiry_limit_sweep(
    base: &ModelParams,
    r_range: (f64, f64),
    q_range: (f64, f64),
    avg: AveragingSpec,
    kind: OptionKind,
    steps: usize,
) -> Result<ExpirySweep> {
    if !(r_range.0 > 0.0 && r_range.1 > 0.0) {
        return Err(invalid("r_range", "rates must be > 0 over the whole range"));
    }
    if !(q_range.0 >= 0.0 && q_range.1 >= 0.0) {
        return Err(invalid("q_range", "dividend yields must be >= 0"));
    }
    let r_values = linspace(r_range, steps);
    let q_values = linspace(q_range, steps);
    let cells = r_values
        .par_iter()
        .map(|&r| {
            q_values
                .iter()
                .map(|&q| {
                    let params = ModelParams { r, q, ..*base };
                    expiry_limit(&params, avg, kind).map_err(|e| Error::SweepCell {
                        r,
                        q,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpirySweep {
        r_values,
        q_values,
        cells,
    })
}
