//! Integral representation `V~ = v~ + e~` of the American floating-strike
//! Asian option in the similarity variable `x = A / S`, for geometric and
//! (log-normally approximated) arithmetic averaging.

use crate::boundary::BoundaryCurve;
use crate::error::{Error, Result};
use crate::lognormal::{conditioned_sensitivity, LogNormalSensitivity};
use crate::model::{AveragingSpec, ModelParams, OptionKind};
use crate::normal::{normal_cdf, normal_pdf};
use crate::quadrature::{split_budget, GaussLegendre};

/// Default number of quadrature nodes in the premium and residual integrals.
pub const DEFAULT_QUAD_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceDecomposition {
    pub european: f64,
    pub premium: f64,
    pub total: f64,
}

/// Expectations of `Omega` with `ln Omega ~ N(alpha, beta^2)` restricted to
/// `rho Omega < rho K`, with partial derivatives in `alpha` and `beta`.
///
/// `p = E[1]`, `m = E[Omega]`, `n = E[Omega ln Omega]` on that event.
#[derive(Debug, Clone, Copy, Default)]
struct Truncation {
    p: f64,
    m: f64,
    n: f64,
    p_a: f64,
    p_b: f64,
    m_a: f64,
    m_b: f64,
    n_a: f64,
    n_b: f64,
}

impl Truncation {
    fn new(alpha: f64, beta: f64, strike: f64, rho: f64) -> Self {
        let ln_k = strike.ln();
        if beta <= 0.0 {
            // Point mass at e^alpha: indicator of rho alpha < rho ln K.
            if rho * (alpha - ln_k) >= 0.0 {
                return Self::default();
            }
            let m = alpha.exp();
            return Self {
                p: 1.0,
                m,
                n: alpha * m,
                m_a: m,
                n_a: m + alpha * m,
                ..Self::default()
            };
        }
        let d = (alpha - ln_k) / beta;
        let gamma = d + beta;
        let forward = (alpha + 0.5 * beta * beta).exp();
        // forward * pdf(gamma) == K * pdf(d)
        let kpdf = strike * normal_pdf(d);
        let m = forward * normal_cdf(-rho * gamma);
        let level = alpha + beta * beta;
        let p_a = -rho * normal_pdf(d) / beta;
        let m_a = m - rho * kpdf / beta;
        let m_b = beta * m - rho * kpdf * (1.0 - d / beta);
        Self {
            p: normal_cdf(-rho * d),
            m,
            n: level * m - rho * beta * kpdf,
            p_a,
            p_b: -p_a * d,
            m_a,
            m_b,
            n_a: m + level * m_a + rho * kpdf * d,
            n_b: 2.0 * beta * m + level * m_b - rho * kpdf - rho * kpdf * d * d,
        }
    }
}

fn supported(avg: AveragingSpec) -> Result<()> {
    match avg {
        AveragingSpec::WeightedExponential { .. } => Err(Error::Unsupported(
            "integral representation for weighted averaging".into(),
        )),
        _ => Ok(()),
    }
}

fn check_state(t: f64, x: f64, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if !(t > 0.0 && t <= params.maturity) {
        return Err(Error::Domain(format!(
            "valuation time must lie in (0, T = {}], got {t}",
            params.maturity
        )));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// `(v~, e^{qt} dv~/dx)` for the European part.
fn european_with_derivative(
    t: f64,
    x: f64,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
) -> Result<(f64, f64)> {
    let rho = kind.rho();
    let discount = (-params.q * params.maturity).exp();
    if t >= params.maturity {
        let slope = if rho * (1.0 - x) > 0.0 { -rho } else { 0.0 };
        return Ok((discount * (rho * (1.0 - x)).max(0.0), slope));
    }
    let s = conditioned_sensitivity(avg, t, params.maturity, x, params)?;
    // (rho (1 - X))^+ = rho (1 - X) on rho X < rho.
    let tr = Truncation::new(s.params.alpha, s.params.beta, 1.0, rho);
    let value = rho * discount * (tr.p - tr.m);
    let dvalue = rho * ((tr.p_a - tr.m_a) * s.dalpha_dx + (tr.p_b - tr.m_b) * s.dbeta_dx);
    let growth = (-params.q * (params.maturity - t)).exp();
    Ok((value.max(0.0), growth * dvalue))
}

/// European part `v~(t, x) = E_t[e^{-qT} (rho (1 - x_T))^+]`.
pub fn european_value(t: f64, x: f64, params: &ModelParams, avg: AveragingSpec, kind: OptionKind) -> Result<f64> {
    supported(avg)?;
    check_state(t, x, params)?;
    european_with_derivative(t, x, params, avg, kind).map(|(v, _)| v)
}

/// Bonus density `E_t[1_S f_b]` at time `u` and its `x`-derivative.
fn bonus_with_derivative(
    avg: AveragingSpec,
    s: &LogNormalSensitivity,
    u: f64,
    x_star: f64,
    params: &ModelParams,
    rho: f64,
) -> (f64, f64) {
    let tr = Truncation::new(s.params.alpha, s.params.beta, x_star, rho);
    let (r, q) = (params.r, params.q);
    let (value, d_alpha, d_beta) = match avg {
        AveragingSpec::Arithmetic => {
            let (cp, cm) = (q + 1.0 / u, r + 1.0 / u);
            (cp * tr.p - cm * tr.m, cp * tr.p_a - cm * tr.m_a, cp * tr.p_b - cm * tr.m_b)
        }
        _ => (
            q * tr.p - r * tr.m - tr.n / u,
            q * tr.p_a - r * tr.m_a - tr.n_a / u,
            q * tr.p_b - r * tr.m_b - tr.n_b / u,
        ),
    };
    let discount = (-q * u).exp();
    (
        rho * discount * value,
        rho * discount * (d_alpha * s.dalpha_dx + d_beta * s.dbeta_dx),
    )
}

/// Integral over `u in [t, T]` with `u = t + (T - t) s^2`, which clusters
/// nodes where the conditioned law degenerates.
fn integrate_over_remaining<F>(t: f64, maturity: f64, quad_nodes: usize, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if quad_nodes == 0 {
        return Err(Error::InvalidParameter {
            name: "quad_nodes",
            reason: "must be positive".into(),
        });
    }
    let span = maturity - t;
    if span <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let (panels, per_panel) = split_budget(quad_nodes);
    let rule = GaussLegendre::new(per_panel);
    let mut acc = (0.0, 0.0);
    for (s, w) in rule.composite_points(0.0, 1.0, panels) {
        let u = t + span * s * s;
        let jac = 2.0 * span * s * w;
        let (a, b) = f(u)?;
        acc.0 += jac * a;
        acc.1 += jac * b;
    }
    Ok(acc)
}

fn premium_with_derivative(
    t: f64,
    x: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<(f64, f64)> {
    if !boundary.covers(t) {
        return Err(Error::BoundaryCoverage {
            from: t,
            to: params.maturity,
        });
    }
    let rho = kind.rho();
    integrate_over_remaining(t, params.maturity, quad_nodes, |u| {
        let s = conditioned_sensitivity(avg, t, u, x, params)?;
        let x_star = boundary.x_star(u)?;
        Ok(bonus_with_derivative(avg, &s, u, x_star, params, rho))
    })
}

/// Early exercise premium `e~(t, x)` for the stopping region below (call)
/// or above (put) the supplied boundary.
pub fn exercise_premium(
    t: f64,
    x: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<f64> {
    supported(avg)?;
    check_state(t, x, params)?;
    premium_with_derivative(t, x, boundary, params, avg, kind, quad_nodes).map(|(e, _)| e)
}

/// `V~ = v~ + e~` at `(t, x)`.
pub fn price(
    t: f64,
    x: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<PriceDecomposition> {
    let european = european_value(t, x, params, avg, kind)?;
    let premium = exercise_premium(t, x, boundary, params, avg, kind, quad_nodes)?;
    Ok(PriceDecomposition {
        european,
        premium,
        total: european + premium,
    })
}

/// Option value in the original variables, `V(t, S, A) = S e^{qt} V~(t, A/S)`.
#[allow(clippy::too_many_arguments)]
pub fn option_value_original(
    t: f64,
    spot: f64,
    average: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<f64> {
    if !(spot > 0.0 && average > 0.0) {
        return Err(Error::Domain(format!(
            "spot and average must be > 0, got S = {spot}, A = {average}"
        )));
    }
    let p = price(t, average / spot, boundary, params, avg, kind, quad_nodes)?;
    Ok(spot * (params.q * t).exp() * p.total)
}

/// Components of the smooth-pasting identity at `x = x*_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothPasting {
    pub x_star: f64,
    /// `e^{qt} dv~/dx`
    pub european_slope: f64,
    /// `int_t^T e^{qt} d/dx (bonus density) du`
    pub premium_slope: f64,
    /// `rho + european_slope + premium_slope`; zero on the exact boundary.
    pub residual: f64,
}

/// Residual of the smooth-pasting identity `-rho = e^{qt} dV~/dx (t, x*_t)`.
pub fn smooth_pasting(
    t: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<SmoothPasting> {
    supported(avg)?;
    let x_star = boundary.x_star(t)?;
    check_state(t, x_star, params)?;
    let (_, european_slope) = european_with_derivative(t, x_star, params, avg, kind)?;
    let (_, d_premium) = premium_with_derivative(t, x_star, boundary, params, avg, kind, quad_nodes)?;
    let premium_slope = (params.q * t).exp() * d_premium;
    Ok(SmoothPasting {
        x_star,
        european_slope,
        premium_slope,
        residual: kind.rho() + european_slope + premium_slope,
    })
}

pub fn smooth_pasting_residual(
    t: f64,
    boundary: &BoundaryCurve,
    params: &ModelParams,
    avg: AveragingSpec,
    kind: OptionKind,
    quad_nodes: usize,
) -> Result<f64> {
    smooth_pasting(t, boundary, params, avg, kind, quad_nodes).map(|s| s.residual)
}
