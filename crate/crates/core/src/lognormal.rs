//! Conditioned log-normal laws of the ratio `x_u = A_u / S_u` given `x_t`.
//!
//! Geometric averaging gives an exact log-normal law. For arithmetic
//! averaging the law is approximated by the log-normal with the same first
//! two conditioned moments.

use crate::error::{Error, Result};
use crate::model::{AveragingSpec, ModelParams, OptionKind};
use crate::normal::{normal_cdf, normal_pdf};
use crate::quadrature::GaussLegendre;

/// `ln x_u | F_t ~ N(alpha, beta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalParams {
    pub alpha: f64,
    pub beta: f64,
}

impl LogNormalParams {
    /// `E[x_u] = exp(alpha + beta^2 / 2)`.
    pub fn mean(&self) -> f64 {
        (self.alpha + 0.5 * self.beta * self.beta).exp()
    }
}

/// First two conditioned moments `E_t[x_u]`, `E_t[x_u^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub m1: f64,
    pub m2: f64,
}

/// Log-normal parameters together with their derivatives in `x = x_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalSensitivity {
    pub params: LogNormalParams,
    pub dalpha_dx: f64,
    pub dbeta_dx: f64,
}

/// Truncated expectations of `Omega` with `ln Omega ~ N(alpha, beta^2)` on
/// the event `rho * Omega >= rho * K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedExpectations {
    /// `E[1{rho Omega >= rho K}]`
    pub prob: f64,
    /// `E[1{...} Omega]`
    pub mean_truncated: f64,
    /// `E[1{...} Omega ln Omega]`
    pub mean_log_truncated: f64,
    /// `E[(rho (Omega - K))^+]`
    pub payoff_expectation: f64,
}

pub fn truncated_expectations(alpha: f64, beta: f64, strike: f64, side: OptionKind) -> Result<TruncatedExpectations> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "truncated log-normal expectations need beta > 0, got {beta}"
        )));
    }
    if !(strike > 0.0) {
        return Err(Error::Domain(format!("strike must be > 0, got {strike}")));
    }
    let rho = side.rho();
    let gamma = (alpha + beta * beta - strike.ln()) / beta;
    let forward = (alpha + 0.5 * beta * beta).exp();
    let prob = normal_cdf(rho * (gamma - beta));
    let mean_truncated = forward * normal_cdf(rho * gamma);
    let mean_log_truncated =
        forward * ((alpha + beta * beta) * normal_cdf(rho * gamma) + rho * beta * normal_pdf(gamma));
    let payoff_expectation = rho * (mean_truncated - strike * prob);
    Ok(TruncatedExpectations {
        prob,
        mean_truncated,
        mean_log_truncated,
        payoff_expectation,
    })
}

fn check_times(t: f64, u: f64, x: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("conditioning time must be > 0, got t = {t}")));
    }
    if !(u >= t) {
        return Err(Error::Domain(format!("need u >= t, got t = {t}, u = {u}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// Exact conditioned law of the geometric-average ratio.
pub fn geometric_params(t: f64, u: f64, x: f64, params: &ModelParams) -> Result<LogNormalParams> {
    check_times(t, u, x)?;
    let drift = params.carry() + params.half_variance();
    let alpha = (t / u) * x.ln() - (u * u - t * t) / (2.0 * u) * drift;
    let beta = params.sigma / (u * 3f64.sqrt()) * (u * u * u - t * t * t).max(0.0).sqrt();
    Ok(LogNormalParams { alpha, beta })
}

/// `(1 - exp(-lambda d)) / lambda`, equal to `d` at `lambda = 0`.
fn decay_integral(lambda: f64, d: f64) -> f64 {
    let z = lambda * d;
    if z == 0.0 {
        d
    } else if z.abs() < 1e-8 {
        d * (1.0 - 0.5 * z + z * z / 6.0)
    } else {
        -(-z).exp_m1() / lambda
    }
}

/// Below this `|(r - q)(u - t)|` the closed form of the double-integral term
/// loses digits to cancellation and is evaluated by quadrature instead.
const CARRY_SINGULARITY_THRESHOLD: f64 = 1e-3;

/// `(1/a) * [g(2a - s2) - exp(-a d) g(a - s2)]`, the inner double integral
/// `int_0^d int_s^d exp(-(a - s2) s - a w) dw ds` of the second moment.
fn paired_decay_integral(a: f64, s2: f64, d: f64) -> f64 {
    if (a * d).abs() >= CARRY_SINGULARITY_THRESHOLD {
        let b = a - s2;
        return (decay_integral(a + b, d) - (-a * d).exp() * decay_integral(b, d)) / a;
    }
    let rule = GaussLegendre::new(16);
    rule.composite(0.0, d, 8, |s| {
        (-(a - s2) * s).exp() * (-a * s).exp() * decay_integral(a, d - s)
    })
}

/// How the mixed term `E_t[(S_t/S_u) int_t^u S_v/S_u dv]` of the second
/// moment is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondMomentForm {
    /// Joint expectation, accounting for the shared Brownian increment.
    #[default]
    Exact,
    /// Product `E_t[S_t/S_u] * int_t^u E_t[S_v/S_u] dv`, which drops the
    /// covariance. Kept for bias comparisons.
    Factorized,
}

/// Conditioned moments of the arithmetic-average ratio and their `x`-derivatives.
fn arithmetic_moments_full(
    t: f64,
    u: f64,
    x: f64,
    params: &ModelParams,
    form: SecondMomentForm,
) -> Result<(MomentPair, MomentPair)> {
    check_times(t, u, x)?;
    let a = params.carry();
    let s2 = params.sigma * params.sigma;
    let d = u - t;
    let ratio = t / u;
    let carry_decay = (-a * d).exp();

    let m1 = x * ratio * carry_decay + decay_integral(a, d) / u;
    let dm1 = ratio * carry_decay;

    let first = ratio * ratio * (-(2.0 * a - s2) * d).exp();
    let mixed = match form {
        SecondMomentForm::Exact => 2.0 * t / (u * u) * carry_decay * decay_integral(a - s2, d),
        SecondMomentForm::Factorized => 2.0 * t / (u * u) * carry_decay * decay_integral(a, d),
    };
    let tail = 2.0 / (u * u) * paired_decay_integral(a, s2, d);
    let m2 = x * x * first + x * mixed + tail;
    let dm2 = 2.0 * x * first + mixed;
    Ok((MomentPair { m1, m2 }, MomentPair { m1: dm1, m2: dm2 }))
}

/// First two conditioned moments of the arithmetic-average ratio.
pub fn arithmetic_moments(t: f64, u: f64, x: f64, params: &ModelParams) -> Result<MomentPair> {
    arithmetic_moments_with(t, u, x, params, SecondMomentForm::Exact)
}

pub fn arithmetic_moments_with(
    t: f64,
    u: f64,
    x: f64,
    params: &ModelParams,
    form: SecondMomentForm,
) -> Result<MomentPair> {
    arithmetic_moments_full(t, u, x, params, form).map(|(m, _)| m)
}

/// Radicands in `(-BETA_CLAMP, 0)` are roundoff and clamp to zero.
const BETA_CLAMP: f64 = 1e-14;

fn matched_params(m: MomentPair) -> Result<(LogNormalParams, f64)> {
    let (l1, l2) = (m.m1.ln(), m.m2.ln());
    let radicand = l2 - 2.0 * l1;
    if !radicand.is_finite() {
        return Err(Error::NonFinite(format!("moment pair {m:?}")));
    }
    if radicand < -BETA_CLAMP {
        return Err(Error::NegativeRadicand { radicand });
    }
    let beta = radicand.max(0.0).sqrt();
    Ok((
        LogNormalParams {
            alpha: 2.0 * l1 - 0.5 * l2,
            beta,
        },
        radicand,
    ))
}

/// Moment-matched log-normal parameters for the arithmetic-average ratio.
pub fn arithmetic_params(t: f64, u: f64, x: f64, params: &ModelParams) -> Result<LogNormalParams> {
    matched_params(arithmetic_moments(t, u, x, params)?).map(|(p, _)| p)
}

pub fn arithmetic_params_with(
    t: f64,
    u: f64,
    x: f64,
    params: &ModelParams,
    form: SecondMomentForm,
) -> Result<LogNormalParams> {
    matched_params(arithmetic_moments_with(t, u, x, params, form)?).map(|(p, _)| p)
}

/// Second moment in the form of Hansen and Jorgensen, stated for `q = 0`.
pub fn hj_second_moment(t: f64, u: f64, x: f64, params: &ModelParams) -> Result<f64> {
    check_times(t, u, x)?;
    if params.q != 0.0 {
        return Err(Error::Unsupported(format!(
            "the Hansen-Jorgensen second moment is stated for q = 0 (got q = {})",
            params.q
        )));
    }
    let r = params.r;
    let s2 = params.sigma * params.sigma;
    let d = u - t;
    let value = x * x * t * t / (u * u) * (-2.0 * (r - 0.5 * s2) * d).exp()
        + x * 2.0 * t * (-r * d).exp() / (u * u * (r - s2)) * (1.0 - (-(r - s2) * d).exp())
        + ((r - s2) - 2.0 * (r - 0.5 * s2) * (-r * d).exp() + r * (-2.0 * (r - 0.5 * s2) * d).exp())
            / (u * u * r * (r - 0.5 * s2) * (r - s2));
    if !value.is_finite() {
        return Err(Error::NonFinite(format!(
            "Hansen-Jorgensen moment is singular at r = {r}, sigma^2 = {s2}"
        )));
    }
    Ok(value)
}

/// Conditioned log-normal law of `x_u` and its sensitivity to `x_t = x`.
pub fn conditioned_sensitivity(
    avg: AveragingSpec,
    t: f64,
    u: f64,
    x: f64,
    params: &ModelParams,
) -> Result<LogNormalSensitivity> {
    match avg {
        AveragingSpec::Geometric => Ok(LogNormalSensitivity {
            params: geometric_params(t, u, x, params)?,
            dalpha_dx: t / (u * x),
            dbeta_dx: 0.0,
        }),
        AveragingSpec::Arithmetic => {
            let (m, dm) = arithmetic_moments_full(t, u, x, params, SecondMomentForm::Exact)?;
            let (ln_params, radicand) = matched_params(m)?;
            let dl1 = dm.m1 / m.m1;
            let dl2 = dm.m2 / m.m2;
            let dbeta_dx = if ln_params.beta > 0.0 && radicand > 0.0 {
                (dl2 - 2.0 * dl1) / (2.0 * ln_params.beta)
            } else {
                0.0
            };
            Ok(LogNormalSensitivity {
                params: ln_params,
                dalpha_dx: 2.0 * dl1 - 0.5 * dl2,
                dbeta_dx,
            })
        }
        AveragingSpec::WeightedExponential { .. } => Err(Error::Unsupported(
            "conditioned distribution for weighted averaging".into(),
        )),
    }
}

/// Conditioned log-normal law of `x_u` given `x_t = x`.
pub fn conditioned_params(
    avg: AveragingSpec,
    t: f64,
    u: f64,
    x: f64,
    params: &ModelParams,
) -> Result<LogNormalParams> {
    match avg {
        AveragingSpec::Geometric => geometric_params(t, u, x, params),
        AveragingSpec::Arithmetic => arithmetic_params(t, u, x, params),
        AveragingSpec::WeightedExponential { .. } => Err(Error::Unsupported(
            "conditioned distribution for weighted averaging".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_params() -> ModelParams {
        ModelParams::new(0.06, 0.04, 0.2, 2.0).unwrap()
    }

    #[test]
    fn degenerate_at_equal_times() {
        let p = spec_params();
        let g = geometric_params(1.3, 1.3, 0.8, &p).unwrap();
        assert!((g.alpha - 0.8_f64.ln()).abs() < 1e-15);
        assert_eq!(g.beta, 0.0);
        let m = arithmetic_moments(1.3, 1.3, 0.8, &p).unwrap();
        assert!((m.m1 - 0.8).abs() < 1e-15 && (m.m2 - 0.64).abs() < 1e-15);
        let a = arithmetic_params(1.3, 1.3, 0.8, &p).unwrap();
        assert!((a.alpha - 0.8_f64.ln()).abs() < 1e-14);
        assert!(a.beta < 1e-7);
    }

    #[test]
    fn geometric_alpha_hand_value() {
        // r - q + sigma^2 / 2 = 0.08
        let p = ModelParams::new(0.07, 0.01, 0.2, 2.0).unwrap();
        let g = geometric_params(1.0, 2.0, 1.0, &p).unwrap();
        assert!((g.alpha + 0.06).abs() < 1e-15);
        let beta = 0.2 / (2.0 * 3f64.sqrt()) * 7f64.sqrt();
        assert!((g.beta - beta).abs() < 1e-15);
        assert!(geometric_params(0.0, 1.0, 1.0, &p).is_err());
    }

    #[test]
    fn first_moment_without_carry() {
        let p = ModelParams::new(0.05, 0.05, 0.3, 3.0).unwrap();
        let m = arithmetic_moments(1.0, 3.0, 0.7, &p).unwrap();
        assert!((m.m1 - (0.7 / 3.0 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn matched_params_reproduce_moments() {
        let p = spec_params();
        let m = arithmetic_moments(1.0, 2.0, 0.9, &p).unwrap();
        let ln = arithmetic_params(1.0, 2.0, 0.9, &p).unwrap();
        assert!((ln.mean() - m.m1).abs() < 1e-14);
        let second = (2.0 * ln.alpha + 2.0 * ln.beta * ln.beta).exp();
        assert!((second - m.m2).abs() < 1e-14);
    }

    #[test]
    fn hj_form_equals_exact_form_without_dividends() {
        for &(r, sigma) in &[(0.06, 0.2), (0.1, 0.25), (0.03, 0.5), (0.2, 0.1)] {
            let p = ModelParams::new(r, 0.0, sigma, 5.0).unwrap();
            for &(t, u, x) in &[(1.0, 2.0, 0.9), (0.5, 4.0, 1.3), (2.0, 2.1, 0.4)] {
                let exact = arithmetic_moments(t, u, x, &p).unwrap().m2;
                let hj = hj_second_moment(t, u, x, &p).unwrap();
                assert!(((exact - hj) / exact).abs() < 1e-11, "r={r} s={sigma}: {exact} vs {hj}");
            }
        }
    }

    #[test]
    fn factorized_form_differs() {
        let p = ModelParams::new(0.06, 0.0, 0.2, 2.0).unwrap();
        let exact = arithmetic_moments(1.0, 2.0, 0.9, &p).unwrap().m2;
        let fact = arithmetic_moments_with(1.0, 2.0, 0.9, &p, SecondMomentForm::Factorized).unwrap().m2;
        let hj = hj_second_moment(1.0, 2.0, 0.9, &p).unwrap();
        assert!((exact - fact).abs() > 1e-3);
        assert!((hj - fact).abs() > 1e-3);
    }

    #[test]
    fn hj_collapses_to_factorized_without_volatility() {
        let p = ModelParams::new(0.06, 0.0, 1e-7, 2.0).unwrap();
        let fact = arithmetic_moments_with(1.0, 2.0, 0.9, &p, SecondMomentForm::Factorized).unwrap().m2;
        let hj = hj_second_moment(1.0, 2.0, 0.9, &p).unwrap();
        assert!((fact - hj).abs() < 1e-9);
        let p = spec_params();
        assert!(matches!(hj_second_moment(1.0, 2.0, 0.9, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn moments_continuous_across_singular_carries() {
        // r - q in {0, sigma^2/2, sigma^2} with sigma = 0.2.
        for &carry in &[0.0, 0.02, 0.04] {
            let at = |eps: f64| {
                let p = ModelParams::new(0.05 + carry + eps, 0.05, 0.2, 3.0).unwrap();
                arithmetic_moments(1.0, 3.0, 0.85, &p).unwrap()
            };
            let centre = at(0.0);
            assert!(centre.m1.is_finite() && centre.m2.is_finite());
            for eps in [1e-12, 1e-9, 1e-7, 1e-5, 4e-4, 6e-4] {
                for s in [-1.0, 1.0] {
                    let m = at(s * eps);
                    let tol = 2e-12 + 10.0 * eps;
                    assert!((m.m1 - centre.m1).abs() < tol, "carry {carry} eps {eps}");
                    assert!((m.m2 - centre.m2).abs() < tol, "carry {carry} eps {eps}");
                }
            }
        }
    }

    #[test]
    fn second_moment_dominates_square() {
        let p = spec_params();
        for &(t, u, x) in &[(0.1, 2.0, 0.2), (1.0, 1.0001, 1.0), (1.9, 2.0, 3.0)] {
            let m = arithmetic_moments(t, u, x, &p).unwrap();
            assert!(m.m2 >= m.m1 * m.m1 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn arithmetic_beta_depends_on_x() {
        let p = spec_params();
        let b1 = arithmetic_params(1.0, 2.0, 0.8, &p).unwrap().beta;
        let b2 = arithmetic_params(1.0, 2.0, 0.8 + 1e-4, &p).unwrap().beta;
        assert!((b2 - b1).abs() > 1e-9);
        let g1 = geometric_params(1.0, 2.0, 0.8, &p).unwrap().beta;
        let g2 = geometric_params(1.0, 2.0, 5.0, &p).unwrap().beta;
        assert_eq!(g1, g2);
    }

    #[test]
    fn sensitivities_match_finite_differences() {
        let p = spec_params();
        for avg in [AveragingSpec::Arithmetic, AveragingSpec::Geometric] {
            let s = conditioned_sensitivity(avg, 0.7, 1.8, 0.9, &p).unwrap();
            let h = 1e-6;
            let up = conditioned_params(avg, 0.7, 1.8, 0.9 + h, &p).unwrap();
            let dn = conditioned_params(avg, 0.7, 1.8, 0.9 - h, &p).unwrap();
            assert!((s.dalpha_dx - (up.alpha - dn.alpha) / (2.0 * h)).abs() < 1e-7);
            assert!((s.dbeta_dx - (up.beta - dn.beta) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn truncated_untruncated_limit() {
        let e = truncated_expectations(0.0, 1.0, (-10.0_f64).exp(), OptionKind::Call).unwrap();
        assert!((e.prob - 1.0).abs() < 1e-12);
        assert!((e.mean_truncated - 0.5_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn truncated_parity() {
        let (alpha, beta, k) = (-0.1, 0.3, 0.9);
        let call = truncated_expectations(alpha, beta, k, OptionKind::Call).unwrap();
        let put = truncated_expectations(alpha, beta, k, OptionKind::Put).unwrap();
        let forward = (alpha + 0.5 * beta * beta).exp();
        assert!((call.payoff_expectation - put.payoff_expectation - (forward - k)).abs() < 1e-15);
        assert!(call.payoff_expectation >= 0.0 && put.payoff_expectation >= 0.0);
        assert!((call.prob + put.prob - 1.0).abs() < 1e-15);
        assert!(truncated_expectations(alpha, 0.0, k, OptionKind::Call).is_err());
    }
}
