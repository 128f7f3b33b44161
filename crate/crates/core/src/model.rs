//! Market and contract parameters, averaging kernels and the coefficient
//! functions of the transformed portfolio equation.
//!
//! All times are in years. The similarity variable is `x = A / S`, the ratio
//! of the running average to the spot price.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// Market and contract parameters shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Risk-free rate.
    pub r: f64,
    /// Continuous dividend yield.
    pub q: f64,
    /// Volatility of the underlying.
    pub sigma: f64,
    /// Maturity `T`.
    pub maturity: f64,
}

impl ModelParams {
    pub fn new(r: f64, q: f64, sigma: f64, maturity: f64) -> Result<Self> {
        let params = Self {
            r,
            q,
            sigma,
            maturity,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(invalid("r", format!("must be finite and > 0, got {}", self.r)));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(invalid("q", format!("must be finite and >= 0, got {}", self.q)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(
                "sigma",
                format!("must be finite and > 0, got {}", self.sigma),
            ));
        }
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(invalid(
                "T",
                format!("must be finite and > 0, got {}", self.maturity),
            ));
        }
        Ok(())
    }

    /// Net carry `r - q`.
    pub fn carry(&self) -> f64 {
        self.r - self.q
    }

    pub fn half_variance(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    /// Parameters of the equivalent problem with unit maturity:
    /// `(T, r, q, sigma^2) -> (1, rT, qT, sigma^2 T)`.
    pub fn rescaled_to_unit_maturity(&self) -> Self {
        Self {
            r: self.r * self.maturity,
            q: self.q * self.maturity,
            sigma: self.sigma * self.maturity.sqrt(),
            maturity: 1.0,
        }
    }
}

/// Call or put on the floating strike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    /// `+1` for a call, `-1` for a put.
    pub fn rho(self) -> f64 {
        match self {
            OptionKind::Call => 1.0,
            OptionKind::Put => -1.0,
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

impl std::str::FromStr for OptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" => Ok(OptionKind::Call),
            "put" => Ok(OptionKind::Put),
            other => Err(invalid("kind", format!("expected call|put, got `{other}`"))),
        }
    }
}

/// Continuous averaging operator defining the floating strike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AveragingSpec {
    /// `A_t = (1/t) * int_0^t S_u du`.
    Arithmetic,
    /// `ln A_t = (1/t) * int_0^t ln S_u du`.
    Geometric,
    /// Arithmetic average under the kernel `a(s) = exp(-lambda s)`.
    WeightedExponential { lambda: f64 },
}

impl AveragingSpec {
    pub fn weighted(lambda: f64) -> Result<Self> {
        let spec = AveragingSpec::WeightedExponential { lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let AveragingSpec::WeightedExponential { lambda } = *self {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(invalid(
                    "lambda",
                    format!("decay rate must be finite and > 0, got {lambda}"),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AveragingSpec::Arithmetic => "arith",
            AveragingSpec::Geometric => "geom",
            AveragingSpec::WeightedExponential { .. } => "weighted",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            AveragingSpec::WeightedExponential { lambda } => Some(lambda),
            _ => None,
        }
    }

    /// Parses `arith | geom | weighted`; `lambda` is required for `weighted`.
    pub fn parse(method: &str, lambda: Option<f64>) -> Result<Self> {
        let spec = match method.trim().to_ascii_lowercase().as_str() {
            "arith" | "arithmetic" => AveragingSpec::Arithmetic,
            "geom" | "geometric" => AveragingSpec::Geometric,
            "weighted" => {
                let lambda = lambda.ok_or_else(|| {
                    invalid("lambda", "weighted averaging requires a decay rate")
                })?;
                AveragingSpec::WeightedExponential { lambda }
            }
            other => {
                return Err(invalid(
                    "avg",
                    format!("expected arith|geom|weighted, got `{other}`"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for AveragingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Discretization of the transformed domain `(0, L) x (0, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of spatial steps.
    pub n: usize,
    /// Number of time steps.
    pub m: usize,
    /// Upper end `L` of the truncated spatial domain.
    pub domain_length: f64,
}

impl GridSpec {
    pub const DEFAULT_DOMAIN_LENGTH: f64 = 2.0;

    pub fn new(n: usize, m: usize, domain_length: f64) -> Result<Self> {
        let grid = Self {
            n,
            m,
            domain_length,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(invalid("n", format!("need at least 8 spatial steps, got {}", self.n)));
        }
        if self.m < 8 {
            return Err(invalid("m", format!("need at least 8 time steps, got {}", self.m)));
        }
        if !(self.domain_length.is_finite() && self.domain_length > 0.0) {
            return Err(invalid(
                "L",
                format!("must be finite and > 0, got {}", self.domain_length),
            ));
        }
        Ok(())
    }

    /// Spatial step `h = L / n`.
    pub fn space_step(&self) -> f64 {
        self.domain_length / self.n as f64
    }

    /// Time step `k = T / m`.
    pub fn time_step(&self, maturity: f64) -> f64 {
        maturity / self.m as f64
    }
}

/// `1 - exp(-lambda t)` without cancellation for small arguments.
fn weight_mass(lambda: f64, t: f64) -> f64 {
    -(-lambda * t).exp_m1()
}

/// Drift kernel `f(x, t)` with `dA/A = f(A/S, t) dt`.
pub fn averaging_drift(avg: AveragingSpec, x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("averaging drift needs x > 0, got {x}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("averaging drift needs t > 0, got {t}")));
    }
    Ok(match avg {
        AveragingSpec::Arithmetic => (1.0 / x - 1.0) / t,
        AveragingSpec::Geometric => -x.ln() / t,
        AveragingSpec::WeightedExponential { lambda } => {
            lambda * (1.0 / x - 1.0) / weight_mass(lambda, t)
        }
    })
}

fn remaining_time(params: &ModelParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("tau must be >= 0, got {tau}")));
    }
    let t = params.maturity - tau;
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "coefficients are singular at tau >= T (tau = {tau}, T = {})",
            params.maturity
        )));
    }
    Ok(t)
}

/// Reaction coefficient `b(xi, tau) = r - d/dx (x f(x, T - tau))` at
/// `x = exp(xi) / rho`.
pub fn reaction_coefficient(
    avg: AveragingSpec,
    params: &ModelParams,
    xi: f64,
    tau: f64,
    rho: f64,
) -> Result<f64> {
    let t = remaining_time(params, tau)?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("boundary position must be > 0, got {rho}")));
    }
    Ok(match avg {
        AveragingSpec::Arithmetic => params.r + 1.0 / t,
        // x f = -x ln x / t, so d/dx (x f) = -(ln x + 1) / t with ln x = xi - ln rho.
        AveragingSpec::Geometric => params.r + (xi - rho.ln() + 1.0) / t,
        AveragingSpec::WeightedExponential { lambda } => params.r + lambda / weight_mass(lambda, t),
    })
}

/// Convection coefficient `a(xi, tau)` given the logarithmic boundary
/// velocity `rho'(tau) / rho(tau)`.
pub fn convection_coefficient(
    avg: AveragingSpec,
    params: &ModelParams,
    xi: f64,
    tau: f64,
    rho: f64,
    velocity: f64,
) -> Result<f64> {
    let t = remaining_time(params, tau)?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("boundary position must be > 0, got {rho}")));
    }
    let f = averaging_drift(avg, xi.exp() / rho, t)?;
    Ok(velocity + params.carry() - params.half_variance() - f)
}
