//! Discretized early exercise boundary.

use crate::error::{invalid, Error, Result};

/// Early exercise boundary stored as `rho(tau)` on an increasing grid of
/// times to expiry, viewed in calendar time as `x*_t = 1 / rho(T - t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    maturity: f64,
    taus: Vec<f64>,
    rhos: Vec<f64>,
}

/// One node of a boundary curve in both time conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub t: f64,
    pub tau: f64,
    pub rho: f64,
    pub x_star: f64,
}

impl BoundaryCurve {
    pub fn new(maturity: f64, taus: Vec<f64>, rhos: Vec<f64>) -> Result<Self> {
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(invalid("maturity", format!("must be finite and > 0, got {maturity}")));
        }
        if taus.len() != rhos.len() {
            return Err(invalid(
                "boundary",
                format!("{} tau nodes but {} rho values", taus.len(), rhos.len()),
            ));
        }
        if taus.len() < 2 {
            return Err(invalid("boundary", "needs at least two nodes"));
        }
        if !(taus[0] >= 0.0) || !(taus[taus.len() - 1] <= maturity * (1.0 + 1e-12)) {
            return Err(invalid("boundary", format!("tau nodes must lie in [0, {maturity}]")));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("boundary", "tau nodes must be strictly increasing"));
        }
        if let Some(bad) = rhos.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(invalid("boundary", format!("rho values must be finite and > 0, got {bad}")));
        }
        Ok(Self { maturity, taus, rhos })
    }

    /// Builds a curve from calendar times `t` and boundary values `x*_t`.
    pub fn from_x_star(maturity: f64, ts: &[f64], x_stars: &[f64]) -> Result<Self> {
        if ts.len() != x_stars.len() {
            return Err(invalid("boundary", "time and value arrays differ in length"));
        }
        let mut pairs: Vec<(f64, f64)> = ts
            .iter()
            .zip(x_stars)
            .map(|(&t, &x)| (maturity - t, 1.0 / x))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (taus, rhos) = pairs.into_iter().unzip();
        Self::new(maturity, taus, rhos)
    }

    /// Flat curve `x*_t = x_star` on `[0, T]`.
    pub fn constant(maturity: f64, x_star: f64) -> Result<Self> {
        Self::new(maturity, vec![0.0, maturity], vec![1.0 / x_star; 2])
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn node(&self, i: usize) -> BoundaryNode {
        let (tau, rho) = (self.taus[i], self.rhos[i]);
        BoundaryNode {
            t: self.maturity - tau,
            tau,
            rho,
            x_star: 1.0 / rho,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = BoundaryNode> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    fn tau_tolerance(&self) -> f64 {
        1e-12 * self.maturity
    }

    /// Whether the curve is defined for every `t' in [t, T]`.
    pub fn covers(&self, t: f64) -> bool {
        let tol = self.tau_tolerance();
        self.taus[0] <= tol && self.taus[self.len() - 1] >= self.maturity - t - tol
    }

    /// `rho(tau)`, linear between nodes.
    pub fn rho_at(&self, tau: f64) -> Result<f64> {
        let tol = self.tau_tolerance();
        let (first, last) = (self.taus[0], self.taus[self.len() - 1]);
        if !(tau >= first - tol && tau <= last + tol) {
            return Err(Error::BoundaryCoverage {
                from: self.maturity - last,
                to: self.maturity - first,
            });
        }
        let tau = tau.clamp(first, last);
        let j = self.taus.partition_point(|&s| s <= tau);
        if j == 0 {
            return Ok(self.rhos[0]);
        }
        if j >= self.len() {
            return Ok(self.rhos[self.len() - 1]);
        }
        let (t0, t1) = (self.taus[j - 1], self.taus[j]);
        let w = (tau - t0) / (t1 - t0);
        Ok(self.rhos[j - 1] + w * (self.rhos[j] - self.rhos[j - 1]))
    }

    /// `x*_t = 1 / rho(T - t)`.
    pub fn x_star(&self, t: f64) -> Result<f64> {
        self.rho_at(self.maturity - t).map(|r| 1.0 / r)
    }

    /// Node with the smallest `x*_t`.
    pub fn min_x_star(&self) -> BoundaryNode {
        let i = self
            .rhos
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.node(i)
    }

    /// Curve with `x*` multiplied by `factor` at every node.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.maturity,
            self.taus.clone(),
            self.rhos.iter().map(|r| r / factor).collect(),
        )
    }
}
