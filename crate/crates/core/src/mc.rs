//! Monte Carlo simulation of `(S, A, x = A/S)` under the stock-numeraire
//! measure, used as an independent oracle for moments and European values.
//!
//! Each path `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`
//! (pair index `i` with antithetic variates). Paths are grouped in blocks of
//! [`BLOCK_PATHS`]; block sums are formed sequentially and combined in block
//! order, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::{AveragingSpec, ModelParams, OptionKind};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed), stream = path index, StandardNormal";
pub const BLOCK_PATHS: usize = 4096;
pub const DEFAULT_STEPS_PER_UNIT: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - value|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value).abs() / self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    /// Time steps over the whole horizon; `None` uses
    /// [`DEFAULT_STEPS_PER_UNIT`] per unit time.
    pub n_steps: Option<usize>,
    pub seed: u64,
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps: None,
            seed,
            antithetic: false,
        }
    }

    pub fn steps_for(&self, horizon: f64) -> usize {
        self.n_steps
            .unwrap_or_else(|| (DEFAULT_STEPS_PER_UNIT * horizon).ceil() as usize)
            .max(1)
    }
}

/// State at the end of one path, with `S_t0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEnd {
    pub x: f64,
    pub stock: f64,
}

#[derive(Debug, Clone, Copy)]
struct PathSpec {
    avg: AveragingSpec,
    t0: f64,
    x0: f64,
    dt: f64,
    steps: usize,
    drift: f64,
    vol: f64,
}

impl PathSpec {
    fn new(params: &ModelParams, avg: AveragingSpec, t0: f64, x0: f64, horizon: f64, steps: usize) -> Result<Self> {
        params.validate()?;
        avg.validate()?;
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(invalid("t0", format!("averages need t0 > 0, got {t0}")));
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(invalid("x0", format!("must be finite and > 0, got {x0}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        if steps == 0 {
            return Err(invalid("n_steps", "need at least one step"));
        }
        let dt = horizon / steps as f64;
        Ok(Self {
            avg,
            t0,
            x0,
            dt,
            steps,
            drift: (params.carry() + params.half_variance()) * dt,
            vol: params.sigma * dt.sqrt(),
        })
    }

    /// Runs one path; `sign` flips every normal draw.
    fn run(&self, rng: &mut ChaCha8Rng, sign: f64) -> PathEnd {
        let dt = self.dt;
        let mut log_s = 0.0_f64;
        let mut s = 1.0_f64;
        let mut t = self.t0;
        // Running integral of the averaging numerator, normalized below.
        let mut acc = match self.avg {
            AveragingSpec::Arithmetic => self.x0 * t,
            AveragingSpec::Geometric => self.x0.ln() * t,
            AveragingSpec::WeightedExponential { lambda } => self.x0 * -(-lambda * t).exp_m1(),
        };
        let decay = self.avg.lambda().map(|l| (-l * dt).exp()).unwrap_or(1.0);
        for _ in 0..self.steps {
            let z: f64 = rng.sample(StandardNormal);
            let log_next = log_s + self.drift + sign * self.vol * z;
            let s_next = log_next.exp();
            acc = match self.avg {
                AveragingSpec::Arithmetic => acc + 0.5 * dt * (s + s_next),
                AveragingSpec::Geometric => acc + 0.5 * dt * (log_s + log_next),
                AveragingSpec::WeightedExponential { lambda } => {
                    decay * acc + 0.5 * lambda * dt * (decay * s + s_next)
                }
            };
            log_s = log_next;
            s = s_next;
            t += dt;
        }
        let average = match self.avg {
            AveragingSpec::Arithmetic => acc / t,
            AveragingSpec::Geometric => (acc / t).exp(),
            AveragingSpec::WeightedExponential { lambda } => acc / -(-lambda * t).exp_m1(),
        };
        PathEnd { x: average / s, stock: s }
    }
}

fn path_rng(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Terminal ratios `x_{t0 + horizon}` of `n_paths` independent paths
/// started from `x_{t0} = x0`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_paths(
    params: &ModelParams,
    avg: AveragingSpec,
    t0: f64,
    x0: f64,
    horizon: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let spec = PathSpec::new(params, avg, t0, x0, horizon, n_steps)?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| spec.run(&mut path_rng(seed, i), 1.0).x)
        .collect())
}

/// Joint estimates of `K` path functionals over the same paths.
pub fn estimate<const K: usize, F>(
    params: &ModelParams,
    avg: AveragingSpec,
    t0: f64,
    x0: f64,
    horizon: f64,
    config: &McConfig,
    functional: F,
) -> Result<[McEstimate; K]>
where
    F: Fn(&PathEnd) -> [f64; K] + Sync,
{
    let spec = PathSpec::new(params, avg, t0, x0, horizon, config.steps_for(horizon))?;
    if config.n_paths < 2 {
        return Err(invalid("n_paths", "need at least two samples"));
    }
    // With antithetic variates one sample is the mean over a mirrored pair.
    let samples = if config.antithetic {
        config.n_paths.div_ceil(2)
    } else {
        config.n_paths
    };
    let sample = |i: usize| -> [f64; K] {
        if config.antithetic {
            let a = functional(&spec.run(&mut path_rng(config.seed, i), 1.0));
            let b = functional(&spec.run(&mut path_rng(config.seed, i), -1.0));
            std::array::from_fn(|j| 0.5 * (a[j] + b[j]))
        } else {
            functional(&spec.run(&mut path_rng(config.seed, i), 1.0))
        }
    };
    let blocks: Vec<([f64; K], [f64; K])> = (0..samples.div_ceil(BLOCK_PATHS))
        .into_par_iter()
        .map(|b| {
            let mut sum = [0.0; K];
            let mut sq = [0.0; K];
            for i in b * BLOCK_PATHS..((b + 1) * BLOCK_PATHS).min(samples) {
                let v = sample(i);
                for j in 0..K {
                    sum[j] += v[j];
                    sq[j] += v[j] * v[j];
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = [0.0; K];
    let mut sq = [0.0; K];
    for (s, q) in &blocks {
        for j in 0..K {
            sum[j] += s[j];
            sq[j] += q[j];
        }
    }
    let n = samples as f64;
    Ok(std::array::from_fn(|j| {
        let mean = sum[j] / n;
        let var = ((sq[j] - n * mean * mean) / (n - 1.0)).max(0.0);
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
            n_paths: config.n_paths,
            seed: config.seed,
        }
    }))
}

/// Estimates of `E_t[x_u]` and `E_t[x_u^2]` given `x_t = x`.
pub fn mc_moments(
    params: &ModelParams,
    avg: AveragingSpec,
    t: f64,
    u: f64,
    x: f64,
    config: &McConfig,
) -> Result<[McEstimate; 2]> {
    estimate(params, avg, t, x, u - t, config, |e| [e.x, e.x * e.x])
}

/// `e^{-qT} E[(rho (1 - x_T))^+]` given `x_{t0} = x0`.
pub fn mc_european_value(
    params: &ModelParams,
    avg: AveragingSpec,
    t0: f64,
    x0: f64,
    kind: OptionKind,
    config: &McConfig,
) -> Result<McEstimate> {
    let rho = kind.rho();
    let discount = (-params.q * params.maturity).exp();
    let [v] = estimate(params, avg, t0, x0, params.maturity - t0, config, |e| {
        [discount * (rho * (1.0 - e.x)).max(0.0)]
    })?;
    Ok(v)
}

/// `E[(S_t / S_u) e^{(r-q)(u-t)}]`, equal to 1 under the simulation measure.
pub fn martingale_check(params: &ModelParams, t0: f64, horizon: f64, config: &McConfig) -> Result<McEstimate> {
    let growth = (params.carry() * horizon).exp();
    let [v] = estimate(params, AveragingSpec::Arithmetic, t0, 1.0, horizon, config, |e| {
        [growth / e.stock]
    })?;
    Ok(v)
}
