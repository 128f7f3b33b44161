mod common;

use asian_boundary::expiry::{expiry_limit, h_equation_rhs, h_star, solve_geometric_transcendental};
use asian_boundary::integral::{european_value, price, DEFAULT_QUAD_NODES};
use asian_boundary::lognormal::{arithmetic_moments, geometric_params, truncated_expectations};
use asian_boundary::psor::{solve_psor, value_at, PsorGrid, PsorOptions};
use asian_boundary::{front_fixing, AveragingSpec, GridSpec, ModelParams, OptionKind};
use common::{integrate, phi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn big_phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Slope-constant equation in `theta = s^2`, integrated adaptively.
fn h_rhs_oracle(h: f64) -> f64 {
    let g = |s: f64| (1.0 - (1.0 - s * s).sqrt()) / s.max(1e-300);
    let cdf = integrate(|s| 2.0 * s * big_phi(-h * g(s)), 0.0, 1.0, 1e-14);
    let pdf = integrate(|s| 2.0 * (1.0 - s * s).max(0.0).sqrt() * phi(-h * g(s)), 0.0, 1.0, 1e-14);
    1.0 - cdf + h * pdf
}

#[test]
fn slope_constant_matches_independent_root() {
    let (mut lo, mut hi) = (-2.0, 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h_rhs_oracle(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    assert!((h_star() - oracle).abs() < 1e-9, "{} vs {oracle}", h_star());
    assert!(h_equation_rhs(h_star(), 512).abs() < 1e-8);
    assert!((h_rhs_oracle(-1.0) - h_equation_rhs(-1.0, 512)).abs() < 1e-10);
}

#[test]
fn geometric_expiry_root_residual() {
    for (r, q, t) in [(0.06, 0.04, 50.0), (0.1, 0.02, 1.0), (0.02, 0.08, 3.0), (0.9, 0.001, 200.0)] {
        let p = ModelParams::new(r, q, 0.2, t).unwrap();
        let x = solve_geometric_transcendental(&p).unwrap();
        assert!((x.ln() - q * t / x + r * t).abs() < 1e-12);
    }
    let p = ModelParams::new(0.07, 0.0, 0.3, 4.0).unwrap();
    let x = expiry_limit(&p, AveragingSpec::Geometric, OptionKind::Call).unwrap().x_star_t;
    assert!((x - (-0.28f64).exp()).abs() < 1e-12);
}

#[test]
fn truncated_expectations_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let alpha = rng.random_range(-1.0..1.0);
        let beta = rng.random_range(0.05..1.2);
        let strike = rng.random_range(0.5..2.0);
        for side in [OptionKind::Call, OptionKind::Put] {
            let e = truncated_expectations(alpha, beta, strike, side).unwrap();
            let zk = (f64::ln(strike) - alpha) / beta;
            let (a, b) = match side {
                OptionKind::Call => (zk.max(-40.0), 40.0 + 3.0 * beta),
                OptionKind::Put => (-40.0, zk.min(40.0 + 3.0 * beta)),
            };
            let rho = side.rho();
            let omega = |z: f64| (alpha + beta * z).exp();
            let q = |f: &dyn Fn(f64) -> f64| integrate(|z| f(z) * phi(z), a, b, 1e-14);
            let prob = q(&|_| 1.0);
            let mean = q(&|z| omega(z));
            let mean_log = q(&|z| omega(z) * (alpha + beta * z));
            let payoff = q(&|z| (rho * (omega(z) - strike)).max(0.0));
            for (got, want) in [
                (e.prob, prob),
                (e.mean_truncated, mean),
                (e.mean_log_truncated, mean_log),
                (e.payoff_expectation, payoff),
            ] {
                assert!((got - want).abs() < 1e-10, "{got} vs {want} at ({alpha}, {beta}, {strike})");
            }
        }
    }
}

/// `E[exp(sum a_k ln S_{s_k})]` with `S_t = 1` under the simulation measure.
fn log_linear_expectation(p: &ModelParams, t: f64, terms: &[(f64, f64)]) -> f64 {
    let c = p.r - p.q + 0.5 * p.sigma * p.sigma;
    let mean: f64 = terms.iter().map(|&(a, s)| a * c * (s - t)).sum();
    let mut var = 0.0;
    for &(a, s) in terms {
        for &(b, w) in terms {
            var += a * b * (s.min(w) - t);
        }
    }
    (mean + 0.5 * p.sigma * p.sigma * var).exp()
}

/// Moments of `x_u = (t x + int_t^u S_v dv) / (u S_u)` by direct integration.
fn moments_oracle(p: &ModelParams, t: f64, u: f64, x: f64) -> (f64, f64) {
    let e = |terms: &[(f64, f64)]| log_linear_expectation(p, t, terms);
    let m1 = (t * x * e(&[(-1.0, u)]) + integrate(|v| e(&[(1.0, v), (-1.0, u)]), t, u, 1e-15)) / u;
    let single = integrate(|v| e(&[(1.0, v), (-2.0, u)]), t, u, 1e-15);
    let double = integrate(
        |v| {
            // The covariance kernel min(v, w) has a kink at w = v.
            let inner = |w: f64| e(&[(1.0, v), (1.0, w), (-2.0, u)]);
            integrate(inner, t, v, 1e-15) + integrate(inner, v, u, 1e-15)
        },
        t,
        u,
        1e-14,
    );
    let m2 = (t * t * x * x * e(&[(-2.0, u)]) + 2.0 * t * x * single + double) / (u * u);
    (m1, m2)
}

#[test]
fn arithmetic_moments_match_direct_integration() {
    let sigma = 0.25_f64;
    let s2 = sigma * sigma;
    let mut cases = vec![(0.06, 0.04, 1.0, 2.0, 0.9), (0.03, 0.07, 0.5, 3.0, 1.2), (0.05, 0.0, 2.0, 2.1, 0.7)];
    // Carries at and next to the removable singularities.
    for carry in [0.0, 0.5 * s2, s2] {
        for eps in [0.0, 1e-9, -3e-7, 2e-4] {
            cases.push((0.08, 0.08 - carry - eps, 1.0, 1.8, 1.05));
        }
    }
    for (r, q, t, u, x) in cases {
        let p = ModelParams::new(r, q, sigma, 5.0).unwrap();
        let m = arithmetic_moments(t, u, x, &p).unwrap();
        let (m1, m2) = moments_oracle(&p, t, u, x);
        assert!((m.m1 / m1 - 1.0).abs() < 1e-10, "m1 {} vs {m1} at r-q = {}", m.m1, r - q);
        assert!((m.m2 / m2 - 1.0).abs() < 1e-9, "m2 {} vs {m2} at r-q = {}", m.m2, r - q);
    }
}

#[test]
fn geometric_law_matches_gaussian_calculus() {
    let p = ModelParams::new(0.05, 0.02, 0.3, 4.0).unwrap();
    let (t, u, x) = (0.7, 2.2, 0.85_f64);
    let c = p.r - p.q + 0.5 * p.sigma * p.sigma;
    let d = u - t;
    // ln x_u = (t ln x + int_t^u ln S_v dv) / u - ln S_u with S_t = 1.
    let mean = t * x.ln() / u + c * d * d / (2.0 * u) - c * d;
    let var = p.sigma.powi(2) * (d.powi(3) / (3.0 * u * u) - d * d / u + d);
    let g = geometric_params(t, u, x, &p).unwrap();
    assert!((g.alpha - mean).abs() < 1e-14);
    assert!((g.beta * g.beta - var).abs() < 1e-14);
}

#[test]
fn geometric_european_value_matches_density_integral() {
    let p = ModelParams::new(0.06, 0.03, 0.25, 2.0).unwrap();
    for (t, x, kind) in [(0.5, 0.9, OptionKind::Call), (1.5, 1.1, OptionKind::Call), (1.0, 1.2, OptionKind::Put)] {
        let g = geometric_params(t, p.maturity, x, &p).unwrap();
        let rho = kind.rho();
        // Integrate the in-the-money side only, which starts at the payoff kink.
        let zk = -g.alpha / g.beta;
        let (a, b) = match kind {
            OptionKind::Call => (-40.0, zk),
            OptionKind::Put => (zk, 40.0),
        };
        let payoff = |z: f64| rho * (1.0 - (g.alpha + g.beta * z).exp()) * phi(z);
        let oracle = (-p.q * p.maturity).exp() * integrate(payoff, a, b, 1e-14);
        let v = european_value(t, x, &p, AveragingSpec::Geometric, kind).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }
}

#[test]
fn psor_value_agrees_with_integral_representation() {
    let p = ModelParams::new(0.06, 0.0, 0.2, 1.0).unwrap();
    let ff = front_fixing::solve(
        &p,
        AveragingSpec::Arithmetic,
        &GridSpec::new(200, 4000, 2.0).unwrap(),
        &Default::default(),
    )
    .unwrap();
    let grid = PsorGrid::with_defaults(800, 2000).unwrap();
    let ps = solve_psor(
        &p,
        AveragingSpec::Arithmetic,
        &grid,
        &PsorOptions {
            snapshot_taus: vec![0.5],
            ..PsorOptions::default()
        },
    )
    .unwrap();
    let (t, x) = (0.5, 0.95);
    let d = price(t, x, &ff.boundary, &p, AveragingSpec::Arithmetic, OptionKind::Call, DEFAULT_QUAD_NODES).unwrap();
    // V = S e^{qt} V~ = A W(x, T - t) gives W = e^{qt} V~ / x.
    let w_integral = (p.q * t).exp() * d.total / x;
    let w_psor = value_at(&ps.surface, x, p.maturity - t).unwrap();
    assert!((w_integral - w_psor).abs() < 1e-2, "{w_integral} vs {w_psor}");
}
