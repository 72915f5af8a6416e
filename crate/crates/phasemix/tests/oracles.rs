//! Oracle tests: every value checked here is produced by an independent
//! brute-force route (trapezoid integration, bisection, partial summation,
//! Monte Carlo) that shares no code with the implementation path it checks.

use phasemix::mixture::MixtureModel;
use phasemix::phase::PhaseType;
use phasemix::scaler::Scaler;
use phasemix::special;

/// High-resolution trapezoid rule on a fixed interval.
fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

#[test]
fn bessel_k_against_integral_representation() {
    // K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt. The integrand decays
    // doubly exponentially; truncating at t = 12 leaves less than e^{-z e^12/2}.
    let oracle = |nu: f64, z: f64| trapezoid(|t| (-z * t.cosh()).exp() * (nu * t).cosh(), 0.0, 12.0, 400_000);
    for (nu, z) in [(1.0, 2.0), (0.0, 1.0), (2.5, 4.0), (0.3, 0.7)] {
        let want = oracle(nu, z);
        let got = special::bessel_k(nu, z).unwrap();
        assert!(
            ((got - want) / want).abs() < 1e-10,
            "K_{nu}({z}): {got} vs oracle {want}"
        );
    }
}

#[test]
fn lambert_w_against_bisection() {
    // Root of w e^w = 1 on [0, 1] by plain bisection to 1e-12.
    let target = 1.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let got = special::lambert_w(1.0).unwrap();
    assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
}

#[test]
fn zeta_against_partial_summation() {
    // Direct sum of 10^6 terms plus the integral tail bracket.
    let alpha = 2.5f64;
    let n = 1_000_000u64;
    let mut partial = 0.0;
    for i in (1..=n).rev() {
        partial += (i as f64).powf(-alpha);
    }
    // N^{1-a}/(a-1) <= tail <= (N+1)^{1-a}/(a-1) + N^{-a} style bracket;
    // use the midpoint of integral bounds.
    let lo_tail = ((n + 1) as f64).powf(1.0 - alpha) / (alpha - 1.0);
    let hi_tail = (n as f64).powf(1.0 - alpha) / (alpha - 1.0);
    let got = special::riemann_zeta(alpha).unwrap();
    assert!(
        got > partial + lo_tail - 1e-10 && got < partial + hi_tail + 1e-10,
        "zeta(2.5) = {got} outside [{}, {}]",
        partial + lo_tail,
        partial + hi_tail
    );
}

#[test]
fn fractional_moment_against_trapezoid() {
    // Erlang(2,1): M(2.5) = int x^{2.5} x e^{-x} dx, brute-forced on [0, 60].
    let g = PhaseType::erlang(2, 1.0).unwrap();
    let oracle = trapezoid(|x| x.powf(2.5) * x * (-x).exp(), 0.0, 60.0, 2_000_000);
    let got = g.fractional_moment(2.5).unwrap();
    assert!(
        ((got - oracle) / oracle).abs() < 1e-8,
        "{got} vs oracle {oracle}"
    );
}

#[test]
fn pareto_reciprocal_laplace_against_quadrature_oracle() {
    // int_1^inf e^{-1/s} 2 s^{-3} ds, substituted to w = 1/s:
    // int_0^1 2 w e^{-w} dw, trapezoid at 1e-10.
    let oracle = trapezoid(|w| 2.0 * w * (-w).exp(), 0.0, 1.0, 1_000_000);
    let closed = 2.0 * (1.0 - 2.0 / std::f64::consts::E);
    assert!((oracle - closed).abs() < 1e-10);
    let h = Scaler::pareto(2.0).unwrap();
    let got = h.reciprocal_laplace().value(1.0).unwrap();
    assert!(
        ((got - oracle) / oracle).abs() < 1e-9,
        "{got} vs oracle {oracle}"
    );
}

#[test]
fn mixture_tail_against_monte_carlo() {
    // G = exp(1), H = Pareto(2), x = 50: quadrature against 10^7 simulated
    // products with a Wilson 99.9% bracket.
    let m = MixtureModel::with_defaults(
        PhaseType::exponential(1.0).unwrap(),
        Scaler::pareto(2.0).unwrap(),
    )
    .unwrap();
    let x = 50.0;
    let n = 10_000_000usize;
    let hits = m.sample(20_260_810, n).iter().filter(|&&v| v > x).count();
    let (lo, hi) = wilson_interval(hits, n, 3.2905);
    let got = m.tail(x).unwrap();
    assert!(
        got > lo && got < hi,
        "tail {got} outside Wilson bracket [{lo}, {hi}] (hits {hits})"
    );
}

#[test]
fn zipf_mixture_density_against_histogram() {
    // G = Erlang(2,1), H = Zipf(3), x = 5: series density against a plain
    // counting histogram of 10^7 draws in a +-0.05 window.
    let m = MixtureModel::with_defaults(
        PhaseType::erlang(2, 1.0).unwrap(),
        Scaler::zipf(3.0).unwrap(),
    )
    .unwrap();
    let x = 5.0;
    let delta = 0.05;
    let n = 10_000_000usize;
    let hits = m
        .sample(777_001, n)
        .iter()
        .filter(|&&v| v > x - delta && v <= x + delta)
        .count();
    let p_hat = hits as f64 / n as f64;
    let density_est = p_hat / (2.0 * delta);
    let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt() / (2.0 * delta);
    let got = m.density(x).unwrap();
    // 4 standard errors plus a small window-curvature allowance.
    let bias_allowance = 0.01 * got;
    assert!(
        (got - density_est).abs() < 4.0 * se + bias_allowance,
        "density {got} vs histogram {density_est} (se {se})"
    );
}

#[test]
fn exponential_mixture_density_against_bessel_difference() {
    // f(1) for exp-exp should match the centered difference of the closed
    // Bessel tail to 1e-4.
    let m = MixtureModel::with_defaults(
        PhaseType::exponential(1.0).unwrap(),
        Scaler::exponential(1.0).unwrap(),
    )
    .unwrap();
    let closed_tail = |x: f64| {
        let u = 2.0 * x.sqrt();
        u * special::bessel_k(1.0, u).unwrap()
    };
    let h = 1e-5;
    let fd = (closed_tail(1.0 - h) - closed_tail(1.0 + h)) / (2.0 * h);
    let got = m.density(1.0).unwrap();
    assert!((got - fd).abs() < 1e-4, "{got} vs {fd}");
}

#[test]
fn weibull_and_gamma_mixture_tails_against_monte_carlo() {
    // The quadrature path for the remaining continuous families, against
    // 10^6 simulated products.
    let fixtures = [
        MixtureModel::with_defaults(
            PhaseType::erlang(2, 1.0).unwrap(),
            Scaler::new(phasemix::ScalerFamily::Weibull {
                scale: 1.0,
                shape: 0.7,
            })
            .unwrap(),
        )
        .unwrap(),
        MixtureModel::with_defaults(
            PhaseType::exponential(1.0).unwrap(),
            Scaler::new(phasemix::ScalerFamily::Gamma {
                shape: 2.0,
                rate: 1.5,
            })
            .unwrap(),
        )
        .unwrap(),
    ];
    let n = 1_000_000usize;
    for (i, m) in fixtures.iter().enumerate() {
        let draws = m.sample(555_000 + i as u64, n);
        for &x in &[1.0, 5.0, 20.0] {
            let tail = m.tail(x).unwrap();
            let hits = draws.iter().filter(|&&v| v > x).count();
            let (lo, hi) = wilson_interval(hits, n, 3.89); // 99.99% two-sided
            assert!(
                tail > lo && tail < hi,
                "fixture {i} x={x}: tail {tail} outside [{lo}, {hi}]"
            );
        }
    }
}

fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    let nf = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (center - half, center + half)
}
