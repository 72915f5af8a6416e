//! Phase-type scale mixtures F(x) = int G(x/s) dH(s): tail, density, moments,
//! sampling, and the sum-vs-integral bounding machinery for discrete scalers.
//!
//! Continuous scalers are integrated by peak-split double-exponential
//! quadrature. Zipf series converge only polynomially, so their tails are
//! summed explicitly up to a cutoff and closed with Euler-Maclaurin smooth
//! remainders of the spectral terms; geometric series are summed directly
//! with the leftover scaler mass as the certificate.

use crate::error::{Error, Result};
use crate::phase::PhaseType;
use crate::quad::{exp_sinh, golden_section_max, integrate_peaked, tanh_sinh, QuadPolicy};
use crate::scaler::{smooth_power_tail, Scaler, ScalerFamily, ScalerKind};
use crate::spectral::{ph_spectral, SpectralForm};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Numerical policy for mixture evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct MixturePolicy {
    /// Relative tolerance for quadrature refinement.
    pub quadrature_tolerance: f64,
    /// Maximum refinement levels for the double-exponential rules.
    pub max_subdivisions: usize,
    /// Relative truncation tolerance for discrete series.
    pub series_tolerance: f64,
}

impl Default for MixturePolicy {
    fn default() -> Self {
        Self {
            quadrature_tolerance: 1e-10,
            max_subdivisions: 12,
            series_tolerance: 1e-10,
        }
    }
}

impl MixturePolicy {
    fn validate(&self) -> Result<()> {
        if !(self.quadrature_tolerance > 0.0) || !(self.series_tolerance > 0.0) {
            return Err(Error::InvalidModel(
                "mixture policy tolerances must be > 0".into(),
            ));
        }
        Ok(())
    }

    fn quad(&self) -> QuadPolicy {
        QuadPolicy {
            rel_tol: self.quadrature_tolerance,
            abs_floor: 1e-280,
            max_level: self.max_subdivisions,
        }
    }
}

/// A phase-type scale mixture model.
#[derive(Debug)]
pub struct MixtureModel {
    ph: PhaseType,
    scaler: Scaler,
    policy: MixturePolicy,
    spectral_cache: std::sync::OnceLock<SpectralForm>,
}

impl Clone for MixtureModel {
    fn clone(&self) -> Self {
        Self {
            ph: self.ph.clone(),
            scaler: self.scaler.clone(),
            policy: self.policy.clone(),
            spectral_cache: std::sync::OnceLock::new(),
        }
    }
}

impl MixtureModel {
    pub fn new(ph: PhaseType, scaler: Scaler, policy: MixturePolicy) -> Result<Self> {
        policy.validate()?;
        Ok(Self {
            ph,
            scaler,
            policy,
            spectral_cache: std::sync::OnceLock::new(),
        })
    }

    pub fn with_defaults(ph: PhaseType, scaler: Scaler) -> Result<Self> {
        Self::new(ph, scaler, MixturePolicy::default())
    }

    pub fn ph(&self) -> &PhaseType {
        &self.ph
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn policy(&self) -> &MixturePolicy {
        &self.policy
    }

    /// Spectral form of the phase-type component (computed once per model).
    pub fn spectral(&self) -> Result<&SpectralForm> {
        if let Some(s) = self.spectral_cache.get() {
            return Ok(s);
        }
        let s = ph_spectral(&self.ph)?;
        Ok(self.spectral_cache.get_or_init(|| s))
    }

    /// Mixture tail F̄(x) = int Ḡ(x/s) dH(s).
    pub fn tail(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::DomainError(format!("tail requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        let v = match (&self.scaler.kind(), self.scaler.family()) {
            (_, ScalerFamily::PointMass { value }) => self.ph.tail(x / value)?,
            (_, ScalerFamily::FiniteDiscrete { points, probs }) => {
                let mut acc = 0.0;
                for (&s, &p) in points.iter().zip(probs) {
                    acc += p * self.ph.tail(x / s)?;
                }
                acc
            }
            (ScalerKind::Discrete, _) => self.series_value(x, SeriesTarget::Tail)?,
            (ScalerKind::Continuous, _) => {
                let f = |s: f64| {
                    let h = self.scaler.density(s);
                    if h == 0.0 {
                        return 0.0;
                    }
                    // A matexp failure only occurs for enormous scaled
                    // arguments, where the true tail is below underflow.
                    h * self.ph.tail(x / s).unwrap_or(0.0)
                };
                integrate_peaked(
                    f,
                    self.scaler.support().lower,
                    f64::INFINITY,
                    &self.policy.quad(),
                )?
            }
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Mixture density f(x) = int g(x/s) / s dH(s), x > 0.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::DomainError(format!(
                "density requires x > 0, got {x}"
            )));
        }
        let v = match (&self.scaler.kind(), self.scaler.family()) {
            (_, ScalerFamily::PointMass { value }) => self.ph.density(x / value)? / value,
            (_, ScalerFamily::FiniteDiscrete { points, probs }) => {
                let mut acc = 0.0;
                for (&s, &p) in points.iter().zip(probs) {
                    acc += p * self.ph.density(x / s)? / s;
                }
                acc
            }
            (ScalerKind::Discrete, _) => self.series_value(x, SeriesTarget::Density)?,
            (ScalerKind::Continuous, _) => {
                let f = |s: f64| {
                    let h = self.scaler.density(s);
                    if h == 0.0 {
                        return 0.0;
                    }
                    h * self.ph.density(x / s).unwrap_or(0.0) / s
                };
                integrate_peaked(
                    f,
                    self.scaler.support().lower,
                    f64::INFINITY,
                    &self.policy.quad(),
                )?
            }
        };
        Ok(v.max(0.0))
    }

    /// E[(S Y)^n] = E[S^n] E[Y^n]; infinite scaler moments propagate.
    pub fn moment(&self, n: u32) -> Result<f64> {
        let ph_m = self.ph.moment(n, 1.0)?;
        let s_m = self.scaler.moment(n as f64)?;
        Ok(ph_m * s_m)
    }

    /// Draw `count` products S * Y from independent seeded streams.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng_s = ChaCha12Rng::seed_from_u64(seed);
        rng_s.set_stream(1);
        let mut rng_y = ChaCha12Rng::seed_from_u64(seed);
        rng_y.set_stream(2);
        (0..count)
            .map(|_| self.scaler.sample_one(&mut rng_s) * self.ph.sample_one(&mut rng_y))
            .collect()
    }

    /// Series evaluation for Zipf and geometric scalers with a certified
    /// truncation: explicit terms plus an analytic smooth remainder (Zipf)
    /// or a leftover-mass majorant (geometric).
    fn series_value(&self, x: f64, target: SeriesTarget) -> Result<f64> {
        match self.scaler.family() {
            ScalerFamily::Zipf { alpha } => {
                let alpha = *alpha;
                let spectral = self.spectral()?.clone();
                self.zipf_series(x, alpha, &spectral, target)
            }
            ScalerFamily::Geometric { p } => self.geometric_series(x, *p, target),
            _ => Err(Error::InvalidModel(
                "series evaluation requires a zipf or geometric scaler".into(),
            )),
        }
    }

    fn zipf_series(
        &self,
        x: f64,
        alpha: f64,
        spectral: &SpectralForm,
        target: SeriesTarget,
    ) -> Result<f64> {
        let zeta = crate::special::riemann_zeta(alpha)?;
        // Sum explicit terms past every spectral peak, then close each
        // x^k e^{-lambda x / y} y^{-alpha} component with its smooth tail.
        let mut peak = 128.0f64;
        for term in &spectral.terms {
            peak = peak.max(6.0 * term.rate * x / alpha);
        }
        let n = peak.ceil().min(2e6) as u64;
        let mut sum = 0.0;
        for i in 1..=n {
            let fi = i as f64;
            let weight = fi.powf(-alpha) / zeta;
            let contrib = match target {
                SeriesTarget::Tail => self.ph.tail(x / fi)?,
                SeriesTarget::Density => self.ph.density(x / fi)? / fi,
            };
            sum += weight * contrib;
        }
        // Smooth remainder per spectral term. Tail terms are
        // c_{jk} x^k y^{-(alpha+k)} e^{-lambda_j x / y}; density terms come
        // from g = -d tail/dx.
        let nf = n as f64;
        let mut remainder = 0.0;
        for term in &spectral.terms {
            let theta = term.rate * x;
            for (k, &c) in term.coeffs.iter().enumerate() {
                let kf = k as f64;
                match target {
                    SeriesTarget::Tail => {
                        remainder +=
                            c * x.powf(kf) * smooth_power_tail(alpha + kf, theta, nf) / zeta;
                    }
                    SeriesTarget::Density => {
                        // g(u) = sum c_{jk} (lambda_j u^k - k u^{k-1}) e^{-lambda_j u}
                        // evaluated at u = x/y, divided by y.
                        remainder += c
                            * term.rate
                            * x.powf(kf)
                            * smooth_power_tail(alpha + kf + 1.0, theta, nf)
                            / zeta;
                        if k > 0 {
                            remainder -= c
                                * kf
                                * x.powf(kf - 1.0)
                                * smooth_power_tail(alpha + kf, theta, nf)
                                / zeta;
                        }
                    }
                }
            }
        }
        let total = sum + remainder;
        // The smooth closure must stay a small correction; a blow-up signals
        // a peak the cutoff logic missed.
        if remainder.abs() > total.abs().max(1e-300) {
            return Err(Error::TruncationBoundViolated(format!(
                "smooth remainder {remainder:.3e} dominates series value {total:.3e} at x={x}"
            )));
        }
        Ok(total)
    }

    fn geometric_series(&self, x: f64, p: f64, target: SeriesTarget) -> Result<f64> {
        let q = 1.0 - p;
        let tol = self.policy.series_tolerance;
        // Remaining terms are bounded by the leftover scaler mass times the
        // sup of the summand factor: 1 for the tail, the density sup for
        // densities (y >= 1 divides it away).
        let factor_bound = match target {
            SeriesTarget::Tail => 1.0,
            SeriesTarget::Density => {
                self.ph.exit_vector().iter().cloned().fold(1.0f64, f64::max)
            }
        };
        let mut sum = 0.0;
        let mut weight = p;
        let mut i = 1u64;
        loop {
            let fi = i as f64;
            let contrib = match target {
                SeriesTarget::Tail => self.ph.tail(x / fi)?,
                SeriesTarget::Density => self.ph.density(x / fi)? / fi,
            };
            sum += weight * contrib;
            let leftover = weight * q / p * factor_bound;
            if leftover < tol * sum.max(1e-300) {
                break;
            }
            if i > 50_000_000 {
                return Err(Error::TruncationBoundViolated(format!(
                    "geometric series did not certify truncation at x={x}"
                )));
            }
            weight *= q;
            i += 1;
        }
        Ok(sum)
    }
}

#[derive(Clone, Copy)]
enum SeriesTarget {
    Tail,
    Density,
}

/// Bracketing of an infinite sum by its integral and peak value.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesBounds {
    pub lower: f64,
    pub upper: f64,
    pub integral_value: f64,
    pub peak_value: f64,
    pub peak_location: f64,
}

/// Bound sum_{i >= 1} g(i) for a nonnegative Riemann-integrable summand with
/// a single interior maximum:
///
/// ```text
/// int_0^inf g - g(y*)  <=  sum_{i>=1} g(i)  <=  int_0^inf g + g(y*)
/// ```
///
/// Unimodality is checked by a 256-point log-spaced coarse scan. When the
/// maximum sits at the boundary y <= 1 the summand is decreasing on [1, inf)
/// and the monotone integral test is used instead:
/// int_1^inf g <= sum <= g(1) + int_1^inf g.
pub fn series_bounds<F: Fn(f64) -> f64>(g: F, policy: &QuadPolicy) -> Result<SeriesBounds> {
    let scan_lo = 1e-6f64;
    let scan_hi = 1e12f64;
    let n = 256;
    let mut values = Vec::with_capacity(n + 1);
    let log_lo = scan_lo.ln();
    let log_hi = scan_hi.ln();
    for i in 0..=n {
        let y = (log_lo + (log_hi - log_lo) * i as f64 / n as f64).exp();
        values.push((y, g(y)));
    }
    if values.iter().all(|&(_, v)| v == 0.0) {
        return Ok(SeriesBounds {
            lower: 0.0,
            upper: 0.0,
            integral_value: 0.0,
            peak_value: 0.0,
            peak_location: 0.0,
        });
    }
    // Count strict local maxima among interior scan points with a relative
    // slack to ignore flat noise.
    let mut maxima = 0usize;
    let peak_scan = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * peak_scan;
    for i in 1..values.len() - 1 {
        if values[i].1 > values[i - 1].1 + slack && values[i].1 > values[i + 1].1 + slack {
            maxima += 1;
        }
    }
    if maxima > 1 {
        return Err(Error::UnimodalityCheckFailed(format!(
            "coarse scan found {maxima} local maxima"
        )));
    }

    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let bracket_lo = values[best.saturating_sub(1)].0;
    let bracket_hi = values[(best + 1).min(values.len() - 1)].0;
    let peak_location = golden_section_max(&g, bracket_lo, bracket_hi, 100);
    let peak_value = g(peak_location);

    if peak_location <= 1.0 {
        // Boundary maximum: g is decreasing on [1, inf).
        let integral = exp_sinh(&g, 1.0, policy)?;
        let g1 = g(1.0);
        return Ok(SeriesBounds {
            lower: integral,
            upper: integral + g1,
            integral_value: integral,
            peak_value: g1,
            peak_location: 1.0,
        });
    }

    let left = tanh_sinh(&g, 0.0, peak_location, policy)?;
    let right = exp_sinh(&g, peak_location, policy)?;
    let integral = left + right;
    Ok(SeriesBounds {
        lower: (integral - peak_value).max(0.0),
        upper: integral + peak_value,
        integral_value: integral,
        peak_value,
        peak_location,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_k;

    fn exp_exp(lambda: f64, beta: f64) -> MixtureModel {
        MixtureModel::with_defaults(
            PhaseType::exponential(lambda).unwrap(),
            Scaler::exponential(beta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn tail_at_zero_is_exactly_one() {
        let m = exp_exp(1.0, 1.0);
        assert_eq!(m.tail(0.0).unwrap(), 1.0);
    }

    #[test]
    fn exponential_mixture_matches_bessel_closed_form() {
        // F̄(x) = 2 sqrt(beta lambda x) K_1(2 sqrt(beta lambda x))
        for &(lambda, beta) in &[(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
            let m = exp_exp(lambda, beta);
            for &x in &[0.1, 1.0, 10.0, 50.0] {
                let u = 2.0 * (beta * lambda * x).sqrt();
                let want = u * bessel_k(1.0, u).unwrap();
                let got = m.tail(x).unwrap();
                assert!(
                    ((got - want) / want).abs() < 1e-6,
                    "lambda={lambda} beta={beta} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn point_mass_degenerates_to_scaled_ph() {
        let g = PhaseType::erlang(2, 1.0).unwrap();
        let m = MixtureModel::with_defaults(g.clone(), Scaler::point_mass(2.0).unwrap()).unwrap();
        for &x in &[0.5, 1.0, 3.0] {
            assert!((m.tail(x).unwrap() - g.tail(x / 2.0).unwrap()).abs() < 1e-14);
            assert!(
                (m.density(x).unwrap() - g.density(x / 2.0).unwrap() / 2.0).abs() < 1e-14
            );
        }
    }

    #[test]
    fn density_consistent_with_tail_derivative() {
        let m = exp_exp(1.0, 1.0);
        let x = 1.0;
        let h = 1e-4;
        let fd = (m.tail(x - h).unwrap() - m.tail(x + h).unwrap()) / (2.0 * h);
        let d = m.density(x).unwrap();
        assert!((fd - d).abs() < 1e-4, "{fd} vs {d}");
    }

    #[test]
    fn finite_discrete_is_exact_finite_sum() {
        let g = PhaseType::erlang(2, 1.0).unwrap();
        let h = Scaler::new(ScalerFamily::FiniteDiscrete {
            points: vec![1.0, 2.0, 3.0],
            probs: vec![0.2, 0.3, 0.5],
        })
        .unwrap();
        let m = MixtureModel::with_defaults(g.clone(), h).unwrap();
        let x = 2.5;
        let direct = 0.2 * g.tail(x / 1.0).unwrap()
            + 0.3 * g.tail(x / 2.0).unwrap()
            + 0.5 * g.tail(x / 3.0).unwrap();
        assert_eq!(m.tail(x).unwrap(), direct.clamp(0.0, 1.0));
    }

    #[test]
    fn bounded_scaler_dominated_by_endpoint_scaling() {
        // F̄(x) <= Ḡ(x / s_H) for bounded scalers.
        let g = PhaseType::hyperexponential(&[0.4, 0.6], &[1.0, 3.0]).unwrap();
        let h = Scaler::new(ScalerFamily::FiniteDiscrete {
            points: vec![0.5, 1.5, 3.0],
            probs: vec![0.25, 0.5, 0.25],
        })
        .unwrap();
        let m = MixtureModel::with_defaults(g.clone(), h).unwrap();
        for i in 1..=20 {
            let x = i as f64;
            assert!(m.tail(x).unwrap() <= g.tail(x / 3.0).unwrap() + 1e-12);
        }
    }

    #[test]
    fn moment_factorizes() {
        let m = exp_exp(1.0, 1.0);
        assert!((m.moment(1).unwrap() - 1.0).abs() < 1e-10);
        let m = MixtureModel::with_defaults(
            PhaseType::exponential(1.0).unwrap(),
            Scaler::pareto(2.0).unwrap(),
        )
        .unwrap();
        assert!(m.moment(3).unwrap().is_infinite());
        let m = MixtureModel::with_defaults(
            PhaseType::erlang(2, 1.0).unwrap(),
            Scaler::geometric(0.5).unwrap(),
        )
        .unwrap();
        assert!((m.moment(1).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_coupling_in_pareto_index() {
        // Heavier scaler (smaller alpha) dominates pointwise.
        let g = PhaseType::exponential(1.0).unwrap();
        let m2 = MixtureModel::with_defaults(g.clone(), Scaler::pareto(2.0).unwrap()).unwrap();
        let m3 = MixtureModel::with_defaults(g, Scaler::pareto(3.0).unwrap()).unwrap();
        for i in 0..=12 {
            let x = 0.5 * 2.0f64.powi(i);
            assert!(m2.tail(x).unwrap() >= m3.tail(x).unwrap() - 1e-12);
        }
    }

    #[test]
    fn zipf_series_equals_brute_force() {
        let g = PhaseType::exponential(1.0).unwrap();
        let m = MixtureModel::with_defaults(g.clone(), Scaler::zipf(3.0).unwrap()).unwrap();
        let zeta3 = crate::special::riemann_zeta(3.0).unwrap();
        for &x in &[0.5, 2.0, 10.0, 100.0] {
            // Brute force to 10^6 terms plus a crude remainder cap.
            let mut brute = 0.0;
            for i in 1..=1_000_000u64 {
                let fi = i as f64;
                brute += fi.powf(-3.0) / zeta3 * (-x / fi).exp();
            }
            let got = m.tail(x).unwrap();
            let rel = ((got - brute) / brute).abs();
            // The brute-force sum itself truncates at 1e6 with error ~5e-13/brute.
            assert!(rel < 1e-6, "x={x}: {got} vs {brute} rel {rel}");
        }
    }

    #[test]
    fn geometric_series_tail() {
        let g = PhaseType::exponential(1.0).unwrap();
        let m = MixtureModel::with_defaults(g, Scaler::geometric(0.5).unwrap()).unwrap();
        for &x in &[1.0, 10.0, 100.0] {
            let mut brute = 0.0;
            for i in 1..=4000u64 {
                let fi = i as f64;
                // pmf(i) = 0.5 * 0.5^{i-1} = 0.5^i
                brute += 0.5f64.powi(i as i32) * (-x / fi).exp();
            }
            let got = m.tail(x).unwrap();
            assert!(
                ((got - brute) / brute).abs() < 1e-9,
                "x={x}: {got} vs {brute}"
            );
        }
    }

    #[test]
    fn sampling_deterministic_and_consistent_with_mean() {
        let m = exp_exp(1.0, 1.0);
        assert_eq!(m.sample(3, 100), m.sample(3, 100));
        let n = 200_000;
        let xs = m.sample(17, n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        // E[SY] = 1; Var(SY) = E S^2 E Y^2 - 1 = 2*2 - 1 = 3.
        let se = (3.0f64 / n as f64).sqrt();
        assert!((mean - m.moment(1).unwrap()).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn point_mass_sampling_is_scaled_exponential() {
        // Kolmogorov-Smirnov check against exp(1/2).
        let g = PhaseType::exponential(1.0).unwrap();
        let m = MixtureModel::with_defaults(g, Scaler::point_mass(2.0).unwrap()).unwrap();
        let n = 100_000;
        let mut xs = m.sample(23, n);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = 1.0 - (-x / 2.0).exp();
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            ks = ks.max((cdf - emp_lo).abs()).max((cdf - emp_hi).abs());
        }
        // 1% critical value ~ 1.63 / sqrt(n).
        assert!(ks < 1.63 / (n as f64).sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn series_bounds_bracket_partial_sums() {
        // Zipf-type summand with known peak location.
        let alpha = 3.0;
        let x = 10.0;
        let g = move |y: f64| y.powf(-alpha) * (-x / y).exp();
        let b = series_bounds(g, &QuadPolicy::default()).unwrap();
        // Peak at x / alpha.
        assert!((b.peak_location - x / alpha).abs() < 1e-4 * x);
        let direct: f64 = (1..=1_000_000u64).map(|i| g(i as f64)).sum();
        assert!(
            b.lower <= direct && direct <= b.upper,
            "sandwich violated: {} <= {direct} <= {}",
            b.lower,
            b.upper
        );
        assert!(b.upper - b.lower <= 2.0 * b.peak_value + 1e-15);
    }

    #[test]
    fn series_bounds_zero_summand() {
        let b = series_bounds(|_| 0.0, &QuadPolicy::default()).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.upper, 0.0);
    }

    #[test]
    fn series_bounds_geometric_summand() {
        let q: f64 = 0.5;
        let x = 25.0;
        let g = move |y: f64| (-x / y + y * q.ln()).exp();
        let b = series_bounds(g, &QuadPolicy::default()).unwrap();
        let direct: f64 = (1..=2000u64).map(|i| g(i as f64)).sum();
        assert!(b.lower <= direct && direct <= b.upper);
    }

    #[test]
    fn series_bounds_rejects_bimodal() {
        let g = |y: f64| (-(y - 2.0f64).powi(2)).exp() + (-(y - 40.0f64).powi(2)).exp();
        assert!(matches!(
            series_bounds(g, &QuadPolicy::default()),
            Err(Error::UnimodalityCheckFailed(_))
        ));
    }
}
