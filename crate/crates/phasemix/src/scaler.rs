//! Scaling distributions H for the multiplier S in X = S * Y.
//!
//! Each family carries support metadata, tail, density or pmf, an
//! inverse-CDF sampler, moments E[S^a] (possibly infinite), and the
//! Laplace-Stieltjes transform of 1/S with derivatives. The transform is
//! closed-form for exponential scaling (a Bessel K expression) and uses the
//! log-symmetry L_{1/S} = L_S for lognormal; everything else integrates
//! (1/s)^k e^{-theta/s} dH(s) directly.

use crate::error::{Error, Result};
use crate::quad::{integrate_peaked, QuadPolicy};
use crate::special::{
    bessel_k, gamma_fn, gamma_p, gamma_q, lambert_w, ln_gamma, riemann_zeta, std_normal_quantile,
    std_normal_tail,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Scaling-distribution families. Pareto uses the tail parametrization
/// H̄(s) = s^{-alpha} on s >= 1; Zipf requires alpha >= 2; Geometric sits on
/// {1, 2, ...} with pmf p (1-p)^{i-1}.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalerFamily {
    Exponential { rate: f64 },
    Pareto { alpha: f64 },
    Lognormal { sigma: f64 },
    Weibull { scale: f64, shape: f64 },
    Gamma { shape: f64, rate: f64 },
    Zipf { alpha: f64 },
    Geometric { p: f64 },
    FiniteDiscrete { points: Vec<f64>, probs: Vec<f64> },
    PointMass { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Support {
    pub lower: f64,
    /// `f64::INFINITY` for unbounded support.
    pub upper: f64,
}

/// A validated scaling distribution.
#[derive(Debug, Clone, Serialize)]
pub struct Scaler {
    family: ScalerFamily,
    support: Support,
    kind: ScalerKind,
}

const PROB_TOL: f64 = 1e-10;

impl Scaler {
    pub fn new(family: ScalerFamily) -> Result<Self> {
        use ScalerFamily::*;
        let (support, kind) = match &family {
            Exponential { rate } => {
                require(*rate > 0.0 && rate.is_finite(), "exponential rate must be > 0")?;
                (Support { lower: 0.0, upper: f64::INFINITY }, ScalerKind::Continuous)
            }
            Pareto { alpha } => {
                require(*alpha > 0.0 && alpha.is_finite(), "pareto alpha must be > 0")?;
                (Support { lower: 1.0, upper: f64::INFINITY }, ScalerKind::Continuous)
            }
            Lognormal { sigma } => {
                require(*sigma > 0.0 && sigma.is_finite(), "lognormal sigma must be > 0")?;
                (Support { lower: 0.0, upper: f64::INFINITY }, ScalerKind::Continuous)
            }
            Weibull { scale, shape } => {
                require(*scale > 0.0 && scale.is_finite(), "weibull scale must be > 0")?;
                require(*shape > 0.0 && shape.is_finite(), "weibull shape must be > 0")?;
                (Support { lower: 0.0, upper: f64::INFINITY }, ScalerKind::Continuous)
            }
            Gamma { shape, rate } => {
                require(*shape > 0.0 && shape.is_finite(), "gamma shape must be > 0")?;
                require(*rate > 0.0 && rate.is_finite(), "gamma rate must be > 0")?;
                (Support { lower: 0.0, upper: f64::INFINITY }, ScalerKind::Continuous)
            }
            Zipf { alpha } => {
                if !(*alpha >= 2.0) || !alpha.is_finite() {
                    return Err(Error::DomainError(format!(
                        "zipf requires alpha >= 2, got {alpha}; indices in (1,2) are not supported"
                    )));
                }
                (Support { lower: 1.0, upper: f64::INFINITY }, ScalerKind::Discrete)
            }
            Geometric { p } => {
                require(*p > 0.0 && *p < 1.0, "geometric p must lie in (0,1)")?;
                (Support { lower: 1.0, upper: f64::INFINITY }, ScalerKind::Discrete)
            }
            FiniteDiscrete { points, probs } => {
                require(!points.is_empty(), "finite_discrete needs at least one point")?;
                require(
                    points.len() == probs.len(),
                    "finite_discrete points and probs must have equal length",
                )?;
                require(
                    points.iter().all(|&s| s > 0.0 && s.is_finite()),
                    "finite_discrete points must be positive (no atom at 0)",
                )?;
                require(
                    probs.iter().all(|&p| p >= 0.0 && p.is_finite()),
                    "finite_discrete probs must be nonnegative",
                )?;
                let total: f64 = probs.iter().sum();
                require(
                    (total - 1.0).abs() <= PROB_TOL,
                    "finite_discrete probs must sum to 1",
                )?;
                let lo = points.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = points.iter().cloned().fold(0.0f64, f64::max);
                (Support { lower: lo, upper: hi }, ScalerKind::Discrete)
            }
            PointMass { value } => {
                require(*value > 0.0 && value.is_finite(), "point_mass value must be > 0")?;
                (Support { lower: *value, upper: *value }, ScalerKind::Discrete)
            }
        };
        Ok(Self { family, support, kind })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(ScalerFamily::Exponential { rate })
    }
    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(ScalerFamily::Pareto { alpha })
    }
    pub fn lognormal(sigma: f64) -> Result<Self> {
        Self::new(ScalerFamily::Lognormal { sigma })
    }
    pub fn zipf(alpha: f64) -> Result<Self> {
        Self::new(ScalerFamily::Zipf { alpha })
    }
    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(ScalerFamily::Geometric { p })
    }
    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(ScalerFamily::PointMass { value })
    }

    pub fn family(&self) -> &ScalerFamily {
        &self.family
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn kind(&self) -> ScalerKind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == ScalerKind::Discrete
    }

    pub fn has_unbounded_support(&self) -> bool {
        self.support.upper.is_infinite()
    }

    /// Regular-variation index of the tail, when the family has one.
    /// Pareto(alpha) has index alpha; Zipf(alpha) has index alpha - 1.
    pub fn rv_index(&self) -> Option<f64> {
        match &self.family {
            ScalerFamily::Pareto { alpha } => Some(*alpha),
            ScalerFamily::Zipf { alpha } => Some(*alpha - 1.0),
            _ => None,
        }
    }

    /// Tail probability H̄(s) = P(S > s) for s > 0.
    pub fn tail(&self, s: f64) -> f64 {
        use ScalerFamily::*;
        if s <= 0.0 {
            return 1.0;
        }
        match &self.family {
            Exponential { rate } => (-rate * s).exp(),
            Pareto { alpha } => {
                if s < 1.0 {
                    1.0
                } else {
                    s.powf(-alpha)
                }
            }
            Lognormal { sigma } => std_normal_tail(s.ln() / sigma),
            Weibull { scale, shape } => (-(s / scale).powf(*shape)).exp(),
            Gamma { shape, rate } => gamma_q(*shape, rate * s),
            Zipf { alpha } => {
                let k = s.floor() as u64;
                zipf_tail_count(*alpha, k)
            }
            Geometric { p } => {
                let k = s.floor();
                (1.0 - p).powf(k)
            }
            FiniteDiscrete { points, probs } => points
                .iter()
                .zip(probs)
                .filter(|(&pt, _)| pt > s)
                .map(|(_, &pr)| pr)
                .sum(),
            PointMass { value } => {
                if s < *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Density for continuous families, at s in the interior of the support.
    pub fn density(&self, s: f64) -> f64 {
        use ScalerFamily::*;
        if s <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Exponential { rate } => rate * (-rate * s).exp(),
            Pareto { alpha } => {
                if s < 1.0 {
                    0.0
                } else {
                    alpha * s.powf(-alpha - 1.0)
                }
            }
            Lognormal { sigma } => {
                let z = s.ln() / sigma;
                (-0.5 * z * z).exp() / (s * sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Weibull { scale, shape } => {
                let t = (s / scale).powf(*shape);
                shape / s * t * (-t).exp()
            }
            Gamma { shape, rate } => {
                ((shape - 1.0) * (rate * s).ln() - rate * s - ln_gamma(*shape)).exp() * rate
            }
            _ => 0.0,
        }
    }

    /// Probability mass at integer/atom locations for discrete families.
    pub fn pmf(&self, i: usize) -> f64 {
        use ScalerFamily::*;
        match &self.family {
            Zipf { alpha } => {
                if i == 0 {
                    0.0
                } else {
                    (i as f64).powf(-alpha) / riemann_zeta(*alpha).expect("alpha >= 2")
                }
            }
            Geometric { p } => {
                if i == 0 {
                    0.0
                } else {
                    p * (1.0 - p).powi(i as i32 - 1)
                }
            }
            _ => 0.0,
        }
    }

    /// Atoms of a bounded discrete scaler.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        use ScalerFamily::*;
        match &self.family {
            FiniteDiscrete { points, probs } => {
                Some(points.iter().cloned().zip(probs.iter().cloned()).collect())
            }
            PointMass { value } => Some(vec![(*value, 1.0)]),
            _ => None,
        }
    }

    /// E[S^a] for a > 0; `f64::INFINITY` flags divergence.
    pub fn moment(&self, a: f64) -> Result<f64> {
        use ScalerFamily::*;
        if !(a > 0.0) {
            return Err(Error::DomainError(format!(
                "scaler moment order must be > 0, got {a}"
            )));
        }
        Ok(match &self.family {
            Exponential { rate } => gamma_fn(a + 1.0)? / rate.powf(a),
            Pareto { alpha } => {
                if a >= *alpha {
                    f64::INFINITY
                } else {
                    alpha / (alpha - a)
                }
            }
            Lognormal { sigma } => (0.5 * a * a * sigma * sigma).exp(),
            Weibull { scale, shape } => scale.powf(a) * gamma_fn(1.0 + a / shape)?,
            Gamma { shape, rate } => (ln_gamma(shape + a) - ln_gamma(*shape)).exp() / rate.powf(a),
            Zipf { alpha } => {
                if a >= alpha - 1.0 {
                    f64::INFINITY
                } else {
                    riemann_zeta(alpha - a)? / riemann_zeta(*alpha)?
                }
            }
            Geometric { p } => {
                // sum i^a p q^{i-1}, geometric decay.
                let q = 1.0 - p;
                let mut sum = 0.0;
                let mut weight = *p;
                let mut i = 1u64;
                loop {
                    let term = (i as f64).powf(a) * weight;
                    sum += term;
                    // Remaining mass times a crude growth majorant.
                    if weight / p * q / (1.0 - q) * ((i + 1) as f64).powf(a) < 1e-16 * sum {
                        break;
                    }
                    weight *= q;
                    i += 1;
                    if i > 10_000_000 {
                        break;
                    }
                }
                sum
            }
            FiniteDiscrete { points, probs } => points
                .iter()
                .zip(probs)
                .map(|(&s, &p)| s.powf(a) * p)
                .sum(),
            PointMass { value } => value.powf(a),
        })
    }

    /// Inverse-CDF transform of u in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        use ScalerFamily::*;
        let u = u.clamp(0.0, 1.0 - 1e-16);
        match &self.family {
            Exponential { rate } => -(1.0 - u).ln() / rate,
            Pareto { alpha } => (1.0 - u).powf(-1.0 / alpha),
            Lognormal { sigma } => {
                if u == 0.0 {
                    return 0.0;
                }
                (sigma * std_normal_quantile(u)).exp()
            }
            Weibull { scale, shape } => scale * (-(1.0 - u).ln()).powf(1.0 / shape),
            Gamma { shape, rate } => {
                // Bisection on the regularized lower incomplete gamma.
                if u == 0.0 {
                    return 0.0;
                }
                let mut hi = (shape / rate).max(1.0);
                while gamma_p(*shape, rate * hi) < u {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return hi;
                    }
                }
                let mut lo = 0.0;
                for _ in 0..90 {
                    let mid = 0.5 * (lo + hi);
                    if gamma_p(*shape, rate * mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            Zipf { alpha } => {
                // Smallest k with H̄(k) <= 1 - u, by doubling plus bisection.
                let target = 1.0 - u;
                if zipf_tail_count(*alpha, 1) <= target {
                    return 1.0;
                }
                let mut hi = 2u64;
                while zipf_tail_count(*alpha, hi) > target {
                    hi *= 2;
                    if hi > 1 << 60 {
                        break;
                    }
                }
                let mut lo = hi / 2;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if zipf_tail_count(*alpha, mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi as f64
            }
            Geometric { p } => {
                let q = 1.0 - p;
                let k = ((1.0 - u).ln() / q.ln()).ceil();
                k.max(1.0)
            }
            FiniteDiscrete { points, probs } => {
                let mut acc = 0.0;
                for (pt, pr) in points.iter().zip(probs) {
                    acc += pr;
                    if u < acc {
                        return *pt;
                    }
                }
                *points.last().unwrap()
            }
            PointMass { value } => *value,
        }
    }

    /// Draw `count` i.i.d. scaling factors, deterministic per seed.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_one(&mut rng)).collect()
    }

    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random())
    }

    /// The Laplace-Stieltjes transform of 1/S with derivative access.
    pub fn reciprocal_laplace(&self) -> ReciprocalLaplace {
        let availability = match &self.family {
            ScalerFamily::Exponential { .. } | ScalerFamily::Lognormal { .. } => {
                LaplaceKind::ClosedForm
            }
            _ => LaplaceKind::Numeric,
        };
        ReciprocalLaplace {
            scaler: self.clone(),
            availability,
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidModel(msg.into()))
    }
}

/// P(S > k) for Zipf(alpha) with integer k: sum_{i>k} i^{-alpha} / zeta(alpha).
fn zipf_tail_count(alpha: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let z = riemann_zeta(alpha).expect("alpha >= 2");
    power_tail_sum(alpha, k) / z
}

/// sum_{i > k} i^{-c} via Euler-Maclaurin from m = k+1.
fn power_tail_sum(c: f64, k: u64) -> f64 {
    let mut k = k;
    let mut head = 0.0;
    // Sum explicitly up to at least 24 to make the corrections negligible.
    while k < 24 {
        k += 1;
        head += (k as f64).powf(-c);
    }
    let m = (k + 1) as f64;
    let tail = m.powf(1.0 - c) / (c - 1.0) + 0.5 * m.powf(-c) + c / 12.0 * m.powf(-c - 1.0)
        - c * (c + 1.0) * (c + 2.0) / 720.0 * m.powf(-c - 3.0)
        + c * (c + 1.0) * (c + 2.0) * (c + 3.0) * (c + 4.0) / 30240.0 * m.powf(-c - 5.0);
    head + tail
}

/// Availability of the reciprocal transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceKind {
    ClosedForm,
    Numeric,
}

/// L_{1/S}(theta) = E[e^{-theta / S}] and its derivatives
/// L^{(k)}(theta) = (-1)^k E[S^{-k} e^{-theta / S}].
#[derive(Debug, Clone)]
pub struct ReciprocalLaplace {
    scaler: Scaler,
    availability: LaplaceKind,
}

impl ReciprocalLaplace {
    pub fn availability(&self) -> LaplaceKind {
        self.availability
    }

    pub fn value(&self, theta: f64) -> Result<f64> {
        self.derivative_signed(0, theta)
            .map(|v| v.clamp(0.0, 1.0))
    }

    /// k-th derivative of L_{1/S} at theta (sign included).
    pub fn derivative(&self, k: usize, theta: f64) -> Result<f64> {
        self.derivative_signed(k, theta)
    }

    fn derivative_signed(&self, k: usize, theta: f64) -> Result<f64> {
        use ScalerFamily::*;
        if theta < 0.0 {
            return Err(Error::DomainError(format!(
                "reciprocal Laplace transform requires theta >= 0, got {theta}"
            )));
        }
        if theta == 0.0 && k == 0 {
            return Ok(1.0);
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        match &self.scaler.family {
            Exponential { rate } => {
                // E[S^{-k} e^{-theta/S}] = 2 rate (theta/rate)^{(1-k)/2}
                //                          K_{k-1}(2 sqrt(rate theta)).
                if theta == 0.0 {
                    return Err(Error::DomainError(
                        "derivatives of the exponential reciprocal transform diverge at 0".into(),
                    ));
                }
                let z = 2.0 * (rate * theta).sqrt();
                let magnitude = 2.0
                    * rate
                    * (theta / rate).powf((1.0 - k as f64) / 2.0)
                    * bessel_k(k as f64 - 1.0, z)?;
                Ok(sign * magnitude)
            }
            _ => {
                let magnitude = self.absolute_moment_integral(k, theta)?;
                Ok(sign * magnitude)
            }
        }
    }

    /// E[S^{-k} e^{-theta/S}] by quadrature or series.
    fn absolute_moment_integral(&self, k: usize, theta: f64) -> Result<f64> {
        use ScalerFamily::*;
        let kf = k as f64;
        match &self.scaler.family {
            Zipf { alpha } => {
                let z = riemann_zeta(*alpha)?;
                let c = alpha + kf;
                let mut sum = 0.0;
                let n = 128u64.max((6.0 * theta / c).ceil() as u64);
                for i in 1..=n {
                    let fi = i as f64;
                    sum += fi.powf(-c) * (-theta / fi).exp();
                }
                sum += smooth_power_tail(c, theta, n as f64);
                Ok(sum / z)
            }
            Geometric { p } => {
                let q = 1.0 - p;
                let mut sum = 0.0;
                let mut weight = *p;
                let mut i = 1u64;
                loop {
                    let fi = i as f64;
                    sum += fi.powf(-kf) * (-theta / fi).exp() * weight;
                    // Remaining terms are below weight * q / p.
                    if weight * q / (1.0 - q) < 1e-18 * sum.max(1e-300) || i > 5_000_000 {
                        break;
                    }
                    weight *= q;
                    i += 1;
                }
                Ok(sum)
            }
            FiniteDiscrete { points, probs } => Ok(points
                .iter()
                .zip(probs)
                .map(|(&s, &pr)| pr * s.powf(-kf) * (-theta / s).exp())
                .sum()),
            PointMass { value } => Ok(value.powf(-kf) * (-theta / value).exp()),
            _ => {
                // Continuous families: adaptive quadrature of the density form.
                let lo = self.scaler.support().lower;
                let policy = QuadPolicy::default();
                integrate_peaked(
                    |s| {
                        let h = self.scaler.density(s);
                        if h == 0.0 {
                            0.0
                        } else {
                            s.powf(-kf) * (-theta / s).exp() * h
                        }
                    },
                    lo,
                    f64::INFINITY,
                    &policy,
                )
            }
        }
    }

    /// Lognormal derivative asymptotics: L^(k)(x) = (-1)^k L(x)
    /// exp(-k w_0(x) + k^2 sigma_0(x)^2 / 2) (1 + o(1)), with
    /// w_k(x) = W(x sigma^2 e^{k sigma^2}) and sigma_k^2 = sigma^2 / (1 + w_k).
    pub fn lognormal_derivative_asymptotic(&self, k: usize, x: f64) -> Result<f64> {
        let ScalerFamily::Lognormal { sigma } = &self.scaler.family else {
            return Err(Error::DomainError(
                "derivative asymptotics require a lognormal scaler".into(),
            ));
        };
        let w0 = lambert_w(x * sigma * sigma)?;
        let s0_sq = sigma * sigma / (1.0 + w0);
        let l = self.value(x)?;
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * l * (-(k as f64) * w0 + 0.5 * s0_sq * (k as f64).powi(2)).exp())
    }

    /// w_k(x) = W(x sigma^2 e^{k sigma^2}) for the lognormal family.
    pub fn lognormal_omega(&self, k: usize, x: f64) -> Result<f64> {
        let ScalerFamily::Lognormal { sigma } = &self.scaler.family else {
            return Err(Error::DomainError(
                "omega_k requires a lognormal scaler".into(),
            ));
        };
        lambert_w(x * sigma * sigma * ((k as f64) * sigma * sigma).exp())
    }
}

/// sum_{i > n} i^{-c} e^{-theta/i} via the closed-form integral plus
/// Euler-Maclaurin corrections through the fifth derivative; requires c > 1.
pub(crate) fn smooth_power_tail(c: f64, theta: f64, n: f64) -> f64 {
    let f = |y: f64| y.powf(-c) * (-theta / y).exp();
    // Integral: theta^{1-c} * lower incomplete gamma(c-1, theta/n).
    let integral = if theta == 0.0 {
        n.powf(1.0 - c) / (c - 1.0)
    } else {
        theta.powf(1.0 - c) * gamma_fn(c - 1.0).expect("c > 1") * gamma_p(c - 1.0, theta / n)
    };
    // log f = -c ln y - theta/y; f^{(k)} from the derivatives of log f.
    let n2 = n * n;
    let g1 = theta / n2 - c / n;
    let g2 = c / n2 - 2.0 * theta / (n2 * n);
    let g3 = 6.0 * theta / (n2 * n2) - 2.0 * c / (n2 * n);
    let g4 = 6.0 * c / (n2 * n2) - 24.0 * theta / (n2 * n2 * n);
    let g5 = 120.0 * theta / (n2 * n2 * n2) - 24.0 * c / (n2 * n2 * n);
    let fv = f(n);
    let f1 = fv * g1;
    let f3 = fv * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3);
    let f5 = fv
        * (g1.powi(5)
            + 10.0 * g1.powi(3) * g2
            + 15.0 * g1 * g2 * g2
            + 10.0 * g1 * g1 * g3
            + 10.0 * g2 * g3
            + 5.0 * g1 * g4
            + g5);
    integral - 0.5 * fv - f1 / 12.0 + f3 / 720.0 - f5 / 30240.0
}
