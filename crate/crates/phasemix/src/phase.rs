//! Finite phase-type distributions PH(beta, Lambda): validation, tail,
//! density, moments, and absorption-time sampling.
//!
//! A phase-type random variable is the absorption time of a Markov jump
//! process on transient states {1..p} plus one absorbing state; `beta` holds
//! the initial probabilities and `Lambda` the sub-intensity block of the
//! generator. Tail and density are matrix-exponential expressions evaluated
//! with scaling-and-squaring.

use crate::error::{Error, Result};
use crate::matexp::expm;
use crate::quad::{integrate_peaked, QuadPolicy};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Validation slop for probability sums and sign checks.
const VALIDATION_TOL: f64 = 1e-10;

/// A validated phase-type distribution.
#[derive(Debug, Clone)]
pub struct PhaseType {
    beta: DVector<f64>,
    lambda: DMatrix<f64>,
    exit: DVector<f64>,
}

impl PhaseType {
    /// Validate `(beta, Lambda)` and construct the distribution.
    ///
    /// `beta` must be a probability vector (no atom at zero, so it sums to
    /// one over the transient states). `Lambda` must have negative diagonal,
    /// nonnegative off-diagonal, row sums <= 0 with at least one strictly
    /// negative so absorption is certain.
    pub fn new(beta: Vec<f64>, lambda: Vec<Vec<f64>>) -> Result<Self> {
        let p = beta.len();
        if p == 0 {
            return Err(Error::NonStochasticInitial("beta is empty".into()));
        }
        if lambda.len() != p || lambda.iter().any(|row| row.len() != p) {
            return Err(Error::NotSubIntensity(format!(
                "lambda must be {p}x{p} to match beta of length {p}"
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonStochasticInitial(
                "beta contains non-finite entries".into(),
            ));
        }
        if lambda.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NotSubIntensity(
                "lambda contains non-finite entries".into(),
            ));
        }
        for (i, &b) in beta.iter().enumerate() {
            if b < -VALIDATION_TOL {
                return Err(Error::NonStochasticInitial(format!(
                    "beta[{i}] = {b} is negative"
                )));
            }
        }
        let total: f64 = beta.iter().sum();
        if (total - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NonStochasticInitial(format!(
                "beta sums to {total}, expected 1"
            )));
        }
        let mut any_strict = false;
        for (i, row) in lambda.iter().enumerate() {
            if row[i] >= 0.0 {
                return Err(Error::NotSubIntensity(format!(
                    "lambda[{i}][{i}] = {} must be negative",
                    row[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if i != j && v < 0.0 {
                    return Err(Error::NotSubIntensity(format!(
                        "lambda[{i}][{j}] = {v} must be nonnegative"
                    )));
                }
            }
            let row_sum: f64 = row.iter().sum();
            if row_sum > VALIDATION_TOL {
                return Err(Error::NotSubIntensity(format!(
                    "row {i} sums to {row_sum} > 0"
                )));
            }
            if row_sum < -VALIDATION_TOL {
                any_strict = true;
            }
        }
        if !any_strict {
            return Err(Error::NotSubIntensity(
                "every row sums to zero; absorption is never reached".into(),
            ));
        }
        let beta = DVector::from_vec(beta);
        let lambda = DMatrix::from_fn(p, p, |i, j| lambda[i][j]);
        let exit = -(&lambda * DVector::from_element(p, 1.0));
        // Clamp tiny negative rounding in the exit vector.
        let exit = exit.map(|v| if v.abs() <= VALIDATION_TOL { 0.0 } else { v });
        Ok(Self { beta, lambda, exit })
    }

    /// Single-state PH: exponential with the given rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![vec![-rate]])
    }

    /// Erlang chain with `stages` phases of the given rate.
    pub fn erlang(stages: usize, rate: f64) -> Result<Self> {
        if stages == 0 {
            return Err(Error::NonStochasticInitial("erlang needs >= 1 stage".into()));
        }
        let mut beta = vec![0.0; stages];
        beta[0] = 1.0;
        let mut lambda = vec![vec![0.0; stages]; stages];
        for i in 0..stages {
            lambda[i][i] = -rate;
            if i + 1 < stages {
                lambda[i][i + 1] = rate;
            }
        }
        Self::new(beta, lambda)
    }

    /// Parallel mixture of exponentials.
    pub fn hyperexponential(probs: &[f64], rates: &[f64]) -> Result<Self> {
        if probs.len() != rates.len() || probs.is_empty() {
            return Err(Error::NonStochasticInitial(
                "probs and rates must have equal nonzero length".into(),
            ));
        }
        let p = probs.len();
        let mut lambda = vec![vec![0.0; p]; p];
        for i in 0..p {
            lambda[i][i] = -rates[i];
        }
        Self::new(probs.to_vec(), lambda)
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    /// Exit rate vector `-Lambda e`.
    pub fn exit_vector(&self) -> &DVector<f64> {
        &self.exit
    }

    /// Tail probability: beta e^{Lambda x} e, clamped to [0, 1].
    pub fn tail(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::DomainError(format!("tail requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        let e = expm(&(&self.lambda * x))?;
        let ones = DVector::from_element(self.dim(), 1.0);
        let v = (self.beta.transpose() * e * ones)[(0, 0)];
        Ok(v.clamp(0.0, 1.0))
    }

    /// Density: beta e^{Lambda x} lambda_exit.
    pub fn density(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::DomainError(format!(
                "density requires x >= 0, got {x}"
            )));
        }
        let e = expm(&(&self.lambda * x))?;
        let v = (self.beta.transpose() * e * &self.exit)[(0, 0)];
        Ok(v.max(0.0))
    }

    /// n-th raw moment of the scaled variable s*Y:
    /// s^n (-1)^n n! beta Lambda^{-n} e.
    pub fn moment(&self, n: u32, scale: f64) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let lu = self.lambda.clone().lu();
        let mut v = DVector::from_element(self.dim(), 1.0);
        let mut factorial = 1.0;
        for k in 1..=n {
            v = lu.solve(&v).ok_or_else(|| {
                Error::SingularMatrix("sub-intensity matrix solve failed".into())
            })?;
            factorial *= k as f64;
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let raw = sign * factorial * (self.beta.transpose() * v)[(0, 0)];
        if !raw.is_finite() {
            return Err(Error::SingularMatrix(
                "moment computation produced non-finite value".into(),
            ));
        }
        Ok(raw * scale.powi(n as i32))
    }

    /// Fractional moment M_G(alpha) = int_0^inf x^alpha g(x) dx by adaptive
    /// quadrature against the analytic density.
    pub fn fractional_moment(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::DomainError(format!(
                "fractional moment requires alpha > 0, got {alpha}"
            )));
        }
        let policy = QuadPolicy::default();
        integrate_peaked(
            |x| {
                let g = self.density(x).unwrap_or(0.0);
                if g == 0.0 {
                    0.0
                } else {
                    x.powf(alpha) * g
                }
            },
            0.0,
            f64::INFINITY,
            &policy,
        )
    }

    /// Draw `count` i.i.d. absorption times by simulating the jump process.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_one(&mut rng)).collect()
    }

    /// One absorption time from the caller's RNG stream.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let p = self.dim();
        let mut state = weighted_index(rng, self.beta.iter().copied());
        let mut t = 0.0;
        loop {
            let rate = -self.lambda[(state, state)];
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / rate;
            // Exit vs jump, proportional to the off-diagonal rates.
            let total = rate;
            let mut draw: f64 = rng.random::<f64>() * total;
            draw -= self.exit[state];
            if draw < 0.0 {
                return t;
            }
            let mut next = p; // sentinel
            for j in 0..p {
                if j == state {
                    continue;
                }
                draw -= self.lambda[(state, j)];
                if draw < 0.0 {
                    next = j;
                    break;
                }
            }
            if next == p {
                // Rounding pushed the draw past the last bucket; absorb.
                return t;
            }
            state = next;
        }
    }
}

fn weighted_index<R: Rng, I: Iterator<Item = f64>>(rng: &mut R, weights: I) -> usize {
    let weights: Vec<f64> = weights.collect();
    let mut draw: f64 = rng.random();
    for (i, w) in weights.iter().enumerate() {
        draw -= w;
        if draw < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_canonical_forms() {
        let exp = PhaseType::exponential(3.0).unwrap();
        assert_eq!(exp.exit_vector()[0], 3.0);
        let erl = PhaseType::new(vec![1.0, 0.0], vec![vec![-1.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(erl.exit_vector()[0], 0.0);
        assert_eq!(erl.exit_vector()[1], 1.0);
    }

    #[test]
    fn validate_rejects_positive_diagonal() {
        let r = PhaseType::new(vec![0.5, 0.5], vec![vec![-1.0, 0.0], vec![0.0, 2.0]]);
        assert!(matches!(r, Err(Error::NotSubIntensity(_))));
    }

    #[test]
    fn validate_rejects_bad_beta() {
        let r = PhaseType::new(vec![0.5, 0.6], vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert!(matches!(r, Err(Error::NonStochasticInitial(_))));
        let r = PhaseType::new(vec![1.5, -0.5], vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert!(matches!(r, Err(Error::NonStochasticInitial(_))));
    }

    #[test]
    fn validate_rejects_conservative_generator() {
        // Rows summing to zero never absorb.
        let r = PhaseType::new(vec![1.0, 0.0], vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        assert!(matches!(r, Err(Error::NotSubIntensity(_))));
    }

    #[test]
    fn exponential_tail_and_density() {
        let g = PhaseType::exponential(1.0).unwrap();
        assert!((g.tail(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-14);
        let g3 = PhaseType::exponential(3.0).unwrap();
        assert!((g3.density(0.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn erlang_tail_and_density() {
        let g = PhaseType::erlang(2, 1.0).unwrap();
        let want = 2.0 * (-1.0f64).exp();
        assert!((g.tail(1.0).unwrap() - want).abs() < 1e-14);
        assert!(g.density(0.0).unwrap().abs() < 1e-14);
        let want = 2.0 * (-2.0f64).exp();
        assert!((g.density(2.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn hyperexponential_tail() {
        let g = PhaseType::hyperexponential(&[0.5, 0.5], &[1.0, 2.0]).unwrap();
        let want = 0.5 * (-1.0f64).exp() + 0.5 * (-2.0f64).exp();
        assert!((g.tail(1.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn tail_monotone_and_bounded() {
        let g = PhaseType::erlang(3, 2.0).unwrap();
        let mut prev = g.tail(0.0).unwrap();
        assert_eq!(prev, 1.0);
        for i in 1..40 {
            let t = g.tail(i as f64 * 0.5).unwrap();
            assert!((0.0..=1.0).contains(&t));
            assert!(t <= prev + 1e-14);
            prev = t;
        }
    }

    #[test]
    fn moments_match_closed_forms() {
        let g = PhaseType::exponential(2.0).unwrap();
        for n in 1..=4u32 {
            let want = (1..=n).map(|k| k as f64).product::<f64>() / 2.0f64.powi(n as i32);
            assert!((g.moment(n, 1.0).unwrap() - want).abs() < 1e-12);
        }
        let e = PhaseType::erlang(2, 1.0).unwrap();
        assert!((e.moment(1, 1.0).unwrap() - 2.0).abs() < 1e-12);
        // Scaling: E[(sY)^2] = s^2 E[Y^2] = 9 * 2 = 18 for exp(1).
        let g1 = PhaseType::exponential(1.0).unwrap();
        assert!((g1.moment(2, 3.0).unwrap() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_moment_matches_integer() {
        let g = PhaseType::hyperexponential(&[0.3, 0.7], &[1.0, 3.0]).unwrap();
        let m1 = g.moment(1, 1.0).unwrap();
        let f1 = g.fractional_moment(1.0).unwrap();
        assert!(((m1 - f1) / m1).abs() < 1e-8);
        let m2 = g.moment(2, 1.0).unwrap();
        let f2 = g.fractional_moment(2.0).unwrap();
        assert!(((m2 - f2) / m2).abs() < 1e-8);
    }

    #[test]
    fn exponential_fractional_moment_closed_form() {
        // M(alpha) = Gamma(alpha + 1) / rate^alpha
        let rate = 2.0;
        let g = PhaseType::exponential(rate).unwrap();
        let alpha = 2.5;
        let want = crate::special::gamma_fn(alpha + 1.0).unwrap() / rate.powf(alpha);
        let got = g.fractional_moment(alpha).unwrap();
        assert!(((got - want) / want).abs() < 1e-9);
    }

    #[test]
    fn density_matches_negative_tail_derivative() {
        let g = PhaseType::erlang(3, 1.5).unwrap();
        for &x in &[0.5, 1.0, 2.0, 4.0] {
            let h = 1e-5;
            let fd = (g.tail(x - h).unwrap() - g.tail(x + h).unwrap()) / (2.0 * h);
            let d = g.density(x).unwrap();
            assert!((fd - d).abs() < 1e-8, "x={x}: {fd} vs {d}");
        }
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let g = PhaseType::exponential(1.0).unwrap();
        let a = g.sample(42, 1000);
        let b = g.sample(42, 1000);
        assert_eq!(a, b);

        let n = 100_000;
        let s = g.sample(7, n);
        let mean = s.iter().sum::<f64>() / n as f64;
        // exp(1): mean 1, sd 1; three standard errors.
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());

        let e = PhaseType::erlang(2, 1.0).unwrap();
        let s = e.sample(7, n);
        let mean = s.iter().sum::<f64>() / n as f64;
        // Erlang(2,1): mean 2, sd sqrt(2).
        assert!((mean - 2.0).abs() < 3.0 * 2.0f64.sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn light_tail_gate() {
        // e^{theta x} tail(x) decreasing for theta below the dominant rate.
        let g = PhaseType::hyperexponential(&[0.5, 0.5], &[1.0, 2.0]).unwrap();
        let theta = 0.5;
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let x = i as f64;
            let v = theta * x + g.tail(x).unwrap().ln();
            assert!(v < prev);
            prev = v;
        }
    }
}
