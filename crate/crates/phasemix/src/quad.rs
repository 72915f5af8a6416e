//! Adaptive double-exponential quadrature.
//!
//! Two transformations cover the intervals this crate integrates over:
//! tanh-sinh for finite segments and exp-sinh for semi-infinite tails.
//! Sharply peaked integrands (the rule, not the exception, for scale-mixture
//! tails at large argument) are split at the located peak so each half sees
//! a monotone integrand.

use crate::error::{Error, Result};

/// Convergence policy for the double-exponential rules.
#[derive(Debug, Clone)]
pub struct QuadPolicy {
    /// Relative tolerance between successive refinement levels.
    pub rel_tol: f64,
    /// Absolute floor below which agreement counts as converged.
    pub abs_floor: f64,
    /// Maximum number of refinement levels (points double per level).
    pub max_level: usize,
}

impl Default for QuadPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_floor: 1e-280,
            max_level: 12,
        }
    }
}

impl QuadPolicy {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

const T_MAX: f64 = 4.9;

/// Tanh-sinh quadrature over the finite interval [a, b].
///
/// The abscissa is formed from its distance to the nearer endpoint
/// (2 e^{-2|u|} / (1 + e^{-2|u|}) rather than 1 - |tanh u|), which keeps
/// integrable endpoint singularities resolvable down to the underflow limit.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, policy: &QuadPolicy) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    // Intervals far below the resolution of points near a and b contribute
    // at most width * f(mid); the transform cannot resolve them relatively.
    if b - a <= (a.abs() + b.abs()) * 1e-14 {
        return Ok((b - a) * f(0.5 * (a + b)));
    }
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e2 = (-2.0 * u.abs()).exp();
        if e2 == 0.0 {
            return 0.0;
        }
        let frac = 2.0 * e2 / (1.0 + e2); // 1 - |tanh(u)|
        let x = if t >= 0.0 {
            b - half * frac
        } else {
            a + half * frac
        };
        if x <= a || x >= b {
            // Collapsed onto an endpoint; the weight below is already ~0.
            return 0.0;
        }
        let sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() * sech2;
        if w == 0.0 {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * w
        }
    };
    refine_levels(eval, policy)
}

/// Exp-sinh quadrature over [a, infinity) for integrands decaying at infinity.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, policy: &QuadPolicy) -> Result<f64> {
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        if !(-690.0..=690.0).contains(&u) {
            return 0.0;
        }
        let g = u.exp();
        let x = a + g;
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * g;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * w
        }
    };
    refine_levels(eval, policy)
}

/// Trapezoid-in-t with level doubling shared by both transformations.
fn refine_levels<E: Fn(f64) -> f64>(eval: E, policy: &QuadPolicy) -> Result<f64> {
    let mut h = 1.0;
    // Level 0: coarse trapezoid.
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > T_MAX {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut integral = sum * h;
    for level in 1..=policy.max_level {
        h *= 0.5;
        // Add the new midpoints only.
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > T_MAX {
                break;
            }
            add += eval(t) + eval(-t);
            k += 2;
        }
        let new_integral = 0.5 * integral + add * h;
        let diff = (new_integral - integral).abs();
        let done = diff <= policy.rel_tol * new_integral.abs() || diff <= policy.abs_floor;
        integral = new_integral;
        if done && level >= 3 {
            return Ok(integral);
        }
    }
    Err(Error::QuadratureNonconvergence(format!(
        "double-exponential refinement exhausted {} levels",
        policy.max_level
    )))
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Locate the peak of a nonnegative integrand on (lo, hi) by a log-spaced scan
/// followed by golden-section refinement. `hi` may be infinite; the scan then
/// stops where the integrand has decayed to zero relative to the running max.
pub fn locate_peak<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let scan_lo = if lo > 0.0 { lo } else { 1e-12 };
    let scan_hi = if hi.is_finite() { hi } else { 1e15 };
    let n = 256;
    let log_lo = scan_lo.ln();
    let log_hi = scan_hi.ln();
    let mut best_x = scan_lo;
    let mut best_v = f64::NEG_INFINITY;
    let mut best_i = 0usize;
    for i in 0..=n {
        let x = (log_lo + (log_hi - log_lo) * i as f64 / n as f64).exp();
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_x = x;
            best_i = i;
        }
    }
    if best_v <= 0.0 {
        return best_x;
    }
    // Golden refinement between the scan neighbors of the best point.
    let lo_i = best_i.saturating_sub(1);
    let hi_i = (best_i + 1).min(n);
    let bracket_lo = (log_lo + (log_hi - log_lo) * lo_i as f64 / n as f64).exp();
    let bracket_hi = (log_lo + (log_hi - log_lo) * hi_i as f64 / n as f64).exp();
    golden_section_max(f, bracket_lo, bracket_hi, 80)
}

/// Integrate a nonnegative integrand over (lo, hi), splitting at its peak.
/// `hi = f64::INFINITY` selects the exp-sinh rule for the upper piece.
pub fn integrate_peaked<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    policy: &QuadPolicy,
) -> Result<f64> {
    let peak = locate_peak(&f, lo, hi);
    let mut peak = peak.clamp(lo, if hi.is_finite() { hi } else { f64::MAX });
    // Snap boundary-hugging peaks onto the boundary: slivers cannot be
    // resolved relatively, and the exponential rules handle near-boundary
    // maxima on their own through log-distributed abscissas.
    if peak - lo <= (lo.abs() + peak.abs()) * 1e-6 {
        peak = lo;
    }
    if hi.is_finite() && hi - peak <= (hi.abs() + peak.abs()) * 1e-6 {
        peak = hi;
    }
    let lower = if peak > lo {
        tanh_sinh(&f, lo, peak, policy)?
    } else {
        0.0
    };
    let upper = if hi.is_finite() {
        if hi > peak {
            tanh_sinh(&f, peak, hi, policy)?
        } else {
            0.0
        }
    } else {
        exp_sinh(&f, peak, policy)?
    };
    Ok(lower + upper)
}
