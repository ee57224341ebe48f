//! g_ζ in the reduced frame ζ = (k₁, 0) + i(0, k₂).
//!
//! All three representations share the factor (1/2π)e^{−ix₁k₁} Re(·):
//!
//! ```text
//! gz1:  ∫₀^∞ e^{ix₂t} e^{−x₁s}/s dt,                 s² = t² − k₁² + 2ik₂t
//! gz2:  (1/x₂) ∫₀^∞ e^{−t} e^{−ix₁√Q}/√Q dt,          Q  = t²/x₂² + 2tk₂/x₂ + k₁²
//! gz3:  ∫₀¹ (gz1 integrand) − i e^{ix₂} ∫₀^∞ e^{x₂t} e^{−x₁s₃}/s₃ dt,
//!                                                     s₃² = 1 − k₁² + t(2k₂ − t) + 2i(k₂ − t)
//! ```
//!
//! gz2 is gz1 after rotating the contour onto the positive imaginary axis and
//! substituting t → t/x₂; gz3 closes gz1's contour downwards from t = 1.

use std::f64::consts::{PI, SQRT_2};

use super::quadrature::{graded_breaks, integrate, QuadratureSpec};
use super::RegionTag;
use crate::error::{Error, Result};
use crate::spectral::{ReducedZeta, C64, I};

pub const T2_LIMIT: f64 = 14.0;

// Initial panels span at most PANEL_PHASE radians of the integrand's
// oscillation; 16-point panels resolve that to ~1e−12.
const PANEL_PHASE: f64 = 8.0;
const MAX_WIDTH: f64 = 4.0;

/// Floor on the gz3 tail limit, in units of 1/|x₂|. The closed form
/// 14/(c₂x₁ − x₂) leaves tails of order 1e−6 when x₁ is comparable to |x₂|.
pub const T3_FLOOR: f64 = 24.0;

pub fn t1_limit(x1: f64, k1: f64, k2: f64) -> Result<f64> {
    if !(x1 > 0.0) {
        return Err(Error::InvalidArgument(format!("T1 needs x1 > 0, got {x1}")));
    }
    let c1 = C64::new(k1 * k1, 2.0 * SQRT_2 * k1.abs() * k2).sqrt().arg().cos();
    Ok((14.0 * SQRT_2 / (x1 * c1)).max(SQRT_2 * k1.abs()))
}

pub fn t3_limit(x1: f64, x2: f64, k1: f64, k2: f64) -> Result<f64> {
    if x1 < 0.0 {
        return Err(Error::InvalidArgument(format!("T3 needs x1 >= 0, got {x1}")));
    }
    let c2 = C64::new(1.0 - k1 * k1, 2.0 * k2).sqrt().arg().cos();
    let denom = c2 * x1 - x2;
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "T3 needs c2*x1 - x2 > 0, got {denom} at ({x1}, {x2})"
        )));
    }
    Ok(14.0 / denom)
}

/// The closed-form limits (T1, T2, T3). Requires a point where both T1 and
/// T3 are defined (x₁ > 0, c₂x₁ > x₂).
pub fn truncation_limits(x1: f64, x2: f64, k1: f64, k2: f64) -> Result<(f64, f64, f64)> {
    Ok((t1_limit(x1, k1, k2)?, T2_LIMIT, t3_limit(x1, x2, k1, k2)?))
}

/// How the upper integration limits are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPolicy {
    /// Multiplies every limit; 2.0 is the tail test.
    pub scale: f64,
    /// Apply [`T3_FLOOR`].
    pub t3_floor: bool,
}

impl Default for LimitPolicy {
    fn default() -> Self {
        LimitPolicy {
            scale: 1.0,
            t3_floor: true,
        }
    }
}

/// The formula the region rules assign to (x₁, x₂), x₁ ≥ 0.
pub fn formula_for(x1: f64, x2: f64) -> RegionTag {
    if x2 >= 0.5 * x1 {
        RegionTag::FormulaGz2
    } else if x2 > -x1 {
        RegionTag::FormulaGz1
    } else {
        RegionTag::FormulaGz3
    }
}

/// g_ζ(x₁ + ix₂) with the formula chosen by the region rules.
pub fn green_reduced(x1: f64, x2: f64, rz: &ReducedZeta, quad: &QuadratureSpec) -> Result<C64> {
    if !(x1 >= 0.0) || (x1 == 0.0 && x2 == 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reduced evaluation needs x1 >= 0 and z != 0, got ({x1}, {x2})"
        )));
    }
    green_formula(formula_for(x1, x2), x1, x2, rz, quad, LimitPolicy::default())
}

/// Evaluates one named formula. Each representation is valid on a larger set
/// than the region the dispatcher gives it (gz1: x₁ > 0, gz2: x₂ > 0,
/// gz3: x₂ < 0), which is what the cross-formula tests exploit.
pub fn green_formula(
    formula: RegionTag,
    x1: f64,
    x2: f64,
    rz: &ReducedZeta,
    quad: &QuadratureSpec,
    limits: LimitPolicy,
) -> Result<C64> {
    quad.validate()?;
    let (k1, k2) = (rz.k1, rz.k2);
    let kappa = (k2 * k2 - k1 * k1).sqrt();
    // Distance of the branch point of 1/s from t = 0.
    let d = k1 * k1 / (k2 + kappa);
    let fail = |detail: String| Error::NumericalFailure {
        region: formula,
        x1,
        x2,
        detail,
    };
    let mismatch = || {
        Error::InvalidArgument(format!("{formula:?} is not valid at ({x1}, {x2})"))
    };
    let osc = x1 + x2.abs();
    let integral = match formula {
        RegionTag::FormulaGz1 => {
            if !(x1 > 0.0) {
                return Err(mismatch());
            }
            let t1 = t1_limit(x1, k1, k2)? * limits.scale;
            let f = gz1_integrand(x1, x2, k1, k2);
            let width = (PANEL_PHASE / osc).min(MAX_WIDTH);
            let r = integrate(&f, graded_breaks(0.0, t1, d, width, quad.panels), quad);
            if !r.ok {
                return Err(fail(format!("quadrature stalled, last change {:.2e}", r.change)));
            }
            r.value
        }
        RegionTag::FormulaGz2 => {
            if !(x2 > 0.0) || x1 < 0.0 {
                return Err(mismatch());
            }
            let t2 = T2_LIMIT * limits.scale;
            let f = move |t: f64| {
                let q = (t * t / (x2 * x2) + 2.0 * t * k2 / x2 + k1 * k1).sqrt();
                C64::from_polar((-t).exp() / (q * x2), -x1 * q)
            };
            let width = (PANEL_PHASE / (x1 / x2 + 1.0)).min(MAX_WIDTH);
            let r = integrate(&f, graded_breaks(0.0, t2, x2 * d, width, quad.panels), quad);
            if !r.ok {
                return Err(fail(format!("quadrature stalled, last change {:.2e}", r.change)));
            }
            r.value
        }
        RegionTag::FormulaGz3 => {
            if !(x2 < 0.0) || x1 < 0.0 {
                return Err(mismatch());
            }
            let mut t3 = t3_limit(x1, x2, k1, k2)?;
            if limits.t3_floor {
                t3 = t3.max(T3_FLOOR / x2.abs());
            }
            t3 *= limits.scale;
            let f1 = gz1_integrand(x1, x2, k1, k2);
            let i1 = integrate(&f1, graded_breaks(0.0, 1.0, d, (PANEL_PHASE / osc).min(0.5), quad.panels), quad);
            let f2 = move |t: f64| {
                let s = C64::new(1.0 - k1 * k1 + t * (2.0 * k2 - t), 2.0 * (k2 - t)).sqrt();
                C64::from_polar((x2 * t - x1 * s.re).exp() / s.norm_sqr(), -x1 * s.im) * s.conj()
            };
            let width = if osc > 0.0 { (PANEL_PHASE / osc).min(MAX_WIDTH) } else { MAX_WIDTH };
            let i2 = integrate(&f2, graded_breaks(0.0, t3, 0.0, width, quad.panels), quad);
            if !i1.ok || !i2.ok {
                return Err(fail(format!(
                    "quadrature stalled, last changes {:.2e} / {:.2e}",
                    i1.change, i2.change
                )));
            }
            i1.value - I * C64::from_polar(1.0, x2) * i2.value
        }
        _ => return Err(mismatch()),
    };
    let g = C64::from_polar(integral.re / (2.0 * PI), -x1 * k1);
    if !g.re.is_finite() || !g.im.is_finite() {
        return Err(fail("non-finite value".into()));
    }
    Ok(g)
}

fn gz1_integrand(x1: f64, x2: f64, k1: f64, k2: f64) -> impl Fn(f64) -> C64 {
    move |t: f64| {
        let s = C64::new(t * t - k1 * k1, 2.0 * k2 * t).sqrt();
        // e^{ix₂t − x₁s}/s with a single sin_cos.
        C64::from_polar((-x1 * s.re).exp() / s.norm_sqr(), x2 * t - x1 * s.im) * s.conj()
    }
}
