//! Faddeev's Green's function g_λ at negative energy.
//!
//! Evaluation reduces ζ(λ) to the frame ζ = (k₁, 0) + i(0, k₂) and picks one
//! of three integral representations by region. Small |z| are mapped out to
//! |z| ≥ 1 with g_λ(z; E) = g_λ(az; E/a²), and x₁ < 0 is folded onto x₁ > 0 with
//! g(−x₁ + ix₂) = e^{2ik₁x₁} g(x₁ + ix₂). Below |z| = 0.01 the value is set
//! to zero; that cutoff is a known error source for very fine grids.

mod quadrature;
mod reduced;

#[cfg(test)]
pub(crate) mod oracle;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use quadrature::{gauss_legendre, GaussRule, QuadratureSpec};
pub use reduced::{
    formula_for, green_formula, green_reduced, t1_limit, t3_limit, truncation_limits,
    LimitPolicy, T2_LIMIT, T3_FLOOR,
};

use crate::error::Result;
use crate::spectral::{
    cgo_exponential, reduce_zeta, Energy, ReducedZeta, SpectralLambda, C64, DEFAULT_GUARD,
};

/// Which rule produced a value. Scaled and switched points report the
/// outermost rule applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    ZeroCutoff,
    Scale100,
    Scale2,
    SwitchX1,
    FormulaGz1,
    FormulaGz2,
    FormulaGz3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    pub guard: f64,
    pub quad: QuadratureSpec,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            guard: DEFAULT_GUARD,
            quad: QuadratureSpec::default(),
        }
    }
}

/// g_λ for a fixed (λ, E), ready to be evaluated at many points.
#[derive(Debug, Clone, Copy)]
pub struct FaddeevGreen {
    lambda: SpectralLambda,
    energy: Energy,
    rz: ReducedZeta,
    quad: QuadratureSpec,
}

impl FaddeevGreen {
    pub fn new(lambda: SpectralLambda, energy: Energy, opts: &GreenOptions) -> Result<Self> {
        energy.require_negative_real()?;
        lambda.check_guard(opts.guard)?;
        opts.quad.validate()?;
        Ok(FaddeevGreen {
            lambda,
            energy,
            rz: reduce_zeta(lambda, energy)?,
            quad: opts.quad,
        })
    }

    pub fn lambda(&self) -> SpectralLambda {
        self.lambda
    }

    pub fn energy(&self) -> Energy {
        self.energy
    }

    pub fn reduced(&self) -> ReducedZeta {
        self.rz
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.eval_tagged(z).map(|(g, _)| g)
    }

    pub fn eval_tagged(&self, z: C64) -> Result<(C64, RegionTag)> {
        let (x1, x2) = self.rz.to_reduced(z);
        let r = z.norm();
        if r < 0.01 {
            Ok((C64::new(0.0, 0.0), RegionTag::ZeroCutoff))
        } else if r < 0.5 {
            let g = fold(100.0 * x1, 100.0 * x2, &self.rz.scaled(100.0), &self.quad)?;
            Ok((g, RegionTag::Scale100))
        } else if r < 1.0 {
            let g = fold(2.0 * x1, 2.0 * x2, &self.rz.scaled(2.0), &self.quad)?;
            Ok((g, RegionTag::Scale2))
        } else if x1 < 0.0 {
            Ok((fold(x1, x2, &self.rz, &self.quad)?, RegionTag::SwitchX1))
        } else {
            Ok((green_reduced(x1, x2, &self.rz, &self.quad)?, formula_for(x1, x2)))
        }
    }

    /// G_λ(z) = e^{(i√E/2)(λz̄ + z/λ)} g_λ(z).
    pub fn eval_big_g(&self, z: C64) -> Result<C64> {
        let g = self.eval(z)?;
        if g == C64::new(0.0, 0.0) {
            return Ok(g);
        }
        Ok(cgo_exponential(z, self.lambda, self.energy) * g)
    }

    /// The region rule that applies at `z` (no quadrature).
    pub fn region(&self, z: C64) -> RegionTag {
        let (x1, x2) = self.rz.to_reduced(z);
        let r = z.norm();
        if r < 0.01 {
            RegionTag::ZeroCutoff
        } else if r < 0.5 {
            RegionTag::Scale100
        } else if r < 1.0 {
            RegionTag::Scale2
        } else if x1 < 0.0 {
            RegionTag::SwitchX1
        } else {
            formula_for(x1, x2)
        }
    }
}

/// Switching relation for x₁ < 0, then the formula for the region.
fn fold(x1: f64, x2: f64, rz: &ReducedZeta, quad: &QuadratureSpec) -> Result<C64> {
    if x1 < 0.0 {
        let g = green_reduced(-x1, x2, rz, quad)?;
        Ok(C64::from_polar(1.0, -2.0 * rz.k1 * x1) * g)
    } else {
        green_reduced(x1, x2, rz, quad)
    }
}

pub fn green_faddeev(z: C64, lambda: SpectralLambda, energy: Energy) -> Result<C64> {
    FaddeevGreen::new(lambda, energy, &GreenOptions::default())?.eval(z)
}

#[allow(non_snake_case)]
pub fn green_G(z: C64, lambda: SpectralLambda, energy: Energy) -> Result<C64> {
    FaddeevGreen::new(lambda, energy, &GreenOptions::default())?.eval_big_g(z)
}

/// g at many points in parallel; the first failure aborts.
pub fn green_table(green: &FaddeevGreen, points: &[C64]) -> Result<Vec<C64>> {
    points.par_iter().map(|&z| green.eval(z)).collect()
}

/// Writes `x1,x2,re,im` rows.
pub fn write_green_csv<W: Write>(out: W, points: &[C64], values: &[C64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "re", "im"])?;
    for (z, g) in points.iter().zip(values) {
        w.serialize((z.re, z.im, g.re, g.im))?;
    }
    w.flush()?;
    Ok(())
}
