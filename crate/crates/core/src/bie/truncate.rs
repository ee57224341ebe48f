use serde::{Deserialize, Serialize};

use super::scatter::ScatteringGrid;
use crate::error::{Error, Result};
use crate::spectral::C64;

pub const DEFAULT_R1: f64 = 1.05;

/// Rotated ellipse with semidiameters a, b plus the inner radius R1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    pub r1: f64,
}

/// How the region inside the unit circle is filled from t outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryFill {
    /// t(λ) := t(1/λ̄).
    #[default]
    Plain,
    /// t(λ) := conj t(1/λ̄), the identity obeyed by real non-radial q.
    Conjugate,
}

impl TruncationSpec {
    pub fn new(a: f64, b: f64, phi: f64, r1: f64) -> Result<Self> {
        let s = TruncationSpec { a, b, phi, r1 };
        s.validate()?;
        Ok(s)
    }

    pub fn circular(radius: f64) -> Result<Self> {
        Self::new(radius, radius, 0.0, DEFAULT_R1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 1.0 && self.r1.is_finite()) {
            return Err(Error::InvalidArgument(format!("R1 must exceed 1, got {}", self.r1)));
        }
        if !(self.a > self.r1 && self.b > self.r1 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "semidiameters a = {}, b = {} must exceed R1 = {}",
                self.a, self.b, self.r1
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidArgument("ellipse angle must be finite".into()));
        }
        Ok(())
    }

    /// r(θ) = √2ab / √((b² − a²)cos(2θ − 2φ) + a² + b²).
    pub fn radius(&self, theta: f64) -> f64 {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        std::f64::consts::SQRT_2 * self.a * self.b / ((b2 - a2) * (2.0 * theta - 2.0 * self.phi).cos() + a2 + b2).sqrt()
    }

    pub fn outer_radius(&self) -> f64 {
        self.a.max(self.b)
    }

    /// R1 < |λ| < r(θ).
    pub fn in_outer(&self, lambda: C64) -> bool {
        let rho = lambda.norm();
        rho > self.r1 && rho < self.radius(lambda.arg())
    }

    /// 1/r(θ) < |λ| < 1/R1. The boundary |λ| = 1/r(θ) is zeroed, matching
    /// the outer boundary.
    pub fn in_inner(&self, lambda: C64) -> bool {
        let rho = lambda.norm();
        rho > 0.0 && rho * self.radius(lambda.arg()) > 1.0 && rho * self.r1 < 1.0
    }
}

/// Zero outside the ellipse and on 1/R1 ≤ |λ| ≤ R1, keep t on the outer
/// region and fill the inner region from the node nearest 1/λ̄.
pub fn truncate_scattering(t: &ScatteringGrid, spec: &TruncationSpec, fill: SymmetryFill) -> Result<ScatteringGrid> {
    spec.validate()?;
    let grid = t.grid;
    let zero = C64::new(0.0, 0.0);
    let mut out = ScatteringGrid::zeros(grid);
    let outer = |i: usize| t.mask[i] && spec.in_outer(grid.point_at(i));
    for i in 0..grid.len() {
        let l = grid.point_at(i);
        if outer(i) {
            out.values[i] = t.values[i];
            out.mask[i] = true;
        } else if spec.in_inner(l) {
            let src = grid.nearest(l / l.norm_sqr()).filter(|&j| outer(j));
            if let Some(j) = src {
                out.values[i] = match fill {
                    SymmetryFill::Plain => t.values[j],
                    SymmetryFill::Conjugate => t.values[j].conj(),
                };
                out.mask[i] = true;
            }
        }
        if !out.mask[i] {
            out.values[i] = zero;
        }
    }
    Ok(out)
}
