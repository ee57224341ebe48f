//! Radial test profiles built from polynomial bumps.
//!
//! A bump A(1 − ((r − c)/R)²)^p is C^{p−1} at its edge; conductivities use
//! p = 4 so that the derived potential Δ√σ/√σ is C².

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub radius: f64,
    pub power: i32,
}

impl Bump {
    pub fn central(amplitude: f64, radius: f64, power: i32) -> Self {
        Bump {
            amplitude,
            center: 0.0,
            radius,
            power,
        }
    }

    pub fn ring(amplitude: f64, center: f64, radius: f64, power: i32) -> Self {
        Bump {
            amplitude,
            center,
            radius,
            power,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        self.center + self.radius
    }

    /// (b, b', b'' + b'/r) at r.
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let s = (r - self.center) / self.radius;
        if s.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let p = self.power as f64;
        let w = 1.0 - s * s;
        let a = self.amplitude;
        let r2 = self.radius * self.radius;
        let b = a * w.powi(self.power);
        // d/dr w = −2s/R, d²/dr² w = −2/R².
        let db = -2.0 * a * p * s / self.radius * w.powi(self.power - 1);
        let d2b = a * p * (-2.0 / r2 * w.powi(self.power - 1)
            + (p - 1.0) * 4.0 * s * s / r2 * w.powi(self.power - 2));
        let lap = if self.center == 0.0 {
            // b'/r = −2ap/R² w^{p−1} is regular at the origin.
            d2b - 2.0 * a * p / r2 * w.powi(self.power - 1)
        } else if r > 0.0 {
            d2b + db / r
        } else {
            0.0
        };
        (b, db, lap)
    }
}

/// Sum of bumps plus a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub base: f64,
    pub bumps: Vec<Bump>,
}

impl RadialFunction {
    pub fn zero() -> Self {
        RadialFunction {
            base: 0.0,
            bumps: vec![],
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.base + self.bumps.iter().map(|b| b.eval(r).0).sum::<f64>()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(r).1).sum()
    }

    /// Δf for the radial function, f'' + f'/r.
    pub fn laplacian(&self, r: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(r).2).sum()
    }

    pub fn support_radius(&self) -> f64 {
        self.bumps.iter().map(Bump::outer_radius).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RadialFunction {
            base: self.base * factor,
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    amplitude: b.amplitude * factor,
                    ..*b
                })
                .collect(),
        }
    }
}

/// q₀ = direct + Δ√σ/√σ (the second term only when σ is given).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub direct: RadialFunction,
    pub sigma: Option<RadialFunction>,
}

impl PotentialProfile {
    pub fn direct(f: RadialFunction) -> Self {
        PotentialProfile {
            direct: f,
            sigma: None,
        }
    }

    pub fn conductivity(sigma: RadialFunction) -> Self {
        PotentialProfile {
            direct: RadialFunction::zero(),
            sigma: Some(sigma),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let mut q = self.direct.value(r);
        if let Some(s) = &self.sigma {
            let v = s.value(r);
            let d = s.derivative(r);
            q += s.laplacian(r) / (2.0 * v) - d * d / (4.0 * v * v);
        }
        q
    }

    pub fn support_radius(&self) -> f64 {
        let s = self.sigma.as_ref().map_or(0.0, RadialFunction::support_radius);
        self.direct.support_radius().max(s)
    }

    /// Boundary value of σ (1 for pure potentials).
    pub fn boundary_sigma(&self) -> f64 {
        self.sigma.as_ref().map_or(1.0, |s| s.value(1.0))
    }
}

/// Smooth positive bump.
pub fn case1() -> PotentialProfile {
    PotentialProfile::direct(RadialFunction {
        base: 0.0,
        bumps: vec![Bump::central(3.0, 0.8, 3)],
    })
}

/// Ring with a shallow negative centre.
pub fn case2() -> PotentialProfile {
    PotentialProfile::direct(RadialFunction {
        base: 0.0,
        bumps: vec![Bump::ring(4.0, 0.55, 0.35, 3), Bump::central(-1.5, 0.35, 3)],
    })
}

/// Conductivity raised in the middle.
pub fn case3_sigma() -> RadialFunction {
    RadialFunction {
        base: 1.0,
        bumps: vec![Bump::central(0.6, 0.8, 4)],
    }
}

/// Conductivity with a depressed centre and a raised ring.
pub fn case4_sigma() -> RadialFunction {
    RadialFunction {
        base: 1.0,
        bumps: vec![Bump::central(-0.35, 0.5, 4), Bump::ring(0.3, 0.55, 0.3, 4)],
    }
}

pub fn case3() -> PotentialProfile {
    PotentialProfile::conductivity(case3_sigma())
}

pub fn case4() -> PotentialProfile {
    PotentialProfile::conductivity(case4_sigma())
}

/// Test function φ of the exceptional-point families.
pub fn phi() -> RadialFunction {
    RadialFunction {
        base: 0.0,
        bumps: vec![Bump::central(1.0, 0.7, 3)],
    }
}

/// σ of the conductivity-plus-αφ family.
pub fn family_sigma() -> RadialFunction {
    RadialFunction {
        base: 1.0,
        bumps: vec![Bump::central(0.8, 0.85, 4)],
    }
}
