//! Diffuse optical tomography: recover D = 1/(3(μa + μs')) from the DN map of
//! −∇·D∇u + (μa + iω/c)u = 0, rewritten as a Schrödinger problem through
//! u = D^{−1/2}v.

use serde::{Deserialize, Serialize};

use crate::bie::TruncationSpec;
use crate::error::{Error, Result};
use crate::profiles::{Bump, RadialFunction};
use crate::reconstruct::{disk_nodes, reconstruct_conductivity, ReconstructionOptions, ReconstructionResult};
use crate::spectral::{Energy, C64, I};

use super::pipeline::{scattering_pipeline, PipelineOptions, ScatteringData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotScene {
    /// Absorption μa in 1/cm; the base value is the boundary value m.
    pub mu_a: RadialFunction,
    /// Scattering μs in 1/cm.
    pub mu_s: RadialFunction,
    pub g: f64,
    /// Modulation frequency ω in 1/s.
    pub omega: f64,
    /// Speed of light in the medium, cm/s.
    pub c_medium: f64,
    /// Step of the central differences for Δ√D.
    pub fd_step: f64,
}

impl Default for DotScene {
    fn default() -> Self {
        DotScene {
            mu_a: RadialFunction {
                base: 0.1,
                bumps: vec![Bump::central(0.2, 0.45, 4)],
            },
            mu_s: RadialFunction {
                base: 10.0,
                bumps: vec![Bump::ring(20.0, 0.5, 0.3, 4)],
            },
            g: 0.6,
            omega: 1e8,
            c_medium: 3e10,
            fd_step: 1.0 / 128.0,
        }
    }
}

impl DotScene {
    pub fn homogeneous(mu_a: f64, mu_s: f64) -> Self {
        DotScene {
            mu_a: RadialFunction { base: mu_a, bumps: vec![] },
            mu_s: RadialFunction { base: mu_s, bumps: vec![] },
            ..DotScene::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("DOT scene: {what}")));
        if !(self.g >= -1.0 && self.g < 1.0) {
            return bad("anisotropy g must lie in [-1, 1)");
        }
        if !(self.omega >= 0.0 && self.c_medium > 0.0 && self.fd_step > 0.0) {
            return bad("need ω ≥ 0, c > 0 and a positive difference step");
        }
        for k in 0..=200 {
            let r = k as f64 / 200.0;
            if !(self.mu_a.value(r) > 0.0 && self.mu_s.value(r) > 0.0) {
                return bad("μa and μs must be positive");
            }
        }
        if self.mu_a.support_radius().max(self.mu_s.support_radius()) >= 1.0 {
            return bad("coefficients must be constant near the boundary");
        }
        Ok(())
    }

    pub fn diffusion(&self, r: f64) -> f64 {
        1.0 / (3.0 * (self.mu_a.value(r) + (1.0 - self.g) * self.mu_s.value(r)))
    }

    /// Boundary absorption m.
    pub fn m(&self) -> f64 {
        self.mu_a.base
    }

    /// Boundary diffusion d.
    pub fn d(&self) -> f64 {
        1.0 / (3.0 * (self.mu_a.base + (1.0 - self.g) * self.mu_s.base))
    }

    /// E = −(m/d + iω/(dc)).
    pub fn energy(&self) -> C64 {
        let d = self.d();
        -C64::new(self.m() / d, self.omega / (d * self.c_medium))
    }

    fn support(&self) -> f64 {
        self.mu_a.support_radius().max(self.mu_s.support_radius())
    }

    /// Δ√D/√D + (μa + iω/c)/D, the potential seen by the DN map.
    pub fn schrodinger_potential(&self, z: C64) -> C64 {
        let r = z.norm();
        let dr = self.diffusion(r);
        let lap = if r >= self.support() {
            0.0
        } else {
            let h = self.fd_step;
            let s = |p: C64| self.diffusion(p.norm()).sqrt();
            (s(z + h) + s(z - h) + s(z + I * h) + s(z - I * h) - 4.0 * s(z)) / (h * h)
        };
        lap / dr.sqrt() + (self.mu_a.value(r) + I * (self.omega / self.c_medium)) / dr
    }

    /// q0 = potential + E, zero near the boundary.
    pub fn q0(&self, z: C64) -> C64 {
        self.schrodinger_potential(z) + self.energy()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DotOptions {
    pub pipeline: PipelineOptions,
    pub recon: ReconstructionOptions,
    pub z_step: f64,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            pipeline: PipelineOptions::default(),
            recon: ReconstructionOptions::default(),
            z_step: 0.125,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DotReport {
    pub energy: C64,
    /// Real energy used on the inverse side.
    pub inverse_energy: f64,
    pub d: f64,
    pub data: ScatteringData,
    pub diffusion: ReconstructionResult,
    pub error: f64,
}

/// The DN data comes from the complex potential; scattering and D-bar run at
/// Re E, treating the data as if q were real.
pub fn dot_pipeline(scene: &DotScene, spec: &TruncationSpec, opts: &DotOptions) -> Result<DotReport> {
    scene.validate()?;
    let energy = scene.energy();
    let inverse = Energy::real(energy.re);
    let data = scattering_pipeline(
        |z| scene.schrodinger_potential(z),
        -energy,
        inverse,
        spec,
        &opts.pipeline,
    )?;
    let recon = ReconstructionOptions {
        boundary_sigma: scene.d(),
        ..opts.recon
    };
    let z = disk_nodes(opts.z_step, 1.0);
    let diffusion = reconstruct_conductivity(&data.truncated, inverse, &z, spec, &recon)?;
    let error = diffusion.relative_l2_error(|z| scene.diffusion(z.norm()));
    Ok(DotReport {
        energy,
        inverse_energy: energy.re,
        d: scene.d(),
        data,
        diffusion,
        error,
    })
}
