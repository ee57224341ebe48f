//! DN simulation → scattering → truncation, shared by the case runs and DOT.

use serde::{Deserialize, Serialize};

use crate::bie::{
    radial_scattering_from_dn, scattering_from_dn, truncate_scattering, BieOptions, BoundaryQuadrature, ScatteringGrid,
    SymmetryFill, TruncationSpec,
};
use crate::error::{Error, Result};
use crate::forward::{add_noise, assemble_dn, nodal_values, DNMatrix, DiskMesh};
use crate::spectral::{Energy, PeriodicGrid, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// t on the positive real axis, spread over the grid by |λ|. Only valid
    /// for radial potentials.
    Radial,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub triangles: usize,
    pub n_modes: usize,
    pub nb: usize,
    pub radial_step: f64,
    pub lambda_m: u32,
    /// λ-grid half-width as a multiple of the outer truncation radius.
    pub lambda_width_factor: f64,
    pub noise: f64,
    pub seed: u64,
    pub sweep: Sweep,
    pub fill: SymmetryFill,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            triangles: 65_000,
            n_modes: 16,
            nb: 128,
            radial_step: 0.05,
            lambda_m: 7,
            lambda_width_factor: 2.1,
            noise: 0.0,
            seed: 1,
            sweep: Sweep::Radial,
            fill: SymmetryFill::Plain,
        }
    }
}

impl PipelineOptions {
    pub fn paper_scale(self) -> Self {
        PipelineOptions {
            triangles: 1_048_576,
            nb: 256,
            lambda_m: 8,
            ..self
        }
    }

    pub fn bie(&self) -> BieOptions {
        BieOptions {
            quad: BoundaryQuadrature {
                nb: self.nb,
                ..BoundaryQuadrature::default()
            },
            ..BieOptions::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub lq: DNMatrix,
    pub l0: DNMatrix,
    pub t: ScatteringGrid,
    pub truncated: ScatteringGrid,
    /// |λ| with a failed BIE solve (radial sweep only).
    pub failed_radii: Vec<f64>,
}

/// Simulates Λ_q for q = q0 − E (the FEM sees `q_minus_e` directly) and
/// Λ for the constant `l0_potential`, then computes and truncates t at the
/// real energy `energy`.
pub fn scattering_pipeline<F: Fn(C64) -> C64 + Sync>(
    q_minus_e: F,
    l0_potential: C64,
    energy: Energy,
    spec: &TruncationSpec,
    opts: &PipelineOptions,
) -> Result<ScatteringData> {
    energy.require_negative_real()?;
    let mesh = DiskMesh::with_triangles(opts.triangles)?;
    let lq = assemble_dn(&mesh, &nodal_values(&mesh, q_minus_e), opts.n_modes)?;
    let lq = add_noise(&lq, opts.noise, opts.seed)?;
    let l0 = assemble_dn(&mesh, &nodal_values(&mesh, |_| l0_potential), opts.n_modes)?;
    scattering_from_matrices(lq, l0, energy, spec, opts)
}

/// Scattering and truncation from given DN matrices; `opts.noise` is not
/// applied here.
pub fn scattering_from_matrices(
    lq: DNMatrix,
    l0: DNMatrix,
    energy: Energy,
    spec: &TruncationSpec,
    opts: &PipelineOptions,
) -> Result<ScatteringData> {
    energy.require_negative_real()?;
    let outer = spec.outer_radius();
    let grid = PeriodicGrid::new(opts.lambda_m, opts.lambda_width_factor * outer)?;
    let bie = opts.bie();
    let mut failed_radii = Vec::new();
    let t = match opts.sweep {
        Sweep::Radial => {
            let start = 1.0 + bie.green.guard + 1e-6;
            let count = ((outer + 2.0 * opts.radial_step - start) / opts.radial_step).ceil() as usize + 1;
            let radii: Vec<f64> = (0..count).map(|k| start + opts.radial_step * k as f64).collect();
            let rows = radial_scattering_from_dn(&lq, &l0, &radii, energy, &bie);
            let mut rs = Vec::new();
            let mut vs = Vec::new();
            for (r, t) in rows {
                match t {
                    Ok(v) => {
                        rs.push(r);
                        vs.push(v);
                    }
                    Err(_) => failed_radii.push(r),
                }
            }
            if rs.len() < 2 {
                return Err(Error::InvalidArgument("radial sweep produced no usable scattering values".into()));
            }
            ScatteringGrid::from_radial(grid, &rs, &vs)?
        }
        Sweep::Grid => scattering_from_dn(&lq, &l0, grid, energy, outer + opts.radial_step, &bie)?,
    };
    let truncated = truncate_scattering(&t, spec, opts.fill)?;
    Ok(ScatteringData {
        lq,
        l0,
        t,
        truncated,
        failed_radii,
    })
}
