//! Reconstructions of the four radial test cases from simulated DN data.

use serde::{Deserialize, Serialize};

use crate::bie::TruncationSpec;
use crate::error::{Error, Result};
use crate::profiles::{case1, case2, case3, case4, PotentialProfile};
use crate::reconstruct::{
    disk_nodes, reconstruct_conductivity, reconstruct_potential, sigma_from_radial_potential, ReconstructionOptions,
    ReconstructionResult,
};
use crate::spectral::{Energy, C64};

use super::pipeline::{scattering_pipeline, PipelineOptions, ScatteringData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4];

    pub fn profile(self) -> PotentialProfile {
        match self {
            CaseId::Case1 => case1(),
            CaseId::Case2 => case2(),
            CaseId::Case3 => case3(),
            CaseId::Case4 => case4(),
        }
    }

    /// Default circular truncation radius.
    pub fn truncation_radius(self) -> f64 {
        match self {
            CaseId::Case2 => 9.0,
            CaseId::Case1 | CaseId::Case3 | CaseId::Case4 => 8.0,
        }
    }

    pub fn parse(s: &str) -> Result<CaseId> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "case1" => Ok(CaseId::Case1),
            "2" | "case2" => Ok(CaseId::Case2),
            "3" | "case3" => Ok(CaseId::Case3),
            "4" | "case4" => Ok(CaseId::Case4),
            other => Err(Error::InvalidArgument(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseOptions {
    pub energy: f64,
    pub pipeline: PipelineOptions,
    pub recon: ReconstructionOptions,
    /// Lattice step of the z nodes in the disk.
    pub z_step: f64,
    /// Samples on [0, 1] for the q0-route σ.
    pub ray_samples: usize,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions {
            energy: -1.0,
            pipeline: PipelineOptions::default(),
            recon: ReconstructionOptions::default(),
            z_step: 0.125,
            ray_samples: 41,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub case: CaseId,
    pub spec: TruncationSpec,
    pub data: ScatteringData,
    pub potential: ReconstructionResult,
    pub potential_error: f64,
    /// Present for conductivity-type cases.
    pub conductivity: Option<ConductivityReport>,
}

#[derive(Debug, Clone)]
pub struct ConductivityReport {
    pub result: ReconstructionResult,
    pub error: f64,
    /// σ from the radial ODE driven by the reconstructed q0, on `ray_samples`
    /// points of [0, 1].
    pub via_potential: Vec<f64>,
    pub via_potential_error: f64,
}

/// Simulated DN data, scattering and truncation for a case.
pub fn simulate_case(case: CaseId, spec: &TruncationSpec, opts: &CaseOptions) -> Result<ScatteringData> {
    let profile = case.profile();
    let e = Energy::real(opts.energy);
    scattering_pipeline(
        |z| C64::new(profile.value(z.norm()), 0.0) - e.value(),
        -e.value(),
        e,
        spec,
        &opts.pipeline,
    )
}

pub fn run_case(case: CaseId, spec: &TruncationSpec, opts: &CaseOptions) -> Result<CaseReport> {
    let data = simulate_case(case, spec, opts)?;
    evaluate_case(case, data, spec, opts)
}

/// Reconstructions from `data` scored against the case's true profile.
pub fn evaluate_case(case: CaseId, data: ScatteringData, spec: &TruncationSpec, opts: &CaseOptions) -> Result<CaseReport> {
    let profile = case.profile();
    let e = Energy::real(opts.energy);
    let z = disk_nodes(opts.z_step, 1.0);
    let potential = reconstruct_potential(&data.truncated, e, &z, spec, &opts.recon)?;
    let potential_error = potential.relative_l2_error(|z| profile.value(z.norm()));
    let conductivity = match &profile.sigma {
        None => None,
        Some(sigma) => {
            let recon = ReconstructionOptions {
                boundary_sigma: profile.boundary_sigma(),
                ..opts.recon
            };
            let result = reconstruct_conductivity(&data.truncated, e, &z, spec, &recon)?;
            let error = result.relative_l2_error(|z| sigma.value(z.norm()));
            let n = opts.ray_samples;
            let ray: Vec<C64> = (0..n).map(|k| C64::new(k as f64 / (n - 1) as f64, 0.0)).collect();
            let q_ray = reconstruct_potential(&data.truncated, e, &ray, spec, &opts.recon)?;
            let qv: Vec<f64> = q_ray.values.iter().map(|v| v.re).collect();
            let via_potential = sigma_from_radial_potential(&qv, profile.boundary_sigma())?;
            let via_potential_error = radial_error(&via_potential, &z, |r| sigma.value(r));
            Some(ConductivityReport {
                result,
                error,
                via_potential,
                via_potential_error,
            })
        }
    };
    Ok(CaseReport {
        case,
        spec: *spec,
        data,
        potential,
        potential_error,
        conductivity,
    })
}

/// Relative L² error over `z` of samples on r_k = k/(n−1), interpolated
/// linearly in |z|.
pub fn radial_error<F: Fn(f64) -> f64>(samples: &[f64], z: &[C64], truth: F) -> f64 {
    let n = samples.len();
    let (mut num, mut den) = (0.0, 0.0);
    for p in z {
        let x = (p.norm() * (n - 1) as f64).min((n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        let w = x - k as f64;
        let v = samples[k] * (1.0 - w) + samples[k + 1] * w;
        let t = truth(p.norm());
        num += (v - t).powi(2);
        den += t * t;
    }
    (num / den).sqrt()
}
